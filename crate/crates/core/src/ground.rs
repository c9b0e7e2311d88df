//! Linear algebra over F2: sparse vectors, sparse maps, elimination rank,
//! and the ring of orthogonal idempotents.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};

/// A vector over F2 stored as the set of basis keys with coefficient one.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct F2Vector<K: Ord> {
    support: BTreeSet<K>,
}

impl<K: Ord> Default for F2Vector<K> {
    fn default() -> Self {
        F2Vector {
            support: BTreeSet::new(),
        }
    }
}

impl<K: Ord + Clone> F2Vector<K> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn unit(key: K) -> Self {
        let mut v = Self::zero();
        v.toggle(key);
        v
    }

    /// Adds one copy of `key`; a second copy cancels the first.
    pub fn toggle(&mut self, key: K) {
        if !self.support.remove(&key) {
            self.support.insert(key);
        }
    }

    pub fn add_assign(&mut self, other: &F2Vector<K>) {
        for k in &other.support {
            self.toggle(k.clone());
        }
    }

    pub fn add(&self, other: &F2Vector<K>) -> F2Vector<K> {
        let support = self
            .support
            .symmetric_difference(&other.support)
            .cloned()
            .collect();
        F2Vector { support }
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_empty()
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn contains(&self, key: &K) -> bool {
        self.support.contains(key)
    }

    pub fn iter(&self) -> impl Iterator<Item = &K> {
        self.support.iter()
    }

    /// Applies `f` to every key and sums the images.
    pub fn map_keys<L: Ord + Clone>(&self, mut f: impl FnMut(&K) -> L) -> F2Vector<L> {
        let mut out = F2Vector::zero();
        for k in &self.support {
            out.toggle(f(k));
        }
        out
    }
}

impl<K: Ord + Clone> FromIterator<K> for F2Vector<K> {
    fn from_iter<I: IntoIterator<Item = K>>(iter: I) -> Self {
        let mut v = F2Vector::zero();
        for k in iter {
            v.toggle(k);
        }
        v
    }
}

impl<K: Ord + Clone> IntoIterator for F2Vector<K> {
    type Item = K;
    type IntoIter = std::collections::btree_set::IntoIter<K>;
    fn into_iter(self) -> Self::IntoIter {
        self.support.into_iter()
    }
}

impl<K: Ord + fmt::Debug> fmt::Debug for F2Vector<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.support.iter()).finish()
    }
}

/// A linear map between spaces with named bases. Absent keys map to zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseLinearMap<K: Ord, V: Ord> {
    entries: BTreeMap<K, F2Vector<V>>,
}

impl<K: Ord, V: Ord> Default for SparseLinearMap<K, V> {
    fn default() -> Self {
        SparseLinearMap {
            entries: BTreeMap::new(),
        }
    }
}

impl<K: Ord + Clone, V: Ord + Clone> SparseLinearMap<K, V> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: K, image: F2Vector<V>) {
        if image.is_zero() {
            self.entries.remove(&key);
        } else {
            self.entries.insert(key, image);
        }
    }

    pub fn image(&self, key: &K) -> F2Vector<V> {
        self.entries.get(key).cloned().unwrap_or_default()
    }

    pub fn apply(&self, v: &F2Vector<K>) -> F2Vector<V> {
        let mut out = F2Vector::zero();
        for k in v.iter() {
            if let Some(img) = self.entries.get(k) {
                out.add_assign(img);
            }
        }
        out
    }

    /// `self ∘ inner`.
    pub fn compose<U: Ord + Clone>(&self, inner: &SparseLinearMap<U, K>) -> SparseLinearMap<U, V> {
        let mut out = SparseLinearMap::new();
        for (k, img) in &inner.entries {
            out.set(k.clone(), self.apply(img));
        }
        out
    }

    pub fn add(&self, other: &SparseLinearMap<K, V>) -> SparseLinearMap<K, V> {
        let mut out = self.clone();
        for (k, img) in &other.entries {
            let sum = out.image(k).add(img);
            out.set(k.clone(), sum);
        }
        out
    }

    pub fn entries(&self) -> impl Iterator<Item = (&K, &F2Vector<V>)> {
        self.entries.iter()
    }

    /// Rank of the matrix of the map in the given bases.
    pub fn rank(&self, domain: &[K], codomain: &[V]) -> Result<usize>
    where
        K: fmt::Debug,
        V: fmt::Debug,
    {
        let col: BTreeMap<&V, usize> = codomain.iter().enumerate().map(|(i, v)| (v, i)).collect();
        let dom: BTreeSet<&K> = domain.iter().collect();
        for k in self.entries.keys() {
            if !dom.contains(k) {
                return Err(Error::Malformed(format!(
                    "key {k:?} outside the domain basis"
                )));
            }
        }
        let mut rows = Vec::with_capacity(domain.len());
        for k in domain {
            let mut row = BitRow::new(codomain.len());
            for v in self.image(k).iter() {
                let &j = col.get(v).ok_or_else(|| {
                    Error::Malformed(format!("key {v:?} outside the codomain basis"))
                })?;
                row.flip(j);
            }
            rows.push(row);
        }
        Ok(rank_of_rows(rows))
    }
}

/// A dense row of bits, used by elimination.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitRow {
    words: Vec<u64>,
}

impl BitRow {
    pub fn new(width: usize) -> Self {
        BitRow {
            words: vec![0; width.div_ceil(64)],
        }
    }

    pub fn flip(&mut self, i: usize) {
        self.words[i / 64] ^= 1 << (i % 64);
    }

    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn xor_with(&mut self, other: &BitRow) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, w)| **w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }
}

/// Rank over F2 of a list of rows of equal width.
pub fn rank_of_rows(mut rows: Vec<BitRow>) -> usize {
    let mut pivots: Vec<(usize, BitRow)> = Vec::new();
    for mut row in rows.drain(..) {
        for (p, prow) in &pivots {
            if row.get(*p) {
                row.xor_with(prow);
            }
        }
        if let Some(p) = row.first_one() {
            for (_, qrow) in pivots.iter_mut() {
                if qrow.get(p) {
                    qrow.xor_with(&row);
                }
            }
            pivots.push((p, row));
        }
    }
    pivots.len()
}

/// The ground ring k: the F2-span of pairwise orthogonal idempotents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdempotentRing {
    ids: Vec<String>,
}

impl IdempotentRing {
    pub fn new(ids: Vec<String>) -> Result<Self> {
        let distinct: BTreeSet<&String> = ids.iter().collect();
        if distinct.len() != ids.len() {
            return Err(Error::Malformed("repeated idempotent id".into()));
        }
        Ok(IdempotentRing { ids })
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|s| s == id)
    }

    /// e_i · e_j = δ_ij e_i.
    pub fn multiply(&self, i: usize, j: usize) -> Option<usize> {
        (i == j).then_some(i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(keys: &[&str]) -> F2Vector<String> {
        keys.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn add_cancels_in_characteristic_two() {
        assert!(v(&["x"]).add(&v(&["x"])).is_zero());
        assert_eq!(v(&["x"]).add(&v(&["y"])), v(&["x", "y"]));
        assert_eq!(v(&[]).add(&v(&["y"])), v(&["y"]));
    }

    #[test]
    fn rank_examples() {
        let basis: Vec<String> = (1..=3).map(|i| format!("x{i}")).collect();
        let zero: SparseLinearMap<String, String> = SparseLinearMap::new();
        assert_eq!(zero.rank(&basis, &basis).unwrap(), 0);

        let four: Vec<String> = (1..=4).map(|i| format!("e{i}")).collect();
        let mut id = SparseLinearMap::new();
        for k in &four {
            id.set(k.clone(), F2Vector::unit(k.clone()));
        }
        assert_eq!(id.rank(&four, &four).unwrap(), 4);

        let mut m = SparseLinearMap::new();
        m.set("x1".to_string(), v(&["y1"]));
        m.set("x2".to_string(), v(&["y1"]));
        let dom = vec!["x1".to_string(), "x2".to_string()];
        assert_eq!(m.rank(&dom, &["y1".to_string()]).unwrap(), 1);
    }

    #[test]
    fn rank_rejects_foreign_keys() {
        let mut m = SparseLinearMap::new();
        m.set("x1".to_string(), v(&["z"]));
        let err = m.rank(&["x1".to_string()], &["y".to_string()]);
        assert!(matches!(err, Err(Error::Malformed(_))));
    }

    #[test]
    fn idempotents_are_orthogonal() {
        let k = IdempotentRing::new(vec!["1".into(), "2".into()]).unwrap();
        assert_eq!(k.multiply(0, 0), Some(0));
        assert_eq!(k.multiply(0, 1), None);
        assert!(IdempotentRing::new(vec!["a".into(), "a".into()]).is_err());
    }

    fn arb_vec() -> impl Strategy<Value = F2Vector<u8>> {
        proptest::collection::vec(0u8..64, 0..64).prop_map(|ks| ks.into_iter().collect())
    }

    fn arb_map(dom: u8, cod: u8) -> impl Strategy<Value = SparseLinearMap<u8, u8>> {
        proptest::collection::vec(proptest::collection::vec(0..cod, 0..6), dom as usize).prop_map(
            |imgs| {
                let mut m = SparseLinearMap::new();
                for (i, img) in imgs.into_iter().enumerate() {
                    m.set(i as u8, img.into_iter().collect());
                }
                m
            },
        )
    }

    proptest! {
        #[test]
        fn vector_space_laws(a in arb_vec(), b in arb_vec(), c in arb_vec()) {
            prop_assert!(a.add(&a).is_zero());
            prop_assert_eq!(a.add(&b), b.add(&a));
            prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
        }

        #[test]
        fn rank_bounds(m in arb_map(7, 5), n in arb_map(6, 7)) {
            let d6: Vec<u8> = (0..6).collect();
            let d7: Vec<u8> = (0..7).collect();
            let d5: Vec<u8> = (0..5).collect();
            let rm = m.rank(&d7, &d5).unwrap();
            let rn = n.rank(&d6, &d7).unwrap();
            let rmn = m.compose(&n).rank(&d6, &d5).unwrap();
            prop_assert!(rm <= 5);
            prop_assert!(rmn <= rm.min(rn));
        }

        #[test]
        fn composition_is_associative(a in arb_map(5, 5), b in arb_map(5, 5), c in arb_map(5, 5)) {
            prop_assert_eq!(a.compose(&b).compose(&c), a.compose(&b.compose(&c)));
        }
    }
}
