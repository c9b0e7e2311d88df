//! Arc diagrams and their chord algebras.
//!
//! Points on each circle are listed in orientation order starting just after
//! the basepoint, so a chord is a pair of positions `start < end` on one
//! circle and can never cross the basepoint.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, BTreeSet};
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ground::{F2Vector, IdempotentRing};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircleSpec {
    pub id: String,
    pub points: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairSpec {
    pub arc: String,
    pub points: [String; 2],
}

/// On-disk form of an arc diagram.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArcDiagramSpec {
    pub genus: usize,
    pub circles: Vec<CircleSpec>,
    pub matched_pairs: Vec<PairSpec>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArcDiagram {
    spec: ArcDiagramSpec,
    /// point id -> (circle index, position)
    location: BTreeMap<String, (usize, usize)>,
    /// point id -> matched pair index
    pair_of: BTreeMap<String, usize>,
}

pub(crate) fn valid_id(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

impl ArcDiagram {
    pub fn new(spec: ArcDiagramSpec) -> Result<Self> {
        let mut location = BTreeMap::new();
        for (ci, c) in spec.circles.iter().enumerate() {
            if !valid_id(&c.id) {
                return Err(Error::Malformed(format!("bad circle id {:?}", c.id)));
            }
            for (pi, p) in c.points.iter().enumerate() {
                if !valid_id(p) {
                    return Err(Error::Malformed(format!("bad point id {p:?}")));
                }
                if location.insert(p.clone(), (ci, pi)).is_some() {
                    return Err(Error::Malformed(format!("point {p} listed twice")));
                }
            }
        }
        let mut pair_of = BTreeMap::new();
        let mut arcs = BTreeSet::new();
        for (ai, pair) in spec.matched_pairs.iter().enumerate() {
            if !valid_id(&pair.arc) || !arcs.insert(pair.arc.clone()) {
                return Err(Error::Malformed(format!(
                    "bad or repeated arc id {:?}",
                    pair.arc
                )));
            }
            if pair.points[0] == pair.points[1] {
                return Err(Error::Malformed(format!(
                    "arc {} pairs a point with itself",
                    pair.arc
                )));
            }
            for p in &pair.points {
                if !location.contains_key(p) {
                    return Err(Error::Malformed(format!(
                        "arc {} uses unknown point {p}",
                        pair.arc
                    )));
                }
                if pair_of.insert(p.clone(), ai).is_some() {
                    return Err(Error::Malformed(format!(
                        "point {p} is in two matched pairs"
                    )));
                }
            }
        }
        if pair_of.len() != location.len() {
            let lonely: Vec<&String> = location
                .keys()
                .filter(|p| !pair_of.contains_key(*p))
                .collect();
            return Err(Error::Malformed(format!("unmatched points {lonely:?}")));
        }
        let b = spec.circles.len();
        if b == 0 {
            return Err(Error::Malformed("arc diagram without circles".into()));
        }
        let expected = 2 * (spec.genus + b - 1);
        if spec.matched_pairs.len() != expected {
            return Err(Error::Invalid(format!(
                "genus {} with {} circles needs {} matched pairs, found {}",
                spec.genus,
                b,
                expected,
                spec.matched_pairs.len()
            )));
        }
        Ok(ArcDiagram {
            spec,
            location,
            pair_of,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::new(serde_json::from_str(text)?)
    }

    pub fn spec(&self) -> &ArcDiagramSpec {
        &self.spec
    }

    pub fn genus(&self) -> usize {
        self.spec.genus
    }

    pub fn circles(&self) -> &[CircleSpec] {
        &self.spec.circles
    }

    pub fn pairs(&self) -> &[PairSpec] {
        &self.spec.matched_pairs
    }

    pub fn num_points(&self) -> usize {
        self.location.len()
    }

    pub fn location(&self, point: &str) -> Option<(usize, usize)> {
        self.location.get(point).copied()
    }

    pub fn pair_of(&self, point: &str) -> Option<usize> {
        self.pair_of.get(point).copied()
    }

    pub fn point(&self, circle: usize, pos: usize) -> &str {
        &self.spec.circles[circle].points[pos]
    }

    pub fn pair_at(&self, circle: usize, pos: usize) -> usize {
        self.pair_of[self.point(circle, pos)]
    }

    pub fn arc_index(&self, arc: &str) -> Option<usize> {
        self.spec.matched_pairs.iter().position(|p| p.arc == arc)
    }

    /// Isomorphism up to renaming circles, points and arcs.
    pub fn is_isomorphic(&self, other: &ArcDiagram) -> bool {
        if self.spec.genus != other.spec.genus
            || self.circles().len() != other.circles().len()
            || self.num_points() != other.num_points()
        {
            return false;
        }
        let ours = self.position_pairs();
        let n = self.circles().len();
        let mut perm: Vec<usize> = (0..n).collect();
        loop {
            let sizes_match = (0..n)
                .all(|i| self.circles()[i].points.len() == other.circles()[perm[i]].points.len());
            if sizes_match {
                let mapped: BTreeSet<[(usize, usize); 2]> = ours
                    .iter()
                    .map(|pair| {
                        let mut q = pair.map(|(c, p)| (perm[c], p));
                        q.sort();
                        q
                    })
                    .collect();
                if mapped == other.position_pairs() {
                    return true;
                }
            }
            if !next_permutation(&mut perm) {
                return false;
            }
        }
    }

    fn position_pairs(&self) -> BTreeSet<[(usize, usize); 2]> {
        self.pairs()
            .iter()
            .map(|p| {
                let mut q = [self.location[&p.points[0]], self.location[&p.points[1]]];
                q.sort();
                q
            })
            .collect()
    }
}

pub(crate) fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// A chord on one circle, from position `start` to position `end`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Chord {
    pub circle: u16,
    pub start: u16,
    pub end: u16,
}

impl Chord {
    pub fn len(&self) -> usize {
        (self.end - self.start) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_short(&self) -> bool {
        self.end == self.start + 1
    }
}

/// A basis element of B(Z): an idempotent (by matched-pair index) or a chord.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AlgBasis {
    Idem(usize),
    Chord(Chord),
}

impl AlgBasis {
    pub fn as_chord(&self) -> Option<Chord> {
        match self {
            AlgBasis::Chord(c) => Some(*c),
            AlgBasis::Idem(_) => None,
        }
    }
}

/// An element of B(Z) tagged with the algebra it belongs to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraElement {
    pub tag: u64,
    pub terms: F2Vector<AlgBasis>,
}

/// The chord algebra B(Z).
#[derive(Clone, Debug)]
pub struct Algebra {
    z: ArcDiagram,
    ring: IdempotentRing,
    prefix: char,
    tag: u64,
}

impl PartialEq for Algebra {
    fn eq(&self, other: &Self) -> bool {
        self.tag == other.tag
    }
}

impl Algebra {
    /// `prefix` is the letter used to print idempotents, e.g. `I` or `J`.
    pub fn new(z: ArcDiagram, prefix: char) -> Self {
        let ring = IdempotentRing::new(z.pairs().iter().map(|p| p.arc.clone()).collect())
            .expect("arc ids are distinct after validation");
        let mut h = DefaultHasher::new();
        serde_json::to_string(z.spec()).unwrap().hash(&mut h);
        prefix.hash(&mut h);
        Algebra {
            z,
            ring,
            prefix,
            tag: h.finish(),
        }
    }

    pub fn diagram(&self) -> &ArcDiagram {
        &self.z
    }

    pub fn ring(&self) -> &IdempotentRing {
        &self.ring
    }

    pub fn tag(&self) -> u64 {
        self.tag
    }

    pub fn num_idempotents(&self) -> usize {
        self.ring.len()
    }

    pub fn chords(&self) -> Vec<Chord> {
        let mut out = Vec::new();
        for (ci, c) in self.z.circles().iter().enumerate() {
            let n = c.points.len() as u16;
            for s in 0..n {
                for e in s + 1..n {
                    out.push(Chord {
                        circle: ci as u16,
                        start: s,
                        end: e,
                    });
                }
            }
        }
        out
    }

    pub fn short_chords(&self) -> Vec<Chord> {
        self.chords().into_iter().filter(|c| c.is_short()).collect()
    }

    pub fn basis(&self) -> Vec<AlgBasis> {
        (0..self.num_idempotents())
            .map(AlgBasis::Idem)
            .chain(self.chords().into_iter().map(AlgBasis::Chord))
            .collect()
    }

    /// Matched pair of the chord's initial point.
    pub fn chord_left_idem(&self, c: Chord) -> usize {
        self.z.pair_at(c.circle as usize, c.start as usize)
    }

    /// Matched pair of the chord's final point.
    pub fn chord_right_idem(&self, c: Chord) -> usize {
        self.z.pair_at(c.circle as usize, c.end as usize)
    }

    pub fn left_idem(&self, a: AlgBasis) -> usize {
        match a {
            AlgBasis::Idem(i) => i,
            AlgBasis::Chord(c) => self.chord_left_idem(c),
        }
    }

    pub fn right_idem(&self, a: AlgBasis) -> usize {
        match a {
            AlgBasis::Idem(i) => i,
            AlgBasis::Chord(c) => self.chord_right_idem(c),
        }
    }

    pub fn mul_basis(&self, a: AlgBasis, b: AlgBasis) -> Option<AlgBasis> {
        match (a, b) {
            (AlgBasis::Idem(i), AlgBasis::Idem(j)) => self.ring.multiply(i, j).map(AlgBasis::Idem),
            (AlgBasis::Idem(i), AlgBasis::Chord(c)) => (self.chord_left_idem(c) == i).then_some(b),
            (AlgBasis::Chord(c), AlgBasis::Idem(i)) => (self.chord_right_idem(c) == i).then_some(a),
            (AlgBasis::Chord(c), AlgBasis::Chord(d)) => self.mul_chords(c, d).map(AlgBasis::Chord),
        }
    }

    pub fn mul_chords(&self, c: Chord, d: Chord) -> Option<Chord> {
        (c.circle == d.circle && c.end == d.start).then_some(Chord {
            circle: c.circle,
            start: c.start,
            end: d.end,
        })
    }

    pub fn element(&self, terms: F2Vector<AlgBasis>) -> AlgebraElement {
        AlgebraElement {
            tag: self.tag,
            terms,
        }
    }

    pub fn unit(&self) -> AlgebraElement {
        self.element((0..self.num_idempotents()).map(AlgBasis::Idem).collect())
    }

    pub fn multiply(&self, a: &AlgebraElement, b: &AlgebraElement) -> Result<AlgebraElement> {
        if a.tag != self.tag || b.tag != self.tag {
            return Err(Error::Mismatch(
                "elements of different algebras multiplied".into(),
            ));
        }
        let mut out = F2Vector::zero();
        for x in a.terms.iter() {
            for y in b.terms.iter() {
                if let Some(p) = self.mul_basis(*x, *y) {
                    out.toggle(p);
                }
            }
        }
        Ok(self.element(out))
    }

    /// Splits a chord into the short chords that compose it, in order.
    pub fn factor_short(&self, c: Chord) -> Vec<Chord> {
        (c.start..c.end)
            .map(|s| Chord {
                circle: c.circle,
                start: s,
                end: s + 1,
            })
            .collect()
    }

    pub fn chord_name(&self, c: Chord) -> String {
        format!(
            "{}-{}",
            self.z.point(c.circle as usize, c.start as usize),
            self.z.point(c.circle as usize, c.end as usize)
        )
    }

    pub fn idem_name(&self, i: usize) -> String {
        format!("{}{}", self.prefix, self.ring.ids()[i])
    }

    pub fn basis_name(&self, a: AlgBasis) -> String {
        match a {
            AlgBasis::Idem(i) => self.idem_name(i),
            AlgBasis::Chord(c) => self.chord_name(c),
        }
    }

    pub fn parse_chord(&self, s: &str) -> Result<Chord> {
        let (a, b) = s
            .split_once('-')
            .ok_or_else(|| Error::Malformed(format!("chord {s:?} is not of the form p-q")))?;
        let (ca, pa) = self
            .z
            .location(a)
            .ok_or_else(|| Error::Malformed(format!("unknown point {a}")))?;
        let (cb, pb) = self
            .z
            .location(b)
            .ok_or_else(|| Error::Malformed(format!("unknown point {b}")))?;
        if ca != cb || pa >= pb {
            return Err(Error::Malformed(format!("{s} is not a chord")));
        }
        Ok(Chord {
            circle: ca as u16,
            start: pa as u16,
            end: pb as u16,
        })
    }

    pub fn parse_idem(&self, s: &str) -> Result<usize> {
        s.strip_prefix(self.prefix)
            .and_then(|id| self.ring.index_of(id))
            .ok_or_else(|| Error::Malformed(format!("unknown idempotent {s}")))
    }

    pub fn parse_basis(&self, s: &str) -> Result<AlgBasis> {
        if s.contains('-') {
            self.parse_chord(s).map(AlgBasis::Chord)
        } else {
            self.parse_idem(s).map(AlgBasis::Idem)
        }
    }

    /// True when consecutive chords can be tensored over the idempotent ring,
    /// i.e. the final pair of each equals the initial pair of the next.
    pub fn composable(&self, seq: &[Chord]) -> bool {
        seq.windows(2)
            .all(|w| self.chord_right_idem(w[0]) == self.chord_left_idem(w[1]))
    }

    /// All composable chord sequences of total length at most `max_total`,
    /// the empty sequence first, then by length and lexicographically.
    pub fn composable_sequences(&self, max_total: usize) -> Vec<Vec<Chord>> {
        let chords = self.chords();
        let mut out = vec![Vec::new()];
        let mut frontier: Vec<(Vec<Chord>, usize)> = vec![(Vec::new(), 0)];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for (seq, total) in &frontier {
                for c in &chords {
                    let t = total + c.len();
                    if t > max_total {
                        continue;
                    }
                    if let Some(last) = seq.last() {
                        if self.chord_right_idem(*last) != self.chord_left_idem(*c) {
                            continue;
                        }
                    }
                    let mut s = seq.clone();
                    s.push(*c);
                    out.push(s.clone());
                    next.push((s, t));
                }
            }
            frontier = next;
        }
        out
    }
}

/// Outcome of checking associativity and the unit law on every basis triple.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Soundness {
    pub dimension: usize,
    pub idempotents: usize,
    pub chords: usize,
    pub triples_checked: usize,
    pub associativity_failures: Vec<String>,
    pub unit_failures: Vec<String>,
}

impl Soundness {
    pub fn ok(&self) -> bool {
        self.associativity_failures.is_empty() && self.unit_failures.is_empty()
    }
}

/// Checks (ab)c = a(bc) on all basis triples and 1·a = a·1 = a.
pub fn check_soundness(alg: &Algebra) -> Soundness {
    let basis = alg.basis();
    let mut out = Soundness {
        dimension: basis.len(),
        idempotents: alg.num_idempotents(),
        chords: basis.len() - alg.num_idempotents(),
        triples_checked: 0,
        associativity_failures: Vec::new(),
        unit_failures: Vec::new(),
    };
    for &a in &basis {
        for &b in &basis {
            for &c in &basis {
                let ab_c = alg.mul_basis(a, b).and_then(|ab| alg.mul_basis(ab, c));
                let a_bc = alg.mul_basis(b, c).and_then(|bc| alg.mul_basis(a, bc));
                if ab_c != a_bc {
                    out.associativity_failures.push(format!(
                        "({}·{})·{}",
                        alg.basis_name(a),
                        alg.basis_name(b),
                        alg.basis_name(c)
                    ));
                }
                out.triples_checked += 1;
            }
        }
    }
    let one = alg.unit();
    for &a in &basis {
        let e = alg.element(F2Vector::unit(a));
        let left = alg.multiply(&one, &e).ok();
        let right = alg.multiply(&e, &one).ok();
        if left.as_ref() != Some(&e) || right.as_ref() != Some(&e) {
            out.unit_failures.push(alg.basis_name(a));
        }
    }
    out
}
