//! Bigon cancellation, minimal models, homology by idempotent block, and
//! isomorphism search between reduced bimodules.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::arc_algebra::{AlgBasis, Algebra, Chord};
use crate::bimodules::{
    aa_keys, da_keys, m_basis, AaKey, AaModule, DaModule, DaTerm, GenInfo, Morphism, TableAa,
    TableDa,
};
use crate::error::{Error, Result};
use crate::ground::{rank_of_rows, BitRow, F2Vector};

/// A k-linear map on generators: entry `i` is the image of generator `i`.
pub type LinearMap = Vec<F2Vector<usize>>;

fn apply(map: &LinearMap, v: &F2Vector<usize>) -> F2Vector<usize> {
    let mut out = F2Vector::zero();
    for k in v.iter() {
        out.add_assign(&map[*k]);
    }
    out
}

/// `outer ∘ inner`.
fn compose_linear(outer: &LinearMap, inner: &LinearMap) -> LinearMap {
    inner.iter().map(|v| apply(outer, v)).collect()
}

fn add_linear(a: &LinearMap, b: &LinearMap) -> LinearMap {
    a.iter().zip(b).map(|(x, y)| x.add(y)).collect()
}

/// The chain-level part of a morphism, as a linear map on `n` generators.
pub fn chain_part(f: &Morphism, n: usize) -> LinearMap {
    (0..n).map(|x| f.get(&[], x, &[])).collect()
}

/// Inverts the matrix whose row `a` expresses new basis vector `a` in old
/// coordinates. Row `k` of the result expresses old vector `k` in new ones.
fn invert(rows: &[F2Vector<usize>]) -> Option<LinearMap> {
    let n = rows.len();
    let mut aug: Vec<BitRow> = rows
        .iter()
        .enumerate()
        .map(|(a, v)| {
            let mut r = BitRow::new(2 * n);
            for k in v.iter() {
                r.flip(*k);
            }
            r.flip(n + a);
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&i| aug[i].get(col))?;
        aug.swap(col, pivot);
        let prow = aug[col].clone();
        for (i, row) in aug.iter_mut().enumerate() {
            if i != col && row.get(col) {
                row.xor_with(&prow);
            }
        }
    }
    Some(
        aug.iter()
            .map(|r| (0..n).filter(|b| r.get(n + b)).collect::<Vec<_>>())
            .map(|v| {
                let mut out = F2Vector::zero();
                for b in v {
                    out.toggle(b);
                }
                out
            })
            .collect(),
    )
}

/// A module rewritten in a new basis together with the coordinate changes.
#[derive(Clone, Debug)]
pub struct BasisChange {
    pub module: TableAa,
    /// Old generator `k` in new coordinates.
    pub to_new: LinearMap,
    /// New generator `a` in old coordinates.
    pub to_old: LinearMap,
}

fn rewrite_aa(m: &TableAa, to_old: &LinearMap, to_new: &LinearMap) -> TableAa {
    let left = m.left_algebra().clone();
    let right = m.right_algebra().clone();
    let gens = m.generators().to_vec();
    let mut out = TableAa::new(left.clone(), right.clone(), gens.clone(), m.bound());
    for (l, a, r) in aa_keys(&left, &right, &gens, m.bound()) {
        let mut v = F2Vector::zero();
        for k in to_old[a].iter() {
            v.add_assign(&m.get(&(l.clone(), *k, r.clone())));
        }
        out.set((l, a, r), apply(to_new, &v));
    }
    out
}

fn bigon_rows(
    n: usize,
    d: impl Fn(usize) -> F2Vector<usize>,
    x1: usize,
    x2: usize,
) -> Result<LinearMap> {
    if x1 >= n || x2 >= n || x1 == x2 || !d(x1).contains(&x2) {
        return Err(Error::Invalid(
            "the second generator is not a summand of m1 of the first".into(),
        ));
    }
    Ok((0..n)
        .map(|i| {
            if i == x1 {
                F2Vector::unit(x1)
            } else if i == x2 {
                d(x1)
            } else {
                let mut v = F2Vector::unit(i);
                if d(i).contains(&x2) {
                    v.toggle(x1);
                }
                v
            }
        })
        .collect())
}

/// Rewrites M in the basis x̃1 = x1, x̃2 = m1(x1), x̃i = xi + x1 when
/// xi → x2, in which the arrow x̃1 → x̃2 is the only one touching either.
pub fn isolate_bigon_with_maps(m: &TableAa, x1: usize, x2: usize) -> Result<BasisChange> {
    let to_old = bigon_rows(m.generators().len(), |x| m.differential(x), x1, x2)?;
    let to_new =
        invert(&to_old).ok_or_else(|| Error::Invalid("basis change is singular".into()))?;
    Ok(BasisChange {
        module: rewrite_aa(m, &to_old, &to_new),
        to_new,
        to_old,
    })
}

/// Rewrites M in the basis whose vector `a` is `to_old[a]` in old
/// coordinates. Each new vector must lie in a single idempotent block.
pub fn change_basis(m: &TableAa, to_old: &LinearMap) -> Result<TableAa> {
    let gens = m.generators();
    if to_old.len() != gens.len() {
        return Err(Error::Invalid("basis change has the wrong size".into()));
    }
    for (a, v) in to_old.iter().enumerate() {
        if v.iter()
            .any(|k| gens[*k].left != gens[a].left || gens[*k].right != gens[a].right)
        {
            return Err(Error::Invalid(format!(
                "new vector {a} mixes idempotent blocks"
            )));
        }
    }
    let to_new = invert(to_old).ok_or_else(|| Error::Invalid("basis change is singular".into()))?;
    Ok(rewrite_aa(m, to_old, &to_new))
}

/// The module in the isolating basis for the arrow x1 → x2.
pub fn isolate_bigon(m: &TableAa, x1: usize, x2: usize) -> Result<TableAa> {
    Ok(isolate_bigon_with_maps(m, x1, x2)?.module)
}

/// True when x1 → x2 is the only m1 arrow touching x1 or x2.
pub fn is_isolated(m: &TableAa, x1: usize, x2: usize) -> bool {
    m.differential(x1) == F2Vector::unit(x2)
        && m.differential(x2).is_zero()
        && (0..m.generators().len()).filter(|&i| i != x1).all(|i| {
            let d = m.differential(i);
            !d.contains(&x1) && !d.contains(&x2)
        })
}

/// Output of a cancellation or a full reduction.
#[derive(Clone, Debug)]
pub struct ReductionResult {
    pub reduced: TableAa,
    /// reduced → original.
    pub include: Morphism,
    /// original → reduced.
    pub project: Morphism,
    /// Chain homotopy on the original carrier with
    /// include∘project + id = m1∘T + T∘m1.
    pub homotopy: LinearMap,
    /// Generator ids of the cancelled pairs, in order.
    pub cancelled: Vec<(String, String)>,
}

/// Where a zig-zag chain ends.
#[derive(Clone, Copy)]
enum End {
    /// The final output is kept as it is.
    Raw,
    /// The final output goes through T.
    Homotopy,
}

struct Zigzag<'a> {
    m: &'a TableAa,
    x1: usize,
    x2: usize,
}

impl Zigzag<'_> {
    fn t(&self, v: &F2Vector<usize>) -> F2Vector<usize> {
        if v.contains(&self.x2) {
            F2Vector::unit(self.x1)
        } else {
            F2Vector::zero()
        }
    }

    /// Sums over all ways of consuming `l[li..]` and `r[rj..]` in nonempty
    /// blocks starting from generator `z`, with T between blocks.
    #[allow(clippy::too_many_arguments)]
    fn walk(
        &self,
        l: &[Chord],
        r: &[Chord],
        li: usize,
        rj: usize,
        z: usize,
        end: End,
        acc: &mut F2Vector<usize>,
    ) {
        for li2 in li..=l.len() {
            for rj2 in rj..=r.len() {
                if (li2, rj2) == (li, rj) {
                    continue;
                }
                let w = self.m.get(&(l[li..li2].to_vec(), z, r[rj..rj2].to_vec()));
                if w.is_zero() {
                    continue;
                }
                if (li2, rj2) == (l.len(), r.len()) {
                    match end {
                        End::Raw => acc.add_assign(&w),
                        End::Homotopy => acc.add_assign(&self.t(&w)),
                    }
                } else if w.contains(&self.x2) {
                    self.walk(l, r, li2, rj2, self.x1, end, acc);
                }
            }
        }
    }
}

/// Cancels an isolated arrow x1 → x2 and transfers the A∞ structure to the
/// remaining generators, up to `bound`.
pub fn cancel(m: &TableAa, x1: usize, x2: usize, bound: usize) -> Result<ReductionResult> {
    if !is_isolated(m, x1, x2) {
        return Err(Error::Invalid(format!(
            "{} → {} is not an isolated arrow",
            m.generators()[x1].id,
            m.generators()[x2].id
        )));
    }
    let bound = bound.min(m.bound());
    let n = m.generators().len();
    let kept: Vec<usize> = (0..n).filter(|&i| i != x1 && i != x2).collect();
    let mut new_index = vec![usize::MAX; n];
    for (i, k) in kept.iter().enumerate() {
        new_index[*k] = i;
    }
    let g = |v: &F2Vector<usize>| -> F2Vector<usize> {
        let mut out = F2Vector::zero();
        for k in v.iter() {
            if new_index[*k] != usize::MAX {
                out.toggle(new_index[*k]);
            }
        }
        out
    };
    let gens: Vec<GenInfo> = kept.iter().map(|k| m.generators()[*k].clone()).collect();
    let left = m.left_algebra().clone();
    let right = m.right_algebra().clone();
    let z = Zigzag { m, x1, x2 };

    let mut reduced = TableAa::new(left.clone(), right.clone(), gens.clone(), bound);
    let mut include = Morphism::zero();
    for (l, y, r) in aa_keys(&left, &right, &gens, bound) {
        let x = kept[y];
        if l.is_empty() && r.is_empty() {
            reduced.set((l, y, r), g(&m.differential(x)));
            include.set((Vec::new(), y, Vec::new()), F2Vector::unit(x));
            continue;
        }
        let mut raw = F2Vector::zero();
        z.walk(&l, &r, 0, 0, x, End::Raw, &mut raw);
        reduced.set((l.clone(), y, r.clone()), g(&raw));
        let mut up = F2Vector::zero();
        z.walk(&l, &r, 0, 0, x, End::Homotopy, &mut up);
        include.set((l, y, r), up);
    }

    let mut project = Morphism::zero();
    for (l, x, r) in aa_keys(&left, &right, m.generators(), bound) {
        if l.is_empty() && r.is_empty() {
            project.set((l, x, r), g(&F2Vector::unit(x)));
            continue;
        }
        if x != x2 {
            continue;
        }
        let mut raw = F2Vector::zero();
        z.walk(&l, &r, 0, 0, x1, End::Raw, &mut raw);
        project.set((l, x, r), g(&raw));
    }

    let homotopy = (0..n)
        .map(|i| {
            if i == x2 {
                F2Vector::unit(x1)
            } else {
                F2Vector::zero()
            }
        })
        .collect();
    Ok(ReductionResult {
        reduced,
        include,
        project,
        homotopy,
        cancelled: vec![(m.generators()[x1].id.clone(), m.generators()[x2].id.clone())],
    })
}

/// Conjugates a morphism's chain part by a strict basis change.
fn strict(map: &LinearMap) -> Morphism {
    let mut f = Morphism::zero();
    for (x, v) in map.iter().enumerate() {
        f.set((Vec::new(), x, Vec::new()), v.clone());
    }
    f
}

/// Isolates and cancels the arrow x1 → x2 of M, expressing the maps in the
/// original basis.
pub fn cancel_arrow(m: &TableAa, x1: usize, x2: usize, bound: usize) -> Result<ReductionResult> {
    let bound = bound.min(m.bound());
    let change = isolate_bigon_with_maps(m, x1, x2)?;
    let mut step = cancel(&change.module, x1, x2, bound)?;
    let to_new = strict(&change.to_new);
    let to_old = strict(&change.to_old);
    step.include = crate::bimodules::compose(&to_old, &step.include, &step.reduced, bound);
    step.project = crate::bimodules::compose(&step.project, &to_new, m, bound);
    step.homotopy = compose_linear(
        &change.to_old,
        &compose_linear(&step.homotopy, &change.to_new),
    );
    step.cancelled = vec![(m.generators()[x1].id.clone(), m.generators()[x2].id.clone())];
    Ok(step)
}

/// The arrow (x1, x2) of m1 with lexicographically least generator ids.
fn least_arrow(m: &TableAa) -> Option<(usize, usize)> {
    let gens = m.generators();
    (0..gens.len())
        .flat_map(|x| {
            m.differential(x)
                .into_iter()
                .filter(move |y| *y != x)
                .map(move |y| (x, y))
        })
        .min_by(|a, b| (&gens[a.0].id, &gens[a.1].id).cmp(&(&gens[b.0].id, &gens[b.1].id)))
}

/// Cancels arrows until m1 vanishes, returning a minimal model.
pub fn reduce(m: &TableAa, bound: usize) -> Result<ReductionResult> {
    let bound = bound.min(m.bound());
    let n = m.generators().len();
    let mut result = ReductionResult {
        reduced: m.clone(),
        include: Morphism::identity(n),
        project: Morphism::identity(n),
        homotopy: vec![F2Vector::zero(); n],
        cancelled: Vec::new(),
    };
    if bound < m.bound() {
        result.reduced = truncate_aa(m, bound);
    }
    while let Some((x1, x2)) = least_arrow(&result.reduced) {
        let step = cancel_arrow(&result.reduced, x1, x2, bound)?;
        let current = &result.reduced;
        let f1 = chain_part(&result.include, current.generators().len());
        let g1 = chain_part(&result.project, n);
        // T = T1 + f1 ∘ T2 ∘ g1
        let inner = compose_linear(&f1, &compose_linear(&step.homotopy, &g1));
        result.homotopy = add_linear(&result.homotopy, &inner);
        result.include =
            crate::bimodules::compose(&result.include, &step.include, &step.reduced, bound);
        result.project = crate::bimodules::compose(&step.project, &result.project, m, bound);
        result.cancelled.extend(step.cancelled);
        result.reduced = step.reduced;
    }
    Ok(result)
}

fn truncate_aa(m: &TableAa, bound: usize) -> TableAa {
    let mut out = TableAa::new(
        m.left_algebra().clone(),
        m.right_algebra().clone(),
        m.generators().to_vec(),
        bound,
    );
    for (l, x, r) in aa_keys(m.left_algebra(), m.right_algebra(), m.generators(), bound) {
        let v = m.get(&(l.clone(), x, r.clone()));
        out.set((l, x, r), v);
    }
    out
}

/// Homology ranks indexed by (left idempotent, right idempotent).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomologyBlocks {
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    pub ranks: Vec<Vec<usize>>,
}

impl HomologyBlocks {
    /// True when the rank matrix is square with ones on the diagonal and
    /// zeros elsewhere.
    pub fn is_identity(&self) -> bool {
        self.ranks.len() == self.cols.len()
            && self.ranks.iter().enumerate().all(|(j, row)| {
                row.iter()
                    .enumerate()
                    .all(|(i, r)| *r == usize::from(i == j))
            })
    }
}

/// Ranks of H_*(carrier, m1) in each idempotent block.
pub fn homology_blocks<M: AaModule + ?Sized>(m: &M) -> Result<HomologyBlocks> {
    let left = m.left_algebra();
    let right = m.right_algebra();
    let gens = m.generators();
    let mut ranks = vec![vec![0; right.num_idempotents()]; left.num_idempotents()];
    for (j, row) in ranks.iter_mut().enumerate() {
        for (i, cell) in row.iter_mut().enumerate() {
            let block: Vec<usize> = (0..gens.len())
                .filter(|&x| gens[x].left == j && gens[x].right == i)
                .collect();
            let mut rows = Vec::new();
            for x in &block {
                let mut r = BitRow::new(block.len());
                for y in m.m_chords(&[], *x, &[])?.iter() {
                    let pos = block
                        .iter()
                        .position(|b| b == y)
                        .ok_or_else(|| Error::Invalid("m1 leaves its idempotent block".into()))?;
                    r.flip(pos);
                }
                rows.push(r);
            }
            *cell = block.len() - 2 * rank_of_rows(rows);
        }
    }
    Ok(HomologyBlocks {
        rows: (0..left.num_idempotents())
            .map(|j| left.idem_name(j))
            .collect(),
        cols: (0..right.num_idempotents())
            .map(|i| right.idem_name(i))
            .collect(),
        ranks,
    })
}

/// Result of an isomorphism search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum IsoVerdict {
    /// An invertible chain-level map, given generator by generator, that
    /// extends to an isomorphism up to `bound`. `strict` is true when the
    /// extension needs no higher components.
    Yes {
        bound: usize,
        map: Vec<(String, Vec<String>)>,
        strict: bool,
    },
    No {
        reason: String,
    },
    Inconclusive {
        reason: String,
    },
}

impl IsoVerdict {
    pub fn is_yes(&self) -> bool {
        matches!(self, IsoVerdict::Yes { .. })
    }
}

/// Upper limit on the number of chain-level candidates tried.
pub const MAX_ISO_CANDIDATES: usize = 1 << 16;

/// Invertible k×k matrices over F2 as row bitmasks, permutations first.
fn invertible_matrices(k: usize) -> Vec<Vec<u32>> {
    let mut out: Vec<Vec<u32>> = Vec::new();
    let n = 1usize << (k * k);
    for code in 0..n {
        let rows: Vec<u32> = (0..k)
            .map(|i| ((code >> (i * k)) & ((1 << k) - 1)) as u32)
            .collect();
        let bit_rows = rows
            .iter()
            .map(|r| {
                let mut b = BitRow::new(k);
                for j in 0..k {
                    if r >> j & 1 == 1 {
                        b.flip(j);
                    }
                }
                b
            })
            .collect();
        if rank_of_rows(bit_rows) == k {
            out.push(rows);
        }
    }
    out.sort_by_key(|rows| {
        (
            rows.iter().map(|r| r.count_ones()).sum::<u32>(),
            rows.clone(),
        )
    });
    out
}

/// Every invertible block-respecting map from a's generators to b's, or the
/// verdict to report when there is none or too many to try.
fn block_candidates(
    a: &[GenInfo],
    b: &[GenInfo],
) -> std::result::Result<Vec<LinearMap>, IsoVerdict> {
    if a.len() != b.len() {
        return Err(IsoVerdict::No {
            reason: format!("generator counts differ: {} vs {}", a.len(), b.len()),
        });
    }
    let mut blocks: BTreeMap<(usize, usize), (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for (x, g) in a.iter().enumerate() {
        blocks.entry((g.left, g.right)).or_default().0.push(x);
    }
    for (y, g) in b.iter().enumerate() {
        blocks.entry((g.left, g.right)).or_default().1.push(y);
    }
    let mut choices = Vec::new();
    let mut total = 1usize;
    for ((j, i), (xs, ys)) in &blocks {
        if xs.len() != ys.len() {
            return Err(IsoVerdict::No {
                reason: format!(
                    "idempotent block ({j}, {i}) has {} vs {} generators",
                    xs.len(),
                    ys.len()
                ),
            });
        }
        if xs.len() > 4 {
            return Err(IsoVerdict::Inconclusive {
                reason: format!("idempotent block ({j}, {i}) has {} generators", xs.len()),
            });
        }
        let mats = invertible_matrices(xs.len());
        total = total.saturating_mul(mats.len());
        choices.push((xs, ys, mats));
    }
    if total > MAX_ISO_CANDIDATES {
        return Err(IsoVerdict::Inconclusive {
            reason: format!("{total} chain-level candidates exceed the limit {MAX_ISO_CANDIDATES}"),
        });
    }
    let mut out = Vec::with_capacity(total);
    let mut digits = vec![0usize; choices.len()];
    loop {
        let mut map = vec![F2Vector::zero(); a.len()];
        for ((xs, ys, mats), d) in choices.iter().zip(&digits) {
            for (row, x) in mats[*d].iter().zip(xs.iter()) {
                for (j, y) in ys.iter().enumerate() {
                    if row >> j & 1 == 1 {
                        map[*x].toggle(*y);
                    }
                }
            }
        }
        out.push(map);
        let mut pos = 0;
        loop {
            if pos == digits.len() {
                return Ok(out);
            }
            digits[pos] += 1;
            if digits[pos] < choices[pos].2.len() {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
    }
}

fn describe(a: &[GenInfo], b: &[GenInfo], map: &LinearMap) -> Vec<(String, Vec<String>)> {
    map.iter()
        .enumerate()
        .map(|(x, v)| {
            (
                a[x].id.clone(),
                v.iter().map(|y| b[*y].id.clone()).collect(),
            )
        })
        .collect()
}

fn chord_inputs(cs: &[Chord]) -> Vec<AlgBasis> {
    cs.iter().map(|c| AlgBasis::Chord(*c)).collect()
}

fn eval<M: AaModule + ?Sized>(
    m: &M,
    l: &[Chord],
    x: usize,
    r: &[Chord],
) -> Result<F2Vector<usize>> {
    m_basis(m, &chord_inputs(l), x, &chord_inputs(r))
}

/// Looks for higher components F(L, x, R) that, together with the fixed
/// chain-level part `f0`, make F an A∞ homomorphism M → N up to `bound`.
/// The conditions are linear in the unknown components, so this is one
/// elimination over F2.
pub fn solve_higher<M, N>(m: &M, n: &N, f0: &LinearMap, bound: usize) -> Result<Option<Morphism>>
where
    M: AaModule + ?Sized,
    N: AaModule + ?Sized,
{
    let left = m.left_algebra();
    let right = m.right_algebra();
    let keys = aa_keys(left, right, m.generators(), bound);
    let target_block = |l: &[Chord], x: usize, r: &[Chord]| {
        let g = &m.generators()[x];
        (
            l.last().map_or(g.left, |c| left.chord_left_idem(*c)),
            r.last().map_or(g.right, |c| right.chord_right_idem(*c)),
        )
    };
    let mut columns: Vec<(AaKey, usize)> = Vec::new();
    let mut col_of: HashMap<(AaKey, usize), usize> = HashMap::new();
    for (l, x, r) in &keys {
        if l.is_empty() && r.is_empty() {
            continue;
        }
        let (gl, gr) = target_block(l, *x, r);
        for (z, g) in n.generators().iter().enumerate() {
            if g.left == gl && g.right == gr {
                let key = ((l.clone(), *x, r.clone()), z);
                col_of.insert(key.clone(), columns.len());
                columns.push(key);
            }
        }
    }
    let width = columns.len() + 1;
    let constant = columns.len();
    let unknowns_at = |l: &[Chord], x: usize, r: &[Chord]| -> Vec<(usize, usize)> {
        let key = (l.to_vec(), x, r.to_vec());
        (0..n.generators().len())
            .filter_map(|z| col_of.get(&(key.clone(), z)).map(|c| (*c, z)))
            .collect()
    };
    let mut rows: Vec<BitRow> = Vec::new();
    for (l, x, r) in &keys {
        let mut eq: BTreeMap<usize, BitRow> = BTreeMap::new();
        let mut hit = |z: usize, col: usize| {
            eq.entry(z).or_insert_with(|| BitRow::new(width)).flip(col);
        };
        for i in 0..=l.len() {
            for j in 0..=r.len() {
                let (li, lo) = (&l[..i], &l[i..]);
                let (ri, ro) = (&r[..j], &r[j..]);
                if i == 0 && j == 0 {
                    for z in f0[*x].iter() {
                        for z2 in eval(n, lo, *z, ro)?.iter() {
                            hit(*z2, constant);
                        }
                    }
                } else {
                    for (col, z) in unknowns_at(li, *x, ri) {
                        for z2 in eval(n, lo, z, ro)?.iter() {
                            hit(*z2, col);
                        }
                    }
                }
                let w = eval(m, li, *x, ri)?;
                if lo.is_empty() && ro.is_empty() {
                    for z in apply(f0, &w).iter() {
                        hit(*z, constant);
                    }
                } else {
                    for k in w.iter() {
                        for (col, z) in unknowns_at(lo, *k, ro) {
                            hit(z, col);
                        }
                    }
                }
            }
        }
        for k in 0..l.len().saturating_sub(1) {
            if let Some(c) = left.mul_chords(l[k + 1], l[k]) {
                let mut l2 = l[..k].to_vec();
                l2.push(c);
                l2.extend_from_slice(&l[k + 2..]);
                for (col, z) in unknowns_at(&l2, *x, r) {
                    hit(z, col);
                }
            }
        }
        for k in 0..r.len().saturating_sub(1) {
            if let Some(c) = right.mul_chords(r[k], r[k + 1]) {
                let mut r2 = r[..k].to_vec();
                r2.push(c);
                r2.extend_from_slice(&r[k + 2..]);
                for (col, z) in unknowns_at(l, *x, &r2) {
                    hit(z, col);
                }
            }
        }
        rows.extend(eq.into_values().filter(|row| !row.is_zero()));
    }
    // Gauss-Jordan elimination; a pivot in the constant column means no solution.
    let mut pivots: Vec<(usize, BitRow)> = Vec::new();
    for mut row in rows {
        for (p, prow) in &pivots {
            if row.get(*p) {
                row.xor_with(prow);
            }
        }
        let Some(p) = row.first_one() else {
            continue;
        };
        if p == constant {
            return Ok(None);
        }
        for (_, q) in pivots.iter_mut() {
            if q.get(p) {
                q.xor_with(&row);
            }
        }
        pivots.push((p, row));
    }
    let mut f = Morphism::zero();
    for (x, v) in f0.iter().enumerate() {
        f.set((Vec::new(), x, Vec::new()), v.clone());
    }
    // free unknowns are set to zero, so each pivot takes the constant's value
    for (p, row) in &pivots {
        if row.get(constant) {
            let ((l, x, r), z) = &columns[*p];
            let mut v = f.get(l, *x, r);
            v.toggle(*z);
            f.set((l.clone(), *x, r.clone()), v);
        }
    }
    Ok(Some(f))
}

/// Searches for an isomorphism between two minimal AA bimodules up to
/// `bound`: first one with no higher components, then one whose higher
/// components are solved for.
pub fn isomorphic_reduced<M, N>(m: &M, n: &N, bound: usize) -> Result<IsoVerdict>
where
    M: AaModule + ?Sized,
    N: AaModule + ?Sized,
{
    if m.left_algebra() != n.left_algebra() || m.right_algebra() != n.right_algebra() {
        return Ok(IsoVerdict::No {
            reason: "the bimodules are over different algebras".into(),
        });
    }
    let (ga, gb) = (m.generators(), n.generators());
    let candidates = match block_candidates(ga, gb) {
        Ok(c) => c,
        Err(v) => return Ok(v),
    };
    let keys = aa_keys(m.left_algebra(), m.right_algebra(), ga, bound);
    let mut ta = Vec::with_capacity(keys.len());
    for (l, x, r) in &keys {
        ta.push(eval(m, l, *x, r)?);
    }
    let mut tb: HashMap<AaKey, F2Vector<usize>> = HashMap::new();
    for (l, z, r) in aa_keys(n.left_algebra(), n.right_algebra(), gb, bound) {
        let v = eval(n, &l, z, &r)?;
        tb.insert((l, z, r), v);
    }
    let strict = candidates.iter().find(|f0| {
        keys.iter().zip(&ta).all(|((l, x, r), v)| {
            let mut image = F2Vector::zero();
            for z in f0[*x].iter() {
                if let Some(w) = tb.get(&(l.clone(), *z, r.clone())) {
                    image.add_assign(w);
                }
            }
            apply(f0, v) == image
        })
    });
    if let Some(f0) = strict {
        return Ok(IsoVerdict::Yes {
            bound,
            map: describe(ga, gb, f0),
            strict: true,
        });
    }
    for f0 in &candidates {
        if solve_higher(m, n, f0, bound)?.is_some() {
            return Ok(IsoVerdict::Yes {
                bound,
                map: describe(ga, gb, f0),
                strict: false,
            });
        }
    }
    Ok(IsoVerdict::No {
        reason: format!(
            "no block-respecting chain isomorphism extends to an A∞ isomorphism up to {bound}"
        ),
    })
}

/// The idempotent-coefficient part of δ^{1,1}.
fn da_differential(t: &TableDa, y: usize) -> F2Vector<usize> {
    let mut out = F2Vector::zero();
    for (a, z) in t.get(&(y, Vec::new())).iter() {
        if a.as_chord().is_none() {
            out.toggle(*z);
        }
    }
    out
}

fn rewrite_da(t: &TableDa, to_old: &LinearMap, to_new: &LinearMap) -> TableDa {
    let inp = t.in_algebra().clone();
    let gens = t.generators().to_vec();
    let mut out = TableDa::new(
        t.out_algebra().clone(),
        inp.clone(),
        gens.clone(),
        t.bound(),
    );
    for (a, cs) in da_keys(&inp, &gens, t.bound()) {
        let mut v: F2Vector<DaTerm> = F2Vector::zero();
        for k in to_old[a].iter() {
            v.add_assign(&t.get(&(*k, cs.clone())));
        }
        let mut w = F2Vector::zero();
        for (b, z) in v.iter() {
            for z2 in to_new[*z].iter() {
                w.toggle((*b, *z2));
            }
        }
        out.set((a, cs), w);
    }
    out
}

fn cancel_da(t: &TableDa, x1: usize, x2: usize, cap: usize) -> Result<TableDa> {
    let n = t.generators().len();
    let kept: Vec<usize> = (0..n).filter(|&i| i != x1 && i != x2).collect();
    let gens: Vec<GenInfo> = kept.iter().map(|k| t.generators()[*k].clone()).collect();
    let inp = t.in_algebra().clone();
    let out_alg = t.out_algebra().clone();
    let mut new_index = vec![usize::MAX; n];
    for (i, k) in kept.iter().enumerate() {
        new_index[*k] = i;
    }
    let cancelled_term = (AlgBasis::Idem(t.generators()[x1].left), x2);
    #[allow(clippy::too_many_arguments)]
    fn walk(
        t: &TableDa,
        out_alg: &Algebra,
        cs: &[Chord],
        k: usize,
        z: usize,
        prefix: AlgBasis,
        depth: usize,
        x: (usize, usize),
        cancelled: DaTerm,
        acc: &mut F2Vector<DaTerm>,
        cap: usize,
    ) -> Result<()> {
        if depth > cap {
            return Err(Error::Unbounded(format!(
                "cancellation chains exceed {cap} steps"
            )));
        }
        for k2 in k..=cs.len() {
            let mut w = t.get(&(z, cs[k..k2].to_vec()));
            if z == x.0 && k2 == k {
                w.toggle(cancelled);
            }
            for (b, y) in w.iter() {
                let Some(p) = out_alg.mul_basis(prefix, *b) else {
                    continue;
                };
                if k2 == cs.len() {
                    acc.toggle((p, *y));
                }
                if *y == x.1 {
                    walk(
                        t,
                        out_alg,
                        cs,
                        k2,
                        x.0,
                        p,
                        depth + 1,
                        x,
                        cancelled,
                        acc,
                        cap,
                    )?;
                }
            }
        }
        Ok(())
    }
    let mut out = TableDa::new(out_alg.clone(), inp.clone(), gens.clone(), t.bound());
    for (y, cs) in da_keys(&inp, &gens, t.bound()) {
        let g = &gens[y];
        let mut acc = F2Vector::zero();
        walk(
            t,
            &out_alg,
            &cs,
            0,
            kept[y],
            AlgBasis::Idem(g.left),
            0,
            (x1, x2),
            cancelled_term,
            &mut acc,
            cap,
        )?;
        let mut v = F2Vector::zero();
        for (a, z) in acc.iter() {
            if new_index[*z] != usize::MAX {
                v.toggle((*a, new_index[*z]));
            }
        }
        out.set((y, cs), v);
    }
    Ok(out)
}

/// Cancels idempotent-coefficient δ^{1,1} arrows of a DA bimodule until
/// none remain. `cap` bounds the length of a transfer chain.
pub fn reduce_da(t: &TableDa, cap: usize) -> Result<(TableDa, Vec<(String, String)>)> {
    let mut cur = t.clone();
    let mut cancelled = Vec::new();
    loop {
        let gens = cur.generators().to_vec();
        let arrow = (0..gens.len())
            .flat_map(|x| {
                da_differential(&cur, x)
                    .into_iter()
                    .filter(move |y| *y != x)
                    .map(move |y| (x, y))
            })
            .min_by(|a, b| (&gens[a.0].id, &gens[a.1].id).cmp(&(&gens[b.0].id, &gens[b.1].id)));
        let Some((x1, x2)) = arrow else {
            return Ok((cur, cancelled));
        };
        let to_old = bigon_rows(gens.len(), |x| da_differential(&cur, x), x1, x2)?;
        let to_new =
            invert(&to_old).ok_or_else(|| Error::Invalid("basis change is singular".into()))?;
        let iso = rewrite_da(&cur, &to_old, &to_new);
        cancelled.push((gens[x1].id.clone(), gens[x2].id.clone()));
        cur = cancel_da(&iso, x1, x2, cap)?;
    }
}

/// Searches for a strict isomorphism between two DA bimodules up to `bound`:
/// an invertible k-linear map F with δ(F y) = (1 ⊗ F) δ(y) on every input.
pub fn isomorphic_da<M, N>(m: &M, n: &N, bound: usize) -> Result<IsoVerdict>
where
    M: DaModule + ?Sized,
    N: DaModule + ?Sized,
{
    if m.out_algebra() != n.out_algebra() || m.in_algebra() != n.in_algebra() {
        return Ok(IsoVerdict::No {
            reason: "the bimodules are over different algebras".into(),
        });
    }
    let (ga, gb) = (m.generators(), n.generators());
    let candidates = match block_candidates(ga, gb) {
        Ok(c) => c,
        Err(v) => return Ok(v),
    };
    let keys = da_keys(m.in_algebra(), ga, bound);
    let mut ta = Vec::new();
    for (y, cs) in &keys {
        ta.push(m.delta_chords(*y, cs)?);
    }
    let mut tb = HashMap::new();
    for (y, cs) in da_keys(n.in_algebra(), gb, bound) {
        let v = n.delta_chords(y, &cs)?;
        tb.insert((y, cs), v);
    }
    let found = candidates.iter().find(|f0| {
        keys.iter().zip(&ta).all(|((y, cs), v)| {
            let mut lhs: F2Vector<DaTerm> = F2Vector::zero();
            for z in f0[*y].iter() {
                if let Some(w) = tb.get(&(*z, cs.clone())) {
                    lhs.add_assign(w);
                }
            }
            let mut rhs = F2Vector::zero();
            for (a, w) in v.iter() {
                for z in f0[*w].iter() {
                    rhs.toggle((*a, *z));
                }
            }
            lhs == rhs
        })
    });
    Ok(match found {
        Some(f0) => IsoVerdict::Yes {
            bound,
            map: describe(ga, gb, f0),
            strict: true,
        },
        None => IsoVerdict::No {
            reason: format!(
                "no block-respecting k-linear isomorphism matches the tables up to {bound}"
            ),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arc_algebra::ArcDiagram;
    use crate::bimodules::{build_module, is_homomorphism, verify_aa};
    use crate::diagram::Diagram;
    use std::path::PathBuf;

    fn zt() -> ArcDiagram {
        ArcDiagram::from_json(
            r#"{"genus":1,"circles":[{"id":"c","points":["p1","p2","p3","p4"]}],
                "matched_pairs":[{"arc":"1","points":["p1","p3"]},{"arc":"2","points":["p2","p4"]}]}"#,
        )
        .unwrap()
    }

    fn module(name: &str) -> TableAa {
        let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
            .join("../../data")
            .join(name);
        build_module(&Diagram::load_valid(&path).unwrap(), 6, 8).unwrap()
    }

    /// A complex over B(Z_T) in one idempotent block with chords acting by zero.
    fn complex(n: usize, arrows: &[(usize, usize)]) -> TableAa {
        let gens = (0..n)
            .map(|i| GenInfo {
                id: format!("x{}", i + 1),
                left: 0,
                right: 0,
            })
            .collect();
        let mut t = TableAa::new(Algebra::new(zt(), 'J'), Algebra::new(zt(), 'I'), gens, 4);
        let mut d = vec![F2Vector::zero(); n];
        for (a, b) in arrows {
            d[*a].toggle(*b);
        }
        for (x, v) in d.into_iter().enumerate() {
            t.set((Vec::new(), x, Vec::new()), v);
        }
        t
    }

    fn vec_of(xs: &[usize]) -> F2Vector<usize> {
        let mut v = F2Vector::zero();
        for x in xs {
            v.toggle(*x);
        }
        v
    }

    #[test]
    fn already_isolated_pair_is_unchanged() {
        let m = complex(2, &[(0, 1)]);
        let iso = isolate_bigon(&m, 0, 1).unwrap();
        assert_eq!(
            iso.entries().collect::<Vec<_>>(),
            m.entries().collect::<Vec<_>>()
        );
    }

    #[test]
    fn shared_target_is_moved_off_the_bigon() {
        let m = complex(3, &[(0, 1), (2, 1)]);
        let change = isolate_bigon_with_maps(&m, 0, 1).unwrap();
        assert_eq!(change.to_old[2], vec_of(&[0, 2]));
        assert!(change.module.differential(2).is_zero());
        assert!(is_isolated(&change.module, 0, 1));
    }

    #[test]
    fn split_target_keeps_one_arrow() {
        let m = complex(3, &[(0, 1), (0, 2)]);
        let change = isolate_bigon_with_maps(&m, 0, 1).unwrap();
        assert_eq!(change.to_old[1], vec_of(&[1, 2]));
        assert_eq!(change.module.differential(0), vec_of(&[1]));
        assert!(change.module.differential(2).is_zero());
        assert!(is_isolated(&change.module, 0, 1));
    }

    #[test]
    fn missing_arrow_is_rejected() {
        let m = complex(2, &[]);
        assert!(matches!(isolate_bigon(&m, 0, 1), Err(Error::Invalid(_))));
    }

    #[test]
    fn acyclic_pair_cancels_to_nothing() {
        let r = cancel(&complex(2, &[(0, 1)]), 0, 1, 4).unwrap();
        assert!(r.reduced.generators().is_empty());
        assert_eq!(r.reduced.entries().count(), 0);
    }

    #[test]
    fn cancel_requires_an_isolated_arrow() {
        let m = complex(3, &[(0, 1), (2, 1)]);
        assert!(matches!(cancel(&m, 0, 1, 4), Err(Error::Invalid(_))));
    }

    #[test]
    fn identity_module_is_already_minimal() {
        let m = module("zt_identity.json");
        let r = reduce(&m, 6).unwrap();
        assert!(r.cancelled.is_empty());
        assert_eq!(
            r.reduced.entries().collect::<Vec<_>>(),
            m.entries().collect::<Vec<_>>()
        );
    }

    #[test]
    fn finger_move_cancels_to_the_bigon_free_module() {
        let b = module("zt_finger_b.json");
        let nb = module("zt_finger_nb.json");
        let r = reduce(&b, 6).unwrap();
        assert_eq!(r.cancelled.len(), 1);
        assert!(verify_aa(&r.reduced, 6).unwrap().pass);
        assert_eq!(
            r.reduced.entries().collect::<Vec<_>>(),
            nb.entries().collect::<Vec<_>>()
        );
    }

    #[test]
    fn reduction_maps_are_homotopy_inverse_on_chains() {
        let b = module("zt_finger_b.json");
        let r = reduce(&b, 6).unwrap();
        let n = b.generators().len();
        let k = r.reduced.generators().len();
        let f = chain_part(&r.include, k);
        let g = chain_part(&r.project, n);
        let d: LinearMap = (0..n).map(|x| b.differential(x)).collect();
        let gf = compose_linear(&g, &f);
        assert!(gf.iter().enumerate().all(|(x, v)| *v == F2Vector::unit(x)));
        let lhs = add_linear(
            &compose_linear(&f, &g),
            &(0..n).map(F2Vector::unit).collect(),
        );
        let rhs = add_linear(
            &compose_linear(&d, &r.homotopy),
            &compose_linear(&r.homotopy, &d),
        );
        assert_eq!(lhs, rhs);
        assert!(is_homomorphism(&r.include, &r.reduced, &b, 6).unwrap());
        assert!(is_homomorphism(&r.project, &b, &r.reduced, 6).unwrap());
    }

    #[test]
    fn reduce_is_idempotent() {
        let r = reduce(&module("zt_finger_b.json"), 6).unwrap();
        let again = reduce(&r.reduced, 6).unwrap();
        assert!(again.cancelled.is_empty());
        assert_eq!(
            again.reduced.entries().collect::<Vec<_>>(),
            r.reduced.entries().collect::<Vec<_>>()
        );
    }

    #[test]
    fn homology_blocks_of_identity_and_twist() {
        let hi = homology_blocks(&module("zt_identity.json")).unwrap();
        assert_eq!(hi.ranks, vec![vec![1, 0], vec![0, 1]]);
        assert!(hi.is_identity());
        let ht = homology_blocks(&module("zt_twist.json")).unwrap();
        assert!(!ht.is_identity());
        let empty = complex(0, &[]);
        assert_eq!(
            homology_blocks(&empty).unwrap().ranks,
            vec![vec![0, 0], vec![0, 0]]
        );
    }

    #[test]
    fn cancellation_preserves_homology_blocks() {
        let b = module("zt_finger_b.json");
        let r = reduce(&b, 6).unwrap();
        assert_eq!(
            homology_blocks(&b).unwrap(),
            homology_blocks(&r.reduced).unwrap()
        );
    }

    #[test]
    fn relabelled_identity_is_isomorphic() {
        let m = module("zt_identity.json");
        let swapped = change_basis(&m, &vec![F2Vector::unit(0), F2Vector::unit(1)]).unwrap();
        assert!(isomorphic_reduced(&m, &swapped, 6).unwrap().is_yes());
        let t = module("zt_twist.json");
        assert!(!isomorphic_reduced(&m, &t, 6).unwrap().is_yes());
    }

    #[test]
    fn invert_round_trips() {
        let rows = vec![vec_of(&[0, 1]), vec_of(&[1]), vec_of(&[0, 1, 2])];
        let inv = invert(&rows).unwrap();
        let back = compose_linear(&rows, &inv);
        assert!(back
            .iter()
            .enumerate()
            .all(|(x, v)| *v == F2Vector::unit(x)));
        assert!(invert(&[vec_of(&[0, 1]), vec_of(&[0, 1])]).is_none());
    }
}
