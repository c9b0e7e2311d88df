//! Type AA, DD and DA bimodules over chord algebras, morphisms of AA
//! bimodules, and verifiers for their structure equations.
//!
//! Left inputs of an AA structure map are stored innermost first: the key
//! `(L, x, R)` with `L = [σ1, ..., σm]` stands for m(σm, ..., σ1, x, ρ1, ..., ρn).
//! Use [`m_outer_first`] to evaluate with the outermost-first argument order.

use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arc_algebra::{AlgBasis, Algebra, ArcDiagram, ArcDiagramSpec, Chord};
use crate::diagram::{identity_diagram, Diagram, EdgeKind, Segment};
use crate::error::{Error, Result};
use crate::ground::F2Vector;
use crate::polygons::{PeelCounter, PolygonQuery};

/// A generator with its left and right idempotents (matched-pair indices).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GenInfo {
    pub id: String,
    pub left: usize,
    pub right: usize,
}

/// Key of an AA structure map or morphism component.
pub type AaKey = (Vec<Chord>, usize, Vec<Chord>);

/// A type AA bimodule over (left, right).
pub trait AaModule: Sync {
    fn left_algebra(&self) -> &Algebra;
    fn right_algebra(&self) -> &Algebra;
    fn generators(&self) -> &[GenInfo];
    /// m on chord inputs. Callers guarantee idempotent compatibility.
    fn m_chords(&self, sigmas: &[Chord], x: usize, rhos: &[Chord]) -> Result<F2Vector<usize>>;
}

/// True when `L, x, R` can be tensored over the idempotent rings.
pub fn aa_compatible(
    left: &Algebra,
    right: &Algebra,
    g: &GenInfo,
    l: &[Chord],
    r: &[Chord],
) -> bool {
    if let Some(s1) = l.first() {
        if left.chord_right_idem(*s1) != g.left {
            return false;
        }
    }
    if let Some(r1) = r.first() {
        if right.chord_left_idem(*r1) != g.right {
            return false;
        }
    }
    l.windows(2)
        .all(|w| left.chord_right_idem(w[1]) == left.chord_left_idem(w[0]))
        && right.composable(r)
}

fn m_checked<M: AaModule + ?Sized>(
    m: &M,
    l: &[Chord],
    x: usize,
    r: &[Chord],
) -> Result<F2Vector<usize>> {
    if !aa_compatible(
        m.left_algebra(),
        m.right_algebra(),
        &m.generators()[x],
        l,
        r,
    ) {
        return Ok(F2Vector::zero());
    }
    m.m_chords(l, x, r)
}

/// Evaluates m on basis inputs (left inputs innermost first), applying
/// strict unitality to idempotent inputs.
pub fn m_basis<M: AaModule + ?Sized>(
    m: &M,
    sigmas: &[AlgBasis],
    x: usize,
    rhos: &[AlgBasis],
) -> Result<F2Vector<usize>> {
    let has_idem = sigmas.iter().chain(rhos).any(|a| a.as_chord().is_none());
    if has_idem {
        if sigmas.len() + rhos.len() != 1 {
            return Ok(F2Vector::zero());
        }
        let g = &m.generators()[x];
        let hit = match (sigmas.first(), rhos.first()) {
            (Some(AlgBasis::Idem(j)), None) => *j == g.left,
            (None, Some(AlgBasis::Idem(i))) => *i == g.right,
            _ => false,
        };
        return Ok(if hit {
            F2Vector::unit(x)
        } else {
            F2Vector::zero()
        });
    }
    let l: Vec<Chord> = sigmas.iter().filter_map(|a| a.as_chord()).collect();
    let r: Vec<Chord> = rhos.iter().filter_map(|a| a.as_chord()).collect();
    m_checked(m, &l, x, &r)
}

/// Evaluates m(σm, ..., σ1, x, ρ1, ..., ρn) with left inputs listed
/// outermost first, as they are written.
pub fn m_outer_first<M: AaModule + ?Sized>(
    m: &M,
    sigmas_outer_first: &[AlgBasis],
    x: usize,
    rhos: &[AlgBasis],
) -> Result<F2Vector<usize>> {
    let inner_first: Vec<AlgBasis> = sigmas_outer_first.iter().rev().copied().collect();
    m_basis(m, &inner_first, x, rhos)
}

fn total_len(seq: &[Chord]) -> usize {
    seq.iter().map(|c| c.len()).sum()
}

/// All compatible keys with total chord length at most `bound`, sorted.
pub fn aa_keys(left: &Algebra, right: &Algebra, gens: &[GenInfo], bound: usize) -> Vec<AaKey> {
    let lefts: Vec<Vec<Chord>> = left
        .composable_sequences(bound)
        .into_iter()
        .map(|mut s| {
            s.reverse();
            s
        })
        .collect();
    let rights = right.composable_sequences(bound);
    let mut out = Vec::new();
    for (x, g) in gens.iter().enumerate() {
        for l in &lefts {
            let ll = total_len(l);
            for r in &rights {
                if ll + total_len(r) <= bound && aa_compatible(left, right, g, l, r) {
                    out.push((l.clone(), x, r.clone()));
                }
            }
        }
    }
    out.sort();
    out
}

fn check_same(a: &Algebra, b: &Algebra, what: &str) -> Result<()> {
    if a != b {
        return Err(Error::Mismatch(format!("{what}: algebras differ")));
    }
    Ok(())
}

/// An AA bimodule given by a finite table, valid up to a total chord bound.
#[derive(Clone, Debug)]
pub struct TableAa {
    left: Algebra,
    right: Algebra,
    gens: Vec<GenInfo>,
    bound: usize,
    table: BTreeMap<AaKey, F2Vector<usize>>,
}

impl TableAa {
    pub fn new(left: Algebra, right: Algebra, gens: Vec<GenInfo>, bound: usize) -> Self {
        TableAa {
            left,
            right,
            gens,
            bound,
            table: BTreeMap::new(),
        }
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn set(&mut self, key: AaKey, out: F2Vector<usize>) {
        if out.is_zero() {
            self.table.remove(&key);
        } else {
            self.table.insert(key, out);
        }
    }

    pub fn get(&self, key: &AaKey) -> F2Vector<usize> {
        self.table.get(key).cloned().unwrap_or_default()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&AaKey, &F2Vector<usize>)> {
        self.table.iter()
    }

    pub fn gen_index(&self, id: &str) -> Option<usize> {
        self.gens.iter().position(|g| g.id == id)
    }

    /// The m_{0,1,0} differential as a map from generators to generators.
    pub fn differential(&self, x: usize) -> F2Vector<usize> {
        self.get(&(Vec::new(), x, Vec::new()))
    }

    pub fn to_json(&self) -> String {
        let dump = ModuleDump {
            kind: "AA".into(),
            left_algebra: self.left.diagram().spec().clone(),
            right_algebra: self.right.diagram().spec().clone(),
            bound: self.bound,
            generators: dump_gens(&self.left, &self.right, &self.gens),
            table: self
                .table
                .iter()
                .map(|((l, x, r), out)| TableRow {
                    sigmas: l.iter().map(|c| self.left.chord_name(*c)).collect(),
                    gen: self.gens[*x].id.clone(),
                    rhos: r.iter().map(|c| self.right.chord_name(*c)).collect(),
                    out: out.iter().map(|y| self.gens[*y].id.clone()).collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&dump).expect("dump serializes")
    }

    pub fn from_json(text: &str) -> Result<TableAa> {
        let dump: ModuleDump = serde_json::from_str(text)?;
        if dump.kind != "AA" {
            return Err(Error::Malformed(format!(
                "expected an AA dump, found {}",
                dump.kind
            )));
        }
        let left = Algebra::new(ArcDiagram::new(dump.left_algebra)?, 'J');
        let right = Algebra::new(ArcDiagram::new(dump.right_algebra)?, 'I');
        let gens = load_gens(&left, &right, &dump.generators)?;
        let mut t = TableAa::new(left, right, gens, dump.bound);
        for row in dump.table {
            let l = row
                .sigmas
                .iter()
                .map(|s| t.left.parse_chord(s))
                .collect::<Result<Vec<_>>>()?;
            let r = row
                .rhos
                .iter()
                .map(|s| t.right.parse_chord(s))
                .collect::<Result<Vec<_>>>()?;
            let x = gen_lookup(&t.gens, &row.gen)?;
            let mut out = F2Vector::zero();
            for y in &row.out {
                out.toggle(gen_lookup(&t.gens, y)?);
            }
            t.set((l, x, r), out);
        }
        Ok(t)
    }
}

impl AaModule for TableAa {
    fn left_algebra(&self) -> &Algebra {
        &self.left
    }
    fn right_algebra(&self) -> &Algebra {
        &self.right
    }
    fn generators(&self) -> &[GenInfo] {
        &self.gens
    }
    fn m_chords(&self, sigmas: &[Chord], x: usize, rhos: &[Chord]) -> Result<F2Vector<usize>> {
        let total = total_len(sigmas) + total_len(rhos);
        if total > self.bound {
            return Err(Error::Truncated(format!(
                "table holds inputs of total length {}, asked for {total}",
                self.bound
            )));
        }
        Ok(self.get(&(sigmas.to_vec(), x, rhos.to_vec())))
    }
}

#[derive(Serialize, Deserialize)]
struct GenRow {
    id: String,
    left_idem: String,
    right_idem: String,
}

#[derive(Serialize, Deserialize)]
struct TableRow {
    sigmas: Vec<String>,
    gen: String,
    rhos: Vec<String>,
    out: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct ModuleDump {
    #[serde(rename = "type")]
    kind: String,
    left_algebra: ArcDiagramSpec,
    right_algebra: ArcDiagramSpec,
    bound: usize,
    generators: Vec<GenRow>,
    table: Vec<TableRow>,
}

fn dump_gens(left: &Algebra, right: &Algebra, gens: &[GenInfo]) -> Vec<GenRow> {
    gens.iter()
        .map(|g| GenRow {
            id: g.id.clone(),
            left_idem: left.idem_name(g.left),
            right_idem: right.idem_name(g.right),
        })
        .collect()
}

fn load_gens(left: &Algebra, right: &Algebra, rows: &[GenRow]) -> Result<Vec<GenInfo>> {
    rows.iter()
        .map(|g| {
            Ok(GenInfo {
                id: g.id.clone(),
                left: left.parse_idem(&g.left_idem)?,
                right: right.parse_idem(&g.right_idem)?,
            })
        })
        .collect()
}

fn gen_lookup(gens: &[GenInfo], id: &str) -> Result<usize> {
    gens.iter()
        .position(|g| g.id == id)
        .ok_or_else(|| Error::Malformed(format!("unknown generator {id}")))
}

/// The AA bimodule of a diagram, evaluated on demand by counting polygons.
pub struct DiagramAa<'a> {
    d: &'a Diagram,
    counter: PeelCounter<'a>,
    gens: Vec<GenInfo>,
    vertices: Vec<usize>,
    cache: Mutex<HashMap<AaKey, F2Vector<usize>>>,
}

impl<'a> DiagramAa<'a> {
    pub fn new(d: &'a Diagram, max_area: u32) -> Self {
        let generators = d.generators();
        DiagramAa {
            d,
            counter: PeelCounter::new(d, max_area),
            gens: generators
                .iter()
                .map(|g| GenInfo {
                    id: g.id.clone(),
                    left: g.left,
                    right: g.right,
                })
                .collect(),
            vertices: generators.iter().map(|g| g.vertex).collect(),
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn diagram(&self) -> &Diagram {
        self.d
    }
}

impl AaModule for DiagramAa<'_> {
    fn left_algebra(&self) -> &Algebra {
        self.d.sigma_algebra()
    }
    fn right_algebra(&self) -> &Algebra {
        self.d.rho_algebra()
    }
    fn generators(&self) -> &[GenInfo] {
        &self.gens
    }
    fn m_chords(&self, sigmas: &[Chord], x: usize, rhos: &[Chord]) -> Result<F2Vector<usize>> {
        let key = (sigmas.to_vec(), x, rhos.to_vec());
        if let Some(hit) = self.cache.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let mut out = F2Vector::zero();
        for (y, vy) in self.vertices.iter().enumerate() {
            let q = PolygonQuery {
                x: self.vertices[x],
                y: *vy,
                sigmas: sigmas.to_vec(),
                rhos: rhos.to_vec(),
            };
            if self.counter.count(&q)? % 2 == 1 {
                out.toggle(y);
            }
        }
        self.cache.lock().unwrap().insert(key, out.clone());
        Ok(out)
    }
}

/// Tabulates every structure map of `m` up to total chord length `bound`.
pub fn tabulate<M: AaModule + ?Sized>(m: &M, bound: usize) -> Result<TableAa> {
    let keys = aa_keys(m.left_algebra(), m.right_algebra(), m.generators(), bound);
    let values: Vec<Result<F2Vector<usize>>> = keys
        .par_iter()
        .map(|(l, x, r)| m.m_chords(l, *x, r))
        .collect();
    let mut t = TableAa::new(
        m.left_algebra().clone(),
        m.right_algebra().clone(),
        m.generators().to_vec(),
        bound,
    );
    for (key, v) in keys.into_iter().zip(values) {
        t.set(key, v?);
    }
    Ok(t)
}

/// The AA bimodule of a diagram, tabulated up to `max_chords`.
pub fn build_module(d: &Diagram, max_chords: usize, max_area: u32) -> Result<TableAa> {
    tabulate(&DiagramAa::new(d, max_area), max_chords)
}

/// Outcome of a bounded verification.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub pass: bool,
    pub bound: usize,
    pub checked: usize,
    pub witness: Option<String>,
}

fn seq_names(alg: &Algebra, seq: &[Chord]) -> String {
    seq.iter()
        .map(|c| alg.chord_name(*c))
        .collect::<Vec<_>>()
        .join(",")
}

/// The A∞ relation at one input, as a residual that must vanish.
pub fn aa_relation<M: AaModule + ?Sized>(
    m: &M,
    l: &[Chord],
    x: usize,
    r: &[Chord],
) -> Result<F2Vector<usize>> {
    let mut total = F2Vector::zero();
    for i in 0..=l.len() {
        for j in 0..=r.len() {
            for z in m_checked(m, &l[..i], x, &r[..j])?.iter() {
                total.add_assign(&m_checked(m, &l[i..], *z, &r[j..])?);
            }
        }
    }
    let left = m.left_algebra();
    for k in 0..l.len().saturating_sub(1) {
        if let Some(c) = left.mul_chords(l[k + 1], l[k]) {
            let mut l2 = l[..k].to_vec();
            l2.push(c);
            l2.extend_from_slice(&l[k + 2..]);
            total.add_assign(&m_checked(m, &l2, x, r)?);
        }
    }
    let right = m.right_algebra();
    for k in 0..r.len().saturating_sub(1) {
        if let Some(c) = right.mul_chords(r[k], r[k + 1]) {
            let mut r2 = r[..k].to_vec();
            r2.push(c);
            r2.extend_from_slice(&r[k + 2..]);
            total.add_assign(&m_checked(m, l, x, &r2)?);
        }
    }
    Ok(total)
}

/// Checks the A∞ bimodule relations on every input up to `bound`.
pub fn verify_aa<M: AaModule + ?Sized>(m: &M, bound: usize) -> Result<Verdict> {
    let keys = aa_keys(m.left_algebra(), m.right_algebra(), m.generators(), bound);
    let residuals: Vec<Result<F2Vector<usize>>> = keys
        .par_iter()
        .map(|(l, x, r)| aa_relation(m, l, *x, r))
        .collect();
    let mut witness = None;
    for (key, res) in keys.iter().zip(residuals) {
        let res = res?;
        if !res.is_zero() && witness.is_none() {
            let (l, x, r) = key;
            let gens = m.generators();
            witness = Some(format!(
                "relation fails at ([{}], {}, [{}]): residual {{{}}}",
                seq_names(m.left_algebra(), l),
                gens[*x].id,
                seq_names(m.right_algebra(), r),
                res.iter()
                    .map(|y| gens[*y].id.as_str())
                    .collect::<Vec<_>>()
                    .join(",")
            ));
        }
    }
    Ok(Verdict {
        pass: witness.is_none(),
        bound,
        checked: keys.len(),
        witness,
    })
}

/// One term a ⊗ y ⊗ b of a type DD structure map.
pub type DdTerm = (AlgBasis, usize, AlgBasis);

/// A type DD bimodule over (left, right) with output algebras on both sides.
#[derive(Clone, Debug)]
pub struct DdModule {
    left: Algebra,
    right: Algebra,
    gens: Vec<GenInfo>,
    delta: Vec<F2Vector<DdTerm>>,
}

impl DdModule {
    pub fn new(left: Algebra, right: Algebra, gens: Vec<GenInfo>) -> Self {
        let n = gens.len();
        DdModule {
            left,
            right,
            gens,
            delta: vec![F2Vector::zero(); n],
        }
    }

    pub fn left_algebra(&self) -> &Algebra {
        &self.left
    }

    pub fn right_algebra(&self) -> &Algebra {
        &self.right
    }

    pub fn generators(&self) -> &[GenInfo] {
        &self.gens
    }

    pub fn delta1(&self, w: usize) -> &F2Vector<DdTerm> {
        &self.delta[w]
    }

    /// Adds a ⊗ y ⊗ b to δ¹(w), checking idempotents.
    pub fn add_term(&mut self, w: usize, a: AlgBasis, y: usize, b: AlgBasis) -> Result<()> {
        let ok = self.left.left_idem(a) == self.gens[w].left
            && self.left.right_idem(a) == self.gens[y].left
            && self.right.left_idem(b) == self.gens[y].right
            && self.right.right_idem(b) == self.gens[w].right;
        if !ok {
            return Err(Error::Invalid(format!(
                "term {} ⊗ {} ⊗ {} of δ¹({}) has mismatched idempotents",
                self.left.basis_name(a),
                self.gens[y].id,
                self.right.basis_name(b),
                self.gens[w].id
            )));
        }
        self.delta[w].toggle((a, y, b));
        Ok(())
    }

    pub fn clear(&mut self, w: usize) {
        self.delta[w] = F2Vector::zero();
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<DdRow> = (0..self.gens.len())
            .flat_map(|w| {
                self.delta[w].iter().map(move |(a, y, b)| DdRow {
                    gen: self.gens[w].id.clone(),
                    left: self.left.basis_name(*a),
                    out: self.gens[*y].id.clone(),
                    right: self.right.basis_name(*b),
                })
            })
            .collect();
        let dump = DdDump {
            kind: "DD".into(),
            left_algebra: self.left.diagram().spec().clone(),
            right_algebra: self.right.diagram().spec().clone(),
            generators: dump_gens(&self.left, &self.right, &self.gens),
            delta: rows,
        };
        serde_json::to_string_pretty(&dump).expect("dump serializes")
    }

    pub fn from_json(text: &str) -> Result<DdModule> {
        let dump: DdDump = serde_json::from_str(text)?;
        if dump.kind != "DD" {
            return Err(Error::Malformed(format!(
                "expected a DD dump, found {}",
                dump.kind
            )));
        }
        let left = Algebra::new(ArcDiagram::new(dump.left_algebra)?, 'I');
        let right = Algebra::new(ArcDiagram::new(dump.right_algebra)?, 'J');
        let gens = load_gens(&left, &right, &dump.generators)?;
        let mut dd = DdModule::new(left, right, gens);
        for row in dump.delta {
            let w = gen_lookup(&dd.gens, &row.gen)?;
            let y = gen_lookup(&dd.gens, &row.out)?;
            let a = dd.left.parse_basis(&row.left)?;
            let b = dd.right.parse_basis(&row.right)?;
            dd.add_term(w, a, y, b)?;
        }
        Ok(dd)
    }
}

#[derive(Serialize, Deserialize)]
struct DdRow {
    gen: String,
    left: String,
    out: String,
    right: String,
}

#[derive(Serialize, Deserialize)]
struct DdDump {
    #[serde(rename = "type")]
    kind: String,
    left_algebra: ArcDiagramSpec,
    right_algebra: ArcDiagramSpec,
    generators: Vec<GenRow>,
    delta: Vec<DdRow>,
}

/// The type DD bimodule with one generator per matched pair of `z`, whose
/// differential pairs each short chord of Z with the short chord of the
/// dual diagram that bounds the same region of the identity diagram.
pub fn dd_half_identity(z: &ArcDiagram) -> Result<DdModule> {
    let d = identity_diagram(z)?;
    let left = d.rho_algebra().clone();
    let right = d.sigma_algebra().clone();
    let gens: Vec<GenInfo> = (0..left.num_idempotents())
        .map(|i| GenInfo {
            id: format!("w{}", z.pairs()[i].arc),
            left: i,
            right: i,
        })
        .collect();
    let mut dd = DdModule::new(left.clone(), right.clone(), gens);
    for xi in left.short_chords() {
        let side = d
            .boundary_side(EdgeKind::Rho, xi.circle as usize, xi.start as usize)
            .ok_or_else(|| Error::Invalid("identity diagram lacks a ρ segment".into()))?;
        let (f, _) = d
            .face_of_side(side)
            .ok_or_else(|| Error::Invalid("ρ segment without a region".into()))?;
        let partners: Vec<Chord> = d.faces[f]
            .sides
            .iter()
            .filter(|s| d.side_kind(**s) == EdgeKind::Sigma)
            .filter_map(|s| match d.edges[s.edge as usize].segment {
                Some(Segment::Short { circle, start }) => Some(Chord {
                    circle: circle as u16,
                    start: start as u16,
                    end: start as u16 + 1,
                }),
                _ => None,
            })
            .collect();
        let [xi2] = partners[..] else {
            return Err(Error::Invalid(format!(
                "region of {} meets {} short σ chords",
                left.chord_name(xi),
                partners.len()
            )));
        };
        let i = left.chord_left_idem(xi);
        let j = left.chord_right_idem(xi);
        if right.chord_left_idem(xi2) == j && right.chord_right_idem(xi2) == i {
            dd.add_term(i, AlgBasis::Chord(xi), j, AlgBasis::Chord(xi2))?;
        }
    }
    Ok(dd)
}

/// Checks that the μ2-square of δ¹ vanishes (the algebras have no differential).
pub fn verify_dd(dd: &DdModule) -> Verdict {
    let mut witness = None;
    for w in 0..dd.gens.len() {
        let mut total: F2Vector<DdTerm> = F2Vector::zero();
        for (a, y, b) in dd.delta[w].iter() {
            for (a2, z, b2) in dd.delta[*y].iter() {
                if let (Some(aa), Some(bb)) =
                    (dd.left.mul_basis(*a, *a2), dd.right.mul_basis(*b2, *b))
                {
                    total.toggle((aa, *z, bb));
                }
            }
        }
        if !total.is_zero() && witness.is_none() {
            let terms: Vec<String> = total
                .iter()
                .map(|(a, z, b)| {
                    format!(
                        "{}⊗{}⊗{}",
                        dd.left.basis_name(*a),
                        dd.gens[*z].id,
                        dd.right.basis_name(*b)
                    )
                })
                .collect();
            witness = Some(format!("δ² of {} is {}", dd.gens[w].id, terms.join(" + ")));
        }
    }
    Verdict {
        pass: witness.is_none(),
        bound: 0,
        checked: dd.gens.len(),
        witness,
    }
}

/// One term a ⊗ y of a type DA structure map.
pub type DaTerm = (AlgBasis, usize);

/// A type DA bimodule: output algebra on the left, input algebra on the right.
/// Generator idempotents are `left` in the output algebra and `right` in the
/// input algebra.
pub trait DaModule: Sync {
    fn out_algebra(&self) -> &Algebra;
    fn in_algebra(&self) -> &Algebra;
    fn generators(&self) -> &[GenInfo];
    /// δ^{1,1+j} on chord inputs. Callers guarantee idempotent compatibility.
    fn delta_chords(&self, y: usize, cs: &[Chord]) -> Result<F2Vector<DaTerm>>;
}

pub fn da_compatible(inp: &Algebra, g: &GenInfo, cs: &[Chord]) -> bool {
    if let Some(c1) = cs.first() {
        if inp.chord_left_idem(*c1) != g.right {
            return false;
        }
    }
    inp.composable(cs)
}

fn delta_checked<N: DaModule + ?Sized>(n: &N, y: usize, cs: &[Chord]) -> Result<F2Vector<DaTerm>> {
    if !da_compatible(n.in_algebra(), &n.generators()[y], cs) {
        return Ok(F2Vector::zero());
    }
    n.delta_chords(y, cs)
}

/// Evaluates δ^{1,1+j} on basis inputs with strict unitality.
pub fn delta_basis<N: DaModule + ?Sized>(
    n: &N,
    y: usize,
    inputs: &[AlgBasis],
) -> Result<F2Vector<DaTerm>> {
    if inputs.iter().any(|a| a.as_chord().is_none()) {
        let g = &n.generators()[y];
        return Ok(match inputs {
            [AlgBasis::Idem(i)] if *i == g.right => F2Vector::unit((AlgBasis::Idem(g.left), y)),
            _ => F2Vector::zero(),
        });
    }
    let cs: Vec<Chord> = inputs.iter().filter_map(|a| a.as_chord()).collect();
    delta_checked(n, y, &cs)
}

/// All compatible DA inputs up to `bound`, sorted.
pub fn da_keys(inp: &Algebra, gens: &[GenInfo], bound: usize) -> Vec<(usize, Vec<Chord>)> {
    let seqs = inp.composable_sequences(bound);
    let mut out = Vec::new();
    for (y, g) in gens.iter().enumerate() {
        for s in &seqs {
            if da_compatible(inp, g, s) {
                out.push((y, s.clone()));
            }
        }
    }
    out.sort();
    out
}

/// The DA structure equation at one input, as a residual.
pub fn da_relation<N: DaModule + ?Sized>(
    n: &N,
    y: usize,
    cs: &[Chord],
) -> Result<F2Vector<DaTerm>> {
    let out = n.out_algebra();
    let mut total = F2Vector::zero();
    for i in 0..=cs.len() {
        for (a, y1) in delta_checked(n, y, &cs[..i])?.iter() {
            for (a2, y2) in delta_checked(n, *y1, &cs[i..])?.iter() {
                if let Some(p) = out.mul_basis(*a, *a2) {
                    total.toggle((p, *y2));
                }
            }
        }
    }
    let inp = n.in_algebra();
    for k in 0..cs.len().saturating_sub(1) {
        if let Some(c) = inp.mul_chords(cs[k], cs[k + 1]) {
            let mut c2 = cs[..k].to_vec();
            c2.push(c);
            c2.extend_from_slice(&cs[k + 2..]);
            total.add_assign(&delta_checked(n, y, &c2)?);
        }
    }
    Ok(total)
}

/// Checks the DA structure equation on every input up to `bound`.
pub fn verify_da<N: DaModule + ?Sized>(n: &N, bound: usize) -> Result<Verdict> {
    let keys = da_keys(n.in_algebra(), n.generators(), bound);
    let residuals: Vec<Result<F2Vector<DaTerm>>> = keys
        .par_iter()
        .map(|(y, cs)| da_relation(n, *y, cs))
        .collect();
    let mut witness = None;
    for ((y, cs), res) in keys.iter().zip(residuals) {
        let res = res?;
        if !res.is_zero() && witness.is_none() {
            let gens = n.generators();
            let terms: Vec<String> = res
                .iter()
                .map(|(a, z)| format!("{}⊗{}", n.out_algebra().basis_name(*a), gens[*z].id))
                .collect();
            witness = Some(format!(
                "relation fails at ({}, [{}]): residual {}",
                gens[*y].id,
                seq_names(n.in_algebra(), cs),
                terms.join(" + ")
            ));
        }
    }
    Ok(Verdict {
        pass: witness.is_none(),
        bound,
        checked: keys.len(),
        witness,
    })
}

/// The identity DA bimodule of an algebra: one generator per idempotent,
/// δ^{1,2}(ι, a) = a ⊗ ι' and nothing else.
#[derive(Clone, Debug)]
pub struct IdentityDa {
    alg: Algebra,
    gens: Vec<GenInfo>,
}

pub fn identity_da(alg: &Algebra) -> IdentityDa {
    let gens = (0..alg.num_idempotents())
        .map(|i| GenInfo {
            id: format!("ι{}", alg.idem_name(i)),
            left: i,
            right: i,
        })
        .collect();
    IdentityDa {
        alg: alg.clone(),
        gens,
    }
}

impl DaModule for IdentityDa {
    fn out_algebra(&self) -> &Algebra {
        &self.alg
    }
    fn in_algebra(&self) -> &Algebra {
        &self.alg
    }
    fn generators(&self) -> &[GenInfo] {
        &self.gens
    }
    fn delta_chords(&self, _y: usize, cs: &[Chord]) -> Result<F2Vector<DaTerm>> {
        Ok(match cs {
            [c] => F2Vector::unit((AlgBasis::Chord(*c), self.alg.chord_right_idem(*c))),
            _ => F2Vector::zero(),
        })
    }
}

/// Checks that δ^{1,2}(ι, a) = a ⊗ ι' for every basis element a, where ι is
/// the generator over a's initial idempotent and ι' the one over its final
/// idempotent. Returns one message per violation.
pub fn identity_law_failures<N: DaModule + ?Sized>(n: &N) -> Result<Vec<String>> {
    let inp = n.in_algebra();
    let out = n.out_algebra();
    let gens = n.generators();
    let over = |i: usize, left: bool| {
        gens.iter()
            .position(|g| if left { g.left == i } else { g.right == i })
    };
    let mut failures = Vec::new();
    for a in inp.basis() {
        let Some(y) = over(inp.left_idem(a), false) else {
            failures.push(format!(
                "no generator over {}",
                inp.idem_name(inp.left_idem(a))
            ));
            continue;
        };
        let expected = match over(inp.right_idem(a), true) {
            Some(y2) => F2Vector::unit((a, y2)),
            None => F2Vector::zero(),
        };
        let got = delta_basis(n, y, &[a])?;
        if got != expected {
            let terms: Vec<String> = got
                .iter()
                .map(|(b, z)| format!("{}⊗{}", out.basis_name(*b), gens[*z].id))
                .collect();
            failures.push(format!(
                "δ({}, {}) = {}",
                gens[y].id,
                inp.basis_name(a),
                if terms.is_empty() {
                    "0".into()
                } else {
                    terms.join(" + ")
                }
            ));
        }
    }
    Ok(failures)
}

/// A DA bimodule given by a finite table up to a total input length.
#[derive(Clone, Debug)]
pub struct TableDa {
    out: Algebra,
    inp: Algebra,
    gens: Vec<GenInfo>,
    bound: usize,
    table: BTreeMap<(usize, Vec<Chord>), F2Vector<DaTerm>>,
}

impl TableDa {
    pub fn new(out: Algebra, inp: Algebra, gens: Vec<GenInfo>, bound: usize) -> Self {
        TableDa {
            out,
            inp,
            gens,
            bound,
            table: BTreeMap::new(),
        }
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn set(&mut self, key: (usize, Vec<Chord>), v: F2Vector<DaTerm>) {
        if v.is_zero() {
            self.table.remove(&key);
        } else {
            self.table.insert(key, v);
        }
    }

    pub fn get(&self, key: &(usize, Vec<Chord>)) -> F2Vector<DaTerm> {
        self.table.get(key).cloned().unwrap_or_default()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(usize, Vec<Chord>), &F2Vector<DaTerm>)> {
        self.table.iter()
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<DaRow> = self
            .table
            .iter()
            .map(|((y, cs), v)| DaRow {
                gen: self.gens[*y].id.clone(),
                inputs: cs.iter().map(|c| self.inp.chord_name(*c)).collect(),
                out: v
                    .iter()
                    .map(|(a, z)| [self.out.basis_name(*a), self.gens[*z].id.clone()])
                    .collect(),
            })
            .collect();
        let dump = DaDump {
            kind: "DA".into(),
            out_algebra: self.out.diagram().spec().clone(),
            in_algebra: self.inp.diagram().spec().clone(),
            bound: self.bound,
            generators: dump_gens(&self.out, &self.inp, &self.gens),
            table: rows,
        };
        serde_json::to_string_pretty(&dump).expect("dump serializes")
    }

    pub fn from_json(text: &str) -> Result<TableDa> {
        let dump: DaDump = serde_json::from_str(text)?;
        if dump.kind != "DA" {
            return Err(Error::Malformed(format!(
                "expected a DA dump, found {}",
                dump.kind
            )));
        }
        let out = Algebra::new(ArcDiagram::new(dump.out_algebra)?, 'I');
        let inp = Algebra::new(ArcDiagram::new(dump.in_algebra)?, 'I');
        let gens = load_gens(&out, &inp, &dump.generators)?;
        let mut t = TableDa::new(out, inp, gens, dump.bound);
        for row in dump.table {
            let y = gen_lookup(&t.gens, &row.gen)?;
            let cs = row
                .inputs
                .iter()
                .map(|s| t.inp.parse_chord(s))
                .collect::<Result<Vec<_>>>()?;
            let mut v = F2Vector::zero();
            for [a, z] in &row.out {
                v.toggle((t.out.parse_basis(a)?, gen_lookup(&t.gens, z)?));
            }
            t.set((y, cs), v);
        }
        Ok(t)
    }
}

#[derive(Serialize, Deserialize)]
struct DaRow {
    gen: String,
    inputs: Vec<String>,
    out: Vec<[String; 2]>,
}

#[derive(Serialize, Deserialize)]
struct DaDump {
    #[serde(rename = "type")]
    kind: String,
    out_algebra: ArcDiagramSpec,
    in_algebra: ArcDiagramSpec,
    bound: usize,
    generators: Vec<GenRow>,
    table: Vec<DaRow>,
}

impl DaModule for TableDa {
    fn out_algebra(&self) -> &Algebra {
        &self.out
    }
    fn in_algebra(&self) -> &Algebra {
        &self.inp
    }
    fn generators(&self) -> &[GenInfo] {
        &self.gens
    }
    fn delta_chords(&self, y: usize, cs: &[Chord]) -> Result<F2Vector<DaTerm>> {
        if total_len(cs) > self.bound {
            return Err(Error::Truncated(format!(
                "table holds inputs of total length {}, asked for {}",
                self.bound,
                total_len(cs)
            )));
        }
        Ok(self.get(&(y, cs.to_vec())))
    }
}

/// Tabulates a DA bimodule up to total input length `bound`.
pub fn tabulate_da<N: DaModule + ?Sized>(n: &N, bound: usize) -> Result<TableDa> {
    let keys = da_keys(n.in_algebra(), n.generators(), bound);
    let values: Vec<Result<F2Vector<DaTerm>>> = keys
        .par_iter()
        .map(|(y, cs)| n.delta_chords(*y, cs))
        .collect();
    let mut t = TableDa::new(
        n.out_algebra().clone(),
        n.in_algebra().clone(),
        n.generators().to_vec(),
        bound,
    );
    for (key, v) in keys.into_iter().zip(values) {
        t.set(key, v?);
    }
    Ok(t)
}

/// A morphism of AA bimodules: components f(L, x, R) in the target.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Morphism {
    pub table: BTreeMap<AaKey, F2Vector<usize>>,
}

impl Morphism {
    pub fn zero() -> Self {
        Morphism::default()
    }

    /// The identity: f_{0,1,0} = id and all higher components zero.
    pub fn identity(n_gens: usize) -> Self {
        let mut f = Morphism::zero();
        for x in 0..n_gens {
            f.set((Vec::new(), x, Vec::new()), F2Vector::unit(x));
        }
        f
    }

    pub fn set(&mut self, key: AaKey, v: F2Vector<usize>) {
        if v.is_zero() {
            self.table.remove(&key);
        } else {
            self.table.insert(key, v);
        }
    }

    pub fn get(&self, l: &[Chord], x: usize, r: &[Chord]) -> F2Vector<usize> {
        self.table
            .get(&(l.to_vec(), x, r.to_vec()))
            .cloned()
            .unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.table.is_empty()
    }

    pub fn add(&self, other: &Morphism) -> Morphism {
        let mut out = self.clone();
        for (k, v) in &other.table {
            let sum = out.get(&k.0, k.1, &k.2).add(v);
            out.set(k.clone(), sum);
        }
        out
    }

    /// Drops components with total input length above `bound`.
    pub fn truncate(&self, bound: usize) -> Morphism {
        Morphism {
            table: self
                .table
                .iter()
                .filter(|((l, _, r), _)| total_len(l) + total_len(r) <= bound)
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }
}

/// The differential of a morphism f: M → N, up to total length `bound`.
pub fn differential<M, N>(f: &Morphism, src: &M, tgt: &N, bound: usize) -> Result<Morphism>
where
    M: AaModule + ?Sized,
    N: AaModule + ?Sized,
{
    check_same(src.left_algebra(), tgt.left_algebra(), "morphism")?;
    check_same(src.right_algebra(), tgt.right_algebra(), "morphism")?;
    let left = src.left_algebra();
    let right = src.right_algebra();
    let keys = aa_keys(left, right, src.generators(), bound);
    let mut out = Morphism::zero();
    for (l, x, r) in keys {
        let mut total = F2Vector::zero();
        for i in 0..=l.len() {
            for j in 0..=r.len() {
                for z in f.get(&l[..i], x, &r[..j]).iter() {
                    total.add_assign(&m_checked(tgt, &l[i..], *z, &r[j..])?);
                }
                for z in m_checked(src, &l[..i], x, &r[..j])?.iter() {
                    total.add_assign(&f.get(&l[i..], *z, &r[j..]));
                }
            }
        }
        for k in 0..l.len().saturating_sub(1) {
            if let Some(c) = left.mul_chords(l[k + 1], l[k]) {
                let mut l2 = l[..k].to_vec();
                l2.push(c);
                l2.extend_from_slice(&l[k + 2..]);
                total.add_assign(&f.get(&l2, x, &r));
            }
        }
        for k in 0..r.len().saturating_sub(1) {
            if let Some(c) = right.mul_chords(r[k], r[k + 1]) {
                let mut r2 = r[..k].to_vec();
                r2.push(c);
                r2.extend_from_slice(&r[k + 2..]);
                total.add_assign(&f.get(&l, x, &r2));
            }
        }
        out.set((l, x, r), total);
    }
    Ok(out)
}

/// The composite g ∘ f, up to total length `bound`. `src` supplies the
/// algebras and generators of the source of f.
pub fn compose<M: AaModule + ?Sized>(
    g: &Morphism,
    f: &Morphism,
    src: &M,
    bound: usize,
) -> Morphism {
    let keys = aa_keys(
        src.left_algebra(),
        src.right_algebra(),
        src.generators(),
        bound,
    );
    let mut out = Morphism::zero();
    for (l, x, r) in keys {
        let mut total = F2Vector::zero();
        for i in 0..=l.len() {
            for j in 0..=r.len() {
                for z in f.get(&l[..i], x, &r[..j]).iter() {
                    total.add_assign(&g.get(&l[i..], *z, &r[j..]));
                }
            }
        }
        out.set((l, x, r), total);
    }
    out
}

/// True when f is a cycle of the morphism complex up to `bound`.
pub fn is_homomorphism<M, N>(f: &Morphism, src: &M, tgt: &N, bound: usize) -> Result<bool>
where
    M: AaModule + ?Sized,
    N: AaModule + ?Sized,
{
    Ok(differential(f, src, tgt, bound)?.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::identity_diagram;

    fn zt() -> ArcDiagram {
        ArcDiagram::from_json(
            r#"{"genus":1,"circles":[{"id":"c","points":["p1","p2","p3","p4"]}],
                "matched_pairs":[{"arc":"1","points":["p1","p3"]},{"arc":"2","points":["p2","p4"]}]}"#,
        )
        .unwrap()
    }

    fn chord(a: &Algebra, s: &str) -> AlgBasis {
        AlgBasis::Chord(a.parse_chord(s).unwrap())
    }

    #[test]
    fn identity_module_has_the_hexagon_action() {
        let d = identity_diagram(&zt()).unwrap();
        let m = build_module(&d, 6, 8).unwrap();
        let x1 = m.gen_index("x1").unwrap();
        let x2 = m.gen_index("x2").unwrap();
        assert!(m.differential(x1).is_zero() && m.differential(x2).is_zero());
        let s = m.left_algebra().clone();
        let r = m.right_algebra().clone();
        let out = m_outer_first(&m, &[chord(&s, "q1-q2")], x1, &[chord(&r, "p1-p2")]).unwrap();
        assert_eq!(out, F2Vector::unit(x2));
        assert!(verify_aa(&m, 6).unwrap().pass);
    }

    #[test]
    fn outer_first_order_reverses_left_inputs() {
        let d = identity_diagram(&zt()).unwrap();
        let m = build_module(&d, 6, 8).unwrap();
        let x1 = m.gen_index("x1").unwrap();
        let s = m.left_algebra().clone();
        let r = m.right_algebra().clone();
        let outer_first = [chord(&s, "q2-q3"), chord(&s, "q1-q2")];
        let inner_first = [chord(&s, "q1-q2"), chord(&s, "q2-q3")];
        let rho = [chord(&r, "p1-p3")];
        let a = m_outer_first(&m, &outer_first, x1, &rho).unwrap();
        assert_eq!(a, m_basis(&m, &inner_first, x1, &rho).unwrap());
        assert_eq!(a, F2Vector::unit(x1));
        assert!(m_outer_first(&m, &inner_first, x1, &rho).unwrap().is_zero());
    }

    #[test]
    fn strict_unitality() {
        let d = identity_diagram(&zt()).unwrap();
        let m = build_module(&d, 4, 8).unwrap();
        let x1 = m.gen_index("x1").unwrap();
        let j = m.generators()[x1].left;
        let i = m.generators()[x1].right;
        assert_eq!(
            m_basis(&m, &[AlgBasis::Idem(j)], x1, &[]).unwrap(),
            F2Vector::unit(x1)
        );
        assert_eq!(
            m_basis(&m, &[], x1, &[AlgBasis::Idem(i)]).unwrap(),
            F2Vector::unit(x1)
        );
        assert!(m_basis(&m, &[], x1, &[AlgBasis::Idem(1 - i)])
            .unwrap()
            .is_zero());
        let r = m.right_algebra().clone();
        assert!(m_basis(&m, &[AlgBasis::Idem(j)], x1, &[chord(&r, "p1-p2")])
            .unwrap()
            .is_zero());
    }

    #[test]
    fn flipped_entry_breaks_the_relations() {
        let d = identity_diagram(&zt()).unwrap();
        let mut m = build_module(&d, 4, 8).unwrap();
        let x1 = m.gen_index("x1").unwrap();
        let x2 = m.gen_index("x2").unwrap();
        let s = m.left_algebra().clone();
        let r = m.right_algebra().clone();
        let key = (
            vec![s.parse_chord("q1-q2").unwrap()],
            x1,
            vec![r.parse_chord("p1-p2").unwrap()],
        );
        let mut v = m.get(&key);
        v.toggle(x2);
        m.set(key, v);
        let verdict = verify_aa(&m, 4).unwrap();
        assert!(!verdict.pass);
        assert!(verdict.witness.is_some());
    }

    #[test]
    fn table_is_truncated_beyond_its_bound() {
        let d = identity_diagram(&zt()).unwrap();
        let m = build_module(&d, 2, 8).unwrap();
        let r = m.right_algebra().clone();
        let long = r.parse_chord("p1-p4").unwrap();
        let err = m.m_chords(&[], 0, &[long]).unwrap_err();
        assert!(err.is_truncation());
    }

    #[test]
    fn json_round_trip() {
        let d = identity_diagram(&zt()).unwrap();
        let m = build_module(&d, 4, 8).unwrap();
        let text = m.to_json();
        let back = TableAa::from_json(&text).unwrap();
        assert_eq!(back.to_json(), text);
        let dd = dd_half_identity(&zt()).unwrap();
        assert_eq!(
            DdModule::from_json(&dd.to_json()).unwrap().to_json(),
            dd.to_json()
        );
        let da = tabulate_da(&identity_da(m.right_algebra()), 3).unwrap();
        assert_eq!(
            TableDa::from_json(&da.to_json()).unwrap().to_json(),
            da.to_json()
        );
    }

    #[test]
    fn half_identity_over_the_torus() {
        let dd = dd_half_identity(&zt()).unwrap();
        let a = dd.left_algebra().clone();
        let b = dd.right_algebra().clone();
        let w1 = 0;
        let w2 = 1;
        let expect1: F2Vector<DdTerm> = [
            (chord(&a, "p1-p2"), w2, chord(&b, "q1-q2")),
            (chord(&a, "p3-p4"), w2, chord(&b, "q3-q4")),
        ]
        .into_iter()
        .collect();
        assert_eq!(dd.delta1(w1), &expect1);
        let expect2: F2Vector<DdTerm> = [(chord(&a, "p2-p3"), w1, chord(&b, "q2-q3"))]
            .into_iter()
            .collect();
        assert_eq!(dd.delta1(w2), &expect2);
        assert!(verify_dd(&dd).pass);
        for w in 0..2 {
            for (x, _, y) in dd.delta1(w).iter() {
                assert!(x.as_chord().unwrap().is_short() && y.as_chord().unwrap().is_short());
            }
        }
    }

    #[test]
    fn dd_checks() {
        let mut dd = dd_half_identity(&zt()).unwrap();
        let a = dd.left_algebra().clone();
        let b = dd.right_algebra().clone();
        let mut zero = dd.clone();
        zero.clear(0);
        zero.clear(1);
        assert!(verify_dd(&zero).pass);
        // pair ρ12 with σ34 instead of σ12: δ² acquires ρ13 ⊗ w1 ⊗ σ24
        dd.clear(0);
        dd.add_term(0, chord(&a, "p1-p2"), 1, chord(&b, "q3-q4"))
            .unwrap();
        let v = verify_dd(&dd);
        assert!(!v.pass);
        assert!(v.witness.unwrap().contains("p1-p3"));
        assert!(dd
            .add_term(0, chord(&a, "p2-p3"), 1, chord(&b, "q2-q3"))
            .is_err());
    }

    #[test]
    fn identity_da_law() {
        let alg = Algebra::new(zt(), 'I');
        let id = identity_da(&alg);
        let p12 = alg.parse_chord("p1-p2").unwrap();
        let i1 = alg.chord_left_idem(p12);
        let i2 = alg.chord_right_idem(p12);
        assert_eq!(
            delta_basis(&id, i1, &[AlgBasis::Chord(p12)]).unwrap(),
            F2Vector::unit((AlgBasis::Chord(p12), i2))
        );
        assert!(delta_basis(&id, i1, &[]).unwrap().is_zero());
        assert_eq!(
            delta_basis(&id, i1, &[AlgBasis::Idem(i1)]).unwrap(),
            F2Vector::unit((AlgBasis::Idem(i1), i1))
        );
        assert!(verify_da(&id, 6).unwrap().pass);
        let mut t = tabulate_da(&id, 4).unwrap();
        let key = (i1, vec![p12]);
        t.set(key, F2Vector::zero());
        assert!(!verify_da(&t, 4).unwrap().pass);
    }

    #[test]
    fn identity_morphism_is_a_unit_cycle() {
        let d = identity_diagram(&zt()).unwrap();
        let m = build_module(&d, 4, 8).unwrap();
        let id = Morphism::identity(m.generators().len());
        assert!(is_homomorphism(&id, &m, &m, 4).unwrap());
        let mut f = Morphism::zero();
        let s = m.left_algebra().clone();
        f.set(
            (vec![s.parse_chord("q1-q2").unwrap()], 0, vec![]),
            F2Vector::unit(1),
        );
        assert_eq!(compose(&id, &f, &m, 4), f);
        assert_eq!(compose(&f, &id, &m, 4), f);
    }
}
