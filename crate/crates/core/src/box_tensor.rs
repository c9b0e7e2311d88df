//! Box tensor products DD ⊠ AA → DA and AA ⊠ DA → AA, evaluated lazily.

use std::collections::HashMap;
use std::sync::Mutex;

use crate::arc_algebra::{AlgBasis, Algebra, Chord};
use crate::bimodules::{delta_basis, m_basis, AaModule, DaModule, DaTerm, DdModule, GenInfo};
use crate::error::{Error, Result};
use crate::ground::F2Vector;

/// Default limit on the number of δ¹ iterations or DA blocks in one evaluation.
pub const DEFAULT_BOX_CAP: usize = 32;

fn mismatch(a: &Algebra, b: &Algebra, what: &str) -> Result<()> {
    if a != b {
        return Err(Error::Mismatch(format!("{what}: middle algebras differ")));
    }
    Ok(())
}

/// Left product, generator and right outputs (innermost first) of δ^r.
type Iterate = (AlgBasis, usize, Vec<AlgBasis>);

type DeltaCache = HashMap<(usize, Vec<Chord>), F2Vector<DaTerm>>;

/// DD ⊠ AA as a type DA bimodule over (left of P, right of M).
pub struct DdBoxAa<'a, M: AaModule + ?Sized> {
    dd: &'a DdModule,
    m: &'a M,
    pairs: Vec<(usize, usize)>,
    index: HashMap<(usize, usize), usize>,
    gens: Vec<GenInfo>,
    iterates: Vec<Vec<Iterate>>,
    cache: Mutex<DeltaCache>,
}

/// Sums over r of δ^r(w), pruning terms whose left product vanishes.
fn dd_iterates(dd: &DdModule, w: usize, cap: usize) -> Result<Vec<Iterate>> {
    let a = dd.left_algebra();
    let mut level: F2Vector<Iterate> =
        F2Vector::unit((AlgBasis::Idem(dd.generators()[w].left), w, Vec::new()));
    let mut all: F2Vector<Iterate> = F2Vector::zero();
    for _ in 0..=cap {
        all.add_assign(&level);
        let mut next = F2Vector::zero();
        for (p, u, bs) in level.iter() {
            for (x, v, b) in dd.delta1(*u).iter() {
                if let Some(q) = a.mul_basis(*p, *x) {
                    let mut bs2 = bs.clone();
                    bs2.push(*b);
                    next.toggle((q, *v, bs2));
                }
            }
        }
        if next.is_zero() {
            return Ok(all.into_iter().collect());
        }
        level = next;
    }
    Err(Error::Unbounded(format!(
        "δ¹ iterates of {} survive {cap} steps",
        dd.generators()[w].id
    )))
}

/// The box product of a DD bimodule with an AA bimodule.
pub fn dd_box_aa<'a, M: AaModule + ?Sized>(
    dd: &'a DdModule,
    m: &'a M,
    cap: usize,
) -> Result<DdBoxAa<'a, M>> {
    mismatch(dd.right_algebra(), m.left_algebra(), "DD ⊠ AA")?;
    let mut pairs = Vec::new();
    let mut gens = Vec::new();
    for (w, gw) in dd.generators().iter().enumerate() {
        for (x, gx) in m.generators().iter().enumerate() {
            if gw.right == gx.left {
                pairs.push((w, x));
                gens.push(GenInfo {
                    id: format!("{}⊗{}", gw.id, gx.id),
                    left: gw.left,
                    right: gx.right,
                });
            }
        }
    }
    let index = pairs.iter().enumerate().map(|(i, p)| (*p, i)).collect();
    let iterates = (0..dd.generators().len())
        .map(|w| dd_iterates(dd, w, cap))
        .collect::<Result<Vec<_>>>()?;
    Ok(DdBoxAa {
        dd,
        m,
        pairs,
        index,
        gens,
        iterates,
        cache: Mutex::new(HashMap::new()),
    })
}

impl<M: AaModule + ?Sized> DaModule for DdBoxAa<'_, M> {
    fn out_algebra(&self) -> &Algebra {
        self.dd.left_algebra()
    }
    fn in_algebra(&self) -> &Algebra {
        self.m.right_algebra()
    }
    fn generators(&self) -> &[GenInfo] {
        &self.gens
    }
    fn delta_chords(&self, g: usize, cs: &[Chord]) -> Result<F2Vector<DaTerm>> {
        let key = (g, cs.to_vec());
        if let Some(hit) = self.cache.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let (w, x) = self.pairs[g];
        let rhos: Vec<AlgBasis> = cs.iter().map(|c| AlgBasis::Chord(*c)).collect();
        let mut out = F2Vector::zero();
        for (p, u, bs) in &self.iterates[w] {
            for y in m_basis(self.m, bs, x, &rhos)?.iter() {
                let target = self.index.get(&(*u, *y)).ok_or_else(|| {
                    Error::Invalid(
                        "DD ⊠ AA produced a generator with mismatched idempotents".into(),
                    )
                })?;
                out.toggle((*p, *target));
            }
        }
        self.cache.lock().unwrap().insert(key, out.clone());
        Ok(out)
    }
}

/// AA ⊠ DA as a type AA bimodule over (left of M, right of N).
pub struct AaBoxDa<'a, M: AaModule + ?Sized, N: DaModule + ?Sized> {
    m: &'a M,
    n: &'a N,
    pairs: Vec<(usize, usize)>,
    index: HashMap<(usize, usize), usize>,
    gens: Vec<GenInfo>,
    cap: usize,
}

/// The box product of an AA bimodule with a DA bimodule.
pub fn aa_box_da<'a, M, N>(m: &'a M, n: &'a N, cap: usize) -> Result<AaBoxDa<'a, M, N>>
where
    M: AaModule + ?Sized,
    N: DaModule + ?Sized,
{
    mismatch(m.right_algebra(), n.out_algebra(), "AA ⊠ DA")?;
    let mut pairs = Vec::new();
    let mut gens = Vec::new();
    for (x, gx) in m.generators().iter().enumerate() {
        for (y, gy) in n.generators().iter().enumerate() {
            if gx.right == gy.left {
                pairs.push((x, y));
                gens.push(GenInfo {
                    id: format!("{}⊗{}", gx.id, gy.id),
                    left: gx.left,
                    right: gy.right,
                });
            }
        }
    }
    let index = pairs.iter().enumerate().map(|(i, p)| (*p, i)).collect();
    Ok(AaBoxDa {
        m,
        n,
        pairs,
        index,
        gens,
        cap,
    })
}

impl<M: AaModule + ?Sized, N: DaModule + ?Sized> AaBoxDa<'_, M, N> {
    /// Feeds `cs[k..]` through N block by block starting from `y`, then
    /// applies M to the collected outputs.
    #[allow(clippy::too_many_arguments)]
    fn feed(
        &self,
        sigmas: &[AlgBasis],
        x: usize,
        y: usize,
        cs: &[Chord],
        k: usize,
        bs: &mut Vec<AlgBasis>,
        out: &mut F2Vector<usize>,
    ) -> Result<()> {
        if k == cs.len() {
            for z in m_basis(self.m, sigmas, x, bs)?.iter() {
                out.toggle(self.index[&(*z, y)]);
            }
        }
        if bs.last().is_some_and(|b| b.as_chord().is_none()) {
            return Ok(());
        }
        if bs.len() >= self.cap {
            let mut probe = F2Vector::zero();
            for k2 in k..=cs.len() {
                probe.add_assign(&delta_basis(self.n, y, &chords(&cs[k..k2]))?);
            }
            if probe.is_zero() {
                return Ok(());
            }
            return Err(Error::Unbounded(format!(
                "DA outputs keep coming after {} blocks",
                self.cap
            )));
        }
        for k2 in k..=cs.len() {
            for (b, y2) in delta_basis(self.n, y, &chords(&cs[k..k2]))?.iter() {
                if b.as_chord().is_none()
                    && (!bs.is_empty() || !sigmas.is_empty() || k2 != cs.len())
                {
                    // strict unitality: an idempotent among several inputs gives zero
                    continue;
                }
                bs.push(*b);
                self.feed(sigmas, x, *y2, cs, k2, bs, out)?;
                bs.pop();
            }
        }
        Ok(())
    }
}

fn chords(cs: &[Chord]) -> Vec<AlgBasis> {
    cs.iter().map(|c| AlgBasis::Chord(*c)).collect()
}

impl<M: AaModule + ?Sized, N: DaModule + ?Sized> AaModule for AaBoxDa<'_, M, N> {
    fn left_algebra(&self) -> &Algebra {
        self.m.left_algebra()
    }
    fn right_algebra(&self) -> &Algebra {
        self.n.in_algebra()
    }
    fn generators(&self) -> &[GenInfo] {
        &self.gens
    }
    fn m_chords(&self, sigmas: &[Chord], g: usize, rhos: &[Chord]) -> Result<F2Vector<usize>> {
        let (x, y) = self.pairs[g];
        let sig = chords(sigmas);
        let mut out = F2Vector::zero();
        self.feed(&sig, x, y, rhos, 0, &mut Vec::new(), &mut out)?;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arc_algebra::ArcDiagram;
    use crate::bimodules::{
        build_module, dd_half_identity, identity_da, tabulate, verify_aa, verify_da, DiagramAa,
    };
    use crate::diagram::identity_diagram;

    fn zt() -> ArcDiagram {
        ArcDiagram::from_json(
            r#"{"genus":1,"circles":[{"id":"c","points":["p1","p2","p3","p4"]}],
                "matched_pairs":[{"arc":"1","points":["p1","p3"]},{"arc":"2","points":["p2","p4"]}]}"#,
        )
        .unwrap()
    }

    #[test]
    fn half_identity_times_identity_module() {
        let z = zt();
        let d = identity_diagram(&z).unwrap();
        let m = DiagramAa::new(&d, 8);
        let dd = dd_half_identity(&z).unwrap();
        let da = dd_box_aa(&dd, &m, DEFAULT_BOX_CAP).unwrap();
        let ids: Vec<&str> = da.generators().iter().map(|g| g.id.as_str()).collect();
        assert_eq!(ids, ["w1⊗x1", "w2⊗x2"]);
        let a = da.out_algebra().clone();
        let p12 = a.parse_chord("p1-p2").unwrap();
        assert_eq!(
            delta_basis(&da, 0, &[AlgBasis::Chord(p12)]).unwrap(),
            F2Vector::unit((AlgBasis::Chord(p12), 1))
        );
        assert!(verify_da(&da, 6).unwrap().pass);
    }

    #[test]
    fn zero_dd_leaves_only_the_module_action() {
        let z = zt();
        let d = identity_diagram(&z).unwrap();
        let m = DiagramAa::new(&d, 8);
        let mut dd = dd_half_identity(&z).unwrap();
        dd.clear(0);
        dd.clear(1);
        let da = dd_box_aa(&dd, &m, DEFAULT_BOX_CAP).unwrap();
        let a = da.out_algebra().clone();
        for y in 0..2 {
            for c in a.chords() {
                assert!(delta_basis(&da, y, &[AlgBasis::Chord(c)])
                    .unwrap()
                    .is_zero());
            }
        }
    }

    #[test]
    fn identity_module_times_identity_da() {
        let d = identity_diagram(&zt()).unwrap();
        let m = build_module(&d, 6, 8).unwrap();
        let id = identity_da(m.right_algebra());
        let prod = aa_box_da(&m, &id, DEFAULT_BOX_CAP).unwrap();
        let t = tabulate(&prod, 6).unwrap();
        assert_eq!(t.generators().len(), 2);
        let renamed: Vec<_> = t.entries().map(|(k, v)| (k.clone(), v.clone())).collect();
        let orig: Vec<_> = m.entries().map(|(k, v)| (k.clone(), v.clone())).collect();
        assert_eq!(renamed, orig);
        assert!(verify_aa(&t, 6).unwrap().pass);
    }

    #[test]
    fn mismatched_algebras_are_rejected() {
        let d = identity_diagram(&zt()).unwrap();
        let m = build_module(&d, 2, 8).unwrap();
        let id = identity_da(m.left_algebra());
        assert!(matches!(aa_box_da(&m, &id, 4), Err(Error::Mismatch(_))));
    }
}
