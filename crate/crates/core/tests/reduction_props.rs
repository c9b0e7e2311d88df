use std::path::PathBuf;

use bhf::bimodules::{build_module, verify_aa, AaModule, GenInfo, TableAa};
use bhf::diagram::Diagram;
use bhf::ground::F2Vector;
use bhf::reduction::{change_basis, homology_blocks, isomorphic_reduced, reduce, LinearMap};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn module(name: &str, bound: usize) -> TableAa {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name);
    build_module(&Diagram::load_valid(&path).unwrap(), bound, 8).unwrap()
}

/// M plus contractible pairs on which chords act by zero, seen through a
/// random change of basis inside each idempotent block.
fn disguise(m: &TableAa, pairs: usize, rng: &mut StdRng) -> TableAa {
    let mut gens = m.generators().to_vec();
    let nl = m.left_algebra().num_idempotents();
    let nr = m.right_algebra().num_idempotents();
    let mut arrows = Vec::new();
    for p in 0..pairs {
        let (left, right) = (rng.gen_range(0..nl), rng.gen_range(0..nr));
        let a = gens.len();
        gens.push(GenInfo {
            id: format!("u{p}"),
            left,
            right,
        });
        gens.push(GenInfo {
            id: format!("v{p}"),
            left,
            right,
        });
        arrows.push((a, a + 1));
    }
    let mut sum = TableAa::new(
        m.left_algebra().clone(),
        m.right_algebra().clone(),
        gens.clone(),
        m.bound(),
    );
    for (k, v) in m.entries() {
        sum.set(k.clone(), v.clone());
    }
    for (a, b) in arrows {
        sum.set((Vec::new(), a, Vec::new()), F2Vector::unit(b));
    }
    // unitriangular change of basis within blocks, in a random order
    let n = gens.len();
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    let mut to_old: LinearMap = (0..n).map(F2Vector::unit).collect();
    for i in 0..n {
        for j in 0..i {
            let (a, b) = (order[i], order[j]);
            if gens[a].left == gens[b].left && gens[a].right == gens[b].right && rng.gen_bool(0.5) {
                to_old[a].toggle(b);
            }
        }
    }
    change_basis(&sum, &to_old).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn reduction_of_disguised_modules(seed in any::<u64>(), pairs in 1usize..3, which in 0usize..3) {
        let name = ["zt_identity.json", "zt_twist.json", "zt_twist_sq.json"][which];
        let m = module(name, 4);
        let mut rng = StdRng::seed_from_u64(seed);
        let big = disguise(&m, pairs, &mut rng);
        prop_assert!(verify_aa(&big, 4).unwrap().pass);
        let r = reduce(&big, 4).unwrap();
        prop_assert_eq!(r.cancelled.len(), pairs);
        prop_assert!(verify_aa(&r.reduced, 4).unwrap().pass);
        prop_assert_eq!(homology_blocks(&big).unwrap(), homology_blocks(&r.reduced).unwrap());
        prop_assert!(isomorphic_reduced(&r.reduced, &m, 4).unwrap().is_yes());
        let again = reduce(&r.reduced, 4).unwrap();
        prop_assert!(again.cancelled.is_empty());
    }
}
