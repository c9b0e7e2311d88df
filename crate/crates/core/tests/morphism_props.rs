use std::path::PathBuf;

use bhf::bimodules::{aa_keys, build_module, compose, differential, AaModule, Morphism, TableAa};
use bhf::diagram::Diagram;
use bhf::ground::F2Vector;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const BOUND: usize = 4;

fn modules() -> Vec<TableAa> {
    [
        "zt_identity.json",
        "zt_twist.json",
        "zt_twist_inv.json",
        "zt_twist_sq.json",
    ]
    .iter()
    .map(|name| {
        let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
            .join("../../data")
            .join(name);
        build_module(&Diagram::load_valid(&path).unwrap(), BOUND, 8).unwrap()
    })
    .collect()
}

/// A sparse morphism with components landing in the right idempotent blocks.
fn random_morphism(src: &TableAa, tgt: &TableAa, rng: &mut StdRng) -> Morphism {
    let left = src.left_algebra();
    let right = src.right_algebra();
    let mut f = Morphism::zero();
    for (l, x, r) in aa_keys(left, right, src.generators(), BOUND) {
        if !rng.gen_bool(0.15) {
            continue;
        }
        let gl = l
            .last()
            .map_or(src.generators()[x].left, |c| left.chord_left_idem(*c));
        let gr = r
            .last()
            .map_or(src.generators()[x].right, |c| right.chord_right_idem(*c));
        let mut v = F2Vector::zero();
        for (y, g) in tgt.generators().iter().enumerate() {
            if g.left == gl && g.right == gr && rng.gen_bool(0.5) {
                v.toggle(y);
            }
        }
        f.set((l, x, r), v);
    }
    f
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn differential_squares_to_zero(seed in any::<u64>(), a in 0usize..4, b in 0usize..4) {
        let ms = modules();
        let mut rng = StdRng::seed_from_u64(seed);
        let f = random_morphism(&ms[a], &ms[b], &mut rng);
        let df = differential(&f, &ms[a], &ms[b], BOUND).unwrap();
        prop_assert!(differential(&df, &ms[a], &ms[b], BOUND).unwrap().is_zero());
    }

    #[test]
    fn composition_is_associative(seed in any::<u64>(), idx in prop::array::uniform4(0usize..4)) {
        let ms = modules();
        let mut rng = StdRng::seed_from_u64(seed);
        let [a, b, c, d] = idx;
        let f = random_morphism(&ms[a], &ms[b], &mut rng);
        let g = random_morphism(&ms[b], &ms[c], &mut rng);
        let h = random_morphism(&ms[c], &ms[d], &mut rng);
        let left = compose(&h, &compose(&g, &f, &ms[a], BOUND), &ms[a], BOUND);
        let right = compose(&compose(&h, &g, &ms[b], BOUND), &f, &ms[a], BOUND);
        prop_assert_eq!(left, right);
    }

    #[test]
    fn differential_is_a_derivation_of_composition(seed in any::<u64>(), idx in prop::array::uniform3(0usize..4)) {
        let ms = modules();
        let mut rng = StdRng::seed_from_u64(seed);
        let [a, b, c] = idx;
        let f = random_morphism(&ms[a], &ms[b], &mut rng);
        let g = random_morphism(&ms[b], &ms[c], &mut rng);
        let lhs = differential(&compose(&g, &f, &ms[a], BOUND), &ms[a], &ms[c], BOUND).unwrap();
        let rhs = compose(&differential(&g, &ms[b], &ms[c], BOUND).unwrap(), &f, &ms[a], BOUND)
            .add(&compose(&g, &differential(&f, &ms[a], &ms[b], BOUND).unwrap(), &ms[a], BOUND));
        prop_assert_eq!(lhs, rhs);
    }
}
