//! Differentials and composition of bimodule morphisms.

use std::path::PathBuf;

use bhf::bimodules::{build_module, compose, differential, AaModule, Morphism};
use bhf::diagram::Diagram;
use bhf::ground::F2Vector;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data");
    let m = build_module(&Diagram::load_valid(&data.join("zt_twist.json"))?, 4, 8)?;
    let mut id = Morphism::zero();
    for x in 0..m.generators().len() {
        id.set((vec![], x, vec![]), F2Vector::from_iter([x]));
    }
    let d = differential(&id, &m, &m, 4)?;
    println!("∂(id) is zero: {}", d.is_zero());
    println!("id ∘ id = id: {}", compose(&id, &id, &m, 4) == id);
    Ok(())
}
