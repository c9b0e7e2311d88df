//! Tabulate the AA bimodule of a diagram and print its nonzero operations.

use std::path::PathBuf;

use bhf::bimodules::{build_module, AaModule};
use bhf::diagram::Diagram;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let name = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "zt_identity.json".into());
    let d = Diagram::load_valid(
        &PathBuf::from(env!("CARGO_MANIFEST_DIR"))
            .join("../../data")
            .join(&name),
    )?;
    let m = build_module(&d, 6, 8)?;
    let gens = m.generators();
    for ((l, x, r), out) in m.entries() {
        let l: Vec<_> = l.iter().map(|c| m.left_algebra().chord_name(*c)).collect();
        let r: Vec<_> = r.iter().map(|c| m.right_algebra().chord_name(*c)).collect();
        let out: Vec<_> = out.iter().map(|y| gens[*y].id.as_str()).collect();
        println!("m({:?}, {}, {:?}) = {:?}", l, gens[*x].id, r, out);
    }
    println!(
        "{} generators, {} nonzero entries",
        gens.len(),
        m.entries().count()
    );
    Ok(())
}
