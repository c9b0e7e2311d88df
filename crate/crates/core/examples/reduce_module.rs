//! Cancel differential arrows until a minimal model is reached.

use std::path::PathBuf;

use bhf::bimodules::{build_module, verify_aa, AaModule};
use bhf::diagram::Diagram;
use bhf::reduction::{homology_blocks, reduce};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let name = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "zt_finger_b.json".into());
    let d = Diagram::load_valid(
        &PathBuf::from(env!("CARGO_MANIFEST_DIR"))
            .join("../../data")
            .join(&name),
    )?;
    let m = build_module(&d, 6, 8)?;
    let r = reduce(&m, 6)?;
    println!(
        "{name}: {} generators before, {} after",
        m.generators().len(),
        r.reduced.generators().len()
    );
    for (x, y) in &r.cancelled {
        println!("cancelled {x} -> {y}");
    }
    println!(
        "reduced model satisfies the relations: {}",
        verify_aa(&r.reduced, 6)?.pass
    );
    println!("homology blocks {:?}", homology_blocks(&m)?.ranks);
    Ok(())
}
