//! Remove the bigon of a finger move and compare with the diagram without it.

use std::path::PathBuf;

use bhf::bimodules::{build_module, AaModule};
use bhf::diagram::Diagram;
use bhf::reduction::{cancel, isolate_bigon};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data");
    let b = build_module(&Diagram::load_valid(&data.join("zt_finger_b.json"))?, 6, 8)?;
    let nb = build_module(&Diagram::load_valid(&data.join("zt_finger_nb.json"))?, 6, 8)?;
    let x1 = (0..b.generators().len())
        .find(|&x| !b.differential(x).is_zero())
        .expect("a bigon");
    let x2 = *b.differential(x1).iter().next().unwrap();
    let r = cancel(&isolate_bigon(&b, x1, x2)?, x1, x2, 6)?;
    let same = r.reduced.generators() == nb.generators() && r.reduced.entries().eq(nb.entries());
    println!(
        "cancelled {} -> {}: {} entries, identical to the bigon-free module {}",
        b.generators()[x1].id,
        b.generators()[x2].id,
        r.reduced.entries().count(),
        same
    );
    Ok(())
}
