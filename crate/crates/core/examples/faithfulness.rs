//! Homology blocks tell the identity apart from nontrivial mapping classes.

use std::path::PathBuf;

use bhf::bimodules::build_module;
use bhf::diagram::Diagram;
use bhf::reduction::homology_blocks;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data");
    for name in [
        "zt_identity.json",
        "zt_twist.json",
        "zt_twist_inv.json",
        "zt_twist_sq.json",
        "zt_finger_b.json",
    ] {
        let blocks = homology_blocks(&build_module(
            &Diagram::load_valid(&data.join(name))?,
            6,
            8,
        )?)?;
        println!(
            "{name}: {:?} identity {}",
            blocks.ranks,
            blocks.is_identity()
        );
    }
    Ok(())
}
