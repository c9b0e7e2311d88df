//! Check the A∞ relations of each shipped bimodule up to a chord bound.

use std::path::PathBuf;

use bhf::bimodules::{build_module, verify_aa};
use bhf::diagram::Diagram;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bound: usize = std::env::args()
        .nth(1)
        .map_or(6, |s| s.parse().expect("bound"));
    for name in [
        "zt_identity.json",
        "zt_twist.json",
        "zt_twist_inv.json",
        "zt_twist_sq.json",
    ] {
        let d = Diagram::load_valid(
            &PathBuf::from(env!("CARGO_MANIFEST_DIR"))
                .join("../../data")
                .join(name),
        )?;
        let v = verify_aa(&build_module(&d, bound, 8)?, bound)?;
        println!(
            "{name}: pass {} over {} inputs {:?}",
            v.pass, v.checked, v.witness
        );
    }
    Ok(())
}
