//! Form DD(I/2) ⊠ M(τ) and M(τ) ⊠ (DD(I/2) ⊠ M(τ)) and verify both.

use std::path::PathBuf;

use bhf::arc_algebra::ArcDiagram;
use bhf::bimodules::{
    dd_half_identity, tabulate, tabulate_da, verify_aa, verify_da, AaModule, DaModule, DiagramAa,
};
use bhf::box_tensor::{aa_box_da, dd_box_aa, DEFAULT_BOX_CAP};
use bhf::diagram::Diagram;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data");
    let z = ArcDiagram::from_json(&std::fs::read_to_string(data.join("zt.json"))?)?;
    let d = Diagram::load_valid(&data.join("zt_twist.json"))?;
    let m = DiagramAa::new(&d, 8);
    let dd = dd_half_identity(&z)?;
    let da = tabulate_da(&dd_box_aa(&dd, &m, DEFAULT_BOX_CAP)?, 6)?;
    println!(
        "DD ⊠ M(τ): {} generators, verify_da {}",
        da.generators().len(),
        verify_da(&da, 6)?.pass
    );
    let aa = tabulate(&aa_box_da(&m, &da, DEFAULT_BOX_CAP)?, 6)?;
    println!(
        "M(τ) ⊠ (DD ⊠ M(τ)): {} generators, verify_aa {}",
        aa.generators().len(),
        verify_aa(&aa, 6)?.pass
    );
    Ok(())
}
