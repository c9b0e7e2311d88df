//! DD(I/2) ⊠ M(I) reduces to the identity type DA bimodule.

use std::path::PathBuf;

use bhf::arc_algebra::ArcDiagram;
use bhf::bimodules::{
    dd_half_identity, identity_da, identity_law_failures, tabulate_da, DaModule, DiagramAa,
};
use bhf::box_tensor::{dd_box_aa, DEFAULT_BOX_CAP};
use bhf::diagram::Diagram;
use bhf::reduction::{isomorphic_da, reduce_da};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data");
    let z = ArcDiagram::from_json(&std::fs::read_to_string(data.join("zt.json"))?)?;
    let d = Diagram::load_valid(&data.join("zt_identity.json"))?;
    let m = DiagramAa::new(&d, 8);
    let da = tabulate_da(&dd_box_aa(&dd_half_identity(&z)?, &m, DEFAULT_BOX_CAP)?, 6)?;
    let (red, cancelled) = reduce_da(&da, DEFAULT_BOX_CAP)?;
    println!(
        "{} cancellations, {} generators",
        cancelled.len(),
        red.generators().len()
    );
    println!(
        "{:?}",
        isomorphic_da(&red, &identity_da(red.in_algebra()), 6)?
    );
    println!("identity law failures: {:?}", identity_law_failures(&red)?);
    Ok(())
}
