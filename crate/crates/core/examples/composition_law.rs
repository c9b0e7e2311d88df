//! Gluing the bimodules of two mapping classes gives the bimodule of their composite.

use std::path::PathBuf;

use bhf::arc_algebra::ArcDiagram;
use bhf::bimodules::{build_module, dd_half_identity, tabulate, DiagramAa};
use bhf::box_tensor::{aa_box_da, dd_box_aa, DEFAULT_BOX_CAP};
use bhf::diagram::Diagram;
use bhf::reduction::{isomorphic_reduced, reduce};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data");
    let load = |n: &str| Diagram::load_valid(&data.join(n));
    let z = ArcDiagram::from_json(&std::fs::read_to_string(data.join("zt.json"))?)?;
    let dd = dd_half_identity(&z)?;
    for (phi, psi, composite) in [
        ("zt_twist.json", "zt_twist.json", "zt_twist_sq.json"),
        ("zt_twist.json", "zt_twist_inv.json", "zt_identity.json"),
        ("zt_twist.json", "zt_identity.json", "zt_twist.json"),
    ] {
        let (dphi, dpsi) = (load(phi)?, load(psi)?);
        let (mphi, mpsi) = (DiagramAa::new(&dphi, 8), DiagramAa::new(&dpsi, 8));
        let glued = tabulate(
            &aa_box_da(
                &mphi,
                &dd_box_aa(&dd, &mpsi, DEFAULT_BOX_CAP)?,
                DEFAULT_BOX_CAP,
            )?,
            6,
        )?;
        let left = reduce(&glued, 6)?;
        let right = reduce(&build_module(&load(composite)?, 6, 8)?, 6)?;
        let verdict = isomorphic_reduced(&left.reduced, &right.reduced, 6)?;
        println!("{phi} ∘ {psi} ≅ {composite}: {}", verdict.is_yes());
    }
    Ok(())
}
