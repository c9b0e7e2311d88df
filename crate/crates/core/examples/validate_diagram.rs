//! Load a diagram file and report its cell complex checks and generators.
//!
//! cargo run --example validate_diagram -- data/zt_twist.json

use std::path::PathBuf;

use bhf::diagram::Diagram;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/zt_twist.json")
        });
    let d = Diagram::load(&path)?;
    let report = d.validate();
    println!("{}: valid {}", path.display(), report.ok());
    for failure in &report.failures {
        println!("  failed: {failure:?}");
    }
    println!("euler characteristic {}", d.euler_characteristic());
    for g in d.generators() {
        println!(
            "generator {} idempotents ({}, {})",
            g.id, g.left_idem, g.right_idem
        );
    }
    Ok(())
}
