//! Print the multiplication table of the algebra of the torus arc diagram.

use std::path::PathBuf;

use bhf::arc_algebra::{check_soundness, Algebra, ArcDiagram};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/zt.json");
    let z = ArcDiagram::from_json(&std::fs::read_to_string(path)?)?;
    let alg = Algebra::new(z, 'I');
    let basis = alg.basis();
    for &a in &basis {
        let row: Vec<String> = basis
            .iter()
            .map(|&b| {
                alg.mul_basis(a, b)
                    .map_or("0".to_string(), |c| alg.basis_name(c))
            })
            .collect();
        println!("{:>8} | {}", alg.basis_name(a), row.join(" "));
    }
    let s = check_soundness(&alg);
    println!(
        "dimension {}, {} triples checked, sound {}",
        s.dimension,
        s.triples_checked,
        s.ok()
    );
    Ok(())
}
