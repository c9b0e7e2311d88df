//! Count immersed polygons by peeling faces and compare with the brute-force census.

use std::path::PathBuf;

use bhf::diagram::Diagram;
use bhf::polygons::{all_queries, oracle_census, PeelCounter};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let name = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "zt_twist.json".into());
    let d = Diagram::load_valid(
        &PathBuf::from(env!("CARGO_MANIFEST_DIR"))
            .join("../../data")
            .join(&name),
    )?;
    let counter = PeelCounter::new(&d, 8);
    let census = oracle_census(&d, 8, 6);
    let gens = d.generators();
    let mut odd = 0;
    for q in all_queries(&d, 6) {
        let n = counter.count(&q)?;
        let expected = census.counts.get(&q).copied().unwrap_or(0);
        assert_eq!(n % 2, expected % 2, "{q:?}");
        if n % 2 == 1 {
            odd += 1;
            let sigmas: Vec<_> = q
                .sigmas
                .iter()
                .map(|c| d.sigma_algebra().chord_name(*c))
                .collect();
            let rhos: Vec<_> = q
                .rhos
                .iter()
                .map(|c| d.rho_algebra().chord_name(*c))
                .collect();
            let id = |v: usize| {
                gens.iter()
                    .find(|g| g.vertex == v)
                    .map_or("?", |g| g.id.as_str())
            };
            println!(
                "{} -> {}  sigma {:?}  rho {:?}",
                id(q.x),
                id(q.y),
                sigmas,
                rhos
            );
        }
    }
    println!(
        "{name}: {odd} queries with an odd count, census truncated {}",
        census.truncated
    );
    Ok(())
}
