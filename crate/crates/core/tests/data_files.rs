use std::path::PathBuf;

use bhf::arc_algebra::ArcDiagram;
use bhf::bimodules::{build_module, AaModule};
use bhf::diagram::{dual_diagram, identity_diagram, Diagram};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

fn zt() -> ArcDiagram {
    ArcDiagram::from_json(&std::fs::read_to_string(data("zt.json")).unwrap()).unwrap()
}

#[test]
fn shipped_diagrams_validate_with_expected_generator_counts() {
    let reference = identity_diagram(&zt()).unwrap().euler_characteristic();
    for (name, n) in [
        ("zt_identity.json", 2),
        ("zt_twist.json", 3),
        ("zt_twist_inv.json", 3),
        ("zt_twist_sq.json", 4),
        ("zt_finger_b.json", 4),
        ("zt_finger_nb.json", 2),
    ] {
        let d = Diagram::load_valid(&data(name)).unwrap();
        assert_eq!(d.generators().len(), n, "{name}");
        assert_eq!(d.euler_characteristic(), reference, "{name}");
        assert!(d.rho_algebra().diagram().is_isomorphic(&zt()), "{name}");
    }
}

#[test]
fn identity_file_matches_the_constructed_identity_diagram() {
    let file = Diagram::load_valid(&data("zt_identity.json")).unwrap();
    let built = identity_diagram(&zt()).unwrap();
    assert_eq!(file.generators(), built.generators());
    assert_eq!(file.faces.len(), built.faces.len());
    assert_eq!(file.vertices.len(), built.vertices.len());
    let a = build_module(&file, 6, 8).unwrap();
    let b = build_module(&built, 6, 8).unwrap();
    assert_eq!(a.generators(), b.generators());
    assert_eq!(
        a.entries().collect::<Vec<_>>(),
        b.entries().collect::<Vec<_>>()
    );
}

#[test]
fn dual_of_the_torus_diagram() {
    let file = Diagram::load_valid(&data("zt_identity.json")).unwrap();
    let dual = dual_diagram(&zt()).unwrap();
    assert!(dual.is_isomorphic(file.sigma_algebra().diagram()));
    assert_eq!(dual.num_points(), zt().num_points());
    assert!(dual_diagram(&dual).unwrap().is_isomorphic(&zt()));
}
