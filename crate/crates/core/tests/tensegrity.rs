use rigidity::analysis::complement_for;
use rigidity::conic::{tensegrity_edge_margin, tensegrity_stress_search, CertificateStatus};
use rigidity::corpus;
use rigidity::geometry::{ComplementMode, EdgeLabel};
use rigidity::spectral::{decompose, SubspaceSelection};

fn search(name: &str) -> (rigidity::Framework, rigidity::conic::TensegrityCertificate) {
    let f = corpus::generate(name).unwrap();
    let c = complement_for(&f, &ComplementMode::Orthogonal).unwrap();
    let sd = decompose(&f, &c, SubspaceSelection::default()).unwrap();
    let cert = tensegrity_stress_search(&f, &c, &sd).unwrap();
    (f, cert)
}

#[test]
fn snelson_x_signs() {
    let (f, t) = search("snelson_x");
    assert_eq!(t.certificate.status, CertificateStatus::PositiveDefinite);
    assert!(t.s > 0.0);
    // Rigid square with diagonals: no flexes, so the eigenvalue part is vacuous.
    assert!(t.t.is_none_or(|t| t > 0.0));
    assert!(t.slack_edges.is_empty());
    for (l, w) in f.labels().unwrap().iter().zip(&t.certificate.omega) {
        match l {
            EdgeLabel::Cable => assert!(*w > 0.0),
            EdgeLabel::Strut => assert!(*w < 0.0),
            EdgeLabel::Bar => {}
        }
    }
    let margin = tensegrity_edge_margin(&f, &t.certificate.omega_vec(), 1.0);
    assert!(margin > 0.0 && margin.is_finite());
}

#[test]
fn cable_triangle_has_no_stress() {
    let (_, t) = search("cable_triangle");
    assert_eq!(t.certificate.status, CertificateStatus::NoStress);
}

#[test]
fn all_cables_fail() {
    // The self-stress of the square with diagonals has mixed signs, so it
    // cannot be positive on every edge.
    let f = corpus::generate("snelson_x").unwrap();
    let f = f.clone().with_labels(vec![EdgeLabel::Cable; f.n_edges()]).unwrap();
    let c = complement_for(&f, &ComplementMode::Orthogonal).unwrap();
    let sd = decompose(&f, &c, SubspaceSelection::default()).unwrap();
    let t = tensegrity_stress_search(&f, &c, &sd).unwrap();
    assert!(!t.certificate.is_success());
    assert!(!t.slack_edges.is_empty());
}
