//! Sampling checks of the energy barrier on the built-in frameworks.

use rigidity::analysis::{analyze, AnalysisSettings};
use rigidity::corpus;
use rigidity::energy::{bound_checks, cubic_oracles, verify, BoundInputs, CubicProbe, VerificationInputs};

const SAMPLES: usize = 1000;

#[test]
fn no_violations_on_corpus() {
    let mut checked = 0;
    for name in corpus::names() {
        let an = analyze(&corpus::generate(name).unwrap(), &AnalysisSettings::default()).unwrap();
        if !(an.report.annulus_applies && an.report.barrier_applies) {
            continue;
        }
        checked += 1;
        let rec = verify(&VerificationInputs::from_analysis(&an).unwrap(), SAMPLES, 7).unwrap();
        let ann = rec.annulus.as_ref().expect("annulus ran");
        let bar = rec.barrier.as_ref().expect("barrier ran");
        let edge = rec.edge_barrier.as_ref().expect("edge barrier ran");
        assert!(ann.samples >= SAMPLES, "{name}");
        assert_eq!(ann.violations, 0, "{name} annulus worst {}", ann.worst_margin);
        assert_eq!(bar.violations, 0, "{name} barrier worst {}", bar.worst_margin);
        assert_eq!(edge.violations, 0, "{name} edge worst {}", edge.worst_margin);
    }
    assert!(checked >= 6);
}

#[test]
fn verifier_is_deterministic_per_seed() {
    let an = analyze(&corpus::generate("example_h").unwrap(), &AnalysisSettings::default()).unwrap();
    let inputs = VerificationInputs::from_analysis(&an).unwrap();
    let a = verify(&inputs, 50, 3).unwrap();
    let b = verify(&inputs, 50, 3).unwrap();
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
}

#[test]
fn halving_kappa_is_caught() {
    // With kappa below the certified value the lower barrier must fail
    // somewhere. On example_h the barrier's factor 1/3 leaves enough room that
    // halving kappa goes unnoticed, so only example_a is a useful probe.
    let an = analyze(&corpus::generate("example_a").unwrap(), &AnalysisSettings::default()).unwrap();
    let inputs = VerificationInputs::from_analysis(&an).unwrap();
    let kappa = inputs.model.kappa();
    let rec = verify(&inputs.with_kappa(kappa / 2.0), SAMPLES, 11).unwrap();
    assert!(rec.total_violations() > 0, "harness missed the halved kappa");
}

#[test]
fn hessian_and_rigidity_bounds_hold() {
    for name in corpus::names() {
        let an = analyze(&corpus::generate(name).unwrap(), &AnalysisSettings::default()).unwrap();
        let rec = bound_checks(&BoundInputs::from_analysis(&an).unwrap(), 1000, 5).unwrap();
        assert!(rec.hbounds.samples >= 1000 && rec.rbounds.samples >= 1000);
        assert_eq!(rec.hbounds.violations, 0, "{name} hbounds {}", rec.hbounds.worst_margin);
        assert_eq!(rec.rpv.violations, 0, "{name} rpv {}", rec.rpv.worst_margin);
        assert_eq!(rec.rbounds.violations, 0, "{name} rbounds {}", rec.rbounds.worst_margin);
        assert!(rec.eta0 > 0.0 && rec.eta0.is_finite(), "{name}");
    }
}

#[test]
fn cubic_oracles_on_a_grid() {
    for (a_bar, b, c) in [(1.0, 1.0, 0.0), (2.0, 0.5, 0.0), (0.5, 1.0, -0.01), (1.0, 2.0, -0.1), (3.0, 1.0, -0.05)] {
        let rep = cubic_oracles(&CubicProbe::new(a_bar, b, c).unwrap());
        assert_eq!(rep.lower_bound.violations, 0, "({a_bar},{b},{c})");
        assert_eq!(rep.positivity.violations, 0, "({a_bar},{b},{c})");
    }
}

#[test]
fn cubic_oracles_reference_parameters() {
    // a_* = b^2 / 4|c| = 1
    let a_star = 1.0;
    let rep = cubic_oracles(&CubicProbe::new(0.8 * a_star, 2.0, 1.0).unwrap());
    assert!(rep.t_star < rep.t1_plus);
    assert_eq!(rep.positivity.violations, 0);
    assert_eq!(rep.lower_bound.violations, 0);
}
