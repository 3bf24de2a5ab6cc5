use composite_bosons::hamiltonian::TermId;
use composite_bosons::mode_space::BoundPolicy;
use composite_bosons::models::{build_ring_model, random_model};
use composite_bosons::oracle::{verify_sectors, VERIFICATION_TOLERANCE};

#[test]
fn random_three_mode_model_matches_oracle() {
    for seed in [1, 2, 3] {
        let modes = random_model(3, seed).unwrap();
        let spec = modes.solve_bound_states(BoundPolicy::LowestK(2)).unwrap();
        let report = verify_sectors(&modes, &spec, 4).unwrap();
        let mut worst = std::collections::BTreeMap::new();
        for e in &report.entries {
            let w = worst.entry(e.term.clone()).or_insert(0.0_f64);
            *w = w.max(e.abs_diff);
        }
        assert!(
            report.summary.max_abs_diff <= VERIFICATION_TOLERANCE,
            "seed {seed}: {worst:?}"
        );
        for t in TermId::ALL {
            assert!(
                report
                    .entries
                    .iter()
                    .any(|e| e.term == t.as_str() && e.sq_value.abs() > 1e-6),
                "seed {seed}: term {t} never exercised"
            );
        }
    }
}

#[test]
fn ring_model_matches_oracle() {
    let modes = build_ring_model(3, 1.0, -6.0).unwrap();
    let spec = modes.solve_bound_states(BoundPolicy::default()).unwrap();
    assert!(!spec.is_empty());
    let report = verify_sectors(&modes, &spec, 4).unwrap();
    assert!(
        report.summary.max_abs_diff <= VERIFICATION_TOLERANCE,
        "{}",
        report.summary.max_abs_diff
    );
}
