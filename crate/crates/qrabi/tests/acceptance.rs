//! End-to-end acceptance run: every release invariant checked at full
//! level against the exact-diagonalization oracle, one PASS/FAIL line per
//! criterion (visible with `cargo test --test acceptance -- --nocapture`).

use qrabi::validate::{run_validation, Level, Mutation};

#[test]
fn acceptance_criteria_hold_at_full_level() {
    let report = run_validation(Level::Full, None);
    for outcome in &report.outcomes {
        let status = if outcome.skipped {
            "SKIP"
        } else if outcome.passed {
            "PASS"
        } else {
            "FAIL"
        };
        println!(
            "{status}  {} {:<26} {:>7.2}s  {}",
            outcome.index, outcome.id, outcome.seconds, outcome.detail
        );
    }
    assert_eq!(report.outcomes.len(), 8);
    assert!(
        report.outcomes.iter().all(|o| !o.skipped),
        "full level must check every invariant"
    );
    assert!(
        report.passed(),
        "failed invariants: {}",
        report.failed_ids().join(", ")
    );
}

#[test]
fn corrupted_photon_coefficient_fails_validation() {
    let report = run_validation(Level::Fast, Some(Mutation::PhotonGrwaCoeff));
    assert!(!report.passed());
    let failed = report.failed_ids();
    assert!(failed.contains(&"photon-ordering"), "failed: {failed:?}");
}

#[test]
fn corrupted_cubic_root_fails_validation() {
    let report = run_validation(Level::Fast, Some(Mutation::CubicTheta));
    assert!(!report.passed());
    let failed = report.failed_ids();
    assert!(failed.contains(&"block-equivalence"), "failed: {failed:?}");
}
