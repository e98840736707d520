//! Acceptance battery: one test per criterion, each printing a PASS/FAIL
//! line with its measured numbers. Run with `--nocapture` to see the lines.
//!
//! All tolerances live in `gaborlab::suite`; nothing here re-tunes them.

use gaborlab::suite;

fn check(outcome: gaborlab::suite::CriterionOutcome) {
    println!("{}", outcome.line());
    println!("      {}", outcome.details);
    assert!(outcome.passed, "{}: {}", outcome.name, outcome.details);
}

#[test]
fn criterion_01_reconstruction() {
    check(suite::criterion_1_reconstruction(suite::DEFAULT_SEED).unwrap());
}

#[test]
fn criterion_02_frame_inequality() {
    check(suite::criterion_2_frame_inequality(suite::DEFAULT_SEED).unwrap());
}

#[test]
fn criterion_03_norm_equivalence() {
    check(suite::criterion_3_norm_equivalence(suite::DEFAULT_SEED).unwrap());
}

#[test]
fn criterion_04_embedding_monotonicity() {
    check(suite::criterion_4_embedding(suite::DEFAULT_SEED).unwrap());
}

#[test]
fn criterion_05_oracle_sandwich() {
    check(suite::criterion_5_oracle_sandwich(suite::DEFAULT_SEED).unwrap());
}

#[test]
fn criterion_06_direct_rate() {
    check(suite::criterion_6_direct_rate(suite::DEFAULT_SEED).unwrap());
}

#[test]
fn criterion_07_bernstein_sweeps() {
    check(suite::criterion_7_bernstein(suite::DEFAULT_SEED).unwrap());
}

#[test]
fn criterion_08_dyadic_equivalence() {
    check(suite::criterion_8_dyadic_equivalence(suite::DEFAULT_SEED).unwrap());
}

#[test]
fn criterion_09_inverse_bound() {
    check(suite::criterion_9_inverse_bound(suite::DEFAULT_SEED).unwrap());
}

#[test]
fn criterion_10_determinism() {
    check(suite::criterion_10_determinism(suite::DEFAULT_SEED).unwrap());
}
