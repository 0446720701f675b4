use std::io::Write;

use melnikov_verify::suite;

/// Written straight to stdout so the line survives test output capture.
fn report(outcome: suite::CriterionOutcome) {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{}", outcome.line()).expect("stdout");
    assert!(outcome.passed(), "{}", outcome.line());
}

#[test]
fn criterion_1_free_operator_floquet_exactness() {
    report(suite::criterion_1());
}

#[test]
fn criterion_2_one_soliton_closed_forms() {
    report(suite::criterion_2());
}

#[test]
fn criterion_3_residue_identity() {
    report(suite::criterion_3());
}

#[test]
fn criterion_4_baker_akhiezer_engine() {
    report(suite::criterion_4());
}

#[test]
fn criterion_5_solver_cross_validation() {
    report(suite::criterion_5());
}

#[test]
fn criterion_6_spectral_conservation() {
    report(suite::criterion_6());
}

#[test]
fn criterion_7_double_point_structure() {
    report(suite::criterion_7());
}
