//! Acceptance gate: one test per criterion, each printing one pass/fail line.
//! The full suite is computed once and shared across the tests.

use std::sync::OnceLock;

use luderscope_cli::verify::{run_all, Check};

fn suite() -> &'static Vec<Check> {
    static SUITE: OnceLock<Vec<Check>> = OnceLock::new();
    SUITE.get_or_init(|| run_all(false))
}

fn assert_criterion(idx: usize) {
    let check = &suite()[idx];
    println!("{}", check.line());
    assert!(check.passed, "{}", check.line());
}

#[test]
fn criterion_1_zx_measurement_value() {
    assert_criterion(0);
}

#[test]
fn criterion_2_zx_instrument_value() {
    assert_criterion(1);
}

#[test]
fn criterion_3_closed_form_oracle_equivalence() {
    assert_criterion(2);
}

#[test]
fn criterion_4_sequential_strategy_attains_instrument_value() {
    assert_criterion(3);
}

#[test]
fn criterion_5_noisy_measurement_bias_suite() {
    assert_criterion(4);
}

#[test]
fn criterion_6_difference_operator_eigenvalue_oracle() {
    assert_criterion(5);
}

#[test]
fn criterion_7_structural_identities() {
    assert_criterion(6);
}

#[test]
fn criterion_8_tester_feasibility_certification() {
    assert_criterion(7);
}

#[test]
fn criterion_9_scan_dominance() {
    assert_criterion(8);
}

#[test]
fn mutation_mode_detects_corrupted_oracles() {
    let checks = run_all(true);
    let failures = checks.iter().filter(|c| !c.passed).count();
    println!("mutation mode: {failures} failing checks");
    assert!(failures > 0, "perturbed oracles went undetected");
}
