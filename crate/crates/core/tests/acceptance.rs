//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//!
//! Lines go straight to stderr so they show up even when the harness captures
//! output of passing tests.

use std::io::Write;

use sl2heat::kernel::Normalization;
use sl2heat::selftest::run_criterion;

fn check(id: u8) {
    let r = run_criterion(id, Normalization::default());
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "{}", r.line());
    for (k, v) in &r.values {
        let _ = writeln!(err, "        {k} = {v:.10e}");
    }
    assert!(r.pass, "{}", r.line());
}

#[test]
fn on_diagonal_closed_form() {
    check(1);
}

#[test]
fn axis_closed_form() {
    check(2);
}

#[test]
fn total_mass_is_one() {
    check(3);
}

#[test]
fn semigroup_identity() {
    check(4);
}

#[test]
fn heat_equation_residual() {
    check(5);
}

#[test]
fn distance_recovery() {
    check(6);
}

#[test]
fn laplace_asymptotics() {
    check(7);
}

#[test]
fn constant_a_asymptotic_orders() {
    check(8);
}

#[test]
fn liyau_sweep() {
    check(9);
}

#[test]
fn reverse_poincare_constant() {
    check(10);
}

#[test]
fn gamma2_positivity() {
    check(11);
}

#[test]
fn ultracontractivity() {
    check(12);
}

#[test]
fn dilation_limit() {
    check(13);
}

#[test]
fn monte_carlo_oracle() {
    check(14);
}

#[test]
fn monte_carlo_determinism() {
    check(15);
}
