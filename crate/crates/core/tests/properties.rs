//! Randomised invariants of the analysis and simulation layers.

mod common;

use reactlab::matrix::Matrix2;

fn check(result: Result<(), String>) {
    if let Err(e) = result {
        panic!("{e}");
    }
}

#[test]
fn unstable_wavenumbers_are_reactive() {
    check(common::unstable_implies_reactive(10_000, false));
}

#[test]
fn envelope_sandwich() {
    check(common::envelope_sandwich(512, false));
}

#[test]
fn initial_slope_is_numerical_abscissa() {
    check(common::initial_slope(512, false));
}

#[test]
fn non_normality_in_unit_interval() {
    check(common::non_normality_range(512, false));
}

#[test]
fn chi_star_bounded_by_envelope_on_real_branch() {
    check(common::chi_star_below_envelope(512, false));
}

#[test]
fn exponential_semigroup() {
    check(common::exponential_semigroup(512, false));
}

#[test]
fn regions_agree_with_reactive_set() {
    check(common::regions_consistent(256, false));
}

#[test]
fn transport_conserves_mass() {
    check(common::transport_mass(96, false));
}

#[test]
fn scan_identical_across_worker_counts() {
    check(common::scan_worker_independence(8, false));
}

#[test]
fn complex_spectrum_sandwich_example() {
    // A rotation-shear with complex eigenvalues: the sandwich still holds.
    let m = Matrix2::new(-0.2, 3.0, -1.0, -0.4);
    assert!(m.eigen().lambda_plus.im != 0.0);
    for i in 0..200 {
        common::sandwich(&m, i as f64 / 200.0).unwrap();
    }
}
