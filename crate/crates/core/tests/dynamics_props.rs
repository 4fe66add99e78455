mod common;

use common::paper_cavity;
use multimode_opo::coupling::SupermodeSet;
use multimode_opo::dynamics::{
    lorentzian_variances, oscillation_scale, quadrature_spectrum, steady_state, supermode_gain,
    threshold_variance, PumpDrive, Regime,
};
use proptest::prelude::*;

fn three_modes(ratio: f64) -> SupermodeSet {
    SupermodeSet {
        eigenvalues: vec![1.0, -1.0, ratio],
        eigenvectors: vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
    }
}

/// Mean-field relaxation of the oscillating supermode with a depleting pump, integrated with
/// RK4 in units u = |α|²/scale: τ du/dt = 2γu(r − 1 − u). Returns u after a long time.
fn relax_oscillation(r: f64, gamma: f64, tau: f64) -> f64 {
    let f = |u: f64| 2.0 * gamma * u * (r - 1.0 - u) / tau;
    let h = 0.05 * tau / gamma;
    let mut u = 1e-6;
    for _ in 0..20_000 {
        let k1 = f(u);
        let k2 = f(u + 0.5 * h * k1);
        let k3 = f(u + 0.5 * h * k2);
        let k4 = f(u + h * k3);
        u += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    u
}

#[test]
fn above_threshold_fixed_point_matches_relaxed_mean_field() {
    let params = paper_cavity();
    let s = three_modes(0.64);
    for r in [1.05, 1.5, 2.0, 3.0] {
        let pump = PumpDrive::new(r * r * 0.25, 0.25).unwrap();
        let op = steady_state(&pump, &s, &params).unwrap();
        let u = relax_oscillation(r, params.gamma(), params.round_trip_time);
        let n = op.oscillating_amplitude.norm_sqr() / oscillation_scale(&pump, &params);
        assert!((n - u).abs() < 1e-9 * u, "r={r}: {n} vs {u}");
        assert!((op.intracavity_pump_mean.norm() - params.gamma()).abs() < 1e-15);
    }
}

proptest! {
    #[test]
    fn uncertainty_product_and_ordering(sigma in 0.0f64..0.999, eta in 0.01f64..1.0, x in 0.0f64..20.0) {
        let (vm, vx) = lorentzian_variances(sigma, eta, x);
        prop_assert!(vm > 0.0 && vm <= 1.0 && vx >= 1.0);
        prop_assert!(vm * vx >= 1.0 - 1e-12);
        let (pm, px) = lorentzian_variances(sigma, 1.0, x);
        prop_assert!((pm * px - 1.0).abs() < 1e-9 * px);
    }

    #[test]
    fn loss_mixes_in_vacuum_linearly(sigma in 0.0f64..0.99, eta in 0.0f64..1.0, x in 0.0f64..10.0) {
        let (vm, vx) = lorentzian_variances(sigma, eta, x);
        let (pm, px) = lorentzian_variances(sigma, 1.0, x);
        prop_assert!((vm - (eta * pm + 1.0 - eta)).abs() < 1e-12);
        prop_assert!((vx - (eta * px + 1.0 - eta)).abs() < 1e-9 * px);
    }

    #[test]
    fn pump_clamps_at_any_power_above_threshold(factor in 1.0f64..10.0, lead in 0.2f64..3.0) {
        let params = paper_cavity();
        let s = SupermodeSet { eigenvalues: vec![lead, 0.5 * lead], eigenvectors: vec![vec![1.0, 0.0], vec![0.0, 1.0]] };
        let op = steady_state(&PumpDrive::new(factor, 1.0).unwrap(), &s, &params).unwrap();
        let clamp = params.gamma() / lead;
        prop_assert!((op.intracavity_pump_mean.norm() - clamp).abs() <= 1e-12 * clamp);
        if factor > 1.0 {
            prop_assert_eq!(op.regime, Regime::Above);
            prop_assert!(op.oscillating_amplitude.norm_sqr() > 0.0);
        }
    }

    #[test]
    fn generated_flux_is_twice_the_converted_pump_flux(r in 1.0001f64..4.0) {
        let params = paper_cavity();
        let s = three_modes(0.64);
        let op = steady_state(&PumpDrive::new(r * r, 1.0).unwrap(), &s, &params).unwrap();
        let converted = op.converted_pump_flux();
        prop_assert!((op.generated_signal_flux(&params) - 2.0 * converted).abs() <= 1e-9 * converted);
    }

    #[test]
    fn threshold_variance_is_the_clamped_zero_frequency_level(ratio in 0.001f64..1.0) {
        let params = paper_cavity();
        let s = three_modes(ratio);
        let op = steady_state(&PumpDrive::new(1.44, 1.0).unwrap(), &s, &params).unwrap();
        let (sigma, _) = supermode_gain(2, &s, &op, &params).unwrap();
        let (v, _) = lorentzian_variances(sigma, 1.0, 0.0);
        prop_assert!((threshold_variance(2, &s).unwrap() - v).abs() < 1e-12);
    }

    #[test]
    fn below_threshold_pump_mean_is_proportional_to_drive(r in 0.0f64..0.999) {
        let params = paper_cavity();
        let s = three_modes(0.64);
        let op = steady_state(&PumpDrive::new(r * r, 1.0).unwrap(), &s, &params).unwrap();
        prop_assert_eq!(op.oscillating_amplitude.norm(), 0.0);
        prop_assert!((op.intracavity_pump_mean.norm() - r * params.gamma()).abs() < 1e-15);
    }
}

#[test]
fn spectra_are_continuous_across_threshold() {
    let params = paper_cavity();
    let s = three_modes(0.64);
    let freqs: Vec<f64> = (0..40).map(|i| i as f64 * 1e6).collect();
    let at = |r: f64| {
        let op = steady_state(&PumpDrive::new(r * r, 1.0).unwrap(), &s, &params).unwrap();
        quadrature_spectrum(2, &s, &op, &params, 1.0, &freqs)
            .unwrap()
            .v_min
    };
    let (lo, hi) = (at(1.0 - 1e-9), at(1.0 + 1e-9));
    for (a, b) in lo.iter().zip(&hi) {
        assert!((a - b).abs() < 1e-8);
    }
}

#[test]
fn squeezed_quadrature_rotates_with_half_the_pump_phase() {
    let params = paper_cavity();
    let s = three_modes(0.64);
    let base = PumpDrive::new(0.5, 1.0).unwrap();
    let a0 = {
        let op = steady_state(&base, &s, &params).unwrap();
        quadrature_spectrum(2, &s, &op, &params, 1.0, &[0.0])
            .unwrap()
            .squeezed_quadrature_angle
    };
    let a1 = {
        let op = steady_state(&base.with_phase(0.8), &s, &params).unwrap();
        quadrature_spectrum(2, &s, &op, &params, 1.0, &[0.0])
            .unwrap()
            .squeezed_quadrature_angle
    };
    assert!(((a1 - a0) - 0.4).abs() < 1e-12);
    // negative coupling squeezes the orthogonal quadrature
    let op = steady_state(&base, &s, &params).unwrap();
    let neg = quadrature_spectrum(1, &s, &op, &params, 1.0, &[0.0])
        .unwrap()
        .squeezed_quadrature_angle;
    assert!(((a0 - neg).abs() - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
}
