//! Config-to-budget workflow through the public API, checked against
//! closed forms written out independently here.

use ewmirror::config::{ExperimentConfig, Quantity};
use ewmirror::mirror::detuning_threshold;
use ewmirror::Error;
use proptest::prelude::*;
use proptest::test_runner::Config as ProptestConfig;

const HBAR: f64 = 1.054_571_817e-34;
const MASS: f64 = 86.909_180_527 * 1.660_539_066_60e-27;
const LAMBDA: f64 = 780.241_209e-9;
const G: f64 = 9.81;

fn oracle_twolevel(n: f64, mrad_above: f64, delta_over_gamma: f64, height: f64) -> f64 {
    let k0 = 2.0 * std::f64::consts::PI / LAMBDA;
    let theta = (1.0 / n).asin() + mrad_above * 1e-3;
    let kappa = k0 * (n * n * theta.sin().powi(2) - 1.0).sqrt();
    let p = MASS * (2.0 * G * height).sqrt();
    p / (HBAR * kappa) / delta_over_gamma
}

fn config(mrad_above: f64, delta_over_gamma: f64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.geometry.angle = Some(Quantity::new(mrad_above, "mrad_above_critical"));
    cfg.detuning = Quantity::new(delta_over_gamma, "Gamma");
    cfg
}

#[test]
fn default_budget_against_closed_form() {
    let b = ExperimentConfig::default().resolve().unwrap().budget().unwrap();
    let want = oracle_twolevel(1.51, 15.2, 44.0, 6.6e-3);
    assert!((b.n_twolevel / want - 1.0).abs() < 1e-9, "{} vs {want}", b.n_twolevel);
    let composed = b.n_pathintegral * b.saturation_factor * b.hyperfine_factor;
    assert!((b.n_corrected - composed).abs() < 1e-12);
}

#[test]
fn threshold_separates_bouncing_from_falling_through() {
    let exp = ExperimentConfig::default().resolve().unwrap();
    let d_th = detuning_threshold(
        &exp.geometry,
        &exp.species,
        exp.geometry.power,
        exp.fall_height,
        &exp.potential_options,
    )
    .unwrap();
    assert!(exp.with_detuning(0.99 * d_th).unwrap().budget().is_ok());
    let past = exp.with_detuning(1.01 * d_th).unwrap().budget();
    assert!(matches!(past, Err(Error::NoBounce { .. })), "{past:?}");
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn twolevel_matches_closed_form(mrad in 0.9f64..24.0, delta in 31.0f64..233.0) {
        let b = config(mrad, delta).resolve().unwrap().budget().unwrap();
        let want = oracle_twolevel(1.51, mrad, delta, 6.6e-3);
        prop_assert!((b.n_twolevel / want - 1.0).abs() < 1e-9);
    }

    #[test]
    fn corrections_only_reduce(mrad in 0.9f64..24.0, delta in 31.0f64..233.0) {
        let b = config(mrad, delta).resolve().unwrap().budget().unwrap();
        prop_assert!(b.saturation_factor > 0.0 && b.saturation_factor <= 1.0);
        prop_assert!(b.hyperfine_factor > 0.0 && b.hyperfine_factor <= 1.0);
        prop_assert!(b.n_corrected <= b.n_pathintegral);
        // van der Waals attraction slows the atom in the wave: more photons.
        prop_assert!(b.n_pathintegral >= b.n_twolevel);
    }

    #[test]
    fn fewer_photons_further_from_resonance(mrad in 0.9f64..24.0, delta in 31.0f64..200.0, step in 1.0f64..30.0) {
        let near = config(mrad, delta).resolve().unwrap().budget().unwrap();
        let far = config(mrad, delta + step).resolve().unwrap().budget().unwrap();
        prop_assert!(far.n_corrected < near.n_corrected);
    }
}
