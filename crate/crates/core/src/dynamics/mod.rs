//! Single-atom trajectories through the bounce and Monte Carlo clouds.

pub mod cloud;
pub mod integrator;
pub mod recoil;
pub mod rng;

use serde::Serialize;

use crate::constants::{GRAVITY, HBAR};
use crate::optics::AtomSpecies;

pub use cloud::{
    simulate_cloud, AtomRecord, CloudEnsemble, CloudModel, CloudRun, CloudSetup, Membership,
    Snapshot,
};
pub use integrator::{
    integrate_bounce, switch_height, BounceOptions, BounceTrajectory, ScatterMode, TrajectorySample,
};
pub use recoil::{apply_recoil_statistics, apply_systematics, RecoilMode, Systematics};

/// Phase-space point of one atom. `z` is the height above the surface; `y`
/// is tracked for the mirror footprint and heating bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct AtomState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub v_x: f64,
    pub v_y: f64,
    pub v_z: f64,
    pub scattered: f64,
}

/// Time to fall from rest through `height`; zero for non-positive heights.
pub fn fall_time(height: f64) -> f64 {
    (2.0 * height.max(0.0) / GRAVITY).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IncidentMomentum {
    pub momentum: f64,
    /// p_i / ħk₀
    pub over_hbar_k0: f64,
}

impl IncidentMomentum {
    /// p_i / ħk_x
    pub fn over_hbar_kx(&self, kx: f64) -> f64 {
        self.momentum / (HBAR * kx)
    }

    pub fn energy(&self, mass: f64) -> f64 {
        self.momentum * self.momentum / (2.0 * mass)
    }
}

pub fn incident_momentum(species: &AtomSpecies, height: f64) -> IncidentMomentum {
    let momentum = species.mass * (2.0 * GRAVITY * height.max(0.0)).sqrt();
    IncidentMomentum {
        momentum,
        over_hbar_k0: momentum / species.recoil_momentum(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fall_time_values() {
        assert!((fall_time(6.6e-3) - 0.03668).abs() < 1e-5);
        assert_eq!(fall_time(0.0), 0.0);
        assert!((fall_time(4.0 * 6.6e-3) / fall_time(6.6e-3) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn momentum_in_recoils() {
        let s = AtomSpecies::rb87_d2();
        let p = incident_momentum(&s, 6.6e-3);
        assert!((p.over_hbar_k0 - 61.15).abs() < 0.05, "{}", p.over_hbar_k0);
        let quarter = incident_momentum(&s, 1.65e-3);
        assert!((quarter.over_hbar_k0 - 30.6).abs() < 0.05);
        let kx = s.k0() * 1.02;
        assert!((p.over_hbar_kx(kx) * 1.02 - p.over_hbar_k0).abs() < 1e-12);
    }
}
