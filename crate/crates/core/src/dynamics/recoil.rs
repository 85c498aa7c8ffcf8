//! Discrete photon recoils and the alignment systematics of a bounce.

use rand::Rng;
use rand_distr::{Distribution, Poisson, UnitSphere};
use serde::{Deserialize, Serialize};

use crate::optics::{AtomSpecies, EwField};

use super::AtomState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecoilMode {
    /// Mean momentum transfer only.
    Deterministic,
    /// Poisson photon number plus isotropic spontaneous-emission kicks.
    Stochastic,
}

/// Applies `n_scat` expected photons of absorption (along k_x) and emission.
pub fn apply_recoil_statistics<R: Rng + ?Sized>(
    state: &AtomState,
    n_scat: f64,
    field: &EwField,
    species: &AtomSpecies,
    mode: RecoilMode,
    rng: &mut R,
) -> AtomState {
    let mut out = *state;
    if !(n_scat > 0.0) {
        return out;
    }
    let v_kx = field.recoil_velocity_x(species);
    match mode {
        RecoilMode::Deterministic => {
            out.v_x += n_scat * v_kx;
        }
        RecoilMode::Stochastic => {
            let n = Poisson::new(n_scat)
                .expect("positive finite mean")
                .sample(rng) as u64;
            out.v_x += n as f64 * v_kx;
            let v0 = species.recoil_velocity;
            for _ in 0..n {
                let [dx, dy, dz]: [f64; 3] = UnitSphere.sample(rng);
                out.v_x += v0 * dx;
                out.v_y += v0 * dy;
                out.v_z += v0 * dz;
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Systematics {
    /// Tilt of the reflecting surface from horizontal, rad.
    pub prism_tilt: f64,
    pub mot_horizontal_offset: f64,
    pub launch_velocity: f64,
    /// Empirical extra recoils along k_x per bounce (surface roughness stand-in).
    pub roughness_offset_recoils: f64,
}

impl Systematics {
    pub fn is_ideal(&self) -> bool {
        *self == Self::default()
    }

    /// Shifts a freshly sampled atom by the MOT offset and launch velocity.
    pub fn apply_initial(&self, state: &AtomState) -> AtomState {
        AtomState {
            x: state.x + self.mot_horizontal_offset,
            v_x: state.v_x + self.launch_velocity,
            ..*state
        }
    }

    /// Horizontal velocity a vertical bounce acquires from the tilt,
    /// 2·v·sinφ·cosφ.
    pub fn tilt_velocity(&self, v_incident: f64) -> f64 {
        2.0 * v_incident.abs() * self.prism_tilt.sin() * self.prism_tilt.cos()
    }
}

/// Rotates an already reflected velocity as if the surface were tilted by
/// the prism tilt: a vertical arrival leaves along the mirrored direction.
pub fn apply_systematics(state_out: &AtomState, sys: &Systematics, v_incident: f64) -> AtomState {
    if sys.prism_tilt == 0.0 {
        return *state_out;
    }
    let sin = sys.prism_tilt.sin();
    AtomState {
        v_x: state_out.v_x + sys.tilt_velocity(v_incident),
        v_z: state_out.v_z - 2.0 * sin * sin * v_incident.abs(),
        ..*state_out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::rng::{stream, Channel};
    use crate::optics::{EwGeometry, Polarization};

    fn field() -> (EwField, AtomSpecies) {
        let s = AtomSpecies::rb87_d2();
        let g = EwGeometry::above_critical(1.51, 15.2e-3, 335e-6, 19e-3, Polarization::TM)
            .unwrap();
        (EwField::new(&g, &s, 44.0 * s.linewidth).unwrap(), s)
    }

    #[test]
    fn zero_photons_leave_state_alone() {
        let (f, s) = field();
        let st = AtomState {
            v_x: 0.1,
            ..Default::default()
        };
        let mut rng = stream(1, 0, 0, Channel::Recoil);
        for mode in [RecoilMode::Deterministic, RecoilMode::Stochastic] {
            assert_eq!(apply_recoil_statistics(&st, 0.0, &f, &s, mode, &mut rng), st);
        }
    }

    #[test]
    fn stochastic_moments() {
        let (f, s) = field();
        let n_scat = 13.0;
        let samples = 100_000;
        let st = AtomState::default();
        let vx: Vec<f64> = (0..samples)
            .map(|i| {
                let mut rng = stream(42, 0, i, Channel::Recoil);
                apply_recoil_statistics(&st, n_scat, &f, &s, RecoilMode::Stochastic, &mut rng).v_x
            })
            .collect();
        let n = samples as f64;
        let mean = vx.iter().sum::<f64>() / n;
        let var = vx.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let v_kx = f.recoil_velocity_x(&s);
        let v0 = s.recoil_velocity;
        let var_oracle = n_scat * v_kx * v_kx + n_scat * v0 * v0 / 3.0;
        let mean_oracle = n_scat * v_kx;
        assert!((mean - mean_oracle).abs() < 5.0 * (var_oracle / n).sqrt());
        // Standard error of a sample variance is about var·√(2/n) for near-Gaussian data.
        assert!((var - var_oracle).abs() < 5.0 * var_oracle * (2.5 / n).sqrt(), "{var} {var_oracle}");
        let det = apply_recoil_statistics(
            &st,
            n_scat,
            &f,
            &s,
            RecoilMode::Deterministic,
            &mut stream(0, 0, 0, Channel::Recoil),
        );
        assert_eq!(det.v_x, mean_oracle);
    }

    #[test]
    fn tilt_kick() {
        let (f, s) = field();
        let sys = Systematics {
            prism_tilt: 12e-3,
            ..Default::default()
        };
        let v_i = 0.3598;
        let out = AtomState {
            v_z: v_i,
            ..Default::default()
        };
        let tilted = apply_systematics(&out, &sys, v_i);
        let recoils = tilted.v_x / f.recoil_velocity_x(&s);
        assert!((recoils - 2.0 * v_i * 12e-3 / f.recoil_velocity_x(&s)).abs() < 1e-3);
        assert!((recoils - 1.44).abs() < 0.06, "{recoils}");
        // Reflection preserves speed.
        assert!((tilted.v_x.hypot(tilted.v_z) - v_i).abs() < 1e-15);
        assert_eq!(apply_systematics(&out, &Systematics::default(), v_i), out);
    }

    #[test]
    fn launch_and_offset() {
        let sys = Systematics {
            mot_horizontal_offset: 1e-3,
            launch_velocity: 2e-3,
            ..Default::default()
        };
        let st = sys.apply_initial(&AtomState::default());
        assert_eq!((st.x, st.v_x), (1e-3, 2e-3));
        assert!(Systematics::default().is_ideal());
    }
}
