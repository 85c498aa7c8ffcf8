//! Adaptive fourth-order symplectic integration through the mirror region.
//!
//! Each step is Yoshida's triple composition of velocity Verlet. The step is
//! limited so the atom moves at most a fixed fraction of ξ, and is halved
//! whenever the energy error of a single step exceeds the tolerance.

use serde::Serialize;

use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::mirror::{barrier_top, MirrorPotential};
use crate::optics::{AtomSpecies, EwField};

use super::AtomState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ScatterMode {
    /// Conservative motion only.
    Off,
    /// Accumulate photons and apply their mean horizontal momentum continuously.
    MeanForce,
    /// Accumulate the expected photon number without changing the velocity;
    /// discrete recoils are drawn afterwards.
    Tally,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BounceOptions {
    pub dt_max: f64,
    pub scatter: ScatterMode,
    /// Multiplier on the two-level scattering rate (multi-level and
    /// saturation corrections).
    pub rate_scale: f64,
    /// Largest relative energy change allowed in one step.
    pub energy_tol: f64,
    /// Largest displacement per step in units of ξ.
    pub dz_fraction: f64,
    /// Height, in units of ξ, above which motion is free fall.
    pub switch_height_xi: f64,
    pub record: bool,
}

impl Default for BounceOptions {
    fn default() -> Self {
        Self {
            dt_max: 1e-6,
            scatter: ScatterMode::MeanForce,
            rate_scale: 1.0,
            energy_tol: 1e-8,
            dz_fraction: 1.0 / 50.0,
            switch_height_xi: 20.0,
            record: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub x: f64,
    pub z: f64,
    pub v_x: f64,
    pub v_z: f64,
    pub scattered: f64,
    pub dipole: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BounceTrajectory {
    pub samples: Vec<TrajectorySample>,
    pub entry: AtomState,
    pub entry_time: f64,
    pub exit: AtomState,
    pub exit_time: f64,
    pub energy_in: f64,
    pub energy_out: f64,
    pub max_step_drift: f64,
    pub steps: usize,
    pub rejected: usize,
    pub min_z: f64,
}

impl BounceTrajectory {
    pub fn relative_energy_change(&self) -> f64 {
        (self.energy_out - self.energy_in) / self.energy_in
    }
}

pub fn switch_height(pot: &MirrorPotential, opts: &BounceOptions) -> f64 {
    opts.switch_height_xi * pot.decay_length()
}

fn gravity_of(pot: &MirrorPotential, species: &AtomSpecies) -> f64 {
    if pot.include_gravity {
        pot.mg / species.mass
    } else {
        0.0
    }
}

/// Time to fall from `z` to `z_target` (< z) under constant deceleration `g`.
pub(crate) fn time_to_height(z: f64, v_z: f64, g: f64, z_target: f64) -> Option<f64> {
    let drop = z - z_target;
    if g > 0.0 {
        let disc = v_z * v_z + 2.0 * g * drop;
        (disc >= 0.0).then(|| (v_z + disc.sqrt()) / g)
    } else if v_z < 0.0 {
        Some(drop / -v_z)
    } else {
        None
    }
}

/// Ballistic advance by `dt` under gravity `g`.
pub(crate) fn free_flight(state: &AtomState, dt: f64, g: f64) -> AtomState {
    AtomState {
        x: state.x + state.v_x * dt,
        y: state.y + state.v_y * dt,
        z: state.z + state.v_z * dt - 0.5 * g * dt * dt,
        v_z: state.v_z - g * dt,
        ..*state
    }
}

const YOSHIDA: [f64; 3] = {
    // w1 = 1/(2 − 2^{1/3}), w0 = −2^{1/3}/(2 − 2^{1/3})
    let cbrt2 = 1.259_921_049_894_873_2;
    let w1 = 1.0 / (2.0 - cbrt2);
    [w1, -cbrt2 * w1, w1]
};

/// Integrates one passage through the mirror region. `state` may start
/// anywhere above the switch height, moving towards the surface; free fall
/// down to the switch height is done in closed form. Returns at the first
/// point above the switch height on the way out.
pub fn integrate_bounce(
    state: &AtomState,
    t0: f64,
    pot: &MirrorPotential,
    species: &AtomSpecies,
    field: &EwField,
    opts: &BounceOptions,
) -> Result<BounceTrajectory> {
    let g = gravity_of(pot, species);
    let z_sw = switch_height(pot, opts);
    let (mut s, mut t) = if state.z > z_sw {
        let dt = time_to_height(state.z, state.v_z, g, z_sw).ok_or(Error::InvalidParameter {
            name: "v_z",
            requirement: "directed towards the surface",
            value: state.v_z,
        })?;
        (free_flight(state, dt, g), t0 + dt)
    } else {
        (*state, t0)
    };
    if s.v_z >= 0.0 {
        return Err(Error::InvalidParameter {
            name: "v_z",
            requirement: "negative on entry",
            value: s.v_z,
        });
    }
    let entry = s;
    let entry_time = t;
    let mass = species.mass;
    let xi = pot.decay_length();
    let energy = |z: f64, v: f64| 0.5 * mass * v * v + pot.value_unchecked(z);
    let accel = |z: f64| -pot.dipole_and_slope(z).1 / mass;
    let rate_per_dipole = match opts.scatter {
        ScatterMode::Off => 0.0,
        _ => opts.rate_scale * species.linewidth / (HBAR * field.detuning),
    };
    let kick = match opts.scatter {
        ScatterMode::MeanForce => field.recoil_velocity_x(species),
        _ => 0.0,
    };
    let energy_in = energy(s.z, s.v_z);
    let e_scale = 0.5 * mass * s.v_z * s.v_z;
    let dz_lim = opts.dz_fraction * xi;
    let collapse = 1e-12 * xi / s.v_z.abs();

    let mut samples = Vec::new();
    let mut rate = rate_per_dipole * pot.dipole(s.z);
    let record = |s: &AtomState, t: f64, samples: &mut Vec<TrajectorySample>| {
        samples.push(TrajectorySample {
            t,
            x: s.x,
            z: s.z,
            v_x: s.v_x,
            v_z: s.v_z,
            scattered: s.scattered,
            dipole: pot.dipole(s.z),
        })
    };
    if opts.record {
        record(&s, t, &mut samples);
    }
    let (mut steps, mut rejected) = (0usize, 0usize);
    let (mut scale, mut max_drift, mut min_z) = (1.0f64, 0.0f64, s.z);
    let mut e0 = energy_in;
    loop {
        let a0 = accel(s.z);
        let dt_geom = dz_lim / (s.v_z.abs() + (dz_lim * a0.abs()).sqrt());
        let dt = opts.dt_max.min(dt_geom) * scale;
        if dt < collapse || steps + rejected > 20_000_000 {
            return Err(Error::StepCollapse { z: s.z, t, step: dt });
        }
        let (mut z, mut v) = (s.z, s.v_z);
        let mut ok = true;
        for w in YOSHIDA {
            let h = w * dt;
            v += 0.5 * h * accel(z);
            z += h * v;
            if !(z > 0.0) {
                ok = false;
                break;
            }
            v += 0.5 * h * accel(z);
        }
        let e1 = if ok { energy(z, v) } else { f64::INFINITY };
        let drift = ((e1 - e0) / e_scale).abs();
        if !(drift <= opts.energy_tol) {
            rejected += 1;
            scale *= 0.5;
            continue;
        }
        steps += 1;
        max_drift = max_drift.max(drift);
        if drift < opts.energy_tol / 32.0 {
            scale = (scale * 1.5).min(1.0);
        }
        let next_rate = rate_per_dipole * pot.dipole(z);
        let d_n = 0.5 * (rate + next_rate) * dt;
        rate = next_rate;
        s.x += s.v_x * dt;
        s.y += s.v_y * dt;
        s.v_x += d_n * kick;
        s.scattered += d_n;
        s.z = z;
        s.v_z = v;
        t += dt;
        e0 = e1;
        min_z = min_z.min(z);
        if opts.record {
            record(&s, t, &mut samples);
        }
        if z < pot.z_min {
            return Err(Error::NoBounce {
                energy: energy_in,
                barrier: barrier_top(pot)?.1,
            });
        }
        if v > 0.0 && z >= z_sw {
            break;
        }
    }
    Ok(BounceTrajectory {
        samples,
        entry,
        entry_time,
        exit: s,
        exit_time: t,
        energy_in,
        energy_out: energy(s.z, s.v_z),
        max_step_drift: max_drift,
        steps,
        rejected,
        min_z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::budget::nscat_path_integral;
    use crate::constants::GRAVITY;
    use crate::mirror::PotentialOptions;
    use crate::optics::{EwGeometry, Polarization};

    fn rb() -> AtomSpecies {
        AtomSpecies::rb87_d2()
    }

    fn setup(mrad: f64, delta_gamma: f64, opts: &PotentialOptions) -> (EwField, MirrorPotential) {
        let s = rb();
        let g = EwGeometry::above_critical(1.51, mrad * 1e-3, 335e-6, 19e-3, Polarization::TM)
            .unwrap();
        let field = EwField::new(&g, &s, delta_gamma * s.linewidth).unwrap();
        let pot = MirrorPotential::from_field(&field, &s, 1.51, opts).unwrap();
        (field, pot)
    }

    fn falling(v: f64, z: f64) -> AtomState {
        AtomState {
            z,
            v_z: -v,
            v_x: 1e-3,
            ..Default::default()
        }
    }

    const V_I: f64 = 0.3598;

    #[test]
    fn exponential_bounce_follows_sech_squared() {
        let s = rb();
        let (field, pot) = setup(15.2, 44.0, &PotentialOptions::optical_only());
        let opts = BounceOptions {
            scatter: ScatterMode::Off,
            record: true,
            energy_tol: 1e-11,
            ..Default::default()
        };
        let z0 = switch_height(&pot, &opts);
        let traj = integrate_bounce(&falling(V_I, z0), 0.0, &pot, &s, &field, &opts).unwrap();
        let e = traj.energy_in;
        let p = (2.0 * s.mass * e).sqrt();
        let kappa = pot.kappa;
        let z_t = (pot.u0 / e).ln() / (2.0 * kappa);
        // Closed-form exponential bounce: z(t) = z_t + ln cosh(κp(t−t₀)/M)/κ.
        let t_turn = (s.mass / (kappa * p)) * ((kappa * (z0 - z_t)).exp()).acosh();
        for sample in traj.samples.iter().step_by(7) {
            if sample.t > traj.exit_time - 1e-9 {
                continue;
            }
            let c = (kappa * p * (sample.t - t_turn) / s.mass).cosh();
            let oracle = e / (c * c);
            if oracle < 1e-6 * e {
                continue;
            }
            assert!(
                (sample.dipole / oracle - 1.0).abs() < 1e-4,
                "t={} {} {}",
                sample.t,
                sample.dipole,
                oracle
            );
        }
        let v_out = traj.exit.v_z;
        let v_back = (v_out * v_out + 2.0 * (pot.dipole(traj.exit.z) - pot.dipole(z0)) / s.mass).sqrt();
        assert!((v_back / V_I - 1.0).abs() < 1e-8, "{v_back}");
        assert!(traj.relative_energy_change().abs() < 1e-8);
        // Horizontal motion is uniform without scattering.
        for w in traj.samples.windows(2) {
            let slope = (w[1].x - w[0].x) / (w[1].t - w[0].t);
            assert!((slope - 1e-3).abs() < 1e-15);
        }
    }

    #[test]
    fn energy_audit_with_all_forces() {
        let s = rb();
        for (mrad, d) in [(0.9, 44.0), (24.0, 44.0), (15.2, 233.0)] {
            let (field, pot) = setup(mrad, d, &PotentialOptions::default());
            let opts = BounceOptions {
                scatter: ScatterMode::Off,
                ..Default::default()
            };
            let traj = integrate_bounce(&falling(1e-12, 6.6e-3), 0.0, &pot, &s, &field, &opts).unwrap();
            assert!(traj.relative_energy_change().abs() < 1e-6);
            assert!(traj.min_z > pot.z_min);
            assert!((traj.entry_time - (2.0 * 6.6e-3 / GRAVITY).sqrt()).abs() < 1e-3);
        }
    }

    #[test]
    fn mean_force_is_horizontal() {
        let s = rb();
        let (field, pot) = setup(0.9, 44.0, &PotentialOptions::optical_only());
        let run = |mode| {
            let opts = BounceOptions {
                scatter: mode,
                ..Default::default()
            };
            integrate_bounce(&falling(V_I, 1e-4), 0.0, &pot, &s, &field, &opts).unwrap()
        };
        let off = run(ScatterMode::Off);
        let on = run(ScatterMode::MeanForce);
        assert_eq!(off.exit.v_z, on.exit.v_z);
        let dv = on.exit.v_x - off.exit.v_x;
        assert!((dv / (on.exit.scattered * field.recoil_velocity_x(&s)) - 1.0).abs() < 1e-12);
        let tally = run(ScatterMode::Tally);
        assert_eq!(tally.exit.v_x, off.exit.v_x);
        assert_eq!(tally.exit.scattered, on.exit.scattered);
    }

    #[test]
    fn photon_count_matches_path_integral() {
        let s = rb();
        for (mrad, d) in [(0.9, 44.0), (24.0, 44.0), (15.2, 100.0)] {
            let (field, pot) = setup(mrad, d, &PotentialOptions::default());
            let opts = BounceOptions::default();
            let v = (2.0 * GRAVITY * 6.6e-3f64).sqrt();
            let traj = integrate_bounce(&falling(v, 1e-3), 0.0, &pot, &s, &field, &opts).unwrap();
            let p = s.mass * traj.entry.v_z.abs();
            let oracle = nscat_path_integral(&s, &field, &pot, p).unwrap();
            assert!((traj.exit.scattered / oracle - 1.0).abs() < 5e-3, "{} {}", traj.exit.scattered, oracle);
        }
    }

    #[test]
    fn time_reversal_retraces() {
        let s = rb();
        let (field, pot) = setup(24.0, 44.0, &PotentialOptions::default());
        let opts = BounceOptions {
            scatter: ScatterMode::Off,
            energy_tol: 1e-11,
            ..Default::default()
        };
        let start = falling(V_I, switch_height(&pot, &opts));
        let fwd = integrate_bounce(&start, 0.0, &pot, &s, &field, &opts).unwrap();
        let mut back = fwd.exit;
        back.v_z = -back.v_z;
        back.v_x = -back.v_x;
        let rev = integrate_bounce(&back, 0.0, &pot, &s, &field, &opts).unwrap();
        // Carry the return trip back to the starting height in closed form.
        let dz = rev.exit.z - start.z;
        let v = (rev.exit.v_z.powi(2) + 2.0 * GRAVITY * dz).sqrt();
        assert!((v / V_I - 1.0).abs() < 1e-7, "{v}");
        // Same transit time both ways, so the horizontal drift cancels.
        assert!((rev.exit_time / fwd.exit_time - 1.0).abs() < 1e-3);
        assert!(rev.exit.x.abs() < 1e-3 * 1e-3 * fwd.exit_time);
    }

    #[test]
    fn switchover_is_continuous() {
        let s = rb();
        let (field, pot) = setup(15.2, 44.0, &PotentialOptions::default());
        let opts = BounceOptions {
            scatter: ScatterMode::Off,
            ..Default::default()
        };
        let z_sw = switch_height(&pot, &opts);
        let high = integrate_bounce(&falling(V_I, 2e-3), 0.0, &pot, &s, &field, &opts).unwrap();
        let v_sw = high.entry.v_z;
        let oracle = -(V_I * V_I + 2.0 * GRAVITY * (2e-3 - z_sw)).sqrt();
        assert!((v_sw / oracle - 1.0).abs() < 1e-10);
        assert!((high.entry.z / z_sw - 1.0).abs() < 1e-10);
    }

    #[test]
    fn lost_atom_reported() {
        let s = rb();
        let (field, pot) = setup(24.0, 44.0, &PotentialOptions::default());
        let weak = pot.scaled(0.01);
        let r = integrate_bounce(&falling(V_I, 1e-4), 0.0, &weak, &s, &field, &BounceOptions::default());
        assert!(matches!(r, Err(Error::NoBounce { .. })), "{r:?}");
    }
}
