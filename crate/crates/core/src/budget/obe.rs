//! Two-level optical Bloch equations driven by the sech² intensity pulse an
//! atom sees while bouncing on an exponential potential.
//!
//! Rotating frame, state (ρ_ee, Re ρ_eg, Im ρ_eg, N) with time in units of 1/Γ:
//!
//! ρ̇_ee = −ρ_ee − Ω·v,  u̇ = −u/2 − Δ·v,  v̇ = −v/2 + Δ·u + (Ω/2)(2ρ_ee − 1),  Ṅ = ρ_ee
//!
//! where Δ = δ/Γ and the Rabi frequency follows from s = 2Ω²/(Γ² + 4δ²), so
//! the steady state is ρ_ee = s/(2(1+s)) and the weak-drive limit is exact.

use serde::Serialize;

use crate::error::{require_positive, Error, Result};
use crate::numerics::ode::{dopri5, OdeOptions};
use crate::optics::AtomSpecies;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlochState {
    pub excited_population: f64,
    pub coherence_re: f64,
    pub coherence_im: f64,
    pub time: f64,
}

impl BlochState {
    pub fn coherence_abs(&self) -> f64 {
        self.coherence_re.hypot(self.coherence_im)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Half-width of the integration window in units of the pulse time τ.
    pub span_in_tau: f64,
}

impl Default for ObeOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            span_in_tau: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObeResult {
    pub photons: f64,
    /// Γ∫s/2 dt = s_peak·Γ·τ, the unsaturated count for the same pulse.
    pub photons_lowsat: f64,
    pub saturation_factor: f64,
    pub max_excited: f64,
    pub max_coherence: f64,
    pub steps: usize,
}

/// Excited population of a two-level atom in steady state.
pub fn steady_state_excited(s: f64) -> f64 {
    s / (2.0 * (1.0 + s))
}

/// Time constant of the sech² pulse, τ = M/(κ p_i).
pub fn pulse_time(mass: f64, kappa: f64, p_incident: f64) -> f64 {
    mass / (kappa * p_incident)
}

/// Full width at half maximum of sech²(t/τ).
pub fn pulse_fwhm(tau: f64) -> f64 {
    2.0 * tau * 2f64.sqrt().acosh()
}

/// Internal relaxation time over pulse time; small means the atom follows
/// the pulse adiabatically.
pub fn adiabaticity_ratio(species: &AtomSpecies, tau: f64) -> f64 {
    1.0 / (species.linewidth * tau)
}

pub(crate) struct BlochRun {
    pub end: [f64; 4],
    pub max_excited: f64,
    pub max_coherence: f64,
    pub steps: usize,
}

/// Integrates the Bloch equations for a saturation profile `s(t)` given in
/// units of 1/Γ, from rest in the ground state.
pub(crate) fn integrate_bloch<S>(
    detuning_over_gamma: f64,
    saturation: S,
    t0: f64,
    t1: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<BlochRun>
where
    S: Fn(f64) -> f64,
{
    let d = detuning_over_gamma;
    let rabi_scale = (1.0 + 4.0 * d * d) / 2.0;
    let rhs = |t: f64, y: &[f64; 4]| {
        let omega = (saturation(t).max(0.0) * rabi_scale).sqrt();
        let [rho, u, v, _] = *y;
        [
            -rho - omega * v,
            -0.5 * u - d * v,
            -0.5 * v + d * u + 0.5 * omega * (2.0 * rho - 1.0),
            rho,
        ]
    };
    let period = 1.0 / (1.0 + d.abs());
    let opts = OdeOptions {
        rel_tol,
        abs_tol,
        initial_step: 1e-3 * period,
        max_step: 0.5 * period,
        min_step: 1e-12 * period,
        max_steps: 50_000_000,
    };
    let mut max_excited: f64 = 0.0;
    let mut max_coherence: f64 = 0.0;
    let (end, stats) = dopri5(rhs, t0, t1, [0.0; 4], opts, |_, y| {
        max_excited = max_excited.max(y[0]);
        max_coherence = max_coherence.max(y[1].hypot(y[2]));
    })
    .map_err(|f| Error::BlochDiverged {
        t: f.t,
        steps: f.steps,
        step: f.step,
    })?;
    Ok(BlochRun {
        end,
        max_excited,
        max_coherence,
        steps: stats.accepted,
    })
}

pub fn obe_scattered_photons(
    species: &AtomSpecies,
    pulse_peak_s: f64,
    tau: f64,
    detuning: f64,
) -> Result<ObeResult> {
    obe_scattered_photons_with(species, pulse_peak_s, tau, detuning, ObeOptions::default())
}

/// Photons scattered during the pulse s(t) = s_peak·sech²(t/τ).
pub fn obe_scattered_photons_with(
    species: &AtomSpecies,
    pulse_peak_s: f64,
    tau: f64,
    detuning: f64,
    opts: ObeOptions,
) -> Result<ObeResult> {
    require_positive("tau", tau)?;
    if !(pulse_peak_s >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "pulse_peak_s",
            requirement: "non-negative",
            value: pulse_peak_s,
        });
    }
    if detuning == 0.0 {
        return Err(Error::ResonantDetuning);
    }
    let gamma = species.linewidth;
    let lowsat = pulse_peak_s * gamma * tau;
    if pulse_peak_s == 0.0 {
        return Ok(ObeResult {
            photons: 0.0,
            photons_lowsat: 0.0,
            saturation_factor: 1.0,
            max_excited: 0.0,
            max_coherence: 0.0,
            steps: 0,
        });
    }
    let tau_g = gamma * tau;
    let span = opts.span_in_tau * tau_g;
    let run = integrate_bloch(
        detuning / gamma,
        |t| {
            let c = (t / tau_g).cosh();
            pulse_peak_s / (c * c)
        },
        -span,
        span,
        opts.rel_tol,
        opts.abs_tol,
    )?;
    let photons = run.end[3];
    Ok(ObeResult {
        photons,
        photons_lowsat: lowsat,
        saturation_factor: photons / lowsat,
        max_excited: run.max_excited,
        max_coherence: run.max_coherence,
        steps: run.steps,
    })
}
