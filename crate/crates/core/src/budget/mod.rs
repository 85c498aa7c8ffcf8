//! Photons scattered during one bounce.

pub mod hyperfine;
pub mod obe;

use serde::{Deserialize, Serialize};

use crate::constants::HBAR;
use crate::error::{require_positive, Error, Result};
use crate::mirror::{barrier_top, descending_root, MirrorPotential};
use crate::numerics::quad::{self, QuadOptions};
use crate::numerics::roots::bisect;
use crate::optics::{AtomSpecies, EwField};

pub use hyperfine::{hyperfine_factor, HyperfineLine, HyperfineModel, LineContribution};
pub use obe::{
    adiabaticity_ratio, obe_scattered_photons, pulse_fwhm, pulse_time, BlochState, ObeOptions,
    ObeResult,
};

fn require_blue(detuning: f64) -> Result<()> {
    if detuning > 0.0 {
        Ok(())
    } else {
        Err(Error::RedDetuning(detuning))
    }
}

/// Two-level photon number for a purely exponential mirror, (Γ/δ)·p_i/(ħκ).
pub fn nscat_analytic(species: &AtomSpecies, field: &EwField, p_incident: f64) -> Result<f64> {
    require_blue(field.detuning)?;
    require_positive("p_incident", p_incident)?;
    Ok(species.linewidth / field.detuning * p_incident / (HBAR * field.decay_constant))
}

fn path_integral_opts() -> QuadOptions {
    QuadOptions {
        rel_tol: 1e-6,
        abs_tol: 0.0,
        max_intervals: 2000,
    }
}

/// Photon number from the momentum-space integral
/// (Γ/ħδ)∫ U_dip/(−∂U/∂z) dp over (−p_i, p_i), with z(p) the outermost
/// solution of U(z) = (p_i² − p²)/2M.
///
/// Gravity is left out of this form: over the bounce it changes the
/// momentum by a negligible amount, while keeping it would put a second
/// root of the energy equation at the release height.
pub fn nscat_path_integral(
    species: &AtomSpecies,
    field: &EwField,
    pot: &MirrorPotential,
    p_incident: f64,
) -> Result<f64> {
    require_blue(field.detuning)?;
    require_positive("p_incident", p_incident)?;
    let pot = pot.without_gravity();
    let two_m = 2.0 * species.mass;
    let energy = p_incident * p_incident / two_m;
    let (top, height) = barrier_top(&pot)?;
    if height <= energy {
        return Err(Error::NoBounce {
            energy,
            barrier: height,
        });
    }
    let integrand = |p: f64| -> Result<f64> {
        let level = (p_incident * p_incident - p * p) / two_m;
        let z = descending_root(&pot, top, level).map_err(|_| Error::RootBracketing { p })?;
        let (dip, slope) = pot.dipole_and_slope(z);
        if slope >= 0.0 {
            return Err(Error::RootBracketing { p });
        }
        Ok(dip / -slope)
    };
    // The integrand is even in p.
    let half = quad::integrate(integrand, 0.0, p_incident, path_integral_opts())?;
    Ok(2.0 * species.linewidth / (HBAR * field.detuning) * half.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MirrorAverage {
    /// Photon number averaged uniformly over the reflecting disk.
    pub mean: f64,
    /// Local intensity factor exp(−2r²/w²) at the disk edge.
    pub edge_factor: f64,
}

/// Average of the path-integral photon number over the area of the mirror
/// that reflects atoms with momentum `p_incident`. Atoms arriving uniformly
/// over the disk see u0·f with ln f uniform on [ln f_edge, 0].
pub fn nscat_mirror_averaged(
    species: &AtomSpecies,
    field: &EwField,
    pot: &MirrorPotential,
    p_incident: f64,
) -> Result<MirrorAverage> {
    require_positive("p_incident", p_incident)?;
    let pot = pot.without_gravity();
    let energy = p_incident * p_incident / (2.0 * species.mass);
    let height = |ln_f: f64| -> Result<f64> { Ok(barrier_top(&pot.scaled(ln_f.exp()))?.1) };
    if height(0.0)? <= energy {
        return Err(Error::NoBounce {
            energy,
            barrier: height(0.0)?,
        });
    }
    // The barrier is bounded by the dipole amplitude, so f = E/u0 reflects nothing.
    let ln_lo = (energy / pot.u0).ln() - 1e-6;
    let ln_edge = bisect(|l| Ok(height(l)? - energy), ln_lo, 0.0, 1e-12)?;
    // Stay just inside the edge where the atom still has a turning point.
    let ln_inner = ln_edge + 1e-9 * ln_edge.abs().max(1e-3);
    let opts = QuadOptions {
        rel_tol: 1e-5,
        abs_tol: 0.0,
        max_intervals: 400,
    };
    let total = quad::integrate(
        |l| nscat_path_integral(species, field, &pot.scaled(l.exp()), p_incident),
        ln_inner,
        0.0,
        opts,
    )?;
    Ok(MirrorAverage {
        mean: total.value / -ln_inner,
        edge_factor: ln_edge.exp(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corrections {
    pub vdw: bool,
    pub hyperfine: bool,
    pub obe: bool,
    /// Empirical extra recoils, added only when comparing with measurements.
    pub roughness_offset: f64,
}

impl Default for Corrections {
    fn default() -> Self {
        Self {
            vdw: true,
            hyperfine: true,
            obe: true,
            roughness_offset: 0.0,
        }
    }
}

impl Corrections {
    pub fn none() -> Self {
        Self {
            vdw: false,
            hyperfine: false,
            obe: false,
            roughness_offset: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatterBudget {
    pub n_twolevel: f64,
    pub n_pathintegral: f64,
    pub n_obe: f64,
    pub hyperfine_factor: f64,
    pub n_corrected: f64,
    pub roughness_offset: f64,
    /// OBE photons over the unsaturated count for the same pulse.
    pub saturation_factor: f64,
    pub peak_saturation: f64,
    pub pulse_time: f64,
    pub pulse_fwhm: f64,
    pub adiabaticity: f64,
    /// How the corrections were combined.
    pub composition: &'static str,
    pub line_contributions: Vec<LineContribution>,
}

/// Full budget: path integral, saturation and hyperfine corrections combined
/// multiplicatively, roughness offset added last.
///
/// The van der Waals term is included when `pot` has it switched on; the
/// `vdw` toggle is applied by whoever builds the potential.
pub fn corrected_prediction(
    species: &AtomSpecies,
    field: &EwField,
    pot: &MirrorPotential,
    p_incident: f64,
    model: &HyperfineModel,
    corrections: &Corrections,
) -> Result<ScatterBudget> {
    let n_twolevel = nscat_analytic(species, field, p_incident)?;
    let n_pathintegral = nscat_path_integral(species, field, pot, p_incident)?;
    let energy = p_incident * p_incident / (2.0 * species.mass);
    let pot_ng = pot.without_gravity();
    let (top, _) = barrier_top(&pot_ng)?;
    let turning = descending_root(&pot_ng, top, energy)?;
    let peak_saturation = 2.0 * pot_ng.dipole(turning) / (HBAR * field.detuning);
    let tau = pulse_time(species.mass, field.decay_constant, p_incident);
    let saturation_factor = if corrections.obe {
        obe_scattered_photons(species, peak_saturation, tau, field.detuning)?.saturation_factor
    } else {
        1.0
    };
    let n_obe = n_pathintegral * saturation_factor;
    let (hf, line_contributions) = if corrections.hyperfine {
        (
            hyperfine_factor(model, field.detuning)?,
            model.contributions(field.detuning)?,
        )
    } else {
        (1.0, Vec::new())
    };
    Ok(ScatterBudget {
        n_twolevel,
        n_pathintegral,
        n_obe,
        hyperfine_factor: hf,
        n_corrected: n_obe * hf + corrections.roughness_offset,
        roughness_offset: corrections.roughness_offset,
        saturation_factor,
        peak_saturation,
        pulse_time: tau,
        pulse_fwhm: pulse_fwhm(tau),
        adiabaticity: adiabaticity_ratio(species, tau),
        composition: "n_pathintegral * saturation_factor * hyperfine_factor + roughness_offset",
        line_contributions,
    })
}
