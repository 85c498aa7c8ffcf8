//! Evanescent-wave geometry and field quantities.
//!
//! Everything here is a pure function of immutable parameter records. Units
//! are SI throughout: angles in radians, detunings in rad/s.

mod fresnel;
mod species;
mod units;

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::constants::HBAR;
use crate::error::{require_positive, Error, Result};

pub use species::AtomSpecies;
pub use units::{angular_to_mhz, mhz_to_angular, DetuningUnit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Polarization {
    TM,
    TE,
}

/// Incident beam and prism: everything needed to build the evanescent field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EwGeometry {
    pub refractive_index: f64,
    /// Angle of incidence inside the glass, rad.
    pub angle: f64,
    /// 1/e² intensity radius of the spot on the surface, m.
    pub waist: f64,
    /// Beam power, W.
    pub power: f64,
    pub polarization: Polarization,
    /// Replaces the Fresnel enhancement with a fixed value when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enhancement_override: Option<f64>,
}

impl EwGeometry {
    pub fn new(
        refractive_index: f64,
        angle: f64,
        waist: f64,
        power: f64,
        polarization: Polarization,
    ) -> Result<Self> {
        let critical = critical_angle(refractive_index)?;
        if !(angle > critical && angle < FRAC_PI_2) {
            return Err(Error::SubcriticalAngle { angle, critical });
        }
        require_positive("waist", waist)?;
        if !(power >= 0.0 && power.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "power",
                requirement: "non-negative",
                value: power,
            });
        }
        Ok(Self {
            refractive_index,
            angle,
            waist,
            power,
            polarization,
            enhancement_override: None,
        })
    }

    /// Geometry specified as an angle above the critical angle.
    pub fn above_critical(
        refractive_index: f64,
        delta_angle: f64,
        waist: f64,
        power: f64,
        polarization: Polarization,
    ) -> Result<Self> {
        let critical = critical_angle(refractive_index)?;
        Self::new(
            refractive_index,
            critical + delta_angle,
            waist,
            power,
            polarization,
        )
    }

    pub fn critical_angle(&self) -> f64 {
        (1.0 / self.refractive_index).asin()
    }

    pub fn with_angle(&self, angle: f64) -> Result<Self> {
        let mut g = Self::new(
            self.refractive_index,
            angle,
            self.waist,
            self.power,
            self.polarization,
        )?;
        g.enhancement_override = self.enhancement_override;
        Ok(g)
    }

    pub fn with_power(&self, power: f64) -> Result<Self> {
        let mut g = Self::new(
            self.refractive_index,
            self.angle,
            self.waist,
            power,
            self.polarization,
        )?;
        g.enhancement_override = self.enhancement_override;
        Ok(g)
    }
}

/// Decay constant κ, decay length ξ = 1/κ and propagating wavevector k_x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayProfile {
    pub kappa: f64,
    pub xi: f64,
    pub kx: f64,
}

/// The evanescent field for a given geometry and detuning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EwField {
    pub decay_constant: f64,
    pub decay_length: f64,
    pub kx: f64,
    pub enhancement: f64,
    /// Peak beam intensity inside the glass, 2P/(πw²).
    pub peak_intensity_glass: f64,
    /// Saturation parameter at the surface at the beam center.
    pub s0: f64,
    /// Dipole potential at the surface at the beam center, J.
    pub u0: f64,
    /// Laser detuning δ = ω_L − ω₀, rad/s.
    pub detuning: f64,
    pub waist: f64,
}

impl EwField {
    pub fn new(geom: &EwGeometry, species: &AtomSpecies, detuning: f64) -> Result<Self> {
        if detuning == 0.0 {
            return Err(Error::ResonantDetuning);
        }
        let profile = decay_profile(geom, species)?;
        let enhancement = enhancement(geom)?;
        let peak = peak_intensity(geom.power, geom.waist);
        let ratio = species.linewidth / (2.0 * detuning);
        let s0 = ratio * ratio * enhancement * peak / species.saturation_intensity;
        Ok(Self {
            decay_constant: profile.kappa,
            decay_length: profile.xi,
            kx: profile.kx,
            enhancement,
            peak_intensity_glass: peak,
            s0,
            u0: HBAR * detuning * s0 / 2.0,
            detuning,
            waist: geom.waist,
        })
    }

    /// Relative Gaussian intensity exp(−2r²/w²) at transverse radius `r`.
    pub fn transverse_factor(&self, r: f64) -> f64 {
        (-2.0 * r * r / (self.waist * self.waist)).exp()
    }

    /// Recoil velocity of one absorbed evanescent photon, ħk_x/M.
    pub fn recoil_velocity_x(&self, species: &AtomSpecies) -> f64 {
        HBAR * self.kx / species.mass
    }
}

pub fn critical_angle(n: f64) -> Result<f64> {
    if !(n > 1.0 && n.is_finite()) {
        return Err(Error::InvalidMedium(n));
    }
    Ok((1.0 / n).asin())
}

pub fn decay_profile(geom: &EwGeometry, species: &AtomSpecies) -> Result<DecayProfile> {
    let n = geom.refractive_index;
    let critical = critical_angle(n)?;
    if !(geom.angle > critical) {
        return Err(Error::SubcriticalAngle {
            angle: geom.angle,
            critical,
        });
    }
    let k0 = species.k0();
    let kappa = k0 * fresnel::evanescent_q(n, geom.angle);
    Ok(DecayProfile {
        kappa,
        xi: 1.0 / kappa,
        kx: k0 * n * geom.angle.sin(),
    })
}

/// Inverts `decay_profile`: the angle of incidence giving decay constant `kappa`.
pub fn angle_for_decay_constant(n: f64, kappa: f64, species: &AtomSpecies) -> Result<f64> {
    critical_angle(n)?;
    require_positive("kappa", kappa)?;
    let q = kappa / species.k0();
    let sin = (1.0 + q * q).sqrt() / n;
    if sin >= 1.0 {
        return Err(Error::InvalidParameter {
            name: "kappa",
            requirement: "below the grazing-incidence limit k0*sqrt(n^2-1)",
            value: kappa,
        });
    }
    Ok(sin.asin())
}

pub fn angle_for_decay_length(n: f64, xi: f64, species: &AtomSpecies) -> Result<f64> {
    require_positive("decay length", xi)?;
    angle_for_decay_constant(n, 1.0 / xi, species)
}

/// Shortest decay length reachable below grazing incidence, 1/(k₀√(n²−1)).
pub fn minimum_decay_length(n: f64, species: &AtomSpecies) -> Result<f64> {
    critical_angle(n)?;
    Ok(1.0 / (species.k0() * (n * n - 1.0).sqrt()))
}

/// Angle change from displacing the first lens of a confocal relay telescope.
pub fn telescope_angle(delta_a: f64, focal_length: f64, n: f64) -> Result<f64> {
    require_positive("focal_length", focal_length)?;
    require_positive("refractive index", n)?;
    Ok(delta_a / (focal_length * n))
}

pub fn enhancement_tm(geom: &EwGeometry) -> Result<f64> {
    if geom.polarization != Polarization::TM {
        return Err(Error::Config(
            "enhancement_tm called with TE polarization; use enhancement_te".into(),
        ));
    }
    check_supercritical(geom)?;
    Ok(fresnel::enhancement_tm_raw(geom.refractive_index, geom.angle))
}

pub fn enhancement_te(geom: &EwGeometry) -> Result<f64> {
    check_supercritical(geom)?;
    Ok(fresnel::enhancement_te_raw(geom.refractive_index, geom.angle))
}

/// Enhancement for the geometry's own polarization, honoring any override.
pub fn enhancement(geom: &EwGeometry) -> Result<f64> {
    if let Some(t) = geom.enhancement_override {
        require_positive("enhancement_override", t)?;
        return Ok(t);
    }
    match geom.polarization {
        Polarization::TM => enhancement_tm(geom),
        Polarization::TE => enhancement_te(geom),
    }
}

fn check_supercritical(geom: &EwGeometry) -> Result<()> {
    let critical = critical_angle(geom.refractive_index)?;
    if geom.angle > critical && geom.angle < FRAC_PI_2 {
        Ok(())
    } else {
        Err(Error::SubcriticalAngle {
            angle: geom.angle,
            critical,
        })
    }
}

/// Peak intensity 2P/(πw²) of a Gaussian beam.
pub fn peak_intensity(power: f64, waist: f64) -> f64 {
    2.0 * power / (PI * waist * waist)
}

fn check_height(z: f64) -> Result<()> {
    if z >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "z",
            requirement: "non-negative",
            value: z,
        })
    }
}

/// s(z, r) = (Γ/2δ)² T I(r)/I₀ · exp(−2κz).
pub fn saturation_parameter(field: &EwField, species: &AtomSpecies, z: f64, r: f64) -> Result<f64> {
    if field.detuning == 0.0 {
        return Err(Error::ResonantDetuning);
    }
    check_height(z)?;
    let ratio = species.linewidth / (2.0 * field.detuning);
    let intensity = field.peak_intensity_glass * field.transverse_factor(r);
    Ok(ratio * ratio * field.enhancement * intensity / species.saturation_intensity
        * (-2.0 * field.decay_constant * z).exp())
}

/// U_dip(z, r) = ħδ s(z, r)/2.
pub fn dipole_potential(field: &EwField, species: &AtomSpecies, z: f64, r: f64) -> Result<f64> {
    let s = saturation_parameter(field, species, z, r)?;
    Ok(HBAR * field.detuning * s / 2.0)
}

/// Low-saturation scattering rate Γ' = sΓ/2 = (Γ/ħδ) U_dip.
pub fn scattering_rate(field: &EwField, species: &AtomSpecies, z: f64, r: f64) -> Result<f64> {
    let s = saturation_parameter(field, species, z, r)?;
    Ok(s * species.linewidth / 2.0)
}
