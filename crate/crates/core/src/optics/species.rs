use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::{ATOMIC_MASS_UNIT, HBAR, PLANCK};
use crate::error::{require_positive, Error, Result};

/// Two-level parameters of the atomic transition driven by the evanescent wave.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomSpecies {
    pub name: String,
    /// Vacuum wavelength, m.
    pub wavelength_vacuum: f64,
    /// Natural linewidth, rad/s.
    pub linewidth: f64,
    /// Saturation intensity, W/m².
    pub saturation_intensity: f64,
    /// Mass, kg.
    pub mass: f64,
    /// Single-photon recoil velocity ħk₀/M, m/s.
    pub recoil_velocity: f64,
}

impl AtomSpecies {
    pub fn new(
        name: impl Into<String>,
        wavelength_vacuum: f64,
        linewidth: f64,
        saturation_intensity: f64,
        mass: f64,
    ) -> Result<Self> {
        require_positive("wavelength_vacuum", wavelength_vacuum)?;
        require_positive("linewidth", linewidth)?;
        require_positive("saturation_intensity", saturation_intensity)?;
        require_positive("mass", mass)?;
        Ok(Self {
            name: name.into(),
            wavelength_vacuum,
            linewidth,
            saturation_intensity,
            mass,
            recoil_velocity: PLANCK / (wavelength_vacuum * mass),
        })
    }

    /// ⁸⁷Rb on the D₂ line, F=2 → F'=3 (Γ = 2π×6.0 MHz, I₀ = 1.65 mW/cm²).
    pub fn rb87_d2() -> Self {
        Self::new(
            "Rb87_D2",
            780.241_209e-9,
            2.0 * PI * 6.0e6,
            16.5,
            86.909_180_527 * ATOMIC_MASS_UNIT,
        )
        .expect("preset constants are positive")
    }

    /// Looks up a built-in preset by name.
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "Rb87_D2" | "rb87_d2" => Ok(Self::rb87_d2()),
            other => Err(Error::Config(format!("unknown species preset `{other}`"))),
        }
    }

    /// Vacuum wavenumber k₀ = 2π/λ₀.
    pub fn k0(&self) -> f64 {
        2.0 * PI / self.wavelength_vacuum
    }

    pub fn recoil_momentum(&self) -> f64 {
        HBAR * self.k0()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rb87_recoil_velocity() {
        let rb = AtomSpecies::rb87_d2();
        assert!((rb.recoil_velocity - 5.88e-3).abs() < 0.01e-3);
        let direct = rb.recoil_momentum() / rb.mass;
        assert!((direct / rb.recoil_velocity - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_nonpositive_fields() {
        assert!(AtomSpecies::new("x", 780e-9, 1.0, 1.0, 0.0).is_err());
        assert!(AtomSpecies::new("x", -1.0, 1.0, 1.0, 1.0).is_err());
        assert!(AtomSpecies::preset("Cs133").is_err());
    }
}
