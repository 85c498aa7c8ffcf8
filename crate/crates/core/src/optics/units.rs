//! Detuning input modes. Configs tag every detuning with its unit so that the
//! factor 2π between "MHz" and angular frequency is never implicit.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::AtomSpecies;
use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DetuningUnit {
    /// Multiples of the natural linewidth Γ.
    Gamma,
    /// Ordinary frequency in MHz, δ = 2π×10⁶·value.
    MHz,
    /// Ordinary frequency in GHz.
    GHz,
    /// Angular frequency, rad/s.
    RadPerSecond,
}

impl DetuningUnit {
    pub fn to_angular(self, value: f64, species: &AtomSpecies) -> f64 {
        match self {
            DetuningUnit::Gamma => value * species.linewidth,
            DetuningUnit::MHz => mhz_to_angular(value),
            DetuningUnit::GHz => 2.0 * PI * 1e9 * value,
            DetuningUnit::RadPerSecond => value,
        }
    }

    pub fn from_angular(self, detuning: f64, species: &AtomSpecies) -> f64 {
        match self {
            DetuningUnit::Gamma => detuning / species.linewidth,
            DetuningUnit::MHz => angular_to_mhz(detuning),
            DetuningUnit::GHz => detuning / (2.0 * PI * 1e9),
            DetuningUnit::RadPerSecond => detuning,
        }
    }
}

impl FromStr for DetuningUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Gamma" | "gamma" | "Γ" => Ok(DetuningUnit::Gamma),
            "MHz" => Ok(DetuningUnit::MHz),
            "GHz" => Ok(DetuningUnit::GHz),
            "rad/s" => Ok(DetuningUnit::RadPerSecond),
            other => Err(Error::Config(format!("unknown detuning unit `{other}`"))),
        }
    }
}

impl fmt::Display for DetuningUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DetuningUnit::Gamma => "Gamma",
            DetuningUnit::MHz => "MHz",
            DetuningUnit::GHz => "GHz",
            DetuningUnit::RadPerSecond => "rad/s",
        })
    }
}

pub fn mhz_to_angular(mhz: f64) -> f64 {
    2.0 * PI * 1e6 * mhz
}

pub fn angular_to_mhz(detuning: f64) -> f64 {
    detuning / (2.0 * PI * 1e6)
}
