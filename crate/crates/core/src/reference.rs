//! Published values the simulator is compared against.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Tolerance {
    Absolute(f64),
    Relative(f64),
    /// Within a factor of the reference, either way.
    Factor(f64),
}

impl Tolerance {
    pub fn accepts(self, computed: f64, reference: f64) -> bool {
        match self {
            Tolerance::Absolute(t) => (computed - reference).abs() <= t,
            Tolerance::Relative(r) => (computed / reference - 1.0).abs() <= r,
            Tolerance::Factor(f) => computed >= reference / f && computed <= reference * f,
        }
    }
}

impl std::fmt::Display for Tolerance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tolerance::Absolute(t) => write!(f, "± {t}"),
            Tolerance::Relative(r) => write!(f, "± {}%", r * 100.0),
            Tolerance::Factor(x) => write!(f, "within ×{x}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceRow {
    pub key: &'static str,
    pub description: &'static str,
    pub values: &'static [f64],
    pub unit: &'static str,
    pub tolerance: Tolerance,
    pub citation: &'static str,
}

/// Read-only; every row names where its numbers come from.
pub const REFERENCE_TABLE: &[ReferenceRow] = &[
    ReferenceRow {
        key: "recoil_range",
        description: "photon recoils per atom over the explored parameter range",
        values: &[2.0, 31.0],
        unit: "recoils",
        tolerance: Tolerance::Absolute(1.0),
        citation: "published recoil range, summary",
    },
    ReferenceRow {
        key: "incident_momentum",
        description: "incident momentum after the 6.6 mm drop",
        values: &[61.0],
        unit: "hbar k0",
        tolerance: Tolerance::Absolute(0.5),
        citation: "published incident momentum, theory section",
    },
    ReferenceRow {
        key: "fall_time",
        description: "mean bounce time after release",
        values: &[36.7],
        unit: "ms",
        tolerance: Tolerance::Absolute(0.1),
        citation: "published bounce time, image sequence",
    },
    ReferenceRow {
        key: "scan_decay_lengths",
        description: "decay lengths at 0.9, 15.2 and 24.0 mrad above the critical angle",
        values: &[2.8, 0.67, 0.53],
        unit: "um",
        tolerance: Tolerance::Absolute(0.05),
        citation: "published angle scan",
    },
    ReferenceRow {
        key: "trajectory_decay_lengths",
        description: "decay lengths of the measured trajectory family",
        values: &[1.87, 1.03, 0.79, 0.67, 0.59, 0.53],
        unit: "um",
        tolerance: Tolerance::Absolute(0.01),
        citation: "published trajectory family",
    },
    ReferenceRow {
        key: "enhancement_range",
        description: "TM intensity enhancement across the angle scan",
        values: &[5.4, 6.0],
        unit: "",
        tolerance: Tolerance::Absolute(0.1),
        citation: "published enhancement range, setup description",
    },
    ReferenceRow {
        key: "vdw_excess",
        description: "van der Waals increase of the photon number at 0.53 um",
        values: &[0.8],
        unit: "%",
        tolerance: Tolerance::Absolute(0.3),
        citation: "published correction estimate, van der Waals",
    },
    ReferenceRow {
        key: "hyperfine_factor",
        description: "multi-level reduction of the photon number at 44 Gamma",
        values: &[0.91],
        unit: "",
        tolerance: Tolerance::Absolute(0.02),
        citation: "published correction estimate, hyperfine structure",
    },
    ReferenceRow {
        key: "saturation_deficit",
        description: "saturation reduction of the photon number at 44 Gamma",
        values: &[7.0],
        unit: "%",
        tolerance: Tolerance::Absolute(2.0),
        citation: "published correction estimate, saturation",
    },
    ReferenceRow {
        key: "detuning_threshold_2p8",
        description: "largest detuning that still reflects, 2.8 um, 19 mW",
        values: &[6.5],
        unit: "GHz",
        tolerance: Tolerance::Relative(0.2),
        citation: "published detuning threshold, angle scan",
    },
    ReferenceRow {
        key: "detuning_threshold_0p67",
        description: "largest detuning that still reflects, 0.67 um, 19 mW",
        values: &[8.1],
        unit: "GHz",
        tolerance: Tolerance::Relative(0.2),
        citation: "published detuning threshold, detuning scan",
    },
    ReferenceRow {
        key: "decay_length_threshold",
        description: "smallest decay length that still reflects at 44 Gamma",
        values: &[116.0],
        unit: "nm",
        tolerance: Tolerance::Relative(0.15),
        citation: "published decay-length threshold",
    },
    ReferenceRow {
        key: "threshold_angle",
        description: "angle above critical at the decay-length threshold",
        values: &[0.59],
        unit: "rad",
        tolerance: Tolerance::Relative(0.1),
        citation: "published decay-length threshold",
    },
    ReferenceRow {
        key: "power_19mw",
        description: "measured recoils at 31 Gamma, 19 mW, for 2.8 and 0.67 um",
        values: &[25.0, 13.0],
        unit: "recoils",
        tolerance: Tolerance::Absolute(2.0),
        citation: "published power comparison",
    },
    ReferenceRow {
        key: "power_10p5mw",
        description: "measured recoils at 31 Gamma, 10.5 mW, for 2.8 and 0.67 um",
        values: &[23.0, 11.0],
        unit: "recoils",
        tolerance: Tolerance::Absolute(2.0),
        citation: "published power comparison",
    },
    ReferenceRow {
        key: "bounce_fraction",
        description: "fraction of the released cloud that bounces",
        values: &[0.13],
        unit: "",
        tolerance: Tolerance::Factor(3.0),
        citation: "published bounce fraction",
    },
    ReferenceRow {
        key: "tilt_offset",
        description: "apparent recoils from a 12 mrad prism tilt",
        values: &[1.5],
        unit: "recoils",
        tolerance: Tolerance::Absolute(0.1),
        citation: "published tilt offset (quoted 1.5 ± 0.6)",
    },
    ReferenceRow {
        key: "roughness_offset",
        description: "empirical small-decay-length excess attributed to surface roughness",
        values: &[3.0],
        unit: "recoils",
        tolerance: Tolerance::Absolute(2.0),
        citation: "published small-decay-length offset",
    },
];

pub fn lookup(key: &str) -> Option<&'static ReferenceRow> {
    REFERENCE_TABLE.iter().find(|r| r.key == key)
}

/// `lookup` for keys the crate itself relies on.
pub(crate) fn row(key: &str) -> &'static ReferenceRow {
    lookup(key).unwrap_or_else(|| panic!("reference row `{key}` missing"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_unique_and_cited() {
        for (i, a) in REFERENCE_TABLE.iter().enumerate() {
            assert!(!a.citation.is_empty() && !a.values.is_empty());
            assert!(REFERENCE_TABLE[i + 1..].iter().all(|b| b.key != a.key), "{}", a.key);
        }
        assert_eq!(row("fall_time").values, &[36.7]);
        assert!(lookup("nope").is_none());
    }

    #[test]
    fn tolerances() {
        assert!(Tolerance::Absolute(0.1).accepts(1.05, 1.0));
        assert!(!Tolerance::Absolute(0.1).accepts(1.2, 1.0));
        assert!(Tolerance::Relative(0.2).accepts(7.7, 6.5));
        assert!(!Tolerance::Relative(0.2).accepts(11.1, 6.5));
        assert!(Tolerance::Factor(3.0).accepts(0.05, 0.13));
        assert!(!Tolerance::Factor(3.0).accepts(0.04, 0.13));
    }
}
