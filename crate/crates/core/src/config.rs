//! JSON experiment description with unit-tagged scalars.
//!
//! Every dimensional value is written as `{"value": 44, "unit": "Gamma"}` and
//! converted to SI once, in [`ExperimentConfig::resolve`].

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::budget::{corrected_prediction, Corrections, HyperfineModel, ScatterBudget};
use crate::diagnostics::{CcdSpec, PipelineSetup, SystematicsUncertainty};
use crate::dynamics::{
    incident_momentum, BounceOptions, CloudSetup, Membership, RecoilMode, Systematics,
};
use crate::error::{Error, Result};
use crate::mirror::{MirrorPotential, PotentialOptions, DEFAULT_Z_MIN};
use crate::optics::{
    critical_angle, telescope_angle, AtomSpecies, DetuningUnit, EwField, EwGeometry, Polarization,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Length,
    Power,
    Time,
    Temperature,
    Velocity,
}

impl Dimension {
    fn factor(self, unit: &str) -> Option<f64> {
        use Dimension::*;
        Some(match (self, unit) {
            (Length, "m") => 1.0,
            (Length, "mm") => 1e-3,
            (Length, "um" | "µm" | "μm") => 1e-6,
            (Length, "nm") => 1e-9,
            (Power, "W") => 1.0,
            (Power, "mW") => 1e-3,
            (Time, "s") => 1.0,
            (Time, "ms") => 1e-3,
            (Time, "us" | "µs" | "μs") => 1e-6,
            (Temperature, "K") => 1.0,
            (Temperature, "mK") => 1e-3,
            (Temperature, "uK" | "µK" | "μK") => 1e-6,
            (Velocity, "m/s") => 1.0,
            (Velocity, "mm/s") => 1e-3,
            _ => return None,
        })
    }
}

/// A number with its unit spelled out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Quantity {
    pub value: f64,
    pub unit: String,
}

impl Quantity {
    pub fn new(value: f64, unit: &str) -> Self {
        Self {
            value,
            unit: unit.to_owned(),
        }
    }

    fn finite(&self) -> Result<f64> {
        if self.value.is_finite() {
            Ok(self.value)
        } else {
            Err(Error::Config(format!("non-finite value {} {}", self.value, self.unit)))
        }
    }

    pub fn si(&self, dim: Dimension) -> Result<f64> {
        let factor = dim
            .factor(&self.unit)
            .ok_or_else(|| Error::Config(format!("unit `{}` is not a {dim:?} unit", self.unit)))?;
        Ok(self.finite()? * factor)
    }

    /// Absolute angle of incidence in rad. `*_above_critical` units are
    /// measured from the critical angle of `refractive_index`.
    pub fn angle(&self, refractive_index: f64) -> Result<f64> {
        let v = self.finite()?;
        let deg = std::f64::consts::PI / 180.0;
        Ok(match self.unit.as_str() {
            "rad" => v,
            "mrad" => v * 1e-3,
            "deg" => v * deg,
            "rad_above_critical" => critical_angle(refractive_index)? + v,
            "mrad_above_critical" => critical_angle(refractive_index)? + v * 1e-3,
            other => return Err(Error::Config(format!("unit `{other}` is not an angle unit"))),
        })
    }

    pub fn detuning(&self, species: &AtomSpecies) -> Result<f64> {
        let unit: DetuningUnit = self.unit.parse()?;
        Ok(unit.to_angular(self.finite()?, species))
    }
}

/// Several values sharing one unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantityList {
    pub values: Vec<f64>,
    pub unit: String,
}

impl QuantityList {
    pub fn si(&self, dim: Dimension) -> Result<Vec<f64>> {
        self.values
            .iter()
            .map(|&v| Quantity::new(v, &self.unit).si(dim))
            .collect()
    }
}

/// Beam steering by displacing the first lens of a relay telescope; zero
/// offset sits at the critical angle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TelescopeConfig {
    pub offset: Quantity,
    pub focal_length: Quantity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub refractive_index: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub telescope: Option<TelescopeConfig>,
    pub waist: Quantity,
    pub power: Quantity,
    pub polarization: Polarization,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enhancement_override: Option<f64>,
}

impl GeometryConfig {
    pub fn resolve(&self) -> Result<EwGeometry> {
        let n = self.refractive_index;
        let angle = match (&self.angle, &self.telescope) {
            (Some(a), None) => a.angle(n)?,
            (None, Some(t)) => {
                critical_angle(n)?
                    + telescope_angle(
                        t.offset.si(Dimension::Length)?,
                        t.focal_length.si(Dimension::Length)?,
                        n,
                    )?
            }
            _ => {
                return Err(Error::Config(
                    "geometry needs exactly one of `angle` and `telescope`".into(),
                ))
            }
        };
        let mut geom = EwGeometry::new(
            n,
            angle,
            self.waist.si(Dimension::Length)?,
            self.power.si(Dimension::Power)?,
            self.polarization,
        )?;
        geom.enhancement_override = self.enhancement_override;
        Ok(geom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystematicsConfig {
    pub prism_tilt: Quantity,
    pub prism_tilt_uncertainty: Quantity,
    pub mot_horizontal_offset: Quantity,
    pub launch_velocity: Quantity,
    pub launch_velocity_uncertainty: Quantity,
    /// Remove the mean-velocity bias of a displaced or launched cloud.
    pub correct_selection: bool,
}

impl Default for SystematicsConfig {
    fn default() -> Self {
        Self {
            prism_tilt: Quantity::new(0.0, "mrad"),
            prism_tilt_uncertainty: Quantity::new(0.0, "mrad"),
            mot_horizontal_offset: Quantity::new(0.0, "mm"),
            launch_velocity: Quantity::new(0.0, "mm/s"),
            launch_velocity_uncertainty: Quantity::new(0.0, "mm/s"),
            correct_selection: false,
        }
    }
}

impl SystematicsConfig {
    fn tilt(&self, q: &Quantity) -> Result<f64> {
        // Tilts are small rotations, never measured from the critical angle.
        if q.unit.ends_with("_above_critical") {
            return Err(Error::Config("prism tilt must be given in rad, mrad or deg".into()));
        }
        q.angle(2.0)
    }

    pub fn resolve(&self, roughness_offset: f64) -> Result<(Systematics, SystematicsUncertainty)> {
        Ok((
            Systematics {
                prism_tilt: self.tilt(&self.prism_tilt)?,
                mot_horizontal_offset: self.mot_horizontal_offset.si(Dimension::Length)?,
                launch_velocity: self.launch_velocity.si(Dimension::Velocity)?,
                roughness_offset_recoils: roughness_offset,
            },
            SystematicsUncertainty {
                prism_tilt: self.tilt(&self.prism_tilt_uncertainty)?,
                launch_velocity: self.launch_velocity_uncertainty.si(Dimension::Velocity)?,
            },
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CcdConfig {
    pub cols: usize,
    pub rows: usize,
    pub pixel_pitch: Quantity,
    pub exposure: Quantity,
    pub origin_col: f64,
    pub origin_row: f64,
    /// PSF rms width in pixels.
    pub psf_sigma: f64,
}

impl Default for CcdConfig {
    fn default() -> Self {
        Self {
            cols: 200,
            rows: 200,
            pixel_pitch: Quantity::new(51.0, "um"),
            exposure: Quantity::new(0.5, "ms"),
            origin_col: 100.0,
            origin_row: 200.0,
            psf_sigma: 1.0,
        }
    }
}

impl CcdConfig {
    pub fn resolve(&self) -> Result<CcdSpec> {
        let spec = CcdSpec {
            cols: self.cols,
            rows: self.rows,
            pixel_pitch: self.pixel_pitch.si(Dimension::Length)?,
            exposure: self.exposure.si(Dimension::Time)?,
            origin_col: self.origin_col,
            origin_row: self.origin_row,
            psf_sigma: self.psf_sigma,
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImagingConfig {
    /// Detected counts per atom per frame.
    pub photon_yield: f64,
    pub noise: bool,
    pub shots_per_frame: u32,
    pub snapshot_times: QuantityList,
    /// Split point of the trajectory fit; the free-fall time when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounce_time: Option<Quantity>,
    pub exclusion_sigmas: f64,
    pub clip_threshold: f64,
}

impl Default for ImagingConfig {
    fn default() -> Self {
        Self {
            photon_yield: 200.0,
            noise: true,
            shots_per_frame: 10,
            snapshot_times: QuantityList {
                values: (0..10).map(|k| 5.0 + 10.0 * k as f64).collect(),
                unit: "ms".into(),
            },
            bounce_time: None,
            exclusion_sigmas: 3.0,
            clip_threshold: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub gravity: bool,
    /// Explicit C₃ in J·m³; the dielectric value when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c3_joule_m3: Option<f64>,
    pub c3_scale: f64,
    pub z_min: Quantity,
}

impl Default for PotentialConfig {
    fn default() -> Self {
        Self {
            gravity: true,
            c3_joule_m3: None,
            c3_scale: 1.0,
            z_min: Quantity::new(DEFAULT_Z_MIN * 1e9, "nm"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsConfig {
    /// Photon scattering along trajectories (off leaves a pure reflection).
    pub scattering: bool,
    pub recoil_mode: RecoilMode,
    pub membership: Membership,
    pub dt_max: Quantity,
    pub max_bounces: u32,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        Self {
            scattering: true,
            recoil_mode: RecoilMode::Stochastic,
            membership: Membership::SoftEdge,
            dt_max: Quantity::new(1.0, "us"),
            max_bounces: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HyperfinePreset {
    /// ⁸⁷Rb F=2 → F'=1,2,3 with all ground sublevels equally populated.
    Rb87D2F2,
    SingleLine,
}

impl HyperfinePreset {
    pub fn model(self) -> HyperfineModel {
        match self {
            HyperfinePreset::Rb87D2F2 => HyperfineModel::rb87_d2_f2(),
            HyperfinePreset::SingleLine => HyperfineModel::single_line(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub species: String,
    pub geometry: GeometryConfig,
    pub detuning: Quantity,
    pub fall_height: Quantity,
    pub temperature: Quantity,
    pub mot_sigma: Quantity,
    /// Atoms imaged per frame, summed over shots.
    pub atom_count: usize,
    #[serde(default)]
    pub systematics: SystematicsConfig,
    #[serde(default)]
    pub ccd: CcdConfig,
    #[serde(default)]
    pub imaging: ImagingConfig,
    #[serde(default)]
    pub corrections: Corrections,
    #[serde(default)]
    pub potential: PotentialConfig,
    #[serde(default)]
    pub dynamics: DynamicsConfig,
    #[serde(default = "default_hyperfine")]
    pub hyperfine: HyperfinePreset,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
}

fn default_hyperfine() -> HyperfinePreset {
    HyperfinePreset::Rb87D2F2
}

impl Default for ExperimentConfig {
    /// ⁸⁷Rb dropped 6.6 mm onto a glass prism, 19 mW TM beam of 335 µm
    /// waist at 15.2 mrad above the critical angle, detuned by 44 Γ.
    fn default() -> Self {
        Self {
            species: "Rb87_D2".into(),
            geometry: GeometryConfig {
                refractive_index: 1.51,
                angle: Some(Quantity::new(15.2, "mrad_above_critical")),
                telescope: None,
                waist: Quantity::new(335.0, "um"),
                power: Quantity::new(19.0, "mW"),
                polarization: Polarization::TM,
                enhancement_override: None,
            },
            detuning: Quantity::new(44.0, "Gamma"),
            fall_height: Quantity::new(6.6, "mm"),
            temperature: Quantity::new(10.0, "uK"),
            mot_sigma: Quantity::new(0.3, "mm"),
            atom_count: 100_000,
            systematics: SystematicsConfig::default(),
            ccd: CcdConfig::default(),
            imaging: ImagingConfig::default(),
            corrections: Corrections::default(),
            potential: PotentialConfig::default(),
            dynamics: DynamicsConfig::default(),
            hyperfine: HyperfinePreset::Rb87D2F2,
            seed: 1,
            output_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config is always serializable")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn resolve(&self) -> Result<Experiment> {
        let species = AtomSpecies::preset(&self.species)?;
        let geometry = self.geometry.resolve()?;
        let detuning = self.detuning.detuning(&species)?;
        let fall_height = self.fall_height.si(Dimension::Length)?;
        Experiment::build(self.clone(), species, geometry, detuning, fall_height)
    }
}

/// A resolved configuration: SI parameters plus the field and potential
/// they imply.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub species: AtomSpecies,
    pub geometry: EwGeometry,
    pub detuning: f64,
    pub fall_height: f64,
    pub field: EwField,
    pub potential_options: PotentialOptions,
    pub potential: MirrorPotential,
    pub p_incident: f64,
    pub hyperfine: HyperfineModel,
}

impl Experiment {
    fn build(
        config: ExperimentConfig,
        species: AtomSpecies,
        geometry: EwGeometry,
        detuning: f64,
        fall_height: f64,
    ) -> Result<Self> {
        let potential_options = PotentialOptions {
            include_gravity: config.potential.gravity,
            include_vdw: config.corrections.vdw,
            c3: config.potential.c3_joule_m3,
            c3_scale: config.potential.c3_scale,
            z_min: config.potential.z_min.si(Dimension::Length)?,
        };
        let field = EwField::new(&geometry, &species, detuning)?;
        let potential = MirrorPotential::from_field(
            &field,
            &species,
            geometry.refractive_index,
            &potential_options,
        )?;
        let p_incident = incident_momentum(&species, fall_height).momentum;
        let hyperfine = config.hyperfine.model();
        Ok(Self {
            config,
            species,
            geometry,
            detuning,
            fall_height,
            field,
            potential_options,
            potential,
            p_incident,
            hyperfine,
        })
    }

    pub fn with_detuning(&self, detuning: f64) -> Result<Self> {
        Self::build(
            self.config.clone(),
            self.species.clone(),
            self.geometry.clone(),
            detuning,
            self.fall_height,
        )
    }

    pub fn with_angle(&self, angle: f64) -> Result<Self> {
        Self::build(
            self.config.clone(),
            self.species.clone(),
            self.geometry.with_angle(angle)?,
            self.detuning,
            self.fall_height,
        )
    }

    pub fn with_power(&self, power: f64) -> Result<Self> {
        Self::build(
            self.config.clone(),
            self.species.clone(),
            self.geometry.with_power(power)?,
            self.detuning,
            self.fall_height,
        )
    }

    pub fn corrections(&self) -> &Corrections {
        &self.config.corrections
    }

    pub fn budget(&self) -> Result<ScatterBudget> {
        corrected_prediction(
            &self.species,
            &self.field,
            &self.potential,
            self.p_incident,
            &self.hyperfine,
            &self.config.corrections,
        )
    }

    /// Cloud setup whose trajectory scattering rate carries the saturation
    /// and hyperfine factors of `budget`.
    pub fn cloud_setup(&self, budget: &ScatterBudget) -> Result<CloudSetup> {
        let c = &self.config;
        let (systematics, _) = c.systematics.resolve(c.corrections.roughness_offset)?;
        Ok(CloudSetup {
            species: self.species.clone(),
            geometry: self.geometry.clone(),
            detuning: self.detuning,
            potential: self.potential_options.clone(),
            temperature: c.temperature.si(Dimension::Temperature)?,
            release_height: self.fall_height,
            mot_sigma: c.mot_sigma.si(Dimension::Length)?,
            systematics,
            atom_count: c.atom_count,
            recoil_mode: c.dynamics.recoil_mode,
            membership: c.dynamics.membership,
            scattering: c.dynamics.scattering,
            rate_scale: budget.saturation_factor * budget.hyperfine_factor,
            bounce: BounceOptions {
                dt_max: c.dynamics.dt_max.si(Dimension::Time)?,
                ..BounceOptions::default()
            },
            max_bounces: c.dynamics.max_bounces,
        })
    }

    pub fn pipeline_setup(&self, budget: &ScatterBudget) -> Result<PipelineSetup> {
        let c = &self.config;
        let (_, uncertainty) = c.systematics.resolve(c.corrections.roughness_offset)?;
        Ok(PipelineSetup {
            cloud: self.cloud_setup(budget)?,
            ccd: c.ccd.resolve()?,
            photon_yield: c.imaging.photon_yield,
            noise: c.imaging.noise,
            shots_per_frame: c.imaging.shots_per_frame,
            snapshot_times: c.imaging.snapshot_times.si(Dimension::Time)?,
            bounce_time: c
                .imaging
                .bounce_time
                .as_ref()
                .map(|q| q.si(Dimension::Time))
                .transpose()?,
            exclusion_sigmas: c.imaging.exclusion_sigmas,
            clip_threshold: c.imaging.clip_threshold,
            uncertainty,
            correct_selection: c.systematics.correct_selection,
        })
    }
}
