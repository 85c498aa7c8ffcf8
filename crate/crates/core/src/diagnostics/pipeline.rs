//! Simulated experiment: drop, image, locate, fit, correct.

use serde::Serialize;

use super::ccd::{render_frame, CcdSpec, Emitter, Frame, FrameStack, Image};
use super::centroid::{centroid, Centroid, Region};
use super::fit::{
    fit_trajectory, systematics_correction, SelectionModel, SystematicsUncertainty, TrackPoint,
    TrajectoryFit,
};
use crate::constants::GRAVITY;
use crate::dynamics::rng::{ensemble_id, stream, Channel};
use crate::dynamics::{fall_time, simulate_cloud, CloudModel, CloudSetup};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineSetup {
    /// `atom_count` is the number of atoms imaged per frame, summed over shots.
    pub cloud: CloudSetup,
    pub ccd: CcdSpec,
    pub photon_yield: f64,
    pub noise: bool,
    pub shots_per_frame: u32,
    pub snapshot_times: Vec<f64>,
    /// Bounce time used to split the fit; the free-fall time when absent.
    pub bounce_time: Option<f64>,
    /// Frames closer to the bounce than this many arrival-time spreads are
    /// not fitted.
    pub exclusion_sigmas: f64,
    /// Border signal fraction above which a frame counts as clipped.
    pub clip_threshold: f64,
    pub uncertainty: SystematicsUncertainty,
    /// Also remove the velocity bias of a displaced or launched cloud.
    pub correct_selection: bool,
}

impl PipelineSetup {
    pub fn default_times() -> Vec<f64> {
        (0..10).map(|k| 5e-3 + 10e-3 * k as f64).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameUse {
    Fitted,
    NearBounce,
    Clipped,
    NoSignal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameReport {
    pub t: f64,
    pub centroid: Option<Centroid>,
    pub status: FrameUse,
    pub atoms_in_view: usize,
    pub bounced_atoms: usize,
    pub saturated_pixels: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineResult {
    #[serde(skip)]
    pub frames: FrameStack,
    pub reports: Vec<FrameReport>,
    pub fit: Option<TrajectoryFit>,
    pub corrected: Option<TrajectoryFit>,
    pub fit_error: Option<String>,
    pub no_signal: bool,
    /// Mean photons per bounce over the reflected atoms in the imaged ensembles.
    pub ensemble_photons: Option<f64>,
    pub bounce_fraction: f64,
    pub bounce_time: f64,
    pub arrival_spread: f64,
    pub v_incident: f64,
    pub recoil_velocity: f64,
}

impl PipelineResult {
    /// Corrected recoils when available, else the raw fit.
    pub fn recoils(&self) -> Option<(f64, f64)> {
        self.corrected
            .or(self.fit)
            .map(|f| (f.recoils, f.recoils_err))
    }
}

pub fn run_pipeline(setup: &PipelineSetup, seed: u64) -> Result<PipelineResult> {
    setup.ccd.validate()?;
    if setup.shots_per_frame == 0 {
        return Err(Error::Config("shots_per_frame must be at least 1".into()));
    }
    let mut times = setup.snapshot_times.clone();
    times.sort_by(f64::total_cmp);
    if times.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Config("snapshot times must be distinct".into()));
    }
    let shots = setup.shots_per_frame as usize;
    let mut cloud = setup.cloud.clone();
    cloud.atom_count = setup.cloud.atom_count.div_ceil(shots);
    let model = CloudModel::new(cloud)?;
    let species = &model.setup.species;
    let gravity = if model.setup.potential.include_gravity { GRAVITY } else { 0.0 };
    let height = model.setup.release_height;
    let bounce_time = setup.bounce_time.unwrap_or_else(|| fall_time(height));
    let v_incident = (2.0 * GRAVITY * height).sqrt();
    let arrival_spread = ((model.setup.mot_sigma / v_incident).powi(2)
        + (model.velocity_sigma() / GRAVITY).powi(2))
    .sqrt();
    let v_rec = model.field.recoil_velocity_x(species);

    let mut frames = FrameStack::default();
    let mut reports = Vec::with_capacity(times.len());
    let (mut photons, mut bounces) = (0.0, 0usize);
    let (mut reached, mut reflected) = (0usize, 0usize);
    for (k, &t) in times.iter().enumerate() {
        let mut expected = Image::zeros(setup.ccd.cols, setup.ccd.rows);
        let (mut in_view, mut bounced_atoms) = (0, 0);
        for shot in 0..shots {
            let run = simulate_cloud(&model, seed, ensemble_id(k as u32, shot as u32), &[t])?;
            reached += run.reached_mirror;
            reflected += run.bounced;
            let atoms = &run.snapshots[0].atoms;
            let emitters: Vec<Emitter> = atoms
                .iter()
                .filter(|a| a.visible())
                .map(|a| Emitter {
                    x: a.state.x,
                    z: a.state.z,
                    v_x: a.state.v_x,
                    v_z: a.state.v_z,
                })
                .collect();
            in_view += emitters
                .iter()
                .filter(|e| setup.ccd.pixel_of(e.x, e.z).is_some())
                .count();
            for a in atoms.iter().filter(|a| a.bounced() && a.visible()) {
                bounced_atoms += 1;
                photons += a.state.scattered;
                bounces += a.bounces as usize;
            }
            expected.add(&render_frame(&emitters, &setup.ccd, setup.photon_yield, gravity));
        }
        let (counts, saturated) = if setup.noise {
            let mut rng = stream(seed, ensemble_id(k as u32, u32::MAX), 0, Channel::Image);
            expected.digitize(Some(&mut rng))
        } else {
            expected.digitize::<rand_chacha::ChaCha8Rng>(None)
        };
        let frame = Frame {
            trigger_time: t,
            cols: setup.ccd.cols,
            rows: setup.ccd.rows,
            counts,
            saturated_pixels: saturated,
        };
        let image = frame.as_f64();
        let located = centroid(&image, Region::full(&image), &setup.ccd);
        let status = match &located {
            Err(_) => FrameUse::NoSignal,
            Ok(c) if c.border_fraction > setup.clip_threshold => FrameUse::Clipped,
            Ok(_) if (t - bounce_time).abs() < setup.exclusion_sigmas * arrival_spread => {
                FrameUse::NearBounce
            }
            Ok(_) => FrameUse::Fitted,
        };
        reports.push(FrameReport {
            t,
            centroid: located.ok(),
            status,
            atoms_in_view: in_view,
            bounced_atoms,
            saturated_pixels: saturated,
        });
        frames.push(frame)?;
    }

    let points: Vec<TrackPoint> = reports
        .iter()
        .filter(|r| r.status == FrameUse::Fitted)
        .filter_map(|r| {
            r.centroid.map(|c| TrackPoint {
                t: r.t,
                x: c.x,
                err: c.err,
            })
        })
        .collect();
    let (fit, fit_error) = match fit_trajectory(&points, bounce_time, v_rec) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let selection = SelectionModel {
        velocity_sigma: model.velocity_sigma(),
        mot_sigma: model.setup.mot_sigma,
        bounce_time,
    };
    let corrected = match &fit {
        Some(f) => Some(systematics_correction(
            f,
            &model.setup.systematics,
            &setup.uncertainty,
            v_incident,
            setup.correct_selection.then_some(&selection),
        )?),
        None => None,
    };
    Ok(PipelineResult {
        frames,
        reports,
        fit,
        corrected,
        fit_error,
        no_signal: reflected == 0,
        ensemble_photons: (bounces > 0).then(|| photons / bounces as f64),
        bounce_fraction: if reached > 0 {
            reflected as f64 / reached as f64
        } else {
            0.0
        },
        bounce_time,
        arrival_spread,
        v_incident,
        recoil_velocity: v_rec,
    })
}
