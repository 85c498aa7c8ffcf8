//! Piecewise-linear horizontal trajectory around the bounce.

use serde::Serialize;

use crate::dynamics::Systematics;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrackPoint {
    pub t: f64,
    pub x: f64,
    pub err: f64,
}

/// Weighted line x = intercept + v_x·(t − t_b).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub v_x: f64,
    pub v_x_err: f64,
    pub intercept: f64,
    pub intercept_err: f64,
    /// χ² of the residuals.
    pub residual: f64,
    pub points: usize,
}

impl LineFit {
    pub fn reduced_chi2(&self) -> f64 {
        if self.points > 2 {
            self.residual / (self.points - 2) as f64
        } else {
            f64::NAN
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryFit {
    pub pre_bounce: LineFit,
    pub post_bounce: LineFit,
    pub delta_vx: f64,
    pub delta_vx_err: f64,
    pub recoils: f64,
    pub recoils_err: f64,
    pub bounce_time: f64,
    /// Post-bounce minus pre-bounce position extrapolated to the bounce time.
    pub intercept_mismatch: f64,
    /// Recoil velocity ħk_x/M used for the conversion.
    pub recoil_velocity: f64,
    pub corrected: bool,
}

fn weighted_line(points: &[&TrackPoint], t_b: f64) -> Result<LineFit> {
    let weight = |p: &TrackPoint| 1.0 / (p.err * p.err);
    let s: f64 = points.iter().map(|p| weight(p)).sum();
    let t_mean = points.iter().map(|p| weight(p) * (p.t - t_b)).sum::<f64>() / s;
    let x_mean = points.iter().map(|p| weight(p) * p.x).sum::<f64>() / s;
    let (mut stt, mut stx) = (0.0, 0.0);
    for p in points {
        let dt = p.t - t_b - t_mean;
        stt += weight(p) * dt * dt;
        stx += weight(p) * dt * (p.x - x_mean);
    }
    let spread = points.iter().map(|p| (p.t - t_b).abs()).fold(0.0, f64::max);
    if !(stt > 1e-20 * s * spread * spread) {
        return Err(Error::RankDeficient);
    }
    let v_x = stx / stt;
    let intercept = x_mean - v_x * t_mean;
    let residual = points
        .iter()
        .map(|p| ((p.x - intercept - v_x * (p.t - t_b)) / p.err).powi(2))
        .sum();
    Ok(LineFit {
        v_x,
        v_x_err: (1.0 / stt).sqrt(),
        intercept,
        intercept_err: (1.0 / s + t_mean * t_mean / stt).sqrt(),
        residual,
        points: points.len(),
    })
}

/// Fits independent lines to the points strictly before and strictly after
/// `bounce_time` and converts the velocity change to recoils.
pub fn fit_trajectory(points: &[TrackPoint], bounce_time: f64, recoil_velocity: f64) -> Result<TrajectoryFit> {
    let before: Vec<&TrackPoint> = points.iter().filter(|p| p.t < bounce_time).collect();
    let after: Vec<&TrackPoint> = points.iter().filter(|p| p.t > bounce_time).collect();
    if before.len() < 2 || after.len() < 2 {
        return Err(Error::InsufficientPoints {
            needed: 2,
            before: before.len(),
            after: after.len(),
        });
    }
    let pre = weighted_line(&before, bounce_time)?;
    let post = weighted_line(&after, bounce_time)?;
    let delta_vx = post.v_x - pre.v_x;
    let delta_vx_err = pre.v_x_err.hypot(post.v_x_err);
    Ok(TrajectoryFit {
        pre_bounce: pre,
        post_bounce: post,
        delta_vx,
        delta_vx_err,
        recoils: delta_vx / recoil_velocity,
        recoils_err: delta_vx_err / recoil_velocity,
        bounce_time,
        intercept_mismatch: post.intercept - pre.intercept,
        recoil_velocity,
        corrected: false,
    })
}

/// Cloud parameters needed to estimate how a finite mirror biases the mean
/// velocity of the reflected atoms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelectionModel {
    pub velocity_sigma: f64,
    pub mot_sigma: f64,
    pub bounce_time: f64,
}

impl SelectionModel {
    /// Mean horizontal velocity of atoms that arrive at the mirror center,
    /// minus the cloud mean, for a cloud centered at `offset` and moving at
    /// `launch`.
    pub fn velocity_bias(&self, offset: f64, launch: f64) -> f64 {
        let t = self.bounce_time;
        let sv2 = self.velocity_sigma.powi(2);
        let var_at_bounce = self.mot_sigma.powi(2) + sv2 * t * t;
        -(offset + launch * t) * sv2 * t / var_at_bounce
    }

    fn launch_sensitivity(&self) -> f64 {
        let t = self.bounce_time;
        let sv2 = self.velocity_sigma.powi(2);
        -t * t * sv2 / (self.mot_sigma.powi(2) + sv2 * t * t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct SystematicsUncertainty {
    pub prism_tilt: f64,
    pub launch_velocity: f64,
}

/// Removes the tilt contribution (and, with a selection model, the MOT
/// offset and launch-velocity bias) from the measured recoils and widens
/// the error by the uncertainty of each correction.
pub fn systematics_correction(
    fit: &TrajectoryFit,
    sys: &Systematics,
    uncertainty: &SystematicsUncertainty,
    v_incident: f64,
    selection: Option<&SelectionModel>,
) -> Result<TrajectoryFit> {
    if fit.corrected {
        return Err(Error::AlreadyCorrected);
    }
    let v_rec = fit.recoil_velocity;
    let v_i = v_incident.abs();
    let tilt = sys.tilt_velocity(v_i) / v_rec;
    let tilt_err = 2.0 * v_i * (2.0 * sys.prism_tilt).cos() * uncertainty.prism_tilt / v_rec;
    let (bias, bias_err) = match selection {
        Some(sel) => (
            sel.velocity_bias(sys.mot_horizontal_offset, sys.launch_velocity) / v_rec,
            (sel.launch_sensitivity() * uncertainty.launch_velocity / v_rec).abs(),
        ),
        None => (0.0, 0.0),
    };
    let mut out = *fit;
    out.recoils = fit.recoils - tilt - bias;
    out.delta_vx = out.recoils * v_rec;
    out.recoils_err = (fit.recoils_err.powi(2) + tilt_err.powi(2) + bias_err.powi(2)).sqrt();
    out.delta_vx_err = out.recoils_err * v_rec;
    out.corrected = true;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn track(v_pre: f64, v_post: f64, t_b: f64) -> Vec<TrackPoint> {
        [0.005, 0.015, 0.025, 0.05, 0.06, 0.07]
            .iter()
            .map(|&t| TrackPoint {
                t,
                x: if t < t_b {
                    1e-4 + v_pre * (t - t_b)
                } else {
                    1e-4 + v_post * (t - t_b)
                },
                err: 51e-6,
            })
            .collect()
    }

    #[test]
    fn exact_slopes_recovered() {
        let t_b = 0.0367;
        let fit = fit_trajectory(&track(-2e-3, 0.07, t_b), t_b, 5.9e-3).unwrap();
        assert!((fit.pre_bounce.v_x / -2e-3 - 1.0).abs() < 1e-12);
        assert!((fit.post_bounce.v_x / 0.07 - 1.0).abs() < 1e-12);
        assert!((fit.delta_vx - fit.post_bounce.v_x + fit.pre_bounce.v_x).abs() < 1e-16);
        assert!((fit.recoils - 0.072 / 5.9e-3).abs() < 1e-9);
        assert!(fit.intercept_mismatch.abs() < 1e-15);
        assert!(fit.pre_bounce.residual < 1e-12);
    }

    #[test]
    fn too_few_points() {
        let pts = track(0.0, 0.01, 0.0367);
        let r = fit_trajectory(&pts[1..5], 0.0367, 5.9e-3);
        assert!(r.is_ok());
        let r = fit_trajectory(&pts[2..], 0.0367, 5.9e-3);
        assert!(matches!(r, Err(Error::InsufficientPoints { before: 1, after: 3, .. })));
        let same = vec![
            TrackPoint { t: 0.01, x: 0.0, err: 1.0 },
            TrackPoint { t: 0.01, x: 1.0, err: 1.0 },
            TrackPoint { t: 0.05, x: 0.0, err: 1.0 },
            TrackPoint { t: 0.06, x: 1.0, err: 1.0 },
        ];
        assert!(matches!(fit_trajectory(&same, 0.0367, 1.0), Err(Error::RankDeficient)));
    }

    #[test]
    fn tilt_correction() {
        let v_rec = 5.9e-3;
        let fit = fit_trajectory(&track(0.0, 1.5 * v_rec, 0.0367), 0.0367, v_rec).unwrap();
        let sys = Systematics {
            prism_tilt: 12e-3,
            ..Default::default()
        };
        let unc = SystematicsUncertainty {
            prism_tilt: 5e-3,
            launch_velocity: 0.0,
        };
        let v_i = 0.3598;
        let c = systematics_correction(&fit, &sys, &unc, v_i, None).unwrap();
        let tilt = fit.recoils - c.recoils;
        assert!((tilt - 1.46).abs() < 0.02, "{tilt}");
        let added = (c.recoils_err.powi(2) - fit.recoils_err.powi(2)).sqrt();
        assert!((added - 0.61).abs() < 0.02, "{added}");
        assert!(matches!(
            systematics_correction(&c, &sys, &unc, v_i, None),
            Err(Error::AlreadyCorrected)
        ));
        let none = systematics_correction(&fit, &Systematics::default(), &Default::default(), v_i, None)
            .unwrap();
        assert_eq!(none.recoils, fit.recoils);
        assert_eq!(none.recoils_err, fit.recoils_err);
    }

    #[test]
    fn selection_bias_sign() {
        let sel = SelectionModel {
            velocity_sigma: 0.031,
            mot_sigma: 0.3e-3,
            bounce_time: 0.0367,
        };
        assert!(sel.velocity_bias(1e-3, 0.0) < 0.0);
        assert_eq!(sel.velocity_bias(0.0, 0.0), 0.0);
        // A launch velocity moves the cloud like an offset of v·t.
        let a = sel.velocity_bias(0.0, 1e-3);
        let b = sel.velocity_bias(1e-3 * 0.0367, 0.0);
        assert!((a - b).abs() < 1e-15);
    }
}
