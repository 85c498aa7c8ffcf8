//! Binned CCD geometry, synthetic fluorescence rendering and PGM output.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CcdSpec {
    pub cols: usize,
    pub rows: usize,
    pub pixel_pitch: f64,
    pub exposure: f64,
    /// Pixel coordinate (in pixel units, column) of x = 0.
    pub origin_col: f64,
    /// Pixel coordinate (row, counted from the top) of the surface z = 0.
    pub origin_row: f64,
    /// PSF rms width in pixels.
    pub psf_sigma: f64,
}

impl Default for CcdSpec {
    fn default() -> Self {
        Self {
            cols: 200,
            rows: 200,
            pixel_pitch: 51e-6,
            exposure: 0.5e-3,
            origin_col: 100.0,
            origin_row: 200.0,
            psf_sigma: 1.0,
        }
    }
}

impl CcdSpec {
    pub fn validate(&self) -> Result<()> {
        require_positive("pixel_pitch", self.pixel_pitch)?;
        require_positive("psf_sigma", self.psf_sigma)?;
        if self.exposure < 0.0 {
            return Err(crate::Error::InvalidParameter {
                name: "exposure",
                requirement: "non-negative",
                value: self.exposure,
            });
        }
        if self.cols == 0 || self.rows == 0 {
            return Err(crate::Error::Config("CCD needs at least one pixel".into()));
        }
        Ok(())
    }

    /// (width, height) of the imaged area.
    pub fn field_of_view(&self) -> (f64, f64) {
        (
            self.cols as f64 * self.pixel_pitch,
            self.rows as f64 * self.pixel_pitch,
        )
    }

    /// Continuous pixel coordinates (column, row) of a physical point.
    pub fn to_pixel(&self, x: f64, z: f64) -> (f64, f64) {
        (
            x / self.pixel_pitch + self.origin_col,
            self.origin_row - z / self.pixel_pitch,
        )
    }

    pub fn to_physical(&self, col: f64, row: f64) -> (f64, f64) {
        (
            (col - self.origin_col) * self.pixel_pitch,
            (self.origin_row - row) * self.pixel_pitch,
        )
    }

    /// Pixel containing a physical point, if inside the frame.
    pub fn pixel_of(&self, x: f64, z: f64) -> Option<(usize, usize)> {
        let (u, v) = self.to_pixel(x, z);
        let (c, r) = (u.floor(), v.floor());
        (c >= 0.0 && r >= 0.0 && (c as usize) < self.cols && (r as usize) < self.rows)
            .then_some((c as usize, r as usize))
    }

    /// Physical position of the center of pixel (col, row).
    pub fn pixel_center(&self, col: usize, row: usize) -> (f64, f64) {
        self.to_physical(col as f64 + 0.5, row as f64 + 0.5)
    }
}

/// Expected counts before noise and digitization, row-major from the top.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub cols: usize,
    pub rows: usize,
    pub data: Vec<f64>,
}

impl Image {
    pub fn zeros(cols: usize, rows: usize) -> Self {
        Self {
            cols,
            rows,
            data: vec![0.0; cols * rows],
        }
    }

    pub fn total(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn at(&self, col: usize, row: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn add(&mut self, other: &Image) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    /// Digitizes to 16 bits, optionally with Poisson shot noise. Returns the
    /// frame and the number of saturated pixels.
    pub fn digitize<R: Rng + ?Sized>(&self, noise: Option<&mut R>) -> (Vec<u16>, usize) {
        let mut saturated = 0;
        let mut convert = |v: f64| {
            if v >= u16::MAX as f64 {
                saturated += 1;
                u16::MAX
            } else {
                v.max(0.0).round() as u16
            }
        };
        let counts = match noise {
            None => self.data.iter().map(|&v| convert(v)).collect(),
            Some(rng) => self
                .data
                .iter()
                .map(|&v| {
                    let n = if v > 0.0 {
                        Poisson::new(v).expect("positive mean").sample(rng)
                    } else {
                        0.0
                    };
                    convert(n)
                })
                .collect(),
        };
        (counts, saturated)
    }
}

/// Pixel-integrated 1-D Gaussian weights around `center` over ±`half`
/// pixels, normalized to one. Returns the first pixel index and weights.
fn psf_weights(center: f64, sigma: f64, half: i64, out: &mut Vec<f64>) -> i64 {
    let first = center.floor() as i64 - half;
    out.clear();
    let scale = 1.0 / (sigma * std::f64::consts::SQRT_2);
    let mut prev = libm::erf((first as f64 - center) * scale);
    for k in 0..=(2 * half) {
        let next = libm::erf(((first + k + 1) as f64 - center) * scale);
        out.push(0.5 * (next - prev));
        prev = next;
    }
    let sum: f64 = out.iter().sum();
    for w in out.iter_mut() {
        *w /= sum;
    }
    first
}

/// Position and velocity of one atom at the start of the exposure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Emitter {
    pub x: f64,
    pub z: f64,
    pub v_x: f64,
    pub v_z: f64,
}

/// Deposits each emitter's `photon_yield` counts, spread by the PSF and
/// smeared over the ballistic path during the exposure.
pub fn render_frame(emitters: &[Emitter], ccd: &CcdSpec, photon_yield: f64, gravity: f64) -> Image {
    let mut image = Image::zeros(ccd.cols, ccd.rows);
    let half = (4.0 * ccd.psf_sigma).ceil() as i64;
    let (mut wx, mut wz) = (Vec::new(), Vec::new());
    let t_exp = ccd.exposure;
    for e in emitters {
        let path = (e.v_x.hypot(e.v_z) * t_exp + 0.5 * gravity * t_exp * t_exp) / ccd.pixel_pitch;
        let subs = ((path / 0.25).ceil() as usize).max(1);
        let share = photon_yield / subs as f64;
        for k in 0..subs {
            let tau = if subs == 1 {
                0.5 * t_exp
            } else {
                t_exp * (k as f64 + 0.5) / subs as f64
            };
            let x = e.x + e.v_x * tau;
            let z = e.z + e.v_z * tau - 0.5 * gravity * tau * tau;
            let (u, v) = ccd.to_pixel(x, z);
            if !(u > -(half as f64) && v > -(half as f64))
                || u > (ccd.cols as i64 + half) as f64
                || v > (ccd.rows as i64 + half) as f64
            {
                continue;
            }
            let c0 = psf_weights(u, ccd.psf_sigma, half, &mut wx);
            let r0 = psf_weights(v, ccd.psf_sigma, half, &mut wz);
            for (j, wr) in wz.iter().enumerate() {
                let row = r0 + j as i64;
                if row < 0 || row >= ccd.rows as i64 {
                    continue;
                }
                let base = row as usize * ccd.cols;
                for (i, wc) in wx.iter().enumerate() {
                    let col = c0 + i as i64;
                    if col < 0 || col >= ccd.cols as i64 {
                        continue;
                    }
                    image.data[base + col as usize] += share * wr * wc;
                }
            }
        }
    }
    image
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub trigger_time: f64,
    pub cols: usize,
    pub rows: usize,
    pub counts: Vec<u16>,
    pub saturated_pixels: usize,
}

impl Frame {
    pub fn as_f64(&self) -> Image {
        Image {
            cols: self.cols,
            rows: self.rows,
            data: self.counts.iter().map(|&c| c as f64).collect(),
        }
    }

    /// `frame_<ms>p<tenths>.pgm`
    pub fn file_name(&self) -> String {
        frame_file_name(self.trigger_time)
    }
}

pub fn frame_file_name(trigger_time: f64) -> String {
    let tenths = (trigger_time * 1e4).round() as i64;
    format!("frame_{}p{}.pgm", tenths / 10, tenths % 10)
}

/// Frames ordered by trigger time.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrameStack {
    pub frames: Vec<Frame>,
}

impl FrameStack {
    pub fn push(&mut self, frame: Frame) -> Result<()> {
        if let Some(last) = self.frames.last() {
            if frame.trigger_time <= last.trigger_time {
                return Err(crate::Error::Config(format!(
                    "trigger times must increase: {} after {}",
                    frame.trigger_time, last.trigger_time
                )));
            }
        }
        self.frames.push(frame);
        Ok(())
    }
}

/// Binary 16-bit PGM (P5, maxval 65535, big-endian samples).
pub fn encode_pgm(frame: &Frame) -> Vec<u8> {
    let header = format!("P5\n{} {}\n65535\n", frame.cols, frame.rows);
    let mut out = Vec::with_capacity(header.len() + 2 * frame.counts.len());
    out.extend_from_slice(header.as_bytes());
    for c in &frame.counts {
        out.extend_from_slice(&c.to_be_bytes());
    }
    out
}
