//! Background-subtracted center of mass of a fluorescence image.

use serde::Serialize;

use super::ccd::{CcdSpec, Image};
use crate::error::{Error, Result};

/// Half-open pixel window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Region {
    pub col0: usize,
    pub col1: usize,
    pub row0: usize,
    pub row1: usize,
}

impl Region {
    pub fn full(image: &Image) -> Self {
        Self {
            col0: 0,
            col1: image.cols,
            row0: 0,
            row1: image.rows,
        }
    }

    fn border(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (self.row0..self.row1).flat_map(move |r| {
            (self.col0..self.col1).filter_map(move |c| {
                let edge = r == self.row0 || r + 1 == self.row1 || c == self.col0 || c + 1 == self.col1;
                edge.then_some((c, r))
            })
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Centroid {
    pub x: f64,
    pub z: f64,
    /// Uncertainty of each coordinate, never below one pixel.
    pub err: f64,
    pub counts: f64,
    pub background: f64,
    pub rms_x: f64,
    pub rms_z: f64,
    /// Signal on the region border over the total; large values mean the
    /// cloud is clipped.
    pub border_fraction: f64,
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn centroid(image: &Image, region: Region, ccd: &CcdSpec) -> Result<Centroid> {
    if region.col1 <= region.col0 || region.row1 <= region.row0 {
        return Err(Error::NoSignal);
    }
    let background = median(region.border().map(|(c, r)| image.at(c, r)).collect());
    let (mut m0, mut mc, mut mr, mut mcc, mut mrr, mut edge) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for r in region.row0..region.row1 {
        let v = r as f64 + 0.5;
        for c in region.col0..region.col1 {
            let w = (image.at(c, r) - background).max(0.0);
            if w == 0.0 {
                continue;
            }
            let u = c as f64 + 0.5;
            m0 += w;
            mc += w * u;
            mr += w * v;
            mcc += w * u * u;
            mrr += w * v * v;
            if r == region.row0 || r + 1 == region.row1 || c == region.col0 || c + 1 == region.col1 {
                edge += w;
            }
        }
    }
    if !(m0 > 0.0) {
        return Err(Error::NoSignal);
    }
    let (u, v) = (mc / m0, mr / m0);
    let var_u = (mcc / m0 - u * u).max(0.0);
    let var_v = (mrr / m0 - v * v).max(0.0);
    let (x, z) = ccd.to_physical(u, v);
    let pitch = ccd.pixel_pitch;
    let statistical = (var_u.max(var_v) / m0).sqrt() * pitch;
    Ok(Centroid {
        x,
        z,
        err: statistical.max(pitch),
        counts: m0,
        background,
        rms_x: var_u.sqrt() * pitch,
        rms_z: var_v.sqrt() * pitch,
        border_fraction: edge / m0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::ccd::{render_frame, Emitter};
    use crate::dynamics::rng::{stream, Channel};

    fn still(x: f64, z: f64) -> Emitter {
        Emitter {
            x,
            z,
            v_x: 0.0,
            v_z: 0.0,
        }
    }

    #[test]
    fn single_blob() {
        let ccd = CcdSpec::default();
        let (x, z) = ccd.pixel_center(40, 150);
        let img = render_frame(&[still(x, z)], &ccd, 500.0, 0.0);
        let c = centroid(&img, Region::full(&img), &ccd).unwrap();
        assert!((c.x - x).abs() < 0.05 * ccd.pixel_pitch);
        assert!((c.z - z).abs() < 0.05 * ccd.pixel_pitch);
        assert_eq!(c.err, ccd.pixel_pitch);
        assert!(c.border_fraction < 1e-12);
    }

    #[test]
    fn symmetric_pair() {
        let ccd = CcdSpec::default();
        let (x, z) = ccd.pixel_center(100, 100);
        let d = 20.3 * ccd.pixel_pitch;
        let img = render_frame(&[still(x - d, z), still(x + d, z)], &ccd, 300.0, 0.0);
        let c = centroid(&img, Region::full(&img), &ccd).unwrap();
        assert!((c.x - x).abs() < 1e-3 * ccd.pixel_pitch);
    }

    #[test]
    fn background_removed() {
        let ccd = CcdSpec::default();
        let (x, z) = ccd.pixel_center(70, 60);
        let mut img = render_frame(&[still(x, z)], &ccd, 1000.0, 0.0);
        for v in img.data.iter_mut() {
            *v += 5.0;
        }
        let c = centroid(&img, Region::full(&img), &ccd).unwrap();
        assert_eq!(c.background, 5.0);
        assert!((c.x - x).abs() < 0.05 * ccd.pixel_pitch);
    }

    #[test]
    fn empty_region_rejected() {
        let ccd = CcdSpec::default();
        let img = Image::zeros(200, 200);
        assert!(matches!(centroid(&img, Region::full(&img), &ccd), Err(Error::NoSignal)));
    }

    #[test]
    fn noisy_cloud_scatter_below_a_pixel() {
        let ccd = CcdSpec::default();
        let (x0, z0) = ccd.pixel_center(100, 80);
        // A cloud of 300 atoms at 200 counts each, 10 px rms.
        let mut rng = stream(3, 0, 0, Channel::Initial);
        use rand::Rng;
        let emitters: Vec<Emitter> = (0..300)
            .map(|_| {
                let gx: f64 = rng.sample(rand_distr::StandardNormal);
                let gz: f64 = rng.sample(rand_distr::StandardNormal);
                still(x0 + 10.0 * ccd.pixel_pitch * gx, z0 + 10.0 * ccd.pixel_pitch * gz)
            })
            .collect();
        let expected = render_frame(&emitters, &ccd, 200.0, 0.0);
        let truth = centroid(&expected, Region::full(&expected), &ccd).unwrap();
        let xs: Vec<f64> = (0..100)
            .map(|k| {
                let mut noise = stream(3, k, 0, Channel::Image);
                let (counts, _) = expected.digitize(Some(&mut noise));
                let img = Image {
                    cols: 200,
                    rows: 200,
                    data: counts.iter().map(|&c| c as f64).collect(),
                };
                centroid(&img, Region::full(&img), &ccd).unwrap().x - truth.x
            })
            .collect();
        let rms = (xs.iter().map(|d| d * d).sum::<f64>() / xs.len() as f64).sqrt();
        assert!(rms <= ccd.pixel_pitch, "{rms}");
    }
}
