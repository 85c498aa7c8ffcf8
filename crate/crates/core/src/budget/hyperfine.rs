//! Multi-level correction from the excited-state hyperfine structure.
//!
//! For a ground sublevel m the light shift is a sum over excited levels F' of
//! S(F',m)/δ_F' and the scattering rate a sum of S(F',m)/δ_F'². Along an
//! exponential potential the photon number scales with the ratio of the two,
//! so relative to a two-level atom on the F'=3 line
//!
//! factor_m = δ·Σ S/δ_F'² / Σ S/δ_F',
//!
//! independent of the overall normalization of S. The reported factor is
//! the equal-population average over m.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optics::mhz_to_angular;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperfineLine {
    pub f_prime: u8,
    /// Frequency of this line below the reference (cycling) line, rad/s.
    /// The atom sees δ_F' = δ + detuning_offset.
    pub detuning_offset: f64,
    /// π-transition strength for each ground sublevel in `HyperfineModel::m_f`.
    pub strengths: Vec<f64>,
}

impl HyperfineLine {
    pub fn relative_strength(&self) -> f64 {
        self.strengths.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperfineModel {
    pub m_f: Vec<i32>,
    pub lines: Vec<HyperfineLine>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineContribution {
    pub f_prime: u8,
    /// Share of the light shift, averaged over sublevels.
    pub potential_share: f64,
    /// Share of the scattering rate, averaged over sublevels.
    pub scattering_share: f64,
}

impl HyperfineModel {
    /// ⁸⁷Rb D₂ from F=2 with π-polarized light: 5P₃/₂ splittings from the
    /// F'=3 line and sublevel strengths normalized so the F'=3 column sums
    /// to the cycling-line value of one per sublevel on average.
    pub fn rb87_d2_f2() -> Self {
        let m_f = vec![-2, -1, 0, 1, 2];
        let third = 1.0 / 3.0;
        let lines = vec![
            HyperfineLine {
                f_prime: 3,
                detuning_offset: 0.0,
                strengths: vec![third, 8.0 / 15.0, 3.0 / 5.0, 8.0 / 15.0, third],
            },
            HyperfineLine {
                f_prime: 2,
                detuning_offset: mhz_to_angular(266.650),
                strengths: vec![third, 1.0 / 12.0, 0.0, 1.0 / 12.0, third],
            },
            HyperfineLine {
                f_prime: 1,
                detuning_offset: mhz_to_angular(266.650 + 156.947),
                strengths: vec![0.0, 1.0 / 20.0, 1.0 / 15.0, 1.0 / 20.0, 0.0],
            },
            HyperfineLine {
                f_prime: 0,
                detuning_offset: mhz_to_angular(266.650 + 156.947 + 72.218),
                strengths: vec![0.0; 5],
            },
        ];
        Self { m_f, lines }
    }

    /// Only the reference line with unit strength: reduces to a two-level atom.
    pub fn single_line() -> Self {
        Self {
            m_f: vec![0],
            lines: vec![HyperfineLine {
                f_prime: 3,
                detuning_offset: 0.0,
                strengths: vec![1.0],
            }],
        }
    }

    /// (m_F, strength) pairs on the reference line.
    pub fn mf_weights(&self) -> Vec<(i32, f64)> {
        let reference = &self.lines[0];
        self.m_f
            .iter()
            .copied()
            .zip(reference.strengths.iter().copied())
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.lines.is_empty() || self.m_f.is_empty() {
            return Err(Error::Config("hyperfine model needs lines and sublevels".into()));
        }
        for line in &self.lines {
            if line.strengths.len() != self.m_f.len() {
                return Err(Error::Config(format!(
                    "line F'={} has {} strengths for {} sublevels",
                    line.f_prime,
                    line.strengths.len(),
                    self.m_f.len()
                )));
            }
            if let Some(&s) = line.strengths.iter().find(|s| !(**s >= 0.0)) {
                return Err(Error::InvalidParameter {
                    name: "line strength",
                    requirement: "non-negative",
                    value: s,
                });
            }
        }
        Ok(())
    }

    fn line_detunings(&self, detuning: f64) -> Result<Vec<f64>> {
        self.validate()?;
        self.lines
            .iter()
            .map(|line| {
                let d = detuning + line.detuning_offset;
                if d > 0.0 {
                    Ok(d)
                } else {
                    Err(Error::LineCrossing {
                        f_prime: line.f_prime,
                        detuning: d,
                    })
                }
            })
            .collect()
    }

    /// Photon-number ratio (multi-level / two-level) for each sublevel.
    pub fn sublevel_factors(&self, detuning: f64) -> Result<Vec<f64>> {
        let deltas = self.line_detunings(detuning)?;
        (0..self.m_f.len())
            .map(|m| {
                let (mut shift, mut rate) = (0.0, 0.0);
                for (line, d) in self.lines.iter().zip(&deltas) {
                    let s = line.strengths[m];
                    shift += s / d;
                    rate += s / (d * d);
                }
                if shift > 0.0 {
                    Ok(detuning * rate / shift)
                } else {
                    Err(Error::Config(format!(
                        "sublevel m_F={} couples to no line",
                        self.m_f[m]
                    )))
                }
            })
            .collect()
    }

    pub fn contributions(&self, detuning: f64) -> Result<Vec<LineContribution>> {
        let deltas = self.line_detunings(detuning)?;
        let n_m = self.m_f.len() as f64;
        let mut out: Vec<LineContribution> = self
            .lines
            .iter()
            .map(|l| LineContribution {
                f_prime: l.f_prime,
                potential_share: 0.0,
                scattering_share: 0.0,
            })
            .collect();
        for m in 0..self.m_f.len() {
            let shift: f64 = self
                .lines
                .iter()
                .zip(&deltas)
                .map(|(l, d)| l.strengths[m] / d)
                .sum();
            let rate: f64 = self
                .lines
                .iter()
                .zip(&deltas)
                .map(|(l, d)| l.strengths[m] / (d * d))
                .sum();
            if shift <= 0.0 {
                continue;
            }
            for ((c, l), d) in out.iter_mut().zip(&self.lines).zip(&deltas) {
                c.potential_share += l.strengths[m] / d / shift / n_m;
                c.scattering_share += l.strengths[m] / (d * d) / rate / n_m;
            }
        }
        Ok(out)
    }
}

/// Sublevel-averaged photon-number ratio relative to a two-level atom.
pub fn hyperfine_factor(model: &HyperfineModel, detuning: f64) -> Result<f64> {
    let factors = model.sublevel_factors(detuning)?;
    Ok(factors.iter().sum::<f64>() / factors.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::AtomSpecies;

    fn gamma() -> f64 {
        AtomSpecies::rb87_d2().linewidth
    }

    fn factorial(n: i64) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    // Racah formulas with doubled arguments so half-integers stay integral.
    fn triangle(a: i64, b: i64, c: i64) -> f64 {
        factorial((a + b - c) / 2) * factorial((a - b + c) / 2) * factorial((-a + b + c) / 2)
            / factorial((a + b + c) / 2 + 1)
    }

    fn three_j(j1: i64, j2: i64, j3: i64, m1: i64, m2: i64, m3: i64) -> f64 {
        if m1 + m2 + m3 != 0 {
            return 0.0;
        }
        let pre = triangle(j1, j2, j3).sqrt()
            * (factorial((j1 + m1) / 2)
                * factorial((j1 - m1) / 2)
                * factorial((j2 + m2) / 2)
                * factorial((j2 - m2) / 2)
                * factorial((j3 + m3) / 2)
                * factorial((j3 - m3) / 2))
                .sqrt();
        let mut sum = 0.0;
        for k in 0..=40i64 {
            let d = [
                k,
                (j3 - j2 + m1) / 2 + k,
                (j3 - j1 - m2) / 2 + k,
                (j1 + j2 - j3) / 2 - k,
                (j1 - m1) / 2 - k,
                (j2 + m2) / 2 - k,
            ];
            if d.iter().any(|&x| x < 0) {
                continue;
            }
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign / d.iter().map(|&x| factorial(x)).product::<f64>();
        }
        let phase = if ((j1 - j2 - m3) / 2) % 2 == 0 { 1.0 } else { -1.0 };
        phase * pre * sum
    }

    fn six_j(j1: i64, j2: i64, j3: i64, j4: i64, j5: i64, j6: i64) -> f64 {
        let pre = (triangle(j1, j2, j3)
            * triangle(j1, j5, j6)
            * triangle(j4, j2, j6)
            * triangle(j4, j5, j3))
        .sqrt();
        let a = [
            (j1 + j2 + j3) / 2,
            (j1 + j5 + j6) / 2,
            (j4 + j2 + j6) / 2,
            (j4 + j5 + j3) / 2,
        ];
        let b = [
            (j1 + j2 + j4 + j5) / 2,
            (j2 + j3 + j5 + j6) / 2,
            (j3 + j1 + j6 + j4) / 2,
        ];
        let mut sum = 0.0;
        for t in 0..=40i64 {
            if a.iter().any(|&x| t < x) || b.iter().any(|&x| t > x) {
                continue;
            }
            let den: f64 = a.iter().map(|&x| factorial(t - x)).product::<f64>()
                * b.iter().map(|&x| factorial(x - t)).product::<f64>();
            let sign = if t % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * factorial(t + 1) / den;
        }
        pre * sum
    }

    /// π strength F=2,m → F',m on the D₂ line of a nuclear spin 3/2 atom.
    fn racah_strength(f_prime: i64, m: i64) -> f64 {
        let (j, jp, i, f) = (1, 3, 3, 4);
        let fp = 2 * f_prime;
        if (fp - f).abs() > 2 || 2 * m.abs() > fp {
            return 0.0;
        }
        let w3 = three_j(fp, 2, f, 2 * m, 0, -2 * m);
        let w6 = six_j(j, jp, 2, fp, f, i);
        ((fp + 1) * (jp + 1) * (f + 1)) as f64 * w3 * w3 * w6 * w6
    }

    #[test]
    fn preset_strengths_match_angular_momentum_algebra() {
        let model = HyperfineModel::rb87_d2_f2();
        for line in &model.lines {
            for (k, m) in model.m_f.iter().enumerate() {
                let oracle = racah_strength(line.f_prime as i64, *m as i64);
                assert!(
                    (line.strengths[k] - oracle).abs() < 1e-12,
                    "F'={} m={} {} vs {}",
                    line.f_prime,
                    m,
                    line.strengths[k],
                    oracle
                );
            }
        }
        // Every sublevel has the same total π strength summed over F'.
        for k in 0..5 {
            let total: f64 = model.lines.iter().map(|l| l.strengths[k]).sum();
            assert!((total - 2.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cycling_line_weights_in_range() {
        for (_, w) in HyperfineModel::rb87_d2_f2().mf_weights() {
            assert!((1.0 / 3.0 - 1e-12..=3.0 / 5.0 + 1e-12).contains(&w));
        }
    }

    #[test]
    fn single_line_is_two_level() {
        let model = HyperfineModel::single_line();
        for d in [1.0, 44.0, 1e4] {
            assert!((hyperfine_factor(&model, d * gamma()).unwrap() - 1.0).abs() < 1e-15);
        }
        // A cycling line alone gives the same photon number in every sublevel.
        let mut multi = HyperfineModel::rb87_d2_f2();
        multi.lines.truncate(1);
        let f = multi.sublevel_factors(44.0 * gamma()).unwrap();
        assert!(f.iter().all(|x| (x - 1.0).abs() < 1e-12));
    }

    #[test]
    fn reduction_at_44_gamma() {
        let f = hyperfine_factor(&HyperfineModel::rb87_d2_f2(), 44.0 * gamma()).unwrap();
        assert!((f - 0.906).abs() < 0.002, "{f}");
    }

    #[test]
    fn large_detuning_series() {
        let model = HyperfineModel::rb87_d2_f2();
        let delta = 1e5 * gamma();
        // First-order expansion: factor_m ≈ 1 − ⟨offset⟩_S / δ.
        let series: f64 = (0..5)
            .map(|m| {
                let (mut sd, mut s) = (0.0, 0.0);
                for l in &model.lines {
                    sd += l.strengths[m] * l.detuning_offset;
                    s += l.strengths[m];
                }
                1.0 - sd / s / delta
            })
            .sum::<f64>()
            / 5.0;
        let brute = hyperfine_factor(&model, delta).unwrap();
        assert!((brute - series).abs() < 1e-6, "{brute} {series}");
        assert!(brute < 1.0);
    }

    #[test]
    fn line_crossing_rejected() {
        let model = HyperfineModel::rb87_d2_f2();
        assert!(matches!(
            hyperfine_factor(&model, -mhz_to_angular(100.0)),
            Err(Error::LineCrossing { f_prime: 3, .. })
        ));
    }

    #[test]
    fn contributions_sum_to_one() {
        let c = HyperfineModel::rb87_d2_f2()
            .contributions(44.0 * gamma())
            .unwrap();
        let p: f64 = c.iter().map(|x| x.potential_share).sum();
        let s: f64 = c.iter().map(|x| x.scattering_share).sum();
        assert!((p - 1.0).abs() < 1e-12 && (s - 1.0).abs() < 1e-12);
        // F'=2 is the main secondary line.
        assert!(c[1].potential_share > c[2].potential_share);
        assert!(c[1].potential_share > 0.05);
    }
}
