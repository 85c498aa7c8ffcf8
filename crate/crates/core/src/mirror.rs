//! Total mirror potential (dipole + gravity + van der Waals), barrier heights,
//! bounce thresholds and the effective mirror size.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::constants::{GRAVITY, HBAR};
use crate::error::{require_positive, Error, Result};
use crate::numerics::quad::{self, QuadOptions};
use crate::numerics::roots::{bisect, golden_max};
use crate::optics::{
    angle_for_decay_constant, critical_angle, minimum_decay_length, AtomSpecies, EwField,
    EwGeometry,
};

/// Default evaluation cutoff above the surface.
pub const DEFAULT_Z_MIN: f64 = 10e-9;

const GRID_POINTS: usize = 1024;

/// Lennard-Jones coefficient of a two-level atom in front of a dielectric,
/// C₃ = (3/16)·(n²−1)/(n²+1)·ħΓ/k₀³, so that U_vdW = −C₃/z³.
pub fn dielectric_c3(n: f64, species: &AtomSpecies) -> f64 {
    let k0 = species.k0();
    3.0 / 16.0 * (n * n - 1.0) / (n * n + 1.0) * HBAR * species.linewidth / (k0 * k0 * k0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialOptions {
    pub include_gravity: bool,
    pub include_vdw: bool,
    /// Explicit C₃ in J·m³; the dielectric value is used when absent.
    #[serde(default)]
    pub c3: Option<f64>,
    /// Multiplier applied to C₃ (sensitivity studies).
    #[serde(default = "one")]
    pub c3_scale: f64,
    pub z_min: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for PotentialOptions {
    fn default() -> Self {
        Self {
            include_gravity: true,
            include_vdw: true,
            c3: None,
            c3_scale: 1.0,
            z_min: DEFAULT_Z_MIN,
        }
    }
}

impl PotentialOptions {
    pub fn optical_only() -> Self {
        Self {
            include_gravity: false,
            include_vdw: false,
            ..Self::default()
        }
    }
}

/// U(z) = u0·exp(−2κz) + Mg·z − C₃/z³ with switchable terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MirrorPotential {
    pub u0: f64,
    pub kappa: f64,
    pub c3: f64,
    pub mg: f64,
    pub z_min: f64,
    pub include_gravity: bool,
    pub include_vdw: bool,
}

impl MirrorPotential {
    pub fn from_field(
        field: &EwField,
        species: &AtomSpecies,
        refractive_index: f64,
        opts: &PotentialOptions,
    ) -> Result<Self> {
        let c3 = opts
            .c3
            .unwrap_or_else(|| dielectric_c3(refractive_index, species))
            * opts.c3_scale;
        let pot = Self {
            u0: field.u0,
            kappa: field.decay_constant,
            c3,
            mg: species.mass * GRAVITY,
            z_min: opts.z_min,
            include_gravity: opts.include_gravity,
            include_vdw: opts.include_vdw,
        };
        pot.validate()?;
        Ok(pot)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("kappa", self.kappa)?;
        require_positive("z_min", self.z_min)?;
        if self.c3 < 0.0 {
            return Err(Error::InvalidParameter {
                name: "c3",
                requirement: "non-negative",
                value: self.c3,
            });
        }
        Ok(())
    }

    pub fn decay_length(&self) -> f64 {
        1.0 / self.kappa
    }

    /// Same potential with the dipole amplitude multiplied by `factor`
    /// (e.g. the Gaussian profile away from the beam center).
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            u0: self.u0 * factor,
            ..*self
        }
    }

    pub fn dipole(&self, z: f64) -> f64 {
        self.u0 * (-2.0 * self.kappa * z).exp()
    }

    /// Potential without the domain check. `z` must be positive when vdW is on.
    pub fn value_unchecked(&self, z: f64) -> f64 {
        let mut u = self.dipole(z);
        if self.include_gravity {
            u += self.mg * z;
        }
        if self.include_vdw {
            u -= self.c3 / (z * z * z);
        }
        u
    }

    pub fn value(&self, z: f64) -> Result<f64> {
        if z < self.z_min {
            return Err(Error::BelowCutoff {
                z,
                z_min: self.z_min,
            });
        }
        Ok(self.value_unchecked(z))
    }

    /// Dipole term and dU/dz in one pass (one exponential).
    pub fn dipole_and_slope(&self, z: f64) -> (f64, f64) {
        let dip = self.dipole(z);
        let mut slope = -2.0 * self.kappa * dip;
        if self.include_gravity {
            slope += self.mg;
        }
        if self.include_vdw {
            let z2 = z * z;
            slope += 3.0 * self.c3 / (z2 * z2);
        }
        (dip, slope)
    }

    /// Optical plus van der Waals part, used where gravity is treated separately.
    pub fn without_gravity(&self) -> Self {
        Self {
            include_gravity: false,
            ..*self
        }
    }
}

pub fn total_potential(pot: &MirrorPotential, z: f64) -> Result<f64> {
    pot.value(z)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BarrierReport {
    pub barrier_height: f64,
    pub barrier_position: f64,
    pub bounces: bool,
    pub turning_point: Option<f64>,
}

/// Location and height of the potential maximum above `z_min`.
pub fn barrier_top(pot: &MirrorPotential) -> Result<(f64, f64)> {
    pot.validate()?;
    let xi = pot.decay_length();
    let z_hi = (10.0 * xi).max(pot.z_min * 2.0);
    let ln_lo = pot.z_min.ln();
    let step = (z_hi.ln() - ln_lo) / (GRID_POINTS - 1) as f64;
    let grid = |i: usize| (ln_lo + step * i as f64).exp();
    let (mut best, mut best_u) = (0usize, f64::NEG_INFINITY);
    for i in 0..GRID_POINTS {
        let u = pot.value_unchecked(grid(i));
        if u > best_u {
            best = i;
            best_u = u;
        }
    }
    if best == 0 {
        return Ok(if pot.include_vdw {
            (pot.z_min, pot.value_unchecked(pot.z_min))
        } else {
            // Purely optical barrier: the maximum sits on the surface.
            (0.0, pot.value_unchecked(0.0))
        });
    }
    let lo = grid(best - 1);
    let hi = grid((best + 1).min(GRID_POINTS - 1));
    golden_max(|z| Ok(pot.value_unchecked(z)), lo, hi, 1e-4 * xi)
}

/// Outermost crossing U(z) = `energy` on the descending flank above `from`.
/// `U(from)` must exceed `energy`.
pub(crate) fn descending_root(pot: &MirrorPotential, from: f64, energy: f64) -> Result<f64> {
    let xi = pot.decay_length();
    let mut hi = from.max(pot.z_min) + xi;
    let mut tries = 0;
    while pot.value_unchecked(hi) >= energy {
        hi = from + 2.0 * (hi - from);
        tries += 1;
        if tries > 80 {
            return Err(Error::NoBounce {
                energy,
                barrier: pot.value_unchecked(from),
            });
        }
    }
    let lo = (hi - from) / 2.0 + from;
    let lo = if pot.value_unchecked(lo) >= energy {
        lo
    } else {
        from
    };
    bisect(
        |z| Ok(pot.value_unchecked(z) - energy),
        lo,
        hi,
        1e-9 * xi,
    )
}

pub fn barrier(pot: &MirrorPotential, e_incident: f64) -> Result<BarrierReport> {
    require_positive("e_incident", e_incident)?;
    let (position, height) = barrier_top(pot)?;
    let bounces = height > e_incident;
    let turning_point = if bounces {
        Some(descending_root(pot, position, e_incident)?)
    } else {
        None
    };
    Ok(BarrierReport {
        barrier_height: height,
        barrier_position: position,
        bounces,
        turning_point,
    })
}

fn bounces_at(
    geom: &EwGeometry,
    species: &AtomSpecies,
    detuning: f64,
    energy: f64,
    opts: &PotentialOptions,
) -> Result<bool> {
    let field = EwField::new(geom, species, detuning)?;
    let pot = MirrorPotential::from_field(&field, species, geom.refractive_index, opts)?;
    Ok(barrier_top(&pot)?.1 > energy)
}

/// Largest blue detuning (rad/s) at which an atom dropped from `fall_height`
/// still bounces at the beam center.
pub fn detuning_threshold(
    geom: &EwGeometry,
    species: &AtomSpecies,
    power: f64,
    fall_height: f64,
    opts: &PotentialOptions,
) -> Result<f64> {
    require_positive("power", power)?;
    require_positive("fall_height", fall_height)?;
    let geom = geom.with_power(power)?;
    let energy = species.mass * GRAVITY * fall_height;
    let gamma = species.linewidth;
    if !bounces_at(&geom, species, gamma, energy, opts)? {
        return Err(Error::ThresholdNotFound { what: "detuning" });
    }
    let mut lo = gamma;
    let mut hi = 2.0 * gamma;
    while bounces_at(&geom, species, hi, energy, opts)? {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 * gamma {
            return Err(Error::ThresholdNotFound { what: "detuning" });
        }
    }
    let ln = bisect(
        |ln_d| {
            Ok(if bounces_at(&geom, species, ln_d.exp(), energy, opts)? {
                1.0
            } else {
                -1.0
            })
        },
        lo.ln(),
        hi.ln(),
        1e-10,
    )?;
    Ok(ln.exp())
}

/// Vacuum-side closed form with van der Waals and gravity neglected:
/// δ_th = (Γ²/4)(T·I/I₀)(ħ/2Mgh).
pub fn detuning_threshold_optical(
    enhancement: f64,
    peak_intensity: f64,
    species: &AtomSpecies,
    fall_height: f64,
) -> f64 {
    let g2 = species.linewidth * species.linewidth;
    g2 / 4.0 * enhancement * peak_intensity / species.saturation_intensity * HBAR
        / (2.0 * species.mass * GRAVITY * fall_height)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayLengthThreshold {
    pub decay_length: f64,
    pub angle: f64,
    pub angle_above_critical: f64,
}

/// Smallest decay length (steepest potential) that still reflects an atom
/// dropped from `fall_height`, found by scanning the angle of incidence with
/// the Fresnel enhancement following the angle. `Ok(None)` means the mirror
/// works all the way to grazing incidence.
pub fn decay_length_threshold(
    geom: &EwGeometry,
    species: &AtomSpecies,
    power: f64,
    detuning: f64,
    fall_height: f64,
    opts: &PotentialOptions,
) -> Result<Option<DecayLengthThreshold>> {
    require_positive("power", power)?;
    require_positive("fall_height", fall_height)?;
    if detuning <= 0.0 {
        return Err(Error::RedDetuning(detuning));
    }
    let n = geom.refractive_index;
    let critical = critical_angle(n)?;
    let geom = geom.with_power(power)?;
    let energy = species.mass * GRAVITY * fall_height;
    let at = |angle: f64| -> Result<bool> {
        bounces_at(&geom.with_angle(angle)?, species, detuning, energy, opts)
    };
    let lo = critical + 1e-6;
    let hi = FRAC_PI_2 - 1e-9;
    if !at(lo)? {
        return Err(Error::ThresholdNotFound {
            what: "decay length",
        });
    }
    if at(hi)? {
        return Ok(None);
    }
    // Work in decay length; it is monotone in the angle.
    let xi_of = |angle: f64| 1.0 / (species.k0() * (n * n * angle.sin().powi(2) - 1.0).sqrt());
    let xi_min = minimum_decay_length(n, species)?;
    let (xi_small, xi_large) = (xi_of(hi).max(xi_min), xi_of(lo));
    let xi = bisect(
        |ln_xi| {
            let angle = angle_for_decay_constant(n, (-ln_xi).exp(), species)?;
            Ok(if at(angle)? { 1.0 } else { -1.0 })
        },
        xi_large.ln(),
        xi_small.ln(),
        1e-10,
    )?
    .exp();
    let angle = angle_for_decay_constant(n, 1.0 / xi, species)?;
    Ok(Some(DecayLengthThreshold {
        decay_length: xi,
        angle,
        angle_above_critical: angle - critical,
    }))
}

/// Radius of the disk on which the local barrier still exceeds `e_incident`.
/// `pot` is the potential at the beam center.
pub fn effective_mirror_radius(pot: &MirrorPotential, waist: f64, e_incident: f64) -> Result<f64> {
    require_positive("waist", waist)?;
    require_positive("e_incident", e_incident)?;
    let center = barrier_top(pot)?.1;
    if center <= e_incident {
        return Ok(0.0);
    }
    let profile = |r: f64| (-2.0 * r * r / (waist * waist)).exp();
    // The barrier never exceeds the local dipole amplitude, so the optical
    // closed form bounds the radius from above.
    let r_hi = waist * ((pot.u0 / e_incident).ln() / 2.0).max(0.0).sqrt() * 1.001 + 1e-12;
    if barrier_top(&pot.scaled(profile(r_hi)))?.1 > e_incident {
        return Ok(r_hi);
    }
    bisect(
        |r| Ok(barrier_top(&pot.scaled(profile(r)))?.1 - e_incident),
        0.0,
        r_hi,
        1e-9 * waist,
    )
}

/// Closed-form radius for the optical potential alone, w·√(ln(u0/E)/2).
pub fn effective_mirror_radius_optical(u0: f64, waist: f64, e_incident: f64) -> f64 {
    if u0 <= e_incident {
        0.0
    } else {
        waist * ((u0 / e_incident).ln() / 2.0).sqrt()
    }
}

/// Horizontal rms size of a released thermal cloud after time `t`.
pub fn cloud_sigma_at(mot_sigma: f64, temperature: f64, mass: f64, t: f64) -> f64 {
    let sv2 = crate::constants::BOLTZMANN * temperature / mass;
    (mot_sigma * mot_sigma + sv2 * t * t).sqrt()
}

/// Fraction of a 2-D Gaussian cloud (rms `cloud_sigma` per axis, center
/// displaced by `mot_offset`) that falls on a disk of radius `r_eff`.
pub fn bounce_fraction(cloud_sigma: f64, mot_offset: f64, r_eff: f64) -> Result<f64> {
    require_positive("cloud_sigma", cloud_sigma)?;
    if r_eff <= 0.0 {
        return Ok(0.0);
    }
    if !r_eff.is_finite() {
        return Ok(1.0);
    }
    let d = mot_offset.abs();
    if d == 0.0 {
        return Ok(-(-r_eff * r_eff / (2.0 * cloud_sigma * cloud_sigma)).exp_m1());
    }
    let s = cloud_sigma;
    let norm = 1.0 / (s * (2.0 * PI).sqrt());
    let strip = |x: f64| {
        let dx = (x - d) / s;
        let half = (r_eff * r_eff - x * x).max(0.0).sqrt();
        Ok(norm * (-0.5 * dx * dx).exp() * libm::erf(half / (s * 2f64.sqrt())))
    };
    let opts = QuadOptions {
        rel_tol: 1e-12,
        abs_tol: 1e-15,
        max_intervals: 4000,
    };
    Ok(quad::integrate(strip, -r_eff, r_eff, opts)?.value.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::Polarization;

    fn rb() -> AtomSpecies {
        AtomSpecies::rb87_d2()
    }

    fn geometry(mrad: f64) -> EwGeometry {
        EwGeometry::above_critical(1.51, mrad * 1e-3, 335e-6, 19e-3, Polarization::TM).unwrap()
    }

    fn potential(mrad: f64, delta_gamma: f64, opts: &PotentialOptions) -> MirrorPotential {
        let species = rb();
        let field = EwField::new(&geometry(mrad), &species, delta_gamma * species.linewidth).unwrap();
        MirrorPotential::from_field(&field, &species, 1.51, opts).unwrap()
    }

    fn fall_energy() -> f64 {
        rb().mass * GRAVITY * 6.6e-3
    }

    #[test]
    fn optical_only_reduces_to_exponential() {
        let pot = potential(5.0, 44.0, &PotentialOptions::optical_only());
        for z in [1e-8, 1e-7, 1e-6] {
            let u = total_potential(&pot, z).unwrap();
            assert_eq!(u, pot.u0 * (-2.0 * pot.kappa * z).exp());
        }
        assert!(matches!(
            total_potential(&pot, 1e-9),
            Err(Error::BelowCutoff { .. })
        ));
    }

    #[test]
    fn gravity_negligible_over_decay_length() {
        let species = rb();
        let mut g = geometry(5.0);
        g.enhancement_override = Some(6.0);
        let field = EwField::new(&g, &species, 44.0 * species.linewidth).unwrap();
        let xi = 1e-6;
        assert!(species.mass * GRAVITY * xi / field.u0 < 1e-4);
    }

    #[test]
    fn zero_crossing_exists_with_vdw() {
        // Dense-grid oracle: U changes sign between z_min and the barrier.
        for (mrad, delta) in [(0.9, 44.0), (15.2, 31.0), (24.0, 233.0)] {
            let pot = potential(mrad, delta, &PotentialOptions::default());
            let mut signs = (0..20_000).map(|i| {
                let z = 1e-9 * (1.0 + i as f64 * 0.01);
                pot.value_unchecked(z) > 0.0
            });
            let first = signs.next().unwrap();
            assert!(!first);
            assert!(signs.any(|s| s));
        }
    }

    #[test]
    fn optical_barrier_closed_form() {
        let pot = potential(5.0, 44.0, &PotentialOptions::optical_only());
        let e = pot.u0 / 10.0;
        let rep = barrier(&pot, e).unwrap();
        assert!(rep.bounces);
        assert_eq!(rep.barrier_position, 0.0);
        assert_eq!(rep.barrier_height, pot.u0);
        let expected = (pot.u0 / e).ln() / (2.0 * pot.kappa);
        assert!((rep.turning_point.unwrap() / expected - 1.0).abs() < 1e-8);
        let over = barrier(&pot, 2.0 * pot.u0).unwrap();
        assert!(!over.bounces);
        assert!(over.turning_point.is_none());
    }

    #[test]
    fn vdw_lowers_barrier() {
        let pot = potential(24.0, 44.0, &PotentialOptions::default());
        let e = fall_energy();
        let rep = barrier(&pot, e).unwrap();
        assert!(rep.bounces);
        assert!(rep.barrier_height < pot.u0);
        assert!(rep.barrier_position > 0.0);
        // Dense-grid oracle for the maximum.
        let grid_max = (1..200_000)
            .map(|i| pot.value_unchecked(i as f64 * 1e-11))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((rep.barrier_height / grid_max - 1.0).abs() < 1e-6);
        let tp = rep.turning_point.unwrap();
        assert!((pot.value_unchecked(tp) - e).abs() <= 1e-6 * e);
    }

    #[test]
    fn barrier_monotone_in_c3_and_u0() {
        let base = potential(10.0, 44.0, &PotentialOptions::default());
        let mut last_c3 = f64::INFINITY;
        for scale in [0.0, 0.5, 1.0, 2.0, 5.0] {
            let pot = MirrorPotential {
                c3: base.c3 * scale,
                ..base
            };
            let h = barrier_top(&pot).unwrap().1;
            assert!(h <= last_c3);
            last_c3 = h;
            let mut last_u0 = f64::NEG_INFINITY;
            for f in [0.1, 0.3, 1.0, 3.0] {
                let h = barrier_top(&pot.scaled(f)).unwrap().1;
                assert!(h >= last_u0);
                last_u0 = h;
            }
        }
    }

    #[test]
    fn optical_detuning_threshold_bounds_vdw_result() {
        let species = rb();
        let g = geometry(15.2);
        let opts = PotentialOptions {
            include_gravity: false,
            include_vdw: false,
            ..Default::default()
        };
        let optical = detuning_threshold(&g, &species, 19e-3, 6.6e-3, &opts).unwrap();
        let closed = detuning_threshold_optical(
            crate::optics::enhancement(&g).unwrap(),
            crate::optics::peak_intensity(19e-3, 335e-6),
            &species,
            6.6e-3,
        );
        assert!((optical / closed - 1.0).abs() < 1e-8);
        let with_vdw =
            detuning_threshold(&g, &species, 19e-3, 6.6e-3, &PotentialOptions::default()).unwrap();
        assert!(with_vdw < optical);
        // Bracket check: bounce at half the threshold, none at twice.
        let e = fall_energy();
        let opts = PotentialOptions::default();
        assert!(bounces_at(&g, &species, with_vdw / 2.0, e, &opts).unwrap());
        assert!(!bounces_at(&g, &species, with_vdw * 2.0, e, &opts).unwrap());
    }

    #[test]
    fn decay_threshold_needs_vdw() {
        let species = rb();
        let mut g = geometry(5.0);
        g.enhancement_override = Some(6.0);
        let opts = PotentialOptions {
            include_vdw: false,
            ..Default::default()
        };
        let r = decay_length_threshold(&g, &species, 19e-3, 44.0 * species.linewidth, 6.6e-3, &opts)
            .unwrap();
        assert!(r.is_none());
    }

    #[test]
    fn mirror_radius_closed_form() {
        let pot = potential(15.2, 44.0, &PotentialOptions::optical_only());
        let e = fall_energy();
        let r = effective_mirror_radius(&pot, 335e-6, e).unwrap();
        let closed = effective_mirror_radius_optical(pot.u0, 335e-6, e);
        assert!((r / closed - 1.0).abs() < 1e-6);
        // Doubling the power adds w² ln2 / 2 to r².
        let r2 = effective_mirror_radius(&pot.scaled(2.0), 335e-6, e).unwrap();
        let extra = 335e-6f64.powi(2) * 2f64.ln() / 2.0;
        assert!(((r2 * r2 - r * r) / extra - 1.0).abs() < 1e-5);
        let with_vdw = potential(15.2, 44.0, &PotentialOptions::default());
        let rv = effective_mirror_radius(&with_vdw, 335e-6, e).unwrap();
        assert!(rv < r && rv > 0.4e-3 && rv < 0.5e-3, "{rv}");
        assert_eq!(effective_mirror_radius(&pot.scaled(1e-4), 335e-6, e).unwrap(), 0.0);
    }

    #[test]
    fn fraction_closed_forms() {
        let s = 1e-3;
        let f = bounce_fraction(s, 0.0, s).unwrap();
        assert!((f - (1.0 - (-0.5f64).exp())).abs() < 1e-12);
        assert_eq!(bounce_fraction(s, 0.0, f64::INFINITY).unwrap(), 1.0);
        assert_eq!(bounce_fraction(s, 0.0, 0.0).unwrap(), 0.0);
        // Quadrature path against the closed form with a negligible offset.
        let q = bounce_fraction(s, 1e-12, 0.7 * s).unwrap();
        let c = bounce_fraction(s, 0.0, 0.7 * s).unwrap();
        assert!((q - c).abs() < 1e-9);
    }

    #[test]
    fn fraction_monotone() {
        let s = 1.2e-3;
        let mut last = 0.0;
        for r in [0.1e-3, 0.3e-3, 0.5e-3, 1e-3] {
            let f = bounce_fraction(s, 0.5e-3, r).unwrap();
            assert!(f > last);
            last = f;
        }
        let mut last = 1.0;
        for d in [0.0, 0.5e-3, 1e-3, 2e-3] {
            let f = bounce_fraction(s, d, 0.45e-3).unwrap();
            assert!(f < last || d == 0.0);
            last = f;
        }
    }

    #[test]
    fn fraction_depends_on_intensity_over_detuning() {
        // Optical potential only: u0 ∝ I/δ, so scaling both leaves the fraction unchanged.
        let species = rb();
        let opts = PotentialOptions::optical_only();
        let e = fall_energy();
        let sigma = cloud_sigma_at(0.3e-3, 10e-6, species.mass, 0.0367);
        let frac = |power: f64, delta: f64| {
            let g = geometry(15.2).with_power(power).unwrap();
            let field = EwField::new(&g, &species, delta * species.linewidth).unwrap();
            let pot = MirrorPotential::from_field(&field, &species, 1.51, &opts).unwrap();
            let r = effective_mirror_radius(&pot, 335e-6, e).unwrap();
            bounce_fraction(sigma, 0.0, r).unwrap()
        };
        let a = frac(19e-3, 44.0);
        let b = frac(38e-3, 88.0);
        assert!((a / b - 1.0).abs() < 1e-9, "{a} {b}");
    }
}
