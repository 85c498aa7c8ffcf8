//! Physical constants (CODATA 2018 exact or recommended values) in SI units.

use std::f64::consts::PI;

pub const HBAR: f64 = 1.054_571_817e-34;
pub const PLANCK: f64 = 2.0 * PI * HBAR;
pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

/// Standard gravity used throughout the simulator.
pub const GRAVITY: f64 = 9.81;
