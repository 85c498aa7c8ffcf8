//! Simulator for cold atoms bouncing on an evanescent-wave atom mirror.
//!
//! The crate predicts how many evanescent photons an atom scatters during one
//! bounce (and hence the horizontal radiation-pressure kick), simulates whole
//! atom clouds falling onto the mirror, and runs a synthetic imaging pipeline
//! that measures the kick the same way a camera-based experiment would.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod budget;
pub mod config;
pub mod constants;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod mirror;
pub mod numerics;
pub mod optics;
pub mod reference;
pub mod verify;

pub use error::{Error, Result};
