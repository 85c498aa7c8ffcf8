use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("refractive index {0} does not allow total internal reflection (need n > 1)")]
    InvalidMedium(f64),
    #[error("angle {angle} rad is not above the critical angle {critical} rad")]
    SubcriticalAngle { angle: f64, critical: f64 },
    #[error("detuning must be nonzero")]
    ResonantDetuning,
    #[error("red (or zero) detuning {0} rad/s gives no mirror barrier")]
    RedDetuning(f64),
    #[error("{name} must be {requirement}, got {value}")]
    InvalidParameter {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("height {z} m is below the evaluation cutoff {z_min} m")]
    BelowCutoff { z: f64, z_min: f64 },
    #[error("atom with energy {energy:e} J does not bounce (barrier {barrier:e} J)")]
    NoBounce { energy: f64, barrier: f64 },
    #[error("no {what} threshold found within the search range")]
    ThresholdNotFound { what: &'static str },
    #[error("root bracketing failed at p = {p:e} kg m/s")]
    RootBracketing { p: f64 },
    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e}")]
    Quadrature { estimate: f64, error: f64 },
    #[error("integrator step size collapsed at z = {z:e} m (t = {t:e} s, step {step:e} s)")]
    StepCollapse { z: f64, t: f64, step: f64 },
    #[error("Bloch integration failed at t = {t:e} s after {steps} steps (step {step:e} s)")]
    BlochDiverged { t: f64, steps: usize, step: f64 },
    #[error("fit needs at least {needed} points on each side of the bounce, got {before} before and {after} after")]
    InsufficientPoints {
        needed: usize,
        before: usize,
        after: usize,
    },
    #[error("least-squares fit is rank deficient")]
    RankDeficient,
    #[error("no signal in the centroid region")]
    NoSignal,
    #[error("systematics correction already applied to this fit")]
    AlreadyCorrected,
    #[error("line crossing: hyperfine line F'={f_prime} has detuning {detuning:e} rad/s <= 0")]
    LineCrossing { f_prime: u8, detuning: f64 },
    #[error("config: {0}")]
    Config(String),
}

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            requirement: "positive and finite",
            value,
        })
    }
}
