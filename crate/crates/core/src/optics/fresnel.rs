//! Field enhancement at a totally internally reflecting glass → vacuum interface.
//!
//! The transmission amplitudes for incidence from the dense side (index `n`)
//! past the critical angle are
//!
//! ```text
//! t_p = 2n cosθ / (cosθ + i n q)      t_s = 2n cosθ / (n cosθ + i q)
//! q   = sqrt(n² sin²θ − 1)
//! ```
//!
//! The enhancement `T` is the ratio of |E|² just outside the surface (all field
//! components) to the beam intensity inside the glass. For TM light the
//! evanescent field has both a normal and a tangential component, which gives
//! `T_TM = |t_p|² (2n² sin²θ − 1) / n`; for TE light `T_TE = |t_s|² / n`.

pub(crate) fn evanescent_q(n: f64, angle: f64) -> f64 {
    let s = n * angle.sin();
    (s * s - 1.0).max(0.0).sqrt()
}

pub(crate) fn t_p_squared(n: f64, angle: f64) -> f64 {
    let c = angle.cos();
    let q = evanescent_q(n, angle);
    4.0 * n * n * c * c / (c * c + n * n * q * q)
}

pub(crate) fn t_s_squared(n: f64, angle: f64) -> f64 {
    let c = angle.cos();
    let q = evanescent_q(n, angle);
    4.0 * n * n * c * c / (n * n * c * c + q * q)
}

pub(crate) fn enhancement_tm_raw(n: f64, angle: f64) -> f64 {
    let s = n * angle.sin();
    t_p_squared(n, angle) * (2.0 * s * s - 1.0) / n
}

pub(crate) fn enhancement_te_raw(n: f64, angle: f64) -> f64 {
    t_s_squared(n, angle) / n
}
