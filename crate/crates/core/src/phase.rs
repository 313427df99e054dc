//! Two-segment hypoexponential (generalized Erlang) fitting.
//!
//! A target distribution with mean `m` and coefficient of variation
//! `v in (0, 1]` is represented as `k = ceil(1/v^2)` consecutive exponential
//! phases split into two Erlang segments of `ceil(k/2)` and `floor(k/2)`
//! phases with one rate each. The segment means are fixed by matching the
//! coefficient of variation of the combined distribution with the first
//! segment's mean normalized to one, then rescaled to the target mean.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// A fitted two-segment hypoexponential distribution.
///
/// Phases `1..=k_star` carry `rate_a`, phases `k_star+1..=k` carry `rate_b`.
/// For `cv = 1` the fit degenerates to a single exponential phase with
/// `rate_a == rate_b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseTypeSpec {
    pub k: u32,
    pub k_star: u32,
    /// 1/min, phases 1..=k_star.
    pub rate_a: f64,
    /// 1/min, phases k_star+1..=k.
    pub rate_b: f64,
    pub target_mean: f64,
    pub target_cv: f64,
}

impl PhaseTypeSpec {
    /// Exit rate of phase `i` (1-based).
    pub fn rate(&self, i: u32) -> f64 {
        if i <= self.k_star {
            self.rate_a
        } else {
            self.rate_b
        }
    }
}

/// Minimum number of exponential phases needed to reach `cv`.
pub fn phase_count(cv: f64) -> Result<u32> {
    if !(cv > 0.0) {
        return Err(Error::invalid(format!(
            "coefficient of variation must be positive, got {cv}"
        )));
    }
    if cv > 1.0 {
        return Err(Error::UnsupportedCv { cv });
    }
    Ok((1.0 / (cv * cv)).ceil() as u32)
}

/// Fits phase count, split and the two segment rates to `(mean, cv)`.
pub fn fit_hypoexp(mean: f64, cv: f64) -> Result<PhaseTypeSpec> {
    if !(mean > 0.0) {
        return Err(Error::invalid(format!("mean must be positive, got {mean}")));
    }
    let k = phase_count(cv)?;
    if k == 1 {
        let rate = 1.0 / mean;
        return Ok(PhaseTypeSpec {
            k: 1,
            k_star: 1,
            rate_a: rate,
            rate_b: rate,
            target_mean: mean,
            target_cv: cv,
        });
    }
    let k1 = k.div_ceil(2);
    let k2 = k - k1;
    let (k1f, k2f) = (f64::from(k1), f64::from(k2));
    let v2 = cv * cv;
    let disc = k1f * k2f * (v2 * (k1f + k2f) - 1.0);
    if disc < 0.0 {
        return Err(Error::FitFailed {
            mean,
            cv,
            reason: format!("negative discriminant {disc} for k1={k1}, k2={k2}"),
        });
    }
    let den = k1f * (1.0 - v2 * k2f);
    if den <= 0.0 {
        return Err(Error::FitFailed {
            mean,
            cv,
            reason: format!("non-positive denominator {den} for k1={k1}, k2={k2}"),
        });
    }
    // mean of the second artificial Erlang segment, with the first fixed to 1
    let e2_star = (k1f * k2f * v2 + disc.sqrt()) / den;
    let e1 = mean / (1.0 + e2_star);
    let e2 = mean * e2_star / (1.0 + e2_star);
    Ok(PhaseTypeSpec {
        k,
        k_star: k1,
        rate_a: k1f / e1,
        rate_b: k2f / e2,
        target_mean: mean,
        target_cv: cv,
    })
}

/// Realized mean and coefficient of variation of a fitted spec.
pub fn moments(spec: &PhaseTypeSpec) -> (f64, f64) {
    let mut mean = 0.0;
    let mut var = 0.0;
    for i in 1..=spec.k {
        let r = spec.rate(i);
        mean += 1.0 / r;
        var += 1.0 / (r * r);
    }
    (mean, var.sqrt() / mean)
}

/// Draws one duration: the sum of `k` independent exponentials with the
/// per-phase rates. Strictly positive.
pub fn sample<R: Rng + ?Sized>(spec: &PhaseTypeSpec, rng: &mut R) -> f64 {
    let mut total = 0.0;
    for i in 1..=spec.k {
        // u in [0, 1); 1-u in (0, 1] keeps ln finite
        let u: f64 = rng.random();
        total += -(1.0 - u).ln() / spec.rate(i);
    }
    total
}
