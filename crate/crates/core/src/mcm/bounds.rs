use std::f64::consts::E;

use super::oracle::bad_sequence_oracle;
use crate::block_encoding::{BlockEncoding, DeviationProfile};
use crate::error::{Error, Result};
use crate::linalg::{opnorm, Bits};

fn check_bound_args(k: usize, p: usize, c: f64) -> Result<f64> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("K must be at least 2, got {k}")));
    }
    if p == 0 || p > 16 {
        return Err(Error::InvalidArgument(format!("p must be in 1..=16, got {p}")));
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::InvalidArgument(format!("c must be positive, got {c}")));
    }
    Ok((1u64 << p) as f64)
}

/// `r = (c²(K-1) / (K² 2^p))^{2^p}`, the ratio the bound's geometric series
/// needs to be at most ½.
pub fn macg_regime_r(k: usize, p: usize, c: f64) -> Result<f64> {
    let period = check_bound_args(k, p, c)?;
    let k = k as f64;
    Ok((c * c * (k - 1.0) / (k * k * period)).powf(period))
}

/// `2 e^c (e c² / (K 2^p))^{2^p}`.
pub fn macg_bound(k: usize, p: usize, c: f64) -> Result<f64> {
    let period = check_bound_args(k, p, c)?;
    let r = macg_regime_r(k, p, c)?;
    if r > 0.5 {
        return Err(Error::BoundRegime(r));
    }
    Ok(2.0 * c.exp() * (E * c * c / (k as f64 * period)).powf(period))
}

/// Smallest `K >= 1` with `K >= (e c² / 2^p) (2/ε)^{1/2^p}`.
pub fn min_k_for_eps(eps: f64, p: usize, c: f64) -> Result<usize> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    let period = check_bound_args(2, p, c)?;
    let v = E * c * c / period * (2.0 / eps).powf(1.0 / period);
    let k = if (v - v.round()).abs() <= 1e-12 * v.max(1.0) { v.round() } else { v.ceil() };
    Ok((k as usize).max(1))
}

/// Number of maximal blocks of ones.
pub fn runs(x: &Bits) -> usize {
    let s = x.as_slice();
    (0..s.len()).filter(|&i| s[i] && (i == 0 || !s[i - 1])).count()
}

fn measured_sx(encodings: &[BlockEncoding], x: &Bits) -> Result<(f64, f64)> {
    let s = bad_sequence_oracle(encodings, x)?;
    let eta = DeviationProfile::measure(encodings).eta_max;
    Ok((opnorm(&s)?, eta))
}

/// `(‖S_x‖, η_max^{2|x|} (1 + η_max)^K)` with `η_max` measured.
pub fn seqnorm_bound_check(encodings: &[BlockEncoding], x: &Bits) -> Result<(f64, f64)> {
    let (norm, eta) = measured_sx(encodings, x)?;
    let bound = eta.powi(2 * x.weight() as i32) * (1.0 + eta).powi(encodings.len() as i32);
    Ok((norm, bound))
}

/// `(‖S_x‖, η_max^{2·runs(x)})`.
///
/// Every entry into or exit from the bad subspace passes through an
/// off-diagonal block of some `U_i - I`, which has norm at most `η_i`; all
/// other factors are contractions.
pub fn seqnorm_runs_bound(encodings: &[BlockEncoding], x: &Bits) -> Result<(f64, f64)> {
    let (norm, eta) = measured_sx(encodings, x)?;
    Ok((norm, eta.powi(2 * runs(x) as i32)))
}
