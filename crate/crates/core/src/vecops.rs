//! Small dense-vector helpers shared by the numerical modules.

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::LengthMismatch { expected, found });
    }
    Ok(())
}

/// `<f, g>_m = sum f g m`.
pub(crate) fn inner_m(f: &[f64], g: &[f64], m: &[f64]) -> f64 {
    f.iter().zip(g).zip(m).map(|((a, b), w)| a * b * w).sum()
}

/// `||f||_{L^p(m)}`; `p = f64::INFINITY` gives the sup norm.
pub fn norm_p(f: &[f64], m: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return f.iter().fold(0.0, |acc, v| acc.max(v.abs()));
    }
    let s: f64 = f
        .iter()
        .zip(m)
        .map(|(v, w)| v.abs().powf(p) * w)
        .sum();
    s.powf(1.0 / p)
}

pub fn norm2(f: &[f64], m: &[f64]) -> f64 {
    inner_m(f, f, m).sqrt()
}

/// m-weighted mean of `f`.
pub fn mean(f: &[f64], m: &[f64]) -> f64 {
    let total: f64 = m.iter().sum();
    f.iter().zip(m).map(|(a, w)| a * w).sum::<f64>() / total
}

/// Subtracts the m-weighted mean in place and returns it.
pub fn project_mean_zero(f: &mut [f64], m: &[f64]) -> f64 {
    let c = mean(f, m);
    for v in f.iter_mut() {
        *v -= c;
    }
    c
}
