//! The verification harness. Every experiment returns a [`Report`](crate::report::Report).

pub mod free_product;
pub mod gaffney;
pub mod hardy;
pub mod identities;
pub mod heat;
pub mod lemmas;
pub mod maximal;
pub mod pseudo;
pub mod sweep;

/// `max / min` of positive values; infinite if any value is zero or not finite.
pub fn band_ratio(values: &[f64]) -> f64 {
    if values.is_empty() || values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return f64::INFINITY;
    }
    let (lo, hi) = spread(values);
    hi / lo
}

/// `(min, max)`.
pub fn spread(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}
