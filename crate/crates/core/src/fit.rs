//! Ordinary least-squares line fits, used for every exponent estimate.

use alloc::format;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Result of fitting `y = slope * x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// `sqrt(SSR / (n - 2))`; zero for two points.
    pub residual_std_error: f64,
    /// Standard error of the slope.
    pub slope_std_error: f64,
    pub points: usize,
}

impl LineFit {
    /// Half-width of a ~95% interval for the slope (normal approximation).
    pub fn slope_interval(&self) -> (f64, f64) {
        let h = 1.96 * self.slope_std_error;
        (self.slope - h, self.slope + h)
    }
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            expected: xs.len(),
            found: ys.len(),
        });
    }
    let n = xs.len();
    if n == 0 {
        return Err(Error::EmptySample);
    }
    if n < 2 {
        return Err(Error::DegenerateFit(format!("{n} point(s)")));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if !(sxx > 0.0) {
        return Err(Error::DegenerateFit(format!("all abscissae equal {mx}")));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    let dof = (n as f64 - 2.0).max(1.0);
    let residual_std_error = if n > 2 { (ssr / dof).sqrt() } else { 0.0 };
    Ok(LineFit {
        slope,
        intercept,
        residual_std_error,
        slope_std_error: residual_std_error / sxx.sqrt(),
        points: n,
    })
}

/// Fits `log y` against `log x`; every value must be positive.
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if let Some(v) = xs.iter().chain(ys).find(|v| !(**v > 0.0)) {
        return Err(Error::DegenerateFit(format!("nonpositive value {v} in log-log fit")));
    }
    let lx: alloc::vec::Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: alloc::vec::Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    fit_line(&lx, &ly)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let f = fit_line(&[0.0, 1.0, 2.0, 3.0], &[1.0, 3.0, 5.0, 7.0]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14);
        assert!((f.intercept - 1.0).abs() < 1e-14);
        assert!(f.residual_std_error < 1e-14);
    }

    #[test]
    fn power_law() {
        let xs = [1.0, 2.0, 4.0, 8.0, 16.0];
        let ys: alloc::vec::Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-0.5)).collect();
        let f = fit_loglog(&xs, &ys).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-12);
    }

    #[test]
    fn residual_error_matches_hand_value() {
        // Points (0,0), (1,1), (2,0): slope 0, intercept 1/3, SSR = 2/3, dof 1.
        let f = fit_line(&[0.0, 1.0, 2.0], &[0.0, 1.0, 0.0]).unwrap();
        assert!(f.slope.abs() < 1e-15);
        assert!((f.residual_std_error - (2.0f64 / 3.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(fit_line(&[], &[]).unwrap_err(), Error::EmptySample);
        assert!(matches!(fit_line(&[1.0, 1.0], &[0.0, 1.0]), Err(Error::DegenerateFit(_))));
        assert!(fit_loglog(&[1.0, 0.0], &[1.0, 1.0]).is_err());
    }
}
