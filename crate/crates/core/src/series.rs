//! Matrix-free functional calculus by power series in `P`.
//!
//! A function `phi(P) = sum_k c_k P^k` is truncated after `L` terms once the
//! remainder bound `sum_{k > L} |c_k| r^k` drops below the tolerance, where
//! `r` bounds the spectral radius of `P` on the inputs (`r = 1` in general,
//! smaller on mean-zero functions).

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::markov::MarkovOperator;
use crate::vecops::{check_len, norm2, project_mean_zero};

/// Hard cap on truncation length.
pub const MAX_TERMS: usize = 5_000_000;

/// `prefactor * (1 - q z)^(-a)`, expanded as `sum_k c_k z^k` with
/// `c_{k+1} = c_k (a + k) / (k + 1) q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinomialSeries {
    pub prefactor: f64,
    pub q: f64,
    pub a: f64,
}

/// A truncated series with the certified bound on what was dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct Truncation {
    pub coefficients: Vec<f64>,
    /// Upper bound of `sum_{k >= len} |c_k| r^k`.
    pub tail_bound: f64,
}

impl BinomialSeries {
    /// `(I + s Delta)^{-1} = (1+s)^{-1} (I - s/(1+s) P)^{-1}`.
    pub fn resolvent(s: f64) -> Self {
        Self {
            prefactor: 1.0 / (1.0 + s),
            q: s / (1.0 + s),
            a: 1.0,
        }
    }

    /// `(I + s Delta)^{-1/2} = (1+s)^{-1/2} (I - s/(1+s) P)^{-1/2}`.
    pub fn resolvent_sqrt(s: f64) -> Self {
        Self {
            prefactor: (1.0 + s).powf(-0.5),
            q: s / (1.0 + s),
            a: 0.5,
        }
    }

    /// `Delta^{-a} = (I - P)^{-a}`; converges only on mean-zero inputs.
    pub fn inverse_laplacian_power(a: f64) -> Self {
        Self {
            prefactor: 1.0,
            q: 1.0,
            a,
        }
    }

    /// Leading `len` coefficients.
    pub fn coefficients(&self, len: usize) -> Vec<f64> {
        let mut c = Vec::with_capacity(len);
        let mut ck = self.prefactor;
        for k in 0..len {
            c.push(ck);
            ck *= (self.a + k as f64) / (k as f64 + 1.0) * self.q;
        }
        c
    }

    /// Shortest truncation whose remainder bound, with spectral radius bound
    /// `r`, is at most `tol`. `None` if the series does not converge at `r`
    /// or needs more than `max_terms` terms.
    pub fn truncate(&self, r: f64, tol: f64, max_terms: usize) -> Option<Truncation> {
        let qr = self.q.abs() * r;
        if !(qr < 1.0) && !(r == 0.0) {
            return None;
        }
        let mut coefficients = Vec::new();
        let mut ck = self.prefactor;
        let mut rk = 1.0;
        for k in 0..max_terms {
            coefficients.push(ck);
            let next = ck * (self.a + k as f64) / (k as f64 + 1.0) * self.q;
            rk *= r;
            // Successive term ratio beyond index k+1.
            let ratio = (qr * ((self.a + k as f64 + 1.0) / (k as f64 + 2.0)).abs()).max(qr);
            if ratio < 1.0 {
                let tail = next.abs() * rk / (1.0 - ratio);
                if tail <= tol {
                    return Some(Truncation {
                        coefficients,
                        tail_bound: tail,
                    });
                }
            }
            ck = next;
        }
        None
    }
}

/// Output of a series evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesOutput {
    pub value: Vec<f64>,
    pub terms: usize,
    /// Bound on `||dropped tail||_2 / ||f||_2`.
    pub tail_bound: f64,
}

/// `sum_k c_k P^k f` by Horner's rule.
pub fn polynomial_apply(graph: &WeightedGraph, coefficients: &[f64], f: &[f64]) -> Result<Vec<f64>> {
    check_len(graph.vertex_count(), f.len())?;
    let p = MarkovOperator::new(graph);
    let n = f.len();
    let Some((&last, rest)) = coefficients.split_last() else {
        return Ok(vec![0.0; n]);
    };
    let mut acc: Vec<f64> = f.iter().map(|v| last * v).collect();
    let mut tmp = vec![0.0; n];
    for &c in rest.iter().rev() {
        p.apply_into(&acc, &mut tmp);
        for ((a, t), v) in acc.iter_mut().zip(&tmp).zip(f) {
            *a = t + c * v;
        }
    }
    Ok(acc)
}

/// Evaluates `series(P) f` to relative accuracy `tol`, with `radius`
/// bounding the spectral radius of `P` on `f`.
pub fn series_apply(
    graph: &WeightedGraph,
    series: &BinomialSeries,
    f: &[f64],
    tol: f64,
    radius: f64,
) -> Result<SeriesOutput> {
    check_len(graph.vertex_count(), f.len())?;
    let trunc = series
        .truncate(radius, tol, MAX_TERMS)
        .ok_or_else(|| not_convergent(series, radius, tol))?;
    let value = polynomial_apply(graph, &trunc.coefficients, f)?;
    Ok(SeriesOutput {
        value,
        terms: trunc.coefficients.len(),
        tail_bound: trunc.tail_bound,
    })
}

fn not_convergent(series: &BinomialSeries, radius: f64, tol: f64) -> Error {
    let probe = MAX_TERMS.min(1 << 20);
    let c = series.coefficients(probe);
    let bound = c.last().map_or(f64::INFINITY, |v| v.abs() * radius.powf(probe as f64));
    Error::SeriesNotConvergent {
        tolerance: tol,
        terms: probe,
        bound: if series.q.abs() * radius >= 1.0 { f64::INFINITY } else { bound },
    }
}

/// Safe upper bound for `max |lambda|` over the mean-zero spectrum of `P`.
///
/// Power iteration on mean-zero vectors gives an estimate `lambda_est` from
/// below; the returned bound `1 - 0.9 (1 - lambda_est)` absorbs an
/// underestimate of the gap by up to 10%.
pub fn mean_zero_radius_bound(graph: &WeightedGraph) -> f64 {
    let n = graph.vertex_count();
    if n == 1 {
        return 0.0;
    }
    let m = graph.measure();
    let p = MarkovOperator::new(graph);
    let golden = 0.618_033_988_749_894_9;
    let mut u: Vec<f64> = (0..n)
        .map(|i| ((i as f64 + 1.0) * golden).fract() - 0.5 + 1e-3 * (i as f64).sin())
        .collect();
    project_mean_zero(&mut u, m);
    let mut pu = vec![0.0; n];
    let mut est = 0.0;
    let max_iter = 400_000;
    for it in 1..=max_iter {
        let nu = norm2(&u, m);
        if nu == 0.0 {
            return 0.0;
        }
        for v in u.iter_mut() {
            *v /= nu;
        }
        p.apply_into(&u, &mut pu);
        project_mean_zero(&mut pu, m);
        let new_est = norm2(&pu, m);
        let settled = (new_est - est).abs() <= 1e-13 * new_est.max(1e-300);
        est = new_est;
        core::mem::swap(&mut u, &mut pu);
        // Enough iterations for a gap-relative accuracy of a few percent.
        let needed = (4.0 / (1.0 - est).max(1e-12)) as usize;
        if it >= 50 && it >= needed && settled {
            break;
        }
        if it >= 50 && it >= 4 * needed {
            break;
        }
    }
    (1.0 - 0.9 * (1.0 - est.min(1.0))).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::{build, BuilderSpec};
    use crate::spectral::SpectralDecomposition;

    #[test]
    fn half_binomial_coefficients() {
        let c = BinomialSeries::inverse_laplacian_power(0.5).coefficients(6);
        let oracle: Vec<f64> = (0..6u64)
            .map(|k| {
                let binom = (1..=k).fold(1.0, |acc, i| acc * (k + i) as f64 / i as f64);
                binom / 4f64.powi(k as i32)
            })
            .collect();
        assert_eq!(&c[..4], &[1.0, 0.5, 0.375, 0.3125]);
        for (a, b) in c.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn resolvent_truncation_length() {
        let t = BinomialSeries::resolvent(1.0).truncate(1.0, 1e-8, MAX_TERMS).unwrap();
        // Coefficients 2^{-(k+1)}; tail after L terms is 2^{-L}.
        assert_eq!(t.coefficients.len(), 27);
        assert!(t.tail_bound <= 1e-8);
        assert!(BinomialSeries::inverse_laplacian_power(0.5).truncate(1.0, 1e-8, 1000).is_none());
    }

    #[test]
    fn identity_series() {
        let s = build(&BuilderSpec::cycle(5)).unwrap();
        let f = [1.0, 2.0, -1.0, 0.5, 3.0];
        assert_eq!(polynomial_apply(s.graph(), &[1.0], &f).unwrap(), f.to_vec());
    }

    #[test]
    fn radius_bound_dominates_exact() {
        for spec in [BuilderSpec::sierpinski(3), BuilderSpec::lattice(2, 8)] {
            let s = build(&spec).unwrap();
            let exact = SpectralDecomposition::new(s.graph()).unwrap().mean_zero_radius();
            let r = mean_zero_radius_bound(s.graph());
            assert!(r >= exact && r < 1.0, "{r} vs {exact}");
        }
    }

    #[test]
    fn divergent_series_reports_error() {
        let s = build(&BuilderSpec::cycle(5)).unwrap();
        let err = series_apply(s.graph(), &BinomialSeries::inverse_laplacian_power(0.5), &[0.0; 5], 1e-8, 1.0);
        assert!(matches!(err, Err(Error::SeriesNotConvergent { .. })));
    }
}
