//! Empirical constants of two scalar inequalities, on grids refined twice.
//!
//! * `(s/(1+s))^k <= C_m (1 + (1+k)/(1+s))^{-m}` for `s >= 0`, `k >= 0`.
//! * `(sum_k a_k^2 / k)^{1/2} <= C sum_k a_k / k` with
//!   `a_k = k^alpha (k+u)^{-2} (1 + r/(k+u))^{-N}`, `alpha < 2`.

use serde::{Deserialize, Serialize};

use crate::report::{Report, Table};

/// `count` points from `lo` to `hi`, evenly spaced in log scale.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

pub fn linear_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect()
}

/// Grid size after `level` halvings of the spacing.
fn refined(count: usize, level: u32) -> usize {
    (count - 1) * (1 << level) + 1
}

/// `max_{s in grid, 0 <= k <= k_max} (s/(1+s))^k (1 + (1+k)/(1+s))^m`.
pub fn expdecay_constant(m: i32, s_grid: &[f64], k_max: u32) -> f64 {
    let mut best = 0.0f64;
    for &s in s_grid {
        let q = (s / (1.0 + s)).ln();
        for k in 0..=k_max {
            let kf = k as f64;
            let v = (kf * q).exp() * (1.0 + (1.0 + kf) / (1.0 + s)).powi(m);
            best = best.max(v);
        }
    }
    best
}

/// `(a_x / x, a_x^2 / x)` at real `x`.
fn l2l1_terms(x: f64, r: f64, u: f64, alpha: f64, n: i32) -> (f64, f64) {
    let a = (alpha * x.ln()).exp() / ((x + u) * (x + u)) * (1.0 + r / (x + u)).powi(-n);
    (a / x, a * a / x)
}

/// `int_lo^inf g(x) dx` for both terms, by Simpson's rule in `t = ln x`.
fn l2l1_tail(lo: f64, r: f64, u: f64, alpha: f64, n: i32) -> (f64, f64) {
    const STEPS: usize = 2000;
    const SPAN: f64 = 60.0;
    let (t0, h) = (lo.ln(), SPAN / STEPS as f64);
    let (mut s1, mut s2) = (0.0, 0.0);
    for i in 0..=STEPS {
        let t = t0 + h * i as f64;
        let x = t.exp();
        let (g1, g2) = l2l1_terms(x, r, u, alpha, n);
        let w = if i == 0 || i == STEPS {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        s1 += w * g1 * x;
        s2 += w * g2 * x;
    }
    (s1 * h / 3.0, s2 * h / 3.0)
}

/// `(sum_k a_k^2 / k)^{1/2} / sum_k a_k / k`, summed exactly up to `terms`
/// and by quadrature beyond.
pub fn l2l1_ratio(r: f64, u: f64, alpha: f64, n: i32, terms: usize) -> f64 {
    let (mut s1, mut s2) = (0.0, 0.0);
    for k in 1..=terms {
        let (a, b) = l2l1_terms(k as f64, r, u, alpha, n);
        s1 += a;
        s2 += b;
    }
    let (t1, t2) = l2l1_tail(terms as f64 + 0.5, r, u, alpha, n);
    (s2 + t2).sqrt() / (s1 + t1)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct LemmaParams {
    pub m_list: Vec<i32>,
    /// Base `s` grid: `s_points` log-spaced values in `[s_min, s_max]`.
    pub s_min: f64,
    pub s_max: f64,
    pub s_points: usize,
    pub k_max: u32,
    /// Base `(r, u)` grid: zero plus log-spaced values in `[ru_min, ru_max]`.
    pub ru_min: f64,
    pub ru_max: f64,
    pub ru_points: usize,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub alpha_points: usize,
    pub n_exp: i32,
    pub terms: usize,
    /// Number of 2x refinements.
    pub refinements: u32,
    pub tolerance: f64,
}

impl Default for LemmaParams {
    fn default() -> Self {
        Self {
            m_list: vec![1, 2, 4],
            s_min: 0.1,
            s_max: 100.0,
            s_points: 4,
            k_max: 10_000,
            ru_min: 0.1,
            ru_max: 1000.0,
            ru_points: 5,
            alpha_min: -1.0,
            alpha_max: 1.5,
            alpha_points: 6,
            n_exp: 2,
            terms: 4096,
            refinements: 2,
            tolerance: 0.05,
        }
    }
}

fn relative_change(values: &[f64]) -> f64 {
    values
        .windows(2)
        .map(|w| (w[1] - w[0]).abs() / w[0].abs())
        .fold(0.0, f64::max)
}

pub fn lemma_grids(params: &LemmaParams) -> Report {
    let mut report = Report::new("lemma-grids").with_parameters(params);
    report.timed(|report| {
        let mut table = Table::new("expdecay", &["m", "level", "grid", "C"]);
        for &m in &params.m_list {
            let values: Vec<f64> = (0..=params.refinements)
                .map(|level| {
                    let count = refined(params.s_points, level);
                    let c = expdecay_constant(m, &log_grid(params.s_min, params.s_max, count), params.k_max);
                    table.push(vec![m as f64, level as f64, count as f64, c]);
                    c
                })
                .collect();
            report.check_at_most(
                &format!("expdecay m={m}"),
                "(s/(1+s))^k (1 + (1+k)/(1+s))^m bounded; stable under grid refinement",
                relative_change(&values),
                params.tolerance,
            );
        }
        report.tables.push(table);

        let mut table = Table::new("l2l1", &["level", "points", "C", "r", "u", "alpha"]);
        let values: Vec<f64> = (0..=params.refinements)
            .map(|level| {
                let mut ru = vec![0.0];
                ru.extend(log_grid(params.ru_min, params.ru_max, refined(params.ru_points, level)));
                let alphas = linear_grid(params.alpha_min, params.alpha_max, refined(params.alpha_points, level));
                let mut best = (0.0f64, 0.0, 0.0, 0.0);
                for &r in &ru {
                    for &u in &ru {
                        for &alpha in &alphas {
                            let c = l2l1_ratio(r, u, alpha, params.n_exp, params.terms);
                            if c > best.0 {
                                best = (c, r, u, alpha);
                            }
                        }
                    }
                }
                let points = ru.len() * ru.len() * alphas.len();
                table.push(vec![level as f64, points as f64, best.0, best.1, best.2, best.3]);
                best.0
            })
            .collect();
        report.check_at_most(
            "l2l1",
            "l2 sum bounded by C times the l1 sum uniformly in (r, u); stable under grid refinement",
            relative_change(&values),
            params.tolerance,
        );
        report.tables.push(table);
    });
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expdecay_limit() {
        // For large s the sup over k tends to sup_u e^{-u} (1+u)^m = m^m e^{1-m}.
        let c = expdecay_constant(2, &[1e6], 20_000_000 / 10);
        let limit = 4.0 * (-1f64).exp();
        assert!((c - limit).abs() / limit < 1e-3, "{c} vs {limit}");
    }

    #[test]
    fn l2l1_quadrature_matches_long_sum() {
        let short = l2l1_ratio(3.0, 7.0, 1.5, 2, 512);
        let long = l2l1_ratio(3.0, 7.0, 1.5, 2, 1 << 20);
        assert!((short - long).abs() / long < 1e-6, "{short} vs {long}");
    }
}
