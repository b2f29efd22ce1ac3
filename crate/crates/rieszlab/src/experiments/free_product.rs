//! The free product of two graphs with different walk dimensions.
//!
//! Three checks: (a) the product kernel factorizes into the factor kernels,
//! (b) the on-diagonal exponent is the sum of the factor exponents, and
//! (c) no single walk dimension collapses the off-diagonal decay along both
//! factor directions, while one exponent per factor does.

use anyhow::Result;
use rieszlab_core::builders::{build, free_product};
use rieszlab_core::fit::{fit_line, fit_loglog, LineFit};
use rieszlab_core::markov::{KernelField, MarkovOperator};
use rieszlab_core::{Space, Vertex};
use serde::{Deserialize, Serialize};

use crate::probes;
use crate::report::{FitRecord, Report, Table};
use crate::spec::{describe, parse_family};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct FreeProductParams {
    pub first: String,
    pub second: String,
    /// Sources in each factor; `None` picks the central vertex.
    pub source_first: Option<Vertex>,
    pub source_second: Option<Vertex>,
    /// On-diagonal times `k`, evaluated at `2k`.
    pub ks: Vec<usize>,
    /// Volume and walk exponents `(D_i, m_i)` of the factors.
    pub first_exponents: (f64, f64),
    pub second_exponents: (f64, f64),
    pub factorization_tol: f64,
    pub slope_tol: f64,
    /// Times used for the off-diagonal collapse.
    pub collapse_ks: Vec<usize>,
    /// Off-diagonal points need `d <= d_ratio * k` and `d^{m_i} >= k`.
    pub d_ratio: f64,
    /// Required ratio of single-exponent to two-exponent RMS residuals.
    pub residual_ratio: f64,
}

impl Default for FreeProductParams {
    fn default() -> Self {
        Self {
            first: "lattice:2:41".into(),
            second: "sierpinski:5".into(),
            source_first: None,
            source_second: Some(0),
            ks: vec![4, 8, 16, 32, 64],
            first_exponents: (2.0, 2.0),
            second_exponents: (3f64.log2(), 5f64.log2()),
            factorization_tol: 1e-12,
            slope_tol: 0.07,
            collapse_ks: vec![8, 12, 16, 24, 32, 48, 64, 96, 128],
            d_ratio: 1.0,
            residual_ratio: 3.0,
        }
    }
}

impl FreeProductParams {
    /// `-(D_1/m_1 + D_2/m_2)`.
    pub fn target_slope(&self) -> f64 {
        let (d1, m1) = self.first_exponents;
        let (d2, m2) = self.second_exponents;
        -(d1 / m1 + d2 / m2)
    }

    /// The single walk dimension `m` with `(D_1 + D_2)/m = D_1/m_1 + D_2/m_2`.
    pub fn matched_m(&self) -> f64 {
        let (d1, _) = self.first_exponents;
        let (d2, _) = self.second_exponents;
        -(d1 + d2) / self.target_slope()
    }
}

/// Points `(log t, log q)` of one factor direction.
#[derive(Debug, Default, Clone)]
struct Direction {
    /// `(k, d, q)` with `q = -log(p_k(x, y) / p_k(x, x))`.
    samples: Vec<(f64, f64, f64)>,
}

impl Direction {
    fn points(&self, m: f64) -> (Vec<f64>, Vec<f64>) {
        self.samples
            .iter()
            .map(|&(k, d, q)| ((d.powf(m) / k).ln(), q.ln()))
            .unzip()
    }
}

fn ssr(fit: &LineFit, xs: &[f64], ys: &[f64]) -> f64 {
    xs.iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - fit.slope * x - fit.intercept;
            r * r
        })
        .sum()
}

/// Largest kernel value over each sphere `{d_i(x_i, y_i) = d}` of one factor,
/// with the other coordinate held at the source.
fn sphere_maxima(row: &[f64], spheres: &[Vec<Vertex>], index: impl Fn(Vertex) -> Vertex) -> Vec<f64> {
    spheres
        .iter()
        .map(|s| s.iter().map(|&y| row[index(y)]).fold(0.0, f64::max))
        .collect()
}

/// Spheres around `x` up to, not including, the nearest boundary vertex other than `x`.
fn spheres(space: &Space, x: Vertex) -> Vec<Vec<Vertex>> {
    let dist = space.graph().bfs_distances(x);
    let reach = dist.iter().copied().filter(|&d| d != u32::MAX).max().unwrap_or(0);
    let wall = space
        .boundary()
        .iter()
        .filter(|&&b| b != x)
        .map(|&b| dist[b])
        .min()
        .unwrap_or(reach + 1);
    let max = (wall.min(reach + 1) as usize).saturating_sub(1);
    let mut out = vec![Vec::new(); max + 1];
    for (y, &d) in dist.iter().enumerate() {
        if (d as usize) <= max {
            out[d as usize].push(y);
        }
    }
    out
}

pub fn free_product_experiment(params: &FreeProductParams) -> Result<Report> {
    let spec1 = parse_family(&params.first)?;
    let spec2 = parse_family(&params.second)?;
    let s1 = build(&spec1)?;
    let s2 = build(&spec2)?;
    let graph_name = format!("product({},{})", describe(&spec1), describe(&spec2));
    let mut report = Report::new("free-product").with_graph(&graph_name).with_parameters(params);
    let mut outcome = Ok(());
    report.timed(|report| outcome = run(report, params, &s1, &s2));
    outcome.map(|_| report)
}

fn run(report: &mut Report, params: &FreeProductParams, s1: &Space, s2: &Space) -> Result<()> {
    let x1 = params.source_first.unwrap_or_else(|| probes::central_vertex(s1));
    let x2 = params.source_second.unwrap_or_else(|| probes::central_vertex(s2));
    let product = free_product(s1, s2)?;
    let (n1, n2) = (s1.vertex_count(), s2.vertex_count());
    let source = x1 * n2 + x2;
    let steps = params
        .ks
        .iter()
        .map(|k| 2 * k)
        .chain(params.collapse_ks.iter().copied())
        .max()
        .unwrap_or(0);
    report.note(format!(
        "product has {} vertices; source ({x1}, {x2}) = {source}; {steps} steps",
        product.vertex_count()
    ));

    let f1: KernelField = MarkovOperator::new(s1.graph()).kernel_rows(x1, steps);
    let f2: KernelField = MarkovOperator::new(s2.graph()).kernel_rows(x2, steps);
    let spheres1 = spheres(s1, x1);
    let spheres2 = spheres(s2, x2);

    let op = MarkovOperator::new(product.graph());
    let m = product.measure();
    let mut row = vec![0.0; m.len()];
    row[source] = 1.0 / m[source];
    let mut next = vec![0.0; m.len()];

    let mut factorization = Table::new("factorization", &["k", "gap"]);
    let mut diagonal = Vec::with_capacity(steps + 1);
    let mut off = Table::new("off-diagonal", &["direction", "k", "d", "q"]);
    let mut directions = [Direction::default(), Direction::default()];
    let mut worst = 0.0f64;
    for k in 0..=steps {
        if k > 0 {
            op.apply_into(&row, &mut next);
            std::mem::swap(&mut row, &mut next);
        }
        let (r1, r2) = (f1.row(k), f2.row(k));
        let gap = (0..n1)
            .flat_map(|y1| (0..n2).map(move |y2| (y1, y2)))
            .map(|(y1, y2)| (row[y1 * n2 + y2] - r1[y1] * r2[y2]).abs())
            .fold(0.0, f64::max);
        worst = worst.max(gap);
        factorization.push(vec![k as f64, gap]);
        diagonal.push(row[source]);

        if params.collapse_ks.contains(&k) {
            let center = row[source];
            let maxima = [
                sphere_maxima(&row, &spheres1, |y1| y1 * n2 + x2),
                sphere_maxima(&row, &spheres2, |y2| x1 * n2 + y2),
            ];
            let exps = [params.first_exponents.1, params.second_exponents.1];
            for (i, values) in maxima.iter().enumerate() {
                for (d, &v) in values.iter().enumerate().skip(1) {
                    let (kf, df) = (k as f64, d as f64);
                    if v <= 0.0 || df > params.d_ratio * kf || df.powf(exps[i]) < kf {
                        continue;
                    }
                    let q = -(v / center).ln();
                    if q > 0.0 {
                        off.push(vec![i as f64, kf, df, q]);
                        directions[i].samples.push((kf, df, q));
                    }
                }
            }
        }
    }
    report.tables.push(factorization);
    report.check_at_most(
        "factorization",
        "p_k(x,y) = p1_k(x1,y1) p2_k(x2,y2)",
        worst,
        params.factorization_tol,
    );

    // (b) On-diagonal exponent.
    let mut diag = Table::new("diagonal", &["k", "p_2k", "p1_2k", "p2_2k"]);
    let ks: Vec<f64> = params.ks.iter().map(|&k| k as f64).collect();
    let ps: Vec<f64> = params.ks.iter().map(|&k| diagonal[2 * k]).collect();
    for &k in &params.ks {
        diag.push(vec![k as f64, diagonal[2 * k], f1.get(2 * k, x1), f2.get(2 * k, x2)]);
    }
    report.tables.push(diag);
    let target = params.target_slope();
    let fit = fit_loglog(&ks, &ps)?;
    report.fits.push(FitRecord::new("diagonal slope", &fit, Some(target)));
    report.check_at_most(
        "diagonal slope",
        "p_2k(x,x) ~ k^{-(D1/m1 + D2/m2)}",
        (fit.slope - target).abs(),
        params.slope_tol,
    );
    let (d1, m1) = params.first_exponents;
    let (d2, m2) = params.second_exponents;
    let fitted_m = -(d1 + d2) / fit.slope;
    report.note(format!(
        "matched single exponent m = (D1+D2)/|slope|: {fitted_m:.4} from the fit, {:.4} from the factor exponents",
        params.matched_m()
    ));
    report.note(format!(
        "the form (D1+D2)/(m1/D1 + m2/D2) = {:.4} does not reproduce the on-diagonal exponent",
        (d1 + d2) / (m1 / d1 + m2 / d2)
    ));

    // (c) Off-diagonal collapse.
    report.tables.push(off);
    let m_single = params.matched_m();
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for dir in &directions {
        let (x, y) = dir.points(m_single);
        xs.extend(x);
        ys.extend(y);
    }
    let total = xs.len() as f64;
    let single = fit_line(&xs, &ys)?;
    let single_rms = (ssr(&single, &xs, &ys) / total).sqrt();
    report.fits.push(FitRecord::new("collapse single m", &single, None));
    let mut two_ssr = 0.0;
    for (i, (dir, mi)) in directions.iter().zip([m1, m2]).enumerate() {
        let (x, y) = dir.points(mi);
        let fit = fit_line(&x, &y)?;
        two_ssr += ssr(&fit, &x, &y);
        report.fits.push(FitRecord::new(&format!("collapse direction {}", i + 1), &fit, None));
    }
    let two_rms = (two_ssr / total).sqrt();
    report.note(format!(
        "collapse RMS residuals: single m = {m_single:.4}: {single_rms:.4e}; two exponents: {two_rms:.4e}; {} points",
        xs.len()
    ));
    report.check_at_most(
        "no single m",
        "two-exponent residual at most 1/3 of the best single-m residual",
        two_rms / single_rms,
        1.0 / params.residual_ratio,
    );
    Ok(())
}
