//! Kernel exactness, the (UE) scan, on-diagonal exponents and the
//! analyticity constant.

use rand::seq::index::sample;
use rayon::prelude::*;
use rieszlab_core::fit::fit_loglog;
use rieszlab_core::markov::MarkovOperator;
use rieszlab_core::{Space, Vertex};
use serde::{Deserialize, Serialize};

use super::{band_ratio, spread};
use crate::probes;
use crate::report::{FitRecord, Report, Table};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ExactnessParams {
    pub sources: usize,
    pub steps: usize,
    pub seed: u64,
}

impl Default for ExactnessParams {
    fn default() -> Self {
        Self {
            sources: 50,
            steps: 200,
            seed: 0,
        }
    }
}

/// Stochasticity `|sum_y p_k(x,y) m(y) - 1|` and symmetry
/// `|p_k(x,y) - p_k(y,x)|` over sampled sources `x, y` and `k <= steps`.
pub fn kernel_exactness(space: &Space, graph_name: &str, params: &ExactnessParams) -> Report {
    let mut report = Report::new("kernel-exactness")
        .with_graph(graph_name)
        .with_seed(params.seed)
        .with_parameters(params);
    report.timed(|report| {
        let n = space.vertex_count();
        let mut rng = probes::rng(params.seed);
        let mut sources: Vec<Vertex> = sample(&mut rng, n, params.sources.min(n)).into_vec();
        sources.sort_unstable();
        let m = space.measure();
        let op = MarkovOperator::new(space.graph());
        // cross[i][k][j] = p_k(s_i, s_j).
        let results: Vec<(f64, Vec<Vec<f64>>)> = sources
            .par_iter()
            .map(|&s| {
                let field = op.kernel_rows(s, params.steps);
                let cross = (0..=params.steps)
                    .map(|k| sources.iter().map(|&t| field.get(k, t)).collect())
                    .collect();
                (field.mass_defect(m), cross)
            })
            .collect();
        let mass = results.iter().map(|r| r.0).fold(0.0, f64::max);
        let mut symmetry = 0.0f64;
        for i in 0..sources.len() {
            for j in 0..i {
                for k in 0..=params.steps {
                    symmetry = symmetry.max((results[i].1[k][j] - results[j].1[k][i]).abs());
                }
            }
        }
        report.check_at_most("stochasticity", "sum_y p_k(x,y) m(y) = 1", mass, 1e-12);
        report.check_at_most("symmetry", "p_k(x,y) = p_k(y,x)", symmetry, 1e-12);
    });
    report
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct UeParams {
    pub n_list: Vec<i32>,
    pub ks: Vec<usize>,
    /// Safe-zone margin factor: sources need `rho(x, boundary) >= margin * k`.
    pub margin: f64,
    pub max_sources: usize,
    /// Allowed `max/min` of the constants across `k`.
    pub band: f64,
    /// Marks the run as a negative control.
    pub negative_control: bool,
}

impl Default for UeParams {
    fn default() -> Self {
        Self {
            n_list: vec![0, 1, 2, 3, 4],
            ks: vec![4, 8, 16, 32, 64],
            margin: 4.0,
            max_sources: 8,
            band: 2.0,
            negative_control: false,
        }
    }
}

/// Evenly spaced subsample of `items` of size at most `count`.
pub(crate) fn spaced<T: Copy>(items: &[T], count: usize) -> Vec<T> {
    if items.len() <= count {
        return items.to_vec();
    }
    (0..count).map(|i| items[i * items.len() / count]).collect()
}

/// `C_N(k) = max_{x,y} p_{k-1}(x,y) V(x,k) (1 + rho(x,y)/k)^N` over safe
/// sources `x`; the verdict asks for `C_N` to stay in one band across `k`.
pub fn verify_ue(space: &Space, graph_name: &str, params: &UeParams) -> Report {
    let mut report = Report::new("verify-ue").with_graph(graph_name).with_parameters(params);
    report.timed(|report| {
        let k_min = params.ks.iter().copied().min().unwrap_or(1) as f64;
        let k_max = params.ks.iter().copied().max().unwrap_or(1);
        let safe = space.safe_zone(params.margin * k_min);
        let sources = spaced(&safe, params.max_sources);
        if sources.is_empty() {
            report.note("empty safe zone");
            report.control_at_most("nonempty-safe-zone", "safe zone has a vertex", 1.0, 0.0);
            return;
        }
        let op = MarkovOperator::new(space.graph());
        let rows: Vec<(Vertex, Vec<f64>, Vec<Vec<f64>>)> = sources
            .par_iter()
            .map(|&x| {
                let field = op.kernel_rows(x, k_max - 1);
                let rows = params.ks.iter().map(|&k| field.row(k - 1).to_vec()).collect();
                (x, space.rho_row(x), rows)
            })
            .collect();
        let mut table = Table::new("constants", &["k", "N", "C", "sources"]);
        for &n_exp in &params.n_list {
            let mut constants = Vec::new();
            for (ki, &k) in params.ks.iter().enumerate() {
                let kf = k as f64;
                let mut c = 0.0f64;
                let mut used = 0;
                for (x, rho, krows) in &rows {
                    if !space.is_safe(*x, params.margin * kf) {
                        continue;
                    }
                    used += 1;
                    let v = space.volume(*x, kf);
                    for (p, r) in krows[ki].iter().zip(rho) {
                        c = c.max(p * v * (1.0 + r / kf).powi(n_exp));
                    }
                }
                if used > 0 {
                    constants.push(c);
                    table.push(vec![kf, n_exp as f64, c, used as f64]);
                }
            }
            let ratio = band_ratio(&constants);
            let name = format!("band-N{n_exp}");
            let invariant = "p_{k-1}(x,y) V(x,k) (1+rho/k)^N bounded uniformly in k";
            if params.negative_control {
                report.control_at_most(&name, invariant, ratio, params.band);
            } else {
                report.check_at_most(&name, invariant, ratio, params.band);
            }
        }
        report.tables.push(table);
    });
    report
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct DiagonalParams {
    /// Empty means the central vertex.
    pub sources: Vec<Vertex>,
    pub ks: Vec<usize>,
    pub margin: f64,
    /// Expected slope and tolerance, if any.
    pub target: Option<f64>,
    pub tolerance: f64,
    /// Allowed `max/min` of `p_{2k}(x,x) V(x,k)`.
    pub band: f64,
}

impl Default for DiagonalParams {
    fn default() -> Self {
        Self {
            sources: Vec::new(),
            ks: vec![4, 8, 16, 32, 64, 128],
            margin: 4.0,
            target: None,
            tolerance: 0.05,
            band: 4.0,
        }
    }
}

/// Least-squares slope of `log p_{2k}(x,x)` against `log k` and the range of
/// `p_{2k}(x,x) V(x,k)`, over `(x, k)` pairs inside the safe zone.
pub fn fit_on_diagonal(space: &Space, graph_name: &str, params: &DiagonalParams) -> Report {
    let mut report = Report::new("fit-diagonal").with_graph(graph_name).with_parameters(params);
    report.timed(|report| {
        let k_max = params.ks.iter().copied().max().unwrap_or(1);
        let op = MarkovOperator::new(space.graph());
        let mut table = Table::new("diagonal", &["source", "k", "p_2k", "volume", "product"]);
        let (mut ks, mut ps, mut products) = (Vec::new(), Vec::new(), Vec::new());
        let sources = if params.sources.is_empty() {
            vec![probes::central_vertex(space)]
        } else {
            params.sources.clone()
        };
        let fields: Vec<_> = sources
            .par_iter()
            .map(|&x| (x, diagonal_values(&op, x, 2 * k_max)))
            .collect();
        for (x, diag) in &fields {
            let profile = space.volume_profile(*x);
            for &k in &params.ks {
                if !space.is_safe(*x, params.margin * k as f64) {
                    report.note(format!("skipped source {x} at k = {k}: outside the safe zone"));
                    continue;
                }
                let p = diag[2 * k];
                let v = profile.volume(k as f64);
                table.push(vec![*x as f64, k as f64, p, v, p * v]);
                ks.push(k as f64);
                ps.push(p);
                products.push(p * v);
            }
        }
        report.tables.push(table);
        let mut distinct = ks.clone();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        if distinct.len() < 5 {
            report.note(format!("slope fit uses {} distinct times; at least 5 are needed", distinct.len()));
        }
        match fit_loglog(&ks, &ps) {
            Ok(fit) => {
                report.fits.push(FitRecord::new("slope", &fit, params.target));
                if let Some(t) = params.target {
                    report.check_at_most(
                        "slope",
                        "p_2k(x,x) ~ k^{-D/beta}",
                        (fit.slope - t).abs(),
                        params.tolerance,
                    );
                }
            }
            Err(e) => report.note(format!("fit failed: {e}")),
        }
        let (lo, hi) = spread(&products);
        report.check_at_most("band", "p_2k(x,x) V(x,k) ~ 1", hi / lo, params.band);
    });
    report
}

/// `p_j(x,x)` for `j = 0..=steps` without storing the rows.
pub fn diagonal_values(op: &MarkovOperator, x: Vertex, steps: usize) -> Vec<f64> {
    let m = op.graph().measure();
    let mut row = vec![0.0; m.len()];
    row[x] = 1.0 / m[x];
    let mut next = vec![0.0; m.len()];
    let mut out = Vec::with_capacity(steps + 1);
    out.push(row[x]);
    for _ in 0..steps {
        op.apply_into(&row, &mut next);
        std::mem::swap(&mut row, &mut next);
        out.push(row[x]);
    }
    out
}

/// `max_k k ||Delta P^k f||_2 / ||f||_2` over `k` in `ks` and random `f`.
pub fn analyticity_constant(space: &Space, ks: &[usize], probes_count: usize, seed: u64) -> Table {
    let op = MarkovOperator::new(space.graph());
    let m = space.measure();
    let mut rng = probes::rng(seed);
    let mut table = Table::new("analyticity", &["k", "C"]);
    let k_max = ks.iter().copied().max().unwrap_or(0);
    let mut best = vec![0.0f64; k_max + 1];
    for _ in 0..probes_count {
        let f = probes::gaussian(m.len(), &mut rng);
        let norm = rieszlab_core::vecops::norm2(&f, m);
        let mut u = f;
        let mut pu = vec![0.0; m.len()];
        for (k, slot) in best.iter_mut().enumerate().skip(1) {
            op.apply_into(&u, &mut pu);
            // Delta P^k f = P^k f - P^{k+1} f with u = P^k f after the swap below.
            std::mem::swap(&mut u, &mut pu);
            let mut next = vec![0.0; m.len()];
            op.apply_into(&u, &mut next);
            let d: Vec<f64> = u.iter().zip(&next).map(|(a, b)| a - b).collect();
            *slot = slot.max(k as f64 * rieszlab_core::vecops::norm2(&d, m) / norm);
        }
    }
    for &k in ks {
        table.push(vec![k as f64, best[k]]);
    }
    table
}
