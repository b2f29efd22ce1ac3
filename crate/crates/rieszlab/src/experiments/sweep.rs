//! Probed `L^p` norms of the Riesz transform along a family of growing graphs.

use anyhow::Result;
use rayon::prelude::*;
use rieszlab_core::builders::build;
use rieszlab_core::calculus::{riesz_transform, Calculus};
use rieszlab_core::fit::fit_loglog;
use rieszlab_core::spectral::SpectralDecomposition;
use rieszlab_core::vecops::norm_p;
use rieszlab_core::Space;
use serde::{Deserialize, Serialize};

use crate::probes;
use crate::report::{FitRecord, Report, Table};
use crate::spec::parse_family;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProbeKind {
    Rademacher,
    Gaussian,
    BallIndicator,
    VertexAtom,
    E1Atom,
}

impl ProbeKind {
    pub const ALL: [ProbeKind; 5] = [
        ProbeKind::Rademacher,
        ProbeKind::Gaussian,
        ProbeKind::BallIndicator,
        ProbeKind::VertexAtom,
        ProbeKind::E1Atom,
    ];

    fn code(self) -> f64 {
        self as u8 as f64
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepParams {
    /// Graph recipes in increasing size.
    pub graphs: Vec<String>,
    pub p_list: Vec<f64>,
    /// Probes of each kind per graph; the total is five times this.
    pub probes_per_kind: usize,
    pub seed: u64,
    /// Largest `n` evaluated by dense eigendecomposition; bigger graphs use the series.
    pub spectral_max_n: usize,
    pub series_tol: f64,
    pub slope_max: f64,
    pub isometry_tol: f64,
}

impl Default for SweepParams {
    fn default() -> Self {
        Self {
            graphs: (3..=6).map(|l| format!("sierpinski:{l}")).collect(),
            p_list: vec![1.1, 1.3, 1.5, 1.7, 2.0],
            probes_per_kind: 4,
            seed: 0,
            spectral_max_n: 1500,
            series_tol: 1e-10,
            slope_max: 0.05,
            isometry_tol: 1e-8,
        }
    }
}

/// Mean-zero probes of every kind, seeded per graph.
pub fn probe_set(space: &Space, per_kind: usize, seed: u64) -> Vec<(ProbeKind, Vec<f64>)> {
    let n = space.vertex_count();
    let m = space.measure();
    let mut rng = probes::rng(seed);
    let center = probes::central_vertex(space);
    let diameter = space.metric().diameter();
    // Vertices from the center out to the boundary, and radii from one step
    // up to a quarter of the diameter.
    let mut by_distance: Vec<usize> = (0..n).collect();
    let rho = space.rho_row(center);
    by_distance.sort_by(|&a, &b| rho[a].total_cmp(&rho[b]).then(a.cmp(&b)));
    let vertices: Vec<usize> = (0..per_kind)
        .map(|i| by_distance[i * (n - 1) / (per_kind - 1).max(1)])
        .collect();
    let radii: Vec<f64> = (0..per_kind)
        .map(|i| {
            let t = if per_kind > 1 { i as f64 / (per_kind - 1) as f64 } else { 0.0 };
            (diameter / 4.0).max(1.0).powf(t).max(1.0)
        })
        .collect();
    let mut out = Vec::with_capacity(5 * per_kind);
    for _ in 0..per_kind {
        out.push((ProbeKind::Rademacher, probes::mean_zero(probes::rademacher(n, &mut rng), m)));
    }
    for _ in 0..per_kind {
        out.push((ProbeKind::Gaussian, probes::mean_zero(probes::gaussian(n, &mut rng), m)));
    }
    for &r in &radii {
        out.push((ProbeKind::BallIndicator, probes::ball_indicator(space, center, r)));
    }
    for &x in &vertices {
        out.push((ProbeKind::VertexAtom, probes::vertex_atom(space, x)));
    }
    for &r in &radii {
        out.push((ProbeKind::E1Atom, probes::e1_atom(space, center, r)));
    }
    out
}

/// For every graph, `max_f ||grad Delta^{-1/2} f||_p / ||f||_p` over the
/// probes; the verdict asks the log-log slope against `n` to stay below
/// `slope_max` for each `p`, and the `p = 2` ratio to be one.
pub fn riesz_lp_sweep(family_name: &str, params: &SweepParams) -> Result<Report> {
    let mut report = Report::new("riesz-sweep")
        .with_graph(family_name)
        .with_seed(params.seed)
        .with_parameters(params);
    let mut failure = None;
    report.timed(|report| {
        let mut table = Table::new("ratios", &["graph", "n", "p", "probe", "kind", "ratio"]);
        let mut maxima = Table::new("maxima", &["graph", "n", "p", "ratio", "kind"]);
        let mut isometry_gap = 0.0f64;
        let mut per_p: Vec<Vec<(f64, f64)>> = vec![Vec::new(); params.p_list.len()];
        for (gi, recipe) in params.graphs.iter().enumerate() {
            let space = match parse_family(recipe).and_then(|s| Ok(build(&s)?)) {
                Ok(s) => s,
                Err(e) => {
                    failure = Some(e);
                    return;
                }
            };
            let n = space.vertex_count();
            let graph = space.graph();
            let sd = if n <= params.spectral_max_n {
                Some(SpectralDecomposition::new(graph).expect("eigendecomposition"))
            } else {
                None
            };
            let calc = match &sd {
                Some(sd) => Calculus::Spectral(sd),
                None => Calculus::series_for(graph, params.series_tol),
            };
            let probes = probe_set(&space, params.probes_per_kind, params.seed.wrapping_add(gi as u64));
            let ratios: Vec<Vec<f64>> = probes
                .par_iter()
                .map(|(_, f)| {
                    let out = riesz_transform(graph, &calc, f).expect("riesz transform");
                    let pointwise = out.form.pointwise_norm(graph);
                    params
                        .p_list
                        .iter()
                        .map(|&p| norm_p(&pointwise, space.measure(), p) / norm_p(f, space.measure(), p))
                        .collect()
                })
                .collect();
            for (pi, &p) in params.p_list.iter().enumerate() {
                let mut best = (0.0f64, ProbeKind::Rademacher);
                for (qi, (kind, _)) in probes.iter().enumerate() {
                    let r = ratios[qi][pi];
                    table.push(vec![gi as f64, n as f64, p, qi as f64, kind.code(), r]);
                    if r > best.0 {
                        best = (r, *kind);
                    }
                    if p == 2.0 {
                        isometry_gap = isometry_gap.max((r - 1.0).abs());
                    }
                }
                maxima.push(vec![gi as f64, n as f64, p, best.0, best.1.code()]);
                per_p[pi].push((n as f64, best.0));
            }
        }
        for (pi, &p) in params.p_list.iter().enumerate() {
            let (ns, rs): (Vec<f64>, Vec<f64>) = per_p[pi].iter().copied().unzip();
            match fit_loglog(&ns, &rs) {
                Ok(fit) => {
                    report.fits.push(FitRecord::new(&format!("slope p={p}"), &fit, None));
                    report.check_at_most(
                        &format!("slope p={p}"),
                        "max probed Riesz ratio bounded uniformly in n",
                        fit.slope,
                        params.slope_max,
                    );
                }
                Err(e) => report.note(format!("fit at p = {p} failed: {e}")),
            }
        }
        if params.p_list.contains(&2.0) {
            report.check_at_most(
                "isometry",
                "||grad Delta^{-1/2} f||_2 = ||f||_2 on mean-zero f",
                isometry_gap,
                params.isometry_tol,
            );
        }
        report.note("probe kinds: 0 Rademacher, 1 Gaussian, 2 ball indicator, 3 vertex atom, 4 E1 atom");
        report.tables.push(table);
        report.tables.push(maxima);
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(report),
    }
}
