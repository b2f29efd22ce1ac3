//! Exact identities of the discrete calculus, and agreement of the series and
//! spectral routes for functions of `Delta`.

use anyhow::Result;
use rieszlab_core::calculus::{
    codifferential, differential, form_inner, fractional_laplacian, inverse_laplacian_power, resolvent,
    resolvent_sqrt, riesz_transform, Calculus, EdgeFunction, OneForm,
};
use rieszlab_core::markov::MarkovOperator;
use rieszlab_core::series::{mean_zero_radius_bound, BinomialSeries, MAX_TERMS};
use rieszlab_core::spectral::SpectralDecomposition;
use rieszlab_core::vecops::{norm2, project_mean_zero};
use rieszlab_core::{Space, WeightedGraph};
use serde::{Deserialize, Serialize};

use crate::probes;
use crate::report::{Report, Table};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct IdentityParams {
    pub samples: usize,
    pub seed: u64,
    pub exact_tol: f64,
    pub identity_tol: f64,
    pub isometry_tol: f64,
}

impl Default for IdentityParams {
    fn default() -> Self {
        Self {
            samples: 100,
            seed: 0,
            exact_tol: 1e-12,
            identity_tol: 1e-10,
            isometry_tol: 1e-8,
        }
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn sup(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |s, v| s.max(v.abs()))
}

/// Random antisymmetric edge function.
fn random_form(graph: &WeightedGraph, rng: &mut rand_chacha::ChaCha8Rng) -> Result<OneForm> {
    let raw = EdgeFunction::from_slots(graph, probes::gaussian(EdgeFunction::zeros(graph).values().len(), rng))?;
    let anti = EdgeFunction::from_fn(graph, |x, y| {
        raw.get(graph, x, y).unwrap_or(0.0) - raw.get(graph, y, x).unwrap_or(0.0)
    });
    Ok(OneForm::new(graph, anti)?)
}

/// `d*d = Delta` on indicators; adjointness, energy, the Hodge projection
/// `d Delta^{-1} d* (df) = df` and the Riesz `L^2` isometry on random inputs.
pub fn calculus_identities(space: &Space, graph_name: &str, params: &IdentityParams) -> Report {
    let mut report = Report::new("calculus-identities")
        .with_graph(graph_name)
        .with_seed(params.seed)
        .with_parameters(params);
    let mut outcome = Ok(());
    report.timed(|report| outcome = run_identities(report, space, params));
    if let Err(e) = outcome {
        report.note(format!("error: {e}"));
        report.check_at_most("completed", "all identities evaluated", 1.0, 0.0);
    }
    report
}

fn run_identities(report: &mut Report, space: &Space, params: &IdentityParams) -> Result<()> {
    let graph = space.graph();
    let n = space.vertex_count();
    let m = space.measure();
    let op = MarkovOperator::new(graph);
    let mut basis = 0.0f64;
    for z in 0..n {
        let mut e = vec![0.0; n];
        e[z] = 1.0;
        let lhs = codifferential(graph, &differential(graph, &e)?);
        let pe = op.apply(&e)?;
        let delta: Vec<f64> = e.iter().zip(&pe).map(|(a, b)| a - b).collect();
        basis = basis.max(max_abs_diff(&lhs, &delta));
    }
    report.check_at_most("d*d", "d*d 1_z = Delta 1_z for every vertex z", basis, params.exact_tol);

    let sd = SpectralDecomposition::new(graph)?;
    let calc = Calculus::Spectral(&sd);
    let mut rng = probes::rng(params.seed);
    let (mut adjoint, mut energy, mut hodge, mut isometry) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..params.samples {
        let f = probes::gaussian(n, &mut rng);
        let form = random_form(graph, &mut rng)?;
        let df = differential(graph, &f)?;

        let lhs = form_inner(graph, &df, &form);
        let dstar = codifferential(graph, &form);
        let rhs: f64 = f.iter().zip(&dstar).zip(m).map(|((a, b), w)| a * b * w).sum();
        let scale = (form_inner(graph, &df, &df) * form_inner(graph, &form, &form)).sqrt();
        adjoint = adjoint.max((lhs - rhs).abs() / scale);

        let e = form_inner(graph, &df, &df);
        let lf = codifferential(graph, &df);
        let q: f64 = f.iter().zip(&lf).zip(m).map(|((a, b), w)| a * b * w).sum();
        energy = energy.max((e - q).abs() / e);

        let (h, _) = inverse_laplacian_power(graph, &calc, 1.0, &lf)?;
        let back = differential(graph, &h)?;
        let norm = form_inner(graph, &df, &df).sqrt();
        let diff: Vec<f64> = back.values().iter().zip(df.values()).map(|(a, b)| a - b).collect();
        let diff = OneForm::new(graph, EdgeFunction::from_slots(graph, diff)?)?;
        hodge = hodge.max(form_inner(graph, &diff, &diff).sqrt() / norm);

        let riesz = riesz_transform(graph, &calc, &f)?;
        let mut g = f.clone();
        project_mean_zero(&mut g, m);
        let target = norm2(&g, m);
        let got = form_inner(graph, &riesz.form, &riesz.form).sqrt();
        isometry = isometry.max((got - target).abs() / target);
    }
    report.check_at_most("adjointness", "<df, F> = <f, d*F>", adjoint, params.identity_tol);
    report.check_at_most("energy", "||df||^2 = <Delta f, f>", energy, params.identity_tol);
    report.check_at_most("hodge", "d Delta^{-1} d* (df) = df", hodge, params.identity_tol);
    report.check_at_most("isometry", "||d Delta^{-1/2} f|| = ||f - mean f||", isometry, params.isometry_tol);
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct AgreementParams {
    pub s_list: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub series_tol: f64,
    pub tolerance: f64,
}

impl Default for AgreementParams {
    fn default() -> Self {
        Self {
            s_list: vec![0.1, 1.0, 10.0],
            samples: 10,
            seed: 0,
            series_tol: 1e-10,
            tolerance: 1e-8,
        }
    }
}

/// Relative sup-norm discrepancy between the series and spectral routes for
/// `(I + s Delta)^{-1}`, `(I + s Delta)^{-1/2}` and `Delta^{1/2}`.
pub fn spectral_series_agreement(space: &Space, graph_name: &str, params: &AgreementParams) -> Report {
    let mut report = Report::new("spectral-vs-series")
        .with_graph(graph_name)
        .with_seed(params.seed)
        .with_parameters(params);
    let mut outcome = Ok(());
    report.timed(|report| outcome = run_agreement(report, space, params));
    if let Err(e) = outcome {
        report.note(format!("error: {e}"));
        report.check_at_most("completed", "all operators evaluated", 1.0, 0.0);
    }
    report
}

fn run_agreement(report: &mut Report, space: &Space, params: &AgreementParams) -> Result<()> {
    let graph = space.graph();
    let n = space.vertex_count();
    let sd = SpectralDecomposition::new(graph)?;
    let exact = Calculus::Spectral(&sd);
    let radius = mean_zero_radius_bound(graph);
    let series = Calculus::Series {
        tol: params.series_tol,
        mean_zero_radius: Some(radius),
    };
    let mut rng = probes::rng(params.seed);
    let inputs: Vec<Vec<f64>> = (0..params.samples).map(|_| probes::gaussian(n, &mut rng)).collect();
    let terms = |s: &BinomialSeries, r: f64| {
        s.truncate(r, params.series_tol, MAX_TERMS)
            .map_or(f64::NAN, |t| t.coefficients.len() as f64)
    };

    let mut table = Table::new("discrepancy", &["operator", "s", "terms", "discrepancy"]);
    let mut worst = 0.0f64;
    let mut measure = |op: f64, s: f64, len: f64, f: &dyn Fn(&Calculus, &[f64]) -> Result<Vec<f64>>| -> Result<()> {
        let mut d = 0.0f64;
        for x in &inputs {
            let a = f(&series, x)?;
            let b = f(&exact, x)?;
            d = d.max(max_abs_diff(&a, &b) / sup(&b).max(f64::MIN_POSITIVE));
        }
        table.push(vec![op, s, len, d]);
        worst = worst.max(d);
        Ok(())
    };
    for &s in &params.s_list {
        measure(0.0, s, terms(&BinomialSeries::resolvent(s), 1.0), &|c, x| {
            Ok(resolvent(graph, c, s, x)?)
        })?;
        measure(1.0, s, terms(&BinomialSeries::resolvent_sqrt(s), 1.0), &|c, x| {
            Ok(resolvent_sqrt(graph, c, s, x)?)
        })?;
    }
    measure(
        2.0,
        0.0,
        terms(&BinomialSeries::inverse_laplacian_power(0.5), radius),
        &|c, x| Ok(fractional_laplacian(graph, c, 0.5, x)?),
    )?;
    report.note("operator 0: (I + s Delta)^{-1}; 1: (I + s Delta)^{-1/2}; 2: Delta^{1/2}");
    report.tables.push(table);
    report.check_at_most(
        "agreement",
        "series and spectral routes agree at the declared truncation",
        worst,
        params.tolerance,
    );
    Ok(())
}
