//! Local sup bound for `P^k h` by the maximal function of `|h|^2`.

use rayon::prelude::*;
use rieszlab_core::functionals::maximal_function;
use rieszlab_core::markov::MarkovOperator;
use rieszlab_core::Space;
use serde::{Deserialize, Serialize};

use super::heat::spaced;
use crate::probes;
use crate::report::{Report, Table};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct MaximalParams {
    pub samples: usize,
    pub ks: Vec<usize>,
    pub centers: usize,
    pub seed: u64,
    /// Allowed growth `max_k C(k) / C(k_min)`.
    pub band: f64,
}

impl Default for MaximalParams {
    fn default() -> Self {
        Self {
            samples: 50,
            ks: vec![1, 2, 4, 8, 16],
            centers: 16,
            seed: 0,
            band: 2.0,
        }
    }
}

/// `sup_{y in B(x,k)} |P^k h(y)| / inf_{z in B(x,k)} M(|h|^2)(z)^{1/2}` for one
/// `h`, maximized over the centers, for each `k`.
pub fn maximal_ratios(space: &Space, h: &[f64], ks: &[usize], centers: &[usize]) -> Vec<f64> {
    let op = MarkovOperator::new(space.graph());
    let squared: Vec<f64> = h.iter().map(|v| v * v).collect();
    let mf = maximal_function(space, &squared).expect("length");
    let mut ratios = vec![0.0f64; ks.len()];
    let mut u = h.to_vec();
    let mut done = 0;
    for (i, &k) in ks.iter().enumerate() {
        u = op.power_apply(&u, k - done).expect("length");
        done = k;
        for &x in centers {
            let ball = space.ball(x, k as f64);
            let lhs = ball.members.iter().map(|&y| u[y].abs()).fold(0.0, f64::max);
            let rhs = ball.members.iter().map(|&z| mf[z]).fold(f64::INFINITY, f64::min).sqrt();
            if rhs > 0.0 {
                ratios[i] = ratios[i].max(lhs / rhs);
            }
        }
    }
    ratios
}

pub fn verify_pk_maximal_bound(space: &Space, graph_name: &str, params: &MaximalParams) -> Report {
    let mut report = Report::new("pk-maximal")
        .with_graph(graph_name)
        .with_seed(params.seed)
        .with_parameters(params);
    report.timed(|report| {
        let n = space.vertex_count();
        let mut ks = params.ks.clone();
        ks.sort_unstable();
        let all: Vec<usize> = (0..n).collect();
        let centers = spaced(&all, params.centers);
        let mut rng = probes::rng(params.seed);
        let inputs: Vec<Vec<f64>> = (0..params.samples).map(|_| probes::gaussian(n, &mut rng)).collect();
        let per_input: Vec<Vec<f64>> = inputs
            .par_iter()
            .map(|h| maximal_ratios(space, h, &ks, &centers))
            .collect();
        let mut table = Table::new("constants", &["k", "C"]);
        let mut constants = Vec::with_capacity(ks.len());
        for (i, &k) in ks.iter().enumerate() {
            let c = per_input.iter().map(|r| r[i]).fold(0.0, f64::max);
            table.push(vec![k as f64, c]);
            constants.push(c);
        }
        let growth = match constants.first() {
            Some(&c0) if c0 > 0.0 => constants.iter().fold(0.0f64, |a, &c| a.max(c)) / c0,
            _ => f64::INFINITY,
        };
        report.check_at_most(
            "growth",
            "sup_B |P^k h| <= C inf_B M(|h|^2)^{1/2} with C uniform in k",
            growth,
            params.band,
        );
        report.tables.push(table);
    });
    report
}
