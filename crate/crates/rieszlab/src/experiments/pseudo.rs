//! Positivity of `J_k` and the gradient domination constant of the
//! pseudo-gradient `N_p`.

use rayon::prelude::*;
use rieszlab_core::functionals::pseudo_gradient;
use rieszlab_core::markov::MarkovOperator;
use rieszlab_core::Space;
use serde::{Deserialize, Serialize};

use super::band_ratio;
use crate::probes;
use crate::report::{Report, Table};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PseudoParams {
    pub p_list: Vec<f64>,
    pub samples: usize,
    pub k_max: usize,
    pub seed: u64,
    pub positivity_slack: f64,
    pub band: f64,
}

impl Default for PseudoParams {
    fn default() -> Self {
        Self {
            p_list: vec![1.2, 1.5, 2.0],
            samples: 100,
            k_max: 50,
            seed: 0,
            positivity_slack: 1e-12,
            band: 2.0,
        }
    }
}

/// Per `p`: `min J_k` over random nonnegative `f` and `k <= k_max`, and the
/// domination constant `max_f max_x |grad u_k|^2 / (A N_p)` for each `k`.
pub fn verify_pseudo_gradient(space: &Space, graph_name: &str, params: &PseudoParams) -> Report {
    let mut report = Report::new("pseudo-gradient")
        .with_graph(graph_name)
        .with_seed(params.seed)
        .with_parameters(params);
    report.timed(|report| {
        let n = space.vertex_count();
        let graph = space.graph();
        let op = MarkovOperator::new(graph);
        let mut rng = probes::rng(params.seed);
        let inputs: Vec<Vec<f64>> = (0..params.samples).map(|_| probes::uniform(n, &mut rng)).collect();
        let mut table = Table::new("domination", &["p", "k", "C", "min_J"]);
        for &p in &params.p_list {
            // results[f][k - 1] = (min J_k, C_k)
            let results: Vec<Vec<(f64, f64)>> = inputs
                .par_iter()
                .map(|f| {
                    let mut u = f.clone();
                    let mut out = Vec::with_capacity(params.k_max);
                    for k in 1..=params.k_max {
                        if k > 1 {
                            u = op.apply(&u).expect("length");
                        }
                        let pg = pseudo_gradient(graph, p, &u, 1).expect("nonnegative input");
                        let min_j = pg.j.iter().copied().fold(f64::INFINITY, f64::min);
                        out.push((min_j, pg.domination_constant));
                    }
                    out
                })
                .collect();
            let mut min_j = f64::INFINITY;
            let mut constants = Vec::with_capacity(params.k_max);
            for k in 0..params.k_max {
                let (mut lo, mut c) = (f64::INFINITY, 0.0f64);
                for r in &results {
                    lo = lo.min(r[k].0);
                    c = c.max(r[k].1);
                }
                min_j = min_j.min(lo);
                constants.push(c);
                table.push(vec![p, (k + 1) as f64, c, lo]);
            }
            report.check_at_most(
                &format!("positivity p={p}"),
                "J_k = P(u^p) - (P u)^p >= 0 for nonnegative f",
                -min_j,
                params.positivity_slack,
            );
            report.check_at_most(
                &format!("domination band p={p}"),
                "|grad P^{k-1} f|^2 <= C A N_p(P^{k-1} f) with C uniform in k",
                band_ratio(&constants),
                params.band,
            );
        }
        report.tables.push(table);
    });
    report
}
