//! Statistics of the tent-space atomic decomposition and the molecular
//! pipeline over seeded random inputs.

use anyhow::Result;
use rand::Rng;
use rieszlab_core::functionals::{t2_norm, TentField};
use rieszlab_core::hardy::{
    check_molecule, check_tent_atom, estimate_doubling_exponent, molecular_decompose, riesz_hardy_map,
    tent_atomic_decompose, MolecularDecomposition, MolecularOptions,
};
use rieszlab_core::spectral::SpectralDecomposition;
use rieszlab_core::Space;
use serde::{Deserialize, Serialize};

use super::band_ratio;
use crate::probes;
use crate::report::{Report, Table};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct TentParams {
    pub seeds: Vec<u64>,
    pub k_max: usize,
    pub residual_tol: f64,
    pub band: f64,
}

impl Default for TentParams {
    fn default() -> Self {
        Self {
            seeds: (0..20).collect(),
            k_max: 8,
            residual_tol: 1e-8,
            band: 2.0,
        }
    }
}

/// Decomposes random fields uniform on `[-1, 1]` and checks the round trip,
/// the atom certificates and the spread of `sum |lambda| / ||F||_{T^1}`.
pub fn tent_round_trip(space: &Space, graph_name: &str, params: &TentParams) -> Result<Report> {
    let mut report = Report::new("tent-round-trip").with_graph(graph_name).with_parameters(params);
    let mut outcome = Ok(());
    report.timed(|report| {
        outcome = (|| {
            let table = space.rho_table();
            let n = space.vertex_count();
            let mut rows = Table::new("seeds", &["seed", "atoms", "relative_residual", "efficiency", "invalid"]);
            let (mut worst, mut invalid_total, mut efficiencies) = (0.0f64, 0usize, Vec::new());
            for &seed in &params.seeds {
                let mut rng = probes::rng(seed);
                let values = (0..n * params.k_max).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let field = TentField::from_values(n, params.k_max, values)?;
                let dec = tent_atomic_decompose(space, &table, &field)?;
                let relative = dec.residual / t2_norm(space, &field)?;
                let invalid = dec
                    .atoms
                    .iter()
                    .filter(|a| !check_tent_atom(space, &table, a).is_valid())
                    .count();
                worst = worst.max(relative);
                invalid_total += invalid;
                efficiencies.push(dec.efficiency());
                rows.push(vec![
                    seed as f64,
                    dec.atoms.len() as f64,
                    relative,
                    dec.efficiency(),
                    invalid as f64,
                ]);
            }
            report.tables.push(rows);
            report.check_at_most("residual", "||F - sum lambda a||_{T2} <= tol ||F||_{T2}", worst, params.residual_tol);
            report.check_at_most("certificates", "every atom passes its certificate", invalid_total as f64, 0.0);
            report.check_at_most(
                "efficiency band",
                "sum |lambda| / ||F||_{T1} stable across seeds",
                band_ratio(&efficiencies),
                params.band,
            );
            Ok(())
        })();
    });
    outcome.map(|_| report)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct MolecularParams {
    pub betas: Vec<f64>,
    pub eps: f64,
    pub tol: f64,
    pub samples: usize,
    pub seed: u64,
    pub band: f64,
    /// Also run the Riesz transform map into form molecules.
    pub forms: bool,
}

impl Default for MolecularParams {
    fn default() -> Self {
        Self {
            betas: vec![0.5, 1.0],
            eps: 1.0,
            tol: 1e-6,
            samples: 20,
            seed: 0,
            band: 2.0,
            forms: false,
        }
    }
}

fn record(table: &mut Table, label: f64, sample: usize, space: &Space, dec: &MolecularDecomposition) -> (f64, usize, f64) {
    let invalid = dec
        .molecules
        .iter()
        .filter(|mol| !check_molecule(space, mol).is_valid())
        .count();
    let max_l1 = dec.max_l1(space);
    table.push(vec![
        label,
        sample as f64,
        dec.molecules.len() as f64,
        dec.relative_residual,
        dec.closed_loop_error,
        dec.lambda_sum(),
        max_l1,
        invalid as f64,
    ]);
    (dec.relative_residual, invalid, max_l1)
}

/// Runs the molecular decomposition on random mean-zero inputs for every
/// `beta`, and optionally the Riesz map (`label = -1` in the table).
pub fn molecular_pipeline(space: &Space, graph_name: &str, params: &MolecularParams) -> Result<Report> {
    let mut report = Report::new("molecular-pipeline")
        .with_graph(graph_name)
        .with_seed(params.seed)
        .with_parameters(params);
    let mut outcome = Ok(());
    report.timed(|report| {
        outcome = (|| {
            let table = space.rho_table();
            let sd = SpectralDecomposition::new(space.graph())?;
            let d0 = estimate_doubling_exponent(space)?;
            report.note(format!("doubling exponent estimate {d0:.4}"));
            let m = space.measure();
            let mut rng = probes::rng(params.seed);
            let inputs: Vec<Vec<f64>> = (0..params.samples)
                .map(|_| probes::mean_zero(probes::uniform(m.len(), &mut rng), m))
                .collect();
            let mut rows = Table::new(
                "samples",
                &["beta", "sample", "molecules", "relative_residual", "closed_loop", "lambda_sum", "max_l1", "invalid"],
            );
            let mut runs: Vec<(String, f64)> = params.betas.iter().map(|b| (format!("beta={b}"), *b)).collect();
            if params.forms {
                runs.push(("riesz".into(), -1.0));
            }
            for (name, beta) in runs {
                let mut opts = MolecularOptions::new(beta.max(0.5), params.eps, params.tol);
                opts.doubling_exponent = Some(d0);
                let (mut worst, mut invalid, mut l1) = (0.0f64, 0usize, Vec::new());
                for (i, f) in inputs.iter().enumerate() {
                    let dec = if beta < 0.0 {
                        riesz_hardy_map(space, &table, &sd, f, &opts)?
                    } else {
                        molecular_decompose(space, &table, &sd, f, &opts)?
                    };
                    let (r, bad, a) = record(&mut rows, beta, i, space, &dec);
                    worst = worst.max(r);
                    invalid += bad;
                    l1.push(a);
                }
                report.check_at_most(
                    &format!("reconstruction {name}"),
                    "||f - sum lambda pi(A)||_2 <= tol ||f||_2",
                    worst,
                    params.tol,
                );
                report.check_at_most(
                    &format!("molecules {name}"),
                    "every emitted molecule passes its check",
                    invalid as f64,
                    0.0,
                );
                report.check_at_most(
                    &format!("l1 band {name}"),
                    "max ||a||_1 over molecules stable across inputs",
                    band_ratio(&l1),
                    params.band,
                );
            }
            report.tables.push(rows);
            Ok(())
        })();
    });
    outcome.map(|_| report)
}
