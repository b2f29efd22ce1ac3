//! Atoms and molecules on `Gamma` and on `T_Gamma`, and the decomposition
//! pipelines that produce them.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::synthesis::{check_eta, default_eta, synthesis_k_max, synthesis_multiplier, weighted_slab_sum};
use super::tent::{tent_atomic_decompose, TentDecomposition};
use crate::calculus::{codifferential, differential, form_inner, riesz_transform, Calculus, OneForm};
use crate::error::{Error, Result};
use crate::functionals::{lp_transform, TentField};
use crate::graph::Vertex;
use crate::markov::MarkovOperator;
use crate::metric::{RhoTable, Space};
use crate::spectral::SpectralDecomposition;
use crate::vecops::{check_len, norm2, norm_p, project_mean_zero};

/// Why [`check_e1_atom`] rejected its input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum E1Clause {
    Support,
    Norm,
}

/// `a = (I - P^k) b` with `b` supported in `B(x, r)` and
/// `||b||_{L^2(B)} <= V(B)^{-1/2}`; `k = ceil(r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct E1Certificate {
    pub violated: Option<E1Clause>,
    pub norm: f64,
    pub bound: f64,
    pub k: usize,
    pub a: Vec<f64>,
}

impl E1Certificate {
    pub fn is_valid(&self) -> bool {
        self.violated.is_none()
    }
}

pub fn check_e1_atom(space: &Space, b: &[f64], center: Vertex, radius: f64) -> Result<E1Certificate> {
    check_len(space.vertex_count(), b.len())?;
    let m = space.measure();
    let ball = space.ball(center, radius);
    let inside = crate::metric::indicator(b.len(), &ball.members);
    let support_ok = b.iter().zip(&inside).all(|(v, &i)| i || *v == 0.0);
    let norm = ball.members.iter().map(|&y| b[y] * b[y] * m[y]).sum::<f64>().sqrt();
    let bound = ball.volume.powf(-0.5);
    let k = radius.ceil().max(1.0) as usize;
    let pk = MarkovOperator::new(space.graph()).power_apply(b, k)?;
    let a = b.iter().zip(&pk).map(|(x, y)| x - y).collect();
    let violated = if !support_ok {
        Some(E1Clause::Support)
    } else if norm > bound * (1.0 + 1e-10) {
        Some(E1Clause::Norm)
    } else {
        None
    };
    Ok(E1Certificate {
        violated,
        norm,
        bound,
        k,
        a,
    })
}

/// Function molecules `a = [I - (I + k Delta)^{-1}] b` and form molecules
/// `a = sqrt(k) d (I + k Delta)^{-1/2} b`.
#[derive(Debug, Clone, PartialEq)]
pub enum MoleculeValue {
    Function(Vec<f64>),
    Form(OneForm),
}

/// An `eps`-molecule on the ball `(center, k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Molecule {
    pub eps: f64,
    pub center: Vertex,
    pub k: f64,
    pub b: Vec<f64>,
    pub a: MoleculeValue,
}

/// `(||b||_{L^2(C_j(x,k))}, V(x, 2^j k))` for `j = 0, 1, ...` until the
/// annuli leave the graph.
pub fn annular_norms(space: &Space, center: Vertex, k: f64, b: &[f64]) -> Vec<(f64, f64)> {
    let m = space.measure();
    let row = space.rho_row(center);
    let far = row.iter().copied().fold(0.0, f64::max);
    let mut out = Vec::new();
    for j in 0u32.. {
        let (inner, outer) = space.annulus_radii(k, j);
        if j > 0 && inner > far {
            break;
        }
        let sq: f64 = row
            .iter()
            .enumerate()
            .filter(|(_, &d)| d >= inner && d < outer)
            .map(|(y, _)| b[y] * b[y] * m[y])
            .sum();
        let r = (j as f64).exp2() * k;
        let vol: f64 = row.iter().zip(m).filter(|(&d, _)| d < r).map(|(_, w)| w).sum();
        out.push((sq.sqrt(), vol));
    }
    out
}

/// `max_j ||b||_{L^2(C_j)} 2^{j eps} V(x, 2^j k)^{1/2}`; `b` is a molecule
/// exactly when this is at most 1.
pub fn molecule_constant(space: &Space, center: Vertex, k: f64, eps: f64, b: &[f64]) -> (f64, usize) {
    annular_norms(space, center, k, b)
        .into_iter()
        .enumerate()
        .map(|(j, (norm, vol))| (norm * (j as f64 * eps).exp2() * vol.sqrt(), j))
        .fold((0.0, 0), |best, cur| if cur.0 > best.0 { cur } else { best })
}

/// Result of [`check_molecule`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoleculeCheck {
    /// `max_j ||b||_{C_j} / (2^{-j eps} V(x,2^j k)^{-1/2})`.
    pub worst_margin: f64,
    pub worst_j: usize,
    /// `||a||_{L^1}` (of `|a_x|_{T_x}` for forms).
    pub l1_norm: f64,
}

impl MoleculeCheck {
    pub fn is_valid(&self) -> bool {
        self.worst_margin <= 1.0 + 1e-10
    }
}

pub fn check_molecule(space: &Space, mol: &Molecule) -> MoleculeCheck {
    let (worst_margin, worst_j) = molecule_constant(space, mol.center, mol.k, mol.eps, &mol.b);
    let m = space.measure();
    let l1_norm = match &mol.a {
        MoleculeValue::Function(a) => norm_p(a, m, 1.0),
        MoleculeValue::Form(a) => a.norm_p(space.graph(), 1.0),
    };
    MoleculeCheck {
        worst_margin,
        worst_j,
        l1_norm,
    }
}

/// Parameters of the molecular pipelines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MolecularOptions {
    pub beta: f64,
    pub eps: f64,
    /// Relative reconstruction tolerance.
    pub tol: f64,
    /// Defaults to `ceil(d0/2 + eps + beta) + 2`.
    pub eta: Option<u32>,
    /// Fitted doubling exponent `d0`; estimated from the graph if absent.
    pub doubling_exponent: Option<f64>,
}

impl MolecularOptions {
    pub fn new(beta: f64, eps: f64, tol: f64) -> Self {
        Self {
            beta,
            eps,
            tol,
            eta: None,
            doubling_exponent: None,
        }
    }
}

/// `f = sum_i lambda_i a_i` (functions) or `d Delta^{-1/2} f = sum_i lambda_i a_i`
/// (forms) with molecules `a_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct MolecularDecomposition {
    pub molecules: Vec<Molecule>,
    pub coefficients: Vec<f64>,
    /// `||target - sum_i lambda_i a_i|| / ||target||`.
    pub relative_residual: f64,
    pub eta: u32,
    pub k_max: usize,
    /// Largest normalizing constant `C_i` turning `pi(A_i)` into a molecule.
    pub max_normalization: f64,
    /// Largest relative gap between `a_i` built from `b_i` and `pi(A_i)`.
    pub closed_loop_error: f64,
    pub removed_mean: f64,
    pub tent: TentSummary,
}

/// Statistics of the intermediate tent decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TentSummary {
    pub atoms: usize,
    pub lambda_sum: f64,
    pub input_t1: f64,
    pub residual: f64,
}

impl From<&TentDecomposition> for TentSummary {
    fn from(t: &TentDecomposition) -> Self {
        Self {
            atoms: t.atoms.len(),
            lambda_sum: t.lambda_sum(),
            input_t1: t.input_t1,
            residual: t.residual,
        }
    }
}

impl MolecularDecomposition {
    pub fn lambda_sum(&self) -> f64 {
        self.coefficients.iter().map(|l| l.abs()).sum()
    }

    /// Largest `||a_i||_{L^1}` over the molecules.
    pub fn max_l1(&self, space: &Space) -> f64 {
        self.molecules
            .iter()
            .map(|m| check_molecule(space, m).l1_norm)
            .fold(0.0, f64::max)
    }

    fn empty(eta: u32, removed_mean: f64) -> Self {
        Self {
            molecules: Vec::new(),
            coefficients: Vec::new(),
            relative_residual: 0.0,
            eta,
            k_max: 0,
            max_normalization: 0.0,
            closed_loop_error: 0.0,
            removed_mean,
            tent: TentSummary {
                atoms: 0,
                lambda_sum: 0.0,
                input_t1: 0.0,
                residual: 0.0,
            },
        }
    }
}

/// Fitted exponent `d` of `V(x, lambda r) <~ lambda^d V(x, r)` over all
/// centers and dyadic radii below the diameter.
pub fn estimate_doubling_exponent(space: &Space) -> Result<f64> {
    let diameter = space.metric().diameter();
    let mut radii = Vec::new();
    let mut r = 1.0;
    while r <= diameter {
        radii.push(r);
        r *= 2.0;
    }
    if radii.len() < 2 {
        return Ok(0.0);
    }
    let sample: Vec<Vertex> = (0..space.vertex_count()).collect();
    Ok(space.doubling_scan(&radii, &sample)?.exponent.slope.max(0.0))
}

struct Pipeline {
    eta: u32,
    k_max: usize,
}

fn pipeline(space: &Space, sd: &SpectralDecomposition, opts: &MolecularOptions, beta: f64) -> Result<Pipeline> {
    if !(opts.eps > 0.0) || !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "eps and tol must be positive, got {} and {}",
            opts.eps, opts.tol
        )));
    }
    let eta = match opts.eta {
        Some(e) => e,
        None => {
            let d0 = match opts.doubling_exponent {
                Some(d) => d,
                None => estimate_doubling_exponent(space)?,
            };
            default_eta(d0, opts.eps, beta)
        }
    };
    check_eta(eta, beta)?;
    let ev = sd.eigenvalues();
    let z = if ev.len() > 1 {
        ev[1].abs().max(ev[ev.len() - 1].abs()).powi(2)
    } else {
        0.0
    };
    let k_max = synthesis_k_max(eta, z, 0.1 * opts.tol)?;
    Ok(Pipeline { eta, k_max })
}

fn normalization_radius(radius: f64) -> f64 {
    radius.ceil().max(1.0)
}

/// Molecular decomposition of a mean-zero function.
///
/// `F(., l) = (l Delta)^beta P^{l-1} f` is decomposed into tent atoms `A_i`;
/// each `pi_{eta,beta}(A_i)` is written as `[I - (I + k Delta)^{-1}] b_i`
/// and normalized into an `eps`-molecule.
pub fn molecular_decompose(
    space: &Space,
    table: &RhoTable,
    sd: &SpectralDecomposition,
    f: &[f64],
    opts: &MolecularOptions,
) -> Result<MolecularDecomposition> {
    let graph = space.graph();
    check_len(graph.vertex_count(), f.len())?;
    let m = space.measure();
    let beta = opts.beta;
    let mut g = f.to_vec();
    let removed_mean = project_mean_zero(&mut g, m);
    let target = norm2(&g, m);
    let Pipeline { eta, k_max } = pipeline(space, sd, opts, beta)?;
    if target == 0.0 {
        return Ok(MolecularDecomposition::empty(eta, removed_mean));
    }
    let field = lp_transform(graph, &Calculus::Spectral(sd), beta, &g, k_max)?;
    let tent = tent_atomic_decompose(space, table, &field)?;
    let mut out = MolecularDecomposition::empty(eta, removed_mean);
    out.k_max = k_max;
    out.tent = TentSummary::from(&tent);
    let pi = synthesis_multiplier(eta, beta);
    let mut sum = vec![0.0; g.len()];
    for (atom, &lambda) in tent.atoms.iter().zip(&tent.coefficients) {
        let s = weighted_slab_sum(graph, eta, beta, &atom.values)?;
        let k = normalization_radius(atom.radius);
        let b = sd.apply(
            |l| {
                let t = (1.0 - l).max(0.0);
                (1.0 + k * t) / k * t.powf(eta as f64 - beta - 1.0) * (1.0 + l).powi(eta as i32)
            },
            &s,
        )?;
        let a = sd.apply(
            |l| {
                let t = k * (1.0 - l).max(0.0);
                t / (1.0 + t)
            },
            &b,
        )?;
        let direct = sd.apply(&pi, &s)?;
        out.closed_loop_error = out.closed_loop_error.max(relative_gap(&a, &direct, m));
        let (c, _) = molecule_constant(space, atom.center, k, opts.eps, &b);
        push_function_molecule(&mut out, &mut sum, atom.center, k, opts.eps, lambda, c, b, a);
    }
    let diff: Vec<f64> = g.iter().zip(&sum).map(|(x, y)| x - y).collect();
    out.relative_residual = norm2(&diff, m) / target;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn push_function_molecule(
    out: &mut MolecularDecomposition,
    sum: &mut [f64],
    center: Vertex,
    k: f64,
    eps: f64,
    lambda: f64,
    c: f64,
    mut b: Vec<f64>,
    mut a: Vec<f64>,
) {
    if c == 0.0 {
        return;
    }
    b.iter_mut().for_each(|v| *v /= c);
    a.iter_mut().for_each(|v| *v /= c);
    let coeff = lambda * c;
    for (s, v) in sum.iter_mut().zip(&a) {
        *s += coeff * v;
    }
    out.max_normalization = out.max_normalization.max(c);
    out.coefficients.push(coeff);
    out.molecules.push(Molecule {
        eps,
        center,
        k,
        b,
        a: MoleculeValue::Function(a),
    });
}

fn relative_gap(a: &[f64], b: &[f64], m: &[f64]) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let scale = norm2(b, m);
    if scale == 0.0 {
        norm2(&diff, m)
    } else {
        norm2(&diff, m) / scale
    }
}

/// Decomposes `G = d Delta^{-1/2} f` into form molecules
/// `sqrt(k) d (I + k Delta)^{-1/2} b`.
///
/// The tent field is `F(., l) = sqrt(l) P^{l-1} d*G`, which equals the
/// Littlewood–Paley transform of `f` at `beta = 1/2`, so `pi_{eta,1/2} F = f`.
/// `opts.beta` is ignored.
pub fn riesz_hardy_map(
    space: &Space,
    table: &RhoTable,
    sd: &SpectralDecomposition,
    f: &[f64],
    opts: &MolecularOptions,
) -> Result<MolecularDecomposition> {
    let graph = space.graph();
    check_len(graph.vertex_count(), f.len())?;
    let beta = 0.5;
    let calc = Calculus::Spectral(sd);
    let riesz = riesz_transform(graph, &calc, f)?;
    let target = form_inner(graph, &riesz.form, &riesz.form).sqrt();
    let Pipeline { eta, k_max } = pipeline(space, sd, opts, beta)?;
    if target == 0.0 {
        return Ok(MolecularDecomposition::empty(eta, riesz.removed_mean));
    }
    let h = codifferential(graph, &riesz.form);
    let p = MarkovOperator::new(graph);
    let mut field = TentField::zeros(graph.vertex_count(), k_max);
    let mut u = h;
    let mut tmp = vec![0.0; u.len()];
    for l in 1..=k_max {
        let w = (l as f64).sqrt();
        for (dst, v) in field.slab_mut(l).iter_mut().zip(&u) {
            *dst = w * v;
        }
        p.apply_into(&u, &mut tmp);
        core::mem::swap(&mut u, &mut tmp);
    }
    let tent = tent_atomic_decompose(space, table, &field)?;
    let mut out = MolecularDecomposition::empty(eta, riesz.removed_mean);
    out.k_max = k_max;
    out.tent = TentSummary::from(&tent);
    let pi = synthesis_multiplier(eta, beta);
    let mut sum = OneForm::zeros(graph);
    for (atom, &lambda) in tent.atoms.iter().zip(&tent.coefficients) {
        let s = weighted_slab_sum(graph, eta, beta, &atom.values)?;
        let k = normalization_radius(atom.radius);
        let b = sd.apply(
            |l| {
                let t = (1.0 - l).max(0.0);
                (1.0 + k * t).sqrt() * t.powi(eta as i32 - 1) * (1.0 + l).powi(eta as i32) / k.sqrt()
            },
            &s,
        )?;
        let rb = sd.apply(|l| (1.0 + k * (1.0 - l).max(0.0)).powf(-0.5), &b)?;
        let mut a = differential(graph, &rb)?;
        a.scale(k.sqrt());
        let pa = sd.apply(&pi, &s)?;
        let direct = sd.apply_mean_zero(|l| (1.0 - l).powf(-0.5), &pa)?;
        let direct = differential(graph, &direct)?;
        let mut gap = a.clone();
        gap.add_scaled(-1.0, &direct);
        let scale = form_inner(graph, &direct, &direct).sqrt();
        let gap_norm = form_inner(graph, &gap, &gap).sqrt();
        out.closed_loop_error = out
            .closed_loop_error
            .max(if scale > 0.0 { gap_norm / scale } else { gap_norm });
        let (c, _) = molecule_constant(space, atom.center, k, opts.eps, &b);
        if c == 0.0 {
            continue;
        }
        let b: Vec<f64> = b.iter().map(|v| v / c).collect();
        a.scale(1.0 / c);
        let coeff = lambda * c;
        sum.add_scaled(coeff, &a);
        out.max_normalization = out.max_normalization.max(c);
        out.coefficients.push(coeff);
        out.molecules.push(Molecule {
            eps: opts.eps,
            center: atom.center,
            k,
            b,
            a: MoleculeValue::Form(a),
        });
    }
    let mut diff = riesz.form.clone();
    diff.add_scaled(-1.0, &sum);
    out.relative_residual = form_inner(graph, &diff, &diff).sqrt() / target;
    Ok(out)
}
