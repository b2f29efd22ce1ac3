//! The synthesis operator
//! `pi_{eta,beta} F = sum_{l >= 1} c_l / l^beta Delta^{eta-beta} (I+P)^eta P^{l-1} F(., l)`
//! with `c_l` the coefficients of `(1 - z)^{-eta} = sum_l c_l z^{l-1}`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::functionals::TentField;
use crate::graph::WeightedGraph;
use crate::markov::MarkovOperator;
use crate::spectral::SpectralDecomposition;
use crate::vecops::check_len;

/// `c_1..=c_len` of `(1 - z)^{-eta}`: `c_l = binom(eta + l - 2, l - 1)`.
pub fn synthesis_coefficients(eta: u32, len: usize) -> Vec<f64> {
    let mut c = Vec::with_capacity(len);
    let mut cl = 1.0;
    for l in 1..=len {
        c.push(cl);
        cl *= (eta as f64 + l as f64 - 1.0) / l as f64;
    }
    c
}

/// `eta = ceil(d0/2 + eps + beta) + 2`.
pub fn default_eta(doubling_exponent: f64, eps: f64, beta: f64) -> u32 {
    (doubling_exponent / 2.0 + eps + beta).ceil().max(0.0) as u32 + 2
}

pub(crate) fn check_eta(eta: u32, beta: f64) -> Result<()> {
    if !(beta > 0.0) || (eta as f64) < beta.ceil() + 1.0 {
        return Err(Error::InvalidParameter(format!(
            "synthesis needs eta >= ceil(beta) + 1, got eta {eta}, beta {beta}"
        )));
    }
    Ok(())
}

/// Remainder `R_K(z) = 1 - (1-z)^eta sum_{l <= K} c_l z^{l-1}` of the
/// reconstruction identity, at a single `z = lambda^2` in `[0, 1)`.
pub fn reconstruction_remainder(eta: u32, k: usize, z: f64) -> f64 {
    let c = synthesis_coefficients(eta, k);
    let mut partial = 0.0;
    let mut zl = 1.0;
    for cl in c {
        partial += cl * zl;
        zl *= z;
    }
    1.0 - (1.0 - z).powi(eta as i32) * partial
}

/// Smallest `K` with `R_K(z) <= tol`, `z = max(lambda_2^2, lambda_n^2)`.
/// `R_K` increases in `z`, so the bound holds on the whole mean-zero spectrum.
pub fn synthesis_k_max(eta: u32, z: f64, tol: f64) -> Result<usize> {
    if !(0.0..1.0).contains(&z) {
        return Err(Error::InvalidParameter(format!("z = {z} must lie in [0, 1)")));
    }
    let limit = 10_000_000;
    let factor = (1.0 - z).powi(eta as i32);
    let (mut partial, mut cl, mut zl) = (0.0, 1.0, 1.0);
    for k in 1..=limit {
        partial += cl * zl;
        if 1.0 - factor * partial <= tol {
            return Ok(k);
        }
        cl *= (eta as f64 + k as f64 - 1.0) / k as f64;
        zl *= z;
    }
    Err(Error::SeriesNotConvergent {
        tolerance: tol,
        terms: limit,
        bound: 1.0 - factor * partial,
    })
}

/// `S F = sum_l c_l / l^beta P^{l-1} F(., l)` by Horner's rule.
pub fn weighted_slab_sum(graph: &WeightedGraph, eta: u32, beta: f64, field: &TentField) -> Result<Vec<f64>> {
    let n = graph.vertex_count();
    check_len(n, field.vertex_count())?;
    let k_max = field.k_max();
    let c = synthesis_coefficients(eta, k_max);
    let p = MarkovOperator::new(graph);
    let mut acc = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    for l in (1..=k_max).rev() {
        p.apply_into(&acc, &mut tmp);
        let w = c[l - 1] / (l as f64).powf(beta);
        for ((a, t), v) in acc.iter_mut().zip(&tmp).zip(field.slab(l)) {
            *a = t + w * v;
        }
    }
    Ok(acc)
}

/// Spectral multiplier `(1 - lambda)^{eta - beta} (1 + lambda)^eta` of `pi`.
pub fn synthesis_multiplier(eta: u32, beta: f64) -> impl Fn(f64) -> f64 {
    move |l: f64| (1.0 - l).max(0.0).powf(eta as f64 - beta) * (1.0 + l).powi(eta as i32)
}

/// `pi_{eta,beta} F`.
pub fn pi_synthesis(
    graph: &WeightedGraph,
    spectral: &SpectralDecomposition,
    eta: u32,
    beta: f64,
    field: &TentField,
) -> Result<Vec<f64>> {
    check_eta(eta, beta)?;
    let s = weighted_slab_sum(graph, eta, beta, field)?;
    spectral.apply(synthesis_multiplier(eta, beta), &s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::{build, BuilderSpec};

    #[test]
    fn eta_two_coefficients_are_l() {
        let c = synthesis_coefficients(2, 6);
        assert_eq!(c, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        // (1-z)^{-3}: 1, 3, 6, 10.
        assert_eq!(synthesis_coefficients(3, 4), vec![1.0, 3.0, 6.0, 10.0]);
    }

    #[test]
    fn remainder_and_k_max() {
        assert_eq!(synthesis_k_max(4, 0.0, 1e-9).unwrap(), 1);
        let k = synthesis_k_max(3, 0.5, 1e-8).unwrap();
        assert!(reconstruction_remainder(3, k, 0.5) <= 1e-8);
        assert!(reconstruction_remainder(3, k - 1, 0.5) > 1e-8);
        assert!(reconstruction_remainder(3, k, 0.3) <= reconstruction_remainder(3, k, 0.5));
    }

    #[test]
    fn single_slab_and_zero() {
        let s = build(&BuilderSpec::sierpinski(2)).unwrap();
        let g = s.graph();
        let sd = SpectralDecomposition::new(g).unwrap();
        let n = g.vertex_count();
        let zero = TentField::zeros(n, 4);
        assert!(pi_synthesis(g, &sd, 3, 1.0, &zero).unwrap().iter().all(|v| *v == 0.0));
        let h: Vec<f64> = (0..n).map(|i| (i as f64 * 1.3).sin()).collect();
        let mut field = TentField::zeros(n, 4);
        field.slab_mut(1).copy_from_slice(&h);
        let got = pi_synthesis(g, &sd, 3, 1.0, &field).unwrap();
        // c_1 = 1: Delta^2 (I + P)^3 h.
        let p = MarkovOperator::new(g);
        let mut v = h.clone();
        for _ in 0..3 {
            let pv = p.apply(&v).unwrap();
            v = v.iter().zip(&pv).map(|(a, b)| a + b).collect();
        }
        let want = p.laplacian_power_apply(&v, 2, 1).unwrap();
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(pi_synthesis(g, &sd, 1, 1.0, &field).is_err());
    }
}
