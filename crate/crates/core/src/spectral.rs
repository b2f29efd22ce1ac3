//! Dense spectral decomposition of `P` as a self-adjoint operator on
//! `L^2(Gamma, m)`.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::vecops::check_len;

/// Largest graph handled by the dense path.
pub const MAX_DENSE: usize = 4000;

/// Eigenpair residual `max_i |S v_i - lambda_i v_i|_inf` accepted without refinement.
const RESIDUAL_TOL: f64 = 1e-13;
const REFINEMENTS: usize = 3;

/// Eigenpairs of `P`, eigenvalues sorted decreasingly.
///
/// With `S = M^{1/2} P M^{-1/2}` symmetric, eigenvectors `v_i` of `S` give
/// m-orthonormal eigenfunctions `e_i = v_i / sqrt(m)`.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    /// Columns are the orthonormal `v_i`.
    vectors: DMatrix<f64>,
    sqrt_m: Vec<f64>,
}

impl SpectralDecomposition {
    pub fn new(graph: &WeightedGraph) -> Result<Self> {
        let n = graph.vertex_count();
        if n > MAX_DENSE {
            return Err(Error::TooLargeForDense { n, limit: MAX_DENSE });
        }
        let m = graph.measure();
        let sqrt_m: Vec<f64> = m.iter().map(|v| v.sqrt()).collect();
        let mut s = DMatrix::<f64>::zeros(n, n);
        for x in 0..n {
            for (y, w) in graph.neighbors(x) {
                s[(x, y)] = w / (sqrt_m[x] * sqrt_m[y]);
            }
        }
        let eig = s.clone().symmetric_eigen();
        let (mut values, mut basis) = (eig.eigenvalues, eig.eigenvectors);
        // Large eigenvalue clusters (the gasket) can leave ~1e-9 mixing
        // between nearby eigenspaces; Rayleigh-Ritz in the computed basis
        // removes it.
        for _ in 0..REFINEMENTS {
            let sv = &s * &basis;
            let residual = (0..n)
                .map(|i| (sv.column(i) - basis.column(i) * values[i]).amax())
                .fold(0.0, f64::max);
            if residual <= RESIDUAL_TOL {
                break;
            }
            let mut b = basis.tr_mul(&sv);
            b = (&b + b.transpose()) * 0.5;
            let inner = b.symmetric_eigen();
            basis = &basis * inner.eigenvectors;
            values = inner.eigenvalues;
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
        let mut eigenvalues: Vec<f64> = order.iter().map(|&i| values[i]).collect();
        let mut vectors = DMatrix::<f64>::zeros(n, n);
        for (c, &i) in order.iter().enumerate() {
            vectors.set_column(c, &basis.column(i));
        }
        // The top eigenpair is known exactly for a connected graph.
        eigenvalues[0] = 1.0;
        let total: f64 = m.iter().sum();
        let top = DVector::from_iterator(n, sqrt_m.iter().map(|r| r / total.sqrt()));
        vectors.set_column(0, &top);
        Ok(Self {
            eigenvalues,
            vectors,
            sqrt_m,
        })
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `1 - lambda_2`.
    pub fn spectral_gap(&self) -> f64 {
        1.0 - self.eigenvalues.get(1).copied().unwrap_or(0.0)
    }

    /// `max |lambda|` over eigenvalues other than `lambda_1 = 1`.
    pub fn mean_zero_radius(&self) -> f64 {
        self.eigenvalues[1..].iter().fold(0.0, |a, l| a.max(l.abs()))
    }

    /// The m-orthonormal eigenfunction `e_i`.
    pub fn eigenfunction(&self, i: usize) -> Vec<f64> {
        self.vectors
            .column(i)
            .iter()
            .zip(&self.sqrt_m)
            .map(|(v, r)| v / r)
            .collect()
    }

    /// Coefficients `<f, e_i>_m`.
    pub fn coefficients(&self, f: &[f64]) -> Result<Vec<f64>> {
        check_len(self.len(), f.len())?;
        let scaled = DVector::from_iterator(f.len(), f.iter().zip(&self.sqrt_m).map(|(a, r)| a * r));
        Ok(self.vectors.tr_mul(&scaled).iter().copied().collect())
    }

    /// Reassembles `sum_i c_i e_i`.
    pub fn synthesize(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        check_len(self.len(), coeffs.len())?;
        let c = DVector::from_column_slice(coeffs);
        let v = &self.vectors * c;
        Ok(v.iter().zip(&self.sqrt_m).map(|(a, r)| a / r).collect())
    }

    /// `phi(P) f = sum_i phi(lambda_i) <f, e_i>_m e_i`.
    pub fn apply<F: Fn(f64) -> f64>(&self, phi: F, f: &[f64]) -> Result<Vec<f64>> {
        let mut c = self.coefficients(f)?;
        for (ci, &l) in c.iter_mut().zip(&self.eigenvalues) {
            *ci *= phi(l);
        }
        self.synthesize(&c)
    }

    /// Like [`apply`](Self::apply) with `phi(1) := 0`, i.e. restricted to
    /// mean-zero functions; used for negative powers of `Delta`.
    pub fn apply_mean_zero<F: Fn(f64) -> f64>(&self, phi: F, f: &[f64]) -> Result<Vec<f64>> {
        let mut c = self.coefficients(f)?;
        c[0] = 0.0;
        for (ci, &l) in c.iter_mut().zip(&self.eigenvalues).skip(1) {
            *ci *= phi(l);
        }
        self.synthesize(&c)
    }

    /// Dense matrix of `phi(P)` acting on column vectors of values.
    pub fn operator_matrix<F: Fn(f64) -> f64>(&self, phi: F) -> Vec<Vec<f64>> {
        let n = self.len();
        (0..n)
            .map(|y| {
                let mut delta = vec![0.0; n];
                delta[y] = 1.0;
                self.apply(&phi, &delta).expect("length matches")
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::{build, BuilderSpec};
    use crate::markov::MarkovOperator;

    #[test]
    fn lazy_spectrum_is_nonnegative() {
        for spec in [BuilderSpec::sierpinski(3), BuilderSpec::lattice(2, 6), BuilderSpec::cycle(7)] {
            let s = build(&spec).unwrap();
            let sd = SpectralDecomposition::new(s.graph()).unwrap();
            assert_eq!(sd.eigenvalues()[0], 1.0);
            assert!((sd.eigenvalues()[1] - 1.0).abs() > 1e-6);
            assert!(*sd.eigenvalues().last().unwrap() >= -1e-10);
        }
    }

    #[test]
    fn apply_matches_iteration() {
        let s = build(&BuilderSpec::sierpinski(2)).unwrap();
        let sd = SpectralDecomposition::new(s.graph()).unwrap();
        let p = MarkovOperator::new(s.graph());
        let f: Vec<f64> = (0..s.vertex_count()).map(|i| (i as f64 * 0.7).sin()).collect();
        let id = sd.apply(|_| 1.0, &f).unwrap();
        let p5 = sd.apply(|l| l.powi(5), &f).unwrap();
        let it = p.power_apply(&f, 5).unwrap();
        for i in 0..f.len() {
            assert!((id[i] - f[i]).abs() < 1e-12);
            assert!((p5[i] - it[i]).abs() < 1e-10);
        }
        let c = vec![2.0; f.len()];
        let d = sd.apply(|l| 1.0 - l, &c).unwrap();
        assert!(d.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn eigenfunctions_are_m_orthonormal() {
        let s = build(&BuilderSpec::sierpinski(2)).unwrap();
        let sd = SpectralDecomposition::new(s.graph()).unwrap();
        let m = s.measure();
        for i in 0..3 {
            for j in 0..3 {
                let ip = crate::vecops::inner_m(&sd.eigenfunction(i), &sd.eigenfunction(j), m);
                assert!((ip - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
    }
}
