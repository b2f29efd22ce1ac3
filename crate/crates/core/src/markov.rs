//! The Markov operator `P`, iterated kernels `p_k` and `Delta = I - P`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Result;
use crate::graph::{Vertex, WeightedGraph};
use crate::vecops::check_len;

/// `Pf(x) = sum_y p(x,y) f(y) m(y) = sum_y mu_xy f(y) / m(x)`.
#[derive(Debug, Clone, Copy)]
pub struct MarkovOperator<'a> {
    graph: &'a WeightedGraph,
}

impl<'a> MarkovOperator<'a> {
    pub fn new(graph: &'a WeightedGraph) -> Self {
        Self { graph }
    }

    pub fn graph(&self) -> &'a WeightedGraph {
        self.graph
    }

    pub fn len(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Writes `Pf` into `out`.
    pub fn apply_into(&self, f: &[f64], out: &mut [f64]) {
        let g = self.graph;
        let (offsets, targets, weights, m) = (g.offsets(), g.targets(), g.slot_weights(), g.measure());
        for x in 0..out.len() {
            let mut acc = 0.0;
            for s in offsets[x]..offsets[x + 1] {
                acc += weights[s] * f[targets[s] as usize];
            }
            out[x] = acc / m[x];
        }
    }

    pub fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        check_len(self.len(), f.len())?;
        let mut out = vec![0.0; f.len()];
        self.apply_into(f, &mut out);
        Ok(out)
    }

    /// `P^k f`.
    pub fn power_apply(&self, f: &[f64], k: usize) -> Result<Vec<f64>> {
        check_len(self.len(), f.len())?;
        let mut cur = f.to_vec();
        let mut next = vec![0.0; f.len()];
        for _ in 0..k {
            self.apply_into(&cur, &mut next);
            core::mem::swap(&mut cur, &mut next);
        }
        Ok(cur)
    }

    /// `Delta f = f - Pf`.
    pub fn laplacian(&self, f: &[f64]) -> Result<Vec<f64>> {
        let pf = self.apply(f)?;
        Ok(f.iter().zip(pf).map(|(a, b)| a - b).collect())
    }

    /// `(k Delta)^j P^(k-1) f` by repeated application.
    pub fn laplacian_power_apply(&self, f: &[f64], j: usize, k: usize) -> Result<Vec<f64>> {
        let mut u = self.power_apply(f, k.saturating_sub(1))?;
        let scale = k.max(1) as f64;
        let mut pu = vec![0.0; u.len()];
        for _ in 0..j {
            self.apply_into(&u, &mut pu);
            for (a, b) in u.iter_mut().zip(&pu) {
                *a = scale * (*a - b);
            }
        }
        Ok(u)
    }

    /// Kernel rows `p_k(x, .)` for `k = 0..=steps`.
    pub fn kernel_rows(&self, source: Vertex, steps: usize) -> KernelField {
        let n = self.len();
        let mut rows = Vec::with_capacity(steps + 1);
        let mut row = vec![0.0; n];
        row[source] = 1.0 / self.graph.measure()[source];
        rows.push(row);
        // p_{k+1}(x, .) = P p_k(x, .) by symmetry of p_k.
        for k in 0..steps {
            let mut next = vec![0.0; n];
            self.apply_into(&rows[k], &mut next);
            rows.push(next);
        }
        KernelField { source, rows }
    }
}

/// `p_k(x, y)` for a fixed source `x` and `k = 0..=K`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelField {
    pub source: Vertex,
    rows: Vec<Vec<f64>>,
}

impl KernelField {
    pub fn steps(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.rows[k]
    }

    pub fn get(&self, k: usize, y: Vertex) -> f64 {
        self.rows[k][y]
    }

    /// `max_k |sum_y p_k(x,y) m(y) - 1|`.
    pub fn mass_defect(&self, m: &[f64]) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.iter().zip(m).map(|(p, w)| p * w).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `max_k |p_k(x,y) - p_k(y,x)|` given the field from source `y`.
    pub fn symmetry_gap(&self, other: &KernelField) -> f64 {
        let steps = self.steps().min(other.steps());
        (0..=steps)
            .map(|k| (self.get(k, other.source) - other.get(k, self.source)).abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::{build, BuilderSpec};
    use crate::graph::Edge;

    fn lazy_k2() -> WeightedGraph {
        WeightedGraph::from_edges(2, [Edge::new(0, 1, 1.0), Edge::new(0, 0, 1.0), Edge::new(1, 1, 1.0)]).unwrap()
    }

    #[test]
    fn k2_kernel_by_hand() {
        let g = lazy_k2();
        let p = MarkovOperator::new(&g);
        let kf = p.kernel_rows(0, 3);
        assert_eq!(kf.row(0), &[0.5, 0.0]);
        assert_eq!(kf.row(1), &[0.25, 0.25]);
        assert!(kf.mass_defect(g.measure()) < 1e-15);
    }

    #[test]
    fn lazy_cycle_matches_matrix_power() {
        let s = build(&BuilderSpec::cycle(4)).unwrap();
        let g = s.graph();
        let p = MarkovOperator::new(g);
        // Transition matrix Q(x,y) = mu_xy / m(x): 1/2 on the diagonal,
        // 1/4 to each neighbour; p_2(x,x) = (Q^2)(x,x) / m(x).
        let q = |x: usize, y: usize| g.weight(x, y).unwrap_or(0.0) / g.measure()[x];
        let q2: f64 = (0..4).map(|z| q(0, z) * q(z, 0)).sum();
        assert!((q2 - 0.375).abs() < 1e-15);
        let kf = p.kernel_rows(0, 2);
        assert!((kf.get(2, 0) - q2 / 4.0).abs() < 1e-15);
    }

    #[test]
    fn laplacian_power_cases() {
        let g = lazy_k2();
        let p = MarkovOperator::new(&g);
        let f = [1.0, -1.0];
        assert_eq!(p.laplacian_power_apply(&f, 0, 1).unwrap(), f.to_vec());
        assert_eq!(p.laplacian_power_apply(&f, 1, 2).unwrap(), vec![0.0, 0.0]);
        let c = [3.0, 3.0];
        assert_eq!(p.laplacian_power_apply(&c, 2, 5).unwrap(), vec![0.0, 0.0]);
        assert!(p.apply(&[1.0]).is_err());
    }
}
