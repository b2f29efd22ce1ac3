//! Tent-space and Littlewood–Paley functionals, the maximal function and
//! the pseudo-gradient.
//!
//! A tent field lives on `Gamma x {1..K}`. The cone over `x` is
//! `gamma(x) = {(y,k) : rho(x,y) < k}` and the tent over an open set `O` is
//! `hat O = {(y,k) : rho(y, O^c) >= k}`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::calculus::{fractional_laplacian, gradient_length, Calculus};
use crate::error::{Error, Result};
use crate::graph::{Vertex, WeightedGraph};
use crate::markov::MarkovOperator;
use crate::metric::{RhoTable, Space};
use crate::vecops::check_len;

/// Real function on `Gamma x {1..k_max}`, slab-major: `(y, k)` sits at
/// `(k - 1) * n + y`.
#[derive(Debug, Clone, PartialEq)]
pub struct TentField {
    n: usize,
    k_max: usize,
    values: Vec<f64>,
}

impl TentField {
    pub fn zeros(n: usize, k_max: usize) -> Self {
        Self {
            n,
            k_max,
            values: vec![0.0; n * k_max],
        }
    }

    pub fn from_values(n: usize, k_max: usize, values: Vec<f64>) -> Result<Self> {
        check_len(n * k_max, values.len())?;
        Ok(Self { n, k_max, values })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `F(y, k)`, `k` starting at 1.
    pub fn get(&self, y: Vertex, k: usize) -> f64 {
        self.values[(k - 1) * self.n + y]
    }

    pub fn set(&mut self, y: Vertex, k: usize, v: f64) {
        self.values[(k - 1) * self.n + y] = v;
    }

    pub fn slab(&self, k: usize) -> &[f64] {
        &self.values[(k - 1) * self.n..k * self.n]
    }

    pub fn slab_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.values[(k - 1) * self.n..k * self.n]
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }

    pub fn scale(&mut self, c: f64) {
        for v in &mut self.values {
            *v *= c;
        }
    }

    pub fn add_scaled(&mut self, c: f64, other: &TentField) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += c * b;
        }
    }

    /// Copy restricted to `k <= k_max`.
    pub fn truncated(&self, k_max: usize) -> TentField {
        let k_max = k_max.min(self.k_max).max(1);
        Self {
            n: self.n,
            k_max,
            values: self.values[..k_max * self.n].to_vec(),
        }
    }

    /// `(y, k, F(y,k))` over nonzero entries.
    pub fn support(&self) -> impl Iterator<Item = (Vertex, usize, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(move |(i, v)| (i % self.n, i / self.n + 1, *v))
    }
}

/// `A F(x) = (sum_{(y,k) in gamma(x)} m(y) / (k V(x,k)) |F(y,k)|^2)^{1/2}`.
pub fn tent_a(space: &Space, field: &TentField) -> Result<Vec<f64>> {
    check_len(space.vertex_count(), field.n)?;
    let m = space.measure();
    let n = field.n;
    Ok((0..n)
        .map(|x| {
            let row = space.rho_row(x);
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| row[a].total_cmp(&row[b]));
            let mut total = 0.0;
            for k in 1..=field.k_max {
                let kf = k as f64;
                let slab = field.slab(k);
                let (mut vol, mut acc) = (0.0, 0.0);
                for &y in order.iter().take_while(|&&y| row[y] < kf) {
                    vol += m[y];
                    acc += m[y] * slab[y] * slab[y];
                }
                if acc > 0.0 {
                    total += acc / (kf * vol);
                }
            }
            total.sqrt()
        })
        .collect())
}

/// `||F||_{T^1} = sum_x A F(x) m(x)`.
pub fn t1_norm(space: &Space, field: &TentField) -> Result<f64> {
    let a = tent_a(space, field)?;
    Ok(a.iter().zip(space.measure()).map(|(v, w)| v * w).sum())
}

/// `||F||_{T^2} = ||A F||_2`.
pub fn t2_norm(space: &Space, field: &TentField) -> Result<f64> {
    let a = tent_a(space, field)?;
    Ok(crate::vecops::norm2(&a, space.measure()))
}

/// Visits every ball of the canonical family: each center with each radius
/// just above a distinct value of `rho(c, .)`, i.e. every nonempty prefix of
/// the vertices sorted by distance from `c` that ends at a value change.
/// `visit(center, members_in_order)` returns the ball's score; the output
/// is the max score over balls containing each vertex.
fn sup_over_balls<F>(space: &Space, mut score: F) -> Vec<f64>
where
    F: FnMut(Vertex, &[Vertex], &[f64]) -> f64,
{
    let n = space.vertex_count();
    let mut best = vec![0.0f64; n];
    for c in 0..n {
        let row = space.rho_row(c);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| row[a].total_cmp(&row[b]).then(a.cmp(&b)));
        // Scores of each prefix ending at a distinct-value boundary.
        let mut cut_scores = vec![f64::NEG_INFINITY; n];
        for i in 0..n {
            if i + 1 == n || row[order[i + 1]] > row[order[i]] {
                cut_scores[i] = score(c, &order[..=i], &row);
            }
        }
        // A vertex at position i lies in every prefix ending at j >= i.
        let mut suffix = f64::NEG_INFINITY;
        for i in (0..n).rev() {
            suffix = suffix.max(cut_scores[i]);
            let y = order[i];
            best[y] = best[y].max(suffix);
        }
    }
    best
}

/// Uncentered maximal function `M f(x) = sup_{B ni x} V(B)^{-1} sum_B |f| m`.
pub fn maximal_function(space: &Space, f: &[f64]) -> Result<Vec<f64>> {
    check_len(space.vertex_count(), f.len())?;
    let m = space.measure();
    Ok(sup_over_balls(space, |_, members, _| {
        let (mut vol, mut mass) = (0.0, 0.0);
        for &y in members {
            vol += m[y];
            mass += m[y] * f[y].abs();
        }
        mass / vol
    }))
}

/// `C F(x) = sup_{B ni x} (V(B)^{-1} sum_{(y,k) in hat B} m(y)/k |F(y,k)|^2)^{1/2}`.
///
/// Exhaustive over the canonical ball family; cost grows like `n^4`, so this
/// is meant for small graphs.
pub fn tent_c(space: &Space, table: &RhoTable, field: &TentField) -> Result<Vec<f64>> {
    check_len(space.vertex_count(), field.n)?;
    let n = field.n;
    let m = space.measure();
    // cumulative[y][k] = sum_{k' <= k} F(y,k')^2 / k'.
    let mut cumulative = vec![0.0; n * (field.k_max + 1)];
    for y in 0..n {
        for k in 1..=field.k_max {
            let v = field.get(y, k);
            cumulative[y * (field.k_max + 1) + k] = cumulative[y * (field.k_max + 1) + k - 1] + v * v / k as f64;
        }
    }
    let mut inside = vec![false; n];
    let sq = sup_over_balls(space, |_, members, _| {
        inside.iter_mut().for_each(|v| *v = false);
        let mut vol = 0.0;
        for &y in members {
            inside[y] = true;
            vol += m[y];
        }
        let mut acc = 0.0;
        for &y in members {
            // rho(y, B^c); the tent needs k <= that distance.
            let reach = table
                .row(y)
                .iter()
                .zip(&inside)
                .filter(|(_, &b)| !b)
                .map(|(&v, _)| v)
                .fold(f64::INFINITY, f64::min);
            let kk = if reach.is_infinite() {
                field.k_max
            } else {
                (reach.floor() as usize).min(field.k_max)
            };
            acc += m[y] * cumulative[y * (field.k_max + 1) + kk];
        }
        acc / vol
    });
    Ok(sq.into_iter().map(|v| v.max(0.0).sqrt()).collect())
}

/// `F(., k) = k^beta Delta^beta P^{k-1} f` for `k = 1..=k_max`.
pub fn lp_transform(
    graph: &WeightedGraph,
    calc: &Calculus,
    beta: f64,
    f: &[f64],
    k_max: usize,
) -> Result<TentField> {
    let n = graph.vertex_count();
    if k_max == 0 {
        return Err(Error::InvalidParameter("k_max must be positive".into()));
    }
    let mut h = fractional_laplacian(graph, calc, beta, f)?;
    let p = MarkovOperator::new(graph);
    let mut field = TentField::zeros(n, k_max);
    let mut tmp = vec![0.0; n];
    for k in 1..=k_max {
        let w = (k as f64).powf(beta);
        for (dst, v) in field.slab_mut(k).iter_mut().zip(&h) {
            *dst = w * v;
        }
        p.apply_into(&h, &mut tmp);
        core::mem::swap(&mut h, &mut tmp);
    }
    Ok(field)
}

/// Values of a truncated quadratic functional with a convergence monitor.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticFunctional {
    pub values: Vec<f64>,
    pub k_max: usize,
    /// `||Q_K - Q_{K/2}||_1 / ||Q_K||_1`; zero when `Q_K = 0`.
    pub tail_increment: f64,
}

impl QuadraticFunctional {
    /// Tail increment below 1%.
    pub fn converged(&self) -> bool {
        self.tail_increment < 0.01
    }
}

fn relative_increment(full: &[f64], half: &[f64], m: &[f64]) -> f64 {
    let total: f64 = full.iter().zip(m).map(|(a, w)| a * w).sum();
    if total == 0.0 {
        return 0.0;
    }
    full.iter().zip(half).zip(m).map(|((a, b), w)| (a - b).abs() * w).sum::<f64>() / total
}

/// `L_beta f(x) = (sum_{gamma(x)} k^{2 beta - 1} / V(x,k) |Delta^beta P^{k-1} f(y)|^2 m(y))^{1/2}`,
/// i.e. `A` applied to [`lp_transform`].
pub fn lp_functional_l(
    space: &Space,
    calc: &Calculus,
    beta: f64,
    f: &[f64],
    k_max: usize,
) -> Result<QuadraticFunctional> {
    let field = lp_transform(space.graph(), calc, beta, f, k_max)?;
    let values = tent_a(space, &field)?;
    let half = tent_a(space, &field.truncated(k_max / 2))?;
    Ok(QuadraticFunctional {
        tail_increment: relative_increment(&values, &half, space.measure()),
        values,
        k_max,
    })
}

/// `g_beta f(x) = (sum_k k^{2 beta - 1} |Delta^beta P^{k-1} f(x)|^2)^{1/2}`.
pub fn lp_functional_g(
    graph: &WeightedGraph,
    calc: &Calculus,
    beta: f64,
    f: &[f64],
    k_max: usize,
) -> Result<QuadraticFunctional> {
    let field = lp_transform(graph, calc, beta, f, k_max)?;
    let n = graph.vertex_count();
    let mut sq = vec![0.0; n];
    let mut half = vec![0.0; n];
    for k in 1..=k_max {
        // |k^beta h|^2 / k = k^{2 beta - 1} |h|^2.
        for (s, v) in sq.iter_mut().zip(field.slab(k)) {
            *s += v * v / k as f64;
        }
        if k == k_max / 2 {
            half.clone_from(&sq);
        }
    }
    let values: Vec<f64> = sq.iter().map(|v| v.sqrt()).collect();
    let half: Vec<f64> = half.iter().map(|v| v.sqrt()).collect();
    Ok(QuadraticFunctional {
        tail_increment: relative_increment(&values, &half, graph.measure()),
        values,
        k_max,
    })
}

/// `A f(x) = sum_{y ~ x} f(y)`, the loop included.
pub fn neighbor_sum(graph: &WeightedGraph, f: &[f64]) -> Vec<f64> {
    (0..graph.vertex_count())
        .map(|x| graph.neighbors(x).map(|(y, _)| f[y]).sum())
        .collect()
}

/// Pseudo-gradient data at time `k` for `u = P^{k-1} f`.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoGradient {
    pub u: Vec<f64>,
    /// `J_k = -[d_k + Delta](u^p) = P(u^p) - (P u)^p`.
    pub j: Vec<f64>,
    /// `N_p = u^{2-p} J_k`.
    pub n_p: Vec<f64>,
    /// `max_x |grad u(x)|^2 / (A N_p)(x)`; infinite if the right side
    /// vanishes where the left does not.
    pub domination_constant: f64,
}

pub fn pseudo_gradient(graph: &WeightedGraph, p: f64, f: &[f64], k: usize) -> Result<PseudoGradient> {
    check_len(graph.vertex_count(), f.len())?;
    if !(p > 1.0 && p <= 2.0) {
        return Err(Error::InvalidParameter(format!("p must lie in (1, 2], got {p}")));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if let Some((vertex, &value)) = f.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
        return Err(Error::NegativeFunction { vertex, value });
    }
    let op = MarkovOperator::new(graph);
    let u = op.power_apply(f, k - 1)?;
    let up: Vec<f64> = u.iter().map(|v| v.powf(p)).collect();
    let p_up = op.apply(&up)?;
    let pu = op.apply(&u)?;
    let j: Vec<f64> = p_up.iter().zip(&pu).map(|(a, b)| a - b.powf(p)).collect();
    let n_p: Vec<f64> = u.iter().zip(&j).map(|(a, b)| a.powf(2.0 - p) * b).collect();
    let grad = gradient_length(graph, &u)?;
    let an = neighbor_sum(graph, &n_p);
    let scale = u.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut domination_constant = 0.0f64;
    for (g, a) in grad.iter().zip(&an) {
        let lhs = g * g;
        // Ignore round-off sized gradients.
        if lhs <= 1e-24 * scale * scale {
            continue;
        }
        domination_constant = domination_constant.max(if *a > 0.0 { lhs / a } else { f64::INFINITY });
    }
    Ok(PseudoGradient {
        u,
        j,
        n_p,
        domination_constant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::{build, BuilderSpec};
    use crate::graph::Edge;
    use crate::metric::QuasiMetric;
    use crate::spectral::SpectralDecomposition;

    fn lazy_k2() -> Space {
        let g = WeightedGraph::from_edges(2, [Edge::new(0, 1, 1.0), Edge::new(0, 0, 1.0), Edge::new(1, 1, 1.0)]).unwrap();
        let q = QuasiMetric::power(&g, 2.0).unwrap();
        Space::new(g, q, vec![]).unwrap()
    }

    #[test]
    fn k2_functionals() {
        let s = lazy_k2();
        let sd = SpectralDecomposition::new(s.graph()).unwrap();
        let calc = Calculus::Spectral(&sd);
        let f = [1.0, -1.0];
        // Only k = 1 survives; gamma(x) at k = 1 is {x}, V(x,1) = 2.
        let l = lp_functional_l(&s, &calc, 1.0, &f, 3).unwrap();
        for v in &l.values {
            assert!((v - 1.0).abs() < 1e-14);
        }
        let g = lp_functional_g(s.graph(), &calc, 1.0, &f, 3).unwrap();
        for v in &g.values {
            assert!((v - 1.0).abs() < 1e-14);
        }
        let c = lp_functional_l(&s, &calc, 1.0, &[2.0, 2.0], 3).unwrap();
        assert!(c.values.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn single_point_tent_field() {
        let s = build(&BuilderSpec::cycle(8)).unwrap();
        let mut field = TentField::zeros(8, 5);
        field.set(2, 5, 3.0);
        let a = tent_a(&s, &field).unwrap();
        let m = s.measure();
        for x in 0..8 {
            let expected = if s.rho(x, 2) < 5.0 {
                3.0 * (m[2] / (5.0 * s.volume(x, 5.0))).sqrt()
            } else {
                0.0
            };
            assert!((a[x] - expected).abs() < 1e-14);
        }
        let zero = TentField::zeros(8, 5);
        assert!(tent_a(&s, &zero).unwrap().iter().all(|v| *v == 0.0));
        let table = s.rho_table();
        assert!(tent_c(&s, &table, &zero).unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn maximal_constant_and_delta() {
        let s = build(&BuilderSpec::cycle(4)).unwrap();
        assert_eq!(maximal_function(&s, &[2.0; 4]).unwrap(), vec![2.0; 4]);
        // Delta at 0 on the lazy 4-cycle (beta = 2, all m = 4): balls are
        // {c}, {c, c+1, c-1}, everything. At 0 the best is {0} with average 1;
        // elsewhere the best is a three-vertex ball through 0, e.g. {1,0,2}.
        let mf = maximal_function(&s, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        let expected = [1.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0];
        for (a, b) in mf.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn pseudo_gradient_hand_case() {
        let s = lazy_k2();
        let eps = 0.3;
        let pg = pseudo_gradient(s.graph(), 2.0, &[1.0, eps], 1).unwrap();
        let expected = (1.0 - eps) * (1.0 - eps) / 4.0;
        for (j, n) in pg.j.iter().zip(&pg.n_p) {
            assert!((j - expected).abs() < 1e-15);
            assert!((n - expected).abs() < 1e-15);
        }
        assert!((pg.domination_constant - 0.5).abs() < 1e-14);
        let c = pseudo_gradient(s.graph(), 1.5, &[2.0, 2.0], 3).unwrap();
        assert!(c.j.iter().all(|v| v.abs() < 1e-15));
        assert!(matches!(
            pseudo_gradient(s.graph(), 1.5, &[1.0, -1.0], 1),
            Err(Error::NegativeFunction { vertex: 1, .. })
        ));
    }
}
