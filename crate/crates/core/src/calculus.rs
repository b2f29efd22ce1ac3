//! Differential calculus on a weighted graph: `d`, `d*`, the length of the
//! gradient, and operators built from `Delta` by functional calculus.
//!
//! Functions on directed edges are stored per adjacency slot, in the same
//! order as [`WeightedGraph::neighbors`].

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::graph::{Vertex, WeightedGraph};
use crate::series::{mean_zero_radius_bound, series_apply, BinomialSeries};
use crate::spectral::SpectralDecomposition;
use crate::vecops::{check_len, project_mean_zero};

/// Real function on directed edges `(x, y)`, `y ~ x` (loops included).
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeFunction {
    values: Vec<f64>,
}

impl EdgeFunction {
    pub fn zeros(graph: &WeightedGraph) -> Self {
        Self {
            values: vec![0.0; graph.slot_count()],
        }
    }

    pub fn from_fn<F: FnMut(Vertex, Vertex) -> f64>(graph: &WeightedGraph, mut f: F) -> Self {
        let mut values = Vec::with_capacity(graph.slot_count());
        for x in 0..graph.vertex_count() {
            values.extend(graph.neighbors(x).map(|(y, _)| f(x, y)));
        }
        Self { values }
    }

    pub fn from_slots(graph: &WeightedGraph, values: Vec<f64>) -> Result<Self> {
        check_len(graph.slot_count(), values.len())?;
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value on `(x, y)`, or `None` if `y` is not a neighbour of `x`.
    pub fn get(&self, graph: &WeightedGraph, x: Vertex, y: Vertex) -> Option<f64> {
        let start = graph.offsets()[x];
        let range = start..graph.offsets()[x + 1];
        graph.targets()[range]
            .binary_search(&(y as u32))
            .ok()
            .map(|i| self.values[start + i])
    }

    /// `(x, y, F(x,y))` for every directed slot.
    pub fn entries<'a>(&'a self, graph: &'a WeightedGraph) -> impl Iterator<Item = (Vertex, Vertex, f64)> + 'a {
        (0..graph.vertex_count()).flat_map(move |x| {
            let start = graph.offsets()[x];
            graph
                .neighbors(x)
                .enumerate()
                .map(move |(i, (y, _))| (x, y, self.values[start + i]))
        })
    }

    pub fn scale(&mut self, c: f64) {
        for v in &mut self.values {
            *v *= c;
        }
    }

    /// `|F_x|_{T_x} = (1/2 sum_y p(x,y) |F(x,y)|^2 m(y))^{1/2}` at every `x`.
    pub fn pointwise_norm(&self, graph: &WeightedGraph) -> Vec<f64> {
        let (offsets, w, m) = (graph.offsets(), graph.slot_weights(), graph.measure());
        (0..graph.vertex_count())
            .map(|x| {
                let s: f64 = (offsets[x]..offsets[x + 1])
                    .map(|i| w[i] * self.values[i] * self.values[i])
                    .sum();
                (0.5 * s / m[x]).sqrt()
            })
            .collect()
    }
}

/// Antisymmetric [`EdgeFunction`]: `F(x,y) = -F(y,x)`, so `F(x,x) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct OneForm(EdgeFunction);

impl OneForm {
    pub fn new(graph: &WeightedGraph, f: EdgeFunction) -> Result<Self> {
        check_len(graph.slot_count(), f.values.len())?;
        let reverse = graph.reverse_slots();
        for x in 0..graph.vertex_count() {
            for s in graph.offsets()[x]..graph.offsets()[x + 1] {
                let (forward, backward) = (f.values[s], f.values[reverse[s]]);
                if forward != -backward {
                    return Err(Error::NotAntisymmetric {
                        x,
                        y: graph.targets()[s] as usize,
                        forward,
                        backward,
                    });
                }
            }
        }
        Ok(Self(f))
    }

    pub fn zeros(graph: &WeightedGraph) -> Self {
        Self(EdgeFunction::zeros(graph))
    }

    pub fn as_edge_function(&self) -> &EdgeFunction {
        &self.0
    }

    pub fn values(&self) -> &[f64] {
        &self.0.values
    }

    pub fn get(&self, graph: &WeightedGraph, x: Vertex, y: Vertex) -> Option<f64> {
        self.0.get(graph, x, y)
    }

    pub fn pointwise_norm(&self, graph: &WeightedGraph) -> Vec<f64> {
        self.0.pointwise_norm(graph)
    }

    pub fn scale(&mut self, c: f64) {
        self.0.scale(c);
    }

    /// `sum_i c_i F_i`, forms living on the same graph.
    pub fn add_scaled(&mut self, c: f64, other: &OneForm) {
        for (a, b) in self.0.values.iter_mut().zip(&other.0.values) {
            *a += c * b;
        }
    }

    /// `||F||_{L^p(T_Gamma)} = (sum_x |F_x|^p m(x))^{1/p}`.
    pub fn norm_p(&self, graph: &WeightedGraph, p: f64) -> f64 {
        crate::vecops::norm_p(&self.pointwise_norm(graph), graph.measure(), p)
    }
}

/// `<F, G>_{L^2(T_Gamma)} = 1/2 sum_{x,y} mu_xy F(x,y) G(x,y)`.
pub fn form_inner(graph: &WeightedGraph, f: &OneForm, g: &OneForm) -> f64 {
    0.5 * graph
        .slot_weights()
        .iter()
        .zip(f.values())
        .zip(g.values())
        .map(|((w, a), b)| w * a * b)
        .sum::<f64>()
}

/// `df(x, y) = f(x) - f(y)`.
pub fn differential(graph: &WeightedGraph, f: &[f64]) -> Result<OneForm> {
    check_len(graph.vertex_count(), f.len())?;
    Ok(OneForm(EdgeFunction::from_fn(graph, |x, y| f[x] - f[y])))
}

/// `d*F(x) = sum_y p(x,y) F(x,y) m(y)`.
pub fn codifferential(graph: &WeightedGraph, form: &OneForm) -> Vec<f64> {
    let (offsets, w, m) = (graph.offsets(), graph.slot_weights(), graph.measure());
    let v = form.values();
    (0..graph.vertex_count())
        .map(|x| {
            let s: f64 = (offsets[x]..offsets[x + 1]).map(|i| w[i] * v[i]).sum();
            s / m[x]
        })
        .collect()
}

/// `grad f(x) = |df(x, .)|_{T_x}`.
pub fn gradient_length(graph: &WeightedGraph, f: &[f64]) -> Result<Vec<f64>> {
    Ok(differential(graph, f)?.pointwise_norm(graph))
}

/// Route used to evaluate functions of `Delta`.
#[derive(Debug, Clone, Copy)]
pub enum Calculus<'a> {
    /// Exact, via a dense eigendecomposition.
    Spectral(&'a SpectralDecomposition),
    /// Matrix-free power series with relative tail tolerance `tol`.
    /// `mean_zero_radius` bounds `max |lambda|` off the constants; it is
    /// estimated on demand when absent.
    Series { tol: f64, mean_zero_radius: Option<f64> },
}

impl<'a> Calculus<'a> {
    pub fn series(tol: f64) -> Self {
        Calculus::Series {
            tol,
            mean_zero_radius: None,
        }
    }

    /// Series route with the mean-zero radius bound computed once up front.
    pub fn series_for(graph: &WeightedGraph, tol: f64) -> Self {
        Calculus::Series {
            tol,
            mean_zero_radius: Some(mean_zero_radius_bound(graph)),
        }
    }

    fn radius(&self, graph: &WeightedGraph) -> f64 {
        match self {
            Calculus::Series {
                mean_zero_radius: Some(r),
                ..
            } => *r,
            _ => mean_zero_radius_bound(graph),
        }
    }
}

fn check_s(s: f64) -> Result<()> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidParameter(alloc::format!("s must be positive, got {s}")));
    }
    Ok(())
}

/// `(I + s Delta)^{-1} f`.
pub fn resolvent(graph: &WeightedGraph, calc: &Calculus, s: f64, f: &[f64]) -> Result<Vec<f64>> {
    check_s(s)?;
    match calc {
        Calculus::Spectral(sd) => sd.apply(|l| 1.0 / (1.0 + s * (1.0 - l)), f),
        Calculus::Series { tol, .. } => {
            Ok(series_apply(graph, &BinomialSeries::resolvent(s), f, *tol, 1.0)?.value)
        }
    }
}

/// `(I + s Delta)^{-1/2} f`.
pub fn resolvent_sqrt(graph: &WeightedGraph, calc: &Calculus, s: f64, f: &[f64]) -> Result<Vec<f64>> {
    check_s(s)?;
    match calc {
        Calculus::Spectral(sd) => sd.apply(|l| (1.0 + s * (1.0 - l)).powf(-0.5), f),
        Calculus::Series { tol, .. } => {
            Ok(series_apply(graph, &BinomialSeries::resolvent_sqrt(s), f, *tol, 1.0)?.value)
        }
    }
}

/// `Delta^beta f` for `beta > 0`.
///
/// The series route writes `beta = kappa + gamma` with integer `kappa` and
/// `gamma` in `(0, 1)`, and uses `Delta^beta = (I - P)^{gamma - 1} Delta^{kappa + 1}`.
pub fn fractional_laplacian(graph: &WeightedGraph, calc: &Calculus, beta: f64, f: &[f64]) -> Result<Vec<f64>> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(alloc::format!("beta must be positive, got {beta}")));
    }
    check_len(graph.vertex_count(), f.len())?;
    let p = crate::markov::MarkovOperator::new(graph);
    if beta.fract() == 0.0 {
        return p.laplacian_power_apply(f, beta as usize, 1);
    }
    match calc {
        Calculus::Spectral(sd) => sd.apply_mean_zero(|l| (1.0 - l).max(0.0).powf(beta), f),
        Calculus::Series { tol, .. } => {
            let kappa = beta.floor() as usize;
            let gamma = beta - kappa as f64;
            let h = p.laplacian_power_apply(f, kappa + 1, 1)?;
            let series = BinomialSeries::inverse_laplacian_power(1.0 - gamma);
            Ok(series_apply(graph, &series, &h, *tol, calc.radius(graph))?.value)
        }
    }
}

/// `Delta^{-alpha} f` on mean-zero functions. The m-weighted mean of `f` is
/// projected out first and returned alongside.
pub fn inverse_laplacian_power(
    graph: &WeightedGraph,
    calc: &Calculus,
    alpha: f64,
    f: &[f64],
) -> Result<(Vec<f64>, f64)> {
    check_len(graph.vertex_count(), f.len())?;
    let mut g = f.to_vec();
    let mean = project_mean_zero(&mut g, graph.measure());
    let value = match calc {
        Calculus::Spectral(sd) => sd.apply_mean_zero(|l| (1.0 - l).powf(-alpha), &g)?,
        Calculus::Series { tol, .. } => {
            let series = BinomialSeries::inverse_laplacian_power(alpha);
            let mut v = series_apply(graph, &series, &g, *tol, calc.radius(graph))?.value;
            project_mean_zero(&mut v, graph.measure());
            v
        }
    };
    Ok((value, mean))
}

/// Riesz transform output.
#[derive(Debug, Clone, PartialEq)]
pub struct RieszOutput {
    pub form: OneForm,
    /// Mean projected out of the input.
    pub removed_mean: f64,
}

/// `d Delta^{-1/2} f`, after projecting `f` to mean zero.
pub fn riesz_transform(graph: &WeightedGraph, calc: &Calculus, f: &[f64]) -> Result<RieszOutput> {
    let (h, removed_mean) = inverse_laplacian_power(graph, calc, 0.5, f)?;
    Ok(RieszOutput {
        form: differential(graph, &h)?,
        removed_mean,
    })
}

/// `sup_x |phi(x, .)|_{T_x}`.
pub fn weight_sup_norm(graph: &WeightedGraph, phi: &EdgeFunction) -> (Vertex, f64) {
    phi.pointwise_norm(graph)
        .into_iter()
        .enumerate()
        .fold((0, 0.0), |best, (x, v)| if v > best.1 { (x, v) } else { best })
}

/// `grad_phi f(x) = sum_y p(x,y) df(x,y) phi(x,y) m(y)` for a weight with
/// `sup_x |phi(x, .)|_{T_x} <= 1`.
///
/// Cauchy-Schwarz in `T_x` gives `|grad_phi f| <= 2 grad f`, with equality
/// for `phi = phi_f` (see [`gradient_direction`]).
pub fn linearized_gradient(graph: &WeightedGraph, phi: &EdgeFunction, f: &[f64]) -> Result<Vec<f64>> {
    check_len(graph.vertex_count(), f.len())?;
    check_len(graph.slot_count(), phi.values.len())?;
    let (vertex, norm) = weight_sup_norm(graph, phi);
    if norm > 1.0 + 1e-12 {
        return Err(Error::WeightBound { vertex, norm });
    }
    let (offsets, targets, w, m) = (graph.offsets(), graph.targets(), graph.slot_weights(), graph.measure());
    Ok((0..graph.vertex_count())
        .map(|x| {
            let s: f64 = (offsets[x]..offsets[x + 1])
                .map(|i| w[i] * (f[x] - f[targets[i] as usize]) * phi.values[i])
                .sum();
            s / m[x]
        })
        .collect())
}

/// `phi_f(x, y) = df(x, y) / grad f(x)`, zero where `grad f(x) = 0`.
pub fn gradient_direction(graph: &WeightedGraph, f: &[f64]) -> Result<EdgeFunction> {
    let grad = gradient_length(graph, f)?;
    Ok(EdgeFunction::from_fn(graph, |x, y| {
        if grad[x] > 0.0 {
            (f[x] - f[y]) / grad[x]
        } else {
            0.0
        }
    }))
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
    fn k2_hand_values() {
        let g = lazy_k2();
        let sd = SpectralDecomposition::new(&g).unwrap();
        let calc = Calculus::Spectral(&sd);
        let f = [1.0, -1.0];
        let df = differential(&g, &f).unwrap();
        assert_eq!(df.get(&g, 0, 1), Some(2.0));
        assert_eq!(df.get(&g, 0, 0), Some(0.0));
        assert_eq!(codifferential(&g, &df), f.to_vec());
        assert_eq!(gradient_length(&g, &f).unwrap(), vec![1.0, 1.0]);
        let r = resolvent(&g, &calc, 1.0, &f).unwrap();
        assert!((r[0] - 0.5).abs() < 1e-14 && (r[1] + 0.5).abs() < 1e-14);
        let r = resolvent_sqrt(&g, &calc, 3.0, &f).unwrap();
        assert!((r[0] - 0.5).abs() < 1e-14);
        let h = fractional_laplacian(&g, &calc, 0.5, &f).unwrap();
        assert!((h[0] - 1.0).abs() < 1e-14);
        let riesz = riesz_transform(&g, &calc, &f).unwrap();
        assert!((riesz.form.get(&g, 0, 1).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(riesz.removed_mean, 0.0);
    }

    #[test]
    fn unit_slot_example() {
        let g = WeightedGraph::from_edges(2, [Edge::new(0, 1, 1.0)]).unwrap();
        let df = differential(&g, &[1.0, 0.0]).unwrap();
        assert_eq!(df.get(&g, 0, 1), Some(1.0));
        assert_eq!(df.get(&g, 1, 0), Some(-1.0));
    }

    #[test]
    fn rejects_symmetric_form() {
        let g = lazy_k2();
        let bad = EdgeFunction::from_fn(&g, |x, y| if x == y { 0.0 } else { 1.0 });
        assert!(matches!(OneForm::new(&g, bad), Err(Error::NotAntisymmetric { .. })));
    }

    #[test]
    fn resolvent_small_s_and_constants() {
        let s = build(&BuilderSpec::sierpinski(2)).unwrap();
        let g = s.graph();
        let sd = SpectralDecomposition::new(g).unwrap();
        let calc = Calculus::Spectral(&sd);
        let f: Vec<f64> = (0..g.vertex_count()).map(|i| (i as f64).cos()).collect();
        let r = resolvent(g, &calc, 1e-8, &f).unwrap();
        assert!(r.iter().zip(&f).all(|(a, b)| (a - b).abs() <= 1e-6));
        let c = vec![1.5; g.vertex_count()];
        for out in [
            resolvent(g, &calc, 2.0, &c).unwrap(),
            resolvent_sqrt(g, &calc, 2.0, &c).unwrap(),
        ] {
            assert!(out.iter().all(|v| (v - 1.5).abs() < 1e-12));
        }
        assert!(resolvent(g, &calc, 0.0, &c).is_err());
    }

    #[test]
    fn linearized_gradient_bounds() {
        let s = build(&BuilderSpec::cycle(6)).unwrap();
        let g = s.graph();
        let f = [0.3, -1.0, 2.0, 0.1, 0.0, 1.2];
        let zero = EdgeFunction::zeros(g);
        assert!(linearized_gradient(g, &zero, &f).unwrap().iter().all(|v| *v == 0.0));
        let phi = gradient_direction(g, &f).unwrap();
        let lin = linearized_gradient(g, &phi, &f).unwrap();
        let grad = gradient_length(g, &f).unwrap();
        for (a, b) in lin.iter().zip(&grad) {
            assert!((a - 2.0 * b).abs() < 1e-12);
        }
        let mut big = phi.clone();
        big.scale(2.0);
        assert!(matches!(linearized_gradient(g, &big, &f), Err(Error::WeightBound { .. })));
    }
}
