//! Concrete graph families and the laziness transform.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::graph::{Edge, Vertex, WeightedGraph};
use crate::metric::{QuasiMetric, Space};

/// Graph family of a [`BuilderSpec`].
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// Box `{0..side-1}^dim` of `Z^dim` with nearest-neighbour edges.
    Lattice { dim: usize, side: usize },
    Cycle(usize),
    Path(usize),
    /// Level-`L` Sierpinski gasket prefractal.
    Sierpinski(u32),
    /// Free product of two (lazified) factors.
    FreeProduct(Box<BuilderSpec>, Box<BuilderSpec>),
}

/// Recipe for a graph plus its quasi-metric.
#[derive(Debug, Clone, PartialEq)]
pub struct BuilderSpec {
    pub family: Family,
    /// Target laziness `alpha` of [`lazify`]; `None` keeps the bare graph.
    /// Ignored on free products, whose factors carry their own.
    pub laziness: Option<f64>,
    /// Overrides the family's default exponent.
    pub beta: Option<f64>,
}

impl BuilderSpec {
    pub fn new(family: Family) -> Self {
        Self {
            family,
            laziness: Some(0.5),
            beta: None,
        }
    }

    pub fn lattice(dim: usize, side: usize) -> Self {
        Self::new(Family::Lattice { dim, side })
    }

    pub fn cycle(n: usize) -> Self {
        Self::new(Family::Cycle(n))
    }

    pub fn path(n: usize) -> Self {
        Self::new(Family::Path(n))
    }

    pub fn sierpinski(level: u32) -> Self {
        Self::new(Family::Sierpinski(level))
    }

    pub fn free_product(first: BuilderSpec, second: BuilderSpec) -> Self {
        Self::new(Family::FreeProduct(Box::new(first), Box::new(second)))
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = Some(beta);
        self
    }

    pub fn with_laziness(mut self, alpha: Option<f64>) -> Self {
        self.laziness = alpha;
        self
    }

    /// Exponent used for the quasi-metric: 2 for lattices, cycles and paths,
    /// `log2 5` for gaskets, the max of the factors for products.
    pub fn default_beta(&self) -> f64 {
        match &self.family {
            Family::Sierpinski(_) => 5f64.log2(),
            Family::FreeProduct(a, b) => a.effective_beta().max(b.effective_beta()),
            _ => 2.0,
        }
    }

    pub fn effective_beta(&self) -> f64 {
        self.beta.unwrap_or_else(|| self.default_beta())
    }
}

/// Builds the graph and quasi-metric described by `spec`.
pub fn build(spec: &BuilderSpec) -> Result<Space> {
    if let Family::FreeProduct(a, b) = &spec.family {
        let (s1, s2) = (build(a)?, build(b)?);
        return free_product(&s1, &s2);
    }
    let raw = raw_graph(&spec.family)?;
    let graph = match spec.laziness {
        Some(alpha) => lazify(&raw.graph, alpha)?,
        None => raw.graph,
    };
    let metric = QuasiMetric::power(&graph, spec.effective_beta())?;
    let space = Space::new(graph, metric, raw.boundary)?;
    match raw.coords {
        Some(c) => space.with_coords(c),
        None => Ok(space),
    }
}

struct RawGraph {
    graph: WeightedGraph,
    boundary: Vec<Vertex>,
    coords: Option<Vec<[f64; 2]>>,
}

fn raw_graph(family: &Family) -> Result<RawGraph> {
    match *family {
        Family::Lattice { dim, side } => lattice(dim, side),
        Family::Cycle(n) => {
            if n < 3 {
                return Err(Error::InvalidParameter(format!("cycle needs n >= 3, got {n}")));
            }
            let graph = WeightedGraph::from_edges(n, (0..n).map(|i| Edge::new(i, (i + 1) % n, 1.0)))?;
            let coords = (0..n)
                .map(|i| {
                    let t = 2.0 * core::f64::consts::PI * i as f64 / n as f64;
                    [t.cos(), t.sin()]
                })
                .collect();
            Ok(RawGraph {
                graph,
                boundary: Vec::new(),
                coords: Some(coords),
            })
        }
        Family::Path(n) => {
            if n < 2 {
                return Err(Error::InvalidParameter(format!("path needs n >= 2, got {n}")));
            }
            lattice(1, n)
        }
        Family::Sierpinski(level) => sierpinski(level),
        Family::FreeProduct(..) => unreachable!("handled by build"),
    }
}

fn lattice(dim: usize, side: usize) -> Result<RawGraph> {
    if dim == 0 || side < 2 {
        return Err(Error::InvalidParameter(format!(
            "lattice needs dim >= 1 and side >= 2, got dim {dim}, side {side}"
        )));
    }
    let n = side
        .checked_pow(dim as u32)
        .filter(|&n| n <= u32::MAX as usize)
        .ok_or_else(|| Error::InvalidParameter(format!("lattice {side}^{dim} too large")))?;
    let mut edges = Vec::with_capacity(n * dim);
    let mut boundary = Vec::new();
    let mut coord = vec![0usize; dim];
    for x in 0..n {
        let mut rest = x;
        for c in coord.iter_mut() {
            *c = rest % side;
            rest /= side;
        }
        if coord.iter().any(|&c| c == 0 || c == side - 1) {
            boundary.push(x);
        }
        let mut stride = 1;
        for &c in &coord {
            if c + 1 < side {
                edges.push(Edge::new(x, x + stride, 1.0));
            }
            stride *= side;
        }
    }
    let coords = (dim <= 2).then(|| {
        (0..n)
            .map(|x| [(x % side) as f64, if dim == 2 { (x / side) as f64 } else { 0.0 }])
            .collect()
    });
    Ok(RawGraph {
        graph: WeightedGraph::from_edges(n, edges)?,
        boundary,
        coords,
    })
}

/// Vertex count `3 (3^L + 1) / 2` of the level-`L` gasket.
pub fn sierpinski_vertex_count(level: u32) -> usize {
    3 * (3usize.pow(level) + 1) / 2
}

fn sierpinski(level: u32) -> Result<RawGraph> {
    if level > 12 {
        return Err(Error::InvalidParameter(format!("gasket level {level} exceeds 12")));
    }
    // Triangular-lattice coordinates (i, j); corners (0,0), (2^L,0), (0,2^L).
    let mut segments: Vec<[(i64, i64); 2]> = vec![[(0, 0), (1, 0)], [(0, 0), (0, 1)], [(1, 0), (0, 1)]];
    for l in 0..level {
        let s = 1i64 << l;
        let mut next = Vec::with_capacity(segments.len() * 3);
        for (di, dj) in [(0, 0), (s, 0), (0, s)] {
            next.extend(
                segments
                    .iter()
                    .map(|[a, b]| [(a.0 + di, a.1 + dj), (b.0 + di, b.1 + dj)]),
            );
        }
        segments = next;
    }
    let mut ids: BTreeMap<(i64, i64), usize> = BTreeMap::new();
    ids.insert((0, 0), 0);
    let mut coords = vec![[0.0, 0.0]];
    let mut id_of = |p: (i64, i64), coords: &mut Vec<[f64; 2]>| -> usize {
        let next = ids.len();
        *ids.entry(p).or_insert_with(|| {
            coords.push([p.0 as f64 + 0.5 * p.1 as f64, p.1 as f64 * 0.75f64.sqrt()]);
            next
        })
    };
    let mut edges = Vec::with_capacity(segments.len());
    for [a, b] in &segments {
        let u = id_of(*a, &mut coords);
        let v = id_of(*b, &mut coords);
        edges.push(Edge::new(u, v, 1.0));
    }
    let side = 1i64 << level;
    let boundary = vec![ids[&(side, 0)], ids[&(0, side)]];
    let n = ids.len();
    debug_assert_eq!(n, sierpinski_vertex_count(level));
    Ok(RawGraph {
        graph: WeightedGraph::from_edges(n, edges)?,
        boundary,
        coords: Some(coords),
    })
}

/// Adds or enlarges loops so that `mu_xx / m(x) >= alpha` everywhere.
///
/// Vertices already meeting the target are left untouched.
pub fn lazify(graph: &WeightedGraph, alpha: f64) -> Result<WeightedGraph> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("laziness must lie in (0,1), got {alpha}")));
    }
    let n = graph.vertex_count();
    let mut edges: Vec<Edge> = graph.edges().filter(|e| !e.is_loop()).collect();
    for x in 0..n {
        let current = graph.weight(x, x).unwrap_or(0.0);
        let rest = graph.measure()[x] - current;
        // Relative slack keeps the transform idempotent under rounding.
        let loop_weight = if current >= alpha * graph.measure()[x] * (1.0 - 1e-12) {
            current
        } else {
            alpha * rest / (1.0 - alpha)
        };
        if loop_weight > 0.0 {
            edges.push(Edge::new(x, x, loop_weight));
        }
    }
    WeightedGraph::from_edges(n, edges)
}

/// Free product `Gamma_1 x Gamma_2`: `(x1,x2) ~ (y1,y2)` iff `x1 ~ y1` and
/// `x2 ~ y2` (loops included) with weight `mu^1 mu^2`.
///
/// Vertex `(x1, x2)` is stored at `x1 * n2 + x2`; the boundary is the set of
/// pairs with a boundary coordinate.
pub fn free_product(first: &Space, second: &Space) -> Result<Space> {
    let (g1, g2) = (first.graph(), second.graph());
    let (n1, n2) = (g1.vertex_count(), g2.vertex_count());
    let n = n1
        .checked_mul(n2)
        .filter(|&n| n <= u32::MAX as usize)
        .ok_or_else(|| Error::InvalidParameter(format!("product {n1} x {n2} too large")))?;
    let slots = g1.slot_count() * g2.slot_count();
    let mut offsets = Vec::with_capacity(n + 1);
    let mut targets = Vec::with_capacity(slots);
    let mut weights = Vec::with_capacity(slots);
    offsets.push(0);
    let mut loops = 0;
    for x1 in 0..n1 {
        for x2 in 0..n2 {
            for (y1, w1) in g1.neighbors(x1) {
                for (y2, w2) in g2.neighbors(x2) {
                    let y = y1 * n2 + y2;
                    if y == x1 * n2 + x2 {
                        loops += 1;
                    }
                    targets.push(y as u32);
                    weights.push(w1 * w2);
                }
            }
            offsets.push(targets.len());
        }
    }
    let edge_count = (targets.len() + loops) / 2;
    let graph = WeightedGraph::from_csr(offsets, targets, weights, edge_count)?;
    let metric = QuasiMetric::product(first.metric().clone(), second.metric().clone());
    let on_b1 = crate::metric::indicator(n1, first.boundary());
    let on_b2 = crate::metric::indicator(n2, second.boundary());
    let boundary = (0..n).filter(|&x| on_b1[x / n2] || on_b2[x % n2]).collect();
    Space::new(graph, metric, boundary)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k2(laziness: Option<f64>) -> Space {
        let g = WeightedGraph::from_edges(2, [Edge::new(0, 1, 1.0)]).unwrap();
        let g = match laziness {
            Some(a) => lazify(&g, a).unwrap(),
            None => g,
        };
        let q = QuasiMetric::power(&g, 2.0).unwrap();
        Space::new(g, q, vec![]).unwrap()
    }

    #[test]
    fn gasket_counts() {
        for level in 0..6 {
            let s = build(&BuilderSpec::sierpinski(level).with_laziness(None)).unwrap();
            assert_eq!(s.vertex_count(), sierpinski_vertex_count(level));
            assert_eq!(s.graph().edge_count(), 3usize.pow(level + 1));
        }
        let s1 = build(&BuilderSpec::sierpinski(1).with_laziness(None)).unwrap();
        assert_eq!(s1.vertex_count(), 6);
        assert_eq!(s1.graph().edge_count(), 9);
        // Corners have degree 2, the three midpoints degree 4.
        let mut degrees: Vec<usize> = (0..6).map(|x| s1.graph().degree(x)).collect();
        degrees.sort();
        assert_eq!(degrees, vec![2, 2, 2, 4, 4, 4]);
        assert_eq!(s1.graph().degree(0), 2);
        assert_eq!(s1.boundary().len(), 2);
    }

    #[test]
    fn lattice_1d_is_path() {
        let s = build(&BuilderSpec::lattice(1, 7).with_laziness(None)).unwrap();
        assert_eq!(s.vertex_count(), 7);
        assert_eq!(s.graph().edge_count(), 6);
        assert_eq!(s.boundary(), &[0, 6]);
        let s2 = build(&BuilderSpec::lattice(2, 5).with_laziness(None)).unwrap();
        assert_eq!(s2.graph().edge_count(), 2 * 5 * 4);
        assert_eq!(s2.boundary().len(), 16);
        assert!(build(&BuilderSpec::lattice(2, 1)).is_err());
    }

    #[test]
    fn lazify_examples() {
        let s = k2(Some(0.5));
        assert_eq!(s.graph().weight(0, 0), Some(1.0));
        assert_eq!(s.measure(), &[2.0, 2.0]);
        assert_eq!(s.graph().laziness(), 0.5);
        let c = build(&BuilderSpec::cycle(4)).unwrap();
        assert_eq!(c.graph().weight(1, 1), Some(2.0));
        assert_eq!(c.measure(), &[4.0; 4]);
        // Already lazy enough: unchanged.
        let again = lazify(c.graph(), 0.5).unwrap();
        assert_eq!(&again, c.graph());
        let again = lazify(c.graph(), 0.25).unwrap();
        assert_eq!(&again, c.graph());
        assert!(lazify(c.graph(), 1.0).is_err());
    }

    #[test]
    fn k2_product() {
        let a = k2(Some(0.5));
        let p = free_product(&a, &a).unwrap();
        assert_eq!(p.vertex_count(), 4);
        // Every pair is adjacent-or-loop in both coordinates.
        for x in 0..4 {
            assert_eq!(p.graph().degree(x), 4);
            assert_eq!(p.measure()[x], 4.0);
        }
        assert_eq!(p.graph().edge_count(), 10);
    }

    #[test]
    fn bare_bipartite_product_is_disconnected() {
        let a = k2(None);
        assert!(matches!(free_product(&a, &a), Err(Error::Disconnected(_))));
    }

    #[test]
    fn default_betas() {
        assert_eq!(BuilderSpec::lattice(2, 3).default_beta(), 2.0);
        assert_eq!(BuilderSpec::sierpinski(2).default_beta(), 5f64.log2());
        let p = BuilderSpec::free_product(BuilderSpec::lattice(2, 3), BuilderSpec::sierpinski(2));
        assert_eq!(p.default_beta(), 5f64.log2());
        assert_eq!(BuilderSpec::path(4).with_beta(1.0).effective_beta(), 1.0);
    }
}
