//! The quasi-metric `rho = d^beta` and the ball geometry it induces.
//!
//! Balls are strict, `B(x, r) = {y : rho(x, y) < r}`, and radii are real.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fit::{fit_line, LineFit};
use crate::graph::{bfs, Vertex, WeightedGraph, UNREACHABLE};

/// Graphs up to this size keep an all-pairs distance table.
pub const ALL_PAIRS_LIMIT: usize = 5000;

#[derive(Debug, Clone, PartialEq)]
enum Distances {
    Table { n: usize, table: Vec<u32> },
    Bfs { offsets: Vec<usize>, targets: Vec<u32> },
}

impl Distances {
    fn new(graph: &WeightedGraph) -> Self {
        let n = graph.vertex_count();
        if n <= ALL_PAIRS_LIMIT {
            let mut table = Vec::with_capacity(n * n);
            for x in 0..n {
                table.extend(graph.bfs_distances(x));
            }
            Distances::Table { n, table }
        } else {
            Distances::Bfs {
                offsets: graph.offsets().to_vec(),
                targets: graph.targets().to_vec(),
            }
        }
    }

    fn len(&self) -> usize {
        match self {
            Distances::Table { n, .. } => *n,
            Distances::Bfs { offsets, .. } => offsets.len() - 1,
        }
    }

    fn get(&self, x: Vertex, y: Vertex) -> u32 {
        match self {
            Distances::Table { n, table } => table[x * n + y],
            Distances::Bfs { offsets, targets } => bfs(offsets, targets, x)[y],
        }
    }

    fn row(&self, x: Vertex) -> Vec<u32> {
        match self {
            Distances::Table { n, table } => table[x * n..(x + 1) * n].to_vec(),
            Distances::Bfs { offsets, targets } => bfs(offsets, targets, x),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Power { beta: f64, distances: Distances },
    Product {
        first: Box<QuasiMetric>,
        second: Box<QuasiMetric>,
    },
}

/// `rho(x, y) = d(x, y)^beta`, either with a constant exponent or as the
/// max of two factor quasi-metrics on a product vertex set.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiMetric {
    kind: Kind,
    len: usize,
}

impl QuasiMetric {
    /// Constant exponent `beta >= 1` on `graph`.
    pub fn power(graph: &WeightedGraph, beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta >= 1.0) {
            return Err(Error::InvalidParameter(format!("beta must be >= 1, got {beta}")));
        }
        let distances = Distances::new(graph);
        Ok(Self {
            len: distances.len(),
            kind: Kind::Power { beta, distances },
        })
    }

    /// `rho = max(rho_1, rho_2)` on `Gamma_1 x Gamma_2`, vertex `(x1, x2)`
    /// stored at index `x1 * n2 + x2`.
    pub fn product(first: QuasiMetric, second: QuasiMetric) -> Self {
        Self {
            len: first.len * second.len,
            kind: Kind::Product {
                first: Box::new(first),
                second: Box::new(second),
            },
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.len
    }

    /// The bound `B >= beta(x, y)`.
    pub fn bound(&self) -> f64 {
        match &self.kind {
            Kind::Power { beta, .. } => *beta,
            Kind::Product { first, second } => first.bound().max(second.bound()),
        }
    }

    /// Quasi-triangle constant `2^(B-1)`.
    pub fn triangle_constant(&self) -> f64 {
        (self.bound() - 1.0).exp2()
    }

    /// Combinatorial distance; on products this is `max(d_1, d_2)`.
    pub fn distance(&self, x: Vertex, y: Vertex) -> u32 {
        match &self.kind {
            Kind::Power { distances, .. } => distances.get(x, y),
            Kind::Product { first, second } => {
                let n2 = second.len;
                first
                    .distance(x / n2, y / n2)
                    .max(second.distance(x % n2, y % n2))
            }
        }
    }

    pub fn rho(&self, x: Vertex, y: Vertex) -> f64 {
        match &self.kind {
            Kind::Power { beta, distances } => power(distances.get(x, y), *beta),
            Kind::Product { first, second } => {
                let n2 = second.len;
                first
                    .rho(x / n2, y / n2)
                    .max(second.rho(x % n2, y % n2))
            }
        }
    }

    /// Pointwise exponent `beta(x, y) = log rho / log d` (`B` on the diagonal
    /// and at distance one, where any exponent fits).
    pub fn beta_at(&self, x: Vertex, y: Vertex) -> f64 {
        match &self.kind {
            Kind::Power { beta, .. } => *beta,
            Kind::Product { .. } => {
                let d = self.distance(x, y);
                if d <= 1 {
                    self.bound()
                } else {
                    self.rho(x, y).ln() / (d as f64).ln()
                }
            }
        }
    }

    /// `rho(x, .)` for every vertex.
    pub fn rho_row(&self, x: Vertex) -> Vec<f64> {
        match &self.kind {
            Kind::Power { beta, distances } => distances
                .row(x)
                .into_iter()
                .map(|d| power(d, *beta))
                .collect(),
            Kind::Product { first, second } => {
                let n2 = second.len;
                let r1 = first.rho_row(x / n2);
                let r2 = second.rho_row(x % n2);
                let mut row = Vec::with_capacity(self.len);
                for a in &r1 {
                    row.extend(r2.iter().map(|b| a.max(*b)));
                }
                row
            }
        }
    }

    /// `max_{x,y} rho(x, y)`.
    pub fn diameter(&self) -> f64 {
        match &self.kind {
            Kind::Power { beta, distances } => {
                let d = match distances {
                    Distances::Table { table, .. } => table.iter().copied().max().unwrap_or(0),
                    Distances::Bfs { .. } => (0..self.len)
                        .map(|x| distances.row(x).into_iter().max().unwrap_or(0))
                        .max()
                        .unwrap_or(0),
                };
                power(d, *beta)
            }
            Kind::Product { first, second } => first.diameter().max(second.diameter()),
        }
    }
}

fn power(d: u32, beta: f64) -> f64 {
    debug_assert!(d != UNREACHABLE);
    match d {
        0 => 0.0,
        1 => 1.0,
        _ if beta == 1.0 => d as f64,
        _ if beta == 2.0 => (d as f64) * (d as f64),
        _ => (d as f64).powf(beta),
    }
}

/// A ball together with its members and volume.
#[derive(Debug, Clone, PartialEq)]
pub struct BallGeometry {
    pub center: Vertex,
    pub radius: f64,
    /// Sorted vertex ids.
    pub members: Vec<Vertex>,
    pub volume: f64,
}

impl BallGeometry {
    pub fn contains(&self, y: Vertex) -> bool {
        self.members.binary_search(&y).is_ok()
    }
}

/// Distances from one center sorted increasingly, with prefix volumes, so
/// that `V(x, r)` costs a binary search.
#[derive(Debug, Clone)]
pub struct VolumeProfile {
    rho: Vec<f64>,
    cumulative: Vec<f64>,
}

impl VolumeProfile {
    pub fn volume(&self, r: f64) -> f64 {
        match self.rho.partition_point(|&v| v < r) {
            0 => 0.0,
            i => self.cumulative[i - 1],
        }
    }

    /// Distinct values of `rho(x, .)`, increasing.
    pub fn distinct_radii(&self) -> Vec<f64> {
        let mut v = self.rho.clone();
        v.dedup();
        v
    }
}

/// Result of [`Space::doubling_scan`].
#[derive(Debug, Clone, PartialEq)]
pub struct DoublingReport {
    /// `max V(x, 2r) / V(x, r)` over the sample grid.
    pub max_ratio: f64,
    pub argmax_center: Vertex,
    pub argmax_radius: f64,
    /// Least-squares slope of `log V(x, r) / V(x, r_0)` against `log r / r_0`.
    pub exponent: LineFit,
}

/// A graph with its quasi-metric and the boundary of the finite truncation.
#[derive(Debug, Clone)]
pub struct Space {
    graph: WeightedGraph,
    metric: QuasiMetric,
    boundary: Vec<Vertex>,
    coords: Option<Vec<[f64; 2]>>,
}

impl Space {
    pub fn new(graph: WeightedGraph, metric: QuasiMetric, mut boundary: Vec<Vertex>) -> Result<Self> {
        let n = graph.vertex_count();
        if metric.vertex_count() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: metric.vertex_count(),
            });
        }
        if let Some(&b) = boundary.iter().find(|&&b| b >= n) {
            return Err(Error::VertexOutOfRange { vertex: b, count: n });
        }
        boundary.sort_unstable();
        boundary.dedup();
        Ok(Self {
            graph,
            metric,
            boundary,
            coords: None,
        })
    }

    pub fn with_coords(mut self, coords: Vec<[f64; 2]>) -> Result<Self> {
        crate::vecops::check_len(self.vertex_count(), coords.len())?;
        self.coords = Some(coords);
        Ok(self)
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    pub fn metric(&self) -> &QuasiMetric {
        &self.metric
    }

    pub fn boundary(&self) -> &[Vertex] {
        &self.boundary
    }

    pub fn coords(&self) -> Option<&[[f64; 2]]> {
        self.coords.as_deref()
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn measure(&self) -> &[f64] {
        self.graph.measure()
    }

    pub fn bound(&self) -> f64 {
        self.metric.bound()
    }

    pub fn rho(&self, x: Vertex, y: Vertex) -> f64 {
        self.metric.rho(x, y)
    }

    pub fn rho_row(&self, x: Vertex) -> Vec<f64> {
        self.metric.rho_row(x)
    }

    pub fn ball(&self, x: Vertex, r: f64) -> BallGeometry {
        let m = self.measure();
        let members: Vec<Vertex> = self
            .rho_row(x)
            .iter()
            .enumerate()
            .filter(|(_, &v)| v < r)
            .map(|(y, _)| y)
            .collect();
        let volume = members.iter().map(|&y| m[y]).sum();
        BallGeometry {
            center: x,
            radius: r,
            members,
            volume,
        }
    }

    pub fn volume(&self, x: Vertex, r: f64) -> f64 {
        let m = self.measure();
        self.rho_row(x)
            .iter()
            .zip(m)
            .filter(|(&v, _)| v < r)
            .map(|(_, w)| w)
            .sum()
    }

    pub fn volume_profile(&self, x: Vertex) -> VolumeProfile {
        let row = self.rho_row(x);
        profile_from_row(&row, self.measure())
    }

    /// `C_0(x,k) = B(x, 2^(B+1) k)` and, for `j >= 1`,
    /// `C_j(x,k) = B(x, 2^(B+j+1) k) \ B(x, 2^(B+j) k)`.
    pub fn annulus(&self, x: Vertex, k: f64, j: u32) -> Vec<Vertex> {
        let (inner, outer) = self.annulus_radii(k, j);
        self.rho_row(x)
            .iter()
            .enumerate()
            .filter(|(_, &v)| v < outer && v >= inner)
            .map(|(y, _)| y)
            .collect()
    }

    /// `(inner, outer)` radii of `C_j(x, k)`; `inner = 0` for `j = 0`.
    pub fn annulus_radii(&self, k: f64, j: u32) -> (f64, f64) {
        let b = self.bound();
        let outer = (b + j as f64 + 1.0).exp2() * k;
        let inner = if j == 0 { 0.0 } else { (b + j as f64).exp2() * k };
        (inner, outer)
    }

    /// `rho(E, F) = min rho(e, f)`; infinite if either set is empty.
    pub fn set_distance(&self, e: &[Vertex], f: &[Vertex]) -> f64 {
        let mut best = f64::INFINITY;
        for &x in e {
            let row = self.rho_row(x);
            for &y in f {
                best = best.min(row[y]);
            }
        }
        best
    }

    /// `rho(x, boundary)`, infinite when there is no boundary.
    pub fn boundary_distance(&self, x: Vertex) -> f64 {
        if self.boundary.is_empty() {
            return f64::INFINITY;
        }
        let row = self.rho_row(x);
        self.boundary.iter().map(|&b| row[b]).fold(f64::INFINITY, f64::min)
    }

    /// Safe-zone predicate `rho(x, boundary) >= margin`.
    pub fn is_safe(&self, x: Vertex, margin: f64) -> bool {
        self.boundary_distance(x) >= margin
    }

    /// Vertices whose distance to the boundary is at least `margin`.
    pub fn safe_zone(&self, margin: f64) -> Vec<Vertex> {
        (0..self.vertex_count())
            .filter(|&x| self.is_safe(x, margin))
            .collect()
    }

    /// Scans `V(x, 2r) / V(x, r)` over `sample x radii` and fits the growth
    /// exponent `d` in `V(x, lambda r) ~ lambda^d V(x, r)`.
    pub fn doubling_scan(&self, radii: &[f64], sample: &[Vertex]) -> Result<DoublingReport> {
        if sample.is_empty() || radii.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some(r) = radii.iter().find(|r| !(**r > 0.0)) {
            return Err(Error::InvalidParameter(format!("radius {r} must be positive")));
        }
        let r0 = radii.iter().copied().fold(f64::INFINITY, f64::min);
        let mut report = DoublingReport {
            max_ratio: 0.0,
            argmax_center: sample[0],
            argmax_radius: radii[0],
            exponent: LineFit {
                slope: 0.0,
                intercept: 0.0,
                residual_std_error: 0.0,
                slope_std_error: 0.0,
                points: 0,
            },
        };
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for &x in sample {
            let profile = self.volume_profile(x);
            let v0 = profile.volume(r0);
            for &r in radii {
                let ratio = profile.volume(2.0 * r) / profile.volume(r);
                if ratio > report.max_ratio {
                    report.max_ratio = ratio;
                    report.argmax_center = x;
                    report.argmax_radius = r;
                }
                xs.push((r / r0).ln());
                ys.push((profile.volume(r) / v0).ln());
            }
        }
        report.exponent = fit_line(&xs, &ys)?;
        Ok(report)
    }

    /// Dense table of all `rho(x, y)`; intended for small graphs.
    pub fn rho_table(&self) -> RhoTable {
        let n = self.vertex_count();
        let mut values = Vec::with_capacity(n * n);
        for x in 0..n {
            values.extend(self.rho_row(x));
        }
        RhoTable { n, values }
    }
}

pub(crate) fn profile_from_row(row: &[f64], m: &[f64]) -> VolumeProfile {
    let mut order: Vec<usize> = (0..row.len()).collect();
    order.sort_by(|&a, &b| row[a].total_cmp(&row[b]).then(a.cmp(&b)));
    let mut acc = 0.0;
    let mut rho = Vec::with_capacity(row.len());
    let mut cumulative = Vec::with_capacity(row.len());
    for y in order {
        acc += m[y];
        rho.push(row[y]);
        cumulative.push(acc);
    }
    VolumeProfile { rho, cumulative }
}

/// All-pairs `rho` for exhaustive small-graph computations.
#[derive(Debug, Clone)]
pub struct RhoTable {
    n: usize,
    values: Vec<f64>,
}

impl RhoTable {
    pub fn get(&self, x: Vertex, y: Vertex) -> f64 {
        self.values[x * self.n + y]
    }

    pub fn row(&self, x: Vertex) -> &[f64] {
        &self.values[x * self.n..(x + 1) * self.n]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// `rho(y, S)` for every `y`, infinite when `S` is empty.
    pub fn distance_to_set(&self, set: &[bool]) -> Vec<f64> {
        (0..self.n)
            .map(|y| {
                self.row(y)
                    .iter()
                    .zip(set)
                    .filter(|(_, &s)| s)
                    .map(|(&v, _)| v)
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    }
}

/// Indicator vector of `members` in a graph of `n` vertices.
pub fn indicator(n: usize, members: &[Vertex]) -> Vec<bool> {
    let mut v = vec![false; n];
    for &y in members {
        v[y] = true;
    }
    v
}
