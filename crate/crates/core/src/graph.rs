//! Weighted graphs with a compressed adjacency layout.
//!
//! A graph is given by a symmetric weight `mu_xy > 0` on its edges (loops
//! allowed). The vertex measure is `m(x) = sum_{y ~ x} mu_xy`, each loop
//! counted once, and the reversible kernel is `p(x,y) = mu_xy / (m(x) m(y))`.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

pub type Vertex = usize;

/// Marker used by [`WeightedGraph::bfs_distances`] for vertices not reached.
pub const UNREACHABLE: u32 = u32::MAX;

/// An undirected edge `{u, v}` carrying the weight `mu_uv`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: Vertex,
    pub v: Vertex,
    pub weight: f64,
}

impl Edge {
    pub fn new(u: Vertex, v: Vertex, weight: f64) -> Self {
        Self { u, v, weight }
    }

    pub fn is_loop(&self) -> bool {
        self.u == self.v
    }
}

/// Immutable connected weighted graph.
///
/// Adjacency is stored in CSR form; every undirected edge `{x, y}` with
/// `x != y` occupies two slots (one per direction), a loop occupies one.
/// Neighbor lists are sorted by vertex id.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    weights: Vec<f64>,
    measure: Vec<f64>,
    edge_count: usize,
}

impl WeightedGraph {
    /// Builds a graph from an undirected edge list.
    ///
    /// Rejects out-of-range ids, nonpositive or non-finite weights, repeated
    /// edges and disconnected graphs.
    pub fn from_edges<I>(vertex_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = Edge>,
    {
        if vertex_count == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut adjacency: Vec<Vec<(u32, f64)>> = vec![Vec::new(); vertex_count];
        let mut edge_count = 0;
        for Edge { u, v, weight } in edges {
            for w in [u, v] {
                if w >= vertex_count {
                    return Err(Error::VertexOutOfRange {
                        vertex: w,
                        count: vertex_count,
                    });
                }
            }
            if !(weight.is_finite() && weight > 0.0) {
                return Err(Error::InvalidWeight { u, v, weight });
            }
            adjacency[u].push((v as u32, weight));
            if u != v {
                adjacency[v].push((u as u32, weight));
            }
            edge_count += 1;
        }
        let mut offsets = Vec::with_capacity(vertex_count + 1);
        let mut targets = Vec::new();
        let mut weights = Vec::new();
        offsets.push(0);
        for (x, list) in adjacency.iter_mut().enumerate() {
            list.sort_by(|a, b| a.0.cmp(&b.0));
            for pair in list.windows(2) {
                if pair[0].0 == pair[1].0 {
                    let (u, v) = (x.min(pair[0].0 as usize), x.max(pair[0].0 as usize));
                    return Err(Error::DuplicateEdge { u, v });
                }
            }
            for &(y, w) in list.iter() {
                targets.push(y);
                weights.push(w);
            }
            offsets.push(targets.len());
        }
        Self::from_csr(offsets, targets, weights, edge_count)
    }

    /// Builds a graph from an already sorted, symmetric CSR layout.
    pub(crate) fn from_csr(
        offsets: Vec<usize>,
        targets: Vec<u32>,
        weights: Vec<f64>,
        edge_count: usize,
    ) -> Result<Self> {
        let n = offsets.len() - 1;
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        let measure: Vec<f64> = (0..n)
            .map(|x| weights[offsets[x]..offsets[x + 1]].iter().sum())
            .collect();
        if let Some(x) = measure.iter().position(|&m| m <= 0.0) {
            return Err(Error::ZeroMeasure(x));
        }
        let graph = Self {
            offsets,
            targets,
            weights,
            measure,
            edge_count,
        };
        let reach = graph.bfs_distances(0);
        if let Some(x) = reach.iter().position(|&d| d == UNREACHABLE) {
            return Err(Error::Disconnected(x));
        }
        Ok(graph)
    }

    pub fn vertex_count(&self) -> usize {
        self.measure.len()
    }

    /// Number of undirected edges, loops included.
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn loop_count(&self) -> usize {
        (0..self.vertex_count())
            .filter(|&x| self.weight(x, x).is_some())
            .count()
    }

    /// Undirected edges with `u <= v`, in vertex order.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        (0..self.vertex_count()).flat_map(move |x| {
            self.neighbors(x)
                .filter(move |&(y, _)| y >= x)
                .map(move |(y, w)| Edge::new(x, y, w))
        })
    }

    /// Neighbors `(y, mu_xy)` of `x`, sorted by `y`; a loop shows up as `(x, mu_xx)`.
    pub fn neighbors(&self, x: Vertex) -> impl Iterator<Item = (Vertex, f64)> + '_ {
        let range = self.offsets[x]..self.offsets[x + 1];
        self.targets[range.clone()]
            .iter()
            .zip(&self.weights[range])
            .map(|(&y, &w)| (y as usize, w))
    }

    pub fn degree(&self, x: Vertex) -> usize {
        self.offsets[x + 1] - self.offsets[x]
    }

    /// `M_0`: the largest number of neighbors of a vertex.
    pub fn max_degree(&self) -> usize {
        (0..self.vertex_count())
            .map(|x| self.degree(x))
            .max()
            .unwrap_or(0)
    }

    pub fn check_degree_bound(&self, bound: usize) -> Result<()> {
        let degree = self.max_degree();
        if degree > bound {
            return Err(Error::DegreeBound { degree, bound });
        }
        Ok(())
    }

    /// `mu_xy`, or `None` when `x` and `y` are not neighbors.
    pub fn weight(&self, x: Vertex, y: Vertex) -> Option<f64> {
        let range = self.offsets[x]..self.offsets[x + 1];
        self.targets[range.clone()]
            .binary_search(&(y as u32))
            .ok()
            .map(|i| self.weights[range.start + i])
    }

    pub fn measure(&self) -> &[f64] {
        &self.measure
    }

    pub fn total_measure(&self) -> f64 {
        self.measure.iter().sum()
    }

    /// `p(x,y) = mu_xy / (m(x) m(y))`.
    pub fn transition(&self, x: Vertex, y: Vertex) -> f64 {
        self.weight(x, y)
            .map_or(0.0, |w| w / (self.measure[x] * self.measure[y]))
    }

    /// `min_x p(x,x) m(x)`, the laziness constant.
    pub fn laziness(&self) -> f64 {
        (0..self.vertex_count())
            .map(|x| self.weight(x, x).unwrap_or(0.0) / self.measure[x])
            .fold(f64::INFINITY, f64::min)
    }

    pub(crate) fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub(crate) fn targets(&self) -> &[u32] {
        &self.targets
    }

    pub(crate) fn slot_weights(&self) -> &[f64] {
        &self.weights
    }

    /// Total number of directed adjacency slots.
    pub fn slot_count(&self) -> usize {
        self.targets.len()
    }

    /// For each slot `(x -> y)`, the index of the slot `(y -> x)`.
    pub fn reverse_slots(&self) -> Vec<usize> {
        let mut reverse = vec![0; self.slot_count()];
        for x in 0..self.vertex_count() {
            for s in self.offsets[x]..self.offsets[x + 1] {
                let y = self.targets[s] as usize;
                let range = self.offsets[y]..self.offsets[y + 1];
                let i = self.targets[range.clone()]
                    .binary_search(&(x as u32))
                    .expect("adjacency is symmetric");
                reverse[s] = range.start + i;
            }
        }
        reverse
    }

    /// Breadth-first distances from `source`; loops are ignored.
    pub fn bfs_distances(&self, source: Vertex) -> Vec<u32> {
        bfs(&self.offsets, &self.targets, source)
    }

    /// Length of the shortest path between `x` and `y`.
    pub fn graph_distance(&self, x: Vertex, y: Vertex) -> Result<u32> {
        let n = self.vertex_count();
        for v in [x, y] {
            if v >= n {
                return Err(Error::VertexOutOfRange {
                    vertex: v,
                    count: n,
                });
            }
        }
        match self.bfs_distances(x)[y] {
            UNREACHABLE => Err(Error::Unreachable(x, y)),
            d => Ok(d),
        }
    }

    /// Largest graph distance from `x`.
    pub fn eccentricity(&self, x: Vertex) -> u32 {
        self.bfs_distances(x).into_iter().max().unwrap_or(0)
    }
}

pub(crate) fn bfs(offsets: &[usize], targets: &[u32], source: Vertex) -> Vec<u32> {
    let n = offsets.len() - 1;
    let mut dist = vec![UNREACHABLE; n];
    let mut queue = VecDeque::new();
    dist[source] = 0;
    queue.push_back(source);
    while let Some(x) = queue.pop_front() {
        let next = dist[x] + 1;
        for &y in &targets[offsets[x]..offsets[x + 1]] {
            let y = y as usize;
            if dist[y] == UNREACHABLE {
                dist[y] = next;
                queue.push_back(y);
            }
        }
    }
    dist
}
