//! Graph files, JSON sidecars and CSV tables.
//!
//! Graph text format: a header `vertices N` followed by one undirected edge
//! `u v w` per line (0-based ids, loops allowed). Weights are written in the
//! shortest decimal form that parses back to the same `f64`, so a
//! write/read cycle is bit-exact. Blank lines and `#` comments are ignored.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use rieszlab_core::builders::{build, Family};
use rieszlab_core::calculus::OneForm;
use rieszlab_core::functionals::TentField;
use rieszlab_core::markov::KernelField;
use rieszlab_core::{Edge, QuasiMetric, Space, WeightedGraph};
use serde::{Deserialize, Serialize};

use crate::spec::{describe, parse_family};

pub fn write_graph<W: Write>(mut out: W, graph: &WeightedGraph) -> Result<()> {
    writeln!(out, "vertices {}", graph.vertex_count())?;
    for e in graph.edges() {
        writeln!(out, "{} {} {}", e.u, e.v, e.weight)?;
    }
    Ok(())
}

pub fn read_graph<R: Read>(input: R) -> Result<WeightedGraph> {
    let mut n = None;
    let mut edges = Vec::new();
    for (i, line) in BufReader::new(input).lines().enumerate() {
        let line = line?;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let at = || format!("line {}", i + 1);
        match (n, fields.as_slice()) {
            (None, ["vertices", count]) => n = Some(count.parse::<usize>().with_context(at)?),
            (None, _) => bail!("{}: expected `vertices N` header", at()),
            (Some(_), [u, v, w]) => edges.push(Edge::new(
                u.parse().with_context(at)?,
                v.parse().with_context(at)?,
                w.parse().with_context(at)?,
            )),
            (Some(_), _) => bail!("{}: expected `u v w`", at()),
        }
    }
    let n = n.ok_or_else(|| anyhow!("missing `vertices N` header"))?;
    Ok(WeightedGraph::from_edges(n, edges)?)
}

/// Metadata written next to a graph file as `<graph>.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSidecar {
    /// Recipe in the syntax of [`crate::spec::parse_family`], if the graph was built.
    pub family: Option<String>,
    /// Largest exponent `B` of the quasi-metric.
    pub beta: f64,
    /// Achieved `min_x p(x,x) m(x)`.
    pub epsilon_lb: f64,
    pub vertices: usize,
    pub edges: usize,
    pub loops: usize,
    pub boundary: Vec<usize>,
}

impl GraphSidecar {
    pub fn describe(space: &Space, family: Option<String>) -> Self {
        let g = space.graph();
        Self {
            family,
            beta: space.bound(),
            epsilon_lb: g.laziness(),
            vertices: g.vertex_count(),
            edges: g.edge_count(),
            loops: g.loop_count(),
            boundary: space.boundary().to_vec(),
        }
    }
}

pub fn sidecar_path(graph_path: &Path) -> PathBuf {
    let mut os = graph_path.as_os_str().to_owned();
    os.push(".json");
    PathBuf::from(os)
}

/// Writes the graph of `space` and its sidecar.
pub fn save_space(path: &Path, space: &Space, family: Option<String>) -> Result<()> {
    let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = std::io::BufWriter::new(file);
    write_graph(&mut out, space.graph())?;
    out.flush()?;
    let sidecar = GraphSidecar::describe(space, family);
    fs::write(sidecar_path(path), serde_json::to_string_pretty(&sidecar)? + "\n")?;
    Ok(())
}

/// Loads a graph file and its sidecar into a [`Space`].
///
/// Products are rebuilt from their recipe (the file must match it); other
/// graphs get the constant exponent of the sidecar. Without a sidecar the
/// exponent is 2 and the boundary empty.
pub fn load_space(path: &Path) -> Result<Space> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let graph = read_graph(file).with_context(|| format!("reading {}", path.display()))?;
    let side = sidecar_path(path);
    if !side.exists() {
        let metric = QuasiMetric::power(&graph, 2.0)?;
        return Ok(Space::new(graph, metric, Vec::new())?);
    }
    let sidecar: GraphSidecar = serde_json::from_str(&fs::read_to_string(&side)?)
        .with_context(|| format!("parsing {}", side.display()))?;
    if let Some(recipe) = &sidecar.family {
        let spec = parse_family(recipe)?;
        if matches!(spec.family, Family::FreeProduct(..)) {
            let space = build(&spec)?;
            if space.graph() != &graph {
                bail!("{} does not match its recipe `{}`", path.display(), describe(&spec));
            }
            return Ok(space);
        }
    }
    let metric = QuasiMetric::power(&graph, sidecar.beta)?;
    Ok(Space::new(graph, metric, sidecar.boundary)?)
}

#[derive(Serialize, Deserialize)]
struct VertexValue {
    vertex: usize,
    value: f64,
}

/// Writes `vertex,value` rows.
pub fn write_function(path: &Path, f: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for (vertex, &value) in f.iter().enumerate() {
        w.serialize(VertexValue { vertex, value })?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `vertex,value` rows; every vertex of `0..n` must appear exactly once.
pub fn read_function(path: &Path, n: usize) -> Result<Vec<f64>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let mut out = vec![None; n];
    for row in r.deserialize() {
        let VertexValue { vertex, value } = row?;
        let slot = out
            .get_mut(vertex)
            .ok_or_else(|| anyhow!("vertex {vertex} out of range 0..{n}"))?;
        if slot.replace(value).is_some() {
            bail!("vertex {vertex} listed twice");
        }
    }
    out.into_iter()
        .enumerate()
        .map(|(v, x)| x.ok_or_else(|| anyhow!("vertex {v} missing")))
        .collect()
}

#[derive(Serialize, Deserialize)]
struct TentValue {
    vertex: usize,
    k: usize,
    value: f64,
}

/// Reads `vertex,k,value` rows into a tent field on `n` vertices with
/// `k` ranging over `1..=K`, `K` the largest `k` present. Missing entries are zero.
pub fn read_tent_field(path: &Path, n: usize) -> Result<TentField> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let mut rows = Vec::new();
    for row in r.deserialize() {
        let TentValue { vertex, k, value } = row?;
        if vertex >= n {
            bail!("vertex {vertex} out of range 0..{n}");
        }
        if k == 0 {
            bail!("tent times start at k = 1");
        }
        rows.push((vertex, k, value));
    }
    let k_max = rows.iter().map(|r| r.1).max().ok_or_else(|| anyhow!("empty tent field"))?;
    let mut field = TentField::zeros(n, k_max);
    for (vertex, k, value) in rows {
        field.set(vertex, k, value);
    }
    Ok(field)
}

/// Writes `vertex,k,value` rows for the nonzero entries.
pub fn write_tent_field(path: &Path, field: &TentField) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for (vertex, k, value) in field.support() {
        w.serialize(TentValue { vertex, k, value })?;
    }
    w.flush()?;
    Ok(())
}

/// Writes one `x,y,F` row per directed edge.
pub fn write_form(path: &Path, graph: &WeightedGraph, form: &OneForm) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x", "y", "F"])?;
    for (x, y, v) in form.as_edge_function().entries(graph) {
        w.write_record([x.to_string(), y.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `k,y,p_k,mass` rows, `mass = sum_y p_k(x,y) m(y)`.
pub fn write_kernel(path: &Path, field: &KernelField, m: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["k", "y", "p_k", "mass"])?;
    for k in 0..=field.steps() {
        let row = field.row(k);
        let mass: f64 = row.iter().zip(m).map(|(p, w)| p * w).sum();
        for (y, p) in row.iter().enumerate() {
            w.write_record([k.to_string(), y.to_string(), p.to_string(), mass.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes a header and numeric rows.
pub fn write_table(path: &Path, columns: &[String], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(columns)?;
    for row in rows {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
