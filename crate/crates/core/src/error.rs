use alloc::string::String;

/// Errors raised by graph construction and the numerical operators.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("graph must have at least one vertex")]
    EmptyGraph,
    #[error("vertex {vertex} out of range for a graph with {count} vertices")]
    VertexOutOfRange { vertex: usize, count: usize },
    #[error("edge ({u}, {v}) has invalid weight {weight}")]
    InvalidWeight { u: usize, v: usize, weight: f64 },
    #[error("edge ({u}, {v}) listed twice")]
    DuplicateEdge { u: usize, v: usize },
    #[error("vertex {0} has zero measure")]
    ZeroMeasure(usize),
    #[error("graph is disconnected: vertex {0} unreachable from vertex 0")]
    Disconnected(usize),
    #[error("vertices {0} and {1} are unreachable from each other")]
    Unreachable(usize, usize),
    #[error("vertex degree {degree} exceeds declared bound {bound}")]
    DegreeBound { degree: usize, bound: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("function has length {found}, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("dense spectral path limited to {limit} vertices (graph has {n}); use series_apply")]
    TooLargeForDense { n: usize, limit: usize },
    #[error("series did not reach tail bound {tolerance:e} within {terms} terms (last bound {bound:e})")]
    SeriesNotConvergent {
        tolerance: f64,
        terms: usize,
        bound: f64,
    },
    #[error("1-form is not antisymmetric on edge ({x}, {y}): {forward} vs {backward}")]
    NotAntisymmetric {
        x: usize,
        y: usize,
        forward: f64,
        backward: f64,
    },
    #[error("weight field violates sup |phi(x,.)|_Tx <= 1 at vertex {vertex} ({norm})")]
    WeightBound { vertex: usize, norm: f64 },
    #[error("function must be nonnegative (vertex {vertex} has {value})")]
    NegativeFunction { vertex: usize, value: f64 },
    #[error("empty sample")]
    EmptySample,
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
}

pub type Result<T> = core::result::Result<T, Error>;
