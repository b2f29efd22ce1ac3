//! Discrete harmonic analysis on weighted graphs.
//!
//! The crate is `no_std` (it needs `alloc`) and covers:
//!
//! * [`graph`]: weighted graphs, vertex measure, combinatorial distance;
//! * [`metric`]: the quasi-metric `rho = d^beta`, balls, volumes and annuli;
//! * [`builders`]: lattices, cycles, paths, Sierpinski gasket prefractals,
//!   free products, and the laziness transform;
//! * [`markov`], [`spectral`], [`series`]: the Markov operator, iterated
//!   kernels and the two routes to functional calculus (dense spectral and
//!   matrix-free power series);
//! * [`calculus`]: `d`, `d*`, the length of the gradient, resolvents,
//!   fractional powers of the Laplacian and the Riesz transform;
//! * [`functionals`]: Littlewood–Paley and tent-space functionals, the
//!   maximal function and the pseudo-gradient;
//! * [`hardy`]: tent atoms, the tent-space atomic decomposition, the
//!   synthesis operator and molecular decompositions.
#![no_std]

extern crate alloc;

pub mod builders;
pub mod calculus;
mod error;
pub mod fit;
pub mod functionals;
pub mod graph;
pub mod hardy;
pub mod markov;
pub mod metric;
pub mod series;
pub mod spectral;
pub mod vecops;

pub use error::{Error, Result};
pub use graph::{Edge, Vertex, WeightedGraph};
pub use metric::{BallGeometry, QuasiMetric, Space};
