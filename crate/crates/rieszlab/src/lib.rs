//! File formats, reports, the experiment harness and the command-line
//! front end for [`rieszlab_core`].

pub mod experiments;
pub mod io;
pub mod parallel;
pub mod probes;
pub mod report;
pub mod spec;

pub use rieszlab_core as core;
