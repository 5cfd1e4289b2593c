//! File formats, external solvers, batch generation and experiment
//! campaigns around [`d3sync_core`].

pub mod backend;
pub mod campaign;
pub mod dimacs;
pub mod external;
pub mod generate;
pub mod json;

pub use d3sync_core as core;
