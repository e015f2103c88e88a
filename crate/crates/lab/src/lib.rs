//! Experiment harness for the projected-SGD convergence toolkit.
//!
//! The binary exposes subcommands that run experiment suites and write
//! CSV/SVG/JSON artifacts; this library holds the pieces so integration
//! tests can call experiments directly.

pub mod config;
pub mod experiments;
pub mod report;
pub mod stats;
