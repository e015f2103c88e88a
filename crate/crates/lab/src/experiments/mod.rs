//! Experiment suites behind the CLI subcommands.

pub mod constants_cmd;
pub mod example41;
pub mod fig1;
pub mod rates;
pub mod robbins_monro;
pub mod run;
pub mod shared;

pub use shared::CheckResult;
