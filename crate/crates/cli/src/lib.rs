#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::redundant_guards)]
//! Command-line front end of `fracmc-core`: configuration, the expression
//! language for φ and g, a threaded executor, CSV reports and the figure runner.

pub mod commands;
pub mod config;
pub mod error;
pub mod exec;
pub mod expr;
pub mod figures;
pub mod output;

pub use commands::{Cli, Command};
pub use error::CliError;
