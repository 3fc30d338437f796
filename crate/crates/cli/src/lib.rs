//! Command-line front end: operator errors, fractional ODE solves and tables.

pub mod expr;
pub mod registry;
pub mod run;

pub use run::{run, Cli, CliError, Summary};
