//! Experiment runner behind the `hashqkd` binary.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod results;

pub use cli::main_with_args;
