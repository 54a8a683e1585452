//! Library side of the `holo-opt` command-line tool: configuration and the
//! five workflows, kept separate from argument parsing so they can be
//! driven from tests.

pub mod commands;
pub mod config;

pub use commands::{run, write_outputs, Command, EvaluateReport, Outputs};
pub use config::{Gate, PulseSource, RunConfig};
