//! Command-line front end: configuration, subcommands and file output.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{cmd_check, cmd_evolve, cmd_repro, cmd_reversals, cmd_spectrum, repro_entries};
pub use config::RunConfig;
pub use output::{Format, Sink, Summary};

/// Process exit status for an error: 3 for numerical failures, 2 otherwise.
pub fn exit_code(e: &alphadyn::Error) -> i32 {
    if e.is_numerical() {
        3
    } else {
        2
    }
}
