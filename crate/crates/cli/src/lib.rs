//! Experiment harness behind the `distil` binary: configuration, sweeps
//! and CSV output.

pub mod config;
pub mod error;
pub mod format;
pub mod run;

use std::fs;
use std::io::Write;

pub use config::{Cli, Command, Mode, NoiseFamily, RunArgs, Sweep, SweepConfig};
pub use error::{CliError, CliResult};
pub use format::{fmt_g, Table};
pub use run::{run, run_one_round_sweep, run_pump_curve, run_yield_sweep, RunOutput};

/// Resolve, run and write. Returns the process exit code.
pub fn execute(command: Command) -> i32 {
    let (mode, args) = command.split();
    match execute_inner(mode, args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("distil: {e}");
            e.exit_code()
        }
    }
}

fn execute_inner(mode: Mode, args: RunArgs) -> CliResult<i32> {
    let cfg = args.resolve(mode)?;
    let out = run(&cfg)?;
    let text = out.table.to_csv();
    match &cfg.out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    if out.numerical_failures > 0 {
        eprintln!("distil: {} rows hit a numerical failure", out.numerical_failures);
        return Ok(3);
    }
    Ok(0)
}
