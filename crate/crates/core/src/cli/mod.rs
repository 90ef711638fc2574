//! Experiment runner behind the `qcorr` binary.

pub mod config;
pub mod output;
pub mod run;

pub use config::{parse_config, CliArgs, ConfigError, Experiment, ExperimentConfig, Format, Grid};
pub use run::{run_experiment, RunError, Summary};

/// Exit status for a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit status for configuration and usage errors.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status for failures while running an experiment.
pub const EXIT_RUNTIME: i32 = 3;

/// Parses, runs, prints the summary to stdout and returns the exit status.
pub fn main_with_args(args: &CliArgs) -> i32 {
    let cfg = match parse_config(args) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    match run_experiment(&cfg) {
        Ok(summary) => {
            print!("{}", summary.to_json());
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
    }
}
