//! Command-line driver: configuration, mode dispatch and reports.

pub mod config;
pub mod run;

use std::path::PathBuf;

use clap::Parser;

pub use config::{Cli, Mode, RunConfig, UsageError};
pub use run::{run, Check, Outcome};

/// Exit status for a run whose checks all passed.
pub const EXIT_OK: i32 = 0;
/// Some check failed or a numerical step returned an error.
pub const EXIT_FAILED: i32 = 1;
/// Invalid flags or configuration.
pub const EXIT_USAGE: i32 = 2;

/// Builds the configuration from parsed flags, reading `--config` and
/// `FSI_OUT_DIR` as needed.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig, UsageError> {
    let file = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())))?;
            config::parse_config_file(&text, path)?
        }
        None => Default::default(),
    };
    let env_out = std::env::var_os(config::OUT_DIR_ENV).map(PathBuf::from);
    RunConfig::resolve(cli, &file, env_out)
}

/// Parses `args`, runs, prints the report and returns the exit status.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let cfg = match resolve_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("fsi: {e}");
            return EXIT_USAGE;
        }
    };
    match run(&cfg) {
        Ok(out) => {
            print!("{}", out.report);
            if out.passed() {
                EXIT_OK
            } else {
                EXIT_FAILED
            }
        }
        Err(e) => {
            eprintln!("fsi: {e}");
            EXIT_FAILED
        }
    }
}
