//! Command-line front end for the norm-inflation experiments: configuration,
//! dispatch and CSV / JSON report emission.

pub mod commands;
pub mod config;
pub mod error;
pub mod flags;
pub mod report;

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;

pub use config::{parse_config, parse_n_list, Command, RunConfig, Settings};
pub use error::{CliError, Result};
pub use flags::parse_flags;
pub use report::{Check, Report, Table};

/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "BESOV_INFLATE_THREADS";

/// Sizes the global worker pool from [`THREADS_ENV`], if set.
pub fn init_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().ok().filter(|&t| t > 0).ok_or_else(|| {
        CliError::Threads(format!("{THREADS_ENV}={raw:?} is not a positive integer"))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Threads(e.to_string()))
}

/// Flags layered over the optional config file.
pub fn load(args: impl IntoIterator<Item = String>) -> Result<RunConfig> {
    let (config_path, flags) = parse_flags(args).map_err(|e| {
        use clap::error::ErrorKind;
        if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
            e.exit();
        }
        CliError::Usage(e.to_string())
    })?;
    let file = match config_path {
        Some(path) => {
            let text = fs::read_to_string(&path)
                .map_err(|e| CliError::io(path.display().to_string(), e))?;
            parse_config(&text)?
        }
        None => Settings::default(),
    };
    RunConfig::resolve(file.merge(flags))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path.display().to_string(), e))
}

/// Runs the command, writes its outputs and returns whether every check passed.
pub fn run(cfg: &RunConfig) -> Result<bool> {
    log::info!(
        "running {} with n = {:?}, p = {}",
        cfg.command,
        cfg.n,
        cfg.p
    );
    let report = commands::execute(cfg)?;
    match &cfg.output {
        Some(path) => report.write_csv(create(path)?)?,
        None => report.write_csv(io::stdout().lock())?,
    }
    match &cfg.json {
        Some(path) if path.as_os_str() == "-" => report.write_json(io::stdout().lock())?,
        Some(path) => report.write_json(create(path)?)?,
        None => {}
    }
    let mut err = io::stderr().lock();
    for c in &report.checks {
        let status = if c.pass { "ok" } else { "FAILED" };
        let _ = writeln!(err, "check {}: {status} ({})", c.name, c.detail);
    }
    Ok(report.passed())
}
