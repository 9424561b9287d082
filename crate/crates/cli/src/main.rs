use std::process::ExitCode;

use besov_inflate_cli::{init_threads, load, run, CliError};

besov_inflate::use_retaining_allocator!();

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let outcome = (|| -> Result<bool, CliError> {
        init_threads()?;
        let cfg = load(std::env::args())?;
        run(&cfg)
    })();
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(2)
        }
    }
}
