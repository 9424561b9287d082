//! Command-line flags.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{parse_n_list, parse_p, Command, Settings};

#[derive(Debug, Parser)]
#[command(
    name = "besov-inflate",
    version,
    about = "Camassa-Holm norm-inflation experiments",
    after_help = "Flags override values from --config. BESOV_INFLATE_THREADS caps worker threads."
)]
pub struct Cli {
    /// Flat key = value config file.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Option<CommandArgs>,

    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Partition-of-unity residuals of the dyadic cutoffs.
    CutoffCheck(Common),
    /// Norm scalings of the initial datum per n.
    Lemma31(Common),
    /// Block values of the squared slope and their log^2 n ratio.
    Lemma32(Common),
    /// Conservation and convergence tables for the solver.
    SolverVerify(Common),
    /// Transported-block time series for the constructed datum.
    Inflate(Common),
}

/// Parsed `--n` list; a newtype so clap treats it as one value.
#[derive(Debug, Clone, PartialEq)]
pub struct Scales(pub Vec<u32>);

fn parse_scales(s: &str) -> Result<Scales, String> {
    parse_n_list(s).map(Scales)
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Comma-separated scales, e.g. 16,32,48,64.
    #[arg(long, value_parser = parse_scales)]
    pub n: Option<Scales>,
    /// Lebesgue exponent, > 2; `inf` for the max norm.
    #[arg(long, value_parser = parse_p)]
    pub p: Option<f64>,
    /// Grid points.
    #[arg(long = "N", visible_alias = "points")]
    pub points: Option<usize>,
    /// Domain length.
    #[arg(long = "L", visible_alias = "length")]
    pub length: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long = "t-end")]
    pub t_end: Option<f64>,
    /// CSV destination; stdout when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Also write the JSON mirror here (`-` for stdout).
    #[arg(long, value_name = "PATH")]
    pub json: Option<PathBuf>,
    /// Seed for randomized sampling.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Lower constant for the lemma32 ratio check.
    #[arg(long)]
    pub c: Option<f64>,
}

impl Common {
    fn into_settings(self, command: Option<Command>) -> Settings {
        Settings {
            command,
            n: self.n.map(|s| s.0),
            p: self.p,
            points: self.points,
            length: self.length,
            dt: self.dt,
            t_end: self.t_end,
            output: self.output,
            json: self.json,
            seed: self.seed,
            c: self.c,
        }
    }
}

impl Cli {
    /// Flag-level settings; subcommand flags win over ones given before it.
    pub fn settings(self) -> (Option<PathBuf>, Settings) {
        let outer = self.common.into_settings(None);
        let inner = match self.command {
            None => Settings::default(),
            Some(c) => {
                let (cmd, args) = match c {
                    CommandArgs::CutoffCheck(a) => (Command::CutoffCheck, a),
                    CommandArgs::Lemma31(a) => (Command::Lemma31, a),
                    CommandArgs::Lemma32(a) => (Command::Lemma32, a),
                    CommandArgs::SolverVerify(a) => (Command::SolverVerify, a),
                    CommandArgs::Inflate(a) => (Command::Inflate, a),
                };
                args.into_settings(Some(cmd))
            }
        };
        (self.config, outer.merge(inner))
    }
}

/// Parses an argument vector (program name first) without exiting.
pub fn parse_flags<I, T>(args: I) -> Result<(Option<PathBuf>, Settings), clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    Cli::try_parse_from(args).map(Cli::settings)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subcommand_flags() {
        let (config, s) =
            parse_flags(["besov-inflate", "lemma31", "--n", "16,32,48,64", "--p", "4"]).unwrap();
        assert_eq!(config, None);
        assert_eq!(s.command, Some(Command::Lemma31));
        assert_eq!(s.n, Some(vec![16, 32, 48, 64]));
        assert_eq!(s.p, Some(4.0));
    }

    #[test]
    fn grid_flags_and_config_path() {
        let (config, s) = parse_flags([
            "besov-inflate",
            "--config",
            "run.cfg",
            "solver-verify",
            "--N",
            "128",
            "--L",
            "6.5",
            "--t-end",
            "0.5",
        ])
        .unwrap();
        assert_eq!(config, Some(PathBuf::from("run.cfg")));
        assert_eq!(s.points, Some(128));
        assert_eq!(s.length, Some(6.5));
        assert_eq!(s.t_end, Some(0.5));
    }

    #[test]
    fn command_may_come_from_the_config() {
        let (_, s) = parse_flags(["besov-inflate", "--config", "x", "--p", "inf"]).unwrap();
        assert_eq!(s.command, None);
        assert_eq!(s.p, Some(f64::INFINITY));
    }

    #[test]
    fn bad_flags_are_errors() {
        assert!(parse_flags(["besov-inflate", "lemma31", "--n", "16,,32"]).is_err());
        assert!(parse_flags(["besov-inflate", "frobnicate"]).is_err());
        assert!(parse_flags(["besov-inflate", "inflate", "--dt", "fast"]).is_err());
    }
}
