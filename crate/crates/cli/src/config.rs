//! Run configuration: flat `key = value` files, flag overrides and validation.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    CutoffCheck,
    Lemma31,
    Lemma32,
    SolverVerify,
    Inflate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::CutoffCheck => "cutoff-check",
            Command::Lemma31 => "lemma31",
            Command::Lemma32 => "lemma32",
            Command::SolverVerify => "solver-verify",
            Command::Inflate => "inflate",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "cutoff-check" => Ok(Command::CutoffCheck),
            "lemma31" => Ok(Command::Lemma31),
            "lemma32" => Ok(Command::Lemma32),
            "solver-verify" => Ok(Command::SolverVerify),
            "inflate" => Ok(Command::Inflate),
            other => Err(format!("unknown command {other:?}")),
        }
    }
}

/// Partially specified settings. Config files and flags each produce one;
/// [`Settings::merge`] layers them.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub command: Option<Command>,
    pub n: Option<Vec<u32>>,
    pub p: Option<f64>,
    pub points: Option<usize>,
    pub length: Option<f64>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub output: Option<PathBuf>,
    pub json: Option<PathBuf>,
    pub seed: Option<u64>,
    pub c: Option<f64>,
}

impl Settings {
    /// Values set in `over` win.
    pub fn merge(self, over: Settings) -> Settings {
        Settings {
            command: over.command.or(self.command),
            n: over.n.or(self.n),
            p: over.p.or(self.p),
            points: over.points.or(self.points),
            length: over.length.or(self.length),
            dt: over.dt.or(self.dt),
            t_end: over.t_end.or(self.t_end),
            output: over.output.or(self.output),
            json: over.json.or(self.json),
            seed: over.seed.or(self.seed),
            c: over.c.or(self.c),
        }
    }
}

/// Comma-separated scales, e.g. `16,32,48,64`. Order is kept; duplicates are rejected.
pub fn parse_n_list(s: &str) -> std::result::Result<Vec<u32>, String> {
    let mut out = Vec::new();
    for item in s.split(',') {
        let item = item.trim();
        if item.is_empty() {
            return Err(format!("empty entry in n list {s:?}"));
        }
        let n: u32 = item.parse().map_err(|e| format!("bad n {item:?}: {e}"))?;
        if out.contains(&n) {
            return Err(format!("n = {n} listed twice"));
        }
        out.push(n);
    }
    Ok(out)
}

/// Lebesgue exponent; `inf` and `infinity` select the max norm.
pub fn parse_p(s: &str) -> std::result::Result<f64, String> {
    let p: f64 = s.trim().parse().map_err(|e| format!("bad p {s:?}: {e}"))?;
    if p.is_nan() {
        return Err("p is NaN".into());
    }
    Ok(p)
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> std::result::Result<T, String>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e| format!("bad value {value:?} for {key}: {e}"))
}

/// Parses `key = value` lines. `#` starts a comment; blank lines are skipped.
/// Keys: command, n, p, N, L, dt, t_end, output, json, seed, c.
pub fn parse_config(text: &str) -> Result<Settings> {
    let mut s = Settings::default();
    let mut seen: Vec<String> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let err = |message: String| CliError::Config {
            line: line_no,
            message,
        };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected key = value, got {line:?}")))?;
        let (key, value) = (key.trim(), value.trim());
        if value.is_empty() {
            return Err(err(format!("{key} has no value")));
        }
        if seen.iter().any(|k| k == key) {
            return Err(err(format!("{key} set twice")));
        }
        seen.push(key.to_string());
        match key {
            "command" => s.command = Some(value.parse().map_err(err)?),
            "n" => s.n = Some(parse_n_list(value).map_err(err)?),
            "p" => s.p = Some(parse_p(value).map_err(err)?),
            "N" => s.points = Some(parse_num(key, value).map_err(err)?),
            "L" => s.length = Some(parse_num(key, value).map_err(err)?),
            "dt" => s.dt = Some(parse_num(key, value).map_err(err)?),
            "t_end" => s.t_end = Some(parse_num(key, value).map_err(err)?),
            "output" => s.output = Some(PathBuf::from(value)),
            "json" => s.json = Some(PathBuf::from(value)),
            "seed" => s.seed = Some(parse_num(key, value).map_err(err)?),
            "c" => s.c = Some(parse_num(key, value).map_err(err)?),
            other => return Err(err(format!("unknown key {other:?}"))),
        }
    }
    Ok(s)
}

/// Default lower constant for the `lemma32` ratio column.
pub const DEFAULT_LEMMA32_C: f64 = 1e-4;

/// Fully resolved configuration, checked against each command's preconditions.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub n: Vec<u32>,
    pub p: f64,
    pub points: Option<usize>,
    pub length: Option<f64>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    /// `None` writes CSV to stdout.
    pub output: Option<PathBuf>,
    pub json: Option<PathBuf>,
    pub seed: u64,
    pub c: f64,
}

fn positive(name: &str, v: Option<f64>) -> Result<()> {
    match v {
        Some(x) if !(x.is_finite() && x > 0.0) => Err(CliError::Precondition(format!(
            "{name} must be positive and finite, got {x}"
        ))),
        _ => Ok(()),
    }
}

impl RunConfig {
    pub fn resolve(s: Settings) -> Result<Self> {
        let command = s.command.ok_or_else(|| {
            CliError::Usage("no command given (flag or config key `command`)".into())
        })?;
        let n = s.n.unwrap_or_else(|| match command {
            Command::Lemma31 | Command::Lemma32 => vec![16, 32, 48, 64],
            _ => vec![16],
        });
        let cfg = RunConfig {
            command,
            n,
            p: s.p.unwrap_or(4.0),
            points: s.points,
            length: s.length,
            dt: s.dt,
            t_end: s.t_end,
            output: s.output,
            json: s.json,
            seed: s.seed.unwrap_or(0),
            c: s.c.unwrap_or(DEFAULT_LEMMA32_C),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if !(self.p > 2.0) {
            return Err(CliError::Precondition(format!(
                "p must exceed 2 (inf allowed), got {}",
                self.p
            )));
        }
        if self.n.is_empty() {
            return Err(CliError::Precondition("n list is empty".into()));
        }
        if let Some(&bad) = self.n.iter().find(|&&n| n == 0 || n % 16 != 0) {
            return Err(CliError::Precondition(format!(
                "n = {bad} is not a positive multiple of 16"
            )));
        }
        if self.command == Command::Inflate && self.n.len() != 1 {
            return Err(CliError::Precondition("inflate runs a single n".into()));
        }
        if self.points == Some(0) {
            return Err(CliError::Precondition("N must be positive".into()));
        }
        positive("L", self.length)?;
        positive("dt", self.dt)?;
        positive("t_end", self.t_end)?;
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(CliError::Precondition(format!(
                "c must be positive and finite, got {}",
                self.c
            )));
        }
        Ok(())
    }
}
