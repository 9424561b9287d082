//! One function per command, each returning its table and checks.

use std::f64::consts::PI;

use besov_inflate::inflation::{run_inflation_with, LedgerOptions, REPORT_EVERY};
use besov_inflate::initial_data::{
    lemma31_grid, lemma31_norms, lemma32_grid, lemma32_lower, synthesis_grid, ConstructionParams,
};
use besov_inflate::lp::CutoffPair;
use besov_inflate::solver::{h1_energy, integrate, Silent, SolverConfig, StepEvent};
use besov_inflate::{Field, GridSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{Command, RunConfig};
use crate::error::Result;
use crate::report::{Check, Report, Table};

pub const INFLATE_COLUMNS: [&str; 10] = [
    "t",
    "S",
    "besov",
    "lip",
    "energy",
    "ledger_u0",
    "ledger_R",
    "ledger_F",
    "ledger_Edrift",
    "ledger_tE0",
];

pub fn execute(cfg: &RunConfig) -> Result<Report> {
    match cfg.command {
        Command::CutoffCheck => cutoff_check(cfg),
        Command::Lemma31 => lemma31(cfg),
        Command::Lemma32 => lemma32(cfg),
        Command::SolverVerify => solver_verify(cfg),
        Command::Inflate => inflate(cfg),
    }
}

fn spread(values: &[f64]) -> f64 {
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    hi / lo
}

/// Explicit grid when `N` or `L` is given, else `None` (each module's default).
fn grid_override(cfg: &RunConfig, params: &ConstructionParams) -> Result<Option<GridSpec>> {
    if cfg.points.is_none() && cfg.length.is_none() {
        return Ok(None);
    }
    let base = synthesis_grid(params)?;
    Ok(Some(GridSpec::new(
        cfg.length.unwrap_or(base.length()),
        cfg.points.unwrap_or(base.points()),
    )?))
}

const CUTOFF_SAMPLES: usize = 10_000;
const CUTOFF_RANGE: f64 = 1e6;
const CUTOFF_TOP: i32 = 24;

fn cutoff_check(cfg: &RunConfig) -> Result<Report> {
    let cutoff = CutoffPair::default();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut table = Table::new(&["xi", "partition_sum", "residual"]);
    let mut worst: f64 = 0.0;
    for _ in 0..CUTOFF_SAMPLES {
        let xi: f64 = rng.gen_range(-CUTOFF_RANGE..CUTOFF_RANGE);
        let sum = cutoff.partition_sum(xi, CUTOFF_TOP);
        let residual = (sum - 1.0).abs();
        worst = worst.max(residual);
        table.push(vec![xi.into(), sum.into(), residual.into()]);
    }
    let plateau = (0..1000)
        .map(|k| {
            let xi = 4.0 / 3.0 + (1.5 - 4.0 / 3.0) * k as f64 / 999.0;
            (cutoff.phi(xi) - 1.0).abs()
        })
        .fold(0.0, f64::max);
    Ok(Report {
        command: Command::CutoffCheck.name(),
        table,
        checks: vec![
            Check::new(
                "partition of unity",
                worst <= 1e-10,
                format!("max residual {worst:.3e} over {CUTOFF_SAMPLES} frequencies"),
            ),
            Check::new(
                "phi plateau",
                plateau == 0.0,
                format!("max |phi - 1| on [4/3, 3/2] is {plateau:.3e}"),
            ),
        ],
    })
}

fn lemma31(cfg: &RunConfig) -> Result<Report> {
    let rows = cfg
        .n
        .par_iter()
        .map(|&n| {
            let params = ConstructionParams::new(n, cfg.p)?;
            let norms = match grid_override(cfg, &params)? {
                Some(grid) => lemma31_grid(&params, grid)?,
                None => lemma31_norms(&params)?,
            };
            let nf = n as f64;
            let log = nf.ln();
            let inv_p = if cfg.p.is_infinite() {
                0.0
            } else {
                1.0 / cfg.p
            };
            Ok((
                n,
                norms.linf_u0 / (2f64.powf(-nf) * log / nf.sqrt()),
                norms.linf_dxu0 / (log / nf.sqrt()),
                norms.besov_b1p1 / (nf.powf(-(1.0 - 2.0 * inv_p) / 2.0) * log),
                format!("{:?}", norms.evaluation).to_lowercase(),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(&[
        "n",
        "linf_ratio",
        "slope_ratio",
        "besov_ratio",
        "evaluation",
    ]);
    for (n, a, b, c, how) in &rows {
        table.push(vec![
            (*n).into(),
            (*a).into(),
            (*b).into(),
            (*c).into(),
            how.as_str().into(),
        ]);
    }
    let finite = rows
        .iter()
        .all(|r| r.1.is_finite() && r.2.is_finite() && r.3.is_finite());
    let mut checks = vec![Check::new("finite ratios", finite, "")];
    if rows.len() > 1 {
        for (name, pick) in [
            ("linf ratio spread", 1usize),
            ("slope ratio spread", 2),
            ("besov ratio spread", 3),
        ] {
            let values: Vec<f64> = rows
                .iter()
                .map(|r| match pick {
                    1 => r.1,
                    2 => r.2,
                    _ => r.3,
                })
                .collect();
            let s = spread(&values);
            checks.push(Check::new(name, s <= 3.0, format!("max/min {s:.4} <= 3")));
        }
    }
    Ok(Report {
        command: Command::Lemma31.name(),
        table,
        checks,
    })
}

fn lemma32(cfg: &RunConfig) -> Result<Report> {
    let reports = cfg
        .n
        .par_iter()
        .map(|&n| {
            let params = ConstructionParams::new(n, cfg.p)?;
            let r = match grid_override(cfg, &params)? {
                Some(grid) => lemma32_grid(&params, grid)?,
                None => lemma32_lower(&params)?,
            };
            Ok((n, r))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(&["n", "j", "block", "value", "ratio"]);
    let mut checks = Vec::new();
    for (n, r) in &reports {
        let ratio = r.value / (*n as f64).ln().powi(2);
        for &(j, v) in &r.per_block {
            table.push(vec![
                (*n).into(),
                j.into(),
                v.into(),
                r.value.into(),
                ratio.into(),
            ]);
        }
        checks.push(Check::new(
            format!("n = {n} ratio"),
            ratio >= cfg.c,
            format!("value / log^2 n = {ratio:.6e} >= c = {:.3e}", cfg.c),
        ));
    }
    Ok(Report {
        command: Command::Lemma32.name(),
        table,
        checks,
    })
}

enum Job {
    Drift,
    Reversal(f64),
    Order(f64),
    Reference,
}

/// Step sizes for the order checks, halved once.
const COARSE_STEPS: [f64; 2] = [0.1, 0.05];
const RETURN_STEP: f64 = 0.05 / 8.0;

fn solver_verify(cfg: &RunConfig) -> Result<Report> {
    let length = cfg.length.unwrap_or(2.0 * PI);
    let points = cfg.points.unwrap_or(64);
    let g = GridSpec::new(length, points)?;
    let k = 2.0 * PI / length;
    let dt = cfg.dt.unwrap_or(1e-3);
    let t_end = cfg.t_end.unwrap_or(1.0);
    let small = Field::from_fn(g, |x| 0.1 * (k * x).cos());
    let smooth = Field::from_fn(g, |x| {
        0.25 * (k * x).cos() + 0.15 * (2.0 * k * x).sin() - 0.05 * (3.0 * k * x).cos()
    });
    let run = |u: &Field, dt: f64| integrate(u, &SolverConfig::new(g, dt, t_end)?, &mut Silent);

    let mut jobs = vec![Job::Drift, Job::Reference];
    for h in COARSE_STEPS {
        jobs.push(Job::Reversal(h));
        jobs.push(Job::Order(h));
    }
    let results = jobs
        .par_iter()
        .map(|job| -> Result<(f64, Option<Field>)> {
            Ok(match job {
                Job::Drift => {
                    let e0 = h1_energy(&small);
                    let mut drift: f64 = 0.0;
                    let mut watch = |e: &StepEvent<'_>| {
                        drift = drift.max((h1_energy(e.u) - e0).abs() / e0);
                        Ok(())
                    };
                    integrate(&small, &SolverConfig::new(g, dt, t_end)?, &mut watch)?;
                    (drift, None)
                }
                Job::Reversal(h) => {
                    // Fine return leg, so only the forward run's error is measured.
                    let back = run(&run(&smooth, *h)?.scale(-1.0), RETURN_STEP)?.scale(-1.0);
                    (back.sub(&smooth)?.max_abs(), None)
                }
                Job::Order(h) => (f64::NAN, Some(run(&smooth, *h)?)),
                Job::Reference => (f64::NAN, Some(run(&smooth, RETURN_STEP)?)),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let drift = results[0].0;
    let reference = results[1].1.as_ref().expect("reference state");
    let reversal = [results[2].0, results[4].0];
    let order = [
        results[3]
            .1
            .as_ref()
            .expect("coarse state")
            .sub(reference)?
            .max_abs(),
        results[5]
            .1
            .as_ref()
            .expect("coarse state")
            .sub(reference)?
            .max_abs(),
    ];
    let reversal_ratio = reversal[0] / reversal[1];
    let order_ratio = order[0] / order[1];

    let mut table = Table::new(&["check", "points", "dt", "t_end", "value", "ratio"]);
    table.push(vec![
        "energy_drift".into(),
        points.into(),
        dt.into(),
        t_end.into(),
        drift.into(),
        f64::NAN.into(),
    ]);
    for (i, h) in COARSE_STEPS.iter().enumerate() {
        let ratio = if i == 0 { f64::NAN } else { reversal_ratio };
        table.push(vec![
            "time_reversal".into(),
            points.into(),
            (*h).into(),
            t_end.into(),
            reversal[i].into(),
            ratio.into(),
        ]);
    }
    for (i, h) in COARSE_STEPS.iter().enumerate() {
        let ratio = if i == 0 { f64::NAN } else { order_ratio };
        table.push(vec![
            "rk4_order".into(),
            points.into(),
            (*h).into(),
            t_end.into(),
            order[i].into(),
            ratio.into(),
        ]);
    }
    Ok(Report {
        command: Command::SolverVerify.name(),
        table,
        checks: vec![
            Check::new(
                "energy drift",
                drift <= 1e-8,
                format!("relative H1 drift {drift:.3e} <= 1e-8"),
            ),
            Check::new(
                "time reversal order",
                (12.0..=20.0).contains(&reversal_ratio),
                format!("halving ratio {reversal_ratio:.3} in [12, 20]"),
            ),
            Check::new(
                "rk4 order",
                (12.0..=20.0).contains(&order_ratio),
                format!("halving ratio {order_ratio:.3} in [12, 20]"),
            ),
        ],
    })
}

fn inflate(cfg: &RunConfig) -> Result<Report> {
    let n = cfg.n[0];
    let params = ConstructionParams::new(n, cfg.p)?;
    let grid = match grid_override(cfg, &params)? {
        Some(g) => g,
        None => synthesis_grid(&params)?,
    };
    let t_end = cfg.t_end.unwrap_or(1.0 / (n as f64).ln());
    let dt = cfg.dt.unwrap_or(t_end / 100.0);
    let solver = SolverConfig::new(grid, dt, t_end)?;
    let opts =
        LedgerOptions::new(params.freq_set().blocks(), params.p())?.with_report_every(REPORT_EVERY);
    let report = run_inflation_with(&params, &solver, &opts)?;

    let mut table = Table::new(&INFLATE_COLUMNS);
    for r in &report.rows {
        let l = r.ledger;
        table.push(
            [
                r.t, r.s, r.besov, r.lip, r.energy, l.u0, l.r, l.f, l.e_drift, l.t_e0,
            ]
            .into_iter()
            .map(Into::into)
            .collect(),
        );
    }
    let closure = report
        .rows
        .iter()
        .map(|r| r.closure_residual)
        .fold(0.0, f64::max);
    let (jlo, jhi) = report.jacobian_extremes;
    let s0 = report.rows.first().map_or(f64::NAN, |r| r.s);
    let complete = match &report.aborted {
        None => Check::new("run complete", true, format!("{} steps", solver.steps())),
        Some(e) => Check::new("run complete", false, e.to_string()),
    };
    Ok(Report {
        command: Command::Inflate.name(),
        table,
        checks: vec![
            complete,
            Check::new("S(0)", s0 <= 1e-8, format!("{s0:.3e} <= 1e-8")),
            Check::new(
                "ledger closure",
                closure <= 1e-3,
                format!("max relative residual {closure:.3e} <= 1e-3"),
            ),
            Check::new(
                "flow jacobian",
                jlo >= 0.5 && jhi <= 2.0,
                format!("range [{jlo:.6}, {jhi:.6}] inside [1/2, 2]"),
            ),
        ],
    })
}
