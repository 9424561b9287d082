//! Source terms of the nonlocal equation and the transported-block growth
//! experiment.
//!
//! Writing the equation as `u_t + u u_x = F + E` with
//! `F = -d_x (1 - d_x^2)^-1 u^2` and `E = -1/2 d_x (1 - d_x^2)^-1 u_x^2`, every
//! dyadic block transported by the flow splits as
//!
//! ```text
//! (D_j u) o phi = D_j u0 + int R_j o phi + int D_j F o phi
//!               + int (D_j E o phi - D_j E0) + t D_j E0,
//! ```
//!
//! `R_j = u D_j u_x - D_j (u u_x)`. The run streams these five terms and the
//! drift identity `D_j E o phi - D_j E0 = int [u, D_j] E_x o phi + int D_j G o phi`.

use std::collections::BTreeSet;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::flow::{advance_flow, advance_flow_from, compose, FlowState, TimeIntegral};
use crate::grid::{padded_samples, truncate_padded, Dealias, Field};
use crate::initial_data::{build_u0, centering_shift, ConstructionParams};
use crate::lp;
use crate::solver::{self, integrate, Observer, Products, SolverConfig, StepEvent};

/// Default number of solver steps between report rows.
pub const REPORT_EVERY: usize = 10;

/// `E = -1/2 d_x (1 - d_x^2)^-1 (u_x)^2`.
pub fn compute_e(u: &Field) -> Field {
    Products::new(u, Dealias::On).e_term()
}

/// `F = -d_x (1 - d_x^2)^-1 u^2`.
pub fn compute_f(u: &Field) -> Field {
    Products::new(u, Dealias::On).f_term()
}

/// Right-hand side of `E_t + u E_x = G`:
///
/// ```text
/// G = u^3/3 - u H(u_x^2)/2 - H(u^3/3 - u u_x^2/2 - d_x(u_x H(u^2 + u_x^2/2))),
/// ```
///
/// `H = (1 - d_x^2)^-1`, every product dealiased.
pub fn compute_g(u: &Field) -> Field {
    compute_g_with(u, &Products::new(u, Dealias::On))
}

/// [`compute_g`] reusing the dealiased quadratic products of `u`. Grouped as
/// `u (u^2/3 - H(u_x^2)/2) - H(u (u^2/3 - u_x^2/2) - d_x(u_x H(u^2 + u_x^2/2)))`.
pub fn compute_g_with(u: &Field, products: &Products) -> Field {
    let grid = *u.grid();
    let nyq = grid.points() / 2;
    let xi = |k: usize| if k == nyq { 0.0 } else { grid.wavenumber(k) };
    let h = |k: usize| solver::helmholtz_symbol(xi(k));
    let (u2, ux2) = (&products.u_sq, &products.ux_sq);
    let spec = |f: &dyn Fn(usize) -> Complex64| (0..u2.len()).map(f).collect::<Vec<_>>();
    let a = spec(&|k| u2[k] / 3.0 - ux2[k] * (0.5 * h(k)));
    let b = spec(&|k| u2[k] / 3.0 - ux2[k] * 0.5);
    let c = spec(&|k| (u2[k] + ux2[k] * 0.5) * h(k));
    let pu = padded_samples(u.spectrum(), &grid);
    let pux = padded_samples(products.slope.spectrum(), &grid);
    let times = |x: &[f64], y: Vec<Complex64>| {
        let y = padded_samples(&y, &grid);
        truncate_padded(x.iter().zip(&y).map(|(p, q)| p * q).collect(), &grid)
    };
    let ua = times(&pu, a);
    let ub = times(&pu, b);
    let uxc = times(&pux, c);
    let g = spec(&|k| ua[k] - (ub[k] - uxc[k] * Complex64::new(0.0, xi(k))) * h(k));
    Field::from_spectrum(grid, g)
}

/// `E`, `F` and `G` at one time.
#[derive(Debug, Clone)]
pub struct SourceTerms {
    pub e: Field,
    pub f: Field,
    pub g: Field,
}

impl SourceTerms {
    pub fn new(u: &Field) -> Self {
        let products = Products::new(u, Dealias::On);
        Self {
            e: products.e_term(),
            f: products.f_term(),
            g: compute_g(u),
        }
    }
}

/// `sum_{j in blocks} 2^j ||D_j f||_p`.
pub fn block_sum(f: &Field, blocks: &BTreeSet<i32>, p: f64) -> Result<f64> {
    lp::besov_norm_restricted(f, 1.0, p, blocks)
}

/// `sum_{j in N(n)} 2^j ||D_j E0||_p` for the initial datum on `grid`.
pub fn block_sum_e0(params: &ConstructionParams, grid: crate::GridSpec) -> Result<f64> {
    let u0 = build_u0(params, grid, centering_shift(params))?;
    block_sum(&compute_e(&u0), &params.freq_set().blocks(), params.p())
}

/// The five terms of the transported-block split, each as `sum_j 2^j ||.||_p`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Ledger {
    pub u0: f64,
    pub r: f64,
    pub f: f64,
    pub e_drift: f64,
    pub t_e0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportRow {
    pub t: f64,
    /// `sum_j 2^j ||(D_j u) o phi||_p`.
    pub s: f64,
    pub besov: f64,
    pub lip: f64,
    pub energy: f64,
    pub ledger: Ledger,
    /// `sum_j 2^j ||lhs - sum of terms||_p / S`.
    pub closure_residual: f64,
    pub jacobian: (f64, f64),
    /// Extremes over blocks of `||(D_j E) o phi||_p / ||D_j E||_p`.
    pub composition_ratio: (f64, f64),
    /// Largest `|u|` in the outer twentieth of the box at each end, relative to `max |u|`.
    pub boundary: f64,
}

/// Drift identity at one report time, summed over blocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step2Row {
    pub t: f64,
    /// `sum_j 2^j ||D_j E o phi - D_j E0||_p`, measured directly.
    pub lhs: f64,
    /// The same through the time integrals of the commutator and of `D_j G`.
    pub rhs: f64,
    /// `sum_j 2^j ||lhs - rhs||_p`.
    pub mismatch: f64,
    /// `t max_tau sum_j 2^j (||[u, D_j] E_x||_p + ||D_j G||_p)`.
    pub bound: f64,
}

#[derive(Debug)]
pub struct ExperimentReport {
    pub p: f64,
    pub blocks: BTreeSet<i32>,
    pub block_sum_e0: f64,
    pub rows: Vec<ReportRow>,
    pub step2: Vec<Step2Row>,
    /// `(t, S(t))` at every solver step.
    pub s_series: Vec<(f64, f64)>,
    pub jacobian_extremes: (f64, f64),
    /// Guard violation that ended the run early.
    pub aborted: Option<Error>,
}

impl ExperimentReport {
    /// Finite-difference slope `(S(t*) - S(0)) / t*`, `t*` the last level in `(0, t_max]`.
    pub fn early_slope(&self, t_max: f64) -> Option<f64> {
        let &(_, s0) = self.s_series.first()?;
        let &(t, s) = self
            .s_series
            .iter()
            .rfind(|(t, _)| *t > 0.0 && *t <= t_max * (1.0 + 1e-12))?;
        Some((s - s0) / t)
    }
}

/// What the ledger run records.
#[derive(Debug, Clone, PartialEq)]
pub struct LedgerOptions {
    pub blocks: BTreeSet<i32>,
    pub p: f64,
    pub report_every: usize,
    pub step2: bool,
}

impl LedgerOptions {
    pub fn new(blocks: BTreeSet<i32>, p: f64) -> Result<Self> {
        lp::BesovIndex::new(1.0, p, 1.0)?;
        if blocks.is_empty() {
            return Err(Error::Precondition("no blocks to track".into()));
        }
        Ok(Self {
            blocks,
            p,
            report_every: REPORT_EVERY,
            step2: true,
        })
    }

    pub fn with_report_every(mut self, every: usize) -> Self {
        self.report_every = every.max(1);
        self
    }

    pub fn with_step2(mut self, on: bool) -> Self {
        self.step2 = on;
        self
    }
}

struct BlockLedger {
    j: i32,
    weight: f64,
    u0: Field,
    e0: Field,
    r: TimeIntegral,
    f: TimeIntegral,
    drift: TimeIntegral,
    commutator: Option<TimeIntegral>,
    g: Option<TimeIntegral>,
}

struct LedgerRun<'a> {
    opts: &'a LedgerOptions,
    steps: usize,
    dealias: Dealias,
    flow: FlowState,
    /// `u o phi` at the last level, the first flow stage of the next step.
    u_phi: Option<Field>,
    blocks: Vec<BlockLedger>,
    e0_sum: f64,
    rows: Vec<ReportRow>,
    step2: Vec<Step2Row>,
    s_series: Vec<(f64, f64)>,
    step2_peak: f64,
    jacobian_extremes: (f64, f64),
}

impl LedgerRun<'_> {
    fn norm(&self, f: &Field) -> f64 {
        f.lp_norm(self.opts.p)
    }
}

impl Observer for LedgerRun<'_> {
    fn observe(&mut self, e: &StepEvent<'_>) -> Result<()> {
        if let Some(stages) = e.stages {
            let [a, b, c, d] = &stages.states;
            // The first stage is the previous level, already composed there.
            self.flow = match self.u_phi.take() {
                Some(k1) => advance_flow_from(&self.flow, k1, [b, c, d], stages.dt)?,
                None => advance_flow(&self.flow, [a, b, c, d], stages.dt)?,
            };
            let (lo, hi) = self.flow.jacobian_range();
            self.jacobian_extremes = (
                self.jacobian_extremes.0.min(lo),
                self.jacobian_extremes.1.max(hi),
            );
        }
        let (t, u) = (e.t, e.u);
        let u_phi = compose(u, &self.flow);
        let big_e = e.products.e_term();
        let big_f = e.products.f_term();
        let advection = e.products.advection();
        let big_g = self.opts.step2.then(|| {
            if self.dealias == Dealias::On {
                compute_g_with(u, e.products)
            } else {
                compute_g(u)
            }
        });
        let e_transport = if self.opts.step2 {
            Some(u.product(&big_e.dx(), Dealias::On)?)
        } else {
            None
        };
        // [u, D_j] v_x o phi = (u o phi)(D_j v_x o phi) - D_j(u v_x) o phi; the
        // first product is resolved on the grid, so composing factorwise is exact.
        let flow = &self.flow;
        let commutator = |v: &Field, transport: &Field, j: i32| -> Result<Field> {
            let near = compose(&lp::dyadic_block(&v.dx(), j)?, flow);
            let far = compose(&lp::dyadic_block(transport, j)?, flow);
            Field::new(
                *u.grid(),
                u_phi
                    .samples()
                    .iter()
                    .zip(near.samples())
                    .map(|(a, b)| a * b)
                    .collect(),
            )?
            .sub(&far)
        };
        let report = e.step.is_multiple_of(self.opts.report_every) || e.step == self.steps;
        let p = self.opts.p;

        let mut s = 0.0;
        let mut closure = 0.0;
        let mut ledger = Ledger::default();
        let mut ratio = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut lhs2, mut rhs2, mut mismatch2, mut rate2) = (0.0, 0.0, 0.0, 0.0);
        for k in 0..self.blocks.len() {
            let (j, w) = (self.blocks[k].j, self.blocks[k].weight);
            let transported = compose(&lp::dyadic_block(u, j)?, &self.flow);
            let block_e = lp::dyadic_block(&big_e, j)?;
            let block_e_phi = compose(&block_e, &self.flow);
            let drift = block_e_phi.sub(&self.blocks[k].e0)?;
            let r = commutator(u, &advection, j)?;
            let bf = compose(&lp::dyadic_block(&big_f, j)?, &self.flow);
            let b = &mut self.blocks[k];
            b.r.push(t, r)?;
            b.f.push(t, bf)?;
            b.drift.push(t, drift.clone())?;
            if let (Some(gi), Some(ci), Some(g), Some(et)) = (
                b.g.as_mut(),
                b.commutator.as_mut(),
                big_g.as_ref(),
                e_transport.as_ref(),
            ) {
                let comm = commutator(&big_e, et, j)?;
                let bg = compose(&lp::dyadic_block(g, j)?, flow);
                rate2 += w * (comm.lp_norm(p) + bg.lp_norm(p));
                ci.push(t, comm)?;
                gi.push(t, bg)?;
            }
            let b = &self.blocks[k];
            s += w * self.norm(&transported);
            if !report {
                continue;
            }
            let t_e0 = b.e0.scale(t);
            let sum =
                b.u0.add(b.r.value())?
                    .add(b.f.value())?
                    .add(b.drift.value())?
                    .add(&t_e0)?;
            closure += w * self.norm(&transported.sub(&sum)?);
            ledger.u0 += w * self.norm(&b.u0);
            ledger.r += w * self.norm(b.r.value());
            ledger.f += w * self.norm(b.f.value());
            ledger.e_drift += w * self.norm(b.drift.value());
            ledger.t_e0 += w * self.norm(&t_e0);
            let plain = block_e.lp_norm(p);
            if plain > 0.0 {
                let q = block_e_phi.lp_norm(p) / plain;
                ratio = (ratio.0.min(q), ratio.1.max(q));
            }
            if let (Some(ci), Some(gi)) = (b.commutator.as_ref(), b.g.as_ref()) {
                let rhs = ci.value().add(gi.value())?;
                lhs2 += w * self.norm(&drift);
                rhs2 += w * self.norm(&rhs);
                mismatch2 += w * self.norm(&drift.sub(&rhs)?);
            }
        }
        self.u_phi = Some(u_phi);
        self.s_series.push((t, s));
        self.step2_peak = self.step2_peak.max(rate2);
        if !report {
            return Ok(());
        }
        let besov = lp::besov_norm(u, lp::BesovIndex::new(1.0, p, 1.0)?)?;
        let closure_residual = if closure == 0.0 { 0.0 } else { closure / s };
        self.rows.push(ReportRow {
            t,
            s,
            besov,
            lip: solver::lipschitz_norm(u, &e.products.slope),
            energy: solver::h1_energy(u),
            ledger,
            closure_residual,
            jacobian: self.flow.jacobian_range(),
            composition_ratio: ratio,
            boundary: solver::boundary_amplitude(u, u.grid().length() / 20.0),
        });
        if self.opts.step2 {
            self.step2.push(Step2Row {
                t,
                lhs: lhs2,
                rhs: rhs2,
                mismatch: mismatch2,
                bound: t * self.step2_peak,
            });
        }
        log::info!("t={t:.5} S={s:.6e} closure={closure_residual:.2e}");
        Ok(())
    }
}

fn is_guard(e: &Error) -> bool {
    matches!(
        e,
        Error::Cfl { .. } | Error::BlowUp { .. } | Error::JacobianBound { .. }
    )
}

/// Co-advances solver and flow from `u0` and streams the transported-block
/// ledger for `opts.blocks`. Guard violations end the run early and are
/// returned inside the partial report; other errors propagate.
pub fn run_ledger(
    u0: &Field,
    cfg: &SolverConfig,
    opts: &LedgerOptions,
) -> Result<ExperimentReport> {
    cfg.grid().check_same(u0.grid())?;
    let grid = *u0.grid();
    let e0 = compute_e(u0);
    let mut blocks = Vec::new();
    for &j in &opts.blocks {
        let make = || opts.step2.then(|| TimeIntegral::new(grid));
        blocks.push(BlockLedger {
            j,
            weight: 2f64.powi(j),
            u0: lp::dyadic_block(u0, j)?,
            e0: lp::dyadic_block(&e0, j)?,
            r: TimeIntegral::new(grid),
            f: TimeIntegral::new(grid),
            drift: TimeIntegral::new(grid),
            commutator: make(),
            g: make(),
        });
    }
    let e0_sum = block_sum(&e0, &opts.blocks, opts.p)?;
    drop(e0);
    let mut run = LedgerRun {
        opts,
        steps: cfg.steps(),
        dealias: cfg.dealias(),
        flow: FlowState::identity(grid),
        u_phi: None,
        blocks,
        e0_sum,
        rows: Vec::new(),
        step2: Vec::new(),
        s_series: Vec::new(),
        step2_peak: 0.0,
        jacobian_extremes: (1.0, 1.0),
    };
    let aborted = match integrate(u0, cfg, &mut run) {
        Ok(_) => None,
        Err(e) if is_guard(&e) => {
            log::warn!("run stopped early: {e}");
            Some(e)
        }
        Err(e) => return Err(e),
    };
    Ok(ExperimentReport {
        p: opts.p,
        blocks: opts.blocks.clone(),
        block_sum_e0: run.e0_sum,
        rows: run.rows,
        step2: run.step2,
        s_series: run.s_series,
        jacobian_extremes: run.jacobian_extremes,
        aborted,
    })
}

/// The growth experiment for the constructed datum: `u0` is synthesized on
/// the solver grid and the ledger tracks the blocks `j in N(n)`.
pub fn run_inflation(params: &ConstructionParams, cfg: &SolverConfig) -> Result<ExperimentReport> {
    run_inflation_with(
        params,
        cfg,
        &LedgerOptions::new(params.freq_set().blocks(), params.p())?,
    )
}

/// Like [`run_inflation`] with explicit ledger options.
pub fn run_inflation_with(
    params: &ConstructionParams,
    cfg: &SolverConfig,
    opts: &LedgerOptions,
) -> Result<ExperimentReport> {
    let window = 1.0 / (params.n() as f64).ln();
    if cfg.t_end() > window * (1.0 + 1e-12) {
        return Err(Error::Precondition(format!(
            "t_end {} exceeds 1/log n = {window}",
            cfg.t_end()
        )));
    }
    let u0 = build_u0(params, *cfg.grid(), centering_shift(params))?;
    run_ledger(&u0, cfg, opts)
}

/// `||E_t + u E_x - G||_2` at the interior levels of a stored trajectory,
/// with `E_t` by centered differences. Returns `(t, residual)` pairs.
pub fn g_identity_residuals(traj: &solver::Trajectory) -> Result<Vec<(f64, f64)>> {
    let times = traj.times();
    let states = traj.states();
    if times.len() < 3 {
        return Err(Error::TrajectoryMismatch(
            "need at least three time levels".into(),
        ));
    }
    let e: Vec<Field> = states.iter().map(compute_e).collect();
    let mut out = Vec::new();
    for k in 1..times.len() - 1 {
        let (h0, h1) = (times[k] - times[k - 1], times[k + 1] - times[k]);
        if ((h0 - h1) / h0).abs() > 1e-9 {
            return Err(Error::TrajectoryMismatch(
                "centered differences need uniform spacing".into(),
            ));
        }
        let et = e[k + 1].sub(&e[k - 1])?.scale(0.5 / h0);
        let u = &states[k];
        let transport = u.product(&e[k].dx(), Dealias::On)?;
        let residual = et.add(&transport)?.sub(&compute_g(u))?;
        out.push((times[k], residual.lp_norm(2.0)));
    }
    Ok(out)
}
