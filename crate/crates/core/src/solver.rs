//! Fixed-step RK4 pseudospectral solver for the Camassa-Holm equation in
//! nonlocal form,
//!
//! `u_t + u u_x = -d/dx (1 - d^2/dx^2)^-1 (u^2 + u_x^2 / 2)`,
//!
//! on a periodic grid. All quadratic products are dealiased by 3/2 padding
//! unless the configuration turns that off.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::{padded_samples, truncate_padded, Dealias, Field, GridSpec};

/// `1 / (1 + xi^2)`.
pub fn helmholtz_symbol(xi: f64) -> f64 {
    1.0 / (1.0 + xi * xi)
}

/// `(1 - d^2/dx^2)^-1 f`.
pub fn helmholtz_solve(f: &Field) -> Field {
    f.apply_multiplier(helmholtz_symbol)
}

/// Applies `c * d/dx (1 - d^2/dx^2)^-1` to a half spectrum in place.
pub(crate) fn dx_helmholtz_in_place(spectrum: &mut [Complex64], grid: &GridSpec, c: f64) {
    let nyq = grid.points() / 2;
    for (k, z) in spectrum.iter_mut().enumerate() {
        if k == nyq {
            *z = Complex64::new(0.0, 0.0);
            continue;
        }
        let xi = grid.wavenumber(k);
        *z *= Complex64::new(0.0, c * xi * helmholtz_symbol(xi));
    }
}

/// Half spectrum of `u_x` from that of `u` (Nyquist dropped).
pub(crate) fn derivative_spectrum(spectrum: &[Complex64], grid: &GridSpec) -> Vec<Complex64> {
    let nyq = grid.points() / 2;
    spectrum
        .iter()
        .enumerate()
        .map(|(k, z)| {
            if k == nyq {
                Complex64::new(0.0, 0.0)
            } else {
                z * Complex64::new(0.0, grid.wavenumber(k))
            }
        })
        .collect()
}

/// The three quadratic products of `u` entering the equation, as half spectra,
/// together with `u_x`.
#[derive(Debug, Clone)]
pub struct Products {
    pub slope: Field,
    pub u_sq: Vec<Complex64>,
    pub ux_sq: Vec<Complex64>,
    pub u_ux: Vec<Complex64>,
}

impl Products {
    pub fn new(u: &Field, dealias: Dealias) -> Self {
        let grid = *u.grid();
        let slope = Field::from_spectrum(grid, derivative_spectrum(u.spectrum(), &grid));
        let (u_sq, ux_sq, u_ux) = match dealias {
            Dealias::On => {
                let a = padded_samples(u.spectrum(), &grid);
                let b = padded_samples(slope.spectrum(), &grid);
                let sq: Vec<f64> = a.iter().map(|v| v * v).collect();
                let dsq: Vec<f64> = b.iter().map(|v| v * v).collect();
                let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
                (
                    truncate_padded(sq, &grid),
                    truncate_padded(dsq, &grid),
                    truncate_padded(mix, &grid),
                )
            }
            Dealias::Off => {
                let a = u.samples();
                let b = slope.samples();
                (
                    fft::rfft_owned(a.iter().map(|v| v * v).collect()),
                    fft::rfft_owned(b.iter().map(|v| v * v).collect()),
                    fft::rfft_owned(a.iter().zip(b).map(|(x, y)| x * y).collect()),
                )
            }
        };
        Self {
            slope,
            u_sq,
            ux_sq,
            u_ux,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        self.slope.grid()
    }

    /// `-u u_x - d/dx (1 - d^2/dx^2)^-1 (u^2 + u_x^2 / 2)`.
    pub fn rate(&self) -> Field {
        let grid = *self.grid();
        let mut source: Vec<Complex64> = self
            .u_sq
            .iter()
            .zip(&self.ux_sq)
            .map(|(a, b)| a + b * 0.5)
            .collect();
        dx_helmholtz_in_place(&mut source, &grid, -1.0);
        let spectrum = source.iter().zip(&self.u_ux).map(|(s, a)| s - a).collect();
        Field::from_spectrum(grid, spectrum)
    }

    /// `E = -1/2 d/dx (1 - d^2/dx^2)^-1 u_x^2`.
    pub fn e_term(&self) -> Field {
        let grid = *self.grid();
        let mut s = self.ux_sq.clone();
        dx_helmholtz_in_place(&mut s, &grid, -0.5);
        Field::from_spectrum(grid, s)
    }

    /// `F = -d/dx (1 - d^2/dx^2)^-1 u^2`.
    pub fn f_term(&self) -> Field {
        let grid = *self.grid();
        let mut s = self.u_sq.clone();
        dx_helmholtz_in_place(&mut s, &grid, -1.0);
        Field::from_spectrum(grid, s)
    }

    /// `u u_x`.
    pub fn advection(&self) -> Field {
        Field::from_spectrum(*self.grid(), self.u_ux.clone())
    }
}

/// Right-hand side of the nonlocal equation with dealiased products.
pub fn ch_rhs(u: &Field) -> Field {
    ch_rhs_with(u, Dealias::On)
}

pub fn ch_rhs_with(u: &Field, dealias: Dealias) -> Field {
    let tail = resolution_tail(u);
    if tail > RESOLUTION_TAIL_LIMIT {
        log::warn!("spectral tail holds {tail:.3e} of the energy; the grid may not resolve u");
    }
    Products::new(u, dealias).rate()
}

/// Energy fraction above the warning threshold.
pub const RESOLUTION_TAIL_LIMIT: f64 = 1e-8;

/// Fraction of spectral energy in the top third of resolved wavenumbers.
pub fn resolution_tail(u: &Field) -> f64 {
    let cut = 2.0 / 3.0 * u.grid().nyquist();
    let total = u.spectral_energy(|_| true);
    if total == 0.0 {
        return 0.0;
    }
    u.spectral_energy(|xi| xi > cut) / total
}

/// `int (u^2 + u_x^2) dx` by the rectangle rule.
pub fn h1_energy(u: &Field) -> f64 {
    let ux = u.dx();
    let sum: f64 = u
        .samples()
        .iter()
        .zip(ux.samples())
        .map(|(a, b)| a * a + b * b)
        .sum();
    sum * u.grid().spacing()
}

/// `||u||_inf + ||u_x||_inf`.
pub fn lipschitz_norm(u: &Field, slope: &Field) -> f64 {
    u.max_abs() + slope.max_abs()
}

/// Largest `|u|` within `zone` of either end of the box, relative to `max |u|`.
pub fn boundary_amplitude(u: &Field, zone: f64) -> f64 {
    let grid = u.grid();
    let edge = 0.5 * grid.length() - zone;
    let peak = u.max_abs();
    if peak == 0.0 {
        return 0.0;
    }
    grid.nodes()
        .zip(u.samples())
        .filter(|(x, _)| x.abs() >= edge)
        .fold(0.0_f64, |m, (_, v)| m.max(v.abs()))
        / peak
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    grid: GridSpec,
    dt: f64,
    steps: usize,
    dealias: Dealias,
    cfl_guard: f64,
    slope_ceiling: f64,
}

impl SolverConfig {
    pub const DEFAULT_CFL_GUARD: f64 = 0.5;
    pub const DEFAULT_SLOPE_CEILING: f64 = 1e6;

    /// Uniform steps covering `[0, t_end]`; the step is shrunk, if needed, so
    /// that an integer number of steps lands exactly on `t_end`.
    pub fn new(grid: GridSpec, dt: f64, t_end: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidSolverConfig(format!(
                "time step {dt} must be positive"
            )));
        }
        if !(t_end.is_finite() && t_end >= 0.0) {
            return Err(Error::InvalidSolverConfig(format!(
                "final time {t_end} must be non-negative"
            )));
        }
        let steps = (t_end / dt - 1e-9).ceil().max(0.0) as usize;
        let dt = if steps == 0 { dt } else { t_end / steps as f64 };
        Ok(Self {
            grid,
            dt,
            steps,
            dealias: Dealias::On,
            cfl_guard: Self::DEFAULT_CFL_GUARD,
            slope_ceiling: Self::DEFAULT_SLOPE_CEILING,
        })
    }

    pub fn with_dealias(mut self, dealias: Dealias) -> Self {
        self.dealias = dealias;
        self
    }

    pub fn with_cfl_guard(mut self, guard: f64) -> Result<Self> {
        if !(guard > 0.0 && guard <= 0.5) {
            return Err(Error::InvalidSolverConfig(format!(
                "CFL guard {guard} must lie in (0, 0.5]"
            )));
        }
        self.cfl_guard = guard;
        Ok(self)
    }

    pub fn with_slope_ceiling(mut self, ceiling: f64) -> Result<Self> {
        if !(ceiling > 0.0) {
            return Err(Error::InvalidSolverConfig(format!(
                "slope ceiling {ceiling} must be positive"
            )));
        }
        self.slope_ceiling = ceiling;
        Ok(self)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn t_end(&self) -> f64 {
        self.dt * self.steps as f64
    }

    pub fn dealias(&self) -> Dealias {
        self.dealias
    }

    pub fn cfl_guard(&self) -> f64 {
        self.cfl_guard
    }

    pub fn slope_ceiling(&self) -> f64 {
        self.slope_ceiling
    }
}

/// Stage states `U_1..U_4` of the RK4 step that ended at the event time.
#[derive(Debug, Clone)]
pub struct Stages {
    pub dt: f64,
    pub states: [Field; 4],
}

/// What observers see at every time level.
pub struct StepEvent<'a> {
    pub step: usize,
    pub t: f64,
    pub u: &'a Field,
    /// Products of `u` at this time, reused as the first RK stage.
    pub products: &'a Products,
    /// Stages of the step that produced `u`; absent at `t = 0`.
    pub stages: Option<&'a Stages>,
}

pub trait Observer {
    fn observe(&mut self, event: &StepEvent<'_>) -> Result<()>;
}

impl<F: FnMut(&StepEvent<'_>) -> Result<()>> Observer for F {
    fn observe(&mut self, event: &StepEvent<'_>) -> Result<()> {
        self(event)
    }
}

impl<A: Observer, B: Observer> Observer for (A, B) {
    fn observe(&mut self, event: &StepEvent<'_>) -> Result<()> {
        self.0.observe(event)?;
        self.1.observe(event)
    }
}

impl Observer for Vec<Box<dyn Observer + '_>> {
    fn observe(&mut self, event: &StepEvent<'_>) -> Result<()> {
        self.iter_mut().try_for_each(|o| o.observe(event))
    }
}

/// No-op observer.
pub struct Silent;

impl Observer for Silent {
    fn observe(&mut self, _: &StepEvent<'_>) -> Result<()> {
        Ok(())
    }
}

fn check_guards(cfg: &SolverConfig, t: f64, u: &Field, slope: &Field) -> Result<()> {
    let umax = u.max_abs();
    let smax = slope.max_abs();
    if !umax.is_finite() || !smax.is_finite() || smax >= cfg.slope_ceiling {
        return Err(Error::BlowUp { t, slope: smax });
    }
    let cfl = umax * cfg.dt / cfg.grid.spacing();
    if cfl > cfg.cfl_guard {
        return Err(Error::Cfl {
            t,
            cfl,
            guard: cfg.cfl_guard,
        });
    }
    Ok(())
}

/// Advances `u0` over `cfg.steps()` RK4 steps, calling `observer` at every
/// time level including `t = 0`. Returns the final state.
pub fn integrate(u0: &Field, cfg: &SolverConfig, observer: &mut dyn Observer) -> Result<Field> {
    cfg.grid.check_same(u0.grid())?;
    let tail = resolution_tail(u0);
    if tail > RESOLUTION_TAIL_LIMIT {
        log::warn!("initial data leaves {tail:.3e} of its energy in the top third of the spectrum");
    }
    let dt = cfg.dt;
    let mut u = u0.clone();
    let mut previous: Option<Stages> = None;
    for step in 0..=cfg.steps {
        let t = step as f64 * dt;
        let products = Products::new(&u, cfg.dealias);
        check_guards(cfg, t, &u, &products.slope)?;
        observer.observe(&StepEvent {
            step,
            t,
            u: &u,
            products: &products,
            stages: previous.as_ref(),
        })?;
        if step == cfg.steps {
            break;
        }
        let k1 = products.rate();
        drop(products);
        let u2 = u.lin_comb(1.0, &k1, 0.5 * dt)?;
        let k2 = Products::new(&u2, cfg.dealias).rate();
        let u3 = u.lin_comb(1.0, &k2, 0.5 * dt)?;
        let k3 = Products::new(&u3, cfg.dealias).rate();
        let u4 = u.lin_comb(1.0, &k3, dt)?;
        let k4 = Products::new(&u4, cfg.dealias).rate();
        let incr = k1
            .lin_comb(1.0, &k4, 1.0)?
            .lin_comb(1.0, &k2.lin_comb(1.0, &k3, 1.0)?, 2.0)?;
        let next = u.lin_comb(1.0, &incr, dt / 6.0)?;
        previous = Some(Stages {
            dt,
            states: [u, u2, u3, u4],
        });
        u = next;
    }
    Ok(u)
}

/// Stored solution at every `stride`-th time level (and the last one).
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<Field>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, states: Vec<Field>) -> Result<Self> {
        if times.len() != states.len() || times.is_empty() {
            return Err(Error::TrajectoryMismatch(format!(
                "{} times for {} states",
                times.len(),
                states.len()
            )));
        }
        if times[0] != 0.0 || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::TrajectoryMismatch(
                "times must start at 0 and increase".into(),
            ));
        }
        Ok(Self { times, states })
    }

    /// Runs the solver and keeps every `stride`-th state.
    pub fn record(u0: &Field, cfg: &SolverConfig, stride: usize) -> Result<Self> {
        let stride = stride.max(1);
        let mut times = Vec::new();
        let mut states = Vec::new();
        let last = cfg.steps();
        let mut keep = |e: &StepEvent<'_>| {
            if e.step.is_multiple_of(stride) || e.step == last {
                times.push(e.t);
                states.push(e.u.clone());
            }
            Ok(())
        };
        integrate(u0, cfg, &mut keep)?;
        Self::new(times, states)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[Field] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> &Field {
        self.states.last().expect("trajectories are never empty")
    }
}

/// Tracks `log(||u(t)||_{C^{0,1}} / ||u0||_{C^{0,1}}) / int_0^t ||u_x||_inf`,
/// the constant a Gronwall-type bound needs along the run.
#[derive(Debug, Clone, Default)]
pub struct LipschitzMonitor {
    initial: f64,
    integral: f64,
    last: Option<(f64, f64)>,
    pub max_constant: f64,
    pub max_ratio: f64,
    pub samples: Vec<(f64, f64, f64)>,
}

impl LipschitzMonitor {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Observer for LipschitzMonitor {
    fn observe(&mut self, e: &StepEvent<'_>) -> Result<()> {
        let slope = e.products.slope.max_abs();
        let lip = lipschitz_norm(e.u, &e.products.slope);
        match self.last {
            None => {
                self.initial = lip;
                self.max_ratio = 1.0;
            }
            Some((t0, s0)) => {
                self.integral += 0.5 * (e.t - t0) * (s0 + slope);
                let ratio = if self.initial > 0.0 {
                    lip / self.initial
                } else {
                    1.0
                };
                self.max_ratio = self.max_ratio.max(ratio);
                if self.integral > 0.0 {
                    self.max_constant = self.max_constant.max(ratio.ln() / self.integral);
                }
            }
        }
        self.samples.push((e.t, lip, self.integral));
        self.last = Some((e.t, slope));
        Ok(())
    }
}
