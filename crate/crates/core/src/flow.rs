//! Lagrangian flow `d/dt phi(t, x) = u(t, phi(t, x))`, `phi(0, x) = x`, on the
//! grid nodes, and composition `f o phi` by band-limited interpolation.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Field, GridSpec};
use crate::lp;
use crate::solver::{Observer, StepEvent, Trajectory};

/// Jacobian range outside of which the flow is treated as broken.
pub const JACOBIAN_HARD_BOUNDS: (f64, f64) = (0.25, 4.0);

/// Flow map at time `t`, stored as the periodic displacement `phi(x) - x`.
#[derive(Debug, Clone)]
pub struct FlowState {
    t: f64,
    displacement: Field,
    jacobian: Field,
}

impl FlowState {
    pub fn identity(grid: GridSpec) -> Self {
        Self {
            t: 0.0,
            displacement: Field::zeros(grid),
            jacobian: Field::constant(grid, 1.0),
        }
    }

    fn from_displacement(t: f64, displacement: Field) -> Self {
        let grid = *displacement.grid();
        let jacobian = displacement
            .dx()
            .lin_comb(1.0, &Field::constant(grid, 1.0), 1.0)
            .expect("same grid");
        Self {
            t,
            displacement,
            jacobian,
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn grid(&self) -> &GridSpec {
        self.displacement.grid()
    }

    pub fn displacement(&self) -> &Field {
        &self.displacement
    }

    /// `d phi / dx`, computed spectrally from the displacement.
    pub fn jacobian(&self) -> &Field {
        &self.jacobian
    }

    pub fn jacobian_range(&self) -> (f64, f64) {
        self.jacobian
            .samples()
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// `phi(x_i)` at every node.
    pub fn positions(&self) -> Vec<f64> {
        self.grid()
            .nodes()
            .zip(self.displacement.samples())
            .map(|(x, d)| x + d)
            .collect()
    }
}

/// Evaluates `f(x_i + d_i)` at every node.
///
/// Each target is written as a nearest node plus an offset `r` with
/// `|r| <= dx/2`, and `f` is expanded there in a Taylor series whose
/// derivatives are exact spectral derivatives. The series stops once the
/// remainder bound `sum_k |f_k| (|xi_k| r)^(K+1) / (K+1)!` falls below
/// `1e-16 sum_k |f_k|`. The result equals band-limited interpolation of `f`.
pub fn compose_displaced(f: &Field, displacement: &[f64]) -> Field {
    let grid = *f.grid();
    let n = grid.points();
    assert_eq!(displacement.len(), n, "displacement length mismatch");
    let dx = grid.spacing();
    let x0 = -0.5 * grid.length();
    let mut nearest = vec![0usize; n];
    let mut offset = vec![0.0; n];
    let mut reach: f64 = 0.0;
    for i in 0..n {
        let z = grid.node(i) + displacement[i];
        let m = ((z - x0) / dx).round();
        let r = z - (x0 + m * dx);
        nearest[i] = (m as i64).rem_euclid(n as i64) as usize;
        offset[i] = r;
        reach = reach.max(r.abs());
    }
    let samples = f.samples();
    let mut out: Vec<f64> = nearest.iter().map(|&m| samples[m]).collect();
    if reach == 0.0 {
        return Field::new(grid, out).expect("finite samples");
    }
    let terms = taylor_terms(f.spectrum(), &grid, reach);
    let scaled: Vec<f64> = offset.iter().map(|r| r / reach).collect();
    let mut power = vec![1.0; n];
    let nyq = n / 2;
    let mut spectrum: Vec<Complex64> = f.spectrum().to_vec();
    for k in 1..=terms {
        // spectrum of f^(k) reach^k / k!
        for (j, z) in spectrum.iter_mut().enumerate() {
            *z = if j == nyq {
                Complex64::new(0.0, 0.0)
            } else {
                *z * Complex64::new(0.0, grid.wavenumber(j) * reach / k as f64)
            };
        }
        let values = crate::fft::irfft(&spectrum, n);
        for i in 0..n {
            power[i] *= scaled[i];
            out[i] += values[nearest[i]] * power[i];
        }
    }
    Field::new(grid, out).expect("finite samples")
}

/// Smallest order whose Taylor remainder at offsets up to `reach` is below
/// `1e-16` of the spectrum's l1 mass. Mass is binned into bands and each band
/// is charged at its top wavenumber.
fn taylor_terms(spectrum: &[Complex64], grid: &GridSpec, reach: f64) -> usize {
    const BANDS: usize = 128;
    let len = spectrum.len();
    let mut mass = [0.0; BANDS];
    for (k, c) in spectrum.iter().enumerate() {
        mass[k * BANDS / len] += c.norm();
    }
    let total: f64 = mass.iter().sum();
    if total == 0.0 {
        return 0;
    }
    let rho: Vec<f64> = (0..BANDS)
        .map(|b| grid.wavenumber(((b + 1) * len).div_ceil(BANDS)) * reach)
        .collect();
    let mut power = mass;
    for k in 1..=200 {
        let mut bound = 0.0;
        for b in 0..BANDS {
            power[b] *= rho[b] / k as f64;
            bound += power[b];
        }
        if bound <= 1e-16 * total {
            return k - 1;
        }
    }
    200
}

/// `f o phi`.
pub fn compose(f: &Field, state: &FlowState) -> Field {
    compose_displaced(f, state.displacement.samples())
}

/// One RK4 step of the characteristic equation. `velocities` are the velocity
/// fields at the four stages (`t`, `t + dt/2`, `t + dt/2`, `t + dt`); for the
/// coupled solver these are the solver's own stage states.
pub fn advance_flow(state: &FlowState, velocities: [&Field; 4], dt: f64) -> Result<FlowState> {
    state.grid().check_same(velocities[0].grid())?;
    let k1 = compose(velocities[0], state);
    advance_flow_from(state, k1, [velocities[1], velocities[2], velocities[3]], dt)
}

/// [`advance_flow`] with the first stage slope `u(t) o phi(t)` already known.
pub fn advance_flow_from(
    state: &FlowState,
    k1: Field,
    velocities: [&Field; 3],
    dt: f64,
) -> Result<FlowState> {
    state.grid().check_same(k1.grid())?;
    for v in velocities {
        state.grid().check_same(v.grid())?;
    }
    let d0 = &state.displacement;
    let d2 = d0.lin_comb(1.0, &k1, 0.5 * dt)?;
    let k2 = compose_displaced(velocities[0], d2.samples());
    let d3 = d0.lin_comb(1.0, &k2, 0.5 * dt)?;
    let k3 = compose_displaced(velocities[1], d3.samples());
    let d4 = d0.lin_comb(1.0, &k3, dt)?;
    let k4 = compose_displaced(velocities[2], d4.samples());
    let n = d0.samples().len();
    let mut next = d0.samples().to_vec();
    let (a, b, c, d) = (k1.samples(), k2.samples(), k3.samples(), k4.samples());
    for i in 0..n {
        next[i] += dt / 6.0 * (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i]);
    }
    let t = state.t + dt;
    let out = FlowState::from_displacement(t, Field::new(*state.grid(), next)?);
    let (min, max) = out.jacobian_range();
    if min < JACOBIAN_HARD_BOUNDS.0 || max > JACOBIAN_HARD_BOUNDS.1 {
        return Err(Error::JacobianBound { t, min, max });
    }
    Ok(out)
}

/// Observer that advances a flow map in lockstep with the solver.
#[derive(Debug, Clone)]
pub struct FlowTracker {
    pub state: FlowState,
    pub jacobian_extremes: (f64, f64),
}

impl FlowTracker {
    pub fn new(grid: GridSpec) -> Self {
        Self {
            state: FlowState::identity(grid),
            jacobian_extremes: (1.0, 1.0),
        }
    }
}

impl Observer for FlowTracker {
    fn observe(&mut self, e: &StepEvent<'_>) -> Result<()> {
        if let Some(stages) = e.stages {
            let [a, b, c, d] = &stages.states;
            self.state = advance_flow(&self.state, [a, b, c, d], stages.dt)?;
            let (lo, hi) = self.state.jacobian_range();
            self.jacobian_extremes = (
                self.jacobian_extremes.0.min(lo),
                self.jacobian_extremes.1.max(hi),
            );
        }
        Ok(())
    }
}

/// Streaming trapezoid rule for a field-valued integrand.
#[derive(Debug, Clone)]
pub struct TimeIntegral {
    integral: Field,
    last: Option<(f64, Field)>,
}

impl TimeIntegral {
    pub fn new(grid: GridSpec) -> Self {
        Self {
            integral: Field::zeros(grid),
            last: None,
        }
    }

    /// Adds the integrand value at `t`; calls must come in increasing `t`.
    pub fn push(&mut self, t: f64, value: Field) -> Result<()> {
        if let Some((t0, v0)) = self.last.take() {
            if t <= t0 {
                return Err(Error::TrajectoryMismatch(format!(
                    "time {t} does not follow {t0}"
                )));
            }
            let h = 0.5 * (t - t0);
            self.integral = self.integral.lin_comb(1.0, &v0.add(&value)?, h)?;
        }
        self.last = Some((t, value));
        Ok(())
    }

    pub fn value(&self) -> &Field {
        &self.integral
    }

    /// Integrand at the last pushed time.
    pub fn last_integrand(&self) -> Option<&Field> {
        self.last.as_ref().map(|(_, v)| v)
    }
}

/// Streaming form of `Delta_j v o phi = Delta_j v0 + int R_j o phi + int Delta_j P o phi`,
/// `R_j = u Delta_j v_x - Delta_j (u v_x)`.
#[derive(Debug, Clone)]
pub struct TransportedBlock {
    j: i32,
    initial: Field,
    integral_r: TimeIntegral,
    integral_p: TimeIntegral,
}

impl TransportedBlock {
    pub fn new(v0: &Field, j: i32) -> Result<Self> {
        let grid = *v0.grid();
        Ok(Self {
            j,
            initial: lp::dyadic_block(v0, j)?,
            integral_r: TimeIntegral::new(grid),
            integral_p: TimeIntegral::new(grid),
        })
    }

    /// Adds the integrands at time `t`; calls must come in increasing `t`.
    pub fn push(
        &mut self,
        t: f64,
        u: &Field,
        v: &Field,
        p: &Field,
        flow: &FlowState,
    ) -> Result<()> {
        let r = compose(&lp::commutator(u, v, self.j, crate::Dealias::On)?, flow);
        let bp = compose(&lp::dyadic_block(p, self.j)?, flow);
        self.integral_r.push(t, r)?;
        self.integral_p.push(t, bp)
    }

    /// `Delta_j v o phi - (Delta_j v0 + int R + int P)` at the last pushed time.
    pub fn residual(&self, v: &Field, flow: &FlowState) -> Result<Field> {
        let lhs = compose(&lp::dyadic_block(v, self.j)?, flow);
        lhs.sub(&self.initial)?
            .sub(self.integral_r.value())?
            .sub(self.integral_p.value())
    }

    pub fn integral_r(&self) -> &Field {
        self.integral_r.value()
    }

    pub fn integral_p(&self) -> &Field {
        self.integral_p.value()
    }
}

/// Residual of the transported-block identity at the final stored time.
/// All trajectories must share their time levels.
pub fn transported_block_identity_residual(
    u_traj: &Trajectory,
    v_traj: &Trajectory,
    p_traj: &Trajectory,
    flows: &[FlowState],
    j: i32,
) -> Result<Field> {
    let times = u_traj.times();
    if v_traj.times() != times || p_traj.times() != times || flows.len() != times.len() {
        return Err(Error::TrajectoryMismatch(
            "trajectories have different time levels".into(),
        ));
    }
    if flows
        .iter()
        .zip(times)
        .any(|(f, t)| (f.t() - t).abs() > 1e-12 * t.abs().max(1.0))
    {
        return Err(Error::TrajectoryMismatch(
            "flow states are not at the trajectory times".into(),
        ));
    }
    let mut probe = TransportedBlock::new(&v_traj.states()[0], j)?;
    for k in 0..times.len() {
        probe.push(
            times[k],
            &u_traj.states()[k],
            &v_traj.states()[k],
            &p_traj.states()[k],
            &flows[k],
        )?;
    }
    probe.residual(v_traj.last(), flows.last().expect("non-empty"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(n: usize) -> GridSpec {
        GridSpec::periodic_2pi(n).unwrap()
    }

    #[test]
    fn identity_flow_leaves_fields_unchanged() {
        let g = grid(64);
        let f = Field::from_fn(g, |x| (3.0 * x).sin() + 0.2);
        let out = compose(&f, &FlowState::identity(g));
        assert_eq!(out.samples(), f.samples());
    }

    #[test]
    fn translation_is_exact_for_band_limited_fields() {
        let g = grid(64);
        let f = Field::from_fn(g, |x| (5.0 * x).sin() + 0.5 * (17.0 * x).cos());
        for a in [0.013, -0.4, 1.7, 7.3] {
            let out = compose_displaced(&f, &vec![a; 64]);
            for (x, v) in g.nodes().zip(out.samples()) {
                let exact = (5.0 * (x + a)).sin() + 0.5 * (17.0 * (x + a)).cos();
                assert!((v - exact).abs() < 1e-12, "a={a} x={x}: {v} vs {exact}");
            }
        }
    }

    #[test]
    fn nonuniform_displacement_matches_pointwise_evaluation() {
        let g = grid(128);
        let f = Field::from_fn(g, |x| (-(2.0 * x).cos()).exp());
        let d: Vec<f64> = g.nodes().map(|x| 0.3 * x.sin()).collect();
        let out = compose_displaced(&f, &d);
        for (i, x) in g.nodes().enumerate() {
            let exact = (-(2.0 * (x + d[i])).cos()).exp();
            assert!((out.samples()[i] - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_velocity_translates() {
        let g = grid(32);
        let c = Field::constant(g, 0.37);
        let mut s = FlowState::identity(g);
        for _ in 0..10 {
            s = advance_flow(&s, [&c, &c, &c, &c], 0.1).unwrap();
        }
        assert!((s.t() - 1.0).abs() < 1e-14);
        assert!(s
            .displacement()
            .samples()
            .iter()
            .all(|d| (d - 0.37).abs() < 1e-14));
        let (lo, hi) = s.jacobian_range();
        assert!((lo - 1.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
    }

    #[test]
    fn frozen_cosine_flow_matches_closed_form() {
        // dphi/dt = cos(phi): phi = gd(t + gd^-1(x)) on |x| < pi/2, mirrored about pi/2 beyond.
        let exact = |x: f64, t: f64| {
            let gd = |y: f64| y.sinh().atan();
            let inv = |y: f64| y.sin().atanh();
            let y = if x < -PI / 2.0 { x + 2.0 * PI } else { x };
            if (y.abs() - PI / 2.0).abs() < 1e-12 {
                return x;
            }
            let v = if y.abs() < PI / 2.0 {
                gd(t + inv(y))
            } else {
                PI - gd(t + inv(PI - y))
            };
            v - y + x
        };
        let g = grid(256);
        let u = Field::from_fn(g, f64::cos);
        let err = |dt: f64| {
            let steps = (0.5 / dt).round() as usize;
            let mut s = FlowState::identity(g);
            for _ in 0..steps {
                s = advance_flow(&s, [&u, &u, &u, &u], dt).unwrap();
            }
            g.nodes()
                .zip(s.positions())
                .map(|(x, p)| (p - exact(x, 0.5)).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(0.05), err(0.025));
        assert!(e1 < 1e-5, "{e1}");
        let ratio = e1 / e2;
        assert!(ratio > 12.0 && ratio < 20.0, "ratio {ratio}");
    }

    #[test]
    fn jacobian_guard() {
        let g = grid(64);
        let u = Field::from_fn(g, |x| 2.0 * x.sin());
        let mut s = FlowState::identity(g);
        let mut failed = false;
        for _ in 0..40 {
            match advance_flow(&s, [&u, &u, &u, &u], 0.05) {
                Ok(next) => s = next,
                Err(Error::JacobianBound { .. }) => {
                    failed = true;
                    break;
                }
                Err(e) => panic!("{e}"),
            }
        }
        assert!(failed);
    }

    #[test]
    fn frozen_flow_block_identity() {
        // u = 0: Delta_j v = Delta_j v0 + int Delta_j P with v = v0 + t P.
        let g = grid(128);
        let v0 = Field::from_fn(g, |x| (3.0 * x).cos());
        let p = Field::from_fn(g, |x| (2.5 * x).sin() + (3.0 * x).sin());
        let zero = Field::zeros(g);
        let flow = FlowState::identity(g);
        let mut probe = TransportedBlock::new(&v0, 1).unwrap();
        let mut v = v0.clone();
        for k in 0..=10 {
            let t = 0.1 * k as f64;
            v = v0.lin_comb(1.0, &p, t).unwrap();
            probe.push(t, &zero, &v, &p, &flow).unwrap();
        }
        assert!(probe.residual(&v, &flow).unwrap().max_abs() < 1e-13);
    }
}
