use thiserror::Error;

/// Errors produced by the analysis, solver and experiment layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("dyadic block {j} needs frequencies up to {needed:.6e} but the grid Nyquist is {nyquist:.6e}")]
    UnresolvedBlock { j: i32, needed: f64, nyquist: f64 },

    #[error("invalid Lebesgue exponent {0}")]
    InvalidExponent(f64),

    #[error("invalid Besov index: {0}")]
    InvalidBesovIndex(String),

    #[error("construction scale n = {0} is not a positive multiple of 16")]
    InvalidScale(u32),

    #[error("grid Nyquist {nyquist:.6e} does not resolve frequencies up to {needed:.6e}")]
    Resolution { needed: f64, nyquist: f64 },

    #[error("bump centred at {center:.6} is within {margin:.3} of the domain boundary (half-length {half_length:.3})")]
    Coverage {
        center: f64,
        margin: f64,
        half_length: f64,
    },

    #[error("oscillatory quadrature needs about {needed:.3e} samples, budget is {budget:.3e}")]
    QuadratureBudget { needed: f64, budget: f64 },

    #[error("slope ceiling exceeded at t = {t:.6}: |u_x|_inf = {slope:.6e}")]
    BlowUp { t: f64, slope: f64 },

    #[error("CFL guard violated at t = {t:.6}: |u|_inf dt/dx = {cfl:.6e} > {guard:.3}")]
    Cfl { t: f64, cfl: f64, guard: f64 },

    #[error("flow Jacobian left [1/4, 4] at t = {t:.6}: range [{min:.6}, {max:.6}]")]
    JacobianBound { t: f64, min: f64, max: f64 },

    #[error("trajectories are not time-aligned: {0}")]
    TrajectoryMismatch(String),

    #[error("invalid solver configuration: {0}")]
    InvalidSolverConfig(String),

    #[error("experiment precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
