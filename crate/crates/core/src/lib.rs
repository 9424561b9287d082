//! Numerical toolkit for norm inflation of the Camassa-Holm equation in
//! `B^1_{p,1} ∩ C^{0,1}`.
//!
//! * [`lp`]: Littlewood-Paley blocks, Besov/Lebesgue/Lipschitz norms, commutators
//!   and Bernstein measurements for sampled periodic functions.
//! * [`initial_data`]: the high-frequency initial datum, its Fourier transform and
//!   the analytic norm checks for large construction scales.
//! * [`solver`]: pseudospectral Camassa-Holm solver in nonlocal transport form.
//! * [`flow`]: Lagrangian flow map, composition and the transported-block identity.
//! * [`inflation`]: source terms `E`, `F`, `G` and the growth experiment.
//! * [`alloc`]: page-retaining global allocator for the large-grid binaries.

pub mod alloc;
pub mod error;
pub mod fft;
pub mod flow;
pub mod grid;
pub mod inflation;
pub mod initial_data;
pub mod lp;
pub mod solver;

pub use error::{Error, Result};
pub use grid::{Dealias, Field, GridSpec};
