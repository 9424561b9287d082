//! Uniform periodic grids and the sampled-function carrier used everywhere else.
//!
//! A [`Field`] stores real samples on `[-L/2, L/2)` together with a lazily
//! computed half spectrum. Wavenumbers are `xi_k = 2 pi k / L`. The continuous
//! transform `f^(xi) = int exp(-i x xi) f(x) dx` is approximated by
//! [`Field::fourier_transform`], the discrete sum scaled by the spacing.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;

/// Periodic grid `[-L/2, L/2)` with `N` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    length: f64,
    points: usize,
}

impl GridSpec {
    pub const MIN_POINTS: usize = 16;

    pub fn new(length: f64, points: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "length {length} must be positive"
            )));
        }
        if points < Self::MIN_POINTS || !points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "point count {points} must be a power of two >= {}",
                Self::MIN_POINTS
            )));
        }
        Ok(Self { length, points })
    }

    /// The `2 pi`-periodic grid, where wavenumbers are integers.
    pub fn periodic_2pi(points: usize) -> Result<Self> {
        Self::new(2.0 * PI, points)
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.points as f64
    }

    /// Largest representable wavenumber, `pi N / L`.
    pub fn nyquist(&self) -> f64 {
        PI * self.points as f64 / self.length
    }

    /// Wavenumber spacing `2 pi / L`.
    pub fn wavenumber_step(&self) -> f64 {
        2.0 * PI / self.length
    }

    pub fn wavenumber(&self, k: usize) -> f64 {
        self.wavenumber_step() * k as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        -0.5 * self.length + self.spacing() * i as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.points).map(move |i| self.node(i))
    }

    pub fn spectrum_len(&self) -> usize {
        self.points / 2 + 1
    }

    pub(crate) fn padded_points(&self) -> usize {
        3 * self.points / 2
    }

    pub fn check_same(&self, other: &GridSpec) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

/// Whether pointwise products are zero-padded (3/2 rule) before truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dealias {
    #[default]
    On,
    Off,
}

/// Real function sampled on a [`GridSpec`] with a cached half spectrum.
#[derive(Debug, Clone)]
pub struct Field {
    grid: GridSpec,
    samples: Vec<f64>,
    spectrum: OnceLock<Vec<Complex64>>,
}

impl Field {
    pub fn new(grid: GridSpec, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.points() {
            return Err(Error::InvalidGrid(format!(
                "{} samples for a grid of {} points",
                samples.len(),
                grid.points()
            )));
        }
        if let Some(bad) = samples.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite sample {bad}")));
        }
        Ok(Self {
            grid,
            samples,
            spectrum: OnceLock::new(),
        })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self::from_parts(
            grid,
            vec![0.0; grid.points()],
            Some(vec![Complex64::new(0.0, 0.0); grid.spectrum_len()]),
        )
    }

    pub fn constant(grid: GridSpec, value: f64) -> Self {
        let mut spectrum = vec![Complex64::new(0.0, 0.0); grid.spectrum_len()];
        spectrum[0] = Complex64::new(value * grid.points() as f64, 0.0);
        Self::from_parts(grid, vec![value; grid.points()], Some(spectrum))
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> f64) -> Self {
        let samples = grid.nodes().map(f).collect();
        Self::from_parts(grid, samples, None)
    }

    /// Builds a field from a half spectrum in the `rfft` convention.
    pub fn from_spectrum(grid: GridSpec, spectrum: Vec<Complex64>) -> Self {
        assert_eq!(
            spectrum.len(),
            grid.spectrum_len(),
            "half spectrum length mismatch"
        );
        let samples = fft::irfft(&spectrum, grid.points());
        Self::from_parts(grid, samples, Some(spectrum))
    }

    pub(crate) fn from_parts(
        grid: GridSpec,
        samples: Vec<f64>,
        spectrum: Option<Vec<Complex64>>,
    ) -> Self {
        let cell = OnceLock::new();
        if let Some(s) = spectrum {
            let _ = cell.set(s);
        }
        Self {
            grid,
            samples,
            spectrum: cell,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    /// Half spectrum `c_k`, `k = 0..=N/2`, computed on first use.
    pub fn spectrum(&self) -> &[Complex64] {
        self.spectrum.get_or_init(|| fft::rfft(&self.samples))
    }

    /// Approximation of `f^(xi_k)` for `k = 0..=N/2`.
    pub fn fourier_transform(&self) -> Vec<(f64, Complex64)> {
        let dx = self.grid.spacing();
        let half = 0.5 * self.grid.length();
        self.spectrum()
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let xi = self.grid.wavenumber(k);
                (xi, Complex64::from_polar(dx, xi * half) * c)
            })
            .collect()
    }

    /// Applies a real, even Fourier multiplier `m(|xi|)`.
    pub fn apply_multiplier(&self, m: impl Fn(f64) -> f64) -> Field {
        let grid = self.grid;
        let spectrum = self
            .spectrum()
            .iter()
            .enumerate()
            .map(|(k, c)| c * m(grid.wavenumber(k)))
            .collect();
        Field::from_spectrum(grid, spectrum)
    }

    /// Applies a Hermitian multiplier (`m(-xi) = conj m(xi)`), evaluated at `xi >= 0`.
    /// The Nyquist mode is dropped because its sign is ambiguous for odd symbols.
    pub fn apply_complex_multiplier(&self, m: impl Fn(f64) -> Complex64) -> Field {
        let grid = self.grid;
        let nyq = grid.points() / 2;
        let spectrum = self
            .spectrum()
            .iter()
            .enumerate()
            .map(|(k, c)| {
                if k == nyq {
                    Complex64::new(0.0, 0.0)
                } else {
                    c * m(grid.wavenumber(k))
                }
            })
            .collect();
        Field::from_spectrum(grid, spectrum)
    }

    /// Spectral derivative of the given order.
    pub fn derivative(&self, order: u32) -> Field {
        if order == 0 {
            return self.clone();
        }
        self.apply_complex_multiplier(|xi| Complex64::new(0.0, xi).powu(order))
    }

    pub fn dx(&self) -> Field {
        self.derivative(1)
    }

    /// Pointwise product. With [`Dealias::On`] both factors are evaluated on a
    /// 3N/2 grid and the product truncated back to `|k| < N/2`.
    pub fn product(&self, other: &Field, dealias: Dealias) -> Result<Field> {
        self.grid.check_same(&other.grid)?;
        Ok(match dealias {
            Dealias::Off => {
                let samples = self
                    .samples
                    .iter()
                    .zip(&other.samples)
                    .map(|(a, b)| a * b)
                    .collect();
                Field::from_parts(self.grid, samples, None)
            }
            Dealias::On => {
                let a = padded_samples(self.spectrum(), &self.grid);
                let b = padded_samples(other.spectrum(), &self.grid);
                let prod = a.iter().zip(&b).map(|(x, y)| x * y).collect();
                Field::from_spectrum(self.grid, truncate_padded(prod, &self.grid))
            }
        })
    }

    pub fn square(&self, dealias: Dealias) -> Field {
        self.product(self, dealias).expect("same grid")
    }

    /// `a * self + b * other`, combining cached spectra when both are present.
    pub fn lin_comb(&self, a: f64, other: &Field, b: f64) -> Result<Field> {
        self.grid.check_same(&other.grid)?;
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(x, y)| a * x + b * y)
            .collect();
        let spectrum = match (self.spectrum.get(), other.spectrum.get()) {
            (Some(s), Some(t)) => Some(s.iter().zip(t).map(|(x, y)| x * a + y * b).collect()),
            _ => None,
        };
        Ok(Field::from_parts(self.grid, samples, spectrum))
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.lin_comb(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.lin_comb(1.0, other, -1.0)
    }

    pub fn scale(&self, a: f64) -> Field {
        let samples = self.samples.iter().map(|x| a * x).collect();
        let spectrum = self
            .spectrum
            .get()
            .map(|s| s.iter().map(|c| c * a).collect());
        Field::from_parts(self.grid, samples, spectrum)
    }

    /// Pointwise map of the samples; the result has no cached spectrum.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field::from_parts(
            self.grid,
            self.samples.iter().map(|&v| f(v)).collect(),
            None,
        )
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Rectangle-rule `L^p` norm; `p = f64::INFINITY` gives the max-abs sample.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.max_abs();
        }
        let dx = self.grid.spacing();
        let sum: f64 = if p == 2.0 {
            self.samples.iter().map(|v| v * v).sum()
        } else if p == 4.0 {
            self.samples.iter().map(|v| (v * v) * (v * v)).sum()
        } else {
            self.samples.iter().map(|v| v.abs().powf(p)).sum()
        };
        (sum * dx).powf(1.0 / p)
    }

    /// Rectangle-rule integral.
    pub fn integral(&self) -> f64 {
        self.samples.iter().sum::<f64>() * self.grid.spacing()
    }

    /// Spectral energy `sum |c_k|^2` over the full (two-sided) spectrum,
    /// restricted to wavenumbers where `keep(|xi|)` holds.
    pub fn spectral_energy(&self, keep: impl Fn(f64) -> bool) -> f64 {
        let n = self.grid.points();
        self.spectrum()
            .iter()
            .enumerate()
            .filter(|(k, _)| keep(self.grid.wavenumber(*k)))
            .map(|(k, c)| {
                if k == 0 || k == n / 2 {
                    c.norm_sqr()
                } else {
                    2.0 * c.norm_sqr()
                }
            })
            .sum()
    }

    /// Largest wavenumber carrying more than `rel_tol` of the peak coefficient.
    pub fn bandwidth(&self, rel_tol: f64) -> f64 {
        let spec = self.spectrum();
        let peak = spec.iter().fold(0.0_f64, |m, c| m.max(c.norm()));
        if peak == 0.0 {
            return 0.0;
        }
        spec.iter()
            .rposition(|c| c.norm() > rel_tol * peak)
            .map_or(0.0, |k| self.grid.wavenumber(k))
    }
}

/// Samples of the band-limited interpolant of `spectrum` on the 3N/2 grid.
/// The Nyquist mode is dropped.
pub(crate) fn padded_samples(spectrum: &[Complex64], grid: &GridSpec) -> Vec<f64> {
    let n = grid.points();
    let m = grid.padded_points();
    let ratio = m as f64 / n as f64;
    let mut padded = vec![Complex64::new(0.0, 0.0); m / 2 + 1];
    for (dst, src) in padded.iter_mut().zip(&spectrum[..n / 2]) {
        *dst = src * ratio;
    }
    fft::irfft_owned(padded, m)
}

/// Inverse of [`padded_samples`] followed by truncation to `|k| < N/2`.
pub(crate) fn truncate_padded(samples: Vec<f64>, grid: &GridSpec) -> Vec<Complex64> {
    let n = grid.points();
    let m = grid.padded_points();
    debug_assert_eq!(samples.len(), m);
    let full = fft::rfft_owned(samples);
    let ratio = n as f64 / m as f64;
    let mut out = vec![Complex64::new(0.0, 0.0); n / 2 + 1];
    for (dst, src) in out[..n / 2].iter_mut().zip(&full) {
        *dst = src * ratio;
    }
    out
}
