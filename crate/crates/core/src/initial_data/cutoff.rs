//! The construction cutoff `chi_d` (1 on `|xi| <= 1/4`, 0 on `|xi| >= 1/2`) and
//! a tabulation of its inverse Fourier transform
//! `chi_check(x) = (1/2pi) int chi_d(xi) e^{i x xi} dxi`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::lp::TransitionProfile;

pub const DATA_PLATEAU: f64 = 0.25;
pub const DATA_SUPPORT: f64 = 0.5;

/// Half-width of the tabulation range; `chi_check` is taken as zero beyond it.
pub const TABLE_RANGE: f64 = 400.0;
/// Node spacing of the tabulation.
pub const TABLE_SPACING: f64 = 1e-3;
/// Trapezoid nodes on `[0, 1/2]` in frequency. The trapezoid error equals the
/// periodization of `chi_check` with period `2 pi / dxi`, about 6400 here.
const FREQUENCY_NODES: usize = 512;

/// Schwartz decay order checked on the tabulation range.
pub const DECAY_ORDER: i32 = 20;

/// Cutoff `chi_d` with its tabulated inverse transform and two derivatives.
#[derive(Debug, Clone)]
pub struct DataCutoff {
    profile: TransitionProfile,
    values: Vec<f64>,
    first: Vec<f64>,
    second: Vec<f64>,
}

impl DataCutoff {
    /// The process-wide table, built on first use.
    pub fn shared() -> &'static DataCutoff {
        static TABLE: OnceLock<DataCutoff> = OnceLock::new();
        TABLE.get_or_init(|| DataCutoff::tabulate(TransitionProfile::default()))
    }

    pub fn tabulate(profile: TransitionProfile) -> Self {
        let dxi = DATA_SUPPORT / FREQUENCY_NODES as f64;
        // Trapezoid weights (half at xi = 0; chi_d(1/2) = 0) times chi_d, xi chi_d, xi^2 chi_d.
        let nodes: Vec<(f64, f64)> = (0..FREQUENCY_NODES)
            .map(|m| {
                let xi = m as f64 * dxi;
                let w = if m == 0 { 0.5 } else { 1.0 };
                (
                    xi,
                    w * dxi * profile.radial(xi, DATA_PLATEAU, DATA_SUPPORT) / PI,
                )
            })
            .collect();
        let count = (TABLE_RANGE / TABLE_SPACING).round() as usize + 1;
        let mut values = Vec::with_capacity(count);
        let mut first = Vec::with_capacity(count);
        let mut second = Vec::with_capacity(count);
        for i in 0..count {
            let x = i as f64 * TABLE_SPACING;
            let step = Complex64::from_polar(1.0, x * dxi);
            let mut rot = Complex64::new(1.0, 0.0);
            let (mut v, mut d1, mut d2) = (0.0, 0.0, 0.0);
            for (m, &(xi, w)) in nodes.iter().enumerate() {
                if m % 64 == 0 {
                    rot = Complex64::from_polar(1.0, x * xi);
                }
                // cos(x xi), sin(x xi)
                v += w * rot.re;
                d1 -= w * xi * rot.im;
                d2 -= w * xi * xi * rot.re;
                rot *= step;
            }
            values.push(v);
            first.push(d1);
            second.push(d2);
        }
        Self {
            profile,
            values,
            first,
            second,
        }
    }

    /// `chi_d(xi)`.
    pub fn chi(&self, xi: f64) -> f64 {
        self.profile.radial(xi, DATA_PLATEAU, DATA_SUPPORT)
    }

    /// `chi_check(x)` by cubic Hermite interpolation; zero outside the table.
    pub fn check(&self, x: f64) -> f64 {
        hermite(&self.values, &self.first, x.abs())
    }

    /// `chi_check'(x)`.
    pub fn check_dx(&self, x: f64) -> f64 {
        hermite(&self.first, &self.second, x.abs()) * x.signum()
    }

    /// `chi_check''(x)`, linear interpolation of the table.
    pub fn check_dxx(&self, x: f64) -> f64 {
        let a = x.abs() / TABLE_SPACING;
        let i = a.floor() as usize;
        if i + 1 >= self.second.len() {
            return 0.0;
        }
        let t = a - i as f64;
        (1.0 - t) * self.second[i] + t * self.second[i + 1]
    }

    /// Tabulated nodes `x_i >= 0` with `chi_check(x_i)`.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &v)| (i as f64 * TABLE_SPACING, v))
    }

    /// Trapezoid integral of `chi_check` over the table, which should equal `chi_d(0) = 1`.
    pub fn integral(&self) -> f64 {
        let interior: f64 = self.values[1..self.values.len() - 1].iter().sum();
        let ends = 0.5 * (self.values[0] + self.values[self.values.len() - 1]);
        // Even function: twice the half-line integral.
        2.0 * TABLE_SPACING * (interior + ends)
    }

    /// Integral of `|chi_check|^q` over the table range.
    pub fn abs_power_integral(&self, q: f64) -> f64 {
        let h = TABLE_SPACING;
        let s: f64 = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let w = if i == 0 || i + 1 == self.values.len() {
                    0.5
                } else {
                    1.0
                };
                w * v.abs().powf(q)
            })
            .sum();
        2.0 * h * s
    }

    /// Smallest `C` with `|chi_check(x)| <= C (1 + |x|)^-m` on the table range.
    pub fn decay_constant(&self, m: i32) -> f64 {
        self.nodes()
            .map(|(x, v)| v.abs() * (1.0 + x).powi(m))
            .fold(0.0, f64::max)
    }

    /// Largest `|chi_check|` over `|x| >= x0`.
    pub fn tail_sup(&self, x0: f64) -> f64 {
        self.nodes()
            .filter(|(x, _)| *x >= x0)
            .map(|(_, v)| v.abs())
            .fold(0.0, f64::max)
    }
}

fn hermite(values: &[f64], slopes: &[f64], x: f64) -> f64 {
    let a = x / TABLE_SPACING;
    let i = a.floor() as usize;
    if i + 1 >= values.len() {
        return if i + 1 == values.len() && a == i as f64 {
            values[i]
        } else {
            0.0
        };
    }
    let t = a - i as f64;
    let h = TABLE_SPACING;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    h00 * values[i] + h10 * h * slopes[i] + h01 * values[i + 1] + h11 * h * slopes[i + 1]
}
