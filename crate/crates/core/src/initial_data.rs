//! The high-frequency initial datum
//!
//! `u0(x) = P_n sum_{l in N(n)} [cos(y a+) + cos(y a-)] chi_check(y)`,
//! `y = x + 2^{l+1} gamma`, `a+- = 2^n gamma +- 2^l gamma`, `P_n = 2^-n n^-1/2 ln n`,
//!
//! sampled on grids for small `n` and evaluated through closed forms and
//! oscillatory limits when the carrier `2^n gamma` is beyond any grid.

pub mod cutoff;
pub mod oscillatory;

use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_complex::Complex64;

pub use cutoff::DataCutoff;
pub use oscillatory::{Envelope, OscillatoryNorm, QuadratureBudget};

use crate::error::{Error, Result};
use crate::grid::{Dealias, Field, GridSpec};
use crate::lp::{self, BesovIndex, BlockMode};

/// The frequency ratio `gamma = 17/24`.
pub const GAMMA: f64 = 17.0 / 24.0;

/// Minimum distance, in units of the `chi_check` decay length (taken as 1),
/// between a bump center and the domain boundary.
pub const COVERAGE_MARGIN: f64 = 50.0;

/// Largest `n` for which grid synthesis is attempted.
pub const GRID_SCALE_LIMIT: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstructionParams {
    n: u32,
    p: f64,
}

impl ConstructionParams {
    pub fn new(n: u32, p: f64) -> Result<Self> {
        if n == 0 || !n.is_multiple_of(16) {
            return Err(Error::InvalidScale(n));
        }
        if !(p > 2.0) {
            return Err(Error::InvalidExponent(p));
        }
        Ok(Self { n, p })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn gamma(&self) -> f64 {
        GAMMA
    }

    /// `2^-n n^-1/2 ln n`.
    pub fn prefactor(&self) -> f64 {
        prefactor(self.n)
    }

    /// Main carrier `2^n gamma`.
    pub fn carrier(&self) -> f64 {
        2f64.powi(self.n as i32) * GAMMA
    }

    pub fn freq_set(&self) -> FreqSet {
        freq_set(self.n).expect("n validated at construction")
    }
}

pub fn prefactor(n: u32) -> f64 {
    let nf = n as f64;
    2f64.powi(-(n as i32)) * nf.ln() / nf.sqrt()
}

/// `N(n) = {k in 8N : n/4 <= k <= n/2}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreqSet {
    members: BTreeSet<u32>,
}

impl FreqSet {
    pub fn members(&self) -> impl Iterator<Item = u32> + '_ {
        self.members.iter().copied()
    }

    pub fn contains(&self, l: u32) -> bool {
        self.members.contains(&l)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Block indices as used by the Littlewood-Paley layer.
    pub fn blocks(&self) -> BTreeSet<i32> {
        self.members.iter().map(|&l| l as i32).collect()
    }
}

pub fn freq_set(n: u32) -> Result<FreqSet> {
    if n == 0 || !n.is_multiple_of(16) {
        return Err(Error::InvalidScale(n));
    }
    let members = (n / 4..=n / 2).filter(|k| k % 8 == 0 && *k > 0).collect();
    Ok(FreqSet { members })
}

/// Shift `2^{l+1} gamma`; bump `l` of `u0` sits at `x = -bump_shift(l)`.
pub fn bump_shift(l: u32) -> f64 {
    2f64.powi(l as i32 + 1) * GAMMA
}

/// The two carriers `2^n gamma +- 2^l gamma` of bump `l`.
pub fn carriers(n: u32, l: u32) -> (f64, f64) {
    let big = 2f64.powi(n as i32) * GAMMA;
    let small = 2f64.powi(l as i32) * GAMMA;
    (big + small, big - small)
}

/// Highest frequency in `supp u0^`.
pub fn max_frequency(params: &ConstructionParams) -> f64 {
    let top = params.freq_set().members().max().unwrap_or(0);
    carriers(params.n, top).0 + cutoff::DATA_SUPPORT
}

/// Annuli `2^n gamma - 2^l gamma - 1/2 <= |xi| <= 2^n gamma + 2^l gamma + 1/2`, one per `l`.
pub fn spectral_bands(params: &ConstructionParams) -> Vec<(f64, f64)> {
    params
        .freq_set()
        .members()
        .map(|l| {
            let (hi, lo) = carriers(params.n, l);
            (lo - cutoff::DATA_SUPPORT, hi + cutoff::DATA_SUPPORT)
        })
        .collect()
}

/// Translation that moves the lowest bump to the origin.
pub fn centering_shift(params: &ConstructionParams) -> f64 {
    params
        .freq_set()
        .members()
        .min()
        .map(bump_shift)
        .unwrap_or(0.0)
}

/// Pointwise `u0(x)` on the real line (no periodization).
pub fn u0_pointwise(params: &ConstructionParams, x: f64) -> f64 {
    let table = DataCutoff::shared();
    let p = params.prefactor();
    params
        .freq_set()
        .members()
        .map(|l| {
            let y = x + bump_shift(l);
            let (ap, am) = carriers(params.n, l);
            p * ((y * ap).cos() + (y * am).cos()) * table.check(y)
        })
        .sum()
}

/// Sample `x -> u0(x - shift)` on `grid`, periodized over the domain length.
pub fn build_u0(params: &ConstructionParams, grid: GridSpec, shift: f64) -> Result<Field> {
    check_resolution(max_frequency(params), &grid)?;
    let half = 0.5 * grid.length();
    let centers: Vec<(u32, f64)> = params
        .freq_set()
        .members()
        .map(|l| (l, shift - bump_shift(l)))
        .collect();
    for &(_, center) in &centers {
        if center.abs() > half - COVERAGE_MARGIN {
            return Err(Error::Coverage {
                center,
                margin: COVERAGE_MARGIN,
                half_length: half,
            });
        }
    }
    let table = DataCutoff::shared();
    let p = params.prefactor();
    let range = cutoff::TABLE_RANGE;
    let length = grid.length();
    let mut samples = vec![0.0; grid.points()];
    for &(l, center) in &centers {
        let (ap, am) = carriers(params.n, l);
        for (i, s) in samples.iter_mut().enumerate() {
            let y0 = grid.node(i) - center;
            let lo = ((-range - y0) / length).ceil() as i64;
            let hi = ((range - y0) / length).floor() as i64;
            for m in lo..=hi {
                let y = y0 + m as f64 * length;
                *s += p * ((y * ap).cos() + (y * am).cos()) * table.check(y);
            }
        }
    }
    Field::new(grid, samples)
}

pub(crate) fn check_resolution(needed: f64, grid: &GridSpec) -> Result<()> {
    if grid.nyquist() <= needed {
        return Err(Error::Resolution {
            needed,
            nyquist: grid.nyquist(),
        });
    }
    Ok(())
}

/// Smallest power-of-two grid on `[-100, 100)` whose Nyquist exceeds the top frequency of `u0`.
pub fn synthesis_grid(params: &ConstructionParams) -> Result<GridSpec> {
    let length = 200.0;
    let needed = max_frequency(params);
    let points = ((needed * length / PI).floor() as usize + 1).next_power_of_two();
    GridSpec::new(length, points)
}

/// Closed-form `u0^(xi)` with `f^(xi) = int e^{-i x xi} f(x) dx`.
pub fn u0_hat(xi: f64, params: &ConstructionParams) -> Complex64 {
    let table = DataCutoff::shared();
    let half = 0.5 * params.prefactor();
    params
        .freq_set()
        .members()
        .map(|l| {
            let (ap, am) = carriers(params.n, l);
            let phase = Complex64::from_polar(1.0, bump_shift(l) * xi);
            let weight =
                table.chi(xi - ap) + table.chi(xi - am) + table.chi(xi + am) + table.chi(xi + ap);
            phase * (half * weight)
        })
        .sum()
}

/// Sign pair selecting one of the four complex bumps `Phi^{..}_l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Real and imaginary parts of `d/dx Phi^{outer,inner}_l (x - shift)`, where
/// `Phi = exp(i y (outer 2^n gamma + inner 2^l gamma)) chi_check(y)`, periodized.
pub fn phi_derivative(
    params: &ConstructionParams,
    l: u32,
    outer: Sign,
    inner: Sign,
    grid: GridSpec,
    shift: f64,
) -> Result<(Field, Field)> {
    let freq = outer.value() * params.carrier() + inner.value() * 2f64.powi(l as i32) * GAMMA;
    check_resolution(freq.abs() + cutoff::DATA_SUPPORT, &grid)?;
    let table = DataCutoff::shared();
    let center = shift - bump_shift(l);
    let length = grid.length();
    let range = cutoff::TABLE_RANGE;
    let mut re = vec![0.0; grid.points()];
    let mut im = vec![0.0; grid.points()];
    for i in 0..grid.points() {
        let y0 = grid.node(i) - center;
        let lo = ((-range - y0) / length).ceil() as i64;
        let hi = ((range - y0) / length).floor() as i64;
        for m in lo..=hi {
            let y = y0 + m as f64 * length;
            // (i freq chi + chi') e^{i freq y}
            let amp = Complex64::new(table.check_dx(y), freq * table.check(y));
            let z = amp * Complex64::from_polar(1.0, freq * y);
            re[i] += z.re;
            im[i] += z.im;
        }
    }
    Ok((Field::new(grid, re)?, Field::new(grid, im)?))
}

/// Cos/sin envelopes of `I_1` for block `j`, in the variable `y = x + 2^{j+1} gamma`.
///
/// `I_1 = A(y) cos(w y) + B(y) sin(w y)` with `w = 2^{j+1} gamma`,
/// `A = K [(1 - 2^{2j-2n}) gamma^2 chi^2 + 2^{-2n} chi'^2]`,
/// `B = -K 2^{j+1-2n} gamma chi chi'` and `K = n^-1 ln^2 n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct I1Envelope {
    pub scale: f64,
    pub main: f64,
    pub slope: f64,
    pub cross: f64,
    pub omega: f64,
}

impl I1Envelope {
    pub fn new(params: &ConstructionParams, j: u32) -> Self {
        let n = params.n as f64;
        let jf = j as f64;
        Self {
            scale: n.ln().powi(2) / n,
            main: (1.0 - 2f64.powf(2.0 * jf - 2.0 * n)) * GAMMA * GAMMA,
            slope: 2f64.powf(-2.0 * n),
            cross: -(2f64.powf(jf + 1.0 - 2.0 * n)) * GAMMA,
            omega: 2f64.powf(jf + 1.0) * GAMMA,
        }
    }

    pub fn cos_part(&self, y: f64) -> f64 {
        let t = DataCutoff::shared();
        let (c, d) = (t.check(y), t.check_dx(y));
        self.scale * (self.main * c * c + self.slope * d * d)
    }

    pub fn sin_part(&self, y: f64) -> f64 {
        let t = DataCutoff::shared();
        self.scale * self.cross * t.check(y) * t.check_dx(y)
    }
}

/// `I_1(j, x) = n^-1 ln^2 n (I_11 + I_12 + I_13)`.
pub fn i1_closed_form(params: &ConstructionParams, j: u32, x: f64) -> f64 {
    let env = I1Envelope::new(params, j);
    let y = x + bump_shift(j);
    let (s, c) = (env.omega * y).sin_cos();
    env.cos_part(y) * c + env.sin_part(y) * s
}

/// `L^p` norm of `I_1(j, .)`, at the actual carrier and in the limit.
pub fn i1_norm(
    params: &ConstructionParams,
    j: u32,
    budget: QuadratureBudget,
) -> Result<OscillatoryNorm> {
    let env = I1Envelope::new(params, j);
    let a = |y: f64| env.cos_part(y);
    let b = |y: f64| env.sin_part(y);
    let range = cutoff::TABLE_RANGE;
    let envelope = Envelope {
        cos_part: &a,
        sin_part: Some(&b),
        support: (-range, range),
    };
    match oscillatory::oscillatory_lp_norm(&envelope, env.omega, params.p, budget) {
        Ok(v) => Ok(v),
        Err(Error::QuadratureBudget { .. }) => {
            let limit = oscillatory::cos_mean_factor(params.p)
                * oscillatory::amplitude_norm(&envelope, params.p)?;
            Ok(OscillatoryNorm {
                finite_omega_value: f64::NAN,
                limit_value: limit,
            })
        }
        Err(e) => Err(e),
    }
}

/// How a set of Lemma-type norms was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Evaluation {
    Grid,
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma31Norms {
    pub linf_u0: f64,
    pub linf_dxu0: f64,
    /// `2^{n-1} ||u0||_1^{1/p} ||u0||_inf^{1-1/p}`.
    pub besov_b1p1: f64,
    pub l1_u0: f64,
    /// `besov_norm(u0, (1, p, 1))` on the grid, when a grid was used.
    pub besov_direct: Option<f64>,
    pub evaluation: Evaluation,
}

fn interpolated_besov(n: u32, p: f64, l1: f64, linf: f64) -> f64 {
    let inv = if p.is_infinite() { 0.0 } else { 1.0 / p };
    2f64.powi(n as i32 - 1) * l1.powf(inv) * linf.powf(1.0 - inv)
}

/// Grid path for `n <= 16`, closed forms otherwise.
pub fn lemma31_norms(params: &ConstructionParams) -> Result<Lemma31Norms> {
    if params.n <= GRID_SCALE_LIMIT {
        let grid = synthesis_grid(params)?;
        lemma31_grid(params, grid)
    } else {
        lemma31_closed_form(params)
    }
}

pub fn lemma31_grid(params: &ConstructionParams, grid: GridSpec) -> Result<Lemma31Norms> {
    let u0 = build_u0(params, grid, centering_shift(params))?;
    let linf_u0 = u0.max_abs();
    let linf_dxu0 = u0.dx().max_abs();
    let l1_u0 = u0.lp_norm(1.0);
    let besov_direct = lp::besov_norm(&u0, BesovIndex::new(1.0, params.p, 1.0)?)?;
    Ok(Lemma31Norms {
        linf_u0,
        linf_dxu0,
        besov_b1p1: interpolated_besov(params.n, params.p, l1_u0, linf_u0),
        l1_u0,
        besov_direct: Some(besov_direct),
        evaluation: Evaluation::Grid,
    })
}

/// High-carrier limits. Bumps are disjoint, so sup norms are per-bump maxima.
///
/// `|d/dx (cos(W y) cos(a y) chi)|` has limiting sup `sqrt(lambda_max(M))`, where
/// `M = [[W^2 chi^2 + chi'^2, -a chi chi'], [-a chi chi', a^2 chi^2]]`.
pub fn lemma31_closed_form(params: &ConstructionParams) -> Result<Lemma31Norms> {
    let table = DataCutoff::shared();
    let amp = 2.0 * params.prefactor();
    let big = params.carrier();
    let linf_u0 = amp * table.check(0.0);
    let mut linf_dxu0: f64 = 0.0;
    for l in params.freq_set().members() {
        let a = 2f64.powi(l as i32) * GAMMA;
        let sup = table
            .nodes()
            .map(|(y, c)| {
                let d = table.check_dx(y);
                let m11 = big * big * c * c + d * d;
                let m22 = a * a * c * c;
                let m12 = -a * c * d;
                let tr = 0.5 * (m11 + m22);
                let disc = (0.25 * (m11 - m22).powi(2) + m12 * m12).sqrt();
                (tr + disc).sqrt()
            })
            .fold(0.0, f64::max);
        linf_dxu0 = linf_dxu0.max(amp * sup);
    }
    let per_bump = amp * (2.0 / PI).powi(2) * table.abs_power_integral(1.0);
    let l1_u0 = per_bump * params.freq_set().len() as f64;
    Ok(Lemma31Norms {
        linf_u0,
        linf_dxu0,
        besov_b1p1: interpolated_besov(params.n, params.p, l1_u0, linf_u0),
        l1_u0,
        besov_direct: None,
        evaluation: Evaluation::ClosedForm,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lemma32Report {
    /// `(j, ||Delta_j[(u0')^2]||_p)` for `j in N(n)`, or the `I_1` value on the closed-form path.
    pub per_block: Vec<(u32, f64)>,
    /// Bound on `||I_2 + ... + I_5||_p` summed over blocks (closed-form path).
    pub remainder: f64,
    /// Restricted block sum minus the remainder.
    pub value: f64,
    pub evaluation: Evaluation,
}

/// `||(u0')^2||_{B^0_{p,1}(N(n))}` from below.
pub fn lemma32_lower(params: &ConstructionParams) -> Result<Lemma32Report> {
    if params.n <= GRID_SCALE_LIMIT {
        lemma32_grid(params, synthesis_grid(params)?)
    } else {
        lemma32_closed_form(params, QuadratureBudget::default())
    }
}

pub fn lemma32_grid(params: &ConstructionParams, grid: GridSpec) -> Result<Lemma32Report> {
    let u0 = build_u0(params, grid, centering_shift(params))?;
    let slope_sq = u0.dx().square(Dealias::On);
    let mut per_block = Vec::new();
    for j in params.freq_set().members() {
        let block = lp::dyadic_block_with(&slope_sq, j as i32, BlockMode::Strict)?;
        per_block.push((j, block.lp_norm(params.p)));
    }
    let value = per_block.iter().map(|(_, v)| v).sum();
    Ok(Lemma32Report {
        per_block,
        remainder: 0.0,
        value,
        evaluation: Evaluation::Grid,
    })
}

pub fn lemma32_closed_form(
    params: &ConstructionParams,
    budget: QuadratureBudget,
) -> Result<Lemma32Report> {
    let mut per_block = Vec::new();
    let mut remainder = 0.0;
    for j in params.freq_set().members() {
        let norm = i1_norm(params, j, budget)?;
        let v = if norm.finite_omega_value.is_finite() {
            norm.finite_omega_value
        } else {
            norm.limit_value
        };
        per_block.push((j, v));
        remainder += cross_bump_bound(params, j)?;
    }
    let total: f64 = per_block.iter().map(|(_, v)| v).sum();
    Ok(Lemma32Report {
        per_block,
        remainder,
        value: total - remainder,
        evaluation: Evaluation::ClosedForm,
    })
}

/// Bound on `||I_2 + ... + I_5||_p` for block `j`: eight products of
/// derivative bumps per pair `(j, l)`, each dominated by `2^{-2n-1} K e_j e_l`
/// with `e_l(x) = a+_l |chi_check(x + c_l)| + |chi_check'(x + c_l)|`.
/// The tabulated envelopes vanish beyond the table range, so well separated
/// bumps contribute exactly zero.
pub fn cross_bump_bound(params: &ConstructionParams, j: u32) -> Result<f64> {
    let table = DataCutoff::shared();
    let n = params.n as f64;
    let k = n.ln().powi(2) / n;
    let coeff = 8.0 * 2f64.powf(-2.0 * n - 1.0) * k;
    let range = cutoff::TABLE_RANGE;
    let envelope = |l: u32, x: f64| {
        let y = x + bump_shift(l);
        carriers(params.n, l).0 * table.check(y).abs() + table.check_dx(y).abs()
    };
    let mut total = 0.0;
    for l in params.freq_set().members().filter(|&l| l != j) {
        let lo = (-bump_shift(j)).max(-bump_shift(l)) - range;
        let hi = (-bump_shift(j)).min(-bump_shift(l)) + range;
        if lo >= hi {
            continue;
        }
        let f = |x: f64| envelope(j, x) * envelope(l, x);
        let h = cutoff::TABLE_SPACING;
        let count = ((hi - lo) / h).ceil() as usize;
        let value = if params.p.is_infinite() {
            (0..=count)
                .map(|i| f(lo + i as f64 * h))
                .fold(0.0, f64::max)
        } else {
            let s: f64 = (0..=count)
                .map(|i| f(lo + i as f64 * h).powf(params.p))
                .sum();
            (s * h).powf(1.0 / params.p)
        };
        total += coeff * value;
    }
    Ok(total)
}
