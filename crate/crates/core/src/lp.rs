//! Littlewood-Paley decomposition of sampled periodic functions.
//!
//! The low-pass profile `chi` equals one on `|xi| <= 3/4` and vanishes for
//! `|xi| >= 4/3`; the annular profile is `phi(xi) = chi(xi/2) - chi(xi)`. Blocks
//! are Fourier multipliers on a [`Field`]'s spectrum:
//! `Delta_{-1} = chi(D)`, `Delta_j = phi(2^-j D)` for `j >= 0`, zero below.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::grid::{Dealias, Field};

/// Plateau edge of the low-pass profile.
pub const CHI_PLATEAU: f64 = 0.75;
/// Support edge of the low-pass profile.
pub const CHI_SUPPORT: f64 = 4.0 / 3.0;

/// The `C^infinity` step `h(t) = e^{-a/t} / (e^{-a/t} + e^{-a/(1-t)})`, clamped
/// to 0 for `t <= 0` and 1 for `t >= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionProfile {
    pub sharpness: f64,
}

impl Default for TransitionProfile {
    fn default() -> Self {
        Self { sharpness: 1.0 }
    }
}

impl TransitionProfile {
    pub fn step(&self, t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else if t >= 1.0 {
            1.0
        } else {
            let a = self.sharpness;
            1.0 / (1.0 + (a / t - a / (1.0 - t)).exp())
        }
    }

    /// Radial profile equal to 1 on `|xi| <= plateau`, 0 on `|xi| >= support`.
    pub fn radial(&self, xi: f64, plateau: f64, support: f64) -> f64 {
        self.step((support - xi.abs()) / (support - plateau))
    }
}

/// Low-pass `chi` and annular `phi` of the dyadic partition of unity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffPair {
    profile: TransitionProfile,
}

impl Default for CutoffPair {
    fn default() -> Self {
        make_cutoff(TransitionProfile::default())
    }
}

pub fn make_cutoff(profile: TransitionProfile) -> CutoffPair {
    CutoffPair { profile }
}

impl CutoffPair {
    pub fn chi(&self, xi: f64) -> f64 {
        self.profile.radial(xi, CHI_PLATEAU, CHI_SUPPORT)
    }

    pub fn phi(&self, xi: f64) -> f64 {
        self.chi(0.5 * xi) - self.chi(xi)
    }

    /// Symbol of `Delta_j` at `xi`.
    pub fn block_symbol(&self, j: i32, xi: f64) -> f64 {
        match j {
            j if j <= -2 => 0.0,
            -1 => self.chi(xi),
            j => self.phi(xi * 2f64.powi(-j)),
        }
    }

    /// `chi(xi) + sum_{j=0}^{top} phi(2^-j xi)`.
    pub fn partition_sum(&self, xi: f64, top: i32) -> f64 {
        (-1..=top).map(|j| self.block_symbol(j, xi)).sum()
    }
}

/// Lower and upper edge of the frequency support of `Delta_j` (`j >= -1`).
pub fn block_support(j: i32) -> (f64, f64) {
    if j < 0 {
        (0.0, CHI_SUPPORT)
    } else {
        let s = 2f64.powi(j);
        (CHI_PLATEAU * s, 2.0 * CHI_SUPPORT * s)
    }
}

/// How blocks that the grid cannot fully represent are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BlockMode {
    /// Error unless the whole block support lies below the Nyquist wavenumber.
    #[default]
    Strict,
    /// Apply the symbol to the modes the grid carries; blocks starting above
    /// Nyquist are identically zero. Exact for fields with no content near Nyquist.
    Lenient,
}

/// Largest `j` whose block support fits entirely below the grid Nyquist.
pub fn max_resolved_block(f: &Field) -> i32 {
    (f.grid().nyquist() * 3.0 / 8.0).log2().floor() as i32
}

/// Largest `j` whose block support starts below the grid Nyquist.
pub fn max_touched_block(f: &Field) -> i32 {
    let top = (f.grid().nyquist() / CHI_PLATEAU).log2();
    // Support starts strictly below Nyquist.
    if top.fract() == 0.0 {
        top as i32 - 1
    } else {
        top.floor() as i32
    }
}

/// `Delta_j f`, erroring if the block is not fully resolved.
pub fn dyadic_block(f: &Field, j: i32) -> Result<Field> {
    dyadic_block_with(f, j, BlockMode::Strict)
}

pub fn dyadic_block_with(f: &Field, j: i32, mode: BlockMode) -> Result<Field> {
    if j <= -2 {
        return Ok(Field::zeros(*f.grid()));
    }
    let nyquist = f.grid().nyquist();
    let (lo, hi) = block_support(j);
    if mode == BlockMode::Strict && hi > nyquist {
        return Err(Error::UnresolvedBlock {
            j,
            needed: hi,
            nyquist,
        });
    }
    if lo >= nyquist {
        return Ok(Field::zeros(*f.grid()));
    }
    let cutoff = CutoffPair::default();
    Ok(f.apply_multiplier(|xi| cutoff.block_symbol(j, xi)))
}

/// Exponent triple `(s, p, r)` of `B^s_{p,r}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesovIndex {
    pub s: f64,
    pub p: f64,
    pub r: f64,
}

impl BesovIndex {
    /// `p` must lie in `(2, inf]` and `r` in `[1, inf]`.
    pub fn new(s: f64, p: f64, r: f64) -> Result<Self> {
        if !s.is_finite() {
            return Err(Error::InvalidBesovIndex(format!(
                "regularity {s} must be finite"
            )));
        }
        if !(p > 2.0) {
            return Err(Error::InvalidBesovIndex(format!("p = {p} must exceed 2")));
        }
        if !(r >= 1.0) {
            return Err(Error::InvalidBesovIndex(format!(
                "r = {r} must be at least 1"
            )));
        }
        Ok(Self { s, p, r })
    }
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidExponent(p))
    }
}

/// Rectangle-rule `L^p` norm (`p = inf` is the max-abs sample).
pub fn lebesgue_norm(f: &Field, p: f64) -> Result<f64> {
    check_exponent(p)?;
    Ok(f.lp_norm(p))
}

/// `|f|_{L^inf} + |f'|_{L^inf}` with a spectral derivative.
pub fn lipschitz_norm(f: &Field) -> f64 {
    f.max_abs() + f.dx().max_abs()
}

/// Truncated `B^s_{p,r}` norm over every block the grid carries.
pub fn besov_norm(f: &Field, idx: BesovIndex) -> Result<f64> {
    let weighted = block_norms(f, idx.p)?
        .into_iter()
        .map(|(j, norm)| 2f64.powf(idx.s * j as f64) * norm);
    Ok(if idx.r.is_infinite() {
        weighted.fold(0.0, f64::max)
    } else if idx.r == 1.0 {
        weighted.sum()
    } else {
        weighted
            .map(|w| w.powf(idx.r))
            .sum::<f64>()
            .powf(1.0 / idx.r)
    })
}

/// `(j, |Delta_j f|_{L^p})` for `j = -1 ..= max_touched_block(f)`.
pub fn block_norms(f: &Field, p: f64) -> Result<Vec<(i32, f64)>> {
    check_exponent(p)?;
    (-1..=max_touched_block(f))
        .map(|j| Ok((j, dyadic_block_with(f, j, BlockMode::Lenient)?.lp_norm(p))))
        .collect()
}

/// `sum_{j in S} 2^{sj} |Delta_j f|_{L^p}`.
pub fn besov_norm_restricted(f: &Field, s: f64, p: f64, blocks: &BTreeSet<i32>) -> Result<f64> {
    check_exponent(p)?;
    blocks
        .iter()
        .map(|&j| Ok(2f64.powf(s * j as f64) * dyadic_block(f, j)?.lp_norm(p)))
        .sum()
}

/// `R_j = u Delta_j v' - Delta_j (u v')`.
pub fn commutator(u: &Field, v: &Field, j: i32, dealias: Dealias) -> Result<Field> {
    u.grid().check_same(v.grid())?;
    let dv = v.dx();
    let block_dv = dyadic_block(&dv, j)?;
    let first = u.product(&block_dv, dealias)?;
    let second = dyadic_block(&u.product(&dv, dealias)?, j)?;
    first.sub(&second)
}

/// Frequency localization asserted for a Bernstein measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralSupport {
    /// `supp f^ in lambda * {|xi| <= 4/3}`.
    Ball { lambda: f64 },
    /// `supp f^ in lambda * {3/4 <= |xi| <= 8/3}`.
    Annulus { lambda: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BernsteinReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`, defined as 0 when both vanish.
    pub ratio: f64,
}

/// Both sides of the Bernstein inequality for `|d^k f|_{L^q}`.
///
/// Ball: `rhs = lambda^{k + 1/p - 1/q} |f|_{L^p}`. Annulus (requires `p == q`):
/// `rhs = lambda^k |f|_{L^p}`; the ratio is then bounded above and below.
pub fn bernstein_report(
    f: &Field,
    support: SpectralSupport,
    k: u32,
    p: f64,
    q: f64,
) -> Result<BernsteinReport> {
    check_exponent(p)?;
    check_exponent(q)?;
    if q < p {
        return Err(Error::InvalidExponent(q));
    }
    let lhs = f.derivative(k).lp_norm(q);
    let norm = f.lp_norm(p);
    let rhs = match support {
        SpectralSupport::Ball { lambda } => {
            let inv = |e: f64| if e.is_infinite() { 0.0 } else { 1.0 / e };
            lambda.powf(k as f64 + inv(p) - inv(q)) * norm
        }
        SpectralSupport::Annulus { lambda } => {
            if p != q {
                return Err(Error::InvalidExponent(q));
            }
            lambda.powi(k as i32) * norm
        }
    };
    let ratio = if lhs == 0.0 && rhs == 0.0 {
        0.0
    } else {
        lhs / rhs
    };
    Ok(BernsteinReport { lhs, rhs, ratio })
}
