//! `L^p` norms of `A(x) cos(wx) + B(x) sin(wx)` at finite carrier frequency and
//! in the high-frequency limit.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::lp::check_exponent;

/// Slowly varying envelope pair on a bounded support.
pub struct Envelope<'a> {
    pub cos_part: &'a dyn Fn(f64) -> f64,
    pub sin_part: Option<&'a dyn Fn(f64) -> f64>,
    pub support: (f64, f64),
}

impl<'a> Envelope<'a> {
    pub fn cosine(g: &'a dyn Fn(f64) -> f64, support: (f64, f64)) -> Self {
        Self {
            cos_part: g,
            sin_part: None,
            support,
        }
    }

    /// Pointwise amplitude `sqrt(A^2 + B^2)`.
    pub fn amplitude(&self, x: f64) -> f64 {
        let a = (self.cos_part)(x);
        match self.sin_part {
            Some(b) => a.hypot(b(x)),
            None => a.abs(),
        }
    }

    fn eval(&self, x: f64, omega: f64) -> f64 {
        let (s, c) = (omega * x).sin_cos();
        let mut v = (self.cos_part)(x) * c;
        if let Some(b) = self.sin_part {
            v += b(x) * s;
        }
        v
    }
}

/// Maximum number of integrand evaluations a finite-frequency evaluation may spend.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureBudget {
    pub max_samples: f64,
}

impl Default for QuadratureBudget {
    fn default() -> Self {
        Self { max_samples: 5e7 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatoryNorm {
    pub finite_omega_value: f64,
    pub limit_value: f64,
}

/// `(mean over a period of |cos|^p)^(1/p)`; 1 for `p = inf`.
pub fn cos_mean_factor(p: f64) -> f64 {
    if p.is_infinite() {
        return 1.0;
    }
    let log_mean = libm::lgamma(0.5 * (p + 1.0)) - libm::lgamma(0.5 * p + 1.0) - 0.5 * PI.ln();
    (log_mean / p).exp()
}

const GL8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
];

fn gauss_panels(f: &dyn Fn(f64) -> f64, edges: impl Iterator<Item = (f64, f64)>) -> f64 {
    // Neumaier summation: millions of panels otherwise swamp the refinement test.
    let (mut total, mut carry) = (0.0f64, 0.0f64);
    for (a, b) in edges {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut s = 0.0;
        for &(t, w) in &GL8 {
            s += w * f(mid + half * t);
        }
        let term = half * s;
        let next = total + term;
        carry += if total.abs() >= term.abs() {
            (total - next) + term
        } else {
            (term - next) + total
        };
        total = next;
    }
    total + carry
}

fn uniform_panels(a: f64, b: f64, width: f64) -> impl Iterator<Item = (f64, f64)> {
    let count = ((b - a) / width).ceil().max(1.0) as usize;
    let h = (b - a) / count as f64;
    (0..count).map(move |k| (a + k as f64 * h, a + (k + 1) as f64 * h))
}

/// `||sqrt(A^2 + B^2)||_p` on the support, the high-frequency limit up to [`cos_mean_factor`].
pub fn amplitude_norm(env: &Envelope, p: f64) -> Result<f64> {
    check_exponent(p)?;
    let (a, b) = env.support;
    if p.is_infinite() {
        return Ok(sup_search(&|x| env.amplitude(x), a, b, 1e-3));
    }
    let integrand = |x: f64| env.amplitude(x).powf(p);
    // Refine until two successive panel widths agree.
    let mut width = 0.25;
    let mut prev = gauss_panels(&integrand, uniform_panels(a, b, width));
    for _ in 0..6 {
        width *= 0.5;
        let next = gauss_panels(&integrand, uniform_panels(a, b, width));
        let done = (next - prev).abs() <= 1e-13 * next.abs();
        prev = next;
        if done {
            break;
        }
    }
    Ok(prev.powf(1.0 / p))
}

/// `||A cos(wx) + B sin(wx)||_p` by quadrature resolving the carrier, and its `w -> inf` limit.
pub fn oscillatory_lp_norm(
    env: &Envelope,
    omega: f64,
    p: f64,
    budget: QuadratureBudget,
) -> Result<OscillatoryNorm> {
    let limit_value = cos_mean_factor(p) * amplitude_norm(env, p)?;
    let finite_omega_value = finite_norm(env, omega, p, budget)?;
    Ok(OscillatoryNorm {
        finite_omega_value,
        limit_value,
    })
}

/// Finite-frequency value only.
pub fn finite_norm(env: &Envelope, omega: f64, p: f64, budget: QuadratureBudget) -> Result<f64> {
    check_exponent(p)?;
    let omega = omega.abs();
    let (a, b) = env.support;
    let half_period = if omega > 0.0 { PI / omega } else { b - a };
    if p.is_infinite() {
        let step = half_period / 32.0;
        let needed = (b - a) / step;
        if needed > budget.max_samples {
            return Err(Error::QuadratureBudget {
                needed,
                budget: budget.max_samples,
            });
        }
        return Ok(sup_search(&|x| env.eval(x, omega).abs(), a, b, step));
    }
    // Panels between consecutive zeros of cos(wx), split further on refinement.
    let first = if omega > 0.0 {
        ((a / half_period) - 0.5).floor()
    } else {
        0.0
    };
    let panels = ((b - a) / half_period).ceil() + 2.0;
    let integrand = |x: f64| {
        if x < a || x > b {
            0.0
        } else {
            env.eval(x, omega).abs().powf(p)
        }
    };
    let edges = |split: usize| {
        let sub = half_period / split as f64;
        let origin = if omega > 0.0 {
            (first + 0.5) * half_period
        } else {
            a
        };
        (0..panels as usize * split)
            .map(move |k| (origin + k as f64 * sub, origin + (k + 1) as f64 * sub))
    };
    let mut split = 1;
    let cost = |split: usize| panels * split as f64 * GL8.len() as f64;
    if cost(split) > budget.max_samples {
        return Err(Error::QuadratureBudget {
            needed: cost(split),
            budget: budget.max_samples,
        });
    }
    let mut prev = gauss_panels(&integrand, edges(split));
    loop {
        split *= 2;
        if cost(split) > budget.max_samples {
            if split > 2 {
                // Best effort once the budget stops further halving.
                break;
            }
            return Err(Error::QuadratureBudget {
                needed: cost(split),
                budget: budget.max_samples,
            });
        }
        let next = gauss_panels(&integrand, edges(split));
        let done = (next - prev).abs() <= 1e-12 * next.abs() || split >= 64;
        prev = next;
        if done {
            break;
        }
    }
    Ok(prev.powf(1.0 / p))
}

/// Global max of `f` on `[a, b]`: dense scan at `step`, golden-section polish around the best node.
fn sup_search(f: &dyn Fn(f64) -> f64, a: f64, b: f64, step: f64) -> f64 {
    let count = ((b - a) / step).ceil() as usize;
    let mut best = (a, f(a));
    for k in 1..=count {
        let x = (a + k as f64 * step).min(b);
        let v = f(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    let (mut lo, mut hi) = ((best.0 - step).max(a), (best.0 + step).min(b));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    best.1.max(f1).max(f2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_factor_matches_closed_forms() {
        assert!((cos_mean_factor(2.0).powi(2) - 0.5).abs() < 1e-14);
        assert!((cos_mean_factor(4.0).powi(4) - 3.0 / 8.0).abs() < 1e-14);
        assert!((cos_mean_factor(6.0).powi(6) - 5.0 / 16.0).abs() < 1e-14);
        assert_eq!(cos_mean_factor(f64::INFINITY), 1.0);
        // p = 3: mean |cos|^3 = 4 / (3 pi).
        assert!((cos_mean_factor(3.0).powi(3) - 4.0 / (3.0 * PI)).abs() < 1e-14);
    }

    #[test]
    fn constant_envelope_on_a_period() {
        let one = |_: f64| 1.0;
        let env = Envelope::cosine(&one, (0.0, 2.0 * PI));
        let r = oscillatory_lp_norm(&env, 5.0, 2.0, QuadratureBudget::default()).unwrap();
        assert!((r.limit_value - PI.sqrt()).abs() < 1e-12);
        assert!((r.finite_omega_value - PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn sup_limit_is_envelope_sup() {
        let g = |x: f64| (-x * x).exp();
        let env = Envelope::cosine(&g, (-6.0, 6.0));
        let r =
            oscillatory_lp_norm(&env, 40.0, f64::INFINITY, QuadratureBudget::default()).unwrap();
        assert!((r.limit_value - 1.0).abs() < 1e-12);
        assert!((r.finite_omega_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn converges_for_a_non_band_limited_envelope() {
        let g = |x: f64| 1.0 / (1.0 + x * x);
        let env = Envelope::cosine(&g, (-50.0, 50.0));
        let errs: Vec<f64> = [1.0, 4.0, 16.0]
            .iter()
            .map(|&w| {
                let r = oscillatory_lp_norm(&env, w, 3.0, QuadratureBudget::default()).unwrap();
                (r.finite_omega_value - r.limit_value).abs()
            })
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    }

    #[test]
    fn sine_part_rotates_the_carrier() {
        // cos(wx) e + sin(wx) e has amplitude sqrt(2) e.
        let g = |x: f64| (-0.5 * x * x).exp();
        let env = Envelope {
            cos_part: &g,
            sin_part: Some(&g),
            support: (-10.0, 10.0),
        };
        let r = oscillatory_lp_norm(&env, 30.0, 4.0, QuadratureBudget::default()).unwrap();
        let exact = (3.0 / 8.0 * 4.0 * (PI / 2.0).sqrt()).powf(0.25);
        assert!(
            (r.limit_value - exact).abs() < 1e-12,
            "{} {exact}",
            r.limit_value
        );
        assert!((r.finite_omega_value - exact).abs() < 1e-10);
    }

    #[test]
    fn budget_is_enforced() {
        let g = |_: f64| 1.0;
        let env = Envelope::cosine(&g, (-100.0, 100.0));
        let err = finite_norm(&env, 1e9, 4.0, QuadratureBudget { max_samples: 1e6 });
        assert!(matches!(err, Err(Error::QuadratureBudget { .. })));
    }
}
