//! The entropy bound on `S(A|E)`, its constraint set, and the resulting
//! Devetak-Winter key rate.
//!
//! The bound depends on the attack only through `Re<E0|E3>` and `Re<E1|E2>`.
//! It grows with the magnitude of each, so the minimum sits on the boundary
//! `re03 + re12 = L` (or at `re03 = 0`), which reduces the search to one
//! parameter `t = re12`.

use crate::math::{abs, entropy_term, sqrt};
use crate::statistics::ObservedStatistics;
use crate::tolerance;
use crate::{Error, Result};

/// Default number of grid points in the `t` scan.
pub const DEFAULT_GRID: usize = 2001;

// Slack allowed when comparing against the Cauchy-Schwarz caps.
const CAP_SLACK: f64 = 1e-12;

/// `H2(x) = -x log2 x - (1-x) log2 (1-x)`, with `H2(0) = H2(1) = 0`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidParameter {
            name: "binary entropy argument",
            value: x,
        });
    }
    Ok(entropy_term(x) + entropy_term(1.0 - x))
}

/// Right-hand sides of the three constraints on the free inner products.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConstraintSet {
    /// `L` in `Re<E0|E3> + Re<E1|E2> >= L`.
    pub sum_lower_bound: f64,
    /// `sqrt(<E0><E3>)`, the cap on `|Re<E0|E3>|`.
    pub cs_bound_03: f64,
    /// `sqrt(<E1><E2>)`, the cap on `|Re<E1|E2>|`.
    pub cs_bound_12: f64,
}

impl ConstraintSet {
    /// Whether some pair within the caps meets the sum constraint.
    pub fn is_feasible(&self) -> bool {
        self.sum_lower_bound <= self.cs_bound_03 + self.cs_bound_12 + CAP_SLACK
    }
}

fn sqrt0(x: f64) -> f64 {
    sqrt(x.max(0.0))
}

/// Evaluates `L` and the two Cauchy-Schwarz caps.
pub fn build_constraints(stats: &ObservedStatistics) -> ConstraintSet {
    let s = stats;
    let [e0, e1, e2, e3] = s.raw_key().map(sqrt0);
    let d = sqrt0(s.p_double);
    let c0 = sqrt0(s.p_create_0) + d;
    let c1 = sqrt0(s.p_create_1) + d;
    let r = core::f64::consts::FRAC_1_SQRT_2;
    let sum_lower_bound =
        0.5 * s.p_plus_plus - s.p0_plus - s.p1_plus - 0.25 * (s.p_ctrl_0 + s.p_ctrl_1)
            + 0.5 * s.m_total
            - r * c1 * (e0 + e2)
            - r * c0 * (e1 + e3)
            - 0.5 * c0 * c1;
    ConstraintSet {
        sum_lower_bound,
        cs_bound_03: e0 * e3,
        cs_bound_12: e1 * e2,
    }
}

// lambda = 1/2 + sqrt((a - b)^2 + 4 re^2) / (2 (a + b)), kept in [1/2, 1].
fn lambda(a: f64, b: f64, re: f64) -> f64 {
    let w = a + b;
    if w <= 0.0 {
        return 0.5;
    }
    (0.5 + sqrt((a - b) * (a - b) + 4.0 * re * re) / (2.0 * w)).clamp(0.5, 1.0)
}

// weight * (H2(a / (a + b)) - H2(lambda)), zero when the weight vanishes.
fn bracket(a: f64, b: f64, re: f64, m: f64) -> f64 {
    let (a, b) = (a.max(0.0), b.max(0.0));
    let w = a + b;
    if w <= 0.0 {
        return 0.0;
    }
    let ratio = (a / w).clamp(0.0, 1.0);
    let h = entropy_term(ratio) + entropy_term(1.0 - ratio);
    let l = lambda(a, b, re);
    (w / m) * (h - (entropy_term(l) + entropy_term(1.0 - l)))
}

/// `(lambda1, lambda2)` at the given inner products.
pub fn lambdas(stats: &ObservedStatistics, re03: f64, re12: f64) -> (f64, f64) {
    (
        lambda(stats.e00, stats.e11, re03),
        lambda(stats.e01, stats.e10, re12),
    )
}

/// The two-term bound without the final floor at zero.
pub fn sae_bound_raw(stats: &ObservedStatistics, re03: f64, re12: f64) -> Result<f64> {
    let m = stats.m_total;
    if m.is_nan() || m <= 0.0 {
        return Err(Error::NoRawKey);
    }
    Ok(bracket(stats.e00, stats.e11, re03, m) + bracket(stats.e01, stats.e10, re12, m))
}

/// Lower bound on `S(A|E)`, floored at zero.
pub fn sae_bound(stats: &ObservedStatistics, re03: f64, re12: f64) -> Result<f64> {
    Ok(sae_bound_raw(stats, re03, re12)?.max(0.0))
}

/// Outcome of the minimization and, from [`key_rate`], the rate itself.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KeyRateResult {
    /// Minimized `S(A|E)` bound, floored at zero.
    pub sae_lower: f64,
    /// `H(A|B)`.
    pub h_a_given_b: f64,
    /// `sae_lower - h_a_given_b`; may be negative.
    pub rate: f64,
    /// `Re<E0|E3>` at the minimum.
    pub argmin_re03: f64,
    /// `Re<E1|E2>` at the minimum.
    pub argmin_re12: f64,
    /// Whether the constraint set is non-empty.
    pub feasible: bool,
    /// `lambda1` at the minimum.
    pub lambda1: f64,
    /// `lambda2` at the minimum.
    pub lambda2: f64,
}

// re03 paired with t, or None when it would exceed its cap.
fn partner(c: &ConstraintSet, t: f64) -> Option<f64> {
    let re03 = (c.sum_lower_bound - t).max(0.0);
    if re03 > c.cs_bound_03 + CAP_SLACK {
        None
    } else {
        Some(re03.min(c.cs_bound_03))
    }
}

fn golden_section(
    mut f: impl FnMut(f64) -> Result<f64>,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    let inv_phi = 0.5 * (sqrt(5.0) - 1.0);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 <= f2 { (x1, f1) } else { (x2, f2) })
}

/// Minimizes the bound over the feasible inner products.
///
/// Scans `t = Re<E1|E2>` over `grid_points` values in `[-cs_12, cs_12]`,
/// pairing each with `Re<E0|E3> = max(0, L - t)` and skipping `t` when that
/// exceeds `cs_03`, then refines the best cell by golden section. The
/// `h_a_given_b` and `rate` fields are left at zero. When the constraints are
/// infeasible the result has `feasible = false`, `sae_lower = 0` and the
/// inner products at their caps.
pub fn minimize_sae(stats: &ObservedStatistics, grid_points: usize) -> Result<KeyRateResult> {
    if grid_points < 3 {
        return Err(Error::InvalidParameter {
            name: "grid_points",
            value: grid_points as f64,
        });
    }
    stats.validate()?;
    if stats.m_total.is_nan() || stats.m_total <= 0.0 {
        return Err(Error::NoRawKey);
    }
    let c = build_constraints(stats);
    let finish = |re03: f64, re12: f64, value: f64, feasible: bool| {
        let (lambda1, lambda2) = lambdas(stats, re03, re12);
        KeyRateResult {
            sae_lower: value.max(0.0),
            h_a_given_b: 0.0,
            rate: 0.0,
            argmin_re03: re03,
            argmin_re12: re12,
            feasible,
            lambda1,
            lambda2,
        }
    };
    if !c.is_feasible() {
        return Ok(finish(c.cs_bound_03, c.cs_bound_12, 0.0, false));
    }

    let cap = c.cs_bound_12;
    let step = if cap > 0.0 {
        2.0 * cap / (grid_points - 1) as f64
    } else {
        0.0
    };
    let mut best: Option<(f64, f64)> = None;
    for i in 0..grid_points {
        let t = if i + 1 == grid_points {
            cap
        } else {
            -cap + step * i as f64
        };
        let Some(re03) = partner(&c, t) else { continue };
        let v = sae_bound_raw(stats, re03, t)?;
        if best.is_none_or(|(_, bv)| v < bv) {
            best = Some((t, v));
        }
        if cap == 0.0 {
            break;
        }
    }
    let Some((mut t_best, mut v_best)) = best else {
        // feasible only within the slack: take the largest t
        let re03 = c.cs_bound_03;
        let v = sae_bound_raw(stats, re03, cap)?;
        return Ok(finish(re03, cap, v, true));
    };

    if cap > 0.0 {
        let t_min = (c.sum_lower_bound - c.cs_bound_03).max(-cap);
        let lo = (t_best - step).max(t_min);
        let hi = (t_best + step).min(cap);
        if hi > lo {
            let tol = tolerance::ARGMIN_REL * (cap - t_min).max(f64::MIN_POSITIVE);
            let f = |t: f64| match partner(&c, t) {
                Some(re03) => sae_bound_raw(stats, re03, t),
                None => Ok(f64::INFINITY),
            };
            let (t, v) = golden_section(f, lo, hi, tol)?;
            if v < v_best {
                t_best = t;
                v_best = v;
            }
        }
    }
    let re03 = partner(&c, t_best).expect("feasible t");
    Ok(finish(re03, t_best, v_best, true))
}

/// `H(A|B) = H(AB) - H(B)` over the normalized raw-key distribution.
pub fn conditional_entropy_ab(stats: &ObservedStatistics) -> Result<f64> {
    let m = stats.m_total;
    if m.is_nan() || m <= 0.0 {
        return Err(Error::NoRawKey);
    }
    let q = stats.raw_key().map(|e| (e / m).clamp(0.0, 1.0));
    let h_ab: f64 = q.iter().map(|&p| entropy_term(p)).sum();
    let bob_zero = (q[0] + q[2]).clamp(0.0, 1.0);
    let h_b = entropy_term(bob_zero) + entropy_term(1.0 - bob_zero);
    Ok((h_ab - h_b).max(0.0))
}

/// Devetak-Winter rate `r = S(A|E) - H(A|B)`, with `S(A|E)` minimized.
///
/// Negative rates are returned as they are. When infeasible, `rate` is
/// `-H(A|B)`.
pub fn key_rate(stats: &ObservedStatistics, grid_points: usize) -> Result<KeyRateResult> {
    let mut out = minimize_sae(stats, grid_points)?;
    out.h_a_given_b = conditional_entropy_ab(stats)?;
    out.rate = out.sae_lower - out.h_a_given_b;
    Ok(out)
}

/// Whether `(re03, re12)` lies in the constraint set.
pub fn is_admissible(c: &ConstraintSet, re03: f64, re12: f64) -> bool {
    re03 + re12 >= c.sum_lower_bound - tolerance::ASSERT
        && abs(re03) <= c.cs_bound_03 + CAP_SLACK
        && abs(re12) <= c.cs_bound_12 + CAP_SLACK
}
