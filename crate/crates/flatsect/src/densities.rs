//! Closed-form densities, CDFs, radial weight functions, hit probabilities
//! and moments of the distance d(o, E ∩ L) between the origin and the
//! intersection flat, for the ball-restricted and sphere-tangent models.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quad;
use crate::specfun::{
    self, beta_complete, beta_incomplete, beta_regularized, ln_omega, CaseTriple,
};

/// Rotation-invariant weight H(E) = H_I(d(o,E)) applied to the affine flat
/// measure; the radial profile H_I is what enters the J-weight.
#[derive(Clone)]
pub enum WeightProfile {
    /// H_I(r) = 1 for r ≤ h, 0 otherwise: restriction to flats hitting hBⁿ.
    BallIndicator(f64),
    /// H_I ≡ 1: the unrestricted invariant measure.
    Constant,
    /// A user-supplied nonnegative radial profile.
    Radial(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl WeightProfile {
    pub fn ball_indicator(h: f64) -> Result<Self> {
        if h.is_nan() || h <= 0.0 {
            return Err(Error::domain("ball indicator requires h > 0"));
        }
        Ok(WeightProfile::BallIndicator(h))
    }

    pub fn radial(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        WeightProfile::Radial(Arc::new(f))
    }

    /// Evaluate the radial profile H_I(r).
    pub fn evaluate(&self, r: f64) -> f64 {
        match self {
            WeightProfile::BallIndicator(h) => {
                if r <= *h {
                    1.0
                } else {
                    0.0
                }
            }
            WeightProfile::Constant => 1.0,
            WeightProfile::Radial(f) => f(r),
        }
    }
}

impl fmt::Debug for WeightProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightProfile::BallIndicator(h) => write!(f, "BallIndicator({h})"),
            WeightProfile::Constant => write!(f, "Constant"),
            WeightProfile::Radial(_) => write!(f, "Radial(..)"),
        }
    }
}

/// ω_{n+1} / (ω_{q+1} ω_{n−q}) = ½ B((q+1)/2, (n−q)/2): the J-weight value
/// for the constant profile.
fn j_constant(n: usize, q: usize) -> f64 {
    (ln_omega(n + 1) - ln_omega(q + 1) - ln_omega(n - q)).exp()
}

fn check_j_dims(n: usize, q: usize) -> Result<()> {
    if q < 1 || q + 1 > n {
        return Err(Error::domain(format!(
            "j_weight requires 1 <= q <= n-1, got n={n}, q={q}"
        )));
    }
    Ok(())
}

/// The radial weight J_H(r) = ∫_0^1 H_I(rz) z^q (1−z²)^{(n−q)/2−1} dz.
///
/// Closed forms are used for the constant and ball-indicator profiles; a
/// general radial profile goes through adaptive quadrature (absolute
/// tolerance 1e-10) after the substitution z = sin t, which removes the
/// endpoint singularity in the codimension-one case.
pub fn j_weight(profile: &WeightProfile, n: usize, q: usize, r: f64) -> Result<f64> {
    check_j_dims(n, q)?;
    if r.is_nan() || r < 0.0 {
        return Err(Error::domain(format!("j_weight requires r >= 0, got {r}")));
    }
    match profile {
        WeightProfile::Constant => Ok(j_constant(n, q)),
        WeightProfile::BallIndicator(h) => {
            if r <= *h {
                Ok(j_constant(n, q))
            } else {
                let x = (h / r) * (h / r);
                Ok(0.5 * beta_incomplete(x, 0.5 * (q as f64 + 1.0), 0.5 * (n - q) as f64)?)
            }
        }
        WeightProfile::Radial(f) => {
            let qf = q as f64;
            let cos_pow = (n - q) as f64 - 1.0;
            Ok(quad::integrate(
                |t: f64| {
                    let (s, c) = t.sin_cos();
                    f(r * s) * s.powf(qf) * c.powf(cos_pow)
                },
                0.0,
                std::f64::consts::FRAC_PI_2,
                1e-10,
            ))
        }
    }
}

/// ∫_0^δ r^{q−γ−1} J_H(r) dr, the radial part of the right-hand side of the
/// transformation formula for the test function 1{d(o,·) ≤ δ}.
pub fn j_weight_radial_integral(
    c: &CaseTriple,
    profile: &WeightProfile,
    delta: f64,
) -> Result<f64> {
    let (n, q, g) = (c.n(), c.q(), c.gamma());
    if delta.is_nan() || delta < 0.0 {
        return Err(Error::domain("delta must be nonnegative"));
    }
    if delta == 0.0 {
        return Ok(0.0);
    }
    let codim = (q - g) as f64;
    match profile {
        WeightProfile::Constant => Ok(j_constant(n, q) * delta.powf(codim) / codim),
        WeightProfile::BallIndicator(h) => {
            let inner = delta.min(*h);
            let head = j_constant(n, q) * inner.powf(codim) / codim;
            if delta <= *h {
                return Ok(head);
            }
            // ∫_h^δ r^{q−γ−1} ½ B((h/r)²; a, b) dr with s = h/r.
            let a = 0.5 * (q as f64 + 1.0);
            let b = 0.5 * (n - q) as f64;
            let scale = h.powf(codim);
            let tail = quad::integrate(
                |s: f64| {
                    if s <= 0.0 {
                        return 0.0;
                    }
                    s.powf(g as f64 - q as f64 - 1.0)
                        * beta_incomplete(s * s, a, b).unwrap_or(0.0)
                },
                h / delta,
                1.0,
                1e-11,
            );
            Ok(head + 0.5 * scale * tail)
        }
        WeightProfile::Radial(_) => {
            let go = g as f64;
            let qo = q as f64;
            Ok(quad::integrate(
                |r: f64| {
                    if r <= 0.0 {
                        return 0.0;
                    }
                    r.powf(qo - go - 1.0) * j_weight(profile, n, q, r).unwrap_or(0.0)
                },
                0.0,
                delta,
                1e-8,
            ))
        }
    }
}

fn ball_front(c: &CaseTriple) -> f64 {
    let (n, q, g) = (c.n(), c.q(), c.gamma());
    (q - g) as f64 * (ln_omega(g + 1) + ln_omega(n - q) - ln_omega(n - q + g + 1)).exp()
}

/// Density f_{n,q,γ}(δ) of d(o, E ∩ L) when E is the invariant random flat
/// conditioned to hit the unit ball:
///
///   f(δ) = (q−γ) (ω_{γ+1} ω_{n−q} / ω_{n−q+γ+1}) δ^{q−γ−1} J_{H_1}(δ).
pub fn density_ball(c: &CaseTriple, delta: f64) -> Result<f64> {
    if delta.is_nan() || delta < 0.0 {
        return Err(Error::domain(format!(
            "density_ball requires delta >= 0, got {delta}"
        )));
    }
    let (n, q, g) = (c.n(), c.q(), c.gamma());
    let power = if q - g == 1 {
        1.0
    } else {
        delta.powi((q - g) as i32 - 1)
    };
    let j = if delta <= 1.0 {
        j_constant(n, q)
    } else {
        let a = 0.5 * (q as f64 + 1.0);
        let b = 0.5 * (n - q) as f64;
        0.5 * beta_incomplete(1.0 / (delta * delta), a, b)?
    };
    Ok(ball_front(c) * power * j)
}

// Tail mass ∫_x^∞ f_{n,q,γ} for x ≥ 1, through the substitution s = 1/r that
// maps the heavy tail onto (0, 1/x] where the integrand is beta-like and
// bounded.
fn ball_tail_mass(c: &CaseTriple, x: f64, tol: f64) -> f64 {
    debug_assert!(x >= 1.0);
    let (n, q, g) = (c.n(), c.q(), c.gamma());
    let a = 0.5 * (q as f64 + 1.0);
    let b = 0.5 * (n - q) as f64;
    let power = g as f64 - q as f64 - 1.0;
    let integral = quad::integrate(
        |s: f64| {
            if s <= 0.0 {
                return 0.0;
            }
            s.powf(power) * beta_incomplete(s * s, a, b).unwrap_or(0.0)
        },
        0.0,
        1.0 / x,
        tol,
    );
    0.5 * ball_front(c) * integral
}

/// Survival function P[d(o,E∩L) > δ] for δ ≥ 1, computed directly so the
/// Pareto tail keeps full relative accuracy far out (1 − cdf would drown in
/// the CDF's absolute quadrature error).
pub fn survival_ball(c: &CaseTriple, delta: f64) -> Result<f64> {
    if delta.is_nan() || delta < 1.0 {
        return Err(Error::domain(format!(
            "survival_ball is defined for delta >= 1, got {delta}"
        )));
    }
    let (n, q, g) = (c.n(), c.q(), c.gamma());
    let a = 0.5 * (q as f64 + 1.0);
    let b = 0.5 * (n - q) as f64;
    let power = g as f64 - q as f64 - 1.0;
    let integral = quad::integrate_rel(
        |s: f64| {
            if s <= 0.0 {
                return 0.0;
            }
            s.powf(power) * beta_incomplete(s * s, a, b).unwrap_or(0.0)
        },
        0.0,
        1.0 / delta,
        1e-9,
    );
    Ok(0.5 * ball_front(c) * integral)
}

/// CDF of d(o, E ∩ L) in the ball-restricted model. For δ ≤ 1 this is the
/// closed form p_{n,q,γ} δ^{q−γ}; beyond 1 the density tail is integrated
/// after the change of variables s = 1/r.
pub fn cdf_ball(c: &CaseTriple, delta: f64) -> Result<f64> {
    if delta.is_nan() || delta < 0.0 {
        return Err(Error::domain(format!(
            "cdf_ball requires delta >= 0, got {delta}"
        )));
    }
    let p = specfun::hit_probability(c);
    if delta <= 1.0 {
        return Ok(p * delta.powi(c.codim() as i32));
    }
    if delta.is_infinite() {
        return Ok(1.0);
    }
    let gained = ball_tail_mass(c, 1.0, 1e-10) - ball_tail_mass(c, delta, 1e-10);
    Ok((p + gained).min(1.0))
}

/// Density g_{n,q,γ}(r) of d(o, E ∩ L) when E is tangent to the unit sphere:
///
///   g(r) = (ω_{γ+1} ω_{n−q} / ω_{n−q+γ+1}) r^{−(γ+2)} (1 − r^{−2})^{(n−q)/2−1}
///
/// supported on r > 1. Equivalently r^{−2} has the Beta((γ+1)/2, (n−q)/2)
/// law; see [`density_tangent_via_beta`].
pub fn density_tangent(c: &CaseTriple, r: f64) -> Result<f64> {
    if r.is_nan() || r < 0.0 {
        return Err(Error::domain(format!(
            "density_tangent requires r >= 0, got {r}"
        )));
    }
    if r <= 1.0 {
        return Ok(0.0);
    }
    let (n, q, g) = (c.n(), c.q(), c.gamma());
    let coeff = (ln_omega(g + 1) + ln_omega(n - q) - ln_omega(n - q + g + 1)).exp();
    let exponent = 0.5 * (n - q) as f64 - 1.0;
    Ok(coeff * r.powi(-(g as i32 + 2)) * (1.0 - 1.0 / (r * r)).powf(exponent))
}

/// The tangent-model density obtained by transforming the
/// Beta((γ+1)/2, (n−q)/2) density of X = r^{−2} through r = X^{−1/2}.
pub fn density_tangent_via_beta(c: &CaseTriple, r: f64) -> Result<f64> {
    if r.is_nan() || r < 0.0 {
        return Err(Error::domain(format!(
            "density_tangent_via_beta requires r >= 0, got {r}"
        )));
    }
    if r <= 1.0 {
        return Ok(0.0);
    }
    let a = 0.5 * (c.gamma() as f64 + 1.0);
    let b = 0.5 * (c.n() - c.q()) as f64;
    let x = 1.0 / (r * r);
    let beta_pdf = x.powf(a - 1.0) * (1.0 - x).powf(b - 1.0) / beta_complete(a, b)?;
    Ok(beta_pdf * 2.0 * r.powi(-3))
}

/// CDF of the tangent-model distance: P[R ≤ r] = 1 − I_{r^{−2}}(a, b).
pub fn cdf_tangent(c: &CaseTriple, r: f64) -> Result<f64> {
    if r.is_nan() || r < 0.0 {
        return Err(Error::domain(format!(
            "cdf_tangent requires r >= 0, got {r}"
        )));
    }
    if r <= 1.0 {
        return Ok(0.0);
    }
    let a = 0.5 * (c.gamma() as f64 + 1.0);
    let b = 0.5 * (c.n() - c.q()) as f64;
    Ok(1.0 - beta_regularized(1.0 / (r * r), a, b)?)
}

/// A moment that may be infinite; the finiteness window is part of the
/// contract and callers branch on it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MomentValue {
    Finite(f64),
    Infinite,
}

impl MomentValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            MomentValue::Finite(v) => Some(v),
            MomentValue::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, MomentValue::Infinite)
    }
}

impl fmt::Display for MomentValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MomentValue::Finite(v) => write!(f, "{v}"),
            MomentValue::Infinite => write!(f, "inf"),
        }
    }
}

/// E d(o,E∩L)^α in the ball-restricted model: finite iff γ−q < α < γ+1, in
/// which case the head is integrated in closed form and the tail by adaptive
/// quadrature after s = 1/r.
pub fn moment_ball(c: &CaseTriple, alpha: f64) -> MomentValue {
    let (lo, hi) = specfun::ball_moment_window(c);
    if alpha.is_nan() || alpha <= lo || alpha >= hi {
        return MomentValue::Infinite;
    }
    let (n, q, g) = (c.n(), c.q(), c.gamma());
    let front = ball_front(c);
    let head = front * j_constant(n, q) / (alpha + (q - g) as f64);
    let a = 0.5 * (q as f64 + 1.0);
    let b = 0.5 * (n - q) as f64;
    let power = g as f64 - q as f64 - alpha - 1.0;
    let tail_integral = quad::integrate(
        |s: f64| {
            if s <= 0.0 {
                return 0.0;
            }
            s.powf(power) * beta_incomplete(s * s, a, b).unwrap_or(0.0)
        },
        0.0,
        1.0,
        1e-9,
    );
    MomentValue::Finite(head + 0.5 * front * tail_integral)
}

/// E d(o,E∩L)^α in the tangent model: finite iff α < γ+1, given by the beta
/// moment identity E R^α = B((γ+1−α)/2, (n−q)/2) / B((γ+1)/2, (n−q)/2).
pub fn moment_tangent(c: &CaseTriple, alpha: f64) -> MomentValue {
    let g = c.gamma() as f64;
    if alpha >= g + 1.0 {
        return MomentValue::Infinite;
    }
    let b = 0.5 * (c.n() - c.q()) as f64;
    let num = specfun::ln_beta(0.5 * (g + 1.0 - alpha), b).expect("parameters positive");
    let den = specfun::ln_beta(0.5 * (g + 1.0), b).expect("parameters positive");
    MomentValue::Finite((num - den).exp())
}

/// Limit of E d(o,E∩L)/√n in the tangent model as n → ∞ with q, γ fixed:
/// (1/√(2π)) ω_{γ+1}/ω_γ, for γ ≥ 1.
///
/// The closed-form mean used here is ω_{γ+1} ω_{n−q+γ} / (ω_γ ω_{n−q+γ+1}),
/// which matches quadrature of the tangent density. An alternative closed
/// form occasionally quoted for this mean, (ω_{n−q+γ}/ω_γ)(2π)^{−(n−q)},
/// disagrees with the quadrature value (e.g. 1/2 instead of π/2 at
/// (n,q,γ) = (3,2,1)) and is not used.
pub fn mean_tangent_limit(gamma: usize) -> Result<f64> {
    if gamma == 0 {
        return Err(Error::domain(
            "mean_tangent_limit requires gamma >= 1 (the mean is infinite for gamma = 0)",
        ));
    }
    let ratio = (ln_omega(gamma + 1) - ln_omega(gamma)).exp();
    Ok(ratio / (2.0 * std::f64::consts::PI).sqrt())
}

/// Which invariant flat model a radial distance law belongs to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FlatFamily {
    /// Flats conditioned to hit the centered ball of radius h.
    BallRestricted { h: f64 },
    /// Flats tangent to the unit sphere.
    Tangent,
}

/// The distribution of d(o, E ∩ L) for one dimension triple and flat family.
///
/// The ball-restricted family scales by h: if D is the unit-ball distance
/// then hD is the radius-h one.
#[derive(Debug, Clone)]
pub struct RadialDensity {
    case: CaseTriple,
    family: FlatFamily,
}

impl RadialDensity {
    pub fn new(case: CaseTriple, family: FlatFamily) -> Result<Self> {
        if let FlatFamily::BallRestricted { h } = family {
            if h.is_nan() || h <= 0.0 {
                return Err(Error::domain("BallRestricted requires h > 0"));
            }
        }
        Ok(RadialDensity { case, family })
    }

    pub fn case(&self) -> &CaseTriple {
        &self.case
    }

    pub fn family(&self) -> FlatFamily {
        self.family
    }

    /// The constant multiplying the radial kernel.
    pub fn normalization(&self) -> f64 {
        match self.family {
            FlatFamily::BallRestricted { .. } => ball_front(&self.case),
            FlatFamily::Tangent => {
                let (n, q, g) = (self.case.n(), self.case.q(), self.case.gamma());
                (ln_omega(g + 1) + ln_omega(n - q) - ln_omega(n - q + g + 1)).exp()
            }
        }
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        match self.family {
            FlatFamily::BallRestricted { h } => Ok(density_ball(&self.case, x / h)? / h),
            FlatFamily::Tangent => density_tangent(&self.case, x),
        }
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        match self.family {
            FlatFamily::BallRestricted { h } => cdf_ball(&self.case, x / h),
            FlatFamily::Tangent => cdf_tangent(&self.case, x),
        }
    }

    /// CDF at every point of an ascending slice. The part beyond the scaling
    /// point integrates the density forward segment by segment, so a batch of
    /// m points costs one tail sweep instead of m adaptive quadratures.
    pub fn cdf_batch(&self, sorted: &[f64]) -> Result<Vec<f64>> {
        debug_assert!(sorted.windows(2).all(|w| w[0] <= w[1]));
        match self.family {
            FlatFamily::Tangent => sorted.iter().map(|&x| self.cdf(x)).collect(),
            FlatFamily::BallRestricted { h } => {
                let c = &self.case;
                let p = specfun::hit_probability(c);
                let codim = c.codim() as i32;
                let mut out = Vec::with_capacity(sorted.len());
                let mut prev_delta = 1.0f64;
                let mut acc = p;
                for &x in sorted {
                    let delta = x / h;
                    if delta <= 1.0 {
                        out.push(p * delta.powi(codim));
                    } else {
                        let segment = quad::integrate(
                            |r| density_ball(c, r).unwrap_or(0.0),
                            prev_delta,
                            delta,
                            1e-11,
                        );
                        acc = (acc + segment).min(1.0);
                        prev_delta = delta;
                        out.push(acc);
                    }
                }
                Ok(out)
            }
        }
    }
}
