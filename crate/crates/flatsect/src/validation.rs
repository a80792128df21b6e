//! Monte Carlo and goodness-of-fit machinery that checks every closed form
//! in the library against simulation: hit probabilities, distance laws,
//! moment constants, the fixed-subspace variant, the tangent beta law and the
//! multiple-intersection constants.

use nalgebra::DVector;

use crate::densities::{self, FlatFamily, RadialDensity, WeightProfile};
use crate::error::{Error, Result};
use crate::sampling::{
    sample_affine_hitting_ball, sample_affine_tangent,
    sample_containing_with_complement as sampling_containing, sample_grassmannian, RandomStream,
};
use crate::specfun::{self, CaseTriple};
use crate::subspaces::{
    intersect_affine, intersect_affine_linear, principal_angles, subspace_determinant,
    AffineFlat, LinearSubspace, DEFAULT_TOL,
};

/// Fraction of draws that may be rejected as degenerate before the harness
/// gives up.
pub const DEGENERACY_BUDGET: f64 = 1e-4;

/// A Monte Carlo estimate with its standard error and provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct MCEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub rejected: usize,
}

impl MCEstimate {
    /// |value − target| ≤ 3 standard errors.
    pub fn within_three_sigma(&self, target: f64) -> bool {
        (self.value - target).abs() <= 3.0 * self.std_error + 1e-12
    }
}

/// Outcome of a one- or two-sample Kolmogorov–Smirnov test.
#[derive(Debug, Clone, PartialEq)]
pub struct GoodnessOfFitReport {
    pub ks_statistic: f64,
    pub n_samples: usize,
    pub critical_value: f64,
    pub pass: bool,
    pub alpha: f64,
}

/// A Monte Carlo estimate paired with its closed-form target.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub estimate: MCEstimate,
    pub target: f64,
    pub pass: bool,
}

impl ComparisonReport {
    fn new(estimate: MCEstimate, target: f64) -> Self {
        let pass = estimate.within_three_sigma(target);
        ComparisonReport {
            estimate,
            target,
            pass,
        }
    }
}

/// Asymptotic Kolmogorov quantile: c(α) = √(−ln(α/2)/2); c(0.01) ≈ 1.628.
pub fn ks_critical_coefficient(alpha: f64) -> Result<f64> {
    if alpha.is_nan() || alpha <= 0.0 || alpha >= 1.0 {
        return Err(Error::domain("alpha must be in (0,1)"));
    }
    Ok((-0.5 * (0.5 * alpha).ln()).sqrt())
}

fn ks_statistic_from_sorted_cdf(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mut d = 0.0f64;
    for (i, &f) in values.iter().enumerate() {
        let lo = f - i as f64 / n;
        let hi = (i as f64 + 1.0) / n - f;
        d = d.max(lo).max(hi);
    }
    d
}

/// One-sample Kolmogorov–Smirnov test of `samples` against the CDF `cdf`.
pub fn ks_test<F: Fn(f64) -> f64>(
    samples: &[f64],
    cdf: F,
    alpha: f64,
) -> Result<GoodnessOfFitReport> {
    if samples.is_empty() {
        return Err(Error::domain("ks_test requires a nonempty sample"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("samples must not contain NaN"));
    let values: Vec<f64> = sorted.iter().map(|&x| cdf(x)).collect();
    ks_report_from_sorted_cdf(&values, alpha)
}

pub(crate) fn ks_report_from_sorted_cdf(
    values: &[f64],
    alpha: f64,
) -> Result<GoodnessOfFitReport> {
    let n = values.len();
    let statistic = ks_statistic_from_sorted_cdf(values);
    let critical_value = ks_critical_coefficient(alpha)? / (n as f64).sqrt();
    Ok(GoodnessOfFitReport {
        ks_statistic: statistic,
        n_samples: n,
        critical_value,
        pass: statistic < critical_value,
        alpha,
    })
}

/// Two-sample Kolmogorov–Smirnov test with effective size n₁n₂/(n₁+n₂).
pub fn ks_test_two_sample(xs: &[f64], ys: &[f64], alpha: f64) -> Result<GoodnessOfFitReport> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::domain("ks_test_two_sample requires nonempty samples"));
    }
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_by(|x, y| x.partial_cmp(y).expect("samples must not contain NaN"));
    b.sort_by(|x, y| x.partial_cmp(y).expect("samples must not contain NaN"));
    let (mut i, mut j) = (0usize, 0usize);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let n_eff = na * nb / (na + nb);
    let critical_value = ks_critical_coefficient(alpha)? / n_eff.sqrt();
    Ok(GoodnessOfFitReport {
        ks_statistic: d,
        n_samples: n_eff.round() as usize,
        critical_value,
        pass: d < critical_value,
        alpha,
    })
}

/// Secondary chi-square goodness-of-fit test with Sturges binning on the
/// probability-transformed sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ChiSquareReport {
    pub statistic: f64,
    pub dof: usize,
    pub critical_value: f64,
    pub pass: bool,
    pub alpha: f64,
}

pub fn chi_square_test<F: Fn(f64) -> f64>(
    samples: &[f64],
    cdf: F,
    alpha: f64,
) -> Result<ChiSquareReport> {
    if samples.is_empty() {
        return Err(Error::domain("chi_square_test requires a nonempty sample"));
    }
    let n = samples.len();
    let bins = 1 + (n as f64).log2().ceil() as usize;
    let mut counts = vec![0usize; bins];
    for &x in samples {
        let u = cdf(x).clamp(0.0, 1.0 - 1e-12);
        counts[(u * bins as f64) as usize] += 1;
    }
    let expected = n as f64 / bins as f64;
    let statistic: f64 = counts
        .iter()
        .map(|&c| {
            let diff = c as f64 - expected;
            diff * diff / expected
        })
        .sum();
    let dof = bins - 1;
    // Wilson–Hilferty quantile of the chi-square distribution.
    let z = normal_quantile(1.0 - alpha)?;
    let k = dof as f64;
    let critical_value = k * (1.0 - 2.0 / (9.0 * k) + z * (2.0 / (9.0 * k)).sqrt()).powi(3);
    Ok(ChiSquareReport {
        statistic,
        dof,
        critical_value,
        pass: statistic < critical_value,
        alpha,
    })
}

// Acklam-style rational approximation of the standard normal quantile,
// accurate to ~1e-9; plenty for test critical values.
fn normal_quantile(p: f64) -> Result<f64> {
    if p.is_nan() || p <= 0.0 || p >= 1.0 {
        return Err(Error::domain("normal_quantile requires p in (0,1)"));
    }
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383_577_518_672_69e2,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    let p_low = 0.02425;
    let x = if p < p_low {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - p_low {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    Ok(x)
}

/// Which joint model the intersection distances are sampled from.
#[derive(Debug, Clone)]
pub enum Family {
    /// L ~ ν_q random, E invariant hitting the radius-h ball.
    BallRestricted { h: f64 },
    /// L ~ ν_q random, E invariant tangent to the unit sphere.
    Tangent,
    /// Deterministic L₀ of dimension q, E invariant hitting the unit ball.
    FixedSubspace(LinearSubspace),
}

/// Distances d(o, E ∩ L) with the count of rejected degenerate draws.
#[derive(Debug, Clone)]
pub struct DistanceSample {
    pub distances: Vec<f64>,
    pub rejected: usize,
    pub seed: u64,
}

fn budget(n_samples: usize) -> usize {
    (n_samples as f64 * DEGENERACY_BUDGET).ceil() as usize
}

/// Sample d(o, E ∩ L) from the chosen family, rejecting and resampling
/// degenerate draws within the budget.
pub fn sample_intersection_distances(
    c: &CaseTriple,
    family: &Family,
    n_samples: usize,
    rng: &mut RandomStream,
) -> Result<DistanceSample> {
    if n_samples == 0 {
        return Err(Error::domain("n_samples must be >= 1"));
    }
    if let Family::FixedSubspace(l0) = family {
        if l0.ambient_dim() != c.n() || l0.dim() != c.q() {
            return Err(Error::domain(format!(
                "fixed subspace must be a {}-dimensional subspace of R^{}",
                c.q(),
                c.n()
            )));
        }
    }
    let (n, q, k) = (c.n(), c.q(), c.flat_dim());
    let max_rejected = budget(n_samples);
    let mut distances = Vec::with_capacity(n_samples);
    let mut rejected = 0usize;
    while distances.len() < n_samples {
        let e = match family {
            Family::BallRestricted { h } => sample_affine_hitting_ball(n, k, *h, rng)?,
            Family::FixedSubspace(_) => sample_affine_hitting_ball(n, k, 1.0, rng)?,
            Family::Tangent => sample_affine_tangent(n, k, rng)?,
        };
        let result = match family {
            Family::FixedSubspace(l0) => intersect_affine_linear(&e, l0, DEFAULT_TOL),
            _ => {
                let l = sample_grassmannian(n, q, rng)?;
                intersect_affine_linear(&e, &l, DEFAULT_TOL)
            }
        };
        match result {
            Ok(flat) => distances.push(flat.distance_to_origin()),
            Err(Error::EmptyIntersection { .. }) | Err(Error::DegenerateConfiguration { .. }) => {
                rejected += 1;
                if rejected > max_rejected {
                    return Err(Error::DegeneracyBudget {
                        rejected,
                        n_samples,
                    });
                }
            }
            Err(other) => return Err(other),
        }
    }
    Ok(DistanceSample {
        distances,
        rejected,
        seed: rng.seed(),
    })
}

/// Bernoulli estimate p̂ = count/n with standard error √(p̂(1−p̂)/n).
pub fn bernoulli_estimate(count: usize, n: usize, seed: u64, rejected: usize) -> MCEstimate {
    let p_hat = count as f64 / n as f64;
    MCEstimate {
        value: p_hat,
        std_error: (p_hat * (1.0 - p_hat) / n as f64).sqrt(),
        n_samples: n,
        seed,
        rejected,
    }
}

/// Mean-and-error estimate from running sums.
pub fn mean_estimate(
    sum: f64,
    sum_sq: f64,
    n: usize,
    seed: u64,
    rejected: usize,
) -> MCEstimate {
    let mean = sum / n as f64;
    let variance = (sum_sq / n as f64 - mean * mean).max(0.0);
    MCEstimate {
        value: mean,
        std_error: (variance / n as f64).sqrt(),
        n_samples: n,
        seed,
        rejected,
    }
}

/// Monte Carlo estimate of the hit probability P[E ∩ L ∩ Bⁿ ≠ ∅] with
/// L ~ ν_q and E invariant hitting the unit ball.
pub fn estimate_hit_probability(
    c: &CaseTriple,
    n_samples: usize,
    rng: &mut RandomStream,
) -> Result<MCEstimate> {
    let sample = sample_intersection_distances(
        c,
        &Family::BallRestricted { h: 1.0 },
        n_samples,
        rng,
    )?;
    Ok(hit_estimate_from_distances(&sample))
}

/// The hit-probability estimate carried by an existing distance sample.
pub fn hit_estimate_from_distances(sample: &DistanceSample) -> MCEstimate {
    let hits = sample.distances.iter().filter(|&&d| d <= 1.0).count();
    bernoulli_estimate(hits, sample.distances.len(), sample.seed, sample.rejected)
}

/// Monte Carlo check of the axis moment identity
/// ∫ [L,M]^α ν_q^{span u}(dL) = a(n,p,q,α) [u,M]^α.
#[allow(clippy::too_many_arguments)]
pub fn validate_lemma_axis_moment(
    n: usize,
    p: usize,
    q: usize,
    alpha: f64,
    u: &DVector<f64>,
    m: &LinearSubspace,
    n_samples: usize,
    rng: &mut RandomStream,
) -> Result<ComparisonReport> {
    if u.len() != n || m.ambient_dim() != n || m.dim() != p {
        return Err(Error::domain(
            "u must lie in R^n and M must be a p-dimensional subspace of R^n",
        ));
    }
    let constant = specfun::axis_moment_constant(n, p, q, alpha)?;
    let axis = LinearSubspace::span_of(u)?;
    let axis_comp = crate::subspaces::complement(&axis);
    let u_det = subspace_determinant(&axis, m)?;
    let target = constant * u_det.powf(alpha);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..n_samples {
        let l = sampling_containing(&axis, &axis_comp, q, rng)?;
        let v = subspace_determinant(&l, m)?.powf(alpha);
        sum += v;
        sum_sq += v * v;
    }
    let estimate = mean_estimate(sum, sum_sq, n_samples, rng.seed(), 0);
    Ok(ComparisonReport::new(estimate, target))
}

/// One grid point of the two-sided transformation-formula check.
#[derive(Debug, Clone)]
pub struct TransformationCheckPoint {
    pub delta: f64,
    pub lhs: MCEstimate,
    pub rhs: f64,
    pub pass: bool,
}

/// Two-sided Monte Carlo check of the general transformation formula with
/// test functions f = 1{d(o,·) ≤ δ}.
///
/// The left side samples (L, E) with E from the normalized restriction to
/// [hBⁿ] and multiplies back its total mass κ_{q−γ} h^{q−γ}; the right side
/// is D(n,q,γ) ω_{n−γ} ∫_0^δ r^{q−γ−1} J_H(r) dr by quadrature. Profiles of
/// unbounded total mass cannot be Monte Carlo sampled and are refused.
pub fn validate_transformation_formula(
    c: &CaseTriple,
    profile: &WeightProfile,
    delta_grid: &[f64],
    n_samples: usize,
    rng: &mut RandomStream,
) -> Result<Vec<TransformationCheckPoint>> {
    let h = match profile {
        WeightProfile::BallIndicator(h) => *h,
        WeightProfile::Constant => {
            return Err(Error::Refused(
                "constant weight profile has unbounded total flat mass; \
                 the left-hand side cannot be sampled (use the ball indicator)"
                    .into(),
            ))
        }
        WeightProfile::Radial(_) => {
            return Err(Error::Refused(
                "no sampler is available for general radial weight profiles".into(),
            ))
        }
    };
    if delta_grid.is_empty() {
        return Err(Error::domain("delta grid must be nonempty"));
    }
    let sample =
        sample_intersection_distances(c, &Family::BallRestricted { h }, n_samples, rng)?;
    transformation_points_from_distances(c, h, delta_grid, &sample)
}

/// The two-sided comparison evaluated on an existing ball-restricted
/// distance sample (radius h).
pub fn transformation_points_from_distances(
    c: &CaseTriple,
    h: f64,
    delta_grid: &[f64],
    sample: &DistanceSample,
) -> Result<Vec<TransformationCheckPoint>> {
    let profile = WeightProfile::ball_indicator(h)?;
    let n_samples = sample.distances.len();
    let mass = specfun::kappa(c.codim() as u32)? * h.powi(c.codim() as i32);
    let d_omega = specfun::d_constant(c) * specfun::omega((c.n() - c.gamma()) as u32)?;
    let mut out = Vec::with_capacity(delta_grid.len());
    for &delta in delta_grid {
        if delta.is_nan() || delta < 0.0 {
            return Err(Error::domain("delta grid entries must be nonnegative"));
        }
        let hits = sample.distances.iter().filter(|&&d| d <= delta).count();
        let bern = bernoulli_estimate(hits, n_samples, sample.seed, sample.rejected);
        let lhs = MCEstimate {
            value: mass * bern.value,
            std_error: mass * bern.std_error,
            ..bern
        };
        let rhs = d_omega * densities::j_weight_radial_integral(c, &profile, delta)?;
        let pass = lhs.within_three_sigma(rhs);
        out.push(TransformationCheckPoint {
            delta,
            lhs,
            rhs,
            pass,
        });
    }
    Ok(out)
}

/// One-sample KS report of ball-restricted distances against the closed-form
/// distance law, using the batched CDF sweep.
pub fn ball_distance_ks_report(
    c: &CaseTriple,
    h: f64,
    distances: &[f64],
    alpha: f64,
    ) -> Result<GoodnessOfFitReport> {
    if distances.is_empty() {
        return Err(Error::domain("ks test requires a nonempty sample"));
    }
    let law = RadialDensity::new(*c, FlatFamily::BallRestricted { h })?;
    let mut sorted = distances.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("distances are finite"));
    let values = law.cdf_batch(&sorted)?;
    ks_report_from_sorted_cdf(&values, alpha)
}

/// Result of the fixed-subspace check: the distance-law KS report plus the
/// worst containment residual of the intersection flats inside L₀.
#[derive(Debug, Clone)]
pub struct FixedSubspaceReport {
    pub gof: GoodnessOfFitReport,
    pub hit_fraction: f64,
    pub max_containment_residual: f64,
}

/// With a deterministic L₀ ∈ G(n,q), the law of d(o, E ∩ L₀) must equal the
/// law of the random-L case; checked by a one-sample KS test against the
/// ball-restricted CDF. Every intersection flat must lie inside L₀.
pub fn validate_fixed_subspace(
    c: &CaseTriple,
    l0: &LinearSubspace,
    profile: &WeightProfile,
    n_samples: usize,
    alpha: f64,
    rng: &mut RandomStream,
) -> Result<FixedSubspaceReport> {
    let h = match profile {
        WeightProfile::BallIndicator(h) => *h,
        _ => {
            return Err(Error::Refused(
                "the fixed-subspace check is implemented for ball-indicator weights".into(),
            ))
        }
    };
    if l0.dim() != c.q() || l0.ambient_dim() != c.n() {
        return Err(Error::domain(format!(
            "L0 must be a {}-dimensional subspace of R^{}",
            c.q(),
            c.n()
        )));
    }
    let (n, k) = (c.n(), c.flat_dim());
    let max_rejected = budget(n_samples);
    let mut distances = Vec::with_capacity(n_samples);
    let mut rejected = 0usize;
    let mut max_residual = 0.0f64;
    while distances.len() < n_samples {
        let e = sample_affine_hitting_ball(n, k, h, rng)?;
        match intersect_affine_linear(&e, l0, DEFAULT_TOL) {
            Ok(flat) => {
                let mut residual = l0.membership_residual(flat.foot());
                for j in 0..flat.dim() {
                    let col = flat.direction().frame().column(j).into_owned();
                    residual = residual.max(l0.membership_residual(&col));
                }
                max_residual = max_residual.max(residual);
                distances.push(flat.distance_to_origin());
            }
            Err(Error::EmptyIntersection { .. }) | Err(Error::DegenerateConfiguration { .. }) => {
                rejected += 1;
                if rejected > max_rejected {
                    return Err(Error::DegeneracyBudget {
                        rejected,
                        n_samples,
                    });
                }
            }
            Err(other) => return Err(other),
        }
    }
    let hit_fraction =
        distances.iter().filter(|&&d| d <= h).count() as f64 / n_samples as f64;
    let law = RadialDensity::new(*c, FlatFamily::BallRestricted { h })?;
    distances.sort_by(|a, b| a.partial_cmp(b).expect("distances are finite"));
    let cdf_values = law.cdf_batch(&distances)?;
    let gof = ks_report_from_sorted_cdf(&cdf_values, alpha)?;
    Ok(FixedSubspaceReport {
        gof,
        hit_fraction,
        max_containment_residual: max_residual,
    })
}

/// KS check of the tangent-model beta law: r^{−2} must follow
/// Beta((γ+1)/2, (n−q)/2).
pub fn validate_tangent_beta(
    c: &CaseTriple,
    n_samples: usize,
    alpha: f64,
    rng: &mut RandomStream,
) -> Result<GoodnessOfFitReport> {
    let sample = sample_intersection_distances(c, &Family::Tangent, n_samples, rng)?;
    tangent_beta_report_from_distances(c, &sample.distances, alpha)
}

/// The beta-law KS report for an existing tangent-model distance sample.
pub fn tangent_beta_report_from_distances(
    c: &CaseTriple,
    distances: &[f64],
    alpha: f64,
) -> Result<GoodnessOfFitReport> {
    let a = 0.5 * (c.gamma() as f64 + 1.0);
    let b = 0.5 * (c.n() - c.q()) as f64;
    let transformed: Vec<f64> = distances.iter().map(|&r| 1.0 / (r * r)).collect();
    ks_test(
        &transformed,
        |x| specfun::beta_regularized(x.clamp(0.0, 1.0), a, b).unwrap_or(f64::NAN),
        alpha,
    )
}

/// Hypotheses of the multiple-intersection extension: ℓ linear subspaces of
/// dimensions q₁..q_ℓ and m flats of dimensions p₁..p_m with
/// q = Σqᵢ − (ℓ−1)n ∈ {1,…,n−1} and Σpⱼ − (m−1)n = n − q + γ.
#[derive(Debug, Clone)]
pub struct MultipleIntersectionSpec {
    pub n: usize,
    pub q_dims: Vec<usize>,
    pub p_dims: Vec<usize>,
    pub gamma: usize,
}

impl MultipleIntersectionSpec {
    /// The effective triple (n, q, γ) implied by the dimension lists.
    pub fn case(&self) -> Result<CaseTriple> {
        let n = self.n;
        if self.q_dims.is_empty() || self.p_dims.is_empty() {
            return Err(Error::domain("need at least one linear and one flat factor"));
        }
        if self.q_dims.iter().any(|&q| q > n) || self.p_dims.iter().any(|&p| p > n) {
            return Err(Error::domain("factor dimensions must lie in 0..=n"));
        }
        let ell = self.q_dims.len();
        let m = self.p_dims.len();
        let q_sum: usize = self.q_dims.iter().sum();
        let p_sum: usize = self.p_dims.iter().sum();
        let q = q_sum
            .checked_sub((ell - 1) * n)
            .ok_or_else(|| Error::domain("q = Σqᵢ − (ℓ−1)n is negative"))?;
        let c = CaseTriple::new(n, q, self.gamma)?;
        let expected_flat = p_sum
            .checked_sub((m - 1) * n)
            .ok_or_else(|| Error::domain("Σpⱼ − (m−1)n is negative"))?;
        if expected_flat != c.flat_dim() {
            return Err(Error::domain(format!(
                "Σpⱼ − (m−1)n = {expected_flat} but n − q + γ = {}",
                c.flat_dim()
            )));
        }
        Ok(c)
    }

    /// The telescoped constant in front of the reduced integral:
    /// ω_{n+1}^m ω_{n−q+γ+1} / (ω_{n+1} ∏ⱼ ω_{pⱼ+1}).
    ///
    /// Re-derived from the iterated Crofton reduction: integrating out the
    /// j-th flat contributes ω_{n+1} ω_{s_j+1} / (ω_{p_j+1} ω_{s_{j−1}+1})
    /// where s_j = p₁+…+p_j − (j−1)n, and the s-terms telescope between
    /// s_m = n−q+γ and s₀ = n. The Monte Carlo sub-check adjudicates.
    pub fn crofton_constant(&self) -> Result<f64> {
        let c = self.case()?;
        let n = self.n;
        let m = self.p_dims.len();
        let mut log_c = (m as f64 - 1.0) * specfun::ln_omega(n + 1)
            + specfun::ln_omega(c.flat_dim() + 1);
        for &p in &self.p_dims {
            log_c -= specfun::ln_omega(p + 1);
        }
        Ok(log_c.exp())
    }
}

/// Report of the two multiple-intersection sub-checks.
#[derive(Debug, Clone)]
pub struct MultipleIntersectionReport {
    /// (a) L₁∩…∩L_ℓ is uniform on G(n,q): two-sample KS on the largest
    /// principal angle to a fixed reference, against direct ν_q samples.
    pub uniformity: GoodnessOfFitReport,
    /// (b) the Crofton constant: unnormalized mean of H^{n−q+γ}(∩Eⱼ ∩ Bⁿ)
    /// against the telescoped closed form times κ_n.
    pub crofton: ComparisonReport,
}

/// Check the multiple-intersection extension at desk scale.
pub fn validate_multiple_intersections(
    spec: &MultipleIntersectionSpec,
    n_samples: usize,
    alpha: f64,
    rng: &mut RandomStream,
) -> Result<MultipleIntersectionReport> {
    let c = spec.case()?;
    let n = spec.n;

    // (a) uniformity of the iterated linear intersection.
    let reference = sample_grassmannian(n, c.q(), rng)?;
    let gof_draws = n_samples.clamp(2_000, 20_000);
    let max_rejected = budget(gof_draws);
    let mut rejected = 0usize;
    let mut intersected = Vec::with_capacity(gof_draws);
    let mut direct = Vec::with_capacity(gof_draws);
    while intersected.len() < gof_draws {
        let mut current = sample_grassmannian(n, spec.q_dims[0], rng)?;
        let mut ok = true;
        for &qi in &spec.q_dims[1..] {
            let expected = current.dim() + qi - n;
            let li = sample_grassmannian(n, qi, rng)?;
            current = crate::subspaces::intersect_linear(&current, &li, DEFAULT_TOL)?;
            if current.dim() != expected {
                ok = false;
                break;
            }
        }
        if !ok || current.dim() != c.q() {
            rejected += 1;
            if rejected > max_rejected {
                return Err(Error::DegeneracyBudget {
                    rejected,
                    n_samples: gof_draws,
                });
            }
            continue;
        }
        intersected.push(principal_angles(&current, &reference)?[0]);
        let fresh = sample_grassmannian(n, c.q(), rng)?;
        direct.push(principal_angles(&fresh, &reference)?[0]);
    }
    let uniformity = ks_test_two_sample(&intersected, &direct, alpha)?;

    // (b) Crofton constant via the intersection volume inside the unit ball.
    let s = c.flat_dim();
    let kappa_s = specfun::kappa(s as u32)?;
    let mut unnormalize = 1.0;
    for &p in &spec.p_dims {
        unnormalize *= specfun::kappa((n - p) as u32)?;
    }
    let max_rejected = budget(n_samples);
    rejected = 0;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut kept = 0usize;
    while kept < n_samples {
        let mut flat: Option<AffineFlat> = None;
        let mut failed = false;
        for &p in &spec.p_dims {
            let e = sample_affine_hitting_ball(n, p, 1.0, rng)?;
            flat = match flat.take() {
                None => Some(e),
                Some(prev) => match intersect_affine(&prev, &e, DEFAULT_TOL) {
                    Ok(next) => Some(next),
                    Err(Error::EmptyIntersection { .. })
                    | Err(Error::DegenerateConfiguration { .. }) => {
                        failed = true;
                        break;
                    }
                    Err(other) => return Err(other),
                },
            };
        }
        if failed {
            rejected += 1;
            if rejected > max_rejected {
                return Err(Error::DegeneracyBudget {
                    rejected,
                    n_samples,
                });
            }
            continue;
        }
        let flat = flat.expect("at least one flat factor");
        debug_assert_eq!(flat.dim(), s);
        let d = flat.distance_to_origin();
        let volume = if d < 1.0 {
            kappa_s * (1.0 - d * d).powf(0.5 * s as f64)
        } else {
            0.0
        };
        let value = volume * unnormalize;
        sum += value;
        sum_sq += value * value;
        kept += 1;
    }
    let mean = sum / n_samples as f64;
    let variance = (sum_sq / n_samples as f64 - mean * mean).max(0.0);
    let estimate = MCEstimate {
        value: mean,
        std_error: (variance / n_samples as f64).sqrt(),
        n_samples,
        seed: rng.seed(),
        rejected,
    };
    let target = spec.crofton_constant()? * specfun::kappa(n as u32)?;
    let crofton = ComparisonReport::new(estimate, target);

    Ok(MultipleIntersectionReport {
        uniformity,
        crofton,
    })
}

/// Monte Carlo moment estimate compared to the closed-form/quadrature value.
///
/// Refused unless 2α lies strictly inside the finiteness window, so that the
/// estimator itself has finite variance; heavy-tailed means are pointed to
/// the quadrature moments instead.
pub fn estimate_moment(
    c: &CaseTriple,
    family: &Family,
    alpha_exp: f64,
    n_samples: usize,
    rng: &mut RandomStream,
) -> Result<ComparisonReport> {
    let target = moment_target_checked(c, family, alpha_exp)?;
    let sample = sample_intersection_distances(c, family, n_samples, rng)?;
    Ok(moment_report_from_distances(target, alpha_exp, &sample))
}

/// Moment comparison on an existing distance sample.
pub fn moment_report_from_distances(
    target: f64,
    alpha_exp: f64,
    sample: &DistanceSample,
) -> ComparisonReport {
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for &d in &sample.distances {
        let v = d.powf(alpha_exp);
        sum += v;
        sum_sq += v * v;
    }
    let estimate = mean_estimate(
        sum,
        sum_sq,
        sample.distances.len(),
        sample.seed,
        sample.rejected,
    );
    ComparisonReport::new(estimate, target)
}

/// The closed-form moment target, after enforcing the finite-variance policy
/// (2α strictly inside the finiteness window).
pub fn moment_target_checked(c: &CaseTriple, family: &Family, alpha_exp: f64) -> Result<f64> {
    let target = match family {
        Family::BallRestricted { h } => {
            if (*h - 1.0).abs() > 1e-12 {
                return Err(Error::Refused(
                    "moment targets are tabulated for the unit ball (h = 1)".into(),
                ));
            }
            let (lo, hi) = specfun::ball_moment_window(c);
            if alpha_exp.is_nan() || alpha_exp <= lo || alpha_exp >= hi {
                return Err(Error::Refused(format!(
                    "moment of order {alpha_exp} is infinite: window is ({lo}, {hi})"
                )));
            }
            if 2.0 * alpha_exp <= lo || 2.0 * alpha_exp >= hi {
                return Err(Error::Refused(format!(
                    "estimator variance is infinite for order {alpha_exp}: \
                     2α must lie inside ({lo}, {hi}); use the quadrature moment instead"
                )));
            }
            densities::moment_ball(c, alpha_exp)
        }
        Family::Tangent => {
            let hi = specfun::tangent_moment_bound(c);
            if alpha_exp.is_nan() || alpha_exp >= hi {
                return Err(Error::Refused(format!(
                    "moment of order {alpha_exp} is infinite: requires α < {hi}"
                )));
            }
            if 2.0 * alpha_exp >= hi {
                return Err(Error::Refused(format!(
                    "estimator variance is infinite for order {alpha_exp}: \
                     2α must stay below {hi}; use the beta-identity moment instead"
                )));
            }
            densities::moment_tangent(c, alpha_exp)
        }
        Family::FixedSubspace(_) => {
            return Err(Error::Refused(
                "moment estimation uses the random-L families".into(),
            ))
        }
    };
    Ok(target
        .finite()
        .expect("window checked above, moment is finite"))
}

/// Rejection rate of the KS test over `n_trials` synthetic datasets drawn
/// from the null itself (uniform via the probability integral transform).
pub fn ks_calibration_rejection_rate(
    n_trials: usize,
    samples_per_trial: usize,
    alpha: f64,
    rng: &mut RandomStream,
) -> Result<f64> {
    if n_trials == 0 || samples_per_trial == 0 {
        return Err(Error::domain("calibration needs trials and samples"));
    }
    let mut rejections = 0usize;
    for _ in 0..n_trials {
        let sample: Vec<f64> = (0..samples_per_trial)
            .map(|_| rng.next_uniform())
            .collect();
        let report = ks_test(&sample, |x| x.clamp(0.0, 1.0), alpha)?;
        if !report.pass {
            rejections += 1;
        }
    }
    Ok(rejections as f64 / n_trials as f64)
}
