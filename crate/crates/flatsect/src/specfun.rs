//! Special functions and the named constants of the subspace-intersection
//! distance laws.
//!
//! Everything here is a pure function of its arguments. Products of gamma
//! functions are accumulated as sums of `ln_gamma` values and exponentiated
//! once at the end, so the constants stay finite for ambient dimensions well
//! past the point where direct `Γ` products overflow (n ≈ 170).

use crate::error::{Error, Result};

/// ln(π) to full f64 precision.
pub(crate) const LN_PI: f64 = 1.144_729_885_849_400_2;

/// The dimension triple (n, q, γ): ambient dimension, linear-subspace
/// dimension and intersection dimension, with 1 ≤ q ≤ n−1 and 0 ≤ γ ≤ q−1.
///
/// The random affine flat has dimension n−q+γ ([`CaseTriple::flat_dim`]) so
/// that a generic intersection with a q-dimensional linear subspace is
/// γ-dimensional.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CaseTriple {
    n: usize,
    q: usize,
    gamma: usize,
}

impl CaseTriple {
    pub fn new(n: usize, q: usize, gamma: usize) -> Result<Self> {
        if n < 2 || q < 1 || q > n - 1 || gamma > q - 1 {
            return Err(Error::InvalidTriple { n, q, gamma });
        }
        Ok(CaseTriple { n, q, gamma })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn gamma(&self) -> usize {
        self.gamma
    }

    /// Dimension n−q+γ of the random affine flat.
    pub fn flat_dim(&self) -> usize {
        self.n - self.q + self.gamma
    }

    /// Codimension q−γ of the intersection inside the linear subspace.
    pub fn codim(&self) -> usize {
        self.q - self.gamma
    }
}

impl std::fmt::Display for CaseTriple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.n, self.q, self.gamma)
    }
}

// Lanczos approximation after Pugh ("An Analysis of the Lanczos Gamma
// Approximation", 2004, p. 116), as used by statrs. Accurate to ~16 digits.
const GAMMA_R: f64 = 10.900511;
const GAMMA_DK: [f64; 11] = [
    2.485_740_891_387_536e-5,
    1.051_423_785_817_219_7,
    -3.456_870_972_220_162_5,
    4.512_277_094_668_948,
    -2.982_852_253_235_766_4,
    1.056_397_115_771_267,
    -1.954_287_731_916_458_7e-1,
    1.709_705_434_044_412e-2,
    -5.719_261_174_043_057e-4,
    4.633_994_733_599_057e-6,
    -2.719_949_084_886_077_2e-9,
];
const LN_2_SQRT_E_OVER_PI: f64 = 0.620_782_237_635_245_2;

fn ln_gamma_unchecked(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let s = GAMMA_DK
        .iter()
        .enumerate()
        .skip(1)
        .fold(GAMMA_DK[0], |s, (i, &dk)| s + dk / (x + i as f64 - 1.0));
    s.ln() + LN_2_SQRT_E_OVER_PI + (x - 0.5) * ((x - 0.5 + GAMMA_R) / std::f64::consts::E).ln()
}

/// Natural logarithm of the gamma function, x > 0.
pub fn log_gamma(x: f64) -> Result<f64> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::domain(format!("log_gamma requires x > 0, got {x}")));
    }
    Ok(ln_gamma_unchecked(x))
}

/// ln ω_k for k ≥ 1, with ω_k = 2π^{k/2}/Γ(k/2) the surface content of S^{k-1}.
pub(crate) fn ln_omega(k: usize) -> f64 {
    debug_assert!(k >= 1);
    std::f64::consts::LN_2 + 0.5 * k as f64 * LN_PI - ln_gamma_unchecked(0.5 * k as f64)
}

/// Surface content ω_n = 2π^{n/2}/Γ(n/2) of the unit sphere S^{n-1}.
pub fn omega(n: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("omega requires n >= 1"));
    }
    Ok(ln_omega(n as usize).exp())
}

/// Volume κ_n = π^{n/2}/Γ(n/2+1) of the unit ball; κ_0 = 1 by convention.
pub fn kappa(n: u32) -> Result<f64> {
    Ok(kappa_unchecked(n as usize))
}

pub(crate) fn kappa_unchecked(n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    (0.5 * n as f64 * LN_PI - ln_gamma_unchecked(0.5 * n as f64 + 1.0)).exp()
}

/// Complete beta function B(a,b) = Γ(a)Γ(b)/Γ(a+b), a, b > 0.
pub fn beta_complete(a: f64, b: f64) -> Result<f64> {
    Ok(ln_beta(a, b)?.exp())
}

/// ln B(a,b), a, b > 0.
pub fn ln_beta(a: f64, b: f64) -> Result<f64> {
    if a.is_nan() || b.is_nan() || a <= 0.0 || b <= 0.0 {
        return Err(Error::domain(format!(
            "beta requires positive parameters, got a={a}, b={b}"
        )));
    }
    Ok(ln_gamma_unchecked(a) + ln_gamma_unchecked(b) - ln_gamma_unchecked(a + b))
}

const BETA_CF_MAX_ITER: usize = 300;
const BETA_CF_EPS: f64 = 1e-15;

// Continued fraction for the regularized incomplete beta function
// (modified Lentz), valid for x < (a+1)/(a+b+2).
fn beta_cf(x: f64, a: f64, b: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=BETA_CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < BETA_CF_EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta function I_x(a,b) = B(x;a,b)/B(a,b).
pub fn beta_regularized(x: f64, a: f64, b: f64) -> Result<f64> {
    if a.is_nan() || b.is_nan() || a <= 0.0 || b <= 0.0 {
        return Err(Error::domain(format!(
            "beta_regularized requires positive parameters, got a={a}, b={b}"
        )));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(format!(
            "beta_regularized requires x in [0,1], got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    let ln_front = a * x.ln() + b * (1.0 - x).ln() - ln_beta(a, b)?;
    // Symmetry switch keeps the continued fraction in its fast-convergence
    // region on either side of x = (a+1)/(a+b+2).
    let value = if x < (a + 1.0) / (a + b + 2.0) {
        ln_front.exp() * beta_cf(x, a, b) / a
    } else {
        1.0 - ln_front.exp() * beta_cf(1.0 - x, b, a) / b
    };
    Ok(value.clamp(0.0, 1.0))
}

/// Unnormalized incomplete beta integral B(x;a,b) = ∫_0^x t^{a-1}(1-t)^{b-1} dt.
pub fn beta_incomplete(x: f64, a: f64, b: f64) -> Result<f64> {
    Ok(beta_regularized(x, a, b)? * beta_complete(a, b)?)
}

/// The constant D(n,q,γ) = ω_{γ+1} ω_{q−γ} ω_{n−q} / (ω_{n−q+γ+1} ω_{n−γ})
/// in front of the radial weight of the general transformation formula.
pub fn d_constant(c: &CaseTriple) -> f64 {
    let (n, q, g) = (c.n(), c.q(), c.gamma());
    (ln_omega(g + 1) + ln_omega(q - g) + ln_omega(n - q)
        - ln_omega(n - q + g + 1)
        - ln_omega(n - g))
    .exp()
}

/// The constant for the unrestricted invariant flat measure,
/// D̃(n,q,γ) = ω_{n+1} ω_{γ+1} ω_{q−γ} / (ω_{n−q+γ+1} ω_{n−γ} ω_{q+1}).
pub fn d_tilde_constant(c: &CaseTriple) -> f64 {
    let (n, q, g) = (c.n(), c.q(), c.gamma());
    (ln_omega(n + 1) + ln_omega(g + 1) + ln_omega(q - g)
        - ln_omega(n - q + g + 1)
        - ln_omega(n - g)
        - ln_omega(q + 1))
    .exp()
}

/// Moment constant A(n,k,r,α) = ∫ [F,L]^α ν_k(dL) over G(n,k) for fixed
/// F ∈ G(n,r), as a product of gamma ratios. Interpreted as 1 when r = n.
pub fn hug_moment_constant(n: usize, k: usize, r: usize, alpha: f64) -> Result<f64> {
    if !(1..=n).contains(&k) || !(1..=n).contains(&r) || r + k < n {
        return Err(Error::domain(format!(
            "hug_moment_constant requires r,k in 1..=n with r+k >= n, got n={n}, k={k}, r={r}"
        )));
    }
    if alpha < 0.0 {
        return Err(Error::domain("hug_moment_constant requires alpha >= 0"));
    }
    let mut log_sum = 0.0;
    for i in 0..(n - r) {
        let ni = (n - i) as f64;
        let ki = (k - i) as f64;
        log_sum += ln_gamma_unchecked(0.5 * ni) + ln_gamma_unchecked(0.5 * (ki + alpha))
            - ln_gamma_unchecked(0.5 * (ni + alpha))
            - ln_gamma_unchecked(0.5 * ki);
    }
    Ok(log_sum.exp())
}

/// Moment constant a(n,p,q,α) for the Grassmannian of q-subspaces through a
/// fixed axis:  ∫ [L,M]^α ν_q^{span u}(dL) = a(n,p,q,α) [u,M]^α  for any
/// u ∈ S^{n-1} and M ∈ G(n,p) with p+q ≤ n.
///
/// Equals `hug_moment_constant(n-1, n-q, n-p-1, alpha)`.
pub fn axis_moment_constant(n: usize, p: usize, q: usize, alpha: f64) -> Result<f64> {
    if !(1..n).contains(&p) || !(1..n).contains(&q) || p + q > n {
        return Err(Error::domain(format!(
            "axis_moment_constant requires p,q in 1..=n-1 with p+q <= n, got n={n}, p={p}, q={q}"
        )));
    }
    if alpha < 0.0 {
        return Err(Error::domain("axis_moment_constant requires alpha >= 0"));
    }
    let mut log_sum = 0.0;
    for i in 1..=p {
        let ni = (n - i) as f64;
        let mi = (n - q - i + 1) as f64;
        log_sum += ln_gamma_unchecked(0.5 * ni) + ln_gamma_unchecked(0.5 * (mi + alpha))
            - ln_gamma_unchecked(0.5 * (ni + alpha))
            - ln_gamma_unchecked(0.5 * mi);
    }
    Ok(log_sum.exp())
}

pub(crate) fn ln_b_coefficient(i: usize, j: usize) -> f64 {
    debug_assert!(1 <= j && j <= i);
    let mut s = 0.0;
    for t in (i - j + 1)..=i {
        s += ln_omega(t);
    }
    for t in 1..=j {
        s -= ln_omega(t);
    }
    s
}

/// b_{i,j} = ω_{i−j+1} ⋯ ω_i / (ω_1 ⋯ ω_j), for 1 ≤ j ≤ i.
pub fn b_coefficient(i: usize, j: usize) -> Result<f64> {
    if j < 1 || j > i {
        return Err(Error::domain(format!(
            "b_coefficient requires 1 <= j <= i, got i={i}, j={j}"
        )));
    }
    Ok(ln_b_coefficient(i, j).exp())
}

/// b̄ = b_{n,n−γ} b_{n−γ,n−q} b_{n−γ,q−γ} / (b_{n,n−q} b_{n,q−γ}), the
/// flat-pivot constant from the affine transformation step.
pub fn bar_b(c: &CaseTriple) -> f64 {
    let (n, q, g) = (c.n(), c.q(), c.gamma());
    (ln_b_coefficient(n, n - g) + ln_b_coefficient(n - g, n - q) + ln_b_coefficient(n - g, q - g)
        - ln_b_coefficient(n, n - q)
        - ln_b_coefficient(n, q - g))
    .exp()
}

/// Probability p_{n,q,γ} = ω_{γ+1} ω_{n+1} / (ω_{q+1} ω_{n−q+γ+1}) that the
/// intersection flat hits the unit ball.
///
/// The equivalent gamma-ratio form is exposed as
/// [`hit_probability_gamma_form`]; the two must agree to 1e-12 relative.
pub fn hit_probability(c: &CaseTriple) -> f64 {
    let (n, q, g) = (c.n(), c.q(), c.gamma());
    let p = (ln_omega(g + 1) + ln_omega(n + 1) - ln_omega(q + 1) - ln_omega(n - q + g + 1)).exp();
    debug_assert!({
        let pg = hit_probability_gamma_form(c);
        (p - pg).abs() <= 1e-12 * p
    });
    p
}

/// p_{n,q,γ} written as Γ((q+1)/2) Γ((n−q+γ+1)/2) / (Γ((γ+1)/2) Γ((n+1)/2)).
pub fn hit_probability_gamma_form(c: &CaseTriple) -> f64 {
    let (n, q, g) = (c.n() as f64, c.q() as f64, c.gamma() as f64);
    (ln_gamma_unchecked(0.5 * (q + 1.0)) + ln_gamma_unchecked(0.5 * (n - q + g + 1.0))
        - ln_gamma_unchecked(0.5 * (g + 1.0))
        - ln_gamma_unchecked(0.5 * (n + 1.0)))
    .exp()
}

/// Stirling leading term of p_{n,q,γ} for fixed q, γ as n → ∞:
/// (Γ((q+1)/2)/Γ((γ+1)/2)) (2/n)^{(q−γ)/2}, equivalently
/// (ω_{γ+1}/ω_{q+1}) (2π/n)^{(q−γ)/2}.
///
/// The ratio `hit_probability / hit_probability_asymptotic` tends to 1.
pub fn hit_probability_asymptotic(c: &CaseTriple) -> f64 {
    let (n, q, g) = (c.n() as f64, c.q() as f64, c.gamma() as f64);
    (ln_gamma_unchecked(0.5 * (q + 1.0)) - ln_gamma_unchecked(0.5 * (g + 1.0))
        + 0.5 * (q - g) * (std::f64::consts::LN_2 - n.ln()))
    .exp()
}

/// Finiteness window (lo, hi) for moments E d(o,E∩L)^α in the ball-restricted
/// model: finite iff γ−q < α < γ+1.
pub fn ball_moment_window(c: &CaseTriple) -> (f64, f64) {
    (
        c.gamma() as f64 - c.q() as f64,
        c.gamma() as f64 + 1.0,
    )
}

/// Upper finiteness bound for moments in the tangent model: finite iff α < γ+1.
pub fn tangent_moment_bound(c: &CaseTriple) -> f64 {
    c.gamma() as f64 + 1.0
}
