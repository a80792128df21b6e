//! Acceptance suite: every contract of the library checked end to end at
//! full sample sizes, one pass/fail line per criterion.
//!
//! Expected values that have independent derivations are recomputed here
//! with test-owned machinery (adaptive Simpson quadrature, hand ω-products),
//! not taken from the code paths under test.

use std::f64::consts::PI;

use flatsect::densities::{self, WeightProfile};
use flatsect::sampling::{sample_grassmannian, RandomStream};
use flatsect::specfun;
use flatsect::subspaces::LinearSubspace;
use flatsect::suite::{run_suite, sample_distances_chunked, to_json_lines, SuiteConfig};
use flatsect::validation::{
    ball_distance_ks_report, hit_estimate_from_distances, ks_calibration_rejection_rate,
    moment_report_from_distances, tangent_beta_report_from_distances,
    transformation_points_from_distances, validate_fixed_subspace, validate_lemma_axis_moment,
    validate_multiple_intersections, DistanceSample, Family, MultipleIntersectionSpec,
};
use flatsect::CaseTriple;

const SEED: u64 = 42;
const CHUNKS: usize = 8;
const ALPHA: f64 = 0.01;

fn triple(n: usize, q: usize, g: usize) -> CaseTriple {
    CaseTriple::new(n, q, g).unwrap()
}

fn draw(c: &CaseTriple, family: &Family, stream_base: u64, total: usize) -> DistanceSample {
    sample_distances_chunked(SEED, stream_base, CHUNKS, 0, c, family, total).unwrap()
}

// Test-owned adaptive Simpson quadrature, independent of the library's
// Gauss-Kronrod integrator.
fn simpson_rule<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    (b - a) / 6.0 * (f(a) + 4.0 * f(c) + f(b))
}

fn simpson_rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, eps: f64, whole: f64, depth: u32) -> f64 {
    let c = 0.5 * (a + b);
    let left = simpson_rule(f, a, c);
    let right = simpson_rule(f, c, b);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * eps {
        left + right + (left + right - whole) / 15.0
    } else {
        simpson_rec(f, a, c, 0.5 * eps, left, depth - 1)
            + simpson_rec(f, c, b, 0.5 * eps, right, depth - 1)
    }
}

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, eps: f64) -> f64 {
    let whole = simpson_rule(&f, a, b);
    simpson_rec(&f, a, b, eps, whole, 48)
}

fn status(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

#[test]
fn criterion_01_hit_probabilities() {
    // Closed-form targets recomputed from ω-products by hand:
    // p = ω_{γ+1} ω_{n+1} / (ω_{q+1} ω_{n−q+γ+1}).
    let cases: [(usize, usize, usize, f64); 6] = [
        (2, 1, 0, 2.0 / PI),
        (3, 2, 1, PI / 4.0),
        (3, 1, 0, 0.5),
        (8, 5, 2, 128.0 / (105.0 * PI)),
        (9, 5, 3, 0.5),
        (9, 6, 1, 15.0 * PI / 256.0),
    ];
    let mut all = true;
    for (i, (n, q, g, target)) in cases.into_iter().enumerate() {
        let c = triple(n, q, g);
        let sample = draw(
            &c,
            &Family::BallRestricted { h: 1.0 },
            10_000 + 100 * i as u64,
            1_000_000,
        );
        let est = hit_estimate_from_distances(&sample);
        let pass = est.within_three_sigma(target);
        println!(
            "criterion 1 [{}] hit probability {c}: estimate {:.6} ± {:.6} vs {:.6}",
            status(pass),
            est.value,
            est.std_error,
            target
        );
        all &= pass;
        assert!(
            sample.rejected as f64 <= 1e-4 * sample.distances.len() as f64,
            "degeneracy budget exceeded at {c}"
        );
    }
    assert!(all, "criterion 1 failed");
}

#[test]
fn criterion_02_distance_law_ks_and_calibration() {
    let mut all = true;
    for (i, (n, q, g)) in [(2, 1, 0), (3, 2, 1), (3, 1, 0), (8, 5, 2), (9, 5, 3), (9, 6, 1)]
        .into_iter()
        .enumerate()
    {
        let c = triple(n, q, g);
        let sample = draw(
            &c,
            &Family::BallRestricted { h: 1.0 },
            20_000 + 100 * i as u64,
            100_000,
        );
        let gof = ball_distance_ks_report(&c, 1.0, &sample.distances, ALPHA).unwrap();
        println!(
            "criterion 2 [{}] distance law {c}: KS {:.5} (critical {:.5})",
            status(gof.pass),
            gof.ks_statistic,
            gof.critical_value
        );
        all &= gof.pass;
    }
    let mut rng = RandomStream::new(SEED, 900_000);
    let rate = ks_calibration_rejection_rate(200, 2_000, ALPHA, &mut rng).unwrap();
    let calibrated = (ALPHA / 3.0..=3.0 * ALPHA).contains(&rate);
    println!(
        "criterion 2 [{}] meta-calibration: rejection rate {:.4} in [{:.4}, {:.4}]",
        status(calibrated),
        rate,
        ALPHA / 3.0,
        3.0 * ALPHA
    );
    assert!(all && calibrated, "criterion 2 failed");
}

#[test]
fn criterion_03_tangent_beta_law() {
    let mut all = true;
    for (i, (n, q, g)) in [(2, 1, 0), (3, 1, 0), (3, 2, 1), (9, 5, 3)]
        .into_iter()
        .enumerate()
    {
        let c = triple(n, q, g);
        let sample = draw(&c, &Family::Tangent, 30_000 + 100 * i as u64, 100_000);
        let gof = tangent_beta_report_from_distances(&c, &sample.distances, ALPHA).unwrap();
        println!(
            "criterion 3 [{}] tangent beta {c}: KS {:.5} (critical {:.5})",
            status(gof.pass),
            gof.ks_statistic,
            gof.critical_value
        );
        all &= gof.pass;
    }
    assert!(all, "criterion 3 failed");
}

#[test]
fn criterion_04_moments() {
    let mut all = true;
    // Monte Carlo means with finite estimator variance.
    for (i, (n, q, g, target, what)) in [
        (8usize, 5usize, 2usize, 4.0 / PI, "4/pi"),
        (9, 5, 3, 16.0 / 15.0, "16/15"),
    ]
    .into_iter()
    .enumerate()
    {
        let c = triple(n, q, g);
        let sample = draw(
            &c,
            &Family::BallRestricted { h: 1.0 },
            40_000 + 100 * i as u64,
            200_000,
        );
        let report = moment_report_from_distances(target, 1.0, &sample);
        println!(
            "criterion 4 [{}] MC mean {c}: {:.5} ± {:.5} vs {what}",
            status(report.pass),
            report.estimate.value,
            report.estimate.std_error
        );
        all &= report.pass;
    }
    // Quadrature moment at (3,2,1) reproduces pi/4 to 1e-6.
    let c = triple(3, 2, 1);
    let quad_mean = densities::moment_ball(&c, 1.0).finite().unwrap();
    let quad_ok = (quad_mean - PI / 4.0).abs() <= 1e-6;
    println!(
        "criterion 4 [{}] quadrature mean (3,2,1): {:.9} vs pi/4 = {:.9}",
        status(quad_ok),
        quad_mean,
        PI / 4.0
    );
    // Tangent mean at (3,2,1): closed form (omega-ratio route) against a
    // test-owned Simpson oracle over the density, via r = sec(t):
    // ∫ r g(r) dr = ∫ g(sec t) sec t · sec t tan t dt on [0, π/2).
    let closed = densities::moment_tangent(&c, 1.0).finite().unwrap();
    let oracle = simpson(
        |t: f64| {
            let sec = 1.0 / t.cos();
            densities::density_tangent(&c, sec).unwrap() * sec * sec * t.tan()
        },
        0.0,
        std::f64::consts::FRAC_PI_2 - 1e-9,
        1e-9,
    );
    let tangent_ok = (closed - oracle).abs() <= 1e-6 && (closed - PI / 2.0).abs() <= 1e-12;
    println!(
        "criterion 4 [{}] tangent mean (3,2,1): closed {:.9}, quadrature oracle {:.9}, pi/2 = {:.9}",
        status(tangent_ok),
        closed,
        oracle,
        PI / 2.0
    );
    assert!(all && quad_ok && tangent_ok, "criterion 4 failed");
}

#[test]
fn criterion_05_axis_moment_lemma() {
    // At least 10 random (u, M) configurations across small dimensions.
    let configs: [(usize, usize, usize, f64); 12] = [
        (3, 1, 1, 1.0),
        (3, 1, 2, 1.0),
        (3, 1, 2, 2.0),
        (4, 1, 2, 1.0),
        (4, 1, 2, 2.0),
        (4, 2, 2, 2.0),
        (4, 1, 3, 3.0),
        (5, 2, 2, 1.0),
        (5, 1, 3, 2.0),
        (5, 2, 3, 3.0),
        (5, 1, 4, 1.0),
        (5, 3, 2, 2.0),
    ];
    let mut all = true;
    for (i, &(n, p, q, alpha)) in configs.iter().enumerate() {
        let mut rng = RandomStream::new(SEED, 910_000 + i as u64);
        let m = sample_grassmannian(n, p, &mut rng).unwrap();
        let u = rng.unit_vector(n);
        let report =
            validate_lemma_axis_moment(n, p, q, alpha, &u, &m, 100_000, &mut rng).unwrap();
        println!(
            "criterion 5 [{}] axis moment n={n} p={p} q={q} alpha={alpha}: {:.6} ± {:.6} vs {:.6}",
            status(report.pass),
            report.estimate.value,
            report.estimate.std_error,
            report.target
        );
        all &= report.pass;
    }
    // Exact identity with the fixed-subspace moment constant.
    let mut worst = 0.0f64;
    for n in 2..=10usize {
        for p in 1..n.saturating_sub(1) {
            for q in 1..n {
                if p + q > n {
                    continue;
                }
                for alpha in [0.0, 1.0, 2.0, q as f64] {
                    let a = specfun::axis_moment_constant(n, p, q, alpha).unwrap();
                    let h = specfun::hug_moment_constant(n - 1, n - q, n - p - 1, alpha).unwrap();
                    worst = worst.max((a - h).abs() / h);
                }
            }
        }
    }
    let identity_ok = worst <= 1e-12;
    println!(
        "criterion 5 [{}] substitution identity: worst relative deviation {:.3e}",
        status(identity_ok),
        worst
    );
    assert!(all && identity_ok, "criterion 5 failed");
}

#[test]
fn criterion_06_constant_algebra() {
    // c2 identity over all triples with n <= 12.
    let mut worst_c2 = 0.0f64;
    for n in 2..=12usize {
        for q in 1..n {
            for g in 0..q {
                let c = triple(n, q, g);
                let omega = |k: usize| specfun::omega(k as u32).unwrap();
                let c1 = specfun::axis_moment_constant(n - g, n - q, q - g, (g + 1) as f64)
                    .unwrap()
                    * omega(q - g)
                    / omega(n - g);
                let c2 = specfun::bar_b(&c) * c1 * omega(n - q) * omega(q - g) / omega(n - g);
                worst_c2 = worst_c2.max((c2 - specfun::d_constant(&c)).abs() / specfun::d_constant(&c));
            }
        }
    }
    let c2_ok = worst_c2 <= 1e-10;
    println!(
        "criterion 6 [{}] pivot-constant identity: worst relative deviation {:.3e}",
        status(c2_ok),
        worst_c2
    );

    let mut worst_forms = 0.0f64;
    for n in 2..=50usize {
        for q in 1..n {
            for g in 0..q {
                let c = triple(n, q, g);
                let a = specfun::hit_probability(&c);
                let b = specfun::hit_probability_gamma_form(&c);
                worst_forms = worst_forms.max((a - b).abs() / a);
            }
        }
    }
    let forms_ok = worst_forms <= 1e-12;
    println!(
        "criterion 6 [{}] hit-probability forms: worst relative deviation {:.3e}",
        status(forms_ok),
        worst_forms
    );

    let mut worst_beta = 0.0f64;
    for m in 1..=20u32 {
        for k in 1..=20u32 {
            let lhs = specfun::beta_complete(0.5 * m as f64, 0.5 * k as f64).unwrap();
            let rhs = 2.0 * specfun::omega(m + k).unwrap()
                / (specfun::omega(m).unwrap() * specfun::omega(k).unwrap());
            worst_beta = worst_beta.max((lhs - rhs).abs() / rhs);
        }
    }
    let beta_ok = worst_beta <= 1e-12;
    println!(
        "criterion 6 [{}] beta-omega identity: worst relative deviation {:.3e}",
        status(beta_ok),
        worst_beta
    );
    assert!(c2_ok && forms_ok && beta_ok, "criterion 6 failed");
}

#[test]
fn criterion_07_two_sided_transformation_checks() {
    let grid = [0.25f64, 1.0, 2.0, 5.0];
    let mut all = true;
    for (i, (n, q, g)) in [(2, 1, 0), (3, 2, 1), (4, 2, 1)].into_iter().enumerate() {
        for (j, h) in [0.5f64, 1.0, 2.0].into_iter().enumerate() {
            let c = triple(n, q, g);
            let sample = draw(
                &c,
                &Family::BallRestricted { h },
                70_000 + 1_000 * i as u64 + 100 * j as u64,
                1_000_000,
            );
            let points = transformation_points_from_distances(&c, h, &grid, &sample).unwrap();
            let pass = points.iter().all(|p| p.pass);
            let worst = points
                .iter()
                .map(|p| {
                    if p.lhs.std_error > 0.0 {
                        (p.lhs.value - p.rhs).abs() / p.lhs.std_error
                    } else {
                        (p.lhs.value - p.rhs).abs()
                    }
                })
                .fold(0.0f64, f64::max);
            println!(
                "criterion 7 [{}] transformation formula {c}, h={h}: worst |z| = {:.2}",
                status(pass),
                worst
            );
            all &= pass;
        }
    }
    assert!(all, "criterion 7 failed");
}

#[test]
fn criterion_08_fixed_subspace_variant() {
    let mut all = true;
    for (n, q, g) in [(2, 1, 0), (3, 2, 1)] {
        let c = triple(n, q, g);
        let l0 = LinearSubspace::coordinate(n, q).unwrap();
        let profile = WeightProfile::ball_indicator(1.0).unwrap();
        let mut rng = RandomStream::new(SEED, 920_000 + n as u64);
        let report =
            validate_fixed_subspace(&c, &l0, &profile, 100_000, ALPHA, &mut rng).unwrap();
        let pass = report.gof.pass && report.max_containment_residual <= 1e-8;
        println!(
            "criterion 8 [{}] fixed subspace {c}: KS {:.5} (critical {:.5}), containment {:.2e}",
            status(pass),
            report.gof.ks_statistic,
            report.gof.critical_value,
            report.max_containment_residual
        );
        all &= pass;
    }
    assert!(all, "criterion 8 failed");
}

#[test]
fn criterion_09_multiple_intersections() {
    // (a) uniformity: two random planes in R^3 meet in a uniform line.
    let spec = MultipleIntersectionSpec {
        n: 3,
        q_dims: vec![2, 2],
        p_dims: vec![2],
        gamma: 0,
    };
    let mut rng = RandomStream::new(SEED, 930_000);
    let report = validate_multiple_intersections(&spec, 50_000, ALPHA, &mut rng).unwrap();
    let uniform_ok = report.uniformity.pass;
    println!(
        "criterion 9 [{}] uniformity of plane-plane intersection: KS {:.5} (critical {:.5})",
        status(uniform_ok),
        report.uniformity.ks_statistic,
        report.uniformity.critical_value
    );

    // (b) Crofton constants. Targets recomputed by hand:
    // single factor in R^2 -> κ_2 = π; two planes in R^3 ->
    // (ω_4 ω_2 / ω_3²) κ_3 = (π/4)(4π/3) = π²/3.
    let mut crofton_ok = true;
    for (spec, target, what) in [
        (
            MultipleIntersectionSpec {
                n: 2,
                q_dims: vec![1],
                p_dims: vec![1],
                gamma: 0,
            },
            PI,
            "line measure of the unit disk",
        ),
        (
            MultipleIntersectionSpec {
                n: 3,
                q_dims: vec![2],
                p_dims: vec![2, 2],
                gamma: 0,
            },
            PI * PI / 3.0,
            "two-plane telescoped constant",
        ),
    ] {
        let mut rng = RandomStream::new(SEED, 940_000 + spec.n as u64);
        let report = validate_multiple_intersections(&spec, 500_000, ALPHA, &mut rng).unwrap();
        assert!(
            (report.crofton.target - target).abs() <= 1e-10 * target,
            "telescoped constant mismatch: {} vs hand value {}",
            report.crofton.target,
            target
        );
        println!(
            "criterion 9 [{}] Crofton {what}: {:.5} ± {:.5} vs {:.5}",
            status(report.crofton.pass),
            report.crofton.estimate.value,
            report.crofton.estimate.std_error,
            target
        );
        crofton_ok &= report.crofton.pass;
    }
    assert!(uniform_ok && crofton_ok, "criterion 9 failed");
}

#[test]
fn criterion_10_asymptotics() {
    let mut all = true;
    for (q, g) in [(1usize, 0usize), (5, 3)] {
        let c = triple(1000, q, g);
        let ratio = specfun::hit_probability(&c) / specfun::hit_probability_asymptotic(&c);
        let pass = (0.98..=1.02).contains(&ratio);
        println!(
            "criterion 10 [{}] hit-probability ratio at n=1000, (q,gamma)=({q},{g}): {:.5}",
            status(pass),
            ratio
        );
        all &= pass;
    }
    let c = triple(400, 2, 1);
    let mean = densities::moment_tangent(&c, 1.0).finite().unwrap();
    let ratio = mean / (400f64.sqrt() * densities::mean_tangent_limit(1).unwrap());
    let pass = (ratio - 1.0).abs() <= 0.02;
    println!(
        "criterion 10 [{}] tangent-mean ratio at n=400, gamma=1: {:.5}",
        status(pass),
        ratio
    );
    assert!(all && pass, "criterion 10 failed");
}

#[test]
fn criterion_11_determinism() {
    let cfg = SuiteConfig {
        seed: SEED,
        alpha: ALPHA,
        base_samples: 4_000,
        chunks: 4,
        threads: 0,
        tamper: false,
    };
    let first = to_json_lines(&run_suite(&cfg).unwrap());
    let second = to_json_lines(&run_suite(&cfg).unwrap());
    let pass = first == second;
    println!(
        "criterion 11 [{}] byte-identical reports on rerun ({} bytes)",
        status(pass),
        first.len()
    );
    assert!(pass, "criterion 11 failed");

    // The chunk layout is part of the configuration: a different layout is a
    // different (still deterministic) run.
    let mut other = cfg.clone();
    other.chunks = 2;
    let third = to_json_lines(&run_suite(&other).unwrap());
    assert_ne!(first, third);
}
