//! Seedable samplers for every distribution the harness draws from: Haar
//! rotations, uniform Grassmannians, ball-restricted invariant affine flats,
//! sphere-tangent flats, and relative Grassmannians through a fixed subspace.
//!
//! Randomness flows from a [`RandomStream`] keyed by (seed, stream_id). The
//! generator is a counter-based stream cipher, so distinct stream ids give
//! statistically independent substreams and Monte Carlo chunks can map chunk
//! index → stream id deterministically. Gaussian variates use the polar
//! Box–Muller method; apart from `ln` and `sqrt` no math-library calls sit in
//! the sampler hot loop, keeping draw sequences bit-stable across platforms.

use nalgebra::{DMatrix, DVector};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::subspaces::{complement, AffineFlat, LinearSubspace};

/// Reproducible random stream: identical (seed, stream_id) pairs produce
/// identical draw sequences.
#[derive(Debug, Clone)]
pub struct RandomStream {
    rng: ChaCha12Rng,
    seed: u64,
    stream_id: u64,
    spare_gaussian: Option<f64>,
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RandomStream {
            rng,
            seed,
            stream_id,
            spare_gaussian: None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// A fresh stream with the same seed and a different substream selector.
    pub fn substream(&self, stream_id: u64) -> Self {
        RandomStream::new(self.seed, stream_id)
    }

    /// Uniform in [0, 1), 53-bit resolution.
    pub fn next_uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal variate via the polar Box–Muller method.
    pub fn next_gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare_gaussian.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.next_uniform() - 1.0;
            let v = 2.0 * self.next_uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let m = (-2.0 * s.ln() / s).sqrt();
                self.spare_gaussian = Some(v * m);
                return u * m;
            }
        }
    }

    pub fn gaussian_vector(&mut self, n: usize) -> DVector<f64> {
        DVector::from_fn(n, |_, _| self.next_gaussian())
    }

    pub fn gaussian_matrix(&mut self, rows: usize, cols: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m[(i, j)] = self.next_gaussian();
            }
        }
        m
    }

    /// Uniform direction on S^{d-1}.
    pub fn unit_vector(&mut self, d: usize) -> DVector<f64> {
        loop {
            let g = self.gaussian_vector(d);
            let norm = g.norm();
            if norm > 1e-150 {
                return g / norm;
            }
        }
    }
}

/// Haar-distributed rotation in SO_n.
///
/// QR of a Gaussian matrix with the R-diagonal sign correction gives the
/// invariant distribution on O_n; a final sign flip confined to the last
/// column lands it on the determinant-(+1) component. Orthogonalizing a
/// Gaussian matrix without the sign correction is not Haar.
pub fn sample_rotation(n: usize, rng: &mut RandomStream) -> Result<DMatrix<f64>> {
    if n == 0 {
        return Err(Error::domain("sample_rotation requires n >= 1"));
    }
    let g = rng.gaussian_matrix(n, n);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for i in 0..n {
        if r[(i, i)] < 0.0 {
            for row in 0..n {
                q[(row, i)] = -q[(row, i)];
            }
        }
    }
    if q.determinant() < 0.0 {
        for row in 0..n {
            q[(row, n - 1)] = -q[(row, n - 1)];
        }
    }
    Ok(q)
}

/// Uniform (invariant) random k-dimensional linear subspace of R^n, realized
/// as the span of an n×k Gaussian matrix.
pub fn sample_grassmannian(n: usize, k: usize, rng: &mut RandomStream) -> Result<LinearSubspace> {
    if k > n {
        return Err(Error::domain(format!(
            "sample_grassmannian requires k <= n, got k={k}, n={n}"
        )));
    }
    if k == 0 {
        return Ok(LinearSubspace::zero(n));
    }
    if k == n {
        return Ok(LinearSubspace::full(n));
    }
    let g = rng.gaussian_matrix(n, k);
    // A Gaussian n×k matrix is almost surely full rank; plain Householder QR
    // yields an orthonormal basis of its span.
    Ok(LinearSubspace::from_frame_unchecked(g.qr().q()))
}

// Uniform k-subspace together with its orthogonal complement, from a single
// full QR of an n×n Gaussian matrix: the leading k columns of Q span the
// span of the first k Gaussian columns (uniform on G(n,k)), the trailing
// n−k columns are exactly its complement.
fn sample_split(n: usize, k: usize, rng: &mut RandomStream) -> (LinearSubspace, LinearSubspace) {
    debug_assert!(k <= n);
    let g = rng.gaussian_matrix(n, n);
    let q = g.qr().q();
    let direction = LinearSubspace::from_frame_unchecked(q.columns(0, k).into_owned());
    let comp = LinearSubspace::from_frame_unchecked(q.columns(k, n - k).into_owned());
    (direction, comp)
}

/// Uniform point in the radius-`radius` ball of R^d.
pub fn sample_ball_uniform(d: usize, radius: f64, rng: &mut RandomStream) -> Result<DVector<f64>> {
    if d == 0 {
        return Err(Error::domain("sample_ball_uniform requires d >= 1"));
    }
    if radius.is_nan() || radius <= 0.0 {
        return Err(Error::domain("sample_ball_uniform requires radius > 0"));
    }
    let dir = rng.unit_vector(d);
    let r = radius * rng.next_uniform().powf(1.0 / d as f64);
    Ok(dir * r)
}

/// Invariant random k-flat conditioned to hit the centered ball of radius h:
/// direction M uniform on G(n,k), foot uniform in the radius-h ball of M⊥.
///
/// The distance d(o,E) then has density ∝ r^{n-k-1} on [0,h].
pub fn sample_affine_hitting_ball(
    n: usize,
    k: usize,
    h: f64,
    rng: &mut RandomStream,
) -> Result<AffineFlat> {
    if k >= n {
        return Err(Error::domain(format!(
            "sample_affine_hitting_ball requires 0 <= k <= n-1, got k={k}, n={n}"
        )));
    }
    if h.is_nan() || h <= 0.0 {
        return Err(Error::domain("sample_affine_hitting_ball requires h > 0"));
    }
    let (direction, comp) = sample_split(n, k, rng);
    let local = sample_ball_uniform(n - k, h, rng)?;
    let foot = comp.frame() * local;
    AffineFlat::new(direction, &foot)
}

/// Invariant random k-flat tangent to the unit sphere: direction M uniform on
/// G(n,k), foot uniform on S^{n-1} ∩ M⊥. The distance to the origin is 1.
pub fn sample_affine_tangent(n: usize, k: usize, rng: &mut RandomStream) -> Result<AffineFlat> {
    if k == 0 || k >= n {
        return Err(Error::domain(format!(
            "sample_affine_tangent requires 1 <= k <= n-1, got k={k}, n={n}"
        )));
    }
    let (direction, comp) = sample_split(n, k, rng);
    let local = rng.unit_vector(n - k);
    let mut foot = comp.frame() * local;
    foot /= foot.norm();
    AffineFlat::new(direction, &foot)
}

/// Uniform random p-subspace containing the fixed subspace L0: the direct sum
/// of L0 with a uniform (p − dim L0)-subspace of L0⊥. The distribution is
/// invariant under all rotations fixing L0.
pub fn sample_containing(
    l0: &LinearSubspace,
    p: usize,
    rng: &mut RandomStream,
) -> Result<LinearSubspace> {
    let n = l0.ambient_dim();
    let g0 = l0.dim();
    if p < g0 || p > n {
        return Err(Error::domain(format!(
            "sample_containing requires dim L0 <= p <= n, got dim L0={g0}, p={p}, n={n}"
        )));
    }
    if p == g0 {
        return Ok(l0.clone());
    }
    if p == n {
        return Ok(LinearSubspace::full(n));
    }
    let comp = complement(l0);
    sample_containing_with_complement(l0, &comp, p, rng)
}

/// [`sample_containing`] with the complement of L0 precomputed, for loops
/// that hold L0 fixed.
pub fn sample_containing_with_complement(
    l0: &LinearSubspace,
    comp: &LinearSubspace,
    p: usize,
    rng: &mut RandomStream,
) -> Result<LinearSubspace> {
    let n = l0.ambient_dim();
    let g0 = l0.dim();
    if p < g0 || p > n {
        return Err(Error::domain(format!(
            "sample_containing requires dim L0 <= p <= n, got dim L0={g0}, p={p}, n={n}"
        )));
    }
    if p == g0 {
        return Ok(l0.clone());
    }
    if p == n {
        return Ok(LinearSubspace::full(n));
    }
    let inner = sample_grassmannian(n - g0, p - g0, rng)?;
    let lifted = comp.frame() * inner.frame();
    let mut frame = DMatrix::zeros(n, p);
    frame.columns_mut(0, g0).copy_from(l0.frame());
    frame.columns_mut(g0, p - g0).copy_from(&lifted);
    Ok(LinearSubspace::from_frame_unchecked(frame))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::beta_regularized;
    use crate::subspaces::principal_angles;
    use crate::validation::ks_test;

    /// CDF of the first coordinate of a uniform point on S^{n-1}:
    /// density ∝ (1−t²)^{(n-3)/2} on [−1,1].
    fn sphere_coord_cdf(n: usize, t: f64) -> f64 {
        let t = t.clamp(-1.0, 1.0);
        let half = 0.5 * beta_regularized(t * t, 0.5, 0.5 * (n as f64 - 1.0)).unwrap();
        if t >= 0.0 {
            0.5 + half
        } else {
            0.5 - half
        }
    }

    #[test]
    fn stream_is_reproducible_and_streams_differ() {
        let mut a = RandomStream::new(42, 7);
        let mut b = RandomStream::new(42, 7);
        let mut c = RandomStream::new(42, 8);
        let xs: Vec<f64> = (0..100).map(|_| a.next_gaussian()).collect();
        let ys: Vec<f64> = (0..100).map(|_| b.next_gaussian()).collect();
        let zs: Vec<f64> = (0..100).map(|_| c.next_gaussian()).collect();
        assert_eq!(xs, ys);
        assert_ne!(xs, zs);
    }

    #[test]
    fn rotation_is_orthogonal_with_unit_determinant() {
        let mut rng = RandomStream::new(1, 0);
        for n in 1..=6 {
            let q = sample_rotation(n, &mut rng).unwrap();
            let defect = (q.transpose() * &q - DMatrix::identity(n, n)).norm();
            assert!(defect < 1e-10, "n={n}: defect {defect}");
            assert!((q.determinant() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn rotation_angle_uniform_in_dimension_two() {
        let mut rng = RandomStream::new(2, 0);
        let n_draws = 100_000;
        let angles: Vec<f64> = (0..n_draws)
            .map(|_| {
                let q = sample_rotation(2, &mut rng).unwrap();
                let theta = q[(1, 0)].atan2(q[(0, 0)]);
                if theta < 0.0 {
                    theta + std::f64::consts::TAU
                } else {
                    theta
                }
            })
            .collect();
        let report = ks_test(&angles, |t| t / std::f64::consts::TAU, 0.01).unwrap();
        assert!(report.pass, "KS statistic {}", report.ks_statistic);
    }

    #[test]
    fn rotation_maps_e1_uniformly_on_sphere() {
        let mut rng = RandomStream::new(3, 0);
        for n in [3usize, 5] {
            let coords: Vec<f64> = (0..60_000)
                .map(|_| {
                    let q = sample_rotation(n, &mut rng).unwrap();
                    q[(0, 0)]
                })
                .collect();
            let report = ks_test(&coords, |t| sphere_coord_cdf(n, t), 0.01).unwrap();
            assert!(report.pass, "n={n}: KS {}", report.ks_statistic);
        }
    }

    #[test]
    fn grassmannian_edge_dimensions() {
        let mut rng = RandomStream::new(4, 0);
        assert_eq!(sample_grassmannian(4, 0, &mut rng).unwrap().dim(), 0);
        assert_eq!(sample_grassmannian(4, 4, &mut rng).unwrap().dim(), 4);
        assert!(sample_grassmannian(3, 4, &mut rng).is_err());
        let l = sample_grassmannian(5, 2, &mut rng).unwrap();
        assert!(l.orthonormality_defect() < 1e-12);
    }

    #[test]
    fn grassmannian_rotation_invariance() {
        // Largest principal angle to a fixed reference plane, sampled law vs
        // the law after rotating the reference: two-sample KS.
        let mut rng = RandomStream::new(5, 0);
        let reference = sample_grassmannian(4, 2, &mut rng).unwrap();
        let rot = sample_rotation(4, &mut rng).unwrap();
        let rotated =
            LinearSubspace::from_frame_unchecked(&rot * reference.frame());
        let n_draws = 30_000;
        let mut plain = Vec::with_capacity(n_draws);
        let mut turned = Vec::with_capacity(n_draws);
        for _ in 0..n_draws {
            let l = sample_grassmannian(4, 2, &mut rng).unwrap();
            plain.push(principal_angles(&l, &reference).unwrap()[0]);
            let l2 = sample_grassmannian(4, 2, &mut rng).unwrap();
            turned.push(principal_angles(&l2, &rotated).unwrap()[0]);
        }
        let report = crate::validation::ks_test_two_sample(&plain, &turned, 0.01).unwrap();
        assert!(report.pass, "KS {}", report.ks_statistic);
    }

    #[test]
    fn ball_uniform_radius_law() {
        let mut rng = RandomStream::new(6, 0);
        for d in [1usize, 3] {
            let radii: Vec<f64> = (0..50_000)
                .map(|_| sample_ball_uniform(d, 2.0, &mut rng).unwrap().norm())
                .collect();
            assert!(radii.iter().all(|&r| r <= 2.0));
            let report =
                ks_test(&radii, |r| (r / 2.0).clamp(0.0, 1.0).powi(d as i32), 0.01).unwrap();
            assert!(report.pass, "d={d}: KS {}", report.ks_statistic);
        }
        // d=1 is uniform on [−radius, radius]: check the signed coordinate too.
        let xs: Vec<f64> = (0..50_000)
            .map(|_| sample_ball_uniform(1, 1.0, &mut rng).unwrap()[0])
            .collect();
        let report = ks_test(&xs, |x| (0.5 * (x + 1.0)).clamp(0.0, 1.0), 0.01).unwrap();
        assert!(report.pass);
    }

    #[test]
    fn hitting_ball_distance_laws() {
        let mut rng = RandomStream::new(7, 0);
        // (n,k,h) = (2,1,1): d(o,E) uniform on [0,1].
        let d21: Vec<f64> = (0..100_000)
            .map(|_| {
                sample_affine_hitting_ball(2, 1, 1.0, &mut rng)
                    .unwrap()
                    .distance_to_origin()
            })
            .collect();
        assert!(d21.iter().all(|&d| d <= 1.0 + 1e-12));
        let report = ks_test(&d21, |r| r.clamp(0.0, 1.0), 0.01).unwrap();
        assert!(report.pass, "KS {}", report.ks_statistic);

        // (n,k,h) = (3,1,1): density 2r, CDF r^2.
        let d31: Vec<f64> = (0..100_000)
            .map(|_| {
                sample_affine_hitting_ball(3, 1, 1.0, &mut rng)
                    .unwrap()
                    .distance_to_origin()
            })
            .collect();
        let report = ks_test(&d31, |r| (r * r).clamp(0.0, 1.0), 0.01).unwrap();
        assert!(report.pass, "KS {}", report.ks_statistic);
    }

    #[test]
    fn tangent_flat_structure() {
        let mut rng = RandomStream::new(8, 0);
        for _ in 0..200 {
            let e = sample_affine_tangent(4, 2, &mut rng).unwrap();
            assert!((e.distance_to_origin() - 1.0).abs() < 1e-12);
            // foot ⟂ direction is enforced by the flat type; re-check here.
            let inner = e.direction().frame().transpose() * e.foot();
            assert!(inner.norm() < 1e-10);
        }
        assert!(sample_affine_tangent(4, 0, &mut rng).is_err());
        assert!(sample_affine_tangent(4, 4, &mut rng).is_err());
    }

    #[test]
    fn tangent_foot_uniform_on_sphere() {
        let mut rng = RandomStream::new(9, 0);
        let coords: Vec<f64> = (0..60_000)
            .map(|_| sample_affine_tangent(3, 1, &mut rng).unwrap().foot()[0])
            .collect();
        let report = ks_test(&coords, |t| sphere_coord_cdf(3, t), 0.01).unwrap();
        assert!(report.pass, "KS {}", report.ks_statistic);
    }

    #[test]
    fn containing_subspace_contains_axis() {
        let mut rng = RandomStream::new(10, 0);
        let u = rng.unit_vector(5);
        let l0 = LinearSubspace::span_of(&u).unwrap();
        assert_eq!(sample_containing(&l0, 1, &mut rng).unwrap().dim(), 1);
        assert_eq!(sample_containing(&l0, 5, &mut rng).unwrap().dim(), 5);
        assert!(sample_containing(&l0, 0, &mut rng).is_err());
        for _ in 0..100 {
            let l = sample_containing(&l0, 3, &mut rng).unwrap();
            assert_eq!(l.dim(), 3);
            assert!(l.orthonormality_defect() < 1e-10);
            let angles = principal_angles(&l0, &l).unwrap();
            assert!(angles.iter().all(|&a| a < 1e-7), "L0 not contained");
            assert!(l.membership_residual(&u) < 1e-10);
        }
    }

    #[test]
    fn containing_subspace_invariance_under_axis_fixing_rotations() {
        // Conditional distribution is invariant under rotations fixing L0:
        // compare the angle-to-reference law before and after such a rotation.
        let mut rng = RandomStream::new(12, 0);
        let n = 4;
        let u = rng.unit_vector(n);
        let l0 = LinearSubspace::span_of(&u).unwrap();
        let reference = sample_grassmannian(n, 2, &mut rng).unwrap();

        // Rotation fixing u: Haar rotation of L0⊥ lifted back.
        let comp = complement(&l0);
        let inner_rot = sample_rotation(n - 1, &mut rng).unwrap();
        let mut rot = &u * u.transpose();
        rot += comp.frame() * inner_rot * comp.frame().transpose();
        assert!((&rot * &u - &u).norm() < 1e-12);

        let n_draws = 30_000;
        let mut base = Vec::with_capacity(n_draws);
        let mut moved = Vec::with_capacity(n_draws);
        for _ in 0..n_draws {
            let l = sample_containing(&l0, 2, &mut rng).unwrap();
            base.push(principal_angles(&l, &reference).unwrap()[0]);
            let l2 = sample_containing(&l0, 2, &mut rng).unwrap();
            let turned = LinearSubspace::from_frame_unchecked(&rot * l2.frame());
            moved.push(principal_angles(&turned, &reference).unwrap()[0]);
        }
        let report = crate::validation::ks_test_two_sample(&base, &moved, 0.01).unwrap();
        assert!(report.pass, "KS {}", report.ks_statistic);
    }
}
