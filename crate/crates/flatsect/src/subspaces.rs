//! Linear subspaces and affine flats of R^n with the geometric kernels the
//! distance laws are built on: orthonormal frames, complements, projections,
//! intersections, subspace determinants and principal angles.
//!
//! All types are immutable after construction and every operation is pure.
//! Degenerate configurations (probability-zero events hit by floating point)
//! are reported as errors and left to the caller to reject and resample.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Default rank tolerance for frame construction and intersections.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Relative residual threshold above which an affine membership system is
/// declared inconsistent (parallel configuration).
const RESIDUAL_TOL: f64 = 1e-7;

/// A k-dimensional linear subspace of R^n, stored as an n×k matrix with
/// orthonormal columns (empty for k = 0).
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSubspace {
    frame: DMatrix<f64>,
}

impl LinearSubspace {
    /// Wrap a frame that is already orthonormal. Columns are trusted; use
    /// [`orthonormalize`] for raw spanning sets.
    pub fn from_orthonormal_frame(frame: DMatrix<f64>) -> Result<Self> {
        let k = frame.ncols();
        let defect = (frame.transpose() * &frame - DMatrix::identity(k, k)).norm();
        if defect > 1e-10 {
            return Err(Error::domain(format!(
                "frame is not orthonormal (defect {defect:.3e})"
            )));
        }
        Ok(LinearSubspace { frame })
    }

    pub(crate) fn from_frame_unchecked(frame: DMatrix<f64>) -> Self {
        LinearSubspace { frame }
    }

    /// The zero subspace {0} of R^n.
    pub fn zero(ambient_dim: usize) -> Self {
        LinearSubspace {
            frame: DMatrix::zeros(ambient_dim, 0),
        }
    }

    /// The full space R^n.
    pub fn full(ambient_dim: usize) -> Self {
        LinearSubspace {
            frame: DMatrix::identity(ambient_dim, ambient_dim),
        }
    }

    /// span{e_1, …, e_k} in R^n.
    pub fn coordinate(ambient_dim: usize, k: usize) -> Result<Self> {
        if k > ambient_dim {
            return Err(Error::domain(format!(
                "coordinate subspace dimension {k} exceeds ambient {ambient_dim}"
            )));
        }
        let mut frame = DMatrix::zeros(ambient_dim, k);
        for i in 0..k {
            frame[(i, i)] = 1.0;
        }
        Ok(LinearSubspace { frame })
    }

    /// The line spanned by `v` (which must be nonzero).
    pub fn span_of(v: &DVector<f64>) -> Result<Self> {
        let norm = v.norm();
        if norm == 0.0 {
            return Err(Error::domain("cannot span the zero vector"));
        }
        Ok(LinearSubspace {
            frame: DMatrix::from_column_slice(v.len(), 1, (v / norm).as_slice()),
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.frame.nrows()
    }

    pub fn dim(&self) -> usize {
        self.frame.ncols()
    }

    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    /// Frobenius norm of frameᵀ·frame − I.
    pub fn orthonormality_defect(&self) -> f64 {
        let k = self.dim();
        (self.frame.transpose() * &self.frame - DMatrix::identity(k, k)).norm()
    }

    /// Orthogonal projection of `x` onto this subspace.
    pub fn project(&self, x: &DVector<f64>) -> DVector<f64> {
        if self.dim() == 0 {
            return DVector::zeros(self.ambient_dim());
        }
        &self.frame * (self.frame.transpose() * x)
    }

    /// Residual ‖x − x|L‖ of membership in the subspace.
    pub fn membership_residual(&self, x: &DVector<f64>) -> f64 {
        (x - self.project(x)).norm()
    }

    /// The projector matrix I − FFᵀ onto the orthogonal complement.
    pub(crate) fn complement_projector(&self) -> DMatrix<f64> {
        let n = self.ambient_dim();
        let mut p = DMatrix::identity(n, n);
        if self.dim() > 0 {
            p -= &self.frame * self.frame.transpose();
        }
        p
    }
}

/// A k-dimensional affine flat E = direction + foot, where `foot` is the
/// point of E closest to the origin (so foot ⟂ direction).
#[derive(Debug, Clone, PartialEq)]
pub struct AffineFlat {
    direction: LinearSubspace,
    foot: DVector<f64>,
}

impl AffineFlat {
    /// Build the flat through `point` with the given direction subspace. The
    /// component of `point` inside the direction is discarded so that the
    /// stored foot is the minimum-norm point of the flat.
    pub fn new(direction: LinearSubspace, point: &DVector<f64>) -> Result<Self> {
        if point.len() != direction.ambient_dim() {
            return Err(Error::DimensionMismatch(
                point.len(),
                direction.ambient_dim(),
            ));
        }
        let foot = point - direction.project(point);
        Ok(AffineFlat { direction, foot })
    }

    /// A linear subspace viewed as an affine flat through the origin.
    pub fn from_linear(direction: LinearSubspace) -> Self {
        let foot = DVector::zeros(direction.ambient_dim());
        AffineFlat { direction, foot }
    }

    pub fn direction(&self) -> &LinearSubspace {
        &self.direction
    }

    pub fn foot(&self) -> &DVector<f64> {
        &self.foot
    }

    pub fn ambient_dim(&self) -> usize {
        self.direction.ambient_dim()
    }

    pub fn dim(&self) -> usize {
        self.direction.dim()
    }

    /// d(o,E) = inf_{x∈E} ‖x‖ = ‖foot‖.
    pub fn distance_to_origin(&self) -> f64 {
        self.foot.norm()
    }

    /// Residual of `x` as a member of the flat.
    pub fn membership_residual(&self, x: &DVector<f64>) -> f64 {
        let delta = x - &self.foot;
        (&delta - self.direction.project(&delta)).norm()
    }
}

/// Orthonormalize the columns of a spanning set by Householder QR with
/// column pivoting. The reported dimension is the numerical rank at absolute
/// threshold `tol · max column norm`.
pub fn orthonormalize(columns: &DMatrix<f64>, tol: f64) -> LinearSubspace {
    let n = columns.nrows();
    let k = columns.ncols();
    if k == 0 {
        return LinearSubspace::zero(n);
    }
    let max_col_norm = (0..k)
        .map(|j| columns.column(j).norm())
        .fold(0.0f64, f64::max);
    if max_col_norm == 0.0 {
        return LinearSubspace::zero(n);
    }
    let qr = columns.clone().col_piv_qr();
    let q = qr.q();
    let r = qr.r();
    let threshold = tol * max_col_norm;
    let mut rank = 0;
    for i in 0..r.nrows().min(r.ncols()) {
        if r[(i, i)].abs() > threshold {
            rank += 1;
        } else {
            break;
        }
    }
    LinearSubspace::from_frame_unchecked(q.columns(0, rank).into_owned())
}

/// Orthogonal complement L⊥, computed from the projector I − FFᵀ.
pub fn complement(l: &LinearSubspace) -> LinearSubspace {
    let n = l.ambient_dim();
    let k = l.dim();
    if k == 0 {
        return LinearSubspace::full(n);
    }
    if k == n {
        return LinearSubspace::zero(n);
    }
    let projector = l.complement_projector();
    let comp = orthonormalize(&projector, DEFAULT_TOL);
    debug_assert_eq!(comp.dim(), n - k);
    comp
}

/// Orthogonal projection x ↦ x|L.
pub fn project(x: &DVector<f64>, l: &LinearSubspace) -> DVector<f64> {
    l.project(x)
}

// Stacked complement projectors of both subspaces; the common null space is
// the intersection.
fn stacked_projectors(l1: &LinearSubspace, l2: &LinearSubspace) -> DMatrix<f64> {
    let n = l1.ambient_dim();
    let p1 = l1.complement_projector();
    let p2 = l2.complement_projector();
    let mut stacked = DMatrix::zeros(2 * n, n);
    stacked.rows_mut(0, n).copy_from(&p1);
    stacked.rows_mut(n, n).copy_from(&p2);
    stacked
}

/// Intersection of two linear subspaces: the null space of the stacked
/// complement projectors, with rank decisions at tolerance `tol`.
pub fn intersect_linear(
    l1: &LinearSubspace,
    l2: &LinearSubspace,
    tol: f64,
) -> Result<LinearSubspace> {
    if l1.ambient_dim() != l2.ambient_dim() {
        return Err(Error::DimensionMismatch(l1.ambient_dim(), l2.ambient_dim()));
    }
    let stacked = stacked_projectors(l1, l2);
    let svd = crate::linalg::jacobi_svd(&stacked);
    let n = l1.ambient_dim();
    let cols: Vec<usize> = (0..n).filter(|&i| svd.sigma[i] <= tol).collect();
    let mut frame = DMatrix::zeros(n, cols.len());
    for (j, &i) in cols.iter().enumerate() {
        frame.set_column(j, &svd.v.column(i));
    }
    Ok(LinearSubspace::from_frame_unchecked(frame))
}

/// Intersection of an affine flat with a linear subspace.
///
/// Solves the stacked membership system
///   [I − FFᵀ of lin(E); I − GGᵀ of L] x = [foot(E); 0]
/// by least squares; the minimum-norm solution is the foot of E ∩ L and the
/// null space of the stacked matrix is its direction.
pub fn intersect_affine_linear(
    e: &AffineFlat,
    l: &LinearSubspace,
    tol: f64,
) -> Result<AffineFlat> {
    if e.ambient_dim() != l.ambient_dim() {
        return Err(Error::DimensionMismatch(e.ambient_dim(), l.ambient_dim()));
    }
    let n = e.ambient_dim();
    let mut rhs = DVector::zeros(2 * n);
    rhs.rows_mut(0, n).copy_from(e.foot());
    intersect_stacked(
        stacked_projectors(e.direction(), l),
        rhs,
        (e.dim() + l.dim()).saturating_sub(n),
        tol,
    )
}

/// Intersection of two affine flats (same stacked-projector scheme with both
/// feet on the right-hand side).
pub(crate) fn intersect_affine(e1: &AffineFlat, e2: &AffineFlat, tol: f64) -> Result<AffineFlat> {
    if e1.ambient_dim() != e2.ambient_dim() {
        return Err(Error::DimensionMismatch(e1.ambient_dim(), e2.ambient_dim()));
    }
    let n = e1.ambient_dim();
    let mut rhs = DVector::zeros(2 * n);
    rhs.rows_mut(0, n).copy_from(e1.foot());
    rhs.rows_mut(n, n).copy_from(e2.foot());
    intersect_stacked(
        stacked_projectors(e1.direction(), e2.direction()),
        rhs,
        (e1.dim() + e2.dim()).saturating_sub(n),
        tol,
    )
}

fn intersect_stacked(
    stacked: DMatrix<f64>,
    rhs: DVector<f64>,
    generic_dim: usize,
    tol: f64,
) -> Result<AffineFlat> {
    let n = stacked.ncols();
    let svd = crate::linalg::jacobi_svd(&stacked);

    // Minimum-norm least-squares solution over the non-null directions.
    let mut foot = DVector::zeros(n);
    let mut null_cols: Vec<usize> = Vec::new();
    for (i, &s) in svd.sigma.iter().enumerate() {
        if s <= tol {
            null_cols.push(i);
        } else {
            let coeff = svd.u.column(i).dot(&rhs) / s;
            foot += svd.v.column(i) * coeff;
        }
    }

    let residual = (&stacked * &foot - &rhs).norm();
    if residual > RESIDUAL_TOL * (1.0 + rhs.norm()) {
        return Err(Error::EmptyIntersection { residual });
    }
    if null_cols.len() != generic_dim {
        return Err(Error::DegenerateConfiguration {
            expected: generic_dim,
            actual: null_cols.len(),
        });
    }

    let mut frame = DMatrix::zeros(n, null_cols.len());
    for (j, &i) in null_cols.iter().enumerate() {
        frame.set_column(j, &svd.v.column(i));
    }
    Ok(AffineFlat {
        direction: LinearSubspace::from_frame_unchecked(frame),
        foot,
    })
}

/// Subspace determinant [L,M].
///
/// For dim L + dim M ≤ n this is the volume of the parallelepiped spanned by
/// the union of orthonormal bases, computed as the square root of the Gram
/// determinant of the concatenated frames. For dim L + dim M > n it is
/// defined through the complements, [L,M] = [L⊥,M⊥].
pub fn subspace_determinant(l: &LinearSubspace, m: &LinearSubspace) -> Result<f64> {
    if l.ambient_dim() != m.ambient_dim() {
        return Err(Error::DimensionMismatch(l.ambient_dim(), m.ambient_dim()));
    }
    let n = l.ambient_dim();
    let (p, q) = (l.dim(), m.dim());
    if p + q > n {
        return subspace_determinant(&complement(l), &complement(m));
    }
    if p == 0 || q == 0 {
        return Ok(1.0);
    }
    let mut joint = DMatrix::zeros(n, p + q);
    joint.columns_mut(0, p).copy_from(l.frame());
    joint.columns_mut(p, q).copy_from(m.frame());
    let gram = joint.transpose() * joint;
    let det = gram.determinant().max(0.0);
    Ok(det.sqrt().min(1.0))
}

/// Principal angles between two subspaces, in nonincreasing order in
/// [0, π/2]. The cosines are the singular values of frame₁ᵀ·frame₂.
pub fn principal_angles(l1: &LinearSubspace, l2: &LinearSubspace) -> Result<Vec<f64>> {
    if l1.ambient_dim() != l2.ambient_dim() {
        return Err(Error::DimensionMismatch(l1.ambient_dim(), l2.ambient_dim()));
    }
    if l1.dim() == 0 || l2.dim() == 0 {
        return Ok(Vec::new());
    }
    let product = l1.frame().transpose() * l2.frame();
    let svd = crate::linalg::jacobi_svd(&product);
    let mut angles: Vec<f64> = svd
        .sigma
        .iter()
        .map(|&s| s.clamp(0.0, 1.0).acos())
        .collect();
    angles.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(angles)
}
