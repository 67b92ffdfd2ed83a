//! Linear algebra for an indefinite quadratic form of signature (p,q).
//!
//! The form is ⟨x,y⟩ = Σ_{i<p} xᵢyᵢ − Σ_{i≥p} xᵢyᵢ in the standard basis.
//! Matrices preserving it are handled through unit-determinant lifts; every
//! exported quantity is invariant under flipping the sign of a lift.
//!
//! A [`TauFrame`] turns a negative-definite q-plane τ into a positive-definite
//! inner product (flip the sign of the form on τ, keep it on τ^⊥) and exposes
//! singular values taken with respect to that inner product.

mod projective;
mod proximal;
pub mod sampling;

pub use projective::{
    cross_ratio, log_pairing, log_pairing_tau, proj_dist, proj_dist_to_hyp, ProjHyperplane,
    ProjPoint,
};
pub use proximal::{
    benoist_product_check, certify_r_eps_proximal, proximal_data, BenoistCheck, ProximalData,
    ProximalityCert, RefuteReason, DEFAULT_PROXIMALITY_SAMPLES,
};

use crate::{tol, Error, Result};
use nalgebra::{Complex, DMatrix, DVector};

/// Ambient space carrying the signature-(p,q) bilinear form.
#[derive(Debug, Clone, PartialEq)]
pub struct QSpace {
    p: usize,
    q: usize,
    form: DMatrix<f64>,
}

impl QSpace {
    /// Requires p ≥ 1, q ≥ 1 and p + q > 2.
    pub fn new(p: usize, q: usize) -> Result<Self> {
        if p < 1 || q < 1 || p + q <= 2 {
            return Err(Error::BadSignature { p, q });
        }
        let d = p + q;
        let form = DMatrix::from_fn(d, d, |i, j| {
            if i != j {
                0.0
            } else if i < p {
                1.0
            } else {
                -1.0
            }
        });
        Ok(QSpace { p, q, form })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn d(&self) -> usize {
        self.p + self.q
    }

    /// The diagonal form matrix J = diag(+1×p, −1×q).
    pub fn form(&self) -> &DMatrix<f64> {
        &self.form
    }

    /// J·v (sign flip on the last q coordinates).
    pub fn form_apply(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut out = v.clone();
        for i in self.p..self.d() {
            out[i] = -out[i];
        }
        out
    }

    /// ⟨u,v⟩ for the signature-(p,q) form.
    pub fn pairing(&self, u: &DVector<f64>, v: &DVector<f64>) -> Result<f64> {
        let d = self.d();
        if u.len() != d || v.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "form_eval expects {d}-vectors, got {} and {}",
                u.len(),
                v.len()
            )));
        }
        let mut acc = 0.0;
        for i in 0..self.p {
            acc += u[i] * v[i];
        }
        for i in self.p..d {
            acc -= u[i] * v[i];
        }
        Ok(acc)
    }

    /// Basis of the form-orthogonal complement of the span of `subspace`.
    ///
    /// Computed as the null space of the Gram map x ↦ (⟨x,bⱼ⟩)ⱼ. Input
    /// vectors must be linearly independent.
    pub fn q_complement(&self, subspace: &[DVector<f64>]) -> Result<Vec<DVector<f64>>> {
        let d = self.d();
        let k = subspace.len();
        if k == 0 || k > d {
            return Err(Error::DimensionMismatch(format!(
                "complement of a {k}-set in dimension {d}"
            )));
        }
        for b in subspace {
            if b.len() != d {
                return Err(Error::DimensionMismatch(format!(
                    "subspace vector has length {}, expected {d}",
                    b.len()
                )));
            }
        }
        // Rows of the Gram map: (J·bⱼ)ᵀ.
        let gram = DMatrix::from_fn(k, d, |i, j| {
            let b = &subspace[i];
            if j < self.p {
                b[j]
            } else {
                -b[j]
            }
        });
        let svd = gram.clone().svd(false, true);
        let sv = &svd.singular_values;
        let smax = sv.iter().cloned().fold(0.0, f64::max);
        let rank = sv.iter().filter(|s| **s > 1e-12 * smax.max(1.0)).count();
        if rank < k {
            return Err(Error::DimensionMismatch(
                "q_complement input vectors are linearly dependent".into(),
            ));
        }
        let vt = svd.v_t.expect("svd with v requested");
        // Null space rows of vt are indices rank..d (singular values sorted
        // is not guaranteed by the backend, so select by magnitude).
        let mut order: Vec<usize> = (0..sv.len()).collect();
        order.sort_by(|&a, &b| sv[b].partial_cmp(&sv[a]).unwrap());
        let mut kept: Vec<usize> = order[..k.min(sv.len())].to_vec();
        kept.sort_unstable();
        let mut out = Vec::with_capacity(d - k);
        for row in 0..vt.nrows() {
            if !kept.contains(&row) {
                out.push(vt.row(row).transpose());
            }
        }
        // vt has d rows only when k ≥ d is false and the SVD is full; for a
        // k×d map the thin SVD yields k rows, so complete with an explicit
        // null-space extraction when needed.
        if out.len() < d - k {
            out = null_space(&gram);
        }
        debug_assert_eq!(out.len(), d - k);
        Ok(out)
    }
}

/// Orthonormal (Euclidean) basis of the null space of `m`.
fn null_space(m: &DMatrix<f64>) -> Vec<DVector<f64>> {
    let (rows, cols) = m.shape();
    // Square up so the SVD exposes all right singular vectors.
    let mut square = DMatrix::zeros(rows.max(cols), cols);
    square.view_mut((0, 0), (rows, cols)).copy_from(m);
    let svd = square.svd(false, true);
    let vt = svd.v_t.expect("svd with v requested");
    let sv = &svd.singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let mut out = Vec::new();
    for i in 0..vt.nrows() {
        let s = if i < sv.len() { sv[i] } else { 0.0 };
        if s <= 1e-12 * smax.max(1.0) {
            out.push(vt.row(i).transpose());
        }
    }
    out
}

/// A unit-determinant lift of a form-preserving matrix.
///
/// Consumers never rely on the sign of the lift.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupMatrix {
    m: DMatrix<f64>,
}

impl GroupMatrix {
    /// Validates form preservation (relative Frobenius residual ≤ 1e-10)
    /// and |det| = 1.
    pub fn new(space: &QSpace, m: DMatrix<f64>) -> Result<Self> {
        let d = space.d();
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "group matrix must be {d}×{d}, got {}×{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let j = space.form();
        let residual = (m.transpose() * j * &m - j).norm();
        let scale = m.norm_squared().max(j.norm());
        if residual > tol::FORM_PRESERVE * scale {
            return Err(Error::NotFormPreserving {
                residual: residual / scale,
            });
        }
        // Form preservation already forces det² = 1; this is a cheap sanity
        // net for moderately sized matrices.
        let det_abs = m.determinant().abs();
        if (det_abs - 1.0).abs() > crate::tol::DET * m.norm_squared().max(1.0) {
            return Err(Error::NotUnimodular { det_abs });
        }
        Ok(GroupMatrix { m })
    }

    /// Wraps a matrix known to be form-preserving (e.g. a product of
    /// validated lifts) without re-validating.
    pub fn new_unchecked(m: DMatrix<f64>) -> Self {
        GroupMatrix { m }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    /// g⁻¹ = J gᵀ J, exact up to the form residual of the lift.
    pub fn inverse(&self, space: &QSpace) -> GroupMatrix {
        GroupMatrix {
            m: form_inverse(space, &self.m),
        }
    }
}

impl std::ops::Deref for GroupMatrix {
    type Target = DMatrix<f64>;

    fn deref(&self) -> &DMatrix<f64> {
        &self.m
    }
}

/// J mᵀ J for a form-preserving m.
pub fn form_inverse(space: &QSpace, m: &DMatrix<f64>) -> DMatrix<f64> {
    let p = space.p();
    let d = space.d();
    let mut out = m.transpose();
    for i in 0..d {
        for j in 0..d {
            // (J A J)_{ij} = sign(i)·sign(j)·A_{ij}
            let si = if i < p { 1.0 } else { -1.0 };
            let sj = if j < p { 1.0 } else { -1.0 };
            out[(i, j)] *= si * sj;
        }
    }
    out
}

/// Inner product attached to a negative-definite q-plane τ.
///
/// The stored `inner` matrix M satisfies ⟨u,v⟩_τ = uᵀMv; it is symmetric
/// positive definite, equal to −⟨·,·⟩ on τ and +⟨·,·⟩ on τ^⊥.
#[derive(Debug, Clone)]
pub struct TauFrame {
    basis: Vec<DVector<f64>>,
    inner: DMatrix<f64>,
    /// Upper Cholesky factor Lᵀ of `inner`; ⟨u,v⟩_τ = (Lᵀu)·(Lᵀv).
    chol_ut: DMatrix<f64>,
    chol_ut_inv: DMatrix<f64>,
}

impl TauFrame {
    pub fn new(space: &QSpace, basis: &[DVector<f64>]) -> Result<Self> {
        let q = space.q();
        let d = space.d();
        if basis.len() != q {
            return Err(Error::PlaneDimension {
                got: basis.len(),
                expected: q,
            });
        }
        for b in basis {
            if b.len() != d {
                return Err(Error::DimensionMismatch(format!(
                    "plane vector has length {}, expected {d}",
                    b.len()
                )));
            }
        }
        let b = DMatrix::from_columns(basis);
        // Restricted Gram matrix BᵀJB must be negative definite.
        let jb = {
            let mut jb = b.clone();
            for i in space.p()..d {
                for c in 0..q {
                    jb[(i, c)] = -jb[(i, c)];
                }
            }
            jb
        };
        let gram = b.transpose() * &jb;
        let sym = nalgebra::SymmetricEigen::new(gram.clone());
        let max_eig = sym.eigenvalues.iter().cloned().fold(f64::MIN, f64::max);
        if max_eig >= -1e-12 * gram.norm().max(1.0) {
            return Err(Error::NotNegativeDefinite {
                eigenvalue: max_eig,
            });
        }
        // Form-orthogonal projection onto τ: P = B G⁻¹ Bᵀ J.
        let g_inv = gram
            .try_inverse()
            .expect("negative definite Gram matrix is invertible");
        let proj = &b * g_inv * jb.transpose();
        let eye = DMatrix::identity(d, d);
        let mut inner = space.form() * (eye - 2.0 * proj);
        // Symmetrize away round-off.
        inner = (&inner + inner.transpose()) * 0.5;
        let chol = nalgebra::Cholesky::new(inner.clone()).ok_or(Error::NotNegativeDefinite {
            eigenvalue: max_eig,
        })?;
        let chol_ut = chol.l().transpose();
        let chol_ut_inv = chol_ut
            .clone()
            .try_inverse()
            .expect("triangular factor invertible");
        Ok(TauFrame {
            basis: basis.to_vec(),
            inner,
            chol_ut,
            chol_ut_inv,
        })
    }

    /// The frame for τ = span{e_{p+1},…,e_d}; its inner product is the
    /// standard Euclidean one.
    pub fn standard(space: &QSpace) -> TauFrame {
        let d = space.d();
        let basis: Vec<DVector<f64>> = (space.p()..d)
            .map(|i| {
                let mut v = DVector::zeros(d);
                v[i] = 1.0;
                v
            })
            .collect();
        TauFrame::new(space, &basis).expect("standard negative plane is valid")
    }

    pub fn basis(&self) -> &[DVector<f64>] {
        &self.basis
    }

    pub fn inner(&self) -> &DMatrix<f64> {
        &self.inner
    }

    /// ⟨u,v⟩_τ.
    pub fn pairing(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        (self.inner.clone() * v).dot(u)
    }

    /// ‖v‖_τ.
    pub fn norm(&self, v: &DVector<f64>) -> f64 {
        (&self.chol_ut * v).norm()
    }

    /// Dual norm of a covector: sup |θ(v)| over ‖v‖_τ = 1.
    pub fn conorm(&self, theta: &DVector<f64>) -> f64 {
        (self.chol_ut_inv.transpose() * theta).norm()
    }

    /// Conjugates g into the Euclidean frame of ⟨·,·⟩_τ: Lᵀ g L⁻ᵀ.
    pub fn conjugate(&self, g: &DMatrix<f64>) -> DMatrix<f64> {
        &self.chol_ut * g * &self.chol_ut_inv
    }

    /// Pulls a vector expressed in the Euclidean frame back: L⁻ᵀ y.
    pub fn from_euclidean(&self, y: &DVector<f64>) -> DVector<f64> {
        &self.chol_ut_inv * y
    }

    /// Pushes a vector into the Euclidean frame: Lᵀ x.
    pub fn to_euclidean(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.chol_ut * x
    }

    /// Operator norm ‖g‖_τ.
    pub fn operator_norm(&self, g: &DMatrix<f64>) -> f64 {
        let conj = self.conjugate(g);
        conj.svd(false, false)
            .singular_values
            .iter()
            .cloned()
            .fold(0.0, f64::max)
    }
}

/// Logarithms of the τ-singular values of g, sorted descending.
///
/// These are the log-eigenvalues of √(g^{*τ}g); the sum vanishes for
/// unit-determinant g.
pub fn singular_values_tau(g: &GroupMatrix, tau: &TauFrame) -> Vec<f64> {
    let conj = tau.conjugate(g.matrix());
    let svd = conj.svd(false, false);
    let mut logs: Vec<f64> = svd.singular_values.iter().map(|s| s.ln()).collect();
    logs.sort_by(|a, b| b.partial_cmp(a).unwrap());
    logs
}

/// Extremal τ-singular data of a matrix: the top left-singular direction,
/// the covector of the hyperplane τ-orthogonal to the bottom
/// right-singular direction, and the sorted log singular values.
///
/// The top direction is where `g` expands most in the τ-norm; the
/// hyperplane is where it contracts most. For dominated (high-gap)
/// products these converge to the attracting point and repelling
/// hyperplane of the dynamics.
pub struct TauSvdExtremes {
    /// Left-singular direction of the largest singular value.
    pub top_direction: DVector<f64>,
    /// Covector vanishing on the span of all right-singular directions
    /// except the smallest.
    pub bottom_hyperplane: DVector<f64>,
    /// Log singular values, sorted descending.
    pub logs: Vec<f64>,
}

/// Compute [`TauSvdExtremes`] via the Euclidean SVD of the τ-conjugated
/// matrix. nalgebra does not guarantee singular-value ordering, so the
/// extremes are selected by value.
pub fn tau_svd_extremes(space: &QSpace, g: &GroupMatrix, tau: &TauFrame) -> TauSvdExtremes {
    let k = tau.conjugate(g.matrix());
    // Exact inverse through the form, then the frame homomorphism:
    // conjugate(g⁻¹) = conjugate(g)⁻¹ without numerical inversion.
    let k_inv = tau.conjugate(&form_inverse(space, g.matrix()));
    let u_top = top_gram_direction(&k);
    // Bottom left-singular vector of K = top right-singular vector of
    // K⁻¹ = top left-singular vector of K⁻ᵀ. The hyperplane spanned by
    // all image directions except the most contracted one has this
    // covector, carried back through the frame.
    let u_bot = top_gram_direction(&k_inv.transpose());
    // Log singular values: upper half read from K, lower half mirrored
    // from K⁻¹ (σᵢ(K⁻¹) = 1/σ_{d+1−i}(K)), so each reported log stays
    // within the floating-point range of its own matrix.
    let d = k.nrows();
    let mut logs_k: Vec<f64> = k.singular_values().iter().map(|s| s.ln()).collect();
    logs_k.sort_by(|a, b| b.total_cmp(a));
    let mut logs_inv: Vec<f64> = k_inv.singular_values().iter().map(|s| s.ln()).collect();
    logs_inv.sort_by(|a, b| b.total_cmp(a));
    let logs = (0..d)
        .map(|i| {
            if i < d.div_ceil(2) {
                logs_k[i]
            } else {
                -logs_inv[d - 1 - i]
            }
        })
        .collect();
    TauSvdExtremes {
        top_direction: tau.from_euclidean(&u_top),
        bottom_hyperplane: tau.inner() * tau.from_euclidean(&u_bot),
        logs,
    }
}

/// Unit top eigenvector of the Gram product m·mᵀ, i.e. the top
/// left-singular direction of m. The matrix is rescaled first and only the
/// dominant eigenpair is trusted, which stays accurate even when the full
/// singular spectrum exceeds floating-point dynamic range.
fn top_gram_direction(m: &DMatrix<f64>) -> DVector<f64> {
    let scale = m.amax();
    let mh = m / scale;
    let gram = &mh * mh.transpose();
    let eig = nalgebra::SymmetricEigen::new(gram);
    let mut idx = 0;
    for i in 1..eig.eigenvalues.len() {
        if eig.eigenvalues[i] > eig.eigenvalues[idx] {
            idx = i;
        }
    }
    eig.eigenvectors.column(idx).into_owned()
}

/// Logarithms of the moduli of the eigenvalues of g, sorted descending.
pub fn eigen_moduli(g: &GroupMatrix) -> Vec<f64> {
    eigen_moduli_raw(g.matrix())
}

pub(crate) fn eigen_moduli_raw(m: &DMatrix<f64>) -> Vec<f64> {
    // Normalize to unit max entry before the QR eigensolve: matrices from
    // long products reach norms where the shift strategy degrades or
    // overflows, while eigenvalue logarithms just shift back by the scale.
    let s = m.amax();
    if !(s > 0.0) || !s.is_finite() {
        return vec![f64::NEG_INFINITY; m.nrows()];
    }
    let eig = m.unscale(s).complex_eigenvalues();
    let ln_s = s.ln();
    let mut logs: Vec<f64> = eig.iter().map(|z| z.norm().ln() + ln_s).collect();
    logs.sort_by(|a, b| b.total_cmp(a));
    logs
}

/// Complex eigenvalues sorted by descending modulus. Non-finite entries
/// (eigensolver overflow on extreme inputs) sort first so callers can
/// detect them at the front.
pub(crate) fn eigenvalues_by_modulus(m: &DMatrix<f64>) -> Vec<Complex<f64>> {
    // Normalize by the largest entry before calling the solver: on
    // strongly stretching inputs the raw QR iteration can fail to
    // converge and return NaNs, while the scaled matrix is benign and
    // its spectrum is exactly the spectrum divided by the scale.
    let s = m.amax();
    if !(s > 0.0) || !s.is_finite() {
        return vec![Complex::new(f64::NAN, 0.0); m.nrows()];
    }
    let eig = m.unscale(s).complex_eigenvalues();
    let mut v: Vec<Complex<f64>> = eig.iter().map(|z| z * s).collect();
    v.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    v
}
