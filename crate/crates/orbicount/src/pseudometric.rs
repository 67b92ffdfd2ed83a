//! Geometry of the negative-line hyperboloid and the space of negative
//! q-planes at a chosen basepoint pair (o, τ): the basepoint reflection,
//! geodesic classification, space-like lengths, boundary-avoidance
//! margins, and the two generalized Cartan projections `b_o` and `b_tau`
//! together with their explicit factorizations.
//!
//! Everything is computed by transporting to the *standard frame*
//! (basepoint on the last axis, τ spanned by the trailing q axes, where
//! the τ-inner product is exactly Euclidean) through a form-preserving
//! change of basis built once per [`BasepointFrame`]. In that frame the
//! one-parameter model geodesic is the hyperbolic boost acting in the
//! (first, last)-coordinate plane, and the projection cone is the single
//! nonnegative ray of boost strengths: projections are plain scalars
//! `s ≥ 0`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::qlinalg::{eigen_moduli_raw, form_inverse, GroupMatrix, ProjPoint, QSpace, TauFrame};
use crate::{tol, Error, Result};

/// Causal type of the geodesic through a pair of distinct timelike lines,
/// read off the signature of the form restricted to their span.
///
/// The classifier never *returns* [`GeodesicClass::Lightlike`]: inputs
/// inside the numerical window around the degenerate case are rejected
/// with [`Error::NearLightlike`], because the trichotomy is exact in
/// exact arithmetic but not in floating point. The variant exists so
/// downstream code can name the excluded case.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum GeodesicClass {
    /// Signature (1,1) on the span: the pair is joined by a space-like
    /// geodesic with a well-defined length.
    Spacelike,
    /// Signature (0,2): negative-definite span.
    Timelike,
    /// Degenerate restricted form (never produced by the classifier).
    Lightlike,
}

/// A basepoint pair: a timelike line `o` (the point of the hyperboloid)
/// together with a negative-definite q-plane `τ` containing it, plus the
/// derived data every operation needs: the reflection through `o`, and a
/// form-preserving change of basis to the standard frame.
#[derive(Clone, Debug)]
pub struct BasepointFrame {
    space: QSpace,
    o: ProjPoint,
    /// Representative scaled to self-pairing −1, sign matching `o`.
    o_hat: DVector<f64>,
    /// Reflection `J^o`: +1 on `o`, −1 on its form-complement.
    jo: GroupMatrix,
    tau: TauFrame,
    /// Columns: form-orthonormal basis adapted to (o, τ) — first p
    /// positive vectors spanning the τ-complement, then q−1 negative
    /// vectors spanning τ ∩ o^⊥, then ô. Maps the standard frame onto
    /// this one.
    adapted: GroupMatrix,
    /// Inverse of `adapted`: maps this frame onto the standard one.
    transport: GroupMatrix,
}

/// The model boost by `s` in the (first, last)-coordinate plane of a
/// d-dimensional standard frame.
pub(crate) fn standard_boost(d: usize, s: f64) -> DMatrix<f64> {
    let mut m = DMatrix::identity(d, d);
    m[(0, 0)] = s.cosh();
    m[(d - 1, d - 1)] = s.cosh();
    m[(0, d - 1)] = s.sinh();
    m[(d - 1, 0)] = s.sinh();
    m
}

/// Orthogonal (Euclidean) matrix mapping the `axis`-th coordinate vector
/// onto the given unit vector: the Householder reflection through their
/// bisector, or the identity when they already agree.
fn rotation_onto(dim: usize, axis: usize, target: &DVector<f64>) -> DMatrix<f64> {
    let mut diff = -target.clone();
    diff[axis] += 1.0;
    let n2 = diff.norm_squared();
    if n2 < 1e-28 {
        return DMatrix::identity(dim, dim);
    }
    let n = diff / n2.sqrt();
    DMatrix::identity(dim, dim) - 2.0 * &n * n.transpose()
}

/// Modified Gram–Schmidt for the quadratic form on a list of candidate
/// vectors, keeping vectors of self-pairing sign `sign` (+1 or −1),
/// normalized to self-pairing ±1, until `needed` have been collected.
pub(crate) fn form_orthonormalize(
    space: &QSpace,
    candidates: &[DVector<f64>],
    sign: f64,
    needed: usize,
) -> Result<Vec<DVector<f64>>> {
    let mut accepted: Vec<DVector<f64>> = Vec::with_capacity(needed);
    for cand in candidates {
        if accepted.len() == needed {
            break;
        }
        let mut v = cand.clone();
        for u in &accepted {
            // ⟨u,u⟩ = sign, so the form-projection coefficient is ⟨v,u⟩/sign.
            let c = space.form_apply(u).dot(&v) / sign;
            v -= c * u;
        }
        let self_pair = space.form_apply(&v).dot(&v);
        if sign * self_pair > 1e-10 {
            accepted.push(v / (sign * self_pair).sqrt());
        }
    }
    if accepted.len() != needed {
        return Err(Error::DimensionMismatch(format!(
            "form-orthonormalization found {} definite directions, needed {needed}",
            accepted.len()
        )));
    }
    Ok(accepted)
}

/// Complete a unit positive vector `w` orthogonal to the last axis into a
/// form-preserving matrix that fixes the last axis and sends the first
/// axis exactly to `w` — an explicit element of the basepoint stabilizer
/// in the standard frame (either connected component).
///
/// Built from form-reflections through `w ± e₀`: the mirror axis sign is
/// chosen so its self-pairing `2 ± 2⟨w,e₀⟩` has magnitude at least 2,
/// which keeps the construction exact for every admissible `w`, however
/// far it is boosted from the coordinate axes.
fn stabilizer_onto(space: &QSpace, w: &DVector<f64>) -> Result<DMatrix<f64>> {
    let d = space.d();
    let reflection = |v: &DVector<f64>| -> Result<DMatrix<f64>> {
        let jv = space.form_apply(v);
        let vv = jv.dot(v);
        if vv.abs() < 1e-12 {
            return Err(Error::DimensionMismatch(
                "reflection axis onto the displacement direction is lightlike".into(),
            ));
        }
        Ok(DMatrix::identity(d, d) - (2.0 / vv) * v * jv.transpose())
    };
    let e0 = DVector::from_fn(d, |i, _| if i == 0 { 1.0 } else { 0.0 });
    let a = space.form_apply(&e0).dot(w);
    if a <= 0.0 {
        // Mirror through w − e₀ swaps e₀ and w directly.
        reflection(&(w - &e0))
    } else {
        // Mirror through w + e₀ sends e₀ to −w; reflecting through w
        // itself restores the sign.
        Ok(reflection(w)? * reflection(&(w + &e0))?)
    }
}

impl BasepointFrame {
    /// Build the frame at a timelike line `o_rep`, with an explicit
    /// negative q-plane containing it or (by default) the deterministic
    /// choice `span{o} ⊕ (maximal negative subspace of o^⊥)` read off the
    /// eigendecomposition of the restricted form.
    pub fn new(
        space: &QSpace,
        o_rep: &DVector<f64>,
        tau_basis: Option<&[DVector<f64>]>,
    ) -> Result<BasepointFrame> {
        let o = ProjPoint::new(o_rep.clone())?;
        let c = space.pairing(o.rep(), o.rep())?;
        if c >= -1e-12 {
            return Err(Error::NotTimelike { pairing: c });
        }
        let o_hat = o.rep() / (-c).sqrt();

        // J^o = −I − 2 ô (J ô)ᵀ: +1 on ô (self-pairing −1), −1 on ô^⊥.
        let d = space.d();
        let jo_m = -DMatrix::<f64>::identity(d, d)
            - 2.0 * &o_hat * space.form_apply(&o_hat).transpose();
        let jo = GroupMatrix::new(space, jo_m)?;

        let raw_tau: Vec<DVector<f64>> = match tau_basis {
            Some(basis) => {
                if basis.len() != space.q() {
                    return Err(Error::PlaneDimension {
                        got: basis.len(),
                        expected: space.q(),
                    });
                }
                // The plane must contain the basepoint: least-squares
                // residual of expressing ô in the basis.
                let bm = DMatrix::from_columns(basis);
                let svd = bm.clone().svd(true, true);
                let coeffs = svd
                    .solve(&o_hat, 1e-12)
                    .map_err(|e| Error::DimensionMismatch(e.to_string()))?;
                let residual = (&bm * coeffs - &o_hat).norm();
                if residual > 1e-8 {
                    return Err(Error::TauMissesBasepoint { residual });
                }
                basis.to_vec()
            }
            None => {
                // Maximal negative subspace of ô^⊥, deterministically from
                // the eigendecomposition of the restricted form.
                let comp = space.q_complement(std::slice::from_ref(&o_hat))?;
                let cmat = DMatrix::from_columns(&comp);
                let gram = cmat.transpose() * space.form() * &cmat;
                let gram = (&gram + gram.transpose()) * 0.5;
                let eig = SymmetricEigen::new(gram);
                let mut neg: Vec<(f64, usize)> = eig
                    .eigenvalues
                    .iter()
                    .enumerate()
                    .filter(|(_, &l)| l < -1e-10)
                    .map(|(i, &l)| (l, i))
                    .collect();
                neg.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
                if neg.len() != space.q() - 1 {
                    return Err(Error::DimensionMismatch(format!(
                        "complement of the basepoint has {} negative directions, expected {}",
                        neg.len(),
                        space.q() - 1
                    )));
                }
                let mut basis: Vec<DVector<f64>> = neg
                    .iter()
                    .map(|&(_, i)| {
                        let v = &cmat * eig.eigenvectors.column(i);
                        let n = -space.form_apply(&v).dot(&v);
                        v / n.sqrt()
                    })
                    .collect();
                basis.push(o_hat.clone());
                basis
            }
        };
        let tau = TauFrame::new(space, &raw_tau)?;

        // Adapted basis: positive block = form-orthonormalized
        // τ-complement; middle block = form-orthonormalized projection of
        // the τ basis off ô; last column = ô.
        let pos_span = space.q_complement(&raw_tau)?;
        let positives = form_orthonormalize(space, &pos_span, 1.0, space.p())?;
        let projected: Vec<DVector<f64>> = raw_tau
            .iter()
            .map(|v| {
                let a = space.form_apply(&o_hat).dot(v);
                v + a * &o_hat
            })
            .collect();
        let negatives = form_orthonormalize(space, &projected, -1.0, space.q() - 1)?;
        let mut cols = positives;
        cols.extend(negatives);
        cols.push(o_hat.clone());
        let adapted = GroupMatrix::new(space, DMatrix::from_columns(&cols))?;
        let transport = adapted.inverse(space);

        Ok(BasepointFrame {
            space: space.clone(),
            o,
            o_hat,
            jo,
            tau,
            adapted,
            transport,
        })
    }

    /// The signature space this frame lives in.
    pub fn space(&self) -> &QSpace {
        &self.space
    }

    /// The basepoint as a projective point.
    pub fn basepoint(&self) -> &ProjPoint {
        &self.o
    }

    /// The representative of the basepoint with self-pairing −1.
    pub fn basepoint_vector(&self) -> &DVector<f64> {
        &self.o_hat
    }

    /// The reflection fixing the basepoint line and negating its
    /// form-complement.
    pub fn reflection(&self) -> &GroupMatrix {
        &self.jo
    }

    /// The negative q-plane through the basepoint and its inner product.
    pub fn tau(&self) -> &TauFrame {
        &self.tau
    }

    /// Form-orthonormal basis adapted to (o, τ): standard frame → this
    /// frame.
    pub fn adapted_basis(&self) -> &GroupMatrix {
        &self.adapted
    }

    /// Inverse of [`BasepointFrame::adapted_basis`]: this frame → standard
    /// frame.
    pub fn transport(&self) -> &GroupMatrix {
        &self.transport
    }

    /// Conjugate `g` into the standard frame.
    pub fn to_standard(&self, g: &GroupMatrix) -> DMatrix<f64> {
        self.transport.matrix() * g.matrix() * self.adapted.matrix()
    }

    /// Conjugate a standard-frame matrix back into this frame.
    pub fn from_standard(&self, m: DMatrix<f64>) -> Result<GroupMatrix> {
        GroupMatrix::new(
            &self.space,
            self.adapted.matrix() * m * self.transport.matrix(),
        )
    }

    /// The model boost by `s` along this frame's distinguished space-like
    /// direction: the unit-speed geodesic flow through the basepoint.
    pub fn model_boost(&self, s: f64) -> GroupMatrix {
        let m = self.adapted.matrix() * standard_boost(self.space.d(), s) * self.transport.matrix();
        GroupMatrix::new_unchecked(m)
    }

    /// Pairing of a vector against the basepoint representative.
    fn pair_with_o(&self, v: &DVector<f64>) -> f64 {
        self.space.form_apply(&self.o_hat).dot(v)
    }
}

/// Outcome of classifying the displacement of the basepoint: either a
/// normalized image representative with its pairing against ô, or the
/// degenerate cases.
fn displacement_pairing(frame: &BasepointFrame, other_hat: &DVector<f64>) -> Result<f64> {
    let x = frame.pair_with_o(other_hat);
    if (x.abs() - 1.0).abs() <= tol::LIGHTLIKE {
        // |⟨ô,ô′⟩| = 1 covers both the coincident pair and the genuinely
        // light-like span; separate them by the representative distance.
        let coincident = (other_hat - &frame.o_hat).norm().min((other_hat + &frame.o_hat).norm());
        if coincident < 1e-8 {
            return Err(Error::CoincidentBasepoints);
        }
        return Err(Error::NearLightlike {
            margin: (x.abs() - 1.0).abs(),
        });
    }
    Ok(x)
}

/// Normalize a timelike projective point to self-pairing −1.
fn timelike_hat(frame: &BasepointFrame, point: &ProjPoint) -> Result<DVector<f64>> {
    let c = frame.space.pairing(point.rep(), point.rep())?;
    if c >= -1e-12 {
        return Err(Error::NotTimelike { pairing: c });
    }
    Ok(point.rep() / (-c).sqrt())
}

/// Classify the geodesic through the basepoint and a second timelike
/// line by the signature of the restricted form on their span:
/// |⟨ô,ô′⟩| > 1 is space-like, < 1 is time-like. Pairs inside the
/// light-like window are rejected ([`Error::NearLightlike`]); the
/// coincident pair spans no geodesic ([`Error::CoincidentBasepoints`]).
pub fn classify_pair(frame: &BasepointFrame, other: &ProjPoint) -> Result<GeodesicClass> {
    let other_hat = timelike_hat(frame, other)?;
    let x = displacement_pairing(frame, &other_hat)?;
    Ok(if x.abs() > 1.0 {
        GeodesicClass::Spacelike
    } else {
        GeodesicClass::Timelike
    })
}

/// Length of the space-like geodesic segment from the basepoint to
/// `other`: arccosh |⟨ô, ô′⟩| on representatives normalized to
/// self-pairing −1. The coincident pair has length 0; time-like and
/// near-light-like pairs are errors.
pub fn length_spacelike(frame: &BasepointFrame, other: &ProjPoint) -> Result<f64> {
    let other_hat = timelike_hat(frame, other)?;
    match displacement_pairing(frame, &other_hat) {
        Ok(x) if x.abs() > 1.0 => Ok(x.abs().acosh()),
        Ok(_) => Err(Error::NotSpacelike { class: "timelike" }),
        Err(Error::CoincidentBasepoints) => Ok(0.0),
        Err(e) => Err(e),
    }
}

/// Fast path for bulk counting: the space-like length of the segment from
/// the basepoint to its image under `g`, computed from one matrix-vector
/// product and one pairing. Equal to [`b_o`] on its shared domain (a
/// tested invariant).
pub fn image_length(frame: &BasepointFrame, g: &GroupMatrix) -> Result<f64> {
    let u = g.matrix() * &frame.o_hat;
    match displacement_pairing(frame, &u) {
        Ok(x) if x.abs() > 1.0 => Ok(x.abs().acosh()),
        Ok(_) => Err(Error::NotSpacelike { class: "timelike" }),
        Err(Error::CoincidentBasepoints) => Ok(0.0),
        Err(e) => Err(e),
    }
}

/// The spectral Cartan projection at the basepoint: half the top
/// logarithmic eigenvalue modulus of `J^o g J^o g⁻¹`.
///
/// Defined when `g` displaces the basepoint space-like (or fixes it, in
/// which case the value is 0); equal to the geodesic length
/// `length_spacelike(frame, g·o)` there.
pub fn b_o(frame: &BasepointFrame, g: &GroupMatrix) -> Result<f64> {
    let u = g.matrix() * &frame.o_hat;
    match displacement_pairing(frame, &u) {
        Ok(x) if x.abs() > 1.0 => {}
        Ok(_) => return Err(Error::NotSpacelike { class: "timelike" }),
        Err(Error::CoincidentBasepoints) => return Ok(0.0),
        Err(e) => return Err(e),
    }
    let gi = form_inverse(&frame.space, g.matrix());
    let m = frame.jo.matrix() * g.matrix() * frame.jo.matrix() * gi;
    let logs = eigen_moduli_raw(&m);
    Ok((0.5 * logs[0]).max(0.0))
}

/// The norm Cartan projection at the pair (o, τ): half the logarithm of
/// the τ-operator norm of `J^o g J^o g⁻¹`. Total on the group, and
/// dominates [`b_o`] wherever the latter is defined (operator norm ≥
/// spectral radius).
pub fn b_tau(frame: &BasepointFrame, g: &GroupMatrix) -> f64 {
    let gi = form_inverse(&frame.space, g.matrix());
    let m = frame.jo.matrix() * g.matrix() * frame.jo.matrix() * gi;
    (0.5 * frame.tau.operator_norm(&m).ln()).max(0.0)
}

/// Polar-style factorization `g = k · exp(s·boost) · h` with `k`
/// preserving the τ-inner product, `h` fixing the basepoint vector, and
/// `s ≥ 0` the (unique) boost component — equal to [`b_tau`].
///
/// Construction in the standard frame: split `g·ô` into its positive and
/// negative coordinate blocks `v₊ ⊕ v₋`; then `s = asinh ‖v₊‖`, `k`
/// rotates the model direction pair onto `(v̂₊, v₋/cosh s)` inside the
/// block-orthogonal stabilizer of the splitting, and `h = exp(−s·boost)
/// k⁻¹ g` fixes the last axis exactly.
pub fn decompose_kbh(
    frame: &BasepointFrame,
    g: &GroupMatrix,
) -> Result<(GroupMatrix, f64, GroupMatrix)> {
    let space = &frame.space;
    let (p, q, d) = (space.p(), space.q(), space.d());
    let gt = frame.to_standard(g);
    let u = &gt * DVector::from_fn(d, |i, _| if i == d - 1 { 1.0 } else { 0.0 });
    let v_plus = u.rows(0, p).into_owned();
    let v_minus = u.rows(p, q).into_owned();
    let s = v_plus.norm().asinh();

    let k_plus = if v_plus.norm() > 1e-14 {
        rotation_onto(p, 0, &(&v_plus / v_plus.norm()))
    } else {
        DMatrix::identity(p, p)
    };
    let k_minus = rotation_onto(q, q - 1, &(&v_minus / v_minus.norm()));
    let mut k = DMatrix::zeros(d, d);
    k.view_mut((0, 0), (p, p)).copy_from(&k_plus);
    k.view_mut((p, p), (q, q)).copy_from(&k_minus);

    let h = standard_boost(d, -s) * k.transpose() * &gt;

    // Residual checks: the factorization must reproduce g and h must fix
    // the basepoint.
    let recon = &k * standard_boost(d, s) * &h;
    let rel = (&recon - &gt).norm() / gt.norm().max(1.0);
    let fix = (h.column(d - 1).into_owned()
        - DVector::from_fn(d, |i, _| if i == d - 1 { 1.0 } else { 0.0 }))
    .norm();
    if rel > 1e-8 || fix > 1e-8 {
        return Err(Error::DecompositionResidual {
            residual: rel.max(fix),
        });
    }
    Ok((frame.from_standard(k)?, s, frame.from_standard(h)?))
}

/// Geodesic-adapted factorization `g = h · exp(s·boost) · h′` with both
/// factors stabilizing the basepoint line and `s = b_o(g)` the space-like
/// displacement length. Requires `g·o` space-like from `o` (or equal to
/// it, giving `s = 0`).
pub fn decompose_hbh(
    frame: &BasepointFrame,
    g: &GroupMatrix,
) -> Result<(GroupMatrix, f64, GroupMatrix)> {
    let space = &frame.space;
    let d = space.d();
    let gt = frame.to_standard(g);
    let e_last = DVector::from_fn(d, |i, _| if i == d - 1 { 1.0 } else { 0.0 });
    let u = &gt * &e_last;
    let x = -u[d - 1]; // ⟨e_d, u⟩ in the standard frame

    if (x.abs() - 1.0).abs() <= tol::LIGHTLIKE {
        let coincident = (&u - &e_last).norm().min((&u + &e_last).norm());
        if coincident < 1e-8 {
            // g stabilizes the basepoint: the factorization is trivial.
            return Ok((
                GroupMatrix::new_unchecked(DMatrix::identity(d, d)),
                0.0,
                g.clone(),
            ));
        }
        return Err(Error::NearLightlike {
            margin: (x.abs() - 1.0).abs(),
        });
    }
    if x.abs() < 1.0 {
        return Err(Error::NotSpacelike { class: "timelike" });
    }

    let s = x.abs().acosh();
    let eps = if u[d - 1] >= 0.0 { 1.0 } else { -1.0 };
    let mut u_perp = u.clone();
    u_perp[d - 1] = 0.0;
    let n2 = space.form_apply(&u_perp).dot(&u_perp);
    let w_hat = eps / n2.sqrt() * u_perp;

    let h1 = stabilizer_onto(space, &w_hat)?;
    let h1_inv = form_inverse(space, &h1);
    let hp = standard_boost(d, -s) * h1_inv * &gt;

    // h′ must fix the basepoint line (up to the lift sign ε).
    let hp_o = &hp * &e_last;
    let fix = (&hp_o - &e_last).norm().min((&hp_o + &e_last).norm());
    let recon = &h1 * standard_boost(d, s) * &hp;
    let rel = (&recon - &gt).norm() / gt.norm().max(1.0);
    if rel > 1e-8 || fix > 1e-8 {
        return Err(Error::DecompositionResidual {
            residual: rel.max(fix),
        });
    }
    Ok((frame.from_standard(h1)?, s, frame.from_standard(hp)?))
}

/// Distance between two negative q-planes, from the spectrum of the
/// relative inner-product matrix: `sqrt(Σᵢ log²μᵢ / 8)` over the
/// eigenvalues μᵢ of `M₁⁻¹M₂`. Normalized so the model boost flow has
/// unit speed.
pub fn xg_distance(tau1: &TauFrame, tau2: &TauFrame) -> f64 {
    let chol = nalgebra::Cholesky::new(tau1.inner().clone())
        .expect("inner-product matrices of negative planes are positive definite");
    let l = chol.l();
    let t1 = l
        .solve_lower_triangular(tau2.inner())
        .expect("Cholesky factor is invertible");
    let a = l
        .solve_lower_triangular(&t1.transpose())
        .expect("Cholesky factor is invertible");
    let a = (&a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::new(a);
    let sum: f64 = eig.eigenvalues.iter().map(|&m| m.max(1e-300).ln().powi(2)).sum();
    (sum / 8.0).sqrt()
}

/// Deterministic sample of basepoint-stabilizer elements (identity
/// component): exponentials of pseudo-random form-skew generators that
/// annihilate the basepoint, at a spread of magnitudes. The sequence is a
/// prefix-stable function of the seed: growing `n` extends it.
pub fn sample_stabilizer(frame: &BasepointFrame, n: usize, seed: u64) -> Vec<GroupMatrix> {
    let space = &frame.space;
    let (p, _q, d) = (space.p(), space.q(), space.d());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        // so(p, q−1) inside so(p,q): zero last row/column.
        let mut x = DMatrix::zeros(d, d);
        for i in 0..p {
            for j in (i + 1)..p {
                let a = rng.gen_range(-1.0..1.0);
                x[(i, j)] = a;
                x[(j, i)] = -a;
            }
        }
        for i in p..d - 1 {
            for j in (i + 1)..d - 1 {
                let a = rng.gen_range(-1.0..1.0);
                x[(i, j)] = a;
                x[(j, i)] = -a;
            }
        }
        for i in 0..p {
            for j in p..d - 1 {
                let b = rng.gen_range(-1.0..1.0);
                x[(i, j)] = b;
                x[(j, i)] = b;
            }
        }
        let scale = rng.gen_range(0.0..2.0);
        let ht = (x * scale).exp();
        let m = frame.adapted.matrix() * ht * frame.transport.matrix();
        out.push(GroupMatrix::new_unchecked(m));
    }
    out
}

/// Deterministic sample of τ-inner-product-preserving rotations:
/// exponentials of block-skew generators in the adapted frame. Prefix
/// stable in `n` for a fixed seed.
pub fn sample_tau_rotation(frame: &BasepointFrame, n: usize, seed: u64) -> Vec<GroupMatrix> {
    let space = &frame.space;
    let (p, _q, d) = (space.p(), space.q(), space.d());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let mut x = DMatrix::zeros(d, d);
        for i in 0..p {
            for j in (i + 1)..p {
                let a = rng.gen_range(-1.0..1.0);
                x[(i, j)] = a;
                x[(j, i)] = -a;
            }
        }
        for i in p..d {
            for j in (i + 1)..d {
                let a = rng.gen_range(-1.0..1.0);
                x[(i, j)] = a;
                x[(j, i)] = -a;
            }
        }
        let scale = rng.gen_range(0.0..2.0);
        let kt = (x * scale).exp();
        let m = frame.adapted.matrix() * kt * frame.transport.matrix();
        out.push(GroupMatrix::new_unchecked(m));
    }
    out
}

/// Empirical check that [`b_tau`] is the distance from `g⁻¹·τ` to the
/// basepoint-stabilizer orbit of τ: the minimum of [`xg_distance`] over
/// the identity plus `n_samples − 1` sampled stabilizer elements. Always
/// ≥ `b_tau(frame, g)` up to roundoff, and nonincreasing in `n_samples`.
pub fn min_dist_sampling_check(frame: &BasepointFrame, g: &GroupMatrix, n_samples: usize) -> f64 {
    let space = &frame.space;
    let g_inv = g.inverse(space);
    let moved_basis: Vec<DVector<f64>> = frame
        .tau
        .basis()
        .iter()
        .map(|b| g_inv.matrix() * b)
        .collect();
    let moved = TauFrame::new(space, &moved_basis)
        .expect("image of a negative plane under the group is a negative plane");

    let mut best = xg_distance(&moved, &frame.tau);
    if n_samples > 1 {
        for h in sample_stabilizer(frame, n_samples - 1, 0x5EED) {
            let basis: Vec<DVector<f64>> =
                frame.tau.basis().iter().map(|b| h.matrix() * b).collect();
            let htau = TauFrame::new(space, &basis)
                .expect("image of a negative plane under the group is a negative plane");
            let dist = xg_distance(&moved, &htau);
            if dist < best {
                best = dist;
            }
        }
    }
    best
}

/// Minimum modulus of the pairing between the basepoint representative
/// and unit representatives of a sampled limit set. Strictly positive
/// values certify that the basepoint lies in the domain where the
/// counting applies; 0 refutes it.
pub fn omega_margin(frame: &BasepointFrame, limit_sample: &[ProjPoint]) -> Result<f64> {
    if limit_sample.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    Ok(limit_sample
        .iter()
        .map(|xi| frame.pair_with_o(xi.rep()).abs())
        .fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn space22() -> QSpace {
        QSpace::new(2, 2).unwrap()
    }

    fn e(space: &QSpace, i: usize) -> DVector<f64> {
        DVector::from_fn(space.d(), |j, _| if j == i { 1.0 } else { 0.0 })
    }

    /// Frame with the basepoint on the last axis: the standard frame.
    fn standard_frame(space: &QSpace) -> BasepointFrame {
        BasepointFrame::new(space, &e(space, space.d() - 1), None).unwrap()
    }

    /// Frame at a tilted timelike basepoint with the default plane.
    fn tilted_frame(space: &QSpace) -> BasepointFrame {
        let o = DVector::from_row_slice(&[0.3, 0.1, 1.2, 0.4]);
        BasepointFrame::new(space, &o, None).unwrap()
    }

    /// Pseudo-random form-preserving element: exponential of a seeded
    /// form-skew generator.
    fn random_group(space: &QSpace, rng: &mut ChaCha8Rng, scale: f64) -> GroupMatrix {
        let (p, d) = (space.p(), space.d());
        let mut x = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in (i + 1)..d {
                let a = rng.gen_range(-scale..scale);
                if i < p && j < p || i >= p && j >= p {
                    x[(i, j)] = a;
                    x[(j, i)] = -a;
                } else {
                    x[(i, j)] = a;
                    x[(j, i)] = a;
                }
            }
        }
        GroupMatrix::new(space, x.exp()).unwrap()
    }

    // ------------------------- frame construction -------------------

    #[test]
    fn frame_at_third_axis_frozen_reflection_and_plane() {
        let sp = space22();
        let frame = BasepointFrame::new(&sp, &e(&sp, 2), None).unwrap();
        let expected = DMatrix::from_diagonal(&DVector::from_row_slice(&[-1.0, -1.0, 1.0, -1.0]));
        assert!((frame.reflection().matrix() - expected).norm() < 1e-12);
        // Default plane is span{e₃,e₄}; its inner-product matrix is the
        // identity (hand computation: the projection is diag(0,0,1,1), so
        // J(I−2P) = J·diag(1,1,−1,−1) = I).
        assert!((frame.tau().inner() - DMatrix::<f64>::identity(4, 4)).norm() < 1e-10);
    }

    #[test]
    fn frame_at_last_axis_frozen_reflection() {
        for (p, q) in [(2usize, 2usize), (3, 2)] {
            let sp = QSpace::new(p, q).unwrap();
            let frame = standard_frame(&sp);
            let mut diag = vec![-1.0; sp.d()];
            diag[sp.d() - 1] = 1.0;
            let expected = DMatrix::from_diagonal(&DVector::from_vec(diag));
            assert!((frame.reflection().matrix() - expected).norm() < 1e-12);
            // Standard frame: transport is (up to sign of columns) trivial,
            // and the plane's inner product is the identity.
            assert!((frame.tau().inner() - DMatrix::<f64>::identity(sp.d(), sp.d())).norm() < 1e-10);
        }
    }

    #[test]
    fn spacelike_basepoint_rejected() {
        let sp = space22();
        assert!(matches!(
            BasepointFrame::new(&sp, &e(&sp, 0), None),
            Err(Error::NotTimelike { .. })
        ));
    }

    #[test]
    fn explicit_plane_must_contain_basepoint() {
        let sp = space22();
        let off_plane = vec![e(&sp, 3), {
            let mut v = e(&sp, 2);
            v[0] = 0.5;
            v
        }];
        assert!(matches!(
            BasepointFrame::new(&sp, &e(&sp, 2), Some(&off_plane)),
            Err(Error::TauMissesBasepoint { .. })
        ));
        // Wrong plane dimension.
        let short = vec![e(&sp, 2)];
        assert!(matches!(
            BasepointFrame::new(&sp, &e(&sp, 2), Some(&short)),
            Err(Error::PlaneDimension { got: 1, expected: 2 })
        ));
    }

    #[test]
    fn reflection_is_involutive_and_fixes_basepoint() {
        let sp = space22();
        for frame in [standard_frame(&sp), tilted_frame(&sp)] {
            let j = frame.reflection().matrix();
            assert!((j * j - DMatrix::<f64>::identity(4, 4)).norm() < 1e-10);
            let moved = j * frame.basepoint_vector();
            assert!((moved - frame.basepoint_vector()).norm() < 1e-10);
        }
    }

    #[test]
    fn reflection_preserves_tau_norm_exactly() {
        let sp = space22();
        let frame = tilted_frame(&sp);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let v = DVector::from_fn(4, |_, _| rng.gen_range(-2.0..2.0));
            let jv = frame.reflection().matrix() * &v;
            let (a, b) = (frame.tau().norm(&jv), frame.tau().norm(&v));
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn adapted_basis_is_form_preserving_and_lands_on_frame() {
        let sp = space22();
        let frame = tilted_frame(&sp);
        // Last column of the adapted basis is the basepoint vector.
        let last = frame.adapted_basis().matrix().column(3).into_owned();
        assert!((last - frame.basepoint_vector()).norm() < 1e-12);
        // Transport of the basepoint is the last standard axis.
        let moved = frame.transport().matrix() * frame.basepoint_vector();
        assert!((moved - e(&sp, 3)).norm() < 1e-10);
        // The inner product transported through the basis is Euclidean:
        // M = TᵀT.
        let t = frame.transport().matrix();
        let m = t.transpose() * t;
        assert!((frame.tau().inner() - m).norm() < 1e-9);
    }

    // ------------------------- classification -----------------------

    #[test]
    fn classification_trichotomy_examples() {
        let sp = space22();
        let frame = BasepointFrame::new(&sp, &e(&sp, 2), None).unwrap();
        // Space-like: push the basepoint along the model geodesic.
        let moved = frame.model_boost(1.0).matrix() * frame.basepoint_vector();
        let moved = ProjPoint::new(moved).unwrap();
        assert_eq!(classify_pair(&frame, &moved).unwrap(), GeodesicClass::Spacelike);
        assert_relative_eq!(length_spacelike(&frame, &moved).unwrap(), 1.0, epsilon = 1e-10);
        // Time-like: another line inside the negative plane span{e₃,e₄}.
        let inside = ProjPoint::new(DVector::from_row_slice(&[0.0, 0.0, 1.0, 0.3])).unwrap();
        assert_eq!(classify_pair(&frame, &inside).unwrap(), GeodesicClass::Timelike);
        assert!(matches!(
            length_spacelike(&frame, &inside),
            Err(Error::NotSpacelike { class: "timelike" })
        ));
        // Light-like window: ô + n̂ with n̂ null and orthogonal to ô.
        let null_dir = DVector::from_row_slice(&[1.0, 0.0, 0.0, 1.0]);
        let lightlike = ProjPoint::new(frame.basepoint_vector() + 0.4 * null_dir).unwrap();
        assert!(matches!(
            classify_pair(&frame, &lightlike),
            Err(Error::NearLightlike { .. })
        ));
        // Coincident pair.
        assert!(matches!(
            classify_pair(&frame, frame.basepoint()),
            Err(Error::CoincidentBasepoints)
        ));
        assert_relative_eq!(length_spacelike(&frame, frame.basepoint()).unwrap(), 0.0);
        // Non-timelike second point.
        let spacelike_pt = ProjPoint::new(e(&sp, 0)).unwrap();
        assert!(matches!(
            classify_pair(&frame, &spacelike_pt),
            Err(Error::NotTimelike { .. })
        ));
    }

    #[test]
    fn model_boost_matches_exponential_oracle() {
        let sp = space22();
        let frame = tilted_frame(&sp);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let s: f64 = rng.gen_range(0.01..5.0);
            // Independent oracle: exponentiate the boost generator.
            let mut x = DMatrix::zeros(4, 4);
            x[(0, 3)] = s;
            x[(3, 0)] = s;
            let oracle =
                frame.adapted_basis().matrix() * x.exp() * frame.transport().matrix();
            assert!((frame.model_boost(s).matrix() - oracle).norm() < 1e-9 * s.exp());
            // Length along the geodesic equals the parameter.
            let moved = ProjPoint::new(frame.model_boost(s).matrix() * frame.basepoint_vector())
                .unwrap();
            assert_relative_eq!(
                length_spacelike(&frame, &moved).unwrap(),
                s,
                max_relative = 1e-9
            );
        }
    }

    // ------------------------- omega margin --------------------------

    #[test]
    fn omega_margin_frozen_synthetic_values() {
        let sp = space22();
        // Isotropic lines of the (2,1)-block span{e₁,e₂,e₃}: unit
        // representatives (cos a, sin a, 1, 0)/√2.
        let sample: Vec<ProjPoint> = (0..8)
            .map(|i| {
                let a = i as f64 * std::f64::consts::PI / 4.0;
                ProjPoint::new(DVector::from_row_slice(&[a.cos(), a.sin(), 1.0, 0.0])).unwrap()
            })
            .collect();
        let frame3 = BasepointFrame::new(&sp, &e(&sp, 2), None).unwrap();
        let margin = omega_margin(&frame3, &sample).unwrap();
        assert_relative_eq!(margin, 1.0 / 2.0_f64.sqrt(), max_relative = 1e-12);
        let frame4 = BasepointFrame::new(&sp, &e(&sp, 3), None).unwrap();
        let margin = omega_margin(&frame4, &sample).unwrap();
        assert!(margin.abs() < 1e-14);
        assert!(matches!(
            omega_margin(&frame3, &[]),
            Err(Error::InsufficientData { .. })
        ));
    }

    // ------------------------- Cartan projections -------------------

    #[test]
    fn b_o_vanishes_on_stabilizer() {
        let sp = space22();
        let frame = tilted_frame(&sp);
        for h in sample_stabilizer(&frame, 6, 3) {
            assert!(b_o(&frame, &h).unwrap().abs() < 1e-9);
            assert!(b_tau(&frame, &h).abs() < 1e-9);
        }
    }

    #[test]
    fn b_o_model_boost_frozen() {
        let sp = space22();
        for frame in [standard_frame(&sp), tilted_frame(&sp)] {
            let g = frame.model_boost(2.0);
            assert_relative_eq!(b_o(&frame, &g).unwrap(), 2.0, max_relative = 1e-10);
            assert_relative_eq!(b_tau(&frame, &g), 2.0, max_relative = 1e-10);
        }
    }

    #[test]
    fn b_o_recovers_constructed_factorization() {
        let sp = space22();
        let frame = tilted_frame(&sp);
        let hs = sample_stabilizer(&frame, 2, 21);
        let g = GroupMatrix::new_unchecked(
            hs[0].matrix() * frame.model_boost(1.37).matrix() * hs[1].matrix(),
        );
        assert_relative_eq!(b_o(&frame, &g).unwrap(), 1.37, max_relative = 1e-8);
        assert_relative_eq!(
            image_length(&frame, &g).unwrap(),
            1.37,
            max_relative = 1e-8
        );
    }

    #[test]
    fn b_tau_recovers_polar_factorization() {
        let sp = space22();
        let frame = tilted_frame(&sp);
        let k = &sample_tau_rotation(&frame, 1, 5)[0];
        let h = &sample_stabilizer(&frame, 1, 6)[0];
        let g = GroupMatrix::new_unchecked(
            k.matrix() * frame.model_boost(0.8).matrix() * h.matrix(),
        );
        assert_relative_eq!(b_tau(&frame, &g), 0.8, max_relative = 1e-8);
    }

    #[test]
    fn b_o_rejects_timelike_displacement() {
        let sp = space22();
        let frame = BasepointFrame::new(&sp, &e(&sp, 2), None).unwrap();
        // Rotation in the negative (e₃,e₄)-plane moves o inside the plane.
        let mut m = DMatrix::identity(4, 4);
        let (c, s) = (0.4_f64.cos(), 0.4_f64.sin());
        m[(2, 2)] = c;
        m[(2, 3)] = -s;
        m[(3, 2)] = s;
        m[(3, 3)] = c;
        let g = GroupMatrix::new(&sp, m).unwrap();
        assert!(matches!(
            b_o(&frame, &g),
            Err(Error::NotSpacelike { class: "timelike" })
        ));
        // b_tau stays total.
        assert!(b_tau(&frame, &g).is_finite());
    }

    #[test]
    fn projections_invariant_under_their_stabilizers() {
        let sp = space22();
        let frame = tilted_frame(&sp);
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let g = {
            let r = random_group(&sp, &mut rng, 0.4);
            GroupMatrix::new_unchecked(frame.model_boost(1.1).matrix() * r.matrix())
        };
        let base_o = b_o(&frame, &g);
        let base_tau = b_tau(&frame, &g);
        let hs = sample_stabilizer(&frame, 4, 17);
        let ks = sample_tau_rotation(&frame, 4, 18);
        for h in &hs {
            for h2 in &hs {
                let moved = GroupMatrix::new_unchecked(h.matrix() * g.matrix() * h2.matrix());
                if let (Ok(a), Ok(b)) = (&base_o, b_o(&frame, &moved)) {
                    assert_relative_eq!(*a, b, max_relative = 1e-9);
                }
            }
        }
        for k in &ks {
            for h in &hs {
                let moved = GroupMatrix::new_unchecked(k.matrix() * g.matrix() * h.matrix());
                assert_relative_eq!(base_tau, b_tau(&frame, &moved), max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn b_tau_dominates_b_o() {
        let sp = space22();
        let frame = standard_frame(&sp);
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let mut checked = 0;
        for _ in 0..40 {
            let g = random_group(&sp, &mut rng, 0.8);
            if let Ok(bo) = b_o(&frame, &g) {
                assert!(b_tau(&frame, &g) >= bo - 1e-10);
                checked += 1;
            }
        }
        assert!(checked > 10, "sample produced too few space-like moves");
    }

    #[test]
    fn equivariance_under_group_motion() {
        let sp = space22();
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let u = random_group(&sp, &mut rng, 0.5);
        let base = standard_frame(&sp);
        let moved_o = u.matrix() * base.basepoint_vector();
        let moved_tau: Vec<DVector<f64>> =
            base.tau().basis().iter().map(|b| u.matrix() * b).collect();
        let moved = BasepointFrame::new(&sp, &moved_o, Some(&moved_tau)).unwrap();
        let u_inv = u.inverse(&sp);
        for _ in 0..10 {
            let g = random_group(&sp, &mut rng, 0.7);
            let pulled =
                GroupMatrix::new_unchecked(u_inv.matrix() * g.matrix() * u.matrix());
            match (b_o(&moved, &g), b_o(&base, &pulled)) {
                (Ok(a), Ok(b)) => assert_relative_eq!(a, b, max_relative = 1e-8),
                (Err(_), Err(_)) => {}
                (a, b) => panic!("equivariance broke the domain: {a:?} vs {b:?}"),
            }
            assert_relative_eq!(
                b_tau(&moved, &g),
                b_tau(&base, &pulled),
                max_relative = 1e-8
            );
        }
    }

    // ------------------------- decompositions -----------------------

    #[test]
    fn kbh_identity_and_model_boost() {
        let sp = space22();
        let frame = tilted_frame(&sp);
        let id = GroupMatrix::new_unchecked(DMatrix::identity(4, 4));
        let (_, s, _) = decompose_kbh(&frame, &id).unwrap();
        assert!(s.abs() < 1e-12);
        let (k, s, h) = decompose_kbh(&frame, &frame.model_boost(1.6)).unwrap();
        assert_relative_eq!(s, 1.6, max_relative = 1e-10);
        let recon = k.matrix() * frame.model_boost(s).matrix() * h.matrix();
        assert!((recon - frame.model_boost(1.6).matrix()).norm() < 1e-8);
    }

    #[test]
    fn kbh_random_roundtrip_with_invariants() {
        let sp = space22();
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for frame in [standard_frame(&sp), tilted_frame(&sp)] {
            for _ in 0..15 {
                let g = random_group(&sp, &mut rng, 1.0);
                let (k, s, h) = decompose_kbh(&frame, &g).unwrap();
                // Reconstruction.
                let recon = k.matrix() * frame.model_boost(s).matrix() * h.matrix();
                let rel = (&recon - g.matrix()).norm() / g.matrix().norm();
                assert!(rel < 1e-8, "reconstruction residual {rel:.3e}");
                // k preserves the τ-inner product.
                let v = DVector::from_fn(4, |_, _| rng.gen_range(-1.0..1.0));
                assert_relative_eq!(
                    frame.tau().norm(&(k.matrix() * &v)),
                    frame.tau().norm(&v),
                    max_relative = 1e-9
                );
                // h fixes the basepoint vector.
                assert!(
                    (h.matrix() * frame.basepoint_vector() - frame.basepoint_vector()).norm()
                        < 1e-8
                );
                // The scalar component is the norm projection.
                assert_relative_eq!(s, b_tau(&frame, &g), max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn hbh_model_boost_and_roundtrip() {
        let sp = space22();
        let frame = tilted_frame(&sp);
        let (h, s, hp) = decompose_hbh(&frame, &frame.model_boost(0.9)).unwrap();
        assert_relative_eq!(s, 0.9, max_relative = 1e-10);
        let recon = h.matrix() * frame.model_boost(s).matrix() * hp.matrix();
        assert!((recon - frame.model_boost(0.9).matrix()).norm() < 1e-8);

        // Constructed factorization round-trips with the same parameter.
        let hs = sample_stabilizer(&frame, 2, 77);
        let g = GroupMatrix::new_unchecked(
            hs[0].matrix() * frame.model_boost(1.22).matrix() * hs[1].matrix(),
        );
        let (h, s, hp) = decompose_hbh(&frame, &g).unwrap();
        assert_relative_eq!(s, 1.22, max_relative = 1e-8);
        let o = frame.basepoint_vector();
        assert!((h.matrix() * o - o).norm() < 1e-8);
        let hp_o = hp.matrix() * o;
        assert!((&hp_o - o).norm().min((&hp_o + o).norm()) < 1e-8);
        let recon = h.matrix() * frame.model_boost(s).matrix() * hp.matrix();
        let rel = (&recon - g.matrix()).norm() / g.matrix().norm();
        assert!(rel < 1e-8);
    }

    #[test]
    fn hbh_stabilizer_input_is_trivial_factorization() {
        let sp = space22();
        let frame = tilted_frame(&sp);
        let h_in = &sample_stabilizer(&frame, 1, 91)[0];
        let (_, s, hp) = decompose_hbh(&frame, h_in).unwrap();
        assert!(s.abs() < 1e-12);
        let o = frame.basepoint_vector();
        let hp_o = hp.matrix() * o;
        assert!((&hp_o - o).norm().min((&hp_o + o).norm()) < 1e-8);
    }

    #[test]
    fn hbh_rejects_timelike_displacement() {
        let sp = space22();
        let frame = BasepointFrame::new(&sp, &e(&sp, 2), None).unwrap();
        let mut m = DMatrix::identity(4, 4);
        let (c, s) = (0.4_f64.cos(), 0.4_f64.sin());
        m[(2, 2)] = c;
        m[(2, 3)] = -s;
        m[(3, 2)] = s;
        m[(3, 3)] = c;
        let g = GroupMatrix::new(&sp, m).unwrap();
        assert!(matches!(
            decompose_hbh(&frame, &g),
            Err(Error::NotSpacelike { .. })
        ));
    }

    // ------------------------- plane distance -----------------------

    #[test]
    fn plane_distance_model_geodesic_frozen() {
        let sp = space22();
        let frame = standard_frame(&sp);
        for s in [0.25, 1.0, 2.5] {
            let g = frame.model_boost(s);
            let moved: Vec<DVector<f64>> =
                frame.tau().basis().iter().map(|b| g.matrix() * b).collect();
            let moved = TauFrame::new(&sp, &moved).unwrap();
            assert_relative_eq!(xg_distance(&frame.tau(), &moved), s, max_relative = 1e-9);
            assert_relative_eq!(xg_distance(&moved, &frame.tau()), s, max_relative = 1e-9);
        }
    }

    #[test]
    fn plane_distance_congruence_invariant() {
        let sp = space22();
        let frame = standard_frame(&sp);
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let g = frame.model_boost(0.7);
        let t1 = frame.tau().clone();
        let moved: Vec<DVector<f64>> = t1.basis().iter().map(|b| g.matrix() * b).collect();
        let t2 = TauFrame::new(&sp, &moved).unwrap();
        let base = xg_distance(&t1, &t2);
        for _ in 0..5 {
            let u = random_group(&sp, &mut rng, 0.6);
            let m1: Vec<DVector<f64>> = t1.basis().iter().map(|b| u.matrix() * b).collect();
            let m2: Vec<DVector<f64>> = t2.basis().iter().map(|b| u.matrix() * b).collect();
            let d = xg_distance(
                &TauFrame::new(&sp, &m1).unwrap(),
                &TauFrame::new(&sp, &m2).unwrap(),
            );
            assert_relative_eq!(base, d, max_relative = 1e-9);
        }
    }

    #[test]
    fn inner_matrix_congruence_law() {
        // M_{g·τ} = g⁻ᵀ M_τ g⁻¹: the inner product transforms by
        // congruence with the inverse.
        let sp = space22();
        let frame = tilted_frame(&sp);
        let mut rng = ChaCha8Rng::seed_from_u64(83);
        let g = random_group(&sp, &mut rng, 0.7);
        let moved: Vec<DVector<f64>> =
            frame.tau().basis().iter().map(|b| g.matrix() * b).collect();
        let moved = TauFrame::new(&sp, &moved).unwrap();
        let gi = g.inverse(&sp);
        let expected = gi.matrix().transpose() * frame.tau().inner() * gi.matrix();
        let rel = (moved.inner() - &expected).norm() / expected.norm();
        assert!(rel < 1e-10, "congruence residual {rel:.3e}");
    }

    // ------------------------- sampled minimum ----------------------

    #[test]
    fn min_dist_identity_is_zero() {
        let sp = space22();
        let frame = standard_frame(&sp);
        let id = GroupMatrix::new_unchecked(DMatrix::identity(4, 4));
        assert!(min_dist_sampling_check(&frame, &id, 8).abs() < 1e-12);
    }

    #[test]
    fn min_dist_matches_b_tau_on_model_boost() {
        let sp = space22();
        let frame = standard_frame(&sp);
        let g = frame.model_boost(0.9);
        let v = min_dist_sampling_check(&frame, &g, 16);
        assert_relative_eq!(v, 0.9, max_relative = 1e-9);
    }

    #[test]
    fn min_dist_bounds_and_monotonicity() {
        let sp = space22();
        let frame = tilted_frame(&sp);
        let mut rng = ChaCha8Rng::seed_from_u64(97);
        for _ in 0..5 {
            let g = random_group(&sp, &mut rng, 0.8);
            let bt = b_tau(&frame, &g);
            let v8 = min_dist_sampling_check(&frame, &g, 8);
            let v32 = min_dist_sampling_check(&frame, &g, 32);
            assert!(v8 >= bt - 1e-9, "sampled min {v8} below projection {bt}");
            assert!(v32 <= v8 + 1e-12, "minimum must not grow with samples");
            assert!(v32 >= bt - 1e-9);
        }
    }

    #[test]
    fn samplers_are_deterministic_and_land_in_their_groups() {
        let sp = space22();
        let frame = tilted_frame(&sp);
        let a = sample_stabilizer(&frame, 5, 123);
        let b = sample_stabilizer(&frame, 5, 123);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.matrix(), y.matrix());
        }
        for h in &a {
            // Fixes the basepoint and preserves the form.
            assert!((h.matrix() * frame.basepoint_vector() - frame.basepoint_vector()).norm() < 1e-9);
            GroupMatrix::new(&sp, h.matrix().clone()).unwrap();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for k in sample_tau_rotation(&frame, 5, 31) {
            GroupMatrix::new(&sp, k.matrix().clone()).unwrap();
            let v = DVector::from_fn(4, |_, _| rng.gen_range(-1.0..1.0));
            assert_relative_eq!(
                frame.tau().norm(&(k.matrix() * &v)),
                frame.tau().norm(&v),
                max_relative = 1e-9
            );
        }
    }
}
