//! Projective points, hyperplanes, the chordal metric, and the two pairing
//! functionals used by product estimates.

use super::TauFrame;
use crate::{tol, Error, Result};
use nalgebra::{DMatrix, DVector};

/// A projective point stored as a Euclidean unit representative with the
/// first coordinate above the canonicalization threshold positive.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjPoint {
    rep: DVector<f64>,
}

/// A projective hyperplane stored as a unit covector, sign-canonicalized
/// the same way.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjHyperplane {
    covector: DVector<f64>,
}

fn canonicalize(mut v: DVector<f64>) -> Result<DVector<f64>> {
    let n = v.norm();
    if n == 0.0 || !n.is_finite() {
        return Err(Error::ZeroVector);
    }
    v /= n;
    for i in 0..v.len() {
        if v[i].abs() > tol::SIGN_CANON {
            if v[i] < 0.0 {
                v = -v;
            }
            break;
        }
    }
    Ok(v)
}

impl ProjPoint {
    pub fn new(v: DVector<f64>) -> Result<Self> {
        Ok(ProjPoint {
            rep: canonicalize(v)?,
        })
    }

    pub fn rep(&self) -> &DVector<f64> {
        &self.rep
    }

    /// Image under a linear map, reprojectivized.
    pub fn apply(&self, m: &DMatrix<f64>) -> Result<ProjPoint> {
        ProjPoint::new(m * &self.rep)
    }
}

impl ProjHyperplane {
    pub fn new(theta: DVector<f64>) -> Result<Self> {
        Ok(ProjHyperplane {
            covector: canonicalize(theta)?,
        })
    }

    pub fn covector(&self) -> &DVector<f64> {
        &self.covector
    }

    /// θ(v).
    pub fn eval(&self, v: &DVector<f64>) -> f64 {
        self.covector.dot(v)
    }

    /// Image hyperplane under g: ker θ ↦ ker (θ∘g⁻¹), i.e. covector g⁻ᵀθ.
    pub fn apply_inverse_transpose(&self, g_inv: &DMatrix<f64>) -> Result<ProjHyperplane> {
        ProjHyperplane::new(g_inv.transpose() * &self.covector)
    }
}

/// Chordal distance between projective points:
/// min(‖â−b̂‖, ‖â+b̂‖) over unit representatives. Range [0, √2].
pub fn proj_dist(a: &ProjPoint, b: &ProjPoint) -> f64 {
    let c = a.rep.dot(&b.rep).abs().min(1.0);
    (2.0 - 2.0 * c).max(0.0).sqrt()
}

/// Distance from a point to a hyperplane: the minimum of [`proj_dist`] over
/// lines inside the hyperplane.
///
/// For unit θ and v with s = |θ(v)| the closest line is the projection of v
/// into ker θ, giving √(2 − 2√(1−s²)); to first order this is |θ(v)|.
pub fn proj_dist_to_hyp(a: &ProjPoint, h: &ProjHyperplane) -> f64 {
    let s = h.covector.dot(&a.rep).abs().min(1.0);
    let c = (1.0 - s * s).max(0.0).sqrt();
    (2.0 - 2.0 * c).max(0.0).sqrt()
}

/// The multiplicative cross-ratio log |θ(u)/θ(v) · φ(v)/φ(u)|.
///
/// Scale-invariant in all four arguments; flipping θ↔φ (or v↔u) alone
/// negates it, and swapping both pairs leaves it unchanged. All four
/// pairings must be bounded away from zero.
pub fn cross_ratio(
    theta: &ProjHyperplane,
    v: &ProjPoint,
    phi: &ProjHyperplane,
    u: &ProjPoint,
) -> Result<f64> {
    let tu = theta.eval(u.rep());
    let tv = theta.eval(v.rep());
    let pv = phi.eval(v.rep());
    let pu = phi.eval(u.rep());
    for val in [tu, tv, pv, pu] {
        if val.abs() < tol::TRANSVERSE {
            return Err(Error::TransversalityViolation { value: val.abs() });
        }
    }
    Ok((tu / tv * pv / pu).abs().ln())
}

/// log(|θ(v)| / (‖θ‖·‖v‖)) for the Euclidean norm. Always ≤ 0; zero exactly
/// when v is dual to θ.
pub fn log_pairing(theta: &ProjHyperplane, v: &ProjPoint) -> Result<f64> {
    let t = theta.eval(v.rep());
    if t.abs() < tol::TRANSVERSE {
        return Err(Error::TransversalityViolation { value: t.abs() });
    }
    // Representatives are unit vectors.
    Ok(t.abs().min(1.0).ln())
}

/// log(|θ(v)| / (‖θ‖_τ*·‖v‖_τ)) for the frame norm and its dual.
pub fn log_pairing_tau(tau: &TauFrame, theta: &ProjHyperplane, v: &ProjPoint) -> Result<f64> {
    let t = theta.eval(v.rep());
    if t.abs() < tol::TRANSVERSE {
        return Err(Error::TransversalityViolation { value: t.abs() });
    }
    let ratio = t.abs() / (tau.conorm(theta.covector()) * tau.norm(v.rep()));
    Ok(ratio.min(1.0).ln())
}
