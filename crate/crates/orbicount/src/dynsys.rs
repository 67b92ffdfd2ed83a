//! Boundary data attached to hyperbolic group elements, and the two length
//! cocycles it supports: the basepoint cocycle (displacement measured
//! against a fixed timelike line) and the frame cocycle (stretch measured
//! in a definite inner product). Also their Gromov products, the transfer
//! function identifying their cohomology classes, and the residuals of the
//! product-estimate comparison between displacement lengths and spectral
//! data.
//!
//! Boundary points are realized as translates of attracting fixed points
//! of hyperbolic elements — a dense family on which every cocycle identity
//! can be exercised. Each point caches a unit representative of its
//! forward line and the matching hyperplane covector (the form-dual of the
//! line), so all downstream formulas are ratios of pairings between
//! canonical unit vectors and are scale-free by construction.


use crate::pseudometric::{b_o, b_tau, BasepointFrame};
use crate::qlinalg::{
    cross_ratio, eigen_moduli, log_pairing_tau, proximal_data, GroupMatrix, ProjHyperplane,
    ProjPoint,
};
use crate::repbuilder::Representation;
use crate::wordgroup::{CyclicWord, Word};
use crate::{tol, Error, Result};

/// A point of the group boundary, realized as `prefix · (attracting fixed
/// point of core)`, carrying its forward line and dual hyperplane.
#[derive(Debug, Clone)]
pub struct BoundaryPoint {
    core: CyclicWord,
    prefix: Word,
    xi: ProjPoint,
    eta: ProjHyperplane,
}

impl BoundaryPoint {
    /// The hyperbolic element whose attracting fixed point this translates.
    pub fn core(&self) -> &CyclicWord {
        &self.core
    }

    /// The group element translating the core fixed point here.
    pub fn prefix(&self) -> &Word {
        &self.prefix
    }

    /// The forward line at this point (unit representative).
    pub fn xi(&self) -> &ProjPoint {
        &self.xi
    }

    /// The dual hyperplane at this point (unit covector). Equals the
    /// form-orthogonal complement of the forward line.
    pub fn eta(&self) -> &ProjHyperplane {
        &self.eta
    }

    /// Test-only constructor used to inject unnormalized representatives
    /// and check that every output is invariant under rescaling.
    #[cfg(test)]
    pub(crate) fn from_parts(
        core: CyclicWord,
        prefix: Word,
        xi: ProjPoint,
        eta: ProjHyperplane,
    ) -> BoundaryPoint {
        BoundaryPoint {
            core,
            prefix,
            xi,
            eta,
        }
    }
}

/// Eigendata of a group element with a proximality guarantee, or the
/// observed spectral gap as an error.
fn require_proximal(g: &GroupMatrix) -> Result<crate::qlinalg::ProximalData> {
    proximal_data(g, tol::GAP_ABS).ok_or_else(|| {
        let logs = eigen_moduli(g);
        Error::NotProximal {
            gap: if logs.len() > 1 { logs[0] - logs[1] } else { 0.0 },
            threshold: tol::GAP_ABS,
        }
    })
}

/// Reject pairings whose magnitude falls below the transversality
/// tolerance relative to the scale of the paired vectors, instead of
/// letting them produce huge logarithms.
fn checked_pairing(value: f64, scale: f64) -> Result<f64> {
    let ratio = value.abs() / scale;
    if !(ratio >= tol::TRANSVERSE) {
        return Err(Error::TransversalityViolation { value: ratio });
    }
    Ok(value)
}

/// The boundary point `prefix · (attracting fixed point of core)`.
///
/// The forward line is the attracting eigenline of the evaluated core,
/// translated by the prefix; the dual hyperplane is the form-orthogonal
/// complement of the eigenline, translated the covariant way. Both caches
/// are unit-canonicalized, so later formulas are scale-free.
pub fn boundary_point(
    rho: &Representation,
    prefix: &Word,
    core: &CyclicWord,
) -> Result<BoundaryPoint> {
    let g = rho.evaluate(&core.to_word())?;
    let data = require_proximal(&g)?;
    // Dual covector: the form applied to the eigenline representative.
    // For form-preserving matrices this is exactly the invariant
    // complementary hyperplane of the inverse element.
    let theta0 = rho.space().form_apply(data.attracting.rep());
    let eta0 = ProjHyperplane::new(theta0)?;
    let gp = rho.evaluate(prefix)?;
    let gp_inv = rho.evaluate(&prefix.inverse())?;
    Ok(BoundaryPoint {
        core: core.clone(),
        prefix: prefix.clone(),
        xi: data.attracting.apply(gp.matrix())?,
        eta: eta0.apply_inverse_transpose(gp_inv.matrix())?,
    })
}

/// The boundary action: `gamma · x`, with the cached line and hyperplane
/// translated directly (no eigendata recomputation), so equivariance holds
/// by construction.
pub fn translate(rho: &Representation, gamma: &Word, x: &BoundaryPoint) -> Result<BoundaryPoint> {
    let g = rho.evaluate(gamma)?;
    let g_inv = rho.evaluate(&gamma.inverse())?;
    Ok(BoundaryPoint {
        core: x.core.clone(),
        prefix: gamma.concat(&x.prefix),
        xi: x.xi.apply(g.matrix())?,
        eta: x.eta.apply_inverse_transpose(g_inv.matrix())?,
    })
}

/// The boundary action evaluated one letter at a time, right to left.
/// Agrees with [`translate`] exactly in real arithmetic; in floats it is
/// the accurate form for long or strongly stretching words. The one-shot
/// version pairs two independently accumulated matrix products (the word
/// and its inverse), whose product drifts from the identity like the
/// squared word norm times machine epsilon, desynchronizing the
/// translated line from its dual hyperplane; stepping letterwise keeps
/// every factor's inverse exact (stored generator inverses are exact
/// form-inverses) and renormalizes between steps.
pub fn translate_stepwise(
    rho: &Representation,
    gamma: &Word,
    x: &BoundaryPoint,
) -> Result<BoundaryPoint> {
    let mut point = x.clone();
    for &l in gamma.letters().iter().rev() {
        let step = Word::new(&[l], rho.rank())?;
        point = translate(rho, &step, &point)?;
    }
    Ok(point)
}

/// One step of the basepoint cocycle: the defining ratio evaluated for a
/// single group element given by its matrix and inverse matrix.
fn single_c_o(
    frame: &BasepointFrame,
    g: &nalgebra::DMatrix<f64>,
    gi: &nalgebra::DMatrix<f64>,
    x: &BoundaryPoint,
) -> Result<f64> {
    let jo = frame.reflection().matrix();
    let v = x.xi.rep();
    let theta = x.eta.covector();
    let jv = jo * v;
    let den = checked_pairing(theta.dot(&jv), jv.norm())?;
    let w = gi * (jo * (g * v));
    let num = checked_pairing(theta.dot(&w), w.norm())?;
    Ok(0.5 * (num / den).abs().ln())
}

/// The basepoint cocycle: half the log-ratio of the dual pairing of the
/// forward vector against its image under (inverse, basepoint reflection,
/// element) to the same pairing without the element.
///
/// Vanishes exactly on the identity; satisfies the cocycle law under the
/// boundary action; its value on the attracting fixed point of a
/// hyperbolic element is the element's top logarithmic eigenvalue
/// modulus. Long words are evaluated one letter at a time along the
/// suffix orbit — exact by the cocycle law, and each step pairs vectors
/// of bounded norm, so the value stays accurate where the one-shot ratio
/// would cancel catastrophically.
pub fn cocycle_c_o(
    frame: &BasepointFrame,
    rho: &Representation,
    gamma: &Word,
    x: &BoundaryPoint,
) -> Result<f64> {
    let mut total = 0.0;
    let mut point = x.clone();
    let letters = gamma.letters();
    for (i, &l) in letters.iter().enumerate().rev() {
        let step = Word::new(&[l], rho.rank())?;
        let g = rho.evaluate(&step)?;
        let gi = rho.evaluate(&step.inverse())?;
        total += single_c_o(frame, g.matrix(), gi.matrix(), &point)?;
        if i > 0 {
            point = translate(rho, &step, &point)?;
        }
    }
    Ok(total)
}

/// One step of the frame cocycle; computes both defining formulas and
/// asserts their agreement.
fn single_c_tau(
    frame: &BasepointFrame,
    g: &nalgebra::DMatrix<f64>,
    gi: &nalgebra::DMatrix<f64>,
    x: &BoundaryPoint,
) -> Result<f64> {
    let tau = frame.tau();
    let jo = frame.reflection().matrix();
    let v = x.xi.rep();
    let theta = x.eta.covector();
    // Same well-positioned precondition as the basepoint cocycle.
    let jv = jo * v;
    checked_pairing(theta.dot(&jv), jv.norm())?;
    let gv = g * v;
    let gtheta = gi.transpose() * theta;
    let value =
        0.5 * ((tau.conorm(&gtheta) * tau.norm(&gv)) / (tau.conorm(theta) * tau.norm(v))).ln();
    let direct = (tau.norm(&gv) / tau.norm(v)).ln();
    assert!(
        (value - direct).abs() <= 1e-8 * (1.0 + value.abs()),
        "frame cocycle formulas disagree: {value} vs {direct}"
    );
    Ok(value)
}

/// The frame cocycle: half the log of the joint stretch of the forward
/// vector and its dual covector in the frame norm (covectors measured in
/// the dual norm).
///
/// Because the cached covector is the form-dual of the forward vector and
/// the frame norm is compatible with the basepoint reflection, this
/// equals the plain log-stretch of the forward vector; both formulas are
/// computed at every step and their agreement is asserted. Like the
/// basepoint cocycle, long words telescope one letter at a time.
pub fn cocycle_c_tau(
    frame: &BasepointFrame,
    rho: &Representation,
    gamma: &Word,
    x: &BoundaryPoint,
) -> Result<f64> {
    let mut total = 0.0;
    let mut point = x.clone();
    let letters = gamma.letters();
    for (i, &l) in letters.iter().enumerate().rev() {
        let step = Word::new(&[l], rho.rank())?;
        let g = rho.evaluate(&step)?;
        let gi = rho.evaluate(&step.inverse())?;
        total += single_c_tau(frame, g.matrix(), gi.matrix(), &point)?;
        if i > 0 {
            point = translate(rho, &step, &point)?;
        }
    }
    Ok(total)
}

/// The Gromov product of the basepoint cocycle with itself: minus half the
/// log of the product of both self-pairings through the basepoint
/// reflection over the two cross pairings.
///
/// Symmetric in its arguments, and compatible with the cocycle: acting on
/// both points changes it by minus the sum of the two cocycle values.
pub fn gromov_o(frame: &BasepointFrame, x: &BoundaryPoint, y: &BoundaryPoint) -> Result<f64> {
    let jo = frame.reflection().matrix();
    let (vx, tx) = (x.xi.rep(), x.eta.covector());
    let (vy, ty) = (y.xi.rep(), y.eta.covector());
    let jvx = jo * vx;
    let jvy = jo * vy;
    let tx_jvx = checked_pairing(tx.dot(&jvx), jvx.norm())?;
    let ty_jvy = checked_pairing(ty.dot(&jvy), jvy.norm())?;
    let tx_vy = checked_pairing(tx.dot(vy), 1.0)?;
    let ty_vx = checked_pairing(ty.dot(vx), 1.0)?;
    Ok(-0.5 * ((tx_jvx * ty_jvy) / (tx_vy * ty_vx)).abs().ln())
}

/// The mixed Gromov product pairing the basepoint cocycle (first argument)
/// with the frame cocycle (second argument): half the log of the two cross
/// pairings over the first point's reflection self-pairing times the frame
/// norms of the second point's data.
///
/// Not symmetric. Acting on both points changes it by minus (basepoint
/// cocycle at x plus frame cocycle at y); it differs from the symmetric
/// product by the transfer function at y.
pub fn gromov_tau(frame: &BasepointFrame, x: &BoundaryPoint, y: &BoundaryPoint) -> Result<f64> {
    let jo = frame.reflection().matrix();
    let tau = frame.tau();
    let (vx, tx) = (x.xi.rep(), x.eta.covector());
    let (vy, ty) = (y.xi.rep(), y.eta.covector());
    let jvx = jo * vx;
    let tx_jvx = checked_pairing(tx.dot(&jvx), jvx.norm())?;
    let tx_vy = checked_pairing(tx.dot(vy), 1.0)?;
    let ty_vx = checked_pairing(ty.dot(vx), 1.0)?;
    Ok(0.5 * ((ty_vx * tx_vy) / (tx_jvx * tau.conorm(ty) * tau.norm(vy))).abs().ln())
}

/// The transfer function between the two cocycles: half the log of the
/// frame norms of the point's vector and covector over their reflection
/// pairing. Always nonnegative; the frame cocycle minus the basepoint
/// cocycle telescopes through it.
pub fn cohomology_u(frame: &BasepointFrame, x: &BoundaryPoint) -> Result<f64> {
    let jo = frame.reflection().matrix();
    let tau = frame.tau();
    let v = x.xi.rep();
    let theta = x.eta.covector();
    let jv = jo * v;
    let pairing = checked_pairing(theta.dot(&jv), jv.norm())?;
    Ok(0.5 * ((tau.norm(v) * tau.conorm(theta)) / pairing.abs()).ln())
}

/// Comparison residuals between the two displacement lengths of a
/// hyperbolic element and their spectral-plus-boundary estimates.
///
/// The first residual compares the basepoint displacement against the top
/// eigenvalue log plus half the cross-ratio of the element's reflected
/// eigendata with its inverse's eigendata; the second compares the frame
/// displacement against the same quantity corrected by half the dual
/// pairing defect. Both tend to zero along high powers and long
/// well-separated elements; short elements may give large values.
pub fn benoist_residuals(
    frame: &BasepointFrame,
    rho: &Representation,
    core: &CyclicWord,
) -> Result<(f64, f64)> {
    let w = core.to_word();
    let g = rho.evaluate(&w)?;
    let gi = rho.evaluate(&w.inverse())?;
    let data = require_proximal(&g)?;
    let data_inv = require_proximal(&gi)?;
    let lambda1 = data.top_log;
    let jo = frame.reflection().matrix();
    // Reflected attracting data of the element; eigendata of the inverse.
    let theta = data.repelling.apply_inverse_transpose(jo)?;
    let v = data.attracting.apply(jo)?;
    let b = cross_ratio(&theta, &v, &data_inv.repelling, &data_inv.attracting)?;
    let dual_defect = log_pairing_tau(frame.tau(), &data_inv.repelling, &v)?;
    let delta4 = (b_o(frame, &g)? - lambda1 - 0.5 * b).abs();
    let delta5 = (b_tau(frame, &g) - lambda1 - 0.5 * b + 0.5 * dual_defect).abs();
    Ok((delta4, delta5))
}
