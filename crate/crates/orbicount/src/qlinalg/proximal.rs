//! Proximal matrices: attracting/repelling data, quantified proximality
//! certificates, and the product estimate residuals built from them.

use super::projective::{
    cross_ratio, log_pairing_tau, proj_dist, proj_dist_to_hyp, ProjHyperplane, ProjPoint,
};
use super::sampling::{hyperplane_basis, unit_sphere_points};
use super::{eigen_moduli, eigenvalues_by_modulus, GroupMatrix, TauFrame};
use crate::{tol, Error, Result};
use nalgebra::{DMatrix, DVector};

/// Attracting line, repelling hyperplane, and the log-eigenvalue gap of a
/// proximal matrix.
#[derive(Debug, Clone)]
pub struct ProximalData {
    pub attracting: ProjPoint,
    pub repelling: ProjHyperplane,
    /// λ₁ − λ₂ on the log scale.
    pub gap: f64,
    /// λ₁, the log of the top eigenvalue modulus.
    pub top_log: f64,
}

/// Returns the fixed data iff the top log-eigenvalue is simple with gap
/// above `gap_tol`.
pub fn proximal_data(g: &GroupMatrix, gap_tol: f64) -> Option<ProximalData> {
    let eigs = eigenvalues_by_modulus(g.matrix());
    if eigs.len() < 2 || eigs.iter().any(|z| !z.norm().is_finite()) {
        return None;
    }
    let top = eigs[0];
    let gap = top.norm().ln() - eigs[1].norm().ln();
    if !(gap > gap_tol) {
        return None;
    }
    // A strictly dominant eigenvalue of a real matrix is real (complex
    // eigenvalues pair up with equal modulus); tolerate solver noise.
    if top.im.abs() > 1e-8 * top.norm() {
        return None;
    }
    let mu = top.re;
    let attracting = ProjPoint::new(eigenvector_for(g.matrix(), mu)?).ok()?;
    let repelling = ProjHyperplane::new(eigenvector_for(&g.matrix().transpose(), mu)?).ok()?;
    Some(ProximalData {
        attracting,
        repelling,
        gap,
        top_log: top.norm().ln(),
    })
}

/// Unit null vector of (A − μI) via SVD, i.e. the eigenvector for μ.
fn eigenvector_for(a: &DMatrix<f64>, mu: f64) -> Option<DVector<f64>> {
    let d = a.nrows();
    let shifted = a - DMatrix::from_diagonal_element(d, d, mu);
    let svd = shifted.svd(false, true);
    let vt = svd.v_t?;
    let idx = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())?
        .0;
    Some(vt.row(idx).transpose())
}

/// Reason a quantified proximality check failed.
#[derive(Debug, Clone)]
pub enum RefuteReason {
    /// λ₁ − λ₂ is below the proximality threshold.
    NotProximal { gap: f64 },
    /// d(g₊, g₋) < 2r.
    Separation { separation: f64 },
    /// A sampled point at distance ≥ ε from g₋ lands at distance ≥ ε
    /// from g₊.
    Witness { point: ProjPoint, image_dist: f64 },
}

/// Verdict of [`certify_r_eps_proximal`].
#[derive(Debug, Clone)]
pub enum ProximalityCert {
    /// Separation holds and the sampled image radius clears the factor-2
    /// slack margin.
    Certified {
        separation: f64,
        image_radius: f64,
    },
    Refuted(RefuteReason),
    /// No witness found, but the image radius is within the slack band
    /// where sampling cannot decide.
    Inconclusive {
        separation: f64,
        image_radius: f64,
    },
}

/// Default boundary sample size for 4-dimensional ambient space.
pub const DEFAULT_PROXIMALITY_SAMPLES: usize = 4096;

/// Checks the quantified proximality property: d(g₊,g₋) ≥ 2r and g maps
/// the complement of the ε-neighborhood of g₋ strictly inside the ε-ball
/// around g₊.
///
/// The infinite inclusion is tested on a deterministic low-discrepancy
/// sample of the boundary sphere {ξ : d(ξ, g₋) = ε} (plus the point dual
/// to g₋); certification additionally demands a Lipschitz slack factor of
/// 2 on the sampled image radius, and verdicts inside the slack band are
/// reported as inconclusive rather than certified.
pub fn certify_r_eps_proximal(
    g: &GroupMatrix,
    r: f64,
    eps: f64,
    n_samples: usize,
) -> Result<ProximalityCert> {
    if !(eps > 0.0 && eps <= r) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < ε ≤ r, got ε={eps}, r={r}"
        )));
    }
    let data = match proximal_data(g, tol::GAP_ABS) {
        Some(d) => d,
        None => {
            let gap = {
                let logs = eigen_moduli(g);
                logs[0] - logs[1]
            };
            return Ok(ProximalityCert::Refuted(RefuteReason::NotProximal { gap }));
        }
    };
    let separation = proj_dist_to_hyp(&data.attracting, &data.repelling);
    if separation < 2.0 * r {
        return Ok(ProximalityCert::Refuted(RefuteReason::Separation {
            separation,
        }));
    }
    let d = g.nrows();
    let normal = data.repelling.covector();
    let basis = hyperplane_basis(normal);
    // Boundary sphere of the ε-complement: points s·n + c·w with
    // s = sin α chosen so the chordal point-to-hyperplane distance is ε.
    let s = (eps * eps - eps.powi(4) / 4.0).max(0.0).sqrt();
    let c = (1.0 - s * s).max(0.0).sqrt();
    let mut worst = 0.0f64;
    let mut check = |v: DVector<f64>| -> Option<ProximalityCert> {
        let image = ProjPoint::new(g.matrix() * &v).ok()?;
        let dist = proj_dist(&image, &data.attracting);
        worst = worst.max(dist);
        if dist >= eps {
            let point = ProjPoint::new(v).ok()?;
            Some(ProximalityCert::Refuted(RefuteReason::Witness {
                point,
                image_dist: dist,
            }))
        } else {
            None
        }
    };
    // The point farthest from g₋ (the pole) is the deep interior of the
    // region; everything else lies between it and the boundary sphere.
    if let Some(verdict) = check(normal.clone()) {
        return Ok(verdict);
    }
    for w in unit_sphere_points(n_samples.max(1), d - 1) {
        let v = s * normal + c * (&basis * w);
        if let Some(verdict) = check(v) {
            return Ok(verdict);
        }
    }
    if 2.0 * worst < eps {
        Ok(ProximalityCert::Certified {
            separation,
            image_radius: worst,
        })
    } else {
        Ok(ProximalityCert::Inconclusive {
            separation,
            image_radius: worst,
        })
    }
}

/// Residuals of the product estimate for two proximal matrices.
#[derive(Debug, Clone)]
pub struct BenoistCheck {
    /// |λ₁(g₁g₂) − λ₁(g₁) − λ₁(g₂) − 𝔹|.
    pub delta_lambda: f64,
    /// |log‖g₁g₂‖_τ − λ₁(g₁) − λ₁(g₂) − 𝔹 + 𝒢_τ(g₂₋, g₁₊)|.
    pub delta_norm: f64,
    /// The cross-ratio term 𝔹(g₁₋, g₁₊, g₂₋, g₂₊).
    pub cross_ratio: f64,
    /// The pairing term 𝒢_τ(g₂₋, g₁₊) ≤ 0.
    pub pairing: f64,
}

/// Evaluates both product-formula residuals. They are reported, not
/// asserted: the underlying estimates are asymptotic and the caller decides
/// what "small" means for its family of matrices.
pub fn benoist_product_check(
    g1: &GroupMatrix,
    g2: &GroupMatrix,
    tau: &TauFrame,
) -> Result<BenoistCheck> {
    let d1 = proximal_data(g1, tol::GAP_ABS).ok_or(Error::NotProximal {
        gap: top_gap(g1),
        threshold: tol::GAP_ABS,
    })?;
    let d2 = proximal_data(g2, tol::GAP_ABS).ok_or(Error::NotProximal {
        gap: top_gap(g2),
        threshold: tol::GAP_ABS,
    })?;
    let b = cross_ratio(&d1.repelling, &d1.attracting, &d2.repelling, &d2.attracting)?;
    let g_term = log_pairing_tau(tau, &d2.repelling, &d1.attracting)?;
    let product = GroupMatrix::new_unchecked(g1.matrix() * g2.matrix());
    let lambda_product = eigen_moduli(&product)[0];
    let sum = d1.top_log + d2.top_log;
    let delta_lambda = (lambda_product - sum - b).abs();
    let log_norm = tau.operator_norm(product.matrix()).ln();
    let delta_norm = (log_norm - sum - b + g_term).abs();
    Ok(BenoistCheck {
        delta_lambda,
        delta_norm,
        cross_ratio: b,
        pairing: g_term,
    })
}

fn top_gap(g: &GroupMatrix) -> f64 {
    let logs = eigen_moduli(g);
    logs[0] - logs[1]
}
