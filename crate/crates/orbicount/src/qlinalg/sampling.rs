//! Deterministic low-discrepancy point sets used by certification routines.
//!
//! Halton sequences feed a Box–Muller map to produce quasi-uniform points
//! on unit spheres of any small dimension. Everything here is a pure
//! function of the requested index, so certificates are reproducible.

use nalgebra::{DMatrix, DVector};

const PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Radical-inverse (van der Corput) value of `index` in the given base.
pub fn halton(index: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let mut i = index;
    let b = base as f64;
    while i > 0 {
        f /= b;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// `n` quasi-uniform points on the unit sphere S^{dim-1} ⊂ ℝ^dim.
///
/// Coordinates come from Box–Muller applied to consecutive Halton bases,
/// then normalized; for dim = 1 this degenerates to ±1 as it should.
pub fn unit_sphere_points(n: usize, dim: usize) -> Vec<DVector<f64>> {
    assert!(dim >= 1 && 2 * dim.div_ceil(2) <= PRIMES.len() * 2);
    let pairs = dim.div_ceil(2);
    let mut out = Vec::with_capacity(n);
    let mut idx: u64 = 1;
    while out.len() < n {
        let mut v = DVector::zeros(dim);
        for p in 0..pairs {
            let u1 = halton(idx, PRIMES[2 * p]).max(1e-12);
            let u2 = halton(idx, PRIMES[2 * p + 1]);
            let r = (-2.0 * u1.ln()).sqrt();
            let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
            v[2 * p] = r * c;
            if 2 * p + 1 < dim {
                v[2 * p + 1] = r * s;
            }
        }
        idx += 1;
        let norm = v.norm();
        if norm > 1e-9 {
            out.push(v / norm);
        }
    }
    out
}

/// A Euclidean orthonormal basis of the hyperplane ker(normalᵀ·),
/// as the columns of a d×(d−1) matrix. `normal` must be a unit vector.
pub fn hyperplane_basis(normal: &DVector<f64>) -> DMatrix<f64> {
    let d = normal.len();
    // Householder reflection mapping e_k to ±normal, where k is the
    // largest-magnitude coordinate (for stability).
    let k = normal.iamax();
    let sign = if normal[k] >= 0.0 { 1.0 } else { -1.0 };
    let mut u = normal.clone();
    u[k] += sign;
    let un = u.norm();
    let mut h = DMatrix::identity(d, d);
    if un > 1e-12 {
        let u = u / un;
        h -= 2.0 * &u * u.transpose();
    }
    // Column k of h is ∓normal; the remaining columns span the hyperplane.
    let mut cols = Vec::with_capacity(d - 1);
    for c in 0..d {
        if c != k {
            cols.push(h.column(c).into_owned());
        }
    }
    DMatrix::from_columns(&cols)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halton_first_values_base_two() {
        assert_eq!(halton(1, 2), 0.5);
        assert_eq!(halton(2, 2), 0.25);
        assert_eq!(halton(3, 2), 0.75);
    }

    #[test]
    fn sphere_points_are_unit_and_spread() {
        for dim in [1usize, 2, 3, 4, 7] {
            let pts = unit_sphere_points(256, dim);
            assert_eq!(pts.len(), 256);
            for p in &pts {
                assert!((p.norm() - 1.0).abs() < 1e-12);
            }
            if dim >= 2 {
                // Mean should be near zero for a balanced sample.
                let mut mean = DVector::zeros(dim);
                for p in &pts {
                    mean += p;
                }
                mean /= 256.0;
                assert!(mean.norm() < 0.2, "dim {dim}: mean {}", mean.norm());
            }
        }
    }

    #[test]
    fn hyperplane_basis_is_orthonormal_complement() {
        let n = DVector::from_row_slice(&[0.2, -0.4, 0.1, 0.88]).normalize();
        let b = hyperplane_basis(&n);
        assert_eq!(b.ncols(), 3);
        let gram = b.transpose() * &b;
        assert!((gram - DMatrix::identity(3, 3)).norm() < 1e-12);
        assert!((b.transpose() * n).norm() < 1e-12);
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = unit_sphere_points(64, 3);
        let b = unit_sphere_points(64, 3);
        for (x, y) in a.iter().zip(b.iter()) {
            assert_eq!(x, y);
        }
    }
}
