//! Orbital counting in pseudo-Riemannian hyperbolic spaces.
//!
//! The crate builds finitely generated matrix groups preserving an
//! indefinite quadratic form of signature (p,q), equips them with a
//! basepoint frame in the projectivized negative cone, and measures two
//! projection values per group element: a spectral one (`b_o`, defined on
//! space-like pairs) and a polar one (`b_tau`, defined everywhere). On top
//! of that it counts orbit points below a threshold, certifies when those
//! counts are complete, fits exponential growth laws, and cross-checks the
//! whole chain against cocycle and product-formula identities.
//!
//! Module map:
//!
//! * [`qlinalg`]: indefinite forms, frame-adapted singular values,
//!   proximal matrices, projective distances, cross-ratios.
//! * [`wordgroup`]: reduced words in a free group, sphere enumeration,
//!   conjugacy classes.
//! * [`repbuilder`]: Schottky generators in SO(m,1), block embeddings,
//!   deformations, singular-value gap reports.
//! * [`pseudometric`]: basepoint frames, the two projections, boost
//!   decompositions, symmetric-space distances.
//! * [`dynsys`]: boundary points, cocycles, Gromov products, product
//!   formula residuals.
//! * [`counting`]: count series with completeness certificates, entropy
//!   and asymptotic fits, equidistribution tables, lattice tests.
//! * [`config`]: experiment descriptions loadable from text files.
//! * [`verify`]: batteries of identity checks used by the CLI.

pub mod config;
pub mod counting;
pub mod dynsys;
pub mod pseudometric;
pub mod qlinalg;
pub mod repbuilder;
pub mod verify;
pub mod wordgroup;

mod book;

mod error;
pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Central numerical tolerances.
///
/// Everything downstream quotes these constants instead of scattering
/// magic numbers; tests that pin accuracy levels reference them too.
pub mod tol {
    /// Default relative comparison tolerance for derived quantities.
    pub const REL: f64 = 1e-8;

    /// Form preservation: `‖gᵀJg − J‖ ≤ FORM_PRESERVE · ‖g‖²` (Frobenius).
    pub const FORM_PRESERVE: f64 = 1e-10;

    /// Unit-determinant check: `| |det g| − 1 | ≤ DET · ‖g‖ᵈ`.
    pub const DET: f64 = 1e-8;

    /// Minimal log-eigenvalue gap accepted as proximal (absolute).
    pub const GAP_ABS: f64 = 1e-6;

    /// Pairings with absolute value below this violate transversality.
    pub const TRANSVERSE: f64 = 1e-12;

    /// Gram determinants within this window of zero are treated as
    /// light-like degenerate and rejected by consumers that need a
    /// definite causal class.
    pub const LIGHTLIKE: f64 = 1e-9;

    /// Leading-coordinate threshold used by projective sign
    /// canonicalization (representatives are unit vectors, so the first
    /// coordinate above this threshold is well defined).
    pub const SIGN_CANON: f64 = 1e-9;

    /// Absolute floor added to relative comparisons so that quantities
    /// that are exactly zero in theory compare cleanly.
    pub const ABS_FLOOR: f64 = 1e-12;
}

/// `|a − b| ≤ rel·max(|a|,|b|) + ABS_FLOOR`, the crate's default
/// closeness predicate for derived scalars.
pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()) + tol::ABS_FLOOR
}
