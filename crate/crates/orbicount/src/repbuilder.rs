//! Construction and diagnostics of finitely generated matrix-group
//! representations.
//!
//! The builders produce free-group representations into the form-preserving
//! group: Schottky generators in a rank-one block ([`schottky_so_m1`]),
//! block embeddings into larger signatures ([`embed_block`]), and random
//! small deformations ([`deform`]). The diagnostics evaluate words with a
//! bounded-depth product cache ([`Representation::evaluate`]), scan the
//! first singular-value gap sphere by sphere ([`gap_report`]), and extract
//! boundary samples from top singular directions ([`limit_set_sample`]).

use std::collections::HashMap;
use std::sync::Mutex;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::pseudometric::{form_orthonormalize, standard_boost};
use crate::qlinalg::sampling::unit_sphere_points;
use crate::qlinalg::{
    form_inverse, proj_dist, proximal_data, tau_svd_extremes, GroupMatrix, ProjHyperplane,
    ProjPoint, QSpace, TauFrame,
};
use crate::wordgroup::{sphere, Letter, Word};
use crate::{tol, Error, Result};

/// Default cap on the reduced-word length of cached products.
pub const DEFAULT_CACHE_LIMIT: usize = 8;

/// Products of words up to this length are always cached; `set_cache_limit`
/// cannot lower the cap below it.
const MIN_CACHE_LIMIT: usize = 6;

/// Number of boundary samples used by the ping-pong certificate.
pub const PING_PONG_SAMPLES: usize = 512;

/// Minimal per-sphere singular gap required before top singular directions
/// are trusted as boundary samples.
pub const LIMIT_GAP_THRESHOLD: f64 = 1.0;

/// A representation of a free group: one form-preserving lift per
/// generator, inverses derived, and a synchronized product cache keyed by
/// reduced words.
#[derive(Debug)]
pub struct Representation {
    space: QSpace,
    generators: Vec<GroupMatrix>,
    inverses: Vec<GroupMatrix>,
    cache: Mutex<HashMap<Vec<Letter>, DMatrix<f64>>>,
    cache_limit: usize,
}

impl Clone for Representation {
    /// Clones generators and settings; the product cache starts fresh.
    fn clone(&self) -> Self {
        Representation {
            space: self.space.clone(),
            generators: self.generators.clone(),
            inverses: self.inverses.clone(),
            cache: Mutex::new(HashMap::new()),
            cache_limit: self.cache_limit,
        }
    }
}

impl Representation {
    /// Wraps validated generator lifts; requires at least two generators
    /// (the free group must be non-elementary for every downstream use).
    pub fn new(space: &QSpace, generators: Vec<GroupMatrix>) -> Result<Representation> {
        if generators.len() < 2 {
            return Err(Error::RankTooSmall {
                rank: generators.len(),
            });
        }
        let d = space.d();
        for g in &generators {
            if g.matrix().nrows() != d || g.matrix().ncols() != d {
                return Err(Error::DimensionMismatch(format!(
                    "generator is {}×{}, the space needs {d}×{d}",
                    g.matrix().nrows(),
                    g.matrix().ncols()
                )));
            }
        }
        let inverses = generators.iter().map(|g| g.inverse(space)).collect();
        Ok(Representation {
            space: space.clone(),
            generators,
            inverses,
            cache: Mutex::new(HashMap::new()),
            cache_limit: DEFAULT_CACHE_LIMIT,
        })
    }

    pub fn space(&self) -> &QSpace {
        &self.space
    }

    /// Number of free generators.
    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[GroupMatrix] {
        &self.generators
    }

    /// Raises or lowers the cached-word length cap; lengths up to 6 stay
    /// cached regardless.
    pub fn set_cache_limit(&mut self, limit: usize) {
        self.cache_limit = limit.max(MIN_CACHE_LIMIT);
    }

    /// Lift of a single signed letter.
    pub(crate) fn letter_matrix(&self, l: Letter) -> &DMatrix<f64> {
        if l > 0 {
            self.generators[(l - 1) as usize].matrix()
        } else {
            self.inverses[(-l - 1) as usize].matrix()
        }
    }

    /// Product of the generator lifts along the reduced word, reusing the
    /// longest cached prefix and caching every new prefix up to the cache
    /// cap.
    pub fn evaluate(&self, w: &Word) -> Result<GroupMatrix> {
        if w.max_letter() > self.rank() {
            let letter = *w
                .letters()
                .iter()
                .find(|l| l.unsigned_abs() as usize > self.rank())
                .expect("max_letter exceeded the rank");
            return Err(Error::LetterOutOfRange {
                letter,
                rank: self.rank(),
            });
        }
        let letters = w.letters();
        let d = self.space.d();
        let mut acc = DMatrix::identity(d, d);
        let mut start = 0;
        let cap = self.cache_limit.min(letters.len());
        if cap > 0 {
            let cache = self.cache.lock().expect("cache lock");
            for l in (1..=cap).rev() {
                if let Some(m) = cache.get(&letters[..l]) {
                    acc = m.clone();
                    start = l;
                    break;
                }
            }
        }
        for i in start..letters.len() {
            acc = &acc * self.letter_matrix(letters[i]);
            if i + 1 <= self.cache_limit {
                self.cache
                    .lock()
                    .expect("cache lock")
                    .insert(letters[..=i].to_vec(), acc.clone());
            }
        }
        Ok(GroupMatrix::new_unchecked(acc))
    }
}

/// Endpoints of a translation axis, given as a pair of distinct unit
/// directions on the boundary sphere of the rank-one block.
#[derive(Debug, Clone)]
pub struct AxisSpec {
    plus: DVector<f64>,
    minus: DVector<f64>,
}

impl AxisSpec {
    /// Normalizes both directions; they must be nonzero and of equal
    /// dimension.
    pub fn new(plus: &[f64], minus: &[f64]) -> Result<AxisSpec> {
        if plus.len() != minus.len() {
            return Err(Error::DimensionMismatch(format!(
                "axis endpoints have dimensions {} and {}",
                plus.len(),
                minus.len()
            )));
        }
        let p = DVector::from_row_slice(plus);
        let m = DVector::from_row_slice(minus);
        let (np, nm) = (p.norm(), m.norm());
        if np < 1e-12 || nm < 1e-12 {
            return Err(Error::ZeroVector);
        }
        Ok(AxisSpec {
            plus: p / np,
            minus: m / nm,
        })
    }

    /// Planar convenience constructor: endpoints on the unit circle at the
    /// given angles (attracting first).
    pub fn from_angles(attracting: f64, repelling: f64) -> AxisSpec {
        AxisSpec {
            plus: DVector::from_row_slice(&[attracting.cos(), attracting.sin()]),
            minus: DVector::from_row_slice(&[repelling.cos(), repelling.sin()]),
        }
    }

    /// Attracting endpoint (unit direction).
    pub fn plus(&self) -> &DVector<f64> {
        &self.plus
    }

    /// Repelling endpoint (unit direction).
    pub fn minus(&self) -> &DVector<f64> {
        &self.minus
    }
}

/// Numerical ping-pong certificate for a Schottky family: disk data and
/// the worst sampled image radius (strictly inside `radius` when the
/// certificate holds).
#[derive(Debug, Clone)]
pub struct PingPongCertificate {
    /// Smallest chordal distance between any two of the 2k axis endpoints.
    pub min_center_gap: f64,
    /// Common chordal radius of the certified disks.
    pub radius: f64,
    /// Largest chordal distance from a mapped sample to its target center.
    pub worst_image_radius: f64,
    /// Number of boundary samples tested per generator and direction.
    pub samples: usize,
}

/// Lifts a unit direction u on the boundary sphere to the isotropic vector
/// (u, 1).
fn isotropic_lift(u: &DVector<f64>) -> DVector<f64> {
    let m = u.len();
    let mut v = DVector::zeros(m + 1);
    v.rows_mut(0, m).copy_from(u);
    v[m] = 1.0;
    v
}

/// Builds a rank-one Schottky family: one hyperbolic generator per axis,
/// with prescribed translation length and exactly the prescribed axis
/// endpoints, plus a sampled ping-pong certificate.
///
/// The generator for an axis is R·B(ℓ)·R⁻¹ where B(ℓ) is the standard
/// boost and R is the form-preserving frame whose first and last columns
/// span the axis plane.
pub fn schottky_so_m1(
    m: usize,
    axes: &[AxisSpec],
    lengths: &[f64],
) -> Result<(Representation, PingPongCertificate)> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!(
            "boundary-sphere construction needs m ≥ 2, got {m}"
        )));
    }
    if axes.len() != lengths.len() {
        return Err(Error::InvalidParameter(format!(
            "{} axes but {} lengths",
            axes.len(),
            lengths.len()
        )));
    }
    if axes.len() < 2 {
        return Err(Error::RankTooSmall { rank: axes.len() });
    }
    let space = QSpace::new(m, 1)?;
    let d = m + 1;
    let mut gens = Vec::with_capacity(axes.len());
    for (axis, &len) in axes.iter().zip(lengths) {
        if !(len > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "translation length must be positive, got {len}"
            )));
        }
        if axis.plus.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "axis endpoints live in dimension {}, expected {m}",
                axis.plus.len()
            )));
        }
        if axis.plus.dot(&axis.minus) > 1.0 - 1e-9 {
            return Err(Error::BadAxis);
        }
        let a = isotropic_lift(&axis.plus);
        let b = isotropic_lift(&axis.minus);
        // ⟨a−b, a−b⟩ = −2⟨a,b⟩ = 2(1 − u₊·u₋) > 0 and ⟨a+b, a+b⟩ is its
        // negative, so the difference is unit spacelike and the sum unit
        // timelike under the same normalizer.
        let norm = (2.0 * (1.0 - axis.plus.dot(&axis.minus))).sqrt();
        let w_hat = (&a - &b) / norm;
        let t_hat = (&a + &b) / norm;
        let mut cands = Vec::with_capacity(d);
        for i in 0..d {
            let e = DVector::from_fn(d, |j, _| if j == i { 1.0 } else { 0.0 });
            let cw = space.form_apply(&e).dot(&w_hat);
            let ct = space.form_apply(&e).dot(&t_hat);
            // Form-project off the axis plane: ⟨ŵ,ŵ⟩ = 1, ⟨t̂,t̂⟩ = −1.
            cands.push(e - cw * &w_hat + ct * &t_hat);
        }
        let middle = form_orthonormalize(&space, &cands, 1.0, m - 1)?;
        let mut r = DMatrix::zeros(d, d);
        r.set_column(0, &w_hat);
        for (j, col) in middle.iter().enumerate() {
            r.set_column(1 + j, col);
        }
        r.set_column(d - 1, &t_hat);
        // R(e₁ + e_d) = ŵ + t̂ ∝ a: the attracting line is exact.
        let gmat = &r * standard_boost(d, len) * form_inverse(&space, &r);
        gens.push(GroupMatrix::new(&space, gmat)?);
    }
    let rep = Representation::new(&space, gens)?;
    let cert = certify_ping_pong(&rep, axes)?;
    Ok((rep, cert))
}

/// Samples the boundary sphere and checks the Schottky mapping condition:
/// every sample outside the repelling disk of a generator must land inside
/// its attracting disk, and symmetrically for the inverse.
fn certify_ping_pong(rep: &Representation, axes: &[AxisSpec]) -> Result<PingPongCertificate> {
    let m = rep.space().p();
    let centers: Vec<(ProjPoint, ProjPoint)> = axes
        .iter()
        .map(|axis| {
            Ok((
                ProjPoint::new(isotropic_lift(&axis.plus))?,
                ProjPoint::new(isotropic_lift(&axis.minus))?,
            ))
        })
        .collect::<Result<_>>()?;
    let flat: Vec<&ProjPoint> = centers.iter().flat_map(|(a, b)| [a, b]).collect();
    let mut min_center_gap = f64::INFINITY;
    for i in 0..flat.len() {
        for j in i + 1..flat.len() {
            min_center_gap = min_center_gap.min(proj_dist(flat[i], flat[j]));
        }
    }
    // Disks of a third of the minimal gap are pairwise disjoint with the
    // same margin again between them.
    let radius = min_center_gap / 3.0;
    if !(radius > 0.0) {
        return Err(Error::PingPong(
            "coincident axis endpoints leave no room for disjoint disks".into(),
        ));
    }
    let samples: Vec<ProjPoint> = unit_sphere_points(PING_PONG_SAMPLES, m)
        .iter()
        .map(|u| ProjPoint::new(isotropic_lift(u)).expect("isotropic lift is nonzero"))
        .collect();
    let mut worst: f64 = 0.0;
    for (i, (att, rpl)) in centers.iter().enumerate() {
        let g = rep.generators[i].matrix();
        let g_inv = rep.inverses[i].matrix();
        for x in &samples {
            if proj_dist(x, rpl) >= radius {
                worst = worst.max(proj_dist(&x.apply(g)?, att));
            }
            if proj_dist(x, att) >= radius {
                worst = worst.max(proj_dist(&x.apply(g_inv)?, rpl));
            }
        }
    }
    if worst >= radius {
        return Err(Error::PingPong(format!(
            "sampled images reach chordal radius {worst:.3e}, outside the disk radius {radius:.3e}"
        )));
    }
    Ok(PingPongCertificate {
        min_center_gap,
        radius,
        worst_image_radius: worst,
        samples: PING_PONG_SAMPLES,
    })
}

/// Embeds a rank-one representation block-diagonally into a larger
/// signature: the source coordinates occupy the last m positive slots and
/// the first negative slot of the target, every other coordinate is fixed.
pub fn embed_block(rho0: &Representation, target: &QSpace) -> Result<Representation> {
    let src = rho0.space();
    if src.q() != 1 {
        return Err(Error::InvalidParameter(format!(
            "block embedding expects a rank-one source signature (m, 1), got ({}, {})",
            src.p(),
            src.q()
        )));
    }
    let m = src.p();
    let (p, q) = (target.p(), target.q());
    if p < m {
        return Err(Error::BlockTooLarge { m, p, q });
    }
    let d = target.d();
    // Source slot i → target slot: positives right-aligned in the positive
    // block, the single negative onto the first negative slot.
    let map = |i: usize| if i < m { p - m + i } else { p };
    let mut gens = Vec::with_capacity(rho0.rank());
    for g in rho0.generators() {
        let mut out = DMatrix::identity(d, d);
        for i in 0..=m {
            for j in 0..=m {
                out[(map(i), map(j))] = g.matrix()[(i, j)];
            }
        }
        gens.push(GroupMatrix::new(target, out)?);
    }
    Representation::new(target, gens)
}

/// Right-multiplies every generator by the exponential of an independent
/// random form-compatible direction scaled by `epsilon`. Deterministic in
/// `seed`; `epsilon = 0` returns an identical copy.
pub fn deform(rho: &Representation, epsilon: f64, seed: u64) -> Result<Representation> {
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "deformation scale must be ≥ 0, got {epsilon}"
        )));
    }
    if epsilon == 0.0 {
        return Ok(rho.clone());
    }
    let space = rho.space().clone();
    let d = space.d();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gens = Vec::with_capacity(rho.rank());
    for g in rho.generators() {
        // X = J·S with S skew solves XᵀJ + JX = 0, so exp(εX) preserves
        // the form exactly.
        let mut s = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in (i + 1)..d {
                let v: f64 = rng.gen_range(-1.0..1.0);
                s[(i, j)] = v;
                s[(j, i)] = -v;
            }
        }
        let x = space.form() * s;
        let step = (epsilon * x).exp();
        gens.push(GroupMatrix::new(&space, g.matrix() * step)?);
    }
    Representation::new(&space, gens)
}

/// Per-sphere minimum of the first singular-value gap, with the word that
/// attains it.
#[derive(Debug, Clone)]
pub struct SphereGap {
    pub len: usize,
    pub min_gap: f64,
    pub witness: Word,
}

/// Sphere-by-sphere gap minima together with the best linear minorant
/// `gap ≥ alpha·L − c` through them.
#[derive(Debug, Clone)]
pub struct GapReport {
    pub per_length: Vec<SphereGap>,
    pub alpha: f64,
    pub c: f64,
}

impl GapReport {
    /// A strictly positive slope is the empirical marker of uniform
    /// exponential domination.
    pub fn is_anosov(&self) -> bool {
        self.alpha > tol::GAP_ABS
    }
}

/// Subtree prefix length at which sphere scans fork into parallel tasks.
const PAR_PREFIX: usize = 2;

/// Folds a visitor over every reduced word of the given length, carrying
/// the running product. Subtrees rooted at short prefixes run in parallel;
/// the returned accumulators are ordered by prefix, and within each
/// subtree words are visited in enumeration order.
pub(crate) fn sphere_fold<T, I, V>(rho: &Representation, len: usize, init: I, visit: V) -> Vec<T>
where
    T: Send,
    I: Fn() -> T + Sync,
    V: Fn(&mut T, &[Letter], &DMatrix<f64>) + Sync,
{
    let d = rho.space().d();
    if len == 0 {
        let mut acc = init();
        visit(&mut acc, &[], &DMatrix::identity(d, d));
        return vec![acc];
    }
    let plen = PAR_PREFIX.min(len);
    let prefixes: Vec<Word> = sphere(rho.rank(), plen).collect();
    prefixes
        .par_iter()
        .map(|pre| {
            let mut acc = init();
            let mut letters = pre.letters().to_vec();
            let mut g = DMatrix::identity(d, d);
            for &l in pre.letters() {
                g = &g * rho.letter_matrix(l);
            }
            descend(rho, len, &mut letters, g, &mut acc, &visit);
            acc
        })
        .collect()
}

/// Depth-first extension of a reduced prefix to full length, multiplying
/// one letter at a time. Letter order matches the sphere enumeration.
fn descend<T, V>(
    rho: &Representation,
    len: usize,
    letters: &mut Vec<Letter>,
    g: DMatrix<f64>,
    acc: &mut T,
    visit: &V,
) where
    V: Fn(&mut T, &[Letter], &DMatrix<f64>) + Sync,
{
    if letters.len() == len {
        visit(acc, letters, &g);
        return;
    }
    let k = rho.rank() as Letter;
    let last = *letters.last().expect("prefixes are nonempty");
    for l in -k..=k {
        if l == 0 || l == -last {
            continue;
        }
        letters.push(l);
        let next = &g * rho.letter_matrix(l);
        descend(rho, len, letters, next, acc, visit);
        letters.pop();
    }
}

/// Gap between the two largest log singular values in the given frame.
fn top_gap(tau: &TauFrame, g: &DMatrix<f64>) -> f64 {
    let conj = tau.conjugate(g);
    let sv = conj.singular_values();
    let (mut top, mut second) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for s in sv.iter() {
        let l = s.ln();
        if l > top {
            second = top;
            top = l;
        } else if l > second {
            second = l;
        }
    }
    top - second
}

/// Scans every sphere up to `lmax` for the minimal first singular gap in
/// the given frame and fits the best linear minorant through the minima.
pub fn gap_report(rho: &Representation, tau: &TauFrame, lmax: usize) -> Result<GapReport> {
    if lmax < 2 {
        return Err(Error::InvalidParameter(format!(
            "gap scan needs at least two sphere lengths, got {lmax}"
        )));
    }
    let mut per_length = Vec::with_capacity(lmax);
    for len in 1..=lmax {
        let parts = sphere_fold(
            rho,
            len,
            || (f64::INFINITY, Vec::new()),
            |acc: &mut (f64, Vec<Letter>), letters, g| {
                let gap = top_gap(tau, g);
                if gap < acc.0 {
                    *acc = (gap, letters.to_vec());
                }
            },
        );
        let mut best = (f64::INFINITY, Vec::new());
        for part in parts {
            if part.0 < best.0 {
                best = part;
            }
        }
        per_length.push(SphereGap {
            len,
            min_gap: best.0,
            witness: Word::from_reduced(best.1),
        });
    }
    let (alpha, c) = fit_lower_line(&per_length);
    Ok(GapReport {
        per_length,
        alpha,
        c,
    })
}

/// Lower convex hull of a left-to-right point sequence (monotone chain).
fn lower_hull(pts: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for &p in pts {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            if (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0) <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

/// Least-squares slope through the lower-hull vertices, with the offset
/// raised until the line minorizes every point.
fn fit_lower_line(per: &[SphereGap]) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = per.iter().map(|s| (s.len as f64, s.min_gap)).collect();
    let hull = lower_hull(&pts);
    let n = hull.len() as f64;
    let sx: f64 = hull.iter().map(|p| p.0).sum();
    let sy: f64 = hull.iter().map(|p| p.1).sum();
    let sxx: f64 = hull.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = hull.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    let alpha = if denom.abs() < 1e-12 {
        0.0
    } else {
        (n * sxy - sx * sy) / denom
    };
    let c = pts
        .iter()
        .map(|&(x, y)| alpha * x - y)
        .fold(f64::NEG_INFINITY, f64::max);
    (alpha, c)
}

/// One boundary sample: the top singular direction, the hyperplane spanned
/// by all but the bottom singular direction, and—when the word's image is
/// proximal—its eigenline pair.
#[derive(Debug, Clone)]
pub struct LimitPoint {
    pub word: Word,
    pub xi: ProjPoint,
    pub eta: ProjHyperplane,
    pub eigen: Option<(ProjPoint, ProjHyperplane)>,
}

/// Computes limit-set samples from every word of the given sphere, in the
/// standard frame. Fails when the sphere's minimal singular gap does not
/// clear [`LIMIT_GAP_THRESHOLD`], since the top direction is only
/// boundary-accurate under a dominated gap.
pub fn limit_set_sample(rho: &Representation, len: usize) -> Result<Vec<LimitPoint>> {
    if len == 0 {
        return Err(Error::InvalidParameter(
            "limit-set sampling needs sphere length ≥ 1".into(),
        ));
    }
    let tau = TauFrame::standard(rho.space());
    let space = rho.space();
    let parts = sphere_fold(
        rho,
        len,
        || (f64::INFINITY, Vec::new()),
        |acc: &mut (f64, Vec<LimitPoint>), letters, m| {
            let g = GroupMatrix::new_unchecked(m.clone());
            let ext = tau_svd_extremes(space, &g, &tau);
            let gap = ext.logs[0] - ext.logs[1];
            if gap < acc.0 {
                acc.0 = gap;
            }
            let xi = ProjPoint::new(ext.top_direction).expect("singular directions are unit");
            let eta =
                ProjHyperplane::new(ext.bottom_hyperplane).expect("singular covectors are unit");
            let eigen = proximal_data(&g, tol::GAP_ABS).map(|pd| (pd.attracting, pd.repelling));
            acc.1.push(LimitPoint {
                word: Word::from_reduced(letters.to_vec()),
                xi,
                eta,
                eigen,
            });
        },
    );
    let mut min_gap = f64::INFINITY;
    let mut out = Vec::new();
    for (gap, mut points) in parts {
        min_gap = min_gap.min(gap);
        out.append(&mut points);
    }
    if !(min_gap > LIMIT_GAP_THRESHOLD) {
        return Err(Error::GapTooSmall {
            gap: min_gap,
            depth: len,
            threshold: LIMIT_GAP_THRESHOLD,
        });
    }
    Ok(out)
}
