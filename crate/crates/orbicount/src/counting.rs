//! Counting orbit points below a threshold, with completeness
//! certificates, growth fits, and equidistribution diagnostics.
//!
//! The pipeline enumerates group elements sphere by sphere in the word
//! metric, evaluates one of the two projections per element (the
//! spectral one at the basepoint, or the norm one at the frame — see
//! [`SeriesMode`]), pools the values into a nondecreasing step function
//! `N(t)`, and certifies a grid point `t` as complete when the deepest
//! enumerated spheres demonstrably contribute only values above `t`.
//! Certified tails feed the exponential fit `N(t) ≈ M·e^{h·t}`, which in
//! turn normalizes the equidistribution tables.
//!
//! Elements whose displacement of the basepoint is not space-like have no
//! spectral projection value; they are tallied in a separate
//! `exceptional` bucket and counted at value 0 for every threshold. A
//! well-margined basepoint produces none beyond small word lengths, so
//! persistent exceptional elements in the deepest spheres abort the
//! series with a margin error rather than silently skewing it.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::pseudometric::{b_tau, image_length, BasepointFrame};
use crate::qlinalg::{eigen_moduli, GroupMatrix, ProjHyperplane, ProjPoint};
use crate::repbuilder::{sphere_fold, Representation};
use crate::wordgroup::{conjugacy_classes, Word};
use crate::{Error, Result};

/// Number of outermost enumeration spheres whose behaviour backs a
/// completeness certificate: their per-sphere minima must be
/// nondecreasing and (for the spectral series) free of exceptional
/// displacements.
pub const CERTIFICATE_WINDOW: usize = 3;

/// Default tail fraction of the certified threshold range used by
/// [`fit_asymptotic`].
pub const FIT_WINDOW_FRACTION: f64 = 0.4;

/// Minimum number of complete grid points a growth fit needs.
pub const FIT_MIN_POINTS: usize = 10;

/// Distinct spectrum values required before entropy or lattice
/// diagnostics run.
const SPECTRUM_MIN_VALUES: usize = 20;

/// Maximal distance to the nearest lattice multiple accepted as
/// "on-lattice" by [`spectrum_lattice_test`].
const LATTICE_TOL: f64 = 1e-6;

/// Which projection a counting series measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeriesMode {
    /// Spectral projection at the basepoint (partial: space-like
    /// displacements only; the rest land in the exceptional bucket).
    Basepoint,
    /// Norm projection at the (basepoint, frame) pair (total).
    Frame,
}

/// Projection values over one enumeration sphere, in deterministic
/// enumeration order. This is the unit of work (and of on-disk caching
/// in the CLI): spheres are independent, so deeper runs reuse shallow
/// ones verbatim.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SphereValues {
    /// Word length of the sphere.
    pub length: usize,
    /// Projection measured.
    pub mode: SeriesMode,
    /// One value per element with a defined projection.
    pub values: Vec<f64>,
    /// Elements whose displacement was not space-like (spectral mode
    /// only; always 0 in frame mode).
    pub exceptional: u64,
}

impl SphereValues {
    /// Smallest defined value on the sphere; +∞ when every element was
    /// exceptional.
    pub fn min_value(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// A counting function sampled on a threshold grid, with per-threshold
/// completeness certificates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CountSeries {
    /// Strictly increasing thresholds.
    pub t_grid: Vec<f64>,
    /// `counts[i]` = number of enumerated elements with value ≤
    /// `t_grid[i]`, exceptional elements counted at value 0.
    pub counts: Vec<u64>,
    /// `Some(depth)` when the count at that threshold is certified
    /// complete by the enumeration up to word length `depth`: no deeper
    /// element can land at or below the threshold. Certified counts
    /// never change as the enumeration deepens.
    pub complete: Vec<Option<usize>>,
    /// Total exceptional elements across all enumerated spheres.
    pub exceptional: u64,
    /// Projection the series measures.
    pub mode: SeriesMode,
}

/// An exponential growth law `N(t) ≈ e^{h·t}/M` fitted to the certified
/// tail of a [`CountSeries`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AsymptoticFit {
    /// Growth exponent (always positive).
    pub h: f64,
    /// Normalizing constant: the stable value of `e^{h·t}/N(t)`.
    pub m: f64,
    /// Threshold window `(lo, hi)` the fit used.
    pub window: (f64, f64),
    /// Coefficient of variation of the detrended counts
    /// `N(t)·M·e^{−h·t}` over the window; 0 means a perfect exponential.
    pub residual: f64,
}

/// Verdict of the lattice diagnostic on a length spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LatticeVerdict {
    /// Every spectrum value sits within tolerance of a multiple of `a`
    /// (the largest such spacing on the candidate grid).
    Lattice {
        /// Detected lattice spacing.
        a: f64,
        /// Largest distance from a value to the nearest multiple.
        max_distance: f64,
    },
    /// Every candidate spacing is violated by more than the tolerance.
    NonLattice {
        /// Candidate with the smallest violation.
        best_a: f64,
        /// Its violation (distance from some value to the lattice).
        best_distance: f64,
    },
}

/// Normalized test-function sums over orbit pairs, tabulated against the
/// threshold grid: `columns[j][i] = M·e^{−h·tᵢ}·Σ_{value(γ) ≤ tᵢ}
/// f_j(pair(γ))`.
#[derive(Debug, Clone)]
pub struct EquidistributionTable {
    /// Thresholds the sums were sampled at.
    pub t_grid: Vec<f64>,
    /// One column per test function, aligned with `t_grid`.
    pub columns: Vec<Vec<f64>>,
}

/// Test function over an orbit pair: first argument the canonical unit
/// covector of `ρ(γ⁻¹)·o^⊥`, second the canonical unit representative of
/// `ρ(γ)·o`.
pub type PairFn<'a> = &'a (dyn Fn(&DVector<f64>, &DVector<f64>) -> f64 + Sync);

// ---------------------------------------------------------------------
// Sphere evaluation
// ---------------------------------------------------------------------

/// Evaluates the chosen projection on every element of one enumeration
/// sphere. Deterministic: values appear in word-enumeration order
/// regardless of thread count (the parallel split is by fixed prefixes,
/// reassembled in prefix order).
pub fn sphere_values(
    frame: &BasepointFrame,
    rho: &Representation,
    mode: SeriesMode,
    length: usize,
) -> SphereValues {
    struct Acc {
        values: Vec<f64>,
        exceptional: u64,
    }
    let parts = sphere_fold(
        rho,
        length,
        || Acc {
            values: Vec::new(),
            exceptional: 0,
        },
        |acc, _letters, g| {
            // The running product of validated generator lifts stays in
            // the group; re-validation per word would dominate the scan.
            let gm = GroupMatrix::new_unchecked(g.clone());
            match mode {
                SeriesMode::Basepoint => match image_length(frame, &gm) {
                    Ok(v) => acc.values.push(v),
                    Err(_) => acc.exceptional += 1,
                },
                SeriesMode::Frame => acc.values.push(b_tau(frame, &gm)),
            }
        },
    );
    let mut values = Vec::new();
    let mut exceptional = 0;
    for part in parts {
        values.extend(part.values);
        exceptional += part.exceptional;
    }
    SphereValues {
        length,
        mode,
        values,
        exceptional,
    }
}

fn validate_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidParameter(
            "threshold grid contains a non-finite value".into(),
        ));
    }
    if t_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "threshold grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Pools per-sphere values into a [`CountSeries`] on the given strictly
/// increasing threshold grid.
///
/// The spheres must cover word lengths `0..spheres.len()` contiguously
/// and share one mode. Exceptional elements from any sphere are counted
/// at value 0 for every threshold and reported in the `exceptional`
/// field; if any of the [`CERTIFICATE_WINDOW`] deepest spheres contains
/// one, the basepoint margin is inadequate for counting at this depth
/// and the assembly fails with [`Error::MarginViolation`].
///
/// A threshold is certified complete when the deepest sphere's minimum
/// exceeds it *and* the per-sphere minima are nondecreasing across the
/// certificate window — the empirical signature that deeper spheres only
/// move farther out.
pub fn assemble_series(spheres: &[SphereValues], t_grid: &[f64]) -> Result<CountSeries> {
    validate_grid(t_grid)?;
    if spheres.is_empty() {
        return Err(Error::InvalidParameter(
            "no enumeration spheres supplied".into(),
        ));
    }
    let mode = spheres[0].mode;
    for (l, s) in spheres.iter().enumerate() {
        if s.length != l {
            return Err(Error::InvalidParameter(format!(
                "sphere at position {l} carries length {}; spheres must cover 0..=Lmax contiguously",
                s.length
            )));
        }
        if s.mode != mode {
            return Err(Error::InvalidParameter(
                "spheres mix projection modes".into(),
            ));
        }
    }

    let window = CERTIFICATE_WINDOW.min(spheres.len());
    let tail = &spheres[spheres.len() - window..];
    let tail_exceptional: u64 = tail.iter().map(|s| s.exceptional).sum();
    if tail_exceptional > 0 {
        return Err(Error::MarginViolation {
            exceptional: tail_exceptional,
            spheres: window,
        });
    }

    let mut pooled: Vec<f64> = Vec::with_capacity(
        spheres.iter().map(|s| s.values.len()).sum::<usize>()
            + spheres.iter().map(|s| s.exceptional as usize).sum::<usize>(),
    );
    let mut exceptional = 0u64;
    for s in spheres {
        pooled.extend_from_slice(&s.values);
        // Exceptional elements sit at value 0 in the counting function.
        pooled.extend(std::iter::repeat(0.0).take(s.exceptional as usize));
        exceptional += s.exceptional;
    }
    pooled.sort_by(f64::total_cmp);

    let minima: Vec<f64> = tail.iter().map(SphereValues::min_value).collect();
    let tail_monotone = minima.windows(2).all(|w| w[0] <= w[1]);
    let outer_min = *minima.last().expect("certificate window is nonempty");
    let depth = spheres.len() - 1;

    let counts: Vec<u64> = t_grid
        .iter()
        .map(|&t| pooled.partition_point(|&v| v <= t) as u64)
        .collect();
    let complete: Vec<Option<usize>> = t_grid
        .iter()
        .map(|&t| (tail_monotone && outer_min > t).then_some(depth))
        .collect();

    Ok(CountSeries {
        t_grid: t_grid.to_vec(),
        counts,
        complete,
        exceptional,
        mode,
    })
}

/// Counting series for the spectral projection at the basepoint over the
/// word ball of radius `lmax`.
///
/// Elements with non-space-like displacement are tallied separately and
/// counted at value 0; persistent ones in the deepest spheres indicate
/// an inadequate basepoint margin and abort with
/// [`Error::MarginViolation`]. The count at every threshold `t ≥ 0`
/// includes the identity, so it is at least 1.
pub fn count_series_b_o(
    frame: &BasepointFrame,
    rho: &Representation,
    lmax: usize,
    t_grid: &[f64],
) -> Result<CountSeries> {
    let spheres: Vec<SphereValues> = (0..=lmax)
        .map(|l| sphere_values(frame, rho, SeriesMode::Basepoint, l))
        .collect();
    assemble_series(&spheres, t_grid)
}

/// Counting series for the norm projection at the frame over the word
/// ball of radius `lmax`. The projection is total, so the exceptional
/// bucket is always empty; for a strictly displacing group only the
/// identity sits at value 0.
pub fn count_series_b_tau(
    frame: &BasepointFrame,
    rho: &Representation,
    lmax: usize,
    t_grid: &[f64],
) -> Result<CountSeries> {
    let spheres: Vec<SphereValues> = (0..=lmax)
        .map(|l| sphere_values(frame, rho, SeriesMode::Frame, l))
        .collect();
    assemble_series(&spheres, t_grid)
}

impl CountSeries {
    /// Number of grid points certified complete.
    pub fn certified_points(&self) -> usize {
        self.complete.iter().filter(|c| c.is_some()).count()
    }

    /// CSV rendering with header `t,N,complete,Mehat` and CRLF line
    /// endings; decimal separator is always `.`. The `Mehat` column
    /// holds the running constant estimate `e^{h·t}/N(t)` when a fit is
    /// supplied and the count is positive, and is empty otherwise.
    pub fn to_csv(&self, fit: Option<&AsymptoticFit>) -> String {
        let mut out = String::from("t,N,complete,Mehat\r\n");
        for i in 0..self.t_grid.len() {
            let t = self.t_grid[i];
            let n = self.counts[i];
            let mehat = match fit {
                Some(f) if n > 0 => format!("{}", (f.h * t).exp() / n as f64),
                _ => String::new(),
            };
            out.push_str(&format!(
                "{},{},{},{}\r\n",
                t,
                n,
                self.complete[i].is_some(),
                mehat
            ));
        }
        out
    }
}

/// JSON run summary combining a series and its fit: growth exponent,
/// constant, fit window, fit residual, and the exceptional count.
pub fn summary_json(series: &CountSeries, fit: &AsymptoticFit) -> serde_json::Value {
    serde_json::json!({
        "mode": match series.mode {
            SeriesMode::Basepoint => "basepoint",
            SeriesMode::Frame => "frame",
        },
        "h": fit.h,
        "M": fit.m,
        "window": { "lo": fit.window.0, "hi": fit.window.1 },
        "residuals": { "fit_cv": fit.residual },
        "exceptional": series.exceptional,
        "grid_points": series.t_grid.len(),
        "certified_points": series.certified_points(),
    })
}

// ---------------------------------------------------------------------
// Growth fits
// ---------------------------------------------------------------------

/// Least-squares line through `(x, y)` points; returns `(slope,
/// intercept)`.
fn least_squares(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum();
    if sxx <= 0.0 {
        return Err(Error::DegenerateFit(
            "abscissae carry no spread; slope is undetermined".into(),
        ));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Coefficient of variation (standard deviation over mean).
fn coefficient_of_variation(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if mean == 0.0 {
        return f64::INFINITY;
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    var.sqrt() / mean.abs()
}

/// Fits `N(t) ≈ e^{h·t}/M` over the default tail fraction
/// ([`FIT_WINDOW_FRACTION`]) of the certified threshold range. See
/// [`fit_asymptotic_windowed`].
pub fn fit_asymptotic(series: &CountSeries, h_known: Option<f64>) -> Result<AsymptoticFit> {
    fit_asymptotic_windowed(series, h_known, FIT_WINDOW_FRACTION)
}

/// Fits `N(t) ≈ e^{h·t}/M` over the rightmost `fraction` of the
/// certified threshold range, using only grid points whose counts are
/// certified complete (and positive).
///
/// With `h_known` supplied, `M` is the mean of `e^{h·t}/N(t)` over the
/// window; otherwise `(h, M)` come from least squares on `log N(t)`
/// against `t`. Either way the residual is the coefficient of variation
/// of the detrended counts `N(t)·M·e^{−h·t}` over the window. Fails when
/// fewer than [`FIT_MIN_POINTS`] window points are complete, or when the
/// fitted growth rate is not positive.
pub fn fit_asymptotic_windowed(
    series: &CountSeries,
    h_known: Option<f64>,
    fraction: f64,
) -> Result<AsymptoticFit> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "fit window fraction must lie in (0, 1], got {fraction}"
        )));
    }
    if let Some(h) = h_known {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "supplied growth exponent must be positive and finite, got {h}"
            )));
        }
    }
    let certified: Vec<(f64, u64)> = series
        .t_grid
        .iter()
        .zip(&series.counts)
        .zip(&series.complete)
        .filter(|&(_, c)| c.is_some())
        .map(|((&t, &n), _)| (t, n))
        .filter(|&(_, n)| n > 0)
        .collect();
    if certified.len() < FIT_MIN_POINTS {
        return Err(Error::InsufficientData {
            needed: FIT_MIN_POINTS,
            got: certified.len(),
        });
    }
    let t_lo_all = certified.first().expect("nonempty").0;
    let t_hi = certified.last().expect("nonempty").0;
    let cut = t_hi - fraction * (t_hi - t_lo_all);
    let pts: Vec<(f64, f64)> = certified
        .iter()
        .filter(|&&(t, _)| t >= cut - 1e-12)
        .map(|&(t, n)| (t, n as f64))
        .collect();
    if pts.len() < FIT_MIN_POINTS {
        return Err(Error::InsufficientData {
            needed: FIT_MIN_POINTS,
            got: pts.len(),
        });
    }
    let window = (pts.first().expect("nonempty").0, pts.last().expect("nonempty").0);

    let (h, m) = match h_known {
        Some(h) => {
            let m = pts.iter().map(|&(t, n)| (h * t).exp() / n).sum::<f64>() / pts.len() as f64;
            (h, m)
        }
        None => {
            let xs: Vec<f64> = pts.iter().map(|&(t, _)| t).collect();
            let ys: Vec<f64> = pts.iter().map(|&(_, n)| n.ln()).collect();
            let (slope, intercept) = least_squares(&xs, &ys)?;
            if !(slope > 0.0) {
                return Err(Error::DegenerateFit(format!(
                    "fitted growth rate {slope} is not positive"
                )));
            }
            (slope, (-intercept).exp())
        }
    };
    let detrended: Vec<f64> = pts.iter().map(|&(t, n)| n * m * (-h * t).exp()).collect();
    let residual = coefficient_of_variation(&detrended);
    Ok(AsymptoticFit {
        h,
        m,
        window,
        residual,
    })
}

// ---------------------------------------------------------------------
// Entropy from the length spectrum
// ---------------------------------------------------------------------

/// Growth exponent of a length spectrum: the least-squares slope of
/// `log k` against the `k`-th smallest spectrum value, restricted to
/// values at most `t_star` (the threshold up to which the spectrum is
/// known to be complete).
///
/// Needs at least 20 values below the threshold.
pub fn entropy_from_spectrum(values: &[f64], t_star: f64) -> Result<f64> {
    let mut vals: Vec<f64> = values
        .iter()
        .copied()
        .filter(|v| v.is_finite() && *v <= t_star)
        .collect();
    if vals.len() < SPECTRUM_MIN_VALUES {
        return Err(Error::InsufficientData {
            needed: SPECTRUM_MIN_VALUES,
            got: vals.len(),
        });
    }
    vals.sort_by(f64::total_cmp);
    let ys: Vec<f64> = (1..=vals.len()).map(|k| (k as f64).ln()).collect();
    let (slope, _) = least_squares(&vals, &ys)?;
    Ok(slope)
}

/// Growth exponent of the conjugacy-class length spectrum: enumerates
/// every class of cyclic word length up to `lmax`, takes each class's
/// top logarithmic eigenvalue modulus, and fits the exponent over the
/// certified-complete part of the spectrum.
///
/// The completeness threshold is the minimum over the outermost cyclic
/// length: classes longer than `lmax` can only have larger values once
/// the per-length minima are increasing, which is required across the
/// last [`CERTIFICATE_WINDOW`] lengths.
pub fn entropy_from_periods(rho: &Representation, lmax: usize) -> Result<f64> {
    if lmax < 4 {
        return Err(Error::InvalidParameter(format!(
            "period entropy needs classes up to cyclic length at least 4, got {lmax}"
        )));
    }
    let mut per_length_min = vec![f64::INFINITY; lmax + 1];
    let mut spectrum: Vec<f64> = Vec::new();
    for class in conjugacy_classes(rho.rank(), lmax) {
        let g = rho.evaluate(&class.to_word())?;
        let lambda = eigen_moduli(&g)[0];
        let l = class.len();
        if lambda < per_length_min[l] {
            per_length_min[l] = lambda;
        }
        spectrum.push(lambda);
    }
    let window = CERTIFICATE_WINDOW.min(lmax);
    let tail = &per_length_min[lmax + 1 - window..];
    if tail.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::DegenerateFit(
            "per-length spectrum minima are not increasing; no completeness window".into(),
        ));
    }
    entropy_from_spectrum(&spectrum, per_length_min[lmax])
}

// ---------------------------------------------------------------------
// Product inequality probe
// ---------------------------------------------------------------------

/// Empirically maximizes `b_o(f·γ) − b_o(γ)` over the two outermost
/// enumeration spheres (skipping pairs where either projection is
/// undefined) and checks it against the product bound
/// `½·log‖ρ(f)‖ + ½·log‖ρ(f⁻¹)‖ + c`, where the norms are frame operator
/// norms and `c` is the largest observed gap between the two projections
/// on the same elements. Returns the empirical maximum.
pub fn weak_triangle_check(
    frame: &BasepointFrame,
    rho: &Representation,
    f: &Word,
    lmax: usize,
) -> Result<f64> {
    let fm = rho.evaluate(f)?;
    let fim = rho.evaluate(&f.inverse())?;

    struct Acc {
        max_diff: f64,
        max_gap: f64,
        pairs: u64,
    }
    let lo = lmax.saturating_sub(1);
    let mut max_diff = f64::NEG_INFINITY;
    let mut max_gap: f64 = 0.0;
    let mut pairs = 0u64;
    for len in lo..=lmax {
        let parts = sphere_fold(
            rho,
            len,
            || Acc {
                max_diff: f64::NEG_INFINITY,
                max_gap: 0.0,
                pairs: 0,
            },
            |acc, _letters, g| {
                let gm = GroupMatrix::new_unchecked(g.clone());
                let base = match image_length(frame, &gm) {
                    Ok(v) => v,
                    Err(_) => return,
                };
                let shifted_m = GroupMatrix::new_unchecked(fm.matrix() * g);
                let shifted = match image_length(frame, &shifted_m) {
                    Ok(v) => v,
                    Err(_) => return,
                };
                acc.max_diff = acc.max_diff.max(shifted - base);
                acc.max_gap = acc.max_gap.max(b_tau(frame, &gm) - base);
                acc.pairs += 1;
            },
        );
        for part in parts {
            max_diff = max_diff.max(part.max_diff);
            max_gap = max_gap.max(part.max_gap);
            pairs += part.pairs;
        }
    }
    if pairs == 0 {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let tau = frame.tau();
    let norm_part =
        0.5 * tau.operator_norm(fm.matrix()).ln() + 0.5 * tau.operator_norm(fim.matrix()).ln();
    let bound = norm_part + max_gap;
    assert!(
        max_diff <= bound + 1e-9,
        "product bound violated: max displacement increment {max_diff} exceeds {bound} \
         (norm part {norm_part}, projection gap {max_gap})"
    );
    Ok(max_diff)
}

// ---------------------------------------------------------------------
// Equidistribution
// ---------------------------------------------------------------------

/// Tabulates `M·e^{−h·t}·Σ_{value(γ) ≤ t} f(pair(γ))` over the word ball
/// of radius `lmax` for each test function, where `pair(γ)` is the
/// canonical unit covector of `ρ(γ⁻¹)·o^⊥` together with the canonical
/// unit representative of `ρ(γ)·o`, and `value(γ)` is the chosen
/// projection (exceptional elements enter at value 0, mirroring the
/// counting series).
///
/// With `f ≡ 1` the column reproduces `M·e^{−h·t}·N(t)` exactly; for
/// continuous `f` the certified tail stabilizes toward a limiting mean
/// against the orbital measure.
pub fn equidistribution_stat(
    frame: &BasepointFrame,
    rho: &Representation,
    fit: &AsymptoticFit,
    fns: &[PairFn],
    mode: SeriesMode,
    lmax: usize,
    t_grid: &[f64],
) -> Result<EquidistributionTable> {
    validate_grid(t_grid)?;
    if fns.is_empty() {
        return Err(Error::InvalidParameter(
            "no test functions supplied".into(),
        ));
    }
    if !(fit.h > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "equidistribution normalization needs a positive growth exponent, got {}",
            fit.h
        )));
    }
    // Covector cut out by the basepoint: pairing against ô.
    let theta0 = frame.space().form_apply(frame.basepoint_vector());

    let mut rows: Vec<(f64, Vec<f64>)> = Vec::new();
    for len in 0..=lmax {
        let parts = sphere_fold(
            rho,
            len,
            || Ok(Vec::<(f64, Vec<f64>)>::new()),
            |acc: &mut Result<Vec<(f64, Vec<f64>)>>, _letters, g| {
                let Ok(list) = acc.as_mut() else { return };
                let gm = GroupMatrix::new_unchecked(g.clone());
                let value = match mode {
                    SeriesMode::Basepoint => image_length(frame, &gm).unwrap_or(0.0),
                    SeriesMode::Frame => b_tau(frame, &gm),
                };
                // Covector of ρ(γ⁻¹)·o^⊥ — hyperplanes pull back by the
                // transpose, so no inverse is needed.
                let theta = g.transpose() * &theta0;
                let point = g * frame.basepoint_vector();
                let pair = ProjHyperplane::new(theta)
                    .and_then(|h| ProjPoint::new(point).map(|p| (h, p)));
                match pair {
                    Ok((h, p)) => {
                        let fs = fns.iter().map(|f| f(h.covector(), p.rep())).collect();
                        list.push((value, fs));
                    }
                    Err(e) => *acc = Err(e),
                }
            },
        );
        for part in parts {
            rows.extend(part?);
        }
    }
    // Stable sort keeps the deterministic enumeration order among ties.
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));

    let values: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let mut columns = vec![Vec::with_capacity(t_grid.len()); fns.len()];
    // Prefix sums per function, sampled at each threshold.
    let mut prefix = vec![vec![0.0f64; rows.len() + 1]; fns.len()];
    for (j, pref) in prefix.iter_mut().enumerate() {
        for (i, row) in rows.iter().enumerate() {
            pref[i + 1] = pref[i] + row.1[j];
        }
    }
    for &t in t_grid {
        let idx = values.partition_point(|&v| v <= t);
        for (j, col) in columns.iter_mut().enumerate() {
            col.push(fit.m * (-fit.h * t).exp() * prefix[j][idx]);
        }
    }
    Ok(EquidistributionTable {
        t_grid: t_grid.to_vec(),
        columns,
    })
}

// ---------------------------------------------------------------------
// Lattice diagnostic
// ---------------------------------------------------------------------

/// Distance from `v` to the nearest integer multiple of `a`.
fn lattice_distance(v: f64, a: f64) -> f64 {
    (v - a * (v / a).round()).abs()
}

/// Tests whether every spectrum value sits on an arithmetic lattice
/// `a·ℤ` for some candidate spacing. Returns the largest passing
/// spacing (coarser lattices contain finer ones, so the largest is the
/// informative one), or the least-violated candidate when none passes.
pub fn lattice_verdict_from_spectrum(values: &[f64], a_grid: &[f64]) -> Result<LatticeVerdict> {
    if values.is_empty() {
        return Err(Error::InvalidParameter(
            "empty spectrum for the lattice test".into(),
        ));
    }
    if a_grid.is_empty() || a_grid.iter().any(|&a| !(a > 0.0) || !a.is_finite()) {
        return Err(Error::InvalidParameter(
            "lattice spacing candidates must be positive and finite".into(),
        ));
    }
    let mut best_pass: Option<(f64, f64)> = None;
    let mut best_fail = (f64::NAN, f64::INFINITY);
    for &a in a_grid {
        let dist = values
            .iter()
            .map(|&v| lattice_distance(v, a))
            .fold(0.0f64, f64::max);
        if dist <= LATTICE_TOL {
            match best_pass {
                Some((a0, _)) if a0 >= a => {}
                _ => best_pass = Some((a, dist)),
            }
        } else if dist < best_fail.1 {
            best_fail = (a, dist);
        }
    }
    Ok(match best_pass {
        Some((a, max_distance)) => LatticeVerdict::Lattice { a, max_distance },
        None => LatticeVerdict::NonLattice {
            best_a: best_fail.0,
            best_distance: best_fail.1,
        },
    })
}

/// Lattice diagnostic on the conjugacy-class length spectrum up to
/// cyclic length `lmax`: collects the distinct top logarithmic
/// eigenvalue moduli (separation 1e-9) and applies
/// [`lattice_verdict_from_spectrum`]. Needs at least 20 distinct values.
pub fn spectrum_lattice_test(
    rho: &Representation,
    lmax: usize,
    a_grid: &[f64],
) -> Result<LatticeVerdict> {
    let mut values: Vec<f64> = Vec::new();
    for class in conjugacy_classes(rho.rank(), lmax) {
        let g = rho.evaluate(&class.to_word())?;
        values.push(eigen_moduli(&g)[0]);
    }
    values.sort_by(f64::total_cmp);
    values.dedup_by(|b, a| (*b - *a).abs() <= 1e-9);
    if values.len() < SPECTRUM_MIN_VALUES {
        return Err(Error::InsufficientData {
            needed: SPECTRUM_MIN_VALUES,
            got: values.len(),
        });
    }
    lattice_verdict_from_spectrum(&values, a_grid)
}
