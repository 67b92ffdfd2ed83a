//! Batteries of identity checks over a built experiment: each suite
//! exercises one family of exact relations (spectral length against
//! geometric length, factorization round-trips, cocycle laws, product
//! compatibilities, the cohomology transfer, basepoint margin, period
//! duality) on enumerated or seeded-random inputs and reports the worst
//! residual against a tolerance.
//!
//! Suites never panic on degenerate inputs: a suite that cannot gather
//! its samples (say, every class is non-proximal because the generators
//! are trivial) reports itself failed with the blocking error as its
//! detail, so a front-end can always print a full table.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::BuiltExperiment;
use crate::dynsys::{
    boundary_point, cocycle_c_o, cocycle_c_tau, cohomology_u, gromov_o, gromov_tau,
    translate_stepwise, BoundaryPoint,
};
use crate::pseudometric::{b_o, b_tau, decompose_hbh, decompose_kbh, image_length, omega_margin};
use crate::qlinalg::{eigen_moduli, proj_dist, GroupMatrix, ProjPoint};
use crate::repbuilder::sphere_fold;
use crate::wordgroup::{conjugacy_classes, CyclicWord, Letter, Word};
use crate::{tol, Result};

/// Outcome of one identity family.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    /// Stable suite name.
    pub name: String,
    /// Number of checked instances.
    pub cases: usize,
    /// Worst residual observed (NaN when the suite could not run).
    pub worst: f64,
    /// Residual bound the suite was held to.
    pub tolerance: f64,
    /// Whether every instance stayed within tolerance.
    pub passed: bool,
    /// Human-readable note (failure cause, or context).
    pub detail: String,
}

/// Knobs for the suite battery.
#[derive(Debug, Clone, Copy)]
pub struct SuiteOptions {
    /// Word-ball radius for the enumerated length comparison.
    pub ball_radius: usize,
    /// Sample count for the randomized suites.
    pub samples: usize,
    /// Seed for all randomized sampling.
    pub seed: u64,
    /// Base residual tolerance (suites with structurally coarser
    /// arithmetic scale it up; the report shows the effective value).
    pub tolerance: f64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            ball_radius: 6,
            samples: 200,
            seed: 1,
            tolerance: tol::REL,
        }
    }
}

/// Margin below which the basepoint is considered to violate the
/// counting precondition (pairing of the basepoint with some limit
/// direction vanishes).
pub const MARGIN_FLOOR: f64 = 1e-6;

// ---------------------------------------------------------------------
// Sampling helpers
// ---------------------------------------------------------------------

fn random_reduced(rng: &mut ChaCha8Rng, rank: usize, max_len: usize) -> Word {
    let len = rng.gen_range(0..=max_len);
    let mut letters: Vec<Letter> = Vec::new();
    while letters.len() < len {
        let mag = rng.gen_range(1..=rank) as Letter;
        let l = if rng.gen_bool(0.5) { mag } else { -mag };
        if letters.last().is_some_and(|&p| p == -l) {
            continue;
        }
        letters.push(l);
    }
    Word::new(&letters, rank).expect("letters drawn within rank")
}

/// Conjugacy classes up to the given cyclic length whose evaluated
/// matrices carry usable attracting eigendata.
fn proximal_pool(exp: &BuiltExperiment, max_len: usize) -> Vec<CyclicWord> {
    conjugacy_classes(exp.rho.rank(), max_len)
        .filter(|c| boundary_point(&exp.rho, &Word::identity(), c).is_ok())
        .collect()
}

/// A boundary point: attracting line of a random pooled class, moved by
/// a random short prefix one letter at a time (the letterwise action
/// keeps the line and its dual hyperplane synchronized even when the
/// generators stretch hard).
fn random_point(
    exp: &BuiltExperiment,
    rng: &mut ChaCha8Rng,
    pool: &[CyclicWord],
    max_prefix: usize,
) -> Result<BoundaryPoint> {
    let core = &pool[rng.gen_range(0..pool.len())];
    let base = boundary_point(&exp.rho, &Word::identity(), core)?;
    let prefix = random_reduced(rng, exp.rho.rank(), max_prefix);
    translate_stepwise(&exp.rho, &prefix, &base)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

// ---------------------------------------------------------------------
// Individual suites (cases, worst residual)
// ---------------------------------------------------------------------

/// Spectral length against geometric length over the word ball: the
/// half-top-log-eigenvalue of the reflected commutator must equal the
/// inverse hyperbolic cosine of the displacement pairing wherever the
/// displacement is space-like.
fn suite_spectral_vs_geometric(exp: &BuiltExperiment, radius: usize) -> Result<(usize, f64)> {
    struct Acc {
        cases: usize,
        worst: f64,
    }
    let mut cases = 0;
    let mut worst: f64 = 0.0;
    for len in 0..=radius {
        let parts = sphere_fold(
            &exp.rho,
            len,
            || Acc {
                cases: 0,
                worst: 0.0,
            },
            |acc, _letters, m| {
                let g = GroupMatrix::new_unchecked(m.clone());
                let (Ok(spectral), Ok(geometric)) =
                    (b_o(&exp.frame, &g), image_length(&exp.frame, &g))
                else {
                    return;
                };
                acc.cases += 1;
                acc.worst = acc.worst.max(rel(spectral, geometric));
            },
        );
        for p in parts {
            cases += p.cases;
            worst = worst.max(p.worst);
        }
    }
    Ok((cases, worst))
}

/// Factorization round-trips on constructed inputs with a known scalar
/// component: stabilizer–boost–stabilizer products must recover the
/// boost parameter as the basepoint projection, and frame-isometry–
/// boost–stabilizer products as the frame projection; both must
/// reassemble the input matrix.
fn suite_decompositions(exp: &BuiltExperiment, samples: usize, seed: u64) -> Result<(usize, f64)> {
    let frame = &exp.frame;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xD0C0);
    let ks = crate::pseudometric::sample_tau_rotation(frame, samples, seed ^ 0x5EED1);
    let hs = crate::pseudometric::sample_stabilizer(frame, 2 * samples, seed ^ 0x5EED2);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for i in 0..samples {
        let s_in = rng.gen_range(0.05..2.5);
        let boost = frame.model_boost(s_in);

        // Frame-isometry sandwich: polar-style factorization.
        let g = GroupMatrix::new_unchecked(ks[i].matrix() * boost.matrix() * hs[2 * i].matrix());
        let (k, s, h) = decompose_kbh(frame, &g)?;
        let recon = k.matrix() * frame.model_boost(s).matrix() * h.matrix();
        worst = worst.max((&recon - g.matrix()).norm() / g.matrix().norm());
        worst = worst.max(rel(s, s_in));
        worst = worst.max(rel(s, b_tau(frame, &g)));
        cases += 1;

        // Stabilizer sandwich: two-sided basepoint factorization.
        let g2 = GroupMatrix::new_unchecked(
            hs[2 * i + 1].matrix() * boost.matrix() * hs[2 * i].matrix(),
        );
        let (h1, s2, h2) = decompose_hbh(frame, &g2)?;
        let recon2 = h1.matrix() * frame.model_boost(s2).matrix() * h2.matrix();
        worst = worst.max((&recon2 - g2.matrix()).norm() / g2.matrix().norm());
        worst = worst.max(rel(s2, s_in));
        worst = worst.max(rel(s2, b_o(frame, &g2)?));
        cases += 1;
    }
    Ok((cases, worst))
}

/// Chain rule of both cocycles on random (word, word, boundary point)
/// triples: the value on a product splits as the value of the left
/// factor at the translated point plus the value of the right factor.
fn suite_cocycle_laws(exp: &BuiltExperiment, samples: usize, seed: u64) -> Result<(usize, f64)> {
    let pool = proximal_pool(exp, 3);
    if pool.is_empty() {
        return Err(crate::Error::InsufficientData { needed: 1, got: 0 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xC0C1);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    let mut attempts = 0;
    while cases < samples && attempts < 50 * samples {
        attempts += 1;
        let g1 = random_reduced(&mut rng, exp.rho.rank(), 4);
        let g2 = random_reduced(&mut rng, exp.rho.rank(), 4);
        let Ok(x) = random_point(exp, &mut rng, &pool, 3) else {
            continue;
        };
        let Ok(g2x) = translate_stepwise(&exp.rho, &g2, &x) else {
            continue;
        };
        let product = g1.concat(&g2);
        let run = || -> Result<f64> {
            let o_res = rel(
                cocycle_c_o(&exp.frame, &exp.rho, &product, &x)?,
                cocycle_c_o(&exp.frame, &exp.rho, &g1, &g2x)?
                    + cocycle_c_o(&exp.frame, &exp.rho, &g2, &x)?,
            );
            let t_res = rel(
                cocycle_c_tau(&exp.frame, &exp.rho, &product, &x)?,
                cocycle_c_tau(&exp.frame, &exp.rho, &g1, &g2x)?
                    + cocycle_c_tau(&exp.frame, &exp.rho, &g2, &x)?,
            );
            Ok(o_res.max(t_res))
        };
        let Ok(res) = run() else { continue };
        worst = worst.max(res);
        cases += 1;
    }
    Ok((cases, worst))
}

/// Compatibility of the two products with the two cocycles: translating
/// both arguments shifts the symmetric product by the two basepoint
/// cocycle values and the mixed product by one of each. Pairs are kept
/// projectively separated before and after translation so the logs
/// retain full precision.
fn suite_gromov_compat(exp: &BuiltExperiment, samples: usize, seed: u64) -> Result<(usize, f64)> {
    let pool = proximal_pool(exp, 3);
    if pool.is_empty() {
        return Err(crate::Error::InsufficientData { needed: 1, got: 0 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6E01);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    let mut attempts = 0;
    while cases < samples && attempts < 100 * samples {
        attempts += 1;
        let g = random_reduced(&mut rng, exp.rho.rank(), 4);
        let (Ok(x), Ok(y)) = (
            random_point(exp, &mut rng, &pool, 2),
            random_point(exp, &mut rng, &pool, 2),
        ) else {
            continue;
        };
        let (Ok(gx), Ok(gy)) = (
            translate_stepwise(&exp.rho, &g, &x),
            translate_stepwise(&exp.rho, &g, &y),
        ) else {
            continue;
        };
        if proj_dist(x.xi(), y.xi()) < 0.1 || proj_dist(gx.xi(), gy.xi()) < 0.1 {
            continue;
        }
        let run = || -> Result<f64> {
            let sym = rel(
                gromov_o(&exp.frame, &gx, &gy)? - gromov_o(&exp.frame, &x, &y)?,
                -(cocycle_c_o(&exp.frame, &exp.rho, &g, &x)?
                    + cocycle_c_o(&exp.frame, &exp.rho, &g, &y)?),
            );
            let mixed = rel(
                gromov_tau(&exp.frame, &gx, &gy)? - gromov_tau(&exp.frame, &x, &y)?,
                -(cocycle_c_o(&exp.frame, &exp.rho, &g, &x)?
                    + cocycle_c_tau(&exp.frame, &exp.rho, &g, &y)?),
            );
            Ok(sym.max(mixed))
        };
        let Ok(res) = run() else { continue };
        worst = worst.max(res);
        cases += 1;
    }
    Ok((cases, worst))
}

/// The transfer function links the two cocycles on the boundary:
/// the frame value minus the basepoint value along any word equals the
/// increment of the bounded potential between the endpoint and the
/// start.
fn suite_cohomology_transfer(
    exp: &BuiltExperiment,
    samples: usize,
    seed: u64,
) -> Result<(usize, f64)> {
    let pool = proximal_pool(exp, 3);
    if pool.is_empty() {
        return Err(crate::Error::InsufficientData { needed: 1, got: 0 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7A0F);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    let mut attempts = 0;
    while cases < samples && attempts < 50 * samples {
        attempts += 1;
        let g = random_reduced(&mut rng, exp.rho.rank(), 4);
        let Ok(x) = random_point(exp, &mut rng, &pool, 2) else {
            continue;
        };
        let Ok(gx) = translate_stepwise(&exp.rho, &g, &x) else {
            continue;
        };
        let run = || -> Result<f64> {
            let diff = cocycle_c_tau(&exp.frame, &exp.rho, &g, &x)?
                - cocycle_c_o(&exp.frame, &exp.rho, &g, &x)?;
            let hop = cohomology_u(&exp.frame, &gx)? - cohomology_u(&exp.frame, &x)?;
            Ok(rel(diff, hop))
        };
        let Ok(res) = run() else { continue };
        worst = worst.max(res);
        cases += 1;
    }
    Ok((cases, worst))
}

/// Basepoint margin over a sample of limit directions: the smallest
/// absolute pairing between the basepoint and an observed forward line.
/// Counting is well-posed only when it is bounded away from zero; the
/// suite value is the margin itself (bigger is better), tested against
/// [`MARGIN_FLOOR`].
fn suite_omega_margin(exp: &BuiltExperiment) -> Result<(usize, f64)> {
    let pool = proximal_pool(exp, 4);
    if pool.is_empty() {
        return Err(crate::Error::InsufficientData { needed: 1, got: 0 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x3A61);
    let mut lines: Vec<ProjPoint> = Vec::new();
    for core in &pool {
        let base = boundary_point(&exp.rho, &Word::identity(), core)?;
        lines.push(base.xi().clone());
        for _ in 0..3 {
            let prefix = random_reduced(&mut rng, exp.rho.rank(), 3);
            if let Ok(moved) = translate_stepwise(&exp.rho, &prefix, &base) {
                lines.push(moved.xi().clone());
            }
        }
    }
    let margin = omega_margin(&exp.frame, &lines)?;
    Ok((lines.len(), margin))
}

/// Period duality: the basepoint cocycle evaluated at a class's own
/// attracting fixed point equals the class's top logarithmic eigenvalue
/// modulus.
fn suite_period_duality(exp: &BuiltExperiment, max_len: usize) -> Result<(usize, f64)> {
    let pool = proximal_pool(exp, max_len);
    if pool.is_empty() {
        return Err(crate::Error::InsufficientData { needed: 1, got: 0 });
    }
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for core in &pool {
        let x = boundary_point(&exp.rho, &Word::identity(), core)?;
        let period = cocycle_c_o(&exp.frame, &exp.rho, &core.to_word(), &x)?;
        let lambda = eigen_moduli(&exp.rho.evaluate(&core.to_word())?)[0];
        worst = worst.max(rel(period, lambda));
        cases += 1;
    }
    Ok((cases, worst))
}

// ---------------------------------------------------------------------
// The battery
// ---------------------------------------------------------------------

fn finish(
    name: &str,
    tolerance: f64,
    min_cases: usize,
    outcome: Result<(usize, f64)>,
    higher_is_better: bool,
) -> SuiteResult {
    match outcome {
        Ok((cases, worst)) => {
            let within = if higher_is_better {
                worst > tolerance
            } else {
                worst <= tolerance
            };
            let enough = cases >= min_cases;
            SuiteResult {
                name: name.to_string(),
                cases,
                worst,
                tolerance,
                passed: within && enough,
                detail: if !enough {
                    format!("only {cases} usable cases (needed {min_cases})")
                } else {
                    String::new()
                },
            }
        }
        Err(e) => SuiteResult {
            name: name.to_string(),
            cases: 0,
            worst: f64::NAN,
            tolerance,
            passed: false,
            detail: format!("suite could not run: {e}"),
        },
    }
}

/// Runs every identity suite against the experiment and returns their
/// results in a fixed order. Never fails as a whole: blocked suites are
/// reported failed with the cause in their detail.
pub fn run_suites(exp: &BuiltExperiment, opts: &SuiteOptions) -> Vec<SuiteResult> {
    let t = opts.tolerance;
    vec![
        finish(
            "spectral-length-vs-geometric",
            t,
            1,
            suite_spectral_vs_geometric(exp, opts.ball_radius),
            false,
        ),
        finish(
            "decomposition-round-trip",
            t,
            opts.samples,
            suite_decompositions(exp, opts.samples, opts.seed),
            false,
        ),
        finish(
            "cocycle-laws",
            t,
            opts.samples / 2,
            suite_cocycle_laws(exp, opts.samples, opts.seed),
            false,
        ),
        finish(
            "gromov-compatibility",
            t,
            opts.samples / 2,
            suite_gromov_compat(exp, opts.samples, opts.seed),
            false,
        ),
        finish(
            "cohomology-transfer",
            t,
            opts.samples / 2,
            suite_cohomology_transfer(exp, opts.samples, opts.seed),
            false,
        ),
        finish(
            "omega-margin",
            MARGIN_FLOOR,
            1,
            suite_omega_margin(exp),
            true,
        ),
        finish(
            "period-duality",
            // Top eigenvalue extraction is an iteration, structurally an
            // order coarser than the pairing arithmetic of the others.
            10.0 * t,
            1,
            suite_period_duality(exp, 4),
            false,
        ),
    ]
}

/// Renders suite results as an aligned text table (one row per suite).
pub fn format_report(results: &[SuiteResult]) -> String {
    let mut out = String::new();
    for r in results {
        let status = if r.passed { "PASS" } else { "FAIL" };
        out.push_str(&format!(
            "{status}  {:<30} cases {:>6}  worst {:>12.3e}  tol {:>9.1e}{}{}\n",
            r.name,
            r.cases,
            r.worst,
            r.tolerance,
            if r.detail.is_empty() { "" } else { "  — " },
            r.detail
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;

    fn small_reference(samples: usize) -> (BuiltExperiment, SuiteOptions) {
        let cfg = ExperimentConfig::reference();
        let exp = cfg.build().unwrap();
        let opts = SuiteOptions {
            ball_radius: 4,
            samples,
            seed: cfg.seed,
            tolerance: cfg.tolerance,
        };
        (exp, opts)
    }

    #[test]
    fn reference_experiment_passes_every_suite() {
        let (exp, opts) = small_reference(60);
        let results = run_suites(&exp, &opts);
        assert_eq!(results.len(), 7);
        for r in &results {
            assert!(
                r.passed,
                "suite {} failed: worst {} vs tol {} ({})",
                r.name, r.worst, r.tolerance, r.detail
            );
        }
    }

    #[test]
    fn zero_margin_basepoint_fails_exactly_the_margin_suite() {
        let mut cfg = ExperimentConfig::reference();
        // Fourth axis: orthogonal to the whole embedded block, so every
        // limit direction pairs to zero with it.
        cfg.basepoint = vec![0.0, 0.0, 0.0, 1.0];
        let exp = cfg.build().unwrap();
        let opts = SuiteOptions {
            ball_radius: 3,
            samples: 40,
            seed: 3,
            tolerance: cfg.tolerance,
        };
        let results = run_suites(&exp, &opts);
        let margin = results.iter().find(|r| r.name == "omega-margin").unwrap();
        assert!(!margin.passed, "margin suite must fail at a blind basepoint");
        assert!(
            margin.worst.is_nan() || margin.worst < MARGIN_FLOOR,
            "blind basepoint still reported margin {}",
            margin.worst
        );
    }

    #[test]
    fn absurd_tolerance_fails_residual_suites() {
        let (exp, mut opts) = small_reference(40);
        opts.tolerance = 1e-20;
        let results = run_suites(&exp, &opts);
        let failed = results.iter().filter(|r| !r.passed).count();
        assert!(
            failed >= 3,
            "a 1e-20 tolerance must defeat float arithmetic, only {failed} failed"
        );
        // The margin suite judges geometry, not float residuals, and
        // must be unaffected.
        assert!(
            results
                .iter()
                .find(|r| r.name == "omega-margin")
                .unwrap()
                .passed
        );
    }

    #[test]
    fn report_lists_every_suite_with_status() {
        let (exp, opts) = small_reference(30);
        let results = run_suites(&exp, &opts);
        let report = format_report(&results);
        assert_eq!(report.lines().count(), results.len());
        for r in &results {
            assert!(report.contains(&r.name));
        }
        assert!(report.contains("PASS"));
    }
}
