//! Experiment descriptions loadable from flat text files.
//!
//! One experiment per file; the format is `key = value` lines with `#`
//! comments. Numeric values are plain decimal strings with `.` as the
//! separator (never locale-dependent), and matrices are flattened
//! row-major into whitespace-separated entry lists, so a written file
//! re-parses to bit-identical floats. Every rejection names the
//! offending line and field.
//!
//! A config describes: the ambient quadratic form signature, the group
//! builder (a rank-one Schottky family to embed, or explicit generator
//! matrices), the basepoint and optional negative-plane basis, the
//! enumeration depth, the threshold grid, a residual tolerance, a seed,
//! and an output directory.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::pseudometric::BasepointFrame;
use crate::qlinalg::{GroupMatrix, QSpace};
use crate::repbuilder::{embed_block, schottky_so_m1, AxisSpec, Representation};
use crate::{tol, Error, Result};

/// How the generator matrices are produced.
#[derive(Debug, Clone, PartialEq)]
pub enum BuilderSpec {
    /// Boosts along prescribed axes of a rank-one form of signature
    /// `(m, 1)`, block-embedded into the ambient signature when it is
    /// larger. Axis endpoints are unit directions of dimension `m`, or a
    /// single angle each when `m = 2`.
    Schottky {
        /// Source form dimension parameter (the source signature is `(m, 1)`).
        m: usize,
        /// Translation length per generator.
        lengths: Vec<f64>,
        /// Attracting/repelling endpoint directions per generator.
        axes: Vec<(Vec<f64>, Vec<f64>)>,
    },
    /// Generator matrices given entry by entry (row-major, dimension
    /// `d×d` for ambient dimension `d = p + q`).
    Explicit {
        /// Row-major entries, one `Vec` of length `d²` per generator.
        generators: Vec<Vec<f64>>,
    },
}

/// A parsed experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Positive directions of the ambient form.
    pub p: usize,
    /// Negative directions of the ambient form.
    pub q: usize,
    /// Number of free generators.
    pub rank: usize,
    /// Generator construction.
    pub builder: BuilderSpec,
    /// Basepoint representative (length `p + q`, must be time-like).
    pub basepoint: Vec<f64>,
    /// Optional negative-plane basis rows (each of length `p + q`,
    /// `q` rows); defaults to the frame's canonical completion.
    pub tau: Option<Vec<Vec<f64>>>,
    /// Word-ball enumeration depth.
    pub lmax: usize,
    /// Threshold grid as (lo, hi, number of points).
    pub tgrid: (f64, f64, usize),
    /// Residual tolerance handed to verification suites.
    pub tolerance: f64,
    /// Seed for randomized checks.
    pub seed: u64,
    /// Output directory for result and cache files.
    pub out: String,
}

/// A config realized as concrete objects.
#[derive(Debug, Clone)]
pub struct BuiltExperiment {
    /// Ambient quadratic space.
    pub space: QSpace,
    /// The generated representation.
    pub rho: Representation,
    /// Frame at the configured basepoint.
    pub frame: BasepointFrame,
}

// ---------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------

struct RawConfig {
    /// key -> (line number, raw value)
    entries: BTreeMap<String, (usize, String)>,
}

impl RawConfig {
    fn parse(text: &str) -> Result<RawConfig> {
        let mut entries = BTreeMap::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw_line.find('#') {
                Some(pos) => &raw_line[..pos],
                None => raw_line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let Some(eq) = line.find('=') else {
                return Err(Error::config(
                    line_no,
                    line.split_whitespace().next().unwrap_or(""),
                    "expected `key = value`",
                ));
            };
            let key = line[..eq].trim().to_string();
            let value = line[eq + 1..].trim().to_string();
            if key.is_empty() {
                return Err(Error::config(line_no, "", "missing key before `=`"));
            }
            if value.is_empty() {
                return Err(Error::config(line_no, &key, "missing value after `=`"));
            }
            if let Some((prev_line, _)) = entries.get(&key) {
                return Err(Error::config(
                    line_no,
                    &key,
                    format!("duplicate key (first set on line {prev_line})"),
                ));
            }
            entries.insert(key, (line_no, value));
        }
        Ok(RawConfig { entries })
    }

    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.entries.remove(key)
    }

    fn require(&mut self, key: &str) -> Result<(usize, String)> {
        self.take(key)
            .ok_or_else(|| Error::config(0, key, "required key is missing"))
    }
}

fn parse_usize(line: usize, field: &str, value: &str) -> Result<usize> {
    value
        .parse::<usize>()
        .map_err(|e| Error::config(line, field, format!("not a nonnegative integer: {e}")))
}

fn parse_u64(line: usize, field: &str, value: &str) -> Result<u64> {
    value
        .parse::<u64>()
        .map_err(|e| Error::config(line, field, format!("not a nonnegative integer: {e}")))
}

fn parse_f64(line: usize, field: &str, value: &str) -> Result<f64> {
    let x: f64 = value
        .parse()
        .map_err(|e| Error::config(line, field, format!("not a decimal number: {e}")))?;
    if !x.is_finite() {
        return Err(Error::config(line, field, "number must be finite"));
    }
    Ok(x)
}

fn parse_f64_list(line: usize, field: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split_whitespace()
        .map(|tok| parse_f64(line, field, tok))
        .collect()
}

fn float_list(xs: &[f64]) -> String {
    let mut s = String::new();
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{x}");
    }
    s
}

impl ExperimentConfig {
    /// Parses a config from its text form. Every rejection carries the
    /// line number (0 for a missing key) and the field name.
    pub fn parse(text: &str) -> Result<ExperimentConfig> {
        let mut raw = RawConfig::parse(text)?;

        let (l, v) = raw.require("signature.p")?;
        let p = parse_usize(l, "signature.p", &v)?;
        let (l, v) = raw.require("signature.q")?;
        let q = parse_usize(l, "signature.q", &v)?;
        let (l, v) = raw.require("rank")?;
        let rank = parse_usize(l, "rank", &v)?;
        let d = p + q;

        let (builder_line, builder_kind) = raw.require("builder")?;
        let builder = match builder_kind.as_str() {
            "schottky" => {
                let (l, v) = raw.require("schottky.m")?;
                let m = parse_usize(l, "schottky.m", &v)?;
                let mut lengths = Vec::with_capacity(rank);
                let mut axes = Vec::with_capacity(rank);
                for i in 1..=rank {
                    let key = format!("length.{i}");
                    let (l, v) = raw.require(&key)?;
                    lengths.push(parse_f64(l, &key, &v)?);
                    let kp = format!("axis.{i}.plus");
                    let (lp, vp) = raw.require(&kp)?;
                    let plus = parse_f64_list(lp, &kp, &vp)?;
                    let km = format!("axis.{i}.minus");
                    let (lm, vm) = raw.require(&km)?;
                    let minus = parse_f64_list(lm, &km, &vm)?;
                    for (lk, key, dir) in [(lp, &kp, &plus), (lm, &km, &minus)] {
                        if dir.len() != 1 && dir.len() != m {
                            return Err(Error::config(
                                lk,
                                key,
                                format!(
                                    "axis endpoint needs 1 angle or {m} direction entries, got {}",
                                    dir.len()
                                ),
                            ));
                        }
                        if dir.len() == 1 && m != 2 {
                            return Err(Error::config(
                                lk,
                                key,
                                "angle form of an axis endpoint requires schottky.m = 2",
                            ));
                        }
                    }
                    axes.push((plus, minus));
                }
                BuilderSpec::Schottky { m, lengths, axes }
            }
            "explicit" => {
                let mut generators = Vec::with_capacity(rank);
                for i in 1..=rank {
                    let key = format!("generator.{i}");
                    let (l, v) = raw.require(&key)?;
                    let entries = parse_f64_list(l, &key, &v)?;
                    if entries.len() != d * d {
                        return Err(Error::config(
                            l,
                            &key,
                            format!(
                                "generator needs {} row-major entries for dimension {d}, got {}",
                                d * d,
                                entries.len()
                            ),
                        ));
                    }
                    generators.push(entries);
                }
                BuilderSpec::Explicit { generators }
            }
            other => {
                return Err(Error::config(
                    builder_line,
                    "builder",
                    format!("unknown builder `{other}` (expected `schottky` or `explicit`)"),
                ));
            }
        };

        let (l, v) = raw.require("basepoint")?;
        let basepoint = parse_f64_list(l, "basepoint", &v)?;
        if basepoint.len() != d {
            return Err(Error::config(
                l,
                "basepoint",
                format!("needs {d} entries, got {}", basepoint.len()),
            ));
        }

        let mut tau_rows = Vec::new();
        for i in 1..=q {
            let key = format!("tau.{i}");
            if let Some((l, v)) = raw.take(&key) {
                let row = parse_f64_list(l, &key, &v)?;
                if row.len() != d {
                    return Err(Error::config(
                        l,
                        &key,
                        format!("needs {d} entries, got {}", row.len()),
                    ));
                }
                tau_rows.push(row);
            }
        }
        let tau = if tau_rows.is_empty() {
            None
        } else if tau_rows.len() == q {
            Some(tau_rows)
        } else {
            return Err(Error::config(
                0,
                "tau",
                format!("needs all {q} rows (tau.1 … tau.{q}) or none, got {}", tau_rows.len()),
            ));
        };

        let (l, v) = raw.require("lmax")?;
        let lmax = parse_usize(l, "lmax", &v)?;

        let (l, v) = raw.require("tgrid")?;
        let toks = parse_f64_list(l, "tgrid", &v)?;
        if toks.len() != 3 || toks[2].fract() != 0.0 || toks[2] < 1.0 {
            return Err(Error::config(
                l,
                "tgrid",
                "expected `lo hi points` with a positive integer point count",
            ));
        }
        if !(toks[0] < toks[1]) && toks[2] > 1.0 {
            return Err(Error::config(l, "tgrid", "needs lo < hi"));
        }
        let tgrid = (toks[0], toks[1], toks[2] as usize);

        let tolerance = match raw.take("tolerance") {
            Some((l, v)) => {
                let t = parse_f64(l, "tolerance", &v)?;
                if !(t > 0.0) {
                    return Err(Error::config(l, "tolerance", "must be positive"));
                }
                t
            }
            None => tol::REL,
        };
        let seed = match raw.take("seed") {
            Some((l, v)) => parse_u64(l, "seed", &v)?,
            None => 0,
        };
        let out = match raw.take("out") {
            Some((_, v)) => v,
            None => "out".to_string(),
        };

        if let Some((key, (line, _))) = raw.entries.iter().next() {
            return Err(Error::config(*line, key, "unknown key"));
        }

        Ok(ExperimentConfig {
            p,
            q,
            rank,
            builder,
            basepoint,
            tau,
            lmax,
            tgrid,
            tolerance,
            seed,
            out,
        })
    }

    /// Reads and parses a config file.
    pub fn from_file(path: &Path) -> Result<ExperimentConfig> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), &e))?;
        ExperimentConfig::parse(&text)
    }

    /// Canonical text form. Floats print in shortest round-trip decimal
    /// form, so `parse(to_text(c)) == c` exactly.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "signature.p = {}", self.p);
        let _ = writeln!(s, "signature.q = {}", self.q);
        let _ = writeln!(s, "rank = {}", self.rank);
        match &self.builder {
            BuilderSpec::Schottky { m, lengths, axes } => {
                let _ = writeln!(s, "builder = schottky");
                let _ = writeln!(s, "schottky.m = {m}");
                for (i, (len, (plus, minus))) in lengths.iter().zip(axes).enumerate() {
                    let _ = writeln!(s, "length.{} = {len}", i + 1);
                    let _ = writeln!(s, "axis.{}.plus = {}", i + 1, float_list(plus));
                    let _ = writeln!(s, "axis.{}.minus = {}", i + 1, float_list(minus));
                }
            }
            BuilderSpec::Explicit { generators } => {
                let _ = writeln!(s, "builder = explicit");
                for (i, g) in generators.iter().enumerate() {
                    let _ = writeln!(s, "generator.{} = {}", i + 1, float_list(g));
                }
            }
        }
        let _ = writeln!(s, "basepoint = {}", float_list(&self.basepoint));
        if let Some(rows) = &self.tau {
            for (i, row) in rows.iter().enumerate() {
                let _ = writeln!(s, "tau.{} = {}", i + 1, float_list(row));
            }
        }
        let _ = writeln!(s, "lmax = {}", self.lmax);
        let _ = writeln!(
            s,
            "tgrid = {} {} {}",
            self.tgrid.0, self.tgrid.1, self.tgrid.2
        );
        let _ = writeln!(s, "tolerance = {}", self.tolerance);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "out = {}", self.out);
        s
    }

    /// The threshold grid the config describes (inclusive endpoints).
    pub fn t_grid(&self) -> Vec<f64> {
        let (lo, hi, n) = self.tgrid;
        if n == 1 {
            return vec![lo];
        }
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    }

    /// Hash of everything the evaluated per-element values depend on:
    /// signature, rank, builder, basepoint, and frame basis. Enumeration
    /// depth, grid, seed, tolerance, and paths are deliberately excluded
    /// so caches survive deeper or re-gridded runs; any generator or
    /// frame change invalidates them.
    pub fn content_hash(&self) -> u64 {
        let mut key = String::new();
        let _ = write!(key, "{}|{}|{}|", self.p, self.q, self.rank);
        match &self.builder {
            BuilderSpec::Schottky { m, lengths, axes } => {
                let _ = write!(key, "schottky|{m}|{}|", float_list(lengths));
                for (plus, minus) in axes {
                    let _ = write!(key, "{}/{};", float_list(plus), float_list(minus));
                }
            }
            BuilderSpec::Explicit { generators } => {
                let _ = write!(key, "explicit|");
                for g in generators {
                    let _ = write!(key, "{};", float_list(g));
                }
            }
        }
        let _ = write!(key, "|{}|", float_list(&self.basepoint));
        if let Some(rows) = &self.tau {
            for row in rows {
                let _ = write!(key, "{};", float_list(row));
            }
        }
        fnv1a(key.as_bytes())
    }

    /// Realizes the config: builds the representation (embedding the
    /// rank-one Schottky block when the ambient signature is larger) and
    /// the basepoint frame.
    pub fn build(&self) -> Result<BuiltExperiment> {
        let space = QSpace::new(self.p, self.q)?;
        let rho = match &self.builder {
            BuilderSpec::Schottky { m, lengths, axes } => {
                if lengths.len() != self.rank {
                    return Err(Error::InvalidParameter(format!(
                        "rank {} disagrees with {} generator lengths",
                        self.rank,
                        lengths.len()
                    )));
                }
                let specs: Vec<AxisSpec> = axes
                    .iter()
                    .map(|(plus, minus)| {
                        if plus.len() == 1 {
                            Ok(AxisSpec::from_angles(plus[0], minus[0]))
                        } else {
                            AxisSpec::new(plus, minus)
                        }
                    })
                    .collect::<Result<_>>()?;
                let (rho0, _cert) = schottky_so_m1(*m, &specs, lengths)?;
                if (self.p, self.q) == (*m, 1) {
                    rho0
                } else {
                    embed_block(&rho0, &space)?
                }
            }
            BuilderSpec::Explicit { generators } => {
                let d = space.d();
                let gens: Vec<GroupMatrix> = generators
                    .iter()
                    .map(|entries| {
                        GroupMatrix::new(&space, DMatrix::from_row_slice(d, d, entries))
                    })
                    .collect::<Result<_>>()?;
                Representation::new(&space, gens)?
            }
        };
        let o = DVector::from_row_slice(&self.basepoint);
        let tau_vecs: Option<Vec<DVector<f64>>> = self
            .tau
            .as_ref()
            .map(|rows| rows.iter().map(|r| DVector::from_row_slice(r)).collect());
        let frame = BasepointFrame::new(&space, &o, tau_vecs.as_deref())?;
        Ok(BuiltExperiment { space, rho, frame })
    }

    /// The reference experiment most docs and end-to-end checks run: two
    /// perpendicular boosts through a common point with incommensurable
    /// translation lengths 4 and 4·√2, embedded into signature (2,2),
    /// measured from the block's time-like axis.
    pub fn reference() -> ExperimentConfig {
        use std::f64::consts::PI;
        ExperimentConfig {
            p: 2,
            q: 2,
            rank: 2,
            builder: BuilderSpec::Schottky {
                m: 2,
                lengths: vec![4.0, 4.0 * 2f64.sqrt()],
                axes: vec![
                    (vec![0.0], vec![PI]),
                    (vec![PI / 2.0], vec![3.0 * PI / 2.0]),
                ],
            },
            basepoint: vec![0.0, 0.0, 1.0, 0.0],
            tau: None,
            lmax: 12,
            tgrid: (0.0, 30.0, 121),
            tolerance: tol::REL,
            seed: 7,
            out: "out".to_string(),
        }
    }
}

/// FNV-1a, 64-bit: a stable, dependency-free content hash for cache keys
/// (not cryptographic; collisions only cost a spurious cache rebuild).
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}
