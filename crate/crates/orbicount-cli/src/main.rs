//! Command-line driver: loads an experiment description, builds the
//! group, and runs one of four commands against it.
//!
//! * `gap` — per-length singular-gap minima and the fitted linear
//!   minorant; succeeds when the slope is positive.
//! * `verify` — the identity-check suites; succeeds when all pass.
//! * `count` — threshold counting series with completeness certificates
//!   and an exponential fit; CSV + JSON outputs.
//! * `distribution` — smoothed orbit sums against the previously fitted
//!   growth law; requires a prior `count` run in the same output
//!   directory.
//!
//! Exit codes: 0 success, 1 verification or analysis failure, 2 config
//! or usage error. All outputs are deterministic functions of the
//! config file and the seed; cache files under `<out>/cache` are pure
//! accelerators and can be deleted at any time without changing any
//! result.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use orbicount::config::{BuiltExperiment, ExperimentConfig};
use orbicount::counting::{
    assemble_series, fit_asymptotic, equidistribution_stat, sphere_values, summary_json,
    AsymptoticFit, CountSeries, PairFn, SeriesMode, SphereValues,
};
use orbicount::repbuilder::gap_report;
use orbicount::verify::{format_report, run_suites, SuiteOptions};
use orbicount::{Error, Result};

/// Cache blob header: magic + format version.
const CACHE_MAGIC: &[u8; 4] = b"OCS1";
const CACHE_VERSION: u32 = 1;

#[derive(Parser)]
#[command(
    name = "orbicount",
    version,
    about = "Orbit counting and verification for indefinite-form matrix groups"
)]
struct Cli {
    /// Experiment description file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Which projection drives counting and distribution sums.
    #[arg(long, global = true, value_enum, default_value = "b_o")]
    mode: Mode,

    /// Override the enumeration depth from the config.
    #[arg(long = "Lmax", global = true, value_name = "N")]
    lmax: Option<usize>,

    /// Override the output directory from the config.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Override the sampling seed from the config.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Size of the worker thread pool (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    #[value(name = "b_o")]
    BasePoint,
    #[value(name = "b_tau")]
    Frame,
}

impl Mode {
    fn series(self) -> SeriesMode {
        match self {
            Mode::BasePoint => SeriesMode::Basepoint,
            Mode::Frame => SeriesMode::Frame,
        }
    }

    fn tag(self) -> &'static str {
        match self {
            Mode::BasePoint => "b_o",
            Mode::Frame => "b_tau",
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Scan singular-value gaps sphere by sphere and fit their growth.
    Gap,
    /// Run every identity suite and report pass/fail per family.
    Verify,
    /// Count orbit elements below each threshold and fit the growth law.
    Count,
    /// Tabulate smoothed orbit sums against the fitted growth law.
    Distribution,
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(real_main(cli));
}

fn real_main(cli: Cli) -> i32 {
    if let Some(n) = cli.threads {
        if rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .is_err()
        {
            eprintln!("warning: thread pool already initialized, --threads ignored");
        }
    }

    let Some(cfg_path) = cli.config.as_deref() else {
        eprintln!("config error: --config PATH is required");
        return 2;
    };
    let mut cfg = match ExperimentConfig::from_file(cfg_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return 2;
        }
    };
    if let Some(l) = cli.lmax {
        cfg.lmax = l;
    }
    if let Some(o) = &cli.out {
        cfg.out = o.display().to_string();
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }

    let exp = match cfg.build() {
        Ok(e) => e,
        Err(e) => {
            eprintln!("config error: {e}");
            return 2;
        }
    };

    let outcome = match cli.cmd {
        Cmd::Gap => cmd_gap(&cfg, &exp),
        Cmd::Verify => cmd_verify(&cfg, &exp),
        Cmd::Count => cmd_count(&cfg, &exp, cli.mode),
        Cmd::Distribution => cmd_distribution(&cfg, &exp, cli.mode),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

// ---------------------------------------------------------------------
// Output helpers
// ---------------------------------------------------------------------

fn out_dir(cfg: &ExperimentConfig) -> Result<PathBuf> {
    let dir = PathBuf::from(&cfg.out);
    fs::create_dir_all(&dir).map_err(|e| Error::io(dir.display().to_string(), &e))?;
    Ok(dir)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path.display().to_string(), &e))?;
    println!("wrote {}", path.display());
    Ok(())
}

// ---------------------------------------------------------------------
// gap
// ---------------------------------------------------------------------

fn cmd_gap(cfg: &ExperimentConfig, exp: &BuiltExperiment) -> Result<i32> {
    let report = gap_report(&exp.rho, exp.frame.tau(), cfg.lmax)?;
    let dir = out_dir(cfg)?;

    let mut csv = String::from("L,min_gap,witness\r\n");
    for s in &report.per_length {
        csv.push_str(&format!("{},{},{}\r\n", s.len, s.min_gap, s.witness));
    }
    write_file(&dir.join("gap.csv"), csv.as_bytes())?;

    let json = serde_json::json!({
        "Lmax": cfg.lmax,
        "alpha": report.alpha,
        "c": report.c,
        "uniform_gap": report.is_anosov(),
    });
    write_file(
        &dir.join("gap.json"),
        serde_json::to_string_pretty(&json).expect("static shape").as_bytes(),
    )?;

    println!(
        "gap minorant: alpha = {:.6}, c = {:.6} over L = 1..={}",
        report.alpha, report.c, cfg.lmax
    );
    if report.is_anosov() {
        println!("uniform gap growth: yes");
        Ok(0)
    } else {
        println!("uniform gap growth: NO (slope not positive)");
        Ok(1)
    }
}

// ---------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------

fn cmd_verify(cfg: &ExperimentConfig, exp: &BuiltExperiment) -> Result<i32> {
    let opts = SuiteOptions {
        ball_radius: cfg.lmax.min(6),
        samples: 200,
        seed: cfg.seed,
        tolerance: cfg.tolerance,
    };
    let results = run_suites(exp, &opts);
    print!("{}", format_report(&results));

    let dir = out_dir(cfg)?;
    write_file(
        &dir.join("verify.json"),
        serde_json::to_string_pretty(&results)
            .expect("suite results serialize")
            .as_bytes(),
    )?;

    let failed = results.iter().filter(|r| !r.passed).count();
    if failed == 0 {
        println!("all {} suites passed", results.len());
        Ok(0)
    } else {
        println!("{failed} of {} suites FAILED", results.len());
        Ok(1)
    }
}

// ---------------------------------------------------------------------
// count
// ---------------------------------------------------------------------

fn cache_path(dir: &Path, cfg: &ExperimentConfig, mode: Mode, len: usize) -> PathBuf {
    dir.join(format!(
        "{:016x}-{}-L{:03}.bin",
        cfg.content_hash(),
        mode.tag(),
        len
    ))
}

fn read_cache(path: &Path, mode: SeriesMode, len: usize) -> Option<SphereValues> {
    let bytes = fs::read(path).ok()?;
    let (head, rest) = bytes.split_at_checked(8)?;
    if &head[0..4] != CACHE_MAGIC
        || u32::from_le_bytes(head[4..8].try_into().ok()?) != CACHE_VERSION
    {
        return None;
    }
    let s: SphereValues = serde_json::from_slice(rest).ok()?;
    (s.length == len && s.mode == mode).then_some(s)
}

fn write_cache(path: &Path, sphere: &SphereValues) {
    // Failures are deliberately ignored: the cache only accelerates.
    let Ok(body) = serde_json::to_vec(sphere) else {
        return;
    };
    let mut bytes = Vec::with_capacity(8 + body.len());
    bytes.extend_from_slice(CACHE_MAGIC);
    bytes.extend_from_slice(&CACHE_VERSION.to_le_bytes());
    bytes.extend_from_slice(&body);
    let tmp = path.with_extension("tmp");
    if fs::write(&tmp, &bytes).is_ok() {
        let _ = fs::rename(&tmp, path);
    }
}

fn spheres_cached(cfg: &ExperimentConfig, exp: &BuiltExperiment, mode: Mode) -> Vec<SphereValues> {
    let cache_dir = PathBuf::from(&cfg.out).join("cache");
    let caching = fs::create_dir_all(&cache_dir).is_ok();
    (0..=cfg.lmax)
        .map(|len| {
            let path = cache_path(&cache_dir, cfg, mode, len);
            if caching {
                if let Some(s) = read_cache(&path, mode.series(), len) {
                    return s;
                }
            }
            let s = sphere_values(&exp.frame, &exp.rho, mode.series(), len);
            if caching {
                write_cache(&path, &s);
            }
            s
        })
        .collect()
}

fn cmd_count(cfg: &ExperimentConfig, exp: &BuiltExperiment, mode: Mode) -> Result<i32> {
    let dir = out_dir(cfg)?;
    let grid = cfg.t_grid();
    let spheres = spheres_cached(cfg, exp, mode);
    let series: CountSeries = assemble_series(&spheres, &grid)?;
    let fit = fit_asymptotic(&series, None);

    let csv = series.to_csv(fit.as_ref().ok());
    write_file(&dir.join(format!("count_{}.csv", mode.tag())), csv.as_bytes())?;

    println!(
        "thresholds: {} of {} certified complete at depth {}, {} exceptional elements",
        series.certified_points(),
        grid.len(),
        cfg.lmax,
        series.exceptional
    );

    let fit = fit?;
    let summary = summary_json(&series, &fit);
    write_file(
        &dir.join(format!("fit_{}.json", mode.tag())),
        serde_json::to_string_pretty(&summary)
            .expect("static shape")
            .as_bytes(),
    )?;
    println!(
        "growth law: h = {:.6}, M = {:.6}, tail residual = {:.4} over window [{:.2}, {:.2}]",
        fit.h, fit.m, fit.residual, fit.window.0, fit.window.1
    );
    Ok(0)
}

// ---------------------------------------------------------------------
// distribution
// ---------------------------------------------------------------------

fn load_fit(dir: &Path, mode: Mode) -> Result<AsymptoticFit> {
    let path = dir.join(format!("fit_{}.json", mode.tag()));
    let missing = || {
        Error::MissingFit(format!(
            "no usable growth fit at {} — run `count` with the same config and mode first",
            path.display()
        ))
    };
    let text = fs::read_to_string(&path).map_err(|_| missing())?;
    let v: serde_json::Value = serde_json::from_str(&text).map_err(|_| missing())?;
    let field = |ptr: &str| v.pointer(ptr).and_then(|x| x.as_f64()).ok_or_else(missing);
    Ok(AsymptoticFit {
        h: field("/h")?,
        m: field("/M")?,
        window: (field("/window/lo")?, field("/window/hi")?),
        residual: field("/residuals/fit_cv")?,
    })
}

fn cmd_distribution(cfg: &ExperimentConfig, exp: &BuiltExperiment, mode: Mode) -> Result<i32> {
    let dir = out_dir(cfg)?;
    let fit = load_fit(&dir, mode)?;
    let grid = cfg.t_grid();
    let d = exp.space.d();
    let p = exp.space.p();

    // Built-in observables: the constant function (its column converges
    // to 1 by construction of the fit) and squared pairings against one
    // positive and one negative coordinate axis.
    let axis = |k: usize| move |v: &nalgebra::DVector<f64>| v[k] * v[k];
    let pos = axis(0);
    let neg = axis(p.min(d - 1));
    let f_const: PairFn = &|_, _| 1.0;
    let f_pos: PairFn = &move |_, v| pos(v);
    let f_neg: PairFn = &move |_, v| neg(v);
    let fns = [f_const, f_pos, f_neg];

    let table = equidistribution_stat(
        &exp.frame,
        &exp.rho,
        &fit,
        &fns,
        mode.series(),
        cfg.lmax,
        &grid,
    )?;

    let mut csv = String::from("t,constant,axis_pos_sq,axis_neg_sq\r\n");
    for (i, t) in table.t_grid.iter().enumerate() {
        csv.push_str(&format!(
            "{},{},{},{}\r\n",
            t, table.columns[0][i], table.columns[1][i], table.columns[2][i]
        ));
    }
    write_file(
        &dir.join(format!("distribution_{}.csv", mode.tag())),
        csv.as_bytes(),
    )?;

    let last = table.t_grid.len() - 1;
    println!(
        "smoothed sums at t = {:.2}: constant {:.4}, axis_pos {:.4}, axis_neg {:.4}",
        table.t_grid[last],
        table.columns[0][last],
        table.columns[1][last],
        table.columns[2][last]
    );
    Ok(0)
}
