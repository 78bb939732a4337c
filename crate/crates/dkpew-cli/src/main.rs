//! `dkpew` — batch driver for the dispersionless-KP / Einstein–Weyl /
//! hyper-Kähler toolkit.
//!
//! Exit codes are the machine contract: `0` all checks passed, `1` a
//! residual exceeded its tolerance, `2` configuration or runtime error.
//! Given identical configuration the JSON summaries are byte-identical;
//! the only randomness is a lattice jitter driven by `--seed` through a
//! fixed 64-bit mixer.

mod suites;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use dkpew::error::{Error, Result};
use dkpew::evolve::{
    breaking_time_estimate, evolve, mms_forcing, mms_solution, EvolveConfig, GridState,
};
use dkpew::minitwistor::{curve_intersection, IncidenceRoots};
use dkpew::poly::Poly1;
use dkpew::report::ResidualReport;
use dkpew::solutions::SolutionSpec;
use dkpew::transforms::{apply_conftrans, apply_coordtrans, heavenly_jet, heavenly_metric_check};
use dkpew::weyl_geometry::{ew_from_dkp, weyl_geodesic};

#[derive(Parser)]
#[command(name = "dkpew", version, about = "Residual verification, evolution, and twistor-line utilities for the dKP correspondence")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run residual suites for a solution family over a sample lattice.
    Verify(VerifyArgs),
    /// March initial data with the pseudo-spectral solver.
    Evolve(EvolveArgs),
    /// Apply shift/rescaling maps to a family and verify the result.
    Transform(TransformArgs),
    /// Classify the incidence of two twistor lines (JSON on stdout).
    Intersect(IntersectArgs),
    /// Series-coordinate consistency orders at one point.
    Darboux(DarbouxArgs),
    /// Scalar-potential Hessian and metric bridge at one 4D point.
    Heavenly(HeavenlyArgs),
    /// Integrate a geodesic of the Weyl connection.
    Geodesic(GeodesicArgs),
    /// Tabulate a family and its derivatives over the lattice.
    Sample(SampleArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct SpecArgs {
    /// Solution family: flat | conformal-einstein | hyper-cr | hodograph | no-killing
    #[arg(long)]
    family: Option<String>,
    /// Full solution description: inline JSON or a path to a JSON file
    #[arg(long)]
    params: Option<String>,
    /// Coefficients of the hyper-cr profile P(t), ascending ("0.3,-0.1")
    #[arg(long)]
    p: Option<String>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Suite name or `all`
    #[arg(long)]
    suite: Option<String>,
    /// Replace every suite tolerance with this value (must be positive)
    #[arg(long)]
    tol: Option<f64>,
    /// Points per axis of the sample lattice (2..=20)
    #[arg(long)]
    grid: Option<usize>,
    /// Seed for the deterministic lattice jitter
    #[arg(long)]
    seed: Option<u64>,
    /// Add an off-shell bump of this amplitude to the field
    #[arg(long)]
    perturb: Option<f64>,
    /// Directory for per-suite CSV tables and summary.json
    #[arg(long)]
    out: Option<PathBuf>,
    /// Stdout format for the summary
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// JSON run configuration; explicit flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
}

/// File form of the verify configuration. Unknown keys are rejected.
#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct RunConfig {
    command: Option<String>,
    family: Option<String>,
    params: Option<serde_json::Value>,
    p: Option<String>,
    suite: Option<String>,
    tol: Option<f64>,
    grid: Option<usize>,
    seed: Option<u64>,
    perturb: Option<f64>,
    out: Option<String>,
    format: Option<String>,
}

#[derive(Args)]
struct EvolveArgs {
    #[arg(long, default_value_t = 64)]
    nx: usize,
    #[arg(long, default_value_t = 16)]
    ny: usize,
    /// Box lengths; default 2π on both axes
    #[arg(long)]
    lx: Option<f64>,
    #[arg(long)]
    ly: Option<f64>,
    #[arg(long, default_value_t = 1e-2)]
    dt: f64,
    #[arg(long, default_value_t = 0.5)]
    t_end: f64,
    /// Initial data: zero | sine | mms
    #[arg(long, default_value = "zero")]
    init: String,
    /// Amplitude of the sine initial data
    #[arg(long, default_value_t = 0.1)]
    amp: f64,
    #[arg(long, default_value_t = 1.0)]
    kx: f64,
    #[arg(long, default_value_t = 1.0)]
    ky: f64,
    #[arg(long, default_value_t = 0.9)]
    omega: f64,
    /// Snapshot cadence in steps (0 = final state only)
    #[arg(long, default_value_t = 0)]
    output_every: usize,
    /// Directory for snapshots and diagnostics
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Run dt, dt/2, dt/4 against the manufactured solution and emit the
    /// convergence table; fails unless the observed order stays >= 3.7
    #[arg(long, default_value_t = false)]
    mms_table: bool,
}

#[derive(Args)]
struct TransformArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Shift profile f(t) coefficients, ascending
    #[arg(long)]
    f: Option<String>,
    /// Shift profile g(t) coefficients, ascending
    #[arg(long)]
    g: Option<String>,
    /// Reparametrization c(t) coefficients, ascending (c' > 0 on the lattice)
    #[arg(long)]
    c: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct IntersectArgs {
    /// First point as "t,y,x"
    #[arg(long)]
    p1: String,
    /// Second point as "t,y,x"
    #[arg(long)]
    p2: String,
}

#[derive(Args)]
struct DarbouxArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Evaluation point as "x,y,t"
    #[arg(long, default_value = "0.4,0.9,1.1")]
    point: String,
    /// Series truncation depth (keeps powers down to the -depth order)
    #[arg(long, default_value_t = 6)]
    depth: usize,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct HeavenlyArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Evaluation point as "x,y,t,z"
    #[arg(long, default_value = "0.4,0.9,1.1,0.3")]
    point: String,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct GeodesicArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Start point as "t,y,x"
    #[arg(long, default_value = "0.8,0.7,0.4")]
    x0: String,
    /// Start velocity as "t,y,x"
    #[arg(long, default_value = "0.3,0.4,0.1")]
    v0: String,
    #[arg(long, default_value_t = 1.0)]
    s_end: f64,
    #[arg(long, default_value_t = 50)]
    steps: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

enum Outcome {
    Pass,
    ToleranceFail,
}

fn main() {
    // Die quietly when the reader closes the pipe, like other Unix filters.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let code = match run(cli.command) {
        Ok(Outcome::Pass) => 0,
        Ok(Outcome::ToleranceFail) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    };
    std::process::exit(code);
}

fn run(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Verify(args) => cmd_verify(args),
        Command::Evolve(args) => cmd_evolve(args),
        Command::Transform(args) => cmd_transform(args),
        Command::Intersect(args) => cmd_intersect(args),
        Command::Darboux(args) => cmd_darboux(args),
        Command::Heavenly(args) => cmd_heavenly(args),
        Command::Geodesic(args) => cmd_geodesic(args),
        Command::Sample(args) => cmd_sample(args),
    }
}

// ---------------------------------------------------------------------------
// shared plumbing

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn parse_f64_list(text: &str, what: &str) -> Result<Vec<f64>> {
    let vals: std::result::Result<Vec<f64>, _> = text
        .split([',', ' '])
        .filter(|s| !s.is_empty())
        .map(str::parse::<f64>)
        .collect();
    vals.map_err(|e| config_err(format!("cannot parse {what} `{text}`: {e}")))
}

fn parse_fixed<const N: usize>(text: &str, what: &str) -> Result<[f64; N]> {
    let v = parse_f64_list(text, what)?;
    v.try_into()
        .map_err(|v: Vec<f64>| config_err(format!("{what} needs {N} numbers, got {}", v.len())))
}

/// Deterministic 64-bit mixer (splitmix64) behind the lattice jitter.
fn mix(state: &mut u64) -> f64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 53) as f64
}

/// `grid`³ jittered points `(x, y, t, z)` in a unit box kept away from the
/// coordinate singularities (t = 0 and y = 0) of the closed-form families.
/// Profiles decaying in powers of `y` get a larger y-offset so the
/// finite-difference curvature suites stay well conditioned.
fn lattice(grid: usize, seed: u64, spec: &SolutionSpec) -> Result<Vec<[f64; 4]>> {
    if !(2..=20).contains(&grid) {
        return Err(config_err(format!("grid must lie in 2..=20, got {grid}")));
    }
    let y0 = if spec.family.name().contains("hyper-cr") { 1.5 } else { 1.0 };
    let mut state = seed ^ 0xD1CE_BA5E_0000_0000;
    let frac = |i: usize| i as f64 / (grid - 1) as f64;
    let mut pts = Vec::with_capacity(grid * grid * grid);
    for i in 0..grid {
        for j in 0..grid {
            for k in 0..grid {
                let jx = 0.02 * (mix(&mut state) - 0.5);
                let jy = 0.02 * (mix(&mut state) - 0.5);
                let jt = 0.02 * (mix(&mut state) - 0.5);
                let jz = 0.02 * (mix(&mut state) - 0.5);
                pts.push([
                    0.1 + frac(i) + jx,
                    y0 + frac(j) + jy,
                    1.0 + frac(k) + jt,
                    0.25 + jz,
                ]);
            }
        }
    }
    Ok(pts)
}

fn default_family_spec(name: &str, p_flag: Option<&str>) -> Result<SolutionSpec> {
    let p_poly = match p_flag {
        Some(text) => Some(Poly1::new(parse_f64_list(text, "--p coefficients")?)),
        None => None,
    };
    if p_poly.is_some() && name != "hyper-cr" {
        return Err(config_err("--p only applies to the hyper-cr family"));
    }
    let spec = match name {
        "flat" => SolutionSpec::flat(),
        "conformal-einstein" => SolutionSpec::conformal_einstein(
            Poly1::new(vec![0.3, 0.2]),
            Poly1::new(vec![-0.4, 0.1]),
            Poly1::new(vec![0.25]),
        ),
        "hyper-cr" => {
            SolutionSpec::hyper_cr(p_poly.unwrap_or_else(|| Poly1::new(vec![0.4, -0.3])))
        }
        "hodograph" => SolutionSpec::hodograph(Poly1::new(vec![0.0, 0.25])),
        "no-killing" => SolutionSpec::no_killing(Poly1::new(vec![2.0, 0.1])),
        other => return Err(Error::UnknownFamily(other.to_string())),
    };
    Ok(spec)
}

fn resolve_spec(args: &SpecArgs) -> Result<SolutionSpec> {
    if let Some(params) = &args.params {
        let text = if params.trim_start().starts_with('{') {
            params.clone()
        } else {
            std::fs::read_to_string(params)?
        };
        let spec = SolutionSpec::from_json(&text)?;
        if let Some(name) = &args.family {
            if name != spec.family.name() {
                return Err(config_err(format!(
                    "--family {} contradicts --params family {}",
                    name,
                    spec.family.name()
                )));
            }
        }
        return Ok(spec);
    }
    let name = args.family.as_deref().unwrap_or("flat");
    default_family_spec(name, args.p.as_deref())
}

/// Wrap the field with an additive off-shell bump `amp · y²`.
fn perturb_spec(spec: &SolutionSpec, amp: f64) -> SolutionSpec {
    let base = spec.clone();
    let label = format!("perturbed[{}]", spec.family.name());
    SolutionSpec::custom(label, move |x, y, t| {
        let jet = base.eval_jet(x, y, t, 4)?.jet;
        let yj = dkpew::jet::Jet3::var(1, y);
        Ok(jet + yj * yj * amp)
    })
}

fn print_or_write(out: Option<&Path>, name: &str, text: &str) -> Result<()> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join(name), text)?;
        }
        None => println!("{text}"),
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// verify

#[derive(Serialize)]
struct CheckSummary {
    name: String,
    label: String,
    tolerance: f64,
    points: usize,
    max: f64,
    mean: f64,
    pass: bool,
}

#[derive(Serialize)]
struct VerifySummary {
    family: String,
    suite: String,
    grid: usize,
    seed: u64,
    perturb: Option<f64>,
    checks: Vec<CheckSummary>,
    pass: bool,
}

fn cmd_verify(mut args: VerifyArgs) -> Result<Outcome> {
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)?;
        let cfg: RunConfig = serde_json::from_str(&text)?;
        if let Some(cmd) = &cfg.command {
            if cmd != "verify" {
                return Err(config_err(format!(
                    "config file names command `{cmd}`, expected `verify`"
                )));
            }
        }
        args.spec.family = args.spec.family.or(cfg.family);
        args.spec.p = args.spec.p.or(cfg.p);
        if args.spec.params.is_none() {
            args.spec.params = match cfg.params {
                Some(serde_json::Value::String(s)) => Some(s),
                Some(v) => Some(v.to_string()),
                None => None,
            };
        }
        args.suite = args.suite.or(cfg.suite);
        args.tol = args.tol.or(cfg.tol);
        args.grid = args.grid.or(cfg.grid);
        args.seed = args.seed.or(cfg.seed);
        args.perturb = args.perturb.or(cfg.perturb);
        if args.out.is_none() {
            args.out = cfg.out.map(PathBuf::from);
        }
        if args.format.is_none() {
            args.format = match cfg.format.as_deref() {
                Some("csv") => Some(Format::Csv),
                Some("json") => Some(Format::Json),
                Some(other) => {
                    return Err(config_err(format!("unknown format `{other}`")))
                }
                None => None,
            };
        }
    }
    if let Some(t) = args.tol {
        if t <= 0.0 {
            return Err(config_err(format!("tolerance must be positive, got {t}")));
        }
    }
    let grid = args.grid.unwrap_or(5);
    let seed = args.seed.unwrap_or(7);
    let suite = args.suite.unwrap_or_else(|| "all".to_string());
    let format = args.format.unwrap_or(Format::Json);
    let base_spec = resolve_spec(&args.spec)?;
    let spec = match args.perturb {
        Some(amp) => perturb_spec(&base_spec, amp),
        None => base_spec.clone(),
    };
    let points = lattice(grid, seed, &spec)?;

    let names: Vec<&'static str> = if suite == "all" {
        suites::SUITE_NAMES
            .iter()
            .copied()
            .filter(|n| suites::applicable(n, &spec))
            .collect()
    } else {
        let name = suites::SUITE_NAMES
            .iter()
            .copied()
            .find(|n| *n == suite)
            .ok_or_else(|| {
                config_err(format!(
                    "unknown suite `{suite}`; choose all or one of {}",
                    suites::SUITE_NAMES.join(", ")
                ))
            })?;
        vec![name]
    };

    let mut checks = Vec::new();
    let mut all_pass = true;
    for name in names {
        let mut run = suites::run_suite(name, &spec, &points)?;
        if let Some(t) = args.tol {
            run.tolerance = t;
        }
        let summary = run.report.summary();
        let pass = run.pass();
        all_pass &= pass;
        println!(
            "{} {:<13} max {:.3e}  tol {:.1e}",
            if pass { "PASS" } else { "FAIL" },
            run.name,
            summary.max,
            run.tolerance
        );
        if let Some(dir) = &args.out {
            std::fs::create_dir_all(dir)?;
            let mut csv = Vec::new();
            run.report.write_csv(&mut csv)?;
            std::fs::write(dir.join(format!("{}.csv", run.name)), csv)?;
        }
        checks.push(CheckSummary {
            name: run.name.to_string(),
            label: run.report.label.clone(),
            tolerance: run.tolerance,
            points: summary.points,
            max: summary.max,
            mean: summary.mean,
            pass,
        });
    }
    let summary = VerifySummary {
        family: spec.family.name().to_string(),
        suite,
        grid,
        seed,
        perturb: args.perturb,
        checks,
        pass: all_pass,
    };
    let rendered = match format {
        Format::Json => serde_json::to_string_pretty(&summary)?,
        Format::Csv => {
            let mut lines = vec!["name,tolerance,points,max,mean,pass".to_string()];
            for c in &summary.checks {
                lines.push(format!(
                    "{},{:?},{},{:?},{:?},{}",
                    c.name, c.tolerance, c.points, c.max, c.mean, c.pass
                ));
            }
            lines.join("\n")
        }
    };
    match &args.out {
        Some(dir) => {
            let name = if format == Format::Json { "summary.json" } else { "summary.csv" };
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join(name), &rendered)?;
        }
        None => println!("{rendered}"),
    }
    Ok(if all_pass { Outcome::Pass } else { Outcome::ToleranceFail })
}

// ---------------------------------------------------------------------------
// evolve

#[derive(Serialize)]
struct EvolveSummary {
    nx: usize,
    ny: usize,
    steps: usize,
    final_time: f64,
    max_abs_u: f64,
    max_mean_drift: f64,
    breaking_time: Option<f64>,
}

#[derive(Serialize)]
struct MmsRow {
    dt: f64,
    error: f64,
    order: Option<f64>,
}

fn cmd_evolve(args: EvolveArgs) -> Result<Outcome> {
    let lx = args.lx.unwrap_or(std::f64::consts::TAU);
    let ly = args.ly.unwrap_or(std::f64::consts::TAU);
    if args.mms_table {
        return mms_table(&args, lx, ly);
    }
    let (state0, forcing): (GridState, Option<Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>>) =
        match args.init.as_str() {
            "zero" => (GridState::zeros(args.nx, args.ny, lx, ly)?, None),
            "sine" => (
                GridState::from_fn(args.nx, args.ny, lx, ly, |x, _| {
                    args.amp * (std::f64::consts::TAU * x / lx).sin()
                })?,
                None,
            ),
            "mms" => {
                let exact = mms_solution(args.kx, args.ky, args.omega);
                (
                    GridState::from_fn(args.nx, args.ny, lx, ly, |x, y| exact(x, y, 0.0))?,
                    Some(Arc::new(mms_forcing(args.kx, args.ky, args.omega)) as Arc<_>),
                )
            }
            other => return Err(config_err(format!("unknown initial data `{other}`"))),
        };
    let cfg = EvolveConfig {
        dt: args.dt,
        t_end: args.t_end,
        output_every: args.output_every,
        forcing,
        ..Default::default()
    };
    let (snaps, diag) = evolve(&state0, &cfg)?;
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir)?;
        for (k, s) in snaps.iter().enumerate() {
            s.save(dir.join(format!("state_{k:04}.bin")))?;
        }
        match args.format.unwrap_or(Format::Json) {
            Format::Json => std::fs::write(
                dir.join("diagnostics.json"),
                serde_json::to_string_pretty(&diag)?,
            )?,
            Format::Csv => {
                let mut lines = vec!["time,max_abs_u,max_ux,mean_drift".to_string()];
                for i in 0..diag.times.len() {
                    lines.push(format!(
                        "{:?},{:?},{:?},{:?}",
                        diag.times[i], diag.max_abs_u[i], diag.max_ux[i], diag.mean_drift[i]
                    ));
                }
                std::fs::write(dir.join("diagnostics.csv"), lines.join("\n"))?;
            }
        }
    }
    let fin = snaps.last().expect("final snapshot");
    let summary = EvolveSummary {
        nx: fin.nx,
        ny: fin.ny,
        steps: diag.times.len(),
        final_time: fin.time,
        max_abs_u: fin.max_abs_u(),
        max_mean_drift: diag.mean_drift.iter().fold(0.0_f64, |m, &d| m.max(d)),
        breaking_time: breaking_time_estimate(&diag.times, &diag.max_ux),
    };
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(Outcome::Pass)
}

fn mms_table(args: &EvolveArgs, lx: f64, ly: f64) -> Result<Outcome> {
    let exact = mms_solution(args.kx, args.ky, args.omega);
    let state0 = GridState::from_fn(args.nx, args.ny, lx, ly, |x, y| exact(x, y, 0.0))?;
    let mut rows: Vec<MmsRow> = Vec::new();
    for level in 0..3 {
        let dt = args.dt / f64::powi(2.0, level);
        let cfg = EvolveConfig {
            dt,
            t_end: args.t_end,
            forcing: Some(Arc::new(mms_forcing(args.kx, args.ky, args.omega))),
            ..Default::default()
        };
        let (snaps, _) = evolve(&state0, &cfg)?;
        let fin = snaps.last().expect("final snapshot");
        let mut err = 0.0_f64;
        for (i, x) in fin.xs().iter().enumerate() {
            for (j, y) in fin.ys().iter().enumerate() {
                err = err.max((fin.u[[i, j]] - exact(*x, *y, fin.time)).abs());
            }
        }
        let order = rows.last().map(|prev: &MmsRow| (prev.error / err).log2());
        rows.push(MmsRow { dt, error: err, order });
    }
    let pass = rows.iter().filter_map(|r| r.order).all(|o| o >= 3.7);
    let text = serde_json::to_string_pretty(&rows)?;
    match args.format.unwrap_or(Format::Json) {
        Format::Json => print_or_write(args.out.as_deref(), "mms_table.json", &text)?,
        Format::Csv => {
            let mut lines = vec!["dt,error,order".to_string()];
            for r in &rows {
                lines.push(format!(
                    "{:?},{:?},{}",
                    r.dt,
                    r.error,
                    r.order.map_or(String::new(), |o| format!("{o:?}"))
                ));
            }
            print_or_write(args.out.as_deref(), "mms_table.csv", &lines.join("\n"))?;
        }
    }
    for r in &rows {
        match r.order {
            Some(o) => println!("dt {:10.3e}  error {:10.3e}  order {o:.2}", r.dt, r.error),
            None => println!("dt {:10.3e}  error {:10.3e}", r.dt, r.error),
        }
    }
    Ok(if pass { Outcome::Pass } else { Outcome::ToleranceFail })
}

// ---------------------------------------------------------------------------
// transform

fn cmd_transform(args: TransformArgs) -> Result<Outcome> {
    if let Some(t) = args.tol {
        if t <= 0.0 {
            return Err(config_err(format!("tolerance must be positive, got {t}")));
        }
    }
    let tol = args.tol.unwrap_or(1e-9);
    let spec = resolve_spec(&args.spec)?;
    let mut transformed = spec;
    let mut applied = Vec::new();
    if args.f.is_some() || args.g.is_some() {
        let f = Poly1::new(match &args.f {
            Some(s) => parse_f64_list(s, "--f coefficients")?,
            None => vec![],
        });
        let g = Poly1::new(match &args.g {
            Some(s) => parse_f64_list(s, "--g coefficients")?,
            None => vec![],
        });
        transformed = apply_coordtrans(&transformed, &f, &g);
        applied.push("shift");
    }
    if let Some(s) = &args.c {
        let c = Poly1::new(parse_f64_list(s, "--c coefficients")?);
        transformed = apply_conftrans(&transformed, &c);
        applied.push("rescale");
    }
    if applied.is_empty() {
        return Err(config_err("nothing to apply: pass --f/--g and/or --c"));
    }
    let mut report = ResidualReport::new(format!(
        "transform[{}]/{}",
        applied.join("+"),
        transformed.family.name()
    ));
    for p in lattice(args.grid.unwrap_or(5), args.seed.unwrap_or(7), &transformed)? {
        let r = transformed.dkp_residual(p[0], p[1], p[2])?;
        report.push(&p[..3], vec![r]);
    }
    let summary = report.summary();
    let pass = summary.max < tol;
    let rendered = match args.format.unwrap_or(Format::Json) {
        Format::Json => report.to_json()?,
        Format::Csv => {
            let mut csv = Vec::new();
            report.write_csv(&mut csv)?;
            String::from_utf8(csv).expect("csv is utf-8")
        }
    };
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir)?;
        let name = if args.format.unwrap_or(Format::Json) == Format::Json {
            "transform.json"
        } else {
            "transform.csv"
        };
        std::fs::write(dir.join(name), &rendered)?;
    } else {
        println!("{rendered}");
    }
    println!(
        "{} transform residual max {:.3e}  tol {:.1e}",
        if pass { "PASS" } else { "FAIL" },
        summary.max,
        tol
    );
    Ok(if pass { Outcome::Pass } else { Outcome::ToleranceFail })
}

// ---------------------------------------------------------------------------
// intersect

#[derive(Serialize)]
struct IntersectOut {
    lambda: Vec<[f64; 2]>,
    class: dkpew::minitwistor::CausalClass,
}

fn cmd_intersect(args: IntersectArgs) -> Result<Outcome> {
    let p1: [f64; 3] = parse_fixed(&args.p1, "--p1")?;
    let p2: [f64; 3] = parse_fixed(&args.p2, "--p2")?;
    let hit = curve_intersection(p1, p2)?;
    let lambda: Vec<[f64; 2]> = match hit.roots {
        IncidenceRoots::Real { first, second } => vec![[first, 0.0], [second, 0.0]],
        IncidenceRoots::Double { value } => vec![[value, 0.0], [value, 0.0]],
        IncidenceRoots::ComplexPair { re, im } => vec![[re, -im], [re, im]],
        IncidenceRoots::Linear { value } => vec![[value, 0.0]],
        IncidenceRoots::NoFinite => vec![],
    };
    let out = IntersectOut { lambda, class: hit.class };
    println!("{}", serde_json::to_string(&out)?);
    Ok(Outcome::Pass)
}

// ---------------------------------------------------------------------------
// darboux

#[derive(Serialize)]
struct DarbouxRow {
    order: i32,
    residual: f64,
}

fn cmd_darboux(args: DarbouxArgs) -> Result<Outcome> {
    if let Some(t) = args.tol {
        if t <= 0.0 {
            return Err(config_err(format!("tolerance must be positive, got {t}")));
        }
    }
    let tol = args.tol.unwrap_or(1e-9);
    let spec = resolve_spec(&args.spec)?;
    let p: [f64; 3] = parse_fixed(&args.point, "--point")?;
    let (uc, wc) = dkpew::minitwistor::canonical_chain(&spec, p[0], p[1], p[2])?;
    let rows: Vec<DarbouxRow> = dkpew::minitwistor::darboux_check(p, &uc, &wc, args.depth)?
        .into_iter()
        .map(|(order, residual)| DarbouxRow { order, residual })
        .collect();
    let pass = rows
        .iter()
        .filter(|r| r.order >= -1)
        .all(|r| r.residual < tol);
    match args.format.unwrap_or(Format::Json) {
        Format::Json => println!("{}", serde_json::to_string_pretty(&rows)?),
        Format::Csv => {
            println!("order,residual");
            for r in &rows {
                println!("{},{:?}", r.order, r.residual);
            }
        }
    }
    Ok(if pass { Outcome::Pass } else { Outcome::ToleranceFail })
}

// ---------------------------------------------------------------------------
// heavenly

#[derive(Serialize)]
struct HeavenlyOut {
    theta_qq: f64,
    theta_yq: f64,
    theta_yy: f64,
    metric_gap: f64,
    pass: bool,
}

fn cmd_heavenly(args: HeavenlyArgs) -> Result<Outcome> {
    if let Some(t) = args.tol {
        if t <= 0.0 {
            return Err(config_err(format!("tolerance must be positive, got {t}")));
        }
    }
    let tol = args.tol.unwrap_or(1e-10);
    let spec = resolve_spec(&args.spec)?;
    let p: [f64; 4] = parse_fixed(&args.point, "--point")?;
    let hj = heavenly_jet(&spec, p)?;
    let gap = heavenly_metric_check(&spec, p)?;
    let out = HeavenlyOut {
        theta_qq: hj.theta_qq,
        theta_yq: hj.theta_yq,
        theta_yy: hj.theta_yy,
        metric_gap: gap,
        pass: gap < tol,
    };
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(if out.pass { Outcome::Pass } else { Outcome::ToleranceFail })
}

// ---------------------------------------------------------------------------
// geodesic

#[derive(Serialize)]
struct GeodesicRow {
    s: f64,
    t: f64,
    y: f64,
    x: f64,
    vt: f64,
    vy: f64,
    vx: f64,
    null_defect: f64,
}

fn cmd_geodesic(args: GeodesicArgs) -> Result<Outcome> {
    let spec = resolve_spec(&args.spec)?;
    let x0: [f64; 3] = parse_fixed(&args.x0, "--x0")?;
    let v0: [f64; 3] = parse_fixed(&args.v0, "--v0")?;
    let ws = ew_from_dkp(&spec);
    let path = weyl_geodesic(&ws, x0, v0, args.s_end, args.steps, suites::FD_STEP)?;
    let rows: Vec<GeodesicRow> = path
        .iter()
        .map(|s| GeodesicRow {
            s: s.s,
            t: s.x[0],
            y: s.x[1],
            x: s.x[2],
            vt: s.v[0],
            vy: s.v[1],
            vx: s.v[2],
            null_defect: s.null_defect,
        })
        .collect();
    let format = args.format.unwrap_or(Format::Csv);
    let rendered = match format {
        Format::Json => serde_json::to_string_pretty(&rows)?,
        Format::Csv => {
            let mut lines = vec!["s,t,y,x,vt,vy,vx,null_defect".to_string()];
            for r in &rows {
                lines.push(format!(
                    "{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?}",
                    r.s, r.t, r.y, r.x, r.vt, r.vy, r.vx, r.null_defect
                ));
            }
            lines.join("\n")
        }
    };
    let name = if format == Format::Json { "geodesic.json" } else { "geodesic.csv" };
    print_or_write(args.out.as_deref(), name, &rendered)?;
    Ok(Outcome::Pass)
}

// ---------------------------------------------------------------------------
// sample

#[derive(Serialize)]
struct SampleRow {
    x: f64,
    y: f64,
    t: f64,
    u: f64,
    ux: f64,
    uy: f64,
    ut: f64,
    residual: f64,
}

fn cmd_sample(args: SampleArgs) -> Result<Outcome> {
    let spec = resolve_spec(&args.spec)?;
    let mut rows = Vec::new();
    for p in lattice(args.grid.unwrap_or(5), args.seed.unwrap_or(7), &spec)? {
        let j = spec.eval_jet(p[0], p[1], p[2], 4)?;
        rows.push(SampleRow {
            x: p[0],
            y: p[1],
            t: p[2],
            u: j.u(),
            ux: j.ux(),
            uy: j.uy(),
            ut: j.ut(),
            residual: dkpew::solutions::dkp_residual_of_jet(&j.jet),
        });
    }
    let format = args.format.unwrap_or(Format::Csv);
    let rendered = match format {
        Format::Json => serde_json::to_string_pretty(&rows)?,
        Format::Csv => {
            let mut lines = vec!["x,y,t,u,ux,uy,ut,residual".to_string()];
            for r in &rows {
                lines.push(format!(
                    "{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?}",
                    r.x, r.y, r.t, r.u, r.ux, r.uy, r.ut, r.residual
                ));
            }
            lines.join("\n")
        }
    };
    let name = if format == Format::Json { "samples.json" } else { "samples.csv" };
    print_or_write(args.out.as_deref(), name, &rendered)?;
    Ok(Outcome::Pass)
}
