//! `circlepack` command-line tool.
//!
//! Exit codes: 0 success, 1 verification failure, 2 no feasible layout
//! within the budget, 64 usage error, 65 unreadable or malformed input.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use circlepack::bench::{self, BenchConfig};
use circlepack::bfgs::{BfgsSettings, Mode};
use circlepack::io::{verify_layout, write_layout, BestKnownTable, LayoutDocument};
use circlepack::search::{qpqh_solve, QpqhBudget, SearchSettings};
use circlepack::svg::{render_svg, SvgOptions};
use circlepack::{global_search, IoError, Layout, SearchBudget, SolveReport, SolverRng};
use clap::{Args, Parser, Subcommand, ValueEnum};

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_NOT_FOUND: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;

const DEFAULT_T0: f64 = 600.0;
const DEFAULT_T1: f64 = 3600.0;

#[derive(Parser, Debug)]
#[command(name = "circlepack", version, about = "Pack equal unit circles into the smallest circle")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Search for a feasible layout at a fixed container radius.
    Solve(SolveArgs),
    /// Search, then keep shrinking the container while layouts stay feasible.
    Improve(ImproveArgs),
    /// Check a layout file for overlaps.
    Verify(VerifyArgs),
    /// Draw a layout file as SVG.
    Render(RenderArgs),
    /// Hit counts per instance, or optimizer timing experiments.
    Bench(BenchArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ModeArg {
    Full,
    Local,
}

#[derive(Args, Debug, Clone)]
struct OptimizerArgs {
    /// Gradient evaluation mode.
    #[arg(long, value_enum, default_value_t = ModeArg::Local)]
    mode: ModeArg,
    /// Neighbor-list refresh period in iterations.
    #[arg(long = "l", default_value_t = 10)]
    l: usize,
    /// Container adjacency threshold.
    #[arg(long, default_value_t = 1.0)]
    d1: f64,
    /// Circle adjacency threshold.
    #[arg(long, default_value_t = 1.0)]
    d2: f64,
}

#[derive(Args, Debug)]
struct InstanceArgs {
    /// Number of circles.
    #[arg(long)]
    n: usize,
    /// Container radius.
    #[arg(long)]
    radius: Option<f64>,
    /// CSV table (`n,radius`) to look the radius up in.
    #[arg(long, value_name = "CSV")]
    best_known: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Time limit in seconds (default 600 unless --max-restarts is given).
    #[arg(long)]
    t0: Option<f64>,
    /// Random restarts before giving up.
    #[arg(long)]
    max_restarts: Option<usize>,
    #[command(flatten)]
    optimizer: OptimizerArgs,
    /// Layout output file.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ImproveArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Time limit of each search in seconds.
    #[arg(long)]
    t0: Option<f64>,
    /// Overall time limit in seconds.
    #[arg(long)]
    t1: Option<f64>,
    #[arg(long)]
    max_restarts: Option<usize>,
    #[command(flatten)]
    optimizer: OptimizerArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    path: PathBuf,
    /// Largest overlap depth accepted.
    #[arg(long, default_value_t = circlepack::io::DEFAULT_VERIFY_TOLERANCE)]
    tolerance: f64,
}

#[derive(Args, Debug)]
struct RenderArgs {
    path: PathBuf,
    #[arg(long)]
    svg: PathBuf,
    /// Label circles with their indices.
    #[arg(long)]
    indices: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum Experiment {
    /// Hit counts of repeated searches at the best-known radius.
    Hits,
    /// Full vs Local time to a local minimum from random starts.
    Speedup,
    /// Local-mode descent time for several refresh periods.
    Refresh,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Circle counts: `7`, `2-20` or `10,20,50`.
    #[arg(long)]
    n: String,
    #[arg(long, value_enum, default_value_t = Experiment::Hits)]
    experiment: Experiment,
    /// Container radius; defaults to the best-known radius of each n.
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long, value_name = "CSV")]
    best_known: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Repetitions per instance.
    #[arg(long, default_value_t = 10)]
    reps: usize,
    #[arg(long)]
    t0: Option<f64>,
    #[arg(long)]
    max_restarts: Option<usize>,
    /// Refresh periods for the refresh experiment, e.g. `1,5,10,20`.
    #[arg(long = "periods", default_value = "1,5,10,20,50")]
    periods: String,
    #[command(flatten)]
    optimizer: OptimizerArgs,
    /// CSV output file.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Data(String),
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::Data(e.to_string())
    }
}

type CmdResult = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Improve(a) => cmd_improve(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Render(a) => cmd_render(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_DATA)
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn seconds(value: Option<f64>, flag: &str) -> Result<Option<Duration>, Failure> {
    match value {
        None => Ok(None),
        Some(s) if s > 0.0 && s.is_finite() => Ok(Some(Duration::from_secs_f64(s))),
        Some(s) => Err(usage(format!("--{flag} must be a positive number of seconds, got {s}"))),
    }
}

fn search_settings(o: &OptimizerArgs) -> Result<SearchSettings, Failure> {
    if o.l == 0 {
        return Err(usage("--l must be at least 1"));
    }
    if o.d1.is_nan() || o.d2.is_nan() || o.d1 < 0.0 || o.d2 < 0.0 {
        return Err(usage("--d1 and --d2 must be non-negative"));
    }
    Ok(SearchSettings {
        bfgs: BfgsSettings {
            mode: match o.mode {
                ModeArg::Full => Mode::Full,
                ModeArg::Local => Mode::Local,
            },
            refresh_period: o.l,
            d1: o.d1,
            d2: o.d2,
            ..BfgsSettings::default()
        },
        ..SearchSettings::default()
    })
}

fn search_budget(t0: Option<f64>, max_restarts: Option<usize>) -> Result<SearchBudget, Failure> {
    let time_limit = match (seconds(t0, "t0")?, max_restarts) {
        (Some(t), _) => Some(t),
        (None, Some(_)) => None,
        (None, None) => Some(Duration::from_secs_f64(DEFAULT_T0)),
    };
    if max_restarts == Some(0) {
        return Err(usage("--max-restarts must be at least 1"));
    }
    Ok(SearchBudget {
        time_limit,
        max_restarts,
    })
}

fn load_table(path: &Path) -> Result<BestKnownTable, Failure> {
    Ok(BestKnownTable::read_from(path)?)
}

/// Radius given explicitly or looked up in the best-known table.
fn instance_radius(i: &InstanceArgs) -> Result<f64, Failure> {
    if i.n == 0 {
        return Err(usage("--n must be at least 1"));
    }
    let radius = match (i.radius, &i.best_known) {
        (Some(r), _) => r,
        (None, Some(path)) => load_table(path)?
            .get(i.n)
            .ok_or_else(|| usage(format!("no radius for n={} in {}", i.n, path.display())))?,
        (None, None) => return Err(usage("give --radius or --best-known")),
    };
    if radius < 1.0 || !radius.is_finite() {
        return Err(usage(format!("radius must be at least 1, got {radius}")));
    }
    Ok(radius)
}

fn print_report(report: &SolveReport) {
    println!("status:    {:?}", report.status);
    println!("n:         {}", report.layout.n());
    println!("radius:    {}", circlepack::io::format_decimal(report.radius()));
    println!("energy:    {:e}", report.energy.total);
    println!("max depth: {:e}", report.energy.max_depth());
    println!("elapsed:   {:.3} s", report.elapsed.as_secs_f64());
    println!("restarts:  {}", report.restarts);
    println!("hops:      {}", report.hops);
    println!("seed:      {}", report.seed);
}

fn write_outputs(layout: &Layout, seed: u64, producer: &str, out: &Option<PathBuf>, svg: &Option<PathBuf>) -> Result<(), Failure> {
    if let Some(path) = out {
        write_layout(layout, Some(seed), producer, path)?;
        println!("layout:    {}", path.display());
    }
    if let Some(path) = svg {
        std::fs::write(path, render_svg(layout, &SvgOptions::default()))
            .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
        println!("svg:       {}", path.display());
    }
    Ok(())
}

fn cmd_solve(a: SolveArgs) -> CmdResult {
    let radius = instance_radius(&a.instance)?;
    let settings = search_settings(&a.optimizer)?;
    let budget = search_budget(a.t0, a.max_restarts)?;
    let mut rng = SolverRng::new(a.instance.seed);
    let report = global_search(a.instance.n, radius, budget, &settings, &mut rng);
    print_report(&report);
    write_outputs(&report.layout, a.instance.seed, "circlepack solve", &a.out, &a.svg)?;
    Ok(if report.is_feasible() { 0 } else { EXIT_NOT_FOUND })
}

fn cmd_improve(a: ImproveArgs) -> CmdResult {
    let radius = instance_radius(&a.instance)?;
    let settings = search_settings(&a.optimizer)?;
    let mut search = search_budget(a.t0, a.max_restarts)?;
    let total = match (seconds(a.t1, "t1")?, a.max_restarts) {
        (Some(t), _) => Some(t),
        (None, Some(_)) if a.t0.is_none() => None,
        (None, _) => Some(Duration::from_secs_f64(DEFAULT_T1)),
    };
    if total.is_none() {
        // A restart-only budget stops after one search that finds nothing.
        search.time_limit = None;
    }
    let budget = QpqhBudget {
        search,
        total,
        max_rounds: None,
    };
    let mut rng = SolverRng::new(a.instance.seed);
    let report = qpqh_solve(a.instance.n, radius, budget, &settings, &mut rng);
    print_report(&report);
    println!("start:     {}", circlepack::io::format_decimal(radius));
    if report.is_feasible() {
        if let Some(path) = &a.instance.best_known {
            if let Some(r0) = load_table(path)?.get(a.instance.n) {
                println!("R0 - R*:   {:e}", r0 - report.radius());
            }
        }
    }
    write_outputs(&report.layout, a.instance.seed, "circlepack improve", &a.out, &a.svg)?;
    Ok(if report.is_feasible() { 0 } else { EXIT_NOT_FOUND })
}

fn cmd_verify(a: VerifyArgs) -> CmdResult {
    if a.tolerance.is_nan() || a.tolerance < 0.0 {
        return Err(usage("--tolerance must be non-negative"));
    }
    let doc = LayoutDocument::read_from(&a.path)?;
    let verdict = verify_layout(&doc, a.tolerance)?;
    if verdict.pass() {
        println!("PASS n={} radius={} max depth {:e}", doc.n, doc.radius, verdict.max_depth);
        Ok(0)
    } else {
        println!("FAIL n={} radius={} max depth {:e}", doc.n, doc.radius, verdict.max_depth);
        for v in verdict.failing() {
            println!("  {v}");
        }
        Ok(EXIT_VERIFY_FAILED)
    }
}

fn cmd_render(a: RenderArgs) -> CmdResult {
    let layout = LayoutDocument::read_from(&a.path)?.to_layout()?;
    let opts = SvgOptions {
        show_indices: a.indices,
        ..SvgOptions::default()
    };
    std::fs::write(&a.svg, render_svg(&layout, &opts))
        .map_err(|e| Failure::Data(format!("{}: {e}", a.svg.display())))?;
    Ok(0)
}

fn parse_list(spec: &str, flag: &str) -> Result<Vec<usize>, Failure> {
    let bad = || usage(format!("--{flag}: cannot parse `{spec}`"));
    let mut out = Vec::new();
    for part in spec.split(',').map(str::trim) {
        if let Some((lo, hi)) = part.split_once('-') {
            let lo: usize = lo.trim().parse().map_err(|_| bad())?;
            let hi: usize = hi.trim().parse().map_err(|_| bad())?;
            if lo > hi {
                return Err(bad());
            }
            out.extend(lo..=hi);
        } else {
            out.push(part.parse().map_err(|_| bad())?);
        }
    }
    if out.contains(&0) {
        return Err(usage(format!("--{flag} values must be at least 1")));
    }
    Ok(out)
}

fn cmd_bench(a: BenchArgs) -> CmdResult {
    let ns = parse_list(&a.n, "n")?;
    if a.reps == 0 {
        return Err(usage("--reps must be at least 1"));
    }
    let settings = search_settings(&a.optimizer)?;
    let table = match &a.best_known {
        Some(path) => load_table(path)?,
        None => BestKnownTable::vendored(),
    };
    let radius_of = |n: usize| -> Result<f64, Failure> {
        let r = match a.radius {
            Some(r) => r,
            None => table
                .get(n)
                .ok_or_else(|| usage(format!("no best-known radius for n={n}; pass --radius")))?,
        };
        if r < 1.0 || !r.is_finite() {
            return Err(usage(format!("radius must be at least 1, got {r}")));
        }
        Ok(r)
    };

    let csv = match a.experiment {
        Experiment::Hits => {
            let instances = ns
                .iter()
                .map(|&n| radius_of(n).map(|r| (n, r)))
                .collect::<Result<Vec<_>, _>>()?;
            let config = BenchConfig {
                base_seed: a.seed,
                repetitions: a.reps,
                budget: search_budget(a.t0, a.max_restarts)?,
                settings,
            };
            let mut records = Vec::new();
            println!("{}", bench::CSV_HEADER);
            for &(n, r) in &instances {
                let rec = bench::bench_instance(n, r, &config);
                println!("{}", rec.csv_row());
                records.push(rec);
            }
            bench::records_to_csv(&records)
        }
        Experiment::Speedup => {
            let mut rows = Vec::new();
            for &n in &ns {
                let rep = bench::local_vs_full(n, radius_of(n)?, &settings.bfgs, a.reps, a.seed);
                println!("n={n} full {:.6} s, local {:.6} s, speedup {:.2}", rep.full.mean_time_s, rep.local.mean_time_s, rep.speedup());
                rows.push(rep.full);
                rows.push(rep.local);
            }
            bench::descent_table(&rows)
        }
        Experiment::Refresh => {
            let periods = parse_list(&a.periods, "periods")?;
            let mut rows = Vec::new();
            for &n in &ns {
                rows.extend(bench::refresh_sweep(n, radius_of(n)?, &settings.bfgs, &periods, a.reps, a.seed));
            }
            print!("{}", bench::descent_table(&rows));
            bench::descent_table(&rows)
        }
    };
    if let Some(path) = &a.out {
        std::fs::write(path, csv).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    }
    Ok(0)
}
