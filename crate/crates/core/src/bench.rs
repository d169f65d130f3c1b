//! Benchmark harness: hit counts per instance, local vs full optimizer
//! timing, and a sweep over the neighbor-list refresh period.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use crate::bfgs::{bfgs_minimize, BfgsSettings, Mode};
use crate::layout::random_layout;
use crate::rng::{derive_seed, SolverRng};
use crate::search::{global_search, SearchBudget, SearchSettings};

pub const CSV_HEADER: &str = "n,target_radius,hits,attempts,mean_time_s";

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub n: usize,
    pub target_radius: f64,
    pub hits: usize,
    pub attempts: usize,
    /// Mean wall time of the successful runs only; `None` without hits.
    pub mean_time_s: Option<f64>,
    pub seeds: Vec<u64>,
}

impl BenchRecord {
    pub fn csv_row(&self) -> String {
        let time = self
            .mean_time_s
            .map_or_else(|| "-".to_string(), |t| format!("{t:.3}"));
        format!(
            "{},{:.10},{},{},{}",
            self.n, self.target_radius, self.hits, self.attempts, time
        )
    }
}

pub fn records_to_csv(records: &[BenchRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub base_seed: u64,
    pub repetitions: usize,
    pub budget: SearchBudget,
    pub settings: SearchSettings,
}

/// Runs `repetitions` independent global searches of `n` circles at `radius`.
pub fn bench_instance(n: usize, radius: f64, config: &BenchConfig) -> BenchRecord {
    let mut hits = 0;
    let mut hit_time = Duration::ZERO;
    let mut seeds = Vec::with_capacity(config.repetitions);
    for rep in 0..config.repetitions {
        let seed = derive_seed(config.base_seed, n, rep);
        seeds.push(seed);
        let mut rng = SolverRng::new(seed);
        let report = global_search(n, radius, config.budget, &config.settings, &mut rng);
        if report.is_feasible() {
            hits += 1;
            hit_time += report.elapsed;
        }
    }
    BenchRecord {
        n,
        target_radius: radius,
        hits,
        attempts: config.repetitions,
        mean_time_s: (hits > 0).then(|| hit_time.as_secs_f64() / hits as f64),
        seeds,
    }
}

/// Benchmarks every `(n, radius)` instance in order.
pub fn bench_instances(instances: &[(usize, f64)], config: &BenchConfig) -> Vec<BenchRecord> {
    instances
        .iter()
        .map(|&(n, r)| bench_instance(n, r, config))
        .collect()
}

/// Mean cost of one optimizer run from a random start to a local minimum.
#[derive(Debug, Clone, PartialEq)]
pub struct DescentTiming {
    pub mode: Mode,
    pub refresh_period: usize,
    pub runs: usize,
    pub mean_time_s: f64,
    pub mean_energy: f64,
    pub mean_iterations: f64,
}

/// Times `runs` descents from random starts. Run `r` uses the same start for
/// every mode and refresh period, so results are directly comparable.
pub fn time_descents(
    n: usize,
    radius: f64,
    settings: &BfgsSettings,
    runs: usize,
    base_seed: u64,
) -> DescentTiming {
    let mut total = Duration::ZERO;
    let mut energy = 0.0;
    let mut iterations = 0usize;
    for rep in 0..runs {
        let mut rng = SolverRng::new(derive_seed(base_seed, n, rep));
        let start = random_layout(n, radius, &mut rng).expect("valid instance");
        let t = Instant::now();
        let out = bfgs_minimize(start.centers(), radius, settings, &mut rng);
        total += t.elapsed();
        energy += out.energy.total;
        iterations += out.iterations;
    }
    let k = runs.max(1) as f64;
    DescentTiming {
        mode: settings.mode,
        refresh_period: settings.refresh_period,
        runs,
        mean_time_s: total.as_secs_f64() / k,
        mean_energy: energy / k,
        mean_iterations: iterations as f64 / k,
    }
}

/// Full and Local descent timings on identical starts.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedupReport {
    pub n: usize,
    pub full: DescentTiming,
    pub local: DescentTiming,
}

impl SpeedupReport {
    /// Full mean time divided by Local mean time.
    pub fn speedup(&self) -> f64 {
        self.full.mean_time_s / self.local.mean_time_s
    }
}

pub fn local_vs_full(n: usize, radius: f64, settings: &BfgsSettings, runs: usize, base_seed: u64) -> SpeedupReport {
    SpeedupReport {
        n,
        full: time_descents(n, radius, &settings.with_mode(Mode::Full), runs, base_seed),
        local: time_descents(n, radius, &settings.with_mode(Mode::Local), runs, base_seed),
    }
}

/// Local-mode descent timings for each refresh period in `periods`.
pub fn refresh_sweep(
    n: usize,
    radius: f64,
    settings: &BfgsSettings,
    periods: &[usize],
    runs: usize,
    base_seed: u64,
) -> Vec<DescentTiming> {
    periods
        .iter()
        .map(|&l| {
            let s = BfgsSettings {
                mode: Mode::Local,
                refresh_period: l,
                ..*settings
            };
            time_descents(n, radius, &s, runs, base_seed)
        })
        .collect()
}

pub fn descent_table(rows: &[DescentTiming]) -> String {
    let mut out = String::from("mode,l,runs,mean_time_s,mean_energy,mean_iterations\n");
    for r in rows {
        let mode = match r.mode {
            Mode::Full => "full",
            Mode::Local => "local",
        };
        let _ = writeln!(
            out,
            "{mode},{},{},{:.6},{:e},{:.1}",
            r.refresh_period, r.runs, r.mean_time_s, r.mean_energy, r.mean_iterations
        );
    }
    out
}
