//! Global search on top of the BFGS local optimizer.
//!
//! * [`basin_hop`] squeezes a stuck layout into 20 progressively less
//!   shrunken containers and briefly reoptimizes each one.
//! * [`global_search`] alternates random starts and basin hops at a fixed
//!   container radius until a feasible layout turns up or the budget runs out.
//! * [`container_adjust`] shrinks the container of a feasible layout by
//!   geometric probing followed by bisection.
//! * [`qpqh_solve`] chains the two: search, adjust, search again at the
//!   smaller radius, until the radius stops improving.
//!
//! Time limits are checked between optimizer calls, so a run may overshoot
//! its limit by the duration of one call.

use std::ops::RangeInclusive;
use std::time::{Duration, Instant};

use crate::bfgs::{bfgs_minimize, run_bounded, BfgsSettings, OptimizeOutcome};
use crate::energy::Energy;
use crate::layout::{random_layout, Centers, Layout};
use crate::rng::SolverRng;

pub const HOP_COUNT: usize = 20;
pub const DEFAULT_HOP_ITERATIONS: RangeInclusive<usize> = 50..=100;
/// Bracket width at which container adjustment stops bisecting.
pub const ADJUST_TOLERANCE: f64 = 1e-10;
const FIRST_PROBE_STEP: f64 = 1e-10;
/// No container holding a unit circle can be smaller than this.
const MIN_RADIUS: f64 = 1.0;

/// Shrink factor for hop `m`: `0.3 + 0.035 m`, i.e. 0.300, 0.335, …, 0.965.
///
/// Evaluated as `(300 + 35 m) / 1000` so each factor is the double nearest
/// to its decimal value.
pub fn shrink_factor(m: usize) -> f64 {
    (300 + 35 * m) as f64 / 1000.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchSettings {
    pub bfgs: BfgsSettings,
    /// Range the per-hop iteration count `h` is drawn from.
    pub hop_iterations: RangeInclusive<usize>,
}

impl Default for SearchSettings {
    fn default() -> Self {
        Self {
            bfgs: BfgsSettings::default(),
            hop_iterations: DEFAULT_HOP_ITERATIONS,
        }
    }
}

/// Limits for a [`global_search`]. At least one limit should be set.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SearchBudget {
    pub time_limit: Option<Duration>,
    /// Random restarts allowed before giving up with [`SolveStatus::Stuck`].
    pub max_restarts: Option<usize>,
}

impl SearchBudget {
    pub fn time(limit: Duration) -> Self {
        Self {
            time_limit: Some(limit),
            max_restarts: None,
        }
    }

    pub fn restarts(max_restarts: usize) -> Self {
        Self {
            time_limit: None,
            max_restarts: Some(max_restarts),
        }
    }

    fn timed_out(&self, started: Instant) -> bool {
        self.time_limit.is_some_and(|t| started.elapsed() >= t)
    }
}

/// Coordinates produced by one basin hop, one entry per shrink factor.
#[derive(Debug, Clone, PartialEq)]
pub struct HopBatch {
    pub layouts: Vec<Centers>,
    pub betas: Vec<f64>,
    /// Iteration count `h` drawn for each member.
    pub iterations: Vec<usize>,
    pub source_radius: f64,
}

/// Shrinks the container to `β R` for each of the 20 shrink factors and runs
/// `h ∈ hop_iterations` local BFGS iterations from the unchanged `centers`.
pub fn basin_hop(centers: &Centers, radius: f64, settings: &SearchSettings, rng: &mut SolverRng) -> HopBatch {
    let mut batch = HopBatch {
        layouts: Vec::with_capacity(HOP_COUNT),
        betas: Vec::with_capacity(HOP_COUNT),
        iterations: Vec::with_capacity(HOP_COUNT),
        source_radius: radius,
    };
    for m in 0..HOP_COUNT {
        let beta = shrink_factor(m);
        let h = rng.int_inclusive(*settings.hop_iterations.start(), *settings.hop_iterations.end());
        batch
            .layouts
            .push(run_bounded(centers, beta * radius, h, &settings.bfgs, rng));
        batch.betas.push(beta);
        batch.iterations.push(h);
    }
    batch
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Feasible,
    /// Restart budget exhausted without a feasible layout.
    Stuck,
    Timeout,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub status: SolveStatus,
    /// Feasible layout, or the lowest-energy layout seen.
    pub layout: Layout,
    pub energy: Energy,
    pub elapsed: Duration,
    pub restarts: usize,
    pub hops: usize,
    pub seed: u64,
    /// Radii accepted by [`qpqh_solve`], strictly decreasing. Empty for a
    /// plain [`global_search`].
    pub accepted_radii: Vec<f64>,
}

impl SolveReport {
    pub fn is_feasible(&self) -> bool {
        self.status == SolveStatus::Feasible
    }

    pub fn radius(&self) -> f64 {
        self.layout.radius()
    }
}

struct Best(Option<OptimizeOutcome>);

impl Best {
    fn consider(&mut self, out: &OptimizeOutcome) {
        if self.0.as_ref().is_none_or(|b| out.energy.total < b.energy.total) {
            self.0 = Some(out.clone());
        }
    }
}

/// Searches for a feasible layout of `n` circles in a container of `radius`.
pub fn global_search(
    n: usize,
    radius: f64,
    budget: SearchBudget,
    settings: &SearchSettings,
    rng: &mut SolverRng,
) -> SolveReport {
    let started = Instant::now();
    let mut best = Best(None);
    let mut restarts = 0;
    let mut hops = 0;

    let report = |status, out: &OptimizeOutcome, restarts, hops, rng: &SolverRng| SolveReport {
        status,
        layout: Layout::new(out.centers.clone(), radius).expect("search radius is at least 1"),
        energy: out.energy,
        elapsed: started.elapsed(),
        restarts,
        hops,
        seed: rng.seed(),
        accepted_radii: Vec::new(),
    };

    let status = 'search: loop {
        let start = random_layout(n, radius, rng).expect("n >= 1 and radius >= 1");
        let out = bfgs_minimize(start.centers(), radius, &settings.bfgs, rng);
        best.consider(&out);
        if out.is_feasible() {
            return report(SolveStatus::Feasible, &out, restarts, hops, rng);
        }
        if budget.timed_out(started) {
            break SolveStatus::Timeout;
        }

        let batch = basin_hop(&out.centers, radius, settings, rng);
        for hopped in &batch.layouts {
            let out = bfgs_minimize(hopped, radius, &settings.bfgs, rng);
            hops += 1;
            best.consider(&out);
            if out.is_feasible() {
                return report(SolveStatus::Feasible, &out, restarts, hops, rng);
            }
            if budget.timed_out(started) {
                break 'search SolveStatus::Timeout;
            }
        }

        restarts += 1;
        if budget.max_restarts.is_some_and(|m| restarts >= m) {
            break SolveStatus::Stuck;
        }
        if budget.time_limit.is_none() && budget.max_restarts.is_none() {
            // Unbounded budgets would never return; treat as a single round.
            break SolveStatus::Stuck;
        }
    };
    let best = best.0.expect("at least one optimizer run");
    report(status, &best, restarts, hops, rng)
}

#[derive(Debug, Clone)]
pub struct AdjustOutcome {
    /// Feasible layout at the smallest radius that reoptimized feasibly.
    pub layout: Layout,
    /// Largest radius found infeasible, or the final radius when probing
    /// reached radius 1 without a failure.
    pub lower_bound: f64,
    pub probes: usize,
}

impl AdjustOutcome {
    pub fn radius(&self) -> f64 {
        self.layout.radius()
    }
}

/// Shrinks the container of the feasible `layout` as far as reoptimization
/// keeps it feasible.
///
/// Probing lowers the radius by `1e-10 · 10^i` for `i = 0, 1, …` until a
/// probe fails (never going below radius 1), then bisects the bracket down to
/// a width of `1e-10`. Every probe restarts from the input coordinates.
pub fn container_adjust(layout: &Layout, settings: &SearchSettings, rng: &mut SolverRng) -> AdjustOutcome {
    let start = layout.centers();
    let mut best = layout.clone();
    let mut upper = layout.radius();
    let mut probes = 0;

    let try_radius = |r: f64, rng: &mut SolverRng, probes: &mut usize| -> Option<Centers> {
        *probes += 1;
        let out = bfgs_minimize(start, r, &settings.bfgs, rng);
        out.is_feasible().then_some(out.centers)
    };

    let mut step = FIRST_PROBE_STEP;
    let lower = loop {
        if upper <= MIN_RADIUS {
            return AdjustOutcome {
                layout: best,
                lower_bound: upper,
                probes,
            };
        }
        let probe = (upper - step).max(MIN_RADIUS);
        match try_radius(probe, rng, &mut probes) {
            Some(centers) => {
                best = Layout::new(centers, probe).expect("probe radius >= 1");
                upper = probe;
                step *= 10.0;
            }
            None => break probe,
        }
    };

    let mut lower = lower;
    while upper - lower > ADJUST_TOLERANCE {
        let mid = 0.5 * (upper + lower);
        if mid <= lower || mid >= upper {
            break;
        }
        match try_radius(mid, rng, &mut probes) {
            Some(centers) => {
                best = Layout::new(centers, mid).expect("mid radius >= 1");
                upper = mid;
            }
            None => lower = mid,
        }
    }
    AdjustOutcome {
        layout: best,
        lower_bound: lower,
        probes,
    }
}

/// Budget for [`qpqh_solve`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QpqhBudget {
    /// Budget of each global search (`t0`, or a restart count).
    pub search: SearchBudget,
    /// Overall wall-clock limit (`t1`).
    pub total: Option<Duration>,
    /// Maximum number of global searches, for deterministic runs.
    pub max_rounds: Option<usize>,
}

/// Repeatedly searches at the best radius found so far and shrinks each new
/// feasible layout's container, stopping once adjustment no longer helps.
pub fn qpqh_solve(
    n: usize,
    start_radius: f64,
    budget: QpqhBudget,
    settings: &SearchSettings,
    rng: &mut SolverRng,
) -> SolveReport {
    let started = Instant::now();
    let mut radius = start_radius;
    let mut best: Option<(Layout, Energy)> = None;
    let mut fallback: Option<SolveReport> = None;
    let mut accepted = Vec::new();
    let mut restarts = 0;
    let mut hops = 0;
    let mut rounds = 0;

    loop {
        let remaining = match budget.total {
            Some(total) => match total.checked_sub(started.elapsed()) {
                Some(r) if !r.is_zero() => Some(r),
                _ => break,
            },
            None => None,
        };
        if budget.max_rounds.is_some_and(|m| rounds >= m) {
            break;
        }
        rounds += 1;

        let mut search = budget.search;
        search.time_limit = match (search.time_limit, remaining) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        let found = global_search(n, radius, search, settings, rng);
        restarts += found.restarts;
        hops += found.hops;
        if !found.is_feasible() {
            if fallback.as_ref().is_none_or(|f| found.energy.total < f.energy.total) {
                fallback = Some(found);
            }
            if budget.total.is_none() && budget.max_rounds.is_none() {
                break;
            }
            continue;
        }

        let adjusted = container_adjust(&found.layout, settings, rng);
        let new_radius = adjusted.radius();
        let energy = crate::energy::total_energy(&adjusted.layout);
        let improved = radius - new_radius > ADJUST_TOLERANCE;
        if accepted.last().is_none_or(|&last| new_radius < last) {
            accepted.push(new_radius);
            best = Some((adjusted.layout, energy));
        }
        if !improved {
            break;
        }
        radius = new_radius;
    }

    match best {
        Some((layout, energy)) => SolveReport {
            status: SolveStatus::Feasible,
            layout,
            energy,
            elapsed: started.elapsed(),
            restarts,
            hops,
            seed: rng.seed(),
            accepted_radii: accepted,
        },
        None => {
            let mut report = fallback.unwrap_or_else(|| {
                // Budget ran out before the first search; report the start.
                let start = random_layout(n, start_radius, rng).expect("valid instance");
                let energy = crate::energy::total_energy(&start);
                SolveReport {
                    status: SolveStatus::Timeout,
                    layout: start,
                    energy,
                    elapsed: Duration::ZERO,
                    restarts: 0,
                    hops: 0,
                    seed: rng.seed(),
                    accepted_radii: Vec::new(),
                }
            });
            if budget.total.is_some() {
                report.status = SolveStatus::Timeout;
            }
            report.elapsed = started.elapsed();
            report.restarts = restarts;
            report.hops = hops;
            report
        }
    }
}
