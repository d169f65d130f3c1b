//! BFGS minimization of the elastic energy.
//!
//! The dense `2n × 2n` inverse-Hessian approximation starts at the identity
//! and is updated with the standard BFGS formula. Steps come from Armijo
//! backtracking. In [`Mode::Local`] the energy and gradient are evaluated
//! through a [`NeighborIndex`] that is rebuilt every `refresh_period`
//! iterations; the inverse Hessian is kept across rebuilds. A point farther
//! from the index's build coordinates than the skin `min(d1, d2/2)` could hide
//! active terms, so such trial points are evaluated in full and such iterates
//! trigger an early rebuild.

use crate::energy::{Energy, FEASIBILITY_THRESHOLD};
use crate::error::LayoutError;
use crate::layout::{Centers, Layout};
use crate::neighbor::{self, NeighborIndex, Scope};
use crate::rng::SolverRng;

pub const GRADIENT_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_MAX_ITERATIONS: usize = 5000;
pub const DEFAULT_REFRESH_PERIOD: usize = 10;

const ARMIJO_C: f64 = 1e-4;
const MAX_HALVINGS: usize = 50;
const CURVATURE_EPS: f64 = 1e-12;
const COINCIDENT_NUDGE: f64 = 1e-8;
const MAX_NUDGES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Every pair and container term, every evaluation.
    Full,
    /// Only terms listed in a periodically rebuilt neighbor index.
    Local,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BfgsSettings {
    pub max_iterations: usize,
    pub mode: Mode,
    /// Iterations between neighbor-index rebuilds (`l`).
    pub refresh_period: usize,
    /// Container adjacency threshold.
    pub d1: f64,
    /// Circle adjacency threshold.
    pub d2: f64,
}

impl Default for BfgsSettings {
    fn default() -> Self {
        Self {
            max_iterations: DEFAULT_MAX_ITERATIONS,
            mode: Mode::Local,
            refresh_period: DEFAULT_REFRESH_PERIOD,
            d1: neighbor::DEFAULT_CONTAINER_THRESHOLD,
            d2: neighbor::DEFAULT_CIRCLE_THRESHOLD,
        }
    }
}

impl BfgsSettings {
    pub fn full() -> Self {
        Self {
            mode: Mode::Full,
            ..Self::default()
        }
    }

    pub fn with_max_iterations(self, max_iterations: usize) -> Self {
        Self {
            max_iterations,
            ..self
        }
    }

    pub fn with_mode(self, mode: Mode) -> Self {
        Self { mode, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizeStatus {
    Feasible,
    GradientConverged,
    /// Neither the quasi-Newton nor the steepest-descent direction gives a
    /// representable decrease: a local minimum at the rounding floor of `U`.
    Stalled,
    IterationLimit,
}

#[derive(Debug, Clone)]
pub struct OptimizeOutcome {
    pub centers: Centers,
    /// Container radius the coordinates were optimized against.
    pub radius: f64,
    /// Exact (all-pairs) energy of the final coordinates.
    pub energy: Energy,
    pub status: OptimizeStatus,
    pub iterations: usize,
    pub evaluations: usize,
}

impl OptimizeOutcome {
    pub fn is_feasible(&self) -> bool {
        self.status == OptimizeStatus::Feasible
    }

    pub fn layout(&self) -> Result<Layout, LayoutError> {
        Layout::new(self.centers.clone(), self.radius)
    }
}

/// Dense symmetric inverse-Hessian approximation, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseHessian {
    dim: usize,
    data: Vec<f64>,
}

impl InverseHessian {
    pub fn identity(dim: usize) -> Self {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = 1.0;
        }
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    fn reset(&mut self) {
        self.data.fill(0.0);
        for i in 0..self.dim {
            self.data[i * self.dim + i] = 1.0;
        }
    }

    /// `out = H · v`.
    pub fn apply(&self, v: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(self.row(i), v);
        }
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// `H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ` with `ρ = 1/(yᵀs)` and
    /// `hy = H·y` precomputed, expanded to
    /// `H − ρ (s hyᵀ + hy sᵀ) + (ρ + ρ² yᵀHy) s sᵀ`.
    ///
    /// Element `(i, j)` and `(j, i)` evaluate the same floating-point
    /// expression, so the result is exactly symmetric when `H` is.
    fn rank_two_update(&mut self, s: &[f64], hy: &[f64], rho: f64, coef: f64) {
        let dim = self.dim;
        for i in 0..dim {
            let (si, vi) = (s[i], hy[i]);
            let row = &mut self.data[i * dim..(i + 1) * dim];
            for ((h, &sj), &vj) in row.iter_mut().zip(s).zip(hy) {
                *h += coef * (si * sj) - rho * (si * vj + vi * sj);
            }
        }
    }
}

fn curvature_ok(ys: f64, s: &[f64], y: &[f64]) -> bool {
    ys > CURVATURE_EPS * neighbor::norm(s) * neighbor::norm(y)
}

/// Returns the BFGS-updated matrix, or `h` unchanged when `yᵀs` is not
/// safely positive.
pub fn update_inverse_hessian(h: &InverseHessian, s: &[f64], y: &[f64]) -> InverseHessian {
    assert_eq!(s.len(), h.dim);
    assert_eq!(y.len(), h.dim);
    let mut out = h.clone();
    let ys = dot(y, s);
    if curvature_ok(ys, s, y) {
        let mut hy = vec![0.0; h.dim];
        h.apply(y, &mut hy);
        let rho = 1.0 / ys;
        let coef = rho + rho * rho * dot(y, &hy);
        out.rank_two_update(s, &hy, rho, coef);
    }
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    // Four independent partial sums keep the loop vectorizable.
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Armijo backtracking along `d` from `x`.
///
/// Tries `λ = 1, 1/2, 1/4, …` and accepts the first step with
/// `U(x + λd) ≤ U0 + 1e-4 · λ · (g0·d)`. Returns 0 when `d` is not a descent
/// direction, when `λd` no longer changes any coordinate, or when no step is
/// accepted after 50 halvings.
pub fn line_search<F>(mut energy: F, x: &[f64], d: &[f64], u0: f64, g0: &[f64]) -> f64
where
    F: FnMut(&[f64]) -> f64,
{
    let mut trial = vec![0.0; x.len()];
    backtrack(&mut energy, x, d, u0, dot(g0, d), &mut trial).0
}

fn backtrack<F>(energy: &mut F, x: &[f64], d: &[f64], u0: f64, slope: f64, trial: &mut [f64]) -> (f64, f64)
where
    F: FnMut(&[f64]) -> f64,
{
    if slope >= 0.0 || !slope.is_finite() {
        return (0.0, u0);
    }
    let mut lambda = 1.0;
    for _ in 0..=MAX_HALVINGS {
        let mut moved = false;
        for ((t, &xi), &di) in trial.iter_mut().zip(x).zip(d) {
            *t = xi + lambda * di;
            moved |= t.to_bits() != xi.to_bits();
        }
        // Below one ulp in every coordinate the Armijo test passes vacuously.
        if !moved {
            break;
        }
        let u = energy(trial);
        if u <= u0 + ARMIJO_C * lambda * slope {
            return (lambda, u);
        }
        lambda *= 0.5;
    }
    (0.0, u0)
}

/// What the optimizer reports after each accepted step (for tests and
/// experiments).
#[derive(Debug)]
pub struct StepRecord<'a> {
    pub iteration: usize,
    pub energy_before: f64,
    pub energy_after: f64,
    pub step: &'a [f64],
    pub gradient_change: &'a [f64],
    pub update_applied: bool,
    pub restarted: bool,
    pub inverse_hessian: &'a InverseHessian,
    pub coords: &'a [f64],
}

struct Evaluator<'s> {
    settings: &'s BfgsSettings,
    radius: f64,
    index: Option<NeighborIndex>,
    /// Coordinates the index was built from.
    anchor: Vec<f64>,
    age: usize,
    evaluations: usize,
}

impl Evaluator<'_> {
    /// Largest displacement from the anchor that keeps the index exact: an
    /// unlisted pair needs both circles to close a gap above `d2`, and an
    /// unflagged circle must cover a gap above `d1` to reach the wall.
    fn skin(&self) -> f64 {
        self.settings.d1.min(0.5 * self.settings.d2)
    }

    fn within_skin(&self, coords: &[f64]) -> bool {
        let skin = self.skin();
        if skin == f64::INFINITY {
            return true;
        }
        let limit = skin * skin;
        coords.chunks_exact(2).zip(self.anchor.chunks_exact(2)).all(|(c, a)| {
            let (dx, dy) = (c[0] - a[0], c[1] - a[1]);
            dx * dx + dy * dy <= limit
        })
    }

    /// The index when it still covers every active term at `coords`.
    fn scope(&self, coords: &[f64]) -> Scope<'_> {
        match &self.index {
            Some(idx) if self.within_skin(coords) => Scope::Index(idx),
            _ => Scope::All,
        }
    }

    fn energy(&mut self, coords: &[f64]) -> f64 {
        self.evaluations += 1;
        neighbor::evaluate::<false>(coords, self.radius, self.scope(coords), &mut []).energy.total
    }

    /// Energy and gradient; coincident centers are pulled apart by a tiny
    /// random nudge before the gradient is trusted. An iterate that has moved
    /// past the skin gets a fresh index first.
    fn energy_gradient(&mut self, coords: &mut [f64], grad: &mut [f64], rng: &mut SolverRng) -> f64 {
        let mut nudges = 0;
        loop {
            if self.index.is_some() && !self.within_skin(coords) {
                self.rebuild(coords);
            }
            self.evaluations += 1;
            let out = neighbor::evaluate::<true>(coords, self.radius, self.scope(coords), grad);
            match out.coincident {
                Some((_, j)) if nudges < MAX_NUDGES => {
                    let theta = rng.angle();
                    coords[2 * j] += COINCIDENT_NUDGE * theta.cos();
                    coords[2 * j + 1] += COINCIDENT_NUDGE * theta.sin();
                    nudges += 1;
                }
                _ => return out.energy.total,
            }
        }
    }

    fn rebuild(&mut self, coords: &[f64]) {
        if self.settings.mode == Mode::Local {
            let centers = Centers::from_flat(coords.to_vec()).expect("finite iterate");
            self.index = Some(NeighborIndex::build(
                &centers,
                self.radius,
                self.settings.d1,
                self.settings.d2,
            ));
            self.anchor.clear();
            self.anchor.extend_from_slice(coords);
            self.age = 0;
        }
    }

    /// Rebuilds the index and re-evaluates at `x`. `hg` is recomputed only
    /// when the gradient actually changed, so that an index that hides
    /// nothing leaves the iteration bit-identical to full evaluation.
    fn refresh(
        &mut self,
        x: &mut [f64],
        g: &mut [f64],
        scratch: &mut [f64],
        h: &InverseHessian,
        hg: &mut [f64],
        rng: &mut SolverRng,
    ) -> f64 {
        self.rebuild(x);
        let u = self.energy_gradient(x, scratch, rng);
        if g.iter().zip(scratch.iter()).any(|(a, b)| a.to_bits() != b.to_bits()) {
            g.copy_from_slice(scratch);
            h.apply(g, hg);
        }
        u
    }

    fn is_fresh(&self) -> bool {
        self.index.is_none() || self.age == 0
    }
}

/// Minimizes the elastic energy of `start` in a container of `radius`.
pub fn bfgs_minimize(
    start: &Centers,
    radius: f64,
    settings: &BfgsSettings,
    rng: &mut SolverRng,
) -> OptimizeOutcome {
    bfgs_minimize_observed(start, radius, settings, rng, |_| {})
}

/// [`bfgs_minimize`] with a callback invoked after every accepted step.
pub fn bfgs_minimize_observed<F>(
    start: &Centers,
    radius: f64,
    settings: &BfgsSettings,
    rng: &mut SolverRng,
    mut observe: F,
) -> OptimizeOutcome
where
    F: FnMut(&StepRecord<'_>),
{
    let dim = start.as_slice().len();
    let mut ev = Evaluator {
        settings,
        radius,
        index: None,
        anchor: Vec::new(),
        age: 0,
        evaluations: 0,
    };
    let mut x = start.as_slice().to_vec();
    ev.rebuild(&x);

    let mut g = vec![0.0; dim];
    let mut u = ev.energy_gradient(&mut x, &mut g, rng);
    let mut h = InverseHessian::identity(dim);
    // Invariant: hg == H · g for the current H and g.
    let mut hg = g.clone();

    let mut d = vec![0.0; dim];
    let mut trial = vec![0.0; dim];
    let mut x_new = vec![0.0; dim];
    let mut g_new = vec![0.0; dim];
    let mut hg_new = vec![0.0; dim];
    let mut s = vec![0.0; dim];
    let mut y = vec![0.0; dim];
    let mut v = vec![0.0; dim];

    let mut k = 0usize;
    let status = loop {
        let small_energy = u < FEASIBILITY_THRESHOLD;
        let small_gradient = neighbor::norm(&g) < GRADIENT_TOLERANCE;
        if small_energy || small_gradient {
            if ev.is_fresh() {
                break if small_energy {
                    OptimizeStatus::Feasible
                } else {
                    OptimizeStatus::GradientConverged
                };
            }
            // A stale index may hide new contacts; confirm on a fresh one.
            u = ev.refresh(&mut x, &mut g, &mut g_new, &h, &mut hg, rng);
            continue;
        }
        if k >= settings.max_iterations {
            break OptimizeStatus::IterationLimit;
        }

        for (di, &hgi) in d.iter_mut().zip(&hg) {
            *di = -hgi;
        }
        let mut restarted = false;
        let mut slope = dot(&g, &d);
        if slope >= 0.0 || !slope.is_finite() {
            restart(&mut h, &mut hg, &g, &mut d);
            slope = dot(&g, &d);
            restarted = true;
        }
        let (mut lambda, _) = backtrack(&mut |t: &[f64]| ev.energy(t), &x, &d, u, slope, &mut trial);
        if lambda == 0.0 && !restarted {
            restart(&mut h, &mut hg, &g, &mut d);
            slope = dot(&g, &d);
            restarted = true;
            lambda = backtrack(&mut |t: &[f64]| ev.energy(t), &x, &d, u, slope, &mut trial).0;
        }
        if lambda == 0.0 {
            if ev.is_fresh() {
                break OptimizeStatus::Stalled;
            }
            u = ev.refresh(&mut x, &mut g, &mut g_new, &h, &mut hg, rng);
            continue;
        }

        for ((xn, &xi), &di) in x_new.iter_mut().zip(&x).zip(&d) {
            *xn = xi + lambda * di;
        }
        let u_new = ev.energy_gradient(&mut x_new, &mut g_new, rng);
        for i in 0..dim {
            s[i] = x_new[i] - x[i];
            y[i] = g_new[i] - g[i];
        }
        h.apply(&g_new, &mut hg_new);
        let ys = dot(&y, &s);
        let update_applied = curvature_ok(ys, &s, &y);
        if update_applied {
            for i in 0..dim {
                v[i] = hg_new[i] - hg[i];
            }
            let rho = 1.0 / ys;
            let coef = rho + rho * rho * dot(&y, &v);
            let sg = dot(&s, &g_new);
            let vg = dot(&v, &g_new);
            h.rank_two_update(&s, &v, rho, coef);
            for i in 0..dim {
                hg_new[i] += coef * s[i] * sg - rho * (s[i] * vg + v[i] * sg);
            }
        }

        observe(&StepRecord {
            iteration: k,
            energy_before: u,
            energy_after: u_new,
            step: &s,
            gradient_change: &y,
            update_applied,
            restarted,
            inverse_hessian: &h,
            coords: &x_new,
        });

        std::mem::swap(&mut x, &mut x_new);
        std::mem::swap(&mut g, &mut g_new);
        std::mem::swap(&mut hg, &mut hg_new);
        u = u_new;
        k += 1;

        if ev.index.is_some() {
            ev.age += 1;
            if ev.age >= settings.refresh_period {
                u = ev.refresh(&mut x, &mut g, &mut g_new, &h, &mut hg, rng);
            }
        }
    };

    let centers = Centers::from_flat(x).expect("optimizer keeps coordinates finite");
    let energy = crate::energy::energy_at(&centers, radius);
    OptimizeOutcome {
        centers,
        radius,
        energy,
        status,
        iterations: k,
        evaluations: ev.evaluations,
    }
}

fn restart(h: &mut InverseHessian, hg: &mut [f64], g: &[f64], d: &mut [f64]) {
    h.reset();
    hg.copy_from_slice(g);
    for (di, &gi) in d.iter_mut().zip(g) {
        *di = -gi;
    }
}

/// Local-mode BFGS for at most `h` iterations, returning wherever it got to.
pub fn run_bounded(
    start: &Centers,
    radius: f64,
    h: usize,
    settings: &BfgsSettings,
    rng: &mut SolverRng,
) -> Centers {
    let settings = BfgsSettings {
        max_iterations: h,
        mode: Mode::Local,
        ..*settings
    };
    bfgs_minimize(start, radius, &settings, rng).centers
}
