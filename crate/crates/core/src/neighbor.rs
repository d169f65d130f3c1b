//! Adjacency lists and the energy/gradient kernels built on them.
//!
//! A circle `j` is adjacent to circle `i` when the gap between their
//! boundaries is at most `d2`; the container is adjacent to `i` when the gap
//! `R - 1 - |c_i|` between `i` and the wall is at most `d1`. Overlaps have a
//! negative gap, so every active term is listed right after a rebuild.
//!
//! The local evaluator only visits adjacent objects, so between rebuilds its
//! cost is linear in the total list length instead of quadratic in `n`.
//!
//! Both evaluators share one kernel and visit terms in the same order
//! (container first, then circles by ascending index), so an index built with
//! infinite thresholds reproduces the full evaluation bit for bit.

use crate::energy::Energy;
use crate::layout::{Centers, Layout};

pub const DEFAULT_CONTAINER_THRESHOLD: f64 = 1.0;
pub const DEFAULT_CIRCLE_THRESHOLD: f64 = 1.0;

/// Per-circle adjacency lists, immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborIndex {
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    container_adjacent: Vec<bool>,
    d1: f64,
    d2: f64,
}

impl NeighborIndex {
    /// Brute-force O(n²) scan of all pairs.
    pub fn build(centers: &Centers, radius: f64, d1: f64, d2: f64) -> Self {
        let n = centers.n();
        let c = centers.as_slice();
        let mut lists: Vec<Vec<u32>> = vec![Vec::new(); n];
        for i in 0..n {
            let (xi, yi) = (c[2 * i], c[2 * i + 1]);
            for j in (i + 1)..n {
                let dx = xi - c[2 * j];
                let dy = yi - c[2 * j + 1];
                if (dx * dx + dy * dy).sqrt() - 2.0 <= d2 {
                    lists[i].push(j as u32);
                    lists[j].push(i as u32);
                }
            }
        }
        let container_adjacent = centers
            .points()
            .map(|[x, y]| radius - 1.0 - (x * x + y * y).sqrt() <= d1)
            .collect();
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        let mut neighbors = Vec::with_capacity(lists.iter().map(Vec::len).sum());
        for list in lists {
            neighbors.extend(list);
            offsets.push(neighbors.len());
        }
        Self {
            offsets,
            neighbors,
            container_adjacent,
            d1,
            d2,
        }
    }

    pub fn for_layout(layout: &Layout, d1: f64, d2: f64) -> Self {
        Self::build(layout.centers(), layout.radius(), d1, d2)
    }

    pub fn n(&self) -> usize {
        self.container_adjacent.len()
    }

    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.neighbors[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn container_adjacent(&self, i: usize) -> bool {
        self.container_adjacent[i]
    }

    pub fn thresholds(&self) -> (f64, f64) {
        (self.d1, self.d2)
    }

    /// Sum of all list lengths (each adjacent pair appears twice).
    pub fn total_len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn mean_len(&self) -> f64 {
        self.total_len() as f64 / self.n() as f64
    }
}

/// `∂U/∂x1, ∂U/∂y1, ..., ∂U/∂xn, ∂U/∂yn`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient(Vec<f64>);

impl Gradient {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|g| g * g).sum::<f64>().sqrt()
}

/// Which terms an evaluation visits.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Scope<'a> {
    All,
    Index(&'a NeighborIndex),
}

/// Result of one kernel pass. `coincident` names a pair of circles whose
/// centers coincide, where the pair gradient has no direction.
#[derive(Debug, Clone, Copy)]
pub(crate) struct KernelOutput {
    pub energy: Energy,
    pub coincident: Option<(usize, usize)>,
}

struct Acc {
    total: f64,
    max_pair: f64,
    max_container: f64,
    coincident: Option<(usize, usize)>,
}

#[inline(always)]
fn pair_term<const GRAD: bool>(
    acc: &mut Acc,
    i: usize,
    j: usize,
    xi: f64,
    yi: f64,
    c: &[f64],
    g: &mut [f64; 2],
) {
    let dx = xi - c[2 * j];
    let dy = yi - c[2 * j + 1];
    let q = dx * dx + dy * dy;
    if q < 4.0 {
        let dist = q.sqrt();
        let depth = 2.0 - dist;
        acc.total += depth * depth;
        if depth > acc.max_pair {
            acc.max_pair = depth;
        }
        if GRAD {
            if dist > 0.0 {
                // d(d²)/dx_i doubled: the pair also appears in U_j.
                let k = -4.0 * depth / dist;
                g[0] += k * dx;
                g[1] += k * dy;
            } else if acc.coincident.is_none() {
                acc.coincident = Some((i.min(j), i.max(j)));
            }
        }
    }
}

#[inline(always)]
fn container_term<const GRAD: bool>(acc: &mut Acc, xi: f64, yi: f64, radius: f64, g: &mut [f64; 2]) {
    let r = (xi * xi + yi * yi).sqrt();
    let depth = r + 1.0 - radius;
    if depth > 0.0 {
        acc.total += depth * depth;
        if depth > acc.max_container {
            acc.max_container = depth;
        }
        // At r = 0 the zero vector is a valid subgradient.
        if GRAD && r > 0.0 {
            let k = 2.0 * depth / r;
            g[0] += k * xi;
            g[1] += k * yi;
        }
    }
}

/// Shared kernel. With `GRAD = false` the gradient buffer is left untouched.
pub(crate) fn evaluate<const GRAD: bool>(
    coords: &[f64],
    radius: f64,
    scope: Scope<'_>,
    grad: &mut [f64],
) -> KernelOutput {
    let n = coords.len() / 2;
    let mut acc = Acc {
        total: 0.0,
        max_pair: 0.0,
        max_container: 0.0,
        coincident: None,
    };
    for i in 0..n {
        let xi = coords[2 * i];
        let yi = coords[2 * i + 1];
        let mut g = [0.0f64; 2];
        match scope {
            Scope::All => {
                container_term::<GRAD>(&mut acc, xi, yi, radius, &mut g);
                for j in 0..i {
                    pair_term::<GRAD>(&mut acc, i, j, xi, yi, coords, &mut g);
                }
                for j in (i + 1)..n {
                    pair_term::<GRAD>(&mut acc, i, j, xi, yi, coords, &mut g);
                }
            }
            Scope::Index(index) => {
                if index.container_adjacent[i] {
                    container_term::<GRAD>(&mut acc, xi, yi, radius, &mut g);
                }
                for &j in index.neighbors(i) {
                    pair_term::<GRAD>(&mut acc, i, j as usize, xi, yi, coords, &mut g);
                }
            }
        }
        if GRAD {
            grad[2 * i] = g[0];
            grad[2 * i + 1] = g[1];
        }
    }
    KernelOutput {
        energy: Energy {
            total: acc.total,
            max_pair_depth: acc.max_pair,
            max_container_depth: acc.max_container,
        },
        coincident: acc.coincident,
    }
}

pub(crate) fn energy_full(centers: &Centers, radius: f64) -> Energy {
    evaluate::<false>(centers.as_slice(), radius, Scope::All, &mut []).energy
}

fn with_gradient(centers: &Centers, radius: f64, scope: Scope<'_>) -> (Energy, Gradient) {
    let mut g = vec![0.0; centers.as_slice().len()];
    let out = evaluate::<true>(centers.as_slice(), radius, scope, &mut g);
    (out.energy, Gradient(g))
}

/// Exact energy and analytic gradient over every pair and container term.
pub fn energy_gradient_full(layout: &Layout) -> (Energy, Gradient) {
    with_gradient(layout.centers(), layout.radius(), Scope::All)
}

/// Energy and gradient restricted to the terms listed in `index`.
pub fn energy_gradient_local(layout: &Layout, index: &NeighborIndex) -> (Energy, Gradient) {
    assert_eq!(index.n(), layout.n(), "index built for a different layout size");
    with_gradient(layout.centers(), layout.radius(), Scope::Index(index))
}
