//! Overlap depths and the elastic energy of a layout.
//!
//! Energy is the sum over circles `i` of `U_i = Σ_{j≠i} d_ij² + d_0i²`: an
//! overlapping pair shows up in both `U_i` and `U_j`, so its squared depth
//! counts twice, while each container term counts once. The feasibility
//! threshold below is calibrated against that convention.

use crate::layout::{Centers, Layout};

/// A layout is feasible when its total energy is below this value.
pub const FEASIBILITY_THRESHOLD: f64 = 1e-20;

/// How far circle `center` sticks out of a container of radius `radius`.
pub fn container_depth(center: [f64; 2], radius: f64) -> f64 {
    let r = (center[0] * center[0] + center[1] * center[1]).sqrt();
    (r + 1.0 - radius).max(0.0)
}

/// Penetration depth of two unit circles; 2 for coincident centers.
pub fn pair_depth(a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (a[0] - b[0], a[1] - b[1]);
    (2.0 - (dx * dx + dy * dy).sqrt()).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Energy {
    pub total: f64,
    pub max_pair_depth: f64,
    pub max_container_depth: f64,
}

impl Energy {
    pub fn is_feasible(&self) -> bool {
        self.total < FEASIBILITY_THRESHOLD
    }

    pub fn max_depth(&self) -> f64 {
        self.max_pair_depth.max(self.max_container_depth)
    }
}

/// Exact energy over all pairs, for any positive container radius.
pub fn energy_at(centers: &Centers, radius: f64) -> Energy {
    crate::neighbor::energy_full(centers, radius)
}

pub fn total_energy(layout: &Layout) -> Energy {
    energy_at(layout.centers(), layout.radius())
}

pub fn is_feasible(layout: &Layout) -> bool {
    total_energy(layout).is_feasible()
}
