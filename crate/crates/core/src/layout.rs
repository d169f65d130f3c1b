//! Circle centers and container radius.
//!
//! Centers are stored as the flat configuration vector
//! `(x1, y1, x2, y2, ..., xn, yn)` because that is the vector the optimizer
//! works on. All geometry is expressed in units of the circle radius.

use crate::error::LayoutError;
use crate::rng::SolverRng;

/// The `2n` coordinates of `n` unit-circle centers, without a container.
///
/// This is what basin hopping hands around: the container radius is supplied
/// separately by whoever optimizes the coordinates next.
#[derive(Debug, Clone, PartialEq)]
pub struct Centers(Vec<f64>);

impl Centers {
    pub fn from_flat(coords: Vec<f64>) -> Result<Self, LayoutError> {
        if coords.is_empty() {
            return Err(LayoutError::Empty);
        }
        if !coords.len().is_multiple_of(2) {
            return Err(LayoutError::OddLength(coords.len()));
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(LayoutError::NonFinite(i));
        }
        Ok(Self(coords))
    }

    pub fn from_points(points: &[[f64; 2]]) -> Result<Self, LayoutError> {
        Self::from_flat(points.iter().flat_map(|p| [p[0], p[1]]).collect())
    }

    pub fn n(&self) -> usize {
        self.0.len() / 2
    }

    pub fn point(&self, i: usize) -> [f64; 2] {
        [self.0[2 * i], self.0[2 * i + 1]]
    }

    pub fn points(&self) -> impl Iterator<Item = [f64; 2]> + '_ {
        self.0.chunks_exact(2).map(|c| [c[0], c[1]])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Rotates every center about the origin by `angle` radians.
    pub fn rotated(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self(
            self.points()
                .flat_map(|[x, y]| [c * x - s * y, s * x + c * y])
                .collect(),
        )
    }
}

/// A packing candidate: `n` unit circles plus a container of radius `R ≥ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    centers: Centers,
    radius: f64,
}

impl Layout {
    pub fn new(centers: Centers, radius: f64) -> Result<Self, LayoutError> {
        if !radius.is_finite() || radius < 1.0 {
            return Err(LayoutError::Radius(radius));
        }
        Ok(Self { centers, radius })
    }

    pub fn from_points(points: &[[f64; 2]], radius: f64) -> Result<Self, LayoutError> {
        Self::new(Centers::from_points(points)?, radius)
    }

    pub fn n(&self) -> usize {
        self.centers.n()
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn centers(&self) -> &Centers {
        &self.centers
    }

    pub fn into_centers(self) -> Centers {
        self.centers
    }

    pub fn with_radius(&self, radius: f64) -> Result<Self, LayoutError> {
        Self::new(self.centers.clone(), radius)
    }
}

/// Draws `n` centers independently and uniformly over the disk of radius
/// `max(R - 1, 0)`, so every circle starts inside the container.
pub fn random_layout(n: usize, radius: f64, rng: &mut SolverRng) -> Result<Layout, LayoutError> {
    if n == 0 {
        return Err(LayoutError::Empty);
    }
    if !radius.is_finite() || radius < 1.0 {
        return Err(LayoutError::Radius(radius));
    }
    let support = (radius - 1.0).max(0.0);
    let coords = (0..n).flat_map(|_| rng.point_in_disk(support)).collect();
    Layout::new(Centers::from_flat(coords)?, radius)
}
