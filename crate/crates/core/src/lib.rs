//! Equal circle packing in a circular container.
//!
//! Unit circles are treated as elastic bodies inside a rigid container; the
//! squared overlap depths form an energy that is zero exactly on feasible
//! packings. The solver minimizes it with BFGS (optionally restricted to
//! per-circle neighbor lists), escapes stuck minima by briefly optimizing in
//! shrunken containers, and shrinks the container of a feasible packing by
//! probing plus bisection.

pub mod bench;
pub mod bfgs;
pub mod energy;
pub mod error;
pub mod io;
pub mod layout;
pub mod neighbor;
pub mod rng;
pub mod search;
pub mod svg;

pub use bfgs::{bfgs_minimize, BfgsSettings, Mode, OptimizeOutcome, OptimizeStatus};
pub use energy::{is_feasible, total_energy, Energy, FEASIBILITY_THRESHOLD};
pub use error::{IoError, LayoutError};
pub use layout::{random_layout, Centers, Layout};
pub use neighbor::NeighborIndex;
pub use rng::SolverRng;
pub use search::{container_adjust, global_search, qpqh_solve, SearchBudget, SolveReport, SolveStatus};
