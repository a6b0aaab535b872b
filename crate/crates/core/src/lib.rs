//! Executable generalized Kac lemmas.
//!
//! The crate builds allocations for probability-preserving group actions,
//! computes their cells (including Voronoi-type cells on `Z^d`), and checks
//! the associated integral identities exactly on finite systems and
//! statistically on sampled ergodic systems.

pub mod allocation;
pub mod cli;
pub mod estimate;
pub mod exact;
pub mod generator;
pub mod group;
pub mod relation;
pub mod system;
pub mod voronoi;
