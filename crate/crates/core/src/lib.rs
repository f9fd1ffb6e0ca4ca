//! Risk-aware airspace modelling, single-aircraft track planning and
//! conflict-free fleet scheduling for urban air mobility.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, plotting and
//! the command-line driver live in the `uam-tools` companion crate.
//!
//! Pipeline overview:
//!
//! 1. [`grid`] and [`scene`] discretize the urban volume into `(i, j, k)` cells
//!    and hold buildings, ground densities and no-fly volumes.
//! 2. [`risk`] turns a scene into a [`risk::RiskMap`]: continuous expected
//!    harm per cell plus the binary safe/unsafe flag.
//! 3. [`planner`] searches the risk map for a track that balances risk and
//!    energy cost, then straightens and smooths it.
//! 4. [`fleet`] detects cell-occupancy conflicts between flights and
//!    optimizes the fleet schedule with an annealing-enhanced genetic algorithm.
#![no_std]
// `!(x > 0.0)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod fleet;
pub mod grid;
pub(crate) mod math;
pub mod planner;
pub mod risk;
pub mod scene;

pub use grid::{CellBox, CellIndex, GridError, GridSpec, Point3};
pub use risk::{RiskMap, RiskParams};
pub use scene::UrbanScene;
