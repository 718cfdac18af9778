//! Look allocation toolkit for satellite surveillance planning.
//!
//! A [`Scenario`] describes grid cells, their penalty curves, the sensors and
//! the swaths they fly. From it the crate can
//!
//! * build the look optimization MILP and export it as MPS or LP text
//!   ([`model`]),
//! * run the greedy baseline that ranks covered cells by pending penalty
//!   ([`heuristic`]),
//! * solve desk-scale instances exactly by depth-first search ([`oracle`]),
//! * simulate any [`LookPlan`] and report coverage and penalties
//!   ([`evaluate`]),
//! * generate seeded synthetic scenarios ([`generator`]).
//!
//! Data-parallel loops (penalty tables, coverage sets, per-cell model rows,
//! root-level oracle search) run on rayon when the `parallel` feature is
//! enabled. Every such entry point also has a `*_with` form taking an
//! [`Execution`] so both paths can be compared directly.

// `!(x > 0.0)` is how validation rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Swath loops index several parallel arrays by the same 1-based position.
#![allow(clippy::needless_range_loop)]

mod error;
mod exec;

pub mod evaluate;
pub mod fixtures;
pub mod generator;
pub mod geometry;
pub mod heuristic;
pub mod model;
pub mod oracle;
pub mod plan;
pub mod scenario;

pub use error::{Error, Result};
pub use exec::Execution;
pub use plan::{Look, LookPlan};
pub use scenario::{PenaltyTable, Scenario};
