//! Scenario mining and training-environment synthesis for grid-based robot
//! navigation.
//!
//! The crate is organised around the stages of the pipeline:
//!
//! - [`grid`], [`geometry`], [`trace`], [`envset`] and [`rng`] hold the shared
//!   domain types and their on-disk formats.
//! - [`extraction`] segments deployment traces into fixed-displacement
//!   scenarios, rasterizes each one into a re-oriented 30×30 occupancy grid and
//!   keeps the ones with many recovery behaviors.
//! - [`gan`], [`cluster`] and [`uniform`] turn the challenging set into a small
//!   representative training set.
//! - [`sim`] is a 2D differential-drive simulator that produces traces and
//!   scores planner parameters on environment sets.
//! - [`pipeline`] wires the stages together for the `envsynth` CLI.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cluster;
pub mod envset;
pub mod error;
pub mod extraction;
pub mod gan;
pub mod geometry;
pub mod grid;
pub mod pipeline;
pub mod rng;
pub mod sim;
pub mod trace;
pub mod uniform;

mod checkpoint;

pub use envset::{EnvEntry, EnvironmentSet, Provenance, SetKind};
pub use error::{Error, ErrorClass, Result};
pub use geometry::{euclidean, Pose};
pub use grid::{OccupancyGrid, GRID_CELLS, GRID_EXTENT, GRID_SIZE};
pub use rng::SeededRng;
pub use trace::{StepRecord, Trajectory};
