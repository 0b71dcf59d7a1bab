//! Desk-scale 2D deployment simulator.
//!
//! A differential-drive disc robot with a planar lidar runs on occupancy maps
//! under a sampled-rollout local planner. The simulator produces deployment
//! traces for extraction and scores planner parameters on environment sets.

pub mod controller;
pub mod deploy;
pub mod episode;
pub mod evaluate;
pub mod lidar;
pub mod map;
pub mod mapgen;
pub mod nav;

pub use controller::{step_controller, ControlState, PlannerParams};
pub use deploy::{deploy_batch, DeployConfig};
pub use episode::{run_episode, simulate_episode, EpisodeResult, NavigationTask, Outcome, SimConfig};
pub use evaluate::{evaluate, EnvMetrics, EvaluationReport};
pub use map::WorldMap;
pub use nav::{is_navigable, is_navigable_grid, plan_global, GlobalPath};
