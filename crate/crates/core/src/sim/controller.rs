//! Sampled-rollout local planner.
//!
//! Each step draws `sample_count` (v, ω) commands, rolls every one out for
//! a short horizon against the map and keeps the cheapest collision-free one.
//! Cost combines distance and heading to a lookahead target, distance to
//! obstacles, and speed. The weights are a stand-in for a tuned DWA.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{normalize_angle, Pose};
use crate::rng::SeededRng;

use super::episode::SimConfig;
use super::map::WorldMap;

const W_DISTANCE: f64 = 1.0;
const W_HEADING: f64 = 0.4;
const W_CLEARANCE: f64 = 0.3;
const W_SPEED: f64 = 0.2;
/// Proportional gain of the heading-aligned candidate.
const STEER_GAIN: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlannerParams {
    pub max_linear_velocity: f64,
    pub max_angular_velocity: f64,
    pub sample_count: usize,
    pub inflation_radius: f64,
    pub recovery_reverse_velocity: f64,
}

impl Default for PlannerParams {
    fn default() -> Self {
        Self::dwa_slow()
    }
}

impl PlannerParams {
    pub fn dwa_slow() -> Self {
        Self {
            max_linear_velocity: 0.5,
            max_angular_velocity: 1.5,
            sample_count: 10,
            inflation_radius: 0.15,
            recovery_reverse_velocity: -0.1,
        }
    }

    /// Twice the top speed and twice the samples of [`Self::dwa_slow`].
    pub fn dwa_fast() -> Self {
        Self {
            max_linear_velocity: 1.0,
            sample_count: 20,
            ..Self::dwa_slow()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::config(format!("planner params: {m}")));
        if !(self.max_linear_velocity > 0.0) || !self.max_linear_velocity.is_finite() {
            return bad("max_linear_velocity must be positive");
        }
        if !(self.max_angular_velocity > 0.0) || !self.max_angular_velocity.is_finite() {
            return bad("max_angular_velocity must be positive");
        }
        if self.sample_count == 0 {
            return bad("sample_count must be positive");
        }
        if !(self.inflation_radius >= 0.0) || !self.inflation_radius.is_finite() {
            return bad("inflation_radius must be non-negative");
        }
        if !(self.recovery_reverse_velocity < 0.0) {
            return bad("recovery_reverse_velocity must be negative");
        }
        if -self.recovery_reverse_velocity > self.max_linear_velocity {
            return bad("recovery speed exceeds max_linear_velocity");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlState {
    pub pose: Pose,
    pub v: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Command {
    pub v: f64,
    pub omega: f64,
    pub suboptimal: u8,
}

/// Exact unicycle motion for `dt` seconds.
pub fn integrate(pose: &Pose, v: f64, omega: f64, dt: f64) -> Pose {
    if omega.abs() < 1e-9 {
        Pose::new(pose.x + v * dt * pose.theta.cos(), pose.y + v * dt * pose.theta.sin(), pose.theta)
    } else {
        let th = pose.theta + omega * dt;
        let r = v / omega;
        Pose::new(
            pose.x + r * (th.sin() - pose.theta.sin()),
            pose.y - r * (th.cos() - pose.theta.cos()),
            th,
        )
    }
}

struct Rollout {
    end: Pose,
    clearance: f64,
    reached_goal: bool,
}

/// Forward-simulate a constant command. `None` if the disc collides.
fn rollout(map: &WorldMap, start: &Pose, v: f64, omega: f64, cfg: &SimConfig, goal: (f64, f64), cap: f64) -> Option<Rollout> {
    let n = (cfg.horizon / cfg.rollout_substep).ceil().max(1.0) as usize;
    let dt = cfg.horizon / n as f64;
    let r = cfg.robot_radius;
    let mut pose = *start;
    let mut clearance = cap;
    for _ in 0..n {
        pose = integrate(&pose, v, omega, dt);
        let c = map.clearance(pose.x, pose.y, cap + r) - r;
        if c < 0.0 {
            return None;
        }
        clearance = clearance.min(c);
        if (pose.x - goal.0).hypot(pose.y - goal.1) <= cfg.goal_tolerance {
            return Some(Rollout { end: pose, clearance, reached_goal: true });
        }
    }
    Some(Rollout { end: pose, clearance, reached_goal: false })
}

fn heading_error(pose: &Pose, target: (f64, f64)) -> f64 {
    normalize_angle((target.1 - pose.y).atan2(target.0 - pose.x) - pose.theta)
}

/// The recovery command: back up while turning toward the target.
pub fn recovery_command(state: &ControlState, params: &PlannerParams, target: (f64, f64)) -> Command {
    let turn = heading_error(&state.pose, target).signum() * 0.5 * params.max_angular_velocity;
    Command {
        v: params.recovery_reverse_velocity,
        omega: turn,
        suboptimal: 1,
    }
}

/// Pick a command toward `target`. Falls back to [`recovery_command`] with
/// flag 1 when every sampled rollout collides.
pub fn step_controller(
    state: &ControlState,
    params: &PlannerParams,
    cfg: &SimConfig,
    map: &WorldMap,
    target: (f64, f64),
    goal: (f64, f64),
    rng: &mut SeededRng,
) -> Command {
    let vmax = params.max_linear_velocity;
    let wmax = params.max_angular_velocity;
    let vmin = cfg.min_speed_fraction * vmax;
    let cap = params.inflation_radius.max(1e-6);
    let err = heading_error(&state.pose, target);
    let mut best: Option<(f64, Command)> = None;
    for i in 0..params.sample_count {
        let (v, omega) = if i == 0 {
            ((vmax * err.cos()).clamp(vmin, vmax), (STEER_GAIN * err).clamp(-wmax, wmax))
        } else {
            (rng.uniform(vmin, vmax), rng.uniform(-wmax, wmax))
        };
        let Some(ro) = rollout(map, &state.pose, v, omega, cfg, goal, cap) else {
            continue;
        };
        let cost = if ro.reached_goal {
            -W_SPEED * v / vmax - 10.0
        } else {
            let dist = (target.0 - ro.end.x).hypot(target.1 - ro.end.y);
            let head = heading_error(&ro.end, target).abs() / std::f64::consts::PI;
            W_DISTANCE * dist + W_HEADING * head + W_CLEARANCE * (1.0 - ro.clearance / cap) - W_SPEED * v / vmax
        };
        if best.as_ref().is_none_or(|(c, _)| cost < *c) {
            best = Some((cost, Command { v, omega, suboptimal: 0 }));
        }
    }
    match best {
        Some((_, cmd)) => cmd,
        None => recovery_command(state, params, target),
    }
}
