use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Pose;
use crate::grid::{OccupancyGrid, GOAL_CELL, START_CELL};
use crate::rng::SeededRng;
use crate::trace::{StepRecord, TraceHeader, Trajectory};

use super::controller::{integrate, recovery_command, step_controller, Command, ControlState, PlannerParams};
use super::lidar;
use super::map::WorldMap;
use super::nav::{is_navigable, plan_global, GlobalPath};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Control period in seconds.
    pub timestep: f64,
    pub beam_count: usize,
    pub max_range: f64,
    pub goal_tolerance: f64,
    pub max_steps: usize,
    pub robot_radius: f64,
    /// Rollout length of the local planner, seconds.
    pub horizon: f64,
    pub rollout_substep: f64,
    /// Slowest sampled forward speed as a fraction of the maximum.
    pub min_speed_fraction: f64,
    /// Distance along the global path to the local target, meters.
    pub lookahead: f64,
    pub replan_interval: usize,
    /// Steps a triggered recovery keeps backing up.
    pub recovery_steps: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            timestep: 0.1,
            beam_count: 360,
            max_range: 10.0,
            goal_tolerance: 0.3,
            max_steps: 1000,
            robot_radius: 0.075,
            horizon: 1.5,
            rollout_substep: 0.05,
            min_speed_fraction: 0.1,
            lookahead: 0.6,
            replan_interval: 20,
            recovery_steps: 10,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("timestep", self.timestep),
            ("max_range", self.max_range),
            ("goal_tolerance", self.goal_tolerance),
            ("robot_radius", self.robot_radius),
            ("horizon", self.horizon),
            ("rollout_substep", self.rollout_substep),
            ("min_speed_fraction", self.min_speed_fraction),
            ("lookahead", self.lookahead),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::config(format!("sim config: {name} must be positive")));
            }
        }
        if self.min_speed_fraction > 1.0 {
            return Err(Error::config("sim config: min_speed_fraction must be at most 1"));
        }
        for (name, v) in [
            ("beam_count", self.beam_count),
            ("max_steps", self.max_steps),
            ("replan_interval", self.replan_interval),
            ("recovery_steps", self.recovery_steps),
        ] {
            if v == 0 {
                return Err(Error::config(format!("sim config: {name} must be positive")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct NavigationTask<'a> {
    pub id: String,
    pub map: &'a WorldMap,
    pub start: Pose,
    pub goal: (f64, f64),
}

impl<'a> NavigationTask<'a> {
    /// Scenario task on a grid map: start at the bottom-middle cell facing
    /// the goal at the top-middle cell.
    pub fn scenario(id: impl Into<String>, map: &'a WorldMap) -> Self {
        let (sx, sy) = map.cell_center(START_CELL);
        Self {
            id: id.into(),
            map,
            start: Pose::new(sx, sy, std::f64::consts::FRAC_PI_2),
            goal: map.cell_center(GOAL_CELL),
        }
    }
}

/// Convenience wrapper owning the map built from a scenario grid.
pub fn scenario_map(id: &str, grid: &OccupancyGrid) -> WorldMap {
    WorldMap::from_grid(id, grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Success,
    Collision,
    Timeout,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    pub trajectory: Trajectory,
    pub outcome: Outcome,
    pub time_cost: f64,
    pub suboptimal_total: u64,
    /// Number of control steps taken.
    pub steps: usize,
}

fn lookahead_target(path: &[(f64, f64)], progress: &mut usize, pose: &Pose, lookahead: f64, goal: (f64, f64)) -> (f64, f64) {
    if path.is_empty() {
        return goal;
    }
    let d = |p: &(f64, f64)| (p.0 - pose.x).hypot(p.1 - pose.y);
    let nearest = (*progress..path.len())
        .min_by(|&a, &b| d(&path[a]).total_cmp(&d(&path[b])))
        .unwrap_or(*progress);
    *progress = nearest;
    path[nearest..]
        .iter()
        .find(|p| d(p) >= lookahead)
        .copied()
        .unwrap_or(goal)
}

fn plan_waypoints(map: &WorldMap, from: &Pose, goal: (f64, f64), inflation: f64) -> Option<Vec<(f64, f64)>> {
    let s = map.cell_of(from.x, from.y)?;
    let g = map.cell_of(goal.0, goal.1)?;
    let path: GlobalPath = plan_global(map, s, g, inflation)
        .or_else(|_| plan_global(map, s, g, 0.0))
        .ok()?;
    let mut wps = path.waypoints(map);
    if let Some(last) = wps.last_mut() {
        *last = goal;
    }
    Some(wps)
}

/// Closed-loop simulation without the navigability precondition.
pub fn simulate_episode(task: &NavigationTask<'_>, params: &PlannerParams, cfg: &SimConfig, rng: &mut SeededRng) -> EpisodeResult {
    let map = task.map;
    let goal = task.goal;
    let dt = cfg.timestep;
    let mut state = ControlState { pose: task.start, v: 0.0, omega: 0.0 };
    let mut path = plan_waypoints(map, &state.pose, goal, params.inflation_radius).unwrap_or_default();
    let mut progress = 0usize;
    let mut recovering = 0usize;
    let mut records = Vec::new();
    let mut suboptimal_total = 0u64;
    let mut outcome = Outcome::Timeout;
    let at_goal = |p: &Pose| (p.x - goal.0).hypot(p.y - goal.1) <= cfg.goal_tolerance;

    if map.disc_collides(state.pose.x, state.pose.y, cfg.robot_radius) {
        outcome = Outcome::Collision;
    } else {
        for k in 0..cfg.max_steps {
            if at_goal(&state.pose) {
                outcome = Outcome::Success;
                break;
            }
            if k > 0 && k % cfg.replan_interval == 0 {
                if let Some(p) = plan_waypoints(map, &state.pose, goal, params.inflation_radius) {
                    path = p;
                    progress = 0;
                }
            }
            let scan = lidar::scan(map, &state.pose, cfg.beam_count, cfg.max_range);
            let target = lookahead_target(&path, &mut progress, &state.pose, cfg.lookahead, goal);
            let cmd: Command = if recovering > 0 {
                recovering -= 1;
                recovery_command(&state, params, target)
            } else {
                let c = step_controller(&state, params, cfg, map, target, goal, rng);
                if c.suboptimal == 1 {
                    recovering = cfg.recovery_steps - 1;
                }
                c
            };
            records.push(StepRecord {
                scan,
                pose: state.pose,
                suboptimal: cmd.suboptimal,
            });
            suboptimal_total += cmd.suboptimal as u64;
            let next = integrate(&state.pose, cmd.v, cmd.omega, dt);
            let collides = map.disc_collides(next.x, next.y, cfg.robot_radius);
            if cmd.v < 0.0 {
                // Backing up is only executed when it is safe; otherwise the
                // robot holds still and the recovery ends.
                if collides {
                    recovering = 0;
                    state = ControlState { pose: state.pose, v: 0.0, omega: 0.0 };
                    continue;
                }
            } else if collides {
                state = ControlState { pose: next, v: cmd.v, omega: cmd.omega };
                outcome = Outcome::Collision;
                break;
            }
            state = ControlState { pose: next, v: cmd.v, omega: cmd.omega };
        }
        if outcome == Outcome::Timeout && at_goal(&state.pose) {
            outcome = Outcome::Success;
        }
    }
    let steps = records.len();
    records.push(StepRecord {
        scan: lidar::scan(map, &state.pose, cfg.beam_count, cfg.max_range),
        pose: state.pose,
        suboptimal: 0,
    });
    let trajectory = Trajectory {
        header: TraceHeader {
            deployment_id: task.id.clone(),
            map_id: map.id.clone(),
            beam_count: cfg.beam_count,
            max_range: cfg.max_range,
        },
        steps: records,
    };
    EpisodeResult {
        trajectory,
        outcome,
        time_cost: steps as f64 * dt,
        suboptimal_total,
        steps,
    }
}

/// Run one episode. The task must be navigable between the cells holding its
/// start and goal.
pub fn run_episode(task: &NavigationTask<'_>, params: &PlannerParams, cfg: &SimConfig, rng: &mut SeededRng) -> Result<EpisodeResult> {
    params.validate()?;
    cfg.validate()?;
    let map = task.map;
    let cells = (map.cell_of(task.start.x, task.start.y), map.cell_of(task.goal.0, task.goal.1));
    let (Some(s), Some(g)) = cells else {
        return Err(Error::contract(format!("task {} has a start or goal outside the map", task.id)));
    };
    if !task.start.is_finite() || !is_navigable(map, s, g) {
        return Err(Error::contract(format!("task {} is not navigable", task.id)));
    }
    Ok(simulate_episode(task, params, cfg, rng))
}
