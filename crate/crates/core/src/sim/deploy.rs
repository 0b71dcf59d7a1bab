//! Batch deployments on world maps, producing extraction-ready traces.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Pose;
use crate::grid::Cell;
use crate::rng::SeededRng;
use crate::trace::Trajectory;

use super::controller::PlannerParams;
use super::episode::{simulate_episode, NavigationTask, SimConfig};
use super::map::WorldMap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeployConfig {
    pub deployments_per_map: usize,
    /// Minimum start-goal distance, meters.
    pub min_separation: f64,
    pub max_pair_attempts: usize,
}

impl Default for DeployConfig {
    fn default() -> Self {
        Self {
            deployments_per_map: 100,
            min_separation: 5.0,
            max_pair_attempts: 1000,
        }
    }
}

/// 4-connected component label per cell; `u32::MAX` for occupied cells.
fn components(map: &WorldMap) -> Vec<u32> {
    let (w, h) = (map.width(), map.height());
    let mut label = vec![u32::MAX; w * h];
    let mut next = 0u32;
    let mut stack = Vec::new();
    for i in 0..w * h {
        if label[i] != u32::MAX || map.cells()[i] == 1 {
            continue;
        }
        label[i] = next;
        stack.push(i);
        while let Some(j) = stack.pop() {
            let (c, r) = ((j % w) as i64, (j / w) as i64);
            for (dc, dr) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                let (nc, nr) = (c + dc, r + dr);
                if map.occupied(nc, nr) {
                    continue;
                }
                let k = nr as usize * w + nc as usize;
                if label[k] == u32::MAX {
                    label[k] = next;
                    stack.push(k);
                }
            }
        }
        next += 1;
    }
    label
}

/// Draw a start pose and goal point in the same free component, at least
/// `min_separation` apart, each with room for the robot.
fn sample_pair(map: &WorldMap, labels: &[u32], cfg: &DeployConfig, sim: &SimConfig, rng: &mut SeededRng) -> Option<(Pose, (f64, f64))> {
    let (w, h) = (map.width(), map.height());
    let roomy = |c: Cell| {
        let (x, y) = map.cell_center(c);
        !map.disc_collides(x, y, sim.robot_radius)
    };
    for _ in 0..cfg.max_pair_attempts {
        let s = Cell::new(rng.below(w), rng.below(h));
        let g = Cell::new(rng.below(w), rng.below(h));
        let (ls, lg) = (labels[s.row * w + s.col], labels[g.row * w + g.col]);
        if ls == u32::MAX || ls != lg || !roomy(s) || !roomy(g) {
            continue;
        }
        let (sx, sy) = map.cell_center(s);
        let goal = map.cell_center(g);
        if (sx - goal.0).hypot(sy - goal.1) < cfg.min_separation {
            continue;
        }
        let theta = rng.uniform(-std::f64::consts::PI, std::f64::consts::PI);
        return Some((Pose::new(sx, sy, theta), goal));
    }
    None
}

/// Deploy `cfg.deployments_per_map` times on every map. Deployment `d` on map
/// `m` draws from `rng.derive2(m, d)`. Maps where no valid start-goal pair is
/// found within the attempt cap are skipped with a warning.
pub fn deploy_batch(maps: &[WorldMap], params: &PlannerParams, cfg: &DeployConfig, sim: &SimConfig, rng: &SeededRng) -> Result<Vec<Trajectory>> {
    if maps.is_empty() {
        return Err(Error::contract("no maps to deploy on"));
    }
    params.validate()?;
    sim.validate()?;
    if !(cfg.min_separation >= 0.0) || cfg.max_pair_attempts == 0 {
        return Err(Error::config("deploy config: bad min_separation or max_pair_attempts"));
    }
    let per_map: Vec<Vec<Trajectory>> = maps
        .par_iter()
        .enumerate()
        .map(|(m, map)| {
            let labels = components(map);
            let mut out = Vec::with_capacity(cfg.deployments_per_map);
            for d in 0..cfg.deployments_per_map {
                let mut r = rng.derive2(m as u64, d as u64);
                let Some((start, goal)) = sample_pair(map, &labels, cfg, sim, &mut r) else {
                    log::warn!("map {}: no start-goal pair {} m apart, skipping", map.id, cfg.min_separation);
                    return Vec::new();
                };
                let task = NavigationTask {
                    id: format!("{}-d{d:03}", map.id),
                    map,
                    start,
                    goal,
                };
                out.push(simulate_episode(&task, params, sim, &mut r).trajectory);
            }
            out
        })
        .collect();
    Ok(per_map.into_iter().flatten().collect())
}
