//! Procedural room-and-clutter maps for desk-scale deployments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Cell;
use crate::rng::SeededRng;

use super::map::WorldMap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MapGenConfig {
    pub width_m: f64,
    pub height_m: f64,
    pub resolution: f64,
    /// Rooms per axis; walls between rooms get one door each.
    pub rooms_x: usize,
    pub rooms_y: usize,
    pub door_width: f64,
    /// Rectangular obstacles scattered over the map.
    pub clutter_count: usize,
    pub clutter_min: f64,
    pub clutter_max: f64,
}

impl Default for MapGenConfig {
    fn default() -> Self {
        Self {
            width_m: 12.0,
            height_m: 12.0,
            resolution: 0.1,
            rooms_x: 2,
            rooms_y: 2,
            door_width: 0.8,
            clutter_count: 40,
            clutter_min: 0.2,
            clutter_max: 0.6,
        }
    }
}

impl MapGenConfig {
    fn cells(&self, meters: f64) -> usize {
        (meters / self.resolution).round().max(1.0) as usize
    }
}

pub fn generate_map(id: impl Into<String>, cfg: &MapGenConfig, rng: &mut SeededRng) -> Result<WorldMap> {
    if !(cfg.resolution > 0.0) || cfg.rooms_x == 0 || cfg.rooms_y == 0 || cfg.clutter_min > cfg.clutter_max {
        return Err(Error::config("map generator: bad resolution, room counts or clutter sizes"));
    }
    let (w, h) = (cfg.cells(cfg.width_m), cfg.cells(cfg.height_m));
    let mut map = WorldMap::empty(id, w, h, cfg.resolution)?;
    let fill = |map: &mut WorldMap, c0: usize, r0: usize, c1: usize, r1: usize, v: bool| {
        for r in r0..r1.min(h) {
            for c in c0..c1.min(w) {
                map.set(Cell::new(c, r), v);
            }
        }
    };
    fill(&mut map, 0, 0, w, 1, true);
    fill(&mut map, 0, h - 1, w, h, true);
    fill(&mut map, 0, 0, 1, h, true);
    fill(&mut map, w - 1, 0, w, h, true);

    for _ in 0..cfg.clutter_count {
        let bw = cfg.cells(rng.uniform(cfg.clutter_min, cfg.clutter_max));
        let bh = cfg.cells(rng.uniform(cfg.clutter_min, cfg.clutter_max));
        let c = 1 + rng.below(w.saturating_sub(bw + 1).max(1));
        let r = 1 + rng.below(h.saturating_sub(bh + 1).max(1));
        fill(&mut map, c, r, c + bw, r + bh, true);
    }

    // Interior walls with one door per room-to-room segment, carved last so
    // doors stay open.
    let door = cfg.cells(cfg.door_width);
    let xs: Vec<usize> = (0..=cfg.rooms_x).map(|i| i * (w - 1) / cfg.rooms_x).collect();
    let ys: Vec<usize> = (0..=cfg.rooms_y).map(|i| i * (h - 1) / cfg.rooms_y).collect();
    for &x in &xs[1..xs.len() - 1] {
        fill(&mut map, x, 0, x + 1, h, true);
        for seg in ys.windows(2) {
            let span = seg[1] - seg[0];
            if span > door + 2 {
                let at = seg[0] + 1 + rng.below(span - door - 1);
                fill(&mut map, x.saturating_sub(1), at, x + 2, at + door, false);
            }
        }
    }
    for &y in &ys[1..ys.len() - 1] {
        fill(&mut map, 0, y, w, y + 1, true);
        for seg in xs.windows(2) {
            let span = seg[1] - seg[0];
            if span > door + 2 {
                let at = seg[0] + 1 + rng.below(span - door - 1);
                fill(&mut map, at, y.saturating_sub(1), at + door, y + 2, false);
            }
        }
    }
    Ok(map)
}
