//! Reachability and global planning on cell maps.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use crate::error::{Error, Result};
use crate::grid::{Cell, OccupancyGrid, GOAL_CELL, START_CELL};

use super::map::WorldMap;

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// 4-connected breadth-first reachability. Occupied endpoints give `false`.
pub fn is_navigable(map: &WorldMap, start: Cell, goal: Cell) -> bool {
    if !map.is_free(start) || !map.is_free(goal) {
        return false;
    }
    let (w, h) = (map.width(), map.height());
    let mut seen = vec![false; w * h];
    let mut queue = VecDeque::from([start]);
    seen[start.row * w + start.col] = true;
    while let Some(c) = queue.pop_front() {
        if c == goal {
            return true;
        }
        let (col, row) = (c.col as i64, c.row as i64);
        for (dc, dr) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            let (nc, nr) = (col + dc, row + dr);
            if map.occupied(nc, nr) {
                continue;
            }
            let i = nr as usize * w + nc as usize;
            if !seen[i] {
                seen[i] = true;
                queue.push_back(Cell::new(nc as usize, nr as usize));
            }
        }
    }
    false
}

/// Navigability of a scenario grid between its fixed start and goal cells.
pub fn is_navigable_grid(grid: &OccupancyGrid) -> bool {
    is_navigable(&WorldMap::from_grid("grid", grid), START_CELL, GOAL_CELL)
}

/// Cells whose center lies within `radius` of an occupied cell, plus the
/// occupied cells themselves. `exempt` cells are never blocked by inflation.
pub fn inflate(map: &WorldMap, radius: f64, exempt: &[Cell]) -> Vec<bool> {
    let (w, h) = (map.width(), map.height());
    let mut blocked = vec![false; w * h];
    for row in 0..h {
        for col in 0..w {
            let cell = Cell::new(col, row);
            blocked[row * w + col] = if !map.is_free(cell) {
                true
            } else if radius > 0.0 && !exempt.contains(&cell) {
                let (x, y) = map.cell_center(cell);
                // Map edges are walls for the robot, but not for inflation:
                // only real occupied cells push the path away.
                inflated_by_cells(map, x, y, radius)
            } else {
                false
            };
        }
    }
    blocked
}

fn inflated_by_cells(map: &WorldMap, x: f64, y: f64, radius: f64) -> bool {
    let res = map.resolution();
    let (c0, r0) = map.cell_coords(x - radius, y - radius);
    let (c1, r1) = map.cell_coords(x + radius, y + radius);
    for r in r0.max(0)..=r1.min(map.height() as i64 - 1) {
        for c in c0.max(0)..=c1.min(map.width() as i64 - 1) {
            if !map.occupied(c, r) {
                continue;
            }
            let (xl, yl) = (c as f64 * res, r as f64 * res);
            let dx = (xl - x).max(0.0).max(x - (xl + res));
            let dy = (yl - y).max(0.0).max(y - (yl + res));
            if dx.hypot(dy) < radius {
                return true;
            }
        }
    }
    false
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalPath {
    pub cells: Vec<Cell>,
    /// Path length in cell units (1 per straight move, √2 per diagonal).
    pub cost: f64,
}

impl GlobalPath {
    /// Waypoints at cell centers, in meters.
    pub fn waypoints(&self, map: &WorldMap) -> Vec<(f64, f64)> {
        self.cells.iter().map(|&c| map.cell_center(c)).collect()
    }
}

#[derive(PartialEq)]
struct Open {
    f: f64,
    cell: Cell,
}

impl Eq for Open {}

impl Ord for Open {
    // Reversed for a min-heap on (f, row, col).
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then(other.cell.row.cmp(&self.cell.row))
            .then(other.cell.col.cmp(&self.cell.col))
    }
}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A* over `blocked` (row-major, width `w`) with 8-connectivity. Diagonal
/// moves may not cut a blocked corner.
pub fn astar(blocked: &[bool], w: usize, h: usize, start: Cell, goal: Cell) -> Result<GlobalPath> {
    let unreachable = Error::Unreachable {
        start: (start.col, start.row),
        goal: (goal.col, goal.row),
    };
    let idx = |c: Cell| c.row * w + c.col;
    if blocked[idx(start)] || blocked[idx(goal)] {
        return Err(unreachable);
    }
    let heuristic = |c: Cell| {
        let dx = c.col as f64 - goal.col as f64;
        let dy = c.row as f64 - goal.row as f64;
        dx.hypot(dy)
    };
    let free = |c: i64, r: i64| c >= 0 && r >= 0 && (c as usize) < w && (r as usize) < h && !blocked[r as usize * w + c as usize];
    let mut g = vec![f64::INFINITY; w * h];
    let mut parent = vec![usize::MAX; w * h];
    let mut closed = vec![false; w * h];
    let mut open = BinaryHeap::new();
    g[idx(start)] = 0.0;
    open.push(Open { f: heuristic(start), cell: start });
    while let Some(Open { cell, .. }) = open.pop() {
        let ci = idx(cell);
        if closed[ci] {
            continue;
        }
        closed[ci] = true;
        if cell == goal {
            let mut cells = vec![goal];
            let mut i = ci;
            while parent[i] != usize::MAX {
                i = parent[i];
                cells.push(Cell::new(i % w, i / w));
            }
            cells.reverse();
            return Ok(GlobalPath { cells, cost: g[ci] });
        }
        let (col, row) = (cell.col as i64, cell.row as i64);
        for dr in -1i64..=1 {
            for dc in -1i64..=1 {
                if dr == 0 && dc == 0 {
                    continue;
                }
                let (nc, nr) = (col + dc, row + dr);
                if !free(nc, nr) {
                    continue;
                }
                let diagonal = dr != 0 && dc != 0;
                if diagonal && (!free(col + dc, row) || !free(col, row + dr)) {
                    continue;
                }
                let next = Cell::new(nc as usize, nr as usize);
                let ni = idx(next);
                if closed[ni] {
                    continue;
                }
                let cand = g[ci] + if diagonal { SQRT2 } else { 1.0 };
                if cand < g[ni] {
                    g[ni] = cand;
                    parent[ni] = ci;
                    open.push(Open { f: cand + heuristic(next), cell: next });
                }
            }
        }
    }
    Err(unreachable)
}

/// Shortest 8-connected path with obstacles inflated by `inflation_radius`.
/// The start and goal cells are exempt from inflation.
pub fn plan_global(map: &WorldMap, start: Cell, goal: Cell, inflation_radius: f64) -> Result<GlobalPath> {
    for c in [start, goal] {
        if c.col >= map.width() || c.row >= map.height() {
            return Err(Error::contract(format!("cell {c:?} is outside the map")));
        }
    }
    let blocked = inflate(map, inflation_radius, &[start, goal]);
    astar(&blocked, map.width(), map.height(), start, goal)
}
