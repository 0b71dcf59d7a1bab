//! Grid ray casting.

use crate::geometry::Pose;
use crate::trace::beam_offset;

use super::map::WorldMap;

/// Ranges are rounded to this step so traces serialize compactly.
pub const RANGE_QUANTUM: f64 = 1e-3;

/// Distance along the ray from `(x, y)` at `angle` to the first occupied
/// cell, or `max_range` if there is none that close.
pub fn cast_ray(map: &WorldMap, x: f64, y: f64, angle: f64, max_range: f64) -> f64 {
    let res = map.resolution();
    let (mut col, mut row) = map.cell_coords(x, y);
    if map.occupied(col, row) {
        return 0.0;
    }
    let (dx, dy) = (angle.cos(), angle.sin());
    let step_c: i64 = if dx > 0.0 { 1 } else { -1 };
    let step_r: i64 = if dy > 0.0 { 1 } else { -1 };
    let next_boundary = |p: f64, cell: i64, step: i64| {
        if step > 0 {
            (cell + 1) as f64 * res - p
        } else {
            p - cell as f64 * res
        }
    };
    let mut t_c = if dx.abs() < 1e-15 { f64::INFINITY } else { next_boundary(x, col, step_c) / dx.abs() };
    let mut t_r = if dy.abs() < 1e-15 { f64::INFINITY } else { next_boundary(y, row, step_r) / dy.abs() };
    let dt_c = if dx.abs() < 1e-15 { f64::INFINITY } else { res / dx.abs() };
    let dt_r = if dy.abs() < 1e-15 { f64::INFINITY } else { res / dy.abs() };
    loop {
        let t = if t_c < t_r {
            col += step_c;
            let t = t_c;
            t_c += dt_c;
            t
        } else {
            row += step_r;
            let t = t_r;
            t_r += dt_r;
            t
        };
        if t >= max_range {
            return max_range;
        }
        if map.occupied(col, row) {
            return t;
        }
    }
}

pub fn quantize(range: f64, max_range: f64) -> f64 {
    ((range / RANGE_QUANTUM).round() * RANGE_QUANTUM).min(max_range)
}

/// Full scan in the trace convention: beam `i` at `theta + beam_offset(i)`.
pub fn scan(map: &WorldMap, pose: &Pose, beam_count: usize, max_range: f64) -> Vec<f64> {
    (0..beam_count)
        .map(|i| {
            let a = pose.theta + beam_offset(i, beam_count);
            quantize(cast_ray(map, pose.x, pose.y, a, max_range), max_range)
        })
        .collect()
}
