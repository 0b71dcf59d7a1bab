//! Scenario mining from deployment traces.
//!
//! A trajectory is cut into scenarios by displacement: starting from an
//! initial step, steps are accumulated until one lies more than
//! `segment_length` meters (straight-line) from the initial step. That step
//! closes the scenario and opens the next one. Each scenario is rasterized
//! into an [`OccupancyGrid`] in a frame where the start sits at the
//! bottom-middle and the goal straight above it, and carries the number of
//! recovery (negative-velocity) steps it contains.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::envset::{EnvEntry, EnvironmentSet, Provenance, SetKind};
use crate::error::{Error, Result};
use crate::geometry::euclidean;
use crate::grid::{OccupancyGrid, GRID_EXTENT, GRID_SIZE};
use crate::trace::{beam_offset, StepRecord, Trajectory};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionConfig {
    /// Start-to-final displacement that closes a scenario, meters.
    pub segment_length: f64,
    /// Scenarios with strictly more suboptimal steps than this are challenging.
    pub difficulty_threshold: u64,
    /// Readings at or beyond this range are treated as no return.
    pub max_range: f64,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        Self {
            segment_length: 5.0,
            difficulty_threshold: 50,
            max_range: 10.0,
        }
    }
}

impl ExtractionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.segment_length > 0.0) {
            return Err(Error::config("segment_length must be > 0"));
        }
        if !(self.max_range > 0.0) {
            return Err(Error::config("max_range must be > 0"));
        }
        Ok(())
    }
}

/// A contiguous run of steps `initial_index..=final_index` of one trajectory.
#[derive(Debug, Clone, Copy)]
pub struct Scenario<'a> {
    pub trajectory: &'a Trajectory,
    pub initial_index: usize,
    pub final_index: usize,
    pub suboptimal_total: u64,
}

impl<'a> Scenario<'a> {
    pub fn steps(&self) -> &'a [StepRecord] {
        &self.trajectory.steps[self.initial_index..=self.final_index]
    }
}

pub fn segment_trajectory<'a>(traj: &'a Trajectory, cfg: &ExtractionConfig) -> Vec<Scenario<'a>> {
    let mut out = Vec::new();
    let mut initial = 0usize;
    for (k, step) in traj.steps.iter().enumerate().skip(1) {
        if euclidean(&step.pose, &traj.steps[initial].pose) > cfg.segment_length {
            let steps = &traj.steps[initial..=k];
            out.push(Scenario {
                trajectory: traj,
                initial_index: initial,
                final_index: k,
                suboptimal_total: steps.iter().map(|s| u64::from(s.suboptimal)).sum(),
            });
            initial = k;
        }
    }
    out
}

/// Sum of per-step suboptimal flags, boundary steps included.
pub fn aggregate_suboptimal(steps: &[StepRecord]) -> Result<u64> {
    if steps.is_empty() {
        return Err(Error::contract("cannot aggregate an empty scenario"));
    }
    Ok(steps.iter().map(|s| u64::from(s.suboptimal)).sum())
}

/// Rigid transform from world coordinates to the scenario frame: the start
/// maps to `(extent/2, 0)` and the start→goal direction maps to +y.
#[derive(Debug, Clone, Copy)]
pub struct ScenarioFrame {
    origin: (f64, f64),
    // Rotation rows: [[cos, -sin], [sin, cos]] with (cos, sin) = (u_y, u_x).
    cos: f64,
    sin: f64,
}

impl ScenarioFrame {
    pub fn new(start: (f64, f64), goal: (f64, f64)) -> Result<Self> {
        let (dx, dy) = (goal.0 - start.0, goal.1 - start.1);
        let len = dx.hypot(dy);
        if !(len > 0.0) || !len.is_finite() {
            return Err(Error::contract("scenario start and goal coincide"));
        }
        Ok(Self {
            origin: start,
            cos: dy / len,
            sin: dx / len,
        })
    }

    pub fn to_scenario(&self, p: (f64, f64)) -> (f64, f64) {
        let (rx, ry) = (p.0 - self.origin.0, p.1 - self.origin.1);
        (
            self.cos * rx - self.sin * ry + GRID_EXTENT / 2.0,
            self.sin * rx + self.cos * ry,
        )
    }
}

/// Cell index along one axis for a coordinate in `[0, extent]`; the far edge
/// belongs to the last cell.
fn axis_cell(v: f64) -> Option<usize> {
    if !(0.0..=GRID_EXTENT).contains(&v) {
        return None;
    }
    let idx = (v * GRID_SIZE as f64 / GRID_EXTENT).floor() as usize;
    Some(idx.min(GRID_SIZE - 1))
}

/// World-frame lidar endpoints of one step; no-return beams are skipped.
pub fn scan_endpoints(step: &StepRecord, max_range: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
    let n = step.scan.len();
    step.scan.iter().enumerate().filter_map(move |(i, &r)| {
        if r >= max_range || !r.is_finite() {
            return None;
        }
        let a = step.pose.theta + beam_offset(i, n);
        Some((step.pose.x + r * a.cos(), step.pose.y + r * a.sin()))
    })
}

pub fn rasterize_scenario(scenario: &Scenario<'_>, cfg: &ExtractionConfig) -> Result<OccupancyGrid> {
    let steps = scenario.steps();
    let (first, last) = match (steps.first(), steps.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(Error::contract("empty scenario")),
    };
    let frame = ScenarioFrame::new((first.pose.x, first.pose.y), (last.pose.x, last.pose.y))?;
    let max_range = cfg.max_range.min(scenario.trajectory.header.max_range);
    let mut rows = vec![vec![0u8; GRID_SIZE]; GRID_SIZE];
    for step in steps {
        for p in scan_endpoints(step, max_range) {
            let (x, y) = frame.to_scenario(p);
            if let (Some(c), Some(r)) = (axis_cell(x), axis_cell(y)) {
                rows[r][c] = 1;
            }
        }
    }
    OccupancyGrid::from_cells(&rows)
}

pub fn filter_challenging(envs: &EnvironmentSet, cfg: &ExtractionConfig) -> Result<EnvironmentSet> {
    if envs.kind != SetKind::Raw {
        return Err(Error::contract(format!(
            "filter_challenging expects a raw set, got {}",
            envs.kind
        )));
    }
    Ok(EnvironmentSet {
        kind: SetKind::Challenging,
        entries: envs
            .entries
            .iter()
            .filter(|e| e.c_bar.is_some_and(|c| c > cfg.difficulty_threshold))
            .cloned()
            .collect(),
    })
}

#[derive(Debug, Clone)]
pub struct DomainExtraction {
    pub raw: EnvironmentSet,
    pub challenging: EnvironmentSet,
    /// Scenarios that could not be rasterized.
    pub skipped: usize,
}

/// Filesystem-safe identifier fragment.
pub fn sanitize_id(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

pub fn extract_domain(trajs: &[Trajectory], cfg: &ExtractionConfig) -> Result<DomainExtraction> {
    cfg.validate()?;
    let per_traj: Vec<(Vec<EnvEntry>, usize)> = trajs
        .par_iter()
        .map(|traj| {
            let mut entries = Vec::new();
            let mut skipped = 0;
            let base = sanitize_id(&traj.header.deployment_id);
            for (j, sc) in segment_trajectory(traj, cfg).iter().enumerate() {
                match rasterize_scenario(sc, cfg) {
                    Ok(grid) => entries.push(EnvEntry {
                        id: format!("{base}-s{j:03}"),
                        grid,
                        c_bar: Some(sc.suboptimal_total),
                        provenance: Provenance::Extracted {
                            trajectory: traj.header.deployment_id.clone(),
                            initial_index: sc.initial_index,
                            final_index: sc.final_index,
                        },
                    }),
                    Err(e) => {
                        log::debug!("{base} scenario {j}: {e}");
                        skipped += 1;
                    }
                }
            }
            (entries, skipped)
        })
        .collect();
    let mut raw = EnvironmentSet::new(SetKind::Raw);
    let mut skipped = 0;
    for (entries, s) in per_traj {
        raw.entries.extend(entries);
        skipped += s;
    }
    if skipped > 0 {
        log::warn!("skipped {skipped} scenarios that could not be rasterized");
    }
    let challenging = filter_challenging(&raw, cfg)?;
    Ok(DomainExtraction {
        raw,
        challenging,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Pose;
    use crate::trace::TraceHeader;
    use std::f64::consts::PI;

    fn header(beams: usize) -> TraceHeader {
        TraceHeader {
            deployment_id: "t".into(),
            map_id: "m".into(),
            beam_count: beams,
            max_range: 10.0,
        }
    }

    fn blind(x: f64, y: f64, flag: u8) -> StepRecord {
        StepRecord {
            scan: vec![10.0; 4],
            pose: Pose::new(x, y, 0.0),
            suboptimal: flag,
        }
    }

    fn traj(steps: Vec<StepRecord>) -> Trajectory {
        let beams = steps[0].scan.len();
        Trajectory::new(header(beams), steps).unwrap()
    }

    #[test]
    fn stationary_robot_yields_nothing() {
        let t = traj((0..1000).map(|_| blind(1.0, 1.0, 0)).collect());
        assert!(segment_trajectory(&t, &ExtractionConfig::default()).is_empty());
    }

    #[test]
    fn straight_line_hand_trace() {
        let t = traj((0..=24).map(|i| blind(i as f64 * 0.5, 0.0, 0)).collect());
        let s = segment_trajectory(&t, &ExtractionConfig::default());
        assert_eq!(s.len(), 2);
        assert_eq!((s[0].initial_index, s[0].final_index), (0, 11));
        assert_eq!((s[1].initial_index, s[1].final_index), (11, 22));
        assert_eq!(s[0].steps().last().unwrap().pose.x, 5.5);
        assert_eq!(s[1].steps().last().unwrap().pose.x, 11.0);
    }

    #[test]
    fn small_loop_yields_nothing() {
        let t = traj(
            (0..400)
                .map(|i| {
                    let a = i as f64 * 2.0 * PI / 100.0;
                    blind(2.0 * a.cos(), 2.0 * a.sin(), 0)
                })
                .collect(),
        );
        assert!(segment_trajectory(&t, &ExtractionConfig::default()).is_empty());
    }

    #[test]
    fn aggregation() {
        let flags = |fs: &[u8]| fs.iter().map(|&f| blind(0.0, 0.0, f)).collect::<Vec<_>>();
        assert_eq!(aggregate_suboptimal(&flags(&[0, 0, 0])).unwrap(), 0);
        assert_eq!(aggregate_suboptimal(&flags(&[1, 0, 1, 1])).unwrap(), 3);
        assert_eq!(aggregate_suboptimal(&flags(&[1; 60])).unwrap(), 60);
        assert!(aggregate_suboptimal(&[]).is_err());
    }

    /// One beam pointing at `target` from a robot at `at`.
    fn pointing(at: (f64, f64), target: (f64, f64)) -> StepRecord {
        let (dx, dy) = (target.0 - at.0, target.1 - at.1);
        // beam 0 has offset -π, so heading = angle + π puts it on target.
        StepRecord {
            scan: vec![dx.hypot(dy), 10.0],
            pose: Pose::new(at.0, at.1, dy.atan2(dx) + PI),
            suboptimal: 0,
        }
    }

    fn two_step(start: (f64, f64), goal: (f64, f64), obstacle: (f64, f64)) -> Trajectory {
        let a = pointing(start, obstacle);
        let mut b = pointing(goal, obstacle);
        b.scan[0] = 10.0; // only the first step sees it
        // Built directly: the two poses are further apart than a valid trace allows.
        Trajectory {
            header: header(2),
            steps: vec![a, b],
        }
    }

    fn occupied_cells(g: &OccupancyGrid) -> Vec<(usize, usize)> {
        let mut v = Vec::new();
        for r in 0..GRID_SIZE {
            for c in 0..GRID_SIZE {
                if g.get(c, r) == 1 {
                    v.push((c, r));
                }
            }
        }
        v
    }

    fn whole(t: &Trajectory) -> Scenario<'_> {
        Scenario {
            trajectory: t,
            initial_index: 0,
            final_index: t.steps.len() - 1,
            suboptimal_total: 0,
        }
    }

    #[test]
    fn no_hits_gives_empty_grid() {
        let t = two_step((0.0, 0.0), (0.0, 5.2), (100.0, 100.0));
        let g = rasterize_scenario(&whole(&t), &ExtractionConfig::default()).unwrap();
        assert_eq!(g.occupied_count(), 0);
        assert_eq!(g.start_cell(), crate::grid::Cell::new(15, 0));
        assert_eq!(g.goal_cell(), crate::grid::Cell::new(15, 29));
    }

    #[test]
    fn rotated_scenario_point_lands_on_oracle_cell() {
        // Independent calculation: R maps (1,0) to (0,1), so world (2.5, 1)
        // relative to the start becomes (-1, 2.5); shifted by 2.5 in x → (1.5, 2.5).
        // With 6 cells per meter: col floor(9.0) = 9, row floor(15.0) = 15.
        let f = ScenarioFrame::new((0.0, 0.0), (5.0, 0.0)).unwrap();
        let (x, y) = f.to_scenario((2.5, 1.0));
        assert!((x - 1.5).abs() < 1e-12 && (y - 2.5).abs() < 1e-12);
        assert_eq!((axis_cell(1.5), axis_cell(2.5)), (Some(9), Some(15)));
        // That point sits on a cell corner, so the rasterized test point is
        // nudged inside: (2.55, 1.05) → (1.45, 2.55) → col 8, row 15.
        let t = two_step((0.0, 0.0), (5.0, 0.0), (2.55, 1.05));
        let g = rasterize_scenario(&whole(&t), &ExtractionConfig::default()).unwrap();
        assert_eq!(occupied_cells(&g), vec![(8, 15)]);
    }

    #[test]
    fn aligned_scenario_keeps_offsets() {
        // Identity rotation: (0.1, 2.55) → (2.6, 2.55) → col floor(15.6) = 15, row floor(15.3) = 15.
        let t = two_step((0.0, 0.0), (0.0, 5.0), (0.1, 2.55));
        let g = rasterize_scenario(&whole(&t), &ExtractionConfig::default()).unwrap();
        assert_eq!(occupied_cells(&g), vec![(15, 15)]);
    }

    #[test]
    fn degenerate_scenario_rejected() {
        let t = traj(vec![blind(1.0, 1.0, 0), blind(1.0, 1.0, 0)]);
        assert!(rasterize_scenario(&whole(&t), &ExtractionConfig::default()).is_err());
    }

    fn raw_with(cbars: &[u64]) -> EnvironmentSet {
        EnvironmentSet {
            kind: SetKind::Raw,
            entries: cbars
                .iter()
                .enumerate()
                .map(|(i, &c)| EnvEntry {
                    id: format!("e{i}"),
                    grid: OccupancyGrid::empty(),
                    c_bar: Some(c),
                    provenance: Provenance::Extracted {
                        trajectory: "t".into(),
                        initial_index: i,
                        final_index: i + 1,
                    },
                })
                .collect(),
        }
    }

    fn kept(set: &EnvironmentSet) -> Vec<u64> {
        set.entries.iter().map(|e| e.c_bar.unwrap()).collect()
    }

    #[test]
    fn filter_is_strict() {
        let cfg = ExtractionConfig::default();
        let out = filter_challenging(&raw_with(&[0, 50, 51, 200]), &cfg).unwrap();
        assert_eq!(kept(&out), vec![51, 200]);
        assert_eq!(out.kind, SetKind::Challenging);
        assert!(filter_challenging(&raw_with(&[0, 0]), &cfg).unwrap().is_empty());
        let zero = ExtractionConfig {
            difficulty_threshold: 0,
            ..cfg.clone()
        };
        assert_eq!(kept(&filter_challenging(&raw_with(&[0, 1]), &zero).unwrap()), vec![1]);
        let mut not_raw = raw_with(&[1]);
        not_raw.kind = SetKind::Challenging;
        assert!(filter_challenging(&not_raw, &cfg).is_err());
    }

    #[test]
    fn domain_from_two_straight_runs() {
        let a = traj((0..=24).map(|i| blind(i as f64 * 0.5, 0.0, 0)).collect());
        let mut b = traj((0..=24).map(|i| blind(0.0, i as f64 * 0.5, 1)).collect());
        b.header.deployment_id = "u".into();
        let out = extract_domain(&[a, b], &ExtractionConfig::default()).unwrap();
        assert_eq!(out.raw.len(), 4);
        assert_eq!(out.raw.entries[0].id, "t-s000");
        assert_eq!(out.raw.entries[2].id, "u-s000");
        // 12 flagged steps per scenario, well under 50.
        assert_eq!(out.raw.entries[2].c_bar, Some(12));
        assert!(out.challenging.is_empty());

        let still = traj((0..100).map(|_| blind(0.0, 0.0, 1)).collect());
        let out = extract_domain(&[still], &ExtractionConfig::default()).unwrap();
        assert!(out.raw.is_empty() && out.challenging.is_empty());
    }
}
