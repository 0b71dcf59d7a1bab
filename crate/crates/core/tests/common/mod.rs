#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use envsynth::trace::TraceHeader;
use envsynth::{EnvEntry, EnvironmentSet, OccupancyGrid, Pose, Provenance, SeededRng, SetKind, StepRecord, Trajectory};

pub fn toy_fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/toy")
}

pub fn copy_dir(from: &Path, to: &Path) {
    std::fs::create_dir_all(to).unwrap();
    for entry in std::fs::read_dir(from).unwrap() {
        let entry = entry.unwrap();
        let dest = to.join(entry.file_name());
        if entry.file_type().unwrap().is_dir() {
            copy_dir(&entry.path(), &dest);
        } else {
            std::fs::copy(entry.path(), dest).unwrap();
        }
    }
}

/// Relative path → contents of every file under `root`, sorted.
pub fn snapshot(root: &Path) -> Vec<(String, Vec<u8>)> {
    fn walk(root: &Path, dir: &Path, out: &mut Vec<(String, Vec<u8>)>) {
        let mut entries: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
        entries.sort();
        for p in entries {
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.push((rel, std::fs::read(&p).unwrap()));
            }
        }
    }
    let mut out = Vec::new();
    walk(root, root, &mut out);
    out
}

pub fn grid_from_fn(f: impl Fn(usize, usize) -> bool) -> OccupancyGrid {
    let rows: Vec<Vec<u8>> = (0..30).map(|r| (0..30).map(|c| u8::from(f(c, r))).collect()).collect();
    OccupancyGrid::from_cells(&rows).unwrap()
}

pub fn set_of(kind: SetKind, grids: impl IntoIterator<Item = OccupancyGrid>) -> EnvironmentSet {
    EnvironmentSet {
        kind,
        entries: grids
            .into_iter()
            .enumerate()
            .map(|(i, grid)| EnvEntry {
                id: format!("e{i:03}"),
                grid,
                c_bar: Some(60),
                provenance: Provenance::Generated { draw: i },
            })
            .collect(),
    }
}

/// Wall along the left (or right) edge, `w` columns thick. Both kinds
/// leave the middle column free, so every grid is navigable.
pub fn side_wall(left: bool, w: usize) -> OccupancyGrid {
    grid_from_fn(|c, _| if left { c < w } else { c >= 30 - w })
}

/// 32 left-wall and 32 right-wall grids, thickness 2 to 5.
pub fn bimodal_dataset() -> Vec<OccupancyGrid> {
    (0..64).map(|i| side_wall(i < 32, 2 + i % 4)).collect()
}

pub fn header(id: &str, beams: usize) -> TraceHeader {
    TraceHeader {
        deployment_id: id.into(),
        map_id: "synthetic".into(),
        beam_count: beams,
        max_range: 10.0,
    }
}

/// Correlated random walk with random flags and scans; steps stay under
/// the trace format's displacement cap.
pub fn random_walk(id: &str, rng: &mut SeededRng) -> Trajectory {
    let beams = 8;
    let n = 20 + rng.below(400);
    let step = rng.uniform(0.02, 0.3);
    let flag_p = rng.next_f64();
    let (mut x, mut y, mut th) = (rng.uniform(-20.0, 20.0), rng.uniform(-20.0, 20.0), rng.uniform(-PI, PI));
    let mut steps = Vec::with_capacity(n);
    for _ in 0..n {
        let scan = (0..beams).map(|_| if rng.bernoulli(0.2) { 10.0 } else { rng.uniform(0.1, 9.0) }).collect();
        steps.push(StepRecord {
            scan,
            pose: Pose::new(x, y, th),
            suboptimal: u8::from(rng.bernoulli(flag_p)),
        });
        th += rng.uniform(-0.4, 0.4);
        let len = if rng.bernoulli(0.1) { 0.0 } else { step * rng.uniform(0.5, 1.5) };
        x += len * th.cos();
        y += len * th.sin();
    }
    Trajectory::new(header(id, beams), steps).unwrap()
}

/// Stationary robot, `n` identical poses.
pub fn stationary(n: usize) -> Trajectory {
    let steps = (0..n)
        .map(|_| StepRecord {
            scan: vec![3.0; 8],
            pose: Pose::new(1.0, 2.0, 0.3),
            suboptimal: 1,
        })
        .collect();
    Trajectory::new(header("still", 8), steps).unwrap()
}

/// Several laps of a circle of radius `r`.
pub fn circle(r: f64, laps: usize) -> Trajectory {
    let per_lap = 200;
    let steps = (0..laps * per_lap)
        .map(|i| {
            let a = 2.0 * PI * i as f64 / per_lap as f64;
            StepRecord {
                scan: vec![3.0; 8],
                pose: Pose::new(r * a.cos(), r * a.sin(), a + PI / 2.0),
                suboptimal: 0,
            }
        })
        .collect();
    Trajectory::new(header("loop", 8), steps).unwrap()
}

/// Straight run along +x from the origin, one step every `spacing` meters.
pub fn straight(id: &str, length: f64, spacing: f64, flag: u8) -> Trajectory {
    let n = (length / spacing).round() as usize;
    let steps = (0..=n)
        .map(|i| StepRecord {
            scan: vec![10.0; 8],
            pose: Pose::new(i as f64 * spacing, 0.0, 0.0),
            suboptimal: flag,
        })
        .collect();
    Trajectory::new(header(id, 8), steps).unwrap()
}
