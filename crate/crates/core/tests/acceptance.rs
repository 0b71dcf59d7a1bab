//! One pass/fail line per acceptance criterion. Run with
//! `cargo test -p envsynth-core --test acceptance -- --nocapture` to watch
//! the lines as they are produced; they are also written straight to stdout
//! so they show up in an ordinary `cargo test` log.

mod common;

use std::f64::consts::{LN_2, PI};
use std::io::Write;
use std::time::Instant;

use ndarray::Array2;

use envsynth::cluster::kmeans::kmeans;
use envsynth::cluster::pca_fit;
use envsynth::extraction::{
    filter_challenging, rasterize_scenario, scan_endpoints, segment_trajectory, ExtractionConfig, Scenario,
    ScenarioFrame,
};
use envsynth::gan::mlp::{mlp_backward, mlp_forward};
use envsynth::gan::model::latent_batch;
use envsynth::gan::train::binarize_output;
use envsynth::gan::{gan_losses, train_gan, GanTrainConfig, GeneratorLoss, MlpParams, MlpSpec, Mode, OutputActivation};
use envsynth::grid::Cell;
use envsynth::pipeline::{cmd_run_all, PipelineConfig, StageStatus, Workspace};
use envsynth::sim::mapgen::{generate_map, MapGenConfig};
use envsynth::sim::{is_navigable, is_navigable_grid, run_episode, NavigationTask, Outcome, PlannerParams, SimConfig, WorldMap};
use envsynth::trace::TraceHeader;
use envsynth::{
    EnvEntry, EnvironmentSet, OccupancyGrid, Pose, Provenance, SeededRng, SetKind, StepRecord, Trajectory, GRID_EXTENT,
};

struct Check {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Check {
    Check {
        pass,
        detail: detail.into(),
    }
}

// ---------------------------------------------------------------------------
// 1. Analytic MLP gradients against central finite differences.

const FD_EPS: f64 = 1e-4;

/// Central difference at `h` and `h/2`, Richardson-combined so the
/// truncation error is fourth order. Batch norm over two or three rows is
/// curved enough that plain second-order differences drift past 1e-4.
fn central_diff(f: impl Fn(f64) -> f64) -> f64 {
    let d = |h: f64| (f(h) - f(-h)) / (2.0 * h);
    (4.0 * d(FD_EPS / 2.0) - d(FD_EPS)) / 3.0
}

/// |a - n| / max(|a|, |n|), with entries where both are below 1e-6
/// compared absolutely (their difference is finite-difference noise).
fn rel_err(a: f64, n: f64) -> f64 {
    let scale = a.abs().max(n.abs());
    if scale < 1e-6 {
        (a - n).abs()
    } else {
        (a - n).abs() / scale
    }
}

fn weighted_output(spec: &MlpSpec, params: &MlpParams, x: &Array2<f64>, u: &Array2<f64>) -> f64 {
    let (out, _) = mlp_forward(spec, params, x.view(), Mode::Train, None).unwrap();
    (&out * u).sum()
}

fn c1_gradients() -> Check {
    let t0 = Instant::now();
    let mut rng = SeededRng::new(0xC1);
    let mut worst = 0.0f64;
    let mut compared = 0usize;
    let specs = 200;
    for s in 0..specs {
        let hidden = 1 + rng.below(3);
        let mut widths = vec![1 + rng.below(8)];
        widths.extend((0..hidden).map(|_| 1 + rng.below(8)));
        widths.push(1 + rng.below(8));
        let bn = s % 2 == 0;
        let act = if s % 3 == 0 {
            OutputActivation::Sigmoid
        } else {
            OutputActivation::Tanh
        };
        let batch = if bn { 2 + rng.below(3) } else { 1 + rng.below(4) };
        let spec = MlpSpec::new(widths.clone(), act, bn, 0.0).unwrap();
        let mut params = MlpParams::init(&spec, &mut rng);
        for n in params.norms.iter_mut().flatten() {
            n.gamma.mapv_inplace(|_| rng.uniform(0.5, 1.5));
            n.beta.mapv_inplace(|_| rng.uniform(-0.5, 0.5));
        }
        let x = Array2::from_shape_fn((batch, widths[0]), |_| rng.uniform(-1.5, 1.5));
        let u = Array2::from_shape_fn((batch, *widths.last().unwrap()), |_| rng.uniform(-1.0, 1.0));

        let (_, cache) = mlp_forward(&spec, &params, x.view(), Mode::Train, None).unwrap();
        let grads = mlp_backward(&spec, &params, &cache.unwrap(), u.view()).unwrap();
        let analytic: Vec<Vec<f64>> = grads.params.trainable().iter().map(|t| t.to_vec()).collect();
        for (ti, tensor) in analytic.iter().enumerate() {
            for (i, &a) in tensor.iter().enumerate() {
                let n = central_diff(|h| {
                    let mut p = params.clone();
                    p.trainable_mut()[ti][i] += h;
                    weighted_output(&spec, &p, &x, &u)
                });
                worst = worst.max(rel_err(a, n));
                compared += 1;
            }
        }
        for ((r, c), &a) in grads.input.indexed_iter() {
            let n = central_diff(|h| {
                let mut xp = x.clone();
                xp[[r, c]] += h;
                weighted_output(&spec, &params, &xp, &u)
            });
            worst = worst.max(rel_err(a, n));
            compared += 1;
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    check(
        worst < 1e-4 && secs < 30.0,
        format!("{specs} specs, {compared} partials, max relative error {worst:.2e} (< 1e-4), {secs:.1}s (< 30s)"),
    )
}

// ---------------------------------------------------------------------------
// 2. Equilibrium value of the discriminator loss.

fn c2_equilibrium() -> Check {
    let mut worst = 0.0f64;
    for n in [1, 2, 7, 64] {
        for kind in [GeneratorLoss::NonSaturating, GeneratorLoss::Minimax] {
            let (d, _) = gan_losses(&vec![0.5; n], &vec![0.5; n], kind);
            worst = worst.max((d - 2.0 * LN_2).abs());
        }
    }
    check(worst <= 1e-12, format!("|loss_d - 2 ln 2| = {worst:.1e} (<= 1e-12)"))
}

// ---------------------------------------------------------------------------
// 3. GAN on the bimodal wall dataset.

fn c3_bimodal_gan() -> Check {
    let t0 = Instant::now();
    let data = common::bimodal_dataset();
    let set = common::set_of(SetKind::Challenging, data.clone());
    let cfg = GanTrainConfig {
        epochs: 600,
        ..GanTrainConfig::default()
    };
    let model = train_gan(&set, &cfg).unwrap();
    let train_secs = t0.elapsed().as_secs_f64();
    let z = latent_batch(200, model.latent_dim, &mut SeededRng::new(3));
    let out = model.generate(&z).unwrap();
    let mut worst = 0usize;
    let mut left = 0usize;
    for row in out.rows() {
        let g = binarize_output(row.as_slice().unwrap()).unwrap();
        let (d, i) = data.iter().enumerate().map(|(i, h)| (h.hamming(&g), i)).min().unwrap();
        worst = worst.max(d);
        left += usize::from(i < 32);
    }
    let right = 200 - left;
    check(
        worst <= 45 && left >= 40 && right >= 40 && train_secs <= 600.0,
        format!(
            "max nearest-neighbor Hamming {worst}/900 (<= 45), modes {left}/{right} of 200 (>= 20% each), training {train_secs:.0}s"
        ),
    )
}

// ---------------------------------------------------------------------------
// 4. K-means against exhaustive search.

fn sse(points: &[Vec<f64>], labels: &[usize], m: usize) -> Option<f64> {
    let dim = points[0].len();
    let mut sum = vec![vec![0.0; dim]; m];
    let mut count = vec![0usize; m];
    for (p, &l) in points.iter().zip(labels) {
        count[l] += 1;
        for d in 0..dim {
            sum[l][d] += p[d];
        }
    }
    if count.contains(&0) {
        return None;
    }
    Some(
        points
            .iter()
            .zip(labels)
            .map(|(p, &l)| (0..dim).map(|d| (p[d] - sum[l][d] / count[l] as f64).powi(2)).sum::<f64>())
            .sum(),
    )
}

fn exhaustive_optimum(points: &[Vec<f64>], m: usize) -> f64 {
    let n = points.len();
    let mut best = f64::INFINITY;
    let mut labels = vec![0usize; n];
    for code in 0..m.pow(n as u32) {
        let mut c = code;
        for l in labels.iter_mut() {
            *l = c % m;
            c /= m;
        }
        if let Some(v) = sse(points, &labels, m) {
            best = best.min(v);
        }
    }
    best
}

/// Points scattered around `m` random centers. Spreads run from well
/// separated to heavily overlapping.
fn kmeans_instance(i: u64) -> (Vec<Vec<f64>>, usize) {
    let mut rng = SeededRng::new(400 + i);
    let n = 3 + (i as usize % 6);
    let m = 1 + (i as usize % 3);
    let dim = 1 + (i as usize % 3);
    let spread = 0.3 + 0.1 * i as f64;
    let centers: Vec<Vec<f64>> = (0..m).map(|_| (0..dim).map(|_| rng.uniform(-5.0, 5.0)).collect()).collect();
    let mut pts: Vec<Vec<f64>> = (0..n)
        .map(|j| centers[j % m].iter().map(|c| c + spread * rng.normal()).collect())
        .collect();
    if i % 5 == 4 {
        // A duplicated point.
        pts[1] = pts[0].clone();
    }
    (pts, m)
}

fn c4_kmeans() -> Check {
    let mut worst_gap = 0.0f64;
    let mut monotone = true;
    for i in 0..20 {
        let (pts, m) = kmeans_instance(i);
        let opt = exhaustive_optimum(&pts, m);
        let mut best = f64::INFINITY;
        for seed in 0..10 {
            let r = kmeans(&pts, m, &mut SeededRng::new(seed)).unwrap();
            monotone &= r.inertia_history.windows(2).all(|w| w[1] <= w[0]);
            best = best.min(r.inertia);
        }
        worst_gap = worst_gap.max((best - opt).abs());
    }
    check(
        worst_gap <= 1e-9 && monotone,
        format!("20 instances, max |best-of-10 - optimum| = {worst_gap:.1e} (<= 1e-9), Lloyd inertia monotone: {monotone}"),
    )
}

// ---------------------------------------------------------------------------
// 5. PCA exactness and monotone reconstruction error.

fn random_grids(n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = SeededRng::new(seed);
    (0..n)
        .map(|_| {
            let p = rng.uniform(0.05, 0.5);
            (0..900).map(|_| f64::from(u8::from(rng.bernoulli(p)))).collect()
        })
        .collect()
}

fn mse(pca: &envsynth::cluster::PcaModel, data: &[Vec<f64>]) -> f64 {
    let mut total = 0.0;
    for v in data {
        let r = pca.reconstruct(&pca.transform(v).unwrap()).unwrap();
        total += v.iter().zip(&r).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
    }
    total / (data.len() * data[0].len()) as f64
}

fn c5_pca() -> Check {
    let mut worst = 0.0f64;
    let sizes = [2usize, 3, 8, 31, 64, 100];
    for (i, &r) in sizes.iter().enumerate() {
        let mut data = random_grids(r, 500 + i as u64);
        if r > 4 {
            data[3] = data[0].clone();
        }
        let pca = pca_fit(&data, r - 1).unwrap();
        for v in &data {
            let back = pca.reconstruct(&pca.transform(v).unwrap()).unwrap();
            for (a, b) in v.iter().zip(&back) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    let sample = random_grids(200, 599);
    let ks: Vec<usize> = (1..=199).step_by(9).chain([199]).collect();
    let errors: Vec<f64> = ks.iter().map(|&k| mse(&pca_fit(&sample, k).unwrap(), &sample)).collect();
    let monotone = errors.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    check(
        worst <= 1e-8 && monotone,
        format!(
            "r in {sizes:?}: max |x - recon(k=r-1)| = {worst:.1e} (<= 1e-8); MSE over {} values of k on 200 grids non-increasing: {monotone} ({:.4} -> {:.1e})",
            ks.len(),
            errors[0],
            errors.last().unwrap()
        ),
    )
}

// ---------------------------------------------------------------------------
// 6. Segmentation conformance.

fn dist(a: &StepRecord, b: &StepRecord) -> f64 {
    (a.pose.x - b.pose.x).hypot(a.pose.y - b.pose.y)
}

fn conformance_violation(traj: &Trajectory, scenarios: &[Scenario<'_>], seg: f64) -> Option<String> {
    let steps = &traj.steps;
    let mut expected_start = 0;
    for (k, s) in scenarios.iter().enumerate() {
        if s.initial_index != expected_start {
            return Some(format!("scenario {k} starts at {} not {expected_start}", s.initial_index));
        }
        let first = &steps[s.initial_index];
        if dist(first, &steps[s.final_index]) <= seg {
            return Some(format!("scenario {k} spans only {:.3} m", dist(first, &steps[s.final_index])));
        }
        if let Some(j) = (s.initial_index..s.final_index).find(|&j| dist(first, &steps[j]) > seg) {
            return Some(format!("scenario {k}: interior step {j} already beyond {seg} m"));
        }
        let flags: u64 = steps[s.initial_index..=s.final_index].iter().map(|st| u64::from(st.suboptimal)).sum();
        if flags != s.suboptimal_total {
            return Some(format!("scenario {k}: c̄ {} but flags sum to {flags}", s.suboptimal_total));
        }
        expected_start = s.final_index;
    }
    // Nothing after the last boundary may exceed the segment length, or a
    // scenario was missed.
    let anchor = &steps[expected_start];
    if let Some(j) = (expected_start..steps.len()).find(|&j| dist(anchor, &steps[j]) > seg) {
        return Some(format!("missed a scenario closing at step {j}"));
    }
    None
}

fn c6_segmentation() -> Check {
    let cfg = ExtractionConfig::default();
    let mut rng = SeededRng::new(0xC6);
    let mut scenarios = 0usize;
    for t in 0..100 {
        let traj = common::random_walk(&format!("walk{t}"), &mut rng);
        let s = segment_trajectory(&traj, &cfg);
        if let Some(v) = conformance_violation(&traj, &s, cfg.segment_length) {
            return check(false, format!("trajectory {t}: {v}"));
        }
        scenarios += s.len();
    }
    let still = segment_trajectory(&common::stationary(1000), &cfg).len();
    let small_loop = segment_trajectory(&common::circle(2.0, 5), &cfg).len();
    check(
        scenarios > 0 && still == 0 && small_loop == 0,
        format!("100 trajectories, {scenarios} scenarios conform (a-d); stationary -> {still}, radius-2 m loop -> {small_loop}"),
    )
}

// ---------------------------------------------------------------------------
// 7. Challenging filter.

fn c7_filter() -> Check {
    let c_bars = [49u64, 50, 51, 0, 49, 50, 51, 1000, 50, 51];
    let raw = EnvironmentSet {
        kind: SetKind::Raw,
        entries: c_bars
            .iter()
            .enumerate()
            .map(|(i, &c)| EnvEntry {
                id: format!("r{i}"),
                grid: OccupancyGrid::empty(),
                c_bar: Some(c),
                provenance: Provenance::Generated { draw: i },
            })
            .collect(),
    };
    let kept: Vec<String> = filter_challenging(&raw, &ExtractionConfig::default())
        .unwrap()
        .entries
        .into_iter()
        .map(|e| e.id)
        .collect();
    let want: Vec<String> = c_bars
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 50)
        .map(|(i, _)| format!("r{i}"))
        .collect();
    check(kept == want, format!("kept {kept:?}, expected exactly the c̄ > 50 entries {want:?}"))
}

// ---------------------------------------------------------------------------
// 8. Rasterization geometry.

/// Straight-ish run from `start` to `goal` with random lidar scans.
fn scenario_traj(start: (f64, f64), goal: (f64, f64), rng: &mut SeededRng) -> Trajectory {
    let n = 30;
    let beams = 16;
    let steps = (0..=n)
        .map(|i| {
            let f = i as f64 / n as f64;
            let wobble = if i == 0 || i == n { 0.0 } else { rng.uniform(-0.1, 0.1) };
            StepRecord {
                scan: (0..beams).map(|_| rng.uniform(0.2, 9.9)).collect(),
                pose: Pose::new(
                    start.0 + f * (goal.0 - start.0) + wobble,
                    start.1 + f * (goal.1 - start.1) - wobble,
                    rng.uniform(-PI, PI),
                ),
                suboptimal: 0,
            }
        })
        .collect();
    let header = TraceHeader {
        deployment_id: "geom".into(),
        map_id: "synthetic".into(),
        beam_count: beams,
        max_range: 10.0,
    };
    Trajectory::new(header, steps).unwrap()
}

fn c8_rasterization() -> Check {
    let cfg = ExtractionConfig::default();
    let mut rng = SeededRng::new(0xC8);
    let mut worst_map = 0.0f64;
    let mut worst_dist = 0.0f64;
    for k in 0..100 {
        let start = (rng.uniform(-30.0, 30.0), rng.uniform(-30.0, 30.0));
        let heading = rng.uniform(-PI, PI);
        let d = rng.uniform(5.0 + 1e-6, 5.9);
        let goal = (start.0 + d * heading.cos(), start.1 + d * heading.sin());
        let traj = scenario_traj(start, goal, &mut rng);
        let sc = Scenario {
            trajectory: &traj,
            initial_index: 0,
            final_index: traj.len() - 1,
            suboptimal_total: 0,
        };
        let frame = ScenarioFrame::new(start, goal).unwrap();
        // Independent rotation: turn by pi/2 - heading about the start.
        let rot = PI / 2.0 - (goal.1 - start.1).atan2(goal.0 - start.0);
        let oracle = |p: (f64, f64)| {
            let (x, y) = (p.0 - start.0, p.1 - start.1);
            (x * rot.cos() - y * rot.sin() + GRID_EXTENT / 2.0, x * rot.sin() + y * rot.cos())
        };
        let s = frame.to_scenario(start);
        let g = frame.to_scenario(goal);
        let off = (s.0 - 2.5).abs().max(s.1.abs()).max((g.0 - 2.5).abs()).max((g.1 - d).abs());
        if off > 1e-9 {
            return check(false, format!("scenario {k}: start/goal map to {s:?}, {g:?}"));
        }
        let grid = rasterize_scenario(&sc, &cfg).unwrap();
        if grid.start_cell() != Cell::new(15, 0)
            || grid.goal_cell() != Cell::new(15, 29)
            || grid.get(15, 0) != 0
            || grid.get(15, 29) != 0
        {
            return check(false, format!("scenario {k}: start/goal cells not at bottom/top middle or not free"));
        }
        let world: Vec<(f64, f64)> = traj.steps.iter().flat_map(|st| scan_endpoints(st, 10.0)).collect();
        let local: Vec<(f64, f64)> = world.iter().map(|&p| frame.to_scenario(p)).collect();
        for (w, l) in world.iter().zip(&local) {
            let o = oracle(*w);
            worst_map = worst_map.max((o.0 - l.0).abs().max((o.1 - l.1).abs()));
        }
        for i in (0..world.len()).step_by(7) {
            for j in (i + 1..world.len()).step_by(11) {
                let dw = (world[i].0 - world[j].0).hypot(world[i].1 - world[j].1);
                let dl = (local[i].0 - local[j].0).hypot(local[i].1 - local[j].1);
                worst_dist = worst_dist.max((dw - dl).abs());
            }
        }
    }
    check(
        worst_dist <= 1e-9 && worst_map <= 1e-9,
        format!(
            "100 scenarios: start at (2.5, 0) and goal at (2.5, d), cells (15,0) and (15,29) free; max pairwise distance drift {worst_dist:.1e}, max deviation from atan2 rotation {worst_map:.1e} (<= 1e-9)"
        ),
    )
}

// ---------------------------------------------------------------------------
// 9. Simulator soundness.

/// Brute-force: does a disc of `r` at `(x, y)` overlap an occupied cell or
/// leave the map?
fn oracle_collides(map: &WorldMap, x: f64, y: f64, r: f64) -> bool {
    let (w, h) = map.size_meters();
    if x < r || y < r || x > w - r || y > h - r {
        return true;
    }
    let res = map.resolution();
    map.cells().iter().enumerate().any(|(i, &c)| {
        if c == 0 {
            return false;
        }
        let (col, row) = ((i % map.width()) as f64, (i / map.width()) as f64);
        let dx = (col * res - x).max(0.0).max(x - (col + 1.0) * res);
        let dy = (row * res - y).max(0.0).max(y - (row + 1.0) * res);
        dx.hypot(dy) < r
    })
}

fn suite_task(map: &WorldMap, rng: &mut SeededRng) -> Option<(Pose, (f64, f64))> {
    let free_cell = |rng: &mut SeededRng| loop {
        let c = Cell::new(rng.below(map.width()), rng.below(map.height()));
        let (x, y) = map.cell_center(c);
        if map.clearance(x, y, 0.4) >= 0.4 {
            return c;
        }
    };
    for _ in 0..200 {
        let (a, b) = (free_cell(rng), free_cell(rng));
        let (pa, pb) = (map.cell_center(a), map.cell_center(b));
        if (pa.0 - pb.0).hypot(pa.1 - pb.1) >= 5.0 && is_navigable(map, a, b) {
            return Some((Pose::new(pa.0, pa.1, rng.uniform(-PI, PI)), pb));
        }
    }
    None
}

fn c9_simulator() -> Check {
    let sim = SimConfig::default();
    let params = PlannerParams::default();
    let ext = ExtractionConfig::default();
    let mg = MapGenConfig {
        width_m: 10.0,
        height_m: 10.0,
        clutter_count: 20,
        clutter_min: 0.5,
        clutter_max: 1.2,
        ..MapGenConfig::default()
    };
    let dir = tempfile::tempdir().unwrap();
    let master = SeededRng::new(0xC9);
    let (mut successes, mut colliding, mut scenarios) = (0, 0, 0);
    for e in 0..20u64 {
        let map = generate_map(format!("suite{e:02}"), &mg, &mut master.derive2(e, 0)).unwrap();
        let mut rng = master.derive2(e, 1);
        let Some((start, goal)) = suite_task(&map, &mut rng) else {
            return check(false, format!("no task found on suite map {e}"));
        };
        let task = NavigationTask {
            id: format!("suite{e:02}"),
            map: &map,
            start,
            goal,
        };
        let r = run_episode(&task, &params, &sim, &mut master.derive2(e, 2)).unwrap();
        if r.outcome == Outcome::Success {
            successes += 1;
            if r.trajectory.steps.iter().any(|s| oracle_collides(&map, s.pose.x, s.pose.y, sim.robot_radius)) {
                colliding += 1;
            }
        }
        let flags: u64 = r.trajectory.steps.iter().map(|s| u64::from(s.suboptimal)).sum();
        if flags != r.suboptimal_total {
            return check(false, format!("episode {e}: suboptimal_total {} but flags sum to {flags}", r.suboptimal_total));
        }
        let path = dir.path().join(format!("e{e}.jsonl"));
        r.trajectory.write(&path).unwrap();
        let back = Trajectory::read(&path).unwrap();
        if back != r.trajectory || back.suboptimal_total() != r.suboptimal_total {
            return check(false, format!("episode {e}: trace does not round-trip through JSONL"));
        }
        let before: Vec<(usize, usize, u64)> = segment_trajectory(&r.trajectory, &ext)
            .iter()
            .map(|s| (s.initial_index, s.final_index, s.suboptimal_total))
            .collect();
        let after: Vec<(usize, usize, u64)> = segment_trajectory(&back, &ext)
            .iter()
            .map(|s| (s.initial_index, s.final_index, s.suboptimal_total))
            .collect();
        if before != after {
            return check(false, format!("episode {e}: extraction differs after the round trip"));
        }
        for (i, j, c) in &after {
            let recount: u64 = back.steps[*i..=*j].iter().map(|s| u64::from(s.suboptimal)).sum();
            if recount != *c {
                return check(false, format!("episode {e}: scenario c̄ {c} but trace flags sum to {recount}"));
            }
        }
        scenarios += after.len();
    }
    check(
        colliding == 0 && successes > 0,
        format!(
            "20 episodes, {successes} successes, {colliding} with a colliding pose; suboptimal counts survive JSONL and extraction ({scenarios} scenarios)"
        ),
    )
}

// ---------------------------------------------------------------------------
// 10. End-to-end smoke on the toy fixture, and 11. the directional check.

fn run_toy(dir: &std::path::Path) -> Vec<envsynth::pipeline::StageOutcome> {
    common::copy_dir(&common::toy_fixture(), dir);
    let (cfg, _) = PipelineConfig::load(&dir.join("envsynth.toml")).unwrap();
    cmd_run_all(&Workspace::new(dir, cfg, false)).unwrap()
}

/// Toy workspace from criterion 10, kept for criterion 11.
static TOY_RUN: std::sync::Mutex<Option<tempfile::TempDir>> = std::sync::Mutex::new(None);

fn c10_end_to_end() -> Check {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let t0 = Instant::now();
    run_toy(a.path());
    let secs = t0.elapsed().as_secs_f64();
    run_toy(b.path());

    let root = a.path().to_path_buf();
    let challenging = EnvironmentSet::load(&root.join("envs/challenging")).unwrap();
    let synthesized = EnvironmentSet::load(&root.join("envs/synthesized")).unwrap();
    let navigable = synthesized.grids().filter(|g| is_navigable_grid(g)).count();
    let similarity = std::fs::read_to_string(root.join("reports/similarity.json"))
        .ok()
        .and_then(|t| serde_json::from_str::<envsynth::pipeline::SimilarityReport>(&t).ok());
    let summary = std::fs::read_to_string(root.join("reports/summary.csv")).unwrap_or_default();
    let table_ok = summary.lines().next().is_some_and(|h| {
        ["max_linear_velocity", "sample_count", "avg_time_s", "success_rate_pct"]
            .iter()
            .all(|c| h.split(',').any(|x| x == *c))
    }) && summary.lines().count() == 5;
    let identical = common::snapshot(a.path()) == common::snapshot(b.path());

    // A rerun in place must reuse every stage.
    let (cfg, _) = PipelineConfig::load(&root.join("envsynth.toml")).unwrap();
    let rerun = cmd_run_all(&Workspace::new(&root, cfg, false)).unwrap();
    let all_cached = rerun.iter().all(|o| o.status == StageStatus::Cached);
    drop(b);
    *TOY_RUN.lock().unwrap() = Some(a);

    check(
        secs < 600.0
            && !challenging.is_empty()
            && synthesized.len() == 10
            && navigable == 10
            && similarity.is_some()
            && table_ok
            && identical
            && all_cached,
        format!(
            "{secs:.0}s (< 600s); {} challenging; {} synthesized, {navigable} navigable; similarity report: {}; metrics summary: {table_ok}; byte-identical rerun: {identical}; cached rerun: {all_cached}",
            challenging.len(),
            synthesized.len(),
            similarity.is_some()
        ),
    )
}

fn c11_directional() -> Check {
    let mut slot = TOY_RUN.lock().unwrap_or_else(|e| e.into_inner());
    let dir = slot.get_or_insert_with(|| {
        let d = tempfile::tempdir().unwrap();
        run_toy(d.path());
        d
    });
    let text = std::fs::read_to_string(dir.path().join("reports/directional.json")).unwrap_or_default();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap_or_default();
    let report = std::fs::read_to_string(dir.path().join("reports/report.md")).unwrap_or_default();
    let logged = report.contains("## Directional check") && !text.is_empty();
    check(
        v["holds"].as_bool().unwrap_or(false),
        format!(
            "on {} held-out challenging environments: synthesized-selected success {}, raw-selected success {}; logged in report: {logged}",
            v["heldout_count"], v["synthesized_success_rate"], v["raw_success_rate"]
        ),
    )
}

#[test]
fn acceptance_criteria() {
    type Criterion = (u32, &'static str, bool, fn() -> Check);
    let criteria: [Criterion; 11] = [
        (1, "gradient oracle", true, c1_gradients),
        (2, "equilibrium value", true, c2_equilibrium),
        (3, "GAN bimodal distribution match", true, c3_bimodal_gan),
        (4, "k-means oracle", true, c4_kmeans),
        (5, "PCA exactness", true, c5_pca),
        (6, "segmentation conformance", true, c6_segmentation),
        (7, "filter conformance", true, c7_filter),
        (8, "rasterization geometry", true, c8_rasterization),
        (9, "simulator soundness", true, c9_simulator),
        (10, "end-to-end smoke", true, c10_end_to_end),
        (11, "directional sanity (reported, not asserted)", false, c11_directional),
    ];
    // ACCEPTANCE_ONLY=3,10 runs a subset.
    let only: Option<Vec<u32>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let mut failed = Vec::new();
    for (n, name, binding, f) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&n)) {
            continue;
        }
        let t0 = Instant::now();
        let result = std::panic::catch_unwind(f).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            check(false, format!("panicked: {msg}"))
        });
        let status = match (result.pass, binding) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "NOT MET",
        };
        let line = format!(
            "acceptance {n:>2} [{status}] {name}: {} [{:.1}s]",
            result.detail,
            t0.elapsed().as_secs_f64()
        );
        let mut out = std::io::stdout().lock();
        let _ = writeln!(out, "{line}");
        let _ = out.flush();
        if binding && !result.pass {
            failed.push(n);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
