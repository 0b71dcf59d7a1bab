//! The pipeline stages behind the CLI subcommands.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use super::cache::{self, Decision};
use super::config::{parse_candidates, Method, PipelineConfig};
use super::report::{csv_table, montage, set_line};
use super::similarity::{similarity, SimilarityReport};
use crate::cluster::{pca_fit, select_representatives};
use crate::envset::{EnvEntry, EnvironmentSet, SetKind};
use crate::error::{Error, Result};
use crate::extraction::{extract_domain, sanitize_id};
use crate::gan::{sample_environments, train_gan};
use crate::rng::SeededRng;
use crate::sim::{deploy_batch, evaluate, is_navigable_grid, EvaluationReport, PlannerParams, WorldMap};
use crate::trace::Trajectory;
use crate::uniform::sample_uniform;

pub const STAGES: [&str; 5] = ["deploy", "extract", "synthesize", "evaluate", "report"];

// Child streams of the master seed, one per consumer.
const STREAM_DEPLOY: u64 = 1;
const STREAM_SYNTH: u64 = 2;
const STREAM_EVAL: u64 = 3;
const STREAM_BASELINE: u64 = 4;

#[derive(Debug, Clone)]
pub struct Workspace {
    pub root: PathBuf,
    pub cfg: PipelineConfig,
    pub force: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageStatus {
    Ran,
    Cached,
}

#[derive(Debug, Clone)]
pub struct StageOutcome {
    pub stage: &'static str,
    pub status: StageStatus,
    pub summary: String,
}

impl Workspace {
    pub fn new(root: impl Into<PathBuf>, cfg: PipelineConfig, force: bool) -> Self {
        Self {
            root: root.into(),
            cfg,
            force,
        }
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.root.join(p)
        }
    }

    pub fn maps_dir(&self) -> PathBuf {
        self.resolve(&self.cfg.maps_dir)
    }

    pub fn traces_dir(&self) -> PathBuf {
        self.resolve(&self.cfg.traces_dir)
    }

    pub fn set_dir(&self, name: &str) -> PathBuf {
        self.resolve(&self.cfg.envs_dir).join(name)
    }

    pub fn models_dir(&self) -> PathBuf {
        self.resolve(&self.cfg.models_dir)
    }

    pub fn reports_dir(&self) -> PathBuf {
        self.resolve(&self.cfg.reports_dir)
    }

    fn master(&self, stream: u64) -> SeededRng {
        SeededRng::new(self.cfg.seed).derive(stream)
    }

    /// Check the stage's stamp, run `body` if needed and record its outputs.
    fn stage(
        &self,
        stage: &'static str,
        settings: serde_json::Value,
        inputs: &[PathBuf],
        body: impl FnOnce() -> Result<(Vec<PathBuf>, String)>,
    ) -> Result<StageOutcome> {
        let key = cache::stage_key(stage, &settings, &cache::hash_files(&self.root, inputs)?);
        if cache::decide(&self.root, stage, &key, self.force)? == Decision::Cached {
            log::info!("{stage}: up to date");
            return Ok(StageOutcome {
                stage,
                status: StageStatus::Cached,
                summary: "up to date".into(),
            });
        }
        let (outputs, summary) = body()?;
        cache::record(&self.root, stage, &key, &outputs)?;
        log::info!("{stage}: {summary}");
        Ok(StageOutcome {
            stage,
            status: StageStatus::Ran,
            summary,
        })
    }
}

fn write(path: &Path, text: impl AsRef<[u8]>) -> Result<PathBuf> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))?;
    Ok(path.to_path_buf())
}

fn json_text<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report serializes") + "\n"
}

fn files_with_ext(dir: &Path, ext: &str) -> Result<Vec<PathBuf>> {
    Ok(cache::list_files(dir)?
        .into_iter()
        .filter(|p| p.parent() == Some(dir) && p.extension().is_some_and(|e| e == ext))
        .collect())
}

fn load_set(ws: &Workspace, name: &str, hint: &str) -> Result<EnvironmentSet> {
    let dir = ws.set_dir(name);
    if !dir.join("set.json").exists() {
        return Err(Error::Value(format!("{} not found; {hint}", dir.display())));
    }
    EnvironmentSet::load(&dir)
}

fn navigable_subset(set: &EnvironmentSet) -> EnvironmentSet {
    EnvironmentSet {
        kind: set.kind,
        entries: set.entries.iter().filter(|e| is_navigable_grid(&e.grid)).cloned().collect(),
    }
}

pub fn cmd_deploy(ws: &Workspace) -> Result<StageOutcome> {
    let maps_dir = ws.maps_dir();
    let map_files = files_with_ext(&maps_dir, "pgm")?;
    if map_files.is_empty() {
        return Err(Error::Value(format!("no .pgm maps found in {}", maps_dir.display())));
    }
    let cfg = &ws.cfg;
    let settings = json!({
        "planner": cfg.planner(),
        "sim": cfg.sim(),
        "deploy": cfg.deploy(),
        "map_resolution": cfg.map_resolution,
        "seed": cfg.seed,
    });
    ws.stage("deploy", settings, &map_files, || {
        let maps: Vec<WorldMap> = map_files
            .iter()
            .map(|p| WorldMap::read_pgm(p, cfg.map_resolution))
            .collect::<Result<_>>()?;
        let trajs = deploy_batch(&maps, &cfg.planner(), &cfg.deploy(), &cfg.sim(), &ws.master(STREAM_DEPLOY))?;
        let dir = ws.traces_dir();
        for old in files_with_ext(&dir, "jsonl")? {
            std::fs::remove_file(&old).map_err(|e| Error::io(&old, e))?;
        }
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let mut outputs = Vec::new();
        let mut manifest = csv::Writer::from_writer(Vec::new());
        manifest
            .write_record(["file", "deployment_id", "map_id", "seed", "steps", "suboptimal_total"])
            .expect("in-memory csv");
        let seed = cfg.seed.to_string();
        for t in &trajs {
            let name = format!("{}.jsonl", sanitize_id(&t.header.deployment_id));
            let path = dir.join(&name);
            t.write(&path)?;
            manifest
                .write_record([
                    name.as_str(),
                    &t.header.deployment_id,
                    &t.header.map_id,
                    &seed,
                    &t.len().to_string(),
                    &t.suboptimal_total().to_string(),
                ])
                .expect("in-memory csv");
            outputs.push(path);
        }
        let text = manifest.into_inner().expect("in-memory csv");
        outputs.push(write(&dir.join("manifest.csv"), text)?);
        Ok((outputs, format!("{} trajectories from {} maps", trajs.len(), maps.len())))
    })
}

pub fn cmd_extract(ws: &Workspace) -> Result<StageOutcome> {
    let dir = ws.traces_dir();
    if !dir.join("manifest.csv").exists() {
        return Err(Error::Value(format!("no trace manifest in {}; run deploy first", dir.display())));
    }
    let traces = files_with_ext(&dir, "jsonl")?;
    let cfg = ws.cfg.extraction();
    ws.stage("extract", json!({ "extraction": cfg }), &traces, || {
        let trajs: Vec<Trajectory> = traces.iter().map(|p| Trajectory::read(p)).collect::<Result<_>>()?;
        let d = extract_domain(&trajs, &cfg)?;
        let mut outputs = Vec::new();
        for (name, set) in [("raw", &d.raw), ("challenging", &d.challenging)] {
            let sd = ws.set_dir(name);
            set.save(&sd)?;
            outputs.extend(cache::list_files(&sd)?);
        }
        let mut summary = format!(
            "{} raw and {} challenging environments from {} trajectories",
            d.raw.len(),
            d.challenging.len(),
            trajs.len()
        );
        if d.skipped > 0 {
            let _ = write!(summary, " ({} degenerate scenarios skipped)", d.skipped);
        }
        Ok((outputs, summary))
    })
}

/// Repeat entries cyclically until the set holds at least `n`.
fn tile_to(set: &EnvironmentSet, n: usize) -> EnvironmentSet {
    let mut entries: Vec<EnvEntry> = set.entries.clone();
    let mut i = 0;
    while entries.len() < n {
        entries.push(set.entries[i % set.len()].clone());
        i += 1;
    }
    EnvironmentSet { kind: set.kind, entries }
}

pub fn cmd_synthesize(ws: &Workspace) -> Result<StageOutcome> {
    let cfg = &ws.cfg;
    let chal_dir = ws.set_dir("challenging");
    let challenging = load_set(ws, "challenging", "run extract first")?;
    if challenging.is_empty() {
        return Err(Error::Value(format!(
            "the challenging set is empty; lower difficulty_threshold (now {}) or deploy more",
            cfg.difficulty_threshold
        )));
    }
    let method_settings = match cfg.method {
        Method::Gan => json!(cfg.gan()),
        Method::Pca => json!(cfg.cluster()),
        Method::Rs => json!({}),
    };
    let settings = json!({
        "method": cfg.method,
        "count": cfg.count,
        "seed": cfg.seed,
        "params": method_settings,
    });
    let inputs = cache::list_files(&chal_dir)?;
    ws.stage("synthesize", settings, &inputs, || {
        let source = navigable_subset(&challenging);
        if source.is_empty() {
            return Err(Error::Value(format!(
                "none of the {} challenging environments is navigable",
                challenging.len()
            )));
        }
        let mut rng = ws.master(STREAM_SYNTH);
        let models = ws.models_dir();
        let mut outputs = Vec::new();
        let synthesized = match cfg.method {
            Method::Gan => {
                let gan_cfg = cfg.gan();
                let data = tile_to(&source, gan_cfg.batch_size);
                if data.len() > source.len() {
                    log::info!("gan: {} navigable sources repeated to fill a batch of {}", source.len(), gan_cfg.batch_size);
                }
                let model = train_gan(&data, &gan_cfg)?;
                let path = models.join("gan.ckpt");
                std::fs::create_dir_all(&models).map_err(|e| Error::io(&models, e))?;
                model.save(&path)?;
                outputs.push(path);
                sample_environments(&model, cfg.count, &mut rng)?
            }
            Method::Pca => {
                if source.len() < 2 {
                    return Err(Error::Value("pca needs at least two navigable challenging environments".into()));
                }
                let cl = cfg.cluster();
                let k = cl.k.min(source.len() - 1);
                if k < cl.k {
                    log::warn!("pca: only {} sources, using {k} components instead of {}", source.len(), cl.k);
                }
                let data: Vec<Vec<f64>> = source.grids().map(|g| g.to_f64()).collect();
                let pca = pca_fit(&data, k)?;
                let path = models.join("pca.ckpt");
                std::fs::create_dir_all(&models).map_err(|e| Error::io(&models, e))?;
                pca.save(&path)?;
                outputs.push(path);
                select_representatives(&source, &pca, cl.m, cl.n, &mut rng)?
            }
            Method::Rs => sample_uniform(&source, cfg.count, &mut rng)?,
        };
        let dir = ws.set_dir("synthesized");
        synthesized.save(&dir)?;
        outputs.extend(cache::list_files(&dir)?);
        let sim = similarity(&synthesized, &challenging);
        outputs.push(write(&ws.reports_dir().join("similarity.json"), json_text(&sim))?);
        Ok((
            outputs,
            format!(
                "{} environments by {} from {} navigable of {} challenging",
                synthesized.len(),
                cfg.method,
                source.len(),
                challenging.len()
            ),
        ))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Selection {
    pub candidate: usize,
    pub params: PlannerParams,
    pub success_rate: f64,
    pub mean_time: Option<f64>,
    /// False when no candidate reached the success floor and the most
    /// successful one was taken instead.
    pub met_floor: bool,
}

/// Fastest candidate among those meeting `floor`; otherwise the most
/// successful (then fastest). Ties keep the earlier candidate.
pub fn select_best(candidates: &[PlannerParams], reports: &[EvaluationReport], floor: f64) -> Option<Selection> {
    let time = |r: &EvaluationReport| r.mean_time.unwrap_or(f64::INFINITY);
    let eligible: Vec<usize> = (0..reports.len()).filter(|&i| reports[i].success_rate >= floor && reports[i].successes > 0).collect();
    let (best, met_floor) = if !eligible.is_empty() {
        let b = eligible
            .iter()
            .copied()
            .reduce(|a, b| if time(&reports[b]) < time(&reports[a]) { b } else { a })?;
        (b, true)
    } else {
        let b = (0..reports.len()).reduce(|a, b| {
            let (ra, rb) = (&reports[a], &reports[b]);
            if rb.success_rate > ra.success_rate || (rb.success_rate == ra.success_rate && time(rb) < time(ra)) {
                b
            } else {
                a
            }
        })?;
        (b, false)
    };
    Some(Selection {
        candidate: best,
        params: candidates[best].clone(),
        success_rate: reports[best].success_rate,
        mean_time: reports[best].mean_time,
        met_floor,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_default()
}

fn evaluate_all(ws: &Workspace, set: &EnvironmentSet, candidates: &[PlannerParams], stream: u64) -> Result<Vec<EvaluationReport>> {
    let rng = ws.master(stream);
    candidates
        .iter()
        .map(|p| evaluate(set, p, ws.cfg.trials_per_env, &ws.cfg.sim(), &rng))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectionalCheck {
    pub heldout_count: usize,
    pub synthesized_choice: usize,
    pub synthesized_success_rate: f64,
    pub raw_subset_count: usize,
    pub raw_choice: usize,
    pub raw_success_rate: f64,
    pub holds: bool,
}

fn directional(ws: &Workspace, candidates: &[PlannerParams], chosen: &Selection) -> Result<Option<DirectionalCheck>> {
    if !ws.set_dir("raw").join("set.json").exists() || !ws.set_dir("challenging").join("set.json").exists() {
        return Ok(None);
    }
    let raw = navigable_subset(&EnvironmentSet::load(&ws.set_dir("raw"))?);
    let heldout = navigable_subset(&EnvironmentSet::load(&ws.set_dir("challenging"))?);
    if raw.is_empty() || heldout.is_empty() {
        return Ok(None);
    }
    let mut rng = ws.master(STREAM_BASELINE);
    let mut idx: Vec<usize> = (0..raw.len()).collect();
    rng.shuffle(&mut idx);
    idx.truncate(ws.cfg.count.clamp(1, raw.len()));
    idx.sort_unstable();
    let subset = EnvironmentSet {
        kind: SetKind::Raw,
        entries: idx.iter().map(|&i| raw.entries[i].clone()).collect(),
    };
    let baseline_reports = evaluate_all(ws, &subset, candidates, STREAM_BASELINE)?;
    let baseline = select_best(candidates, &baseline_reports, ws.cfg.success_floor).expect("candidates non-empty");
    let on_heldout = |p: &PlannerParams| -> Result<f64> {
        Ok(evaluate(&heldout, p, ws.cfg.trials_per_env, &ws.cfg.sim(), &ws.master(STREAM_EVAL).derive(99))?.success_rate)
    };
    let s = on_heldout(&chosen.params)?;
    let r = on_heldout(&baseline.params)?;
    Ok(Some(DirectionalCheck {
        heldout_count: heldout.len(),
        synthesized_choice: chosen.candidate,
        synthesized_success_rate: s,
        raw_subset_count: subset.len(),
        raw_choice: baseline.candidate,
        raw_success_rate: r,
        holds: s >= r,
    }))
}

pub fn cmd_evaluate(ws: &Workspace) -> Result<StageOutcome> {
    let cfg = &ws.cfg;
    let name = cfg.eval_set.clone();
    let set = load_set(ws, &name, "run the earlier stages first")?;
    let dir = ws.set_dir(&name);
    if let Some(e) = set.entries.iter().find(|e| !is_navigable_grid(&e.grid)) {
        return Err(Error::Value(format!("{} is not navigable", dir.join(format!("{}.pgm", e.id)).display())));
    }
    let candidates = parse_candidates(&cfg.candidates, &cfg.planner())?;
    let with_baseline = name == "synthesized";
    let mut inputs = cache::list_files(&dir)?;
    if with_baseline {
        for other in ["raw", "challenging"] {
            inputs.extend(cache::list_files(&ws.set_dir(other))?);
        }
    }
    let settings = json!({
        "eval_set": name,
        "candidates": candidates,
        "trials_per_env": cfg.trials_per_env,
        "success_floor": cfg.success_floor,
        "sim": cfg.sim(),
        "seed": cfg.seed,
    });
    ws.stage("evaluate", settings, &inputs, || {
        let reports = evaluate_all(ws, &set, &candidates, STREAM_EVAL)?;
        let out = ws.reports_dir();
        let mut metrics = String::from("candidate,env_id,trials,successes,success_rate,mean_time,std_time\n");
        let mut summary = String::from(
            "candidate,max_linear_velocity,max_angular_velocity,sample_count,inflation_radius,recovery_reverse_velocity,environments,avg_time_s,success_rate_pct\n",
        );
        for (c, (p, r)) in candidates.iter().zip(&reports).enumerate() {
            for e in &r.per_env {
                let _ = writeln!(
                    metrics,
                    "{c},{},{},{},{:.4},{},{}",
                    e.env_id,
                    e.trials,
                    e.successes,
                    e.success_rate,
                    opt(e.mean_time),
                    opt(e.std_time)
                );
            }
            let _ = writeln!(
                summary,
                "{c},{},{},{},{},{},{},{},{:.1}",
                p.max_linear_velocity,
                p.max_angular_velocity,
                p.sample_count,
                p.inflation_radius,
                p.recovery_reverse_velocity,
                r.per_env.len(),
                opt(r.mean_time),
                100.0 * r.success_rate
            );
        }
        let mut outputs = vec![write(&out.join("metrics.csv"), metrics)?, write(&out.join("summary.csv"), summary)?];
        let best = select_best(&candidates, &reports, cfg.success_floor).expect("candidates non-empty");
        outputs.push(write(&out.join("best_params.json"), json_text(&json!({ "eval_set": name, "selection": best })))?);
        let directional_path = out.join("directional.json");
        if with_baseline {
            if let Some(d) = directional(ws, &candidates, &best)? {
                outputs.push(write(&directional_path, json_text(&d))?);
            }
        } else if directional_path.exists() {
            std::fs::remove_file(&directional_path).map_err(|e| Error::io(&directional_path, e))?;
        }
        Ok((
            outputs,
            format!(
                "{} candidates on {} environments; selected candidate {} ({:.1}% success)",
                candidates.len(),
                set.len(),
                best.candidate,
                100.0 * best.success_rate
            ),
        ))
    })
}

pub fn cmd_report(ws: &Workspace) -> Result<StageOutcome> {
    let out = ws.reports_dir();
    let mut inputs = Vec::new();
    for name in ["raw", "challenging", "synthesized"] {
        inputs.extend(cache::list_files(&ws.set_dir(name))?);
    }
    for f in ["similarity.json", "summary.csv", "best_params.json", "directional.json"] {
        let p = out.join(f);
        if p.exists() {
            inputs.push(p);
        }
    }
    ws.stage("report", json!({}), &inputs, || {
        let mut outputs = Vec::new();
        let mut md = String::from("# Environment synthesis report\n\n## Environment sets\n\n");
        for name in ["raw", "challenging", "synthesized"] {
            let dir = ws.set_dir(name);
            let set = if dir.join("set.json").exists() { Some(EnvironmentSet::load(&dir)?) } else { None };
            let _ = writeln!(md, "{}", set_line(name, set.as_ref()));
            let gallery = out.join(format!("montage_{name}.pgm"));
            match set.as_ref().and_then(|s| montage(s.grids().collect::<Vec<_>>().into_iter())) {
                Some(img) => {
                    outputs.push(write(&gallery, img)?);
                    let _ = writeln!(md, "  - gallery: `{}`", gallery.file_name().expect("name").to_string_lossy());
                }
                None if gallery.exists() => std::fs::remove_file(&gallery).map_err(|e| Error::io(&gallery, e))?,
                None => {}
            }
        }

        md.push_str("\n## Similarity of synthesized to challenging\n\n");
        let sim_path = out.join("similarity.json");
        if sim_path.exists() {
            let text = std::fs::read_to_string(&sim_path).map_err(|e| Error::io(&sim_path, e))?;
            let s: SimilarityReport = serde_json::from_str(&text).map_err(|e| Error::Parse {
                path: sim_path.clone(),
                line: e.line(),
                message: e.to_string(),
            })?;
            match &s.nearest_hamming {
                Some(h) => {
                    let _ = writeln!(
                        md,
                        "- nearest-neighbor Hamming distance: mean {:.2}, median {:.1}, max {}",
                        h.mean, h.median, h.max
                    );
                }
                None => md.push_str("- nearest-neighbor Hamming distance: n/a (0 environments)\n"),
            }
            let _ = writeln!(md, "- occupancy-density histogram L1 distance: {:.4}", s.density_l1);
        } else {
            md.push_str("not computed\n");
        }

        md.push_str("\n## Planner parameter evaluation\n\n");
        let summary_path = out.join("summary.csv");
        if summary_path.exists() {
            let text = std::fs::read_to_string(&summary_path).map_err(|e| Error::io(&summary_path, e))?;
            md.push_str(&csv_table(&text));
            let best_path = out.join("best_params.json");
            if let Ok(best) = std::fs::read_to_string(&best_path) {
                let v: serde_json::Value = serde_json::from_str(&best).unwrap_or_default();
                let _ = writeln!(md, "\nselected candidate: {}", v["selection"]["candidate"]);
            }
        } else {
            md.push_str("not computed\n");
        }

        md.push_str("\n## Directional check\n\n");
        let dir_path = out.join("directional.json");
        if let Ok(text) = std::fs::read_to_string(&dir_path) {
            let v: serde_json::Value = serde_json::from_str(&text).unwrap_or_default();
            let pct = |k: &str| v[k].as_f64().map(|x| format!("{:.1}%", 100.0 * x)).unwrap_or_else(|| "n/a".into());
            let _ = writeln!(
                md,
                "On {} navigable challenging environments, parameters chosen on the synthesized set \
                 (candidate {}) succeed {}; parameters chosen on {} random raw environments (candidate {}) \
                 succeed {}. Synthesized at least as good: {}.",
                v["heldout_count"],
                v["synthesized_choice"],
                pct("synthesized_success_rate"),
                v["raw_subset_count"],
                v["raw_choice"],
                pct("raw_success_rate"),
                v["holds"]
            );
        } else {
            md.push_str("not computed\n");
        }
        outputs.push(write(&out.join("report.md"), md)?);
        Ok((outputs, format!("report written to {}", out.join("report.md").display())))
    })
}

type StageFn = fn(&Workspace) -> Result<StageOutcome>;

pub fn cmd_run_all(ws: &Workspace) -> Result<Vec<StageOutcome>> {
    let mut out = Vec::new();
    let stages: [(&str, StageFn); 5] = [
        ("deploy", cmd_deploy),
        ("extract", cmd_extract),
        ("synthesize", cmd_synthesize),
        ("evaluate", cmd_evaluate),
        ("report", cmd_report),
    ];
    for (name, f) in stages {
        out.push(f(ws).map_err(|e| e.in_stage(name))?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::evaluate::EnvMetrics;

    fn report(rate: f64, time: Option<f64>) -> EvaluationReport {
        EvaluationReport {
            per_env: Vec::<EnvMetrics>::new(),
            trials: 10,
            successes: (rate * 10.0) as usize,
            collisions: 0,
            timeouts: 10 - (rate * 10.0) as usize,
            success_rate: rate,
            mean_time: time,
        }
    }

    #[test]
    fn selection_rules() {
        let c = vec![PlannerParams::dwa_slow(), PlannerParams::dwa_fast()];
        let s = select_best(&c, &[report(0.0, None), report(1.0, Some(12.0))], 0.5).unwrap();
        assert_eq!((s.candidate, s.met_floor), (1, true));
        let s = select_best(&c, &[report(0.9, Some(20.0)), report(0.6, Some(10.0))], 0.5).unwrap();
        assert_eq!(s.candidate, 1);
        let s = select_best(&c, &[report(0.2, Some(20.0)), report(0.4, Some(30.0))], 0.5).unwrap();
        assert_eq!((s.candidate, s.met_floor), (1, false));
        let s = select_best(&c, &[report(1.0, Some(10.0)), report(1.0, Some(10.0))], 0.5).unwrap();
        assert_eq!(s.candidate, 0);
    }

    #[test]
    fn tiling_repeats_in_order() {
        let set = EnvironmentSet {
            kind: SetKind::Challenging,
            entries: (0..3)
                .map(|i| EnvEntry {
                    id: format!("e{i}"),
                    grid: crate::grid::OccupancyGrid::empty(),
                    c_bar: Some(60),
                    provenance: crate::envset::Provenance::Generated { draw: i },
                })
                .collect(),
        };
        let t = tile_to(&set, 7);
        let ids: Vec<&str> = t.entries.iter().map(|e| e.id.as_str()).collect();
        assert_eq!(ids, ["e0", "e1", "e2", "e0", "e1", "e2", "e0"]);
        assert_eq!(tile_to(&set, 2).len(), 3);
    }
}
