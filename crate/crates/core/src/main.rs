use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use envsynth::error::{Error, Result};
use envsynth::gan::GeneratorLoss;
use envsynth::pipeline::{self, Method, PipelineConfig, StageOutcome, Workspace, WorkspaceLock};
use envsynth::rng::SeededRng;
use envsynth::sim::mapgen::{generate_map, MapGenConfig};

const DEFAULT_CONFIG: &str = "envsynth.toml";

#[derive(Parser)]
#[command(name = "envsynth", version, about = "Mine challenging navigation scenarios and synthesize training environments")]
struct Cli {
    /// Pipeline config (TOML). Defaults to ./envsynth.toml when present.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Rerun stages even when their stamps disagree with the current settings.
    #[arg(long, global = true)]
    force: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the base planner on every map and record traces.
    Deploy,
    /// Segment traces into environments and keep the challenging ones.
    Extract,
    /// Build the training set from the challenging environments.
    Synthesize(SynthArgs),
    /// Score planner parameter candidates on an environment set.
    Evaluate(EvalArgs),
    /// Write galleries, similarity and metrics tables.
    Report,
    /// Run every stage in order.
    RunAll {
        #[command(flatten)]
        synth: SynthArgs,
        #[command(flatten)]
        eval: EvalArgs,
    },
    /// Write procedurally generated PGM maps.
    GenMaps(GenArgs),
    /// Print the effective configuration as TOML.
    PrintConfig,
}

#[derive(Args, Default)]
struct SynthArgs {
    #[arg(long, value_parser = parse_method)]
    method: Option<Method>,
    /// Number of environments to synthesize.
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    adam_beta1: Option<f64>,
    #[arg(long)]
    adam_beta2: Option<f64>,
    #[arg(long)]
    adam_epsilon: Option<f64>,
    #[arg(long)]
    d_steps_per_g_step: Option<usize>,
    /// non_saturating or minimax.
    #[arg(long, value_parser = parse_loss)]
    generator_loss: Option<GeneratorLoss>,
    #[arg(long)]
    latent_dim: Option<usize>,
    /// PCA components.
    #[arg(long)]
    k: Option<usize>,
    /// Clusters.
    #[arg(long)]
    m: Option<usize>,
    /// Picks per cluster.
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Args, Default)]
struct EvalArgs {
    /// Environment set to score (raw, challenging or synthesized).
    #[arg(long = "set")]
    eval_set: Option<String>,
    /// Parameter grid, e.g. "max_linear_velocity=0.5,1.0;sample_count=10,20".
    #[arg(long)]
    candidates: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    success_floor: Option<f64>,
}

#[derive(Args)]
struct GenArgs {
    /// Output directory; defaults to the configured maps directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    count: usize,
    /// Map generator settings (TOML), merged over the defaults.
    #[arg(long)]
    mapgen: Option<PathBuf>,
    #[arg(long)]
    clutter: Option<usize>,
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_loss(s: &str) -> std::result::Result<GeneratorLoss, String> {
    match s {
        "non_saturating" => Ok(GeneratorLoss::NonSaturating),
        "minimax" => Ok(GeneratorLoss::Minimax),
        _ => Err(format!("unknown generator loss `{s}` (non_saturating or minimax)")),
    }
}

macro_rules! apply {
    ($cfg:expr, $args:expr, $($field:ident => $target:ident),* $(,)?) => {
        $(if let Some(v) = $args.$field.clone() { $cfg.$target = v; })*
    };
}

impl SynthArgs {
    fn apply(&self, cfg: &mut PipelineConfig) {
        apply!(cfg, self,
            method => method, count => count, epochs => epochs, batch_size => batch_size,
            learning_rate => learning_rate, adam_beta1 => adam_beta1, adam_beta2 => adam_beta2,
            adam_epsilon => adam_epsilon, d_steps_per_g_step => d_steps_per_g_step,
            generator_loss => generator_loss, latent_dim => latent_dim,
            k => pca_components, m => clusters, n => per_cluster,
        );
    }
}

impl EvalArgs {
    fn apply(&self, cfg: &mut PipelineConfig) {
        apply!(cfg, self,
            eval_set => eval_set, candidates => candidates, trials => trials_per_env,
            success_floor => success_floor,
        );
    }
}

fn load_config(cli: &Cli) -> Result<(PipelineConfig, PathBuf)> {
    let (mut cfg, root) = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None if Path::new(DEFAULT_CONFIG).exists() => PipelineConfig::load(Path::new(DEFAULT_CONFIG))?,
        None => (PipelineConfig::default(), PathBuf::from(".")),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    match &cli.command {
        Command::Synthesize(a) => a.apply(&mut cfg),
        Command::Evaluate(a) => a.apply(&mut cfg),
        Command::RunAll { synth, eval } => {
            synth.apply(&mut cfg);
            eval.apply(&mut cfg);
        }
        _ => {}
    }
    cfg.validate()?;
    Ok((cfg, root))
}

fn print_outcomes(outcomes: &[StageOutcome]) {
    for o in outcomes {
        let status = match o.status {
            pipeline::StageStatus::Ran => "ran",
            pipeline::StageStatus::Cached => "cached",
        };
        println!("{:<11} {:<7} {}", o.stage, status, o.summary);
    }
}

fn gen_maps(ws: &Workspace, args: &GenArgs) -> Result<()> {
    let mut mg = match &args.mapgen {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            toml::from_str(&text).map_err(|e| Error::config(format!("{}: {e}", p.display())))?
        }
        None => MapGenConfig::default(),
    };
    if let Some(c) = args.clutter {
        mg.clutter_count = c;
    }
    mg.resolution = ws.cfg.map_resolution;
    let out = args.out.clone().unwrap_or_else(|| ws.maps_dir());
    std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    let master = SeededRng::new(ws.cfg.seed);
    for i in 0..args.count {
        let id = format!("map{i:02}");
        let map = generate_map(&id, &mg, &mut master.derive(i as u64))?;
        let path = out.join(format!("{id}.pgm"));
        std::fs::write(&path, map.to_pgm()).map_err(|e| Error::io(&path, e))?;
        println!("{}", path.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let (cfg, root) = load_config(&cli)?;
    let ws = Workspace::new(root, cfg, cli.force);
    match &cli.command {
        Command::PrintConfig => {
            print!("{}", ws.cfg.to_toml());
            return Ok(());
        }
        Command::GenMaps(args) => return gen_maps(&ws, args),
        _ => {}
    }
    let _lock = WorkspaceLock::acquire(&ws.root)?;
    let outcomes = match &cli.command {
        Command::Deploy => vec![pipeline::cmd_deploy(&ws)?],
        Command::Extract => vec![pipeline::cmd_extract(&ws)?],
        Command::Synthesize(_) => vec![pipeline::cmd_synthesize(&ws)?],
        Command::Evaluate(_) => vec![pipeline::cmd_evaluate(&ws)?],
        Command::Report => vec![pipeline::cmd_report(&ws)?],
        Command::RunAll { .. } => pipeline::cmd_run_all(&ws)?,
        Command::GenMaps(_) | Command::PrintConfig => unreachable!(),
    };
    print_outcomes(&outcomes);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.class().exit_code() as u8)
        }
    }
}
