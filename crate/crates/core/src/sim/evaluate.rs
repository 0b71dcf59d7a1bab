//! Success-rate and time-cost metrics over environment sets.

use rayon::prelude::*;
use serde::Serialize;

use crate::envset::EnvironmentSet;
use crate::error::{Error, Result};
use crate::rng::SeededRng;

use super::controller::PlannerParams;
use super::episode::{run_episode, scenario_map, NavigationTask, Outcome, SimConfig};
use super::nav::is_navigable_grid;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvMetrics {
    pub env_id: String,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    /// Over successful trials only; `None` without successes.
    pub mean_time: Option<f64>,
    /// Population standard deviation over successful trials.
    pub std_time: Option<f64>,
    pub mean_suboptimal: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub per_env: Vec<EnvMetrics>,
    pub trials: usize,
    pub successes: usize,
    pub collisions: usize,
    pub timeouts: usize,
    pub success_rate: f64,
    pub mean_time: Option<f64>,
}

/// Success rate, mean and population std of the successful times.
pub fn summarize(results: &[(Outcome, f64)]) -> (usize, f64, Option<f64>, Option<f64>) {
    let times: Vec<f64> = results
        .iter()
        .filter(|(o, _)| *o == Outcome::Success)
        .map(|&(_, t)| t)
        .collect();
    let rate = if results.is_empty() { 0.0 } else { times.len() as f64 / results.len() as f64 };
    if times.is_empty() {
        return (0, rate, None, None);
    }
    let mean = times.iter().sum::<f64>() / times.len() as f64;
    let var = times.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / times.len() as f64;
    (times.len(), rate, Some(mean), Some(var.sqrt()))
}

/// Run `trials` episodes on every environment. Trial `t` on environment `i`
/// uses the stream `rng.derive2(i, t)`, so the result does not depend on
/// scheduling.
pub fn evaluate(envs: &EnvironmentSet, params: &PlannerParams, trials: usize, cfg: &SimConfig, rng: &SeededRng) -> Result<EvaluationReport> {
    params.validate()?;
    cfg.validate()?;
    if let Some(e) = envs.entries.iter().find(|e| !is_navigable_grid(&e.grid)) {
        return Err(Error::Value(format!("environment {} is not navigable", e.id)));
    }
    let runs: Vec<Vec<(Outcome, f64, u64)>> = envs
        .entries
        .par_iter()
        .enumerate()
        .map(|(i, e)| {
            let map = scenario_map(&e.id, &e.grid);
            (0..trials)
                .into_par_iter()
                .map(|t| {
                    let task = NavigationTask::scenario(format!("{}-t{t:02}", e.id), &map);
                    let r = run_episode(&task, params, cfg, &mut rng.derive2(i as u64, t as u64))?;
                    Ok((r.outcome, r.time_cost, r.suboptimal_total))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut per_env = Vec::with_capacity(envs.len());
    let mut all = Vec::new();
    let (mut collisions, mut timeouts) = (0, 0);
    for (e, r) in envs.entries.iter().zip(&runs) {
        let pairs: Vec<(Outcome, f64)> = r.iter().map(|&(o, t, _)| (o, t)).collect();
        let (successes, success_rate, mean_time, std_time) = summarize(&pairs);
        collisions += r.iter().filter(|x| x.0 == Outcome::Collision).count();
        timeouts += r.iter().filter(|x| x.0 == Outcome::Timeout).count();
        let mean_suboptimal = if r.is_empty() { 0.0 } else { r.iter().map(|x| x.2 as f64).sum::<f64>() / r.len() as f64 };
        per_env.push(EnvMetrics {
            env_id: e.id.clone(),
            trials,
            successes,
            success_rate,
            mean_time,
            std_time,
            mean_suboptimal,
        });
        all.extend(pairs);
    }
    let (successes, success_rate, mean_time, _) = summarize(&all);
    Ok(EvaluationReport {
        per_env,
        trials: all.len(),
        successes,
        collisions,
        timeouts,
        success_rate,
        mean_time,
    })
}
