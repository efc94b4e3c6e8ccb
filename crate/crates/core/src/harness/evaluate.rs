use super::config::{HarnessError, RunConfig};
use super::policy::{ModelPolicy, Policy};
use super::rollout::{run_wave, EpisodeRecord};
use crate::curriculum::max_task;
use crate::env::{ActionSpace, EnvConfig};
use crate::learner::Checkpoint;
use crate::netsim::PARAMETRIC_VERBS_PER_HOST;
use crate::pddl::Catalog;
use crate::rng::{derive_seed, tag};
use crate::universe::{RedTtp, TaskSpec, UniverseConfig};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRow {
    pub episode: usize,
    pub goal_metric_id: u32,
    pub red_ttp: RedTtp,
    pub seed: u64,
    pub reward: f64,
    pub compromise: bool,
    pub declared_victory: bool,
    pub qos: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub episodes: usize,
    pub mean_reward: f64,
    pub compromise_rate: f64,
    pub declared_victory_rate: f64,
    pub qos_mean: f64,
    pub rows: Vec<EpisodeRow>,
}

impl EvalReport {
    fn from_records(records: &[EpisodeRecord]) -> Self {
        let rows: Vec<EpisodeRow> = records
            .iter()
            .enumerate()
            .map(|(i, e)| EpisodeRow {
                episode: i,
                goal_metric_id: e.task.goal_metric_id,
                red_ttp: e.task.red_ttp,
                seed: e.task.seed,
                reward: e.ret,
                compromise: e.outcome.blue_loss,
                declared_victory: e.fluents.declared_victory,
                qos: e.outcome.qos_normalized,
                steps: e.steps.len(),
            })
            .collect();
        let n = rows.len().max(1) as f64;
        let rate = |f: &dyn Fn(&EpisodeRow) -> bool| rows.iter().filter(|r| f(r)).count() as f64 / n;
        EvalReport {
            episodes: rows.len(),
            mean_reward: rows.iter().map(|r| r.reward).sum::<f64>() / n,
            compromise_rate: rate(&|r| r.compromise),
            declared_victory_rate: rate(&|r| r.declared_victory),
            qos_mean: rows.iter().map(|r| r.qos).sum::<f64>() / n,
            rows,
        }
    }
}

pub(crate) fn write_traces(dir: &Path, prefix: &str, records: &[EpisodeRecord]) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    for (i, r) in records.iter().enumerate() {
        let path = dir.join(format!("{prefix}{i:04}.jsonl"));
        let mut f = std::io::BufWriter::new(std::fs::File::create(&path).map_err(|e| HarnessError::io(&path, e))?);
        for t in &r.trace {
            serde_json::to_writer(&mut f, t)?;
            f.write_all(b"\n")?;
        }
    }
    Ok(())
}

/// Plays `episodes` episodes cycling through `tasks`. Episode `i` reseeds its
/// task from `(seed, i)` so repeated tasks see fresh randomness.
pub fn evaluate_policy(
    policy: &dyn Policy,
    env_cfg: &EnvConfig,
    catalog: &Arc<Catalog>,
    tasks: &[TaskSpec],
    episodes: usize,
    seed: u64,
    trace_dir: Option<&Path>,
) -> Result<EvalReport, HarnessError> {
    if tasks.is_empty() {
        return Err(HarnessError::Config("no evaluation tasks".into()));
    }
    let list: Vec<TaskSpec> = (0..episodes)
        .map(|i| tasks[i % tasks.len()].with_seed(derive_seed(seed, &[tag::EVAL, tag::TASK, i as u64])))
        .collect();
    let records = run_wave(
        policy,
        env_cfg,
        catalog,
        &list,
        seed,
        &[tag::EVAL, tag::POLICY],
        0,
        trace_dir.is_some(),
    )?;
    if let Some(dir) = trace_dir {
        write_traces(dir, "episode_", &records)?;
    }
    Ok(EvalReport::from_records(&records))
}

/// Environment settings matching a checkpoint when no run config is given.
fn env_for(ck: &Checkpoint) -> EnvConfig {
    let actions = ck.model.actions;
    let action_space = if actions == crate::netsim::AbstractAction::COUNT {
        ActionSpace::Abstract
    } else {
        ActionSpace::Parametric {
            max_hosts: ((actions - 1) / PARAMETRIC_VERBS_PER_HOST) as u32,
        }
    };
    EnvConfig {
        obs: ck.obs.clone(),
        action_space,
        ..EnvConfig::default()
    }
}

/// Reads tasks from a JSON file holding one task or an array of tasks.
pub fn load_tasks(path: &Path) -> Result<Vec<TaskSpec>, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| HarnessError::Config(e.to_string()))?;
    let tasks = match value {
        serde_json::Value::Array(_) => serde_json::from_value(value),
        other => serde_json::from_value(other).map(|t| vec![t]),
    };
    tasks.map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
}

/// Evaluates a checkpoint on the tasks in `task_path`.
pub fn cmd_evaluate(
    checkpoint: &Path,
    task_path: &Path,
    episodes: usize,
    seed: u64,
    config: Option<&RunConfig>,
    trace_dir: Option<&Path>,
) -> Result<EvalReport, HarnessError> {
    let ck = Checkpoint::load(checkpoint)?;
    let (env_cfg, catalog) = match config {
        Some(c) => (c.env.clone(), c.load_catalog()?),
        None => (env_for(&ck), Catalog::shipped()),
    };
    let obs = env_cfg.obs.dim(&catalog);
    let actions = env_cfg.action_space.len();
    let embedding = env_cfg.obs.goal_encoding.embedding(&catalog);
    if obs != ck.model.obs_dim || actions != ck.model.actions || embedding != ck.model.policy.embedding {
        return Err(HarnessError::DimMismatch {
            expected_obs: ck.model.obs_dim,
            expected_actions: ck.model.actions,
            obs,
            actions,
        });
    }
    let tasks = load_tasks(task_path)?;
    let policy = ModelPolicy {
        model: &ck.model,
        explore: ck.model.config.explore_in_eval,
    };
    evaluate_policy(&policy, &env_cfg, &Arc::new(catalog), &tasks, episodes, seed, trace_dir)
}

/// Held-out test grid: the universe's largest network and deviation
/// settings, crossed with every TTP of the top level and every goal in
/// `goals`.
pub fn heldout_tasks(universe: &UniverseConfig, goals: &[u32]) -> Vec<TaskSpec> {
    let base = max_task(universe);
    let ttps = universe.level(universe.max_level).ttps;
    ttps.iter()
        .flat_map(|&ttp| {
            let base = &base;
            goals.iter().map(move |&g| TaskSpec {
                red_ttp: ttp,
                goal_metric_id: g,
                ..base.clone()
            })
        })
        .collect()
}
