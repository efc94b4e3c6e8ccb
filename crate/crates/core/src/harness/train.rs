use super::config::{HarnessError, RunConfig};
use super::evaluate::write_traces;
use super::policy::ModelPolicy;
use super::rollout::{collect_batch, run_wave, EpisodeStats};
use crate::curriculum::{CurriculumState, HistoryEntry};
use crate::learner::{Checkpoint, Learner, PpoModel, TrainMetrics};
use crate::rng::{rng_for, tag};
use crate::universe::TaskSpec;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;
use std::sync::Arc;

/// Version of the metrics line format.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeaderRecord {
    pub schema_version: u32,
    pub kind: String,
    pub seed: u64,
    pub obs_dim: usize,
    pub actions: usize,
    pub config: RunConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalWindow {
    pub mean_reward: f64,
    pub episodes: usize,
    pub compromise_rate: f64,
    pub level_before: u32,
    pub level_after: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub schema_version: u32,
    pub kind: String,
    pub seed: u64,
    pub iteration: u64,
    /// Environment steps consumed so far.
    pub steps: u64,
    /// Curriculum level the batch was drawn at.
    pub level: u32,
    pub episodes: usize,
    pub mean_reward: f64,
    pub compromise_rate: f64,
    pub declared_victory_rate: f64,
    pub qos_mean: f64,
    pub mean_episode_length: f64,
    pub fluent_means: BTreeMap<String, f64>,
    pub task_difficulty: f64,
    pub task_params: Vec<f64>,
    pub learner: TrainMetrics,
    pub eval: Option<EvalWindow>,
    pub curriculum: Option<HistoryEntry>,
}

#[derive(Debug, Clone)]
pub struct TrainSummary {
    pub iterations: u64,
    pub steps: u64,
    pub level: u32,
    pub eval_means: Vec<f64>,
    pub model: PpoModel,
    pub curriculum: CurriculumState,
}

fn emit<T: Serialize>(out: &mut dyn Write, rec: &T) -> Result<(), HarnessError> {
    serde_json::to_writer(&mut *out, rec)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

/// Trains one seed, writing a header line then one line per iteration.
///
/// Output depends only on `cfg` and `seed`.
pub fn cmd_train(cfg: &RunConfig, seed: u64, out: &mut dyn Write) -> Result<TrainSummary, HarnessError> {
    cfg.validate()?;
    let catalog = Arc::new(cfg.load_catalog()?);
    let obs_dim = cfg.env.obs.dim(&catalog);
    let actions = cfg.env.action_space.len();
    let embedding = cfg.env.obs.goal_encoding.embedding(&catalog);
    let mut model = PpoModel::new(cfg.learner.clone(), obs_dim, actions, embedding, seed)?;
    let mut curriculum = CurriculumState::new(cfg.curriculum.clone(), &cfg.universe)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| HarnessError::Config(e.to_string()))?;

    emit(
        out,
        &HeaderRecord {
            schema_version: SCHEMA_VERSION,
            kind: "header".into(),
            seed,
            obs_dim,
            actions,
            config: cfg.clone(),
        },
    )?;

    let mut task_rng = rng_for(seed, &[tag::TASK]);
    let mut curriculum_rng = rng_for(seed, &[tag::CURRICULUM]);
    let mut next_episode = 0u64;
    let mut steps = 0u64;
    let mut iteration = 0u64;
    let mut eval_means = Vec::new();
    let dir = cfg.output.dir.as_deref();
    if let Some(d) = dir {
        std::fs::create_dir_all(d).map_err(|e| HarnessError::io(d, e))?;
    }

    while steps < cfg.steps {
        let level = curriculum.level;
        let batch = pool.install(|| {
            collect_batch(
                &model,
                cfg,
                &catalog,
                &mut curriculum,
                &mut task_rng,
                seed,
                &mut next_episode,
            )
        })?;
        let metrics = model.update(&batch.samples, iteration)?;
        steps += batch.samples.len() as u64;
        let stats = EpisodeStats::from_episodes(&batch.episodes, &cfg.universe);

        let mut eval = None;
        let mut history = None;
        if (iteration + 1) % cfg.eval_interval as u64 == 0 {
            let mut eval_rng = rng_for(seed, &[tag::EVAL, iteration]);
            let n = cfg.learner.evaluation_duration;
            let tasks: Vec<TaskSpec> = (0..n)
                .map(|_| curriculum.next_task(&cfg.universe, &catalog, &mut eval_rng))
                .collect();
            let policy = ModelPolicy {
                model: &model,
                explore: cfg.learner.explore_in_eval,
            };
            let trace = cfg.output.trace && dir.is_some();
            let records = pool.install(|| {
                run_wave(
                    &policy,
                    &cfg.env,
                    &catalog,
                    &tasks,
                    seed,
                    &[tag::EVAL, iteration],
                    0,
                    trace,
                )
            })?;
            if let (true, Some(d)) = (trace, dir) {
                write_traces(
                    &d.join("traces"),
                    &format!("seed{seed}_iter{iteration:05}_ep"),
                    &records,
                )?;
            }
            let rewards: Vec<f64> = records.iter().map(|r| r.ret).collect();
            let summary = curriculum.record_evaluation(&rewards)?;
            let before = curriculum.level;
            let after = curriculum.update_level(&summary, &cfg.universe, &mut curriculum_rng);
            eval_means.push(summary.mean);
            history = curriculum.history.last().cloned();
            eval = Some(EvalWindow {
                mean_reward: summary.mean,
                episodes: records.len(),
                compromise_rate: records.iter().filter(|r| r.outcome.blue_loss).count() as f64 / records.len() as f64,
                level_before: before,
                level_after: after,
            });
        }

        emit(
            out,
            &IterationRecord {
                schema_version: SCHEMA_VERSION,
                kind: "iteration".into(),
                seed,
                iteration,
                steps,
                level,
                episodes: stats.episodes,
                mean_reward: stats.mean_reward,
                compromise_rate: stats.compromise_rate,
                declared_victory_rate: stats.declared_victory_rate,
                qos_mean: stats.qos_mean,
                mean_episode_length: stats.mean_length,
                fluent_means: stats.fluent_means,
                task_difficulty: stats.task_difficulty,
                task_params: stats.task_params,
                learner: metrics,
                eval: eval.clone(),
                curriculum: history,
            },
        )?;

        if let Some(d) = dir {
            if cfg.output.checkpoint_every > 0 && (iteration + 1) % cfg.output.checkpoint_every as u64 == 0 {
                let ck = Checkpoint {
                    model: model.clone(),
                    obs: cfg.env.obs.clone(),
                    iteration,
                    level: curriculum.level,
                };
                ck.save(&d.join(format!("checkpoint_seed{seed}_iter{iteration:05}.ckpt")))?;
            }
        }
        iteration += 1;
        if let (Some(th), Some(e)) = (cfg.stop_at_eval_mean, &eval) {
            if e.mean_reward >= th {
                break;
            }
        }
    }

    if let Some(d) = dir {
        let ck = Checkpoint {
            model: model.clone(),
            obs: cfg.env.obs.clone(),
            iteration,
            level: curriculum.level,
        };
        ck.save(&d.join(format!("checkpoint_seed{seed}.ckpt")))?;
    }
    Ok(TrainSummary {
        iterations: iteration,
        steps,
        level: curriculum.level,
        eval_means,
        model,
        curriculum,
    })
}
