use super::config::{HarnessError, RunConfig};
use super::policy::{ModelPolicy, Policy};
use crate::curriculum::{param_tuple, CurriculumState};
use crate::env::{Env, EnvConfig};
use crate::learner::{gae, Learner, Observation, PpoModel, Sample};
use crate::netsim::TraceRecord;
use crate::pddl::{ActionMask, Catalog, EpisodeFluents};
use crate::reward::EpisodeOutcome;
use crate::rng::{rng_for, tag, Rng};
use crate::universe::{TaskSpec, UniverseConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq)]
pub struct StepSample {
    pub obs: Observation,
    pub mask: ActionMask,
    pub action: usize,
    pub logits: Vec<f64>,
    pub logp: f64,
    pub reward: f64,
}

/// One finished episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    pub index: u64,
    pub task: TaskSpec,
    pub steps: Vec<StepSample>,
    /// Observation after the last step, for bootstrapping.
    pub final_obs: Observation,
    /// False when the episode ended by truncation.
    pub terminated: bool,
    pub ret: f64,
    pub outcome: EpisodeOutcome,
    pub fluents: EpisodeFluents,
    pub trace: Vec<TraceRecord>,
}

/// Plays one episode of `task`, seeded by the task seed, with `rng` driving
/// the policy.
pub fn run_episode(
    policy: &dyn Policy,
    env_cfg: &EnvConfig,
    catalog: &Arc<Catalog>,
    task: &TaskSpec,
    index: u64,
    mut rng: Rng,
    trace: bool,
) -> Result<EpisodeRecord, HarnessError> {
    let mut env = Env::new(env_cfg.clone(), Arc::clone(catalog))?;
    let (mut obs, info) = env.reset(task, task.seed)?;
    let mut mask = info.mask;
    let mut steps = Vec::with_capacity(task.horizon as usize);
    let mut records = Vec::new();
    let mut ret = 0.0;
    loop {
        let choice = policy.choose(&obs, &mask, &mut rng)?;
        let tr = env.step(choice.action)?;
        ret += tr.reward;
        if trace {
            let state = env.state().expect("episode is active");
            let abs = matches!(env_cfg.action_space, crate::env::ActionSpace::Abstract)
                .then(|| crate::netsim::AbstractAction::from_id(choice.action))
                .flatten();
            records.push(state.trace_record(abs, &tr.step));
        }
        steps.push(StepSample {
            obs: std::mem::replace(&mut obs, tr.obs.clone()),
            mask: std::mem::replace(&mut mask, tr.mask.clone()),
            action: choice.action,
            logits: choice.logits,
            logp: choice.logp,
            reward: tr.reward,
        });
        if tr.done() {
            let state = env.state().expect("episode is active");
            return Ok(EpisodeRecord {
                index,
                task: task.clone(),
                steps,
                final_obs: obs,
                terminated: tr.terminated,
                ret,
                outcome: state.outcome(),
                fluents: tr.fluents,
                trace: records,
            });
        }
    }
}

/// Runs `tasks` concurrently; episode `i` of the slice uses the policy
/// stream `(seed, stream, first + i)`. Results are in task order.
#[allow(clippy::too_many_arguments)]
pub(crate) fn run_wave(
    policy: &dyn Policy,
    env_cfg: &EnvConfig,
    catalog: &Arc<Catalog>,
    tasks: &[TaskSpec],
    seed: u64,
    stream: &[u64],
    first: u64,
    trace: bool,
) -> Result<Vec<EpisodeRecord>, HarnessError> {
    tasks
        .par_iter()
        .enumerate()
        .map(|(i, t)| {
            let index = first + i as u64;
            let mut path = stream.to_vec();
            path.push(index);
            run_episode(policy, env_cfg, catalog, t, index, rng_for(seed, &path), trace)
        })
        .collect()
}

/// Per-iteration episode statistics.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EpisodeStats {
    pub episodes: usize,
    pub mean_reward: f64,
    pub compromise_rate: f64,
    pub declared_victory_rate: f64,
    pub qos_mean: f64,
    pub mean_length: f64,
    pub fluent_means: BTreeMap<String, f64>,
    pub task_difficulty: f64,
    /// Means of the nine sampled task parameters.
    pub task_params: Vec<f64>,
}

impl EpisodeStats {
    pub fn from_episodes(eps: &[EpisodeRecord], universe: &UniverseConfig) -> Self {
        if eps.is_empty() {
            return EpisodeStats::default();
        }
        let n = eps.len() as f64;
        let mean = |f: &dyn Fn(&EpisodeRecord) -> f64| eps.iter().map(f).sum::<f64>() / n;
        let flag = |b: bool| if b { 1.0 } else { 0.0 };
        let mut fluent_means = BTreeMap::new();
        for e in eps {
            let f = &e.fluents;
            let bools = [
                ("red-inactive", f.red_inactive),
                ("declared-victory", f.declared_victory),
                ("real-compromise", f.real_compromise),
            ];
            for (k, v) in bools {
                *fluent_means.entry(k.to_string()).or_insert(0.0) += flag(v) / n;
            }
            for (k, v) in f.counters() {
                *fluent_means.entry(k.to_string()).or_insert(0.0) += v as f64 / n;
            }
        }
        let mut task_params = vec![0.0; 9];
        for e in eps {
            for (acc, v) in task_params.iter_mut().zip(param_tuple(&e.task)) {
                *acc += v / n;
            }
        }
        EpisodeStats {
            episodes: eps.len(),
            mean_reward: mean(&|e| e.ret),
            compromise_rate: mean(&|e| flag(e.outcome.blue_loss)),
            declared_victory_rate: mean(&|e| flag(e.fluents.declared_victory)),
            qos_mean: mean(&|e| e.outcome.qos_normalized),
            mean_length: mean(&|e| e.steps.len() as f64),
            fluent_means,
            task_difficulty: mean(&|e| universe.difficulty(&e.task)),
            task_params,
        }
    }
}

/// A train batch and the episodes it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub samples: Vec<Sample>,
    pub episodes: Vec<EpisodeRecord>,
}

/// Collects exactly `train_batch_size` samples.
///
/// Tasks are drawn one at a time from the curriculum by the controller, then
/// simulated in waves of `rollout_wave` episodes. The last episode is cut at
/// the batch boundary and bootstrapped from the value of the cut state.
pub fn collect_batch(
    model: &PpoModel,
    cfg: &RunConfig,
    catalog: &Arc<Catalog>,
    curriculum: &mut CurriculumState,
    task_rng: &mut Rng,
    seed: u64,
    next_episode: &mut u64,
) -> Result<Batch, HarnessError> {
    let target = cfg.learner.train_batch_size;
    let policy = ModelPolicy { model, explore: true };
    let mut episodes = Vec::new();
    let mut total = 0;
    while total < target {
        let tasks: Vec<TaskSpec> = (0..cfg.rollout_wave)
            .map(|_| curriculum.next_task(&cfg.universe, catalog, task_rng))
            .collect();
        let wave = run_wave(
            &policy,
            &cfg.env,
            catalog,
            &tasks,
            seed,
            &[tag::POLICY],
            *next_episode,
            false,
        )?;
        *next_episode += tasks.len() as u64;
        for ep in wave {
            if total >= target {
                break;
            }
            total += ep.steps.len();
            episodes.push(ep);
        }
    }

    // Values of every used state plus one bootstrap state per episode.
    let mut obs = Vec::with_capacity(target + episodes.len());
    let mut spans = Vec::with_capacity(episodes.len());
    let mut remaining = target;
    for ep in &episodes {
        let used = ep.steps.len().min(remaining);
        remaining -= used;
        let start = obs.len();
        obs.extend(ep.steps[..used].iter().map(|s| s.obs.clone()));
        let bootstrap = if used < ep.steps.len() {
            Some(ep.steps[used].obs.clone())
        } else if !ep.terminated {
            Some(ep.final_obs.clone())
        } else {
            None
        };
        let has_boot = bootstrap.is_some();
        obs.extend(bootstrap);
        spans.push((start, used, has_boot));
    }
    let values = model.values(&obs);

    let mut samples = Vec::with_capacity(target);
    for (ep, &(start, used, has_boot)) in episodes.iter().zip(&spans) {
        let v = &values[start..start + used];
        let boot = if has_boot { values[start + used] } else { 0.0 };
        let rewards: Vec<f64> = ep.steps[..used].iter().map(|s| s.reward).collect();
        let (adv, targets) = gae(&rewards, v, boot, cfg.learner.gamma, cfg.learner.lambda);
        for (k, s) in ep.steps[..used].iter().enumerate() {
            samples.push(Sample {
                obs: s.obs.clone(),
                mask: s.mask.clone(),
                action: s.action,
                logits: s.logits.clone(),
                logp: s.logp,
                advantage: adv[k],
                value_target: targets[k],
            });
        }
    }
    Ok(Batch { samples, episodes })
}
