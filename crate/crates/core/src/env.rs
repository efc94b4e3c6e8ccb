//! Episodic environment: simulator, goal-metric rewards, observations and
//! masks behind `reset`/`step`.
//!
//! Action and observation spaces are fixed per [`EnvConfig`] and catalog, so
//! they never change across resets.

use crate::learner::{build_observation, normalize_observation, ObsConfig, ObsError, Observation, RawObservation};
use crate::netsim::{
    enumerate_parametric_actions, init_episode, AbstractAction, Rules, SimConfig, SimError, SimState, StepOutcome,
};
use crate::pddl::{eval_bool, eval_num, ActionMask, Catalog, EpisodeFluents, GoalMetric};
use crate::reward::{
    outcome_reward, qos_aware_reward, scaled_qos_aware_reward, sparse_reward, EpisodeOutcome, NonFiniteMetric,
    RewardKind,
};
use crate::universe::TaskSpec;
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ActionSpace {
    /// The six abstract actions, resolved to hosts by the heuristic resolver.
    #[default]
    Abstract,
    /// Per-host verbs for networks of up to `max_hosts` hosts. Slots of
    /// absent hosts stay masked.
    Parametric { max_hosts: u32 },
}

impl ActionSpace {
    pub fn len(&self) -> usize {
        match self {
            ActionSpace::Abstract => AbstractAction::COUNT,
            ActionSpace::Parametric { max_hosts } => enumerate_parametric_actions(*max_hosts).unwrap_or(1),
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvConfig {
    pub sim: SimConfig,
    pub reward: RewardKind,
    /// Emit the goal-metric reward of the current fluents on every step
    /// instead of only at the end.
    pub dense_reward: bool,
    /// Report the horizon as truncation rather than termination when red
    /// has not declared victory.
    pub truncate_at_horizon: bool,
    pub action_space: ActionSpace,
    pub obs: ObsConfig,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            sim: SimConfig::default(),
            reward: RewardKind::GoalMetricSparse,
            dense_reward: false,
            truncate_at_horizon: false,
            action_space: ActionSpace::Abstract,
            obs: ObsConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvError {
    #[error("environment is closed")]
    Closed,
    #[error("no active episode")]
    NoEpisode,
    #[error("action {index} outside an action space of {len}")]
    OutOfRange { index: usize, len: usize },
    #[error("task does not fit the environment: {0}")]
    InvalidTask(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Obs(#[from] ObsError),
    #[error(transparent)]
    Reward(#[from] NonFiniteMetric),
}

/// Result of one `step`.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub obs: Observation,
    pub reward: f64,
    pub terminated: bool,
    pub truncated: bool,
    /// Mask of the next state.
    pub mask: ActionMask,
    pub fluents: EpisodeFluents,
    pub step: StepOutcome,
}

impl Transition {
    pub fn done(&self) -> bool {
        self.terminated || self.truncated
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResetInfo {
    pub mask: ActionMask,
    pub goal_id: u32,
    pub task: TaskSpec,
}

/// Goal satisfaction and metric value of `gm` on `fl`.
pub fn evaluate_goal(gm: &GoalMetric, fl: &EpisodeFluents) -> (bool, f64) {
    (eval_bool(&gm.goal, fl), eval_num(&gm.metric, fl))
}

/// The configured reward for a finished episode.
pub fn terminal_reward(
    kind: RewardKind,
    gm: &GoalMetric,
    fl: &EpisodeFluents,
    outcome: &EpisodeOutcome,
) -> Result<f64, NonFiniteMetric> {
    Ok(match kind {
        RewardKind::GoalMetricSparse => {
            let (sat, x) = evaluate_goal(gm, fl);
            sparse_reward(sat, x)?
        }
        RewardKind::OutcomeSparse => outcome_reward(outcome),
        RewardKind::QosAwareSparse => qos_aware_reward(outcome),
        RewardKind::ScaledQosAwareSparse => scaled_qos_aware_reward(outcome),
    })
}

pub struct Env {
    config: EnvConfig,
    catalog: Arc<Catalog>,
    rules: Rules,
    state: Option<SimState>,
    task: Option<TaskSpec>,
    goal: Option<GoalMetric>,
    last_action: usize,
    episodes: u64,
    closed: bool,
}

impl Env {
    pub fn new(config: EnvConfig, catalog: Arc<Catalog>) -> Result<Self, EnvError> {
        config.sim.validate().map_err(EnvError::InvalidTask)?;
        if let ActionSpace::Parametric { max_hosts: 0 } = config.action_space {
            return Err(EnvError::InvalidTask("parametric space needs at least one host".into()));
        }
        Ok(Env {
            config,
            catalog,
            rules: Rules::default(),
            state: None,
            task: None,
            goal: None,
            last_action: 0,
            episodes: 0,
            closed: false,
        })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn action_count(&self) -> usize {
        self.config.action_space.len()
    }

    pub fn obs_dim(&self) -> usize {
        self.config.obs.dim(&self.catalog)
    }

    pub fn episodes(&self) -> u64 {
        self.episodes
    }

    pub fn state(&self) -> Option<&SimState> {
        self.state.as_ref()
    }

    pub fn task(&self) -> Option<&TaskSpec> {
        self.task.as_ref()
    }

    pub fn close(&mut self) {
        self.closed = true;
        self.state = None;
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn reset(&mut self, task: &TaskSpec, seed: u64) -> Result<(Observation, ResetInfo), EnvError> {
        if self.closed {
            return Err(EnvError::Closed);
        }
        let goal = self
            .catalog
            .get(task.goal_metric_id)
            .cloned()
            .ok_or(ObsError::UnknownGoal(task.goal_metric_id))?;
        if let ActionSpace::Parametric { max_hosts } = self.config.action_space {
            if task.total_hosts() > max_hosts {
                return Err(EnvError::InvalidTask(format!(
                    "{} hosts exceed the parametric space of {max_hosts}",
                    task.total_hosts()
                )));
            }
        }
        let state = init_episode(task, &self.config.sim, seed)?;
        self.state = Some(state);
        self.task = Some(task.clone());
        self.goal = Some(goal);
        self.last_action = AbstractAction::DoNothing.id();
        self.episodes += 1;
        let obs = self.observe(None)?;
        let mask = self.mask()?;
        Ok((
            obs,
            ResetInfo {
                mask,
                goal_id: task.goal_metric_id,
                task: task.clone(),
            },
        ))
    }

    fn active(&self) -> Result<&SimState, EnvError> {
        if self.closed {
            return Err(EnvError::Closed);
        }
        self.state.as_ref().ok_or(EnvError::NoEpisode)
    }

    /// Mask of the current state over the configured action space.
    pub fn mask(&self) -> Result<ActionMask, EnvError> {
        let s = self.active()?;
        Ok(match self.config.action_space {
            ActionSpace::Abstract => s.mask(&self.rules),
            ActionSpace::Parametric { .. } => {
                let mut bits = s.parametric_mask().bits().to_vec();
                bits.resize(self.action_count(), false);
                ActionMask::new(bits)
            }
        })
    }

    pub fn raw_observation(&self, step: Option<&StepOutcome>) -> Result<RawObservation, EnvError> {
        let s = self.active()?;
        let goal = self.goal.as_ref().ok_or(EnvError::NoEpisode)?.id;
        Ok(build_observation(
            s,
            step.map(|o| &o.events),
            self.last_action,
            goal,
            &self.catalog,
            &self.config.obs.goal_encoding,
        )?)
    }

    fn observe(&self, step: Option<&StepOutcome>) -> Result<Observation, EnvError> {
        let raw = self.raw_observation(step)?;
        let hosts = self.active()?.real_hosts;
        Ok(normalize_observation(
            &raw,
            hosts,
            self.action_count(),
            &self.config.obs,
        ))
    }

    /// Applies `action`. A masked action errors and leaves the state as it was.
    pub fn step(&mut self, action: usize) -> Result<Transition, EnvError> {
        self.active()?;
        let len = self.action_count();
        if action >= len {
            return Err(EnvError::OutOfRange { index: action, len });
        }
        let state = self.state.as_mut().expect("checked");
        let out = match self.config.action_space {
            ActionSpace::Abstract => state.step(&self.rules, AbstractAction::from_id(action).expect("in range"))?,
            ActionSpace::Parametric { .. } => state.step_parametric(action)?,
        };
        self.last_action = action;
        let state = self.state.as_ref().expect("checked");
        let goal = self.goal.as_ref().expect("set with the state");
        let fl = state.fluents.clone();
        let reward = if out.terminal {
            terminal_reward(self.config.reward, goal, &fl, &state.outcome())?
        } else if self.config.dense_reward && self.config.reward == RewardKind::GoalMetricSparse {
            let (sat, x) = evaluate_goal(goal, &fl);
            sparse_reward(sat, x)?
        } else {
            0.0
        };
        let truncated = out.terminal && self.config.truncate_at_horizon && !fl.declared_victory;
        Ok(Transition {
            obs: self.observe(Some(&out))?,
            reward,
            terminated: out.terminal && !truncated,
            truncated,
            mask: self.mask()?,
            fluents: fl,
            step: out,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::universe::RedTtp;

    fn env(config: EnvConfig) -> Env {
        Env::new(config, Arc::new(Catalog::shipped())).unwrap()
    }

    fn inactive_task(goal: u32) -> TaskSpec {
        TaskSpec {
            red_ttp: RedTtp::Inactive,
            initially_compromised: 0,
            goal_metric_id: goal,
            ..TaskSpec::default()
        }
    }

    #[test]
    fn noop_until_horizon_pays_only_at_the_end() {
        let mut e = env(EnvConfig::default());
        let task = inactive_task(1);
        let (obs, info) = e.reset(&task, 3).unwrap();
        assert_eq!(obs.features.len(), 15 + 43);
        assert!(info.mask.is_set(0));
        for t in 0..task.horizon {
            let tr = e.step(0).unwrap();
            if t + 1 < task.horizon {
                assert_eq!(tr.reward, 0.0);
                assert!(!tr.done());
            } else {
                assert!(tr.terminated);
                // Goal 1 needs a nontrivial action; metric 0 gives 0.5.
                assert_eq!(tr.reward, 0.5);
            }
        }
        assert!(matches!(e.step(0), Err(EnvError::Sim(SimError::Terminated))));
    }

    #[test]
    fn truncation_replaces_termination_at_horizon() {
        let mut e = env(EnvConfig {
            truncate_at_horizon: true,
            ..EnvConfig::default()
        });
        let task = TaskSpec {
            horizon: 3,
            ..inactive_task(1)
        };
        e.reset(&task, 0).unwrap();
        e.step(0).unwrap();
        e.step(0).unwrap();
        let tr = e.step(0).unwrap();
        assert!(tr.truncated && !tr.terminated);
    }

    #[test]
    fn masked_action_is_rejected_without_change() {
        let mut e = env(EnvConfig::default());
        e.reset(&TaskSpec::default(), 1).unwrap();
        let mask = e.mask().unwrap();
        let masked = (0..6)
            .find(|&i| !mask.is_set(i))
            .expect("some action is masked at reset");
        let before = e.raw_observation(None).unwrap();
        assert!(e.step(masked).is_err());
        assert_eq!(e.raw_observation(None).unwrap(), before);
        assert!(matches!(e.step(6), Err(EnvError::OutOfRange { .. })));
    }

    #[test]
    fn same_seed_same_observations() {
        let mut a = env(EnvConfig::default());
        let mut b = env(EnvConfig::default());
        let task = TaskSpec::default();
        assert_eq!(a.reset(&task, 9).unwrap().0, b.reset(&task, 9).unwrap().0);
        for _ in 0..10 {
            let (x, y) = (a.step(0).unwrap(), b.step(0).unwrap());
            assert_eq!(x.obs, y.obs);
            assert_eq!(x.reward, y.reward);
            if x.done() {
                break;
            }
        }
    }

    #[test]
    fn parametric_space_is_stable_across_network_sizes() {
        let mut e = env(EnvConfig {
            action_space: ActionSpace::Parametric { max_hosts: 20 },
            ..EnvConfig::default()
        });
        let small = TaskSpec {
            subnets: 2,
            hosts_per_subnet: 5,
            ..TaskSpec::default()
        };
        let (_, info) = e.reset(&small, 0).unwrap();
        assert_eq!(info.mask.len(), 301);
        assert!((151..301).all(|i| !info.mask.is_set(i)));
        let big = TaskSpec {
            subnets: 3,
            hosts_per_subnet: 8,
            ..TaskSpec::default()
        };
        assert!(matches!(e.reset(&big, 0), Err(EnvError::InvalidTask(_))));
    }

    #[test]
    fn closed_env_errors() {
        let mut e = env(EnvConfig::default());
        e.reset(&TaskSpec::default(), 0).unwrap();
        e.close();
        assert_eq!(e.step(0).unwrap_err(), EnvError::Closed);
        assert_eq!(e.reset(&TaskSpec::default(), 0).unwrap_err(), EnvError::Closed);
    }
}
