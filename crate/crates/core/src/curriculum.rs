//! Training-task selection.
//!
//! The controller is the only writer of [`CurriculumState`]. Levels move by
//! at most one per complete evaluation: up when the windowed mean reaches
//! `promote`, down when it falls below `demote`.

use crate::pddl::Catalog;
use crate::universe::{sample_task, Deviation, GrayParams, ParamLimits, RedTtp, TaskSpec, UniverseConfig};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Fixed,
    #[default]
    Dynamic,
    Uniform,
    Smooth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CurriculumConfig {
    pub strategy: Strategy,
    pub promote: f64,
    pub demote: f64,
    /// Episodes per evaluation summary.
    pub window: usize,
    /// Chance that a non-fixed strategy swaps in an inactive red agent.
    pub p_inactive: f64,
    pub start_level: u32,
    /// Target task of the fixed strategy; the universe maximum if absent.
    pub fixed_task: Option<TaskSpec>,
}

impl Default for CurriculumConfig {
    fn default() -> Self {
        CurriculumConfig {
            strategy: Strategy::Dynamic,
            promote: 0.7,
            demote: 0.4,
            window: 20,
            p_inactive: 0.1,
            start_level: 0,
            fixed_task: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurriculumError {
    #[error("thresholds must satisfy 0 <= demote < promote <= 1 (got demote {demote}, promote {promote})")]
    Thresholds { demote: f64, promote: f64 },
    #[error("evaluation window must be positive")]
    EmptyWindow,
    #[error("p_inactive must lie in [0, 1]")]
    InactiveProbability,
    #[error("start level {0} exceeds the maximum level")]
    StartLevel(u32),
    #[error("incomplete evaluation: {got} episodes, window is {window}")]
    Incomplete { got: usize, window: usize },
}

impl CurriculumConfig {
    pub fn validate(&self, max_level: u32) -> Result<(), CurriculumError> {
        let ok =
            (0.0..=1.0).contains(&self.demote) && (0.0..=1.0).contains(&self.promote) && self.demote < self.promote;
        if !ok {
            return Err(CurriculumError::Thresholds {
                demote: self.demote,
                promote: self.promote,
            });
        }
        if self.window == 0 {
            return Err(CurriculumError::EmptyWindow);
        }
        if !(0.0..=1.0).contains(&self.p_inactive) {
            return Err(CurriculumError::InactiveProbability);
        }
        if self.start_level > max_level {
            return Err(CurriculumError::StartLevel(self.start_level));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub mean: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub iteration: u64,
    pub level: u32,
    pub mean_reward: f64,
}

/// Pure level rule: one step up on `mean >= promote`, one step down on
/// `mean < demote`, clamped to `[0, max_level]`.
pub fn next_level(level: u32, mean: f64, promote: f64, demote: f64, max_level: u32) -> u32 {
    if mean >= promote && level < max_level {
        level + 1
    } else if mean < demote && level > 0 {
        level - 1
    } else {
        level
    }
}

/// Minimum increments of the smooth strategy, in parameter order.
pub const SMOOTH_STEPS: [f64; 9] = [1.0, 1.0, 1.0, 5.0, 0.25, 0.25, 0.5, 0.1, 0.25];

/// Names of the parameters the smooth strategy varies, in parameter order.
pub const SMOOTH_PARAMS: [&str; 9] = [
    "subnets",
    "hosts_per_subnet",
    "initially_compromised",
    "horizon",
    "gray_volume",
    "gray_diversity",
    "interval_stretch",
    "mask_prob",
    "mask_diversity",
];

/// The varied parameters of a task as one tuple.
pub fn param_tuple(t: &TaskSpec) -> [f64; 9] {
    [
        t.subnets as f64,
        t.hosts_per_subnet as f64,
        t.initially_compromised as f64,
        t.horizon as f64,
        t.gray.volume,
        t.gray.diversity,
        t.deviation.interval_stretch,
        t.deviation.mask_prob,
        t.deviation.mask_diversity,
    ]
}

fn limits_tuple(b: &ParamLimits) -> [f64; 9] {
    [
        b.subnets as f64,
        b.hosts_per_subnet as f64,
        b.initially_compromised as f64,
        b.horizon as f64,
        b.gray_volume,
        b.gray_diversity,
        b.interval_stretch,
        b.mask_prob,
        b.mask_diversity,
    ]
}

fn set_param(t: &mut TaskSpec, i: usize, v: f64) {
    // keep decimal steps on their grid
    let v = (v * 1e9).round() / 1e9;
    match i {
        0 => t.subnets = v as u32,
        1 => t.hosts_per_subnet = v as u32,
        2 => t.initially_compromised = v as u32,
        3 => t.horizon = v as u32,
        4 => t.gray.volume = v,
        5 => t.gray.diversity = v,
        6 => t.deviation.interval_stretch = v,
        7 => t.deviation.mask_prob = v,
        _ => t.deviation.mask_diversity = v,
    }
}

/// Changes parameter `i` of `task` by its minimum increment: upward unless
/// that leaves the universe, otherwise downward.
pub fn smooth_step(task: &TaskSpec, universe: &UniverseConfig, i: usize) -> TaskSpec {
    let lo = limits_tuple(&universe.bounds.min)[i];
    let hi = limits_tuple(&universe.bounds.max)[i];
    let x = param_tuple(task)[i];
    let step = SMOOTH_STEPS[i];
    let eps = 1e-9;
    let v = if x + step <= hi + eps {
        x + step
    } else if x - step >= lo - eps {
        x - step
    } else if x < hi {
        hi
    } else {
        lo
    };
    let mut next = task.clone();
    set_param(&mut next, i, v);
    next
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurriculumState {
    pub config: CurriculumConfig,
    pub max_level: u32,
    pub level: u32,
    /// Current task of the smooth strategy.
    pub current: Option<TaskSpec>,
    pub history: Vec<HistoryEntry>,
    pub evaluations: u64,
}

impl CurriculumState {
    pub fn new(config: CurriculumConfig, universe: &UniverseConfig) -> Result<Self, CurriculumError> {
        config.validate(universe.max_level)?;
        Ok(CurriculumState {
            level: config.start_level,
            max_level: universe.max_level,
            config,
            current: None,
            history: Vec::new(),
            evaluations: 0,
        })
    }

    /// Mean over the last `window` rewards, appended to the history.
    pub fn record_evaluation(&mut self, rewards: &[f64]) -> Result<EvalSummary, CurriculumError> {
        let window = self.config.window;
        if rewards.len() < window {
            return Err(CurriculumError::Incomplete {
                got: rewards.len(),
                window,
            });
        }
        let recent = &rewards[rewards.len() - window..];
        let mean = recent.iter().sum::<f64>() / window as f64;
        self.history.push(HistoryEntry {
            iteration: self.evaluations,
            level: self.level,
            mean_reward: mean,
        });
        self.evaluations += 1;
        Ok(EvalSummary { mean, n: window })
    }

    /// Applies the level rule; the smooth strategy also moves on mastery.
    pub fn update_level<R: Rng + ?Sized>(
        &mut self,
        summary: &EvalSummary,
        universe: &UniverseConfig,
        rng: &mut R,
    ) -> u32 {
        self.level = next_level(
            self.level,
            summary.mean,
            self.config.promote,
            self.config.demote,
            self.max_level,
        );
        if self.config.strategy == Strategy::Smooth && summary.mean >= self.config.promote {
            if let Some(cur) = &self.current {
                let i = rng.random_range(0..SMOOTH_STEPS.len());
                self.current = Some(smooth_step(cur, universe, i));
            }
        }
        self.level
    }

    /// The next training task.
    pub fn next_task<R: Rng + ?Sized>(
        &mut self,
        universe: &UniverseConfig,
        catalog: &Catalog,
        rng: &mut R,
    ) -> TaskSpec {
        let mut task = match self.config.strategy {
            Strategy::Fixed => {
                let base = self.config.fixed_task.clone().unwrap_or_else(|| max_task(universe));
                return base.with_seed(rng.random());
            }
            Strategy::Dynamic => sample_task(&universe.level(self.level), catalog, rng),
            Strategy::Uniform => sample_task(&universe.global_level(), catalog, rng),
            Strategy::Smooth => {
                let cur = self
                    .current
                    .get_or_insert_with(|| sample_task(&universe.level(0), catalog, rng))
                    .clone();
                cur.with_seed(rng.random())
            }
        };
        if self.config.p_inactive > 0.0 && rng.random_bool(self.config.p_inactive) {
            task.red_ttp = RedTtp::Inactive;
        }
        task
    }
}

/// The hardest task of the universe, with its first admitted TTP and goal.
pub fn max_task(universe: &UniverseConfig) -> TaskSpec {
    let b = &universe.bounds.max;
    let top = universe.level(universe.max_level);
    TaskSpec {
        subnets: b.subnets,
        hosts_per_subnet: b.hosts_per_subnet,
        initially_compromised: b.initially_compromised,
        red_ttp: top.ttps.first().copied().unwrap_or(RedTtp::Exfiltration),
        deviation: Deviation {
            interval_stretch: b.interval_stretch,
            mask_prob: b.mask_prob,
            mask_diversity: b.mask_diversity,
        },
        gray: GrayParams {
            volume: b.gray_volume,
            diversity: b.gray_diversity,
        },
        horizon: b.horizon,
        goal_metric_id: top.goals.first().copied().unwrap_or(1),
        seed: 0,
    }
}
