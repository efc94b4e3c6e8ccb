use crate::curriculum::{CurriculumConfig, CurriculumError};
use crate::env::{EnvConfig, EnvError};
use crate::learner::{CheckpointError, LearnerConfig, LearnerError};
use crate::pddl::{load_catalog, Catalog, CatalogError};
use crate::universe::{UniverseConfig, UniverseError};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Universe(#[from] UniverseError),
    #[error(transparent)]
    Curriculum(#[from] CurriculumError),
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error("checkpoint expects {expected_obs} features and {expected_actions} actions, the environment has {obs} and {actions}")]
    DimMismatch {
        expected_obs: usize,
        expected_actions: usize,
        obs: usize,
        actions: usize,
    },
    #[error("write failed: {0}")]
    Write(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 1 for invalid input, 2 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_)
            | HarnessError::Validation(_)
            | HarnessError::Catalog(_)
            | HarnessError::Universe(_)
            | HarnessError::Curriculum(_)
            | HarnessError::DimMismatch { .. } => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Directory for metrics, checkpoints and traces.
    pub dir: Option<PathBuf>,
    /// Write a checkpoint every this many iterations; 0 writes only the final one.
    pub checkpoint_every: u32,
    /// Write event traces of evaluation episodes.
    pub trace: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub universe: UniverseConfig,
    pub curriculum: CurriculumConfig,
    pub env: EnvConfig,
    pub learner: LearnerConfig,
    /// Goal-metric catalog; the shipped one when absent. Relative paths are
    /// resolved against the config file.
    pub catalog: Option<PathBuf>,
    pub seeds: Vec<u64>,
    /// Environment steps to train for.
    pub steps: u64,
    /// Iterations between evaluation windows.
    pub eval_interval: u32,
    /// Episodes simulated concurrently per rollout wave. Results do not
    /// depend on `workers`, only on this.
    pub rollout_wave: usize,
    /// Worker threads; 0 uses one per core.
    pub workers: usize,
    /// Stop once an evaluation window reaches this mean reward.
    pub stop_at_eval_mean: Option<f64>,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            universe: UniverseConfig::default(),
            curriculum: CurriculumConfig::default(),
            env: EnvConfig::default(),
            learner: LearnerConfig::default(),
            catalog: None,
            seeds: vec![0],
            steps: 100_000,
            eval_interval: 1,
            rollout_wave: 8,
            workers: 0,
            stop_at_eval_mean: None,
            output: OutputConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    /// Reads and validates a config file.
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let mut cfg = Self::from_json(&text)?;
        if let (Some(c), Some(dir)) = (&cfg.catalog, path.parent()) {
            if c.is_relative() {
                cfg.catalog = Some(dir.join(c));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load_catalog(&self) -> Result<Catalog, HarnessError> {
        Ok(match &self.catalog {
            Some(p) => load_catalog(p)?,
            None => Catalog::shipped(),
        })
    }

    /// Checks every section and the cross-section constraints.
    pub fn validate(&self) -> Result<(), HarnessError> {
        self.universe.validate()?;
        self.curriculum.validate(self.universe.max_level)?;
        self.learner.validate()?;
        self.env.sim.validate().map_err(HarnessError::Config)?;
        let catalog = self.load_catalog()?;
        self.universe.check_goals(&catalog)?;
        let bad = |m: &str| Err(HarnessError::Config(m.to_string()));
        if self.seeds.is_empty() {
            return bad("at least one seed is required");
        }
        if self.eval_interval == 0 || self.rollout_wave == 0 {
            return bad("eval_interval and rollout_wave must be positive");
        }
        if self.learner.evaluation_duration < self.curriculum.window {
            return bad("evaluation_duration must cover the curriculum window");
        }
        if let crate::env::ActionSpace::Parametric { max_hosts } = self.env.action_space {
            if self.universe.bounds.max.subnets * self.universe.bounds.max.hosts_per_subnet > max_hosts {
                return bad("parametric action space is smaller than the largest network");
            }
        }
        if let Some(t) = &self.curriculum.fixed_task {
            if catalog.get(t.goal_metric_id).is_none() {
                return bad("fixed task goal is not in the catalog");
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_round_trip() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        let back = RunConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn demote_at_or_above_promote_is_rejected() {
        let mut cfg = RunConfig::default();
        cfg.curriculum.demote = cfg.curriculum.promote;
        let err = cfg.validate().unwrap_err();
        assert!(matches!(err, HarnessError::Curriculum(_)));
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(RunConfig::from_json(r#"{"stepz": 3}"#).is_err());
    }
}
