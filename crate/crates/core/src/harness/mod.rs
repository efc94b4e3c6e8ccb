//! Run configuration and experiment orchestration: training, evaluation and
//! validation entry points shared by the CLI and the tests.

mod config;
mod evaluate;
mod policy;
mod rollout;
mod train;
mod validate;

pub use config::{HarnessError, OutputConfig, RunConfig};
pub use evaluate::{cmd_evaluate, evaluate_policy, heldout_tasks, load_tasks, EpisodeRow, EvalReport};
pub use policy::{DoNothing, ModelPolicy, Policy, RandomPolicy, Scripted};
pub use rollout::{collect_batch, run_episode, Batch, EpisodeRecord, EpisodeStats};
pub use train::{cmd_train, IterationRecord, TrainSummary, SCHEMA_VERSION};
pub use validate::{cmd_validate, ValidationReport};
