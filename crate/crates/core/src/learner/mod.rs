//! Policy learner: networks, masked categorical policies, observation
//! encoding, the clipped-surrogate update and checkpoints.

pub mod checkpoint;
pub mod dist;
pub mod nn;
pub mod obs;
pub mod ppo;

pub use checkpoint::{Checkpoint, CheckpointError};
pub use dist::{entropy, masked_log_probs, masked_probs, select_action, DistError};
pub use nn::{Activation, Adam, GoalNet, MlpShape};
pub use obs::{
    build_observation, encode_goal, normalize_observation, GoalEncoding, ObsConfig, ObsError, Observation,
    RawObservation, BASE_FEATURES, BASE_FEATURE_NAMES, DENSE_DIMS,
};
pub use ppo::{
    gae, standardize, ActionChoice, Learner, LearnerConfig, LearnerError, LossGrad, PpoModel, Sample, TrainMetrics,
};
