//! Observation features and goal encodings.
//!
//! Base features, in order:
//!
//! | # | feature | raw value | normalizer |
//! |---|---|---|---|
//! | 0 | cj-relocation-attempts | episode total | `H` |
//! | 1 | isolation-attempts | episode total | `H` |
//! | 2 | isolated-hosts | current | `H` |
//! | 3 | last-action-id | numeric id | `|A| - 1` |
//! | 4 | jewel-search-logs | since the last blue action | `c * H`, `c = 1` |
//! | 5 | passive-discovery-logs | since the last blue action | `c * H`, `c = 1` |
//! | 6 | active-discovery-logs | since the last blue action | `c * H`, `c = 1` |
//! | 7 | http-failed | since the last blue action | `c * H`, `c = 4` |
//! | 8 | scp-failed | since the last blue action | `c * H`, `c = 2` |
//! | 9 | ssh-failed | since the last blue action | `c * H`, `c = 2` |
//! | 10 | http-success | since the last blue action | `c * H`, `c = 2` |
//! | 11 | scp-internal-success | since the last blue action | `c * H`, `c = 2` |
//! | 12 | ssh-success | since the last blue action | `c * H`, `c = 2` |
//! | 13 | ssh-external-success | since the last blue action | `c * H`, `c = 2` |
//! | 14 | qos-summary | in `[-1, 1]` | `(q + 1) / 2` |
//!
//! `H` is the number of real hosts. Normalized values are clipped to `[0, 1]`.

use crate::netsim::{SimState, StepEvents};
use crate::pddl::Catalog;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const BASE_FEATURES: usize = 15;

pub const BASE_FEATURE_NAMES: [&str; BASE_FEATURES] = [
    "cj-relocation-attempts",
    "isolation-attempts",
    "isolated-hosts",
    "last-action-id",
    "jewel-search-logs",
    "passive-discovery-logs",
    "active-discovery-logs",
    "http-failed",
    "scp-failed",
    "ssh-failed",
    "http-success",
    "scp-internal-success",
    "ssh-success",
    "ssh-external-success",
    "qos-summary",
];

/// Dense embedding sizes offered by default.
pub const DENSE_DIMS: [usize; 3] = [4, 8, 16];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum GoalEncoding {
    /// `id / max catalog id`.
    Discrete,
    /// One slot per catalog entry, in catalog order.
    #[default]
    OneHot,
    /// Trainable embedding row of size `dim`, looked up inside the networks.
    Dense { dim: usize },
}

impl GoalEncoding {
    /// Length of the goal block carried in the feature vector.
    pub fn block_len(&self, catalog: &Catalog) -> usize {
        match self {
            GoalEncoding::Discrete => 1,
            GoalEncoding::OneHot => catalog.len(),
            GoalEncoding::Dense { .. } => 0,
        }
    }

    pub fn embedding(&self, catalog: &Catalog) -> Option<(usize, usize)> {
        match self {
            GoalEncoding::Dense { dim } => Some((catalog.len(), *dim)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ObsConfig {
    pub goal_encoding: GoalEncoding,
    /// Events per host per decision interval treated as the maximum, for
    /// features 4..=13.
    pub event_scale: [f64; 10],
}

impl Default for ObsConfig {
    fn default() -> Self {
        ObsConfig {
            goal_encoding: GoalEncoding::OneHot,
            event_scale: [1.0, 1.0, 1.0, 4.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0],
        }
    }
}

impl ObsConfig {
    pub fn dim(&self, catalog: &Catalog) -> usize {
        BASE_FEATURES + self.goal_encoding.block_len(catalog)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ObsError {
    #[error("goal {0} is not in the catalog")]
    UnknownGoal(u32),
}

/// Unnormalized features plus the goal block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawObservation {
    pub base: [f64; BASE_FEATURES],
    pub goal_block: Vec<f64>,
    /// Catalog position of the goal.
    pub goal_index: usize,
}

/// Network input: normalized features, goal block included, and the goal's
/// catalog position for dense embeddings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub features: Vec<f64>,
    pub goal_index: usize,
}

/// Goal block for `goal_id`.
pub fn encode_goal(goal_id: u32, catalog: &Catalog, enc: &GoalEncoding) -> Result<(Vec<f64>, usize), ObsError> {
    let index = catalog.index_of(goal_id).ok_or(ObsError::UnknownGoal(goal_id))?;
    let block = match enc {
        GoalEncoding::Discrete => vec![goal_id as f64 / catalog.max_id().max(1) as f64],
        GoalEncoding::OneHot => {
            let mut v = vec![0.0; catalog.len()];
            v[index] = 1.0;
            v
        }
        GoalEncoding::Dense { .. } => Vec::new(),
    };
    Ok((block, index))
}

/// Raw features for the state after a blue action.
///
/// `events` are the events of the step that action started; `None` right
/// after reset.
pub fn build_observation(
    state: &SimState,
    events: Option<&StepEvents>,
    last_action: usize,
    goal_id: u32,
    catalog: &Catalog,
    enc: &GoalEncoding,
) -> Result<RawObservation, ObsError> {
    let (goal_block, goal_index) = encode_goal(goal_id, catalog, enc)?;
    let f = &state.fluents;
    let mut base = [0.0; BASE_FEATURES];
    base[0] = f.crown_jewel_relocations as f64;
    base[1] = f.isolate_actions as f64;
    base[2] = state.isolated_hosts() as f64;
    base[3] = last_action as f64;
    if let Some(ev) = events {
        for (slot, c) in base[4..14].iter_mut().zip(ev.feature_counts()) {
            *slot = c as f64;
        }
        base[14] = ev.qos_summary();
    }
    Ok(RawObservation {
        base,
        goal_block,
        goal_index,
    })
}

/// Scales raw features into `[0, 1]` for a network of `hosts` real hosts and
/// an action space of `actions` entries.
pub fn normalize_observation(raw: &RawObservation, hosts: u32, actions: usize, cfg: &ObsConfig) -> Observation {
    let h = hosts.max(1) as f64;
    let mut features = Vec::with_capacity(BASE_FEATURES + raw.goal_block.len());
    for (i, &x) in raw.base.iter().enumerate() {
        let v = match i {
            0..=2 => x / h,
            3 => x / (actions.max(2) - 1) as f64,
            4..=13 => x / (cfg.event_scale[i - 4] * h),
            _ => (x + 1.0) / 2.0,
        };
        features.push(v.clamp(0.0, 1.0));
    }
    features.extend(raw.goal_block.iter().map(|v| v.clamp(0.0, 1.0)));
    Observation {
        features,
        goal_index: raw.goal_index,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netsim::{init_episode, SimConfig};
    use crate::universe::TaskSpec;

    #[test]
    fn fresh_episode_has_no_events() {
        let c = Catalog::shipped();
        let s = init_episode(&TaskSpec::default(), &SimConfig::default(), 0).unwrap();
        let raw = build_observation(&s, None, 0, 1, &c, &GoalEncoding::OneHot).unwrap();
        assert!(raw.base.iter().all(|v| *v == 0.0));
        let obs = normalize_observation(&raw, 10, 6, &ObsConfig::default());
        assert_eq!(obs.features.len(), 15 + 43);
        assert_eq!(obs.features[14], 0.5);
    }

    #[test]
    fn goal_encodings() {
        let c = Catalog::shipped();
        let (oh, idx) = encode_goal(39, &c, &GoalEncoding::OneHot).unwrap();
        assert_eq!(oh.len(), 43);
        assert_eq!(oh.iter().sum::<f64>(), 1.0);
        assert_eq!(oh[idx], 1.0);
        assert_eq!(idx, 38);
        let (d, _) = encode_goal(43, &c, &GoalEncoding::Discrete).unwrap();
        assert_eq!(d, vec![1.0]);
        let (e, idx) = encode_goal(5, &c, &GoalEncoding::Dense { dim: 8 }).unwrap();
        assert!(e.is_empty());
        assert_eq!(idx, 4);
        assert_eq!(
            encode_goal(44, &c, &GoalEncoding::OneHot),
            Err(ObsError::UnknownGoal(44))
        );
    }

    #[test]
    fn declared_maximum_maps_to_one() {
        let cfg = ObsConfig::default();
        let mut base = [0.0; BASE_FEATURES];
        let h = 10.0;
        base[0] = h;
        base[1] = h;
        base[2] = h;
        base[3] = 5.0;
        for (slot, scale) in base[4..14].iter_mut().zip(cfg.event_scale) {
            *slot = scale * h;
        }
        base[14] = 1.0;
        let raw = RawObservation {
            base,
            goal_block: vec![],
            goal_index: 0,
        };
        let obs = normalize_observation(&raw, 10, 6, &cfg);
        assert!(obs.features.iter().all(|v| *v == 1.0));
    }
}
