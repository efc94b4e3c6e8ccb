//! Scalar rewards from goal-metric evaluations and episode outcomes.
//!
//! The default reward is the goal-metric sparse reward: the metric value `x`
//! is squashed through `1 / (2 e^{x²})` and the goal adds a flat `0.5`.
//! Three outcome-based variants are also available.
//!
//! QoS-aware raw reward components:
//!
//! | term | range |
//! |---|---|
//! | win (+1) / loss (-1) / neither (0) | [-1, 1] |
//! | QoS, `(good - bad) / (good + bad)` | [-1, 1] |
//! | isolation penalty, `-min(1, attempts / hosts)` | [-1, 0] |
//! | crown-jewel relocation penalty, `-min(1, attempts / hosts)` | [-1, 0] |
//!
//! so the raw value lies in `[-4, 2]`, and the scaled variant is the min-max
//! map of that range onto `[0, 1]`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RewardKind {
    #[default]
    GoalMetricSparse,
    OutcomeSparse,
    QosAwareSparse,
    ScaledQosAwareSparse,
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("metric value {0} is not finite")]
pub struct NonFiniteMetric(pub f64);

/// Terminal summary of an episode, as seen by the outcome-based rewards.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EpisodeOutcome {
    pub blue_win: bool,
    pub blue_loss: bool,
    pub red_inactive: bool,
    /// `(good - bad) / (good + bad)`, 0 without QoS events.
    pub qos_normalized: f64,
    pub isolation_attempts: u64,
    pub cj_relocation_attempts: u64,
    /// Real hosts in the network; penalty normalizer.
    pub hosts: u64,
    /// False for mid-episode queries.
    pub terminal: bool,
}

impl EpisodeOutcome {
    pub fn qos_from_tallies(good: u64, bad: u64) -> f64 {
        let total = good + bad;
        if total == 0 {
            0.0
        } else {
            (good as f64 - bad as f64) / total as f64
        }
    }
}

pub const QOS_RAW_MIN: f64 = -4.0;
pub const QOS_RAW_MAX: f64 = 2.0;

/// `1/(2 e^{x²}) + 0.5` when the goal holds, `1/(2 e^{x²})` otherwise.
pub fn sparse_reward(goal_satisfied: bool, x: f64) -> Result<f64, NonFiniteMetric> {
    if !x.is_finite() {
        return Err(NonFiniteMetric(x));
    }
    let base = 0.5 * (-x * x).exp();
    Ok(if goal_satisfied { base + 0.5 } else { base })
}

/// -1 on compromise, +1 on reaching the end without compromise, 0 otherwise.
pub fn outcome_reward(outcome: &EpisodeOutcome) -> f64 {
    if !outcome.terminal {
        0.0
    } else if outcome.blue_loss {
        -1.0
    } else {
        1.0
    }
}

fn penalty(attempts: u64, hosts: u64) -> f64 {
    if hosts == 0 {
        return if attempts > 0 { -1.0 } else { 0.0 };
    }
    -(attempts as f64 / hosts as f64).min(1.0)
}

/// Raw QoS-aware reward in `[QOS_RAW_MIN, QOS_RAW_MAX]`.
pub fn qos_aware_reward(outcome: &EpisodeOutcome) -> f64 {
    let win = if outcome.blue_win {
        1.0
    } else if outcome.blue_loss {
        -1.0
    } else {
        0.0
    };
    win + outcome.qos_normalized.clamp(-1.0, 1.0)
        + penalty(outcome.isolation_attempts, outcome.hosts)
        + penalty(outcome.cj_relocation_attempts, outcome.hosts)
}

/// Min-max scaling of [`qos_aware_reward`] onto `[0, 1]`.
pub fn scaled_qos_aware_reward(outcome: &EpisodeOutcome) -> f64 {
    scale_qos_raw(qos_aware_reward(outcome))
}

pub fn scale_qos_raw(raw: f64) -> f64 {
    (raw - QOS_RAW_MIN) / (QOS_RAW_MAX - QOS_RAW_MIN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn sparse_reward_values() {
        assert_eq!(sparse_reward(true, 0.0).unwrap(), 1.0);
        assert_eq!(sparse_reward(false, 0.0).unwrap(), 0.5);
        assert!((sparse_reward(true, 1.0).unwrap() - (0.5 + 1.0 / (2.0 * E))).abs() < 1e-12);
        assert!((sparse_reward(true, 1.0).unwrap() - 0.68394).abs() < 1e-5);
        let r = sparse_reward(false, 3.0).unwrap();
        assert!((r - 1.0 / (2.0 * E.powi(9))).abs() < 1e-15);
        assert!((r - 6.17e-5).abs() < 1e-7);
    }

    #[test]
    fn non_finite_metric_is_an_error() {
        assert!(sparse_reward(true, f64::NAN).is_err());
        assert!(sparse_reward(false, f64::INFINITY).is_err());
    }

    #[test]
    fn outcome_reward_cases() {
        let mut o = EpisodeOutcome {
            terminal: true,
            blue_loss: true,
            ..Default::default()
        };
        assert_eq!(outcome_reward(&o), -1.0);
        o.blue_loss = false;
        assert_eq!(outcome_reward(&o), 1.0);
        o.terminal = false;
        assert_eq!(outcome_reward(&o), 0.0);
    }

    #[test]
    fn qos_aware_extremes() {
        let best = EpisodeOutcome {
            blue_win: true,
            qos_normalized: 1.0,
            hosts: 10,
            terminal: true,
            ..Default::default()
        };
        assert_eq!(qos_aware_reward(&best), 2.0);
        assert_eq!(scaled_qos_aware_reward(&best), 1.0);

        let worst = EpisodeOutcome {
            blue_loss: true,
            qos_normalized: -1.0,
            isolation_attempts: 25,
            cj_relocation_attempts: 10,
            hosts: 10,
            terminal: true,
            ..Default::default()
        };
        assert_eq!(qos_aware_reward(&worst), -4.0);
        assert_eq!(scaled_qos_aware_reward(&worst), 0.0);
    }

    #[test]
    fn inactive_red_with_passive_blue_is_a_plain_win() {
        let o = EpisodeOutcome {
            blue_win: true,
            red_inactive: true,
            qos_normalized: 0.0,
            hosts: 10,
            terminal: true,
            ..Default::default()
        };
        assert_eq!(qos_aware_reward(&o), 1.0);
    }

    #[test]
    fn penalties_scale_with_network_size() {
        let small = EpisodeOutcome {
            isolation_attempts: 2,
            hosts: 10,
            ..Default::default()
        };
        let large = EpisodeOutcome {
            isolation_attempts: 8,
            hosts: 40,
            ..Default::default()
        };
        assert_eq!(qos_aware_reward(&small), qos_aware_reward(&large));
    }

    #[test]
    fn qos_tallies() {
        assert_eq!(EpisodeOutcome::qos_from_tallies(0, 0), 0.0);
        assert_eq!(EpisodeOutcome::qos_from_tallies(3, 1), 0.5);
        assert_eq!(EpisodeOutcome::qos_from_tallies(0, 4), -1.0);
    }
}
