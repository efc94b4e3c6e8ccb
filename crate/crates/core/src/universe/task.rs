use serde::{Deserialize, Serialize};
use std::fmt;

/// Basic red behavior for an episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RedTtp {
    Exfiltration,
    Ransomware,
    Ddos,
    Dos,
    /// No red activity at all.
    Inactive,
}

impl RedTtp {
    pub const ACTIVE: [RedTtp; 4] = [RedTtp::Exfiltration, RedTtp::Ransomware, RedTtp::Ddos, RedTtp::Dos];

    pub fn name(self) -> &'static str {
        match self {
            RedTtp::Exfiltration => "exfiltration",
            RedTtp::Ransomware => "ransomware",
            RedTtp::Ddos => "ddos",
            RedTtp::Dos => "dos",
            RedTtp::Inactive => "inactive",
        }
    }
}

impl fmt::Display for RedTtp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How far red strays from its basic behavior.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Deviation {
    /// Mean number of extra idle steps inserted after each TTP action.
    pub interval_stretch: f64,
    /// Probability that a red tick is spent on a gray-like masking action.
    pub mask_prob: f64,
    /// Protocol diversity of the masking actions, in [0, 1].
    pub mask_diversity: f64,
}

/// Benign traffic parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrayParams {
    /// Mean connection attempts per host per step.
    pub volume: f64,
    /// 0 = HTTP only, 1 = uniform over all protocols.
    pub diversity: f64,
}

impl Default for GrayParams {
    fn default() -> Self {
        GrayParams {
            volume: 1.0,
            diversity: 0.5,
        }
    }
}

/// One network-defense task: network dynamics plus a goal-metric pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub subnets: u32,
    pub hosts_per_subnet: u32,
    pub initially_compromised: u32,
    pub red_ttp: RedTtp,
    #[serde(default)]
    pub deviation: Deviation,
    #[serde(default)]
    pub gray: GrayParams,
    /// Steps to survive; the episode horizon.
    pub horizon: u32,
    pub goal_metric_id: u32,
    #[serde(default)]
    pub seed: u64,
}

impl TaskSpec {
    pub fn total_hosts(&self) -> u32 {
        self.subnets * self.hosts_per_subnet
    }

    /// The same task with a different seed.
    pub fn with_seed(&self, seed: u64) -> TaskSpec {
        TaskSpec { seed, ..self.clone() }
    }

    /// Equality ignoring the seed.
    pub fn same_dynamics(&self, other: &TaskSpec) -> bool {
        self.with_seed(0) == other.with_seed(0)
    }
}

impl Default for TaskSpec {
    /// Smallest task of the default universe: 2 subnets of 5 hosts,
    /// one RAT, exfiltration, pair 1.
    fn default() -> Self {
        TaskSpec {
            subnets: 2,
            hosts_per_subnet: 5,
            initially_compromised: 1,
            red_ttp: RedTtp::Exfiltration,
            deviation: Deviation::default(),
            gray: GrayParams::default(),
            horizon: 30,
            goal_metric_id: 1,
            seed: 0,
        }
    }
}
