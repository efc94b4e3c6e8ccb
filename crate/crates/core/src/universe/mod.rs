//! The task universe: global parameter bounds, the per-level schedule of
//! maximum sampling values, task sampling and difficulty scoring.
//!
//! Host counts scale per subnet. Level `L` of `Lmax` admits the goal tier
//! `floor(L * tiers / (Lmax + 1))`, so tiers split the levels into equal bands.

mod task;

pub use task::{Deviation, GrayParams, RedTtp, TaskSpec};

use crate::pddl::Catalog;
use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum UniverseError {
    #[error("parameter {0}: minimum exceeds maximum")]
    MinAboveMax(&'static str),
    #[error("parameter {0} is out of its admissible range")]
    OutOfRange(&'static str),
    #[error("max_level must be at least 1")]
    NoLevels,
    #[error("{0} compromised hosts do not fit in the smallest network")]
    TooManyCompromised(u32),
    #[error("goal tier {0} is empty")]
    EmptyTier(usize),
    #[error("goal {0} is not in the catalog")]
    UnknownGoal(u32),
    #[error("difficulty weights must be non-negative with a positive sum")]
    BadWeights,
}

/// One value per sampled task parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamLimits {
    pub subnets: u32,
    pub hosts_per_subnet: u32,
    pub initially_compromised: u32,
    pub horizon: u32,
    pub gray_volume: f64,
    pub gray_diversity: f64,
    pub interval_stretch: f64,
    pub mask_prob: f64,
    pub mask_diversity: f64,
}

/// Global minimums (level 0) and maximums (level `Lmax`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniverseBounds {
    pub min: ParamLimits,
    pub max: ParamLimits,
}

impl Default for UniverseBounds {
    fn default() -> Self {
        UniverseBounds {
            min: ParamLimits {
                subnets: 2,
                hosts_per_subnet: 5,
                initially_compromised: 1,
                horizon: 30,
                gray_volume: 0.5,
                gray_diversity: 0.25,
                interval_stretch: 0.0,
                mask_prob: 0.0,
                mask_diversity: 0.0,
            },
            max: ParamLimits {
                subnets: 5,
                hosts_per_subnet: 20,
                initially_compromised: 3,
                horizon: 60,
                gray_volume: 2.0,
                gray_diversity: 1.0,
                interval_stretch: 2.0,
                mask_prob: 0.5,
                mask_diversity: 1.0,
            },
        }
    }
}

impl UniverseBounds {
    pub fn validate(&self) -> Result<(), UniverseError> {
        let (a, b) = (&self.min, &self.max);
        let counts = [
            ("subnets", a.subnets, b.subnets),
            ("hosts_per_subnet", a.hosts_per_subnet, b.hosts_per_subnet),
            (
                "initially_compromised",
                a.initially_compromised,
                b.initially_compromised,
            ),
            ("horizon", a.horizon, b.horizon),
        ];
        for (name, lo, hi) in counts {
            if lo > hi {
                return Err(UniverseError::MinAboveMax(name));
            }
        }
        let reals = [
            ("gray_volume", a.gray_volume, b.gray_volume, f64::INFINITY),
            ("gray_diversity", a.gray_diversity, b.gray_diversity, 1.0),
            (
                "interval_stretch",
                a.interval_stretch,
                b.interval_stretch,
                f64::INFINITY,
            ),
            ("mask_prob", a.mask_prob, b.mask_prob, 1.0),
            ("mask_diversity", a.mask_diversity, b.mask_diversity, 1.0),
        ];
        for (name, lo, hi, cap) in reals {
            if !(lo <= hi) {
                return Err(UniverseError::MinAboveMax(name));
            }
            if lo < 0.0 || hi > cap || !hi.is_finite() {
                return Err(UniverseError::OutOfRange(name));
            }
        }
        if a.subnets == 0 || a.hosts_per_subnet == 0 {
            return Err(UniverseError::OutOfRange("subnets"));
        }
        if a.horizon == 0 {
            return Err(UniverseError::OutOfRange("horizon"));
        }
        // one host is reserved for the crown jewel
        if b.initially_compromised + 1 > a.subnets * a.hosts_per_subnet {
            return Err(UniverseError::TooManyCompromised(b.initially_compromised));
        }
        Ok(())
    }
}

/// Goal tiers in admission order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GoalAdmission {
    /// Level bands walk through the tiers in the given order.
    Tiers { tiers: Vec<Vec<u32>> },
    /// The same goal set at every level.
    Fixed { goals: Vec<u32> },
}

impl GoalAdmission {
    /// Initialization (1), basic skills (2-21), applied skills (22-41),
    /// advanced goals (42-43).
    pub fn ascending() -> Self {
        GoalAdmission::Tiers {
            tiers: vec![vec![1], (2..=21).collect(), (22..=41).collect(), vec![42, 43]],
        }
    }

    /// The ascending tiers in reverse order.
    pub fn reverse() -> Self {
        match Self::ascending() {
            GoalAdmission::Tiers { mut tiers } => {
                tiers.reverse();
                GoalAdmission::Tiers { tiers }
            }
            fixed => fixed,
        }
    }

    /// Goal ids admitted at `level` of `max_level`.
    pub fn goals_at(&self, level: u32, max_level: u32) -> Vec<u32> {
        match self {
            GoalAdmission::Fixed { goals } => goals.clone(),
            GoalAdmission::Tiers { tiers } => {
                let t = (level as usize * tiers.len()) / (max_level as usize + 1);
                tiers[t.min(tiers.len() - 1)].clone()
            }
        }
    }

    pub fn all_goals(&self) -> Vec<u32> {
        let mut all: Vec<u32> = match self {
            GoalAdmission::Fixed { goals } => goals.clone(),
            GoalAdmission::Tiers { tiers } => tiers.concat(),
        };
        all.sort_unstable();
        all.dedup();
        all
    }

    fn validate(&self) -> Result<(), UniverseError> {
        match self {
            GoalAdmission::Tiers { tiers } if tiers.is_empty() => Err(UniverseError::EmptyTier(0)),
            GoalAdmission::Tiers { tiers } => match tiers.iter().position(Vec::is_empty) {
                Some(i) => Err(UniverseError::EmptyTier(i)),
                None => Ok(()),
            },
            GoalAdmission::Fixed { goals } if goals.is_empty() => Err(UniverseError::EmptyTier(0)),
            GoalAdmission::Fixed { .. } => Ok(()),
        }
    }
}

/// A red TTP enters the sampling set from `ceil(at * Lmax)` on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TtpUnlock {
    pub ttp: RedTtp,
    pub at: f64,
}

/// Weights of the normalized difficulty components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DifficultyWeights {
    pub hosts: f64,
    pub subnets: f64,
    pub gray: f64,
    pub deviation: f64,
    pub horizon: f64,
}

impl Default for DifficultyWeights {
    fn default() -> Self {
        DifficultyWeights {
            hosts: 1.0,
            subnets: 1.0,
            gray: 1.0,
            deviation: 1.0,
            horizon: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UniverseConfig {
    pub bounds: UniverseBounds,
    pub max_level: u32,
    /// DoS is absent by default and kept for held-out evaluation.
    pub ttps: Vec<TtpUnlock>,
    pub goals: GoalAdmission,
    pub difficulty_weights: DifficultyWeights,
}

impl Default for UniverseConfig {
    fn default() -> Self {
        UniverseConfig {
            bounds: UniverseBounds::default(),
            max_level: 10,
            ttps: vec![
                TtpUnlock {
                    ttp: RedTtp::Exfiltration,
                    at: 0.0,
                },
                TtpUnlock {
                    ttp: RedTtp::Ransomware,
                    at: 0.3,
                },
                TtpUnlock {
                    ttp: RedTtp::Ddos,
                    at: 0.6,
                },
            ],
            goals: GoalAdmission::ascending(),
            difficulty_weights: DifficultyWeights::default(),
        }
    }
}

/// Sampling limits of one level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelConfig {
    pub level: u32,
    pub min: ParamLimits,
    pub max: ParamLimits,
    pub ttps: Vec<RedTtp>,
    pub goals: Vec<u32>,
}

fn lerp(lo: f64, hi: f64, t: f64) -> f64 {
    lo + (hi - lo) * t
}

fn lerp_count(lo: u32, hi: u32, t: f64) -> u32 {
    lerp(lo as f64, hi as f64, t).round() as u32
}

impl UniverseConfig {
    pub fn validate(&self) -> Result<(), UniverseError> {
        self.bounds.validate()?;
        if self.max_level == 0 {
            return Err(UniverseError::NoLevels);
        }
        if self.ttps.iter().any(|u| !(0.0..=1.0).contains(&u.at)) {
            return Err(UniverseError::OutOfRange("ttps.at"));
        }
        if self.ttps.iter().all(|u| u.at > 0.0) {
            return Err(UniverseError::OutOfRange("ttps"));
        }
        self.goals.validate()?;
        let w = self.difficulty_weights;
        let ws = [w.hosts, w.subnets, w.gray, w.deviation, w.horizon];
        if ws.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) || ws.iter().sum::<f64>() <= 0.0 {
            return Err(UniverseError::BadWeights);
        }
        Ok(())
    }

    /// Checks that every admitted goal exists in `catalog`.
    pub fn check_goals(&self, catalog: &Catalog) -> Result<(), UniverseError> {
        match self.goals.all_goals().into_iter().find(|g| catalog.get(*g).is_none()) {
            Some(g) => Err(UniverseError::UnknownGoal(g)),
            None => Ok(()),
        }
    }

    pub fn ttps_at(&self, level: u32) -> Vec<RedTtp> {
        self.ttps
            .iter()
            .filter(|u| (u.at * self.max_level as f64).ceil() as u32 <= level)
            .map(|u| u.ttp)
            .collect()
    }

    /// Level `level` of the linear schedule, clamped to `max_level`.
    pub fn level(&self, level: u32) -> LevelConfig {
        let level = level.min(self.max_level);
        let t = level as f64 / self.max_level as f64;
        let (a, b) = (self.bounds.min, self.bounds.max);
        LevelConfig {
            level,
            min: a,
            max: ParamLimits {
                subnets: lerp_count(a.subnets, b.subnets, t),
                hosts_per_subnet: lerp_count(a.hosts_per_subnet, b.hosts_per_subnet, t),
                initially_compromised: lerp_count(a.initially_compromised, b.initially_compromised, t),
                horizon: lerp_count(a.horizon, b.horizon, t),
                gray_volume: lerp(a.gray_volume, b.gray_volume, t),
                gray_diversity: lerp(a.gray_diversity, b.gray_diversity, t),
                interval_stretch: lerp(a.interval_stretch, b.interval_stretch, t),
                mask_prob: lerp(a.mask_prob, b.mask_prob, t),
                mask_diversity: lerp(a.mask_diversity, b.mask_diversity, t),
            },
            ttps: self.ttps_at(level),
            goals: self.goals.goals_at(level, self.max_level),
        }
    }

    /// The whole universe as one sampling range, for uniform selection.
    pub fn global_level(&self) -> LevelConfig {
        LevelConfig {
            level: self.max_level,
            min: self.bounds.min,
            max: self.bounds.max,
            ttps: self.ttps.iter().map(|u| u.ttp).collect(),
            goals: self.goals.all_goals(),
        }
    }

    /// Normalized difficulty in `[0, 1]`.
    pub fn difficulty(&self, task: &TaskSpec) -> f64 {
        difficulty(task, &self.bounds, &self.difficulty_weights)
    }
}

/// Levels `0..=max_level` of the linear schedule.
pub fn level_schedule(config: &UniverseConfig) -> Result<Vec<LevelConfig>, UniverseError> {
    config.validate()?;
    Ok((0..=config.max_level).map(|l| config.level(l)).collect())
}

fn norm(x: f64, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        ((x - lo) / (hi - lo)).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

/// Gray variability: volume halved, times diversity.
pub fn gray_variability(volume: f64, diversity: f64) -> f64 {
    volume / 2.0 * diversity
}

/// Weighted mean of min-max normalized components: total hosts, subnets,
/// gray variability, mean red deviation and horizon.
pub fn difficulty(task: &TaskSpec, bounds: &UniverseBounds, w: &DifficultyWeights) -> f64 {
    let (a, b) = (&bounds.min, &bounds.max);
    let hosts = norm(
        task.total_hosts() as f64,
        (a.subnets * a.hosts_per_subnet) as f64,
        (b.subnets * b.hosts_per_subnet) as f64,
    );
    let subnets = norm(task.subnets as f64, a.subnets as f64, b.subnets as f64);
    let gray = norm(
        gray_variability(task.gray.volume, task.gray.diversity),
        gray_variability(a.gray_volume, a.gray_diversity),
        gray_variability(b.gray_volume, b.gray_diversity),
    );
    let d = &task.deviation;
    let deviation = (norm(d.interval_stretch, a.interval_stretch, b.interval_stretch)
        + norm(d.mask_prob, a.mask_prob, b.mask_prob)
        + norm(d.mask_diversity, a.mask_diversity, b.mask_diversity))
        / 3.0;
    let horizon = norm(task.horizon as f64, a.horizon as f64, b.horizon as f64);
    let total = w.hosts + w.subnets + w.gray + w.deviation + w.horizon;
    let score =
        (w.hosts * hosts + w.subnets * subnets + w.gray * gray + w.deviation * deviation + w.horizon * horizon) / total;
    score.clamp(0.0, 1.0)
}

fn uniform_f64<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}

/// Draws a task within `level`: numeric parameters uniformly between the
/// level-0 value and the level maximum, TTP and goal uniformly from the
/// admitted sets.
///
/// Admitted goals missing from `catalog` are skipped; if none remain, any
/// catalog goal may be drawn. Panics on an empty catalog.
pub fn sample_task<R: Rng + ?Sized>(level: &LevelConfig, catalog: &Catalog, rng: &mut R) -> TaskSpec {
    let (a, b) = (&level.min, &level.max);
    let mut goals: Vec<u32> = level
        .goals
        .iter()
        .copied()
        .filter(|g| catalog.get(*g).is_some())
        .collect();
    if goals.is_empty() {
        goals = catalog.ids().collect();
    }
    let ttps = if level.ttps.is_empty() {
        vec![RedTtp::Exfiltration]
    } else {
        level.ttps.clone()
    };
    TaskSpec {
        subnets: rng.random_range(a.subnets..=b.subnets),
        hosts_per_subnet: rng.random_range(a.hosts_per_subnet..=b.hosts_per_subnet),
        initially_compromised: rng.random_range(a.initially_compromised..=b.initially_compromised),
        horizon: rng.random_range(a.horizon..=b.horizon),
        gray: GrayParams {
            volume: uniform_f64(rng, a.gray_volume, b.gray_volume),
            diversity: uniform_f64(rng, a.gray_diversity, b.gray_diversity),
        },
        deviation: Deviation {
            interval_stretch: uniform_f64(rng, a.interval_stretch, b.interval_stretch),
            mask_prob: uniform_f64(rng, a.mask_prob, b.mask_prob),
            mask_diversity: uniform_f64(rng, a.mask_diversity, b.mask_diversity),
        },
        red_ttp: *ttps.choose(rng).expect("nonempty"),
        goal_metric_id: *goals.choose(rng).expect("catalog is nonempty"),
        seed: rng.random(),
    }
}

impl LevelConfig {
    /// Whether `task` lies within this level's sampling limits.
    pub fn admits(&self, task: &TaskSpec) -> bool {
        let (a, b) = (&self.min, &self.max);
        let within = |x: f64, lo: f64, hi: f64| x >= lo && x <= hi;
        (a.subnets..=b.subnets).contains(&task.subnets)
            && (a.hosts_per_subnet..=b.hosts_per_subnet).contains(&task.hosts_per_subnet)
            && (a.initially_compromised..=b.initially_compromised).contains(&task.initially_compromised)
            && (a.horizon..=b.horizon).contains(&task.horizon)
            && within(task.gray.volume, a.gray_volume, b.gray_volume)
            && within(task.gray.diversity, a.gray_diversity, b.gray_diversity)
            && within(task.deviation.interval_stretch, a.interval_stretch, b.interval_stretch)
            && within(task.deviation.mask_prob, a.mask_prob, b.mask_prob)
            && within(task.deviation.mask_diversity, a.mask_diversity, b.mask_diversity)
    }
}
