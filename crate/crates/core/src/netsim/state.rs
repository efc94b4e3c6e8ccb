use super::action::{HostId, Protocol};
use super::red::RedState;
use super::SimError;
use crate::pddl::{EpisodeFluents, StateFacts};
use crate::rng::{rng_for, tag, Rng};
use crate::universe::{RedTtp, TaskSpec};
use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

/// Simulation constants shared by every episode of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// Real crown-jewel hosts per network.
    pub crown_jewels: u32,
    /// Decoy hosts in the honey network; the first looks like a crown jewel.
    pub honey_decoys: u32,
    /// Migrations the honey network accepts per episode.
    pub honey_capacity: u32,
    /// Steps a reimaged host spends failing its connections.
    pub reimage_downtime: u32,
    /// Steps a relocated crown jewel spends failing its connections.
    pub relocation_downtime: u32,
    /// Sliding window (steps) for suspicion flagging.
    pub suspicion_window: u32,
    /// Anomalous events within the window that flag a host.
    pub suspicion_threshold: u32,
    pub exfil_steps: u32,
    pub encrypt_steps: u32,
    pub flood_steps: u32,
    /// Extra hosts ransomware infects before going for the jewel.
    pub ransomware_spread: u32,
    /// Bots a DDoS needs before flooding.
    pub ddos_bots: u32,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            crown_jewels: 1,
            honey_decoys: 3,
            honey_capacity: 3,
            reimage_downtime: 3,
            relocation_downtime: 1,
            suspicion_window: 5,
            suspicion_threshold: 2,
            exfil_steps: 3,
            encrypt_steps: 2,
            flood_steps: 4,
            ransomware_spread: 2,
            ddos_bots: 2,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.suspicion_window == 0 || self.suspicion_window > 64 {
            return Err("suspicion_window must be in 1..=64".into());
        }
        if self.honey_decoys == 0 {
            return Err("honey_decoys must be at least 1".into());
        }
        if self.exfil_steps == 0 || self.encrypt_steps == 0 || self.flood_steps == 0 {
            return Err("objective step counts must be positive".into());
        }
        if self.ddos_bots < 2 {
            return Err("ddos_bots must be at least 2".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Host {
    pub id: HostId,
    /// Real subnet index; `None` inside the honey network.
    pub subnet: Option<u32>,
    /// Red remote-access tool installed.
    pub rat: bool,
    pub isolated: bool,
    pub honey: bool,
    pub crown_jewel: bool,
    pub flagged_suspicious: bool,
    /// Decoy asset: compromising it never counts as a real compromise.
    pub fake_decoy: bool,
    /// Real host moved into the honey network by blue.
    pub migrated: bool,
    pub encrypted: bool,
    /// Saturated by a flood during the current step.
    pub saturated: bool,
    pub reimage_left: u32,
    pub blocked: [bool; 4],
    /// Anomalous events since the last reimage, used for ranking.
    pub suspicion: u32,
    /// Most recent step with red discovery or search activity on this host.
    pub last_discovery: Option<u32>,
    anomaly_window: Vec<u32>,
}

impl Host {
    fn new(id: HostId, subnet: Option<u32>, window: u32) -> Self {
        Host {
            id,
            subnet,
            rat: false,
            isolated: false,
            honey: subnet.is_none(),
            crown_jewel: false,
            flagged_suspicious: false,
            fake_decoy: subnet.is_none(),
            migrated: false,
            encrypted: false,
            saturated: false,
            reimage_left: 0,
            blocked: [false; 4],
            suspicion: 0,
            last_discovery: None,
            anomaly_window: vec![0; window as usize],
        }
    }

    /// Can send and receive connections right now.
    pub fn usable(&self) -> bool {
        !self.isolated && self.reimage_left == 0 && !self.encrypted
    }

    pub fn is_real_crown_jewel(&self) -> bool {
        self.crown_jewel && !self.fake_decoy
    }

    pub fn allows(&self, p: Protocol) -> bool {
        !self.blocked[p.index()]
    }

    /// Eligible target for the suspicious-host verbs. Crown jewels are left
    /// to the protected-host verbs.
    pub fn actionable_suspicious(&self) -> bool {
        self.flagged_suspicious && !self.isolated && !self.honey && !self.crown_jewel && self.reimage_left == 0
    }

    pub(crate) fn record_anomalies(&mut self, step: u32, count: u32, threshold: u32) {
        let w = self.anomaly_window.len();
        self.anomaly_window[step as usize % w] = count;
        self.suspicion += count;
        if self.anomaly_window.iter().sum::<u32>() >= threshold && count > 0 {
            self.flagged_suspicious = true;
        }
    }

    pub(crate) fn clear_suspicion(&mut self) {
        self.flagged_suspicious = false;
        self.suspicion = 0;
        self.anomaly_window.iter_mut().for_each(|c| *c = 0);
    }
}

/// Independent random streams, so that one source of randomness never
/// perturbs another.
#[derive(Debug, Clone, PartialEq)]
pub struct SimRngs {
    pub world: Rng,
    pub gray: Rng,
    pub red: Rng,
    pub deviation: Rng,
}

impl SimRngs {
    fn new(seed: u64) -> Self {
        SimRngs {
            world: rng_for(seed, &[tag::WORLD]),
            gray: rng_for(seed, &[tag::GRAY]),
            red: rng_for(seed, &[tag::RED]),
            deviation: rng_for(seed, &[tag::DEVIATION]),
        }
    }
}

/// The whole world of one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub task: TaskSpec,
    pub config: SimConfig,
    /// Real hosts first (`0..real_hosts`, subnet-major), then decoys.
    pub hosts: Vec<Host>,
    pub real_hosts: u32,
    pub subnets: u32,
    pub red: RedState,
    pub step_index: u32,
    pub horizon: u32,
    pub honey_capacity_left: u32,
    pub fluents: EpisodeFluents,
    pub terminal: bool,
    pub rngs: SimRngs,
}

/// Builds the initial network for a task.
///
/// Crown jewels and initial RATs are placed with the task seed; the same
/// `(task, seed)` always yields the same state.
pub fn init_episode(task: &TaskSpec, config: &SimConfig, seed: u64) -> Result<SimState, SimError> {
    let infeasible = |msg: String| Err(SimError::InfeasibleTask(msg));
    if task.subnets == 0 || task.hosts_per_subnet == 0 {
        return infeasible("network needs at least one subnet and one host per subnet".into());
    }
    if task.horizon == 0 {
        return infeasible("horizon must be positive".into());
    }
    let total = task.total_hosts();
    if task.initially_compromised + config.crown_jewels > total {
        return infeasible(format!(
            "{} compromised hosts and {} crown jewels do not fit in {total} hosts",
            task.initially_compromised, config.crown_jewels
        ));
    }
    let probs = [
        task.deviation.mask_prob,
        task.deviation.mask_diversity,
        task.gray.diversity,
    ];
    if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return infeasible("probabilities must lie in [0, 1]".into());
    }
    if !(task.deviation.interval_stretch >= 0.0) || !(task.gray.volume >= 0.0) {
        return infeasible("interval stretch and gray volume must be non-negative".into());
    }
    config.validate().map_err(SimError::InfeasibleTask)?;

    let mut rngs = SimRngs::new(seed);
    let window = config.suspicion_window;
    let mut hosts: Vec<Host> = (0..total)
        .map(|id| Host::new(id, Some(id / task.hosts_per_subnet), window))
        .collect();
    for d in 0..config.honey_decoys {
        let mut h = Host::new(total + d, None, window);
        h.crown_jewel = d == 0;
        hosts.push(h);
    }

    // one draw covers jewels and RAT placement so they never overlap
    let picks = sample(
        &mut rngs.world,
        total as usize,
        (config.crown_jewels + task.initially_compromised) as usize,
    )
    .into_vec();
    let (jewels, rats) = picks.split_at(config.crown_jewels as usize);
    for &j in jewels {
        hosts[j].crown_jewel = true;
    }
    for &r in rats {
        hosts[r].rat = true;
    }
    let mut rat_ids: Vec<HostId> = rats.iter().map(|&r| r as HostId).collect();
    rat_ids.sort_unstable();

    let red_ttp = if rat_ids.is_empty() {
        RedTtp::Inactive
    } else {
        task.red_ttp
    };
    Ok(SimState {
        task: task.with_seed(seed),
        config: config.clone(),
        hosts,
        real_hosts: total,
        subnets: task.subnets,
        red: RedState::new(red_ttp, rat_ids.first().copied(), task.subnets),
        step_index: 0,
        horizon: task.horizon,
        honey_capacity_left: config.honey_capacity,
        fluents: EpisodeFluents::fresh(task.horizon as u64),
        terminal: false,
        rngs,
    })
}

impl SimState {
    pub fn host(&self, id: HostId) -> &Host {
        &self.hosts[id as usize]
    }

    pub fn real(&self) -> &[Host] {
        &self.hosts[..self.real_hosts as usize]
    }

    /// Snapshot of the episode fluents.
    pub fn episode_fluents(&self) -> EpisodeFluents {
        self.fluents.clone()
    }

    pub fn isolated_hosts(&self) -> u32 {
        self.real().iter().filter(|h| h.isolated).count() as u32
    }

    pub fn facts(&self) -> StateFacts {
        StateFacts {
            exists_flagged_suspicious_host: self.hosts.iter().any(Host::actionable_suspicious),
            exists_crown_jewel: self.hosts.iter().any(Host::is_real_crown_jewel),
            honey_net_available: self.honey_capacity_left > 0,
            protected_host_isolable: self.hosts.iter().any(|h| h.is_real_crown_jewel() && !h.isolated),
            subnet_count: self.subnets,
        }
    }

    /// Hosts in the same network (real or honey) as `id`.
    pub(crate) fn same_network(&self, a: HostId, b: HostId) -> bool {
        self.host(a).honey == self.host(b).honey
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn task(subnets: u32, hps: u32, compromised: u32) -> TaskSpec {
        TaskSpec {
            subnets,
            hosts_per_subnet: hps,
            initially_compromised: compromised,
            ..TaskSpec::default()
        }
    }

    #[test]
    fn counts_match_the_task() {
        let s = init_episode(&task(2, 5, 1), &SimConfig::default(), 3).unwrap();
        assert_eq!(s.real_hosts, 10);
        assert_eq!(s.real().iter().filter(|h| h.rat).count(), 1);
        assert_eq!(s.real().iter().filter(|h| h.is_real_crown_jewel()).count(), 1);
        assert!(s.hosts[10..].iter().all(|h| h.honey && h.fake_decoy));
        assert_eq!(s.hosts.len(), 13);
        for h in s.real() {
            assert_eq!(h.subnet, Some(h.id / 5));
        }
    }

    #[test]
    fn jewels_and_rats_do_not_overlap() {
        for seed in 0..200 {
            let s = init_episode(&task(3, 4, 5), &SimConfig::default(), seed).unwrap();
            assert!(s.real().iter().all(|h| !(h.rat && h.crown_jewel)));
            assert_eq!(s.real().iter().filter(|h| h.rat).count(), 5);
        }
    }

    #[test]
    fn no_rat_means_inactive_red() {
        let mut t = task(2, 5, 0);
        t.red_ttp = RedTtp::Ransomware;
        let s = init_episode(&t, &SimConfig::default(), 1).unwrap();
        assert_eq!(s.red.ttp, RedTtp::Inactive);
        assert!(s.fluents.red_inactive);
    }

    #[test]
    fn infeasible_tasks_are_rejected() {
        let cfg = SimConfig::default();
        assert!(matches!(
            init_episode(&task(2, 5, 10), &cfg, 0),
            Err(SimError::InfeasibleTask(_))
        ));
        assert!(init_episode(&task(0, 5, 0), &cfg, 0).is_err());
        let mut t = task(2, 5, 1);
        t.deviation.mask_prob = 1.5;
        assert!(init_episode(&t, &cfg, 0).is_err());
    }

    #[test]
    fn same_seed_same_state() {
        let a = init_episode(&task(3, 7, 2), &SimConfig::default(), 99).unwrap();
        let b = init_episode(&task(3, 7, 2), &SimConfig::default(), 99).unwrap();
        assert_eq!(a, b);
        let c = init_episode(&task(3, 7, 2), &SimConfig::default(), 100).unwrap();
        assert_ne!(a.hosts, c.hosts);
    }

    #[test]
    fn flagging_uses_the_sliding_window() {
        let mut h = Host::new(0, Some(0), 3);
        h.record_anomalies(0, 1, 2);
        assert!(!h.flagged_suspicious);
        h.record_anomalies(1, 0, 2);
        h.record_anomalies(2, 0, 2);
        h.record_anomalies(3, 1, 2); // slot of step 0 overwritten
        assert!(!h.flagged_suspicious);
        h.record_anomalies(4, 1, 2);
        assert!(h.flagged_suspicious);
        assert_eq!(h.suspicion, 3);
    }
}
