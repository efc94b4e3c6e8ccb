//! Red agent phase machines.
//!
//! Every TTP starts from a RAT foothold and runs discover, then an optional
//! build-up (spread for ransomware, bot recruitment for DDoS), then a crown
//! jewel search, then an approach where needed, then the objective:
//!
//! | TTP | build-up | approach | objective |
//! |---|---|---|---|
//! | exfiltration | none | ssh to the jewel | scp to the foothold plus external ssh, `exfil_steps` ticks |
//! | ransomware | `ransomware_spread` lateral moves | ssh to the jewel | encrypt one RAT host per tick, the jewel last |
//! | ddos | recruit until `ddos_bots` RAT hosts | none | every bot floods the jewel, `flood_steps` ticks |
//! | dos | none | none | the foothold floods the jewel, `flood_steps` ticks |
//!
//! Red only sees the network its foothold lives in. A foothold migrated into
//! the honey network therefore searches the honey network, finds the decoy
//! jewel and declares victory on it.
//!
//! Red choices draw only from the red stream, and only when a TTP action is
//! taken; deviation draws only from the deviation stream. Masking and
//! stretching therefore delay TTP actions but never change which ones happen.

use super::action::{HostId, Protocol};
use super::events::StepEvents;
use super::state::SimState;
use crate::universe::RedTtp;
use rand::seq::IndexedRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

/// Connection attempts each flooding host makes per tick.
const FLOOD_RATE: u32 = 2;
/// Upper bound on one stretched idle interval.
const MAX_STRETCH: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RedPhase {
    PassiveDiscovery,
    ActiveDiscovery,
    Spread,
    Recruit,
    Search,
    Approach,
    Act,
    Done,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RedActionKind {
    PassiveDiscovery,
    ActiveDiscovery,
    JewelSearch,
    Lateral,
    Exfiltrate,
    Encrypt,
    Flood,
}

/// One TTP action, for traces and deviation checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RedLogEntry {
    pub step: u32,
    pub kind: RedActionKind,
    pub actor: HostId,
    pub target: Option<HostId>,
    pub success: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RedState {
    pub ttp: RedTtp,
    pub phase: RedPhase,
    pub foothold: Option<HostId>,
    /// Whether the current view is of the honey network.
    pub in_honey: bool,
    /// Real subnets red has scanned.
    pub known_subnets: Vec<bool>,
    pub target: Option<HostId>,
    pub progress: u32,
    pub spread_done: u32,
    /// Idle ticks left from interval stretching.
    pub cooldown: u32,
    pub ttp_actions: u64,
    pub masking_actions: u64,
    pub log: Vec<RedLogEntry>,
}

impl RedState {
    pub(crate) fn new(ttp: RedTtp, foothold: Option<HostId>, subnets: u32) -> Self {
        RedState {
            ttp,
            phase: RedPhase::PassiveDiscovery,
            foothold,
            in_honey: false,
            known_subnets: vec![false; subnets as usize],
            target: None,
            progress: 0,
            spread_done: 0,
            cooldown: 0,
            ttp_actions: 0,
            masking_actions: 0,
            log: Vec::new(),
        }
    }

    fn reset_view(&mut self, in_honey: bool) {
        self.in_honey = in_honey;
        self.known_subnets.iter_mut().for_each(|k| *k = false);
        self.target = None;
        self.progress = 0;
        self.spread_done = 0;
        self.phase = RedPhase::PassiveDiscovery;
    }

    /// Called by the resolver when a host red cares about is moved away.
    pub(crate) fn forget_target(&mut self, host: HostId) {
        if self.target == Some(host) {
            self.target = None;
            self.progress = 0;
            if matches!(self.phase, RedPhase::Approach | RedPhase::Act) {
                self.phase = RedPhase::Search;
            }
        }
    }
}

impl SimState {
    fn red_can_act_from(&self, h: HostId) -> bool {
        let host = self.host(h);
        host.rat && !host.isolated && host.reimage_left == 0
    }

    fn in_red_view(&self, h: HostId) -> bool {
        let host = self.host(h);
        match host.subnet {
            None => self.red.in_honey,
            Some(s) => !self.red.in_honey && self.red.known_subnets[s as usize],
        }
    }

    fn network_members(&self, honey: bool) -> Vec<HostId> {
        self.hosts.iter().filter(|h| h.honey == honey).map(|h| h.id).collect()
    }

    /// Keeps red's foothold valid. Returns false when red has nowhere to act from.
    fn refresh_foothold(&mut self) -> bool {
        let current = self.red.foothold.filter(|&f| self.red_can_act_from(f));
        let foothold = match current {
            Some(f) => f,
            None => match self.hosts.iter().find(|h| self.red_can_act_from(h.id)) {
                Some(h) => h.id,
                None => return false,
            },
        };
        self.red.foothold = Some(foothold);
        let honey = self.host(foothold).honey;
        if honey != self.red.in_honey {
            self.red.reset_view(honey);
        }
        true
    }

    /// One red tick; `anomalies` collects per-host anomalous activity.
    pub(crate) fn red_tick(&mut self, ev: &mut StepEvents, anomalies: &mut [u32]) {
        if self.red.ttp == RedTtp::Inactive || self.red.phase == RedPhase::Done {
            return;
        }
        if !self.refresh_foothold() {
            return;
        }
        if self.red.cooldown > 0 {
            self.red.cooldown -= 1;
            return;
        }
        let dev = self.task.deviation;
        if dev.mask_prob > 0.0 && self.rngs.deviation.random_bool(dev.mask_prob) {
            self.masking_action(ev, dev.mask_diversity);
            return;
        }
        if let Some(entry) = self.ttp_action(ev, anomalies) {
            self.red.log.push(entry);
            self.red.ttp_actions += 1;
            self.fluents.red_inactive = false;
            if dev.interval_stretch > 0.0 {
                let p = 1.0 / (1.0 + dev.interval_stretch);
                let mut idle = 0;
                while idle < MAX_STRETCH && !self.rngs.deviation.random_bool(p) {
                    idle += 1;
                }
                self.red.cooldown = idle;
            }
        }
    }

    /// A gray-looking connection from the foothold.
    fn masking_action(&mut self, ev: &mut StepEvents, diversity: f64) {
        let src = self.red.foothold.expect("foothold refreshed");
        let rng = &mut self.rngs.deviation;
        let protocol = if rng.random_bool(diversity) {
            Protocol::ALL[rng.random_range(0..Protocol::ALL.len())]
        } else {
            Protocol::Http
        };
        let peers: Vec<HostId> = self
            .network_members(self.host(src).honey)
            .into_iter()
            .filter(|&h| h != src)
            .collect();
        let Some(&dst) = peers.choose(&mut self.rngs.deviation) else {
            return;
        };
        let ok = self.connection_ok(src, dst, protocol);
        ev.connection(src, protocol, ok);
        self.red.masking_actions += 1;
    }

    /// Whether a connection between two hosts goes through right now.
    pub(crate) fn connection_ok(&self, src: HostId, dst: HostId, protocol: Protocol) -> bool {
        let (s, d) = (self.host(src), self.host(dst));
        if protocol == Protocol::SshExternal {
            return s.usable() && s.allows(protocol);
        }
        s.usable()
            && d.usable()
            && !d.saturated
            && s.allows(protocol)
            && d.allows(protocol)
            && self.same_network(src, dst)
    }

    fn ttp_action(&mut self, ev: &mut StepEvents, anomalies: &mut [u32]) -> Option<RedLogEntry> {
        let step = self.step_index;
        let foothold = self.red.foothold.expect("foothold refreshed");
        let entry = |kind, actor, target, success| RedLogEntry {
            step,
            kind,
            actor,
            target,
            success,
        };
        match self.red.phase {
            RedPhase::PassiveDiscovery => {
                ev.passive_discovery_logs += 1;
                anomalies[foothold as usize] += 1;
                self.red.phase = RedPhase::ActiveDiscovery;
                Some(entry(RedActionKind::PassiveDiscovery, foothold, None, true))
            }
            RedPhase::ActiveDiscovery => {
                let subnet = self.host(foothold).subnet;
                self.scan(subnet, ev);
                anomalies[foothold as usize] += 1;
                self.red.phase = match self.red.ttp {
                    RedTtp::Ransomware => RedPhase::Spread,
                    RedTtp::Ddos => RedPhase::Recruit,
                    _ => RedPhase::Search,
                };
                Some(entry(RedActionKind::ActiveDiscovery, foothold, None, true))
            }
            RedPhase::Spread | RedPhase::Recruit => {
                let enough = match self.red.phase {
                    RedPhase::Spread => self.red.spread_done >= self.config.ransomware_spread,
                    _ => self.bots().len() as u32 >= self.config.ddos_bots,
                };
                let candidates: Vec<HostId> = self
                    .hosts
                    .iter()
                    .filter(|h| !h.rat && !h.crown_jewel && h.id != foothold && self.in_red_view(h.id))
                    .filter(|h| h.usable())
                    .map(|h| h.id)
                    .collect();
                if enough || candidates.is_empty() {
                    self.red.phase = RedPhase::Search;
                    return self.ttp_action(ev, anomalies);
                }
                let target = *candidates.choose(&mut self.rngs.red).expect("nonempty");
                let ok = self.lateral(foothold, target, ev);
                anomalies[foothold as usize] += 1;
                if ok {
                    self.red.spread_done += 1;
                }
                Some(entry(RedActionKind::Lateral, foothold, Some(target), ok))
            }
            RedPhase::Search => Some(self.search(foothold, ev, anomalies)),
            RedPhase::Approach => {
                let Some(target) = self.valid_target() else {
                    self.red.phase = RedPhase::Search;
                    return self.ttp_action(ev, anomalies);
                };
                if self.host(target).rat {
                    self.red.phase = RedPhase::Act;
                    return self.ttp_action(ev, anomalies);
                }
                let ok = self.lateral(foothold, target, ev);
                anomalies[foothold as usize] += 1;
                if ok {
                    self.red.phase = RedPhase::Act;
                }
                Some(entry(RedActionKind::Lateral, foothold, Some(target), ok))
            }
            RedPhase::Act => {
                let Some(target) = self.valid_target() else {
                    self.red.phase = RedPhase::Search;
                    self.red.progress = 0;
                    return self.ttp_action(ev, anomalies);
                };
                match self.red.ttp {
                    RedTtp::Exfiltration | RedTtp::Ransomware if !self.host(target).rat => {
                        self.red.phase = RedPhase::Approach;
                        self.ttp_action(ev, anomalies)
                    }
                    RedTtp::Exfiltration => Some(self.exfiltrate(foothold, target, ev, anomalies)),
                    RedTtp::Ransomware => Some(self.encrypt(target, anomalies)),
                    RedTtp::Ddos if (self.bots().len() as u32) < self.config.ddos_bots => {
                        self.red.phase = RedPhase::Recruit;
                        self.ttp_action(ev, anomalies)
                    }
                    RedTtp::Ddos | RedTtp::Dos => Some(self.flood(foothold, target, ev, anomalies)),
                    RedTtp::Inactive => None,
                }
            }
            RedPhase::Done => None,
        }
    }

    /// Hosts able to flood: every usable RAT host in red's network.
    fn bots(&self) -> Vec<HostId> {
        self.hosts
            .iter()
            .filter(|h| self.red_can_act_from(h.id) && h.honey == self.red.in_honey)
            .map(|h| h.id)
            .collect()
    }

    /// Scans a real subnet, or the honey network for `None`.
    fn scan(&mut self, subnet: Option<u32>, ev: &mut StepEvents) {
        if let Some(s) = subnet {
            self.red.known_subnets[s as usize] = true;
        }
        let step = self.step_index;
        let mut seen = 0;
        for h in self.hosts.iter_mut().filter(|h| h.subnet == subnet) {
            h.last_discovery = Some(step);
            seen += 1;
        }
        ev.active_discovery_logs += seen;
    }

    fn valid_target(&self) -> Option<HostId> {
        self.red
            .target
            .filter(|&t| self.host(t).crown_jewel && !self.host(t).isolated && self.in_red_view(t))
    }

    fn search(&mut self, foothold: HostId, ev: &mut StepEvents, anomalies: &mut [u32]) -> RedLogEntry {
        let step = self.step_index;
        anomalies[foothold as usize] += 1;
        let jewels: Vec<HostId> = self
            .hosts
            .iter()
            .filter(|h| h.crown_jewel && !h.isolated && self.in_red_view(h.id))
            .map(|h| h.id)
            .collect();
        if !jewels.is_empty() {
            ev.jewel_search_logs += 1;
            let target = *jewels.choose(&mut self.rngs.red).expect("nonempty");
            self.hosts[target as usize].last_discovery = Some(step);
            self.red.target = Some(target);
            self.red.progress = 0;
            self.red.phase = match self.red.ttp {
                RedTtp::Ddos | RedTtp::Dos => RedPhase::Act,
                _ => RedPhase::Approach,
            };
            return RedLogEntry {
                step,
                kind: RedActionKind::JewelSearch,
                actor: foothold,
                target: Some(target),
                success: true,
            };
        }
        let unknown: Vec<u32> = (0..self.subnets)
            .filter(|&s| !self.red.known_subnets[s as usize])
            .collect();
        if !self.red.in_honey {
            if let Some(&s) = unknown.choose(&mut self.rngs.red) {
                self.scan(Some(s), ev);
                return RedLogEntry {
                    step,
                    kind: RedActionKind::ActiveDiscovery,
                    actor: foothold,
                    target: None,
                    success: true,
                };
            }
        }
        ev.jewel_search_logs += 1;
        RedLogEntry {
            step,
            kind: RedActionKind::JewelSearch,
            actor: foothold,
            target: None,
            success: false,
        }
    }

    fn lateral(&mut self, src: HostId, dst: HostId, ev: &mut StepEvents) -> bool {
        let ok = self.connection_ok(src, dst, Protocol::Ssh);
        ev.connection(src, Protocol::Ssh, ok);
        if ok {
            self.hosts[dst as usize].rat = true;
        }
        ok
    }

    fn exfiltrate(
        &mut self,
        foothold: HostId,
        target: HostId,
        ev: &mut StepEvents,
        anomalies: &mut [u32],
    ) -> RedLogEntry {
        let step = self.step_index;
        anomalies[target as usize] += 1;
        let ok = if target == foothold {
            true
        } else {
            let ok = self.connection_ok(target, foothold, Protocol::Scp);
            ev.connection(target, Protocol::Scp, ok);
            ok
        };
        let out = self.connection_ok(target, target, Protocol::SshExternal);
        ev.connection(target, Protocol::SshExternal, out);
        let success = ok && out;
        if success {
            self.red.progress += 1;
            if self.red.progress >= self.config.exfil_steps {
                self.complete(target);
            }
        }
        RedLogEntry {
            step,
            kind: RedActionKind::Exfiltrate,
            actor: target,
            target: Some(target),
            success,
        }
    }

    fn encrypt(&mut self, target: HostId, anomalies: &mut [u32]) -> RedLogEntry {
        let step = self.step_index;
        let honey = self.red.in_honey;
        let victim = self
            .hosts
            .iter()
            .find(|h| h.rat && !h.encrypted && h.id != target && h.honey == honey && !h.isolated)
            .map(|h| h.id);
        self.red.progress += 1;
        let hit = match victim {
            Some(v) if self.red.progress < self.config.encrypt_steps => {
                self.hosts[v as usize].encrypted = true;
                v
            }
            _ => {
                self.hosts[target as usize].encrypted = true;
                self.complete(target);
                target
            }
        };
        anomalies[hit as usize] += 1;
        RedLogEntry {
            step,
            kind: RedActionKind::Encrypt,
            actor: hit,
            target: Some(target),
            success: true,
        }
    }

    fn flood(&mut self, foothold: HostId, target: HostId, ev: &mut StepEvents, anomalies: &mut [u32]) -> RedLogEntry {
        let step = self.step_index;
        let attackers = match self.red.ttp {
            RedTtp::Ddos => self.bots(),
            _ => vec![foothold],
        };
        let mut landed = false;
        for &a in &attackers {
            let reach = self.connection_ok(a, target, Protocol::Http);
            for _ in 0..FLOOD_RATE {
                // a flood is a stream of requests that never complete
                ev.connection(a, Protocol::Http, false);
            }
            anomalies[a as usize] += 1;
            landed |= reach;
        }
        if landed {
            self.hosts[target as usize].saturated = true;
            self.red.progress += 1;
            if self.red.progress >= self.config.flood_steps {
                self.complete(target);
            }
        }
        RedLogEntry {
            step,
            kind: RedActionKind::Flood,
            actor: foothold,
            target: Some(target),
            success: landed,
        }
    }

    fn complete(&mut self, target: HostId) {
        self.red.phase = RedPhase::Done;
        self.fluents.declared_victory = true;
        if !self.host(target).fake_decoy {
            self.fluents.real_compromise = true;
        }
    }
}
