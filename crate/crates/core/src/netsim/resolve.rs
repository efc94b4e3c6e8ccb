use super::action::{AbstractAction, ConcreteAction, HostId, ParametricAction, Verb};
use super::state::{Host, SimState};
use super::SimError;
use serde::{Deserialize, Serialize};

/// How protected-host actions pick their crown jewel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtectedTarget {
    /// The jewel red touched most recently.
    #[default]
    MostRecentDiscovery,
    LowestId,
}

/// How suspicious-host actions pick their host.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuspiciousTarget {
    #[default]
    HighestSuspicion,
    LowestId,
}

/// Heuristics that turn an abstract action into a concrete one. Ties always
/// go to the lowest host id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ResolverConfig {
    pub protected: ProtectedTarget,
    pub suspicious: SuspiciousTarget,
}

fn best_by<K: Ord>(hosts: impl Iterator<Item = HostId>, key: impl Fn(HostId) -> K) -> Option<HostId> {
    // max key, lowest id on ties
    hosts.fold(None, |best: Option<HostId>, h| match best {
        Some(b) if key(b) >= key(h) => Some(b),
        _ => Some(h),
    })
}

impl SimState {
    fn pick_protected(&self, cfg: &ResolverConfig, eligible: impl Fn(&Host) -> bool) -> Option<HostId> {
        let ids = self
            .hosts
            .iter()
            .filter(|h| h.is_real_crown_jewel() && eligible(h))
            .map(|h| h.id);
        match cfg.protected {
            ProtectedTarget::MostRecentDiscovery => best_by(ids, |h| self.host(h).last_discovery),
            ProtectedTarget::LowestId => best_by(ids, |_| ()),
        }
    }

    fn pick_suspicious(&self, cfg: &ResolverConfig) -> Option<HostId> {
        let ids = self.hosts.iter().filter(|h| h.actionable_suspicious()).map(|h| h.id);
        match cfg.suspicious {
            SuspiciousTarget::HighestSuspicion => best_by(ids, |h| self.host(h).suspicion),
            SuspiciousTarget::LowestId => best_by(ids, |_| ()),
        }
    }

    /// Maps an abstract action onto a concrete one without touching the state.
    pub fn resolve_action(&self, cfg: &ResolverConfig, action: AbstractAction) -> Result<ConcreteAction, SimError> {
        let none = || SimError::NoTarget(action);
        let concrete = match action {
            AbstractAction::DoNothing => ConcreteAction::NOOP,
            AbstractAction::IsolateProtectedHost => {
                let h = self.pick_protected(cfg, |h| !h.isolated).ok_or_else(none)?;
                ConcreteAction::on(Verb::IsolateProtected, h)
            }
            AbstractAction::RelocateProtectedHost => {
                if self.subnets < 2 {
                    return Err(none());
                }
                let h = self.pick_protected(cfg, |_| true).ok_or_else(none)?;
                let from = self.host(h).subnet.expect("real crown jewels live in a real subnet");
                ConcreteAction {
                    subnet: Some((from + 1) % self.subnets),
                    ..ConcreteAction::on(Verb::RelocateProtected, h)
                }
            }
            AbstractAction::IsolateSuspiciousHost => {
                ConcreteAction::on(Verb::IsolateSuspicious, self.pick_suspicious(cfg).ok_or_else(none)?)
            }
            AbstractAction::ReimageSuspiciousHost => {
                ConcreteAction::on(Verb::ReimageSuspicious, self.pick_suspicious(cfg).ok_or_else(none)?)
            }
            AbstractAction::MigrateSuspiciousToHoney => {
                if self.honey_capacity_left == 0 {
                    return Err(none());
                }
                ConcreteAction::on(Verb::MigrateToHoney, self.pick_suspicious(cfg).ok_or_else(none)?)
            }
        };
        Ok(concrete)
    }

    /// Maps a parametric index onto a concrete action, or `None` when that
    /// index is not applicable in the current state.
    pub fn parametric_concrete(&self, index: usize) -> Option<ConcreteAction> {
        let Some(p) = ParametricAction::decode(index, self.real_hosts)? else {
            return Some(ConcreteAction::NOOP);
        };
        let h = self.host(p.host);
        let ordinary = !h.crown_jewel && !h.honey && !h.isolated;
        let action = ConcreteAction::on(p.verb(), p.host);
        let ok = match p.verb() {
            Verb::IsolateProtected => h.is_real_crown_jewel() && !h.isolated,
            Verb::RelocateProtected => h.is_real_crown_jewel() && self.subnets > 1,
            Verb::IsolateSuspicious => ordinary,
            Verb::ReimageSuspicious => ordinary && h.reimage_left == 0,
            Verb::MigrateToHoney => ordinary && h.reimage_left == 0 && self.honey_capacity_left > 0,
            Verb::RelocateSuspicious => {
                let k = p.offset().expect("relocation slot");
                ordinary && k < self.subnets
            }
            Verb::BlockProtocol => !h.honey && h.allows(p.protocol().expect("block slot")),
            Verb::Noop => true,
        };
        if !ok {
            return None;
        }
        let subnet = match p.verb() {
            Verb::RelocateProtected => h.subnet.map(|s| (s + 1) % self.subnets),
            Verb::RelocateSuspicious => h.subnet.map(|s| (s + p.offset().expect("slot")) % self.subnets),
            _ => None,
        };
        Some(ConcreteAction {
            subnet,
            protocol: p.protocol(),
            ..action
        })
    }

    /// Applies a concrete blue action and counts it in the episode fluents.
    pub(crate) fn apply_blue(&mut self, a: &ConcreteAction) {
        let f = &mut self.fluents;
        f.num_blue_actions += 1;
        if a.verb.is_nontrivial() {
            f.full_nontrivial_blue_actions += 1;
        }
        if a.verb.is_represented_nontrivial() {
            f.nontrivial_blue_actions += 1;
        }
        match a.verb {
            Verb::IsolateProtected => {
                f.isolate_actions += 1;
                f.crown_jewel_isolations += 1;
            }
            Verb::IsolateSuspicious => {
                f.isolate_actions += 1;
                f.worst_contributor_isolations += 1;
            }
            Verb::RelocateProtected => f.crown_jewel_relocations += 1,
            Verb::ReimageSuspicious => f.worst_contributor_reimages += 1,
            Verb::MigrateToHoney => f.worst_contributor_honeys += 1,
            Verb::RelocateSuspicious => f.worst_contributor_relocations += 1,
            Verb::BlockProtocol | Verb::Noop => {}
        }

        let Some(id) = a.host else { return };
        let downtime = (self.config.reimage_downtime, self.config.relocation_downtime);
        let h = &mut self.hosts[id as usize];
        match a.verb {
            Verb::IsolateProtected | Verb::IsolateSuspicious => h.isolated = true,
            Verb::RelocateProtected | Verb::RelocateSuspicious => {
                h.subnet = a.subnet;
                h.reimage_left = h.reimage_left.max(downtime.1);
                if a.verb == Verb::RelocateProtected {
                    // redeployed from a clean image at the new address
                    h.rat = false;
                    h.clear_suspicion();
                }
                self.red.forget_target(id);
            }
            Verb::ReimageSuspicious => {
                h.rat = false;
                h.encrypted = false;
                h.clear_suspicion();
                h.reimage_left = downtime.0;
            }
            Verb::MigrateToHoney => {
                h.honey = true;
                h.fake_decoy = true;
                h.migrated = true;
                h.subnet = None;
                h.flagged_suspicious = false;
                self.honey_capacity_left -= 1;
            }
            Verb::BlockProtocol => h.blocked[a.protocol.expect("block carries a protocol").index()] = true,
            Verb::Noop => {}
        }
    }
}
