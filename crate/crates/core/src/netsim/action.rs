use serde::{Deserialize, Serialize};
use std::fmt;

pub type HostId = u32;

/// The fixed blue action set used with action representations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AbstractAction {
    DoNothing,
    IsolateProtectedHost,
    IsolateSuspiciousHost,
    RelocateProtectedHost,
    ReimageSuspiciousHost,
    MigrateSuspiciousToHoney,
}

impl AbstractAction {
    pub const ALL: [AbstractAction; 6] = [
        AbstractAction::DoNothing,
        AbstractAction::IsolateProtectedHost,
        AbstractAction::IsolateSuspiciousHost,
        AbstractAction::RelocateProtectedHost,
        AbstractAction::ReimageSuspiciousHost,
        AbstractAction::MigrateSuspiciousToHoney,
    ];
    pub const COUNT: usize = 6;

    pub fn id(self) -> usize {
        self as usize
    }

    pub fn from_id(id: usize) -> Option<AbstractAction> {
        Self::ALL.get(id).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            AbstractAction::DoNothing => "do-nothing",
            AbstractAction::IsolateProtectedHost => "isolate-protected-host",
            AbstractAction::IsolateSuspiciousHost => "isolate-suspicious-host",
            AbstractAction::RelocateProtectedHost => "relocate-protected-host",
            AbstractAction::ReimageSuspiciousHost => "reimage-suspicious-host",
            AbstractAction::MigrateSuspiciousToHoney => "migrate-suspicious-to-honey",
        }
    }
}

impl fmt::Display for AbstractAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Connection protocols distinguished in events and protocol blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    Http,
    Scp,
    Ssh,
    SshExternal,
}

impl Protocol {
    pub const ALL: [Protocol; 4] = [Protocol::Http, Protocol::Scp, Protocol::Ssh, Protocol::SshExternal];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// What a concrete blue action does, which also decides the fluents it
/// increments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verb {
    Noop,
    IsolateProtected,
    IsolateSuspicious,
    RelocateProtected,
    ReimageSuspicious,
    MigrateToHoney,
    /// Auxiliary parametric verb: move a host to another real subnet.
    RelocateSuspicious,
    /// Auxiliary parametric verb: stop one protocol on a host.
    BlockProtocol,
}

impl Verb {
    /// Counts toward `nontrivial-blue-actions`.
    pub fn is_represented_nontrivial(self) -> bool {
        matches!(
            self,
            Verb::IsolateProtected
                | Verb::IsolateSuspicious
                | Verb::RelocateProtected
                | Verb::ReimageSuspicious
                | Verb::MigrateToHoney
        )
    }

    /// Counts toward `full-nontrivial-blue-actions`.
    pub fn is_nontrivial(self) -> bool {
        self != Verb::Noop
    }
}

/// An executable action: a verb with its target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConcreteAction {
    pub verb: Verb,
    pub host: Option<HostId>,
    /// Destination subnet for relocations.
    pub subnet: Option<u32>,
    pub protocol: Option<Protocol>,
}

impl ConcreteAction {
    pub const NOOP: ConcreteAction = ConcreteAction {
        verb: Verb::Noop,
        host: None,
        subnet: None,
        protocol: None,
    };

    pub fn on(verb: Verb, host: HostId) -> Self {
        ConcreteAction {
            verb,
            host: Some(host),
            subnet: None,
            protocol: None,
        }
    }
}

/// Host-targeted verbs in the parametric (per-host) action space.
pub const PARAMETRIC_VERBS_PER_HOST: usize = 15;
/// Relative destination offsets of the auxiliary relocation verbs.
pub const RELOCATION_OFFSETS: u32 = 6;

/// One entry of the parametric action space.
///
/// Index 0 is the no-op; index `1 + host * 15 + slot` addresses the slot-th
/// verb on `host`. Slots: 0 isolate-protected, 1 isolate-suspicious,
/// 2 relocate-protected, 3 reimage, 4 migrate-to-honey, 5..=10
/// relocate-suspicious to subnet offset 1..=6, 11..=14 block a protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ParametricAction {
    pub host: HostId,
    pub slot: u8,
}

impl ParametricAction {
    pub fn decode(index: usize, hosts: u32) -> Option<Option<ParametricAction>> {
        if index == 0 {
            return Some(None);
        }
        let i = index - 1;
        let host = (i / PARAMETRIC_VERBS_PER_HOST) as u32;
        if host >= hosts {
            return None;
        }
        Some(Some(ParametricAction {
            host,
            slot: (i % PARAMETRIC_VERBS_PER_HOST) as u8,
        }))
    }

    pub fn encode(self) -> usize {
        1 + self.host as usize * PARAMETRIC_VERBS_PER_HOST + self.slot as usize
    }

    pub fn verb(self) -> Verb {
        match self.slot {
            0 => Verb::IsolateProtected,
            1 => Verb::IsolateSuspicious,
            2 => Verb::RelocateProtected,
            3 => Verb::ReimageSuspicious,
            4 => Verb::MigrateToHoney,
            5..=10 => Verb::RelocateSuspicious,
            _ => Verb::BlockProtocol,
        }
    }

    /// Relative subnet offset for relocate-suspicious slots.
    pub fn offset(self) -> Option<u32> {
        (5..=10).contains(&self.slot).then(|| self.slot as u32 - 4)
    }

    pub fn protocol(self) -> Option<Protocol> {
        (11..=14)
            .contains(&self.slot)
            .then(|| Protocol::ALL[self.slot as usize - 11])
    }
}

/// Size of the parametric action space: 15 verbs per host plus the no-op.
///
/// Returns `None` for an empty network.
pub fn enumerate_parametric_actions(hosts: u32) -> Option<usize> {
    (hosts >= 1).then(|| PARAMETRIC_VERBS_PER_HOST * hosts as usize + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parametric_counts() {
        assert_eq!(enumerate_parametric_actions(200), Some(3001));
        assert_eq!(enumerate_parametric_actions(1), Some(16));
        assert_eq!(enumerate_parametric_actions(0), None);
    }

    #[test]
    fn decode_encode_cover_the_space() {
        let hosts = 7;
        let n = enumerate_parametric_actions(hosts).unwrap();
        assert_eq!(ParametricAction::decode(0, hosts), Some(None));
        for i in 1..n {
            let a = ParametricAction::decode(i, hosts).unwrap().unwrap();
            assert_eq!(a.encode(), i);
        }
        assert_eq!(ParametricAction::decode(n, hosts), None);
    }

    #[test]
    fn slot_semantics() {
        let a = |slot| ParametricAction { host: 0, slot };
        assert_eq!(a(5).offset(), Some(1));
        assert_eq!(a(10).offset(), Some(6));
        assert_eq!(a(11).protocol(), Some(Protocol::Http));
        assert_eq!(a(14).protocol(), Some(Protocol::SshExternal));
        assert_eq!(a(4).verb(), Verb::MigrateToHoney);
        assert!(a(4).verb().is_represented_nontrivial());
        assert!(!a(7).verb().is_represented_nontrivial());
        assert!(a(7).verb().is_nontrivial());
    }

    #[test]
    fn abstract_ids_round_trip() {
        for a in AbstractAction::ALL {
            assert_eq!(AbstractAction::from_id(a.id()), Some(a));
        }
        assert_eq!(AbstractAction::from_id(6), None);
    }
}
