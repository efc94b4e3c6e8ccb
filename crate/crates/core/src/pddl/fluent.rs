//! Fluent registry and the per-episode fluent store.
//!
//! Every identifier that may appear in a goal, metric or action precondition
//! is declared here. Fluents come in two scopes: episode fluents are tallies
//! kept for the whole episode and may be used anywhere, while state fluents
//! are derived from the live simulation and are only meaningful inside
//! action preconditions.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Value type of an expression or fluent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ValueType {
    Bool,
    Num,
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueType::Bool => f.write_str("boolean"),
            ValueType::Num => f.write_str("numeric"),
        }
    }
}

/// Where a fluent's value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scope {
    /// Stored in [`EpisodeFluents`] (or derived purely from it).
    Episode,
    /// Derived from the simulation state; preconditions only.
    State,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Fluent {
    RedInactive,
    DeclaredVictory,
    RealCompromise,
    GoodQosEvents,
    BadQosEvents,
    StepsToSurvive,
    IsolateActions,
    CrownJewelRelocations,
    NumBlueActions,
    WorstContributorIsolations,
    CrownJewelIsolations,
    WorstContributorReimages,
    WorstContributorRelocations,
    WorstContributorHoneys,
    FullNontrivialBlueActions,
    NontrivialBlueActions,
    /// bad / (bad + good), 0 when no QoS events were recorded.
    QosPenalty,
    /// Some host is flagged suspicious and can still be acted on
    /// (not isolated, not in the honey network, not mid-reimage).
    ExistsFlaggedSuspiciousHost,
    /// At least one real crown-jewel host exists.
    ExistsCrownJewel,
    /// The honey network still has capacity for another migration.
    HoneyNetAvailable,
    /// Some real crown jewel is not yet isolated.
    ProtectedHostIsolable,
    /// Number of real subnets.
    SubnetCount,
}

struct Entry {
    name: &'static str,
    fluent: Fluent,
    ty: ValueType,
    scope: Scope,
    doc: &'static str,
}

const REGISTRY: &[Entry] = &[
    Entry {
        name: "red-inactive",
        fluent: Fluent::RedInactive,
        ty: ValueType::Bool,
        scope: Scope::Episode,
        doc: "true while the red agent has taken no TTP action this episode",
    },
    Entry {
        name: "declared-victory",
        fluent: Fluent::DeclaredVictory,
        ty: ValueType::Bool,
        scope: Scope::Episode,
        doc: "true once the red agent declares victory (on a real or a decoy target)",
    },
    Entry {
        name: "real-compromise",
        fluent: Fluent::RealCompromise,
        ty: ValueType::Bool,
        scope: Scope::Episode,
        doc: "true once the red agent completes its objective on a real (non-decoy) asset",
    },
    Entry {
        name: "good-qos-events",
        fluent: Fluent::GoodQosEvents,
        ty: ValueType::Num,
        scope: Scope::Episode,
        doc: "number of successful gray connection attempts",
    },
    Entry {
        name: "bad-qos-events",
        fluent: Fluent::BadQosEvents,
        ty: ValueType::Num,
        scope: Scope::Episode,
        doc: "number of failed gray connection attempts",
    },
    Entry {
        name: "steps-to-survive",
        fluent: Fluent::StepsToSurvive,
        ty: ValueType::Num,
        scope: Scope::Episode,
        doc: "episode horizon; constant for the episode and always positive",
    },
    Entry {
        name: "isolate-actions",
        fluent: Fluent::IsolateActions,
        ty: ValueType::Num,
        scope: Scope::Episode,
        doc: "number of blue actions isolating any host",
    },
    Entry {
        name: "crown-jewel-relocations",
        fluent: Fluent::CrownJewelRelocations,
        ty: ValueType::Num,
        scope: Scope::Episode,
        doc: "number of blue actions relocating a crown jewel",
    },
    Entry {
        name: "num-blue-actions",
        fluent: Fluent::NumBlueActions,
        ty: ValueType::Num,
        scope: Scope::Episode,
        doc: "total number of blue actions, do-nothing included",
    },
    Entry {
        name: "worst-contributor-isolations",
        fluent: Fluent::WorstContributorIsolations,
        ty: ValueType::Num,
        scope: Scope::Episode,
        doc: "number of attempts to isolate a suspicious host",
    },
    Entry {
        name: "crown-jewel-isolations",
        fluent: Fluent::CrownJewelIsolations,
        ty: ValueType::Num,
        scope: Scope::Episode,
        doc: "number of attempts to isolate a crown jewel",
    },
    Entry {
        name: "worst-contributor-reimages",
        fluent: Fluent::WorstContributorReimages,
        ty: ValueType::Num,
        scope: Scope::Episode,
        doc: "number of attempts to reimage a suspicious host",
    },
    Entry {
        name: "worst-contributor-relocations",
        fluent: Fluent::WorstContributorRelocations,
        ty: ValueType::Num,
        scope: Scope::Episode,
        doc: "number of attempts to relocate a suspicious host to a different real subnet (parametric actions only)",
    },
    Entry {
        name: "worst-contributor-honeys",
        fluent: Fluent::WorstContributorHoneys,
        ty: ValueType::Num,
        scope: Scope::Episode,
        doc: "number of attempts to move a suspicious host into the honey network",
    },
    Entry {
        name: "full-nontrivial-blue-actions",
        fluent: Fluent::FullNontrivialBlueActions,
        ty: ValueType::Num,
        scope: Scope::Episode,
        doc: "number of blue actions that do something, auxiliary parametric verbs included",
    },
    Entry {
        name: "nontrivial-blue-actions",
        fluent: Fluent::NontrivialBlueActions,
        ty: ValueType::Num,
        scope: Scope::Episode,
        doc: "number of blue actions that do something and map onto an abstract action",
    },
    Entry {
        name: "qos-penalty",
        fluent: Fluent::QosPenalty,
        ty: ValueType::Num,
        scope: Scope::Episode,
        doc: "bad-qos-events / (bad-qos-events + good-qos-events), 0 when both are 0",
    },
    Entry {
        name: "exists-flagged-suspicious-host",
        fluent: Fluent::ExistsFlaggedSuspiciousHost,
        ty: ValueType::Bool,
        scope: Scope::State,
        doc: "some flagged host is not isolated, not in the honey network and not reimaging",
    },
    Entry {
        name: "exists-crown-jewel",
        fluent: Fluent::ExistsCrownJewel,
        ty: ValueType::Bool,
        scope: Scope::State,
        doc: "at least one real crown-jewel host exists",
    },
    Entry {
        name: "honey-net-available",
        fluent: Fluent::HoneyNetAvailable,
        ty: ValueType::Bool,
        scope: Scope::State,
        doc: "the honey network can accept another migrated host",
    },
    Entry {
        name: "protected-host-isolable",
        fluent: Fluent::ProtectedHostIsolable,
        ty: ValueType::Bool,
        scope: Scope::State,
        doc: "some real crown jewel is not isolated",
    },
    Entry {
        name: "subnet-count",
        fluent: Fluent::SubnetCount,
        ty: ValueType::Num,
        scope: Scope::State,
        doc: "number of real subnets",
    },
];

/// Alternate spellings accepted by the parser. The catalog's pairs 42 and 43
/// use `red-declared-victory`.
const ALIASES: &[(&str, Fluent)] = &[("red-declared-victory", Fluent::DeclaredVictory)];

impl Fluent {
    pub const ALL: [Fluent; 22] = [
        Fluent::RedInactive,
        Fluent::DeclaredVictory,
        Fluent::RealCompromise,
        Fluent::GoodQosEvents,
        Fluent::BadQosEvents,
        Fluent::StepsToSurvive,
        Fluent::IsolateActions,
        Fluent::CrownJewelRelocations,
        Fluent::NumBlueActions,
        Fluent::WorstContributorIsolations,
        Fluent::CrownJewelIsolations,
        Fluent::WorstContributorReimages,
        Fluent::WorstContributorRelocations,
        Fluent::WorstContributorHoneys,
        Fluent::FullNontrivialBlueActions,
        Fluent::NontrivialBlueActions,
        Fluent::QosPenalty,
        Fluent::ExistsFlaggedSuspiciousHost,
        Fluent::ExistsCrownJewel,
        Fluent::HoneyNetAvailable,
        Fluent::ProtectedHostIsolable,
        Fluent::SubnetCount,
    ];

    fn entry(self) -> &'static Entry {
        REGISTRY
            .iter()
            .find(|e| e.fluent == self)
            .expect("every fluent is registered")
    }

    /// Looks up a fluent by its PDDL name (aliases included).
    pub fn from_name(name: &str) -> Option<Fluent> {
        REGISTRY
            .iter()
            .find(|e| e.name == name)
            .map(|e| e.fluent)
            .or_else(|| ALIASES.iter().find(|(n, _)| *n == name).map(|(_, f)| *f))
    }

    pub fn name(self) -> &'static str {
        self.entry().name
    }

    pub fn value_type(self) -> ValueType {
        self.entry().ty
    }

    pub fn scope(self) -> Scope {
        self.entry().scope
    }

    pub fn doc(self) -> &'static str {
        self.entry().doc
    }
}

impl fmt::Display for Fluent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Renders the fluent registry as a Markdown reference page.
pub fn registry_markdown() -> String {
    let mut out = String::from("# Fluent reference\n\n");
    out.push_str("Identifiers accepted in goals, metrics and action preconditions.\n");
    out.push_str("Episode fluents may be used anywhere; state fluents only in preconditions.\n\n");
    out.push_str("| name | type | scope | meaning |\n|---|---|---|---|\n");
    for e in REGISTRY {
        let scope = match e.scope {
            Scope::Episode => "episode",
            Scope::State => "state",
        };
        out.push_str(&format!("| `{}` | {} | {} | {} |\n", e.name, e.ty, scope, e.doc));
    }
    out.push_str("\nAliases:\n\n");
    for (alias, target) in ALIASES {
        out.push_str(&format!("- `{alias}` = `{}`\n", target.name()));
    }
    out
}

/// Read access to fluent values during evaluation.
pub trait FluentSource {
    fn boolean(&self, fluent: Fluent) -> bool;
    fn number(&self, fluent: Fluent) -> f64;
}

/// Numeric and boolean fluents tracked over one episode.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct EpisodeFluents {
    pub red_inactive: bool,
    pub declared_victory: bool,
    pub real_compromise: bool,
    pub good_qos_events: u64,
    pub bad_qos_events: u64,
    pub steps_to_survive: u64,
    pub isolate_actions: u64,
    pub crown_jewel_relocations: u64,
    pub num_blue_actions: u64,
    pub worst_contributor_isolations: u64,
    pub crown_jewel_isolations: u64,
    pub worst_contributor_reimages: u64,
    pub worst_contributor_relocations: u64,
    pub worst_contributor_honeys: u64,
    pub full_nontrivial_blue_actions: u64,
    pub nontrivial_blue_actions: u64,
}

impl EpisodeFluents {
    /// Fluents at the start of an episode with the given horizon.
    pub fn fresh(steps_to_survive: u64) -> Self {
        EpisodeFluents {
            red_inactive: true,
            steps_to_survive,
            ..Default::default()
        }
    }

    pub fn qos_penalty(&self) -> f64 {
        ratio(
            self.bad_qos_events as f64,
            (self.bad_qos_events + self.good_qos_events) as f64,
        )
    }

    /// Counter values in registry order, for monotonicity checks and metrics.
    pub fn counters(&self) -> [(Fluent, u64); 13] {
        [
            (Fluent::GoodQosEvents, self.good_qos_events),
            (Fluent::BadQosEvents, self.bad_qos_events),
            (Fluent::StepsToSurvive, self.steps_to_survive),
            (Fluent::IsolateActions, self.isolate_actions),
            (Fluent::CrownJewelRelocations, self.crown_jewel_relocations),
            (Fluent::NumBlueActions, self.num_blue_actions),
            (Fluent::WorstContributorIsolations, self.worst_contributor_isolations),
            (Fluent::CrownJewelIsolations, self.crown_jewel_isolations),
            (Fluent::WorstContributorReimages, self.worst_contributor_reimages),
            (Fluent::WorstContributorRelocations, self.worst_contributor_relocations),
            (Fluent::WorstContributorHoneys, self.worst_contributor_honeys),
            (Fluent::FullNontrivialBlueActions, self.full_nontrivial_blue_actions),
            (Fluent::NontrivialBlueActions, self.nontrivial_blue_actions),
        ]
    }
}

/// Division with the zero-denominator rule: x / 0 = 0.
pub(crate) fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

impl FluentSource for EpisodeFluents {
    fn boolean(&self, fluent: Fluent) -> bool {
        match fluent {
            Fluent::RedInactive => self.red_inactive,
            Fluent::DeclaredVictory => self.declared_victory,
            Fluent::RealCompromise => self.real_compromise,
            other => panic!("{other} is not an episode boolean; the parser rejects this"),
        }
    }

    fn number(&self, fluent: Fluent) -> f64 {
        let v = match fluent {
            Fluent::GoodQosEvents => self.good_qos_events,
            Fluent::BadQosEvents => self.bad_qos_events,
            Fluent::StepsToSurvive => self.steps_to_survive,
            Fluent::IsolateActions => self.isolate_actions,
            Fluent::CrownJewelRelocations => self.crown_jewel_relocations,
            Fluent::NumBlueActions => self.num_blue_actions,
            Fluent::WorstContributorIsolations => self.worst_contributor_isolations,
            Fluent::CrownJewelIsolations => self.crown_jewel_isolations,
            Fluent::WorstContributorReimages => self.worst_contributor_reimages,
            Fluent::WorstContributorRelocations => self.worst_contributor_relocations,
            Fluent::WorstContributorHoneys => self.worst_contributor_honeys,
            Fluent::FullNontrivialBlueActions => self.full_nontrivial_blue_actions,
            Fluent::NontrivialBlueActions => self.nontrivial_blue_actions,
            Fluent::QosPenalty => return self.qos_penalty(),
            other => panic!("{other} is not an episode number; the parser rejects this"),
        };
        v as f64
    }
}

/// Facts derived from the simulation state for action preconditions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StateFacts {
    pub exists_flagged_suspicious_host: bool,
    pub exists_crown_jewel: bool,
    pub honey_net_available: bool,
    pub protected_host_isolable: bool,
    pub subnet_count: u32,
}

/// Episode fluents together with state facts, for precondition evaluation.
#[derive(Debug, Clone, Copy)]
pub struct MaskContext<'a> {
    pub facts: &'a StateFacts,
    pub fluents: &'a EpisodeFluents,
}

impl FluentSource for MaskContext<'_> {
    fn boolean(&self, fluent: Fluent) -> bool {
        match fluent {
            Fluent::ExistsFlaggedSuspiciousHost => self.facts.exists_flagged_suspicious_host,
            Fluent::ExistsCrownJewel => self.facts.exists_crown_jewel,
            Fluent::HoneyNetAvailable => self.facts.honey_net_available,
            Fluent::ProtectedHostIsolable => self.facts.protected_host_isolable,
            other => self.fluents.boolean(other),
        }
    }

    fn number(&self, fluent: Fluent) -> f64 {
        match fluent {
            Fluent::SubnetCount => self.facts.subnet_count as f64,
            other => self.fluents.number(other),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_fluent_has_one_registry_entry() {
        for f in Fluent::ALL {
            assert_eq!(REGISTRY.iter().filter(|e| e.fluent == f).count(), 1, "{f:?}");
            assert_eq!(Fluent::from_name(f.name()), Some(f));
        }
        assert_eq!(REGISTRY.len(), Fluent::ALL.len());
    }

    #[test]
    fn sixteen_episode_terms_plus_qos_penalty() {
        let episode = Fluent::ALL.iter().filter(|f| f.scope() == Scope::Episode).count();
        assert_eq!(episode, 17);
    }

    #[test]
    fn alias_resolves_to_declared_victory() {
        assert_eq!(Fluent::from_name("red-declared-victory"), Some(Fluent::DeclaredVictory));
        assert_eq!(Fluent::DeclaredVictory.name(), "declared-victory");
        assert_eq!(Fluent::from_name("foo"), None);
    }

    #[test]
    fn qos_penalty_zero_rule() {
        let mut fl = EpisodeFluents::fresh(20);
        assert_eq!(fl.qos_penalty(), 0.0);
        fl.bad_qos_events = 1;
        fl.good_qos_events = 3;
        assert_eq!(fl.qos_penalty(), 0.25);
    }

    #[test]
    fn markdown_lists_every_name() {
        let md = registry_markdown();
        for f in Fluent::ALL {
            assert!(md.contains(&format!("`{}`", f.name())));
        }
        assert!(md.contains("red-declared-victory"));
    }
}
