use super::eval::eval_bool;
use super::expr::Expr;
use super::fluent::{EpisodeFluents, MaskContext, StateFacts};
use super::parser::{parse_precondition, ParseError};
use crate::netsim::AbstractAction;
use serde::{Deserialize, Serialize};

/// Precondition of one abstract action.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionPrecondition {
    pub action: AbstractAction,
    pub precondition: Expr,
}

impl ActionPrecondition {
    pub fn parse(action: AbstractAction, text: &str) -> Result<Self, ParseError> {
        Ok(ActionPrecondition {
            action,
            precondition: parse_precondition(text)?,
        })
    }
}

/// Precondition text for each abstract action, in action-id order.
///
/// Every precondition is chosen so that a true value guarantees the
/// resolver finds a target: the target sets used by the resolver are
/// exactly the sets these facts quantify over.
pub const DEFAULT_PRECONDITIONS: [(AbstractAction, &str); 6] = [
    (AbstractAction::DoNothing, "(= 0 0)"),
    (AbstractAction::IsolateProtectedHost, "(protected-host-isolable)"),
    (
        AbstractAction::IsolateSuspiciousHost,
        "(exists-flagged-suspicious-host)",
    ),
    (
        AbstractAction::RelocateProtectedHost,
        "(and (exists-crown-jewel) (> subnet-count 1))",
    ),
    (
        AbstractAction::ReimageSuspiciousHost,
        "(exists-flagged-suspicious-host)",
    ),
    (
        AbstractAction::MigrateSuspiciousToHoney,
        "(and (exists-flagged-suspicious-host) (honey-net-available))",
    ),
];

/// Parsed default preconditions, one per abstract action.
pub fn default_preconditions() -> Vec<ActionPrecondition> {
    DEFAULT_PRECONDITIONS
        .iter()
        .map(|(a, t)| ActionPrecondition::parse(*a, t).expect("built-in precondition parses"))
        .collect()
}

/// Applicability of each action; bit `i` is action id `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActionMask(Vec<bool>);

impl ActionMask {
    pub fn new(bits: Vec<bool>) -> Self {
        ActionMask(bits)
    }

    pub fn all(n: usize) -> Self {
        ActionMask(vec![true; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_set(&self, i: usize) -> bool {
        self.0.get(i).copied().unwrap_or(false)
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|b| **b).count()
    }

    pub fn set_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i)
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    /// Packed form for small masks (bit i = action i).
    pub fn to_u64(&self) -> u64 {
        self.0
            .iter()
            .take(64)
            .enumerate()
            .fold(0, |acc, (i, b)| acc | ((*b as u64) << i))
    }
}

/// Evaluates every precondition against the state facts and fluents.
pub fn mask_actions(preconds: &[ActionPrecondition], facts: &StateFacts, fl: &EpisodeFluents) -> ActionMask {
    let ctx = MaskContext { facts, fluents: fl };
    let mut bits = vec![false; preconds.len()];
    for p in preconds {
        bits[p.action.id()] = eval_bool(&p.precondition, &ctx);
    }
    ActionMask(bits)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn facts() -> StateFacts {
        StateFacts {
            exists_flagged_suspicious_host: false,
            exists_crown_jewel: true,
            honey_net_available: true,
            protected_host_isolable: true,
            subnet_count: 2,
        }
    }

    #[test]
    fn preconditions_cover_every_action_in_order() {
        let pre = default_preconditions();
        assert_eq!(pre.len(), AbstractAction::ALL.len());
        for (i, p) in pre.iter().enumerate() {
            assert_eq!(p.action.id(), i);
        }
    }

    #[test]
    fn no_flagged_host_clears_migrate() {
        let m = mask_actions(&default_preconditions(), &facts(), &EpisodeFluents::fresh(20));
        assert!(!m.is_set(AbstractAction::MigrateSuspiciousToHoney.id()));
        assert!(!m.is_set(AbstractAction::IsolateSuspiciousHost.id()));
        assert!(m.is_set(AbstractAction::DoNothing.id()));
    }

    #[test]
    fn do_nothing_survives_empty_facts() {
        let m = mask_actions(
            &default_preconditions(),
            &StateFacts::default(),
            &EpisodeFluents::default(),
        );
        assert_eq!(m.set_indices().collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn flagged_host_with_honey_sets_everything() {
        let mut f = facts();
        f.exists_flagged_suspicious_host = true;
        let m = mask_actions(&default_preconditions(), &f, &EpisodeFluents::fresh(20));
        assert_eq!(m.count(), 6);
        assert_eq!(m.to_u64(), 0b11_1111);
    }
}
