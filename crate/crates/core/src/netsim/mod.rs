//! Seeded abstract network simulation.
//!
//! A step runs in a fixed order: the blue action (checked against its
//! precondition, then resolved and applied), one red tick, gray traffic,
//! reimage and relocation downtime, suspicion flagging, then the terminal
//! check. Terminal means the horizon is reached or red declared victory.

mod action;
mod events;
mod gray;
mod red;
mod resolve;
mod state;

pub use action::{
    enumerate_parametric_actions, AbstractAction, ConcreteAction, HostId, ParametricAction, Protocol, Verb,
    PARAMETRIC_VERBS_PER_HOST, RELOCATION_OFFSETS,
};
pub use events::StepEvents;
pub use red::{RedActionKind, RedLogEntry, RedPhase, RedState};
pub use resolve::{ProtectedTarget, ResolverConfig, SuspiciousTarget};
pub use state::{init_episode, Host, SimConfig, SimRngs, SimState};

use crate::pddl::{
    default_preconditions, eval_bool, mask_actions, ActionMask, ActionPrecondition, EpisodeFluents, MaskContext,
};
use crate::reward::EpisodeOutcome;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("infeasible task: {0}")]
    InfeasibleTask(String),
    #[error("action {0} is not applicable in the current state")]
    Inapplicable(AbstractAction),
    #[error("parametric action {0} is not applicable in the current state")]
    InapplicableParametric(usize),
    #[error("no target for {0}")]
    NoTarget(AbstractAction),
    #[error("episode already terminated")]
    Terminated,
    #[error("precondition list does not cover action {0}")]
    MissingPrecondition(AbstractAction),
}

/// Blue-side rules: action preconditions and resolver heuristics.
#[derive(Debug, Clone, PartialEq)]
pub struct Rules {
    /// One precondition per abstract action, in id order.
    pub preconditions: Vec<ActionPrecondition>,
    pub resolver: ResolverConfig,
}

impl Default for Rules {
    fn default() -> Self {
        Rules {
            preconditions: default_preconditions(),
            resolver: ResolverConfig::default(),
        }
    }
}

impl Rules {
    fn precondition(&self, a: AbstractAction) -> Result<&ActionPrecondition, SimError> {
        self.preconditions
            .iter()
            .find(|p| p.action == a)
            .ok_or(SimError::MissingPrecondition(a))
    }
}

/// Everything one step produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepOutcome {
    pub action: ConcreteAction,
    pub events: StepEvents,
    /// Counter increments and boolean changes of this step.
    pub fluent_delta: EpisodeFluents,
    pub terminal: bool,
    pub outcome: Option<EpisodeOutcome>,
}

/// One line of an episode trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: u32,
    pub abstract_action: Option<AbstractAction>,
    pub action: ConcreteAction,
    pub events: StepEvents,
    pub fluents: EpisodeFluents,
    pub terminal: bool,
}

fn delta(before: &EpisodeFluents, after: &EpisodeFluents) -> EpisodeFluents {
    let mut d = EpisodeFluents {
        red_inactive: after.red_inactive != before.red_inactive,
        declared_victory: after.declared_victory && !before.declared_victory,
        real_compromise: after.real_compromise && !before.real_compromise,
        ..EpisodeFluents::default()
    };
    let fields: [(&mut u64, u64, u64); 13] = [
        (&mut d.good_qos_events, before.good_qos_events, after.good_qos_events),
        (&mut d.bad_qos_events, before.bad_qos_events, after.bad_qos_events),
        (&mut d.steps_to_survive, before.steps_to_survive, after.steps_to_survive),
        (&mut d.isolate_actions, before.isolate_actions, after.isolate_actions),
        (
            &mut d.crown_jewel_relocations,
            before.crown_jewel_relocations,
            after.crown_jewel_relocations,
        ),
        (&mut d.num_blue_actions, before.num_blue_actions, after.num_blue_actions),
        (
            &mut d.worst_contributor_isolations,
            before.worst_contributor_isolations,
            after.worst_contributor_isolations,
        ),
        (
            &mut d.crown_jewel_isolations,
            before.crown_jewel_isolations,
            after.crown_jewel_isolations,
        ),
        (
            &mut d.worst_contributor_reimages,
            before.worst_contributor_reimages,
            after.worst_contributor_reimages,
        ),
        (
            &mut d.worst_contributor_relocations,
            before.worst_contributor_relocations,
            after.worst_contributor_relocations,
        ),
        (
            &mut d.worst_contributor_honeys,
            before.worst_contributor_honeys,
            after.worst_contributor_honeys,
        ),
        (
            &mut d.full_nontrivial_blue_actions,
            before.full_nontrivial_blue_actions,
            after.full_nontrivial_blue_actions,
        ),
        (
            &mut d.nontrivial_blue_actions,
            before.nontrivial_blue_actions,
            after.nontrivial_blue_actions,
        ),
    ];
    for (slot, b, a) in fields {
        *slot = a - b;
    }
    d
}

impl SimState {
    /// Abstract-action mask under `rules`.
    pub fn mask(&self, rules: &Rules) -> ActionMask {
        mask_actions(&rules.preconditions, &self.facts(), &self.fluents)
    }

    /// Parametric-action mask; bit `i` is parametric index `i`.
    pub fn parametric_mask(&self) -> ActionMask {
        let n = enumerate_parametric_actions(self.real_hosts).expect("networks have hosts");
        ActionMask::new((0..n).map(|i| self.parametric_concrete(i).is_some()).collect())
    }

    /// Steps with an abstract action. On error the state is unchanged.
    pub fn step(&mut self, rules: &Rules, action: AbstractAction) -> Result<StepOutcome, SimError> {
        if self.terminal {
            return Err(SimError::Terminated);
        }
        let facts = self.facts();
        let ctx = MaskContext {
            facts: &facts,
            fluents: &self.fluents,
        };
        if !eval_bool(&rules.precondition(action)?.precondition, &ctx) {
            return Err(SimError::Inapplicable(action));
        }
        let concrete = self.resolve_action(&rules.resolver, action)?;
        Ok(self.advance(concrete))
    }

    /// Steps with a parametric action index. On error the state is unchanged.
    pub fn step_parametric(&mut self, index: usize) -> Result<StepOutcome, SimError> {
        if self.terminal {
            return Err(SimError::Terminated);
        }
        let concrete = self
            .parametric_concrete(index)
            .ok_or(SimError::InapplicableParametric(index))?;
        Ok(self.advance(concrete))
    }

    fn advance(&mut self, concrete: ConcreteAction) -> StepOutcome {
        let before = self.fluents.clone();
        self.hosts.iter_mut().for_each(|h| h.saturated = false);
        let mut ev = StepEvents::with_hosts(self.hosts.len());
        let mut anomalies = vec![0u32; self.hosts.len()];

        self.apply_blue(&concrete);
        self.red_tick(&mut ev, &mut anomalies);
        self.gray_tick(&mut ev);

        let (step, threshold) = (self.step_index, self.config.suspicion_threshold);
        for (h, &count) in self.hosts.iter_mut().zip(&anomalies) {
            h.reimage_left = h.reimage_left.saturating_sub(1);
            h.record_anomalies(step, count, threshold);
        }
        self.fluents.good_qos_events += ev.qos_good as u64;
        self.fluents.bad_qos_events += ev.qos_bad as u64;
        self.step_index += 1;
        self.terminal = self.fluents.declared_victory || self.step_index >= self.horizon;

        StepOutcome {
            action: concrete,
            fluent_delta: delta(&before, &self.fluents),
            events: ev,
            terminal: self.terminal,
            outcome: self.terminal.then(|| self.outcome()),
        }
    }

    /// Outcome summary of the episode so far.
    pub fn outcome(&self) -> EpisodeOutcome {
        let f = &self.fluents;
        EpisodeOutcome {
            blue_win: self.terminal && !f.real_compromise,
            blue_loss: f.real_compromise,
            red_inactive: f.red_inactive,
            qos_normalized: EpisodeOutcome::qos_from_tallies(f.good_qos_events, f.bad_qos_events),
            isolation_attempts: f.isolate_actions,
            cj_relocation_attempts: f.crown_jewel_relocations,
            hosts: self.real_hosts as u64,
            terminal: self.terminal,
        }
    }

    pub fn trace_record(&self, abstract_action: Option<AbstractAction>, out: &StepOutcome) -> TraceRecord {
        TraceRecord {
            step: self.step_index,
            abstract_action,
            action: out.action,
            events: StepEvents {
                per_host_connections: Vec::new(),
                ..out.events.clone()
            },
            fluents: self.fluents.clone(),
            terminal: out.terminal,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::universe::{RedTtp, TaskSpec};

    fn task(ttp: RedTtp, compromised: u32) -> TaskSpec {
        TaskSpec {
            red_ttp: ttp,
            initially_compromised: compromised,
            horizon: 40,
            ..TaskSpec::default()
        }
    }

    fn run_noop(s: &mut SimState) -> Vec<StepOutcome> {
        let rules = Rules::default();
        let mut out = Vec::new();
        while !s.terminal {
            out.push(s.step(&rules, AbstractAction::DoNothing).unwrap());
        }
        out
    }

    #[test]
    fn do_nothing_counts_one_blue_action() {
        let mut s = init_episode(&task(RedTtp::Inactive, 0), &SimConfig::default(), 0).unwrap();
        let o = s.step(&Rules::default(), AbstractAction::DoNothing).unwrap();
        assert_eq!(o.fluent_delta.num_blue_actions, 1);
        assert_eq!(o.fluent_delta.nontrivial_blue_actions, 0);
        assert_eq!(o.fluent_delta.full_nontrivial_blue_actions, 0);
    }

    #[test]
    fn inactive_red_runs_to_the_horizon_without_bad_qos() {
        let mut s = init_episode(&task(RedTtp::Exfiltration, 0), &SimConfig::default(), 4).unwrap();
        let steps = run_noop(&mut s);
        assert_eq!(steps.len(), 40);
        assert!(s.fluents.red_inactive);
        assert_eq!(s.fluents.bad_qos_events, 0);
        assert!(s.fluents.good_qos_events > 0);
        let o = steps.last().unwrap().outcome.unwrap();
        assert!(o.blue_win && !o.blue_loss);
    }

    #[test]
    fn undefended_red_compromises_a_real_jewel() {
        for ttp in RedTtp::ACTIVE {
            let mut s = init_episode(&task(ttp, 1), &SimConfig::default(), 11).unwrap();
            run_noop(&mut s);
            assert!(s.fluents.real_compromise, "{ttp}");
            assert!(s.fluents.declared_victory);
            assert!(!s.fluents.red_inactive);
            assert!(s.step_index < 40, "{ttp} should finish before the horizon");
        }
    }

    #[test]
    fn migrated_foothold_falls_for_the_decoy() {
        let mut s = init_episode(&task(RedTtp::Exfiltration, 1), &SimConfig::default(), 2).unwrap();
        let rules = Rules::default();
        while !s.mask(&rules).is_set(AbstractAction::MigrateSuspiciousToHoney.id()) {
            s.step(&rules, AbstractAction::DoNothing).unwrap();
        }
        s.step(&rules, AbstractAction::MigrateSuspiciousToHoney).unwrap();
        run_noop(&mut s);
        assert!(s.fluents.declared_victory);
        assert!(!s.fluents.real_compromise);
        assert!(s.outcome().blue_win);
    }

    #[test]
    fn masked_action_errors_without_change() {
        let mut s = init_episode(&task(RedTtp::Exfiltration, 1), &SimConfig::default(), 2).unwrap();
        let before = s.clone();
        let err = s
            .step(&Rules::default(), AbstractAction::ReimageSuspiciousHost)
            .unwrap_err();
        assert_eq!(err, SimError::Inapplicable(AbstractAction::ReimageSuspiciousHost));
        assert_eq!(s, before);
    }

    #[test]
    fn stepping_a_finished_episode_fails() {
        let mut s = init_episode(
            &TaskSpec {
                horizon: 1,
                ..task(RedTtp::Inactive, 0)
            },
            &SimConfig::default(),
            0,
        )
        .unwrap();
        s.step(&Rules::default(), AbstractAction::DoNothing).unwrap();
        assert_eq!(
            s.step(&Rules::default(), AbstractAction::DoNothing),
            Err(SimError::Terminated)
        );
    }

    #[test]
    fn parametric_mask_matches_parametric_steps() {
        let s = init_episode(&task(RedTtp::Ransomware, 2), &SimConfig::default(), 6).unwrap();
        let mask = s.parametric_mask();
        assert_eq!(mask.len(), 151);
        for i in 0..mask.len() {
            let mut c = s.clone();
            assert_eq!(c.step_parametric(i).is_ok(), mask.is_set(i), "index {i}");
            if !mask.is_set(i) {
                assert_eq!(c, s);
            }
        }
    }

    #[test]
    fn three_suspicious_isolations_are_counted() {
        let mut s = init_episode(&task(RedTtp::Inactive, 0), &SimConfig::default(), 0).unwrap();
        let ids: Vec<HostId> = s
            .real()
            .iter()
            .filter(|h| !h.crown_jewel)
            .map(|h| h.id)
            .take(3)
            .collect();
        for &h in &ids {
            s.hosts[h as usize].flagged_suspicious = true;
        }
        let rules = Rules::default();
        for _ in 0..3 {
            s.step(&rules, AbstractAction::IsolateSuspiciousHost).unwrap();
        }
        let f = s.episode_fluents();
        assert_eq!(f.worst_contributor_isolations, 3);
        assert_eq!(f.isolate_actions, 3);
        assert_eq!(f.nontrivial_blue_actions, 3);
        assert_eq!(s.isolated_hosts(), 3);
    }
}
