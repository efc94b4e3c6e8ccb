use crate::learner::{ActionChoice, Learner, LearnerError, Observation, PpoModel};
use crate::pddl::ActionMask;
use crate::rng::Rng;
use rand::seq::IteratorRandom;

/// Anything that picks actions during rollouts and evaluation.
pub trait Policy: Sync {
    fn choose(&self, obs: &Observation, mask: &ActionMask, rng: &mut Rng) -> Result<ActionChoice, LearnerError>;
}

fn fixed(action: usize) -> ActionChoice {
    ActionChoice {
        action,
        logits: Vec::new(),
        logp: 0.0,
    }
}

/// The learner's policy, sampled or greedy.
pub struct ModelPolicy<'a> {
    pub model: &'a PpoModel,
    pub explore: bool,
}

impl Policy for ModelPolicy<'_> {
    fn choose(&self, obs: &Observation, mask: &ActionMask, rng: &mut Rng) -> Result<ActionChoice, LearnerError> {
        self.model.act(obs, mask, self.explore, rng)
    }
}

/// Always action 0.
pub struct DoNothing;

impl Policy for DoNothing {
    fn choose(&self, _: &Observation, _: &ActionMask, _: &mut Rng) -> Result<ActionChoice, LearnerError> {
        Ok(fixed(0))
    }
}

/// Uniform over unmasked actions.
pub struct RandomPolicy;

impl Policy for RandomPolicy {
    fn choose(&self, _: &Observation, mask: &ActionMask, rng: &mut Rng) -> Result<ActionChoice, LearnerError> {
        let a = mask
            .set_indices()
            .choose(rng)
            .ok_or(crate::learner::DistError::AllMasked)?;
        Ok(fixed(a))
    }
}

/// First unmasked action of a preference list, falling back to action 0.
pub struct Scripted(pub Vec<usize>);

impl Policy for Scripted {
    fn choose(&self, _: &Observation, mask: &ActionMask, _: &mut Rng) -> Result<ActionChoice, LearnerError> {
        Ok(fixed(self.0.iter().copied().find(|&a| mask.is_set(a)).unwrap_or(0)))
    }
}
