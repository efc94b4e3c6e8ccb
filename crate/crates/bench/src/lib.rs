//! Shared fixtures for the benchmarks.

use std::sync::Arc;
use taskverse_core::env::{Env, EnvConfig};
use taskverse_core::learner::{masked_log_probs, LearnerConfig, Observation, PpoModel, Sample};
use taskverse_core::netsim::{init_episode, SimConfig, SimState};
use taskverse_core::pddl::{ActionMask, Catalog};
use taskverse_core::universe::{RedTtp, TaskSpec};

/// A mid-sized task: 4 subnets of 10 hosts, exfiltration, goal 22.
pub fn task() -> TaskSpec {
    TaskSpec {
        subnets: 4,
        hosts_per_subnet: 10,
        initially_compromised: 2,
        red_ttp: RedTtp::Exfiltration,
        horizon: 40,
        goal_metric_id: 22,
        ..TaskSpec::default()
    }
}

pub fn state(seed: u64) -> SimState {
    init_episode(&task(), &SimConfig::default(), seed).expect("fixture task is valid")
}

pub fn env() -> Env {
    Env::new(EnvConfig::default(), Arc::new(Catalog::shipped())).expect("default config is valid")
}

/// A model with the default network sizes for the default observation.
pub fn model(learner: LearnerConfig) -> PpoModel {
    let catalog = Catalog::shipped();
    let dim = EnvConfig::default().obs.dim(&catalog);
    PpoModel::new(learner, dim, 6, None, 0).expect("valid learner config")
}

/// `n` samples from do-nothing rollouts of the fixture task.
pub fn samples(model: &PpoModel, n: usize) -> Vec<Sample> {
    let mut env = env();
    let mut out = Vec::with_capacity(n);
    let mut seed = 0;
    while out.len() < n {
        let (mut obs, info) = env.reset(&task(), seed).expect("fixture task is valid");
        let mut mask: ActionMask = info.mask;
        seed += 1;
        loop {
            let logits = model.logits(&obs).expect("dims match");
            let logp = masked_log_probs(&logits, &mask).expect("do-nothing is unmasked")[0];
            let tr = env.step(0).expect("do-nothing is always allowed");
            let k = out.len();
            out.push(Sample {
                obs: std::mem::replace(&mut obs, tr.obs.clone()),
                mask: std::mem::replace(&mut mask, tr.mask.clone()),
                action: 0,
                logp,
                logits,
                advantage: if k % 2 == 0 { 0.5 } else { -0.5 },
                value_target: tr.reward,
            });
            if tr.done() || out.len() == n {
                break;
            }
        }
    }
    out
}

pub fn observation(model: &PpoModel) -> Observation {
    Observation {
        features: vec![0.25; model.obs_dim],
        goal_index: 0,
    }
}
