//! Clipped-surrogate policy gradient with GAE, an adaptive KL penalty and
//! separate policy and value networks.
//!
//! Per-sample loss, averaged over a minibatch:
//!
//! ```text
//! -min(r A, clip(r, 1 - eps, 1 + eps) A)
//!   + kl_coeff * KL(old || new)
//!   + vf_loss_coeff * min((V - R)^2, vf_clip_param)
//!   - entropy_coeff * H(new)
//! ```
//!
//! with `r = pi(a) / pi_old(a)` and advantages standardized over the train
//! batch. After each update the KL coefficient is multiplied by 1.5 when the
//! mean KL exceeds twice the target and by 0.5 when it is under half of it.

use super::dist::{entropy, masked_log_probs, masked_probs, select_action, DistError};
use super::nn::{clip_global_norm, Activation, Adam, GoalNet};
use super::obs::Observation;
use crate::pddl::ActionMask;
use crate::rng::{rng_for, tag, Rng as SimRng};
use ndarray::Array2;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LearnerConfig {
    pub gamma: f64,
    pub lr: f64,
    pub lambda: f64,
    pub policy_hidden: Vec<usize>,
    pub value_hidden: Vec<usize>,
    pub activation: Activation,
    pub kl_coeff: f64,
    pub kl_target: f64,
    pub train_batch_size: usize,
    pub minibatch_size: usize,
    pub num_epochs: usize,
    pub vf_loss_coeff: f64,
    pub entropy_coeff: f64,
    pub clip_param: f64,
    pub vf_clip_param: f64,
    pub grad_clip: f64,
    pub evaluation_duration: usize,
    pub explore_in_eval: bool,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            gamma: 0.99,
            lr: 1e-4,
            lambda: 1.0,
            policy_hidden: vec![128; 4],
            value_hidden: vec![256; 4],
            activation: Activation::Relu,
            kl_coeff: 0.5,
            kl_target: 0.01,
            train_batch_size: 4000,
            minibatch_size: 128,
            num_epochs: 30,
            vf_loss_coeff: 1.0,
            entropy_coeff: 0.005,
            clip_param: 0.3,
            vf_clip_param: 1.0,
            grad_clip: 500.0,
            evaluation_duration: 20,
            explore_in_eval: true,
        }
    }
}

impl LearnerConfig {
    pub fn validate(&self) -> Result<(), LearnerError> {
        let bad = |m: &str| Err(LearnerError::Config(m.to_string()));
        if !(0.0..=1.0).contains(&self.gamma) || !(0.0..=1.0).contains(&self.lambda) {
            return bad("gamma and lambda must lie in [0, 1]");
        }
        if !(self.lr > 0.0) || !(self.clip_param > 0.0) || !(self.vf_clip_param > 0.0) || !(self.grad_clip > 0.0) {
            return bad("lr, clip_param, vf_clip_param and grad_clip must be positive");
        }
        if self.kl_coeff < 0.0 || self.kl_target <= 0.0 || self.entropy_coeff < 0.0 || self.vf_loss_coeff < 0.0 {
            return bad("kl, entropy and value coefficients must be non-negative");
        }
        if self.train_batch_size == 0 || self.minibatch_size == 0 || self.num_epochs == 0 {
            return bad("batch sizes and epochs must be positive");
        }
        if self.evaluation_duration == 0 {
            return bad("evaluation_duration must be positive");
        }
        if self.policy_hidden.contains(&0) || self.value_hidden.contains(&0) {
            return bad("hidden layers must be nonempty");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LearnerError {
    #[error("invalid learner config: {0}")]
    Config(String),
    #[error("batch has {got} samples, expected {expected}")]
    BatchSize { got: usize, expected: usize },
    #[error("non-finite loss at epoch {epoch}, minibatch {minibatch}: {diagnostics}")]
    NonFinite {
        epoch: usize,
        minibatch: usize,
        diagnostics: String,
    },
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error("model expects observations of length {expected}, got {got}")]
    ObsDim { expected: usize, got: usize },
}

/// Generalized advantage estimates and value targets for one trajectory
/// fragment. `bootstrap` is the value after the last step (0 if terminal).
pub fn gae(rewards: &[f64], values: &[f64], bootstrap: f64, gamma: f64, lambda: f64) -> (Vec<f64>, Vec<f64>) {
    let n = rewards.len();
    let mut adv = vec![0.0; n];
    let mut acc = 0.0;
    for t in (0..n).rev() {
        let next = if t + 1 < n { values[t + 1] } else { bootstrap };
        let delta = rewards[t] + gamma * next - values[t];
        acc = delta + gamma * lambda * acc;
        adv[t] = acc;
    }
    let targets = adv.iter().zip(values).map(|(a, v)| a + v).collect();
    (adv, targets)
}

/// One training sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub obs: Observation,
    pub mask: ActionMask,
    pub action: usize,
    /// Policy logits at collection time.
    pub logits: Vec<f64>,
    pub logp: f64,
    pub advantage: f64,
    pub value_target: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainMetrics {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub kl: f64,
    pub entropy: f64,
    pub total_loss: f64,
    pub kl_coeff: f64,
    pub grad_norm: f64,
}

/// What the policy did at one step.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionChoice {
    pub action: usize,
    pub logits: Vec<f64>,
    pub logp: f64,
}

/// Strategy interface between rollout collection and updates.
pub trait Learner: Send + Sync {
    fn act(
        &self,
        obs: &Observation,
        mask: &ActionMask,
        explore: bool,
        rng: &mut SimRng,
    ) -> Result<ActionChoice, LearnerError>;
    fn values(&self, obs: &[Observation]) -> Vec<f64>;
    fn update(&mut self, batch: &[Sample], iteration: u64) -> Result<TrainMetrics, LearnerError>;
}

/// Policy and value networks with their optimizer state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PpoModel {
    pub config: LearnerConfig,
    pub obs_dim: usize,
    pub actions: usize,
    pub policy: GoalNet,
    pub policy_params: Vec<f64>,
    pub value: GoalNet,
    pub value_params: Vec<f64>,
    pub kl_coeff: f64,
    pub seed: u64,
    policy_opt: Adam,
    value_opt: Adam,
}

/// Loss terms and gradients of one minibatch.
#[derive(Debug, Clone, PartialEq)]
pub struct LossGrad {
    pub metrics: TrainMetrics,
    pub policy_grad: Vec<f64>,
    pub value_grad: Vec<f64>,
}

fn stack(obs: &[&Observation]) -> (Array2<f64>, Vec<usize>) {
    let d = obs.first().map_or(0, |o| o.features.len());
    let mut x = Array2::zeros((obs.len(), d));
    for (i, o) in obs.iter().enumerate() {
        x.row_mut(i).iter_mut().zip(&o.features).for_each(|(a, b)| *a = *b);
    }
    (x, obs.iter().map(|o| o.goal_index).collect())
}

impl PpoModel {
    /// Fresh networks for `obs_dim` features and `actions` actions.
    /// `embedding` adds a trainable goal table of `(rows, dim)`.
    pub fn new(
        config: LearnerConfig,
        obs_dim: usize,
        actions: usize,
        embedding: Option<(usize, usize)>,
        seed: u64,
    ) -> Result<Self, LearnerError> {
        config.validate()?;
        let mut rng = rng_for(seed, &[tag::INIT]);
        let policy = GoalNet::new(obs_dim, embedding, &config.policy_hidden, actions, config.activation);
        let value = GoalNet::new(obs_dim, embedding, &config.value_hidden, 1, config.activation);
        let policy_params = policy.init(0.01, &mut rng);
        let value_params = value.init(1.0, &mut rng);
        Ok(PpoModel {
            policy_opt: Adam::new(policy_params.len(), config.lr),
            value_opt: Adam::new(value_params.len(), config.lr),
            kl_coeff: config.kl_coeff,
            config,
            obs_dim,
            actions,
            policy,
            policy_params,
            value,
            value_params,
            seed,
        })
    }

    /// Rebuilds a model around stored parameters, with fresh optimizer state.
    pub fn from_parts(
        config: LearnerConfig,
        policy: GoalNet,
        policy_params: Vec<f64>,
        value: GoalNet,
        value_params: Vec<f64>,
        kl_coeff: f64,
        seed: u64,
    ) -> Result<Self, LearnerError> {
        config.validate()?;
        let expected = (policy.param_count(), value.param_count());
        if expected != (policy_params.len(), value_params.len()) {
            return Err(LearnerError::Config(
                "parameter counts do not match the network shapes".into(),
            ));
        }
        let obs_dim = policy.mlp.input() - policy.embedding.map_or(0, |(_, d)| d);
        Ok(PpoModel {
            policy_opt: Adam::new(policy_params.len(), config.lr),
            value_opt: Adam::new(value_params.len(), config.lr),
            obs_dim,
            actions: policy.mlp.output(),
            config,
            policy,
            policy_params,
            value,
            value_params,
            kl_coeff,
            seed,
        })
    }

    fn check_dim(&self, obs: &Observation) -> Result<(), LearnerError> {
        if obs.features.len() != self.obs_dim {
            return Err(LearnerError::ObsDim {
                expected: self.obs_dim,
                got: obs.features.len(),
            });
        }
        Ok(())
    }

    pub fn logits(&self, obs: &Observation) -> Result<Vec<f64>, LearnerError> {
        self.check_dim(obs)?;
        let (x, g) = stack(&[obs]);
        Ok(self.policy.predict(&self.policy_params, x.view(), &g).row(0).to_vec())
    }

    /// Loss and gradients on `batch` with the given parameters.
    pub fn loss_and_grad(&self, policy_params: &[f64], value_params: &[f64], batch: &[&Sample]) -> LossGrad {
        let cfg = &self.config;
        let n = batch.len() as f64;
        let obs: Vec<&Observation> = batch.iter().map(|s| &s.obs).collect();
        let (x, goals) = stack(&obs);
        let pacts = self.policy.forward(policy_params, x.view(), &goals);
        let vacts = self.value.forward(value_params, x.view(), &goals);
        let logits = pacts.last().expect("output");
        let values = vacts.last().expect("output");

        let mut dlogits = Array2::zeros(logits.raw_dim());
        let mut dvalues = Array2::zeros(values.raw_dim());
        let mut m = TrainMetrics::default();
        for (i, s) in batch.iter().enumerate() {
            let row: Vec<f64> = logits.row(i).to_vec();
            let p = masked_probs(&row, &s.mask).expect("sample masks have a set bit");
            let lp = masked_log_probs(&row, &s.mask).expect("checked");
            let p_old = masked_probs(&s.logits, &s.mask).expect("checked");
            let lp_old = masked_log_probs(&s.logits, &s.mask).expect("checked");

            let ratio = (lp[s.action] - s.logp).exp();
            let a = s.advantage;
            let s1 = ratio * a;
            let s2 = ratio.clamp(1.0 - cfg.clip_param, 1.0 + cfg.clip_param) * a;
            let surr = s1.min(s2);
            let dsurr = if s1 <= s2 { s1 } else { 0.0 };

            let mut kl = 0.0;
            for j in 0..p.len() {
                if p_old[j] > 0.0 {
                    kl += p_old[j] * (lp_old[j] - lp[j]);
                }
            }
            let h = entropy(&p);

            let err = values[[i, 0]] - s.value_target;
            let vf_raw = err * err;
            let vf = vf_raw.min(cfg.vf_clip_param);

            m.policy_loss -= surr / n;
            m.kl += kl / n;
            m.entropy += h / n;
            m.value_loss += vf / n;

            for k in 0..p.len() {
                if !s.mask.is_set(k) {
                    continue;
                }
                let onehot = if k == s.action { 1.0 } else { 0.0 };
                let g = -dsurr * (onehot - p[k])
                    + self.kl_coeff * (p[k] - p_old[k])
                    + cfg.entropy_coeff * if p[k] > 0.0 { p[k] * (lp[k] + h) } else { 0.0 };
                dlogits[[i, k]] = g / n;
            }
            if vf_raw < cfg.vf_clip_param {
                dvalues[[i, 0]] = cfg.vf_loss_coeff * 2.0 * err / n;
            }
        }
        m.total_loss =
            m.policy_loss + self.kl_coeff * m.kl + cfg.vf_loss_coeff * m.value_loss - cfg.entropy_coeff * m.entropy;
        m.kl_coeff = self.kl_coeff;

        let mut policy_grad = vec![0.0; policy_params.len()];
        let mut value_grad = vec![0.0; value_params.len()];
        self.policy
            .backward(policy_params, &pacts, &goals, dlogits, &mut policy_grad);
        self.value
            .backward(value_params, &vacts, &goals, dvalues, &mut value_grad);
        LossGrad {
            metrics: m,
            policy_grad,
            value_grad,
        }
    }
}

/// Advantages standardized to zero mean and unit deviation.
pub fn standardize(x: &[f64]) -> Vec<f64> {
    let n = x.len().max(1) as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let std = var.sqrt().max(1e-4);
    x.iter().map(|v| (v - mean) / std).collect()
}

impl Learner for PpoModel {
    fn act(
        &self,
        obs: &Observation,
        mask: &ActionMask,
        explore: bool,
        rng: &mut SimRng,
    ) -> Result<ActionChoice, LearnerError> {
        let logits = self.logits(obs)?;
        let action = select_action(&logits, mask, explore, rng)?;
        let logp = masked_log_probs(&logits, mask)?[action];
        Ok(ActionChoice { action, logits, logp })
    }

    fn values(&self, obs: &[Observation]) -> Vec<f64> {
        if obs.is_empty() {
            return Vec::new();
        }
        let refs: Vec<&Observation> = obs.iter().collect();
        let (x, g) = stack(&refs);
        self.value.predict(&self.value_params, x.view(), &g).column(0).to_vec()
    }

    fn update(&mut self, batch: &[Sample], iteration: u64) -> Result<TrainMetrics, LearnerError> {
        let cfg = self.config.clone();
        if batch.len() != cfg.train_batch_size {
            return Err(LearnerError::BatchSize {
                got: batch.len(),
                expected: cfg.train_batch_size,
            });
        }
        let adv = standardize(&batch.iter().map(|s| s.advantage).collect::<Vec<_>>());
        let samples: Vec<Sample> = batch
            .iter()
            .zip(adv)
            .map(|(s, a)| Sample {
                advantage: a,
                ..s.clone()
            })
            .collect();

        let mut rng = rng_for(self.seed, &[tag::SHUFFLE, iteration]);
        let mut order: Vec<usize> = (0..samples.len()).collect();
        let mut sum = TrainMetrics::default();
        let mut count = 0.0;
        for epoch in 0..cfg.num_epochs {
            order.shuffle(&mut rng);
            for (mb, chunk) in order.chunks(cfg.minibatch_size).enumerate() {
                let refs: Vec<&Sample> = chunk.iter().map(|&i| &samples[i]).collect();
                let LossGrad {
                    metrics,
                    mut policy_grad,
                    mut value_grad,
                } = self.loss_and_grad(&self.policy_params, &self.value_params, &refs);
                if !metrics.total_loss.is_finite() {
                    return Err(LearnerError::NonFinite {
                        epoch,
                        minibatch: mb,
                        diagnostics: format!(
                            "policy {} value {} kl {} entropy {}",
                            metrics.policy_loss, metrics.value_loss, metrics.kl, metrics.entropy
                        ),
                    });
                }
                let norm = clip_global_norm(&mut [&mut policy_grad, &mut value_grad], cfg.grad_clip);
                self.policy_opt.step(&mut self.policy_params, &policy_grad);
                self.value_opt.step(&mut self.value_params, &value_grad);
                sum.policy_loss += metrics.policy_loss;
                sum.value_loss += metrics.value_loss;
                sum.kl += metrics.kl;
                sum.entropy += metrics.entropy;
                sum.total_loss += metrics.total_loss;
                sum.grad_norm += norm;
                count += 1.0;
            }
        }
        let mean = TrainMetrics {
            policy_loss: sum.policy_loss / count,
            value_loss: sum.value_loss / count,
            kl: sum.kl / count,
            entropy: sum.entropy / count,
            total_loss: sum.total_loss / count,
            grad_norm: sum.grad_norm / count,
            kl_coeff: self.kl_coeff,
        };
        if mean.kl > 2.0 * cfg.kl_target {
            self.kl_coeff *= 1.5;
        } else if mean.kl < 0.5 * cfg.kl_target {
            self.kl_coeff *= 0.5;
        }
        Ok(mean)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learner::nn::Activation;

    #[test]
    fn gae_with_unit_discount_telescopes() {
        let values = [0.2, -0.1, 0.4, 0.3, 0.0];
        let rewards = [0.0, 0.0, 0.0, 0.0, 0.8];
        let (adv, targets) = gae(&rewards, &values, 0.0, 1.0, 1.0);
        for t in 0..5 {
            assert!((adv[t] - (0.8 - values[t])).abs() < 1e-12);
            assert!((targets[t] - 0.8).abs() < 1e-12);
        }
    }

    #[test]
    fn gae_lambda_one_is_monte_carlo_minus_baseline() {
        let gamma = 0.9;
        let values = [0.5, 0.1, -0.3, 0.2, 0.7];
        let rewards = [1.0, 0.0, 2.0, -1.0, 0.5];
        let (adv, _) = gae(&rewards, &values, 0.0, gamma, 1.0);
        for t in 0..5 {
            let ret: f64 = (t..5).map(|k| gamma.powi((k - t) as i32) * rewards[k]).sum();
            assert!((adv[t] - (ret - values[t])).abs() < 1e-12);
        }
    }

    #[test]
    fn standardized_advantages() {
        let s = standardize(&[1.0, 2.0, 3.0, 4.0]);
        assert!(s.iter().sum::<f64>().abs() < 1e-12);
        let var = s.iter().map(|v| v * v).sum::<f64>() / 4.0;
        assert!((var - 1.0).abs() < 1e-9);
    }

    fn toy_model(embedding: Option<(usize, usize)>) -> PpoModel {
        let cfg = LearnerConfig {
            policy_hidden: vec![6, 5],
            value_hidden: vec![7],
            activation: Activation::Tanh,
            kl_coeff: 0.3,
            entropy_coeff: 0.05,
            vf_clip_param: 100.0,
            ..LearnerConfig::default()
        };
        PpoModel::new(cfg, 4, 4, embedding, 5).unwrap()
    }

    fn toy_samples(m: &PpoModel, n: usize) -> Vec<Sample> {
        use rand::Rng as _;
        let mut rng = rng_for(17, &[]);
        (0..n)
            .map(|i| {
                let obs = Observation {
                    features: (0..4).map(|_| rng.random::<f64>()).collect(),
                    goal_index: i % 3,
                };
                let mask = ActionMask::new(vec![true, i % 2 == 0, true, true]);
                let mut logits = m.logits(&obs).unwrap();
                logits.iter_mut().for_each(|l| *l += 0.05 * (rng.random::<f64>() - 0.5));
                let action = if i % 2 == 0 { i % 4 } else { [0, 2, 3][i % 3] };
                let logp = masked_log_probs(&logits, &mask).unwrap()[action];
                Sample {
                    obs,
                    mask,
                    action,
                    logits,
                    logp,
                    advantage: rng.random::<f64>() - 0.5,
                    value_target: rng.random::<f64>(),
                }
            })
            .collect()
    }

    fn check_gradient(embedding: Option<(usize, usize)>) {
        let m = toy_model(embedding);
        let samples = toy_samples(&m, 12);
        let refs: Vec<&Sample> = samples.iter().collect();
        let lg = m.loss_and_grad(&m.policy_params, &m.value_params, &refs);
        let h = 1e-6;
        for which in 0..2 {
            let base = if which == 0 { &m.policy_params } else { &m.value_params };
            let grad = if which == 0 { &lg.policy_grad } else { &lg.value_grad };
            for k in 0..base.len() {
                let mut plus = base.clone();
                let mut minus = base.clone();
                plus[k] += h;
                minus[k] -= h;
                let f = |p: &[f64]| {
                    let r = if which == 0 {
                        m.loss_and_grad(p, &m.value_params, &refs)
                    } else {
                        m.loss_and_grad(&m.policy_params, p, &refs)
                    };
                    r.metrics.total_loss
                };
                let fd = (f(&plus) - f(&minus)) / (2.0 * h);
                let tol = 1e-6 + 1e-4 * fd.abs().max(grad[k].abs());
                assert!(
                    (fd - grad[k]).abs() < tol,
                    "net {which} param {k}: fd {fd} analytic {}",
                    grad[k]
                );
            }
        }
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        check_gradient(None);
    }

    #[test]
    fn analytic_gradient_with_goal_embedding() {
        check_gradient(Some((3, 2)));
    }

    #[test]
    fn bandit_learns_the_rewarded_arm() {
        let cfg = LearnerConfig {
            policy_hidden: vec![16],
            value_hidden: vec![16],
            lr: 1e-2,
            train_batch_size: 64,
            minibatch_size: 32,
            num_epochs: 4,
            ..LearnerConfig::default()
        };
        let mut m = PpoModel::new(cfg, 2, 3, None, 1).unwrap();
        let obs = Observation {
            features: vec![1.0, 0.5],
            goal_index: 0,
        };
        let mask = ActionMask::all(3);
        let mut rng = rng_for(2, &[]);
        for it in 0..30 {
            let v = m.values(std::slice::from_ref(&obs))[0];
            let batch: Vec<Sample> = (0..64)
                .map(|_| {
                    let c = m.act(&obs, &mask, true, &mut rng).unwrap();
                    let r = if c.action == 2 { 1.0 } else { 0.0 };
                    Sample {
                        obs: obs.clone(),
                        mask: mask.clone(),
                        action: c.action,
                        logits: c.logits,
                        logp: c.logp,
                        advantage: r - v,
                        value_target: r,
                    }
                })
                .collect();
            m.update(&batch, it).unwrap();
        }
        let p = masked_probs(&m.logits(&obs).unwrap(), &mask).unwrap();
        assert!(p[2] > 0.9, "{p:?}");
    }

    #[test]
    fn wrong_batch_size_is_rejected() {
        let mut m = toy_model(None);
        assert!(matches!(m.update(&[], 0), Err(LearnerError::BatchSize { .. })));
    }
}
