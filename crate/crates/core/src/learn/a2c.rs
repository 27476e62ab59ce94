//! One-step advantage actor-critic with an ε-random exploration layer.
//!
//! Each step: with probability ε(episode) take a uniformly random action,
//! otherwise sample from the actor's softmax. The advantage
//! `A = r + γ·V(s')·(1 − done) − V(s)` scales the actor gradient
//! `−A·∇log π(a|s)` and the critic regresses onto the fixed target with
//! loss `A²`. Both networks take a plain SGD step after every transition.

use alloc::string::String;
use alloc::vec::Vec;

use num_traits::Float;
use rand::Rng as _;

use super::mlp::{Head, Init, Mlp};
use super::optim::{Optimizer, OptimizerKind};
use crate::rng::{mix, rng};
use crate::{Error, Result};

/// Outcome of one environment transition.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub reward: f64,
    pub done: bool,
    /// Distance term of the reward, if the environment has one.
    pub wasserstein: Option<f64>,
    /// Similarity to the episode's starting batch, if available.
    pub ssim: Option<f64>,
}

/// An episodic environment with a finite action set.
pub trait Environment {
    fn state_dim(&self) -> usize;
    fn action_count(&self) -> usize;
    fn reset(&mut self, seed: u64) -> Result<Vec<f64>>;
    fn step(&mut self, action: usize, seed: u64) -> Result<Transition>;

    fn action_name(&self, action: usize) -> String {
        alloc::format!("{action}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainHp {
    pub learning_rate: f64,
    pub gamma: f64,
    pub episodes: usize,
    /// ε(e) = max(floor, base^(rate·(e+1))).
    pub epsilon_base: f64,
    pub epsilon_rate: f64,
    pub epsilon_floor: f64,
    pub hidden: Vec<usize>,
    pub optimizer: OptimizerKind,
    /// Optional global gradient-norm clip applied to each network's step.
    pub grad_clip: Option<f64>,
    /// Constant factor applied to rewards before they enter the advantage
    /// (a change of units; logs keep the raw reward).
    pub reward_scale: f64,
    /// Standardize state inputs with statistics of initial states sampled
    /// before training.
    pub normalize_inputs: bool,
    pub seed: u64,
}

impl Default for TrainHp {
    fn default() -> Self {
        Self {
            learning_rate: 1e-4,
            gamma: 0.9,
            episodes: 500,
            epsilon_base: 0.9,
            epsilon_rate: 0.07,
            epsilon_floor: 0.1,
            hidden: alloc::vec![128, 256],
            optimizer: OptimizerKind::Sgd,
            grad_clip: None,
            reward_scale: 1.0,
            normalize_inputs: false,
            seed: 0,
        }
    }
}

/// Initial states sampled to estimate the input standardization.
pub const NORMALIZATION_SAMPLES: usize = 100;

impl TrainHp {
    /// Settings that train on the recovery environment at desk scale: Adam
    /// at the same learning rate, rewards divided by 255 (distances in
    /// unit-intensity terms) and standardized state inputs.
    pub fn desk() -> Self {
        Self {
            optimizer: OptimizerKind::Adam,
            reward_scale: 1.0 / 255.0,
            normalize_inputs: true,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::Config("discount must lie in [0, 1)".into()));
        }
        if !(0.0..=1.0).contains(&self.epsilon_floor) || !(0.0..=1.0).contains(&self.epsilon_base) {
            return Err(Error::Config("exploration parameters must lie in [0, 1]".into()));
        }
        if !(self.reward_scale > 0.0 && self.reward_scale.is_finite()) {
            return Err(Error::Config("reward scale must be positive".into()));
        }
        if matches!(self.grad_clip, Some(c) if !(c > 0.0)) {
            return Err(Error::Config("gradient clip must be positive".into()));
        }
        Ok(())
    }

    pub fn epsilon(&self, episode: usize) -> f64 {
        epsilon(episode, self.epsilon_base, self.epsilon_rate, self.epsilon_floor)
    }
}

pub fn epsilon(episode: usize, base: f64, rate: f64, floor: f64) -> f64 {
    base.powf(rate * (episode as f64 + 1.0)).max(floor)
}

pub fn advantage(reward: f64, gamma: f64, value_next: f64, value: f64, done: bool) -> f64 {
    let bootstrap = if done { 0.0 } else { gamma * value_next };
    reward + bootstrap - value
}

/// Actor (softmax over actions) and critic (scalar state value). Both see
/// the state after `(s − input_mean) / input_scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActorCritic {
    pub actor: Mlp,
    pub critic: Mlp,
    pub input_mean: Vec<f64>,
    pub input_scale: Vec<f64>,
}

impl ActorCritic {
    pub fn new(state_dim: usize, actions: usize, hidden: &[usize], seed: u64) -> Result<Self> {
        let mut sizes = alloc::vec![state_dim];
        sizes.extend_from_slice(hidden);
        let mut actor_sizes = sizes.clone();
        actor_sizes.push(actions);
        sizes.push(1);
        Ok(Self {
            actor: Mlp::with_init(&actor_sizes, Head::Softmax, Init::FanInUniform, mix(seed, 0xAC7))?,
            critic: Mlp::with_init(&sizes, Head::Linear, Init::FanInUniform, mix(seed, 0xC217))?,
            input_mean: alloc::vec![0.0; state_dim],
            input_scale: alloc::vec![1.0; state_dim],
        })
    }

    /// Checks that the networks and the normalizer agree on dimensions.
    pub fn validate(&self) -> Result<()> {
        let d = self.actor.input_dim();
        if self.critic.input_dim() != d || self.critic.output_dim() != 1 {
            return Err(Error::InvalidArgument("critic does not match the actor".into()));
        }
        if self.input_mean.len() != d || self.input_scale.len() != d {
            return Err(Error::DimMismatch {
                expected: d,
                got: self.input_mean.len().max(self.input_scale.len()),
            });
        }
        if self.input_scale.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidArgument("input scales must be positive".into()));
        }
        Ok(())
    }

    /// The network input for a raw state.
    pub fn input(&self, state: &[f64]) -> Vec<f64> {
        state
            .iter()
            .zip(self.input_mean.iter().zip(&self.input_scale))
            .map(|(x, (m, s))| (x - m) / s)
            .collect()
    }

    /// Sets the normalizer to the per-coordinate mean and standard deviation
    /// of `states`. Constant coordinates keep scale 1.
    pub fn fit_normalizer(&mut self, states: &[Vec<f64>]) -> Result<()> {
        let d = self.actor.input_dim();
        if states.is_empty() {
            return Err(Error::EmptyBatch);
        }
        if let Some(bad) = states.iter().find(|s| s.len() != d) {
            return Err(Error::DimMismatch { expected: d, got: bad.len() });
        }
        let n = states.len() as f64;
        for j in 0..d {
            let mean = states.iter().map(|s| s[j]).sum::<f64>() / n;
            let sd = (states.iter().map(|s| (s[j] - mean) * (s[j] - mean)).sum::<f64>() / n).sqrt();
            self.input_mean[j] = mean;
            self.input_scale[j] = if sd > 1e-9 { sd } else { 1.0 };
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub episode: usize,
    pub step: usize,
    pub action: usize,
    pub reward: f64,
    pub wasserstein: Option<f64>,
    pub ssim: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    pub episode: usize,
    pub epsilon: f64,
    pub steps: usize,
    pub terminal_reward: f64,
    pub total_reward: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainLog {
    pub episodes: Vec<EpisodeRecord>,
    pub steps: Vec<StepRecord>,
}

impl TrainLog {
    /// Mean terminal reward over the last `window` episodes.
    pub fn terminal_moving_average(&self, window: usize) -> Option<f64> {
        let n = self.episodes.len().min(window);
        if n == 0 {
            return None;
        }
        let tail = &self.episodes[self.episodes.len() - n..];
        Some(tail.iter().map(|e| e.terminal_reward).sum::<f64>() / n as f64)
    }
}

fn sample_index(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Trains a fresh actor-critic on `env`. Deterministic in `hp.seed`.
pub fn a2c_train<E: Environment>(env: &mut E, hp: &TrainHp) -> Result<(ActorCritic, TrainLog)> {
    hp.validate()?;
    let mut model = ActorCritic::new(env.state_dim(), env.action_count(), &hp.hidden, hp.seed)?;
    if hp.normalize_inputs {
        let states = (0..NORMALIZATION_SAMPLES as u64)
            .map(|i| env.reset(mix(mix(hp.seed, 0x5CA1E), i)))
            .collect::<Result<Vec<_>>>()?;
        model.fit_normalizer(&states)?;
    }
    a2c_continue(env, hp, model)
}

/// Continues training an existing model.
pub fn a2c_continue<E: Environment>(env: &mut E, hp: &TrainHp, mut model: ActorCritic) -> Result<(ActorCritic, TrainLog)> {
    hp.validate()?;
    model.validate()?;
    if model.actor.output_dim() != env.action_count() {
        return Err(Error::ActionCount {
            policy: model.actor.output_dim(),
            library: env.action_count(),
        });
    }
    let mut explore = rng(mix(hp.seed, 0xE7));
    let mut actor_opt = Optimizer::new(hp.optimizer, hp.learning_rate);
    let mut critic_opt = Optimizer::new(hp.optimizer, hp.learning_rate);
    let mut log = TrainLog::default();
    for episode in 0..hp.episodes {
        let eps = hp.epsilon(episode);
        let episode_seed = mix(hp.seed, episode as u64);
        let mut state = model.input(&env.reset(episode_seed)?);
        let (mut step, mut total) = (0usize, 0.0);
        let mut last;
        loop {
            let actor_trace = model.actor.forward_trace(&state)?;
            let probs = actor_trace.output();
            let action = if explore.random::<f64>() < eps {
                explore.random_range(0..env.action_count())
            } else {
                sample_index(probs, explore.random())
            };
            let t = env.step(action, mix(episode_seed, step as u64 + 1))?;

            let critic_trace = model.critic.forward_trace(&state)?;
            let value = critic_trace.output()[0];
            let next_state = model.input(&t.state);
            let value_next = if t.done { 0.0 } else { model.critic.forward(&next_state)?[0] };
            let adv = advantage(hp.reward_scale * t.reward, hp.gamma, value_next, value, t.done);
            if !adv.is_finite() {
                return Err(Error::Diverged { episode, step });
            }

            // d(−A·log π(a))/d logits = A·(π − onehot(a)).
            let mut g_logits: Vec<f64> = probs.iter().map(|p| adv * p).collect();
            g_logits[action] -= adv;
            let mut g_actor = model.actor.backward_logits(&actor_trace, &g_logits)?;
            // d(A²)/dV(s) = −2A with the target held fixed.
            let mut g_critic = model.critic.backward(&critic_trace, &[-2.0 * adv])?;
            if !g_actor.is_finite() || !g_critic.is_finite() {
                return Err(Error::Diverged { episode, step });
            }
            if let Some(c) = hp.grad_clip {
                g_actor.clip_norm(c);
                g_critic.clip_norm(c);
            }
            actor_opt.step(&mut model.actor, &g_actor);
            critic_opt.step(&mut model.critic, &g_critic);

            log.steps.push(StepRecord {
                episode,
                step,
                action,
                reward: t.reward,
                wasserstein: t.wasserstein,
                ssim: t.ssim,
            });
            total += t.reward;
            last = t.reward;
            step += 1;
            state = next_state;
            if t.done {
                break;
            }
        }
        log.episodes.push(EpisodeRecord {
            episode,
            epsilon: eps,
            steps: step,
            terminal_reward: last,
            total_reward: total,
        });
    }
    Ok((model, log))
}

/// Fixed-reward bandit: one state, one step per episode.
#[derive(Debug, Clone)]
pub struct Bandit {
    pub rewards: Vec<f64>,
    pub state: Vec<f64>,
}

impl Bandit {
    pub fn new(rewards: Vec<f64>) -> Self {
        Self {
            rewards,
            state: alloc::vec![1.0, 1.0, 1.0],
        }
    }
}

impl Environment for Bandit {
    fn state_dim(&self) -> usize {
        self.state.len()
    }

    fn action_count(&self) -> usize {
        self.rewards.len()
    }

    fn reset(&mut self, _seed: u64) -> Result<Vec<f64>> {
        Ok(self.state.clone())
    }

    fn step(&mut self, action: usize, _seed: u64) -> Result<Transition> {
        Ok(Transition {
            state: self.state.clone(),
            reward: self.rewards[action],
            done: true,
            wasserstein: None,
            ssim: None,
        })
    }
}
