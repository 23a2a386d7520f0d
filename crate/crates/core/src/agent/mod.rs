//! Deep Q-learning with a confirmation-bias update rule.
//!
//! The agent is a standard DQN (ε-greedy acting, uniform replay, soft-updated
//! target network) with one change in how each minibatch sample contributes
//! to the update. For a biased agent, samples whose TD error carries the
//! "unwelcome" sign get a descent step of `α_c` followed by an ascent step of
//! `K·α_c` on the same squared error, i.e. a net step of `(1−K)·α_c`:
//!
//! * confirmatory: negative TD errors (worse than expected) are damped;
//! * disconfirmatory: positive TD errors (better than expected) are damped;
//! * none: every sample gets the full step.
//!
//! By default the descent/ascent pair is folded into one optimizer call on a
//! loss whose biased samples carry weight `1−K` (see [`bias_weight`]). Under
//! plain SGD this is exactly the pair; under AdamW it avoids feeding the
//! moments twice per step. Setting [`Hyperparameters::two_phase_updates`]
//! runs the literal two-call variant instead.

mod replay;
mod train;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::envs::EnvConfig;
use crate::error::{Error, Result};
use crate::nn::{AdamWConfig, Mlp, OptimizerKind};

pub use replay::{ReplayBuffer, Transition};
pub use train::{
    run_episode, train_run, train_step, Agent, EpisodeLog, EpisodeMode, EpisodeStats, RunOutcome,
    RunStreams, TraceStep, TrainDiagnostics,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BiasType {
    Confirmatory,
    Disconfirmatory,
    None,
}

impl BiasType {
    pub const ALL: [BiasType; 3] = [
        BiasType::Confirmatory,
        BiasType::Disconfirmatory,
        BiasType::None,
    ];

    pub fn label(self) -> &'static str {
        match self {
            BiasType::Confirmatory => "confirmatory",
            BiasType::Disconfirmatory => "disconfirmatory",
            BiasType::None => "none",
        }
    }

    /// Whether a sample with this TD error gets the damped step.
    pub fn damps(self, td_error: f64) -> bool {
        match self {
            BiasType::Confirmatory => td_error < 0.0,
            BiasType::Disconfirmatory => td_error > 0.0,
            BiasType::None => false,
        }
    }
}

impl std::fmt::Display for BiasType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for BiasType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "confirmatory" => Ok(BiasType::Confirmatory),
            "disconfirmatory" => Ok(BiasType::Disconfirmatory),
            "none" => Ok(BiasType::None),
            other => Err(Error::invalid(format!("unknown bias type {other:?}"))),
        }
    }
}

/// Training hyperparameters. Defaults follow the published settings where
/// there are any (τ, α, K, γ, buffer, batch, optimizer, width, ε range).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Hyperparameters {
    pub tau: f64,
    pub alpha_c: f64,
    pub k: f64,
    pub gamma: f64,
    pub buffer_capacity: usize,
    pub batch_size: usize,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    pub episodes: usize,
    pub max_steps_per_episode: usize,
    pub mlp_width: usize,
    pub hidden_layers: usize,
    pub optimizer: OptimizerKind,
    pub adamw: AdamWConfig,
    pub two_phase_updates: bool,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Hyperparameters {
            tau: 5e-2,
            alpha_c: 3e-4,
            k: 1e-1,
            gamma: 0.99,
            buffer_capacity: 50_000,
            batch_size: 32,
            epsilon_start: 0.99,
            epsilon_end: 0.01,
            episodes: 300,
            max_steps_per_episode: 100,
            mlp_width: 128,
            hidden_layers: 2,
            optimizer: OptimizerKind::AdamW,
            adamw: AdamWConfig::default(),
            two_phase_updates: false,
        }
    }
}

impl Hyperparameters {
    /// Defaults with the episode budget for `env`: 300×100 on LineWorld,
    /// 600×400 on LanderLite.
    pub fn for_env(env: &EnvConfig) -> Self {
        match env {
            EnvConfig::LineWorld(_) => Hyperparameters::default(),
            EnvConfig::LanderLite(_) => Hyperparameters {
                episodes: 600,
                max_steps_per_episode: 400,
                ..Hyperparameters::default()
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, msg: &str| if ok { Ok(()) } else { Err(Error::invalid(msg)) };
        check(self.tau > 0.0 && self.tau <= 1.0, "tau must lie in (0, 1]")?;
        check(
            self.alpha_c > 0.0 && self.alpha_c.is_finite(),
            "alpha_c must be positive",
        )?;
        check((0.0..1.0).contains(&self.k), "K must lie in [0, 1)")?;
        check(
            (0.0..=1.0).contains(&self.gamma),
            "gamma must lie in [0, 1]",
        )?;
        check(
            self.buffer_capacity >= 1,
            "buffer_capacity must be at least 1",
        )?;
        check(self.batch_size >= 1, "batch_size must be at least 1")?;
        check(
            self.batch_size <= self.buffer_capacity,
            "batch_size must not exceed buffer_capacity",
        )?;
        check(
            (0.0..=1.0).contains(&self.epsilon_start) && (0.0..=1.0).contains(&self.epsilon_end),
            "epsilon bounds must lie in [0, 1]",
        )?;
        check(
            self.epsilon_start >= self.epsilon_end,
            "epsilon_start must be >= epsilon_end",
        )?;
        check(self.episodes >= 1, "episodes must be at least 1")?;
        check(
            self.max_steps_per_episode >= 1,
            "max_steps_per_episode must be at least 1",
        )?;
        check(self.mlp_width >= 1, "mlp_width must be at least 1")?;
        Ok(())
    }
}

/// Linear schedule from `epsilon_start` at episode 0 to `epsilon_end` at the
/// last episode.
pub fn epsilon_at(episode: usize, hp: &Hyperparameters) -> f64 {
    if hp.episodes <= 1 {
        return hp.epsilon_start;
    }
    let frac = episode as f64 / (hp.episodes - 1) as f64;
    let eps = hp.epsilon_start + (hp.epsilon_end - hp.epsilon_start) * frac;
    eps.clamp(hp.epsilon_end, hp.epsilon_start)
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// ε-greedy action. Always consumes exactly one uniform draw for the
/// explore/exploit coin, plus one more when exploring.
pub fn select_action<R: Rng + ?Sized>(
    q_net: &Mlp,
    state: &[f64],
    epsilon: f64,
    rng: &mut R,
) -> Result<usize> {
    if rng.gen::<f64>() < epsilon {
        Ok(rng.gen_range(0..q_net.output_dim()))
    } else {
        Ok(argmax(&q_net.forward(state)?))
    }
}

/// `r` for terminal transitions, `r + γ·max_a′ Q_target(s′, a′)` otherwise.
pub fn compute_target(transition: &Transition, target_net: &Mlp, gamma: f64) -> Result<f64> {
    if transition.terminal {
        return Ok(transition.reward);
    }
    let next = target_net.forward(&transition.next_state)?;
    let max = next.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(transition.reward + gamma * max)
}

/// `y − Q(s, a)`.
pub fn td_error(q_net: &Mlp, transition: &Transition, target: f64) -> Result<f64> {
    let q = q_net.forward(&transition.state)?;
    let qa = q
        .get(transition.action)
        .copied()
        .ok_or(Error::InvalidAction {
            action: transition.action,
            count: q.len(),
        })?;
    Ok(target - qa)
}

/// Weight on a sample's squared TD error: `1 − K` when the bias damps this
/// sign, `1` otherwise (including a TD error of exactly zero).
pub fn bias_weight(bias: BiasType, td_error: f64, k: f64) -> f64 {
    if bias.damps(td_error) {
        1.0 - k
    } else {
        1.0
    }
}

/// `θ_target ← τ·θ + (1−τ)·θ_target`, parameter by parameter.
pub fn soft_update(target_net: &mut Mlp, q_net: &Mlp, tau: f64) -> Result<()> {
    if !target_net.same_shape(q_net) {
        return Err(Error::ShapeMismatch(
            "target and online networks differ in shape".into(),
        ));
    }
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::invalid("tau must lie in [0, 1]"));
    }
    for (t, &q) in target_net.params_mut().iter_mut().zip(q_net.params()) {
        *t = tau * q + (1.0 - tau) * *t;
    }
    Ok(())
}
