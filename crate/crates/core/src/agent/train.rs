use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    argmax, bias_weight, compute_target, epsilon_at, select_action, soft_update, td_error,
    BiasType, Hyperparameters, ReplayBuffer, Transition,
};
use crate::envs::{EnvConfig, EnvSpec, Environment};
use crate::error::{Error, Result};
use crate::nn::{mlp_specs, Direction, Mlp, OptimizerState, Sample};
use crate::rng::{self, tags, StreamRng};

/// Online network, target network, optimizer state and replay memory.
#[derive(Debug, Clone)]
pub struct Agent {
    pub q_net: Mlp,
    pub target_net: Mlp,
    pub optimizer: OptimizerState,
    pub buffer: ReplayBuffer,
}

impl Agent {
    /// Fresh agent; the target network starts as an exact copy of the online one.
    pub fn new<R: Rng + ?Sized>(spec: EnvSpec, hp: &Hyperparameters, rng: &mut R) -> Result<Self> {
        hp.validate()?;
        let layers = mlp_specs(
            spec.state_dim,
            hp.mlp_width,
            hp.hidden_layers,
            spec.action_count,
        );
        let q_net = Mlp::init(layers, rng)?;
        Ok(Agent {
            target_net: q_net.clone(),
            optimizer: OptimizerState::new(hp.optimizer, &q_net, hp.adamw),
            buffer: ReplayBuffer::new(hp.buffer_capacity)?,
            q_net,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainDiagnostics {
    pub loss: f64,
    pub mean_td_error: f64,
    pub mean_abs_td_error: f64,
    /// How many samples in the batch got the damped `(1−K)` step.
    pub damped: usize,
}

/// One update of the online network from a uniformly drawn minibatch.
pub fn train_step<R: Rng + ?Sized>(
    agent: &mut Agent,
    hp: &Hyperparameters,
    bias: BiasType,
    rng: &mut R,
) -> Result<TrainDiagnostics> {
    let batch = agent.buffer.sample(hp.batch_size, rng)?;

    let mut targets = Vec::with_capacity(batch.len());
    let mut tds = Vec::with_capacity(batch.len());
    for t in &batch {
        let y = compute_target(t, &agent.target_net, hp.gamma)?;
        tds.push(td_error(&agent.q_net, t, y)?);
        targets.push(y);
    }
    let damped = tds.iter().filter(|&&td| bias.damps(td)).count();
    let n = batch.len() as f64;
    let diagnostics = TrainDiagnostics {
        loss: 0.0,
        mean_td_error: tds.iter().sum::<f64>() / n,
        mean_abs_td_error: tds.iter().map(|td| td.abs()).sum::<f64>() / n,
        damped,
    };

    let samples = |weight: &dyn Fn(f64) -> f64| -> Vec<Sample<'_>> {
        batch
            .iter()
            .zip(&targets)
            .zip(&tds)
            .map(|((t, &y), &td)| Sample {
                input: &t.state,
                action: t.action,
                target: y,
                weight: weight(td),
            })
            .collect()
    };

    let loss = if !hp.two_phase_updates {
        let weighted = samples(&|td| bias_weight(bias, td, hp.k));
        let (grads, loss) = agent.q_net.backward(&weighted)?;
        agent
            .optimizer
            .apply(&mut agent.q_net, &grads, hp.alpha_c, Direction::Descent)?;
        loss
    } else {
        let full = samples(&|_| 1.0);
        let (grads, loss) = agent.q_net.backward(&full)?;
        agent
            .optimizer
            .apply(&mut agent.q_net, &grads, hp.alpha_c, Direction::Descent)?;
        if hp.k > 0.0 && damped > 0 {
            // ascent on the damped samples' squared errors, gradient taken at
            // the post-descent parameters
            let only_damped = samples(&|td| if bias.damps(td) { 1.0 } else { 0.0 });
            let (grads, _) = agent.q_net.backward(&only_damped)?;
            agent.optimizer.apply(
                &mut agent.q_net,
                &grads,
                hp.k * hp.alpha_c,
                Direction::Ascent,
            )?;
        }
        loss
    };

    Ok(TrainDiagnostics {
        loss,
        ..diagnostics
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EpisodeMode {
    Train,
    Eval,
}

/// The independent random streams one training run draws from.
#[derive(Debug, Clone)]
pub struct RunStreams {
    pub env_train: StreamRng,
    pub action: StreamRng,
    pub replay: StreamRng,
    pub env_eval: StreamRng,
}

impl RunStreams {
    pub fn new(master_seed: u64, seed: u64) -> Self {
        RunStreams {
            env_train: rng::stream(master_seed, &[seed, tags::ENV_TRAIN]),
            action: rng::stream(master_seed, &[seed, tags::ACTION]),
            replay: rng::stream(master_seed, &[seed, tags::REPLAY]),
            env_eval: rng::stream(master_seed, &[seed, tags::ENV_EVAL]),
        }
    }
}

/// One environment step, as written to trajectory dumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub episode: usize,
    pub mode: EpisodeMode,
    pub t: usize,
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub terminal: bool,
    pub truncated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EpisodeStats {
    pub total_return: f64,
    pub steps: usize,
    pub train_steps: usize,
    pub mean_abs_td_error: f64,
}

/// Plays one episode.
///
/// `Train`: ε-greedy actions, every transition stored, one [`train_step`]
/// per environment step once the buffer holds a batch, and one soft target
/// update at the end. `Eval`: greedy actions, nothing stored or updated.
#[allow(clippy::too_many_arguments)]
pub fn run_episode(
    env: &mut dyn Environment,
    agent: &mut Agent,
    hp: &Hyperparameters,
    bias: BiasType,
    mode: EpisodeMode,
    epsilon: f64,
    streams: &mut RunStreams,
    episode: usize,
    mut trace: Option<&mut Vec<TraceStep>>,
) -> Result<EpisodeStats> {
    let mut state = match mode {
        EpisodeMode::Train => env.reset(&mut streams.env_train),
        EpisodeMode::Eval => env.reset(&mut streams.env_eval),
    };
    let mut stats = EpisodeStats::default();
    let mut td_sum = 0.0;

    for t in 0..hp.max_steps_per_episode {
        let action = match mode {
            EpisodeMode::Train => {
                select_action(&agent.q_net, &state, epsilon, &mut streams.action)?
            }
            EpisodeMode::Eval => argmax(&agent.q_net.forward(&state)?),
        };
        let out = env.step(action)?;
        stats.total_return += out.reward;
        stats.steps += 1;

        if let Some(tr) = trace.as_deref_mut() {
            tr.push(TraceStep {
                episode,
                mode,
                t,
                state: state.clone(),
                action,
                reward: out.reward,
                next_state: out.next_state.clone(),
                terminal: out.terminal,
                truncated: out.truncated,
            });
        }

        let done = out.done();
        if mode == EpisodeMode::Train {
            agent.buffer.push(Transition {
                state: std::mem::take(&mut state),
                action,
                reward: out.reward,
                next_state: out.next_state.clone(),
                terminal: out.terminal,
            });
            if agent.buffer.len() >= hp.batch_size {
                let d = train_step(agent, hp, bias, &mut streams.replay)?;
                td_sum += d.mean_abs_td_error;
                stats.train_steps += 1;
            }
        }
        state = out.next_state;
        if done {
            break;
        }
    }

    if mode == EpisodeMode::Train {
        soft_update(&mut agent.target_net, &agent.q_net, hp.tau)?;
    }
    if stats.train_steps > 0 {
        stats.mean_abs_td_error = td_sum / stats.train_steps as f64;
    }
    Ok(stats)
}

/// Per-episode record of a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub episode: usize,
    pub train_return: f64,
    /// Greedy return of the evaluation rollout that follows the episode.
    pub test_return: f64,
    pub epsilon: f64,
    pub mean_abs_td_error: f64,
    pub train_steps: usize,
    /// Not deterministic; excluded from every CSV artifact.
    pub wall_clock_ms: f64,
}

impl EpisodeLog {
    /// Equality on everything except wall-clock time.
    pub fn same_outcome(&self, other: &EpisodeLog) -> bool {
        self.episode == other.episode
            && self.train_return.to_bits() == other.train_return.to_bits()
            && self.test_return.to_bits() == other.test_return.to_bits()
            && self.epsilon.to_bits() == other.epsilon.to_bits()
            && self.mean_abs_td_error.to_bits() == other.mean_abs_td_error.to_bits()
            && self.train_steps == other.train_steps
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub logs: Vec<EpisodeLog>,
    pub agent: Agent,
    pub trace: Option<Vec<TraceStep>>,
}

impl RunOutcome {
    /// Mean test return over the last `window` episodes.
    pub fn final_window_mean(&self, window: usize) -> f64 {
        let w = window.clamp(1, self.logs.len().max(1));
        let tail = &self.logs[self.logs.len().saturating_sub(w)..];
        tail.iter().map(|l| l.test_return).sum::<f64>() / tail.len().max(1) as f64
    }

    /// Mean test return over every episode.
    pub fn all_episode_mean(&self) -> f64 {
        self.logs.iter().map(|l| l.test_return).sum::<f64>() / self.logs.len().max(1) as f64
    }
}

/// Full training run: `hp.episodes` train episodes, each followed by one
/// greedy evaluation episode.
///
/// Streams are derived from `(master_seed, seed)` only, so runs that differ
/// just in bias type or `K` see identical initial weights, resets and
/// exploration coins.
pub fn train_run(
    env_config: &EnvConfig,
    hp: &Hyperparameters,
    bias: BiasType,
    master_seed: u64,
    seed: u64,
    trace: bool,
) -> Result<RunOutcome> {
    hp.validate()?;
    let mut env = env_config.build()?;
    let mut eval_env = env_config.build()?;
    let spec = env.spec();
    if spec.state_dim == 0 || spec.action_count == 0 {
        return Err(Error::invalid(
            "environment has an empty state or action space",
        ));
    }
    let mut agent = Agent::new(
        spec,
        hp,
        &mut rng::stream(master_seed, &[seed, tags::NET_INIT]),
    )?;
    let mut streams = RunStreams::new(master_seed, seed);
    let mut steps = trace.then(Vec::new);
    let mut logs = Vec::with_capacity(hp.episodes);

    for episode in 0..hp.episodes {
        let started = Instant::now();
        let epsilon = epsilon_at(episode, hp);
        let train = run_episode(
            env.as_mut(),
            &mut agent,
            hp,
            bias,
            EpisodeMode::Train,
            epsilon,
            &mut streams,
            episode,
            steps.as_mut(),
        )?;
        let eval = run_episode(
            eval_env.as_mut(),
            &mut agent,
            hp,
            bias,
            EpisodeMode::Eval,
            0.0,
            &mut streams,
            episode,
            steps.as_mut(),
        )?;
        logs.push(EpisodeLog {
            episode,
            train_return: train.total_return,
            test_return: eval.total_return,
            epsilon,
            mean_abs_td_error: train.mean_abs_td_error,
            train_steps: train.train_steps,
            wall_clock_ms: started.elapsed().as_secs_f64() * 1e3,
        });
    }
    Ok(RunOutcome {
        logs,
        agent,
        trace: steps,
    })
}
