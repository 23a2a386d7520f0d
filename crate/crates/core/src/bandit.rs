//! Asymmetric-learning-rate value model for a stationary Bernoulli bandit.
//!
//! Each arm keeps a value estimate `V`. After an outcome the prediction error
//! `δ = r − V` moves the estimate by `α·δ`, where the rate depends on the sign
//! of `δ` and on whether the arm was chosen:
//!
//! | arm      | δ > 0 | δ < 0 |
//! |----------|-------|-------|
//! | chosen   | α_C   | α_D   |
//! | unchosen | α_D   | α_C   |
//!
//! `α_C > α_D` is a confirmatory agent (good news about its own choice and bad
//! news about the alternatives count more), `α_C < α_D` a disconfirmatory one.
//! Unchosen arms are only updated under [`FeedbackMode::FullInformation`],
//! where a counterfactual reward is drawn for every arm on every step.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{self, Parallelism};
use crate::rng;

/// Per-arm Bernoulli reward probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmConfig {
    reward_probs: Vec<f64>,
}

impl ArmConfig {
    pub fn new(reward_probs: Vec<f64>) -> Result<Self> {
        if reward_probs.len() < 2 {
            return Err(Error::invalid("a bandit needs at least two arms"));
        }
        if let Some(p) = reward_probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::invalid(format!(
                "reward probability {p} outside [0, 1]"
            )));
        }
        Ok(ArmConfig { reward_probs })
    }

    pub fn reward_probs(&self) -> &[f64] {
        &self.reward_probs
    }

    pub fn len(&self) -> usize {
        self.reward_probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reward_probs.is_empty()
    }

    /// Reward expected from picking an arm uniformly at random.
    pub fn uniform_baseline(&self) -> f64 {
        self.reward_probs.iter().sum::<f64>() / self.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeedbackMode {
    /// Only the chosen arm's outcome is observed.
    FactualOnly,
    /// Outcomes of all arms are observed every step.
    #[default]
    FullInformation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BanditParams {
    pub alpha_c: f64,
    pub alpha_d: f64,
    pub temperature: f64,
    pub trial_length: usize,
    pub feedback_mode: FeedbackMode,
}

impl BanditParams {
    pub fn new(
        alpha_c: f64,
        alpha_d: f64,
        temperature: f64,
        trial_length: usize,
        feedback_mode: FeedbackMode,
    ) -> Result<Self> {
        let params = BanditParams {
            alpha_c,
            alpha_d,
            temperature,
            trial_length,
            feedback_mode,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, rate) in [("alpha_c", self.alpha_c), ("alpha_d", self.alpha_d)] {
            if !(rate > 0.0 && rate <= 1.0) {
                return Err(Error::invalid(format!("{name} = {rate} outside (0, 1]")));
            }
        }
        if !(self.temperature > 0.0) || !self.temperature.is_finite() {
            return Err(Error::invalid(format!(
                "temperature must be positive, got {}",
                self.temperature
            )));
        }
        if self.trial_length == 0 {
            return Err(Error::invalid("trial_length must be at least 1"));
        }
        Ok(())
    }
}

/// Per-arm value estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    pub values: Vec<f64>,
}

impl ValueTable {
    pub fn zeros(arms: usize) -> Self {
        ValueTable {
            values: vec![0.0; arms],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub total_reward: f64,
    pub steps: usize,
    pub per_step_rewards: Option<Vec<f64>>,
    pub final_values: ValueTable,
}

impl TrialResult {
    pub fn mean_step_reward(&self) -> f64 {
        self.total_reward / self.steps as f64
    }
}

pub fn prediction_error(reward: f64, value: f64) -> f64 {
    reward - value
}

pub fn update_chosen(value: f64, delta: f64, params: &BanditParams) -> f64 {
    if delta > 0.0 {
        value + params.alpha_c * delta
    } else if delta < 0.0 {
        value + params.alpha_d * delta
    } else {
        value
    }
}

pub fn update_unchosen(value: f64, delta: f64, params: &BanditParams) -> f64 {
    if delta > 0.0 {
        value + params.alpha_d * delta
    } else if delta < 0.0 {
        value + params.alpha_c * delta
    } else {
        value
    }
}

/// Boltzmann probabilities `exp(V_i/T) / Σ_j exp(V_j/T)`, computed after
/// subtracting `max_i V_i/T` so large values cannot overflow.
pub fn softmax_policy(values: &ValueTable, temperature: f64) -> Result<Vec<f64>> {
    if !(temperature > 0.0) {
        return Err(Error::invalid(format!(
            "temperature must be positive, got {temperature}"
        )));
    }
    let scaled: Vec<f64> = values.values.iter().map(|v| v / temperature).collect();
    let max = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scaled.iter().map(|s| (s - max).exp()).collect();
    let norm: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / norm).collect())
}

fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // rounding left `acc` a hair under 1
    probs.len() - 1
}

fn bernoulli<R: Rng + ?Sized>(p: f64, rng: &mut R) -> f64 {
    if rng.gen::<f64>() < p {
        1.0
    } else {
        0.0
    }
}

/// One step's observable outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BanditStep {
    pub action: usize,
    pub reward: f64,
}

/// A learner playing one bandit trial. Values start at zero.
#[derive(Debug, Clone)]
pub struct ConfirmationLearner<'a> {
    arms: &'a ArmConfig,
    params: BanditParams,
    values: ValueTable,
}

impl<'a> ConfirmationLearner<'a> {
    pub fn new(arms: &'a ArmConfig, params: BanditParams) -> Result<Self> {
        params.validate()?;
        Ok(ConfirmationLearner {
            arms,
            params,
            values: ValueTable::zeros(arms.len()),
        })
    }

    pub fn values(&self) -> &ValueTable {
        &self.values
    }

    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> BanditStep {
        let probs = softmax_policy(&self.values, self.params.temperature)
            .expect("temperature validated at construction");
        let action = sample_index(&probs, rng);
        let reward = bernoulli(self.arms.reward_probs[action], rng);

        let v = &mut self.values.values[action];
        *v = update_chosen(*v, prediction_error(reward, *v), &self.params);

        if self.params.feedback_mode == FeedbackMode::FullInformation {
            for (arm, p) in self.arms.reward_probs.iter().enumerate() {
                if arm == action {
                    continue;
                }
                let counterfactual = bernoulli(*p, rng);
                let v = &mut self.values.values[arm];
                *v = update_unchosen(*v, prediction_error(counterfactual, *v), &self.params);
            }
        }
        BanditStep { action, reward }
    }
}

pub fn run_trial<R: Rng + ?Sized>(
    arms: &ArmConfig,
    params: &BanditParams,
    rng: &mut R,
    keep_rewards: bool,
) -> Result<TrialResult> {
    let mut learner = ConfirmationLearner::new(arms, *params)?;
    let mut total = 0.0;
    let mut rewards = keep_rewards.then(|| Vec::with_capacity(params.trial_length));
    for _ in 0..params.trial_length {
        let step = learner.step(rng);
        total += step.reward;
        if let Some(r) = rewards.as_mut() {
            r.push(step.reward);
        }
    }
    Ok(TrialResult {
        total_reward: total,
        steps: params.trial_length,
        per_step_rewards: rewards,
        final_values: learner.values,
    })
}

/// The evenly spaced rate axis `{step, 2·step, …}` up to `max`. The default
/// `(0.05, 0.95)` gives the 19 values `0.05, 0.10, …, 0.95`.
pub fn rate_axis(step: f64, max: f64) -> Vec<f64> {
    let n = (max / step + 1e-9).floor() as usize;
    // rounded to 1e-12 so 0.15 is 0.15 and not 0.15000000000000002
    (1..=n)
        .map(|i| ((i as f64 * step) * 1e12).round() / 1e12)
        .collect()
}

/// Full cartesian grid of `(alpha_c, alpha_d)` pairs, `alpha_c` outer.
pub fn rate_grid(axis: &[f64]) -> Vec<(f64, f64)> {
    axis.iter()
        .flat_map(|&c| axis.iter().map(move |&d| (c, d)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub arms: ArmConfig,
    pub grid: Vec<(f64, f64)>,
    pub trials: usize,
    pub trial_length: usize,
    pub temperature: f64,
    pub feedback_mode: FeedbackMode,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub alpha_c: f64,
    pub alpha_d: f64,
    /// Mean over trials of the per-trial total reward.
    pub mean_total_reward: f64,
    /// `mean_total_reward / trial_length`.
    pub mean_step_reward: f64,
}

/// Mean reward of every grid cell over `trials` independent trials.
///
/// Trial `k` of the cell `(α_C, α_D)` draws from the stream derived from
/// `(seed, bits(α_C), bits(α_D), k)`, so a cell's value depends only on its
/// own rates and never on the grid layout or on scheduling.
pub fn grid_search(spec: &GridSpec, parallelism: Parallelism) -> Result<Vec<GridCell>> {
    if spec.grid.is_empty() {
        return Err(Error::invalid("grid must contain at least one cell"));
    }
    if spec.trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let params: Vec<BanditParams> = spec
        .grid
        .iter()
        .map(|&(c, d)| {
            BanditParams::new(
                c,
                d,
                spec.temperature,
                spec.trial_length,
                spec.feedback_mode,
            )
        })
        .collect::<Result<_>>()?;

    let cells = par::map(params, parallelism, |p| evaluate_cell(spec, &p));
    Ok(cells)
}

fn evaluate_cell(spec: &GridSpec, params: &BanditParams) -> GridCell {
    let mut sum = 0.0;
    for trial in 0..spec.trials {
        let mut rng = rng::stream(
            spec.seed,
            &[
                params.alpha_c.to_bits(),
                params.alpha_d.to_bits(),
                trial as u64,
            ],
        );
        let result = run_trial(&spec.arms, params, &mut rng, false)
            .expect("params validated by grid_search");
        sum += result.total_reward;
    }
    let mean_total_reward = sum / spec.trials as f64;
    GridCell {
        alpha_c: params.alpha_c,
        alpha_d: params.alpha_d,
        mean_total_reward,
        mean_step_reward: mean_total_reward / spec.trial_length as f64,
    }
}
