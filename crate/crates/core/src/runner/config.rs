//! Run configuration files.
//!
//! Configurations are TOML. Every key is optional; missing keys take the
//! defaults for the chosen experiment and environment, and unknown keys are
//! rejected. A complete example for the bias comparison:
//!
//! ```toml
//! experiment = "bias-compare"     # bandit-grid | bias-compare | k-ablation
//! master_seed = 0
//! seeds = [0, 1, 2, 3, 4]
//! output_dir = "out/bias-compare"
//! parallel = 0                    # worker threads, 0 = all cores
//! trace = false                   # dump every environment step as JSON Lines
//! final_window = 20               # episodes averaged for the final-window metric
//!
//! [env]
//! name = "lineworld"              # lineworld | landerlite
//! max_steps = 100                 # landerlite accepts every LanderConstants field
//!
//! [agent]
//! tau = 0.05
//! alpha_c = 0.0003
//! k = 0.1
//! gamma = 0.99
//! buffer_capacity = 50000
//! batch_size = 32
//! epsilon_start = 0.99
//! epsilon_end = 0.01
//! episodes = 300
//! max_steps_per_episode = 100
//! mlp_width = 128
//! hidden_layers = 2
//! optimizer = "adamw"             # adamw | sgd
//! two_phase_updates = false
//!
//! [agent.adamw]
//! beta1 = 0.9
//! beta2 = 0.999
//! epsilon = 1e-8
//! weight_decay = 0.01
//!
//! [bandit]                        # bandit-grid only
//! arms = [0.4, 0.6]
//! temperature = 0.1
//! trial_length = 200
//! trials = 256
//! rate_step = 0.05
//! rate_max = 0.95
//! feedback = "full-information"   # full-information | factual-only
//!
//! [ablation]                      # k-ablation only
//! k_values = [0.0, 0.05, 0.1, 0.2]
//! bias = "confirmatory"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agent::{BiasType, Hyperparameters};
use crate::bandit::FeedbackMode;
use crate::envs::EnvConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    BanditGrid,
    BiasCompare,
    KAblation,
}

impl ExperimentKind {
    pub fn label(self) -> &'static str {
        match self {
            ExperimentKind::BanditGrid => "bandit-grid",
            ExperimentKind::BiasCompare => "bias-compare",
            ExperimentKind::KAblation => "k-ablation",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BanditGridConfig {
    pub arms: Vec<f64>,
    pub temperature: f64,
    pub trial_length: usize,
    pub trials: usize,
    pub rate_step: f64,
    pub rate_max: f64,
    pub feedback: FeedbackMode,
}

impl Default for BanditGridConfig {
    fn default() -> Self {
        BanditGridConfig {
            arms: vec![0.4, 0.6],
            temperature: 0.1,
            trial_length: 200,
            trials: 256,
            rate_step: 0.05,
            rate_max: 0.95,
            feedback: FeedbackMode::FullInformation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AblationConfig {
    pub k_values: Vec<f64>,
    pub bias: BiasType,
}

impl Default for AblationConfig {
    fn default() -> Self {
        AblationConfig {
            k_values: vec![0.0, 0.05, 0.1, 0.2],
            bias: BiasType::Confirmatory,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: ExperimentKind,
    pub master_seed: u64,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    pub parallel: usize,
    pub trace: bool,
    pub final_window: usize,
    pub env: EnvConfig,
    pub agent: Hyperparameters,
    pub bandit: BanditGridConfig,
    pub ablation: AblationConfig,
}

impl RunConfig {
    /// Desk-scale defaults for `experiment` on `env`.
    pub fn defaults(experiment: ExperimentKind, env: EnvConfig) -> Self {
        let seeds = match experiment {
            ExperimentKind::BanditGrid => vec![0],
            _ => (0..5).collect(),
        };
        RunConfig {
            experiment,
            master_seed: 0,
            seeds,
            output_dir: PathBuf::from("out").join(experiment.label()),
            parallel: 0,
            trace: false,
            final_window: 20,
            agent: Hyperparameters::for_env(&env),
            env,
            bandit: BanditGridConfig::default(),
            ablation: AblationConfig::default(),
        }
    }

    /// Parses a TOML document, filling unspecified keys from
    /// [`RunConfig::defaults`] for the experiment and environment it names.
    /// `fallback` is used when the document does not name an experiment.
    pub fn from_toml(text: &str, fallback: Option<ExperimentKind>) -> Result<Self> {
        let user: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;

        let experiment = match user.get("experiment") {
            Some(v) => toml::Value::try_into::<ExperimentKind>(v.clone())
                .map_err(|e| Error::Config(format!("experiment: {e}")))?,
            None => fallback.ok_or_else(|| Error::Config("missing `experiment`".into()))?,
        };
        let env = match user
            .get("env")
            .and_then(|e| e.get("name"))
            .and_then(|n| n.as_str())
        {
            None | Some("lineworld") => EnvConfig::lineworld(),
            Some("landerlite") => EnvConfig::landerlite(),
            Some(other) => return Err(Error::Config(format!("unknown environment {other:?}"))),
        };

        let mut merged = toml::Table::try_from(RunConfig::defaults(experiment, env))
            .map_err(|e| Error::Config(e.to_string()))?;
        merge(&mut merged, user);
        let config: RunConfig = toml::Value::Table(merged)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path, fallback: Option<ExperimentKind>) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        RunConfig::from_toml(&text, fallback)
    }

    /// The snapshot written next to every run's artifacts.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Switches to full-size budgets: 1024 bandit trials per cell, and the
    /// LanderLite environment with its full episode budget for agent runs.
    pub fn full_scale(&mut self) {
        self.bandit.trials = 1024;
        if self.experiment != ExperimentKind::BanditGrid {
            if !matches!(self.env, EnvConfig::LanderLite(_)) {
                self.env = EnvConfig::landerlite();
            }
            let budget = Hyperparameters::for_env(&self.env);
            self.agent.episodes = budget.episodes;
            self.agent.max_steps_per_episode = budget.max_steps_per_episode;
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        if self.final_window == 0 {
            return Err(Error::Config("final_window must be at least 1".into()));
        }
        match self.experiment {
            ExperimentKind::BanditGrid => {
                let b = &self.bandit;
                if b.trials == 0 || b.trial_length == 0 {
                    return Err(Error::Config(
                        "bandit trials and trial_length must be at least 1".into(),
                    ));
                }
                if !(b.rate_step > 0.0) || b.rate_max < b.rate_step || b.rate_max > 1.0 {
                    return Err(Error::Config(
                        "bandit rate axis must satisfy 0 < rate_step <= rate_max <= 1".into(),
                    ));
                }
                if !(b.temperature > 0.0) {
                    return Err(Error::Config("bandit temperature must be positive".into()));
                }
                crate::bandit::ArmConfig::new(b.arms.clone())?;
            }
            ExperimentKind::BiasCompare | ExperimentKind::KAblation => {
                self.agent.validate()?;
                self.env.build()?;
            }
        }
        if self.experiment == ExperimentKind::KAblation {
            if self.ablation.k_values.is_empty() {
                return Err(Error::Config("k_values must not be empty".into()));
            }
            if let Some(k) = self
                .ablation
                .k_values
                .iter()
                .find(|k| !(0.0..1.0).contains(*k))
            {
                return Err(Error::Config(format!("K = {k} outside [0, 1)")));
            }
        }
        Ok(())
    }
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (key, value) in over {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}
