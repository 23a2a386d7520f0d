//! Episodic environments with continuous states and discrete actions.

mod lander;
mod lineworld;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use lander::{
    LanderConstants, LanderLite, LanderLiteState, LEFT_THRUSTER, MAIN_ENGINE, NOOP, RIGHT_THRUSTER,
};
pub use lineworld::{LineWorld, LineWorldConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvSpec {
    pub state_dim: usize,
    pub action_count: usize,
    pub max_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepOutcome {
    pub next_state: Vec<f64>,
    pub reward: f64,
    pub terminal: bool,
    pub truncated: bool,
}

impl StepOutcome {
    pub fn done(&self) -> bool {
        self.terminal || self.truncated
    }
}

pub trait Environment: Send {
    fn spec(&self) -> EnvSpec;

    /// Starts a new episode and returns the initial observation.
    fn reset(&mut self, rng: &mut dyn RngCore) -> Vec<f64>;

    fn step(&mut self, action: usize) -> Result<StepOutcome>;

    /// Closed-form optimal undiscounted return from the start state, for
    /// environments simple enough to have one.
    fn optimal_return(&self) -> Result<f64> {
        Err(Error::UnsupportedEnv(format!(
            "no closed-form optimal return for {}",
            self.name()
        )))
    }

    fn name(&self) -> &'static str;
}

/// Environment selection as it appears in run configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase", deny_unknown_fields)]
pub enum EnvConfig {
    LineWorld(LineWorldConfig),
    LanderLite(LanderConstants),
}

impl EnvConfig {
    pub fn lineworld() -> Self {
        EnvConfig::LineWorld(LineWorldConfig::default())
    }

    pub fn landerlite() -> Self {
        EnvConfig::LanderLite(LanderConstants::default())
    }

    pub fn build(&self) -> Result<Box<dyn Environment>> {
        Ok(match self {
            EnvConfig::LineWorld(cfg) => Box::new(LineWorld::new(cfg.clone())?),
            EnvConfig::LanderLite(cfg) => Box::new(LanderLite::new(cfg.clone())?),
        })
    }

    pub fn label(&self) -> &'static str {
        match self {
            EnvConfig::LineWorld(_) => "lineworld",
            EnvConfig::LanderLite(_) => "landerlite",
        }
    }
}

pub(crate) fn check_action(action: usize, count: usize) -> Result<()> {
    if action >= count {
        return Err(Error::InvalidAction { action, count });
    }
    Ok(())
}
