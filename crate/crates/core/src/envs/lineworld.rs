use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::{check_action, EnvSpec, Environment, StepOutcome};
use crate::error::{Error, Result};

/// Goal and cliff sit this many grid cells from the origin.
const EDGE_CELLS: i32 = 10;
const CELL: f64 = 0.1;
const STEP_COST: f64 = -0.01;
const GOAL_BONUS: f64 = 1.0;
const CLIFF_BONUS: f64 = -1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LineWorldConfig {
    pub max_steps: usize,
}

impl Default for LineWorldConfig {
    fn default() -> Self {
        LineWorldConfig { max_steps: 100 }
    }
}

/// A point on `[-1, 1]` moved left (action 0) or right (action 1) by 0.1.
///
/// Each step costs 0.01. Reaching `+1` ends the episode with a +1 bonus,
/// reaching `-1` ends it with a −1 bonus. The position is kept as an integer
/// cell index so the thresholds are hit exactly.
#[derive(Debug, Clone)]
pub struct LineWorld {
    config: LineWorldConfig,
    cell: i32,
    steps: usize,
}

impl LineWorld {
    pub fn new(config: LineWorldConfig) -> Result<Self> {
        if config.max_steps == 0 {
            return Err(Error::invalid("max_steps must be at least 1"));
        }
        Ok(LineWorld {
            config,
            cell: 0,
            steps: 0,
        })
    }

    /// Places the walker at the grid point nearest `x`.
    pub fn set_position(&mut self, x: f64) {
        self.cell = (x / CELL).round() as i32;
    }

    pub fn position(&self) -> f64 {
        self.cell as f64 / EDGE_CELLS as f64
    }
}

impl Environment for LineWorld {
    fn spec(&self) -> EnvSpec {
        EnvSpec {
            state_dim: 1,
            action_count: 2,
            max_steps: self.config.max_steps,
        }
    }

    fn reset(&mut self, _rng: &mut dyn RngCore) -> Vec<f64> {
        self.cell = 0;
        self.steps = 0;
        vec![self.position()]
    }

    fn step(&mut self, action: usize) -> Result<StepOutcome> {
        check_action(action, 2)?;
        self.cell += if action == 1 { 1 } else { -1 };
        self.steps += 1;
        let mut reward = STEP_COST;
        let mut terminal = false;
        if self.cell >= EDGE_CELLS {
            reward += GOAL_BONUS;
            terminal = true;
        } else if self.cell <= -EDGE_CELLS {
            reward += CLIFF_BONUS;
            terminal = true;
        }
        Ok(StepOutcome {
            next_state: vec![self.position()],
            reward,
            terminal,
            truncated: !terminal && self.steps >= self.config.max_steps,
        })
    }

    fn optimal_return(&self) -> Result<f64> {
        let needed = EDGE_CELLS as usize;
        if self.config.max_steps >= needed {
            Ok(needed as f64 * STEP_COST + GOAL_BONUS)
        } else {
            Ok(self.config.max_steps as f64 * STEP_COST)
        }
    }

    fn name(&self) -> &'static str {
        "lineworld"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn world() -> LineWorld {
        LineWorld::new(LineWorldConfig::default()).unwrap()
    }

    #[test]
    fn reset_starts_at_origin() {
        let mut w = world();
        assert_eq!(w.reset(&mut stream(0, &[])), vec![0.0]);
    }

    #[test]
    fn step_into_goal() {
        let mut w = world();
        w.reset(&mut stream(0, &[]));
        w.set_position(0.9);
        let out = w.step(1).unwrap();
        assert_eq!(out.next_state, vec![1.0]);
        assert!((out.reward - 0.99).abs() < 1e-12);
        assert!(out.terminal && !out.truncated);
    }

    #[test]
    fn always_right_returns_point_nine() {
        let mut w = world();
        w.reset(&mut stream(0, &[]));
        let mut ret = 0.0;
        let mut steps = 0;
        loop {
            let out = w.step(1).unwrap();
            ret += out.reward;
            steps += 1;
            if out.done() {
                assert!(out.terminal);
                break;
            }
        }
        assert_eq!(steps, 10);
        assert!((ret - 0.9).abs() < 1e-12);
        assert!((w.optimal_return().unwrap() - 0.9).abs() < 1e-12);
    }

    #[test]
    fn cliff_is_terminal() {
        let mut w = world();
        w.reset(&mut stream(0, &[]));
        let mut last = None;
        for _ in 0..10 {
            last = Some(w.step(0).unwrap());
        }
        let out = last.unwrap();
        assert_eq!(out.next_state, vec![-1.0]);
        assert!(out.terminal);
        assert!((out.reward - (-1.01)).abs() < 1e-12);
    }

    #[test]
    fn short_horizon_truncates() {
        let mut w = LineWorld::new(LineWorldConfig { max_steps: 4 }).unwrap();
        assert!((w.optimal_return().unwrap() - (-0.04)).abs() < 1e-12);
        w.reset(&mut stream(0, &[]));
        let outs: Vec<_> = (0..4).map(|_| w.step(1).unwrap()).collect();
        assert!(outs[3].truncated && !outs[3].terminal);
        assert!(outs[..3].iter().all(|o| !o.done()));
    }

    #[test]
    fn invalid_action() {
        let mut w = world();
        assert!(matches!(
            w.step(2),
            Err(Error::InvalidAction {
                action: 2,
                count: 2
            })
        ));
    }
}
