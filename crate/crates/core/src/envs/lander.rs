use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::{check_action, EnvSpec, Environment, StepOutcome};
use crate::error::{Error, Result};

pub const NOOP: usize = 0;
pub const LEFT_THRUSTER: usize = 1;
pub const MAIN_ENGINE: usize = 2;
pub const RIGHT_THRUSTER: usize = 3;

/// Every physical and reward constant of [`LanderLite`].
///
/// | constant              | default | meaning                                         |
/// |-----------------------|---------|-------------------------------------------------|
/// | `gravity`             | 0.01    | subtracted from `vy` every step                 |
/// | `main_thrust`         | 0.015   | added along body-up `(−sin θ, cos θ)`           |
/// | `side_torque`         | 0.002   | added to `ω` (left +, right −)                  |
/// | `side_push`           | 0.001   | body-lateral push `(cos θ, sin θ)` (left −, right +) |
/// | `pad_half_width`      | 0.2     | pad spans `|x| ≤ 0.2` at `y = 0`                |
/// | `safe_speed`          | 0.05    | landing needs `|vx|, |vy|` below this           |
/// | `safe_angle`          | 0.2     | landing needs `|θ|` below this                  |
/// | `main_fuel_cost`      | 0.3     | reward penalty per main-engine step             |
/// | `side_fuel_cost`      | 0.03    | reward penalty per side-thruster step           |
/// | `landing_bonus`       | 100     | terminal reward for a soft landing              |
/// | `crash_penalty`       | 100     | terminal penalty for a crash                    |
/// | `max_steps`           | 400     | truncation horizon                              |
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LanderConstants {
    pub gravity: f64,
    pub main_thrust: f64,
    pub side_torque: f64,
    pub side_push: f64,
    pub pad_half_width: f64,
    pub safe_speed: f64,
    pub safe_angle: f64,
    pub main_fuel_cost: f64,
    pub side_fuel_cost: f64,
    pub landing_bonus: f64,
    pub crash_penalty: f64,
    pub start_height: f64,
    pub max_steps: usize,
}

impl Default for LanderConstants {
    fn default() -> Self {
        LanderConstants {
            gravity: 0.01,
            main_thrust: 0.015,
            side_torque: 0.002,
            side_push: 0.001,
            pad_half_width: 0.2,
            safe_speed: 0.05,
            safe_angle: 0.2,
            main_fuel_cost: 0.3,
            side_fuel_cost: 0.03,
            landing_bonus: 100.0,
            crash_penalty: 100.0,
            start_height: 1.4,
            max_steps: 400,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LanderLiteState {
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub theta: f64,
    pub omega: f64,
    pub left_contact: f64,
    pub right_contact: f64,
}

impl LanderLiteState {
    pub fn to_vec(&self) -> Vec<f64> {
        vec![
            self.x,
            self.y,
            self.vx,
            self.vy,
            self.theta,
            self.omega,
            self.left_contact,
            self.right_contact,
        ]
    }

    pub fn from_slice(s: &[f64]) -> Result<Self> {
        if s.len() != 8 {
            return Err(Error::DimensionMismatch {
                expected: 8,
                got: s.len(),
            });
        }
        Ok(LanderLiteState {
            x: s[0],
            y: s[1],
            vx: s[2],
            vy: s[3],
            theta: s[4],
            omega: s[5],
            left_contact: s[6],
            right_contact: s[7],
        })
    }

    /// Shaping potential; rewards are `Φ(s′) − Φ(s)` plus fuel and terminal
    /// terms, so shaping telescopes over an episode.
    pub fn potential(&self) -> f64 {
        -100.0 * self.x.hypot(self.y) - 10.0 * self.vx.hypot(self.vy) - 100.0 * self.theta.abs()
            + 10.0 * self.left_contact
            + 10.0 * self.right_contact
    }
}

/// Simplified 2-D lander with four discrete actions (noop, left thruster,
/// main engine, right thruster) and a landing pad around the origin.
///
/// Integration is semi-implicit Euler with unit time step: velocities are
/// updated from the action and gravity first, then positions and angle from
/// the new velocities.
#[derive(Debug, Clone)]
pub struct LanderLite {
    constants: LanderConstants,
    state: LanderLiteState,
    steps: usize,
}

impl LanderLite {
    pub fn new(constants: LanderConstants) -> Result<Self> {
        if constants.max_steps == 0 {
            return Err(Error::invalid("max_steps must be at least 1"));
        }
        Ok(LanderLite {
            constants,
            state: LanderLiteState::default(),
            steps: 0,
        })
    }

    pub fn constants(&self) -> &LanderConstants {
        &self.constants
    }

    pub fn state(&self) -> LanderLiteState {
        self.state
    }

    pub fn set_state(&mut self, state: LanderLiteState) {
        self.state = state;
    }

    /// Fuel cost of `action` under these constants.
    pub fn action_cost(&self, action: usize) -> f64 {
        match action {
            MAIN_ENGINE => self.constants.main_fuel_cost,
            LEFT_THRUSTER | RIGHT_THRUSTER => self.constants.side_fuel_cost,
            _ => 0.0,
        }
    }
}

impl Environment for LanderLite {
    fn spec(&self) -> EnvSpec {
        EnvSpec {
            state_dim: 8,
            action_count: 4,
            max_steps: self.constants.max_steps,
        }
    }

    fn reset(&mut self, rng: &mut dyn RngCore) -> Vec<f64> {
        self.steps = 0;
        self.state = LanderLiteState {
            x: rng.gen_range(-0.2..0.2),
            y: self.constants.start_height,
            vx: rng.gen_range(-0.05..0.05),
            vy: rng.gen_range(-0.05..0.05),
            theta: rng.gen_range(-0.1..0.1),
            omega: 0.0,
            left_contact: 0.0,
            right_contact: 0.0,
        };
        self.state.to_vec()
    }

    fn step(&mut self, action: usize) -> Result<StepOutcome> {
        check_action(action, 4)?;
        let c = &self.constants;
        let prev = self.state;
        let mut s = prev;

        let (sin, cos) = s.theta.sin_cos();
        match action {
            MAIN_ENGINE => {
                s.vx += c.main_thrust * -sin;
                s.vy += c.main_thrust * cos;
            }
            LEFT_THRUSTER => {
                s.omega += c.side_torque;
                s.vx -= c.side_push * cos;
                s.vy -= c.side_push * sin;
            }
            RIGHT_THRUSTER => {
                s.omega -= c.side_torque;
                s.vx += c.side_push * cos;
                s.vy += c.side_push * sin;
            }
            _ => {}
        }
        s.vy -= c.gravity;
        s.x += s.vx;
        s.y += s.vy;
        s.theta += s.omega;

        let on_pad = s.x.abs() <= c.pad_half_width;
        let touching = s.y <= 0.0 && on_pad;
        let contact = if touching { 1.0 } else { 0.0 };
        s.left_contact = contact;
        s.right_contact = contact;

        let soft =
            s.vx.abs() < c.safe_speed && s.vy.abs() < c.safe_speed && s.theta.abs() < c.safe_angle;
        let landed = touching && soft;
        let crashed = (s.y < 0.0 && !on_pad)
            || s.theta.abs() > std::f64::consts::FRAC_PI_2
            || (touching && !soft);

        let mut reward = s.potential() - prev.potential() - self.action_cost(action);
        if landed {
            reward += c.landing_bonus;
        } else if crashed {
            reward -= c.crash_penalty;
        }

        self.state = s;
        self.steps += 1;
        let terminal = landed || crashed;
        Ok(StepOutcome {
            next_state: s.to_vec(),
            reward,
            terminal,
            truncated: !terminal && self.steps >= c.max_steps,
        })
    }

    fn name(&self) -> &'static str {
        "landerlite"
    }
}
