use serde::{Deserialize, Serialize};

use super::mlp::{Gradients, Mlp};
use crate::error::{Error, Result};

/// Whether a step moves against the gradient (descent) or along it (ascent).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Descent,
    Ascent,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Descent => -1.0,
            Direction::Ascent => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    #[default]
    AdamW,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdamWConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub weight_decay: f64,
}

impl Default for AdamWConfig {
    fn default() -> Self {
        AdamWConfig {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            weight_decay: 1e-2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OptimizerState {
    Sgd,
    AdamW {
        config: AdamWConfig,
        m: Vec<f64>,
        v: Vec<f64>,
        step: u64,
    },
}

impl OptimizerState {
    pub fn new(kind: OptimizerKind, net: &Mlp, config: AdamWConfig) -> Self {
        match kind {
            OptimizerKind::Sgd => OptimizerState::Sgd,
            OptimizerKind::AdamW => OptimizerState::adamw(net, config),
        }
    }

    pub fn adamw(net: &Mlp, config: AdamWConfig) -> Self {
        OptimizerState::AdamW {
            config,
            m: vec![0.0; net.param_count()],
            v: vec![0.0; net.param_count()],
            step: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        match self {
            OptimizerState::Sgd => 0,
            OptimizerState::AdamW { step, .. } => *step,
        }
    }

    /// Applies one update with whichever rule this state carries.
    pub fn apply(
        &mut self,
        net: &mut Mlp,
        grads: &Gradients,
        step_size: f64,
        direction: Direction,
    ) -> Result<()> {
        match self {
            OptimizerState::Sgd => sgd_step(net, grads, step_size, direction),
            OptimizerState::AdamW { .. } => adamw_step(net, grads, self, step_size, direction),
        }
    }
}

fn check_shapes(net: &Mlp, grads: &Gradients) -> Result<()> {
    if grads.values.len() != net.param_count() {
        return Err(Error::ShapeMismatch(format!(
            "{} gradients for {} parameters",
            grads.values.len(),
            net.param_count()
        )));
    }
    Ok(())
}

/// `θ ← θ ∓ step_size·g`.
pub fn sgd_step(
    net: &mut Mlp,
    grads: &Gradients,
    step_size: f64,
    direction: Direction,
) -> Result<()> {
    check_shapes(net, grads)?;
    if !(step_size >= 0.0) {
        return Err(Error::invalid("step size must be non-negative"));
    }
    let scale = direction.sign() * step_size;
    for (p, g) in net.params_mut().iter_mut().zip(&grads.values) {
        *p += scale * g;
    }
    Ok(())
}

/// AdamW with bias-corrected moments and decoupled weight decay.
///
/// The moments always absorb `g` as given; `direction` only flips the sign of
/// the adaptive step. Weight decay shrinks parameters toward zero in both
/// directions.
pub fn adamw_step(
    net: &mut Mlp,
    grads: &Gradients,
    state: &mut OptimizerState,
    step_size: f64,
    direction: Direction,
) -> Result<()> {
    check_shapes(net, grads)?;
    let OptimizerState::AdamW { config, m, v, step } = state else {
        return Err(Error::invalid("adamw_step needs an AdamW optimizer state"));
    };
    if m.len() != net.param_count() || v.len() != net.param_count() {
        return Err(Error::ShapeMismatch(
            "optimizer moments do not match the network".into(),
        ));
    }
    *step += 1;
    let t = *step as i32;
    let bc1 = 1.0 - config.beta1.powi(t);
    let bc2 = 1.0 - config.beta2.powi(t);
    let decay = 1.0 - step_size * config.weight_decay;
    let sign = direction.sign();

    for (((p, g), m), v) in net
        .params_mut()
        .iter_mut()
        .zip(&grads.values)
        .zip(m.iter_mut())
        .zip(v.iter_mut())
    {
        *p *= decay;
        *m = config.beta1 * *m + (1.0 - config.beta1) * g;
        *v = config.beta2 * *v + (1.0 - config.beta2) * g * g;
        let m_hat = *m / bc1;
        let v_hat = *v / bc2;
        *p += sign * step_size * m_hat / (v_hat.sqrt() + config.epsilon);
    }
    Ok(())
}
