//! Minimal fully connected network for Q-value regression.
//!
//! Everything is `f64`. The loss is a per-sample weighted squared error on a
//! single output unit per sample, which is all a Q-learner needs, so
//! [`Mlp::backward`] is written for that loss directly instead of through a
//! general autodiff graph.

mod checkpoint;
mod mlp;
mod optim;

pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use mlp::{
    finite_difference_gradient, mlp_specs, Activation, Gradients, LayerSpec, Mlp, Sample,
};
pub use optim::{adamw_step, sgd_step, AdamWConfig, Direction, OptimizerKind, OptimizerState};
