//! Confirmation-bias learning models.
//!
//! Two learners share one idea: prediction errors that agree with what the
//! agent already believes are weighted differently from those that contradict
//! it.
//!
//! * [`bandit`] implements the asymmetric-learning-rate value model for a
//!   stationary Bernoulli bandit, with softmax action selection and a
//!   learning-rate grid search.
//! * [`agent`] implements a deep Q-learning agent whose per-sample update is
//!   scaled down when the TD error has the "unwelcome" sign for its bias type.
//! * [`nn`] is the small from-scratch MLP, backprop and optimizers the agent
//!   trains with.
//! * [`envs`] holds the episodic environments (`LineWorld`, `LanderLite`).
//! * [`runner`] reproduces the three experiments (bandit heatmap, bias
//!   comparison, K ablation) and writes CSV/SVG/JSON artifacts.
//!
//! Data-parallel sweeps go through [`par`], which uses rayon when the
//! `parallel` feature is on and falls back to a plain loop otherwise. Every
//! job owns a derived random stream (see [`rng`]), so results never depend on
//! scheduling.

pub mod agent;
pub mod bandit;
pub mod envs;
pub mod error;
pub mod nn;
pub mod par;
pub mod rng;
pub mod runner;

pub use error::{Error, Result};
