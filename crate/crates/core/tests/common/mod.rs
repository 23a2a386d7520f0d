//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use cmdqn::agent::{compute_target, train_step, Agent, BiasType, Hyperparameters, Transition};
use cmdqn::envs::EnvSpec;
use cmdqn::nn::{Activation, Mlp, OptimizerKind, Sample};
use cmdqn::rng::stream;
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Upper-tail p-value of Pearson's chi-square statistic for `counts` against
/// a uniform expectation.
pub fn uniform_chi_square_p(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    let stat: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    let dist = ChiSquared::new((counts.len() - 1) as f64).unwrap();
    1.0 - dist.cdf(stat)
}

/// Outcome of one single-transition bias check.
pub struct BiasCase {
    pub k: f64,
    pub td: f64,
    pub before: Vec<f64>,
    pub unbiased: Vec<f64>,
    pub biased: Vec<f64>,
}

impl BiasCase {
    pub fn unbiased_delta(&self) -> Vec<f64> {
        self.unbiased
            .iter()
            .zip(&self.before)
            .map(|(a, b)| a - b)
            .collect()
    }

    pub fn biased_delta(&self) -> Vec<f64> {
        self.biased
            .iter()
            .zip(&self.before)
            .map(|(a, b)| a - b)
            .collect()
    }

    /// `max |Δ_biased − factor·Δ_unbiased| / max |Δ_unbiased|`.
    pub fn relative_error(&self, factor: f64) -> f64 {
        let dn = self.unbiased_delta();
        let db = self.biased_delta();
        let scale = dn.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        let err = dn
            .iter()
            .zip(&db)
            .fold(0.0f64, |m, (n, b)| m.max((b - factor * n).abs()));
        err / scale
    }
}

/// Builds a random network and a single stored transition whose TD error
/// has the sign of `td_sign`, then applies one SGD train step with `bias`
/// and one with no bias from identical starting points.
pub fn bias_case(seed: u64, bias: BiasType, td_sign: f64) -> BiasCase {
    let mut rng = stream(seed, &[]);
    let state_dim = rng.gen_range(1..6);
    let actions = rng.gen_range(2..5);
    let hp = Hyperparameters {
        optimizer: OptimizerKind::Sgd,
        alpha_c: 10f64.powf(rng.gen_range(-3.5..-0.5)),
        k: rng.gen_range(0.0..0.95),
        gamma: rng.gen_range(0.0..=1.0),
        batch_size: 1,
        buffer_capacity: 4,
        mlp_width: rng.gen_range(2..12),
        hidden_layers: rng.gen_range(1..3),
        ..Default::default()
    };
    let spec = EnvSpec {
        state_dim,
        action_count: actions,
        max_steps: 10,
    };
    let mut agent = Agent::new(spec, &hp, &mut rng).unwrap();
    // decorrelate the target network from the online one
    for p in agent.target_net.params_mut() {
        *p += rng.gen_range(-0.1..0.1);
    }

    let state: Vec<f64> = (0..state_dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let next_state: Vec<f64> = (0..state_dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let action = rng.gen_range(0..actions);
    let terminal = rng.gen_bool(0.3);
    let mut t = Transition {
        state,
        action,
        reward: 0.0,
        next_state,
        terminal,
    };
    let bootstrap = compute_target(&t, &agent.target_net, hp.gamma).unwrap();
    let q = agent.q_net.forward(&t.state).unwrap()[action];
    let td = td_sign * rng.gen_range(0.05..2.0);
    t.reward = q - bootstrap + td;
    agent.buffer.push(t);

    let before = agent.q_net.params().to_vec();
    let mut plain = agent.clone();
    train_step(&mut plain, &hp, BiasType::None, &mut stream(seed, &[1])).unwrap();
    let mut biased = agent;
    train_step(&mut biased, &hp, bias, &mut stream(seed, &[1])).unwrap();
    BiasCase {
        k: hp.k,
        td,
        before,
        unbiased: plain.q_net.params().to_vec(),
        biased: biased.q_net.params().to_vec(),
    }
}

/// Forward pass written against the public weight/bias accessors only.
pub fn oracle_forward(net: &Mlp, input: &[f64]) -> Vec<f64> {
    let mut x = input.to_vec();
    for (l, spec) in net.layers().iter().enumerate() {
        let w = net.weights(l);
        let b = net.bias(l);
        let mut y = vec![0.0; spec.output_dim];
        for o in 0..spec.output_dim {
            let mut acc = b[o];
            for i in 0..spec.input_dim {
                acc += w[o * spec.input_dim + i] * x[i];
            }
            y[o] = match spec.activation {
                Activation::Relu => acc.max(0.0),
                Activation::Identity => acc,
            };
        }
        x = y;
    }
    x
}

pub fn oracle_loss(net: &Mlp, batch: &[Sample<'_>]) -> f64 {
    batch
        .iter()
        .map(|s| {
            let q = oracle_forward(net, s.input)[s.action];
            s.weight * (s.target - q).powi(2)
        })
        .sum::<f64>()
        / batch.len() as f64
}

/// Freshly initialized networks have zero biases, so a hidden layer whose
/// inputs are all zero sits exactly on the ReLU kink where finite
/// differences are undefined. Random biases move the check off it.
pub fn randomize_biases<R: Rng + ?Sized>(net: &mut Mlp, rng: &mut R) {
    for l in 0..net.layers().len() {
        for b in net.bias_mut(l) {
            *b = rng.gen_range(-0.5..0.5);
        }
    }
}
