use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Identity => z,
        }
    }

    #[inline]
    fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub input_dim: usize,
    pub output_dim: usize,
    pub activation: Activation,
}

impl LayerSpec {
    pub fn new(input_dim: usize, output_dim: usize, activation: Activation) -> Self {
        LayerSpec {
            input_dim,
            output_dim,
            activation,
        }
    }

    fn param_count(&self) -> usize {
        self.input_dim * self.output_dim + self.output_dim
    }
}

/// `input → width → … → width → outputs` with ReLU hidden layers and an
/// identity head.
pub fn mlp_specs(
    input: usize,
    width: usize,
    hidden_layers: usize,
    outputs: usize,
) -> Vec<LayerSpec> {
    let mut specs = Vec::with_capacity(hidden_layers + 1);
    let mut fan_in = input;
    for _ in 0..hidden_layers {
        specs.push(LayerSpec::new(fan_in, width, Activation::Relu));
        fan_in = width;
    }
    specs.push(LayerSpec::new(fan_in, outputs, Activation::Identity));
    specs
}

fn validate_chain(specs: &[LayerSpec]) -> Result<()> {
    let first = specs
        .first()
        .ok_or_else(|| Error::invalid("network needs at least one layer"))?;
    if first.input_dim == 0 {
        return Err(Error::invalid("layer dimensions must be at least 1"));
    }
    for pair in specs.windows(2) {
        if pair[0].output_dim != pair[1].input_dim {
            return Err(Error::DimensionMismatch {
                expected: pair[0].output_dim,
                got: pair[1].input_dim,
            });
        }
    }
    if specs.iter().any(|s| s.output_dim == 0) {
        return Err(Error::invalid("layer dimensions must be at least 1"));
    }
    if specs.last().map(|s| s.activation) != Some(Activation::Identity) {
        return Err(Error::invalid(
            "the output layer must use the identity activation",
        ));
    }
    Ok(())
}

/// Parameters of a fully connected network.
///
/// All coefficients live in one flat vector. Layer `l` occupies a contiguous
/// block: its `output_dim × input_dim` weight matrix in row-major order (row =
/// output unit) followed by its `output_dim` biases. [`Gradients`] and the
/// optimizer moments use the same layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    layers: Vec<LayerSpec>,
    params: Vec<f64>,
}

/// Gradient of a scalar loss, laid out like [`Mlp`]'s parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub values: Vec<f64>,
}

impl Gradients {
    pub fn zeros_like(net: &Mlp) -> Self {
        Gradients {
            values: vec![0.0; net.param_count()],
        }
    }

    pub fn scale(&mut self, factor: f64) {
        self.values.iter_mut().for_each(|g| *g *= factor);
    }
}

/// One minibatch row: the loss term is `weight · (target − Q(input)[action])²`.
#[derive(Debug, Clone, Copy)]
pub struct Sample<'a> {
    pub input: &'a [f64],
    pub action: usize,
    pub target: f64,
    pub weight: f64,
}

impl Mlp {
    /// All-zero network.
    pub fn zeros(layers: Vec<LayerSpec>) -> Result<Self> {
        validate_chain(&layers)?;
        let count = layers.iter().map(LayerSpec::param_count).sum();
        Ok(Mlp {
            layers,
            params: vec![0.0; count],
        })
    }

    /// Weights uniform in `±1/√fan_in`, biases zero.
    pub fn init<R: Rng + ?Sized>(layers: Vec<LayerSpec>, rng: &mut R) -> Result<Self> {
        let mut net = Mlp::zeros(layers)?;
        let mut offset = 0;
        for spec in &net.layers {
            let bound = 1.0 / (spec.input_dim as f64).sqrt();
            let n_w = spec.input_dim * spec.output_dim;
            for w in &mut net.params[offset..offset + n_w] {
                *w = rng.gen_range(-bound..=bound);
            }
            offset += spec.param_count();
        }
        Ok(net)
    }

    pub fn from_parts(layers: Vec<LayerSpec>, params: Vec<f64>) -> Result<Self> {
        let mut net = Mlp::zeros(layers)?;
        if params.len() != net.params.len() {
            return Err(Error::DimensionMismatch {
                expected: net.params.len(),
                got: params.len(),
            });
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("network parameters must be finite"));
        }
        net.params = params;
        Ok(net)
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].output_dim
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn same_shape(&self, other: &Mlp) -> bool {
        self.layers == other.layers
    }

    fn layer_offset(&self, layer: usize) -> usize {
        self.layers[..layer]
            .iter()
            .map(LayerSpec::param_count)
            .sum()
    }

    pub fn weights(&self, layer: usize) -> &[f64] {
        let off = self.layer_offset(layer);
        let s = self.layers[layer];
        &self.params[off..off + s.input_dim * s.output_dim]
    }

    pub fn weights_mut(&mut self, layer: usize) -> &mut [f64] {
        let off = self.layer_offset(layer);
        let s = self.layers[layer];
        &mut self.params[off..off + s.input_dim * s.output_dim]
    }

    pub fn bias(&self, layer: usize) -> &[f64] {
        let s = self.layers[layer];
        let off = self.layer_offset(layer) + s.input_dim * s.output_dim;
        &self.params[off..off + s.output_dim]
    }

    pub fn bias_mut(&mut self, layer: usize) -> &mut [f64] {
        let s = self.layers[layer];
        let off = self.layer_offset(layer) + s.input_dim * s.output_dim;
        &mut self.params[off..off + s.output_dim]
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        self.check_input(input)?;
        let mut x = input.to_vec();
        let mut offset = 0;
        for spec in &self.layers {
            let (w, rest) = self.params[offset..].split_at(spec.input_dim * spec.output_dim);
            let b = &rest[..spec.output_dim];
            x = affine(w, b, &x)
                .into_iter()
                .map(|z| spec.activation.apply(z))
                .collect();
            offset += spec.param_count();
        }
        Ok(x)
    }

    fn check_input(&self, input: &[f64]) -> Result<()> {
        if input.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: input.len(),
            });
        }
        Ok(())
    }

    fn check_sample(&self, s: &Sample<'_>) -> Result<()> {
        self.check_input(s.input)?;
        if s.action >= self.output_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.output_dim(),
                got: s.action,
            });
        }
        if !(s.weight >= 0.0) {
            return Err(Error::invalid("sample weights must be non-negative"));
        }
        Ok(())
    }

    /// Weighted mean squared error over the minibatch.
    pub fn loss(&self, batch: &[Sample<'_>]) -> Result<f64> {
        if batch.is_empty() {
            return Err(Error::invalid("minibatch is empty"));
        }
        let mut total = 0.0;
        for s in batch {
            self.check_sample(s)?;
            let q = self.forward(s.input)?[s.action];
            total += s.weight * (s.target - q).powi(2);
        }
        Ok(total / batch.len() as f64)
    }

    /// Exact gradient of [`Mlp::loss`] with respect to every parameter,
    /// together with the loss itself.
    pub fn backward(&self, batch: &[Sample<'_>]) -> Result<(Gradients, f64)> {
        if batch.is_empty() {
            return Err(Error::invalid("minibatch is empty"));
        }
        let n = batch.len() as f64;
        let offsets: Vec<usize> = (0..self.layers.len())
            .map(|l| self.layer_offset(l))
            .collect();
        let mut grads = Gradients::zeros_like(self);
        let mut loss = 0.0;

        // pre-activations per layer, index 0 is the input itself
        let mut pre: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len() + 1);
        let mut post: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len() + 1);

        for s in batch {
            self.check_sample(s)?;
            pre.clear();
            post.clear();
            post.push(s.input.to_vec());
            for (l, spec) in self.layers.iter().enumerate() {
                let off = offsets[l];
                let n_w = spec.input_dim * spec.output_dim;
                let w = &self.params[off..off + n_w];
                let b = &self.params[off + n_w..off + n_w + spec.output_dim];
                let z = affine(w, b, &post[l]);
                post.push(z.iter().map(|&v| spec.activation.apply(v)).collect());
                pre.push(z);
            }

            let q = post[self.layers.len()][s.action];
            let err = s.target - q;
            loss += s.weight * err * err;

            // dL/dQ for the chosen output only
            let mut delta = vec![0.0; self.output_dim()];
            delta[s.action] = -2.0 * s.weight * err / n;

            for l in (0..self.layers.len()).rev() {
                let spec = self.layers[l];
                // delta is dL/dz at this layer (output layer is identity)
                let off = offsets[l];
                let n_w = spec.input_dim * spec.output_dim;
                let input = &post[l];
                {
                    let (gw, gb) = grads.values[off..off + n_w + spec.output_dim].split_at_mut(n_w);
                    for (o, &d) in delta.iter().enumerate() {
                        if d == 0.0 {
                            continue;
                        }
                        gb[o] += d;
                        let row = &mut gw[o * spec.input_dim..(o + 1) * spec.input_dim];
                        for (g, &x) in row.iter_mut().zip(input) {
                            *g += d * x;
                        }
                    }
                }
                if l == 0 {
                    break;
                }
                let w = &self.params[off..off + n_w];
                let mut prev = vec![0.0; spec.input_dim];
                for (o, &d) in delta.iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    let row = &w[o * spec.input_dim..(o + 1) * spec.input_dim];
                    for (p, &wv) in prev.iter_mut().zip(row) {
                        *p += wv * d;
                    }
                }
                let below = self.layers[l - 1].activation;
                for (p, &z) in prev.iter_mut().zip(&pre[l - 1]) {
                    *p *= below.derivative(z);
                }
                delta = prev;
            }
        }
        Ok((grads, loss / n))
    }
}

#[inline]
fn affine(w: &[f64], b: &[f64], x: &[f64]) -> Vec<f64> {
    let cols = x.len();
    b.iter()
        .enumerate()
        .map(|(o, &bias)| {
            let row = &w[o * cols..(o + 1) * cols];
            bias + dot(row, x)
        })
        .collect()
}

/// Dot product with eight independent partial sums so the loop vectorizes.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let tail: f64 = ca
        .remainder()
        .iter()
        .zip(cb.remainder())
        .map(|(x, y)| x * y)
        .sum();
    for (x, y) in ca.zip(cb) {
        for i in 0..8 {
            acc[i] += x[i] * y[i];
        }
    }
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}

/// Central-difference estimate of the gradient of [`Mlp::loss`].
pub fn finite_difference_gradient(net: &Mlp, batch: &[Sample<'_>], h: f64) -> Result<Gradients> {
    if !(h > 0.0) {
        return Err(Error::invalid("finite-difference step must be positive"));
    }
    let mut probe = net.clone();
    let mut grads = Gradients::zeros_like(net);
    for i in 0..net.param_count() {
        let orig = net.params[i];
        probe.params[i] = orig + h;
        let up = probe.loss(batch)?;
        probe.params[i] = orig - h;
        let down = probe.loss(batch)?;
        probe.params[i] = orig;
        grads.values[i] = (up - down) / (2.0 * h);
    }
    Ok(grads)
}
