//! Fully-connected network mapping the 7 instantaneous channel pressures to
//! contact axial position (5 classes), radial angle (6 classes) and force
//! magnitude (N). Plain dense layers, ReLU hidden activations, one softmax
//! per classification head, raw scalar for force.
//!
//! The production architecture is `[7, 128, 128, 12]`; smaller dims with the
//! same 12-wide head layout are allowed for gradient checking.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{ChannelPressures, ContactSpec, CHANNEL_COUNT};

pub const INPUT_DIM: usize = CHANNEL_COUNT;
pub const AXIAL_CLASSES: usize = 5;
pub const RADIAL_CLASSES: usize = 6;
pub const OUTPUT_DIM: usize = AXIAL_CLASSES + RADIAL_CLASSES + 1;

/// The paper architecture: two hidden layers of 128.
pub fn default_dims() -> Vec<usize> {
    vec![INPUT_DIM, 128, 128, OUTPUT_DIM]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    /// Pass-through hidden activation; used by tests that compare against
    /// closed-form linear gradients.
    Identity,
}

impl Activation {
    pub(crate) fn code(self) -> u8 {
        match self {
            Activation::Relu => 0,
            Activation::Identity => 1,
        }
    }

    pub(crate) fn from_code(code: u8) -> Result<Self> {
        match code {
            0 => Ok(Activation::Relu),
            1 => Ok(Activation::Identity),
            other => Err(Error::Corrupt(format!("unknown activation code {other}"))),
        }
    }

    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Identity => z,
        }
    }

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

/// One dense layer; weights row-major `[out][in]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Layer {
    fn zeroed(in_dim: usize, out_dim: usize) -> Layer {
        Layer {
            in_dim,
            out_dim,
            weights: vec![0.0; in_dim * out_dim],
            biases: vec![0.0; out_dim],
        }
    }

    fn forward_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.in_dim);
        debug_assert_eq!(out.len(), self.out_dim);
        for (o, slot) in out.iter_mut().enumerate() {
            let row = &self.weights[o * self.in_dim..(o + 1) * self.in_dim];
            let mut acc = self.biases[o];
            for (w, xi) in row.iter().zip(x) {
                acc += w * xi;
            }
            *slot = acc;
        }
    }
}

/// Per-channel input standardization, learned from the training set and
/// carried with the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalization {
    pub mean: [f64; INPUT_DIM],
    pub std: [f64; INPUT_DIM],
}

impl Normalization {
    pub fn identity() -> Self {
        Normalization {
            mean: [0.0; INPUT_DIM],
            std: [1.0; INPUT_DIM],
        }
    }

    pub fn fit(samples: &[ChannelPressures]) -> Self {
        let n = samples.len().max(1) as f64;
        let mut mean = [0.0; INPUT_DIM];
        for s in samples {
            for i in 0..INPUT_DIM {
                mean[i] += s.p[i];
            }
        }
        for m in &mut mean {
            *m /= n;
        }
        let mut var = [0.0; INPUT_DIM];
        for s in samples {
            for i in 0..INPUT_DIM {
                var[i] += (s.p[i] - mean[i]).powi(2);
            }
        }
        let mut std = [0.0; INPUT_DIM];
        for i in 0..INPUT_DIM {
            std[i] = (var[i] / n).sqrt().max(1e-9);
        }
        Normalization { mean, std }
    }

    pub fn apply(&self, p: &ChannelPressures) -> [f64; INPUT_DIM] {
        let mut x = [0.0; INPUT_DIM];
        for i in 0..INPUT_DIM {
            x[i] = (p.p[i] - self.mean[i]) / self.std[i];
        }
        x
    }
}

/// Head probabilities and force output of one forward pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub axial_probs: [f64; AXIAL_CLASSES],
    pub radial_probs: [f64; RADIAL_CLASSES],
    pub force: f64,
}

impl Prediction {
    pub fn axial_argmax(&self) -> usize {
        argmax(&self.axial_probs)
    }

    pub fn radial_argmax(&self) -> usize {
        argmax(&self.radial_probs)
    }
}

/// First index of the maximum (deterministic tie-break).
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn softmax_into(logits: &[f64], out: &mut [f64]) {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (o, &z) in out.iter_mut().zip(logits) {
        let e = (z - max).exp();
        *o = e;
        sum += e;
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
}

/// log(softmax(logits)[idx]), computed stably.
fn log_softmax_at(logits: &[f64], idx: usize) -> f64 {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse: f64 = logits.iter().map(|&z| (z - max).exp()).sum::<f64>().ln() + max;
    logits[idx] - lse
}

/// Combined training objective: cross-entropy on both classification heads
/// plus `lambda`-weighted squared error on force.
pub fn loss(pred: &Prediction, label: &ContactSpec, lambda: f64) -> f64 {
    let ce_axial = -pred.axial_probs[label.axial_pos].max(f64::MIN_POSITIVE).ln();
    let ce_radial = -pred.radial_probs[label.radial_angle].max(f64::MIN_POSITIVE).ln();
    let err = pred.force - label.force;
    ce_axial + ce_radial + lambda * err * err
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub dims: Vec<usize>,
    pub layers: Vec<Layer>,
    pub activation: Activation,
    pub norm: Normalization,
}

/// Reusable forward/backward buffers for one worker.
#[derive(Debug, Clone)]
pub struct Scratch {
    /// acts[0] is the normalized input; acts[l] the output of layer l.
    acts: Vec<Vec<f64>>,
    /// Pre-activation values per layer.
    zs: Vec<Vec<f64>>,
    /// Two swing buffers for backprop deltas.
    delta_a: Vec<f64>,
    delta_b: Vec<f64>,
}

/// Parameter gradients, same shapes as the model layers.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub d_weights: Vec<Vec<f64>>,
    pub d_biases: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeroed(model: &MlpModel) -> Gradients {
        Gradients {
            d_weights: model.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            d_biases: model.layers.iter().map(|l| vec![0.0; l.biases.len()]).collect(),
        }
    }

    pub fn add(&mut self, other: &Gradients) {
        for (a, b) in self.d_weights.iter_mut().zip(&other.d_weights) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        for (a, b) in self.d_biases.iter_mut().zip(&other.d_biases) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, k: f64) {
        for a in &mut self.d_weights {
            for x in a {
                *x *= k;
            }
        }
        for a in &mut self.d_biases {
            for x in a {
                *x *= k;
            }
        }
    }
}

impl MlpModel {
    /// All-zero parameters: every head uniform, force 0.
    pub fn zeroed(dims: Vec<usize>, activation: Activation) -> Result<MlpModel> {
        Self::validate_dims(&dims)?;
        let layers = dims
            .windows(2)
            .map(|w| Layer::zeroed(w[0], w[1]))
            .collect();
        Ok(MlpModel {
            dims,
            layers,
            activation,
            norm: Normalization::identity(),
        })
    }

    /// He-style N(0, sqrt(2 / fan_in)) weight init, zero biases.
    pub fn random(dims: Vec<usize>, activation: Activation, seed: u64) -> Result<MlpModel> {
        let mut model = Self::zeroed(dims, activation)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for layer in &mut model.layers {
            let scale = (2.0 / layer.in_dim as f64).sqrt();
            for w in &mut layer.weights {
                *w = gaussian(&mut rng) * scale;
            }
        }
        Ok(model)
    }

    fn validate_dims(dims: &[usize]) -> Result<()> {
        if dims.len() < 2 {
            return Err(Error::InvalidInput("model needs at least one layer".into()));
        }
        if dims[0] != INPUT_DIM {
            return Err(Error::InvalidInput(format!(
                "input dim must be {INPUT_DIM}, got {}",
                dims[0]
            )));
        }
        if *dims.last().unwrap() != OUTPUT_DIM {
            return Err(Error::InvalidInput(format!(
                "output dim must be {OUTPUT_DIM}, got {}",
                dims.last().unwrap()
            )));
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidInput("zero-width layer".into()));
        }
        Ok(())
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().all(|l| {
            l.weights.iter().all(|w| w.is_finite()) && l.biases.iter().all(|b| b.is_finite())
        })
    }

    pub fn scratch(&self) -> Scratch {
        let max_dim = *self.dims.iter().max().unwrap();
        Scratch {
            acts: self.dims.iter().map(|&d| vec![0.0; d]).collect(),
            zs: self.dims[1..].iter().map(|&d| vec![0.0; d]).collect(),
            delta_a: vec![0.0; max_dim],
            delta_b: vec![0.0; max_dim],
        }
    }

    /// Run the network on raw pressures.
    pub fn forward(&self, p: &ChannelPressures) -> Result<Prediction> {
        if !p.is_finite() {
            return Err(Error::InvalidInput("non-finite pressure input".into()));
        }
        let mut scratch = self.scratch();
        Ok(self.forward_scratch(p, &mut scratch))
    }

    /// Forward pass into caller-owned buffers. Hot path: no allocation.
    pub fn forward_scratch(&self, p: &ChannelPressures, scratch: &mut Scratch) -> Prediction {
        let x = self.norm.apply(p);
        scratch.acts[0].copy_from_slice(&x);
        let n_layers = self.layers.len();
        for (l, layer) in self.layers.iter().enumerate() {
            let (head, tail) = scratch.acts.split_at_mut(l + 1);
            layer.forward_into(&head[l], &mut scratch.zs[l]);
            let is_output = l == n_layers - 1;
            for (a, &z) in tail[0].iter_mut().zip(&scratch.zs[l]) {
                *a = if is_output { z } else { self.activation.apply(z) };
            }
        }
        let logits = scratch.acts.last().unwrap();
        let mut pred = Prediction {
            axial_probs: [0.0; AXIAL_CLASSES],
            radial_probs: [0.0; RADIAL_CLASSES],
            force: logits[OUTPUT_DIM - 1],
        };
        softmax_into(&logits[..AXIAL_CLASSES], &mut pred.axial_probs);
        softmax_into(
            &logits[AXIAL_CLASSES..AXIAL_CLASSES + RADIAL_CLASSES],
            &mut pred.radial_probs,
        );
        pred
    }

    /// Forward + backward for one labeled sample. Accumulates parameter
    /// gradients into `grads` and returns the sample loss.
    pub fn accumulate_gradients(
        &self,
        p: &ChannelPressures,
        label: &ContactSpec,
        lambda: f64,
        scratch: &mut Scratch,
        grads: &mut Gradients,
    ) -> f64 {
        let pred = self.forward_scratch(p, scratch);
        let logits = scratch.acts.last().unwrap();

        // Loss via log-softmax for numerical honesty at extreme logits.
        let err = pred.force - label.force;
        let sample_loss = -log_softmax_at(&logits[..AXIAL_CLASSES], label.axial_pos)
            - log_softmax_at(
                &logits[AXIAL_CLASSES..AXIAL_CLASSES + RADIAL_CLASSES],
                label.radial_angle,
            )
            + lambda * err * err;

        // d loss / d logits.
        let delta = &mut scratch.delta_a;
        for i in 0..AXIAL_CLASSES {
            delta[i] = pred.axial_probs[i] - if i == label.axial_pos { 1.0 } else { 0.0 };
        }
        for i in 0..RADIAL_CLASSES {
            delta[AXIAL_CLASSES + i] =
                pred.radial_probs[i] - if i == label.radial_angle { 1.0 } else { 0.0 };
        }
        delta[OUTPUT_DIM - 1] = 2.0 * lambda * err;

        // Walk layers backwards; delta holds d loss / d z for layer l.
        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let input = &scratch.acts[l];
            let dw = &mut grads.d_weights[l];
            let db = &mut grads.d_biases[l];
            for o in 0..layer.out_dim {
                let d = scratch.delta_a[o];
                db[o] += d;
                let row = &mut dw[o * layer.in_dim..(o + 1) * layer.in_dim];
                for (slot, xi) in row.iter_mut().zip(input) {
                    *slot += d * xi;
                }
            }
            if l > 0 {
                // Propagate to the previous layer's pre-activation, walking
                // weight rows contiguously.
                let prev = &mut scratch.delta_b;
                prev[..layer.in_dim].fill(0.0);
                for o in 0..layer.out_dim {
                    let d = scratch.delta_a[o];
                    if d != 0.0 {
                        let row = &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
                        for (p, w) in prev[..layer.in_dim].iter_mut().zip(row) {
                            *p += w * d;
                        }
                    }
                }
                for (p, &z) in prev[..layer.in_dim].iter_mut().zip(&scratch.zs[l - 1]) {
                    *p *= self.activation.derivative(z);
                }
                std::mem::swap(&mut scratch.delta_a, &mut scratch.delta_b);
            }
        }
        sample_loss
    }

    /// Full loss of one sample (forward only).
    pub fn sample_loss(&self, p: &ChannelPressures, label: &ContactSpec, lambda: f64) -> f64 {
        let mut scratch = self.scratch();
        let pred = self.forward_scratch(p, &mut scratch);
        let logits = scratch.acts.last().unwrap();
        let err = pred.force - label.force;
        -log_softmax_at(&logits[..AXIAL_CLASSES], label.axial_pos)
            - log_softmax_at(
                &logits[AXIAL_CLASSES..AXIAL_CLASSES + RADIAL_CLASSES],
                label.radial_angle,
            )
            + lambda * err * err
    }
}

fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    use rand_distr::StandardNormal;
    rng.sample(StandardNormal)
}

/// Compare analytic gradients against central finite differences on every
/// parameter; returns the maximum relative error. Meant for downsized models
/// fed order-unity (normalized) inputs, where f64 difference quotients are
/// well conditioned.
pub fn grad_check(model: &MlpModel, p: &ChannelPressures, label: &ContactSpec, lambda: f64) -> f64 {
    const H: f64 = 1e-5;
    let mut scratch = model.scratch();
    let mut grads = Gradients::zeroed(model);
    model.accumulate_gradients(p, label, lambda, &mut scratch, &mut grads);

    let mut worst: f64 = 0.0;
    let mut probe = model.clone();
    for l in 0..model.layers.len() {
        for w_idx in 0..model.layers[l].weights.len() {
            let orig = model.layers[l].weights[w_idx];
            probe.layers[l].weights[w_idx] = orig + H;
            let plus = probe.sample_loss(p, label, lambda);
            probe.layers[l].weights[w_idx] = orig - H;
            let minus = probe.sample_loss(p, label, lambda);
            probe.layers[l].weights[w_idx] = orig;
            let numeric = (plus - minus) / (2.0 * H);
            let analytic = grads.d_weights[l][w_idx];
            worst = worst.max(relative_error(analytic, numeric));
        }
        for b_idx in 0..model.layers[l].biases.len() {
            let orig = model.layers[l].biases[b_idx];
            probe.layers[l].biases[b_idx] = orig + H;
            let plus = probe.sample_loss(p, label, lambda);
            probe.layers[l].biases[b_idx] = orig - H;
            let minus = probe.sample_loss(p, label, lambda);
            probe.layers[l].biases[b_idx] = orig;
            let numeric = (plus - minus) / (2.0 * H);
            let analytic = grads.d_biases[l][b_idx];
            worst = worst.max(relative_error(analytic, numeric));
        }
    }
    worst
}

fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ContactSpec;
    use rand::Rng;

    fn sample_pressures(seed: u64) -> ChannelPressures {
        scaled_pressures(seed, 30.0)
    }

    /// Order-unity inputs for gradient checks.
    fn unit_pressures(seed: u64) -> ChannelPressures {
        scaled_pressures(seed, 2.0)
    }

    fn scaled_pressures(seed: u64, scale: f64) -> ChannelPressures {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = [0.0; 7];
        for v in &mut p {
            *v = rng.random_range(-scale..scale);
        }
        ChannelPressures::new(p)
    }

    #[test]
    fn zero_model_is_uniform() {
        let model = MlpModel::zeroed(default_dims(), Activation::Relu).unwrap();
        let pred = model.forward(&sample_pressures(1)).unwrap();
        for p in pred.axial_probs {
            assert!((p - 0.2).abs() < 1e-12);
        }
        for p in pred.radial_probs {
            assert!((p - 1.0 / 6.0).abs() < 1e-12);
        }
        assert_eq!(pred.force, 0.0);
    }

    #[test]
    fn probabilities_sum_to_one() {
        let model = MlpModel::random(default_dims(), Activation::Relu, 99).unwrap();
        for seed in 0..20 {
            let pred = model.forward(&sample_pressures(seed)).unwrap();
            let sa: f64 = pred.axial_probs.iter().sum();
            let sr: f64 = pred.radial_probs.iter().sum();
            assert!((sa - 1.0).abs() < 1e-9);
            assert!((sr - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_non_finite_input() {
        let model = MlpModel::zeroed(default_dims(), Activation::Relu).unwrap();
        let mut p = [0.0; 7];
        p[0] = f64::NAN;
        assert!(model.forward(&ChannelPressures::new(p)).is_err());
    }

    #[test]
    fn loss_analytic_values() {
        // Perfect prediction: zero loss.
        let mut pred = Prediction {
            axial_probs: [0.0; 5],
            radial_probs: [0.0; 6],
            force: 3.0,
        };
        pred.axial_probs[2] = 1.0;
        pred.radial_probs[4] = 1.0;
        let label = ContactSpec::new(2, 4, 3.0).unwrap();
        assert!(loss(&pred, &label, 1.0).abs() < 1e-12);

        // Uniform prediction: ln 5 + ln 6.
        let uniform = Prediction {
            axial_probs: [0.2; 5],
            radial_probs: [1.0 / 6.0; 6],
            force: 3.0,
        };
        let expect = 5.0_f64.ln() + 6.0_f64.ln();
        assert!((loss(&uniform, &label, 1.0) - expect).abs() < 1e-12);
        assert!((expect - 3.401).abs() < 1e-3);

        // 1 N force error with perfect classes: loss 1.
        pred.force = 4.0;
        assert!((loss(&pred, &label, 1.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn grad_check_small_relu_model() {
        let model = MlpModel::random(vec![7, 8, 8, 12], Activation::Relu, 1234).unwrap();
        let label = ContactSpec::new(1, 3, 2.0).unwrap();
        let err = grad_check(&model, &unit_pressures(7), &label, 1.0);
        assert!(err < 1e-4, "max relative gradient error {err}");
    }

    #[test]
    fn grad_check_zero_model_hidden_grads_vanish() {
        // Zero weights and zero input: hidden activations are all zero, so
        // every hidden-layer weight gradient must be exactly zero.
        let model = MlpModel::zeroed(vec![7, 8, 8, 12], Activation::Relu).unwrap();
        let label = ContactSpec::new(0, 0, 0.0).unwrap();
        let p = ChannelPressures::default();
        let mut scratch = model.scratch();
        let mut grads = Gradients::zeroed(&model);
        model.accumulate_gradients(&p, &label, 1.0, &mut scratch, &mut grads);
        for l in 0..2 {
            assert!(grads.d_weights[l].iter().all(|&g| g == 0.0), "layer {l}");
        }
    }

    #[test]
    fn linear_model_matches_closed_form_gradient() {
        // Single linear layer: the analytic gradient must equal the textbook
        // softmax-regression / least-squares expressions computed by hand.
        let model = MlpModel::random(vec![7, 12], Activation::Identity, 5).unwrap();
        let p = sample_pressures(3);
        let label = ContactSpec::new(4, 1, 1.5).unwrap();
        let lambda = 0.7;

        let mut scratch = model.scratch();
        let mut grads = Gradients::zeroed(&model);
        model.accumulate_gradients(&p, &label, lambda, &mut scratch, &mut grads);

        // Closed form, written out independently of the backward pass.
        let x = model.norm.apply(&p);
        let layer = &model.layers[0];
        let mut logits = [0.0; 12];
        for o in 0..12 {
            logits[o] = layer.biases[o];
            for i in 0..7 {
                logits[o] += layer.weights[o * 7 + i] * x[i];
            }
        }
        let mut pa = [0.0; 5];
        let mut pr = [0.0; 6];
        softmax_into(&logits[..5], &mut pa);
        softmax_into(&logits[5..11], &mut pr);
        let mut dz = [0.0; 12];
        for i in 0..5 {
            dz[i] = pa[i] - if i == label.axial_pos { 1.0 } else { 0.0 };
        }
        for i in 0..6 {
            dz[5 + i] = pr[i] - if i == label.radial_angle { 1.0 } else { 0.0 };
        }
        dz[11] = 2.0 * lambda * (logits[11] - label.force);

        for o in 0..12 {
            assert!((grads.d_biases[0][o] - dz[o]).abs() < 1e-12);
            for i in 0..7 {
                let expect = dz[o] * x[i];
                assert!((grads.d_weights[0][o * 7 + i] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn scratch_forward_matches_public_forward() {
        let model = MlpModel::random(default_dims(), Activation::Relu, 42).unwrap();
        let mut scratch = model.scratch();
        for seed in 0..10 {
            let p = sample_pressures(seed);
            let a = model.forward(&p).unwrap();
            let b = model.forward_scratch(&p, &mut scratch);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn param_count_of_default_architecture() {
        let model = MlpModel::zeroed(default_dims(), Activation::Relu).unwrap();
        assert_eq!(model.param_count(), 7 * 128 + 128 + 128 * 128 + 128 + 128 * 12 + 12);
    }

    #[test]
    fn dims_are_validated() {
        assert!(MlpModel::zeroed(vec![7], Activation::Relu).is_err());
        assert!(MlpModel::zeroed(vec![6, 12], Activation::Relu).is_err());
        assert!(MlpModel::zeroed(vec![7, 11], Activation::Relu).is_err());
        assert!(MlpModel::zeroed(vec![7, 0, 12], Activation::Relu).is_err());
    }
}
