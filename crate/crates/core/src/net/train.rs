//! Training loop for the contact network: mini-batch SGD with momentum over
//! the characterization dataset, holding one full trial out as the test set.
//!
//! Determinism contract: a fixed `TrainConfig::seed` yields bit-identical
//! final weights. Batch gradients are accumulated in fixed 8-sample chunks
//! that are summed in chunk order, so sequential and parallel execution
//! agree exactly.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::model::{ChannelPressures, Dataset, LabeledSample};
use crate::net::mlp::{
    default_dims, Activation, Gradients, MlpModel, Normalization, Prediction,
};

/// Samples per gradient chunk; fixed so the summation tree never depends on
/// thread count.
const GRAD_CHUNK: usize = 8;

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// Weight of the squared force error against the two cross-entropies.
    pub lambda: f64,
    pub seed: u64,
    /// Trial index to hold out as the test set; `None` holds out the
    /// highest trial index present.
    pub holdout_trial: Option<usize>,
    pub dims: Vec<usize>,
    pub exec: ExecMode,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            momentum: 0.9,
            epochs: 200,
            batch_size: 64,
            lambda: 1.0,
            seed: 0,
            holdout_trial: None,
            dims: default_dims(),
            exec: ExecMode::default(),
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::InvalidInput("learning_rate must be > 0".into()));
        }
        if !(self.momentum.is_finite() && (0.0..1.0).contains(&self.momentum)) {
            return Err(Error::InvalidInput("momentum must be in [0, 1)".into()));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::InvalidInput(
                "epochs and batch_size must be positive".into(),
            ));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::InvalidInput("lambda must be >= 0".into()));
        }
        Ok(())
    }
}

/// Test-set quality of a model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub axial_accuracy: f64,
    pub radial_accuracy: f64,
    pub force_mae: f64,
}

/// One row of the metrics history CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train_loss: f64,
    pub metrics: Metrics,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: MlpModel,
    pub history: Vec<EpochMetrics>,
    pub final_metrics: Metrics,
    pub train_samples: usize,
    pub test_samples: usize,
}

pub const METRICS_CSV_HEADER: &str = "epoch,loss,axial_acc,radial_acc,force_mae";

pub fn history_to_csv(history: &[EpochMetrics]) -> String {
    let mut out = String::from(METRICS_CSV_HEADER);
    out.push('\n');
    for row in history {
        out.push_str(&format!(
            "{},{:.6},{:.6},{:.6},{:.6}\n",
            row.epoch,
            row.train_loss,
            row.metrics.axial_accuracy,
            row.metrics.radial_accuracy,
            row.metrics.force_mae
        ));
    }
    out
}

/// Split a dataset into train and held-out-trial test slices.
pub fn split_holdout(
    dataset: &Dataset,
    holdout_trial: Option<usize>,
) -> Result<(Vec<LabeledSample>, Vec<LabeledSample>)> {
    if dataset.samples.is_empty() {
        return Err(Error::InvalidInput("empty dataset".into()));
    }
    let holdout = match holdout_trial {
        Some(t) => t,
        None => dataset
            .samples
            .iter()
            .map(|s| s.trial)
            .max()
            .expect("non-empty"),
    };
    let mut train = Vec::new();
    let mut test = Vec::new();
    for s in &dataset.samples {
        if s.trial == holdout {
            test.push(*s);
        } else {
            train.push(*s);
        }
    }
    if test.is_empty() {
        return Err(Error::InvalidInput(format!(
            "holdout trial {holdout} has no samples"
        )));
    }
    if train.is_empty() {
        return Err(Error::InvalidInput(
            "no training samples left after holdout".into(),
        ));
    }
    Ok((train, test))
}

/// Batch inference; element i equals `model.forward` of input i.
pub fn forward_batch(
    model: &MlpModel,
    inputs: &[ChannelPressures],
    mode: ExecMode,
) -> Result<Vec<Prediction>> {
    if let Some(bad) = inputs.iter().find(|p| !p.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "non-finite pressure input {bad:?}"
        )));
    }
    Ok(exec::map_slice(mode, inputs, |p| {
        let mut scratch = model.scratch();
        model.forward_scratch(p, &mut scratch)
    }))
}

/// Accuracy and force error on labeled samples.
pub fn evaluate(model: &MlpModel, samples: &[LabeledSample], mode: ExecMode) -> Metrics {
    if samples.is_empty() {
        return Metrics {
            axial_accuracy: 0.0,
            radial_accuracy: 0.0,
            force_mae: 0.0,
        };
    }
    let per_sample = exec::map_slice(mode, samples, |s| {
        let mut scratch = model.scratch();
        let pred = model.forward_scratch(&s.pressures, &mut scratch);
        (
            (pred.axial_argmax() == s.contact.axial_pos) as u32,
            (pred.radial_argmax() == s.contact.radial_angle) as u32,
            (pred.force - s.contact.force).abs(),
        )
    });
    let n = samples.len() as f64;
    let (mut ax, mut ra, mut mae) = (0u32, 0u32, 0.0f64);
    for (a, r, e) in per_sample {
        ax += a;
        ra += r;
        mae += e;
    }
    Metrics {
        axial_accuracy: ax as f64 / n,
        radial_accuracy: ra as f64 / n,
        force_mae: mae / n,
    }
}

/// Train a fresh model on `dataset` with one trial held out.
pub fn train(dataset: &Dataset, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    let (train_set, test_set) = split_holdout(dataset, cfg.holdout_trial)?;

    let mut model = MlpModel::random(cfg.dims.clone(), Activation::Relu, cfg.seed)?;
    let inputs: Vec<ChannelPressures> = train_set.iter().map(|s| s.pressures).collect();
    model.norm = Normalization::fit(&inputs);

    let mut velocity = Gradients::zeroed(&model);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    // Dedicated stream for shuffling so init and shuffle draws never overlap.
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    shuffle_rng.set_stream(1);

    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut epoch_loss = 0.0;

        for batch in order.chunks(cfg.batch_size) {
            // Fixed-size chunks, combined in order: deterministic however
            // many workers run them.
            let bounds: Vec<(usize, usize)> = (0..batch.len())
                .step_by(GRAD_CHUNK)
                .map(|s| (s, (s + GRAD_CHUNK).min(batch.len())))
                .collect();
            let partials = exec::map_slice(cfg.exec, &bounds, |&(s, e)| {
                let mut scratch = model.scratch();
                let mut grads = Gradients::zeroed(&model);
                let mut loss_sum = 0.0;
                for &idx in &batch[s..e] {
                    let sample = &train_set[idx];
                    loss_sum += model.accumulate_gradients(
                        &sample.pressures,
                        &sample.contact,
                        cfg.lambda,
                        &mut scratch,
                        &mut grads,
                    );
                }
                (grads, loss_sum)
            });

            let mut grads = Gradients::zeroed(&model);
            let mut batch_loss = 0.0;
            for (g, l) in &partials {
                grads.add(g);
                batch_loss += l;
            }
            grads.scale(1.0 / batch.len() as f64);
            epoch_loss += batch_loss;

            for l in 0..model.layers.len() {
                let layer = &mut model.layers[l];
                for (w, (v, g)) in layer
                    .weights
                    .iter_mut()
                    .zip(velocity.d_weights[l].iter_mut().zip(&grads.d_weights[l]))
                {
                    *v = cfg.momentum * *v - cfg.learning_rate * g;
                    *w += *v;
                }
                for (b, (v, g)) in layer
                    .biases
                    .iter_mut()
                    .zip(velocity.d_biases[l].iter_mut().zip(&grads.d_biases[l]))
                {
                    *v = cfg.momentum * *v - cfg.learning_rate * g;
                    *b += *v;
                }
            }
        }

        let train_loss = epoch_loss / train_set.len() as f64;
        if !train_loss.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        let metrics = evaluate(&model, &test_set, cfg.exec);
        history.push(EpochMetrics {
            epoch,
            train_loss,
            metrics,
        });
    }

    let final_metrics = evaluate(&model, &test_set, cfg.exec);
    Ok(TrainOutcome {
        model,
        history,
        final_metrics,
        train_samples: train_set.len(),
        test_samples: test_set.len(),
    })
}

/// Wall-clock statistics of single-sample inference.
#[derive(Debug, Clone, Copy)]
pub struct LatencyStats {
    pub mean_ms: f64,
    pub std_ms: f64,
    pub samples: usize,
}

/// Time `n_samples` individual forward passes on one thread.
pub fn latency_bench(model: &MlpModel, n_samples: usize) -> Result<LatencyStats> {
    if n_samples == 0 {
        return Err(Error::InvalidInput("latency bench needs n_samples >= 1".into()));
    }
    let mut scratch = model.scratch();
    let probe = ChannelPressures::new([3.0, -1.0, 0.5, 2.0, -0.25, 1.5, 4.0]);
    // Warm-up pass so the first measurement is not a cold cache outlier.
    let mut sink = 0.0;
    for _ in 0..16 {
        sink += model.forward_scratch(&probe, &mut scratch).force;
    }
    let mut times_ms = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let mut input = probe;
        input.p[0] += (i % 17) as f64 * 0.01;
        let start = Instant::now();
        let pred = model.forward_scratch(&input, &mut scratch);
        times_ms.push(start.elapsed().as_secs_f64() * 1e3);
        sink += pred.force;
    }
    std::hint::black_box(sink);
    let n = times_ms.len() as f64;
    let mean = times_ms.iter().sum::<f64>() / n;
    let var = times_ms.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / n;
    Ok(LatencyStats {
        mean_ms: mean,
        std_ms: var.sqrt(),
        samples: n_samples,
    })
}
