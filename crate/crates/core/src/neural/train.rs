//! Training loops for regressors and the feasibility classifier.

use super::{sigmoid, softplus, AdamState, Aux, FeedforwardNet, NetConfig, NeuralError};
use crate::rng::derive_stream;
use ndarray::{Array1, Array2, ArrayView1, Axis};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

/// Optimizer and schedule settings shared by every trainer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainHyper {
    pub lr: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// Fraction of the data held out for the final metric.
    pub holdout_frac: f64,
}

impl Default for TrainHyper {
    fn default() -> Self {
        TrainHyper {
            lr: 1e-3,
            batch_size: 256,
            epochs: 200,
            holdout_frac: 0.1,
        }
    }
}

/// Training record: per-epoch loss, the held-out metric (R² or accuracy),
/// the seed, and the hyperparameters that produced the model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainReport {
    pub epoch_loss: Vec<f64>,
    pub final_metric: f64,
    pub seed: u64,
    pub hyper: TrainHyper,
    /// Flags raised during training, e.g. a non-decreasing loss window.
    pub warnings: Vec<String>,
}

impl TrainReport {
    fn new(seed: u64, hyper: TrainHyper) -> Self {
        TrainReport {
            epoch_loss: Vec::new(),
            final_metric: f64::NAN,
            seed,
            hyper,
            warnings: Vec::new(),
        }
    }

    /// Flag any 10-epoch window where the training loss failed to decrease.
    fn check_loss_trend(&mut self) {
        for e in 10..self.epoch_loss.len() {
            if self.epoch_loss[e] > self.epoch_loss[e - 10] {
                self.warnings.push(format!(
                    "training loss increased over epochs {}..{} ({:.6} -> {:.6})",
                    e - 10,
                    e,
                    self.epoch_loss[e - 10],
                    self.epoch_loss[e]
                ));
            }
        }
    }
}

/// Coefficient of determination `1 − SS_res/SS_tot`.
pub fn r_squared(predicted: ArrayView1<f64>, actual: ArrayView1<f64>) -> f64 {
    let mean = actual.mean().expect("non-empty");
    let ss_tot: f64 = actual.iter().map(|&a| (a - mean) * (a - mean)).sum();
    let ss_res: f64 = predicted
        .iter()
        .zip(actual.iter())
        .map(|(&p, &a)| (a - p) * (a - p))
        .sum();
    1.0 - ss_res / ss_tot
}

/// Fraction of correct hard predictions from logits.
pub fn accuracy(logits: ArrayView1<f64>, labels: &[u8]) -> f64 {
    let correct = logits
        .iter()
        .zip(labels.iter())
        .filter(|(&z, &y)| (z > 0.0) == (y != 0))
        .count();
    correct as f64 / labels.len() as f64
}

/// Deterministic train/holdout split of `n` indices.
fn split_indices(n: usize, holdout_frac: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = derive_stream(seed, "train.split", 0);
    idx.shuffle(&mut rng);
    let n_holdout = ((n as f64) * holdout_frac).round() as usize;
    let holdout = idx[..n_holdout].to_vec();
    let train = idx[n_holdout..].to_vec();
    (train, holdout)
}

fn gather_rows(data: &Array2<f64>, idx: &[usize]) -> Array2<f64> {
    let mut out = Array2::zeros((idx.len(), data.ncols()));
    for (r, &i) in idx.iter().enumerate() {
        out.row_mut(r).assign(&data.row(i));
    }
    out
}

/// MSE-train a 4×256 residual MLP mapping normalized design vectors to one
/// scalar metric; reports held-out R².
pub fn train_regressor(
    inputs: &Array2<f64>,
    targets: ArrayView1<f64>,
    hyper: &TrainHyper,
    seed: u64,
) -> Result<(FeedforwardNet, TrainReport), NeuralError> {
    let n = inputs.nrows();
    if n != targets.len() {
        return Err(NeuralError::DimensionMismatch {
            what: "regression targets",
            expected: n,
            got: targets.len(),
        });
    }
    if n < 20 {
        return Err(NeuralError::NotEnoughData(format!("{n} rows")));
    }
    let (train_idx, holdout_idx) = split_indices(n, hyper.holdout_frac, seed);
    let x_train = gather_rows(inputs, &train_idx);
    let y_train = Array1::from_iter(train_idx.iter().map(|&i| targets[i]));
    let x_hold = gather_rows(inputs, &holdout_idx);
    let y_hold = Array1::from_iter(holdout_idx.iter().map(|&i| targets[i]));

    let mut net = FeedforwardNet::init(NetConfig::residual_mlp(inputs.ncols(), 1), seed)?;
    // Start at the train-set mean so the first epochs fit structure, not DC.
    net.biases.last_mut().unwrap()[0] = y_train.mean().unwrap_or(0.0);

    let mut adam = AdamState::new(&net, hyper.lr);
    let mut report = TrainReport::new(seed, *hyper);
    let n_train = x_train.nrows();
    let mut order: Vec<usize> = (0..n_train).collect();
    for epoch in 0..hyper.epochs {
        let mut rng = derive_stream(seed, "train.epoch", epoch as u64);
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut batches = 0.0;
        for chunk in order.chunks(hyper.batch_size) {
            let xb = gather_rows(&x_train, chunk);
            let yb = Array1::from_iter(chunk.iter().map(|&i| y_train[i]));
            let (out, cache) = net.forward_cached(&xb, &Aux::none())?;
            let m = chunk.len() as f64;
            let resid = &out.column(0).to_owned() - &yb;
            let loss = resid.iter().map(|r| r * r).sum::<f64>() / m;
            let d_out = resid
                .mapv(|r| 2.0 * r / m)
                .into_shape_with_order((chunk.len(), 1))
                .expect("column");
            let (grads, _) = net.backward(&cache, &d_out);
            adam.step(&mut net, &grads);
            epoch_loss += loss;
            batches += 1.0;
        }
        report.epoch_loss.push(epoch_loss / batches);
    }
    let pred = net.forward_batch(&x_hold, &Aux::none())?;
    report.final_metric = r_squared(pred.column(0), y_hold.view());
    report.check_loss_trend();
    Ok((net, report))
}

/// Binary-cross-entropy train a feasibility classifier (logit head);
/// reports held-out accuracy. `labels[i] = 1` marks the feasible class.
pub fn train_classifier(
    inputs: &Array2<f64>,
    labels: &[u8],
    hyper: &TrainHyper,
    seed: u64,
) -> Result<(FeedforwardNet, TrainReport), NeuralError> {
    let n = inputs.nrows();
    if n != labels.len() {
        return Err(NeuralError::DimensionMismatch {
            what: "class labels",
            expected: n,
            got: labels.len(),
        });
    }
    if n < 20 {
        return Err(NeuralError::NotEnoughData(format!("{n} rows")));
    }
    let positives = labels.iter().filter(|&&y| y != 0).count();
    if positives == 0 || positives == n {
        return Err(NeuralError::SingleClassData);
    }
    let (train_idx, holdout_idx) = split_indices(n, hyper.holdout_frac, seed);
    let x_train = gather_rows(inputs, &train_idx);
    let y_train: Vec<u8> = train_idx.iter().map(|&i| labels[i]).collect();
    let x_hold = gather_rows(inputs, &holdout_idx);
    let y_hold: Vec<u8> = holdout_idx.iter().map(|&i| labels[i]).collect();

    let mut net = FeedforwardNet::init(NetConfig::residual_mlp(inputs.ncols(), 1), seed)?;
    let mut adam = AdamState::new(&net, hyper.lr);
    let mut report = TrainReport::new(seed, *hyper);
    let n_train = x_train.nrows();
    let mut order: Vec<usize> = (0..n_train).collect();
    for epoch in 0..hyper.epochs {
        let mut rng = derive_stream(seed, "train.epoch", epoch as u64);
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut batches = 0.0;
        for chunk in order.chunks(hyper.batch_size) {
            let xb = gather_rows(&x_train, chunk);
            let (out, cache) = net.forward_cached(&xb, &Aux::none())?;
            let m = chunk.len() as f64;
            let mut loss = 0.0;
            let mut d_out = Array2::zeros(out.dim());
            for (r, &i) in chunk.iter().enumerate() {
                let z = out[[r, 0]];
                let y = f64::from(y_train[i]);
                // BCE with logits: softplus(z) − y·z.
                loss += softplus(z) - y * z;
                d_out[[r, 0]] = (sigmoid(z) - y) / m;
            }
            let (grads, _) = net.backward(&cache, &d_out);
            adam.step(&mut net, &grads);
            epoch_loss += loss / m;
            batches += 1.0;
        }
        report.epoch_loss.push(epoch_loss / batches);
    }
    let logits = net.forward_batch(&x_hold, &Aux::none())?;
    report.final_metric = accuracy(logits.index_axis(Axis(1), 0), &y_hold);
    report.check_loss_trend();
    Ok((net, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_stream;
    use rand::Rng;

    #[test]
    fn r_squared_matches_two_pass_reference() {
        let mut rng = derive_stream(1, "test.r2", 0);
        let actual = Array1::from_shape_fn(200, |_| rng.random::<f64>() * 3.0);
        let predicted = actual.mapv(|a| a + 0.1 * (rng.random::<f64>() - 0.5));
        let mine = r_squared(predicted.view(), actual.view());
        // Independent two-pass reference.
        let mean: f64 = actual.iter().sum::<f64>() / actual.len() as f64;
        let mut ss_tot = 0.0;
        let mut ss_res = 0.0;
        for i in 0..actual.len() {
            ss_tot += (actual[i] - mean).powi(2);
            ss_res += (actual[i] - predicted[i]).powi(2);
        }
        let reference = 1.0 - ss_res / ss_tot;
        assert!((mine - reference).abs() < 1e-12);
        assert!(mine > 0.9);
        // Predicting the mean gives R² = 0.
        let flat = Array1::from_elem(200, mean);
        assert!(r_squared(flat.view(), actual.view()).abs() < 1e-9);
    }

    #[test]
    fn regressor_learns_a_smooth_function() {
        let mut rng = derive_stream(2, "test.reg", 0);
        let n = 600;
        let x = Array2::from_shape_fn((n, 3), |_| rng.random::<f64>() * 2.0 - 1.0);
        let y = Array1::from_shape_fn(n, |i| {
            let r = x.row(i);
            (2.0 * r[0]).sin() + r[1] * r[2]
        });
        let hyper = TrainHyper {
            epochs: 120,
            batch_size: 64,
            ..Default::default()
        };
        let (_, report) = train_regressor(&x, y.view(), &hyper, 11).unwrap();
        assert!(report.final_metric > 0.9, "R² = {}", report.final_metric);
        assert!(report.epoch_loss.last().unwrap() < &report.epoch_loss[0]);
    }

    #[test]
    fn classifier_learns_a_separable_problem_and_rejects_single_class() {
        let mut rng = derive_stream(3, "test.cls", 0);
        let n = 600;
        let x = Array2::from_shape_fn((n, 2), |_| rng.random::<f64>() * 2.0 - 1.0);
        let labels: Vec<u8> = (0..n)
            .map(|i| u8::from(x[[i, 0]] + 0.3 * x[[i, 1]] > 0.1))
            .collect();
        let hyper = TrainHyper {
            epochs: 80,
            batch_size: 64,
            ..Default::default()
        };
        let (net, report) = train_classifier(&x, &labels, &hyper, 4).unwrap();
        assert!(report.final_metric > 0.9, "acc = {}", report.final_metric);
        // Probabilities stay strictly inside (0, 1).
        let logits = net.forward_batch(&x, &Aux::none()).unwrap();
        for &z in logits.iter() {
            let p = crate::neural::probability_from_logit(z);
            assert!(p > 0.0 && p < 1.0);
        }
        let ones = vec![1u8; n];
        assert!(matches!(
            train_classifier(&x, &ones, &hyper, 4),
            Err(NeuralError::SingleClassData)
        ));
    }

    #[test]
    fn training_is_reproducible() {
        let mut rng = derive_stream(4, "test.rep", 0);
        let x = Array2::from_shape_fn((120, 2), |_| rng.random::<f64>());
        let y = Array1::from_shape_fn(120, |i| x[[i, 0]] - x[[i, 1]]);
        let hyper = TrainHyper {
            epochs: 10,
            batch_size: 32,
            ..Default::default()
        };
        let (net_a, rep_a) = train_regressor(&x, y.view(), &hyper, 5).unwrap();
        let (net_b, rep_b) = train_regressor(&x, y.view(), &hyper, 5).unwrap();
        assert_eq!(net_a, net_b);
        assert_eq!(rep_a.epoch_loss, rep_b.epoch_loss);
    }

    #[test]
    fn label_shuffled_classifier_is_chance_level() {
        let mut rng = derive_stream(6, "test.shuf", 0);
        let n = 2000;
        let x = Array2::from_shape_fn((n, 4), |_| rng.random::<f64>() * 2.0 - 1.0);
        // Labels independent of inputs.
        let labels: Vec<u8> = (0..n).map(|_| u8::from(rng.random::<f64>() > 0.5)).collect();
        let hyper = TrainHyper {
            epochs: 30,
            batch_size: 128,
            ..Default::default()
        };
        let (_, report) = train_classifier(&x, &labels, &hyper, 7).unwrap();
        assert!(
            (report.final_metric - 0.5).abs() < 0.08,
            "acc = {}",
            report.final_metric
        );
    }
}
