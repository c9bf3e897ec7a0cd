//! DDPM core: noise schedule, denoiser training (standard and
//! class-conditional) and the guided sampler strategy registry.

mod sampler;

pub use sampler::{
    make_strategy, run_chains, run_sampler, sample, sample_classifier_guided, sample_conditional,
    sample_performance_guided, strategy_names, GuidanceConfig, GuidanceKind, GuidanceNormRow,
    GuidanceStrategy, LambdaMode, SampleBatch, SampleContext, StandardSampler, FEASIBLE_CLASS,
    INVALID_CLASS, NUM_OBJECTIVES,
};

use crate::neural::{
    AdamState, Aux, FeedforwardNet, NetConfig, NeuralError, TrainHyper, TrainReport,
};
use crate::rng::derive_stream;
use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DiffusionError {
    #[error("invalid schedule: {0}")]
    BadSchedule(String),
    #[error("training data is not normalized (|x| = {0} > 1.5)")]
    UnnormalizedData(f64),
    #[error("denoiser appears untrained (output layer is all zero)")]
    UntrainedDenoiser,
    #[error("strategy `{strategy}` requires a {what}")]
    MissingModel {
        strategy: &'static str,
        what: &'static str,
    },
    #[error("performance guidance requires exactly 7 regressors, got {0}")]
    RegressorCount(usize),
    #[error("guidance weight gamma = {0} outside [0, 1]")]
    BadGamma(f64),
    #[error("invalid objective weights: {0}")]
    BadLambda(String),
    #[error("unknown sampling strategy `{0}` (expected none|classifier|perf|conditional)")]
    UnknownStrategy(String),
    #[error("class label {0} unknown (0 = invalid, 1 = feasible)")]
    BadClassLabel(usize),
    #[error("model/normalizer dimension mismatch: model {model}, normalizer {normalizer}")]
    NormalizerMismatch { model: usize, normalizer: usize },
    #[error(transparent)]
    Neural(#[from] NeuralError),
}

/// Per-timestep β, α, cumulative ᾱ and σ for `t = 1..=T`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSchedule {
    pub t_steps: usize,
    beta: Vec<f64>,
    alpha: Vec<f64>,
    alpha_bar: Vec<f64>,
    sigma: Vec<f64>,
}

impl NoiseSchedule {
    pub fn beta(&self, t: usize) -> f64 {
        self.beta[t - 1]
    }
    pub fn alpha(&self, t: usize) -> f64 {
        self.alpha[t - 1]
    }
    pub fn alpha_bar(&self, t: usize) -> f64 {
        self.alpha_bar[t - 1]
    }
    pub fn sigma(&self, t: usize) -> f64 {
        self.sigma[t - 1]
    }
}

/// Linear β ramp from `beta1` to `beta_t` over `t_steps` steps, with the
/// cumulative product ᾱ accumulated in double-double precision.
pub fn make_schedule(
    t_steps: usize,
    beta1: f64,
    beta_t: f64,
) -> Result<NoiseSchedule, DiffusionError> {
    if t_steps < 1 {
        return Err(DiffusionError::BadSchedule("T must be >= 1".to_string()));
    }
    if !(beta1 > 0.0 && beta1 <= beta_t && beta_t < 1.0) {
        return Err(DiffusionError::BadSchedule(format!(
            "need 0 < beta1 <= betaT < 1, got beta1 = {beta1}, betaT = {beta_t}"
        )));
    }
    let mut beta = Vec::with_capacity(t_steps);
    for t in 0..t_steps {
        let frac = if t_steps == 1 {
            0.0
        } else {
            t as f64 / (t_steps - 1) as f64
        };
        beta.push(beta1 + frac * (beta_t - beta1));
    }
    let alpha: Vec<f64> = beta.iter().map(|b| 1.0 - b).collect();
    // Compensated running product: carry the rounding error of each
    // multiplication in a low word.
    let mut hi = 1.0f64;
    let mut lo = 0.0f64;
    let mut alpha_bar = Vec::with_capacity(t_steps);
    for &a in &alpha {
        let new_hi = hi * a;
        let err = hi.mul_add(a, -new_hi);
        hi = new_hi;
        lo = lo * a + err;
        alpha_bar.push(hi + lo);
    }
    let sigma: Vec<f64> = beta.iter().map(|b| b.sqrt()).collect();
    Ok(NoiseSchedule {
        t_steps,
        beta,
        alpha,
        alpha_bar,
        sigma,
    })
}

/// Hyperparameters for denoiser training.
#[derive(Debug, Clone, Copy)]
pub struct DdpmHyper {
    pub lr: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub time_embed_dim: usize,
    pub class_embed_dim: usize,
    /// Width of the four hidden layers.
    pub hidden_width: usize,
}

impl Default for DdpmHyper {
    fn default() -> Self {
        DdpmHyper {
            lr: 2e-4,
            batch_size: 256,
            epochs: 200,
            time_embed_dim: 64,
            class_embed_dim: 16,
            hidden_width: 256,
        }
    }
}

fn check_normalized(data: &Array2<f64>) -> Result<(), DiffusionError> {
    for &x in data.iter() {
        if !(x.abs() <= 1.5) {
            return Err(DiffusionError::UnnormalizedData(x));
        }
    }
    Ok(())
}

fn denoiser_config(dim: usize, hyper: &DdpmHyper, conditional: bool) -> NetConfig {
    NetConfig {
        input_dim: dim,
        hidden: vec![hyper.hidden_width; 4],
        output_dim: dim,
        residual: Some((0, 3)),
        time_embed: Some(hyper.time_embed_dim),
        class_embed: conditional.then_some(crate::neural::ClassEmbed {
            num_classes: 2,
            dim: hyper.class_embed_dim,
        }),
    }
}

fn train_denoiser_inner(
    data: &Array2<f64>,
    labels: Option<&[usize]>,
    schedule: &NoiseSchedule,
    hyper: &DdpmHyper,
    seed: u64,
) -> Result<(FeedforwardNet, TrainReport), DiffusionError> {
    check_normalized(data)?;
    let n = data.nrows();
    let dim = data.ncols();
    if n < 2 {
        return Err(NeuralError::NotEnoughData(format!("{n} rows")).into());
    }
    let mut net = FeedforwardNet::init(denoiser_config(dim, hyper, labels.is_some()), seed)?;
    let mut adam = AdamState::new(&net, hyper.lr);
    let mut report = TrainReport {
        epoch_loss: Vec::new(),
        final_metric: f64::NAN,
        seed,
        hyper: TrainHyper {
            lr: hyper.lr,
            batch_size: hyper.batch_size,
            epochs: hyper.epochs,
            holdout_frac: 0.0,
        },
        warnings: Vec::new(),
    };

    let mut order: Vec<usize> = (0..n).collect();
    for epoch in 0..hyper.epochs {
        let mut rng = derive_stream(seed, "ddpm.epoch", epoch as u64);
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut batches = 0.0;
        for chunk in order.chunks(hyper.batch_size) {
            let m = chunk.len();
            let mut x_t = Array2::zeros((m, dim));
            let mut eps = Array2::zeros((m, dim));
            let mut ts = vec![0.0; m];
            let mut classes = labels.map(|_| vec![0usize; m]);
            for (row, &i) in chunk.iter().enumerate() {
                let t = rng.random_range(1..=schedule.t_steps);
                ts[row] = t as f64;
                let ab = schedule.alpha_bar(t);
                let (sa, sb) = (ab.sqrt(), (1.0 - ab).sqrt());
                for j in 0..dim {
                    let e: f64 = rng.sample(StandardNormal);
                    eps[[row, j]] = e;
                    x_t[[row, j]] = sa * data[[i, j]] + sb * e;
                }
                if let (Some(cs), Some(ls)) = (classes.as_mut(), labels) {
                    cs[row] = ls[i];
                }
            }
            let aux = Aux {
                timesteps: Some(&ts),
                classes: classes.as_deref(),
            };
            let (pred, cache) = net.forward_cached(&x_t, &aux)?;
            let resid = &pred - &eps;
            let denom = (m * dim) as f64;
            let loss = resid.iter().map(|r| r * r).sum::<f64>() / denom;
            let d_out = resid.mapv(|r| 2.0 * r / denom);
            let (grads, _) = net.backward(&cache, &d_out);
            adam.step(&mut net, &grads);
            epoch_loss += loss;
            batches += 1.0;
        }
        report.epoch_loss.push(epoch_loss / batches);
    }
    report.final_metric = report.epoch_loss.last().copied().unwrap_or(f64::NAN);
    Ok((net, report))
}

/// Train the standard denoiser on normalized feasible designs: sample a
/// clean row, a uniform timestep and unit noise, regress the noise estimate
/// onto the noise under per-dimension MSE.
pub fn train_ddpm(
    data: &Array2<f64>,
    schedule: &NoiseSchedule,
    hyper: &DdpmHyper,
    seed: u64,
) -> Result<(FeedforwardNet, TrainReport), DiffusionError> {
    train_denoiser_inner(data, None, schedule, hyper, seed)
}

/// Train the conditional denoiser on feasible and invalid designs with
/// class labels (0 = invalid, 1 = feasible) fed through a learned embedding.
pub fn train_conditional(
    data: &Array2<f64>,
    labels: &[usize],
    schedule: &NoiseSchedule,
    hyper: &DdpmHyper,
    seed: u64,
) -> Result<(FeedforwardNet, TrainReport), DiffusionError> {
    if labels.len() != data.nrows() {
        return Err(NeuralError::DimensionMismatch {
            what: "condition labels",
            expected: data.nrows(),
            got: labels.len(),
        }
        .into());
    }
    let has0 = labels.iter().any(|&l| l == 0);
    let has1 = labels.iter().any(|&l| l == 1);
    if !(has0 && has1) {
        return Err(NeuralError::SingleClassData.into());
    }
    train_denoiser_inner(data, Some(labels), schedule, hyper, seed)
}

/// Normalize a design matrix through the fitted quantile map.
pub fn normalize_designs(
    designs: &[crate::designspace::DesignVector],
    normalizer: &crate::dataset::Normalizer,
) -> Result<Array2<f64>, crate::dataset::DatasetError> {
    let mut out = Array2::zeros((designs.len(), normalizer.dim()));
    for (r, v) in designs.iter().enumerate() {
        let u = normalizer.forward_row(&v.0)?;
        for (c, &val) in u.iter().enumerate() {
            out[[r, c]] = val;
        }
    }
    Ok(out)
}

/// Variance of `√ᾱ·x + √(1−ᾱ)·ε` when `x` and `ε` are independent
/// unit-variance variables.
pub fn reconstruction_variance(schedule: &NoiseSchedule, t: usize) -> f64 {
    let ab = schedule.alpha_bar(t);
    ab.sqrt().powi(2) + (1.0 - ab).sqrt().powi(2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_basics() {
        let s = make_schedule(1000, 1e-4, 0.02).unwrap();
        assert!((s.alpha_bar(1) - 0.9999).abs() < 1e-12);
        assert_eq!(s.beta(1), 1e-4);
        assert_eq!(s.beta(1000), 0.02);
        // Strictly decreasing cumulative product.
        for t in 2..=1000 {
            assert!(s.alpha_bar(t) < s.alpha_bar(t - 1));
            assert!(s.beta(t) > 0.0 && s.beta(t) < 1.0);
            assert_eq!(s.sigma(t), s.beta(t).sqrt());
        }
        // Independent plain product loop agrees and lands below 0.01.
        let mut product = 1.0;
        for t in 1..=1000 {
            product *= 1.0 - s.beta(t);
        }
        let rel = (s.alpha_bar(1000) - product).abs() / product;
        assert!(rel < 1e-10, "rel = {rel}");
        assert!(s.alpha_bar(1000) < 0.01);
    }

    #[test]
    fn single_step_schedule() {
        let s = make_schedule(1, 1e-4, 0.02).unwrap();
        assert_eq!(s.alpha_bar(1), s.alpha(1));
    }

    #[test]
    fn bad_schedules_are_rejected() {
        assert!(make_schedule(0, 1e-4, 0.02).is_err());
        assert!(make_schedule(10, 0.0, 0.02).is_err());
        assert!(make_schedule(10, 0.03, 0.02).is_err());
        assert!(make_schedule(10, 1e-4, 1.0).is_err());
    }

    #[test]
    fn reconstruction_identity_has_unit_variance() {
        let s = make_schedule(500, 1e-4, 0.02).unwrap();
        for t in [1, 100, 250, 500] {
            assert!((reconstruction_variance(&s, t) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn unnormalized_data_is_rejected() {
        let s = make_schedule(10, 1e-4, 0.02).unwrap();
        let mut data = Array2::zeros((50, 3));
        data[[7, 1]] = 2.0;
        assert!(matches!(
            train_ddpm(&data, &s, &DdpmHyper::default(), 1),
            Err(DiffusionError::UnnormalizedData(_))
        ));
    }

    #[test]
    fn initial_loss_is_unit_variance_noise() {
        // With a zero-initialized output layer the first batch predicts 0,
        // so the per-dimension MSE against unit noise sits near 1.
        let s = make_schedule(50, 1e-4, 0.02).unwrap();
        let mut rng = crate::rng::derive_stream(3, "test.ddpm", 0);
        let data = Array2::from_shape_fn((256, 4), |_| rng.random::<f64>() * 2.0 - 1.0);
        let hyper = DdpmHyper {
            epochs: 1,
            batch_size: 256,
            lr: 0.0,
            ..Default::default()
        };
        let (_, report) = train_ddpm(&data, &s, &hyper, 9).unwrap();
        let loss = report.epoch_loss[0];
        assert!((loss - 1.0).abs() < 0.2, "loss = {loss}");
    }

    #[test]
    fn conditional_requires_both_classes() {
        let s = make_schedule(10, 1e-4, 0.02).unwrap();
        let data = Array2::zeros((10, 3));
        let labels = vec![1usize; 10];
        assert!(matches!(
            train_conditional(&data, &labels, &s, &DdpmHyper::default(), 1),
            Err(DiffusionError::Neural(NeuralError::SingleClassData))
        ));
    }
}
