//! Sampling strategies behind a common trait, selected by name.
//!
//! Every strategy shares one denoising loop (the standard reverse-process
//! update); what varies is the per-step additive guidance term, the noise
//! damping weight γ, and the class label fed to a conditional denoiser:
//!
//! - `none` — plain reverse diffusion;
//! - `classifier` — adds `γ·∇ log p(feasible|X_t)` and damps the noise by
//!   `(1−γ)`;
//! - `perf` — classifier guidance plus `−Σ λ_i ∇P_i(X_t)` from seven
//!   performance regressors, λ drawn per sample on the simplex;
//! - `conditional` — plain loop with a class embedding at every step.
//!
//! Chains draw from per-index RNG streams and are advanced in fixed 64-row
//! blocks, so results are identical for any `--jobs` setting and any batch
//! composition.

use super::{DiffusionError, NoiseSchedule};
use crate::dataset::Normalizer;
use crate::designspace::{DesignVector, BOX_LOWER, BOX_UPPER, DIM};
use crate::neural::{sigmoid, Aux, FeedforwardNet};
use crate::rng::derive_stream;
use ndarray::{Array2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

/// Conditional-DDPM class id for invalid designs.
pub const INVALID_CLASS: usize = 0;
/// Conditional-DDPM class id for feasible designs.
pub const FEASIBLE_CLASS: usize = 1;

/// Fixed row-block width for batched denoising; never depends on the
/// thread count, which keeps runs bitwise identical under any `--jobs`.
const BLOCK_ROWS: usize = 64;

/// Number of performance objectives.
pub const NUM_OBJECTIVES: usize = 7;

/// Everything a sampling run needs besides the strategy itself.
pub struct SampleContext<'a> {
    pub denoiser: &'a FeedforwardNet,
    pub schedule: &'a NoiseSchedule,
    pub normalizer: &'a Normalizer,
    pub classifier: Option<&'a FeedforwardNet>,
    pub regressors: Option<&'a [FeedforwardNet]>,
    /// Paper-form noise damping `σ_t·Z·(1−γ)`. Disable to restore the
    /// undamped `σ_t·Z` for ablation.
    pub damp_noise: bool,
    /// Record per-timestep mean guidance gradient norms.
    pub collect_guidance_norms: bool,
}

impl<'a> SampleContext<'a> {
    pub fn new(
        denoiser: &'a FeedforwardNet,
        schedule: &'a NoiseSchedule,
        normalizer: &'a Normalizer,
    ) -> Self {
        SampleContext {
            denoiser,
            schedule,
            normalizer,
            classifier: None,
            regressors: None,
            damp_noise: true,
            collect_guidance_norms: false,
        }
    }

    pub fn with_classifier(mut self, classifier: &'a FeedforwardNet) -> Self {
        self.classifier = Some(classifier);
        self
    }

    pub fn with_regressors(mut self, regressors: &'a [FeedforwardNet]) -> Self {
        self.regressors = Some(regressors);
        self
    }
}

/// Mean guidance gradient norms at one timestep (diagnostics for the
/// objective-imbalance behavior of raw-gradient guidance).
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct GuidanceNormRow {
    pub t: usize,
    pub classifier: f64,
    pub objectives: [f64; NUM_OBJECTIVES],
}

/// A finished sampling run.
#[derive(Debug, Clone)]
pub struct SampleBatch {
    /// Inverse-normalized designs, clamped to the sampling box.
    pub designs: Vec<DesignVector>,
    /// Final model-space vectors before inverse normalization.
    pub model_space: Array2<f64>,
    /// Per-sample objective weights, when the strategy uses them.
    pub lambdas: Option<Array2<f64>>,
    /// Per-timestep guidance norms, when collected.
    pub guidance_norms: Option<Vec<GuidanceNormRow>>,
}

/// Per-block partial sums of guidance gradient norms.
#[derive(Debug, Clone, Copy, Default)]
pub struct NormAccum {
    classifier: f64,
    objectives: [f64; NUM_OBJECTIVES],
}

/// One interchangeable sampling algorithm.
pub trait GuidanceStrategy: Sync {
    fn name(&self) -> &'static str;

    /// Check that the context carries everything this strategy needs.
    fn validate(&self, ctx: &SampleContext) -> Result<(), DiffusionError>;

    /// Noise-damping / gradient weight γ; 0 for unguided strategies.
    fn gamma(&self) -> f64 {
        0.0
    }

    /// Class label for a conditional denoiser.
    fn class_label(&self) -> Option<usize> {
        None
    }

    /// Per-sample objective weights, drawn from a dedicated substream.
    fn lambdas(&self, _n: usize, _seed: u64) -> Option<Array2<f64>> {
        None
    }

    /// Additive guidance term for a block of chains at timestep `t`, plus
    /// norm partial sums when requested.
    fn guidance_term(
        &self,
        _ctx: &SampleContext,
        _x_block: &Array2<f64>,
        _t: usize,
        _lambda_block: Option<&Array2<f64>>,
        _collect_norms: bool,
    ) -> Result<(Option<Array2<f64>>, NormAccum), DiffusionError> {
        Ok((None, NormAccum::default()))
    }
}

/// Gradient of the feasible-class log-probability with respect to the
/// inputs, batched: `∇ log σ(z) = σ(−z)·∇z`.
fn classifier_logp_grad(
    net: &FeedforwardNet,
    x: &Array2<f64>,
) -> Result<Array2<f64>, DiffusionError> {
    let (logits, cache) = net.forward_cached(x, &Aux::none())?;
    let d_out = Array2::ones(logits.dim());
    let (_, mut d_in) = net.backward(&cache, &d_out);
    for (mut row, &z) in d_in.axis_iter_mut(Axis(0)).zip(logits.column(0).iter()) {
        let w = sigmoid(-z);
        row.mapv_inplace(|g| g * w);
    }
    Ok(d_in)
}

/// Scalar-head input gradients of one regressor, batched.
fn regressor_grad(net: &FeedforwardNet, x: &Array2<f64>) -> Result<Array2<f64>, DiffusionError> {
    let (out, cache) = net.forward_cached(x, &Aux::none())?;
    let d_out = Array2::ones(out.dim());
    let (_, d_in) = net.backward(&cache, &d_out);
    Ok(d_in)
}

fn mean_row_norm(g: &Array2<f64>) -> f64 {
    let n = g.nrows().max(1) as f64;
    g.axis_iter(Axis(0))
        .map(|row| row.iter().map(|v| v * v).sum::<f64>().sqrt())
        .sum::<f64>()
        / n
}

/// Plain reverse diffusion.
pub struct StandardSampler;

impl GuidanceStrategy for StandardSampler {
    fn name(&self) -> &'static str {
        "none"
    }
    fn validate(&self, _ctx: &SampleContext) -> Result<(), DiffusionError> {
        Ok(())
    }
}

/// Classifier-guided reverse diffusion with weight γ.
pub struct ClassifierGuidedSampler {
    pub gamma: f64,
}

impl GuidanceStrategy for ClassifierGuidedSampler {
    fn name(&self) -> &'static str {
        "classifier"
    }

    fn validate(&self, ctx: &SampleContext) -> Result<(), DiffusionError> {
        check_gamma(self.gamma)?;
        if ctx.classifier.is_none() {
            return Err(DiffusionError::MissingModel {
                strategy: "classifier",
                what: "feasibility classifier",
            });
        }
        Ok(())
    }

    fn gamma(&self) -> f64 {
        self.gamma
    }

    fn guidance_term(
        &self,
        ctx: &SampleContext,
        x_block: &Array2<f64>,
        _t: usize,
        _lambda_block: Option<&Array2<f64>>,
        collect_norms: bool,
    ) -> Result<(Option<Array2<f64>>, NormAccum), DiffusionError> {
        // γ = 0 removes the term exactly; skip the work so the run matches
        // the standard sampler bit for bit.
        if self.gamma == 0.0 {
            return Ok((None, NormAccum::default()));
        }
        let classifier = ctx.classifier.expect("validated");
        let grad = classifier_logp_grad(classifier, x_block)?;
        let mut accum = NormAccum::default();
        if collect_norms {
            accum.classifier = mean_row_norm(&grad) * x_block.nrows() as f64;
        }
        Ok((Some(grad.mapv(|g| self.gamma * g)), accum))
    }
}

/// Objective-weight sampling mode for performance guidance.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum LambdaMode {
    /// Seven unit exponentials normalized to the simplex, per sample.
    Random,
    /// User weights, renormalized to sum 1 (an all-zero vector is kept
    /// as-is and disables the performance term, for ablations).
    Fixed([f64; NUM_OBJECTIVES]),
}

/// Performance-guided reverse diffusion: classifier term plus subtracted
/// objective gradients.
pub struct PerformanceGuidedSampler {
    pub gamma: f64,
    pub lambda_mode: LambdaMode,
}

impl GuidanceStrategy for PerformanceGuidedSampler {
    fn name(&self) -> &'static str {
        "perf"
    }

    fn validate(&self, ctx: &SampleContext) -> Result<(), DiffusionError> {
        check_gamma(self.gamma)?;
        if ctx.classifier.is_none() {
            return Err(DiffusionError::MissingModel {
                strategy: "perf",
                what: "feasibility classifier",
            });
        }
        match ctx.regressors {
            None => {
                return Err(DiffusionError::MissingModel {
                    strategy: "perf",
                    what: "performance regressors",
                })
            }
            Some(r) if r.len() != NUM_OBJECTIVES => {
                return Err(DiffusionError::RegressorCount(r.len()))
            }
            _ => {}
        }
        if let LambdaMode::Fixed(w) = self.lambda_mode {
            if w.iter().any(|&x| x < 0.0 || !x.is_finite()) {
                return Err(DiffusionError::BadLambda(format!("{w:?}")));
            }
        }
        Ok(())
    }

    fn gamma(&self) -> f64 {
        self.gamma
    }

    fn lambdas(&self, n: usize, seed: u64) -> Option<Array2<f64>> {
        let mut lambdas = Array2::zeros((n, NUM_OBJECTIVES));
        match self.lambda_mode {
            LambdaMode::Random => {
                for i in 0..n {
                    let mut rng = derive_stream(seed, "diffusion.lambda", i as u64);
                    let mut draws = [0.0; NUM_OBJECTIVES];
                    let mut total = 0.0;
                    for d in &mut draws {
                        let u: f64 = rng.random();
                        *d = -(1.0 - u).ln();
                        total += *d;
                    }
                    for (j, d) in draws.iter().enumerate() {
                        lambdas[[i, j]] = d / total;
                    }
                }
            }
            LambdaMode::Fixed(w) => {
                let total: f64 = w.iter().sum();
                for i in 0..n {
                    for j in 0..NUM_OBJECTIVES {
                        lambdas[[i, j]] = if total > 0.0 { w[j] / total } else { 0.0 };
                    }
                }
            }
        }
        Some(lambdas)
    }

    fn guidance_term(
        &self,
        ctx: &SampleContext,
        x_block: &Array2<f64>,
        _t: usize,
        lambda_block: Option<&Array2<f64>>,
        collect_norms: bool,
    ) -> Result<(Option<Array2<f64>>, NormAccum), DiffusionError> {
        let lambda_block = lambda_block.expect("performance guidance carries lambdas");
        let mut accum = NormAccum::default();
        let rows = x_block.nrows() as f64;
        let mut term = Array2::zeros(x_block.dim());
        if self.gamma != 0.0 {
            let classifier = ctx.classifier.expect("validated");
            let grad = classifier_logp_grad(classifier, x_block)?;
            if collect_norms {
                accum.classifier = mean_row_norm(&grad) * rows;
            }
            term += &grad.mapv(|g| self.gamma * g);
        }
        let regressors = ctx.regressors.expect("validated");
        for (obj, net) in regressors.iter().enumerate() {
            if lambda_block.column(obj).iter().all(|&l| l == 0.0) {
                continue;
            }
            let grad = regressor_grad(net, x_block)?;
            if collect_norms {
                accum.objectives[obj] = mean_row_norm(&grad) * rows;
            }
            for (r, mut row) in term.axis_iter_mut(Axis(0)).enumerate() {
                let weight = lambda_block[[r, obj]];
                for (dst, &g) in row.iter_mut().zip(grad.row(r).iter()) {
                    // Subtracted: every objective is a minimization.
                    *dst -= weight * g;
                }
            }
        }
        Ok((Some(term), accum))
    }
}

/// Conditional reverse diffusion: the class embedding rides along at every
/// step; no gradient guidance.
pub struct ConditionalSampler {
    pub label: usize,
}

impl GuidanceStrategy for ConditionalSampler {
    fn name(&self) -> &'static str {
        "conditional"
    }

    fn validate(&self, ctx: &SampleContext) -> Result<(), DiffusionError> {
        let embed = ctx
            .denoiser
            .config
            .class_embed
            .ok_or(DiffusionError::MissingModel {
                strategy: "conditional",
                what: "conditional denoiser (class embedding)",
            })?;
        if self.label >= embed.num_classes {
            return Err(DiffusionError::BadClassLabel(self.label));
        }
        Ok(())
    }

    fn class_label(&self) -> Option<usize> {
        Some(self.label)
    }
}

fn check_gamma(gamma: f64) -> Result<(), DiffusionError> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(DiffusionError::BadGamma(gamma));
    }
    Ok(())
}

/// Strategy selector keys, as accepted by the CLI.
pub fn strategy_names() -> [&'static str; 4] {
    ["none", "classifier", "perf", "conditional"]
}

/// Strategy kind parsed from its registry name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GuidanceKind {
    None,
    Classifier,
    Performance,
    Conditional,
}

impl std::str::FromStr for GuidanceKind {
    type Err = DiffusionError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(GuidanceKind::None),
            "classifier" => Ok(GuidanceKind::Classifier),
            "perf" => Ok(GuidanceKind::Performance),
            "conditional" => Ok(GuidanceKind::Conditional),
            other => Err(DiffusionError::UnknownStrategy(other.to_string())),
        }
    }
}

/// Runtime knobs shared by the guided strategies.
#[derive(Debug, Clone, Copy)]
pub struct GuidanceConfig {
    pub gamma: f64,
    pub lambda_mode: LambdaMode,
    pub class_label: usize,
}

impl Default for GuidanceConfig {
    fn default() -> Self {
        GuidanceConfig {
            gamma: 0.5,
            lambda_mode: LambdaMode::Random,
            class_label: FEASIBLE_CLASS,
        }
    }
}

/// Build a strategy from its registry name and configuration.
pub fn make_strategy(
    kind: GuidanceKind,
    cfg: &GuidanceConfig,
) -> Box<dyn GuidanceStrategy + Send> {
    match kind {
        GuidanceKind::None => Box::new(StandardSampler),
        GuidanceKind::Classifier => Box::new(ClassifierGuidedSampler { gamma: cfg.gamma }),
        GuidanceKind::Performance => Box::new(PerformanceGuidedSampler {
            gamma: cfg.gamma,
            lambda_mode: cfg.lambda_mode,
        }),
        GuidanceKind::Conditional => Box::new(ConditionalSampler {
            label: cfg.class_label,
        }),
    }
}

/// Model-space reverse-process loop shared by every strategy; performs no
/// inverse normalization. `run_sampler` wraps this and maps the final
/// vectors back to the design space.
pub fn run_chains(
    strategy: &dyn GuidanceStrategy,
    ctx: &SampleContext,
    n: usize,
    seed: u64,
) -> Result<(Array2<f64>, Option<Array2<f64>>, Option<Vec<GuidanceNormRow>>), DiffusionError> {
    strategy.validate(ctx)?;
    let dim = ctx.denoiser.config.input_dim;
    if dim != ctx.normalizer.dim() {
        return Err(DiffusionError::NormalizerMismatch {
            model: dim,
            normalizer: ctx.normalizer.dim(),
        });
    }
    let out_layer = ctx.denoiser.weights.last().expect("net has layers");
    if out_layer.iter().all(|&w| w == 0.0)
        && ctx.denoiser.biases.last().expect("net").iter().all(|&b| b == 0.0)
    {
        return Err(DiffusionError::UntrainedDenoiser);
    }

    let t_steps = ctx.schedule.t_steps;
    let gamma = strategy.gamma();
    let damp = if ctx.damp_noise { 1.0 - gamma } else { 1.0 };
    let lambdas = strategy.lambdas(n, seed);
    let classes = strategy.class_label().map(|label| vec![label; n]);

    // Chain i owns stream (seed, "diffusion.chain", i): X_T first, then one
    // Z per step t = T..2.
    let mut rngs: Vec<_> = (0..n)
        .map(|i| derive_stream(seed, "diffusion.chain", i as u64))
        .collect();
    let mut x = Array2::zeros((n, dim));
    for (i, rng) in rngs.iter_mut().enumerate() {
        for j in 0..dim {
            x[[i, j]] = rng.sample::<f64, _>(StandardNormal);
        }
    }

    let block_starts: Vec<usize> = (0..n).step_by(BLOCK_ROWS).collect();
    let mut z = Array2::zeros((n, dim));
    let mut norm_rows = ctx.collect_guidance_norms.then(Vec::new);

    for t in (1..=t_steps).rev() {
        if t > 1 {
            for (i, rng) in rngs.iter_mut().enumerate() {
                for j in 0..dim {
                    z[[i, j]] = rng.sample::<f64, _>(StandardNormal);
                }
            }
        } else {
            z.fill(0.0);
        }
        let alpha = ctx.schedule.alpha(t);
        let alpha_bar = ctx.schedule.alpha_bar(t);
        let sigma = ctx.schedule.sigma(t);
        let c_mean = 1.0 / alpha.sqrt();
        let c_eps = (1.0 - alpha) / (1.0 - alpha_bar).sqrt();

        let results: Result<Vec<(usize, Array2<f64>, NormAccum)>, DiffusionError> = block_starts
            .par_iter()
            .map(|&start| {
                let end = (start + BLOCK_ROWS).min(n);
                let rows = end - start;
                let xb = x.slice(ndarray::s![start..end, ..]).to_owned();
                let ts = vec![t as f64; rows];
                let aux = Aux {
                    timesteps: ctx.denoiser.config.time_embed.map(|_| ts.as_slice()),
                    classes: classes.as_ref().map(|c| &c[start..end]),
                };
                let eps = ctx.denoiser.forward_batch(&xb, &aux)?;
                let lambda_block = lambdas
                    .as_ref()
                    .map(|l| l.slice(ndarray::s![start..end, ..]).to_owned());
                let (term, accum) = strategy.guidance_term(
                    ctx,
                    &xb,
                    t,
                    lambda_block.as_ref(),
                    ctx.collect_guidance_norms,
                )?;
                let mut next = Array2::zeros((rows, dim));
                for r in 0..rows {
                    for j in 0..dim {
                        let mean = c_mean * (xb[[r, j]] - c_eps * eps[[r, j]]);
                        next[[r, j]] = mean + sigma * (damp * z[[start + r, j]]);
                    }
                }
                if let Some(term) = term {
                    next += &term;
                }
                Ok((start, next, accum))
            })
            .collect();
        let mut results = results?;
        results.sort_by_key(|(start, _, _)| *start);
        let mut total = NormAccum::default();
        for (start, block, accum) in results {
            let rows = block.nrows();
            x.slice_mut(ndarray::s![start..start + rows, ..]).assign(&block);
            total.classifier += accum.classifier;
            for k in 0..NUM_OBJECTIVES {
                total.objectives[k] += accum.objectives[k];
            }
        }
        if let Some(rows) = norm_rows.as_mut() {
            let nf = n as f64;
            let mut objectives = [0.0; NUM_OBJECTIVES];
            for k in 0..NUM_OBJECTIVES {
                objectives[k] = total.objectives[k] / nf;
            }
            rows.push(GuidanceNormRow {
                t,
                classifier: total.classifier / nf,
                objectives,
            });
        }
    }

    Ok((x, lambdas, norm_rows))
}

/// Run `n` chains of the reverse process under `strategy`, then
/// inverse-normalize and clamp the results to the sampling box.
pub fn run_sampler(
    strategy: &dyn GuidanceStrategy,
    ctx: &SampleContext,
    n: usize,
    seed: u64,
) -> Result<SampleBatch, DiffusionError> {
    let dim = ctx.denoiser.config.input_dim;
    if dim != DIM {
        return Err(DiffusionError::NormalizerMismatch {
            model: dim,
            normalizer: DIM,
        });
    }
    let (x, lambdas, norm_rows) = run_chains(strategy, ctx, n, seed)?;
    let mut designs = Vec::with_capacity(n);
    for row in x.axis_iter(Axis(0)) {
        let u: Vec<f64> = row.to_vec();
        let raw = ctx
            .normalizer
            .inverse_row(&u)
            .map_err(|_| DiffusionError::NormalizerMismatch {
                model: dim,
                normalizer: ctx.normalizer.dim(),
            })?;
        let mut p = [0.0; DIM];
        for c in 0..DIM {
            p[c] = raw[c].clamp(BOX_LOWER[c], BOX_UPPER[c]);
        }
        designs.push(DesignVector(p));
    }

    Ok(SampleBatch {
        designs,
        model_space: x,
        lambdas,
        guidance_norms: norm_rows,
    })
}

/// Plain reverse-process sampling.
pub fn sample(ctx: &SampleContext, n: usize, seed: u64) -> Result<SampleBatch, DiffusionError> {
    run_sampler(&StandardSampler, ctx, n, seed)
}

/// Classifier-guided sampling with weight γ.
pub fn sample_classifier_guided(
    ctx: &SampleContext,
    gamma: f64,
    n: usize,
    seed: u64,
) -> Result<SampleBatch, DiffusionError> {
    run_sampler(&ClassifierGuidedSampler { gamma }, ctx, n, seed)
}

/// Multi-objective performance-guided sampling.
pub fn sample_performance_guided(
    ctx: &SampleContext,
    gamma: f64,
    lambda_mode: LambdaMode,
    n: usize,
    seed: u64,
) -> Result<SampleBatch, DiffusionError> {
    run_sampler(&PerformanceGuidedSampler { gamma, lambda_mode }, ctx, n, seed)
}

/// Class-conditional sampling.
pub fn sample_conditional(
    ctx: &SampleContext,
    label: usize,
    n: usize,
    seed: u64,
) -> Result<SampleBatch, DiffusionError> {
    run_sampler(&ConditionalSampler { label }, ctx, n, seed)
}
