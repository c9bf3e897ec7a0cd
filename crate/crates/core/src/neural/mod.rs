//! Minimal differentiable feedforward networks.
//!
//! These are small residual MLPs (SiLU hidden activations, linear output)
//! with exact reverse-mode gradients with respect to both parameters
//! (training) and inputs (guidance). Auxiliary input slots carry a
//! sinusoidal timestep embedding and/or a learned class embedding,
//! concatenated to the base input at the first layer.
//!
//! All computation is f64; model files quantize weights to f32 on disk.

mod adam;
mod io;
mod train;

pub use adam::AdamState;
pub use io::{file_sha256, load_model, save_model, ModelMeta};
pub use train::{
    accuracy, r_squared, train_classifier, train_regressor, TrainHyper, TrainReport,
};

use crate::rng::derive_stream;
use ndarray::{Array1, Array2, ArrayView1, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NeuralError {
    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("network declares a {0} slot but none was supplied")]
    MissingAux(&'static str),
    #[error("network has no {0} slot but one was supplied")]
    UnexpectedAux(&'static str),
    #[error("head index {head} out of range for output dim {output_dim}")]
    NonScalarHead { head: usize, output_dim: usize },
    #[error("class label {label} out of range ({num_classes} classes)")]
    BadClassLabel { label: usize, num_classes: usize },
    #[error("training data contains a single class")]
    SingleClassData,
    #[error("training data is empty or too small: {0}")]
    NotEnoughData(String),
    #[error("model file corrupt: {0}")]
    Corrupt(String),
    #[error("model payload checksum mismatch")]
    ChecksumMismatch,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Embedding slot for a categorical condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassEmbed {
    pub num_classes: usize,
    pub dim: usize,
}

/// Architecture description.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetConfig {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub output_dim: usize,
    /// `(from, to)` hidden-layer indices; post-activation output of `from`
    /// is added to the post-activation output of `to`. Requires equal widths.
    pub residual: Option<(usize, usize)>,
    /// Width of the sinusoidal timestep embedding appended to the input.
    pub time_embed: Option<usize>,
    /// Learned class embedding appended to the input.
    pub class_embed: Option<ClassEmbed>,
}

impl NetConfig {
    /// The 4×256 residual trunk used for every model in the pipeline.
    pub fn residual_mlp(input_dim: usize, output_dim: usize) -> Self {
        NetConfig {
            input_dim,
            hidden: vec![256; 4],
            output_dim,
            residual: Some((0, 3)),
            time_embed: None,
            class_embed: None,
        }
    }

    pub fn full_input_dim(&self) -> usize {
        self.input_dim
            + self.time_embed.unwrap_or(0)
            + self.class_embed.map_or(0, |c| c.dim)
    }

    fn validate(&self) -> Result<(), NeuralError> {
        if let Some((from, to)) = self.residual {
            if from >= self.hidden.len()
                || to >= self.hidden.len()
                || from >= to
                || self.hidden[from] != self.hidden[to]
            {
                return Err(NeuralError::DimensionMismatch {
                    what: "residual link (must connect earlier to later equal-width layers)",
                    expected: self.hidden.first().copied().unwrap_or(0),
                    got: self.hidden.last().copied().unwrap_or(0),
                });
            }
        }
        Ok(())
    }
}

fn silu(x: f64) -> f64 {
    x / (1.0 + (-x).exp())
}

fn silu_prime(x: f64) -> f64 {
    let s = 1.0 / (1.0 + (-x).exp());
    s * (1.0 + x * (1.0 - s))
}

/// Sinusoidal embedding of a (possibly fractional) timestep.
pub fn timestep_embedding(t: f64, dim: usize) -> Vec<f64> {
    let half = dim / 2;
    let mut emb = vec![0.0; dim];
    for i in 0..half {
        let exponent = if half > 1 {
            i as f64 / (half - 1) as f64
        } else {
            0.0
        };
        let freq = (10_000.0_f64).powf(-exponent);
        emb[i] = (t * freq).sin();
        emb[half + i] = (t * freq).cos();
    }
    emb
}

/// Per-sample auxiliary inputs.
#[derive(Debug, Clone, Copy, Default)]
pub struct Aux<'a> {
    pub timesteps: Option<&'a [f64]>,
    pub classes: Option<&'a [usize]>,
}

impl<'a> Aux<'a> {
    pub fn none() -> Self {
        Aux::default()
    }

    pub fn time(timesteps: &'a [f64]) -> Self {
        Aux {
            timesteps: Some(timesteps),
            classes: None,
        }
    }
}

/// Weights and biases of one feedforward network.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedforwardNet {
    pub config: NetConfig,
    /// One `(out × in)` matrix per layer, hidden layers then output layer.
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
    /// `(num_classes × dim)` embedding table when configured.
    pub class_table: Option<Array2<f64>>,
}

/// Parameter-shaped gradient container.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
    pub class_table: Option<Array2<f64>>,
}

/// Stored activations from a cached forward pass.
pub struct ForwardCache {
    full_input: Array2<f64>,
    pre_acts: Vec<Array2<f64>>,
    acts: Vec<Array2<f64>>,
    classes: Option<Vec<usize>>,
}

impl FeedforwardNet {
    /// Freshly initialized network: Xavier-uniform hidden layers, zeroed
    /// output layer (so the initial output equals the output bias, zero).
    pub fn init(config: NetConfig, seed: u64) -> Result<Self, NeuralError> {
        config.validate()?;
        let mut rng = derive_stream(seed, "neural.init", 0);
        let mut dims = vec![config.full_input_dim()];
        dims.extend_from_slice(&config.hidden);
        dims.push(config.output_dim);
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for l in 0..dims.len() - 1 {
            let (fan_in, fan_out) = (dims[l], dims[l + 1]);
            let last = l == dims.len() - 2;
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let w = Array2::from_shape_fn((fan_out, fan_in), |_| {
                if last {
                    0.0
                } else {
                    (rng.random::<f64>() * 2.0 - 1.0) * limit
                }
            });
            weights.push(w);
            biases.push(Array1::zeros(fan_out));
        }
        let class_table = config.class_embed.map(|c| {
            Array2::from_shape_fn((c.num_classes, c.dim), |_| {
                (rng.random::<f64>() * 2.0 - 1.0) * 0.1
            })
        });
        Ok(FeedforwardNet {
            config,
            weights,
            biases,
            class_table,
        })
    }

    pub fn zero_gradients(&self) -> Gradients {
        Gradients {
            weights: self.weights.iter().map(|w| Array2::zeros(w.dim())).collect(),
            biases: self.biases.iter().map(|b| Array1::zeros(b.len())).collect(),
            class_table: self.class_table.as_ref().map(|t| Array2::zeros(t.dim())),
        }
    }

    fn check_aux(&self, n: usize, aux: &Aux) -> Result<(), NeuralError> {
        match (self.config.time_embed, aux.timesteps) {
            (Some(_), None) => return Err(NeuralError::MissingAux("timestep")),
            (None, Some(_)) => return Err(NeuralError::UnexpectedAux("timestep")),
            (Some(_), Some(t)) if t.len() != n => {
                return Err(NeuralError::DimensionMismatch {
                    what: "timestep batch",
                    expected: n,
                    got: t.len(),
                })
            }
            _ => {}
        }
        match (self.config.class_embed, aux.classes) {
            (Some(_), None) => return Err(NeuralError::MissingAux("class")),
            (None, Some(_)) => return Err(NeuralError::UnexpectedAux("class")),
            (Some(ce), Some(c)) => {
                if c.len() != n {
                    return Err(NeuralError::DimensionMismatch {
                        what: "class batch",
                        expected: n,
                        got: c.len(),
                    });
                }
                if let Some(&bad) = c.iter().find(|&&l| l >= ce.num_classes) {
                    return Err(NeuralError::BadClassLabel {
                        label: bad,
                        num_classes: ce.num_classes,
                    });
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn assemble_input(&self, x: &Array2<f64>, aux: &Aux) -> Result<Array2<f64>, NeuralError> {
        let n = x.nrows();
        if x.ncols() != self.config.input_dim {
            return Err(NeuralError::DimensionMismatch {
                what: "input",
                expected: self.config.input_dim,
                got: x.ncols(),
            });
        }
        self.check_aux(n, aux)?;
        let full_dim = self.config.full_input_dim();
        let mut full = Array2::zeros((n, full_dim));
        full.slice_mut(ndarray::s![.., ..self.config.input_dim])
            .assign(x);
        let mut offset = self.config.input_dim;
        if let (Some(dim), Some(ts)) = (self.config.time_embed, aux.timesteps) {
            for (row, &t) in ts.iter().enumerate() {
                let emb = timestep_embedding(t, dim);
                for (k, &e) in emb.iter().enumerate() {
                    full[[row, offset + k]] = e;
                }
            }
            offset += dim;
        }
        if let (Some(ce), Some(classes)) = (self.config.class_embed, aux.classes) {
            let table = self.class_table.as_ref().expect("class table");
            for (row, &c) in classes.iter().enumerate() {
                for k in 0..ce.dim {
                    full[[row, offset + k]] = table[[c, k]];
                }
            }
        }
        Ok(full)
    }

    /// Forward pass storing activations for a later backward pass.
    pub fn forward_cached(
        &self,
        x: &Array2<f64>,
        aux: &Aux,
    ) -> Result<(Array2<f64>, ForwardCache), NeuralError> {
        let full = self.assemble_input(x, aux)?;
        let n_hidden = self.config.hidden.len();
        let mut pre_acts = Vec::with_capacity(n_hidden);
        let mut acts = Vec::with_capacity(n_hidden);
        let mut current = full.clone();
        for l in 0..n_hidden {
            let z = current.dot(&self.weights[l].t()) + &self.biases[l];
            let mut a = z.mapv(silu);
            if let Some((from, to)) = self.config.residual {
                if to == l {
                    a += &acts[from];
                }
            }
            pre_acts.push(z);
            acts.push(a.clone());
            current = a;
        }
        let out = current.dot(&self.weights[n_hidden].t()) + &self.biases[n_hidden];
        Ok((
            out,
            ForwardCache {
                full_input: full,
                pre_acts,
                acts,
                classes: aux.classes.map(|c| c.to_vec()),
            },
        ))
    }

    /// Deterministic batched forward pass.
    pub fn forward_batch(&self, x: &Array2<f64>, aux: &Aux) -> Result<Array2<f64>, NeuralError> {
        Ok(self.forward_cached(x, aux)?.0)
    }

    /// Single-sample forward pass.
    pub fn forward(&self, x: ArrayView1<f64>, aux: &Aux) -> Result<Array1<f64>, NeuralError> {
        let xb = x
            .to_owned()
            .into_shape_with_order((1, x.len()))
            .expect("row reshape");
        let out = self.forward_batch(&xb, aux)?;
        Ok(out.row(0).to_owned())
    }

    /// Backward pass: parameter gradients plus the gradient with respect to
    /// the base input rows (auxiliary slots excluded).
    pub fn backward(
        &self,
        cache: &ForwardCache,
        d_out: &Array2<f64>,
    ) -> (Gradients, Array2<f64>) {
        let n_hidden = self.config.hidden.len();
        let mut grads = self.zero_gradients();

        // d wrt post-activation of each hidden layer.
        let mut d_acts: Vec<Option<Array2<f64>>> = vec![None; n_hidden];
        let last_in = if n_hidden == 0 {
            &cache.full_input
        } else {
            &cache.acts[n_hidden - 1]
        };
        grads.weights[n_hidden] = d_out.t().dot(last_in);
        grads.biases[n_hidden] = d_out.sum_axis(Axis(0));
        if n_hidden > 0 {
            d_acts[n_hidden - 1] = Some(d_out.dot(&self.weights[n_hidden]));
        }

        let mut d_input_full: Option<Array2<f64>> = None;
        for l in (0..n_hidden).rev() {
            let mut d_a = d_acts[l].take().expect("gradient flows to every layer");
            if let Some((from, to)) = self.config.residual {
                if to == l {
                    // Skip connection: route a copy of the gradient to `from`.
                    match &mut d_acts[from] {
                        Some(existing) => *existing += &d_a,
                        slot => *slot = Some(d_a.clone()),
                    }
                }
            }
            d_a.zip_mut_with(&cache.pre_acts[l], |d, &z| *d *= silu_prime(z));
            let dz = d_a;
            let upstream = if l == 0 {
                &cache.full_input
            } else {
                &cache.acts[l - 1]
            };
            grads.weights[l] = dz.t().dot(upstream);
            grads.biases[l] = dz.sum_axis(Axis(0));
            let d_prev = dz.dot(&self.weights[l]);
            if l == 0 {
                d_input_full = Some(d_prev);
            } else {
                match &mut d_acts[l - 1] {
                    Some(existing) => *existing += &d_prev,
                    slot => *slot = Some(d_prev),
                }
            }
        }
        let d_input_full = d_input_full.unwrap_or_else(|| d_out.dot(&self.weights[0]));

        // Class-embedding gradients come from the tail of the full input.
        if let (Some(ce), Some(classes), Some(table_grad)) = (
            self.config.class_embed,
            cache.classes.as_ref(),
            grads.class_table.as_mut(),
        ) {
            let offset = self.config.input_dim + self.config.time_embed.unwrap_or(0);
            for (row, &c) in classes.iter().enumerate() {
                for k in 0..ce.dim {
                    table_grad[[c, k]] += d_input_full[[row, offset + k]];
                }
            }
        }

        let d_base = d_input_full
            .slice(ndarray::s![.., ..self.config.input_dim])
            .to_owned();
        (grads, d_base)
    }

    /// Exact gradient of the scalar output `head` with respect to each base
    /// input row.
    pub fn grad_input_batch(
        &self,
        x: &Array2<f64>,
        aux: &Aux,
        head: usize,
    ) -> Result<Array2<f64>, NeuralError> {
        if head >= self.config.output_dim {
            return Err(NeuralError::NonScalarHead {
                head,
                output_dim: self.config.output_dim,
            });
        }
        let (_, cache) = self.forward_cached(x, aux)?;
        let mut d_out = Array2::zeros((x.nrows(), self.config.output_dim));
        d_out.column_mut(head).fill(1.0);
        Ok(self.backward(&cache, &d_out).1)
    }

    /// Single-sample input gradient of the scalar output `head`.
    pub fn grad_input(
        &self,
        x: ArrayView1<f64>,
        aux: &Aux,
        head: usize,
    ) -> Result<Array1<f64>, NeuralError> {
        let xb = x
            .to_owned()
            .into_shape_with_order((1, x.len()))
            .expect("row reshape");
        let g = self.grad_input_batch(&xb, aux, head)?;
        Ok(g.row(0).to_owned())
    }

    /// Number of scalar parameters.
    pub fn num_params(&self) -> usize {
        let wb: usize = self
            .weights
            .iter()
            .map(|w| w.len())
            .chain(self.biases.iter().map(|b| b.len()))
            .sum();
        wb + self.class_table.as_ref().map_or(0, |t| t.len())
    }
}

/// Stable log-sigmoid: `log σ(z) = −softplus(−z)`.
pub fn log_sigmoid(z: f64) -> f64 {
    -softplus(-z)
}

/// Numerically stable `ln(1 + e^z)`.
pub fn softplus(z: f64) -> f64 {
    if z > 30.0 {
        z
    } else if z < -30.0 {
        z.exp()
    } else {
        z.exp().ln_1p()
    }
}

pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Probability head for logit outputs. The logit is clamped to ±36 so the
/// result stays strictly inside (0, 1) even where f64 sigmoid saturates.
pub fn probability_from_logit(z: f64) -> f64 {
    sigmoid(z.clamp(-36.0, 36.0))
}
