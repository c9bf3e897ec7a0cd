//! Core library for guided generative ship hull design.
//!
//! The pipeline generates parametric hull design vectors with a tabular
//! denoising diffusion model, optionally steered by a feasibility classifier
//! and performance regressors, and evaluates every hull with the same
//! geometry / hydrostatics / wave-drag stack used to label the training data.
//!
//! Module map:
//! - [`designspace`] — the reduced 12-parameter hull design space, algebraic
//!   feasibility constraints, sampling and interpolation.
//! - [`geometry`] — hull surface evaluation, watertight meshes, hydrostatics,
//!   Gaussian curvature and the MaxBox cargo proxy.
//! - [`hydro`] — Michell-integral wave resistance over the 32-condition
//!   speed/draft grid.
//! - [`dataset`] — corpus generation, performance labeling, quantile
//!   normalization and CSV persistence.
//! - [`neural`] — small feedforward networks with exact reverse-mode
//!   gradients for both parameters and inputs.
//! - [`diffusion`] — noise schedule, DDPM training and the sampler strategy
//!   registry (standard / classifier-guided / performance-guided /
//!   conditional).
//! - [`eval`] — chamfer coverage and realism, PCA projections, feasibility
//!   rates and performance comparison tables.

pub mod dataset;
pub mod designspace;
pub mod diffusion;
pub mod eval;
pub mod geometry;
pub mod hydro;
pub mod neural;
pub mod rng;
