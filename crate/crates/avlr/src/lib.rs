//! Amortized variational inference for logistic regression with missing
//! covariates.
//!
//! The crate fits a joint model of covariates, labels, and (optionally) the
//! missingness pattern itself by maximizing an importance-weighted evidence
//! lower bound. An encoder network proposes a Gaussian over each row's
//! missing entries, the bound is estimated with a handful of posterior
//! draws, and everything is trained jointly with Adam on a small hand-rolled
//! reverse-mode tape. Baselines (mean imputation, a stochastic EM) and a
//! benchmark harness live alongside the estimator so the methods can be
//! compared on the same generated data.

pub mod baselines;
pub mod datagen;
pub mod dataset;
pub mod diffcore;
pub mod distributions;
pub mod encoder;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod model;
pub mod objective;
pub mod predictor;
pub mod trainer;

pub use dataset::Dataset;
pub use error::{Error, Result};
