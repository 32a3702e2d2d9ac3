//! Generative model: a Gaussian over covariates, a logistic head for the
//! label, and an optional per-feature selection model that lets the
//! missingness pattern depend on the covariates and the label.

use crate::distributions::{bernoulli_logpmf, mvn_logpdf, sigmoid, CholFactor};
use crate::diffcore::tri_len;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Parameters of the data model: `beta` (intercept first, length `d + 1`)
/// for the label logit, `mu` and an unconstrained Cholesky vector for the
/// covariate Gaussian.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelParams {
    pub d: usize,
    pub beta: Vec<f64>,
    pub mu: Vec<f64>,
    pub sigma_chol: Vec<f64>,
}

impl ModelParams {
    pub fn zeros(d: usize) -> Self {
        Self {
            d,
            beta: vec![0.0; d + 1],
            mu: vec![0.0; d],
            sigma_chol: vec![0.0; tri_len(d)],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.beta.len() != self.d + 1 {
            return Err(Error::Dim(format!(
                "beta has {} entries, expected {}",
                self.beta.len(),
                self.d + 1
            )));
        }
        if self.mu.len() != self.d {
            return Err(Error::Dim(format!(
                "mu has {} entries, expected {}",
                self.mu.len(),
                self.d
            )));
        }
        if self.sigma_chol.len() != tri_len(self.d) {
            return Err(Error::Dim(format!(
                "sigma_chol has {} entries, expected {}",
                self.sigma_chol.len(),
                tri_len(self.d)
            )));
        }
        Ok(())
    }

    /// The covariate prior's Cholesky factor.
    pub fn prior_chol(&self) -> Result<CholFactor> {
        CholFactor::from_unconstrained(&self.sigma_chol, self.d)
    }

    /// Label logit `beta_0 + beta_{1..} . x`.
    pub fn linear_predictor(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.d {
            return Err(Error::Dim("linear_predictor: covariate length".into()));
        }
        let mut eta = self.beta[0];
        for j in 0..self.d {
            eta += self.beta[j + 1] * x[j];
        }
        Ok(eta)
    }

    /// Label probability for a fully observed covariate vector.
    pub fn predict_proba_complete(&self, x: &[f64]) -> Result<f64> {
        Ok(sigmoid(self.linear_predictor(x)?))
    }

    /// Log-likelihood of the label given completed covariates.
    pub fn loglik_y(&self, y: u8, x: &[f64]) -> Result<f64> {
        Ok(bernoulli_logpmf(y, self.linear_predictor(x)?))
    }
}

/// Selection-model coefficients: one row per feature, each row holding
/// `[intercept, d covariate slopes, label slope]`, so the logit of feature
/// `j` being observed is `c_j0 + sum_k c_jk x_k + c_jy y`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MissParams {
    pub d: usize,
    pub coef: Vec<f64>,
}

impl MissParams {
    pub fn zeros(d: usize) -> Self {
        Self {
            d,
            coef: vec![0.0; d * (d + 2)],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.coef.len() != self.d * (self.d + 2) {
            return Err(Error::Dim(format!(
                "selection coefficients have {} entries, expected {}",
                self.coef.len(),
                self.d * (self.d + 2)
            )));
        }
        Ok(())
    }

    /// Observation logit for feature `j` given completed covariates and the
    /// label.
    pub fn logit_row(&self, j: usize, x: &[f64], y: u8) -> Result<f64> {
        if j >= self.d || x.len() != self.d {
            return Err(Error::Dim("logit_row: index or covariate length".into()));
        }
        let row = &self.coef[j * (self.d + 2)..(j + 1) * (self.d + 2)];
        let mut u = row[0];
        for k in 0..self.d {
            u += row[1 + k] * x[k];
        }
        u += row[self.d + 1] * f64::from(y);
        Ok(u)
    }

    /// Log-likelihood of the full observation mask (`true` = observed),
    /// each feature an independent Bernoulli in its observation logit.
    pub fn loglik_r(&self, mask: &[bool], x: &[f64], y: u8) -> Result<f64> {
        if mask.len() != self.d {
            return Err(Error::Dim("loglik_r: mask length".into()));
        }
        let mut total = 0.0;
        for j in 0..self.d {
            let u = self.logit_row(j, x, y)?;
            total += bernoulli_logpmf(u8::from(mask[j]), u);
        }
        Ok(total)
    }
}

/// Un-normalized joint log-weight of one completed row under the model,
/// relative to the proposal that produced the completion:
/// `log p(y | x) + log p(x) [+ log p(r | x, y)] - log q(x_mis)`.
///
/// The selection term is included only when `miss` is present; with an
/// ignorable mechanism the mask contributes a constant and is dropped.
pub fn joint_log_weight(
    params: &ModelParams,
    miss: Option<&MissParams>,
    x: &[f64],
    y: u8,
    mask: &[bool],
    q_logdensity: f64,
) -> Result<f64> {
    let chol = params.prior_chol()?;
    let mut lw = params.loglik_y(y, x)? + mvn_logpdf(x, &params.mu, &chol)? - q_logdensity;
    if let Some(m) = miss {
        lw += m.loglik_r(mask, x, y)?;
    }
    Ok(lw)
}

// ---------------------------------------------------------------------------
