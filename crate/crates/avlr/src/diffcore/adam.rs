use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Adam optimizer state with bias correction.
///
/// Update for each coordinate, with t the step counter after increment:
///   m <- b1 m + (1 - b1) g
///   v <- b2 v + (1 - b2) g^2
///   p <- p - lr * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps)
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdamState {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    t: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl AdamState {
    /// State for `dim` parameters with the standard moment decays
    /// (0.9, 0.999) and eps 1e-8.
    pub fn new(dim: usize, lr: f64) -> Self {
        AdamState {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: vec![0.0; dim],
            v: vec![0.0; dim],
        }
    }

    pub fn with_betas(mut self, beta1: f64, beta2: f64) -> Self {
        self.beta1 = beta1;
        self.beta2 = beta2;
        self
    }

    pub fn steps_taken(&self) -> u64 {
        self.t
    }

    /// One optimizer step in place. A non-finite gradient entry is a numeric
    /// failure; parameters and state are left untouched in that case.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) -> Result<()> {
        if params.len() != self.m.len() || grad.len() != self.m.len() {
            return Err(Error::Dim(format!(
                "adam: state dim {} vs params {} / grad {}",
                self.m.len(),
                params.len(),
                grad.len()
            )));
        }
        if let Some(bad) = grad.iter().position(|g| !g.is_finite()) {
            return Err(Error::Numeric(format!(
                "adam: non-finite gradient at coordinate {bad}"
            )));
        }
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
        Ok(())
    }
}
