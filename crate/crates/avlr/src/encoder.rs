//! Amortized inference network. One tanh hidden layer reads
//! `[x zero-filled, mask, y]` and emits a mean and a packed Cholesky vector
//! over the full covariate dimension; per row, both are restricted to the
//! missing coordinates by taking the principal submatrix of the triangle.
//!
//! Restricting after the fact keeps the output layout independent of which
//! entries happen to be missing, so one set of weights serves every
//! missingness pattern.

use crate::diffcore::{tri_index, tri_len};
use crate::distributions::{mvn_logpdf, reparam_sample, CholFactor};
use crate::error::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Weights of the encoder MLP. All matrices are dense row-major:
/// `w1` is `hidden x (2d + 1)`, the two heads are `d x hidden` and
/// `tri_len(d) x hidden`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EncoderParams {
    pub d: usize,
    pub hidden: usize,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w_mean: Vec<f64>,
    pub b_mean: Vec<f64>,
    pub w_chol: Vec<f64>,
    pub b_chol: Vec<f64>,
}

fn xavier<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Vec<f64> {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    (0..rows * cols)
        .map(|_| rng.random_range(-limit..limit))
        .collect()
}

impl EncoderParams {
    /// Xavier-uniform weights, zero biases.
    pub fn init<R: Rng>(d: usize, hidden: usize, rng: &mut R) -> Self {
        let input = 2 * d + 1;
        let tri = tri_len(d);
        Self {
            d,
            hidden,
            w1: xavier(rng, hidden, input),
            b1: vec![0.0; hidden],
            w_mean: xavier(rng, d, hidden),
            b_mean: vec![0.0; d],
            w_chol: xavier(rng, tri, hidden),
            b_chol: vec![0.0; tri],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let input = 2 * self.d + 1;
        let tri = tri_len(self.d);
        let checks = [
            (self.w1.len(), self.hidden * input, "w1"),
            (self.b1.len(), self.hidden, "b1"),
            (self.w_mean.len(), self.d * self.hidden, "w_mean"),
            (self.b_mean.len(), self.d, "b_mean"),
            (self.w_chol.len(), tri * self.hidden, "w_chol"),
            (self.b_chol.len(), tri, "b_chol"),
        ];
        for (got, want, name) in checks {
            if got != want {
                return Err(Error::Dim(format!(
                    "encoder {name} has {got} entries, expected {want}"
                )));
            }
        }
        Ok(())
    }

    /// Assembles the network input `[x zero-filled at missing, mask, y]`.
    pub fn stack_input(&self, x: &[f64], mask: &[bool], y: u8) -> Result<Vec<f64>> {
        if x.len() != self.d || mask.len() != self.d {
            return Err(Error::Dim("encoder input: length mismatch".into()));
        }
        let mut t = Vec::with_capacity(2 * self.d + 1);
        for j in 0..self.d {
            t.push(if mask[j] { x[j] } else { 0.0 });
        }
        for &m in mask {
            t.push(if m { 1.0 } else { 0.0 });
        }
        t.push(f64::from(y));
        Ok(t)
    }

    /// Full-dimension forward pass: hidden activations, the `d`-vector of
    /// means, and the `tri_len(d)` unconstrained Cholesky vector.
    pub fn forward_full(&self, input: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let inp = 2 * self.d + 1;
        if input.len() != inp {
            return Err(Error::Dim("encoder forward: input length".into()));
        }
        let mut hid = vec![0.0; self.hidden];
        for i in 0..self.hidden {
            let mut acc = self.b1[i];
            let row = &self.w1[i * inp..(i + 1) * inp];
            for (w, t) in row.iter().zip(input) {
                acc += w * t;
            }
            hid[i] = acc.tanh();
        }
        let mut mean = vec![0.0; self.d];
        for i in 0..self.d {
            let row = &self.w_mean[i * self.hidden..(i + 1) * self.hidden];
            mean[i] = self.b_mean[i] + row.iter().zip(&hid).map(|(w, h)| w * h).sum::<f64>();
        }
        let tri = tri_len(self.d);
        let mut cvec = vec![0.0; tri];
        for i in 0..tri {
            let row = &self.w_chol[i * self.hidden..(i + 1) * self.hidden];
            cvec[i] = self.b_chol[i] + row.iter().zip(&hid).map(|(w, h)| w * h).sum::<f64>();
        }
        Ok((mean, cvec))
    }

    /// Proposes a Gaussian over the row's missing coordinates. Complete
    /// rows get a zero-dimensional posterior.
    pub fn encode(&self, x: &[f64], mask: &[bool], y: u8) -> Result<VariationalPosterior> {
        let input = self.stack_input(x, mask, y)?;
        let (full_mean, full_cvec) = self.forward_full(&input)?;
        let mis_idx: Vec<usize> = (0..self.d).filter(|&j| !mask[j]).collect();

        let mean: Vec<f64> = mis_idx.iter().map(|&j| full_mean[j]).collect();
        let gathered: Vec<f64> = submatrix_tri_indices(&mis_idx)
            .into_iter()
            .map(|k| full_cvec[k])
            .collect();
        let chol = CholFactor::from_unconstrained(&gathered, mis_idx.len())?;
        Ok(VariationalPosterior { mis_idx, mean, chol })
    }
}

/// Packed-triangle positions of the principal submatrix selected by
/// `mis_idx` (ascending): entry `(a, b)` of the restricted triangle comes
/// from position `tri_index(mis_idx[a], mis_idx[b])` of the full one.
pub fn submatrix_tri_indices(mis_idx: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(tri_len(mis_idx.len()));
    for (a, &ia) in mis_idx.iter().enumerate() {
        for &ib in &mis_idx[..=a] {
            out.push(tri_index(ia, ib));
        }
    }
    out
}

/// Gaussian proposal over one row's missing coordinates.
#[derive(Debug, Clone)]
pub struct VariationalPosterior {
    pub mis_idx: Vec<usize>,
    pub mean: Vec<f64>,
    pub chol: CholFactor,
}

impl VariationalPosterior {
    pub fn dim(&self) -> usize {
        self.mis_idx.len()
    }

    pub fn logpdf(&self, x_mis: &[f64]) -> Result<f64> {
        mvn_logpdf(x_mis, &self.mean, &self.chol)
    }

    /// Draws `mean + L eps` for a standard normal `eps`.
    pub fn sample(&self, eps: &[f64]) -> Result<Vec<f64>> {
        reparam_sample(&self.mean, &self.chol, eps)
    }
}

// ---------------------------------------------------------------------------
