use crate::error::{Error, Result};

/// A binary-classification dataset with possibly missing covariates.
///
/// `x` is n x d row-major; missing cells hold NaN and are flagged by
/// `mask` (true = observed). Synthetic datasets may carry the complete
/// pre-masking matrix for imputation scoring.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub n: usize,
    pub d: usize,
    pub x: Vec<f64>,
    pub mask: Vec<bool>,
    pub y: Vec<u8>,
    pub complete: Option<Vec<f64>>,
}

impl Dataset {
    pub fn new(n: usize, d: usize, x: Vec<f64>, mask: Vec<bool>, y: Vec<u8>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::Data("dataset must have at least one row and one column".into()));
        }
        if x.len() != n * d || mask.len() != n * d {
            return Err(Error::Dim(format!(
                "expected {} cells, got x: {}, mask: {}",
                n * d,
                x.len(),
                mask.len()
            )));
        }
        if y.len() != n {
            return Err(Error::Dim(format!("expected {} labels, got {}", n, y.len())));
        }
        if let Some(bad) = y.iter().position(|&v| v > 1) {
            return Err(Error::Data(format!("label at row {bad} is not binary")));
        }
        for i in 0..n * d {
            if mask[i] && !x[i].is_finite() {
                return Err(Error::Data(format!(
                    "observed cell (row {}, col {}) is not finite",
                    i / d,
                    i % d
                )));
            }
        }
        let mut x = x;
        for i in 0..n * d {
            if !mask[i] {
                x[i] = f64::NAN;
            }
        }
        Ok(Dataset { n, d, x, mask, y, complete: None })
    }

    /// Builds a complete dataset (every cell observed).
    pub fn complete(n: usize, d: usize, x: Vec<f64>, y: Vec<u8>) -> Result<Self> {
        let mask = vec![true; n * d];
        Self::new(n, d, x, mask, y)
    }

    pub fn with_complete(mut self, complete: Vec<f64>) -> Result<Self> {
        if complete.len() != self.n * self.d {
            return Err(Error::Dim("complete matrix size mismatch".into()));
        }
        self.complete = Some(complete);
        Ok(self)
    }

    pub fn x_row(&self, i: usize) -> &[f64] {
        &self.x[i * self.d..(i + 1) * self.d]
    }

    pub fn mask_row(&self, i: usize) -> &[bool] {
        &self.mask[i * self.d..(i + 1) * self.d]
    }

    pub fn missing_indices(&self, i: usize) -> Vec<usize> {
        self.mask_row(i)
            .iter()
            .enumerate()
            .filter(|(_, &m)| !m)
            .map(|(j, _)| j)
            .collect()
    }

    /// Per-column mean over observed cells; error when a column has none.
    pub fn observed_column_means(&self) -> Result<Vec<f64>> {
        let mut sums = vec![0.0; self.d];
        let mut counts = vec![0usize; self.d];
        for i in 0..self.n {
            for j in 0..self.d {
                if self.mask[i * self.d + j] {
                    sums[j] += self.x[i * self.d + j];
                    counts[j] += 1;
                }
            }
        }
        for j in 0..self.d {
            if counts[j] == 0 {
                return Err(Error::Data(format!("column {j} has no observed values")));
            }
            sums[j] /= counts[j] as f64;
        }
        Ok(sums)
    }

    /// Fraction of missing cells over the whole matrix.
    pub fn missing_rate(&self) -> f64 {
        let miss = self.mask.iter().filter(|&&m| !m).count();
        miss as f64 / (self.n * self.d) as f64
    }
}
