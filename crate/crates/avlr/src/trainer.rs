//! Training loop: standardize the covariates, initialize the parameter
//! bundle, run Adam on the importance-weighted bound, and wrap the result
//! in a [`FittedModel`] that reports every estimate on the original scale.

use crate::dataset::Dataset;
use crate::diffcore::{AdamState, Tape};
use crate::distributions::CholFactor;
use crate::encoder::{EncoderParams, VariationalPosterior};
use crate::error::{Error, Result};
use crate::model::{MissParams, ModelParams};
use crate::objective::{objective_batch, Params, PreparedRow};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

/// Knobs for [`fit`]. The defaults are the settings used throughout the
/// benchmark harness.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Importance draws per row.
    pub k: usize,
    /// Encoder hidden width.
    pub hidden: usize,
    /// Model the missingness pattern jointly instead of ignoring it.
    pub mnar: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 150,
            batch_size: 128,
            learning_rate: 3e-3,
            k: 5,
            hidden: 128,
            mnar: false,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 || self.k == 0 || self.hidden == 0 {
            return Err(Error::Config(
                "epochs, batch_size, k, and hidden must all be positive".into(),
            ));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Standardization
// ---------------------------------------------------------------------------

/// Per-column affine transform fitted on the observed entries. Columns
/// whose observed spread is degenerate keep a unit scale so standardization
/// never divides by zero.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Scaler {
    pub fn fit(data: &Dataset) -> Result<Self> {
        let d = data.d;
        let mean = data.observed_column_means()?;
        let mut std = vec![0.0; d];
        for j in 0..d {
            let mut acc = 0.0;
            let mut count = 0usize;
            for i in 0..data.n {
                if data.mask[i * d + j] {
                    let dev = data.x[i * d + j] - mean[j];
                    acc += dev * dev;
                    count += 1;
                }
            }
            // Sample variance over the observed cells.
            let var = if count > 1 { acc / (count - 1) as f64 } else { 0.0 };
            let s = var.sqrt();
            std[j] = if s < 1e-12 { 1.0 } else { s };
        }
        Ok(Self { mean, std })
    }

    pub fn d(&self) -> usize {
        self.mean.len()
    }

    pub fn transform_value(&self, j: usize, v: f64) -> f64 {
        (v - self.mean[j]) / self.std[j]
    }

    pub fn inverse_value(&self, j: usize, v: f64) -> f64 {
        self.mean[j] + self.std[j] * v
    }

    /// Standardizes the observed cells of a row, leaving masked positions
    /// at zero (the encoder's fill value).
    pub fn transform_row(&self, x: &[f64], mask: &[bool]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        for j in 0..x.len() {
            if mask[j] {
                out[j] = self.transform_value(j, x[j]);
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Initialization
// ---------------------------------------------------------------------------

/// Starting point for the optimizer, computed on the (already standardized)
/// training rows: zero label weights, observed column means for the prior
/// location, the covariance of the mean-imputed matrix (ridged) for the
/// prior scale, zero selection coefficients, Xavier encoder weights.
pub fn init_params(
    rows: &[PreparedRow],
    d: usize,
    config: &TrainConfig,
    rng: &mut ChaCha12Rng,
) -> Result<Params> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::Data("cannot initialize from zero rows".into()));
    }

    // Observed means (these rows are standardized, so they sit near zero,
    // but computing them keeps the initializer correct for any input).
    let mut mean = vec![0.0; d];
    let mut count = vec![0usize; d];
    for row in rows {
        for j in 0..d {
            if row.mask[j] {
                mean[j] += row.x_filled[j];
                count[j] += 1;
            }
        }
    }
    for j in 0..d {
        if count[j] == 0 {
            return Err(Error::Data(format!("column {j} has no observed values")));
        }
        mean[j] /= count[j] as f64;
    }

    // Covariance of the mean-imputed matrix, plus a small ridge.
    let mut cov = vec![0.0; d * d];
    for row in rows {
        let dev: Vec<f64> = (0..d)
            .map(|j| if row.mask[j] { row.x_filled[j] - mean[j] } else { 0.0 })
            .collect();
        for a in 0..d {
            for b in 0..=a {
                cov[a * d + b] += dev[a] * dev[b];
            }
        }
    }
    for a in 0..d {
        for b in 0..=a {
            let v = cov[a * d + b] / n as f64 + if a == b { 1e-3 } else { 0.0 };
            cov[a * d + b] = v;
            cov[b * d + a] = v;
        }
    }

    let sigma_chol = CholFactor::from_covariance(&cov, d)?.to_unconstrained();
    let model = ModelParams {
        d,
        beta: vec![0.0; d + 1],
        mu: mean,
        sigma_chol,
    };
    let miss = config.mnar.then(|| MissParams::zeros(d));
    let encoder = EncoderParams::init(d, config.hidden, rng);
    Ok(Params { model, miss, encoder })
}

// ---------------------------------------------------------------------------
// Fitting
// ---------------------------------------------------------------------------

/// Mean training loss per epoch (negative bound, lower is better).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epoch_loss: Vec<f64>,
}

/// A trained model: parameters on the standardized scale plus the scaler
/// that maps them back. All public accessors report original-scale values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FittedModel {
    pub params: Params,
    pub scaler: Scaler,
}

/// Maximizes the importance-weighted bound with Adam over shuffled
/// minibatches. Deterministic given `config.seed`.
pub fn fit(data: &Dataset, config: &TrainConfig) -> Result<(FittedModel, TrainHistory)> {
    config.validate()?;
    let d = data.d;
    let scaler = Scaler::fit(data)?;

    let mut rows = Vec::with_capacity(data.n);
    for i in 0..data.n {
        let xs = scaler.transform_row(data.x_row(i), data.mask_row(i));
        rows.push(PreparedRow::new(&xs, data.mask_row(i), data.y[i])?);
    }

    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    let params = init_params(&rows, d, config, &mut rng)?;
    let mut flat = params.flatten();
    let mut adam = AdamState::new(flat.len(), config.learning_rate);
    let mut tape = Tape::new();

    let mut order: Vec<usize> = (0..rows.len()).collect();
    let mut history = TrainHistory { epoch_loss: Vec::with_capacity(config.epochs) };

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<&PreparedRow> = chunk.iter().map(|&i| &rows[i]).collect();
            let current = Params::unflatten(&flat, d, config.hidden, config.mnar)?;
            let eval = objective_batch(&mut tape, &current, &batch, config.k, &mut rng)
                .map_err(|e| match e {
                    Error::Numeric(msg) => Error::Numeric(format!(
                        "epoch {epoch}, batch {batches}: {msg}"
                    )),
                    other => other,
                })?;
            adam.step(&mut flat, &eval.grad).map_err(|e| match e {
                Error::Numeric(msg) => {
                    Error::Numeric(format!("epoch {epoch}, batch {batches}: {msg}"))
                }
                other => other,
            })?;
            epoch_loss += eval.loss;
            batches += 1;
        }
        history.epoch_loss.push(epoch_loss / batches as f64);
    }

    let final_params = Params::unflatten(&flat, d, config.hidden, config.mnar)?;
    Ok((
        FittedModel { params: final_params, scaler },
        history,
    ))
}

// ---------------------------------------------------------------------------
// Original-scale accessors
// ---------------------------------------------------------------------------

impl FittedModel {
    pub fn d(&self) -> usize {
        self.params.d()
    }

    /// Label weights on the original covariate scale. With
    /// `x_std = (x - m) / s`, the standardized logit
    /// `b0 + sum_j b_j x_std_j` rewrites exactly to
    /// `(b0 - sum_j b_j m_j / s_j) + sum_j (b_j / s_j) x_j`.
    pub fn beta_original(&self) -> Vec<f64> {
        let d = self.d();
        let bs = &self.params.model.beta;
        let (m, s) = (&self.scaler.mean, &self.scaler.std);
        let mut beta = vec![0.0; d + 1];
        beta[0] = bs[0] - (0..d).map(|j| bs[j + 1] * m[j] / s[j]).sum::<f64>();
        for j in 0..d {
            beta[j + 1] = bs[j + 1] / s[j];
        }
        beta
    }

    /// Covariate prior mean on the original scale.
    pub fn mu_original(&self) -> Vec<f64> {
        let (m, s) = (&self.scaler.mean, &self.scaler.std);
        self.params
            .model
            .mu
            .iter()
            .enumerate()
            .map(|(j, &v)| m[j] + s[j] * v)
            .collect()
    }

    /// Covariate prior factor on the original scale: scaling a Gaussian by
    /// `diag(s)` scales row `i` of its Cholesky factor by `s_i`.
    pub fn sigma_chol_original(&self) -> Result<CholFactor> {
        let chol = self.params.model.prior_chol()?;
        let d = self.d();
        let mut data = chol.packed().to_vec();
        let mut pos = 0;
        for i in 0..d {
            for _ in 0..=i {
                data[pos] *= self.scaler.std[i];
                pos += 1;
            }
        }
        CholFactor::from_packed(data, d)
    }

    /// Covariate prior covariance on the original scale.
    pub fn sigma_original(&self) -> Result<Vec<f64>> {
        Ok(self.sigma_chol_original()?.to_covariance())
    }

    /// Selection coefficients on the original scale, by the same affine
    /// rewrite as [`beta_original`](Self::beta_original) applied per row.
    pub fn miss_original(&self) -> Option<MissParams> {
        let miss = self.params.miss.as_ref()?;
        let d = self.d();
        let (m, s) = (&self.scaler.mean, &self.scaler.std);
        let mut coef = vec![0.0; d * (d + 2)];
        for j in 0..d {
            let row = &miss.coef[j * (d + 2)..(j + 1) * (d + 2)];
            let out = &mut coef[j * (d + 2)..(j + 1) * (d + 2)];
            out[0] = row[0] - (0..d).map(|k| row[1 + k] * m[k] / s[k]).sum::<f64>();
            for k in 0..d {
                out[1 + k] = row[1 + k] / s[k];
            }
            out[d + 1] = row[d + 1];
        }
        Some(MissParams { d, coef })
    }

    /// Runs the encoder on one raw-scale row.
    pub fn encode_row(&self, x: &[f64], mask: &[bool], y: u8) -> Result<VariationalPosterior> {
        let xs = self.scaler.transform_row(x, mask);
        self.params.encoder.encode(&xs, mask, y)
    }

    /// Posterior-mean completion of a dataset, on the original scale.
    /// Observed cells pass through untouched.
    pub fn impute_posterior_mean(&self, data: &Dataset) -> Result<Vec<f64>> {
        let d = self.d();
        if d != data.d {
            return Err(Error::Dim("imputation: dimension mismatch".into()));
        }
        let mut out = vec![0.0; data.n * d];
        for i in 0..data.n {
            let mask = data.mask_row(i);
            let post = self.encode_row(data.x_row(i), mask, data.y[i])?;
            for j in 0..d {
                out[i * d + j] = data.x[i * d + j];
            }
            for (a, &j) in post.mis_idx.iter().enumerate() {
                out[i * d + j] = self.scaler.inverse_value(j, post.mean[a]);
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(s)?;
        model.params.validate()?;
        if model.scaler.d() != model.params.d() || model.scaler.std.len() != model.params.d() {
            return Err(Error::Dim("scaler dimension mismatch".into()));
        }
        Ok(model)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::mvn_logpdf;
    use rand::Rng;

    fn mcar_dataset(n: usize, d: usize, rate: f64, seed: u64) -> Dataset {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut x = vec![0.0; n * d];
        let mut mask = vec![true; n * d];
        let mut y = vec![0u8; n];
        for i in 0..n {
            let mut eta = -0.2;
            for j in 0..d {
                let v: f64 = rng.random_range(-2.0..2.0) + j as f64 * 0.5;
                x[i * d + j] = v;
                eta += if j % 2 == 0 { 0.9 * v } else { -0.7 * v };
            }
            y[i] = u8::from(rng.random_range(0.0..1.0) < crate::distributions::sigmoid(eta));
            for j in 0..d {
                if rng.random_range(0.0..1.0) < rate {
                    mask[i * d + j] = false;
                }
            }
            if (0..d).all(|j| !mask[i * d + j]) {
                mask[i * d] = true;
            }
        }
        for i in 0..n * d {
            if !mask[i] {
                x[i] = f64::NAN;
            }
        }
        Dataset::new(n, d, x, mask, y).unwrap()
    }

    fn small_fitted(seed: u64, mnar: bool) -> (FittedModel, TrainHistory, Dataset) {
        let data = mcar_dataset(80, 3, 0.3, seed);
        let config = TrainConfig {
            epochs: 25,
            batch_size: 32,
            learning_rate: 3e-3,
            k: 2,
            hidden: 8,
            mnar,
            seed,
        };
        let (model, hist) = fit(&data, &config).unwrap();
        (model, hist, data)
    }

    #[test]
    fn scaler_handles_constant_columns() {
        let x = vec![2.0, 1.0, 2.0, -1.0, 2.0, 3.0];
        let mask = vec![true; 6];
        let data = Dataset::new(3, 2, x, mask, vec![0, 1, 0]).unwrap();
        let scaler = Scaler::fit(&data).unwrap();
        assert_eq!(scaler.std[0], 1.0);
        assert!((scaler.mean[0] - 2.0).abs() < 1e-15);
        assert!(scaler.std[1] > 1.0);
    }

    #[test]
    fn scaler_uses_only_observed_cells() {
        let x = vec![1.0, f64::NAN, 3.0, 10.0];
        let mask = vec![true, false, true, true];
        let data = Dataset::new(2, 2, x, mask, vec![0, 1]).unwrap();
        let scaler = Scaler::fit(&data).unwrap();
        assert!((scaler.mean[0] - 2.0).abs() < 1e-15);
        assert!((scaler.mean[1] - 10.0).abs() < 1e-15);
    }

    #[test]
    fn initializer_produces_a_valid_bundle() {
        let data = mcar_dataset(50, 3, 0.25, 2);
        let scaler = Scaler::fit(&data).unwrap();
        let rows: Vec<PreparedRow> = (0..data.n)
            .map(|i| {
                let xs = scaler.transform_row(data.x_row(i), data.mask_row(i));
                PreparedRow::new(&xs, data.mask_row(i), data.y[i]).unwrap()
            })
            .collect();
        let config = TrainConfig { hidden: 8, mnar: true, ..Default::default() };
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        let params = init_params(&rows, 3, &config, &mut rng).unwrap();
        params.validate().unwrap();
        assert!(params.model.beta.iter().all(|&b| b == 0.0));
        // Standardized data: prior location starts near the origin.
        assert!(params.model.mu.iter().all(|m| m.abs() < 0.3));
        assert!(params.miss.unwrap().coef.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn training_reduces_the_loss() {
        let (_, hist, _) = small_fitted(11, false);
        let first = hist.epoch_loss[0];
        let last = *hist.epoch_loss.last().unwrap();
        assert!(
            last < first - 0.05,
            "loss did not improve: first {first}, last {last}"
        );
    }

    #[test]
    fn fitting_is_deterministic() {
        let (m1, h1, _) = small_fitted(5, true);
        let (m2, h2, _) = small_fitted(5, true);
        assert_eq!(m1.params.flatten(), m2.params.flatten());
        assert_eq!(h1.epoch_loss, h2.epoch_loss);
    }

    #[test]
    fn logit_is_invariant_to_standardization() {
        let (model, _, _) = small_fitted(7, false);
        let beta = model.beta_original();
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        for _ in 0..20 {
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-3.0..3.0)).collect();
            let xs: Vec<f64> = (0..3).map(|j| model.scaler.transform_value(j, x[j])).collect();
            let bs = &model.params.model.beta;
            let eta_std = bs[0] + (0..3).map(|j| bs[j + 1] * xs[j]).sum::<f64>();
            let eta_orig = beta[0] + (0..3).map(|j| beta[j + 1] * x[j]).sum::<f64>();
            assert!((eta_std - eta_orig).abs() < 1e-12);
        }
    }

    #[test]
    fn prior_density_transforms_with_the_jacobian() {
        // p_orig(x) = p_std((x - m) / s) / prod_j s_j, exactly.
        let (model, _, _) = small_fitted(9, false);
        let chol_std = model.params.model.prior_chol().unwrap();
        let chol_orig = model.sigma_chol_original().unwrap();
        let mu_orig = model.mu_original();
        let log_jac: f64 = model.scaler.std.iter().map(|s| s.ln()).sum();
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        for _ in 0..20 {
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-3.0..3.0)).collect();
            let xs: Vec<f64> = (0..3).map(|j| model.scaler.transform_value(j, x[j])).collect();
            let lp_std = mvn_logpdf(&xs, &model.params.model.mu, &chol_std).unwrap();
            let lp_orig = mvn_logpdf(&x, &mu_orig, &chol_orig).unwrap();
            assert!((lp_orig - (lp_std - log_jac)).abs() < 1e-10);
        }
    }

    #[test]
    fn selection_logits_are_invariant_to_standardization() {
        let (model, _, _) = small_fitted(13, true);
        let miss_std = model.params.miss.as_ref().unwrap();
        let miss_orig = model.miss_original().unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for _ in 0..20 {
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-3.0..3.0)).collect();
            let xs: Vec<f64> = (0..3).map(|j| model.scaler.transform_value(j, x[j])).collect();
            for j in 0..3 {
                for y in [0u8, 1u8] {
                    let a = miss_std.logit_row(j, &xs, y).unwrap();
                    let b = miss_orig.logit_row(j, &x, y).unwrap();
                    assert!((a - b).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn imputation_passes_observed_cells_through() {
        let (model, _, data) = small_fitted(15, false);
        let completed = model.impute_posterior_mean(&data).unwrap();
        for i in 0..data.n {
            for j in 0..data.d {
                let v = completed[i * data.d + j];
                if data.mask[i * data.d + j] {
                    assert_eq!(v, data.x[i * data.d + j]);
                } else {
                    assert!(v.is_finite());
                }
            }
        }
    }

    #[test]
    fn save_load_round_trip() {
        let (model, _, _) = small_fitted(17, true);
        let json = model.to_json().unwrap();
        let back = FittedModel::from_json(&json).unwrap();
        assert_eq!(back.params.flatten(), model.params.flatten());
        assert_eq!(back.scaler.mean, model.scaler.mean);
    }

    #[test]
    fn diverging_learning_rate_reports_context() {
        let data = mcar_dataset(40, 2, 0.3, 1);
        let config = TrainConfig {
            epochs: 30,
            batch_size: 16,
            learning_rate: 1e6,
            k: 2,
            hidden: 4,
            mnar: false,
            seed: 1,
        };
        match fit(&data, &config) {
            Err(Error::Numeric(msg)) => {
                assert!(msg.contains("epoch"), "missing context: {msg}");
            }
            Err(other) => panic!("unexpected error kind: {other}"),
            Ok(_) => panic!("expected divergence at lr=1e6"),
        }
    }

    #[test]
    fn invalid_config_is_rejected() {
        let data = mcar_dataset(10, 2, 0.2, 1);
        let bad = TrainConfig { epochs: 0, ..Default::default() };
        assert!(matches!(fit(&data, &bad), Err(Error::Config(_))));
        let bad_lr = TrainConfig { learning_rate: -1.0, ..Default::default() };
        assert!(matches!(fit(&data, &bad_lr), Err(Error::Config(_))));
    }
}
