//! Benchmark harness: generates synthetic incomplete data, runs each
//! requested method on the same per-replication datasets, scores them, and
//! aggregates everything into a reproducible report.

pub mod csv;

use crate::baselines::{
    fit_mean_baseline, mean_baseline_predict, saem_fit, saem_predict_proba, SaemConfig,
};
use crate::datagen::{
    apply_mechanism, calibrate_intercepts, gen_complete, GenSpec, Mechanism, MechanismKind,
};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::metrics::{auc, brier, confusion_metrics, frobenius_diff, imputation_rmse, mean_std, rmse};
use crate::predictor::{classify, predict_dataset, PredictConfig};
use crate::trainer::{fit, TrainConfig};
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::time::Instant;

// Seed mixing constants: the test set, the calibration probes, and the two
// mask draws each get an independent stream derived from the rep seed.
const MIX_TEST: u64 = 0x9E37_79B9_7F4A_7C15;
const MIX_CAL: u64 = 0x94D0_49BB_1331_11EB;
const MIX_MASK_TRAIN: u64 = 0xD1B5_4A32_D192_ED03;
const MIX_MASK_TEST: u64 = 0xBF58_476D_1CE4_E5B9;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// The competing estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Amortized variational fit treating the mask as ignorable.
    Avlr,
    /// Amortized variational fit with the selection model enabled.
    AvlrMnar,
    /// Stochastic EM baseline.
    Saem,
    /// Column-mean imputation plus a plain logistic fit.
    Mean,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Avlr => "avlr",
            Method::AvlrMnar => "avlr-mnar",
            Method::Saem => "saem",
            Method::Mean => "mean",
        }
    }

    pub fn all() -> Vec<Method> {
        vec![Method::Avlr, Method::AvlrMnar, Method::Saem, Method::Mean]
    }
}

/// One benchmark scenario: a generator, a missingness mechanism with its
/// target rate, the replication count, and the methods to compare.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub label: String,
    pub mechanism: MechanismKind,
    pub rate: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub reps: usize,
    pub base_seed: u64,
    pub methods: Vec<Method>,
    pub train: TrainConfig,
    pub predict: PredictConfig,
    pub saem: SaemConfig,
    /// Ground truth (its `n` and `seed` are overridden per replication).
    pub generator: GenSpec,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            label: "benchmark".into(),
            mechanism: MechanismKind::Mcar,
            rate: 0.5,
            n_train: 2000,
            n_test: 500,
            reps: 5,
            base_seed: 0,
            methods: Method::all(),
            train: TrainConfig::default(),
            predict: PredictConfig::default(),
            saem: SaemConfig::default(),
            generator: GenSpec::benchmark_default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 || self.n_train == 0 || self.n_test == 0 {
            return Err(Error::Config("experiment: counts must be positive".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("experiment: no methods selected".into()));
        }
        self.train.validate()?;
        self.generator.validate()?;
        Mechanism::new(self.mechanism, self.rate, self.generator.d, 0)?;
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

/// Scores of one method on one replication. Metrics that are undefined
/// for a method (a covariance for the mean baseline) or for a dataset
/// (imputation error with nothing missing) stay empty.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MethodMetrics {
    pub rmse_beta: Option<f64>,
    pub frob_sigma: Option<f64>,
    pub auc: Option<f64>,
    pub accuracy: Option<f64>,
    pub f1: Option<f64>,
    pub brier: Option<f64>,
    pub rmse_imp: Option<f64>,
    pub fit_seconds: f64,
    pub predict_seconds: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MethodRun {
    pub rep: usize,
    pub seed: u64,
    pub ok: bool,
    /// Failure marker: the error message when the method did not finish.
    pub error: Option<String>,
    pub metrics: Option<MethodMetrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub std: f64,
    /// Replications the statistic is averaged over.
    pub n: usize,
}

/// Per-method aggregate over the successful replications. The key set is
/// fixed; a metric no replication produced stays empty rather than absent.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub rmse_beta: Option<MetricSummary>,
    pub frob_sigma: Option<MetricSummary>,
    pub auc: Option<MetricSummary>,
    pub accuracy: Option<MetricSummary>,
    pub f1: Option<MetricSummary>,
    pub brier: Option<MetricSummary>,
    pub rmse_imp: Option<MetricSummary>,
    pub fit_seconds: Option<MetricSummary>,
    pub predict_seconds: Option<MetricSummary>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MethodReport {
    pub method: Method,
    pub failures: usize,
    pub summary: MethodSummary,
    pub runs: Vec<MethodRun>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultsTable {
    pub label: String,
    pub created: String,
    pub version: String,
    /// FNV-1a hash of the serialized configuration, for quick run identity.
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub methods: Vec<MethodReport>,
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325_u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x100_0000_01b3);
    }
    hash
}

impl ResultsTable {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    /// Fixed-width text rendering of the aggregate table.
    pub fn to_text(&self) -> String {
        fn cell(s: &Option<MetricSummary>) -> String {
            match s {
                Some(m) => format!("{:.4} ± {:.4}", m.mean, m.std),
                None => "--".into(),
            }
        }
        let mut out = String::new();
        out.push_str(&format!(
            "{} | mechanism {:?} rate {} | {} reps | config {}\n",
            self.label, self.config.mechanism, self.config.rate, self.config.reps,
            self.config_hash
        ));
        out.push_str(&format!(
            "{:<10} {:>18} {:>18} {:>18} {:>18} {:>18} {:>10} {:>9}\n",
            "method", "rmse_beta", "auc", "accuracy", "brier", "rmse_imp", "fit_s", "failures"
        ));
        for report in &self.methods {
            let fit_s = report
                .summary
                .fit_seconds
                .as_ref()
                .map_or("--".into(), |m| format!("{:.2}", m.mean));
            out.push_str(&format!(
                "{:<10} {:>18} {:>18} {:>18} {:>18} {:>18} {:>10} {:>9}\n",
                report.method.name(),
                cell(&report.summary.rmse_beta),
                cell(&report.summary.auc),
                cell(&report.summary.accuracy),
                cell(&report.summary.brier),
                cell(&report.summary.rmse_imp),
                fit_s,
                if report.failures > 0 {
                    format!("{}/{}", report.failures, report.runs.len())
                } else {
                    "0".into()
                }
            ));
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

struct RepData {
    seed: u64,
    train: Dataset,
    test: Dataset,
}

fn make_rep_data(config: &ExperimentConfig, rep: usize) -> Result<RepData> {
    let seed = config.base_seed + rep as u64;
    let train_complete = gen_complete(&config.generator.with_n_seed(config.n_train, seed))?;
    let test_complete =
        gen_complete(&config.generator.with_n_seed(config.n_test, seed ^ MIX_TEST))?;
    let mech = Mechanism::new(config.mechanism, config.rate, config.generator.d, seed)?;
    let calibrated = calibrate_intercepts(&mech, &train_complete, seed ^ MIX_CAL)?;
    let train = apply_mechanism(&train_complete, &calibrated, seed ^ MIX_MASK_TRAIN)?;
    let test = apply_mechanism(&test_complete, &calibrated, seed ^ MIX_MASK_TEST)?;
    Ok(RepData { seed, train, test })
}

fn score(
    config: &ExperimentConfig,
    data: &RepData,
    probs: &[f64],
    beta_est: &[f64],
    sigma_est: Option<&[f64]>,
    completed: &[f64],
    fit_seconds: f64,
    predict_seconds: f64,
) -> Result<MethodMetrics> {
    let truth = data
        .train
        .complete
        .as_ref()
        .ok_or_else(|| Error::Data("benchmark: training truth matrix missing".into()))?;
    let d = config.generator.d;
    let preds = classify(probs, 0.5);
    let confusion = confusion_metrics(&preds, &data.test.y)?;
    Ok(MethodMetrics {
        rmse_beta: Some(rmse(beta_est, &config.generator.beta)?),
        frob_sigma: sigma_est
            .map(|s| frobenius_diff(s, &config.generator.sigma, d))
            .transpose()?,
        auc: auc(probs, &data.test.y)?,
        accuracy: Some(confusion.accuracy),
        f1: confusion.f1,
        brier: Some(brier(probs, &data.test.y)?),
        rmse_imp: imputation_rmse(completed, truth, &data.train.mask)?,
        fit_seconds,
        predict_seconds,
    })
}

fn run_method(
    config: &ExperimentConfig,
    method: Method,
    data: &RepData,
) -> Result<MethodMetrics> {
    match method {
        Method::Avlr | Method::AvlrMnar => {
            let mut tc = config.train.clone();
            tc.mnar = method == Method::AvlrMnar;
            tc.seed = data.seed;
            let started = Instant::now();
            let (model, _) = fit(&data.train, &tc)?;
            let fit_seconds = started.elapsed().as_secs_f64();

            let started = Instant::now();
            let pc = PredictConfig { s: config.predict.s, seed: data.seed };
            let probs = predict_dataset(&model, &data.test, &pc)?;
            let predict_seconds = started.elapsed().as_secs_f64();

            let completed = model.impute_posterior_mean(&data.train)?;
            let sigma = model.sigma_original()?;
            score(
                config,
                data,
                &probs,
                &model.beta_original(),
                Some(&sigma),
                &completed,
                fit_seconds,
                predict_seconds,
            )
        }
        Method::Saem => {
            let mut sc = config.saem.clone();
            sc.seed = data.seed;
            let started = Instant::now();
            let fitres = saem_fit(&data.train, &sc)?;
            let fit_seconds = started.elapsed().as_secs_f64();

            let started = Instant::now();
            let probs =
                saem_predict_proba(&fitres.params, &data.test, config.predict.s, data.seed)?;
            let predict_seconds = started.elapsed().as_secs_f64();

            let sigma = fitres.params.prior_chol()?.to_covariance();
            score(
                config,
                data,
                &probs,
                &fitres.params.beta,
                Some(&sigma),
                &fitres.completed,
                fit_seconds,
                predict_seconds,
            )
        }
        Method::Mean => {
            let started = Instant::now();
            let baseline = fit_mean_baseline(&data.train)?;
            let fit_seconds = started.elapsed().as_secs_f64();

            let started = Instant::now();
            let probs = mean_baseline_predict(&baseline.beta, &data.test)?;
            let predict_seconds = started.elapsed().as_secs_f64();

            score(
                config,
                data,
                &probs,
                &baseline.beta,
                None,
                &baseline.completed,
                fit_seconds,
                predict_seconds,
            )
        }
    }
}

fn summarize(runs: &[MethodRun]) -> MethodSummary {
    fn agg(runs: &[MethodRun], pick: impl Fn(&MethodMetrics) -> Option<f64>) -> Option<MetricSummary> {
        let values: Vec<f64> = runs
            .iter()
            .filter_map(|r| r.metrics.as_ref().and_then(&pick))
            .collect();
        if values.is_empty() {
            return None;
        }
        let (mean, std) = mean_std(&values).ok()?;
        Some(MetricSummary { mean, std, n: values.len() })
    }
    MethodSummary {
        rmse_beta: agg(runs, |m| m.rmse_beta),
        frob_sigma: agg(runs, |m| m.frob_sigma),
        auc: agg(runs, |m| m.auc),
        accuracy: agg(runs, |m| m.accuracy),
        f1: agg(runs, |m| m.f1),
        brier: agg(runs, |m| m.brier),
        rmse_imp: agg(runs, |m| m.rmse_imp),
        fit_seconds: agg(runs, |m| Some(m.fit_seconds)),
        predict_seconds: agg(runs, |m| Some(m.predict_seconds)),
    }
}

/// Runs the full scenario: every method sees the same data within each
/// replication (seed = base + rep), and a method failure is recorded in
/// its run row without aborting the others.
pub fn run_benchmark(config: &ExperimentConfig) -> Result<ResultsTable> {
    config.validate()?;
    let mut runs: Vec<(Method, Vec<MethodRun>)> =
        config.methods.iter().map(|&m| (m, Vec::new())).collect();

    for rep in 0..config.reps {
        let data = make_rep_data(config, rep)?;
        log::info!("rep {rep}: data ready (seed {})", data.seed);
        for (method, rows) in runs.iter_mut() {
            let started = Instant::now();
            match run_method(config, *method, &data) {
                Ok(metrics) => {
                    log::info!(
                        "rep {rep}: {} done in {:.1}s",
                        method.name(),
                        started.elapsed().as_secs_f64()
                    );
                    rows.push(MethodRun {
                        rep,
                        seed: data.seed,
                        ok: true,
                        error: None,
                        metrics: Some(metrics),
                    });
                }
                Err(err) => {
                    log::warn!("rep {rep}: {} failed: {err}", method.name());
                    rows.push(MethodRun {
                        rep,
                        seed: data.seed,
                        ok: false,
                        error: Some(err.to_string()),
                        metrics: None,
                    });
                }
            }
        }
    }

    let methods = runs
        .into_iter()
        .map(|(method, rows)| MethodReport {
            method,
            failures: rows.iter().filter(|r| !r.ok).count(),
            summary: summarize(&rows),
            runs: rows,
        })
        .collect();

    Ok(ResultsTable {
        label: config.label.clone(),
        created: chrono::Utc::now().to_rfc3339(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: format!("{:016x}", fnv1a(serde_json::to_string(config)?.as_bytes())),
        config: config.clone(),
        methods,
    })
}

// ---------------------------------------------------------------------------
