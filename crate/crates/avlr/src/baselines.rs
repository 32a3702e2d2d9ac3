//! Reference methods the estimator is benchmarked against: column-mean
//! imputation with a plain logistic fit, and a stochastic EM that
//! alternates Metropolis-Hastings completion of the missing block with
//! closed-form Gaussian updates and an IRLS logistic update.

use crate::dataset::Dataset;
use crate::distributions::{
    bernoulli_logpmf, gaussian_condition, reparam_sample, sigmoid, CholFactor, GaussianCond,
};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

// ---------------------------------------------------------------------------
// Mean imputation baseline
// ---------------------------------------------------------------------------

/// Fills every missing cell with its column's observed mean. Returns the
/// completed matrix and the means used.
pub fn mean_impute(data: &Dataset) -> Result<(Vec<f64>, Vec<f64>)> {
    let means = data.observed_column_means()?;
    let mut completed = data.x.clone();
    for i in 0..data.n {
        for j in 0..data.d {
            if !data.mask[i * data.d + j] {
                completed[i * data.d + j] = means[j];
            }
        }
    }
    Ok((completed, means))
}

/// Mean-imputation baseline: logistic weights fitted on the mean-completed
/// training matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeanBaseline {
    pub beta: Vec<f64>,
    pub column_means: Vec<f64>,
    /// Mean-completed training matrix, kept for imputation scoring.
    pub completed: Vec<f64>,
}

pub fn fit_mean_baseline(data: &Dataset) -> Result<MeanBaseline> {
    let (completed, column_means) = mean_impute(data)?;
    let beta = fit_logistic_irls(&completed, data.n, data.d, &data.y, None, 100, 1e-10)?;
    Ok(MeanBaseline { beta, column_means, completed })
}

/// Predicts with a logistic model after mean-imputing the given dataset
/// with its own column means.
pub fn mean_baseline_predict(beta: &[f64], data: &Dataset) -> Result<Vec<f64>> {
    if beta.len() != data.d + 1 {
        return Err(Error::Dim("mean baseline: weight length".into()));
    }
    let (completed, _) = mean_impute(data)?;
    let mut probs = Vec::with_capacity(data.n);
    for i in 0..data.n {
        let row = &completed[i * data.d..(i + 1) * data.d];
        let eta = beta[0] + row.iter().zip(&beta[1..]).map(|(x, b)| x * b).sum::<f64>();
        probs.push(sigmoid(eta));
    }
    Ok(probs)
}

// ---------------------------------------------------------------------------
// Logistic regression by iteratively reweighted least squares
// ---------------------------------------------------------------------------

fn logistic_loglik(x: &[f64], n: usize, d: usize, y: &[u8], beta: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..n {
        let row = &x[i * d..(i + 1) * d];
        let eta = beta[0] + row.iter().zip(&beta[1..]).map(|(v, b)| v * b).sum::<f64>();
        acc += bernoulli_logpmf(y[i], eta);
    }
    acc
}

/// Maximum-likelihood logistic weights (intercept first) on a complete
/// matrix, by Newton steps with step-halving. `init` warm-starts the
/// solve; convergence is the max absolute coordinate change.
pub fn fit_logistic_irls(
    x: &[f64],
    n: usize,
    d: usize,
    y: &[u8],
    init: Option<&[f64]>,
    max_iter: usize,
    tol: f64,
) -> Result<Vec<f64>> {
    if x.len() != n * d || y.len() != n {
        return Err(Error::Dim("irls: shape mismatch".into()));
    }
    if n == 0 {
        return Err(Error::Data("irls: empty input".into()));
    }
    let p = d + 1;
    let mut beta = match init {
        Some(b) if b.len() == p => b.to_vec(),
        Some(_) => return Err(Error::Dim("irls: init length".into())),
        None => vec![0.0; p],
    };

    let mut loglik = logistic_loglik(x, n, d, y, &beta);
    for _ in 0..max_iter {
        // Gradient X^T (y - p) and Hessian X^T W X with the intercept as
        // an implicit first column.
        let mut grad = vec![0.0; p];
        let mut hess = vec![0.0; p * p];
        for i in 0..n {
            let row = &x[i * d..(i + 1) * d];
            let eta = beta[0] + row.iter().zip(&beta[1..]).map(|(v, b)| v * b).sum::<f64>();
            let pi = sigmoid(eta);
            let resid = f64::from(y[i]) - pi;
            let w = pi * (1.0 - pi);
            grad[0] += resid;
            for a in 0..d {
                grad[a + 1] += resid * row[a];
            }
            hess[0] += w;
            for a in 0..d {
                hess[(a + 1) * p] += w * row[a];
                for b in 0..=a {
                    hess[(a + 1) * p + (b + 1)] += w * row[a] * row[b];
                }
            }
        }
        for a in 0..p {
            for b in 0..a {
                hess[b * p + a] = hess[a * p + b];
            }
        }

        // Newton direction through the SPD factorization (tiny pivots are
        // floored there, which regularizes near-separable fits).
        let chol = CholFactor::from_covariance(&hess, p)?;
        let delta = chol.solve_lower_transpose(&chol.solve_lower(&grad)?)?;

        // Step-halving keeps the log-likelihood monotone.
        let mut step = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let cand: Vec<f64> = beta.iter().zip(&delta).map(|(b, dl)| b + step * dl).collect();
            let cand_ll = logistic_loglik(x, n, d, y, &cand);
            if cand_ll >= loglik {
                let moved = delta.iter().map(|dl| (step * dl).abs()).fold(0.0, f64::max);
                beta = cand;
                loglik = cand_ll;
                improved = true;
                if moved < tol {
                    return Ok(beta);
                }
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    Ok(beta)
}

// ---------------------------------------------------------------------------
// Stochastic EM
// ---------------------------------------------------------------------------

/// Settings for [`saem_fit`]. Defaults follow the benchmark protocol.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SaemConfig {
    pub max_iters: usize,
    /// Iterations with unit smoothing weight before the decay kicks in.
    pub burn_in: usize,
    /// Exponent of the decaying stochastic-approximation weight.
    pub step_decay: f64,
    /// Convergence threshold on the largest squared parameter-block change.
    pub tol: f64,
    /// Metropolis-Hastings proposals per incomplete row per iteration.
    pub mh_steps: usize,
    /// Sweeps averaged for the final imputation.
    pub impute_draws: usize,
    pub seed: u64,
}

impl Default for SaemConfig {
    fn default() -> Self {
        Self {
            max_iters: 120,
            burn_in: 20,
            step_decay: 0.7,
            tol: 1e-4,
            mh_steps: 1,
            impute_draws: 100,
            seed: 0,
        }
    }
}

/// Result of a stochastic EM run: parameters on the data's own scale, the
/// averaged completion, and how the iteration ended.
#[derive(Debug, Clone)]
pub struct SaemFit {
    pub params: ModelParams,
    pub completed: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// One independence Metropolis-Hastings update of a row's missing block.
/// The proposal is the exact conditional prior, so the prior and proposal
/// densities cancel and the acceptance ratio reduces to the label
/// likelihoods. Returns whether the proposal was accepted.
pub fn mh_update_row<R: Rng>(
    beta: &[f64],
    cond: &GaussianCond,
    x_full: &mut [f64],
    mis_idx: &[usize],
    y: u8,
    rng: &mut R,
) -> Result<bool> {
    let dm = mis_idx.len();
    let eps: Vec<f64> = (0..dm).map(|_| rng.sample(StandardNormal)).collect();
    let proposal = reparam_sample(&cond.mean, &cond.chol, &eps)?;

    let d = x_full.len();
    let eta_of = |xf: &[f64]| -> f64 {
        beta[0] + (0..d).map(|j| beta[j + 1] * xf[j]).sum::<f64>()
    };
    let ll_current = bernoulli_logpmf(y, eta_of(x_full));
    let mut cand = x_full.to_vec();
    for (a, &j) in mis_idx.iter().enumerate() {
        cand[j] = proposal[a];
    }
    let ll_proposed = bernoulli_logpmf(y, eta_of(&cand));

    let accept = if ll_proposed >= ll_current {
        true
    } else {
        rng.random_range(0.0..1.0) < (ll_proposed - ll_current).exp()
    };
    if accept {
        x_full.copy_from_slice(&cand);
    }
    Ok(accept)
}

struct RowPattern {
    obs_idx: Vec<usize>,
    mis_idx: Vec<usize>,
}

/// Fits the joint Gaussian-logistic model by stochastic EM, ignoring the
/// missingness mechanism. Works on the raw scale.
pub fn saem_fit(data: &Dataset, config: &SaemConfig) -> Result<SaemFit> {
    if config.max_iters == 0 || config.step_decay <= 0.0 || config.tol <= 0.0 {
        return Err(Error::Config("saem: invalid settings".into()));
    }
    let (n, d) = (data.n, data.d);
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);

    let patterns: Vec<RowPattern> = (0..n)
        .map(|i| {
            let mask = data.mask_row(i);
            RowPattern {
                obs_idx: (0..d).filter(|&j| mask[j]).collect(),
                mis_idx: (0..d).filter(|&j| !mask[j]).collect(),
            }
        })
        .collect();
    let any_missing = patterns.iter().any(|p| !p.mis_idx.is_empty());

    // Chain state starts at the mean completion; so do the statistics.
    let (mut x_imp, _) = mean_impute(data)?;
    let mut s1 = vec![0.0; d];
    let mut s2 = vec![0.0; d * d];
    accumulate_moments(&x_imp, n, d, &mut s1, &mut s2, 1.0);

    let mut beta = vec![0.0; d + 1];
    let mut mu = vec![0.0; d];
    let mut sigma = vec![0.0; d * d];
    let mut iterations = 0;
    let mut converged = false;

    for t in 1..=config.max_iters {
        iterations = t;

        // S-step: refresh the missing blocks by MH against the current fit.
        if any_missing && t > 1 {
            for i in 0..n {
                let pat = &patterns[i];
                if pat.mis_idx.is_empty() {
                    continue;
                }
                let x_obs: Vec<f64> = pat.obs_idx.iter().map(|&j| x_imp[i * d + j]).collect();
                let cond =
                    gaussian_condition(&mu, &sigma, &pat.obs_idx, &x_obs, &pat.mis_idx)?;
                let row = &mut x_imp[i * d..(i + 1) * d];
                for _ in 0..config.mh_steps {
                    mh_update_row(&beta, &cond, row, &pat.mis_idx, data.y[i], &mut rng)?;
                }
            }
        }

        // Stochastic approximation of the Gaussian sufficient statistics.
        let gamma = if t <= config.burn_in {
            1.0
        } else {
            ((t - config.burn_in) as f64).powf(-config.step_decay)
        };
        let mut s1_new = vec![0.0; d];
        let mut s2_new = vec![0.0; d * d];
        accumulate_moments(&x_imp, n, d, &mut s1_new, &mut s2_new, 1.0);
        for j in 0..d {
            s1[j] += gamma * (s1_new[j] - s1[j]);
        }
        for j in 0..d * d {
            s2[j] += gamma * (s2_new[j] - s2[j]);
        }

        // M-step. The Gaussian block is closed form in the smoothed
        // statistics. The logistic block has no finite sufficient
        // statistics, so smooth the parameter instead: fit on the current
        // single completion and blend. Fitting on an averaged completion
        // would collapse imputed cells onto class-conditional means and
        // inflate the slopes by quasi-separation.
        let mu_new: Vec<f64> = s1.iter().map(|v| v / n as f64).collect();
        let mut sigma_new = vec![0.0; d * d];
        for a in 0..d {
            for b in 0..d {
                sigma_new[a * d + b] =
                    s2[a * d + b] / n as f64 - mu_new[a] * mu_new[b]
                        + if a == b { 1e-6 } else { 0.0 };
            }
        }
        let beta_hat = fit_logistic_irls(&x_imp, n, d, &data.y, Some(&beta), 50, 1e-10)?;
        let beta_new: Vec<f64> =
            beta.iter().zip(&beta_hat).map(|(b, h)| b + gamma * (h - b)).collect();

        // Largest squared block change decides convergence.
        let db: f64 = beta_new.iter().zip(&beta).map(|(a, b)| (a - b) * (a - b)).sum();
        let dm: f64 = mu_new.iter().zip(&mu).map(|(a, b)| (a - b) * (a - b)).sum();
        let ds: f64 = sigma_new.iter().zip(&sigma).map(|(a, b)| (a - b) * (a - b)).sum();
        let delta = db.max(dm).max(ds);

        beta = beta_new;
        mu = mu_new;
        sigma = sigma_new;

        if t >= 2 && delta < config.tol {
            converged = true;
            break;
        }
    }

    // Imputation: average fresh MH sweeps under the final parameters.
    let mut completed = data.x.clone();
    if any_missing {
        let mut acc = vec![0.0; n * d];
        for _ in 0..config.impute_draws.max(1) {
            for i in 0..n {
                let pat = &patterns[i];
                if pat.mis_idx.is_empty() {
                    continue;
                }
                let x_obs: Vec<f64> = pat.obs_idx.iter().map(|&j| x_imp[i * d + j]).collect();
                let cond =
                    gaussian_condition(&mu, &sigma, &pat.obs_idx, &x_obs, &pat.mis_idx)?;
                let row = &mut x_imp[i * d..(i + 1) * d];
                mh_update_row(&beta, &cond, row, &pat.mis_idx, data.y[i], &mut rng)?;
                for &j in &pat.mis_idx {
                    acc[i * d + j] += row[j];
                }
            }
        }
        for i in 0..n {
            for &j in &patterns[i].mis_idx {
                completed[i * d + j] = acc[i * d + j] / config.impute_draws.max(1) as f64;
            }
        }
    }

    let sigma_chol = CholFactor::from_covariance(&sigma, d)?.to_unconstrained();
    Ok(SaemFit {
        params: ModelParams { d, beta, mu, sigma_chol },
        completed,
        iterations,
        converged,
    })
}

fn accumulate_moments(x: &[f64], n: usize, d: usize, s1: &mut [f64], s2: &mut [f64], w: f64) {
    for i in 0..n {
        let row = &x[i * d..(i + 1) * d];
        for a in 0..d {
            s1[a] += w * row[a];
            for b in 0..d {
                s2[a * d + b] += w * row[a] * row[b];
            }
        }
    }
}

/// Predictive probabilities under a stochastic-EM fit: complete rows are
/// the closed-form logistic output; incomplete rows average the logistic
/// output over draws from the conditional covariate prior (the label is
/// unknown at prediction time, so the proposal never sees it).
pub fn saem_predict_proba(
    params: &ModelParams,
    data: &Dataset,
    s: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if s == 0 {
        return Err(Error::Config("saem predict: at least one draw".into()));
    }
    params.validate()?;
    let d = params.d;
    if data.d != d {
        return Err(Error::Dim("saem predict: dimension mismatch".into()));
    }
    let sigma = params.prior_chol()?.to_covariance();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut probs = Vec::with_capacity(data.n);
    for i in 0..data.n {
        let mask = data.mask_row(i);
        let x = data.x_row(i);
        if mask.iter().all(|&m| m) {
            probs.push(sigmoid(params.linear_predictor(x)?));
            continue;
        }
        let obs_idx: Vec<usize> = (0..d).filter(|&j| mask[j]).collect();
        let mis_idx: Vec<usize> = (0..d).filter(|&j| !mask[j]).collect();
        let x_obs: Vec<f64> = obs_idx.iter().map(|&j| x[j]).collect();
        let cond = gaussian_condition(&params.mu, &sigma, &obs_idx, &x_obs, &mis_idx)?;
        let mut x_full = vec![0.0; d];
        for &j in &obs_idx {
            x_full[j] = x[j];
        }
        let mut acc = 0.0;
        for _ in 0..s {
            let eps: Vec<f64> = (0..mis_idx.len()).map(|_| rng.sample(StandardNormal)).collect();
            let draw = reparam_sample(&cond.mean, &cond.chol, &eps)?;
            for (a, &j) in mis_idx.iter().enumerate() {
                x_full[j] = draw[a];
            }
            acc += sigmoid(params.linear_predictor(&x_full)?);
        }
        probs.push(acc / s as f64);
    }
    Ok(probs)
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use avlr_oracles::{ks_statistic, logistic_newton_mle, trapezoid};

    fn synth_complete(n: usize, d: usize, beta: &[f64], seed: u64) -> Dataset {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut x = vec![0.0; n * d];
        let mut y = vec![0u8; n];
        for i in 0..n {
            let mut eta = beta[0];
            for j in 0..d {
                let v: f64 = rng.sample(StandardNormal);
                x[i * d + j] = v;
                eta += beta[j + 1] * v;
            }
            y[i] = u8::from(rng.random_range(0.0..1.0) < sigmoid(eta));
        }
        Dataset::new(n, d, x, vec![true; n * d], y).unwrap()
    }

    fn knock_out_mcar(data: &Dataset, rate: f64, seed: u64) -> Dataset {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let (n, d) = (data.n, data.d);
        let mut x = data.x.clone();
        let mut mask = vec![true; n * d];
        for i in 0..n {
            for j in 0..d {
                if rng.random_range(0.0..1.0) < rate {
                    mask[i * d + j] = false;
                    x[i * d + j] = f64::NAN;
                }
            }
            if (0..d).all(|j| !mask[i * d + j]) {
                mask[i * d] = true;
                x[i * d] = data.x[i * d];
            }
        }
        Dataset::new(n, d, x, mask, data.y.clone()).unwrap()
    }

    #[test]
    fn mean_impute_fills_with_column_means() {
        let x = vec![1.0, f64::NAN, 3.0, 4.0, f64::NAN, 10.0];
        let mask = vec![true, false, true, true, false, true];
        let data = Dataset::new(3, 2, x, mask, vec![0, 1, 0]).unwrap();
        let (completed, means) = mean_impute(&data).unwrap();
        assert_eq!(means, vec![2.0, 7.0]);
        assert_eq!(completed[1], 7.0);
        assert_eq!(completed[4], 2.0);
        assert_eq!(completed[0], 1.0);
    }

    #[test]
    fn irls_matches_the_newton_oracle() {
        let beta_true = [0.3, 0.8, -1.1, 0.5];
        let data = synth_complete(400, 3, &beta_true, 41);
        let ours = fit_logistic_irls(&data.x, 400, 3, &data.y, None, 100, 1e-12).unwrap();
        let oracle = logistic_newton_mle(&data.x, 400, 3, &data.y, 30);
        for (a, b) in ours.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-6, "{ours:?} vs {oracle:?}");
        }
    }

    #[test]
    fn irls_survives_separable_data() {
        // Perfectly separated: the MLE diverges, the solver must not.
        let x = vec![-2.0, -1.5, -1.0, 1.0, 1.5, 2.0];
        let y = vec![0, 0, 0, 1, 1, 1];
        let beta = fit_logistic_irls(&x, 6, 1, &y, None, 60, 1e-10).unwrap();
        assert!(beta.iter().all(|b| b.is_finite()));
        // It should at least point the right way.
        assert!(beta[1] > 0.0);
    }

    #[test]
    fn irls_recovers_a_strong_signal() {
        let beta_true = [0.0, 2.0];
        let data = synth_complete(2000, 1, &beta_true, 7);
        let beta = fit_logistic_irls(&data.x, 2000, 1, &data.y, None, 100, 1e-10).unwrap();
        assert!((beta[1] - 2.0).abs() < 0.3, "slope {}", beta[1]);
    }

    #[test]
    fn mh_accepts_everything_when_labels_carry_no_information() {
        // beta = 0 makes the likelihood ratio exactly one.
        let beta = vec![0.0, 0.0, 0.0];
        let sigma = vec![1.0, 0.3, 0.3, 1.0];
        let cond = gaussian_condition(&[0.0, 0.0], &sigma, &[0], &[0.5], &[1]).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let mut x_full = vec![0.5, 0.0];
        let mut accepted = 0;
        for _ in 0..500 {
            if mh_update_row(&beta, &cond, &mut x_full, &[1], 1, &mut rng).unwrap() {
                accepted += 1;
            }
        }
        assert_eq!(accepted, 500);
    }

    #[test]
    fn mh_chain_matches_the_exact_conditional_law() {
        // Univariate: target p(x | y=1) proportional to sigmoid(b0+b1 x)
        // times the standard normal. Compare the chain's empirical CDF with
        // quadrature at KS resolution.
        let (b0, b1) = (0.4, 1.3);
        let beta = vec![b0, b1];
        let sigma = vec![1.0];
        let cond = gaussian_condition(&[0.0], &sigma, &[], &[], &[0]).unwrap();

        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let mut x_full = vec![0.0];
        // Warm up, then record.
        for _ in 0..1000 {
            mh_update_row(&beta, &cond, &mut x_full, &[0], 1, &mut rng).unwrap();
        }
        let draws: Vec<f64> = (0..100_000)
            .map(|_| {
                mh_update_row(&beta, &cond, &mut x_full, &[0], 1, &mut rng).unwrap();
                x_full[0]
            })
            .collect();

        let density = |u: f64| {
            sigmoid(b0 + b1 * u) * (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt()
        };
        let z = trapezoid(&density, -10.0, 10.0, 40_000);
        let cdf = |t: f64| trapezoid(&density, -10.0, t.clamp(-10.0, 10.0), 20_000) / z;
        let ks = ks_statistic(&draws, &cdf);
        assert!(ks < 0.02, "KS distance {ks}");
    }

    #[test]
    fn saem_on_complete_data_is_newton_after_two_iterations() {
        let beta_true = [0.2, 1.0, -0.7];
        let data = synth_complete(500, 2, &beta_true, 13);
        let fit = saem_fit(&data, &SaemConfig::default()).unwrap();
        assert!(fit.converged);
        assert_eq!(fit.iterations, 2);

        let oracle = logistic_newton_mle(&data.x, 500, 2, &data.y, 30);
        for (a, b) in fit.params.beta.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-6);
        }
        // Gaussian block: sample moments with the diagonal ridge.
        let mean0: f64 = (0..500).map(|i| data.x[i * 2]).sum::<f64>() / 500.0;
        assert!((fit.params.mu[0] - mean0).abs() < 1e-12);
        // Complete data means the completion is the data itself.
        assert_eq!(fit.completed, data.x);
    }

    #[test]
    fn saem_converges_and_recovers_signal_under_mcar() {
        let beta_true = [0.3, 1.0, -1.0, 0.6];
        let complete = synth_complete(1500, 3, &beta_true, 17);
        let data = knock_out_mcar(&complete, 0.3, 18);
        let fit = saem_fit(&data, &SaemConfig::default()).unwrap();
        assert!(fit.converged, "no convergence in {} iterations", fit.iterations);
        assert!(fit.iterations <= 120);
        let err: f64 = fit
            .params
            .beta
            .iter()
            .zip(&beta_true)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        // The complete-data MLE is the noise floor; stay within a missing-
        // data handicap of it rather than pinning an absolute constant.
        let oracle = logistic_newton_mle(&complete.x, complete.n, complete.d, &complete.y, 30);
        let oracle_err: f64 = oracle
            .iter()
            .zip(&beta_true)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        assert!(
            err < oracle_err + 0.35,
            "beta error {err} vs complete-data MLE error {oracle_err}: {:?}",
            fit.params.beta
        );
        // Completed matrix agrees with the data on observed cells.
        for i in 0..data.n * data.d {
            if data.mask[i] {
                assert_eq!(fit.completed[i], data.x[i]);
            } else {
                assert!(fit.completed[i].is_finite());
            }
        }
    }

    #[test]
    fn saem_prediction_is_exact_on_complete_rows() {
        let params = ModelParams {
            d: 2,
            beta: vec![0.2, 0.9, -0.4],
            mu: vec![0.0, 0.0],
            sigma_chol: vec![0.0, 0.1, 0.0],
        };
        let x = vec![0.5, -1.0, 0.3, f64::NAN];
        let mask = vec![true, true, true, false];
        let data = Dataset::new(2, 2, x, mask, vec![1, 0]).unwrap();
        let probs = saem_predict_proba(&params, &data, 64, 5).unwrap();
        let eta = 0.2 + 0.9 * 0.5 - 0.4 * -1.0;
        assert_eq!(probs[0], sigmoid(eta));
        assert!(probs[1] > 0.0 && probs[1] < 1.0);

        let again = saem_predict_proba(&params, &data, 64, 5).unwrap();
        assert_eq!(probs, again);
    }
}
