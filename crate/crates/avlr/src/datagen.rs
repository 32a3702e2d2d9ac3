//! Synthetic data: Gaussian covariates with logistic labels, six
//! missingness mechanisms, and automatic intercept calibration that hits a
//! requested missing rate per feature.

use crate::dataset::Dataset;
use crate::distributions::{sigmoid, CholFactor};
use crate::error::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

// ---------------------------------------------------------------------------
// Complete-data generation
// ---------------------------------------------------------------------------

/// Ground-truth generator: rows drawn from N(mu, sigma), labels from a
/// logistic model with intercept-first weights.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenSpec {
    pub n: usize,
    pub d: usize,
    pub mu: Vec<f64>,
    /// Dense d x d covariance, row-major.
    pub sigma: Vec<f64>,
    /// Length d + 1, intercept first.
    pub beta: Vec<f64>,
    pub seed: u64,
}

impl GenSpec {
    /// The fixed desk-scale benchmark generator: five correlated unit-
    /// variance features and a strong signal.
    pub fn benchmark_default() -> Self {
        let d = 5;
        let mut sigma = vec![0.5; d * d];
        for j in 0..d {
            sigma[j * d + j] = 1.0;
        }
        Self {
            n: 2000,
            d,
            mu: vec![0.0; d],
            sigma,
            beta: vec![0.5, 1.0, -1.0, 0.5, -0.5, 1.0],
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 {
            return Err(Error::Config("generator: n and d must be positive".into()));
        }
        if self.mu.len() != self.d
            || self.sigma.len() != self.d * self.d
            || self.beta.len() != self.d + 1
        {
            return Err(Error::Dim("generator: parameter lengths".into()));
        }
        if self.mu.iter().chain(&self.sigma).chain(&self.beta).any(|v| !v.is_finite()) {
            return Err(Error::Config("generator: parameters must be finite".into()));
        }
        Ok(())
    }

    /// Same generator, different sample size and stream.
    pub fn with_n_seed(&self, n: usize, seed: u64) -> Self {
        Self { n, seed, ..self.clone() }
    }
}

/// Draws a fully observed dataset from a `GenSpec`; the truth matrix is
/// also attached for later imputation scoring.
pub fn gen_complete(spec: &GenSpec) -> Result<Dataset> {
    spec.validate()?;
    let (n, d) = (spec.n, spec.d);
    let chol = CholFactor::from_covariance(&spec.sigma, d)?;
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    let mut x = vec![0.0; n * d];
    let mut y = vec![0u8; n];
    let mut z = vec![0.0; d];
    for i in 0..n {
        for v in z.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        let lz = chol.matvec(&z)?;
        let row = &mut x[i * d..(i + 1) * d];
        let mut eta = spec.beta[0];
        for j in 0..d {
            row[j] = spec.mu[j] + lz[j];
            eta += spec.beta[j + 1] * row[j];
        }
        y[i] = u8::from(rng.random_range(0.0..1.0) < sigmoid(eta));
    }
    let complete = x.clone();
    Dataset::complete(n, d, x, y)?.with_complete(complete)
}

// ---------------------------------------------------------------------------
// Missingness mechanisms
// ---------------------------------------------------------------------------

/// The six supported missingness processes. Each formula below gives the
/// probability that a cell goes missing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MechanismKind {
    /// Every cell independently with the target probability.
    Mcar,
    /// All features masked from the first feature and the label.
    Mar,
    /// All features masked from the row sum of the covariates and the label.
    Mnar,
    /// Each feature masked by its own value.
    SelfMask,
    /// Each feature masked by all covariates and the label, with random
    /// slopes.
    Logistic,
    /// Like `Logistic`, plus dependence on the missingness indicators of
    /// higher-indexed features, drawn in reverse feature order.
    SeqLogistic,
}

/// A fully specified mechanism: per-feature intercepts plus slope matrices
/// on the covariates, the label, and (for the sequential kind) the other
/// features' missingness indicators.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Mechanism {
    pub kind: MechanismKind,
    pub target_rate: f64,
    /// Per-feature intercepts of the missingness logits.
    pub intercepts: Vec<f64>,
    /// d x d row-major: slope of feature j's missingness on covariate k.
    pub x_slopes: Vec<f64>,
    /// Slope of each feature's missingness on the label.
    pub y_slopes: Vec<f64>,
    /// d x d row-major: slope of feature j's missingness on the
    /// missingness indicator of feature k (used for k > j only).
    pub mask_slopes: Vec<f64>,
}

impl Mechanism {
    /// Builds a mechanism with its published slope constants; random
    /// slopes are drawn from the given seed. Intercepts start at the
    /// published values and are meant to be calibrated afterwards.
    pub fn new(kind: MechanismKind, target_rate: f64, d: usize, seed: u64) -> Result<Self> {
        if d == 0 {
            return Err(Error::Config("mechanism: d must be positive".into()));
        }
        let ok_rate = match kind {
            MechanismKind::Mcar => (0.0..0.99).contains(&target_rate),
            _ => target_rate > 0.01 && target_rate < 0.99,
        };
        if !ok_rate {
            return Err(Error::Config(format!(
                "mechanism: target rate {target_rate} out of range"
            )));
        }

        let mut intercepts = vec![0.0; d];
        let mut x_slopes = vec![0.0; d * d];
        let mut y_slopes = vec![0.0; d];
        let mut mask_slopes = vec![0.0; d * d];
        match kind {
            // The cell probability lives in the intercept slot so the
            // calibrator can tune it: the all-missing repair conditions
            // every row on having an observed entry, which drags the
            // realized rate below the cell probability.
            MechanismKind::Mcar => {
                intercepts.iter_mut().for_each(|c| *c = target_rate);
            }
            MechanismKind::Mar => {
                for j in 0..d {
                    intercepts[j] = -1.0;
                    x_slopes[j * d] = 1.5;
                    y_slopes[j] = -0.8;
                }
            }
            MechanismKind::Mnar => {
                for j in 0..d {
                    intercepts[j] = -1.0;
                    for k in 0..d {
                        x_slopes[j * d + k] = -2.0;
                    }
                    y_slopes[j] = 0.5;
                }
            }
            MechanismKind::SelfMask => {
                for j in 0..d {
                    x_slopes[j * d + j] = 1.0;
                }
            }
            MechanismKind::Logistic | MechanismKind::SeqLogistic => {
                let mut rng = ChaCha12Rng::seed_from_u64(seed);
                let scale = 1.0 / (d as f64).sqrt();
                for j in 0..d {
                    for k in 0..d {
                        let z: f64 = rng.sample(StandardNormal);
                        x_slopes[j * d + k] = z * scale;
                    }
                    y_slopes[j] = 0.5;
                }
                if kind == MechanismKind::SeqLogistic {
                    for j in 0..d {
                        for k in j + 1..d {
                            mask_slopes[j * d + k] = 0.5;
                        }
                    }
                }
            }
        }
        Ok(Self { kind, target_rate, intercepts, x_slopes, y_slopes, mask_slopes })
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        if self.intercepts.len() != d
            || self.x_slopes.len() != d * d
            || self.y_slopes.len() != d
            || self.mask_slopes.len() != d * d
        {
            return Err(Error::Dim("mechanism: coefficient lengths".into()));
        }
        let all = self
            .intercepts
            .iter()
            .chain(&self.x_slopes)
            .chain(&self.y_slopes)
            .chain(&self.mask_slopes);
        if all.clone().any(|v| !v.is_finite()) {
            return Err(Error::Config("mechanism: coefficients must be finite".into()));
        }
        Ok(())
    }

    /// Probability that feature j of the given row goes missing, with
    /// `miss` holding the indicators already drawn (sequential kind only).
    fn miss_prob(&self, j: usize, x: &[f64], y: u8, miss: &[bool]) -> f64 {
        if self.kind == MechanismKind::Mcar {
            return self.intercepts[j].clamp(0.0, 1.0);
        }
        let d = x.len();
        let mut logit = self.intercepts[j] + self.y_slopes[j] * f64::from(y);
        for k in 0..d {
            logit += self.x_slopes[j * d + k] * x[k];
        }
        if self.kind == MechanismKind::SeqLogistic {
            for k in j + 1..d {
                if miss[k] {
                    logit += self.mask_slopes[j * d + k];
                }
            }
        }
        sigmoid(logit)
    }
}

/// Independent generator stream per row, so calibration probes reuse the
/// same randomness (common random numbers) at every intercept candidate.
fn row_rng(seed: u64, row: usize) -> ChaCha12Rng {
    let mixed = seed ^ (row as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    ChaCha12Rng::seed_from_u64(mixed)
}

/// Draws one row's mask (true = observed). Rows that come out fully
/// missing are re-drawn up to 100 times, then one uniformly chosen entry
/// is forced observed. Returns the mask and whether forcing was needed.
fn draw_row_mask<R: Rng>(mech: &Mechanism, x: &[f64], y: u8, rng: &mut R) -> (Vec<bool>, bool) {
    let d = x.len();
    let mut miss = vec![false; d];
    for _ in 0..100 {
        if mech.kind == MechanismKind::SeqLogistic {
            for j in (0..d).rev() {
                let p = mech.miss_prob(j, x, y, &miss);
                miss[j] = rng.random_range(0.0..1.0) < p;
            }
        } else {
            for j in 0..d {
                let p = mech.miss_prob(j, x, y, &miss);
                miss[j] = rng.random_range(0.0..1.0) < p;
            }
        }
        if miss.iter().any(|&m| !m) {
            return (miss.iter().map(|&m| !m).collect(), false);
        }
    }
    let keep = rng.random_range(0..d);
    miss[keep] = false;
    (miss.iter().map(|&m| !m).collect(), true)
}

/// Masks a complete dataset under the mechanism. The full matrix is kept
/// alongside for imputation scoring.
pub fn apply_mechanism(complete: &Dataset, mech: &Mechanism, seed: u64) -> Result<Dataset> {
    mech.validate(complete.d)?;
    if complete.mask.iter().any(|&m| !m) {
        return Err(Error::Data("mechanism: input must be fully observed".into()));
    }
    let (n, d) = (complete.n, complete.d);
    let mut mask = vec![true; n * d];
    let mut repaired = 0usize;
    for i in 0..n {
        let mut rng = row_rng(seed, i);
        let (row_mask, forced) = draw_row_mask(mech, complete.x_row(i), complete.y[i], &mut rng);
        repaired += usize::from(forced);
        mask[i * d..(i + 1) * d].copy_from_slice(&row_mask);
    }
    if repaired > 0 {
        log::debug!("mask repair forced one observed entry in {repaired} of {n} rows");
    }
    Dataset::new(n, d, complete.x.clone(), mask, complete.y.clone())?
        .with_complete(complete.x.clone())
}

/// Fraction of missing cells per feature.
pub fn missing_rates(data: &Dataset) -> Vec<f64> {
    let mut rates = vec![0.0; data.d];
    for i in 0..data.n {
        for j in 0..data.d {
            if !data.mask[i * data.d + j] {
                rates[j] += 1.0;
            }
        }
    }
    rates.iter().map(|r| r / data.n as f64).collect()
}

// ---------------------------------------------------------------------------
// Intercept calibration
// ---------------------------------------------------------------------------

const CAL_TOL: f64 = 1e-3;
const CAL_MAX_STEPS: usize = 60;

/// Tunes each feature's intercept by bisection until that feature's
/// post-repair empirical missing rate on the given complete data matches
/// the target. Mask draws reuse one random stream, so the rate moves
/// monotonically with the intercept. Features are swept in generation
/// order (last first); because the all-missing repair couples features,
/// the sweep repeats until every rate holds at once.
pub fn calibrate_intercepts(
    mech: &Mechanism,
    complete: &Dataset,
    seed: u64,
) -> Result<Mechanism> {
    mech.validate(complete.d)?;
    let mut out = mech.clone();
    let d = complete.d;
    for _ in 0..4 {
        for j in (0..d).rev() {
            calibrate_feature(&mut out, complete, j, seed)?;
        }
        let rates = missing_rates(&apply_mechanism(complete, &out, seed)?);
        if rates.iter().all(|r| (r - mech.target_rate).abs() <= CAL_TOL) {
            break;
        }
    }
    Ok(out)
}

fn rate_at(mech: &Mechanism, complete: &Dataset, j: usize, c: f64, seed: u64) -> Result<f64> {
    let mut probe = mech.clone();
    probe.intercepts[j] = c;
    let masked = apply_mechanism(complete, &probe, seed)?;
    Ok(missing_rates(&masked)[j])
}

fn calibrate_feature(
    mech: &mut Mechanism,
    complete: &Dataset,
    j: usize,
    seed: u64,
) -> Result<()> {
    let target = mech.target_rate;
    // The Mcar intercept is a probability, so its bracket is fixed.
    let mcar = mech.kind == MechanismKind::Mcar;
    let (mut lo, mut hi) = if mcar { (0.0, 1.0) } else { (-8.0, 8.0) };
    let mut rate_lo = rate_at(mech, complete, j, lo, seed)?;
    let mut rate_hi = rate_at(mech, complete, j, hi, seed)?;
    while !mcar && rate_lo > target && lo > -50.0 {
        lo = (lo * 2.0).max(-50.0);
        rate_lo = rate_at(mech, complete, j, lo, seed)?;
    }
    while !mcar && rate_hi < target && hi < 50.0 {
        hi = (hi * 2.0).min(50.0);
        rate_hi = rate_at(mech, complete, j, hi, seed)?;
    }
    if rate_lo > target || rate_hi < target {
        return Err(Error::Config(format!(
            "calibration: target {target} not bracketed for feature {j} \
             (rates {rate_lo:.3}..{rate_hi:.3} over intercepts {lo}..{hi})"
        )));
    }
    let mut best = (lo, (rate_lo - target).abs());
    if (rate_hi - target).abs() < best.1 {
        best = (hi, (rate_hi - target).abs());
    }
    for _ in 0..CAL_MAX_STEPS {
        let mid = 0.5 * (lo + hi);
        let rate = rate_at(mech, complete, j, mid, seed)?;
        let err = (rate - target).abs();
        if err < best.1 {
            best = (mid, err);
        }
        if err <= CAL_TOL {
            break;
        }
        if rate < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    mech.intercepts[j] = best.0;
    Ok(())
}

// ---------------------------------------------------------------------------
