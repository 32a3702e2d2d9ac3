//! Plain-`f64` probability kernels shared by the model, the predictor, and
//! the baselines: packed Cholesky factors, multivariate normal densities,
//! Bernoulli log-mass, and exact Gaussian conditioning.
//!
//! These mirror the taped ops in `diffcore` (same diagonal floor, same
//! probability clamp) so a value computed off-tape agrees with the value a
//! tape produces for the same inputs.

use crate::diffcore::{tri_index, tri_len, CHOL_DIAG_FLOOR, PROB_CLAMP};
use crate::error::{Error, Result};

const LN_2PI: f64 = 1.8378770664093453;

/// Numerically stable logistic function.
pub fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

/// Log-mass of a Bernoulli observation under a logit parameter, with the
/// success probability clamped away from 0 and 1.
pub fn bernoulli_logpmf(y: u8, logit: f64) -> f64 {
    let p = sigmoid(logit).clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
    if y == 1 {
        p.ln()
    } else {
        (1.0 - p).ln()
    }
}

// ---------------------------------------------------------------------------
// Packed lower-triangular Cholesky factor
// ---------------------------------------------------------------------------

/// Lower-triangular matrix stored as a packed row-major triangle; row `i`
/// occupies `data[i(i+1)/2 .. i(i+1)/2 + i + 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CholFactor {
    dim: usize,
    data: Vec<f64>,
}

impl CholFactor {
    /// Builds a factor from an unconstrained parameter vector: diagonal
    /// entries pass through `exp` and are floored, off-diagonals are copied.
    pub fn from_unconstrained(v: &[f64], dim: usize) -> Result<Self> {
        if v.len() != tri_len(dim) {
            return Err(Error::Dim(format!(
                "cholesky vector has {} entries, dim {} needs {}",
                v.len(),
                dim,
                tri_len(dim)
            )));
        }
        let mut data = v.to_vec();
        for i in 0..dim {
            let k = tri_index(i, i);
            data[k] = data[k].exp().max(CHOL_DIAG_FLOOR);
        }
        Ok(Self { dim, data })
    }

    /// Inverse of [`from_unconstrained`](Self::from_unconstrained): log on
    /// the diagonal, off-diagonals copied.
    pub fn to_unconstrained(&self) -> Vec<f64> {
        let mut v = self.data.clone();
        for i in 0..self.dim {
            let k = tri_index(i, i);
            v[k] = v[k].ln();
        }
        v
    }

    /// Cholesky-factorizes a dense row-major symmetric matrix. Pivots that
    /// are merely tiny are floored; a genuinely negative pivot (beyond
    /// rounding tolerance) means the matrix is not positive definite and is
    /// reported as a numeric error.
    pub fn from_covariance(sigma: &[f64], dim: usize) -> Result<Self> {
        if sigma.len() != dim * dim {
            return Err(Error::Dim(format!(
                "covariance has {} entries, expected {}",
                sigma.len(),
                dim * dim
            )));
        }
        let scale = (0..dim)
            .map(|i| sigma[i * dim + i].abs())
            .fold(1.0_f64, f64::max);
        let mut data = vec![0.0; tri_len(dim)];
        for i in 0..dim {
            for j in 0..=i {
                let mut acc = sigma[i * dim + j];
                for k in 0..j {
                    acc -= data[tri_index(i, k)] * data[tri_index(j, k)];
                }
                if j < i {
                    data[tri_index(i, j)] = acc / data[tri_index(j, j)];
                } else {
                    if acc < -1e-8 * scale {
                        return Err(Error::Numeric(format!(
                            "matrix is not positive definite: pivot {acc:.3e} at row {i}"
                        )));
                    }
                    data[tri_index(i, i)] = acc.max(0.0).sqrt().max(CHOL_DIAG_FLOOR);
                }
            }
        }
        Ok(Self { dim, data })
    }

    /// Wraps an already-valid packed lower triangle.
    pub fn from_packed(data: Vec<f64>, dim: usize) -> Result<Self> {
        if data.len() != tri_len(dim) {
            return Err(Error::Dim(format!(
                "packed triangle has {} entries, dim {} needs {}",
                data.len(),
                dim,
                tri_len(dim)
            )));
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn packed(&self) -> &[f64] {
        &self.data
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if j > i {
            0.0
        } else {
            self.data[tri_index(i, j)]
        }
    }

    /// Solves `L z = b` by forward substitution.
    pub fn solve_lower(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.dim {
            return Err(Error::Dim("solve_lower: length mismatch".into()));
        }
        let mut z = vec![0.0; self.dim];
        for i in 0..self.dim {
            let mut acc = b[i];
            for j in 0..i {
                acc -= self.data[tri_index(i, j)] * z[j];
            }
            z[i] = acc / self.data[tri_index(i, i)];
        }
        Ok(z)
    }

    /// Solves `L^T z = b` by back substitution.
    pub fn solve_lower_transpose(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.dim {
            return Err(Error::Dim("solve_lower_transpose: length mismatch".into()));
        }
        let mut z = vec![0.0; self.dim];
        for i in (0..self.dim).rev() {
            let mut acc = b[i];
            for j in i + 1..self.dim {
                acc -= self.data[tri_index(j, i)] * z[j];
            }
            z[i] = acc / self.data[tri_index(i, i)];
        }
        Ok(z)
    }

    /// Computes `L e`.
    pub fn matvec(&self, e: &[f64]) -> Result<Vec<f64>> {
        if e.len() != self.dim {
            return Err(Error::Dim("matvec: length mismatch".into()));
        }
        let mut y = vec![0.0; self.dim];
        for i in 0..self.dim {
            let mut acc = 0.0;
            for j in 0..=i {
                acc += self.data[tri_index(i, j)] * e[j];
            }
            y[i] = acc;
        }
        Ok(y)
    }

    pub fn sum_log_diag(&self) -> f64 {
        (0..self.dim).map(|i| self.data[tri_index(i, i)].ln()).sum()
    }

    /// Reconstitutes the dense row-major covariance `L L^T`.
    pub fn to_covariance(&self) -> Vec<f64> {
        let d = self.dim;
        let mut s = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..=i {
                let mut acc = 0.0;
                for k in 0..=j.min(i) {
                    acc += self.entry(i, k) * self.entry(j, k);
                }
                s[i * d + j] = acc;
                s[j * d + i] = acc;
            }
        }
        s
    }
}

// ---------------------------------------------------------------------------
// Densities and sampling
// ---------------------------------------------------------------------------

/// Log-density of a multivariate normal evaluated through its Cholesky
/// factor: `-(d/2) ln 2pi - sum_i ln L_ii - ||L^{-1}(x - mu)||^2 / 2`.
pub fn mvn_logpdf(x: &[f64], mu: &[f64], chol: &CholFactor) -> Result<f64> {
    let d = chol.dim();
    if x.len() != d || mu.len() != d {
        return Err(Error::Dim("mvn_logpdf: length mismatch".into()));
    }
    if d == 0 {
        return Ok(0.0);
    }
    let diff: Vec<f64> = x.iter().zip(mu).map(|(a, b)| a - b).collect();
    let z = chol.solve_lower(&diff)?;
    let quad: f64 = z.iter().map(|v| v * v).sum();
    Ok(-0.5 * d as f64 * LN_2PI - chol.sum_log_diag() - 0.5 * quad)
}

/// Location-scale transform of a standard normal draw: `mu + L eps`.
pub fn reparam_sample(mu: &[f64], chol: &CholFactor, eps: &[f64]) -> Result<Vec<f64>> {
    let le = chol.matvec(eps)?;
    if mu.len() != le.len() {
        return Err(Error::Dim("reparam_sample: length mismatch".into()));
    }
    Ok(mu.iter().zip(&le).map(|(m, v)| m + v).collect())
}

// ---------------------------------------------------------------------------
// Gaussian conditioning
// ---------------------------------------------------------------------------

/// Conditional distribution of a Gaussian's missing block given its
/// observed block.
#[derive(Debug, Clone)]
pub struct GaussianCond {
    pub mean: Vec<f64>,
    pub chol: CholFactor,
}

impl GaussianCond {
    pub fn dim(&self) -> usize {
        self.chol.dim()
    }

    pub fn logpdf(&self, x: &[f64]) -> Result<f64> {
        mvn_logpdf(x, &self.mean, &self.chol)
    }
}

/// Conditions `N(mu, sigma)` on `x[obs_idx] = x_obs`, returning the exact
/// Gaussian over the `mis_idx` coordinates via the Schur complement:
/// `mu_m + S_mo S_oo^{-1} (x_o - mu_o)` and `S_mm - S_mo S_oo^{-1} S_om`,
/// the latter re-factorized so downstream code can sample and evaluate.
///
/// `sigma` is the dense row-major covariance. An empty `obs_idx` returns
/// the marginal over `mis_idx`; an empty `mis_idx` returns a
/// zero-dimensional distribution.
pub fn gaussian_condition(
    mu: &[f64],
    sigma: &[f64],
    obs_idx: &[usize],
    x_obs: &[f64],
    mis_idx: &[usize],
) -> Result<GaussianCond> {
    let d = mu.len();
    if sigma.len() != d * d {
        return Err(Error::Dim("gaussian_condition: covariance shape".into()));
    }
    if x_obs.len() != obs_idx.len() {
        return Err(Error::Dim("gaussian_condition: observed values".into()));
    }
    if obs_idx.iter().chain(mis_idx).any(|&i| i >= d) {
        return Err(Error::Dim("gaussian_condition: index out of range".into()));
    }
    let (no, nm) = (obs_idx.len(), mis_idx.len());

    if nm == 0 {
        return Ok(GaussianCond {
            mean: Vec::new(),
            chol: CholFactor::from_packed(Vec::new(), 0)?,
        });
    }
    if no == 0 {
        let mean: Vec<f64> = mis_idx.iter().map(|&i| mu[i]).collect();
        let mut sub = vec![0.0; nm * nm];
        for (a, &i) in mis_idx.iter().enumerate() {
            for (b, &j) in mis_idx.iter().enumerate() {
                sub[a * nm + b] = sigma[i * d + j];
            }
        }
        return Ok(GaussianCond {
            mean,
            chol: CholFactor::from_covariance(&sub, nm)?,
        });
    }

    let mut s_oo = vec![0.0; no * no];
    for (a, &i) in obs_idx.iter().enumerate() {
        for (b, &j) in obs_idx.iter().enumerate() {
            s_oo[a * no + b] = sigma[i * d + j];
        }
    }
    let chol_oo = CholFactor::from_covariance(&s_oo, no)?;

    // w = S_oo^{-1} (x_o - mu_o)
    let resid: Vec<f64> = obs_idx
        .iter()
        .zip(x_obs)
        .map(|(&i, &v)| v - mu[i])
        .collect();
    let w = chol_oo.solve_lower_transpose(&chol_oo.solve_lower(&resid)?)?;

    // Column k of S_om (= row k of S_mo) and its preimage under S_oo.
    let mut cols = Vec::with_capacity(nm);
    let mut pre = Vec::with_capacity(nm);
    for &mk in mis_idx {
        let col: Vec<f64> = obs_idx.iter().map(|&oi| sigma[mk * d + oi]).collect();
        let t = chol_oo.solve_lower_transpose(&chol_oo.solve_lower(&col)?)?;
        cols.push(col);
        pre.push(t);
    }

    let mut mean = Vec::with_capacity(nm);
    for (a, &mk) in mis_idx.iter().enumerate() {
        let dot: f64 = cols[a].iter().zip(&w).map(|(c, ww)| c * ww).sum();
        mean.push(mu[mk] + dot);
    }

    let mut cond = vec![0.0; nm * nm];
    for a in 0..nm {
        for b in 0..=a {
            let (ia, ib) = (mis_idx[a], mis_idx[b]);
            let corr: f64 = cols[a].iter().zip(&pre[b]).map(|(c, t)| c * t).sum();
            let v = sigma[ia * d + ib] - corr;
            cond[a * nm + b] = v;
            cond[b * nm + a] = v;
        }
    }

    Ok(GaussianCond {
        mean,
        chol: CholFactor::from_covariance(&cond, nm)?,
    })
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use avlr_oracles::{invert_matrix, mvn_logpdf_dense};
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn random_spd(rng: &mut ChaCha12Rng, d: usize) -> Vec<f64> {
        let a: Vec<f64> = (0..d * d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut s = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                let mut acc = if i == j { 0.5 } else { 0.0 };
                for k in 0..d {
                    acc += a[i * d + k] * a[j * d + k];
                }
                s[i * d + j] = acc;
            }
        }
        s
    }

    #[test]
    fn sigmoid_is_stable_and_symmetric() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert_eq!(sigmoid(800.0), 1.0);
        assert_eq!(sigmoid(-800.0), 0.0);
        assert!(sigmoid(f64::MIN).is_finite());
        for u in [-3.0, -0.4, 1.7] {
            assert!((sigmoid(u) + sigmoid(-u) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn bernoulli_masses_sum_to_one() {
        for logit in [-4.0, -0.2, 0.0, 2.5] {
            let total = bernoulli_logpmf(0, logit).exp() + bernoulli_logpmf(1, logit).exp();
            assert!((total - 1.0).abs() < 1e-12);
        }
        // Label flip mirrors the logit sign.
        assert!((bernoulli_logpmf(1, 1.3) - bernoulli_logpmf(0, -1.3)).abs() < 1e-15);
    }

    #[test]
    fn standard_normal_logpdf_at_origin() {
        let chol = CholFactor::from_covariance(&[1.0], 1).unwrap();
        let lp = mvn_logpdf(&[0.0], &[0.0], &chol).unwrap();
        assert!((lp + 0.5 * (2.0 * std::f64::consts::PI).ln()).abs() < 1e-15);
    }

    #[test]
    fn mvn_logpdf_matches_dense_inverse_oracle() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for d in 1..=6 {
            for _ in 0..20 {
                let sigma = random_spd(&mut rng, d);
                let mu: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
                let x: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
                let chol = CholFactor::from_covariance(&sigma, d).unwrap();
                let ours = mvn_logpdf(&x, &mu, &chol).unwrap();
                let oracle = mvn_logpdf_dense(&x, &mu, &sigma, d);
                assert!((ours - oracle).abs() < 1e-10, "d={d}: {ours} vs {oracle}");
            }
        }
    }

    #[test]
    fn cholesky_round_trips_covariance() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for d in 1..=6 {
            let sigma = random_spd(&mut rng, d);
            let chol = CholFactor::from_covariance(&sigma, d).unwrap();
            let back = chol.to_covariance();
            for (a, b) in sigma.iter().zip(&back) {
                assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()));
            }
        }
    }

    #[test]
    fn non_positive_definite_is_rejected() {
        // Eigenvalues 3 and -1.
        let sigma = [1.0, 2.0, 2.0, 1.0];
        assert!(matches!(
            CholFactor::from_covariance(&sigma, 2),
            Err(Error::Numeric(_))
        ));
    }

    #[test]
    fn tiny_pivot_is_floored_not_rejected() {
        // Rank-one 2x2: second pivot is exactly 0 and gets the floor.
        let sigma = [1.0, 1.0, 1.0, 1.0];
        let chol = CholFactor::from_covariance(&sigma, 2).unwrap();
        assert_eq!(chol.entry(1, 1), CHOL_DIAG_FLOOR);
    }

    #[test]
    fn unconstrained_round_trip() {
        let v = [0.3, -0.7, -1.2, 0.4, 0.9, 0.05];
        let chol = CholFactor::from_unconstrained(&v, 3).unwrap();
        for i in 0..3 {
            assert!(chol.entry(i, i) > 0.0);
        }
        let back = chol.to_unconstrained();
        for (a, b) in v.iter().zip(&back) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn triangular_solves_round_trip() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let sigma = random_spd(&mut rng, 4);
        let chol = CholFactor::from_covariance(&sigma, 4).unwrap();
        let b: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();

        let z = chol.solve_lower(&b).unwrap();
        let lb = chol.matvec(&z).unwrap();
        for (a, c) in b.iter().zip(&lb) {
            assert!((a - c).abs() < 1e-12);
        }

        let zt = chol.solve_lower_transpose(&b).unwrap();
        // Multiply by L^T directly.
        for i in 0..4 {
            let mut acc = 0.0;
            for j in i..4 {
                acc += chol.entry(j, i) * zt[j];
            }
            assert!((acc - b[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn reparam_at_zero_noise_is_the_mean() {
        let chol = CholFactor::from_unconstrained(&[0.1, 0.4, -0.2], 2).unwrap();
        let x = reparam_sample(&[1.5, -2.0], &chol, &[0.0, 0.0]).unwrap();
        assert_eq!(x, vec![1.5, -2.0]);
    }

    #[test]
    fn bivariate_conditioning_hand_example() {
        // Unit-variance pair with correlation rho: observing x2 shifts the
        // mean by rho * (x2 - mu2) and shrinks the variance to 1 - rho^2.
        let rho = 0.6;
        let mu = [1.0, -0.5];
        let sigma = [1.0, rho, rho, 1.0];
        let cond = gaussian_condition(&mu, &sigma, &[1], &[0.5], &[0]).unwrap();
        assert!((cond.mean[0] - (1.0 + rho * (0.5 + 0.5))).abs() < 1e-14);
        let var = cond.chol.entry(0, 0).powi(2);
        assert!((var - (1.0 - rho * rho)).abs() < 1e-14);
    }

    #[test]
    fn conditioning_with_nothing_observed_is_the_marginal() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let sigma = random_spd(&mut rng, 4);
        let mu = [0.5, -1.0, 2.0, 0.0];
        let cond = gaussian_condition(&mu, &sigma, &[], &[], &[1, 3]).unwrap();
        assert_eq!(cond.mean, vec![-1.0, 0.0]);
        let cov = cond.chol.to_covariance();
        assert!((cov[0] - sigma[1 * 4 + 1]).abs() < 1e-12);
        assert!((cov[1] - sigma[1 * 4 + 3]).abs() < 1e-12);
        assert!((cov[3] - sigma[3 * 4 + 3]).abs() < 1e-12);
    }

    #[test]
    fn conditioning_matches_joint_factorization() {
        // log N(x; mu, Sigma) must equal the observed marginal plus the
        // conditional density of the missing block at any full vector x.
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        for d in 2..=6 {
            for _ in 0..20 {
                let sigma = random_spd(&mut rng, d);
                let mu: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
                let x: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
                let split = rng.random_range(1..d);
                let mut idx: Vec<usize> = (0..d).collect();
                // Random partition into observed / missing.
                for i in (1..d).rev() {
                    let j = rng.random_range(0..=i);
                    idx.swap(i, j);
                }
                let (obs_idx, mis_idx) = idx.split_at(split);
                let x_obs: Vec<f64> = obs_idx.iter().map(|&i| x[i]).collect();
                let x_mis: Vec<f64> = mis_idx.iter().map(|&i| x[i]).collect();

                let chol_full = CholFactor::from_covariance(&sigma, d).unwrap();
                let joint = mvn_logpdf(&x, &mu, &chol_full).unwrap();

                let marg = gaussian_condition(&mu, &sigma, &[], &[], obs_idx).unwrap();
                let lp_obs = marg.logpdf(&x_obs).unwrap();
                let cond = gaussian_condition(&mu, &sigma, obs_idx, &x_obs, mis_idx).unwrap();
                let lp_mis = cond.logpdf(&x_mis).unwrap();

                assert!(
                    (joint - (lp_obs + lp_mis)).abs() < 1e-10,
                    "d={d}: joint {joint} vs split {}",
                    lp_obs + lp_mis
                );
            }
        }
    }

    #[test]
    fn dense_inverse_agrees_with_solves() {
        // Sanity-check the oracle inverse path against our solve path on
        // one system so both test routes stay honest.
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        let sigma = random_spd(&mut rng, 5);
        let chol = CholFactor::from_covariance(&sigma, 5).unwrap();
        let b: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
        let ours = chol
            .solve_lower_transpose(&chol.solve_lower(&b).unwrap())
            .unwrap();
        let inv = invert_matrix(&sigma, 5).unwrap();
        for i in 0..5 {
            let oracle: f64 = (0..5).map(|j| inv[i * 5 + j] * b[j]).sum();
            assert!((ours[i] - oracle).abs() < 1e-10);
        }
    }

    proptest! {
        #[test]
        fn random_spd_densities_are_finite(seed in 0u64..500) {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let d = 1 + (seed as usize % 5);
            let sigma = random_spd(&mut rng, d);
            let mu: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
            let x: Vec<f64> = (0..d).map(|_| rng.random_range(-4.0..4.0)).collect();
            let chol = CholFactor::from_covariance(&sigma, d).unwrap();
            let lp = mvn_logpdf(&x, &mu, &chol).unwrap();
            prop_assert!(lp.is_finite());
        }

        #[test]
        fn conditional_covariance_never_exceeds_marginal(seed in 0u64..300) {
            // Conditioning cannot inflate a coordinate's variance.
            let mut rng = ChaCha12Rng::seed_from_u64(seed.wrapping_mul(0x9E3779B9));
            let d = 2 + (seed as usize % 4);
            let sigma = random_spd(&mut rng, d);
            let mu = vec![0.0; d];
            let x_obs = [0.7];
            let cond = gaussian_condition(&mu, &sigma, &[0], &x_obs, &(1..d).collect::<Vec<_>>()).unwrap();
            let cov = cond.chol.to_covariance();
            let nm = d - 1;
            for a in 0..nm {
                let orig = sigma[(a + 1) * d + (a + 1)];
                prop_assert!(cov[a * nm + a] <= orig + 1e-10);
            }
        }
    }
}
