//! Reference implementations used as test oracles by the `avlr` test suite.
//!
//! Everything in this crate is deliberately written along a different
//! numerical route than the production code it checks: quadrature instead of
//! Monte Carlo, explicit matrix inversion instead of Cholesky solves,
//! characteristic polynomials instead of factorizations, O(n^2) pair counting
//! instead of rank statistics. Keep it that way; an oracle that shares its
//! route with the code under test verifies nothing.
//!
//! This crate must not depend on `avlr`.

// ---------------------------------------------------------------------------
// Scalar special functions
// ---------------------------------------------------------------------------

/// Error function, Abramowitz & Stegun 7.1.26. Absolute error below 1.5e-7,
/// which is plenty for Kolmogorov-Smirnov thresholds of 1e-2.
pub fn erf(x: f64) -> f64 {
    let sign = if x < 0.0 { -1.0 } else { 1.0 };
    let x = x.abs();
    let t = 1.0 / (1.0 + 0.3275911 * x);
    let poly = t
        * (0.254829592
            + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
    sign * (1.0 - poly * (-x * x).exp())
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2))
}

fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

/// Composite trapezoid rule for `f` on `[a, b]` with `n` panels.
pub fn trapezoid<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    assert!(n >= 1 && b > a);
    let h = (b - a) / n as f64;
    let mut acc = 0.5 * (f(a) + f(b));
    for i in 1..n {
        acc += f(a + h * i as f64);
    }
    acc * h
}

/// Gauss-Hermite nodes and weights (physicists' convention):
/// integral of exp(-t^2) f(t) dt ~= sum_i w_i f(t_i).
///
/// Newton iteration on the orthonormal Hermite recurrence with the classic
/// asymptotic initial guesses; accurate to near machine precision for the
/// orders used in tests (n <= 100).
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let m = n.div_ceil(2);
    let nf = n as f64;
    let mut z = 0.0;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * nodes[0],
            3 => 1.91 * z - 0.91 * nodes[1],
            _ => 2.0 * z - nodes[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..200 {
            // Orthonormal recurrence: p_{j+1} = z sqrt(2/(j+1)) p_j - sqrt(j/(j+1)) p_{j-1}.
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = z;
        nodes[n - 1 - i] = -z;
        weights[i] = 2.0 / (pp * pp);
        weights[n - 1 - i] = weights[i];
    }
    (nodes, weights)
}

/// E[f(X)] for X ~ Normal(mu, sigma^2) via n-node Gauss-Hermite.
pub fn gh_expect<F: Fn(f64) -> f64>(mu: f64, sigma: f64, n: usize, f: F) -> f64 {
    let (nodes, weights) = gauss_hermite(n);
    let inv_sqrt_pi = 1.0 / std::f64::consts::PI.sqrt();
    let mut acc = 0.0;
    for (t, w) in nodes.iter().zip(weights.iter()) {
        acc += w * f(mu + std::f64::consts::SQRT_2 * sigma * t);
    }
    acc * inv_sqrt_pi
}

/// log p(y) for y ~ Bernoulli(sigmoid(b0 + b1 x)), x ~ Normal(mu, sigma^2),
/// by Gauss-Hermite quadrature.
pub fn gh_log_marginal_bernoulli(y: u8, b0: f64, b1: f64, mu: f64, sigma: f64, n: usize) -> f64 {
    let p = gh_expect(mu, sigma, n, |x| {
        let s = sigmoid(b0 + b1 * x);
        if y == 1 {
            s
        } else {
            1.0 - s
        }
    });
    p.ln()
}

// ---------------------------------------------------------------------------
// Dense linear algebra (explicit, small d)
// ---------------------------------------------------------------------------

/// Inverse of a dense row-major d x d matrix by Gauss-Jordan elimination with
/// partial pivoting. Returns None when a pivot underflows.
pub fn invert_matrix(a: &[f64], d: usize) -> Option<Vec<f64>> {
    assert_eq!(a.len(), d * d);
    let mut m = a.to_vec();
    let mut inv = vec![0.0; d * d];
    for i in 0..d {
        inv[i * d + i] = 1.0;
    }
    for col in 0..d {
        let mut piv = col;
        for r in col + 1..d {
            if m[r * d + col].abs() > m[piv * d + col].abs() {
                piv = r;
            }
        }
        if m[piv * d + col].abs() < 1e-300 {
            return None;
        }
        if piv != col {
            for j in 0..d {
                m.swap(col * d + j, piv * d + j);
                inv.swap(col * d + j, piv * d + j);
            }
        }
        let p = m[col * d + col];
        for j in 0..d {
            m[col * d + j] /= p;
            inv[col * d + j] /= p;
        }
        for r in 0..d {
            if r == col {
                continue;
            }
            let f = m[r * d + col];
            if f == 0.0 {
                continue;
            }
            for j in 0..d {
                m[r * d + j] -= f * m[col * d + j];
                inv[r * d + j] -= f * inv[col * d + j];
            }
        }
    }
    Some(inv)
}

/// Determinant by LU with partial pivoting.
pub fn determinant(a: &[f64], d: usize) -> f64 {
    assert_eq!(a.len(), d * d);
    let mut m = a.to_vec();
    let mut det = 1.0;
    for col in 0..d {
        let mut piv = col;
        for r in col + 1..d {
            if m[r * d + col].abs() > m[piv * d + col].abs() {
                piv = r;
            }
        }
        if m[piv * d + col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            for j in 0..d {
                m.swap(col * d + j, piv * d + j);
            }
            det = -det;
        }
        det *= m[col * d + col];
        for r in col + 1..d {
            let f = m[r * d + col] / m[col * d + col];
            for j in col..d {
                m[r * d + j] -= f * m[col * d + j];
            }
        }
    }
    det
}

/// Multivariate normal log-density along the explicit-inverse route:
/// -0.5 [ d ln(2 pi) + ln det(Sigma) + (x-mu)' Sigma^{-1} (x-mu) ].
pub fn mvn_logpdf_dense(x: &[f64], mu: &[f64], sigma: &[f64], d: usize) -> f64 {
    let inv = invert_matrix(sigma, d).expect("oracle covariance must be invertible");
    let det = determinant(sigma, d);
    let mut quad = 0.0;
    for i in 0..d {
        for j in 0..d {
            quad += (x[i] - mu[i]) * inv[i * d + j] * (x[j] - mu[j]);
        }
    }
    -0.5 * (d as f64 * (2.0 * std::f64::consts::PI).ln() + det.ln() + quad)
}

/// Coefficients of the monic characteristic polynomial
/// p(l) = l^d + c[0] l^{d-1} + ... + c[d-1], by Faddeev-LeVerrier.
pub fn char_poly(a: &[f64], d: usize) -> Vec<f64> {
    assert_eq!(a.len(), d * d);
    let matmul = |x: &[f64], y: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; d * d];
        for i in 0..d {
            for k in 0..d {
                let v = x[i * d + k];
                if v == 0.0 {
                    continue;
                }
                for j in 0..d {
                    out[i * d + j] += v * y[k * d + j];
                }
            }
        }
        out
    };
    let trace = |x: &[f64]| -> f64 { (0..d).map(|i| x[i * d + i]).sum() };
    let mut coeffs = Vec::with_capacity(d);
    let mut m: Vec<f64> = (0..d * d)
        .map(|i| if i % (d + 1) == 0 { 1.0 } else { 0.0 })
        .collect();
    for k in 1..=d {
        let am = matmul(a, &m);
        let c = -trace(&am) / k as f64;
        coeffs.push(c);
        m = am;
        for i in 0..d {
            m[i * d + i] += c;
        }
    }
    coeffs
}

/// True when every eigenvalue of the symmetric matrix `a` is strictly
/// positive. Symmetry makes all roots of the characteristic polynomial real,
/// so positivity is exactly the alternating-sign pattern of the monic
/// coefficients (Descartes' rule with all-real roots).
pub fn sym_all_eigenvalues_positive(a: &[f64], d: usize) -> bool {
    let coeffs = char_poly(a, d);
    coeffs
        .iter()
        .enumerate()
        .all(|(i, &c)| if i % 2 == 0 { c < 0.0 } else { c > 0.0 })
}

/// Eigenvalues of a symmetric matrix by sign-change bisection on the
/// characteristic polynomial over the Gershgorin interval. Only simple (or
/// odd-multiplicity) roots are found; adequate for the random, well-separated
/// spectra used in tests.
pub fn sym_eigenvalues(a: &[f64], d: usize) -> Vec<f64> {
    let coeffs = char_poly(a, d);
    let eval = |l: f64| -> f64 {
        let mut v = 1.0;
        for &c in &coeffs {
            v = v * l + c;
        }
        v
    };
    let radius = (0..d)
        .map(|i| (0..d).map(|j| a[i * d + j].abs()).sum::<f64>())
        .fold(0.0_f64, f64::max)
        + 1.0;
    let grid = 16384;
    let step = 2.0 * radius / grid as f64;
    let mut roots = Vec::new();
    let mut prev_x = -radius;
    let mut prev_v = eval(prev_x);
    for g in 1..=grid {
        let x = -radius + step * g as f64;
        let v = eval(x);
        if prev_v == 0.0 {
            roots.push(prev_x);
        } else if prev_v * v < 0.0 {
            let (mut lo, mut hi) = (prev_x, x);
            let mut flo = prev_v;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let fm = eval(mid);
                if flo * fm <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        prev_x = x;
        prev_v = v;
    }
    roots
}

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

/// AUC by explicit O(n0 * n1) pair counting, ties scored one half.
pub fn brute_force_auc(scores: &[f64], labels: &[u8]) -> f64 {
    let mut concordant = 0.0;
    let mut n1 = 0u64;
    let mut n0 = 0u64;
    for (i, &li) in labels.iter().enumerate() {
        if li == 1 {
            n1 += 1;
            for (j, &lj) in labels.iter().enumerate() {
                if lj == 0 {
                    if scores[i] > scores[j] {
                        concordant += 1.0;
                    } else if scores[i] == scores[j] {
                        concordant += 0.5;
                    }
                }
            }
        } else {
            n0 += 1;
        }
    }
    concordant / (n1 as f64 * n0 as f64)
}

/// Kolmogorov-Smirnov statistic of `samples` against the CDF `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = s.len() as f64;
    let mut d = 0.0_f64;
    for (i, &x) in s.iter().enumerate() {
        let c = cdf(x);
        d = d.max((c - i as f64 / n).abs());
        d = d.max(((i + 1) as f64 / n - c).abs());
    }
    d
}

/// Streaming (Welford) mean and sample standard deviation.
pub fn welford_mean_std(xs: &[f64]) -> (f64, f64) {
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let n = (i + 1) as f64;
        let delta = x - mean;
        mean += delta / n;
        m2 += delta * (x - mean);
    }
    let std = if xs.len() > 1 {
        (m2 / (xs.len() as f64 - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, std)
}

/// Logistic MLE by plain Newton iteration with explicit matrix inversion.
/// `x` is n x d row-major without an intercept column; the returned vector is
/// (intercept, slopes) of length d + 1.
pub fn logistic_newton_mle(x: &[f64], n: usize, d: usize, y: &[u8], iters: usize) -> Vec<f64> {
    let p = d + 1;
    let mut beta = vec![0.0; p];
    let design = |i: usize, j: usize| -> f64 {
        if j == 0 {
            1.0
        } else {
            x[i * d + (j - 1)]
        }
    };
    for _ in 0..iters {
        let mut grad = vec![0.0; p];
        let mut hess = vec![0.0; p * p];
        for i in 0..n {
            let mut eta = beta[0];
            for j in 0..d {
                eta += beta[j + 1] * x[i * d + j];
            }
            let pi = sigmoid(eta);
            let w = pi * (1.0 - pi);
            let resid = y[i] as f64 - pi;
            for a in 0..p {
                grad[a] += design(i, a) * resid;
                for b in 0..p {
                    hess[a * p + b] += w * design(i, a) * design(i, b);
                }
            }
        }
        let hinv = match invert_matrix(&hess, p) {
            Some(h) => h,
            None => break,
        };
        let mut step_norm = 0.0;
        for a in 0..p {
            let mut s = 0.0;
            for b in 0..p {
                s += hinv[a * p + b] * grad[b];
            }
            beta[a] += s;
            step_norm += s * s;
        }
        if step_norm.sqrt() < 1e-12 {
            break;
        }
    }
    beta
}
