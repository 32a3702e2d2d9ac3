//! The training objective: an importance-weighted evidence lower bound
//! estimated with `K` reparameterized draws per row, built on the reverse-
//! mode tape so one backward pass yields the gradient for every parameter.
//!
//! All trainable parameters live in a single flat vector. `stage` gathers
//! the segments back out on-tape, which keeps the gradient layout identical
//! to the optimizer's state layout by construction.

use crate::diffcore::{tri_len, Tape, VarId};
use crate::encoder::{submatrix_tri_indices, EncoderParams};
use crate::error::{Error, Result};
use crate::model::{MissParams, ModelParams};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

const LN_2PI: f64 = 1.8378770664093453;

// ---------------------------------------------------------------------------
// Parameter bundle and flattening
// ---------------------------------------------------------------------------

/// Everything the optimizer touches: model parameters, optional selection
/// model, and the encoder.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Params {
    pub model: ModelParams,
    pub miss: Option<MissParams>,
    pub encoder: EncoderParams,
}

impl Params {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if let Some(m) = &self.miss {
            m.validate()?;
            if m.d != self.model.d {
                return Err(Error::Dim("selection model dimension mismatch".into()));
            }
        }
        self.encoder.validate()?;
        if self.encoder.d != self.model.d {
            return Err(Error::Dim("encoder dimension mismatch".into()));
        }
        Ok(())
    }

    pub fn d(&self) -> usize {
        self.model.d
    }

    pub fn hidden(&self) -> usize {
        self.encoder.hidden
    }

    pub fn is_mnar(&self) -> bool {
        self.miss.is_some()
    }

    /// Total flattened length for a given shape.
    pub fn flat_len(d: usize, hidden: usize, mnar: bool) -> usize {
        let tri = tri_len(d);
        let input = 2 * d + 1;
        let model = (d + 1) + d + tri;
        let sel = if mnar { d * (d + 2) } else { 0 };
        let enc = hidden * input + hidden + d * hidden + d + tri * hidden + tri;
        model + sel + enc
    }

    /// Concatenates every parameter block in the fixed order
    /// `beta, mu, sigma_chol, [psi,] w1, b1, w_mean, b_mean, w_chol, b_chol`.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out =
            Vec::with_capacity(Self::flat_len(self.d(), self.hidden(), self.is_mnar()));
        out.extend_from_slice(&self.model.beta);
        out.extend_from_slice(&self.model.mu);
        out.extend_from_slice(&self.model.sigma_chol);
        if let Some(m) = &self.miss {
            out.extend_from_slice(&m.coef);
        }
        out.extend_from_slice(&self.encoder.w1);
        out.extend_from_slice(&self.encoder.b1);
        out.extend_from_slice(&self.encoder.w_mean);
        out.extend_from_slice(&self.encoder.b_mean);
        out.extend_from_slice(&self.encoder.w_chol);
        out.extend_from_slice(&self.encoder.b_chol);
        out
    }

    /// Rebuilds the bundle from a flat vector laid out by
    /// [`flatten`](Self::flatten).
    pub fn unflatten(flat: &[f64], d: usize, hidden: usize, mnar: bool) -> Result<Self> {
        if flat.len() != Self::flat_len(d, hidden, mnar) {
            return Err(Error::Dim(format!(
                "flat parameter vector has {} entries, expected {}",
                flat.len(),
                Self::flat_len(d, hidden, mnar)
            )));
        }
        let tri = tri_len(d);
        let input = 2 * d + 1;
        let mut pos = 0;
        let mut take = |n: usize| {
            let s = flat[pos..pos + n].to_vec();
            pos += n;
            s
        };
        let beta = take(d + 1);
        let mu = take(d);
        let sigma_chol = take(tri);
        let miss = if mnar {
            Some(MissParams { d, coef: take(d * (d + 2)) })
        } else {
            None
        };
        let encoder = EncoderParams {
            d,
            hidden,
            w1: take(hidden * input),
            b1: take(hidden),
            w_mean: take(d * hidden),
            b_mean: take(d),
            w_chol: take(tri * hidden),
            b_chol: take(tri),
        };
        Ok(Self {
            model: ModelParams { d, beta, mu, sigma_chol },
            miss,
            encoder,
        })
    }
}

// ---------------------------------------------------------------------------
// Prepared rows
// ---------------------------------------------------------------------------

/// One dataset row preprocessed for graph construction: zero-filled
/// covariates, the mask in both bool and 0/1 form, missing coordinate
/// indices, and the packed-triangle positions of their principal submatrix.
#[derive(Debug, Clone)]
pub struct PreparedRow {
    pub x_filled: Vec<f64>,
    pub mask: Vec<bool>,
    pub mask_f: Vec<f64>,
    pub y: u8,
    pub mis_idx: Vec<usize>,
    pub tri_idx: Vec<usize>,
    pub enc_input: Vec<f64>,
}

impl PreparedRow {
    pub fn new(x: &[f64], mask: &[bool], y: u8) -> Result<Self> {
        if x.len() != mask.len() {
            return Err(Error::Dim("prepared row: length mismatch".into()));
        }
        let d = x.len();
        let mut x_filled = vec![0.0; d];
        for j in 0..d {
            if mask[j] {
                if !x[j].is_finite() {
                    return Err(Error::Data(format!(
                        "observed covariate {j} is not finite"
                    )));
                }
                x_filled[j] = x[j];
            }
        }
        let mask_f: Vec<f64> = mask.iter().map(|&m| if m { 1.0 } else { 0.0 }).collect();
        let mis_idx: Vec<usize> = (0..d).filter(|&j| !mask[j]).collect();
        let tri_idx = submatrix_tri_indices(&mis_idx);
        let mut enc_input = Vec::with_capacity(2 * d + 1);
        enc_input.extend_from_slice(&x_filled);
        enc_input.extend_from_slice(&mask_f);
        enc_input.push(f64::from(y));
        Ok(Self {
            x_filled,
            mask: mask.to_vec(),
            mask_f,
            y,
            mis_idx,
            tri_idx,
            enc_input,
        })
    }

    pub fn n_missing(&self) -> usize {
        self.mis_idx.len()
    }
}

// ---------------------------------------------------------------------------
// Staged parameters on the tape
// ---------------------------------------------------------------------------

/// On-tape views of every parameter segment, gathered from the flat leaf,
/// plus the prior factor which is shared by all rows of a batch.
pub struct Staged {
    pub d: usize,
    pub hidden: usize,
    pub beta0: VarId,
    pub beta_rest: VarId,
    pub mu: VarId,
    pub prior_chol: VarId,
    pub prior_sld: VarId,
    pub psi_wx: Option<VarId>,
    pub psi_int: Option<VarId>,
    pub psi_y: Option<VarId>,
    pub w1: VarId,
    pub b1: VarId,
    pub w_mean: VarId,
    pub b_mean: VarId,
    pub w_chol: VarId,
    pub b_chol: VarId,
}

/// Gathers the parameter segments out of the flat leaf and pre-factors the
/// covariate prior. Call once per tape, after placing the leaf.
pub fn stage(tape: &mut Tape, flat: VarId, d: usize, hidden: usize, mnar: bool) -> Result<Staged> {
    let tri = tri_len(d);
    let input = 2 * d + 1;
    let mut pos = 0;
    fn seg(tape: &mut Tape, flat: VarId, pos: &mut usize, n: usize) -> Result<VarId> {
        let idx: Vec<usize> = (*pos..*pos + n).collect();
        *pos += n;
        tape.gather(flat, &idx)
    }

    let beta = seg(tape, flat, &mut pos, d + 1)?;
    let mu = seg(tape, flat, &mut pos, d)?;
    let sigma_chol = seg(tape, flat, &mut pos, tri)?;
    let (psi_wx, psi_int, psi_y) = if mnar {
        let base = pos;
        pos += d * (d + 2);
        let mut wx = Vec::with_capacity(d * d);
        let mut int = Vec::with_capacity(d);
        let mut yc = Vec::with_capacity(d);
        for j in 0..d {
            let row = base + j * (d + 2);
            int.push(row);
            for k in 0..d {
                wx.push(row + 1 + k);
            }
            yc.push(row + d + 1);
        }
        (
            Some(tape.gather(flat, &wx)?),
            Some(tape.gather(flat, &int)?),
            Some(tape.gather(flat, &yc)?),
        )
    } else {
        (None, None, None)
    };
    let w1 = seg(tape, flat, &mut pos, hidden * input)?;
    let b1 = seg(tape, flat, &mut pos, hidden)?;
    let w_mean = seg(tape, flat, &mut pos, d * hidden)?;
    let b_mean = seg(tape, flat, &mut pos, d)?;
    let w_chol = seg(tape, flat, &mut pos, tri * hidden)?;
    let b_chol = seg(tape, flat, &mut pos, tri)?;

    let beta0 = tape.gather(beta, &[0])?;
    let rest: Vec<usize> = (1..=d).collect();
    let beta_rest = tape.gather(beta, &rest)?;
    let prior_chol = tape.chol_from_vec(sigma_chol, d)?;
    let prior_sld = tape.sum_log_diag(prior_chol, d)?;

    Ok(Staged {
        d,
        hidden,
        beta0,
        beta_rest,
        mu,
        prior_chol,
        prior_sld,
        psi_wx,
        psi_int,
        psi_y,
        w1,
        b1,
        w_mean,
        b_mean,
        w_chol,
        b_chol,
    })
}

// ---------------------------------------------------------------------------
// Per-row bound
// ---------------------------------------------------------------------------

/// `log p(y | x) + log p(x) [+ log p(r | x, y)]` for one completed row
/// already on the tape. Returns a length-1 node.
fn completed_log_joint(
    tape: &mut Tape,
    st: &Staged,
    row: &PreparedRow,
    x_full: VarId,
) -> Result<VarId> {
    let d = st.d;
    // Label term.
    let xb = tape.dot(st.beta_rest, x_full)?;
    let eta = tape.add(xb, st.beta0)?;
    let y_const = tape.constant(&[f64::from(row.y)]);
    let ll_y = tape.bernoulli_logit(eta, y_const)?;

    // Covariate prior.
    let diff = tape.sub(x_full, st.mu)?;
    let z = tape.tri_solve(st.prior_chol, diff, d)?;
    let quad = tape.dot(z, z)?;
    let half_quad = tape.scale(quad, -0.5);
    let with_sld = tape.sub(half_quad, st.prior_sld)?;
    let prior_lp = tape.add_scalar(with_sld, -0.5 * d as f64 * LN_2PI);

    let mut total = tape.add(ll_y, prior_lp)?;

    // Selection model, when the mask is treated as informative.
    if let (Some(wx), Some(int), Some(yc)) = (st.psi_wx, st.psi_int, st.psi_y) {
        let y_scaled = tape.scale(yc, f64::from(row.y));
        let bias = tape.add(int, y_scaled)?;
        let logits = tape.affine(wx, x_full, bias, d, d)?;
        let mask_const = tape.constant(&row.mask_f);
        let per_feature = tape.bernoulli_logit(logits, mask_const)?;
        let ll_r = tape.sum(per_feature);
        total = tape.add(total, ll_r)?;
    }
    Ok(total)
}

/// Builds one row's importance-weighted bound with `k` draws, using the
/// provided standard normal noise (`k * n_missing` values, draw-major).
/// Returns a length-1 node holding the bound.
///
/// Complete rows skip the encoder entirely: every draw would produce the
/// same weight, so the bound is the completed-data log joint itself and the
/// encoder receives an exactly zero gradient.
pub fn iwelbo_row(
    tape: &mut Tape,
    st: &Staged,
    row: &PreparedRow,
    k: usize,
    noise: &[f64],
) -> Result<VarId> {
    if k == 0 {
        return Err(Error::Config("iwelbo requires at least one draw".into()));
    }
    let d = st.d;
    if row.x_filled.len() != d {
        return Err(Error::Dim("iwelbo row: dimension mismatch".into()));
    }
    let dm = row.n_missing();
    if noise.len() != k * dm {
        return Err(Error::Dim(format!(
            "iwelbo row: {} noise values for k={k}, n_missing={dm}",
            noise.len()
        )));
    }

    if dm == 0 {
        let x_full = tape.constant(&row.x_filled);
        return completed_log_joint(tape, st, row, x_full);
    }

    // Encoder forward pass, shared by all draws.
    let input = tape.constant(&row.enc_input);
    let pre = tape.affine(st.w1, input, st.b1, st.hidden, 2 * d + 1)?;
    let hid = tape.tanh_act(pre);
    let full_mean = tape.affine(st.w_mean, hid, st.b_mean, d, st.hidden)?;
    let full_cvec = tape.affine(st.w_chol, hid, st.b_chol, tri_len(d), st.hidden)?;
    let q_mean = tape.gather(full_mean, &row.mis_idx)?;
    let q_cvec = tape.gather(full_cvec, &row.tri_idx)?;
    let q_chol = tape.chol_from_vec(q_cvec, dm)?;
    let q_sld = tape.sum_log_diag(q_chol, dm)?;

    let x_obs = tape.constant(&row.x_filled);
    let mut draws = Vec::with_capacity(k);
    for s in 0..k {
        let eps = &noise[s * dm..(s + 1) * dm];
        let eps_node = tape.constant(eps);
        let le = tape.tri_matvec(q_chol, eps_node, dm)?;
        let x_mis = tape.add(q_mean, le)?;
        let x_full = tape.scatter_into(x_mis, x_obs, &row.mis_idx)?;

        let log_joint = completed_log_joint(tape, st, row, x_full)?;

        // log q at the draw. Along the reparameterization path the
        // quadratic form collapses exactly: L^{-1}(x - mean) is the noise
        // itself, for every value of the parameters, so only the log-
        // determinant carries a gradient.
        let eps_sq: f64 = eps.iter().map(|e| e * e).sum();
        let neg_sld = tape.scale(q_sld, -1.0);
        let q_lp = tape.add_scalar(neg_sld, -0.5 * dm as f64 * LN_2PI - 0.5 * eps_sq);

        let w = tape.sub(log_joint, q_lp)?;
        draws.push(w);
    }
    let logws = tape.concat(&draws)?;
    let lse = tape.logsumexp(logws)?;
    Ok(tape.add_scalar(lse, -(k as f64).ln()))
}

// ---------------------------------------------------------------------------
// Batch objective
// ---------------------------------------------------------------------------

/// Loss and flat gradient for one minibatch: the mean over rows of the
/// negative bound, differentiated in a single backward pass.
pub struct BatchEval {
    pub loss: f64,
    pub grad: Vec<f64>,
}

/// Evaluates the batch objective with explicit per-row noise (each entry
/// holding `k * n_missing` standard normal values). Exposed separately so
/// tests and gradient checks can pin the randomness.
pub fn objective_batch_with_noise(
    tape: &mut Tape,
    params: &Params,
    rows: &[&PreparedRow],
    k: usize,
    noise: &[Vec<f64>],
) -> Result<BatchEval> {
    if rows.is_empty() {
        return Err(Error::Config("empty batch".into()));
    }
    if noise.len() != rows.len() {
        return Err(Error::Dim("one noise vector per row required".into()));
    }
    params.validate()?;
    let (d, hidden, mnar) = (params.d(), params.hidden(), params.is_mnar());

    tape.reset();
    let flat_vals = params.flatten();
    let flat = tape.leaf(&flat_vals);
    let st = stage(tape, flat, d, hidden, mnar)?;

    let mut bounds = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let b = iwelbo_row(tape, &st, row, k, &noise[i])?;
        let v = tape.value(b)[0];
        if !v.is_finite() {
            return Err(Error::Numeric(format!(
                "non-finite bound ({v}) at batch row {i}"
            )));
        }
        bounds.push(b);
    }
    let all = tape.concat(&bounds)?;
    let total = tape.sum(all);
    let loss_node = tape.scale(total, -1.0 / rows.len() as f64);
    tape.backward(loss_node)?;

    Ok(BatchEval {
        loss: tape.value(loss_node)[0],
        grad: tape.grad(flat).to_vec(),
    })
}

/// Draws fresh noise for every row and evaluates the batch objective.
pub fn objective_batch<R: Rng>(
    tape: &mut Tape,
    params: &Params,
    rows: &[&PreparedRow],
    k: usize,
    rng: &mut R,
) -> Result<BatchEval> {
    let noise: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            (0..k * r.n_missing())
                .map(|_| rng.sample(StandardNormal))
                .collect()
        })
        .collect();
    objective_batch_with_noise(tape, params, rows, k, &noise)
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffcore::grad_check;
    use crate::model::joint_log_weight;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn demo_params(d: usize, hidden: usize, mnar: bool, seed: u64) -> Params {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut model = ModelParams::zeros(d);
        for b in model.beta.iter_mut() {
            *b = rng.random_range(-0.8..0.8);
        }
        for m in model.mu.iter_mut() {
            *m = rng.random_range(-0.5..0.5);
        }
        for (i, c) in model.sigma_chol.iter_mut().enumerate() {
            *c = rng.random_range(-0.4..0.4) + if i % 3 == 0 { 0.1 } else { 0.0 };
        }
        let miss = mnar.then(|| {
            let mut m = MissParams::zeros(d);
            for c in m.coef.iter_mut() {
                *c = rng.random_range(-0.5..0.5);
            }
            m
        });
        let encoder = EncoderParams::init(d, hidden, &mut rng);
        Params { model, miss, encoder }
    }

    fn demo_rows(d: usize) -> Vec<PreparedRow> {
        // One complete, one partial, one fully missing.
        let complete = PreparedRow::new(&vec![0.4; d], &vec![true; d], 1).unwrap();
        let mut mask = vec![true; d];
        mask[0] = false;
        if d > 2 {
            mask[2] = false;
        }
        let mut x = vec![0.0; d];
        for (j, v) in x.iter_mut().enumerate() {
            if mask[j] {
                *v = 0.3 * (j as f64 + 1.0);
            }
        }
        let partial = PreparedRow::new(&x, &mask, 0).unwrap();
        let empty = PreparedRow::new(&vec![0.0; d], &vec![false; d], 1).unwrap();
        vec![complete, partial, empty]
    }

    /// Plain-f64 replica of the taped bound, routed through `encoder` and
    /// `model` instead of the tape.
    fn iwelbo_plain(params: &Params, row: &PreparedRow, k: usize, noise: &[f64]) -> f64 {
        let post = params
            .encoder
            .encode(&row.x_filled, &row.mask, row.y)
            .unwrap();
        let dm = post.dim();
        let mut logws = Vec::with_capacity(k);
        for s in 0..k {
            let eps = &noise[s * dm..(s + 1) * dm];
            let x_mis = post.sample(eps).unwrap();
            let mut x_full = row.x_filled.clone();
            for (a, &j) in post.mis_idx.iter().enumerate() {
                x_full[j] = x_mis[a];
            }
            let q_lp = post.logpdf(&x_mis).unwrap();
            let lw = joint_log_weight(
                &params.model,
                params.miss.as_ref(),
                &x_full,
                row.y,
                &row.mask,
                q_lp,
            )
            .unwrap();
            logws.push(lw);
        }
        let m = logws.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + logws.iter().map(|w| (w - m).exp()).sum::<f64>().ln();
        lse - (k as f64).ln()
    }

    #[test]
    fn taped_bound_matches_plain_replica() {
        for mnar in [false, true] {
            let params = demo_params(4, 8, mnar, 21);
            let mut rng = ChaCha12Rng::seed_from_u64(99);
            let mut tape = Tape::new();
            for row in demo_rows(4) {
                let k = 3;
                let noise: Vec<f64> = (0..k * row.n_missing())
                    .map(|_| rng.sample::<f64, _>(StandardNormal))
                    .collect();

                tape.reset();
                let flat_vals = params.flatten();
                let flat = tape.leaf(&flat_vals);
                let st = stage(&mut tape, flat, 4, 8, mnar).unwrap();
                let node = iwelbo_row(&mut tape, &st, &row, k, &noise).unwrap();
                let taped = tape.value(node)[0];

                let plain = iwelbo_plain(&params, &row, k, &noise);
                assert!(
                    (taped - plain).abs() < 1e-10,
                    "mnar={mnar} missing={}: taped {taped} vs plain {plain}",
                    row.n_missing()
                );
            }
        }
    }

    #[test]
    fn batch_gradient_matches_finite_differences() {
        let d = 3;
        let hidden = 4;
        for mnar in [false, true] {
            let params = demo_params(d, hidden, mnar, 5);
            let rows = demo_rows(d);
            let row_refs: Vec<&PreparedRow> = rows.iter().collect();
            let k = 2;
            let mut rng = ChaCha12Rng::seed_from_u64(31);
            let noise: Vec<Vec<f64>> = rows
                .iter()
                .map(|r| {
                    (0..k * r.n_missing())
                        .map(|_| rng.sample::<f64, _>(StandardNormal))
                        .collect()
                })
                .collect();

            let flat = params.flatten();
            let err = grad_check(
                |tape, leaf| {
                    let st = stage(tape, leaf, d, hidden, mnar)?;
                    let mut nodes = Vec::new();
                    for (i, row) in row_refs.iter().enumerate() {
                        nodes.push(iwelbo_row(tape, &st, row, k, &noise[i])?);
                    }
                    let all = tape.concat(&nodes)?;
                    let total = tape.sum(all);
                    Ok(tape.scale(total, -1.0 / row_refs.len() as f64))
                },
                &flat,
                1e-5,
            )
            .unwrap();
            assert!(err < 1e-6, "mnar={mnar}: worst rel err {err}");
        }
    }

    #[test]
    fn complete_rows_leave_the_encoder_untouched() {
        let d = 3;
        let params = demo_params(d, 4, false, 7);
        let row = PreparedRow::new(&[0.2, -0.4, 0.9], &[true, true, true], 1).unwrap();
        let mut tape = Tape::new();
        let eval = objective_batch_with_noise(&mut tape, &params, &[&row], 4, &[vec![]]).unwrap();

        // Encoder weights sit at the tail of the flat layout.
        let enc_start = Params::flat_len(d, 4, false)
            - (params.encoder.w1.len()
                + params.encoder.b1.len()
                + params.encoder.w_mean.len()
                + params.encoder.b_mean.len()
                + params.encoder.w_chol.len()
                + params.encoder.b_chol.len());
        assert!(eval.grad[enc_start..].iter().all(|&g| g == 0.0));
        assert!(eval.grad[..enc_start].iter().any(|&g| g != 0.0));

        // And the value is the completed-data log joint, negated.
        let chol = params.model.prior_chol().unwrap();
        let x = [0.2, -0.4, 0.9];
        let expect = params.model.loglik_y(1, &x).unwrap()
            + crate::distributions::mvn_logpdf(&x, &params.model.mu, &chol).unwrap();
        assert!((eval.loss + expect).abs() < 1e-12);
    }

    #[test]
    fn batch_loss_is_the_mean_of_row_losses() {
        let d = 4;
        let params = demo_params(d, 8, true, 13);
        let rows = demo_rows(d);
        let row_refs: Vec<&PreparedRow> = rows.iter().collect();
        let k = 3;
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        let noise: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| {
                (0..k * r.n_missing())
                    .map(|_| rng.sample::<f64, _>(StandardNormal))
                    .collect()
            })
            .collect();

        let mut tape = Tape::new();
        let batch =
            objective_batch_with_noise(&mut tape, &params, &row_refs, k, &noise).unwrap();

        let mut acc = 0.0;
        for (i, row) in rows.iter().enumerate() {
            let single = objective_batch_with_noise(
                &mut tape,
                &params,
                &[row],
                k,
                std::slice::from_ref(&noise[i]),
            )
            .unwrap();
            acc += single.loss;
        }
        assert!((batch.loss - acc / rows.len() as f64).abs() < 1e-12);
    }

    #[test]
    fn objective_is_deterministic_given_the_seed() {
        let params = demo_params(3, 4, false, 3);
        let rows = demo_rows(3);
        let row_refs: Vec<&PreparedRow> = rows.iter().collect();
        let run = || {
            let mut tape = Tape::new();
            let mut rng = ChaCha12Rng::seed_from_u64(42);
            let eval = objective_batch(&mut tape, &params, &row_refs, 5, &mut rng).unwrap();
            (
                eval.loss.to_bits(),
                eval.grad.iter().map(|g| g.to_bits()).collect::<Vec<_>>(),
            )
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn flatten_unflatten_round_trip() {
        for mnar in [false, true] {
            let params = demo_params(5, 16, mnar, 77);
            let flat = params.flatten();
            assert_eq!(flat.len(), Params::flat_len(5, 16, mnar));
            let back = Params::unflatten(&flat, 5, 16, mnar).unwrap();
            assert_eq!(back.flatten(), flat);
            assert_eq!(back.model.beta, params.model.beta);
            assert_eq!(back.encoder.w_chol, params.encoder.w_chol);
            assert_eq!(back.miss.is_some(), mnar);
        }
    }

    #[test]
    fn overflowing_parameters_surface_as_numeric_errors() {
        let mut params = demo_params(2, 4, false, 1);
        // exp(800) overflows the prior factor diagonal.
        params.model.sigma_chol[0] = 800.0;
        let row = PreparedRow::new(&[0.0, 1.0], &[false, true], 1).unwrap();
        let mut tape = Tape::new();
        let res = objective_batch_with_noise(&mut tape, &params, &[&row], 2, &[vec![0.1, -0.3]]);
        assert!(matches!(res, Err(Error::Numeric(_))));
    }

    #[test]
    fn noise_length_mismatch_is_an_error() {
        let params = demo_params(2, 4, false, 2);
        let row = PreparedRow::new(&[0.0, 1.0], &[false, true], 0).unwrap();
        let mut tape = Tape::new();
        let res = objective_batch_with_noise(&mut tape, &params, &[&row], 2, &[vec![0.1]]);
        assert!(res.is_err());
    }
}
