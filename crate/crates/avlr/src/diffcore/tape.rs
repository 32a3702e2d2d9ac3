//! Reverse-mode automatic differentiation over dense `f64` arrays.
//!
//! The tape is a Wengert list stored in flat arenas: node values live in one
//! contiguous buffer, adjoints in a parallel buffer, and index payloads
//! (gather maps, concat parent lists) in a shared index arena. `reset` keeps
//! the allocations, so a training loop that builds one graph per minibatch
//! settles into zero steady-state allocation.
//!
//! Evaluation is eager: creating a node computes its value immediately.
//! `backward` walks the list in reverse once; fan-out accumulates adjoints
//! additively. All iteration orders are fixed, so results are deterministic
//! for fixed inputs.

use crate::error::{Error, Result};

/// Handle to a tape node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarId(usize);

/// Diagonal floor applied by `chol_from_vec` after exponentiation.
pub const CHOL_DIAG_FLOOR: f64 = 1e-6;

/// Probability clamp used by `bernoulli_logit`.
pub const PROB_CLAMP: f64 = 1e-6;

/// Span into the shared index arena.
#[derive(Debug, Clone, Copy)]
struct Span {
    off: usize,
    len: usize,
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Leaf,
    Constant,
    Add(VarId, VarId),
    Sub(VarId, VarId),
    Mul(VarId, VarId),
    Scale(VarId, f64),
    AddScalar(VarId),
    Sum(VarId),
    Dot(VarId, VarId),
    Affine { w: VarId, x: VarId, b: VarId, rows: usize, cols: usize },
    TanhAct(VarId),
    Softplus(VarId),
    Gather { src: VarId, idx: Span },
    ScatterInto { src: VarId, base: VarId, idx: Span },
    Concat { parts: Span },
    LogSumExp(VarId),
    CholFromVec { src: VarId, dim: usize },
    TriSolve { l: VarId, v: VarId, dim: usize },
    TriMatVec { l: VarId, e: VarId, dim: usize },
    SumLogDiag { l: VarId, dim: usize },
    BernoulliLogit { logits: VarId, r: VarId },
}

#[derive(Default)]
pub struct Tape {
    ops: Vec<Op>,
    bounds: Vec<(usize, usize)>,
    data: Vec<f64>,
    adj: Vec<f64>,
    idx_arena: Vec<usize>,
}

/// Row-major position of entry (i, j), i >= j, in a packed lower triangle.
#[inline]
pub fn tri_index(i: usize, j: usize) -> usize {
    debug_assert!(j <= i);
    i * (i + 1) / 2 + j
}

/// Number of packed entries of a d x d lower triangle.
#[inline]
pub fn tri_len(d: usize) -> usize {
    d * (d + 1) / 2
}

#[inline]
fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

#[inline]
fn softplus(u: f64) -> f64 {
    u.max(0.0) + (-u.abs()).exp().ln_1p()
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    /// Clears all nodes but keeps buffer capacity.
    pub fn reset(&mut self) {
        self.ops.clear();
        self.bounds.clear();
        self.data.clear();
        self.adj.clear();
        self.idx_arena.clear();
    }

    pub fn node_count(&self) -> usize {
        self.ops.len()
    }

    pub fn value(&self, id: VarId) -> &[f64] {
        let (off, len) = self.bounds[id.0];
        &self.data[off..off + len]
    }

    /// Adjoint of `id` after `backward`.
    pub fn grad(&self, id: VarId) -> &[f64] {
        let (off, len) = self.bounds[id.0];
        &self.adj[off..off + len]
    }

    fn len_of(&self, id: VarId) -> usize {
        self.bounds[id.0].1
    }

    fn push(&mut self, op: Op, len: usize) -> VarId {
        let off = self.data.len();
        self.data.resize(off + len, 0.0);
        self.bounds.push((off, len));
        self.ops.push(op);
        VarId(self.ops.len() - 1)
    }

    fn out_slice(&mut self, id: VarId) -> &mut [f64] {
        let (off, len) = self.bounds[id.0];
        &mut self.data[off..off + len]
    }

    fn push_span(&mut self, items: &[usize]) -> Span {
        let off = self.idx_arena.len();
        self.idx_arena.extend_from_slice(items);
        Span { off, len: items.len() }
    }

    fn require_same_len(&self, a: VarId, b: VarId, what: &str) -> Result<()> {
        if self.len_of(a) != self.len_of(b) {
            return Err(Error::Dim(format!(
                "{what}: operand lengths {} and {} differ",
                self.len_of(a),
                self.len_of(b)
            )));
        }
        Ok(())
    }

    // -- node constructors --------------------------------------------------

    pub fn leaf(&mut self, vals: &[f64]) -> VarId {
        let id = self.push(Op::Leaf, vals.len());
        self.out_slice(id).copy_from_slice(vals);
        id
    }

    pub fn constant(&mut self, vals: &[f64]) -> VarId {
        let id = self.push(Op::Constant, vals.len());
        self.out_slice(id).copy_from_slice(vals);
        id
    }

    pub fn scalar(&mut self, v: f64) -> VarId {
        self.constant(&[v])
    }

    pub fn add(&mut self, a: VarId, b: VarId) -> Result<VarId> {
        self.require_same_len(a, b, "add")?;
        let id = self.push(Op::Add(a, b), self.len_of(a));
        let (ao, n) = self.bounds[a.0];
        let bo = self.bounds[b.0].0;
        let oo = self.bounds[id.0].0;
        for i in 0..n {
            self.data[oo + i] = self.data[ao + i] + self.data[bo + i];
        }
        Ok(id)
    }

    pub fn sub(&mut self, a: VarId, b: VarId) -> Result<VarId> {
        self.require_same_len(a, b, "sub")?;
        let id = self.push(Op::Sub(a, b), self.len_of(a));
        let (ao, n) = self.bounds[a.0];
        let bo = self.bounds[b.0].0;
        let oo = self.bounds[id.0].0;
        for i in 0..n {
            self.data[oo + i] = self.data[ao + i] - self.data[bo + i];
        }
        Ok(id)
    }

    pub fn mul(&mut self, a: VarId, b: VarId) -> Result<VarId> {
        self.require_same_len(a, b, "mul")?;
        let id = self.push(Op::Mul(a, b), self.len_of(a));
        let (ao, n) = self.bounds[a.0];
        let bo = self.bounds[b.0].0;
        let oo = self.bounds[id.0].0;
        for i in 0..n {
            self.data[oo + i] = self.data[ao + i] * self.data[bo + i];
        }
        Ok(id)
    }

    pub fn scale(&mut self, a: VarId, c: f64) -> VarId {
        let id = self.push(Op::Scale(a, c), self.len_of(a));
        let (ao, n) = self.bounds[a.0];
        let oo = self.bounds[id.0].0;
        for i in 0..n {
            self.data[oo + i] = c * self.data[ao + i];
        }
        id
    }

    pub fn add_scalar(&mut self, a: VarId, c: f64) -> VarId {
        let id = self.push(Op::AddScalar(a), self.len_of(a));
        let (ao, n) = self.bounds[a.0];
        let oo = self.bounds[id.0].0;
        for i in 0..n {
            self.data[oo + i] = c + self.data[ao + i];
        }
        id
    }

    pub fn sum(&mut self, a: VarId) -> VarId {
        let id = self.push(Op::Sum(a), 1);
        let (ao, n) = self.bounds[a.0];
        let oo = self.bounds[id.0].0;
        self.data[oo] = self.data[ao..ao + n].iter().sum();
        id
    }

    pub fn dot(&mut self, a: VarId, b: VarId) -> Result<VarId> {
        self.require_same_len(a, b, "dot")?;
        let id = self.push(Op::Dot(a, b), 1);
        let (ao, n) = self.bounds[a.0];
        let bo = self.bounds[b.0].0;
        let oo = self.bounds[id.0].0;
        let mut acc = 0.0;
        for i in 0..n {
            acc += self.data[ao + i] * self.data[bo + i];
        }
        self.data[oo] = acc;
        Ok(id)
    }

    /// y = W x + b with W stored row-major `rows x cols`.
    pub fn affine(&mut self, w: VarId, x: VarId, b: VarId, rows: usize, cols: usize) -> Result<VarId> {
        if self.len_of(w) != rows * cols {
            return Err(Error::Dim(format!(
                "affine: weight length {} != {rows}x{cols}",
                self.len_of(w)
            )));
        }
        if self.len_of(x) != cols || self.len_of(b) != rows {
            return Err(Error::Dim(format!(
                "affine: x length {} (want {cols}), b length {} (want {rows})",
                self.len_of(x),
                self.len_of(b)
            )));
        }
        let id = self.push(Op::Affine { w, x, b, rows, cols }, rows);
        let wo = self.bounds[w.0].0;
        let xo = self.bounds[x.0].0;
        let bo = self.bounds[b.0].0;
        let oo = self.bounds[id.0].0;
        for i in 0..rows {
            let mut acc = self.data[bo + i];
            let row = wo + i * cols;
            for j in 0..cols {
                acc += self.data[row + j] * self.data[xo + j];
            }
            self.data[oo + i] = acc;
        }
        Ok(id)
    }

    pub fn tanh_act(&mut self, a: VarId) -> VarId {
        let id = self.push(Op::TanhAct(a), self.len_of(a));
        let (ao, n) = self.bounds[a.0];
        let oo = self.bounds[id.0].0;
        for i in 0..n {
            self.data[oo + i] = self.data[ao + i].tanh();
        }
        id
    }

    pub fn softplus(&mut self, a: VarId) -> VarId {
        let id = self.push(Op::Softplus(a), self.len_of(a));
        let (ao, n) = self.bounds[a.0];
        let oo = self.bounds[id.0].0;
        for i in 0..n {
            self.data[oo + i] = softplus(self.data[ao + i]);
        }
        id
    }

    pub fn gather(&mut self, src: VarId, idx: &[usize]) -> Result<VarId> {
        let n = self.len_of(src);
        if let Some(&bad) = idx.iter().find(|&&i| i >= n) {
            return Err(Error::Dim(format!("gather: index {bad} out of range {n}")));
        }
        let span = self.push_span(idx);
        let id = self.push(Op::Gather { src, idx: span }, idx.len());
        let so = self.bounds[src.0].0;
        let oo = self.bounds[id.0].0;
        for (k, &i) in idx.iter().enumerate() {
            self.data[oo + k] = self.data[so + i];
        }
        Ok(id)
    }

    /// Copy of `base` with `src[k]` written at position `idx[k]`.
    /// Indices must be strictly ascending.
    pub fn scatter_into(&mut self, src: VarId, base: VarId, idx: &[usize]) -> Result<VarId> {
        let n = self.len_of(base);
        if idx.len() != self.len_of(src) {
            return Err(Error::Dim("scatter_into: src length != index count".into()));
        }
        if idx.windows(2).any(|w| w[0] >= w[1]) || idx.last().is_some_and(|&l| l >= n) {
            return Err(Error::Dim("scatter_into: indices must be strictly ascending and in range".into()));
        }
        let span = self.push_span(idx);
        let id = self.push(Op::ScatterInto { src, base, idx: span }, n);
        let so = self.bounds[src.0].0;
        let bo = self.bounds[base.0].0;
        let oo = self.bounds[id.0].0;
        for i in 0..n {
            self.data[oo + i] = self.data[bo + i];
        }
        for (k, &i) in idx.iter().enumerate() {
            self.data[oo + i] = self.data[so + k];
        }
        Ok(id)
    }

    pub fn concat(&mut self, parts: &[VarId]) -> Result<VarId> {
        if parts.is_empty() {
            return Err(Error::Dim("concat of zero parts".into()));
        }
        let total: usize = parts.iter().map(|&p| self.len_of(p)).sum();
        let raw: Vec<usize> = parts.iter().map(|p| p.0).collect();
        let span = self.push_span(&raw);
        let id = self.push(Op::Concat { parts: span }, total);
        let mut oo = self.bounds[id.0].0;
        for &p in parts {
            let (po, pl) = self.bounds[p.0];
            for i in 0..pl {
                self.data[oo + i] = self.data[po + i];
            }
            oo += pl;
        }
        Ok(id)
    }

    /// log(sum_i exp(v_i)), max-shifted so large magnitudes cannot overflow.
    pub fn logsumexp(&mut self, v: VarId) -> Result<VarId> {
        let n = self.len_of(v);
        if n == 0 {
            return Err(Error::Dim("logsumexp of an empty vector".into()));
        }
        let id = self.push(Op::LogSumExp(v), 1);
        let vo = self.bounds[v.0].0;
        let oo = self.bounds[id.0].0;
        let m = self.data[vo..vo + n].iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let s: f64 = self.data[vo..vo + n].iter().map(|&x| (x - m).exp()).sum();
        self.data[oo] = m + s.ln();
        Ok(id)
    }

    /// Maps a packed unconstrained lower-triangle vector to a valid Cholesky
    /// factor: diagonal entries pass through exp then a floor at
    /// `CHOL_DIAG_FLOOR`; off-diagonal entries are unchanged.
    pub fn chol_from_vec(&mut self, src: VarId, dim: usize) -> Result<VarId> {
        if self.len_of(src) != tri_len(dim) {
            return Err(Error::Dim(format!(
                "chol_from_vec: length {} != packed size {}",
                self.len_of(src),
                tri_len(dim)
            )));
        }
        let id = self.push(Op::CholFromVec { src, dim }, tri_len(dim));
        let so = self.bounds[src.0].0;
        let oo = self.bounds[id.0].0;
        for i in 0..dim {
            for j in 0..=i {
                let k = tri_index(i, j);
                let u = self.data[so + k];
                self.data[oo + k] = if i == j { u.exp().max(CHOL_DIAG_FLOOR) } else { u };
            }
        }
        Ok(id)
    }

    /// z solving L z = v by forward substitution; `l` is packed lower.
    pub fn tri_solve(&mut self, l: VarId, v: VarId, dim: usize) -> Result<VarId> {
        if self.len_of(l) != tri_len(dim) || self.len_of(v) != dim {
            return Err(Error::Dim("tri_solve: operand sizes do not match dim".into()));
        }
        let id = self.push(Op::TriSolve { l, v, dim }, dim);
        let lo = self.bounds[l.0].0;
        let vo = self.bounds[v.0].0;
        let oo = self.bounds[id.0].0;
        for i in 0..dim {
            let mut s = self.data[vo + i];
            for j in 0..i {
                s -= self.data[lo + tri_index(i, j)] * self.data[oo + j];
            }
            self.data[oo + i] = s / self.data[lo + tri_index(i, i)];
        }
        Ok(id)
    }

    /// y = L e with packed lower `l`.
    pub fn tri_matvec(&mut self, l: VarId, e: VarId, dim: usize) -> Result<VarId> {
        if self.len_of(l) != tri_len(dim) || self.len_of(e) != dim {
            return Err(Error::Dim("tri_matvec: operand sizes do not match dim".into()));
        }
        let id = self.push(Op::TriMatVec { l, e, dim }, dim);
        let lo = self.bounds[l.0].0;
        let eo = self.bounds[e.0].0;
        let oo = self.bounds[id.0].0;
        for i in 0..dim {
            let mut s = 0.0;
            for j in 0..=i {
                s += self.data[lo + tri_index(i, j)] * self.data[eo + j];
            }
            self.data[oo + i] = s;
        }
        Ok(id)
    }

    /// sum_i ln L_ii of a packed lower factor.
    pub fn sum_log_diag(&mut self, l: VarId, dim: usize) -> Result<VarId> {
        if self.len_of(l) != tri_len(dim) {
            return Err(Error::Dim("sum_log_diag: operand size does not match dim".into()));
        }
        let id = self.push(Op::SumLogDiag { l, dim }, 1);
        let lo = self.bounds[l.0].0;
        let oo = self.bounds[id.0].0;
        let mut s = 0.0;
        for i in 0..dim {
            s += self.data[lo + tri_index(i, i)].ln();
        }
        self.data[oo] = s;
        Ok(id)
    }

    /// Per-element Bernoulli log-pmf of indicators `r` with success
    /// probability sigmoid(logit), clamped into
    /// [PROB_CLAMP, 1 - PROB_CLAMP] before the logarithm.
    pub fn bernoulli_logit(&mut self, logits: VarId, r: VarId) -> Result<VarId> {
        self.require_same_len(logits, r, "bernoulli_logit")?;
        let id = self.push(Op::BernoulliLogit { logits, r }, self.len_of(logits));
        let (ao, n) = self.bounds[logits.0];
        let ro = self.bounds[r.0].0;
        let oo = self.bounds[id.0].0;
        for i in 0..n {
            let pi = sigmoid(self.data[ao + i]).clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
            let r_i = self.data[ro + i];
            self.data[oo + i] = r_i * pi.ln() + (1.0 - r_i) * (1.0 - pi).ln();
        }
        Ok(id)
    }

    // -- reverse pass --------------------------------------------------------

    /// Propagates an adjoint of 1 from the scalar node `out` back to every
    /// node. After this call `grad` returns accumulated adjoints.
    pub fn backward(&mut self, out: VarId) -> Result<()> {
        if self.len_of(out) != 1 {
            return Err(Error::Dim("backward requires a scalar output node".into()));
        }
        self.adj.clear();
        self.adj.resize(self.data.len(), 0.0);
        self.adj[self.bounds[out.0].0] = 1.0;

        for id in (0..=out.0).rev() {
            let (oo, olen) = self.bounds[id];
            match self.ops[id] {
                Op::Leaf | Op::Constant => {}
                Op::Add(a, b) => {
                    let ao = self.bounds[a.0].0;
                    let bo = self.bounds[b.0].0;
                    for i in 0..olen {
                        let g = self.adj[oo + i];
                        self.adj[ao + i] += g;
                        self.adj[bo + i] += g;
                    }
                }
                Op::Sub(a, b) => {
                    let ao = self.bounds[a.0].0;
                    let bo = self.bounds[b.0].0;
                    for i in 0..olen {
                        let g = self.adj[oo + i];
                        self.adj[ao + i] += g;
                        self.adj[bo + i] -= g;
                    }
                }
                Op::Mul(a, b) => {
                    let ao = self.bounds[a.0].0;
                    let bo = self.bounds[b.0].0;
                    for i in 0..olen {
                        let g = self.adj[oo + i];
                        self.adj[ao + i] += g * self.data[bo + i];
                        self.adj[bo + i] += g * self.data[ao + i];
                    }
                }
                Op::Scale(a, c) => {
                    let ao = self.bounds[a.0].0;
                    for i in 0..olen {
                        self.adj[ao + i] += c * self.adj[oo + i];
                    }
                }
                Op::AddScalar(a) => {
                    let ao = self.bounds[a.0].0;
                    for i in 0..olen {
                        self.adj[ao + i] += self.adj[oo + i];
                    }
                }
                Op::Sum(a) => {
                    let (ao, alen) = self.bounds[a.0];
                    let g = self.adj[oo];
                    for i in 0..alen {
                        self.adj[ao + i] += g;
                    }
                }
                Op::Dot(a, b) => {
                    let (ao, alen) = self.bounds[a.0];
                    let bo = self.bounds[b.0].0;
                    let g = self.adj[oo];
                    for i in 0..alen {
                        self.adj[ao + i] += g * self.data[bo + i];
                        self.adj[bo + i] += g * self.data[ao + i];
                    }
                }
                Op::Affine { w, x, b, rows, cols } => {
                    let wo = self.bounds[w.0].0;
                    let xo = self.bounds[x.0].0;
                    let bo = self.bounds[b.0].0;
                    for i in 0..rows {
                        let g = self.adj[oo + i];
                        if g == 0.0 {
                            continue;
                        }
                        self.adj[bo + i] += g;
                        let row = i * cols;
                        for j in 0..cols {
                            self.adj[wo + row + j] += g * self.data[xo + j];
                            self.adj[xo + j] += g * self.data[wo + row + j];
                        }
                    }
                }
                Op::TanhAct(a) => {
                    let ao = self.bounds[a.0].0;
                    for i in 0..olen {
                        let t = self.data[oo + i];
                        self.adj[ao + i] += self.adj[oo + i] * (1.0 - t * t);
                    }
                }
                Op::Softplus(a) => {
                    let ao = self.bounds[a.0].0;
                    for i in 0..olen {
                        self.adj[ao + i] += self.adj[oo + i] * sigmoid(self.data[ao + i]);
                    }
                }
                Op::Gather { src, idx } => {
                    let so = self.bounds[src.0].0;
                    for k in 0..idx.len {
                        let i = self.idx_arena[idx.off + k];
                        self.adj[so + i] += self.adj[oo + k];
                    }
                }
                Op::ScatterInto { src, base, idx } => {
                    let so = self.bounds[src.0].0;
                    let bo = self.bounds[base.0].0;
                    let mut k = 0;
                    for i in 0..olen {
                        if k < idx.len && self.idx_arena[idx.off + k] == i {
                            self.adj[so + k] += self.adj[oo + i];
                            k += 1;
                        } else {
                            self.adj[bo + i] += self.adj[oo + i];
                        }
                    }
                }
                Op::Concat { parts } => {
                    let mut pos = oo;
                    for k in 0..parts.len {
                        let p = self.idx_arena[parts.off + k];
                        let (po, pl) = self.bounds[p];
                        for i in 0..pl {
                            self.adj[po + i] += self.adj[pos + i];
                        }
                        pos += pl;
                    }
                }
                Op::LogSumExp(v) => {
                    let (vo, vlen) = self.bounds[v.0];
                    let g = self.adj[oo];
                    let lse = self.data[oo];
                    for i in 0..vlen {
                        self.adj[vo + i] += g * (self.data[vo + i] - lse).exp();
                    }
                }
                Op::CholFromVec { src, dim } => {
                    let so = self.bounds[src.0].0;
                    for i in 0..dim {
                        for j in 0..=i {
                            let k = tri_index(i, j);
                            if i == j {
                                let e = self.data[so + k].exp();
                                if e >= CHOL_DIAG_FLOOR {
                                    self.adj[so + k] += self.adj[oo + k] * e;
                                }
                            } else {
                                self.adj[so + k] += self.adj[oo + k];
                            }
                        }
                    }
                }
                Op::TriSolve { l, v, dim } => {
                    // z = L^{-1} v. With w = L^{-T} g_z:
                    // dL = -w z', dv = w (lower-triangle restriction on dL).
                    let lo = self.bounds[l.0].0;
                    let vo = self.bounds[v.0].0;
                    let mut w = vec![0.0; dim];
                    for i in 0..dim {
                        w[i] = self.adj[oo + i];
                    }
                    for i in (0..dim).rev() {
                        let mut s = w[i];
                        for j in i + 1..dim {
                            s -= self.data[lo + tri_index(j, i)] * w[j];
                        }
                        w[i] = s / self.data[lo + tri_index(i, i)];
                    }
                    for i in 0..dim {
                        self.adj[vo + i] += w[i];
                        for j in 0..=i {
                            self.adj[lo + tri_index(i, j)] -= w[i] * self.data[oo + j];
                        }
                    }
                }
                Op::TriMatVec { l, e, dim } => {
                    let lo = self.bounds[l.0].0;
                    let eo = self.bounds[e.0].0;
                    for i in 0..dim {
                        let g = self.adj[oo + i];
                        if g == 0.0 {
                            continue;
                        }
                        for j in 0..=i {
                            self.adj[lo + tri_index(i, j)] += g * self.data[eo + j];
                            self.adj[eo + j] += g * self.data[lo + tri_index(i, j)];
                        }
                    }
                }
                Op::SumLogDiag { l, dim } => {
                    let lo = self.bounds[l.0].0;
                    let g = self.adj[oo];
                    for i in 0..dim {
                        let k = tri_index(i, i);
                        self.adj[lo + k] += g / self.data[lo + k];
                    }
                }
                Op::BernoulliLogit { logits, r } => {
                    let ao = self.bounds[logits.0].0;
                    let ro = self.bounds[r.0].0;
                    for i in 0..olen {
                        let g = self.adj[oo + i];
                        let pi_raw = sigmoid(self.data[ao + i]);
                        let clamped = pi_raw < PROB_CLAMP || pi_raw > 1.0 - PROB_CLAMP;
                        if !clamped {
                            let r_i = self.data[ro + i];
                            self.adj[ao + i] += g * (r_i - pi_raw);
                        }
                        let pi = pi_raw.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
                        self.adj[ro + i] += g * (pi.ln() - (1.0 - pi).ln());
                    }
                }
            }
        }
        Ok(())
    }
}
