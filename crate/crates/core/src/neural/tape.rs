//! A reverse-mode automatic differentiation tape.
//!
//! Nodes hold dense `f64` vectors. Parameters are read from a borrowed
//! [`ParamStore`] without copying (matrices are only touched through
//! [`Tape::linear`] and the fused GRU cell). [`Tape::backward`] returns the
//! gradients of a scalar node with respect to every parameter and node.

use super::tensor::{ParamId, ParamStore};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeId(pub usize);

/// Parameter ids of one GRU: input weights `w_*` (hidden × input), recurrent
/// weights `u_*` (hidden × hidden) and biases `b_*` for the update gate `z`,
/// reset gate `r` and candidate `h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GruIds {
    pub w_z: ParamId,
    pub u_z: ParamId,
    pub b_z: ParamId,
    pub w_r: ParamId,
    pub u_r: ParamId,
    pub b_r: ParamId,
    pub w_h: ParamId,
    pub u_h: ParamId,
    pub b_h: ParamId,
}

#[derive(Debug, Clone)]
enum Op {
    Input,
    Param(ParamId),
    Row(ParamId, usize),
    Linear {
        w: ParamId,
        b: Option<ParamId>,
        x: NodeId,
    },
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Mul(NodeId, NodeId),
    Abs(NodeId),
    Sigmoid(NodeId),
    Tanh(NodeId),
    LeakyRelu(NodeId, f64),
    Scale(NodeId, f64),
    Concat(Vec<NodeId>),
    Mean(Vec<NodeId>),
    Sum(Vec<NodeId>),
    Dot(NodeId, NodeId),
    Attend {
        query: NodeId,
        keys: Vec<NodeId>,
        weights: Vec<f64>,
    },
    Gru {
        x: NodeId,
        h: NodeId,
        ids: GruIds,
        z: Vec<f64>,
        r: Vec<f64>,
        cand: Vec<f64>,
    },
    SoftmaxXent {
        logits: NodeId,
        target: usize,
        probs: Vec<f64>,
    },
    SqErr {
        x: NodeId,
        target: f64,
    },
}

#[derive(Debug, Clone)]
struct Node {
    value: Vec<f64>,
    op: Op,
}

pub struct Tape<'p> {
    params: &'p ParamStore,
    nodes: Vec<Node>,
}

/// Gradients from one backward pass.
#[derive(Debug, Clone)]
pub struct Gradients {
    params: Vec<Vec<f64>>,
    nodes: Vec<Vec<f64>>,
}

impl Gradients {
    /// Gradient w.r.t. a parameter; empty if the parameter was not used.
    pub fn param(&self, id: ParamId) -> &[f64] {
        &self.params[id.0]
    }

    /// Gradient w.r.t. a node; empty if the node does not reach the loss.
    pub fn node(&self, id: NodeId) -> &[f64] {
        &self.nodes[id.0]
    }

    /// Adds the parameter gradients into the store's gradient slots.
    pub fn accumulate_into(&self, store: &mut ParamStore) {
        for (t, g) in store.tensors_mut().iter_mut().zip(&self.params) {
            if !g.is_empty() {
                t.grad.iter_mut().zip(g).for_each(|(a, b)| *a += b);
            }
        }
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Numerically stable softmax.
pub fn softmax(xs: &[f64]) -> Vec<f64> {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = xs.iter().map(|x| (x - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let tail: f64 = ca
        .remainder()
        .iter()
        .zip(cb.remainder())
        .map(|(x, y)| x * y)
        .sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `y = W x` for row-major `W` with `x.len()` columns, accumulated into `y`.
fn matvec_acc(w: &[f64], x: &[f64], y: &mut [f64]) {
    let cols = x.len();
    for (yi, row) in y.iter_mut().zip(w.chunks_exact(cols)) {
        *yi += dot(row, x);
    }
}

/// `gx += Wᵀ g` and `gw += g xᵀ`.
fn matvec_back(w: &[f64], x: &[f64], g: &[f64], gx: Option<&mut [f64]>, gw: &mut [f64]) {
    let cols = x.len();
    for (gi, grow) in g.iter().zip(gw.chunks_exact_mut(cols)) {
        if *gi != 0.0 {
            grow.iter_mut().zip(x).for_each(|(a, xv)| *a += gi * xv);
        }
    }
    if let Some(gx) = gx {
        for (gi, row) in g.iter().zip(w.chunks_exact(cols)) {
            if *gi != 0.0 {
                gx.iter_mut().zip(row).for_each(|(a, wv)| *a += gi * wv);
            }
        }
    }
}

/// Dot-product attention of one query over `keys`: returns the softmax
/// weights and the weighted sum of keys.
pub fn attend(query: &[f64], keys: &[&[f64]]) -> (Vec<f64>, Vec<f64>) {
    let scores: Vec<f64> = keys.iter().map(|k| dot(query, k)).collect();
    let weights = softmax(&scores);
    let mut summary = vec![0.0; query.len()];
    for (w, k) in weights.iter().zip(keys) {
        summary
            .iter_mut()
            .zip(k.iter())
            .for_each(|(s, kv)| *s += w * kv);
    }
    (weights, summary)
}

impl<'p> Tape<'p> {
    pub fn new(params: &'p ParamStore) -> Self {
        Self {
            params,
            nodes: Vec::with_capacity(256),
        }
    }

    pub fn params(&self) -> &'p ParamStore {
        self.params
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, id: NodeId) -> &[f64] {
        &self.nodes[id.0].value
    }

    pub fn scalar(&self, id: NodeId) -> f64 {
        debug_assert_eq!(self.nodes[id.0].value.len(), 1);
        self.nodes[id.0].value[0]
    }

    /// Attention weights stored by an [`Tape::attend`] node.
    pub fn attention_weights(&self, id: NodeId) -> Option<&[f64]> {
        match &self.nodes[id.0].op {
            Op::Attend { weights, .. } => Some(weights),
            _ => None,
        }
    }

    fn push(&mut self, value: Vec<f64>, op: Op) -> NodeId {
        self.nodes.push(Node { value, op });
        NodeId(self.nodes.len() - 1)
    }

    fn val(&self, id: NodeId) -> &[f64] {
        &self.nodes[id.0].value
    }

    pub fn input(&mut self, value: Vec<f64>) -> NodeId {
        self.push(value, Op::Input)
    }

    pub fn zeros(&mut self, n: usize) -> NodeId {
        self.input(vec![0.0; n])
    }

    /// A whole parameter tensor as a flat vector.
    pub fn param(&mut self, id: ParamId) -> NodeId {
        let v = self.params.get(id).values.clone();
        self.push(v, Op::Param(id))
    }

    /// One row of a parameter matrix (embedding lookup).
    pub fn row(&mut self, id: ParamId, r: usize) -> NodeId {
        let v = self.params.get(id).row(r).to_vec();
        self.push(v, Op::Row(id, r))
    }

    /// `W x + b`.
    pub fn linear(&mut self, w: ParamId, b: Option<ParamId>, x: NodeId) -> NodeId {
        let wt = self.params.get(w);
        let xv = self.val(x);
        assert_eq!(wt.cols, xv.len(), "linear {}: input size", wt.name);
        let mut y = match b {
            Some(b) => self.params.get(b).values.clone(),
            None => vec![0.0; wt.rows],
        };
        matvec_acc(&wt.values, xv, &mut y);
        self.push(y, Op::Linear { w, b, x })
    }

    fn zip_with(&mut self, a: NodeId, b: NodeId, f: impl Fn(f64, f64) -> f64, op: Op) -> NodeId {
        let (av, bv) = (self.val(a), self.val(b));
        assert_eq!(av.len(), bv.len(), "elementwise size mismatch");
        let v = av.iter().zip(bv).map(|(x, y)| f(*x, *y)).collect();
        self.push(v, op)
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.zip_with(a, b, |x, y| x + y, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.zip_with(a, b, |x, y| x - y, Op::Sub(a, b))
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.zip_with(a, b, |x, y| x * y, Op::Mul(a, b))
    }

    fn map(&mut self, a: NodeId, f: impl Fn(f64) -> f64, op: Op) -> NodeId {
        let v = self.val(a).iter().map(|x| f(*x)).collect();
        self.push(v, op)
    }

    pub fn abs(&mut self, a: NodeId) -> NodeId {
        self.map(a, f64::abs, Op::Abs(a))
    }

    pub fn sigmoid(&mut self, a: NodeId) -> NodeId {
        self.map(a, sigmoid, Op::Sigmoid(a))
    }

    pub fn tanh(&mut self, a: NodeId) -> NodeId {
        self.map(a, f64::tanh, Op::Tanh(a))
    }

    pub fn leaky_relu(&mut self, a: NodeId, slope: f64) -> NodeId {
        self.map(
            a,
            |x| if x > 0.0 { x } else { slope * x },
            Op::LeakyRelu(a, slope),
        )
    }

    pub fn scale(&mut self, a: NodeId, s: f64) -> NodeId {
        self.map(a, |x| s * x, Op::Scale(a, s))
    }

    pub fn concat(&mut self, parts: &[NodeId]) -> NodeId {
        let mut v = Vec::with_capacity(parts.iter().map(|p| self.val(*p).len()).sum());
        for p in parts {
            v.extend_from_slice(self.val(*p));
        }
        self.push(v, Op::Concat(parts.to_vec()))
    }

    /// Elementwise mean of equally sized vectors.
    pub fn mean(&mut self, parts: &[NodeId]) -> NodeId {
        assert!(!parts.is_empty(), "mean of nothing");
        let n = self.val(parts[0]).len();
        let mut v = vec![0.0; n];
        for p in parts {
            let pv = self.val(*p);
            assert_eq!(pv.len(), n, "mean size mismatch");
            v.iter_mut().zip(pv).for_each(|(a, b)| *a += b);
        }
        let k = parts.len() as f64;
        v.iter_mut().for_each(|a| *a /= k);
        self.push(v, Op::Mean(parts.to_vec()))
    }

    /// Sum of scalars.
    pub fn sum(&mut self, parts: &[NodeId]) -> NodeId {
        let s = parts.iter().map(|p| self.scalar(*p)).sum();
        self.push(vec![s], Op::Sum(parts.to_vec()))
    }

    pub fn dot(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let s = dot(self.val(a), self.val(b));
        self.push(vec![s], Op::Dot(a, b))
    }

    /// `Σ_j softmax_j(q·k_j) k_j`.
    pub fn attend(&mut self, query: NodeId, keys: &[NodeId]) -> NodeId {
        assert!(!keys.is_empty(), "attention over no keys");
        let kv: Vec<&[f64]> = keys.iter().map(|k| self.val(*k)).collect();
        let (weights, summary) = attend(self.val(query), &kv);
        self.push(
            summary,
            Op::Attend {
                query,
                keys: keys.to_vec(),
                weights,
            },
        )
    }

    /// One GRU step: `h' = (1 - z) ⊙ h + z ⊙ ĥ` with
    /// `z = σ(W_z x + U_z h + b_z)`, `r = σ(W_r x + U_r h + b_r)`,
    /// `ĥ = tanh(W_h x + U_h (r ⊙ h) + b_h)`.
    pub fn gru_cell(&mut self, ids: GruIds, x: NodeId, h: NodeId) -> NodeId {
        let p = self.params;
        let (xv, hv) = (self.val(x), self.val(h));
        let n = hv.len();
        let gate = |w: ParamId, u: ParamId, b: ParamId, hin: &[f64]| {
            let mut pre = p.get(b).values.clone();
            matvec_acc(&p.get(w).values, xv, &mut pre);
            matvec_acc(&p.get(u).values, hin, &mut pre);
            pre
        };
        let z: Vec<f64> = gate(ids.w_z, ids.u_z, ids.b_z, hv)
            .into_iter()
            .map(sigmoid)
            .collect();
        let r: Vec<f64> = gate(ids.w_r, ids.u_r, ids.b_r, hv)
            .into_iter()
            .map(sigmoid)
            .collect();
        let rh: Vec<f64> = r.iter().zip(hv).map(|(a, b)| a * b).collect();
        let cand: Vec<f64> = gate(ids.w_h, ids.u_h, ids.b_h, &rh)
            .into_iter()
            .map(f64::tanh)
            .collect();
        let out: Vec<f64> = (0..n)
            .map(|k| (1.0 - z[k]) * hv[k] + z[k] * cand[k])
            .collect();
        self.push(
            out,
            Op::Gru {
                x,
                h,
                ids,
                z,
                r,
                cand,
            },
        )
    }

    /// Cross-entropy of `softmax(logits)` against `target`.
    pub fn softmax_xent(&mut self, logits: NodeId, target: usize) -> NodeId {
        let probs = softmax(self.val(logits));
        assert!(target < probs.len(), "target out of range");
        let loss = -probs[target].max(f64::MIN_POSITIVE).ln();
        self.push(
            vec![loss],
            Op::SoftmaxXent {
                logits,
                target,
                probs,
            },
        )
    }

    /// `(x - target)²` for a scalar `x`.
    pub fn sq_err(&mut self, x: NodeId, target: f64) -> NodeId {
        let d = self.scalar(x) - target;
        self.push(vec![d * d], Op::SqErr { x, target })
    }

    /// Reverse pass from a scalar node.
    pub fn backward(&self, loss: NodeId) -> Gradients {
        assert_eq!(
            self.nodes[loss.0].value.len(),
            1,
            "backward from a non-scalar"
        );
        let mut g: Vec<Vec<f64>> = vec![Vec::new(); self.nodes.len()];
        let mut pg: Vec<Vec<f64>> = vec![Vec::new(); self.params.len()];
        g[loss.0] = vec![1.0];

        fn slot<'a>(g: &'a mut [Vec<f64>], id: usize, n: usize) -> &'a mut Vec<f64> {
            if g[id].is_empty() {
                g[id] = vec![0.0; n];
            }
            &mut g[id]
        }
        fn pslot<'a>(pg: &'a mut [Vec<f64>], params: &ParamStore, id: ParamId) -> &'a mut Vec<f64> {
            if pg[id.0].is_empty() {
                pg[id.0] = vec![0.0; params.get(id).len()];
            }
            &mut pg[id.0]
        }
        let params = self.params;

        for i in (0..=loss.0).rev() {
            if g[i].is_empty() {
                continue;
            }
            let gi = std::mem::take(&mut g[i]);
            let node = &self.nodes[i];
            match &node.op {
                Op::Input => {}
                Op::Param(id) => {
                    let dst = pslot(&mut pg, params, *id);
                    dst.iter_mut().zip(&gi).for_each(|(a, b)| *a += b);
                }
                Op::Row(id, r) => {
                    let cols = self.params.get(*id).cols;
                    let dst = pslot(&mut pg, params, *id);
                    dst[r * cols..(r + 1) * cols]
                        .iter_mut()
                        .zip(&gi)
                        .for_each(|(a, b)| *a += b);
                }
                Op::Linear { w, b, x } => {
                    let wt = self.params.get(*w);
                    let xv = &self.nodes[x.0].value;
                    let gw = pslot(&mut pg, params, *w);
                    let gx = slot(&mut g, x.0, xv.len());
                    matvec_back(&wt.values, xv, &gi, Some(gx), gw);
                    if let Some(b) = b {
                        let gb = pslot(&mut pg, params, *b);
                        gb.iter_mut().zip(&gi).for_each(|(a, v)| *a += v);
                    }
                }
                Op::Add(a, b) => {
                    for id in [a, b] {
                        let s = slot(&mut g, id.0, gi.len());
                        s.iter_mut().zip(&gi).for_each(|(x, y)| *x += y);
                    }
                }
                Op::Sub(a, b) => {
                    let s = slot(&mut g, a.0, gi.len());
                    s.iter_mut().zip(&gi).for_each(|(x, y)| *x += y);
                    let s = slot(&mut g, b.0, gi.len());
                    s.iter_mut().zip(&gi).for_each(|(x, y)| *x -= y);
                }
                Op::Mul(a, b) => {
                    let (av, bv) = (&self.nodes[a.0].value, &self.nodes[b.0].value);
                    let s = slot(&mut g, a.0, gi.len());
                    for k in 0..gi.len() {
                        s[k] += gi[k] * bv[k];
                    }
                    let s = slot(&mut g, b.0, gi.len());
                    for k in 0..gi.len() {
                        s[k] += gi[k] * av[k];
                    }
                }
                Op::Abs(a) => {
                    let av = &self.nodes[a.0].value;
                    let s = slot(&mut g, a.0, gi.len());
                    for k in 0..gi.len() {
                        let sign = if av[k] > 0.0 {
                            1.0
                        } else if av[k] < 0.0 {
                            -1.0
                        } else {
                            0.0
                        };
                        s[k] += gi[k] * sign;
                    }
                }
                Op::Sigmoid(a) => {
                    let y = &node.value;
                    let s = slot(&mut g, a.0, gi.len());
                    for k in 0..gi.len() {
                        s[k] += gi[k] * y[k] * (1.0 - y[k]);
                    }
                }
                Op::Tanh(a) => {
                    let y = &node.value;
                    let s = slot(&mut g, a.0, gi.len());
                    for k in 0..gi.len() {
                        s[k] += gi[k] * (1.0 - y[k] * y[k]);
                    }
                }
                Op::LeakyRelu(a, slope) => {
                    let av = &self.nodes[a.0].value;
                    let s = slot(&mut g, a.0, gi.len());
                    for k in 0..gi.len() {
                        s[k] += gi[k] * if av[k] > 0.0 { 1.0 } else { *slope };
                    }
                }
                Op::Scale(a, c) => {
                    let s = slot(&mut g, a.0, gi.len());
                    s.iter_mut().zip(&gi).for_each(|(x, y)| *x += c * y);
                }
                Op::Concat(parts) => {
                    let mut off = 0;
                    for p in parts {
                        let n = self.nodes[p.0].value.len();
                        let s = slot(&mut g, p.0, n);
                        s.iter_mut()
                            .zip(&gi[off..off + n])
                            .for_each(|(x, y)| *x += y);
                        off += n;
                    }
                }
                Op::Mean(parts) => {
                    let k = 1.0 / parts.len() as f64;
                    for p in parts {
                        let s = slot(&mut g, p.0, gi.len());
                        s.iter_mut().zip(&gi).for_each(|(x, y)| *x += k * y);
                    }
                }
                Op::Sum(parts) => {
                    for p in parts {
                        slot(&mut g, p.0, 1)[0] += gi[0];
                    }
                }
                Op::Dot(a, b) => {
                    let (av, bv) = (&self.nodes[a.0].value, &self.nodes[b.0].value);
                    let s = slot(&mut g, a.0, av.len());
                    s.iter_mut().zip(bv).for_each(|(x, y)| *x += gi[0] * y);
                    let s = slot(&mut g, b.0, bv.len());
                    s.iter_mut().zip(av).for_each(|(x, y)| *x += gi[0] * y);
                }
                Op::Attend {
                    query,
                    keys,
                    weights,
                } => {
                    // c = Σ α_j k_j, α = softmax(s), s_j = q·k_j
                    let qv = &self.nodes[query.0].value;
                    let gk: Vec<f64> = keys
                        .iter()
                        .map(|k| dot(&gi, &self.nodes[k.0].value))
                        .collect();
                    let mean_gk: f64 = weights.iter().zip(&gk).map(|(a, b)| a * b).sum();
                    let ds: Vec<f64> = weights
                        .iter()
                        .zip(&gk)
                        .map(|(a, b)| a * (b - mean_gk))
                        .collect();
                    let n = qv.len();
                    {
                        let sq = slot(&mut g, query.0, n);
                        for (j, k) in keys.iter().enumerate() {
                            let kv = &self.nodes[k.0].value;
                            sq.iter_mut().zip(kv).for_each(|(x, y)| *x += ds[j] * y);
                        }
                    }
                    for (j, k) in keys.iter().enumerate() {
                        let sk = slot(&mut g, k.0, n);
                        for m in 0..n {
                            sk[m] += weights[j] * gi[m] + ds[j] * qv[m];
                        }
                    }
                }
                Op::Gru {
                    x,
                    h,
                    ids,
                    z,
                    r,
                    cand,
                } => {
                    let xv = &self.nodes[x.0].value;
                    let hv = &self.nodes[h.0].value;
                    let n = hv.len();
                    let p = self.params;
                    let rh: Vec<f64> = r.iter().zip(hv).map(|(a, b)| a * b).collect();
                    let mut gx = vec![0.0; xv.len()];
                    let mut gh: Vec<f64> = (0..n).map(|k| gi[k] * (1.0 - z[k])).collect();

                    // candidate
                    let d_cand: Vec<f64> = (0..n)
                        .map(|k| gi[k] * z[k] * (1.0 - cand[k] * cand[k]))
                        .collect();
                    let mut d_rh = vec![0.0; n];
                    matvec_back(
                        &p.get(ids.w_h).values,
                        xv,
                        &d_cand,
                        Some(&mut gx),
                        pslot(&mut pg, params, ids.w_h),
                    );
                    matvec_back(
                        &p.get(ids.u_h).values,
                        &rh,
                        &d_cand,
                        Some(&mut d_rh),
                        pslot(&mut pg, params, ids.u_h),
                    );
                    pslot(&mut pg, params, ids.b_h)
                        .iter_mut()
                        .zip(&d_cand)
                        .for_each(|(a, b)| *a += b);
                    for k in 0..n {
                        gh[k] += d_rh[k] * r[k];
                    }

                    // update gate
                    let d_z: Vec<f64> = (0..n)
                        .map(|k| gi[k] * (cand[k] - hv[k]) * z[k] * (1.0 - z[k]))
                        .collect();
                    matvec_back(
                        &p.get(ids.w_z).values,
                        xv,
                        &d_z,
                        Some(&mut gx),
                        pslot(&mut pg, params, ids.w_z),
                    );
                    matvec_back(
                        &p.get(ids.u_z).values,
                        hv,
                        &d_z,
                        Some(&mut gh),
                        pslot(&mut pg, params, ids.u_z),
                    );
                    pslot(&mut pg, params, ids.b_z)
                        .iter_mut()
                        .zip(&d_z)
                        .for_each(|(a, b)| *a += b);

                    // reset gate
                    let d_r: Vec<f64> = (0..n)
                        .map(|k| d_rh[k] * hv[k] * r[k] * (1.0 - r[k]))
                        .collect();
                    matvec_back(
                        &p.get(ids.w_r).values,
                        xv,
                        &d_r,
                        Some(&mut gx),
                        pslot(&mut pg, params, ids.w_r),
                    );
                    matvec_back(
                        &p.get(ids.u_r).values,
                        hv,
                        &d_r,
                        Some(&mut gh),
                        pslot(&mut pg, params, ids.u_r),
                    );
                    pslot(&mut pg, params, ids.b_r)
                        .iter_mut()
                        .zip(&d_r)
                        .for_each(|(a, b)| *a += b);

                    let s = slot(&mut g, x.0, gx.len());
                    s.iter_mut().zip(&gx).for_each(|(a, b)| *a += b);
                    let s = slot(&mut g, h.0, n);
                    s.iter_mut().zip(&gh).for_each(|(a, b)| *a += b);
                }
                Op::SoftmaxXent {
                    logits,
                    target,
                    probs,
                } => {
                    let s = slot(&mut g, logits.0, probs.len());
                    for (k, p) in probs.iter().enumerate() {
                        let y = if k == *target { 1.0 } else { 0.0 };
                        s[k] += gi[0] * (p - y);
                    }
                }
                Op::SqErr { x, target } => {
                    let d = self.nodes[x.0].value[0] - target;
                    slot(&mut g, x.0, 1)[0] += gi[0] * 2.0 * d;
                }
            }
            g[i] = gi;
        }
        Gradients {
            params: pg,
            nodes: g,
        }
    }
}
