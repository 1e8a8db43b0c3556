//! Reverse-mode differentiation over small dense tensors.
//!
//! A [`Tape`] records one forward computation. Parameters are read from a
//! [`ParamStore`] by id and their gradients land in a matching [`Grads`].

use super::params::{Grads, ParamId, ParamStore};
use crate::error::{Error, Result};
use crate::scalar::{sigmoid, Real};
use serde::{Deserialize, Serialize};

pub type NodeId = usize;

/// Lower clamp for probabilities inside the cross-entropy.
pub const PROB_CLAMP: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Sigmoid,
    Relu,
}

impl Activation {
    pub fn apply<T: Real>(self, x: T) -> T {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Sigmoid => sigmoid(x),
            Activation::Relu => x.max(T::zero()),
        }
    }

    /// Derivative expressed through the output `y = f(x)`.
    fn derivative_from_output<T: Real>(self, y: T) -> T {
        match self {
            Activation::Tanh => T::one() - y * y,
            Activation::Sigmoid => y * (T::one() - y),
            Activation::Relu => {
                if y > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tanh" => Ok(Activation::Tanh),
            "sigmoid" => Ok(Activation::Sigmoid),
            "relu" => Ok(Activation::Relu),
            _ => Err(Error::invalid(format!("unknown activation {s:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
enum Op<T> {
    Input,
    /// Rows of a parameter matrix.
    Gather { param: ParamId, ids: Vec<usize> },
    /// Valid 1-d convolution of a `rows x cols` input; weight is
    /// `filters x (width * cols)`, output `(rows - width + 1) x filters`.
    Conv { input: NodeId, weight: ParamId, bias: ParamId, width: usize },
    /// `W x + b` for a vector input.
    Affine { input: NodeId, weight: ParamId, bias: ParamId },
    Act { input: NodeId, kind: Activation },
    /// Column-wise maximum; `argmax[c]` is the winning row.
    MaxOverTime { input: NodeId, argmax: Vec<usize> },
    /// Column-wise max over non-overlapping row windows; stores flat indices.
    MaxPool { input: NodeId, argmax: Vec<usize> },
    Concat { inputs: Vec<NodeId> },
    Slice { input: NodeId, start: usize },
    Mul { a: NodeId, b: NodeId },
    Add { a: NodeId, b: NodeId },
    Mean { inputs: Vec<NodeId> },
    /// Element-wise product with a fixed, already rescaled mask.
    Dropout { input: NodeId, mask: Vec<T> },
    /// Binary cross-entropy of a probability against a 0/1 target.
    Bce { input: NodeId, target: T },
}

#[derive(Debug, Clone)]
struct Node<T> {
    value: Vec<T>,
    rows: usize,
    cols: usize,
    op: Op<T>,
}

/// One recorded forward pass.
#[derive(Debug, Clone)]
pub struct Tape<'p, T> {
    params: &'p ParamStore<T>,
    nodes: Vec<Node<T>>,
}

impl<'p, T: Real> Tape<'p, T> {
    pub fn new(params: &'p ParamStore<T>) -> Self {
        Tape {
            params,
            nodes: Vec::new(),
        }
    }

    fn push(&mut self, value: Vec<T>, rows: usize, cols: usize, op: Op<T>) -> NodeId {
        debug_assert_eq!(value.len(), rows * cols);
        self.nodes.push(Node { value, rows, cols, op });
        self.nodes.len() - 1
    }

    pub fn value(&self, id: NodeId) -> &[T] {
        &self.nodes[id].value
    }

    pub fn shape(&self, id: NodeId) -> (usize, usize) {
        (self.nodes[id].rows, self.nodes[id].cols)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn input(&mut self, value: Vec<T>, rows: usize, cols: usize) -> NodeId {
        self.push(value, rows, cols, Op::Input)
    }

    pub fn gather(&mut self, param: ParamId, ids: &[usize]) -> NodeId {
        let p = self.params.get(param);
        let mut value = Vec::with_capacity(ids.len() * p.cols);
        for &i in ids {
            value.extend_from_slice(p.row(i));
        }
        let cols = p.cols;
        self.push(value, ids.len(), cols, Op::Gather { param, ids: ids.to_vec() })
    }

    pub fn conv(&mut self, input: NodeId, weight: ParamId, bias: ParamId, width: usize) -> Result<NodeId> {
        let (rows, cols) = self.shape(input);
        let w = self.params.get(weight);
        let b = self.params.get(bias);
        if width == 0 || width > rows {
            return Err(Error::invalid(format!("filter width {width} exceeds sequence length {rows}")));
        }
        if w.cols != width * cols || b.data.len() != w.rows {
            return Err(Error::DimensionMismatch {
                expected: width * cols,
                found: w.cols,
            });
        }
        let x = &self.nodes[input].value;
        let out_rows = rows - width + 1;
        let span = width * cols;
        let mut value = Vec::with_capacity(out_rows * w.rows);
        for p in 0..out_rows {
            let window = &x[p * cols..p * cols + span];
            for f in 0..w.rows {
                let wf = &w.data[f * span..(f + 1) * span];
                let mut s = b.data[f];
                for (a, c) in window.iter().zip(wf) {
                    s += *a * *c;
                }
                value.push(s);
            }
        }
        let filters = w.rows;
        Ok(self.push(value, out_rows, filters, Op::Conv { input, weight, bias, width }))
    }

    pub fn affine(&mut self, input: NodeId, weight: ParamId, bias: ParamId) -> Result<NodeId> {
        let x = &self.nodes[input].value;
        let w = self.params.get(weight);
        let b = self.params.get(bias);
        if w.cols != x.len() || b.data.len() != w.rows {
            return Err(Error::DimensionMismatch {
                expected: w.cols,
                found: x.len(),
            });
        }
        let value: Vec<T> = (0..w.rows)
            .map(|r| {
                let mut s = b.data[r];
                for (a, c) in w.row(r).iter().zip(x) {
                    s += *a * *c;
                }
                s
            })
            .collect();
        let n = value.len();
        Ok(self.push(value, 1, n, Op::Affine { input, weight, bias }))
    }

    pub fn act(&mut self, input: NodeId, kind: Activation) -> NodeId {
        let n = &self.nodes[input];
        let value = n.value.iter().map(|&v| kind.apply(v)).collect();
        let (r, c) = (n.rows, n.cols);
        self.push(value, r, c, Op::Act { input, kind })
    }

    pub fn max_over_time(&mut self, input: NodeId) -> Result<NodeId> {
        let n = &self.nodes[input];
        if n.rows == 0 {
            return Err(Error::invalid("max-over-time of an empty feature map"));
        }
        let mut argmax = vec![0; n.cols];
        let mut value = n.value[..n.cols].to_vec();
        for r in 1..n.rows {
            for c in 0..n.cols {
                let v = n.value[r * n.cols + c];
                if v > value[c] {
                    value[c] = v;
                    argmax[c] = r;
                }
            }
        }
        let cols = n.cols;
        Ok(self.push(value, 1, cols, Op::MaxOverTime { input, argmax }))
    }

    pub fn max_pool(&mut self, input: NodeId, size: usize) -> Result<NodeId> {
        let n = &self.nodes[input];
        if size == 0 || !n.rows.is_multiple_of(size) {
            return Err(Error::invalid(format!("pool size {size} does not divide length {}", n.rows)));
        }
        let out_rows = n.rows / size;
        let mut value = Vec::with_capacity(out_rows * n.cols);
        let mut argmax = Vec::with_capacity(out_rows * n.cols);
        for o in 0..out_rows {
            for c in 0..n.cols {
                let mut best = o * size * n.cols + c;
                for r in o * size + 1..(o + 1) * size {
                    let i = r * n.cols + c;
                    if n.value[i] > n.value[best] {
                        best = i;
                    }
                }
                value.push(n.value[best]);
                argmax.push(best);
            }
        }
        let cols = n.cols;
        Ok(self.push(value, out_rows, cols, Op::MaxPool { input, argmax }))
    }

    pub fn concat(&mut self, inputs: &[NodeId]) -> NodeId {
        let value: Vec<T> = inputs.iter().flat_map(|&i| self.nodes[i].value.iter().copied()).collect();
        let n = value.len();
        self.push(value, 1, n, Op::Concat { inputs: inputs.to_vec() })
    }

    pub fn slice(&mut self, input: NodeId, start: usize, len: usize) -> NodeId {
        let value = self.nodes[input].value[start..start + len].to_vec();
        self.push(value, 1, len, Op::Slice { input, start })
    }

    fn binary(&mut self, a: NodeId, b: NodeId, f: impl Fn(T, T) -> T, op: Op<T>) -> NodeId {
        assert_eq!(self.nodes[a].value.len(), self.nodes[b].value.len(), "operand sizes differ");
        let value: Vec<T> = self.nodes[a]
            .value
            .iter()
            .zip(&self.nodes[b].value)
            .map(|(&x, &y)| f(x, y))
            .collect();
        let (r, c) = self.shape(a);
        self.push(value, r, c, op)
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.binary(a, b, |x, y| x * y, Op::Mul { a, b })
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.binary(a, b, |x, y| x + y, Op::Add { a, b })
    }

    pub fn mean(&mut self, inputs: &[NodeId]) -> NodeId {
        let n = self.nodes[inputs[0]].value.len();
        let mut value = vec![T::zero(); n];
        for &i in inputs {
            for (acc, &v) in value.iter_mut().zip(&self.nodes[i].value) {
                *acc += v;
            }
        }
        let k = T::from_count(inputs.len());
        value.iter_mut().for_each(|v| *v /= k);
        self.push(value, 1, n, Op::Mean { inputs: inputs.to_vec() })
    }

    pub fn dropout(&mut self, input: NodeId, mask: Vec<T>) -> NodeId {
        let n = &self.nodes[input];
        let value = n.value.iter().zip(&mask).map(|(&v, &m)| v * m).collect();
        let (r, c) = (n.rows, n.cols);
        self.push(value, r, c, Op::Dropout { input, mask })
    }

    /// Scalar `-(y ln p + (1 - y) ln(1 - p))` with `p` clamped into
    /// `[1e-7, 1 - 1e-7]`.
    pub fn bce(&mut self, input: NodeId, target: T) -> NodeId {
        let p = clamp_prob(self.nodes[input].value[0]);
        let loss = -(target * p.ln() + (T::one() - target) * (T::one() - p).ln());
        self.push(vec![loss], 1, 1, Op::Bce { input, target })
    }

    /// Back-propagates `seed * d(node)/d(params)` into `grads`. `node` must be
    /// a scalar.
    pub fn backward(&self, node: NodeId, seed: T, grads: &mut Grads<T>) {
        let mut g: Vec<Vec<T>> = vec![Vec::new(); self.nodes.len()];
        g[node] = vec![seed];
        for id in (0..=node).rev() {
            let gout = std::mem::take(&mut g[id]);
            if gout.is_empty() {
                continue;
            }
            let n = &self.nodes[id];
            let acc = |target: NodeId, g: &mut Vec<Vec<T>>| -> usize {
                if g[target].is_empty() {
                    g[target] = vec![T::zero(); self.nodes[target].value.len()];
                }
                target
            };
            match &n.op {
                Op::Input => {}
                Op::Gather { param, ids } => {
                    let cols = n.cols;
                    let pg = &mut grads.data[*param];
                    for (r, &i) in ids.iter().enumerate() {
                        for c in 0..cols {
                            pg[i * cols + c] += gout[r * cols + c];
                        }
                    }
                }
                Op::Conv { input, weight, bias, width } => {
                    let x = &self.nodes[*input].value;
                    let cols = self.nodes[*input].cols;
                    let w = &self.params.get(*weight).data;
                    let span = width * cols;
                    let filters = n.cols;
                    let t = acc(*input, &mut g);
                    let mut gx = std::mem::take(&mut g[t]);
                    for p in 0..n.rows {
                        let window = &x[p * cols..p * cols + span];
                        for f in 0..filters {
                            let go = gout[p * filters + f];
                            if go == T::zero() {
                                continue;
                            }
                            grads.data[*bias][f] += go;
                            let gw = &mut grads.data[*weight][f * span..(f + 1) * span];
                            for (gwi, &xi) in gw.iter_mut().zip(window) {
                                *gwi += go * xi;
                            }
                            let wf = &w[f * span..(f + 1) * span];
                            for (gxi, &wi) in gx[p * cols..p * cols + span].iter_mut().zip(wf) {
                                *gxi += go * wi;
                            }
                        }
                    }
                    g[t] = gx;
                }
                Op::Affine { input, weight, bias } => {
                    let x = &self.nodes[*input].value;
                    let w = self.params.get(*weight);
                    let t = acc(*input, &mut g);
                    let mut gx = std::mem::take(&mut g[t]);
                    for (r, &go) in gout.iter().enumerate() {
                        grads.data[*bias][r] += go;
                        let gw = &mut grads.data[*weight][r * w.cols..(r + 1) * w.cols];
                        for ((gwi, &xi), (gxi, &wi)) in gw.iter_mut().zip(x).zip(gx.iter_mut().zip(w.row(r))) {
                            *gwi += go * xi;
                            *gxi += go * wi;
                        }
                    }
                    g[t] = gx;
                }
                Op::Act { input, kind } => {
                    let t = acc(*input, &mut g);
                    for ((gi, &go), &y) in g[t].iter_mut().zip(&gout).zip(&n.value) {
                        *gi += go * kind.derivative_from_output(y);
                    }
                }
                Op::MaxOverTime { input, argmax } => {
                    let cols = n.cols;
                    let t = acc(*input, &mut g);
                    for (c, &r) in argmax.iter().enumerate() {
                        g[t][r * cols + c] += gout[c];
                    }
                }
                Op::MaxPool { input, argmax } => {
                    let t = acc(*input, &mut g);
                    for (&i, &go) in argmax.iter().zip(&gout) {
                        g[t][i] += go;
                    }
                }
                Op::Concat { inputs } => {
                    let mut off = 0;
                    for &i in inputs {
                        let len = self.nodes[i].value.len();
                        let t = acc(i, &mut g);
                        for (gi, &go) in g[t].iter_mut().zip(&gout[off..off + len]) {
                            *gi += go;
                        }
                        off += len;
                    }
                }
                Op::Slice { input, start } => {
                    let t = acc(*input, &mut g);
                    for (gi, &go) in g[t][*start..*start + gout.len()].iter_mut().zip(&gout) {
                        *gi += go;
                    }
                }
                Op::Mul { a, b } => {
                    let (va, vb) = (&self.nodes[*a].value, &self.nodes[*b].value);
                    let ta = acc(*a, &mut g);
                    for ((gi, &go), &y) in g[ta].iter_mut().zip(&gout).zip(vb) {
                        *gi += go * y;
                    }
                    let tb = acc(*b, &mut g);
                    for ((gi, &go), &x) in g[tb].iter_mut().zip(&gout).zip(va) {
                        *gi += go * x;
                    }
                }
                Op::Add { a, b } => {
                    for i in [*a, *b] {
                        let t = acc(i, &mut g);
                        for (gi, &go) in g[t].iter_mut().zip(&gout) {
                            *gi += go;
                        }
                    }
                }
                Op::Mean { inputs } => {
                    let k = T::from_count(inputs.len());
                    for &i in inputs {
                        let t = acc(i, &mut g);
                        for (gi, &go) in g[t].iter_mut().zip(&gout) {
                            *gi += go / k;
                        }
                    }
                }
                Op::Dropout { input, mask } => {
                    let t = acc(*input, &mut g);
                    for ((gi, &go), &m) in g[t].iter_mut().zip(&gout).zip(mask) {
                        *gi += go * m;
                    }
                }
                Op::Bce { input, target } => {
                    let raw = self.nodes[*input].value[0];
                    let p = clamp_prob(raw);
                    let t = acc(*input, &mut g);
                    if p == raw {
                        let y = *target;
                        g[t][0] += gout[0] * (-(y / p) + (T::one() - y) / (T::one() - p));
                    }
                }
            }
        }
    }
}

/// NaN passes through so that divergence stays visible.
pub(crate) fn clamp_prob<T: Real>(p: T) -> T {
    if p.is_nan() {
        return p;
    }
    let lo = T::lit(PROB_CLAMP);
    p.max(lo).min(T::one() - lo)
}
