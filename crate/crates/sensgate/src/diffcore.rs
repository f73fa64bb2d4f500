//! Minimal reverse-mode automatic differentiation on a flat tape.
//!
//! A [`Tape`] owns every tensor created during one forward pass and records
//! one entry per differentiable operation. [`Tape::backward`] replays the
//! record in reverse, accumulating gradients by addition. The op set is
//! exactly what the gated embedding models in this crate need; there is no
//! broadcasting beyond the documented cases and no view/stride machinery.
//!
//! Tensors are dense row-major `Vec<S>` with a shape of one or two axes.
//! Scalars are length-1 tensors.

use crate::error::{Error, Result};
use crate::scalar::{sigmoid, Real};

/// Opaque handle to a tensor on its tape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TensorId(usize);

struct Node<S> {
    data: Vec<S>,
    shape: Vec<usize>,
    requires_grad: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BroadcastMode {
    /// `g` is a single value applied to every element of `z`.
    Scalar,
    /// `g` has one value per column of `z`.
    PerColumn,
    /// `g` has the same number of elements as `z`.
    Elementwise,
}

enum Op<S> {
    Matmul { a: TensorId, b: TensorId, out: TensorId, m: usize, k: usize, n: usize },
    GatherRows { table: TensorId, out: TensorId, indices: Vec<u32>, dim: usize },
    BroadcastMul { z: TensorId, g: TensorId, out: TensorId, mode: BroadcastMode },
    Sigmoid { x: TensorId, out: TensorId },
    Relu { x: TensorId, out: TensorId },
    AddBias { x: TensorId, bias: TensorId, out: TensorId, cols: usize },
    ConcatCols { parts: Vec<(TensorId, usize)>, out: TensorId, rows: usize },
    Add { a: TensorId, b: TensorId, out: TensorId },
    Affine { x: TensorId, out: TensorId, mul: S },
    MeanAll { x: TensorId, out: TensorId },
    ExpandSpans { x: TensorId, out: TensorId, spans: Vec<usize> },
    BceMean { logits: TensorId, out: TensorId, labels: Vec<u8> },
    #[cfg(test)]
    BuggyScale { x: TensorId, out: TensorId },
}

/// Records a forward pass; consumed by exactly one [`Tape::backward`] call.
pub struct Tape<S> {
    nodes: Vec<Node<S>>,
    ops: Vec<Op<S>>,
    grads: Vec<Option<Vec<S>>>,
    consumed: bool,
}

impl<S: Real> Default for Tape<S> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S: Real> Tape<S> {
    pub fn new() -> Self {
        Tape { nodes: Vec::new(), ops: Vec::new(), grads: Vec::new(), consumed: false }
    }

    /// Drop all tensors and records, returning the tape to its initial state.
    pub fn reset(&mut self) {
        self.nodes.clear();
        self.ops.clear();
        self.grads.clear();
        self.consumed = false;
    }

    // ── Tensor creation and access ─────────────────────────────────────

    /// Register a tensor. `data.len()` must equal the shape product.
    pub fn tensor(&mut self, data: Vec<S>, shape: &[usize], requires_grad: bool) -> Result<TensorId> {
        let numel: usize = shape.iter().product();
        if data.len() != numel {
            return Err(Error::Contract(format!(
                "tensor data length {} does not match shape {:?}",
                data.len(),
                shape
            )));
        }
        self.nodes.push(Node { data, shape: shape.to_vec(), requires_grad });
        Ok(TensorId(self.nodes.len() - 1))
    }

    /// Register a non-differentiable tensor.
    pub fn constant(&mut self, data: Vec<S>, shape: &[usize]) -> Result<TensorId> {
        self.tensor(data, shape, false)
    }

    pub fn data(&self, id: TensorId) -> &[S] {
        &self.nodes[id.0].data
    }

    pub fn shape(&self, id: TensorId) -> &[usize] {
        &self.nodes[id.0].shape
    }

    pub fn numel(&self, id: TensorId) -> usize {
        self.nodes[id.0].data.len()
    }

    /// Value of a scalar (length-1) tensor.
    pub fn value(&self, id: TensorId) -> S {
        debug_assert_eq!(self.numel(id), 1);
        self.nodes[id.0].data[0]
    }

    /// Gradient populated by [`Tape::backward`]. `None` when backward has not
    /// run or when no gradient path reaches this tensor.
    pub fn grad(&self, id: TensorId) -> Option<&[S]> {
        self.grads.get(id.0).and_then(|g| g.as_deref())
    }

    /// Rows/cols view of a 2-axis shape; 1-axis tensors count as one row.
    fn dims2(&self, id: TensorId) -> (usize, usize) {
        let s = &self.nodes[id.0].shape;
        match s.len() {
            1 => (1, s[0]),
            2 => (s[0], s[1]),
            _ => unreachable!("tapes only hold 1- or 2-axis tensors"),
        }
    }

    fn push(&mut self, data: Vec<S>, shape: &[usize], requires_grad: bool) -> TensorId {
        self.nodes.push(Node { data, shape: shape.to_vec(), requires_grad });
        TensorId(self.nodes.len() - 1)
    }

    fn rg(&self, id: TensorId) -> bool {
        self.nodes[id.0].requires_grad
    }

    // ── Operations ─────────────────────────────────────────────────────

    /// `[m,k] x [k,n] -> [m,n]`.
    pub fn matmul(&mut self, a: TensorId, b: TensorId) -> Result<TensorId> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        if sa.len() != 2 || sb.len() != 2 || sa[1] != sb[0] {
            return Err(Error::Dimension(format!("matmul {:?} x {:?}", sa, sb)));
        }
        let (m, k, n) = (sa[0], sa[1], sb[1]);
        let mut out = vec![S::zero(); m * n];
        {
            let ad = &self.nodes[a.0].data;
            let bd = &self.nodes[b.0].data;
            for i in 0..m {
                for p in 0..k {
                    let aip = ad[i * k + p];
                    let brow = &bd[p * n..(p + 1) * n];
                    let orow = &mut out[i * n..(i + 1) * n];
                    for j in 0..n {
                        orow[j] = orow[j] + aip * brow[j];
                    }
                }
            }
        }
        let rg = self.rg(a) || self.rg(b);
        let out = self.push(out, &[m, n], rg);
        self.ops.push(Op::Matmul { a, b, out, m, k, n });
        Ok(out)
    }

    /// Embedding lookup: rows of a `[V,d]` table selected by `indices`,
    /// producing `[B,d]`. Out-of-range indices are a lookup error.
    pub fn gather_rows(&mut self, table: TensorId, indices: &[u32]) -> Result<TensorId> {
        let st = self.shape(table);
        if st.len() != 2 {
            return Err(Error::Dimension(format!("gather_rows table must be 2-axis, got {:?}", st)));
        }
        let (vocab, dim) = (st[0], st[1]);
        let mut out = Vec::with_capacity(indices.len() * dim);
        {
            let td = &self.nodes[table.0].data;
            for (row, &ix) in indices.iter().enumerate() {
                let ix = ix as usize;
                if ix >= vocab {
                    return Err(Error::Lookup(format!(
                        "index {} at row {} exceeds vocabulary size {}",
                        ix, row, vocab
                    )));
                }
                out.extend_from_slice(&td[ix * dim..(ix + 1) * dim]);
            }
        }
        let rg = self.rg(table);
        let out = self.push(out, &[indices.len(), dim], rg);
        self.ops.push(Op::GatherRows { table, out, indices: indices.to_vec(), dim });
        Ok(out)
    }

    /// Multiply `z` by gates `g`, broadcasting by element count: one value
    /// (applied everywhere), one per column, or one per element.
    pub fn broadcast_mul(&mut self, z: TensorId, g: TensorId) -> Result<TensorId> {
        let (rows, cols) = self.dims2(z);
        let gn = self.numel(g);
        let mode = if gn == 1 {
            BroadcastMode::Scalar
        } else if gn == rows * cols {
            BroadcastMode::Elementwise
        } else if gn == cols {
            BroadcastMode::PerColumn
        } else {
            return Err(Error::Dimension(format!(
                "broadcast_mul: {} gate values against shape {:?}",
                gn,
                self.shape(z)
            )));
        };
        let zd = &self.nodes[z.0].data;
        let gd = &self.nodes[g.0].data;
        let out: Vec<S> = match mode {
            BroadcastMode::Scalar => {
                let gv = gd[0];
                zd.iter().map(|&v| v * gv).collect()
            }
            BroadcastMode::PerColumn => zd
                .iter()
                .enumerate()
                .map(|(i, &v)| v * gd[i % cols])
                .collect(),
            BroadcastMode::Elementwise => zd.iter().zip(gd).map(|(&v, &gv)| v * gv).collect(),
        };
        let shape = self.shape(z).to_vec();
        let rg = self.rg(z) || self.rg(g);
        let out = self.push(out, &shape, rg);
        self.ops.push(Op::BroadcastMul { z, g, out, mode });
        Ok(out)
    }

    /// Identity forward, no backward path: the result is a fresh constant,
    /// so gradients never reach `x` or anything upstream of it.
    pub fn stop_grad(&mut self, x: TensorId) -> TensorId {
        let data = self.nodes[x.0].data.clone();
        let shape = self.nodes[x.0].shape.clone();
        self.push(data, &shape, false)
    }

    pub fn sigmoid_op(&mut self, x: TensorId) -> TensorId {
        let data: Vec<S> = self.nodes[x.0].data.iter().map(|&v| sigmoid(v)).collect();
        let shape = self.nodes[x.0].shape.clone();
        let rg = self.rg(x);
        let out = self.push(data, &shape, rg);
        self.ops.push(Op::Sigmoid { x, out });
        out
    }

    pub fn relu(&mut self, x: TensorId) -> TensorId {
        let data: Vec<S> = self.nodes[x.0]
            .data
            .iter()
            .map(|&v| if v > S::zero() { v } else { S::zero() })
            .collect();
        let shape = self.nodes[x.0].shape.clone();
        let rg = self.rg(x);
        let out = self.push(data, &shape, rg);
        self.ops.push(Op::Relu { x, out });
        out
    }

    /// Add a `[n]` bias to every row of `[B,n]`.
    pub fn add_bias(&mut self, x: TensorId, bias: TensorId) -> Result<TensorId> {
        let (_, cols) = self.dims2(x);
        if self.numel(bias) != cols {
            return Err(Error::Dimension(format!(
                "add_bias: bias length {} against {} columns",
                self.numel(bias),
                cols
            )));
        }
        let xd = &self.nodes[x.0].data;
        let bd = &self.nodes[bias.0].data;
        let out: Vec<S> = xd.iter().enumerate().map(|(i, &v)| v + bd[i % cols]).collect();
        let shape = self.shape(x).to_vec();
        let rg = self.rg(x) || self.rg(bias);
        let out = self.push(out, &shape, rg);
        self.ops.push(Op::AddBias { x, bias, out, cols });
        Ok(out)
    }

    /// Concatenate `[B,d_i]` blocks along the column axis.
    pub fn concat_cols(&mut self, inputs: &[TensorId]) -> Result<TensorId> {
        if inputs.is_empty() {
            return Err(Error::Contract("concat_cols of zero tensors".into()));
        }
        let rows = self.dims2(inputs[0]).0;
        let mut parts = Vec::with_capacity(inputs.len());
        let mut total = 0usize;
        for &id in inputs {
            let (r, c) = self.dims2(id);
            if r != rows {
                return Err(Error::Dimension(format!(
                    "concat_cols: {} rows against {}",
                    r, rows
                )));
            }
            parts.push((id, c));
            total += c;
        }
        let mut out = vec![S::zero(); rows * total];
        let mut offset = 0;
        for &(id, c) in &parts {
            let d = &self.nodes[id.0].data;
            for r in 0..rows {
                out[r * total + offset..r * total + offset + c]
                    .copy_from_slice(&d[r * c..(r + 1) * c]);
            }
            offset += c;
        }
        let rg = inputs.iter().any(|&id| self.rg(id));
        let out = self.push(out, &[rows, total], rg);
        self.ops.push(Op::ConcatCols { parts, out, rows });
        Ok(out)
    }

    /// Elementwise sum of two same-shape tensors.
    pub fn add(&mut self, a: TensorId, b: TensorId) -> Result<TensorId> {
        if self.shape(a) != self.shape(b) {
            return Err(Error::Dimension(format!(
                "add {:?} + {:?}",
                self.shape(a),
                self.shape(b)
            )));
        }
        let out: Vec<S> = self.nodes[a.0]
            .data
            .iter()
            .zip(&self.nodes[b.0].data)
            .map(|(&x, &y)| x + y)
            .collect();
        let shape = self.shape(a).to_vec();
        let rg = self.rg(a) || self.rg(b);
        let out = self.push(out, &shape, rg);
        self.ops.push(Op::Add { a, b, out });
        Ok(out)
    }

    /// Elementwise `mul * x + add` with constant coefficients.
    pub fn affine(&mut self, x: TensorId, mul: S, add: S) -> TensorId {
        let data: Vec<S> = self.nodes[x.0].data.iter().map(|&v| mul * v + add).collect();
        let shape = self.nodes[x.0].shape.clone();
        let rg = self.rg(x);
        let out = self.push(data, &shape, rg);
        self.ops.push(Op::Affine { x, out, mul });
        out
    }

    /// `1 - x`, elementwise.
    pub fn one_minus(&mut self, x: TensorId) -> TensorId {
        self.affine(x, -S::one(), S::one())
    }

    /// Mean over all elements, producing a scalar.
    pub fn mean_all(&mut self, x: TensorId) -> Result<TensorId> {
        let n = self.numel(x);
        if n == 0 {
            return Err(Error::Domain("mean of an empty tensor".into()));
        }
        let sum: S = self.nodes[x.0].data.iter().copied().sum();
        let mean = sum / crate::scalar::real::<S>(n as f64);
        let rg = self.rg(x);
        let out = self.push(vec![mean], &[1], rg);
        self.ops.push(Op::MeanAll { x, out });
        Ok(out)
    }

    /// Repeat each element of `x` across its span width: element `k` fills
    /// `spans[k]` consecutive outputs. The backward pass sums each span.
    pub fn expand_spans(&mut self, x: TensorId, spans: &[usize]) -> Result<TensorId> {
        if self.numel(x) != spans.len() {
            return Err(Error::Dimension(format!(
                "expand_spans: {} values against {} spans",
                self.numel(x),
                spans.len()
            )));
        }
        let total: usize = spans.iter().sum();
        let mut out = Vec::with_capacity(total);
        for (k, &w) in spans.iter().enumerate() {
            let v = self.nodes[x.0].data[k];
            out.extend(std::iter::repeat(v).take(w));
        }
        let rg = self.rg(x);
        let out = self.push(out, &[total], rg);
        self.ops.push(Op::ExpandSpans { x, out, spans: spans.to_vec() });
        Ok(out)
    }

    /// Mean binary cross-entropy from logits, in the log-sum-exp form that
    /// stays finite for any logit magnitude.
    pub fn bce_mean(&mut self, logits: TensorId, labels: &[u8]) -> Result<TensorId> {
        let n = self.numel(logits);
        if n == 0 {
            return Err(Error::Domain("bce_mean on an empty batch".into()));
        }
        if n != labels.len() {
            return Err(Error::Dimension(format!(
                "bce_mean: {} logits against {} labels",
                n,
                labels.len()
            )));
        }
        let mut sum = S::zero();
        for (&x, &y) in self.nodes[logits.0].data.iter().zip(labels) {
            // max(x,0) - x*y + ln(1 + exp(-|x|))
            let pos = if x > S::zero() { x } else { S::zero() };
            let yv = crate::scalar::real::<S>(y as f64);
            sum += pos - x * yv + (-x.abs()).exp().ln_1p();
        }
        let mean = sum / crate::scalar::real::<S>(n as f64);
        let rg = self.rg(logits);
        let out = self.push(vec![mean], &[1], rg);
        self.ops.push(Op::BceMean { logits, out, labels: labels.to_vec() });
        Ok(out)
    }

    #[cfg(test)]
    fn buggy_scale(&mut self, x: TensorId) -> TensorId {
        let data: Vec<S> = self.nodes[x.0].data.iter().map(|&v| v + v).collect();
        let shape = self.nodes[x.0].shape.clone();
        let rg = self.rg(x);
        let out = self.push(data, &shape, rg);
        self.ops.push(Op::BuggyScale { x, out });
        out
    }

    // ── Backward ───────────────────────────────────────────────────────

    /// Replay the tape in reverse from a scalar loss, accumulating gradients.
    pub fn backward(&mut self, loss: TensorId) -> Result<()> {
        if self.consumed {
            return Err(Error::State("tape already consumed by backward".into()));
        }
        if self.numel(loss) != 1 {
            return Err(Error::Contract(format!(
                "backward requires a scalar loss, got shape {:?}",
                self.shape(loss)
            )));
        }
        self.consumed = true;
        let mut grads: Vec<Option<Vec<S>>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[loss.0] = Some(vec![S::one()]);
        for op in self.ops.iter().rev() {
            step_backward(op, &self.nodes, &mut grads);
        }
        self.grads = grads;
        Ok(())
    }
}

fn accumulate<S: Real>(grads: &mut [Option<Vec<S>>], id: TensorId, len: usize) -> &mut Vec<S> {
    grads[id.0].get_or_insert_with(|| vec![S::zero(); len])
}

fn step_backward<S: Real>(op: &Op<S>, nodes: &[Node<S>], grads: &mut [Option<Vec<S>>]) {
    match op {
        Op::Matmul { a, b, out, m, k, n } => {
            let Some(d_out) = grads[out.0].clone() else { return };
            let (m, k, n) = (*m, *k, *n);
            {
                let bd = &nodes[b.0].data;
                let da = accumulate(grads, *a, m * k);
                for i in 0..m {
                    for p in 0..k {
                        let mut acc = S::zero();
                        let drow = &d_out[i * n..(i + 1) * n];
                        let brow = &bd[p * n..(p + 1) * n];
                        for j in 0..n {
                            acc += drow[j] * brow[j];
                        }
                        da[i * k + p] += acc;
                    }
                }
            }
            {
                let ad = &nodes[a.0].data;
                let db = accumulate(grads, *b, k * n);
                for i in 0..m {
                    let drow = &d_out[i * n..(i + 1) * n];
                    for p in 0..k {
                        let aip = ad[i * k + p];
                        let brow = &mut db[p * n..(p + 1) * n];
                        for j in 0..n {
                            brow[j] += aip * drow[j];
                        }
                    }
                }
            }
        }
        Op::GatherRows { table, out, indices, dim } => {
            let Some(d_out) = grads[out.0].clone() else { return };
            let len = nodes[table.0].data.len();
            let dt = accumulate(grads, *table, len);
            for (row, &ix) in indices.iter().enumerate() {
                let ix = ix as usize;
                for c in 0..*dim {
                    dt[ix * dim + c] += d_out[row * dim + c];
                }
            }
        }
        Op::BroadcastMul { z, g, out, mode } => {
            let Some(d_out) = grads[out.0].clone() else { return };
            let zd = nodes[z.0].data.clone();
            let gd = nodes[g.0].data.clone();
            let cols = gd.len();
            match mode {
                BroadcastMode::Scalar => {
                    let gv = gd[0];
                    {
                        let dz = accumulate(grads, *z, zd.len());
                        for (dzi, &doi) in dz.iter_mut().zip(&d_out) {
                            *dzi += gv * doi;
                        }
                    }
                    let dg = accumulate(grads, *g, 1);
                    for (zi, doi) in zd.iter().zip(&d_out) {
                        dg[0] += *zi * *doi;
                    }
                }
                BroadcastMode::PerColumn => {
                    {
                        let dz = accumulate(grads, *z, zd.len());
                        for (i, (dzi, &doi)) in dz.iter_mut().zip(&d_out).enumerate() {
                            *dzi += gd[i % cols] * doi;
                        }
                    }
                    let dg = accumulate(grads, *g, cols);
                    for (i, (zi, doi)) in zd.iter().zip(&d_out).enumerate() {
                        dg[i % cols] += *zi * *doi;
                    }
                }
                BroadcastMode::Elementwise => {
                    {
                        let dz = accumulate(grads, *z, zd.len());
                        for ((dzi, &doi), &gv) in dz.iter_mut().zip(&d_out).zip(&gd) {
                            *dzi += gv * doi;
                        }
                    }
                    let dg = accumulate(grads, *g, gd.len());
                    for ((dgi, &doi), &zv) in dg.iter_mut().zip(&d_out).zip(&zd) {
                        *dgi += zv * doi;
                    }
                }
            }
        }
        Op::Sigmoid { x, out } => {
            let Some(d_out) = grads[out.0].clone() else { return };
            let yd = nodes[out.0].data.clone();
            let dx = accumulate(grads, *x, yd.len());
            for ((dxi, &doi), &y) in dx.iter_mut().zip(&d_out).zip(&yd) {
                *dxi += y * (S::one() - y) * doi;
            }
        }
        Op::Relu { x, out } => {
            let Some(d_out) = grads[out.0].clone() else { return };
            let xd = nodes[x.0].data.clone();
            let dx = accumulate(grads, *x, xd.len());
            for ((dxi, &doi), &xv) in dx.iter_mut().zip(&d_out).zip(&xd) {
                if xv > S::zero() {
                    *dxi += doi;
                }
            }
        }
        Op::AddBias { x, bias, out, cols } => {
            let Some(d_out) = grads[out.0].clone() else { return };
            {
                let dx = accumulate(grads, *x, d_out.len());
                for (dxi, &doi) in dx.iter_mut().zip(&d_out) {
                    *dxi += doi;
                }
            }
            let db = accumulate(grads, *bias, *cols);
            for (i, &doi) in d_out.iter().enumerate() {
                db[i % cols] += doi;
            }
        }
        Op::ConcatCols { parts, out, rows } => {
            let Some(d_out) = grads[out.0].clone() else { return };
            let total: usize = parts.iter().map(|&(_, c)| c).sum();
            let mut offset = 0;
            for &(id, c) in parts {
                let dp = accumulate(grads, id, rows * c);
                for r in 0..*rows {
                    for j in 0..c {
                        dp[r * c + j] += d_out[r * total + offset + j];
                    }
                }
                offset += c;
            }
        }
        Op::Add { a, b, out } => {
            let Some(d_out) = grads[out.0].clone() else { return };
            {
                let da = accumulate(grads, *a, d_out.len());
                for (dai, &doi) in da.iter_mut().zip(&d_out) {
                    *dai += doi;
                }
            }
            let db = accumulate(grads, *b, d_out.len());
            for (dbi, &doi) in db.iter_mut().zip(&d_out) {
                *dbi += doi;
            }
        }
        Op::Affine { x, out, mul } => {
            let Some(d_out) = grads[out.0].clone() else { return };
            let dx = accumulate(grads, *x, d_out.len());
            for (dxi, &doi) in dx.iter_mut().zip(&d_out) {
                *dxi += *mul * doi;
            }
        }
        Op::MeanAll { x, out } => {
            let Some(d_out) = grads[out.0].clone() else { return };
            let n = nodes[x.0].data.len();
            let scale = d_out[0] / crate::scalar::real::<S>(n as f64);
            let dx = accumulate(grads, *x, n);
            for dxi in dx.iter_mut() {
                *dxi += scale;
            }
        }
        Op::ExpandSpans { x, out, spans } => {
            let Some(d_out) = grads[out.0].clone() else { return };
            let dx = accumulate(grads, *x, spans.len());
            let mut offset = 0;
            for (k, &w) in spans.iter().enumerate() {
                let mut acc = S::zero();
                for &doi in &d_out[offset..offset + w] {
                    acc += doi;
                }
                dx[k] += acc;
                offset += w;
            }
        }
        Op::BceMean { logits, out, labels } => {
            let Some(d_out) = grads[out.0].clone() else { return };
            let xd = nodes[logits.0].data.clone();
            let n = crate::scalar::real::<S>(xd.len() as f64);
            let dl = accumulate(grads, *logits, xd.len());
            for ((dli, &x), &y) in dl.iter_mut().zip(&xd).zip(labels) {
                let yv = crate::scalar::real::<S>(y as f64);
                *dli += (sigmoid(x) - yv) / n * d_out[0];
            }
        }
        #[cfg(test)]
        Op::BuggyScale { x, out } => {
            let Some(d_out) = grads[out.0].clone() else { return };
            let dx = accumulate(grads, *x, d_out.len());
            let three = crate::scalar::real::<S>(3.0);
            for (dxi, &doi) in dx.iter_mut().zip(&d_out) {
                *dxi += three * doi;
            }
        }
    }
}

// ── Gradient checking ──────────────────────────────────────────────────

/// A leaf parameter for [`grad_check`].
#[derive(Debug, Clone)]
pub struct ParamSpec<S> {
    pub data: Vec<S>,
    pub shape: Vec<usize>,
}

impl<S: Real> ParamSpec<S> {
    pub fn new(data: Vec<S>, shape: &[usize]) -> Self {
        ParamSpec { data, shape: shape.to_vec() }
    }
}

/// Worst-case relative disagreement between backward and central differences.
#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub max_rel_err: f64,
    /// `(parameter index, element index)` of the worst disagreement.
    pub worst: (usize, usize),
}

/// Compare backward-pass gradients against central finite differences.
///
/// `f` must build the loss deterministically: it is re-evaluated
/// `2 * total_elements` times with perturbed parameters, and any internal
/// randomness has to be reseeded identically on every call. The relative
/// error uses `|a - n| / max(|a|, |n|, 1e-8)`.
pub fn grad_check<S, F>(mut f: F, params: &[ParamSpec<S>], epsilon: S) -> Result<GradCheckReport>
where
    S: Real,
    F: FnMut(&mut Tape<S>, &[TensorId]) -> Result<TensorId>,
{
    let eval = |f: &mut F, ps: &[ParamSpec<S>]| -> Result<S> {
        let mut tape = Tape::new();
        let ids: Vec<TensorId> = ps
            .iter()
            .map(|p| tape.tensor(p.data.clone(), &p.shape, true))
            .collect::<Result<_>>()?;
        let loss = f(&mut tape, &ids)?;
        if tape.numel(loss) != 1 {
            return Err(Error::Contract("grad_check loss must be scalar".into()));
        }
        Ok(tape.value(loss))
    };

    // Analytic gradients from one taped pass.
    let mut tape = Tape::new();
    let ids: Vec<TensorId> = params
        .iter()
        .map(|p| tape.tensor(p.data.clone(), &p.shape, true))
        .collect::<Result<_>>()?;
    let loss = f(&mut tape, &ids)?;
    tape.backward(loss)?;
    let analytic: Vec<Vec<S>> = ids
        .iter()
        .zip(params)
        .map(|(&id, p)| {
            tape.grad(id)
                .map(|g| g.to_vec())
                .unwrap_or_else(|| vec![S::zero(); p.data.len()])
        })
        .collect();

    let mut report = GradCheckReport { max_rel_err: 0.0, worst: (0, 0) };
    let mut perturbed = params.to_vec();
    for pi in 0..params.len() {
        for ei in 0..params[pi].data.len() {
            let orig = perturbed[pi].data[ei];
            perturbed[pi].data[ei] = orig + epsilon;
            let up = eval(&mut f, &perturbed)?;
            perturbed[pi].data[ei] = orig - epsilon;
            let down = eval(&mut f, &perturbed)?;
            perturbed[pi].data[ei] = orig;

            let numeric = (up - down) / (epsilon + epsilon);
            let a = analytic[pi][ei].to_f64().unwrap();
            let n = numeric.to_f64().unwrap();
            let rel = (a - n).abs() / a.abs().max(n.abs()).max(1e-8);
            if rel > report.max_rel_err {
                report.max_rel_err = rel;
                report.worst = (pi, ei);
            }
        }
    }
    Ok(report)
}
