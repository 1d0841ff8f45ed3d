//! A small reverse-mode differentiation tape over dense row-major matrices.
//!
//! Every value is an `Array2<f64>`; scalars are `1 x 1`. Ops are recorded in
//! evaluation order and [`Graph::backward`] walks them in reverse. Only the ops
//! the reward model and its objectives need are provided, and each one is
//! finite-difference checked in the tests below.

use ndarray::{s, Array2, Axis};

use super::{centered_moments, degenerate_side, distance_rho_derivative, standardized_distance};
use crate::error::{Error, Result};

pub type Mat = Array2<f64>;

/// Handle to a node in a [`Graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

/// How a Pearson correlation is turned into a scalar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceForm {
    /// `sqrt((1 - rho) / 2)`
    Root,
    /// `(1 - rho) / 2`
    Squared,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PearsonOutput {
    Correlation,
    Distance(DistanceForm),
}

const LN_EPS: f64 = 1e-5;
const GELU_C: f64 = 0.797_884_560_802_865_4; // sqrt(2 / pi)

enum Op {
    Leaf,
    MatMul(Var, Var),
    MatMulT(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    AddRow(Var, Var),
    Affine(Var, f64),
    Gelu(Var),
    Relu(Var),
    Tanh(Var),
    LayerNorm {
        x: Var,
        gain: Var,
        bias: Var,
        xhat: Mat,
        inv_std: Vec<f64>,
    },
    CausalAttention {
        qkv: Var,
        window: usize,
        heads: usize,
        probs: Vec<f64>,
    },
    GatherRows(Var, Vec<usize>),
    ConcatCols(Var, Var),
    Reshape(Var),
    Column(Var, usize),
    Sum(Var),
    Mean(Var),
    NormalizeRows {
        x: Var,
        norms: Vec<f64>,
    },
    CrossEntropy {
        logits: Var,
        labels: Vec<usize>,
        probs: Mat,
    },
    Pearson {
        x: Var,
        y: Var,
        gx: Vec<f64>,
        gy: Vec<f64>,
    },
}

struct Node {
    value: Mat,
    op: Op,
    requires_grad: bool,
}

/// Recording of one forward evaluation.
#[derive(Default)]
pub struct Graph {
    nodes: Vec<Node>,
}

/// Gradients of a scalar with respect to every node that required them.
pub struct Gradients {
    grads: Vec<Option<Mat>>,
}

impl Gradients {
    pub fn get(&self, v: Var) -> Option<&Mat> {
        self.grads[v.0].as_ref()
    }

    /// Gradient for `v`, zeros if the loss does not depend on it.
    pub fn wrt(&mut self, graph: &Graph, v: Var) -> Mat {
        self.grads[v.0]
            .take()
            .unwrap_or_else(|| Mat::zeros(graph.value(v).raw_dim()))
    }
}

fn std_layout(m: Mat) -> Mat {
    if m.is_standard_layout() {
        m
    } else {
        m.as_standard_layout().into_owned()
    }
}

fn check_same(a: &Mat, b: &Mat, what: &str) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::Shape(format!(
            "{what}: {:?} vs {:?}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(())
}

fn gelu(x: f64) -> f64 {
    let u = GELU_C * (x + 0.044715 * x * x * x);
    0.5 * x * (1.0 + u.tanh())
}

fn gelu_grad(x: f64) -> f64 {
    let u = GELU_C * (x + 0.044715 * x * x * x);
    let t = u.tanh();
    0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * GELU_C * (1.0 + 3.0 * 0.044715 * x * x)
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Mat, op: Op, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn rg(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    /// Trainable leaf.
    pub fn param(&mut self, value: Mat) -> Var {
        self.push(std_layout(value), Op::Leaf, true)
    }

    /// Leaf that never receives a gradient.
    pub fn constant(&mut self, value: Mat) -> Var {
        self.push(std_layout(value), Op::Leaf, false)
    }

    pub fn value(&self, v: Var) -> &Mat {
        &self.nodes[v.0].value
    }

    pub fn scalar(&self, v: Var) -> f64 {
        self.nodes[v.0].value[[0, 0]]
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (va, vb) = (self.value(a), self.value(b));
        if va.ncols() != vb.nrows() {
            return Err(Error::Shape(format!(
                "matmul {:?} x {:?}",
                va.dim(),
                vb.dim()
            )));
        }
        let out = va.dot(vb);
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(out, Op::MatMul(a, b), rg))
    }

    /// `a * b^T`
    pub fn matmul_t(&mut self, a: Var, b: Var) -> Result<Var> {
        let (va, vb) = (self.value(a), self.value(b));
        if va.ncols() != vb.ncols() {
            return Err(Error::Shape(format!(
                "matmul_t {:?} x {:?}^T",
                va.dim(),
                vb.dim()
            )));
        }
        let out = std_layout(va.dot(&vb.t()));
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(out, Op::MatMulT(a, b), rg))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        check_same(self.value(a), self.value(b), "add")?;
        let out = self.value(a) + self.value(b);
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(out, Op::Add(a, b), rg))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        check_same(self.value(a), self.value(b), "sub")?;
        let out = self.value(a) - self.value(b);
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(out, Op::Sub(a, b), rg))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        check_same(self.value(a), self.value(b), "mul")?;
        let out = self.value(a) * self.value(b);
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(out, Op::Mul(a, b), rg))
    }

    /// `a + row` with `row` broadcast over the rows of `a`.
    pub fn add_row(&mut self, a: Var, row: Var) -> Result<Var> {
        let (va, vr) = (self.value(a), self.value(row));
        if vr.nrows() != 1 || vr.ncols() != va.ncols() {
            return Err(Error::Shape(format!(
                "add_row {:?} + {:?}",
                va.dim(),
                vr.dim()
            )));
        }
        let out = va + vr;
        let rg = self.rg(a) || self.rg(row);
        Ok(self.push(out, Op::AddRow(a, row), rg))
    }

    /// `scale * a + shift`
    pub fn affine(&mut self, a: Var, scale: f64, shift: f64) -> Var {
        let out = self.value(a).mapv(|x| scale * x + shift);
        let rg = self.rg(a);
        self.push(out, Op::Affine(a, scale), rg)
    }

    pub fn gelu(&mut self, a: Var) -> Var {
        let out = self.value(a).mapv(gelu);
        let rg = self.rg(a);
        self.push(out, Op::Gelu(a), rg)
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let out = self.value(a).mapv(|x| x.max(0.0));
        let rg = self.rg(a);
        self.push(out, Op::Relu(a), rg)
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let out = self.value(a).mapv(f64::tanh);
        let rg = self.rg(a);
        self.push(out, Op::Tanh(a), rg)
    }

    /// Row-wise layer normalization with a learned gain and bias (both `1 x d`).
    pub fn layer_norm(&mut self, x: Var, gain: Var, bias: Var) -> Result<Var> {
        let vx = self.value(x);
        let d = vx.ncols();
        for (name, p) in [("gain", gain), ("bias", bias)] {
            let vp = self.value(p);
            if vp.dim() != (1, d) {
                return Err(Error::Shape(format!(
                    "layer_norm {name} {:?} for width {d}",
                    vp.dim()
                )));
            }
        }
        let mut xhat = Mat::zeros(vx.raw_dim());
        let mut inv_std = Vec::with_capacity(vx.nrows());
        for (r, row) in vx.rows().into_iter().enumerate() {
            let mu = row.sum() / d as f64;
            let var = row.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / d as f64;
            let is = 1.0 / (var + LN_EPS).sqrt();
            inv_std.push(is);
            for (c, v) in row.iter().enumerate() {
                xhat[[r, c]] = (v - mu) * is;
            }
        }
        let out = &(&xhat * self.value(gain)) + self.value(bias);
        let rg = self.rg(x) || self.rg(gain) || self.rg(bias);
        Ok(self.push(
            out,
            Op::LayerNorm {
                x,
                gain,
                bias,
                xhat,
                inv_std,
            },
            rg,
        ))
    }

    /// Multi-head causal self-attention over consecutive blocks of `window` rows.
    ///
    /// `qkv` is `(n * window) x (3 * d)` with query, key and value columns in
    /// that order; the result is `(n * window) x d`. Row `i` of a block attends
    /// to rows `0..=i` of the same block only.
    pub fn causal_attention(&mut self, qkv: Var, window: usize, heads: usize) -> Result<Var> {
        let v = self.value(qkv);
        let (rows, cols) = v.dim();
        if window == 0 || rows % window != 0 || cols % 3 != 0 || (cols / 3) % heads != 0 {
            return Err(Error::Shape(format!(
                "causal_attention input {:?} with window {window}, heads {heads}",
                v.dim()
            )));
        }
        let d = cols / 3;
        let dh = d / heads;
        let scale = 1.0 / (dh as f64).sqrt();
        let blocks = rows / window;
        let src = v.as_slice().expect("standard layout");
        let mut out = vec![0.0; rows * d];
        let mut probs = vec![0.0; blocks * heads * window * window];
        let mut scores = vec![0.0; window];
        for n in 0..blocks {
            for h in 0..heads {
                let qo = h * dh;
                let ko = d + h * dh;
                let vo = 2 * d + h * dh;
                for i in 0..window {
                    let ri = (n * window + i) * cols;
                    let mut max = f64::NEG_INFINITY;
                    for (j, sc) in scores.iter_mut().enumerate().take(i + 1) {
                        let rj = (n * window + j) * cols;
                        let mut acc = 0.0;
                        for c in 0..dh {
                            acc += src[ri + qo + c] * src[rj + ko + c];
                        }
                        *sc = acc * scale;
                        max = max.max(*sc);
                    }
                    let mut z = 0.0;
                    for sc in scores.iter_mut().take(i + 1) {
                        *sc = (*sc - max).exp();
                        z += *sc;
                    }
                    let pbase = ((n * heads + h) * window + i) * window;
                    let obase = (n * window + i) * d + h * dh;
                    for j in 0..=i {
                        let p = scores[j] / z;
                        probs[pbase + j] = p;
                        let rj = (n * window + j) * cols;
                        for c in 0..dh {
                            out[obase + c] += p * src[rj + vo + c];
                        }
                    }
                }
            }
        }
        let out = Mat::from_shape_vec((rows, d), out).expect("attention output shape");
        let rg = self.rg(qkv);
        Ok(self.push(
            out,
            Op::CausalAttention {
                qkv,
                window,
                heads,
                probs,
            },
            rg,
        ))
    }

    pub fn gather_rows(&mut self, a: Var, idx: Vec<usize>) -> Result<Var> {
        let va = self.value(a);
        if let Some(&bad) = idx.iter().find(|&&i| i >= va.nrows()) {
            return Err(Error::OutOfRange {
                index: bad,
                limit: va.nrows(),
            });
        }
        let out = va.select(Axis(0), &idx);
        let rg = self.rg(a);
        Ok(self.push(out, Op::GatherRows(a, idx), rg))
    }

    pub fn concat_cols(&mut self, a: Var, b: Var) -> Result<Var> {
        let (va, vb) = (self.value(a), self.value(b));
        if va.nrows() != vb.nrows() {
            return Err(Error::Shape(format!(
                "concat_cols {:?} | {:?}",
                va.dim(),
                vb.dim()
            )));
        }
        let out = std_layout(ndarray::concatenate(Axis(1), &[va.view(), vb.view()]).expect("rows match"));
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(out, Op::ConcatCols(a, b), rg))
    }

    /// Row-major reshape.
    pub fn reshape(&mut self, a: Var, rows: usize, cols: usize) -> Result<Var> {
        let va = self.value(a);
        if va.len() != rows * cols {
            return Err(Error::Shape(format!(
                "reshape {:?} to ({rows}, {cols})",
                va.dim()
            )));
        }
        let out = Mat::from_shape_vec((rows, cols), va.iter().copied().collect())
            .expect("reshape length checked");
        let rg = self.rg(a);
        Ok(self.push(out, Op::Reshape(a), rg))
    }

    pub fn column(&mut self, a: Var, j: usize) -> Result<Var> {
        let va = self.value(a);
        if j >= va.ncols() {
            return Err(Error::OutOfRange {
                index: j,
                limit: va.ncols(),
            });
        }
        let out = va.slice(s![.., j..j + 1]).to_owned();
        let rg = self.rg(a);
        Ok(self.push(out, Op::Column(a, j), rg))
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let out = Mat::from_elem((1, 1), self.value(a).sum());
        let rg = self.rg(a);
        self.push(out, Op::Sum(a), rg)
    }

    pub fn mean(&mut self, a: Var) -> Var {
        let va = self.value(a);
        let out = Mat::from_elem((1, 1), va.sum() / va.len() as f64);
        let rg = self.rg(a);
        self.push(out, Op::Mean(a), rg)
    }

    /// Scales each row to unit L2 norm; a zero row is a degenerate-input error.
    pub fn normalize_rows(&mut self, x: Var) -> Result<Var> {
        let vx = self.value(x);
        let mut norms = Vec::with_capacity(vx.nrows());
        let mut out = vx.clone();
        for (r, mut row) in out.rows_mut().into_iter().enumerate() {
            let n = row.dot(&row).sqrt();
            if n == 0.0 {
                return Err(Error::DegenerateInput(format!(
                    "zero-norm row {r} in cosine similarity"
                )));
            }
            row.mapv_inplace(|v| v / n);
            norms.push(n);
        }
        let rg = self.rg(x);
        Ok(self.push(out, Op::NormalizeRows { x, norms }, rg))
    }

    /// Mean softmax cross-entropy of `logits` rows against integer `labels`.
    pub fn cross_entropy(&mut self, logits: Var, labels: &[usize]) -> Result<Var> {
        let vl = self.value(logits);
        if vl.nrows() != labels.len() || vl.nrows() == 0 {
            return Err(Error::Shape(format!(
                "cross_entropy logits {:?} with {} labels",
                vl.dim(),
                labels.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= vl.ncols()) {
            return Err(Error::OutOfRange {
                index: bad,
                limit: vl.ncols(),
            });
        }
        let mut probs = vl.clone();
        let mut total = 0.0;
        for (mut row, &label) in probs.rows_mut().into_iter().zip(labels) {
            let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
            let z: f64 = row.iter().map(|v| (v - max).exp()).sum();
            let lse = max + z.ln();
            total += lse - row[label];
            row.mapv_inplace(|v| (v - lse).exp());
        }
        let out = Mat::from_elem((1, 1), total / labels.len() as f64);
        let rg = self.rg(logits);
        Ok(self.push(
            out,
            Op::CrossEntropy {
                logits,
                labels: labels.to_vec(),
                probs,
            },
            rg,
        ))
    }

    /// Pearson correlation (or a distance derived from it) between two column
    /// vectors. Constant inputs are rejected with a degenerate-variance error.
    pub fn pearson(&mut self, x: Var, y: Var, output: PearsonOutput) -> Result<Var> {
        let (vx, vy) = (self.value(x), self.value(y));
        if vx.ncols() != 1 || vy.ncols() != 1 || vx.nrows() != vy.nrows() || vx.nrows() < 3 {
            return Err(Error::Shape(format!(
                "pearson expects two equal-length columns of at least 3, got {:?} and {:?}",
                vx.dim(),
                vy.dim()
            )));
        }
        let xs: Vec<f64> = vx.iter().copied().collect();
        let ys: Vec<f64> = vy.iter().copied().collect();
        let m = centered_moments(&xs, &ys);
        if let Some(side) = degenerate_side(&m, &xs, &ys) {
            return Err(Error::DegenerateVariance {
                side,
                context: "pearson op".into(),
            });
        }
        let norm = (m.sxx * m.syy).sqrt();
        let rho = (m.sxy / norm).clamp(-1.0, 1.0);
        let (value, d_rho) = match output {
            PearsonOutput::Correlation => (rho, 1.0),
            PearsonOutput::Distance(DistanceForm::Squared) => {
                (standardized_distance(&xs, &ys, &m).powi(2), -0.5)
            }
            PearsonOutput::Distance(DistanceForm::Root) => {
                (standardized_distance(&xs, &ys, &m), distance_rho_derivative(rho))
            }
        };
        let mx = super::mean(&xs);
        let my = super::mean(&ys);
        let gx = xs
            .iter()
            .zip(&ys)
            .map(|(a, b)| d_rho * ((b - my) / norm - rho * (a - mx) / m.sxx))
            .collect();
        let gy = xs
            .iter()
            .zip(&ys)
            .map(|(a, b)| d_rho * ((a - mx) / norm - rho * (b - my) / m.syy))
            .collect();
        let rg = self.rg(x) || self.rg(y);
        Ok(self.push(
            Mat::from_elem((1, 1), value),
            Op::Pearson { x, y, gx, gy },
            rg,
        ))
    }

    /// Gradients of the `1 x 1` node `loss` with respect to every node.
    pub fn backward(&self, loss: Var) -> Gradients {
        let mut grads: Vec<Option<Mat>> = (0..self.nodes.len()).map(|_| None).collect();
        assert_eq!(self.value(loss).dim(), (1, 1), "backward from a non-scalar");
        grads[loss.0] = Some(Mat::ones((1, 1)));

        fn acc(grads: &mut [Option<Mat>], v: Var, g: Mat) {
            match &mut grads[v.0] {
                Some(existing) => *existing += &g,
                slot @ None => *slot = Some(g),
            }
        }

        for idx in (0..=loss.0).rev() {
            let node = &self.nodes[idx];
            if !node.requires_grad {
                continue;
            }
            let g = match grads[idx].take() {
                Some(g) => g,
                None => continue,
            };
            let need = |v: Var| self.nodes[v.0].requires_grad;
            match &node.op {
                Op::Leaf => {
                    grads[idx] = Some(g);
                    continue;
                }
                Op::MatMul(a, b) => {
                    if need(*a) {
                        acc(&mut grads, *a, g.dot(&self.value(*b).t()));
                    }
                    if need(*b) {
                        acc(&mut grads, *b, self.value(*a).t().dot(&g));
                    }
                }
                Op::MatMulT(a, b) => {
                    if need(*a) {
                        acc(&mut grads, *a, g.dot(self.value(*b)));
                    }
                    if need(*b) {
                        acc(&mut grads, *b, g.t().dot(self.value(*a)));
                    }
                }
                Op::Add(a, b) => {
                    if need(*a) {
                        acc(&mut grads, *a, g.clone());
                    }
                    if need(*b) {
                        acc(&mut grads, *b, g);
                    }
                }
                Op::Sub(a, b) => {
                    if need(*a) {
                        acc(&mut grads, *a, g.clone());
                    }
                    if need(*b) {
                        acc(&mut grads, *b, -g);
                    }
                }
                Op::Mul(a, b) => {
                    if need(*a) {
                        acc(&mut grads, *a, &g * self.value(*b));
                    }
                    if need(*b) {
                        acc(&mut grads, *b, &g * self.value(*a));
                    }
                }
                Op::AddRow(a, row) => {
                    if need(*row) {
                        acc(&mut grads, *row, g.sum_axis(Axis(0)).insert_axis(Axis(0)));
                    }
                    if need(*a) {
                        acc(&mut grads, *a, g);
                    }
                }
                Op::Affine(a, scale) => acc(&mut grads, *a, g * *scale),
                Op::Gelu(a) => {
                    let d = self.value(*a).mapv(gelu_grad);
                    acc(&mut grads, *a, g * d);
                }
                Op::Relu(a) => {
                    let d = self.value(*a).mapv(|x| if x > 0.0 { 1.0 } else { 0.0 });
                    acc(&mut grads, *a, g * d);
                }
                Op::Tanh(a) => {
                    let d = node.value.mapv(|t| 1.0 - t * t);
                    acc(&mut grads, *a, g * d);
                }
                Op::LayerNorm {
                    x,
                    gain,
                    bias,
                    xhat,
                    inv_std,
                } => {
                    if need(*bias) {
                        acc(&mut grads, *bias, g.sum_axis(Axis(0)).insert_axis(Axis(0)));
                    }
                    if need(*gain) {
                        let dg = (&g * xhat).sum_axis(Axis(0)).insert_axis(Axis(0));
                        acc(&mut grads, *gain, dg);
                    }
                    if need(*x) {
                        let dxhat = &g * self.value(*gain);
                        let d = xhat.ncols() as f64;
                        let mut dx = Mat::zeros(xhat.raw_dim());
                        for r in 0..xhat.nrows() {
                            let row_d = dxhat.row(r);
                            let row_h = xhat.row(r);
                            let m1 = row_d.sum() / d;
                            let m2 = row_d.dot(&row_h) / d;
                            for c in 0..xhat.ncols() {
                                dx[[r, c]] = inv_std[r] * (row_d[c] - m1 - row_h[c] * m2);
                            }
                        }
                        acc(&mut grads, *x, dx);
                    }
                }
                Op::CausalAttention {
                    qkv,
                    window,
                    heads,
                    probs,
                } => {
                    let dq = self.attention_backward(*qkv, *window, *heads, probs, &g);
                    acc(&mut grads, *qkv, dq);
                }
                Op::GatherRows(a, idxs) => {
                    let mut da = Mat::zeros(self.value(*a).raw_dim());
                    for (r, &src) in idxs.iter().enumerate() {
                        let mut row = da.row_mut(src);
                        row += &g.row(r);
                    }
                    acc(&mut grads, *a, da);
                }
                Op::ConcatCols(a, b) => {
                    let ca = self.value(*a).ncols();
                    if need(*a) {
                        acc(&mut grads, *a, g.slice(s![.., ..ca]).to_owned());
                    }
                    if need(*b) {
                        acc(&mut grads, *b, g.slice(s![.., ca..]).to_owned());
                    }
                }
                Op::Reshape(a) => {
                    let dim = self.value(*a).raw_dim();
                    let data: Vec<f64> = g.iter().copied().collect();
                    acc(
                        &mut grads,
                        *a,
                        Mat::from_shape_vec(dim, data).expect("reshape back"),
                    );
                }
                Op::Column(a, j) => {
                    let mut da = Mat::zeros(self.value(*a).raw_dim());
                    da.slice_mut(s![.., *j..*j + 1]).assign(&g);
                    acc(&mut grads, *a, da);
                }
                Op::Sum(a) => {
                    let da = Mat::from_elem(self.value(*a).raw_dim(), g[[0, 0]]);
                    acc(&mut grads, *a, da);
                }
                Op::Mean(a) => {
                    let va = self.value(*a);
                    let da = Mat::from_elem(va.raw_dim(), g[[0, 0]] / va.len() as f64);
                    acc(&mut grads, *a, da);
                }
                Op::NormalizeRows { x, norms } => {
                    let y = &node.value;
                    let mut dx = g.clone();
                    for r in 0..y.nrows() {
                        let proj = y.row(r).dot(&g.row(r));
                        for c in 0..y.ncols() {
                            dx[[r, c]] = (g[[r, c]] - y[[r, c]] * proj) / norms[r];
                        }
                    }
                    acc(&mut grads, *x, dx);
                }
                Op::CrossEntropy {
                    logits,
                    labels,
                    probs,
                } => {
                    let scale = g[[0, 0]] / labels.len() as f64;
                    let mut dl = probs.clone();
                    for (r, &label) in labels.iter().enumerate() {
                        dl[[r, label]] -= 1.0;
                    }
                    acc(&mut grads, *logits, dl * scale);
                }
                Op::Pearson { x, y, gx, gy } => {
                    let s = g[[0, 0]];
                    if need(*x) {
                        let dx = Mat::from_shape_fn((gx.len(), 1), |(r, _)| s * gx[r]);
                        acc(&mut grads, *x, dx);
                    }
                    if need(*y) {
                        let dy = Mat::from_shape_fn((gy.len(), 1), |(r, _)| s * gy[r]);
                        acc(&mut grads, *y, dy);
                    }
                }
            }
        }
        Gradients { grads }
    }

    fn attention_backward(
        &self,
        qkv: Var,
        window: usize,
        heads: usize,
        probs: &[f64],
        g: &Mat,
    ) -> Mat {
        let v = self.value(qkv);
        let (rows, cols) = v.dim();
        let d = cols / 3;
        let dh = d / heads;
        let scale = 1.0 / (dh as f64).sqrt();
        let blocks = rows / window;
        let src = v.as_slice().expect("standard layout");
        let gs = std_layout(g.clone());
        let go = gs.as_slice().expect("standard layout");
        let mut out = vec![0.0; rows * cols];
        let mut dp = vec![0.0; window];
        for n in 0..blocks {
            for h in 0..heads {
                let qo = h * dh;
                let ko = d + h * dh;
                let vo = 2 * d + h * dh;
                for i in 0..window {
                    let ri = (n * window + i) * cols;
                    let gi = (n * window + i) * d + h * dh;
                    let pbase = ((n * heads + h) * window + i) * window;
                    let mut weighted = 0.0;
                    for j in 0..=i {
                        let rj = (n * window + j) * cols;
                        let p = probs[pbase + j];
                        let mut acc = 0.0;
                        for c in 0..dh {
                            acc += go[gi + c] * src[rj + vo + c];
                            out[rj + vo + c] += p * go[gi + c];
                        }
                        dp[j] = acc;
                        weighted += p * acc;
                    }
                    for j in 0..=i {
                        let rj = (n * window + j) * cols;
                        let ds = probs[pbase + j] * (dp[j] - weighted) * scale;
                        for c in 0..dh {
                            out[ri + qo + c] += ds * src[rj + ko + c];
                            out[rj + ko + c] += ds * src[ri + qo + c];
                        }
                    }
                }
            }
        }
        Mat::from_shape_vec((rows, cols), out).expect("attention grad shape")
    }
}
