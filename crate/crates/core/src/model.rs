//! Subtask-conditioned reward model `R(s_t; U_i) = f(v_t, e_i)`.
//!
//! A window of the `K` most recent observations is encoded frame by frame,
//! given per-slot positional embeddings and passed through a small causal
//! transformer; `v_t` is the output at the final slot. Subtask instructions
//! are bags of tokens whose mean embedding goes through a shallow MLP to give
//! `e_i`. The head is an MLP on `[v_t, e_i]`.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::{s, Array2};
use serde::{Deserialize, Serialize};

use crate::data::Window;
use crate::env::SubtaskId;
use crate::error::{Error, Result};
use crate::numerics::tape::{Graph, Mat, Var};
use crate::numerics::RngStream;

pub const CHECKPOINT_VERSION: u64 = 1;

/// Windows evaluated per graph when no gradients are needed.
const EVAL_CHUNK: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub obs_dim: usize,
    /// Window length `K`.
    pub window: usize,
    pub encoder_hidden: usize,
    /// Width of frame encodings, aggregator outputs and subtask embeddings.
    pub embed_dim: usize,
    pub layers: usize,
    pub heads: usize,
    pub ffn_hidden: usize,
    pub token_dim: usize,
    pub subtask_hidden: usize,
    pub head_hidden: usize,
    pub vocab_size: usize,
    pub num_subtasks: usize,
    /// `false` replaces the causal transformer by a linear map of the
    /// concatenated frame encodings.
    pub use_aggregator: bool,
    /// Feed all `K` slot outputs to the head instead of the final one.
    pub head_all_slots: bool,
}

impl ModelConfig {
    pub fn new(obs_dim: usize, vocab_size: usize, num_subtasks: usize) -> Self {
        Self {
            obs_dim,
            window: 4,
            encoder_hidden: 64,
            embed_dim: 64,
            layers: 2,
            heads: 4,
            ffn_hidden: 128,
            token_dim: 32,
            subtask_hidden: 64,
            head_hidden: 64,
            vocab_size,
            num_subtasks,
            use_aggregator: true,
            head_all_slots: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let dims = [
            ("obs_dim", self.obs_dim),
            ("window", self.window),
            ("encoder_hidden", self.encoder_hidden),
            ("embed_dim", self.embed_dim),
            ("heads", self.heads),
            ("ffn_hidden", self.ffn_hidden),
            ("token_dim", self.token_dim),
            ("subtask_hidden", self.subtask_hidden),
            ("head_hidden", self.head_hidden),
            ("vocab_size", self.vocab_size),
            ("num_subtasks", self.num_subtasks),
        ];
        if let Some((name, _)) = dims.iter().find(|(_, v)| *v == 0) {
            return Err(Error::Config(format!("{name} must be >= 1")));
        }
        if self.use_aggregator && (self.layers == 0 || self.embed_dim % self.heads != 0) {
            return Err(Error::Config(format!(
                "aggregator needs >= 1 layer and embed_dim {} divisible by heads {}",
                self.embed_dim, self.heads
            )));
        }
        Ok(())
    }

    fn head_input(&self) -> usize {
        let v = if self.head_all_slots {
            self.window * self.embed_dim
        } else {
            self.embed_dim
        };
        v + self.embed_dim
    }

    /// Parameter names and shapes in storage order.
    pub fn param_shapes(&self) -> Vec<(String, (usize, usize))> {
        let d = self.embed_dim;
        let mut out: Vec<(String, (usize, usize))> = Vec::new();
        let mut add = |name: String, shape: (usize, usize)| out.push((name, shape));
        add("enc.w1".into(), (self.obs_dim, self.encoder_hidden));
        add("enc.b1".into(), (1, self.encoder_hidden));
        add("enc.w2".into(), (self.encoder_hidden, d));
        add("enc.b2".into(), (1, d));
        if self.use_aggregator {
            add("pos".into(), (self.window, d));
            for l in 0..self.layers {
                add(format!("blk{l}.ln1.g"), (1, d));
                add(format!("blk{l}.ln1.b"), (1, d));
                add(format!("blk{l}.attn.w_qkv"), (d, 3 * d));
                add(format!("blk{l}.attn.b_qkv"), (1, 3 * d));
                add(format!("blk{l}.attn.w_o"), (d, d));
                add(format!("blk{l}.attn.b_o"), (1, d));
                add(format!("blk{l}.ln2.g"), (1, d));
                add(format!("blk{l}.ln2.b"), (1, d));
                add(format!("blk{l}.ffn.w1"), (d, self.ffn_hidden));
                add(format!("blk{l}.ffn.b1"), (1, self.ffn_hidden));
                add(format!("blk{l}.ffn.w2"), (self.ffn_hidden, d));
                add(format!("blk{l}.ffn.b2"), (1, d));
            }
            add("agg.ln.g".into(), (1, d));
            add("agg.ln.b".into(), (1, d));
        } else {
            add("concat.w".into(), (self.window * d, d));
            add("concat.b".into(), (1, d));
        }
        add("tok.emb".into(), (self.vocab_size, self.token_dim));
        add("sub.w1".into(), (self.token_dim, self.subtask_hidden));
        add("sub.b1".into(), (1, self.subtask_hidden));
        add("sub.w2".into(), (self.subtask_hidden, d));
        add("sub.b2".into(), (1, d));
        add("head.w1".into(), (self.head_input(), self.head_hidden));
        add("head.b1".into(), (1, self.head_hidden));
        add("head.w2".into(), (self.head_hidden, 1));
        add("head.b2".into(), (1, 1));
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RewardModel {
    config: ModelConfig,
    vocab: Vec<String>,
    names: Vec<String>,
    params: Vec<Mat>,
    index: HashMap<String, usize>,
}

/// Parameters of a [`RewardModel`] registered on a [`Graph`].
pub struct Bound {
    pub vars: Vec<Var>,
}

/// Rewards and similarities of a set of windows against every subtask.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    /// `rewards[[n, i]] = R(window_n; U_i)`.
    pub rewards: Mat,
    /// `sims[[n, i]] = cos(v_n, e_i)`.
    pub sims: Mat,
}

impl Evaluation {
    pub fn len(&self) -> usize {
        self.rewards.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.nrows() == 0
    }

    pub fn infer(&self, row: usize, eta: f64) -> (SubtaskId, f64) {
        let sims: Vec<f64> = self.sims.row(row).to_vec();
        infer_from_similarities(&sims, eta)
    }
}

/// Margin-adjusted argmax `argmax_i sim_i + eta * (m - 1 - i)`, ties to the
/// lowest index. Returns the index and its raw similarity.
pub fn infer_from_similarities(sims: &[f64], eta: f64) -> (SubtaskId, f64) {
    let m = sims.len();
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (i, &s) in sims.iter().enumerate() {
        let score = s + eta * (m - 1 - i) as f64;
        if score > best_score {
            best = i;
            best_score = score;
        }
    }
    (best, sims[best])
}

impl RewardModel {
    /// Fresh parameters: weights `U(-1/sqrt(fan_in), 1/sqrt(fan_in))` with the
    /// row count as fan-in, biases zero, layer-norm gains one.
    pub fn init(config: ModelConfig, vocab: Vec<String>, rng: &mut RngStream) -> Result<Self> {
        config.validate()?;
        if vocab.len() != config.vocab_size {
            return Err(Error::Config(format!(
                "vocabulary of {} tokens for vocab_size {}",
                vocab.len(),
                config.vocab_size
            )));
        }
        let mut names = Vec::new();
        let mut params = Vec::new();
        for (name, (r, c)) in config.param_shapes() {
            let m = if name.ends_with(".g") {
                Mat::ones((r, c))
            } else if r == 1 && name != "pos" {
                Mat::zeros((r, c))
            } else {
                let bound = 1.0 / (r as f64).sqrt();
                Mat::from_shape_simple_fn((r, c), || rng.uniform_range(-bound, bound))
            };
            names.push(name);
            params.push(m);
        }
        Ok(Self::assemble(config, vocab, names, params))
    }

    fn assemble(config: ModelConfig, vocab: Vec<String>, names: Vec<String>, params: Vec<Mat>) -> Self {
        let index = names.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
        Self {
            config,
            vocab,
            names,
            params,
            index,
        }
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn param_names(&self) -> &[String] {
        &self.names
    }

    pub fn params(&self) -> &[Mat] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [Mat] {
        &mut self.params
    }

    pub fn param(&self, name: &str) -> Option<&Mat> {
        self.index.get(name).map(|&i| &self.params[i])
    }

    pub fn param_mut(&mut self, name: &str) -> Option<&mut Mat> {
        self.index.get(name).map(|&i| &mut self.params[i])
    }

    pub fn num_parameters(&self) -> usize {
        self.params.iter().map(|p| p.len()).sum()
    }

    pub fn flat_params(&self) -> Vec<f64> {
        self.params.iter().flat_map(|p| p.iter().copied()).collect()
    }

    pub fn set_flat_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.num_parameters() {
            return Err(Error::Shape(format!(
                "{} values for {} parameters",
                flat.len(),
                self.num_parameters()
            )));
        }
        let mut off = 0;
        for p in &mut self.params {
            for (dst, src) in p.iter_mut().zip(&flat[off..]) {
                *dst = *src;
            }
            off += p.len();
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|p| p.iter().all(|v| v.is_finite()))
    }

    /// Registers every parameter on `g`, as trainable leaves or constants.
    pub fn bind(&self, g: &mut Graph, trainable: bool) -> Bound {
        let vars = self
            .params
            .iter()
            .map(|p| {
                if trainable {
                    g.param(p.clone())
                } else {
                    g.constant(p.clone())
                }
            })
            .collect();
        Bound { vars }
    }

    fn v(&self, b: &Bound, name: &str) -> Var {
        b.vars[self.index[name]]
    }

    /// Token-bag averaging matrix `[m x vocab]` for a list of instructions.
    pub fn bag_matrix(&self, instructions: &[Vec<String>]) -> Result<Mat> {
        let mut bag = Mat::zeros((instructions.len(), self.vocab.len()));
        for (i, tokens) in instructions.iter().enumerate() {
            if tokens.is_empty() {
                return Err(Error::Config(format!("instruction {i} has no tokens")));
            }
            let w = 1.0 / tokens.len() as f64;
            for tok in tokens {
                let j = self
                    .vocab
                    .iter()
                    .position(|v| v == tok)
                    .ok_or_else(|| Error::Vocabulary(tok.clone()))?;
                bag[[i, j]] += w;
            }
        }
        Ok(bag)
    }

    /// Stacks the frames of `windows` into `[N*K x obs_dim]`.
    pub fn window_matrix(&self, windows: &[Window]) -> Result<Mat> {
        let k = self.config.window;
        let dim = self.config.obs_dim;
        let mut out = Mat::zeros((windows.len() * k, dim));
        for (n, w) in windows.iter().enumerate() {
            if w.frames.len() != k {
                return Err(Error::Shape(format!(
                    "window of {} frames, model expects {k}",
                    w.frames.len()
                )));
            }
            for (slot, frame) in w.frames.iter().enumerate() {
                if frame.len() != dim {
                    return Err(Error::Shape(format!(
                        "observation of width {}, model expects {dim}",
                        frame.len()
                    )));
                }
                out.row_mut(n * k + slot)
                    .assign(&ndarray::ArrayView1::from(frame.as_slice()));
            }
        }
        Ok(out)
    }

    fn linear(&self, g: &mut Graph, b: &Bound, x: Var, w: &str, bias: &str) -> Result<Var> {
        let h = g.matmul(x, self.v(b, w))?;
        g.add_row(h, self.v(b, bias))
    }

    /// Slot outputs `[N*K x d]` and final-slot features `[N x d]`.
    pub fn encode(&self, g: &mut Graph, b: &Bound, obs: Var) -> Result<(Var, Var)> {
        let k = self.config.window;
        let d = self.config.embed_dim;
        let rows = g.value(obs).nrows();
        if rows % k != 0 {
            return Err(Error::Shape(format!("{rows} frame rows for window {k}")));
        }
        let n = rows / k;
        let h = self.linear(g, b, obs, "enc.w1", "enc.b1")?;
        let h = g.gelu(h);
        let enc = self.linear(g, b, h, "enc.w2", "enc.b2")?;
        if !self.config.use_aggregator {
            let flat = g.reshape(enc, n, k * d)?;
            let v = self.linear(g, b, flat, "concat.w", "concat.b")?;
            return Ok((enc, v));
        }
        let pos_idx: Vec<usize> = (0..rows).map(|r| r % k).collect();
        let pos = g.gather_rows(self.v(b, "pos"), pos_idx)?;
        let mut x = g.add(enc, pos)?;
        for l in 0..self.config.layers {
            let p = |s: &str| format!("blk{l}.{s}");
            let h = g.layer_norm(x, self.v(b, &p("ln1.g")), self.v(b, &p("ln1.b")))?;
            let qkv = self.linear(g, b, h, &p("attn.w_qkv"), &p("attn.b_qkv"))?;
            let att = g.causal_attention(qkv, k, self.config.heads)?;
            let att = self.linear(g, b, att, &p("attn.w_o"), &p("attn.b_o"))?;
            x = g.add(x, att)?;
            let h = g.layer_norm(x, self.v(b, &p("ln2.g")), self.v(b, &p("ln2.b")))?;
            let h = self.linear(g, b, h, &p("ffn.w1"), &p("ffn.b1"))?;
            let h = g.gelu(h);
            let h = self.linear(g, b, h, &p("ffn.w2"), &p("ffn.b2"))?;
            x = g.add(x, h)?;
        }
        let slots = g.layer_norm(x, self.v(b, "agg.ln.g"), self.v(b, "agg.ln.b"))?;
        let last: Vec<usize> = (0..n).map(|i| i * k + k - 1).collect();
        let v = g.gather_rows(slots, last)?;
        Ok((slots, v))
    }

    /// Head features per window: the final slot, or all slots concatenated.
    pub fn head_features(&self, g: &mut Graph, slots: Var, v: Var) -> Result<Var> {
        if self.config.head_all_slots {
            let n = g.value(v).nrows();
            g.reshape(slots, n, self.config.window * self.config.embed_dim)
        } else {
            Ok(v)
        }
    }

    /// Subtask embeddings `[m x d]` from a token-bag matrix.
    pub fn embed_subtasks(&self, g: &mut Graph, b: &Bound, bag: &Mat) -> Result<Var> {
        let bag = g.constant(bag.clone());
        let t = g.matmul(bag, self.v(b, "tok.emb"))?;
        let h = self.linear(g, b, t, "sub.w1", "sub.b1")?;
        let h = g.gelu(h);
        self.linear(g, b, h, "sub.w2", "sub.b2")
    }

    /// Rewards `[P x 1]` for `(window, subtask)` index pairs.
    pub fn head_pairs(
        &self,
        g: &mut Graph,
        b: &Bound,
        features: Var,
        subtasks: Var,
        pairs: &[(usize, usize)],
    ) -> Result<Var> {
        let f = g.gather_rows(features, pairs.iter().map(|p| p.0).collect())?;
        let e = g.gather_rows(subtasks, pairs.iter().map(|p| p.1).collect())?;
        let x = g.concat_cols(f, e)?;
        let h = self.linear(g, b, x, "head.w1", "head.b1")?;
        let h = g.gelu(h);
        self.linear(g, b, h, "head.w2", "head.b2")
    }

    /// Cosine similarities `[N x m]` between window and subtask embeddings.
    pub fn similarities(&self, g: &mut Graph, v: Var, subtasks: Var) -> Result<Var> {
        let vn = g.normalize_rows(v)?;
        let en = g.normalize_rows(subtasks)?;
        g.matmul_t(vn, en)
    }

    /// Rewards and similarities of every window against every instruction.
    pub fn evaluate(&self, windows: &[Window], instructions: &[Vec<String>]) -> Result<Evaluation> {
        let m = instructions.len();
        let bag = self.bag_matrix(instructions)?;
        let mut rewards = Mat::zeros((windows.len(), m));
        let mut sims = Mat::zeros((windows.len(), m));
        for (c, chunk) in windows.chunks(EVAL_CHUNK).enumerate() {
            let mut g = Graph::new();
            let b = self.bind(&mut g, false);
            let obs = g.constant(self.window_matrix(chunk)?);
            let (slots, v) = self.encode(&mut g, &b, obs)?;
            let feats = self.head_features(&mut g, slots, v)?;
            let e = self.embed_subtasks(&mut g, &b, &bag)?;
            let pairs: Vec<(usize, usize)> = (0..chunk.len())
                .flat_map(|n| (0..m).map(move |i| (n, i)))
                .collect();
            let r = self.head_pairs(&mut g, &b, feats, e, &pairs)?;
            let sim = self.similarities(&mut g, v, e)?;
            let start = c * EVAL_CHUNK;
            let rv = g.value(r);
            for n in 0..chunk.len() {
                for i in 0..m {
                    rewards[[start + n, i]] = rv[[n * m + i, 0]];
                }
            }
            sims.slice_mut(s![start..start + chunk.len(), ..])
                .assign(g.value(sim));
        }
        Ok(Evaluation { rewards, sims })
    }

    /// Per-slot embeddings of one window, oldest slot first.
    pub fn encode_window(&self, window: &Window) -> Result<Vec<Vec<f64>>> {
        let mut g = Graph::new();
        let b = self.bind(&mut g, false);
        let obs = g.constant(self.window_matrix(std::slice::from_ref(window))?);
        let (slots, _) = self.encode(&mut g, &b, obs)?;
        Ok(g.value(slots).rows().into_iter().map(|r| r.to_vec()).collect())
    }

    /// Final-slot embedding `v_t` of one window.
    pub fn window_embedding(&self, window: &Window) -> Result<Vec<f64>> {
        let mut g = Graph::new();
        let b = self.bind(&mut g, false);
        let obs = g.constant(self.window_matrix(std::slice::from_ref(window))?);
        let (_, v) = self.encode(&mut g, &b, obs)?;
        Ok(g.value(v).row(0).to_vec())
    }

    pub fn subtask_embedding(&self, tokens: &[String]) -> Result<Vec<f64>> {
        let bag = self.bag_matrix(std::slice::from_ref(&tokens.to_vec()))?;
        let mut g = Graph::new();
        let b = self.bind(&mut g, false);
        let e = self.embed_subtasks(&mut g, &b, &bag)?;
        Ok(g.value(e).row(0).to_vec())
    }

    pub fn reward(&self, window: &Window, tokens: &[String]) -> Result<f64> {
        let eval = self.evaluate(std::slice::from_ref(window), &[tokens.to_vec()])?;
        Ok(eval.rewards[[0, 0]])
    }

    pub fn infer_subtask(
        &self,
        window: &Window,
        instructions: &[Vec<String>],
        eta: f64,
    ) -> Result<(SubtaskId, f64)> {
        if instructions.is_empty() {
            return Err(Error::Config("no subtask instructions".into()));
        }
        let eval = self.evaluate(std::slice::from_ref(window), instructions)?;
        Ok(eval.infer(0, eta))
    }

    /// Accumulates the gradient of `loss` into per-parameter matrices.
    pub fn gradients(&self, g: &Graph, b: &Bound, loss: Var) -> Vec<Mat> {
        let mut grads = g.backward(loss);
        b.vars.iter().map(|&v| grads.wrt(g, v)).collect()
    }
}

/// A reward model together with the statistics computed for deployment.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: RewardModel,
    pub normalize_factor: Option<f64>,
    pub thresholds: Option<Vec<f64>>,
    pub instructions: Option<Vec<Vec<String>>>,
}

#[derive(Serialize, Deserialize)]
struct CheckpointHeader {
    version: u64,
    #[serde(flatten)]
    config: ModelConfig,
    vocab: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    normalize_factor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    thresholds: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    instructions: Option<Vec<Vec<String>>>,
}

#[derive(Serialize, Deserialize)]
struct ParamRecord {
    name: String,
    shape: [usize; 2],
    data: Vec<f64>,
}

impl Checkpoint {
    pub fn new(model: RewardModel) -> Self {
        Self {
            model,
            normalize_factor: None,
            thresholds: None,
            instructions: None,
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let io = |e| Error::io(path, e);
        let mut w = BufWriter::new(File::create(path).map_err(io)?);
        let header = CheckpointHeader {
            version: CHECKPOINT_VERSION,
            config: self.model.config.clone(),
            vocab: self.model.vocab.clone(),
            normalize_factor: self.normalize_factor,
            thresholds: self.thresholds.clone(),
            instructions: self.instructions.clone(),
        };
        serde_json::to_writer(&mut w, &header)?;
        writeln!(w).map_err(io)?;
        for (name, p) in self.model.names.iter().zip(&self.model.params) {
            let rec = ParamRecord {
                name: name.clone(),
                shape: [p.nrows(), p.ncols()],
                data: p.iter().copied().collect(),
            };
            serde_json::to_writer(&mut w, &rec)?;
            writeln!(w).map_err(io)?;
        }
        w.flush().map_err(io)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let parse_err = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut lines = BufReader::new(file).lines();
        let first = match lines.next() {
            Some(l) => l.map_err(|e| Error::io(path, e))?,
            None => return Err(parse_err(1, "empty checkpoint".into())),
        };
        let header: CheckpointHeader =
            serde_json::from_str(&first).map_err(|e| parse_err(1, e.to_string()))?;
        if header.version != CHECKPOINT_VERSION {
            return Err(Error::Version {
                found: header.version,
                expected: CHECKPOINT_VERSION,
            });
        }
        header.config.validate()?;
        if header.vocab.len() != header.config.vocab_size {
            return Err(parse_err(1, "vocabulary length does not match vocab_size".into()));
        }
        let expected = header.config.param_shapes();
        let mut names = Vec::with_capacity(expected.len());
        let mut params = Vec::with_capacity(expected.len());
        let mut records = lines.enumerate().filter_map(|(i, l)| match l {
            Ok(l) if l.trim().is_empty() => None,
            other => Some((i + 2, other)),
        });
        for (name, (r, c)) in &expected {
            let (line, text) = records
                .next()
                .ok_or_else(|| parse_err(0, format!("missing parameter {name}")))?;
            let text = text.map_err(|e| Error::io(path, e))?;
            let rec: ParamRecord =
                serde_json::from_str(&text).map_err(|e| parse_err(line, e.to_string()))?;
            if &rec.name != name || rec.shape != [*r, *c] || rec.data.len() != r * c {
                return Err(parse_err(
                    line,
                    format!(
                        "expected {name} {:?}, found {} {:?} with {} values",
                        (r, c),
                        rec.name,
                        rec.shape,
                        rec.data.len()
                    ),
                ));
            }
            if rec.data.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("parameter {name}")));
            }
            names.push(rec.name);
            params.push(Array2::from_shape_vec((*r, *c), rec.data).expect("shape checked"));
        }
        if let Some((line, _)) = records.next() {
            return Err(parse_err(line, "unexpected trailing parameter".into()));
        }
        Ok(Self {
            model: RewardModel::assemble(header.config, header.vocab, names, params),
            normalize_factor: header.normalize_factor,
            thresholds: header.thresholds,
            instructions: header.instructions,
        })
    }
}
