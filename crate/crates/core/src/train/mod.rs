//! Reward-model objectives, optimizer and training loop.
//!
//! The objective is `L = L_epic + L_reg + L_cont`: an EPIC distance between
//! the model and the subtask segmentation `psi`, a margin hinge asking the
//! reward to rise along expert trajectories, and a temperature-scaled
//! contrastive loss aligning window embeddings with their labelled subtask.

mod metrics;
mod refine;

pub use metrics::{
    compute_thresholds, epic_to_psi, nearest_rank_percentile, normalize_factor, progressive_fraction,
    subtask_accuracy, EpicReport,
};
pub use refine::{iterate_refinement, RefinementConfig, RefinementOutcome};

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{window_at, SegmentedDataset, TimestepIndex, Window};
use crate::epic::DistanceForm;
use crate::error::{Error, Result};
use crate::model::{Bound, ModelConfig, RewardModel};
use crate::numerics::tape::{Graph, Mat, PearsonOutput, Var};
use crate::numerics::RngStream;

/// How the EPIC term pairs reward conditionings with the segmentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpicVariant {
    /// Every conditioning `U_i` is compared with `psi`; the mean is taken.
    Literal,
    /// Only `R(s; U_psi(s))` is compared with `psi`.
    LabelConditioned,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    pub batch_size: usize,
    pub training_steps: usize,
    pub warmup_steps: usize,
    /// Margin of the progress hinge.
    pub epsilon: f64,
    /// Subtask-inference margin.
    pub eta: f64,
    pub j_set: Vec<usize>,
    pub temperature: f64,
    pub num_canonical: usize,
    pub distance_form: DistanceForm,
    pub epic_variant: EpicVariant,
    pub use_epic: bool,
    pub use_reg: bool,
    pub use_cont: bool,
    pub weight_epic: f64,
    pub weight_reg: f64,
    pub weight_cont: f64,
    /// Restrict the contrastive term to expert data.
    pub cont_expert_only: bool,
    /// Standard deviation of Gaussian observation noise during training.
    pub obs_noise: f64,
    pub refinement_iterations: usize,
    pub finetune_steps: usize,
    pub finetune_warmup: usize,
    pub window: usize,
    pub embed_dim: usize,
    pub layers: usize,
    pub heads: usize,
    pub use_aggregator: bool,
    pub head_all_slots: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-4,
            weight_decay: 2e-2,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            batch_size: 32,
            training_steps: 5000,
            warmup_steps: 500,
            epsilon: 0.05,
            eta: 0.01,
            j_set: vec![1, 5, 10],
            temperature: 0.1,
            num_canonical: 8,
            distance_form: DistanceForm::Squared,
            epic_variant: EpicVariant::Literal,
            use_epic: true,
            use_reg: true,
            use_cont: true,
            weight_epic: 1.0,
            weight_reg: 1.0,
            weight_cont: 1.0,
            cont_expert_only: false,
            obs_noise: 0.0,
            refinement_iterations: 2,
            finetune_steps: 1000,
            finetune_warmup: 100,
            window: 4,
            embed_dim: 64,
            layers: 2,
            heads: 4,
            use_aggregator: true,
            head_all_slots: false,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: Self = toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("TrainConfig serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("learning_rate", self.learning_rate),
            ("temperature", self.temperature),
            ("adam_eps", self.adam_eps),
        ];
        if let Some((name, v)) = positive.iter().find(|(_, v)| !(*v > 0.0)) {
            return Err(Error::Config(format!("{name} must be > 0, got {v}")));
        }
        let nonneg = [
            ("weight_decay", self.weight_decay),
            ("epsilon", self.epsilon),
            ("eta", self.eta),
            ("obs_noise", self.obs_noise),
            ("weight_epic", self.weight_epic),
            ("weight_reg", self.weight_reg),
            ("weight_cont", self.weight_cont),
        ];
        if let Some((name, v)) = nonneg.iter().find(|(_, v)| !(*v >= 0.0)) {
            return Err(Error::Config(format!("{name} must be >= 0, got {v}")));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::Config("adam betas must lie in [0, 1)".into()));
        }
        if self.batch_size < 3 {
            return Err(Error::Config("batch_size must be >= 3".into()));
        }
        if self.num_canonical == 0 || self.window == 0 {
            return Err(Error::Config("num_canonical and window must be >= 1".into()));
        }
        if self.j_set.is_empty() || self.j_set.contains(&0) {
            return Err(Error::Config("j_set must be non-empty positive integers".into()));
        }
        Ok(())
    }

    pub fn model_config(&self, obs_dim: usize, vocab_size: usize, num_subtasks: usize) -> ModelConfig {
        ModelConfig {
            window: self.window,
            embed_dim: self.embed_dim,
            layers: self.layers,
            heads: self.heads,
            use_aggregator: self.use_aggregator,
            head_all_slots: self.head_all_slots,
            ..ModelConfig::new(obs_dim, vocab_size, num_subtasks)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub epic: f64,
    pub reg: f64,
    pub cont: f64,
    pub total: f64,
}

/// Coverage states with segmentation targets, plus a shared pool from which
/// each state's canonical samples are drawn.
#[derive(Debug, Clone)]
pub struct EpicBatch {
    pub windows: Vec<Window>,
    pub labels: Vec<usize>,
    pub targets: Vec<f64>,
    pub pool: Vec<Window>,
    pub pool_labels: Vec<usize>,
    pub pool_targets: Vec<f64>,
    /// Pool indices of the canonical samples of each coverage state.
    pub canonical: Vec<Vec<usize>>,
}

impl EpicBatch {
    /// Replaces every target `y` by `f(y)`, e.g. a positive affine map.
    pub fn map_targets(&mut self, f: impl Fn(f64) -> f64) {
        self.targets.iter_mut().for_each(|y| *y = f(*y));
        self.pool_targets.iter_mut().for_each(|y| *y = f(*y));
    }

    fn canonical_matrix(&self) -> Mat {
        let mut a = Mat::zeros((self.windows.len(), self.pool.len()));
        for (n, idx) in self.canonical.iter().enumerate() {
            let w = 1.0 / idx.len() as f64;
            for &j in idx {
                a[[n, j]] += w;
            }
        }
        a
    }
}

/// Expert pairs `(s_t, s_{t+j})` with their segmentation labels.
#[derive(Debug, Clone)]
pub struct RegBatch {
    pub earlier: Vec<Window>,
    pub earlier_labels: Vec<usize>,
    pub later: Vec<Window>,
    pub later_labels: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct ContBatch {
    pub windows: Vec<Window>,
    pub labels: Vec<usize>,
}

#[derive(Debug, Clone, Default)]
pub struct Batches {
    pub epic: Option<EpicBatch>,
    pub reg: Option<RegBatch>,
    pub cont: Option<ContBatch>,
}

/// Draws the minibatches for one optimization step.
pub struct BatchSampler<'a> {
    ds: &'a SegmentedDataset,
    index: TimestepIndex,
    expert_trajs: Vec<usize>,
    cfg: &'a TrainConfig,
}

impl<'a> BatchSampler<'a> {
    pub fn new(ds: &'a SegmentedDataset, cfg: &'a TrainConfig) -> Result<Self> {
        ds.validate()?;
        let index = TimestepIndex::new(ds);
        if index.len() < cfg.batch_size {
            return Err(Error::EmptyDataset(format!(
                "{} timesteps for batch size {}",
                index.len(),
                cfg.batch_size
            )));
        }
        let min_j = *cfg.j_set.iter().min().expect("validated non-empty");
        let expert_trajs: Vec<usize> = ds
            .trajectories
            .iter()
            .enumerate()
            .filter(|(_, t)| t.expert && t.len() > min_j)
            .map(|(i, _)| i)
            .collect();
        if cfg.use_reg && expert_trajs.is_empty() {
            return Err(Error::EmptyDataset(
                "no expert trajectory is long enough for the progress term".into(),
            ));
        }
        let labels: std::collections::BTreeSet<usize> =
            ds.trajectories.iter().flat_map(|t| t.labels()).collect();
        if cfg.use_epic && labels.len() < 2 {
            return Err(Error::DegenerateVariance {
                side: crate::error::Side::Right,
                context: "dataset has a single subtask label; the segmentation target is constant".into(),
            });
        }
        Ok(Self {
            ds,
            index,
            expert_trajs,
            cfg,
        })
    }

    fn window(&self, traj: usize, t: usize, rng: &mut RngStream) -> Window {
        let mut w = window_at(&self.ds.trajectories[traj], t, self.cfg.window);
        if self.cfg.obs_noise > 0.0 {
            for f in &mut w.frames {
                for x in f.iter_mut() {
                    *x += self.cfg.obs_noise * rng.normal();
                }
            }
        }
        w
    }

    fn label(&self, traj: usize, t: usize) -> usize {
        self.ds.trajectories[traj].steps[t].subtask
    }

    fn draw(&self, n: usize, expert_only: bool, rng: &mut RngStream) -> (Vec<Window>, Vec<usize>) {
        (0..n)
            .map(|_| {
                let (ti, t) = self.index.sample(rng, expert_only);
                (self.window(ti, t, rng), self.label(ti, t))
            })
            .unzip()
    }

    pub fn epic(&self, rng: &mut RngStream) -> EpicBatch {
        let b = self.cfg.batch_size;
        let (windows, labels) = self.draw(b, false, rng);
        let (pool, pool_labels) = self.draw(b, false, rng);
        let canonical = (0..b)
            .map(|_| (0..self.cfg.num_canonical).map(|_| rng.below(b)).collect())
            .collect();
        EpicBatch {
            targets: labels.iter().map(|&l| l as f64).collect(),
            pool_targets: pool_labels.iter().map(|&l| l as f64).collect(),
            windows,
            labels,
            pool,
            pool_labels,
            canonical,
        }
    }

    pub fn reg(&self, rng: &mut RngStream) -> RegBatch {
        let mut out = RegBatch {
            earlier: Vec::new(),
            earlier_labels: Vec::new(),
            later: Vec::new(),
            later_labels: Vec::new(),
        };
        while out.earlier.len() < self.cfg.batch_size {
            let ti = self.expert_trajs[rng.below(self.expert_trajs.len())];
            let len = self.ds.trajectories[ti].len();
            let t = rng.below(len);
            let j = self.cfg.j_set[rng.below(self.cfg.j_set.len())];
            if t + j >= len {
                continue;
            }
            out.earlier.push(self.window(ti, t, rng));
            out.earlier_labels.push(self.label(ti, t));
            out.later.push(self.window(ti, t + j, rng));
            out.later_labels.push(self.label(ti, t + j));
        }
        out
    }

    pub fn cont(&self, rng: &mut RngStream) -> ContBatch {
        let (windows, labels) = self.draw(self.cfg.batch_size, self.cfg.cont_expert_only, rng);
        ContBatch { windows, labels }
    }

    pub fn sample(&self, rng: &mut RngStream) -> Batches {
        Batches {
            epic: self.cfg.use_epic.then(|| self.epic(&mut rng.fork("epic"))),
            reg: self.cfg.use_reg.then(|| self.reg(&mut rng.fork("reg"))),
            cont: self.cfg.use_cont.then(|| self.cont(&mut rng.fork("cont"))),
        }
    }
}

/// Window embeddings of a batch: head features and final-slot outputs.
fn encode(model: &RewardModel, g: &mut Graph, b: &Bound, windows: &[Window]) -> Result<(Var, Var)> {
    let obs = g.constant(model.window_matrix(windows)?);
    let (slots, v) = model.encode(g, b, obs)?;
    let feats = model.head_features(g, slots, v)?;
    Ok((feats, v))
}

fn column_constant(g: &mut Graph, values: &[f64]) -> Var {
    g.constant(Mat::from_shape_vec((values.len(), 1), values.to_vec()).expect("column shape"))
}

/// EPIC term: Pearson distance between canonicalized rewards and
/// canonicalized segmentation targets, averaged over conditionings.
pub fn loss_epic(
    model: &RewardModel,
    g: &mut Graph,
    b: &Bound,
    subtasks: Var,
    batch: &EpicBatch,
    cfg: &TrainConfig,
) -> Result<Var> {
    let n = batch.windows.len();
    let p = batch.pool.len();
    let m = g.value(subtasks).nrows();
    let (feats, _) = encode(model, g, b, &batch.windows)?;
    let (pool_feats, _) = encode(model, g, b, &batch.pool)?;
    let avg = batch.canonical_matrix();
    let canon_targets = avg.dot(&Mat::from_shape_vec((p, 1), batch.pool_targets.clone()).expect("column"));
    let targets: Vec<f64> = batch
        .targets
        .iter()
        .zip(canon_targets.iter())
        .map(|(y, c)| y - c)
        .collect();
    let target = column_constant(g, &targets);
    let avg = g.constant(avg);
    let output = PearsonOutput::Distance(cfg.distance_form);
    match cfg.epic_variant {
        EpicVariant::Literal => {
            let pairs: Vec<(usize, usize)> = (0..n).flat_map(|s| (0..m).map(move |i| (s, i))).collect();
            let pool_pairs: Vec<(usize, usize)> = (0..p).flat_map(|s| (0..m).map(move |i| (s, i))).collect();
            let r = model.head_pairs(g, b, feats, subtasks, &pairs)?;
            let r = g.reshape(r, n, m)?;
            let rp = model.head_pairs(g, b, pool_feats, subtasks, &pool_pairs)?;
            let rp = g.reshape(rp, p, m)?;
            let canon = g.matmul(avg, rp)?;
            let c = g.sub(r, canon)?;
            let mut total: Option<Var> = None;
            for i in 0..m {
                let ci = g.column(c, i)?;
                let d = g.pearson(ci, target, output)?;
                total = Some(match total {
                    Some(t) => g.add(t, d)?,
                    None => d,
                });
            }
            let total = total.ok_or_else(|| Error::Config("no subtasks".into()))?;
            Ok(g.affine(total, 1.0 / m as f64, 0.0))
        }
        EpicVariant::LabelConditioned => {
            let pairs: Vec<(usize, usize)> = batch.labels.iter().copied().enumerate().collect();
            let pool_pairs: Vec<(usize, usize)> = batch.pool_labels.iter().copied().enumerate().collect();
            let r = model.head_pairs(g, b, feats, subtasks, &pairs)?;
            let rp = model.head_pairs(g, b, pool_feats, subtasks, &pool_pairs)?;
            let canon = g.matmul(avg, rp)?;
            let c = g.sub(r, canon)?;
            g.pearson(c, target, output)
        }
    }
}

/// Mean of `relu(epsilon - (later - earlier))` over paired `[n x 1]` rewards.
pub fn hinge_from_rewards(g: &mut Graph, earlier: Var, later: Var, epsilon: f64) -> Result<Var> {
    let diff = g.sub(later, earlier)?;
    let slack = g.affine(diff, -1.0, epsilon);
    let h = g.relu(slack);
    Ok(g.mean(h))
}

/// Progress hinge on expert pairs, each reward conditioned on its own label.
pub fn loss_reg(
    model: &RewardModel,
    g: &mut Graph,
    b: &Bound,
    subtasks: Var,
    batch: &RegBatch,
    epsilon: f64,
) -> Result<Var> {
    let (fe, _) = encode(model, g, b, &batch.earlier)?;
    let (fl, _) = encode(model, g, b, &batch.later)?;
    let pe: Vec<(usize, usize)> = batch.earlier_labels.iter().copied().enumerate().collect();
    let pl: Vec<(usize, usize)> = batch.later_labels.iter().copied().enumerate().collect();
    let re = model.head_pairs(g, b, fe, subtasks, &pe)?;
    let rl = model.head_pairs(g, b, fl, subtasks, &pl)?;
    hinge_from_rewards(g, re, rl, epsilon)
}

/// Cross-entropy of `softmax(sims / tau)` against `labels`.
pub fn contrastive_from_sims(g: &mut Graph, sims: Var, labels: &[usize], temperature: f64) -> Result<Var> {
    let logits = g.affine(sims, 1.0 / temperature, 0.0);
    g.cross_entropy(logits, labels)
}

pub fn loss_cont(
    model: &RewardModel,
    g: &mut Graph,
    b: &Bound,
    subtasks: Var,
    batch: &ContBatch,
    temperature: f64,
) -> Result<Var> {
    let (_, v) = encode(model, g, b, &batch.windows)?;
    let sims = model.similarities(g, v, subtasks)?;
    contrastive_from_sims(g, sims, &batch.labels, temperature)
}

/// Weighted sum of the enabled terms. Returns the loss node and its parts.
pub fn total_loss(
    model: &RewardModel,
    g: &mut Graph,
    b: &Bound,
    instructions: &[Vec<String>],
    batches: &Batches,
    cfg: &TrainConfig,
) -> Result<(Var, LossBreakdown)> {
    let bag = model.bag_matrix(instructions)?;
    let e = model.embed_subtasks(g, b, &bag)?;
    let mut parts = LossBreakdown::default();
    let mut terms = Vec::new();
    if let (true, Some(batch)) = (cfg.use_epic, &batches.epic) {
        let l = loss_epic(model, g, b, e, batch, cfg)?;
        parts.epic = g.scalar(l);
        terms.push(g.affine(l, cfg.weight_epic, 0.0));
    }
    if let (true, Some(batch)) = (cfg.use_reg, &batches.reg) {
        let l = loss_reg(model, g, b, e, batch, cfg.epsilon)?;
        parts.reg = g.scalar(l);
        terms.push(g.affine(l, cfg.weight_reg, 0.0));
    }
    if let (true, Some(batch)) = (cfg.use_cont, &batches.cont) {
        let l = loss_cont(model, g, b, e, batch, cfg.temperature)?;
        parts.cont = g.scalar(l);
        terms.push(g.affine(l, cfg.weight_cont, 0.0));
    }
    let mut total = match terms.first() {
        Some(&t) => t,
        None => g.constant(Mat::zeros((1, 1))),
    };
    for &t in &terms[1.min(terms.len())..] {
        total = g.add(total, t)?;
    }
    parts.total = g.scalar(total);
    Ok((total, parts))
}

/// Loss values and parameter gradients at the model's current parameters.
pub fn loss_and_gradients(
    model: &RewardModel,
    instructions: &[Vec<String>],
    batches: &Batches,
    cfg: &TrainConfig,
) -> Result<(LossBreakdown, Vec<Mat>)> {
    let mut g = Graph::new();
    let b = model.bind(&mut g, true);
    let (loss, parts) = total_loss(model, &mut g, &b, instructions, batches, cfg)?;
    Ok((parts, model.gradients(&g, &b, loss)))
}

/// Linear warmup to `base` over `warmup` steps, then cosine decay reaching
/// zero at `total`.
pub fn learning_rate(base: f64, step: usize, warmup: usize, total: usize) -> f64 {
    if step < warmup {
        return base * (step + 1) as f64 / warmup as f64;
    }
    let span = total.saturating_sub(warmup).max(1) as f64;
    let progress = ((step - warmup) as f64 / span).min(1.0);
    0.5 * base * (1.0 + (std::f64::consts::PI * progress).cos())
}

/// Adaptive moment estimation with decoupled weight decay.
#[derive(Debug, Clone)]
pub struct AdamW {
    beta1: f64,
    beta2: f64,
    eps: f64,
    weight_decay: f64,
    t: i32,
    m: Vec<Mat>,
    v: Vec<Mat>,
}

impl AdamW {
    pub fn new(params: &[Mat], cfg: &TrainConfig) -> Self {
        Self::with_hyper(params, cfg.beta1, cfg.beta2, cfg.adam_eps, cfg.weight_decay)
    }

    pub fn with_hyper(params: &[Mat], beta1: f64, beta2: f64, eps: f64, weight_decay: f64) -> Self {
        Self {
            beta1,
            beta2,
            eps,
            weight_decay,
            t: 0,
            m: params.iter().map(|p| Mat::zeros(p.raw_dim())).collect(),
            v: params.iter().map(|p| Mat::zeros(p.raw_dim())).collect(),
        }
    }

    pub fn step(&mut self, params: &mut [Mat], grads: &[Mat], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        let (b1, b2, eps, wd) = (self.beta1, self.beta2, self.eps, self.weight_decay);
        for ((p, g), (m, v)) in params.iter_mut().zip(grads).zip(self.m.iter_mut().zip(&mut self.v)) {
            ndarray::Zip::from(p).and(g).and(m).and(v).for_each(|p, &g, m, v| {
                *m = b1 * *m + (1.0 - b1) * g;
                *v = b2 * *v + (1.0 - b2) * g * g;
                let update = (*m / c1) / ((*v / c2).sqrt() + eps);
                *p -= lr * (update + wd * *p);
            });
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub step: usize,
    pub loss_epic: f64,
    pub loss_reg: f64,
    pub loss_cont: f64,
    pub loss_total: f64,
    pub lr: f64,
}

pub fn write_metrics(path: &Path, rows: &[MetricRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: RewardModel,
    pub metrics: Vec<MetricRow>,
}

/// Fresh model for `ds` under `cfg`, seeded from `cfg.seed`.
pub fn init_model(ds: &SegmentedDataset, cfg: &TrainConfig) -> Result<RewardModel> {
    let obs_dim = ds
        .obs_dim()
        .ok_or_else(|| Error::EmptyDataset("dataset has no observations".into()))?;
    let mc = cfg.model_config(obs_dim, ds.vocab.len(), ds.num_subtasks);
    RewardModel::init(mc, ds.vocab.clone(), &mut RngStream::new(cfg.seed).fork("init"))
}

/// Trains a fresh model for `cfg.training_steps` steps.
pub fn train_reward_model(ds: &SegmentedDataset, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    let model = init_model(ds, cfg)?;
    let rng = RngStream::new(cfg.seed).fork("train");
    optimize(model, ds, cfg, cfg.training_steps, cfg.warmup_steps, &rng)
}

/// Continues optimizing `model` on `ds` with a fresh schedule of `steps`.
pub fn optimize(
    mut model: RewardModel,
    ds: &SegmentedDataset,
    cfg: &TrainConfig,
    steps: usize,
    warmup: usize,
    rng: &RngStream,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    let mut metrics = Vec::with_capacity(steps);
    if steps == 0 {
        return Ok(TrainOutcome { model, metrics });
    }
    let sampler = BatchSampler::new(ds, cfg)?;
    let mut opt = AdamW::new(model.params(), cfg);
    for step in 0..steps {
        let mut step_rng = rng.fork_index("step", step as u64);
        let (parts, grads) = loop {
            let batches = sampler.sample(&mut step_rng);
            match loss_and_gradients(&model, &ds.instructions, &batches, cfg) {
                // A batch whose targets are all one label carries no EPIC
                // signal; draw another.
                Err(Error::DegenerateVariance { .. }) => continue,
                other => break other?,
            }
        };
        let finite = parts.total.is_finite() && grads.iter().all(|g| g.iter().all(|v| v.is_finite()));
        if !finite {
            return Err(Error::NonFiniteLoss {
                step,
                last_good: Box::new(model),
            });
        }
        let lr = learning_rate(cfg.learning_rate, step, warmup, steps);
        opt.step(model.params_mut(), &grads, lr);
        metrics.push(MetricRow {
            step,
            loss_epic: parts.epic,
            loss_reg: parts.reg,
            loss_cont: parts.cont,
            loss_total: parts.total,
            lr,
        });
    }
    Ok(TrainOutcome { model, metrics })
}
