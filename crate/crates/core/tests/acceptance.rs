//! Acceptance suite. Prints one `PASS`/`FAIL` line per criterion with the
//! measured value, the pinned tolerance and the wall time.
//!
//! Set `ACCEPTANCE_STRICT=1` to turn any `FAIL` into a non-zero exit. Without
//! it only errors and panics fail the target, so that criteria that are out of
//! reach at this scale are reported rather than hidden.

use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use segreward::data::{collect_expert_demos, SegmentedDataset, Trajectory};
use segreward::env::{ChainManip, EnvConfig};
use segreward::epic::{epic_distance, EpicConfig};
use segreward::model::{Bound, RewardModel};
use segreward::numerics::tape::{Graph, Mat, Var};
use segreward::numerics::{grad_check_coords, RngStream};
use segreward::rl::{train_agent, LearnedReward, RLConfig, RewardSource};
use segreward::train::{
    epic_to_psi, init_model, iterate_refinement, loss_cont, loss_epic, loss_reg, normalize_factor,
    progressive_fraction, subtask_accuracy, total_loss, train_reward_model, BatchSampler,
    RefinementConfig, TrainConfig,
};
use segreward::Result;

const INVARIANCE_TOL: f64 = 1e-6;
const ORACLE_TOL: f64 = 1e-12;
const INDEPENDENCE_TARGET: f64 = std::f64::consts::FRAC_1_SQRT_2;
const INDEPENDENCE_TOL: f64 = 0.02;
const GRAD_STEP: f64 = 1e-5;
const GRAD_TOL: f64 = 1e-4;
const GRAD_POINTS: u64 = 20;
const PROBE_SCALE: f64 = 0.3;
const ACCURACY_MIN: f64 = 0.95;
const REFINE_GAIN_MIN: f64 = 0.10;
const PROGRESSIVE_MIN: f64 = 0.90;
const EPIC_MAX: f64 = 0.2;
const LEARNED_SUCCESS_MIN: f64 = 0.8;
const SPARSE_SUCCESS_MAX: f64 = 0.2;
const TRANSFER_MIN: f64 = 0.70;
const RL_SEEDS: u64 = 4;
const NUM_DEMOS: usize = 50;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn env(name: &str) -> ChainManip {
    ChainManip::new(EnvConfig::preset(name).unwrap()).unwrap()
}

/// Shared ChainManip-3 fixtures, built on first use.
struct Fixtures {
    env: ChainManip,
    train: SegmentedDataset,
    held_out: Vec<Trajectory>,
    cfg: TrainConfig,
    full: OnceLock<RewardModel>,
    ablated: [OnceLock<RewardModel>; 3],
    learned_success: OnceLock<Vec<f64>>,
}

#[derive(Clone, Copy)]
enum Ablation {
    NoCont = 0,
    NoReg = 1,
    NoAgg = 2,
}

impl Fixtures {
    fn new() -> Self {
        let env = env("chainmanip-3");
        let demos = collect_expert_demos(&env, NUM_DEMOS, 0.0, &RngStream::new(0).fork("demos")).unwrap();
        let held_out = collect_expert_demos(&env, NUM_DEMOS, 0.0, &RngStream::new(1).fork("demos")).unwrap();
        let train = SegmentedDataset::new(&env, demos);
        Self {
            env,
            train,
            held_out,
            cfg: TrainConfig::default(),
            full: OnceLock::new(),
            ablated: Default::default(),
            learned_success: OnceLock::new(),
        }
    }

    fn held_out(&self) -> Vec<&Trajectory> {
        self.held_out.iter().collect()
    }

    fn full(&self) -> &RewardModel {
        self.full
            .get_or_init(|| train_reward_model(&self.train, &self.cfg).unwrap().model)
    }

    fn ablated(&self, which: Ablation) -> &RewardModel {
        self.ablated[which as usize].get_or_init(|| {
            let cfg = match which {
                Ablation::NoCont => TrainConfig { use_cont: false, ..self.cfg.clone() },
                Ablation::NoReg => TrainConfig { use_reg: false, ..self.cfg.clone() },
                Ablation::NoAgg => TrainConfig { use_aggregator: false, ..self.cfg.clone() },
            };
            train_reward_model(&self.train, &cfg).unwrap().model
        })
    }

    fn accuracy(&self, model: &RewardModel) -> f64 {
        subtask_accuracy(model, &self.held_out(), &self.train.instructions, self.cfg.eta).unwrap()
    }

    fn progressive(&self, model: &RewardModel) -> f64 {
        progressive_fraction(model, &self.held_out(), &self.train.instructions, &self.cfg.j_set).unwrap()
    }

    fn learned_source(&self, model: &RewardModel) -> RewardSource {
        let experts: Vec<&Trajectory> = self.train.experts().collect();
        RewardSource::Learned(Box::new(LearnedReward {
            model: model.clone(),
            normalize_factor: normalize_factor(model, &experts, &self.train.instructions).unwrap(),
            eta: self.cfg.eta,
            instructions: self.train.instructions.clone(),
        }))
    }

    /// Final greedy success rate per seed at the default step budget.
    fn success(&self, source: &RewardSource) -> Vec<f64> {
        (0..RL_SEEDS)
            .map(|seed| {
                let run = train_agent(&self.env, source, &RLConfig { seed, ..RLConfig::default() }).unwrap();
                run.final_eval().map_or(0.0, |p| p.success_rate)
            })
            .collect()
    }

    fn learned_success(&self) -> &[f64] {
        self.learned_success
            .get_or_init(|| self.success(&self.learned_source(self.full())))
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn random_rewards(rng: &mut RngStream, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.normal()).collect()
}

/// Canonical batches drawn from the coverage states themselves.
fn canonical_batches(rng: &mut RngStream, n: usize, k: usize) -> Vec<Vec<usize>> {
    (0..n).map(|_| (0..k).map(|_| rng.below(n)).collect()).collect()
}

fn gather(values: &[f64], batches: &[Vec<usize>]) -> Vec<Vec<f64>> {
    batches.iter().map(|b| b.iter().map(|&j| values[j]).collect()).collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let cfg = EpicConfig::default();
    let mut rng = RngStream::new(1);
    let (mut worst_affine, mut worst_neg, mut symmetric) = (0.0f64, 0.0f64, true);
    for _ in 0..100 {
        let n = 3 + rng.below(48);
        let r = random_rewards(&mut rng, n);
        let a = rng.uniform_range(0.5, 10.0);
        let b = rng.uniform_range(-3.0, 3.0);
        let s: Vec<f64> = r.iter().map(|x| a * x + b).collect();
        let neg: Vec<f64> = r.iter().map(|x| -x).collect();
        let batches = canonical_batches(&mut rng, n, cfg.num_canonical_samples);
        let d = |x: &[f64], y: &[f64]| {
            epic_distance(x, y, &gather(x, &batches), &gather(y, &batches), &cfg)
                .unwrap()
                .distance
        };
        worst_affine = worst_affine.max(d(&r, &s));
        worst_neg = worst_neg.max((d(&r, &neg) - 1.0).abs());
        symmetric &= d(&r, &s) == d(&s, &r) && d(&r, &neg) == d(&neg, &r);
    }
    let elapsed = start.elapsed();
    outcome(
        worst_affine < INVARIANCE_TOL && worst_neg < INVARIANCE_TOL && symmetric && within(elapsed, 5.0),
        format!(
            "max D(R, aR+b) {worst_affine:.2e}, max |D(R, -R) - 1| {worst_neg:.2e} (< {INVARIANCE_TOL:e}), \
             symmetric {symmetric}, {:.2} s (< 5 s)",
            elapsed.as_secs_f64()
        ),
    )
}

/// Textbook EPIC: canonicalize by batch means, then sqrt((1 - rho) / 2).
fn naive_epic(a: &[f64], b: &[f64], batches: &[Vec<usize>]) -> f64 {
    let canon = |v: &[f64]| -> Vec<f64> {
        batches
            .iter()
            .zip(v)
            .map(|(batch, x)| {
                let mut s = 0.0;
                for &j in batch {
                    s += v[j];
                }
                x - s / batch.len() as f64
            })
            .collect()
    };
    let (x, y) = (canon(a), canon(b));
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for i in 0..x.len() {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    let rho = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    ((1.0 - rho) / 2.0).sqrt()
}

fn criterion_2() -> Outcome {
    let cfg = EpicConfig::default();
    let mut rng = RngStream::new(2);
    let mut worst = 0.0f64;
    let mut compared = 0;
    while compared < 1000 {
        let n = 3 + rng.below(18);
        let a = random_rewards(&mut rng, n);
        let b = random_rewards(&mut rng, n);
        let k = 1 + rng.below(10);
        let batches = canonical_batches(&mut rng, n, k);
        let naive = naive_epic(&a, &b, &batches);
        match epic_distance(&a, &b, &gather(&a, &batches), &gather(&b, &batches), &cfg) {
            Ok(e) => worst = worst.max((e.distance - naive).abs()),
            // A batch that is a permutation of a constant-shift of the states
            // canonicalizes to a constant; the naive formula is then undefined.
            Err(_) if naive.is_nan() => continue,
            Err(e) => panic!("{e}"),
        }
        compared += 1;
    }
    outcome(
        worst <= ORACLE_TOL,
        format!("max |epic - naive| {worst:.2e} over 1000 instances (<= {ORACLE_TOL:e})"),
    )
}

fn criterion_3() -> Outcome {
    let cfg = EpicConfig::default();
    let mut rng = RngStream::new(3);
    let n = 10_000;
    let a: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
    let b: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
    let batches = canonical_batches(&mut rng, n, cfg.num_canonical_samples);
    let d = epic_distance(&a, &b, &gather(&a, &batches), &gather(&b, &batches), &cfg)
        .unwrap()
        .distance;
    outcome(
        (d - INDEPENDENCE_TARGET).abs() <= INDEPENDENCE_TOL,
        format!("distance {d:.4} at 10^4 samples (target {INDEPENDENCE_TARGET:.4} +- {INDEPENDENCE_TOL})"),
    )
}

type Scalar = dyn Fn(&RewardModel, &mut Graph, &Bound) -> Result<Var>;

fn tiny_model(ds: &SegmentedDataset, cfg: &TrainConfig, use_aggregator: bool, seed: u64) -> RewardModel {
    let mut mc = cfg.model_config(ds.obs_dim().unwrap(), ds.vocab.len(), ds.num_subtasks);
    mc.encoder_hidden = 8;
    mc.ffn_hidden = 8;
    mc.token_dim = 4;
    mc.subtask_hidden = 6;
    mc.head_hidden = 6;
    mc.use_aggregator = use_aggregator;
    let mut rng = RngStream::new(seed);
    let mut model = RewardModel::init(mc, ds.vocab.clone(), &mut rng).unwrap();
    // Move away from the initialization, where subtask embeddings are nearly
    // zero and the cosine normalization has extreme curvature.
    let p: Vec<f64> = model.flat_params().iter().map(|x| x + PROBE_SCALE * rng.normal()).collect();
    model.set_flat_params(&p).unwrap();
    model
}

fn random_weights(rng: &mut RngStream, rows: usize, cols: usize) -> Mat {
    Mat::from_shape_fn((rows, cols), |_| rng.normal())
}

/// Worst relative error of one scalar function over all parameters.
fn check_scalar(model: &RewardModel, f: &Scalar) -> f64 {
    let mut g = Graph::new();
    let b = model.bind(&mut g, true);
    let Ok(out) = f(model, &mut g, &b) else {
        return f64::NAN;
    };
    let grads: Vec<f64> = model.gradients(&g, &b, out).iter().flat_map(|m| m.iter().copied().collect::<Vec<_>>()).collect();
    let params = model.flat_params();
    let coords: Vec<usize> = (0..params.len()).collect();
    let mut probe = model.clone();
    grad_check_coords(
        |p| {
            probe.set_flat_params(p)?;
            let mut g = Graph::new();
            let b = probe.bind(&mut g, false);
            let out = f(&probe, &mut g, &b)?;
            Ok(g.scalar(out))
        },
        &params,
        &grads,
        GRAD_STEP,
        &coords,
    )
    .map_or(f64::NAN, |r| r.max_rel_error)
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let envc = env("chainmanip-3");
    let demos = collect_expert_demos(&envc, 4, 0.0, &RngStream::new(4)).unwrap();
    let ds = SegmentedDataset::new(&envc, demos);
    let cfg = TrainConfig {
        embed_dim: 8,
        layers: 1,
        heads: 2,
        batch_size: 4,
        num_canonical: 3,
        ..TrainConfig::default()
    };
    let sampler = BatchSampler::new(&ds, &cfg).unwrap();
    let names = ["encoder", "aggregator", "embeddings", "head", "L_epic", "L_reg", "L_cont", "total"];
    let mut worst = [0.0f64; 8];
    let mut rng = RngStream::new(40);
    for point in 0..GRAD_POINTS {
        let batches = sampler.sample(&mut rng);
        let windows = batches.epic.as_ref().unwrap().windows.clone();
        let instructions = ds.instructions.clone();
        for (c, name) in names.iter().enumerate() {
            let model = tiny_model(&ds, &cfg, *name != "encoder", 1000 * point + c as u64);
            let d = cfg.embed_dim;
            let k = model.config().window;
            let n = windows.len();
            let (cv, cs, ce) = (
                random_weights(&mut rng, n, d),
                random_weights(&mut rng, n * k, d),
                random_weights(&mut rng, instructions.len(), d),
            );
            let pairs: Vec<(usize, usize)> = (0..n).map(|i| (i, i % instructions.len())).collect();
            let (w, ins, b) = (windows.clone(), instructions.clone(), batches.clone());
            let cfg_c = cfg.clone();
            let f: Box<Scalar> = match *name {
                "encoder" | "aggregator" => Box::new(move |m, g, bd| {
                    let obs = g.constant(m.window_matrix(&w)?);
                    let (slots, v) = m.encode(g, bd, obs)?;
                    let (cv, cs) = (g.constant(cv.clone()), g.constant(cs.clone()));
                    let a = g.mul(v, cv)?;
                    let s = g.mul(slots, cs)?;
                    let (a, s) = (g.sum(a), g.sum(s));
                    g.add(a, s)
                }),
                "embeddings" => Box::new(move |m, g, bd| {
                    let e = m.embed_subtasks(g, bd, &m.bag_matrix(&ins)?)?;
                    let ce = g.constant(ce.clone());
                    let p = g.mul(e, ce)?;
                    Ok(g.sum(p))
                }),
                "head" => Box::new(move |m, g, bd| {
                    let obs = g.constant(m.window_matrix(&w)?);
                    let (slots, v) = m.encode(g, bd, obs)?;
                    let feats = m.head_features(g, slots, v)?;
                    let e = m.embed_subtasks(g, bd, &m.bag_matrix(&ins)?)?;
                    let r = m.head_pairs(g, bd, feats, e, &pairs)?;
                    Ok(g.sum(r))
                }),
                "L_epic" => Box::new(move |m, g, bd| {
                    let e = m.embed_subtasks(g, bd, &m.bag_matrix(&ins)?)?;
                    loss_epic(m, g, bd, e, b.epic.as_ref().unwrap(), &cfg_c)
                }),
                "L_reg" => Box::new(move |m, g, bd| {
                    let e = m.embed_subtasks(g, bd, &m.bag_matrix(&ins)?)?;
                    loss_reg(m, g, bd, e, b.reg.as_ref().unwrap(), cfg_c.epsilon)
                }),
                "L_cont" => Box::new(move |m, g, bd| {
                    let e = m.embed_subtasks(g, bd, &m.bag_matrix(&ins)?)?;
                    loss_cont(m, g, bd, e, b.cont.as_ref().unwrap(), cfg_c.temperature)
                }),
                _ => Box::new(move |m, g, bd| Ok(total_loss(m, g, bd, &ins, &b, &cfg_c)?.0)),
            };
            let err = check_scalar(&model, f.as_ref());
            worst[c] = if err.is_nan() { f64::NAN } else { worst[c].max(err) };
        }
    }
    let elapsed = start.elapsed();
    let pass = worst.iter().all(|&e| e < GRAD_TOL) && within(elapsed, 60.0);
    let parts: Vec<String> = names.iter().zip(worst).map(|(n, e)| format!("{n} {e:.1e}")).collect();
    outcome(
        pass,
        format!(
            "max rel error at {GRAD_POINTS} points, step {GRAD_STEP:e} (< {GRAD_TOL:e}): {}; {:.1} s (< 60 s)",
            parts.join(", "),
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_5(fx: &Fixtures) -> Outcome {
    let start = Instant::now();
    let acc = fx.accuracy(fx.full());
    let elapsed = start.elapsed();
    outcome(
        acc >= ACCURACY_MIN && within(elapsed, 300.0),
        format!(
            "held-out accuracy {acc:.4} (>= {ACCURACY_MIN}), {:.0} s including training (< 300 s)",
            elapsed.as_secs_f64()
        ),
    )
}

/// Replay of an agent trained on the oracle segmentation reward for a short
/// budget: rollouts that stall at every stage, with oracle labels.
fn suboptimal_rollouts(fx: &Fixtures) -> Vec<Trajectory> {
    let cfg = RLConfig {
        total_steps: 100_000,
        seed: 1000,
        ..RLConfig::default()
    };
    let run = train_agent(&fx.env, &RewardSource::OraclePsi, &cfg).unwrap();
    run.replay.into_iter().filter(|e| !e.success).map(|e| e.trajectory).collect()
}

fn criterion_6(fx: &Fixtures) -> Outcome {
    let m0 = fx.full().clone();
    let start = Instant::now();
    let rollouts = suboptimal_rollouts(fx);
    let refs: Vec<&Trajectory> = rollouts.iter().collect();
    let out = iterate_refinement(
        &fx.env,
        m0.clone(),
        &fx.train,
        &fx.cfg,
        &RefinementConfig { iterations: 1, ..RefinementConfig::default() },
    )
    .unwrap();
    let before = subtask_accuracy(&m0, &refs, &fx.train.instructions, fx.cfg.eta).unwrap();
    let after = subtask_accuracy(&out.models[1], &refs, &fx.train.instructions, fx.cfg.eta).unwrap();
    let elapsed = start.elapsed();
    outcome(
        after - before >= REFINE_GAIN_MIN && within(elapsed, 900.0),
        format!(
            "precision on {} suboptimal rollouts {before:.4} -> {after:.4}, gain {:+.1} pp (>= {:.0} pp), {:.0} s (< 900 s)",
            refs.len(),
            100.0 * (after - before),
            100.0 * REFINE_GAIN_MIN,
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_7(fx: &Fixtures) -> Outcome {
    let p = fx.progressive(fx.full());
    outcome(
        p >= PROGRESSIVE_MIN,
        format!("progressive fraction {p:.4} (>= {PROGRESSIVE_MIN})"),
    )
}

fn criterion_8(fx: &Fixtures) -> Outcome {
    let cfg = EpicConfig::default();
    let held = fx.held_out();
    let instr = &fx.train.instructions;
    let root = RngStream::new(8);
    let trained = epic_to_psi(fx.full(), &held, instr, &cfg, &mut root.fork("psi")).unwrap().mean_distance;
    let control_model = init_model(&fx.train, &fx.cfg).unwrap();
    let control = epic_to_psi(&control_model, &held, instr, &cfg, &mut root.fork("psi")).unwrap().mean_distance;
    outcome(
        trained <= EPIC_MAX && trained < control,
        format!("distance to psi {trained:.4} (<= {EPIC_MAX}), random-init control {control:.4}"),
    )
}

fn criterion_9(fx: &Fixtures) -> Outcome {
    let start = Instant::now();
    let learned = fx.learned_success().to_vec();
    let sparse = fx.success(&RewardSource::Sparse);
    let elapsed = start.elapsed();
    let (ml, ms) = (mean(&learned), mean(&sparse));
    outcome(
        ml >= LEARNED_SUCCESS_MIN && ms <= SPARSE_SUCCESS_MAX && within(elapsed, 1200.0),
        format!(
            "mean success at {} steps: learned {ml:.3} {learned:?} (>= {LEARNED_SUCCESS_MIN}), \
             sparse {ms:.3} {sparse:?} (<= {SPARSE_SUCCESS_MAX}), {:.0} s (< 1200 s)",
            RLConfig::default().total_steps,
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_10(fx: &Fixtures) -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for name in ["chainmanip-3-swap", "chainmanip-3-mix"] {
        let e = env(name);
        let demos = collect_expert_demos(&e, NUM_DEMOS, 0.0, &RngStream::new(10).fork("demos")).unwrap();
        let refs: Vec<&Trajectory> = demos.iter().collect();
        let acc = subtask_accuracy(fx.full(), &refs, &e.instructions(), fx.cfg.eta).unwrap();
        pass &= acc >= TRANSFER_MIN;
        parts.push(format!("{name} {acc:.4}"));
    }
    outcome(pass, format!("zero-shot accuracy {} (>= {TRANSFER_MIN})", parts.join(", ")))
}

fn criterion_11(fx: &Fixtures) -> Outcome {
    let (acc_full, acc_nc) = (fx.accuracy(fx.full()), fx.accuracy(fx.ablated(Ablation::NoCont)));
    let (prog_full, prog_nr) = (fx.progressive(fx.full()), fx.progressive(fx.ablated(Ablation::NoReg)));
    let rl_full = mean(fx.learned_success());
    let rl_na = mean(&fx.success(&fx.learned_source(fx.ablated(Ablation::NoAgg))));
    outcome(
        acc_nc < acc_full && prog_nr < prog_full && rl_na < rl_full,
        format!(
            "no-cont accuracy {acc_nc:.4} vs {acc_full:.4}; no-reg progressive {prog_nr:.4} vs {prog_full:.4}; \
             no-agg success {rl_na:.3} vs {rl_full:.3} (each strictly lower)"
        ),
    )
}

fn segreward(dir: &Path, args: &[&str]) {
    let status = Command::new(env!("CARGO_BIN_EXE_segreward"))
        .args(args)
        .current_dir(dir)
        .env_remove("SEGREWARD_SEED")
        .stdout(std::process::Stdio::null())
        .status()
        .unwrap();
    assert!(status.success(), "segreward {args:?} failed with {status}");
}

fn pipeline(dir: &Path) {
    std::fs::write(
        dir.join("train.toml"),
        "training_steps = 30\nwarmup_steps = 3\nbatch_size = 8\nembed_dim = 8\nnum_canonical = 4\n",
    )
    .unwrap();
    std::fs::write(dir.join("rl.toml"), "total_steps = 4096\neval_every = 2048\neval_episodes = 2\n").unwrap();
    segreward(dir, &["demos", "--env", "chainmanip-2", "--n", "6", "--out", "demos.jsonl", "--seed", "5"]);
    segreward(dir, &["train-reward", "--data", "demos.jsonl", "--config", "train.toml", "--out", "m.ckpt"]);
    segreward(dir, &["eval-epic", "--model", "m.ckpt", "--data", "demos.jsonl", "--out", "epic.csv"]);
    segreward(dir, &["eval-subtask", "--model", "m.ckpt", "--data", "demos.jsonl", "--out", "subtask.csv"]);
    for reward in ["psi", "learned:m.ckpt"] {
        segreward(
            dir,
            &["train-rl", "--env", "chainmanip-2", "--reward", reward, "--seeds", "0,1", "--config", "rl.toml", "--out", "rl"],
        );
    }
    segreward(dir, &["report", "--dir", "."]);
}

fn csv_files(dir: &Path, base: &Path, out: &mut Vec<std::path::PathBuf>) {
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            csv_files(&path, base, out);
        } else if path.extension().is_some_and(|e| e == "csv") {
            out.push(path.strip_prefix(base).unwrap().to_path_buf());
        }
    }
}

fn criterion_12() -> Outcome {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    pipeline(a.path());
    pipeline(b.path());
    let mut files = Vec::new();
    csv_files(a.path(), a.path(), &mut files);
    files.sort();
    let differing: Vec<String> = files
        .iter()
        .filter(|f| std::fs::read(a.path().join(f)).ok() != std::fs::read(b.path().join(f)).ok())
        .map(|f| f.display().to_string())
        .collect();
    outcome(
        differing.is_empty() && files.len() >= 8,
        format!("{} CSV files from two full CLI runs, {} differ {differing:?}", files.len(), differing.len()),
    )
}

fn main() {
    let fx = Fixtures::new();
    let criteria: Vec<(u32, &str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        (1, "EPIC invariance", Box::new(criterion_1)),
        (2, "naive EPIC oracle", Box::new(criterion_2)),
        (3, "independence calibration", Box::new(criterion_3)),
        (4, "gradient correctness", Box::new(criterion_4)),
        (5, "subtask inference", Box::new(|| criterion_5(&fx))),
        (6, "refinement gain", Box::new(|| criterion_6(&fx))),
        (7, "progressive signal", Box::new(|| criterion_7(&fx))),
        (8, "EPIC to psi", Box::new(|| criterion_8(&fx))),
        (9, "downstream RL", Box::new(|| criterion_9(&fx))),
        (10, "transfer", Box::new(|| criterion_10(&fx))),
        (11, "ablation directions", Box::new(|| criterion_11(&fx))),
        (12, "CLI determinism", Box::new(criterion_12)),
    ];
    let only: Option<Vec<u32>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let mut failed = Vec::new();
    for (id, name, run) in &criteria {
        if only.as_ref().is_some_and(|o| !o.contains(id)) {
            continue;
        }
        let o = run();
        println!("criterion {id:>2} {} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed.push(*id);
        }
    }
    println!("acceptance: {} failing {failed:?}", if failed.is_empty() { "all passing," } else { "some" });
    if !failed.is_empty() && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
