//! Command-line front end. Every command is deterministic given its
//! configuration and seed; `SEGREWARD_SEED` overrides configured seeds.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::data::{collect_expert_demos, make_windows, SegmentedDataset, Trajectory};
use crate::env::{ChainManip, EnvConfig};
use crate::epic::{epic_distance, EpicConfig, EpicEstimate};
use crate::error::{Error, Result};
use crate::model::{Checkpoint, RewardModel};
use crate::numerics::RngStream;
use crate::rl::{train_agent, write_curve, CurvePoint, LearnedReward, RLConfig, RewardSource};
use crate::train::{
    compute_thresholds, epic_to_psi, iterate_refinement, normalize_factor, progressive_fraction, subtask_accuracy,
    train_reward_model, write_metrics, RefinementConfig, TrainConfig,
};

/// Environment variable that replaces every configured seed.
pub const SEED_ENV: &str = "SEGREWARD_SEED";

#[derive(Debug, Parser)]
#[command(name = "segreward", version, about = "Subtask-segmented reward learning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Collect scripted demonstrations labelled with the segmentation oracle.
    Demos(DemosArgs),
    /// Train a reward model, optionally followed by refinement rounds.
    TrainReward(TrainRewardArgs),
    /// EPIC distance of a model to the segmentation or to another model.
    EvalEpic(EvalEpicArgs),
    /// Subtask inference accuracy and progress rate on a labelled dataset.
    EvalSubtask(EvalSubtaskArgs),
    /// Train agents on one reward source for a list of seeds.
    TrainRl(TrainRlArgs),
    /// Summarize every CSV under a directory.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct DemosArgs {
    /// Preset name or TOML file.
    #[arg(long)]
    env: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Ablation {
    NoEpic,
    NoReg,
    NoCont,
    /// Replace the causal aggregator by concatenation.
    NoAgg,
}

#[derive(Debug, Args)]
struct TrainRewardArgs {
    #[arg(long)]
    data: PathBuf,
    /// Training TOML; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',')]
    ablate: Vec<Ablation>,
    /// Refinement rounds after the initial model.
    #[arg(long, default_value_t = 0)]
    refine: usize,
    /// Environment for refinement rollouts.
    #[arg(long)]
    env: Option<String>,
    /// Agent configuration for refinement rollouts.
    #[arg(long)]
    rl_config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalEpicArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// `psi` or the path of another checkpoint.
    #[arg(long, default_value = "psi")]
    against: String,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct EvalSubtaskArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TrainRlArgs {
    #[arg(long)]
    env: String,
    /// `sparse`, `psi` or `learned:<checkpoint>`.
    #[arg(long)]
    reward: String,
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured step budget.
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[arg(long)]
    dir: PathBuf,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code: 0 on success, 2 on usage errors, 1 otherwise.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Usage(_) | Error::Config(_) => 2,
        _ => 1,
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Demos(a) => demos(a),
        Command::TrainReward(a) => train_reward(a),
        Command::EvalEpic(a) => eval_epic(a),
        Command::EvalSubtask(a) => eval_subtask(a),
        Command::TrainRl(a) => train_rl(a),
        Command::Report(a) => report(&a.dir),
    }
}

fn seed_override() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Usage(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(Error::Usage(format!("{SEED_ENV}: {e}"))),
    }
}

/// Explicit flag, then the environment override, then the configured value.
fn resolve_seed(flag: Option<u64>, configured: u64) -> Result<u64> {
    Ok(flag.or(seed_override()?).unwrap_or(configured))
}

fn load_env(spec: &str) -> Result<ChainManip> {
    ChainManip::new(EnvConfig::load(spec)?)
}

/// `dir/stem.suffix` next to `path`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn create_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => std::fs::create_dir_all(p).map_err(|e| Error::io(p, e)),
        _ => Ok(()),
    }
}

fn demos(a: DemosArgs) -> Result<()> {
    if a.n == 0 {
        return Err(Error::Usage("--n must be >= 1".into()));
    }
    if !(a.noise >= 0.0 && a.noise.is_finite()) {
        return Err(Error::Usage(format!("--noise {} must be a finite non-negative number", a.noise)));
    }
    let env = load_env(&a.env)?;
    let seed = resolve_seed(a.seed, env.config().seed)?;
    let trajs = collect_expert_demos(&env, a.n, a.noise, &RngStream::new(seed).fork("demos"))?;
    let successes = trajs
        .iter()
        .filter(|t| t.steps.last().is_some_and(|s| s.obs[s.obs.len() - env.num_subtasks()..].iter().all(|&f| f > 0.5)))
        .count();
    let ds = SegmentedDataset::new(&env, trajs);
    create_parent(&a.out)?;
    ds.save(&a.out)?;
    println!(
        "wrote {} episodes ({} timesteps, {successes} successful) to {}",
        a.n,
        ds.num_timesteps(),
        a.out.display()
    );
    Ok(())
}

fn load_train_config(path: Option<&Path>) -> Result<TrainConfig> {
    let mut cfg = match path {
        Some(p) => TrainConfig::load(p)?,
        None => TrainConfig::default(),
    };
    if let Some(seed) = seed_override()? {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn load_rl_config(path: Option<&Path>) -> Result<RLConfig> {
    let mut cfg = match path {
        Some(p) => RLConfig::load(p)?,
        None => RLConfig::default(),
    };
    if let Some(seed) = seed_override()? {
        cfg.seed = seed;
    }
    Ok(cfg)
}

/// Saves a checkpoint with the statistics needed to deploy it.
fn save_deployable(model: &RewardModel, ds: &SegmentedDataset, thresholds: Vec<f64>, path: &Path) -> Result<()> {
    let experts: Vec<&Trajectory> = ds.experts().collect();
    let factor = normalize_factor(model, &experts, &ds.instructions)?;
    let ckpt = Checkpoint {
        model: model.clone(),
        normalize_factor: Some(factor),
        thresholds: Some(thresholds),
        instructions: Some(ds.instructions.clone()),
    };
    ckpt.save(path)
}

fn train_reward(a: TrainRewardArgs) -> Result<()> {
    let mut cfg = load_train_config(a.config.as_deref())?;
    for ab in &a.ablate {
        match ab {
            Ablation::NoEpic => cfg.use_epic = false,
            Ablation::NoReg => cfg.use_reg = false,
            Ablation::NoCont => cfg.use_cont = false,
            Ablation::NoAgg => cfg.use_aggregator = false,
        }
    }
    cfg.validate()?;
    let env = match (a.refine, &a.env) {
        (0, _) => None,
        (_, Some(spec)) => Some(load_env(spec)?),
        (_, None) => return Err(Error::Usage("--refine needs --env for the refinement rollouts".into())),
    };
    let ds = SegmentedDataset::load(&a.data)?;
    ds.validate()?;
    create_parent(&a.out)?;
    std::fs::write(sibling(&a.out, "config.toml"), cfg.to_toml()).map_err(|e| Error::io(&a.out, e))?;

    let outcome = train_reward_model(&ds, &cfg)?;
    write_metrics(&sibling(&a.out, "metrics.csv"), &outcome.metrics)?;
    let experts: Vec<&Trajectory> = ds.experts().collect();
    let thresholds = compute_thresholds(&outcome.model, &experts, &ds.instructions)?;
    save_deployable(&outcome.model, &ds, thresholds, &a.out)?;
    println!("wrote {}", a.out.display());

    if let Some(env) = env {
        let mut refine = RefinementConfig {
            iterations: a.refine,
            ..RefinementConfig::default()
        };
        if let Some(p) = &a.rl_config {
            refine.rl = RLConfig::load(p)?;
        }
        let out = iterate_refinement(&env, outcome.model, &ds, &cfg, &refine)?;
        for k in 1..=a.refine {
            let path = sibling(&a.out, &format!("m{k}.ckpt"));
            save_deployable(&out.models[k], &out.datasets[k - 1], out.thresholds.clone(), &path)?;
            write_metrics(&sibling(&a.out, &format!("m{k}.metrics.csv")), &out.metrics[k - 1])?;
            write_curve(&sibling(&a.out, &format!("m{k}.harvest.csv")), &out.curves[k - 1])?;
            println!("wrote {} ({} harvested episodes)", path.display(), out.harvested[k - 1]);
        }
    }
    Ok(())
}

fn check_dims(model: &RewardModel, ds: &SegmentedDataset) -> Result<()> {
    let expected = model.config().obs_dim;
    match ds.obs_dim() {
        Some(d) if d != expected => Err(Error::Shape(format!(
            "dataset observations have {d} features, the model expects {expected}"
        ))),
        None => Err(Error::EmptyDataset("dataset has no timesteps".into())),
        _ if ds.instructions.len() != model.config().num_subtasks => Err(Error::Shape(format!(
            "dataset has {} subtasks, the model was built for {}",
            ds.instructions.len(),
            model.config().num_subtasks
        ))),
        _ => Ok(()),
    }
}

#[derive(Debug, Serialize)]
struct EpicRow {
    target: String,
    subtask: String,
    pearson: f64,
    distance: f64,
    coverage_size: usize,
}

fn epic_rows(target: &str, per_subtask: &[EpicEstimate]) -> Vec<EpicRow> {
    let mut rows: Vec<EpicRow> = per_subtask
        .iter()
        .enumerate()
        .map(|(i, e)| EpicRow {
            target: target.to_string(),
            subtask: i.to_string(),
            pearson: e.pearson,
            distance: e.distance,
            coverage_size: e.coverage_size,
        })
        .collect();
    let n = per_subtask.len() as f64;
    rows.push(EpicRow {
        target: target.to_string(),
        subtask: "mean".into(),
        pearson: per_subtask.iter().map(|e| e.pearson).sum::<f64>() / n,
        distance: per_subtask.iter().map(|e| e.distance).sum::<f64>() / n,
        coverage_size: per_subtask.first().map_or(0, |e| e.coverage_size),
    });
    rows
}

/// Per-conditioning EPIC distance between two models over every timestep
/// of `trajs`, canonical samples shared by both.
fn epic_between(
    a: &RewardModel,
    b: &RewardModel,
    trajs: &[&Trajectory],
    instructions: &[Vec<String>],
    cfg: &EpicConfig,
    rng: &mut RngStream,
) -> Result<Vec<EpicEstimate>> {
    let rewards = |m: &RewardModel| -> Result<ndarray::Array2<f64>> {
        let mut windows = Vec::new();
        for t in trajs {
            windows.extend(make_windows(t, m.config().window)?);
        }
        Ok(m.evaluate(&windows, instructions)?.rewards)
    };
    let (ra, rb) = (rewards(a)?, rewards(b)?);
    let n = ra.nrows();
    let samples: Vec<Vec<usize>> = (0..n)
        .map(|_| (0..cfg.num_canonical_samples).map(|_| rng.below(n)).collect())
        .collect();
    (0..instructions.len())
        .map(|i| {
            let x = ra.column(i).to_vec();
            let y = rb.column(i).to_vec();
            let cx: Vec<Vec<f64>> = samples.iter().map(|s| s.iter().map(|&j| x[j]).collect()).collect();
            let cy: Vec<Vec<f64>> = samples.iter().map(|s| s.iter().map(|&j| y[j]).collect()).collect();
            epic_distance(&x, &y, &cx, &cy, cfg)
        })
        .collect()
}

fn eval_epic(a: EvalEpicArgs) -> Result<()> {
    let model = Checkpoint::load(&a.model)?.model;
    let ds = SegmentedDataset::load(&a.data)?;
    check_dims(&model, &ds)?;
    let trajs: Vec<&Trajectory> = ds.trajectories.iter().collect();
    let cfg = EpicConfig::default();
    let root = RngStream::new(resolve_seed(a.seed, 0)?);
    let mut rows = if a.against == "psi" {
        epic_rows("psi", &epic_to_psi(&model, &trajs, &ds.instructions, &cfg, &mut root.fork("psi"))?.per_subtask)
    } else {
        let other = Checkpoint::load(Path::new(&a.against))?.model;
        check_dims(&other, &ds)?;
        let est = epic_between(&model, &other, &trajs, &ds.instructions, &cfg, &mut root.fork("model"))?;
        epic_rows(&a.against, &est)
    };
    let control = RewardModel::init(model.config().clone(), model.vocab().to_vec(), &mut root.fork("control"))?;
    let est = epic_to_psi(&control, &trajs, &ds.instructions, &cfg, &mut root.fork("psi"))?;
    rows.extend(epic_rows("random-init-vs-psi", &est.per_subtask));

    let out = a.out.unwrap_or_else(|| sibling(&a.model, "epic.csv"));
    create_parent(&out)?;
    let mut w = csv::Writer::from_path(&out)?;
    for r in &rows {
        println!("{:<24} {:>5}  distance {:.6}  pearson {:+.6}", r.target, r.subtask, r.distance, r.pearson);
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(&out, e))?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct MetricValue {
    metric: String,
    value: f64,
}

fn eval_subtask(a: EvalSubtaskArgs) -> Result<()> {
    let cfg = load_train_config(a.config.as_deref())?;
    let model = Checkpoint::load(&a.model)?.model;
    let ds = SegmentedDataset::load(&a.data)?;
    check_dims(&model, &ds)?;
    let trajs: Vec<&Trajectory> = ds.trajectories.iter().collect();
    let rows = [
        MetricValue {
            metric: "subtask_precision".into(),
            value: subtask_accuracy(&model, &trajs, &ds.instructions, cfg.eta)?,
        },
        MetricValue {
            metric: "progressive_fraction".into(),
            value: progressive_fraction(&model, &trajs, &ds.instructions, &cfg.j_set)?,
        },
        MetricValue {
            metric: "timesteps".into(),
            value: ds.num_timesteps() as f64,
        },
    ];
    let out = a.out.unwrap_or_else(|| sibling(&a.model, "subtask.csv"));
    create_parent(&out)?;
    let mut w = csv::Writer::from_path(&out)?;
    for r in &rows {
        println!("{:<22} {:.6}", r.metric, r.value);
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(&out, e))?;
    Ok(())
}

fn reward_source(spec: &str, env: &ChainManip, eta: f64) -> Result<RewardSource> {
    match spec {
        "sparse" => Ok(RewardSource::Sparse),
        "psi" => Ok(RewardSource::OraclePsi),
        _ => {
            let Some(path) = spec.strip_prefix("learned:") else {
                return Err(Error::Usage(format!(
                    "--reward {spec:?}: expected sparse, psi or learned:<checkpoint>"
                )));
            };
            let path = Path::new(path);
            if !path.exists() {
                return Err(Error::Runtime(format!("checkpoint {} does not exist", path.display())));
            }
            let ckpt = Checkpoint::load(path)?;
            let Some(factor) = ckpt.normalize_factor else {
                return Err(Error::Config(format!(
                    "{} has no normalization factor; write it with train-reward",
                    path.display()
                )));
            };
            if ckpt.model.config().obs_dim != env.obs_dim() {
                return Err(Error::Shape(format!(
                    "checkpoint expects {} observation features, the environment has {}",
                    ckpt.model.config().obs_dim,
                    env.obs_dim()
                )));
            }
            // Instructions come from the target environment so that a model
            // can be deployed on recombined tasks.
            let instructions = env.instructions();
            ckpt.model.bag_matrix(&instructions)?;
            Ok(RewardSource::Learned(Box::new(LearnedReward {
                model: ckpt.model,
                normalize_factor: factor,
                eta,
                instructions,
            })))
        }
    }
}

#[derive(Debug, Serialize)]
struct SummaryRow {
    step: usize,
    mean_success: f64,
    std_success: f64,
    min_success: f64,
    max_success: f64,
    mean_completed_subtasks: f64,
    num_seeds: usize,
}

fn summarize(curves: &[Vec<CurvePoint>]) -> Vec<SummaryRow> {
    let len = curves.iter().map(Vec::len).min().unwrap_or(0);
    (0..len)
        .map(|k| {
            let s: Vec<f64> = curves.iter().map(|c| c[k].success_rate).collect();
            let n = s.len() as f64;
            let mean = s.iter().sum::<f64>() / n;
            SummaryRow {
                step: curves[0][k].step,
                mean_success: mean,
                std_success: (s.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt(),
                min_success: s.iter().copied().fold(f64::INFINITY, f64::min),
                max_success: s.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                mean_completed_subtasks: curves.iter().map(|c| c[k].mean_completed_subtasks).sum::<f64>() / n,
                num_seeds: curves.len(),
            }
        })
        .collect()
}

fn train_rl(a: TrainRlArgs) -> Result<()> {
    let env = load_env(&a.env)?;
    let mut cfg = load_rl_config(a.config.as_deref())?;
    if let Some(steps) = a.steps {
        cfg.total_steps = steps;
    }
    cfg.validate()?;
    let source = reward_source(&a.reward, &env, TrainConfig::default().eta)?;
    let seeds = if a.seeds.is_empty() { vec![cfg.seed] } else { a.seeds.clone() };
    std::fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;

    // Each seed owns its environment copy, agent and streams.
    let runs: Vec<Result<Vec<CurvePoint>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = seeds
            .iter()
            .map(|&seed| {
                let cfg = RLConfig { seed, ..cfg.clone() };
                let (env, source) = (&env, &source);
                scope.spawn(move || train_agent(env, source, &cfg).map(|r| r.curve))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Error::Runtime("agent thread panicked".into()))))
            .collect()
    });
    let name = source.name();
    let mut curves = Vec::with_capacity(runs.len());
    for (seed, run) in seeds.iter().zip(runs) {
        let curve = run?;
        write_curve(&a.out.join(format!("{name}_seed{seed}.csv")), &curve)?;
        curves.push(curve);
    }
    let summary = summarize(&curves);
    let path = a.out.join(format!("{name}_summary.csv"));
    let mut w = csv::Writer::from_path(&path)?;
    for r in &summary {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    if let Some(last) = summary.last() {
        println!(
            "{name}: final success {:.3} (std {:.3}, min {:.3}, max {:.3}) over {} seeds at step {}",
            last.mean_success, last.std_success, last.min_success, last.max_success, last.num_seeds, last.step
        );
    }
    Ok(())
}

/// One row per recognized CSV file.
#[derive(Debug, Default, Serialize)]
struct ReportRow {
    run: String,
    kind: String,
    success_rate: Option<f64>,
    mean_completed_subtasks: Option<f64>,
    epic_distance: Option<f64>,
    subtask_precision: Option<f64>,
    final_loss: Option<f64>,
}

const REPORT_STEM: &str = "report";

fn csv_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_dir() {
            csv_files(&path, out)?;
        } else if path.extension().is_some_and(|e| e == "csv") {
            out.push(path);
        }
    }
    Ok(())
}

type Table = (Vec<String>, Vec<Vec<String>>);

fn read_table(path: &Path) -> std::result::Result<Table, String> {
    let mut r = csv::Reader::from_path(path).map_err(|e| e.to_string())?;
    let headers: Vec<String> = r.headers().map_err(|e| e.to_string())?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec.map_err(|e| e.to_string())?.iter().map(String::from).collect());
    }
    if rows.is_empty() {
        return Err("no data rows".into());
    }
    Ok((headers, rows))
}

fn summarize_table(run: String, (headers, rows): Table) -> std::result::Result<ReportRow, String> {
    let col = |name: &str| headers.iter().position(|h| h == name);
    let num = |row: &[String], c: usize| -> std::result::Result<f64, String> {
        row[c].parse::<f64>().map_err(|_| format!("column {:?}: {:?} is not a number", headers[c], row[c]))
    };
    let last = rows.last().expect("non-empty");
    let mut out = ReportRow {
        run,
        ..ReportRow::default()
    };
    if let (Some(s), Some(c)) = (col("success_rate"), col("mean_completed_subtasks")) {
        out.kind = "rl".into();
        out.success_rate = Some(num(last, s)?);
        out.mean_completed_subtasks = Some(num(last, c)?);
    } else if let (Some(s), Some(c)) = (col("mean_success"), col("mean_completed_subtasks")) {
        out.kind = "rl-summary".into();
        out.success_rate = Some(num(last, s)?);
        out.mean_completed_subtasks = Some(num(last, c)?);
    } else if let (Some(t), Some(s), Some(d)) = (col("target"), col("subtask"), col("distance")) {
        out.kind = "epic".into();
        let row = rows
            .iter()
            .find(|r| r[s] == "mean" && r[t] != "random-init-vs-psi")
            .ok_or("no mean row for the evaluated model")?;
        out.epic_distance = Some(num(row, d)?);
    } else if let (Some(m), Some(v)) = (col("metric"), col("value")) {
        out.kind = "subtask".into();
        let row = rows
            .iter()
            .find(|r| r[m] == "subtask_precision")
            .ok_or("no subtask_precision row")?;
        out.subtask_precision = Some(num(row, v)?);
    } else if let Some(l) = col("loss_total") {
        out.kind = "reward-training".into();
        out.final_loss = Some(num(last, l)?);
    } else {
        return Err(format!("unrecognized columns {headers:?}"));
    }
    Ok(out)
}

fn fmt_cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"))
}

/// Writes `report.csv` and `report.md` into `dir`; earlier reports are
/// ignored so reruns are idempotent.
fn report(dir: &Path) -> Result<()> {
    if !dir.is_dir() {
        return Err(Error::Usage(format!("{} is not a directory", dir.display())));
    }
    let mut files = Vec::new();
    csv_files(dir, &mut files)?;
    files.retain(|p| !(p.parent() == Some(dir) && p.file_stem().is_some_and(|s| s == REPORT_STEM)));
    files.sort();
    if files.is_empty() {
        log::warn!("{}: no CSV files found; writing an empty report", dir.display());
    }
    let mut rows = Vec::new();
    for path in &files {
        let run = path.strip_prefix(dir).unwrap_or(path).to_string_lossy().replace('\\', "/");
        match read_table(path).and_then(|t| summarize_table(run, t)) {
            Ok(row) => rows.push(row),
            Err(why) => log::warn!("skipping {}: {why}", path.display()),
        }
    }

    let csv_path = dir.join(format!("{REPORT_STEM}.csv"));
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(&csv_path)?;
    w.write_record([
        "run",
        "kind",
        "success_rate",
        "mean_completed_subtasks",
        "epic_distance",
        "subtask_precision",
        "final_loss",
    ])?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(&csv_path, e))?;

    let mut md = String::from(
        "| run | kind | success rate | completed subtasks | EPIC distance | subtask precision | final loss |\n\
         |---|---|---|---|---|---|---|\n",
    );
    for r in &rows {
        md.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} | {} |\n",
            r.run,
            r.kind,
            fmt_cell(r.success_rate),
            fmt_cell(r.mean_completed_subtasks),
            fmt_cell(r.epic_distance),
            fmt_cell(r.subtask_precision),
            fmt_cell(r.final_loss)
        ));
    }
    let md_path = dir.join(format!("{REPORT_STEM}.md"));
    std::fs::write(&md_path, md).map_err(|e| Error::io(&md_path, e))?;
    println!("{} rows written to {} and {}", rows.len(), csv_path.display(), md_path.display());
    Ok(())
}
