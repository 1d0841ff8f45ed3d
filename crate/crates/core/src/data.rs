//! Segmented demonstration data: collection, K-frame windows, JSON-lines
//! persistence, minibatch sampling and automatic labelling of suboptimal
//! rollouts.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::env::{segment, ChainManip, EnvState, Observation, Point, SubtaskId};
use crate::error::{Error, Result};
use crate::model::RewardModel;
use crate::numerics::RngStream;

pub const DATASET_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeStep {
    pub t: usize,
    pub obs: Observation,
    pub action: Vec<f64>,
    pub subtask: SubtaskId,
}

/// One episode `o_0 .. o_T`. The record at `t` holds the observation and the
/// action taken from it; the final record carries a zero action.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub episode_id: u64,
    pub expert: bool,
    pub steps: Vec<TimeStep>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn labels(&self) -> Vec<SubtaskId> {
        self.steps.iter().map(|s| s.subtask).collect()
    }

    pub fn validate(&self, num_subtasks: usize) -> Result<()> {
        for (i, s) in self.steps.iter().enumerate() {
            if s.t != i {
                return Err(Error::Config(format!(
                    "episode {}: timestep {} at position {i}",
                    self.episode_id, s.t
                )));
            }
            if s.subtask >= num_subtasks {
                return Err(Error::OutOfRange {
                    index: s.subtask,
                    limit: num_subtasks,
                });
            }
        }
        if self.expert && self.steps.windows(2).any(|w| w[1].subtask < w[0].subtask) {
            return Err(Error::Config(format!(
                "expert episode {} has decreasing subtask labels",
                self.episode_id
            )));
        }
        Ok(())
    }
}

/// The `K` most recent observations ending at some timestep, oldest first.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub frames: Vec<Observation>,
}

impl Window {
    pub fn last(&self) -> &Observation {
        self.frames.last().expect("windows are never empty")
    }
}

/// Window ending at `t`; slots before the episode start repeat `o_0`.
pub fn window_at(traj: &Trajectory, t: usize, k: usize) -> Window {
    let frames = (0..k)
        .map(|slot| {
            let back = k - 1 - slot;
            traj.steps[t.saturating_sub(back)].obs.clone()
        })
        .collect();
    Window { frames }
}

pub fn make_windows(traj: &Trajectory, k: usize) -> Result<Vec<Window>> {
    if k == 0 {
        return Err(Error::Config("window length must be >= 1".into()));
    }
    if traj.is_empty() {
        return Err(Error::EmptyDataset(format!(
            "episode {} has no timesteps",
            traj.episode_id
        )));
    }
    Ok((0..traj.len()).map(|t| window_at(traj, t, k)).collect())
}

/// Rolling frame stack used online, matching [`window_at`] padding.
#[derive(Debug, Clone)]
pub struct FrameStack {
    k: usize,
    frames: std::collections::VecDeque<Observation>,
}

impl FrameStack {
    pub fn new(k: usize, first: &Observation) -> Self {
        Self {
            k,
            frames: std::iter::repeat(first.clone()).take(k).collect(),
        }
    }

    pub fn push(&mut self, obs: &Observation) {
        self.frames.pop_front();
        self.frames.push_back(obs.clone());
    }

    pub fn window(&self) -> Window {
        Window {
            frames: self.frames.iter().cloned().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.k
    }

    pub fn is_empty(&self) -> bool {
        self.k == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentedDataset {
    /// Which refinement round produced this dataset (0 for expert-only data).
    pub iteration: usize,
    pub num_subtasks: usize,
    pub vocab: Vec<String>,
    pub instructions: Vec<Vec<String>>,
    pub trajectories: Vec<Trajectory>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    version: u64,
    m: usize,
    vocab: Vec<String>,
    instructions: Vec<Vec<String>>,
    #[serde(default)]
    iteration: usize,
}

#[derive(Serialize, Deserialize)]
struct Record {
    episode: u64,
    t: usize,
    obs: Vec<f64>,
    action: Vec<f64>,
    subtask: usize,
    expert: bool,
}

impl SegmentedDataset {
    pub fn new(env: &ChainManip, trajectories: Vec<Trajectory>) -> Self {
        Self {
            iteration: 0,
            num_subtasks: env.num_subtasks(),
            vocab: crate::env::VOCABULARY.iter().map(|s| s.to_string()).collect(),
            instructions: env.instructions(),
            trajectories,
        }
    }

    pub fn num_timesteps(&self) -> usize {
        self.trajectories.iter().map(Trajectory::len).sum()
    }

    pub fn obs_dim(&self) -> Option<usize> {
        self.trajectories
            .iter()
            .find_map(|t| t.steps.first())
            .map(|s| s.obs.len())
    }

    pub fn experts(&self) -> impl Iterator<Item = &Trajectory> {
        self.trajectories.iter().filter(|t| t.expert)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trajectories.is_empty() {
            return Err(Error::EmptyDataset("no trajectories".into()));
        }
        if !self.trajectories.iter().any(|t| t.expert) {
            return Err(Error::EmptyDataset("no expert trajectory".into()));
        }
        if self.instructions.len() != self.num_subtasks {
            return Err(Error::Config(format!(
                "{} instructions for {} subtasks",
                self.instructions.len(),
                self.num_subtasks
            )));
        }
        let dim = self.obs_dim();
        for t in &self.trajectories {
            t.validate(self.num_subtasks)?;
            if t.steps.iter().any(|s| Some(s.obs.len()) != dim) {
                return Err(Error::Shape(format!(
                    "episode {} has inconsistent observation width",
                    t.episode_id
                )));
            }
        }
        Ok(())
    }

    /// Appends `other`'s trajectories, renumbering their episode ids after
    /// this dataset's largest id.
    pub fn merge(&mut self, other: Vec<Trajectory>) {
        let mut next = self
            .trajectories
            .iter()
            .map(|t| t.episode_id + 1)
            .max()
            .unwrap_or(0);
        for mut t in other {
            t.episode_id = next;
            next += 1;
            self.trajectories.push(t);
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write_to(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    fn write_to(&self, w: &mut impl Write) -> std::io::Result<()> {
        let header = Header {
            version: DATASET_VERSION,
            m: self.num_subtasks,
            vocab: self.vocab.clone(),
            instructions: self.instructions.clone(),
            iteration: self.iteration,
        };
        serde_json::to_writer(&mut *w, &header)?;
        writeln!(w)?;
        for traj in &self.trajectories {
            for s in &traj.steps {
                let rec = Record {
                    episode: traj.episode_id,
                    t: s.t,
                    obs: s.obs.clone(),
                    action: s.action.clone(),
                    subtask: s.subtask,
                    expert: traj.expert,
                };
                serde_json::to_writer(&mut *w, &rec)?;
                writeln!(w)?;
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let parse_err = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut lines = BufReader::new(file).lines().enumerate();
        let header: Header = loop {
            match lines.next() {
                None => return Err(Error::EmptyDataset(format!("{} is empty", path.display()))),
                Some((i, line)) => {
                    let line = line.map_err(|e| Error::io(path, e))?;
                    if line.trim().is_empty() {
                        continue;
                    }
                    break serde_json::from_str(&line).map_err(|e| parse_err(i + 1, e.to_string()))?;
                }
            }
        };
        if header.version != DATASET_VERSION {
            return Err(Error::Version {
                found: header.version,
                expected: DATASET_VERSION,
            });
        }
        let mut trajectories: Vec<Trajectory> = Vec::new();
        for (i, line) in lines {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: Record =
                serde_json::from_str(&line).map_err(|e| parse_err(i + 1, e.to_string()))?;
            let step = TimeStep {
                t: rec.t,
                obs: rec.obs,
                action: rec.action,
                subtask: rec.subtask,
            };
            match trajectories.last_mut() {
                Some(tr) if tr.episode_id == rec.episode => {
                    if tr.expert != rec.expert {
                        return Err(parse_err(i + 1, "expert flag changes within an episode".into()));
                    }
                    if rec.t != tr.steps.len() {
                        return Err(parse_err(
                            i + 1,
                            format!("expected t = {}, found {}", tr.steps.len(), rec.t),
                        ));
                    }
                    tr.steps.push(step);
                }
                _ => {
                    if rec.t != 0 {
                        return Err(parse_err(i + 1, format!("episode {} starts at t = {}", rec.episode, rec.t)));
                    }
                    trajectories.push(Trajectory {
                        episode_id: rec.episode,
                        expert: rec.expert,
                        steps: vec![step],
                    });
                }
            }
        }
        let ds = SegmentedDataset {
            iteration: header.iteration,
            num_subtasks: header.m,
            vocab: header.vocab,
            instructions: header.instructions,
            trajectories,
        };
        ds.validate()?;
        Ok(ds)
    }
}

/// Rolls out `policy` for `n` episodes, labelling every observation with the
/// segmentation oracle. Each episode uses its own forked stream.
pub fn collect_demos<P>(
    env: &ChainManip,
    mut policy: P,
    n: usize,
    expert: bool,
    rng: &RngStream,
) -> Result<Vec<Trajectory>>
where
    P: FnMut(&EnvState, &mut RngStream) -> Point,
{
    if n == 0 {
        return Err(Error::Usage("number of demonstrations must be >= 1".into()));
    }
    let mut out = Vec::with_capacity(n);
    for ep in 0..n {
        let mut erng = rng.fork_index("episode", ep as u64);
        let (mut state, mut obs) = env.reset(&mut erng);
        let mut steps = Vec::new();
        loop {
            let label = segment(&state);
            let t = steps.len();
            if env.is_terminal(&state) {
                steps.push(TimeStep {
                    t,
                    obs,
                    action: vec![0.0, 0.0],
                    subtask: label,
                });
                break;
            }
            let action = policy(&state, &mut erng);
            let outcome = env.step(&state, action)?;
            steps.push(TimeStep {
                t,
                obs,
                action: action.to_vec(),
                subtask: label,
            });
            state = outcome.state;
            obs = outcome.observation;
        }
        out.push(Trajectory {
            episode_id: ep as u64,
            expert,
            steps,
        });
    }
    Ok(out)
}

/// Scripted-expert demonstrations; `noise > 0` gives suboptimal data.
pub fn collect_expert_demos(
    env: &ChainManip,
    n: usize,
    noise: f64,
    rng: &RngStream,
) -> Result<Vec<Trajectory>> {
    collect_demos(
        env,
        |s, r| env.expert_action(s, r, noise),
        n,
        noise == 0.0,
        rng,
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchItem {
    pub window: Window,
    pub label: SubtaskId,
    /// Numeric segmentation target (the label as a real number).
    pub target: f64,
    pub expert: bool,
}

/// Flat `(trajectory, t)` index over every timestep of a dataset.
#[derive(Debug, Clone)]
pub struct TimestepIndex {
    entries: Vec<(usize, usize)>,
    expert_entries: Vec<(usize, usize)>,
}

impl TimestepIndex {
    pub fn new(ds: &SegmentedDataset) -> Self {
        let mut entries = Vec::new();
        let mut expert_entries = Vec::new();
        for (ti, traj) in ds.trajectories.iter().enumerate() {
            for t in 0..traj.len() {
                entries.push((ti, t));
                if traj.expert {
                    expert_entries.push((ti, t));
                }
            }
        }
        Self {
            entries,
            expert_entries,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(usize, usize)] {
        &self.entries
    }

    pub fn sample(&self, rng: &mut RngStream, expert_only: bool) -> (usize, usize) {
        let pool = if expert_only {
            &self.expert_entries
        } else {
            &self.entries
        };
        pool[rng.below(pool.len())]
    }
}

pub fn batch_item(ds: &SegmentedDataset, traj: usize, t: usize, k: usize) -> BatchItem {
    let tr = &ds.trajectories[traj];
    let label = tr.steps[t].subtask;
    BatchItem {
        window: window_at(tr, t, k),
        label,
        target: label as f64,
        expert: tr.expert,
    }
}

/// Uniform minibatch over all timesteps of `ds`.
pub fn sample_batch(ds: &SegmentedDataset, size: usize, k: usize, rng: &mut RngStream) -> Result<Vec<BatchItem>> {
    sample_batch_indexed(ds, &TimestepIndex::new(ds), size, k, rng)
}

pub fn sample_batch_indexed(
    ds: &SegmentedDataset,
    index: &TimestepIndex,
    size: usize,
    k: usize,
    rng: &mut RngStream,
) -> Result<Vec<BatchItem>> {
    if size < 3 {
        return Err(Error::Config(format!("batch size must be >= 3, got {size}")));
    }
    if index.len() < size {
        return Err(Error::EmptyDataset(format!(
            "dataset has {} timesteps, batch needs {size}",
            index.len()
        )));
    }
    Ok((0..size)
        .map(|_| {
            let (ti, t) = index.sample(rng, false);
            batch_item(ds, ti, t, k)
        })
        .collect())
}

/// Labels a rollout with the reward model.
///
/// Each timestep gets the margin-adjusted inferred subtask. Labels never
/// decrease. When the inferred subtask advances past subtask `c`, the
/// advance is accepted only if the rollout reached the completion threshold
/// `thresholds[c]` somewhere inside the `c` segment; otherwise `c` is marked
/// failed and every remaining timestep is labelled `c`.
pub fn label_suboptimal(
    traj: &Trajectory,
    model: &RewardModel,
    instructions: &[Vec<String>],
    thresholds: &[f64],
    eta: f64,
) -> Result<Trajectory> {
    if thresholds.len() != instructions.len() {
        return Err(Error::Shape(format!(
            "{} thresholds for {} subtasks",
            thresholds.len(),
            instructions.len()
        )));
    }
    let windows = make_windows(traj, model.config().window)?;
    let eval = model.evaluate(&windows, instructions)?;
    let inferred: Vec<(SubtaskId, f64)> = (0..windows.len())
        .map(|r| eval.infer(r, eta))
        .collect();
    let labels = gate_labels(&inferred, &eval.sims, thresholds);
    let mut out = traj.clone();
    for (s, l) in out.steps.iter_mut().zip(labels) {
        s.subtask = l;
    }
    Ok(out)
}

/// The labelling rule of [`label_suboptimal`] on precomputed inference
/// results; `sims[t][i]` is the similarity of timestep `t` to subtask `i`.
pub fn gate_labels(
    inferred: &[(SubtaskId, f64)],
    sims: &ndarray::Array2<f64>,
    thresholds: &[f64],
) -> Vec<SubtaskId> {
    let mut labels = Vec::with_capacity(inferred.len());
    let Some(&(first, _)) = inferred.first() else {
        return labels;
    };
    let mut current = first;
    let mut best = f64::NEG_INFINITY;
    let mut failed = false;
    for (t, &(guess, _)) in inferred.iter().enumerate() {
        if !failed {
            best = best.max(sims[[t, current]]);
            if guess > current {
                if best >= thresholds[current] {
                    current = guess;
                    best = sims[[t, current]];
                } else {
                    failed = true;
                }
            }
        }
        labels.push(current);
    }
    labels
}

/// Manual label corrections: CSV rows `episode,t_from,t_to,subtask`
/// (inclusive range) with a header line.
pub fn apply_relabel_overrides(ds: &mut SegmentedDataset, path: &Path) -> Result<usize> {
    #[derive(Deserialize)]
    struct Row {
        episode: u64,
        t_from: usize,
        t_to: usize,
        subtask: usize,
    }
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let mut changed = 0;
    for (i, row) in reader.deserialize::<Row>().enumerate() {
        let row = row.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i + 2,
            message: e.to_string(),
        })?;
        if row.subtask >= ds.num_subtasks {
            return Err(Error::OutOfRange {
                index: row.subtask,
                limit: ds.num_subtasks,
            });
        }
        let traj = ds
            .trajectories
            .iter_mut()
            .find(|t| t.episode_id == row.episode)
            .ok_or_else(|| Error::Config(format!("override names unknown episode {}", row.episode)))?;
        for s in traj.steps.iter_mut().filter(|s| (row.t_from..=row.t_to).contains(&s.t)) {
            s.subtask = row.subtask;
            changed += 1;
        }
    }
    ds.validate()?;
    Ok(changed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::EnvConfig;
    use ndarray::Array2;

    fn env3() -> ChainManip {
        ChainManip::new(EnvConfig::chain_manip(3).unwrap()).unwrap()
    }

    fn small_dataset(n: usize) -> SegmentedDataset {
        let env = env3();
        let trajs = collect_expert_demos(&env, n, 0.0, &RngStream::new(1)).unwrap();
        SegmentedDataset::new(&env, trajs)
    }

    #[test]
    fn expert_demos_succeed_and_end_on_last_subtask() {
        let ds = small_dataset(50);
        assert_eq!(ds.trajectories.len(), 50);
        for t in &ds.trajectories {
            assert!(t.expert);
            assert_eq!(*t.labels().last().unwrap(), 2);
            let last = &t.steps.last().unwrap().obs;
            assert_eq!(&last[last.len() - 3..], &[1.0, 1.0, 1.0]);
            t.validate(3).unwrap();
        }
        assert!(matches!(
            collect_expert_demos(&env3(), 0, 0.0, &RngStream::new(1)),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn windows_pad_with_first_frame() {
        let ds = small_dataset(1);
        let tr = &ds.trajectories[0];
        let w1 = make_windows(tr, 1).unwrap();
        assert_eq!(w1.len(), tr.len());
        assert_eq!(w1[5].frames, vec![tr.steps[5].obs.clone()]);
        let w4 = make_windows(tr, 4).unwrap();
        assert_eq!(w4[0].frames, vec![tr.steps[0].obs.clone(); 4]);
        assert_eq!(w4[1].frames[2], tr.steps[0].obs);
        assert_eq!(w4[1].frames[3], tr.steps[1].obs);
        assert_eq!(w4[10].frames[0], tr.steps[7].obs);
        assert!(make_windows(tr, 0).is_err());
        let empty = Trajectory {
            episode_id: 0,
            expert: true,
            steps: vec![],
        };
        assert!(make_windows(&empty, 4).is_err());
    }

    #[test]
    fn frame_stack_matches_windows() {
        let ds = small_dataset(1);
        let tr = &ds.trajectories[0];
        let mut stack = FrameStack::new(4, &tr.steps[0].obs);
        assert_eq!(stack.window(), window_at(tr, 0, 4));
        for t in 1..tr.len() {
            stack.push(&tr.steps[t].obs);
            assert_eq!(stack.window(), window_at(tr, t, 4));
        }
    }

    #[test]
    fn save_load_round_trip_is_stable() {
        let ds = small_dataset(3);
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.jsonl");
        let b = dir.path().join("b.jsonl");
        ds.save(&a).unwrap();
        let back = SegmentedDataset::load(&a).unwrap();
        assert_eq!(back, ds);
        back.save(&b).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }

    #[test]
    fn load_errors_name_the_problem() {
        let ds = small_dataset(2);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.jsonl");
        ds.save(&p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();

        let truncated = dir.path().join("t.jsonl");
        let cut = &text[..text.len() - 40];
        std::fs::write(&truncated, cut).unwrap();
        let n_lines = cut.lines().count();
        match SegmentedDataset::load(&truncated) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, n_lines),
            other => panic!("expected parse error, got {other:?}"),
        }

        let empty = dir.path().join("e.jsonl");
        std::fs::write(&empty, "").unwrap();
        assert!(matches!(SegmentedDataset::load(&empty), Err(Error::EmptyDataset(_))));

        let versioned = dir.path().join("v.jsonl");
        std::fs::write(&versioned, text.replacen("\"version\":1", "\"version\":9", 1)).unwrap();
        assert!(matches!(
            SegmentedDataset::load(&versioned),
            Err(Error::Version { found: 9, .. })
        ));
    }

    #[test]
    fn batches_are_reproducible() {
        let ds = small_dataset(5);
        let a = sample_batch(&ds, 32, 4, &mut RngStream::new(3)).unwrap();
        let b = sample_batch(&ds, 32, 4, &mut RngStream::new(3)).unwrap();
        assert_eq!(a.len(), 32);
        assert_eq!(a, b);
        assert!(a.iter().all(|x| x.target == x.label as f64 && x.window.frames.len() == 4));
        assert!(sample_batch(&ds, 2, 4, &mut RngStream::new(3)).is_err());
        assert!(matches!(
            sample_batch(&ds, 100_000, 4, &mut RngStream::new(3)),
            Err(Error::EmptyDataset(_))
        ));
    }

    fn sims_with(rows: &[[f64; 3]]) -> Array2<f64> {
        Array2::from_shape_fn((rows.len(), 3), |(r, c)| rows[r][c])
    }

    #[test]
    fn gate_accepts_advances_that_reached_threshold() {
        let inferred = vec![(0, 0.5), (0, 0.9), (1, 0.8), (1, 0.9), (2, 0.9)];
        let sims = sims_with(&[
            [0.5, 0.0, 0.0],
            [0.9, 0.0, 0.0],
            [0.0, 0.8, 0.0],
            [0.0, 0.9, 0.0],
            [0.0, 0.0, 0.9],
        ]);
        assert_eq!(gate_labels(&inferred, &sims, &[0.8, 0.85, 0.9]), vec![0, 0, 1, 1, 2]);
        // Vacuous thresholds never fail.
        let neg = [f64::NEG_INFINITY; 3];
        assert_eq!(gate_labels(&inferred, &sims, &neg), vec![0, 0, 1, 1, 2]);
    }

    #[test]
    fn gate_marks_failure_and_holds_label() {
        // Stalls in subtask 1 with low similarity, then a spurious jump to 2.
        let mut inferred = vec![(0, 0.9), (1, 0.9)];
        let mut rows = vec![[0.9, 0.0, 0.0], [0.0, 0.3, 0.0]];
        for _ in 0..5 {
            inferred.push((1, 0.3));
            rows.push([0.0, 0.3, 0.0]);
        }
        inferred.push((2, 0.7));
        rows.push([0.0, 0.3, 0.7]);
        inferred.push((0, 0.7));
        rows.push([0.7, 0.3, 0.0]);
        let labels = gate_labels(&inferred, &sims_with(&rows), &[0.8, 0.8, 0.8]);
        assert_eq!(labels[0], 0);
        assert!(labels[1..].iter().all(|&l| l == 1));
        assert!(labels.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn relabel_overrides_apply() {
        let mut ds = small_dataset(2);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("o.csv");
        std::fs::write(&p, "episode,t_from,t_to,subtask\n1,0,2,0\n").unwrap();
        let changed = apply_relabel_overrides(&mut ds, &p).unwrap();
        assert_eq!(changed, 3);
        std::fs::write(&p, "episode,t_from,t_to,subtask\n7,0,2,0\n").unwrap();
        assert!(apply_relabel_overrides(&mut ds, &p).is_err());
    }
}
