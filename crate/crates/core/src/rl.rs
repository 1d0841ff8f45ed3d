//! Downstream reinforcement learning: a discrete-action advantage
//! actor-critic over parallel ChainManip instances, driven by a pluggable
//! reward source.

use std::collections::VecDeque;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{FrameStack, TimeStep, Trajectory};
use crate::env::{discrete_action, segment, ChainManip, EnvState, Observation, Point, NUM_DISCRETE_ACTIONS};
use crate::error::{Error, Result};
use crate::model::RewardModel;
use crate::numerics::tape::Mat;
use crate::numerics::RngStream;
use crate::train::AdamW;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RLConfig {
    pub gamma: f64,
    pub gae_lambda: f64,
    pub num_envs: usize,
    pub rollout_len: usize,
    /// Environment steps summed over all parallel environments.
    pub total_steps: usize,
    pub learning_rate: f64,
    /// Multiplies every reward before advantage estimation so that values
    /// stay of order one.
    pub reward_scale: f64,
    pub entropy_coef: f64,
    /// Advantages are divided by their batch standard deviation, but never
    /// by less than this; a batch with no reward signal stays near zero
    /// instead of turning critic noise into unit-scale updates.
    pub advantage_std_floor: f64,
    pub value_coef: f64,
    /// Gradient norm limit, applied to actor and critic separately.
    pub max_grad_norm: f64,
    /// Passes over each rollout; 1 with an unbounded clip range is plain A2C.
    pub update_epochs: usize,
    pub minibatch_size: usize,
    /// Probability-ratio clip of the surrogate policy objective.
    pub clip_range: f64,
    pub hidden: usize,
    pub eval_every: usize,
    pub eval_episodes: usize,
    /// Most recent finished training episodes kept for harvesting.
    pub replay_capacity: usize,
    pub seed: u64,
}

impl Default for RLConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            gae_lambda: 0.95,
            num_envs: 32,
            rollout_len: 64,
            total_steps: 400_000,
            learning_rate: 1e-3,
            reward_scale: 0.01,
            entropy_coef: 0.1,
            advantage_std_floor: 0.05,
            value_coef: 0.5,
            max_grad_norm: 0.5,
            update_epochs: 4,
            minibatch_size: 256,
            clip_range: 0.2,
            hidden: 64,
            eval_every: 20_000,
            eval_episodes: 10,
            replay_capacity: 200,
            seed: 0,
        }
    }
}

impl RLConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: Self = toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::Config(format!("gamma {} outside (0, 1)", self.gamma)));
        }
        if !(0.0..=1.0).contains(&self.gae_lambda) {
            return Err(Error::Config("gae_lambda outside [0, 1]".into()));
        }
        if self.num_envs == 0 || self.rollout_len == 0 || self.hidden == 0 || self.eval_every == 0 {
            return Err(Error::Config("num_envs, rollout_len, hidden and eval_every must be >= 1".into()));
        }
        if self.update_epochs == 0 || self.minibatch_size == 0 || !(self.clip_range > 0.0) {
            return Err(Error::Config("update_epochs, minibatch_size and clip_range must be positive".into()));
        }
        if self.eval_episodes == 0 {
            return Err(Error::Config("eval_episodes must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.reward_scale > 0.0 && self.advantage_std_floor > 0.0) || self.entropy_coef < 0.0 || self.value_coef < 0.0 {
            return Err(Error::Config("invalid learning rate or loss coefficients".into()));
        }
        Ok(())
    }
}

fn clip_grad_norm(grads: &mut [Mat], max_norm: f64, step: usize) -> Result<()> {
    let norm = grads.iter().map(|g| g.iter().map(|v| v * v).sum::<f64>()).sum::<f64>().sqrt();
    if !norm.is_finite() {
        return Err(Error::NonFinite(format!("policy gradient at step {step}")));
    }
    if norm > max_norm {
        let s = max_norm / norm;
        grads.iter_mut().for_each(|g| g.mapv_inplace(|v| v * s));
    }
    Ok(())
}

/// A learned reward ready for deployment.
#[derive(Debug, Clone)]
pub struct LearnedReward {
    pub model: RewardModel,
    pub normalize_factor: f64,
    pub eta: f64,
    pub instructions: Vec<Vec<String>>,
}

impl LearnedReward {
    /// `R(window; U_i) / factor` with `i` the inferred subtask of each window.
    pub fn rewards(&self, windows: &[crate::data::Window]) -> Result<Vec<f64>> {
        let eval = self.model.evaluate(windows, &self.instructions)?;
        Ok((0..windows.len())
            .map(|r| {
                let (i, _) = eval.infer(r, self.eta);
                eval.rewards[[r, i]] / self.normalize_factor
            })
            .collect())
    }
}

#[derive(Debug, Clone)]
pub enum RewardSource {
    /// 1 on the transition that completes the task.
    Sparse,
    /// Number of completed subtasks of the reached state.
    OraclePsi,
    Learned(Box<LearnedReward>),
}

impl RewardSource {
    pub fn name(&self) -> &'static str {
        match self {
            RewardSource::Sparse => "sparse",
            RewardSource::OraclePsi => "psi",
            RewardSource::Learned(_) => "learned",
        }
    }

    fn window(&self) -> Option<usize> {
        match self {
            RewardSource::Learned(l) => Some(l.model.config().window),
            _ => None,
        }
    }
}

/// Fully connected network with tanh hidden layers and a linear output.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layers: Vec<(Mat, Mat)>,
}

impl Mlp {
    fn new(sizes: &[usize], out_scale: f64, rng: &mut RngStream) -> Self {
        let n = sizes.len() - 1;
        let layers = (0..n)
            .map(|l| {
                let (fan_in, fan_out) = (sizes[l], sizes[l + 1]);
                let mut bound = 1.0 / (fan_in as f64).sqrt();
                if l + 1 == n {
                    bound *= out_scale;
                }
                let w = Mat::from_shape_simple_fn((fan_in, fan_out), || rng.uniform_range(-bound, bound));
                (w, Mat::zeros((1, fan_out)))
            })
            .collect();
        Self { layers }
    }

    /// Output and the input of every layer.
    fn forward(&self, x: &Mat) -> (Mat, Vec<Mat>) {
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut h = x.clone();
        for (l, (w, b)) in self.layers.iter().enumerate() {
            let mut z = h.dot(w) + b;
            if l + 1 < self.layers.len() {
                z.mapv_inplace(f64::tanh);
            }
            inputs.push(h);
            h = z;
        }
        (h, inputs)
    }

    fn output(&self, x: &Mat) -> Mat {
        self.forward(x).0
    }

    /// Parameter gradients `[dW0, db0, dW1, ...]` for upstream gradient `dout`.
    fn backward(&self, inputs: &[Mat], dout: Mat) -> Vec<Mat> {
        let mut grads = vec![Mat::zeros((0, 0)); 2 * self.layers.len()];
        let mut g = dout;
        for l in (0..self.layers.len()).rev() {
            let (w, _) = &self.layers[l];
            let x = &inputs[l];
            grads[2 * l] = x.t().dot(&g);
            grads[2 * l + 1] = g.sum_axis(ndarray::Axis(0)).insert_axis(ndarray::Axis(0));
            if l > 0 {
                // Inputs of layer l are tanh outputs of layer l - 1.
                let mut gx = g.dot(&w.t());
                ndarray::Zip::from(&mut gx).and(x).for_each(|d, &h| *d *= 1.0 - h * h);
                g = gx;
            }
        }
        grads
    }

    fn params(&self) -> Vec<Mat> {
        self.layers.iter().flat_map(|(w, b)| [w.clone(), b.clone()]).collect()
    }

    fn set_params(&mut self, params: &[Mat]) {
        for (l, (w, b)) in self.layers.iter_mut().enumerate() {
            w.assign(&params[2 * l]);
            b.assign(&params[2 * l + 1]);
        }
    }
}

fn softmax_rows(logits: &Mat) -> Mat {
    let mut p = logits.clone();
    for mut row in p.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        row.mapv_inplace(|v| (v - max).exp());
        let z = row.sum();
        row.mapv_inplace(|v| v / z);
    }
    p
}

/// Agent input: the observation, the offset from the agent to the first
/// block whose completion flag is still clear, then the offset to every
/// block (zeroed once that block is complete).
fn features(obs: &Observation) -> Vec<f64> {
    let m = (obs.len() - 3) / 3;
    let open = |i: usize| obs[3 + 2 * m + i] < 0.5;
    let offset = |i: usize| [obs[3 + 2 * i] - obs[0], obs[4 + 2 * i] - obs[1]];
    let mut f = obs.clone();
    f.extend((0..m).find(|&i| open(i)).map_or([0.0, 0.0], offset));
    for i in 0..m {
        f.extend(if open(i) { offset(i) } else { [0.0, 0.0] });
    }
    f
}

fn feature_dim(obs_dim: usize) -> usize {
    obs_dim + 2 + 2 * (obs_dim - 3) / 3
}

/// Chooses an action from the current state and observation.
pub trait Controller {
    fn act(&self, env: &ChainManip, state: &EnvState, obs: &Observation, rng: &mut RngStream) -> Point;
}

#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    actor: Mlp,
    critic: Mlp,
    a_max: f64,
}

impl Policy {
    pub fn new(obs_dim: usize, hidden: usize, a_max: f64, rng: &mut RngStream) -> Self {
        let inputs = feature_dim(obs_dim);
        Self {
            actor: Mlp::new(&[inputs, hidden, hidden, NUM_DISCRETE_ACTIONS], 0.01, &mut rng.fork("actor")),
            critic: Mlp::new(&[inputs, hidden, hidden, 1], 1.0, &mut rng.fork("critic")),
            a_max,
        }
    }

    fn obs_matrix(obs: &[&Observation]) -> Mat {
        let rows: Vec<Vec<f64>> = obs.iter().map(|o| features(o)).collect();
        Mat::from_shape_fn((rows.len(), rows[0].len()), |(r, c)| rows[r][c])
    }

    pub fn greedy_action(&self, obs: &Observation) -> usize {
        let logits = self.actor.output(&Self::obs_matrix(&[obs]));
        let row = logits.row(0);
        (0..row.len()).fold(0, |best, i| if row[i] > row[best] { i } else { best })
    }

    pub fn value(&self, obs: &Observation) -> f64 {
        self.critic.output(&Self::obs_matrix(&[obs]))[[0, 0]]
    }
}

impl Controller for Policy {
    fn act(&self, _env: &ChainManip, _state: &EnvState, obs: &Observation, _rng: &mut RngStream) -> Point {
        discrete_action(self.greedy_action(obs), self.a_max)
    }
}

/// The scripted controller used to collect demonstrations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScriptedExpert {
    pub noise: f64,
}

impl Controller for ScriptedExpert {
    fn act(&self, env: &ChainManip, state: &EnvState, _obs: &Observation, rng: &mut RngStream) -> Point {
        env.expert_action(state, rng, self.noise)
    }
}

/// Uniformly random discrete displacements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformRandom;

impl Controller for UniformRandom {
    fn act(&self, env: &ChainManip, _state: &EnvState, _obs: &Observation, rng: &mut RngStream) -> Point {
        discrete_action(rng.below(NUM_DISCRETE_ACTIONS), env.config().a_max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub success_rate: f64,
    pub mean_completed_subtasks: f64,
}

/// Rolls out `controller` for `episodes` episodes; episode `i` starts from
/// `rng.fork_index("episode", i)`.
pub fn evaluate(controller: &dyn Controller, env: &ChainManip, episodes: usize, rng: &RngStream) -> Result<EvalResult> {
    if episodes == 0 {
        return Err(Error::Usage("evaluation needs at least one episode".into()));
    }
    let mut successes = 0;
    let mut completed = 0;
    for ep in 0..episodes {
        let mut erng = rng.fork_index("episode", ep as u64);
        let (mut state, mut obs) = env.reset(&mut erng);
        while !env.is_terminal(&state) {
            let a = controller.act(env, &state, &obs, &mut erng);
            let out = env.step(&state, a)?;
            state = out.state;
            obs = out.observation;
        }
        successes += env.is_success(&state) as usize;
        completed += env.completed_count(&state);
    }
    Ok(EvalResult {
        success_rate: successes as f64 / episodes as f64,
        mean_completed_subtasks: completed as f64 / episodes as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub step: usize,
    pub success_rate: f64,
    pub mean_completed_subtasks: f64,
    pub seed: u64,
}

pub fn write_curve(path: &Path, curve: &[CurvePoint]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for p in curve {
        w.serialize(p)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// A finished training episode with its oracle segmentation.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayEpisode {
    pub trajectory: Trajectory,
    pub success: bool,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub policy: Policy,
    pub curve: Vec<CurvePoint>,
    pub replay: Vec<ReplayEpisode>,
    pub episodes_finished: usize,
}

impl RunOutcome {
    pub fn final_eval(&self) -> Option<&CurvePoint> {
        self.curve.last()
    }
}

/// Replay trajectories for relabelling: `expert = false` and subtask labels
/// cleared to 0 (the oracle labels stay in [`RunOutcome::replay`]).
pub fn harvest_replay(run: &RunOutcome) -> Vec<Trajectory> {
    run.replay
        .iter()
        .map(|e| {
            let mut t = e.trajectory.clone();
            t.expert = false;
            t.steps.iter_mut().for_each(|s| s.subtask = 0);
            t
        })
        .collect()
}

struct Worker {
    state: EnvState,
    obs: Observation,
    frames: Option<FrameStack>,
    steps: Vec<TimeStep>,
}

impl Worker {
    fn start(env: &ChainManip, window: Option<usize>, mut rng: RngStream) -> Self {
        let (state, obs) = env.reset(&mut rng);
        let frames = window.map(|k| FrameStack::new(k, &obs));
        Self {
            state,
            obs,
            frames,
            steps: Vec::new(),
        }
    }
}

enum Ending {
    Continues,
    Success,
    Truncated(Observation),
}

/// Trains an actor-critic agent on `env` with rewards from `source`.
///
/// Success ends an episode in an absorbing state whose per-step reward is the
/// source evaluated at the success state; the bootstrap target is that value
/// summed geometrically. Time-limit truncation bootstraps with the critic.
pub fn train_agent(env: &ChainManip, source: &RewardSource, cfg: &RLConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let root = RngStream::new(cfg.seed);
    let mut policy = Policy::new(env.obs_dim(), cfg.hidden, env.config().a_max, &mut root.fork("policy"));
    let mut params: Vec<Mat> = policy.actor.params().into_iter().chain(policy.critic.params()).collect();
    let n_actor = policy.actor.layers.len() * 2;
    let mut opt = AdamW::with_hyper(&params, 0.9, 0.999, 1e-8, 0.0);
    let mut act_rng = root.fork("actions");
    let eval_rng = root.fork("eval");
    let mut shuffle_rng = root.fork("minibatch");
    let window = source.window();
    let mut episode_counter = 0u64;
    let mut workers: Vec<Worker> = (0..cfg.num_envs)
        .map(|_| {
            let w = Worker::start(env, window, root.fork_index("episode", episode_counter));
            episode_counter += 1;
            w
        })
        .collect();
    let mut replay: VecDeque<ReplayEpisode> = VecDeque::new();
    let mut curve = Vec::new();
    let mut steps_done = 0usize;
    let mut next_eval = 0usize;
    let mut episodes_finished = 0usize;
    let n_env = cfg.num_envs;
    let gamma = cfg.gamma;

    let record_eval = |policy: &Policy, step: usize, curve: &mut Vec<CurvePoint>| -> Result<()> {
        let r = evaluate(policy, env, cfg.eval_episodes, &eval_rng)?;
        curve.push(CurvePoint {
            step,
            success_rate: r.success_rate,
            mean_completed_subtasks: r.mean_completed_subtasks,
            seed: cfg.seed,
        });
        Ok(())
    };

    while steps_done < cfg.total_steps {
        if steps_done >= next_eval {
            record_eval(&policy, steps_done, &mut curve)?;
            next_eval += cfg.eval_every;
        }
        let t_len = cfg.rollout_len.min((cfg.total_steps - steps_done).div_ceil(n_env));
        let mut obs_buf: Vec<Observation> = Vec::with_capacity(t_len * n_env);
        let mut actions = Vec::with_capacity(t_len * n_env);
        let mut rewards = vec![0.0; t_len * n_env];
        let mut endings: Vec<Ending> = Vec::with_capacity(t_len * n_env);
        for t in 0..t_len {
            let obs_refs: Vec<&Observation> = workers.iter().map(|w| &w.obs).collect();
            let probs = softmax_rows(&policy.actor.output(&Policy::obs_matrix(&obs_refs)));
            let mut next_windows = Vec::new();
            for (e, w) in workers.iter_mut().enumerate() {
                let a = act_rng.categorical(&probs.row(e).to_vec());
                let outcome = env.step(&w.state, discrete_action(a, env.config().a_max))?;
                obs_buf.push(w.obs.clone());
                actions.push(a);
                w.steps.push(TimeStep {
                    t: w.steps.len(),
                    obs: w.obs.clone(),
                    action: discrete_action(a, env.config().a_max).to_vec(),
                    subtask: segment(&w.state),
                });
                rewards[t * n_env + e] = match source {
                    RewardSource::Sparse => outcome.sparse_reward,
                    RewardSource::OraclePsi => env.completed_count(&outcome.state) as f64,
                    RewardSource::Learned(_) => 0.0,
                };
                if let Some(f) = &mut w.frames {
                    f.push(&outcome.observation);
                    next_windows.push(f.window());
                }
                w.state = outcome.state;
                w.obs = outcome.observation;
            }
            if let RewardSource::Learned(l) = source {
                for (e, r) in l.rewards(&next_windows)?.into_iter().enumerate() {
                    rewards[t * n_env + e] = r;
                }
            }
            for w in workers.iter_mut() {
                if !env.is_terminal(&w.state) {
                    endings.push(Ending::Continues);
                    continue;
                }
                let success = env.is_success(&w.state);
                endings.push(if success {
                    Ending::Success
                } else {
                    Ending::Truncated(w.obs.clone())
                });
                w.steps.push(TimeStep {
                    t: w.steps.len(),
                    obs: w.obs.clone(),
                    action: vec![0.0, 0.0],
                    subtask: segment(&w.state),
                });
                let trajectory = Trajectory {
                    episode_id: episodes_finished as u64,
                    expert: false,
                    steps: std::mem::take(&mut w.steps),
                };
                episodes_finished += 1;
                if cfg.replay_capacity > 0 {
                    if replay.len() == cfg.replay_capacity {
                        replay.pop_front();
                    }
                    replay.push_back(ReplayEpisode { trajectory, success });
                }
                *w = Worker::start(env, window, root.fork_index("episode", episode_counter));
                episode_counter += 1;
            }
        }
        steps_done += t_len * n_env;

        // Values of visited states and bootstrap values.
        let obs_refs: Vec<&Observation> = obs_buf.iter().collect();
        let x = Policy::obs_matrix(&obs_refs);
        let values = policy.critic.output(&x);
        let last_refs: Vec<&Observation> = workers.iter().map(|w| &w.obs).collect();
        let last_values = policy.critic.output(&Policy::obs_matrix(&last_refs));
        let n = t_len * n_env;
        let mut adv = vec![0.0; n];
        let mut returns = vec![0.0; n];
        for e in 0..n_env {
            let mut gae = 0.0;
            for t in (0..t_len).rev() {
                let i = t * n_env + e;
                let r = rewards[i] * cfg.reward_scale;
                let (next_value, chain) = match &endings[i] {
                    Ending::Continues => {
                        let nv = if t + 1 < t_len {
                            values[[i + n_env, 0]]
                        } else {
                            last_values[[e, 0]]
                        };
                        (nv, true)
                    }
                    Ending::Success => (r / (1.0 - gamma), false),
                    Ending::Truncated(o) => (policy.value(o), false),
                };
                let delta = r + gamma * next_value - values[[i, 0]];
                gae = delta + if chain { gamma * cfg.gae_lambda * gae } else { 0.0 };
                adv[i] = gae;
                returns[i] = gae + values[[i, 0]];
            }
        }
        let mean = adv.iter().sum::<f64>() / n as f64;
        let std = (adv.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
        let norm_adv: Vec<f64> = adv.iter().map(|a| (a - mean) / std.max(cfg.advantage_std_floor)).collect();

        let old_logp: Vec<f64> = {
            let probs = softmax_rows(&policy.actor.output(&x));
            (0..n).map(|i| probs[[i, actions[i]]].max(1e-300).ln()).collect()
        };
        // Learning rate and entropy weight decay linearly to zero over the
        // budget, so the final greedy policy is sharp.
        let decay = 1.0 - (steps_done - n) as f64 / cfg.total_steps as f64;
        let lr = cfg.learning_rate * decay;
        let entropy_coef = cfg.entropy_coef * decay;
        let mut order: Vec<usize> = (0..n).collect();
        let mb = cfg.minibatch_size.min(n);
        for _ in 0..cfg.update_epochs {
            shuffle_rng.shuffle(&mut order);
            for chunk in order.chunks(mb) {
                let xb = x.select(ndarray::Axis(0), chunk);
                let (logits, actor_inputs) = policy.actor.forward(&xb);
                let (values, critic_inputs) = policy.critic.forward(&xb);
                let probs = softmax_rows(&logits);
                let nf = chunk.len() as f64;
                let mut dlogits = Mat::zeros(probs.raw_dim());
                let mut dvalues = Mat::zeros((chunk.len(), 1));
                for (r, &i) in chunk.iter().enumerate() {
                    let p = probs.row(r);
                    let h: f64 = -p.iter().map(|&q| if q > 0.0 { q * q.ln() } else { 0.0 }).sum::<f64>();
                    let ratio = (p[actions[i]].max(1e-300).ln() - old_logp[i]).exp();
                    let a = norm_adv[i];
                    let clipped = (a > 0.0 && ratio > 1.0 + cfg.clip_range) || (a < 0.0 && ratio < 1.0 - cfg.clip_range);
                    let pg = if clipped { 0.0 } else { a * ratio };
                    for k in 0..NUM_DISCRETE_ACTIONS {
                        let onehot = if k == actions[i] { 1.0 } else { 0.0 };
                        let logp = p[k].max(1e-300).ln();
                        dlogits[[r, k]] = -pg * (onehot - p[k]) / nf + entropy_coef * p[k] * (logp + h) / nf;
                    }
                    dvalues[[r, 0]] = 2.0 * cfg.value_coef * (values[[r, 0]] - returns[i]) / nf;
                }
                let mut actor_grads = policy.actor.backward(&actor_inputs, dlogits);
                let mut critic_grads = policy.critic.backward(&critic_inputs, dvalues);
                clip_grad_norm(&mut actor_grads, cfg.max_grad_norm, steps_done)?;
                clip_grad_norm(&mut critic_grads, cfg.max_grad_norm, steps_done)?;
                actor_grads.extend(critic_grads);
                opt.step(&mut params, &actor_grads, lr);
                policy.actor.set_params(&params[..n_actor]);
                policy.critic.set_params(&params[n_actor..]);
            }
        }
    }
    record_eval(&policy, steps_done, &mut curve)?;
    Ok(RunOutcome {
        policy,
        curve,
        replay: replay.into_iter().collect(),
        episodes_finished,
    })
}
