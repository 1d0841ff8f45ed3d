//! ChainManip: a deterministic pick-and-place chain in the unit square.
//!
//! Subtask `i` carries block `i` into zone `i`. Subtasks must complete in
//! index order; the segmentation oracle returns the smallest incomplete index.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::RngStream;

pub type SubtaskId = usize;
pub type Point = [f64; 2];

/// Shared instruction vocabulary. Every preset (including the held-out
/// recombinations) draws its tokens from this list.
pub const VOCABULARY: &[&str] = &[
    "move", "block", "to", "zone", "red", "green", "blue", "yellow", "purple", "north", "east",
    "south", "west", "center",
];

const COLORS: [&str; 5] = ["red", "green", "blue", "yellow", "purple"];
const OBJECT_STARTS: [Point; 5] = [[0.30, 0.62], [0.62, 0.70], [0.70, 0.38], [0.38, 0.30], [0.20, 0.20]];
const ZONE_NAMES: [&str; 5] = ["north", "east", "south", "west", "center"];
const ZONES: [Point; 5] = [[0.5, 0.85], [0.85, 0.5], [0.5, 0.15], [0.15, 0.5], [0.5, 0.5]];

/// Names accepted by [`EnvConfig::preset`].
pub const PRESETS: &[&str] = &[
    "chainmanip-1",
    "chainmanip-2",
    "chainmanip-3",
    "chainmanip-4",
    "chainmanip-5",
    "chainmanip-3-swap",
    "chainmanip-3-mix",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvConfig {
    pub name: String,
    pub num_subtasks: usize,
    pub object_starts: Vec<Point>,
    pub target_zones: Vec<Point>,
    /// Color token of each block.
    pub colors: Vec<String>,
    /// Name token of each target zone.
    pub zone_names: Vec<String>,
    pub grasp_radius: f64,
    pub zone_radius: f64,
    /// Per-axis displacement bound.
    pub a_max: f64,
    pub max_steps: usize,
    pub seed: u64,
}

impl EnvConfig {
    /// Default ChainManip-m: blocks `0..m` of the shared palette, each
    /// delivered to its own zone.
    pub fn chain_manip(m: usize) -> Result<Self> {
        if m == 0 || m > COLORS.len() {
            return Err(Error::Config(format!(
                "ChainManip supports 1..={} subtasks, got {m}",
                COLORS.len()
            )));
        }
        Ok(Self::from_assignment(
            &format!("chainmanip-{m}"),
            &(0..m).map(|i| (i, i)).collect::<Vec<_>>(),
        ))
    }

    /// Builds a task from `(block, zone)` palette indices in subtask order.
    fn from_assignment(name: &str, pairs: &[(usize, usize)]) -> Self {
        Self {
            name: name.to_string(),
            num_subtasks: pairs.len(),
            object_starts: pairs.iter().map(|&(b, _)| OBJECT_STARTS[b]).collect(),
            target_zones: pairs.iter().map(|&(_, z)| ZONES[z]).collect(),
            colors: pairs.iter().map(|&(b, _)| COLORS[b].to_string()).collect(),
            zone_names: pairs.iter().map(|&(_, z)| ZONE_NAMES[z].to_string()).collect(),
            grasp_radius: 0.06,
            zone_radius: 0.08,
            a_max: 0.05,
            max_steps: 200,
            seed: 0,
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        let cfg = match name {
            // Held-out recombinations: the ChainManip-3 blocks delivered to
            // permuted zones, so every instruction token has been seen.
            "chainmanip-3-swap" => Self::from_assignment(name, &[(0, 1), (1, 2), (2, 0)]),
            "chainmanip-3-mix" => Self::from_assignment(name, &[(0, 2), (1, 0), (2, 1)]),
            _ => match name.strip_prefix("chainmanip-").and_then(|m| m.parse().ok()) {
                Some(m) => Self::chain_manip(m)?,
                None => {
                    return Err(Error::Config(format!(
                        "unknown environment preset {name:?} (known: {})",
                        PRESETS.join(", ")
                    )))
                }
            },
        };
        Ok(cfg)
    }

    /// Reads a TOML key/value file, or resolves a preset name.
    pub fn load(spec: &str) -> Result<Self> {
        let path = Path::new(spec);
        let cfg: Self = if path.exists() {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            toml::from_str(&text).map_err(|e| Error::Config(format!("{spec}: {e}")))?
        } else {
            Self::preset(spec)?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("EnvConfig serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.num_subtasks;
        if m == 0 {
            return Err(Error::Config("num_subtasks must be >= 1".into()));
        }
        for (what, len) in [
            ("object_starts", self.object_starts.len()),
            ("target_zones", self.target_zones.len()),
            ("colors", self.colors.len()),
            ("zone_names", self.zone_names.len()),
        ] {
            if len != m {
                return Err(Error::Config(format!("{what} has {len} entries for {m} subtasks")));
            }
        }
        let inside = |p: &Point| p.iter().all(|c| (0.0..=1.0).contains(c));
        if !self.object_starts.iter().chain(&self.target_zones).all(inside) {
            return Err(Error::Config("positions must lie in the unit square".into()));
        }
        if !(self.zone_radius > 0.0 && self.grasp_radius > 0.0 && self.a_max > 0.0) {
            return Err(Error::Config("radii and a_max must be positive".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::Config("max_steps must be >= 1".into()));
        }
        for tok in self.colors.iter().chain(&self.zone_names) {
            if !VOCABULARY.contains(&tok.as_str()) {
                return Err(Error::Vocabulary(tok.clone()));
            }
        }
        Ok(())
    }

    pub fn obs_dim(&self) -> usize {
        3 + 3 * self.num_subtasks
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvState {
    pub agent: Point,
    pub carried: Option<SubtaskId>,
    pub objects: Vec<Point>,
    pub steps_elapsed: usize,
    pub completed: Vec<bool>,
}

pub type Observation = Vec<f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub state: EnvState,
    pub observation: Observation,
    pub sparse_reward: f64,
    pub done: bool,
}

fn dist(a: &Point, b: &Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// The 9 discrete displacements used by the RL agent: stay, then the eight
/// compass directions starting north and going clockwise.
pub fn discrete_action(index: usize, a_max: f64) -> Point {
    const DIRS: [(f64, f64); 9] = [
        (0.0, 0.0),
        (0.0, 1.0),
        (1.0, 1.0),
        (1.0, 0.0),
        (1.0, -1.0),
        (0.0, -1.0),
        (-1.0, -1.0),
        (-1.0, 0.0),
        (-1.0, 1.0),
    ];
    let (dx, dy) = DIRS[index];
    [dx * a_max, dy * a_max]
}

pub const NUM_DISCRETE_ACTIONS: usize = 9;

#[derive(Debug, Clone)]
pub struct ChainManip {
    config: EnvConfig,
}

impl ChainManip {
    pub fn new(config: EnvConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self { config })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn num_subtasks(&self) -> usize {
        self.config.num_subtasks
    }

    pub fn obs_dim(&self) -> usize {
        self.config.obs_dim()
    }

    pub fn reset(&self, rng: &mut RngStream) -> (EnvState, Observation) {
        let m = self.config.num_subtasks;
        let state = EnvState {
            agent: [rng.uniform(), rng.uniform()],
            carried: None,
            objects: self.config.object_starts.clone(),
            steps_elapsed: 0,
            completed: vec![false; m],
        };
        let obs = self.observe(&state);
        (state, obs)
    }

    pub fn observe(&self, state: &EnvState) -> Observation {
        let m = self.config.num_subtasks;
        let mut obs = Vec::with_capacity(self.obs_dim());
        obs.extend_from_slice(&state.agent);
        obs.push(if state.carried.is_some() { 1.0 } else { 0.0 });
        for p in &state.objects {
            obs.extend_from_slice(p);
        }
        obs.extend(state.completed.iter().map(|&c| if c { 1.0 } else { 0.0 }));
        debug_assert_eq!(obs.len(), 3 + 3 * m);
        obs
    }

    pub fn is_success(&self, state: &EnvState) -> bool {
        state.completed.iter().all(|&c| c)
    }

    pub fn is_terminal(&self, state: &EnvState) -> bool {
        self.is_success(state) || state.steps_elapsed >= self.config.max_steps
    }

    pub fn completed_count(&self, state: &EnvState) -> usize {
        state.completed.iter().filter(|&&c| c).count()
    }

    fn in_zone(&self, state: &EnvState, i: SubtaskId) -> bool {
        dist(&state.objects[i], &self.config.target_zones[i]) <= self.config.zone_radius
    }

    pub fn step(&self, state: &EnvState, action: Point) -> Result<StepOutcome> {
        if self.is_terminal(state) {
            return Err(Error::Usage("step called on a terminal state".into()));
        }
        let cfg = &self.config;
        let mut next = state.clone();
        let dx = action[0].clamp(-cfg.a_max, cfg.a_max);
        let dy = action[1].clamp(-cfg.a_max, cfg.a_max);
        next.agent = [
            (state.agent[0] + dx).clamp(0.0, 1.0),
            (state.agent[1] + dy).clamp(0.0, 1.0),
        ];
        next.steps_elapsed += 1;

        if let Some(c) = next.carried {
            next.objects[c] = next.agent;
            if self.in_zone(&next, c) {
                next.carried = None;
            }
        }

        let was_success = self.is_success(state);
        // Ordered completion; a block resting in its zone out of order is
        // picked up by this cascade once its predecessors finish.
        for i in 0..cfg.num_subtasks {
            if next.completed[i] {
                continue;
            }
            if next.carried != Some(i) && self.in_zone(&next, i) {
                next.completed[i] = true;
            } else {
                break;
            }
        }

        if next.carried.is_none() {
            let current = segment(&next);
            if !next.completed[current]
                && !self.in_zone(&next, current)
                && dist(&next.agent, &next.objects[current]) <= cfg.grasp_radius
            {
                next.carried = Some(current);
                next.objects[current] = next.agent;
            }
        }

        let success = self.is_success(&next);
        let sparse_reward = if success && !was_success { 1.0 } else { 0.0 };
        let done = success || next.steps_elapsed >= cfg.max_steps;
        let observation = self.observe(&next);
        Ok(StepOutcome {
            state: next,
            observation,
            sparse_reward,
            done,
        })
    }

    /// Scripted controller: head for the current block, then carry it to its
    /// zone. Gaussian noise of scale `noise` is added per axis to the bounded
    /// command, which is then clipped again.
    pub fn expert_action(&self, state: &EnvState, rng: &mut RngStream, noise: f64) -> Point {
        let cfg = &self.config;
        let target = match state.carried {
            Some(c) => Some(cfg.target_zones[c]),
            None if self.is_success(state) => None,
            None => Some(state.objects[segment(state)]),
        };
        let clip = |v: f64| v.clamp(-cfg.a_max, cfg.a_max);
        let mut a = match target {
            Some(t) => [clip(t[0] - state.agent[0]), clip(t[1] - state.agent[1])],
            None => [0.0, 0.0],
        };
        if noise > 0.0 {
            a[0] = clip(a[0] + noise * rng.normal());
            a[1] = clip(a[1] + noise * rng.normal());
        }
        a
    }

    pub fn instruction(&self, i: SubtaskId) -> Result<Vec<String>> {
        instruction(&self.config, i)
    }

    pub fn instructions(&self) -> Vec<Vec<String>> {
        (0..self.num_subtasks())
            .map(|i| self.instruction(i).expect("index in range"))
            .collect()
    }
}

/// Segmentation oracle: index of the ongoing subtask. Terminal success keeps
/// the final index.
pub fn segment(state: &EnvState) -> SubtaskId {
    state
        .completed
        .iter()
        .position(|&c| !c)
        .unwrap_or(state.completed.len().saturating_sub(1))
}

pub fn instruction(config: &EnvConfig, i: SubtaskId) -> Result<Vec<String>> {
    if i >= config.num_subtasks {
        return Err(Error::OutOfRange {
            index: i,
            limit: config.num_subtasks,
        });
    }
    Ok(vec![
        "move".into(),
        "block".into(),
        config.colors[i].clone(),
        "to".into(),
        "zone".into(),
        config.zone_names[i].clone(),
    ])
}
