//! Iterative refinement: harvest rollouts from an agent trained on the
//! current reward, label them automatically, fine-tune on the union.

use serde::{Deserialize, Serialize};

use super::{compute_thresholds, normalize_factor, optimize, MetricRow, TrainConfig};
use crate::data::{label_suboptimal, SegmentedDataset, Trajectory};
use crate::env::ChainManip;
use crate::error::{Error, Result};
use crate::model::RewardModel;
use crate::numerics::RngStream;
use crate::rl::{harvest_replay, train_agent, CurvePoint, LearnedReward, RLConfig, RewardSource};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RefinementConfig {
    pub iterations: usize,
    /// Agent trained in each iteration to collect replay.
    pub rl: RLConfig,
}

impl Default for RefinementConfig {
    fn default() -> Self {
        Self {
            iterations: 2,
            rl: RLConfig {
                total_steps: 100_000,
                replay_capacity: 200,
                ..RLConfig::default()
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct RefinementOutcome {
    /// `M^0 .. M^n`.
    pub models: Vec<RewardModel>,
    /// `D^1 .. D^n`; each contains the previous one.
    pub datasets: Vec<SegmentedDataset>,
    /// Completion thresholds computed once from `M^0`.
    pub thresholds: Vec<f64>,
    pub harvested: Vec<usize>,
    pub curves: Vec<Vec<CurvePoint>>,
    pub metrics: Vec<Vec<MetricRow>>,
}

/// Runs `refine.iterations` rounds starting from `m0` trained on `d0`.
pub fn iterate_refinement(
    env: &ChainManip,
    m0: RewardModel,
    d0: &SegmentedDataset,
    cfg: &TrainConfig,
    refine: &RefinementConfig,
) -> Result<RefinementOutcome> {
    let experts: Vec<&Trajectory> = d0.experts().collect();
    let thresholds = compute_thresholds(&m0, &experts, &d0.instructions)?;
    let root = RngStream::new(cfg.seed).fork("refine");
    let mut out = RefinementOutcome {
        models: vec![m0],
        datasets: Vec::new(),
        thresholds,
        harvested: Vec::new(),
        curves: Vec::new(),
        metrics: Vec::new(),
    };
    let mut data = d0.clone();
    for it in 1..=refine.iterations {
        let current = out.models.last().expect("M^0 present").clone();
        let experts: Vec<&Trajectory> = data.experts().collect();
        let factor = normalize_factor(&current, &experts, &data.instructions)?;
        let source = RewardSource::Learned(Box::new(LearnedReward {
            model: current.clone(),
            normalize_factor: factor,
            eta: cfg.eta,
            instructions: data.instructions.clone(),
        }));
        let rl = RLConfig {
            seed: root.fork_index("rl", it as u64).seed(),
            ..refine.rl.clone()
        };
        let run = train_agent(env, &source, &rl)?;
        let replay = harvest_replay(&run);
        if replay.is_empty() {
            return Err(Error::Runtime(format!(
                "refinement iteration {it}: the agent finished no episodes in {} steps",
                rl.total_steps
            )));
        }
        let labelled = replay
            .iter()
            .map(|t| label_suboptimal(t, &current, &data.instructions, &out.thresholds, cfg.eta))
            .collect::<Result<Vec<_>>>()?;
        out.harvested.push(labelled.len());
        data.merge(labelled);
        data.iteration = it;
        let tuned = optimize(
            current,
            &data,
            cfg,
            cfg.finetune_steps,
            cfg.finetune_warmup,
            &root.fork_index("finetune", it as u64),
        )?;
        out.models.push(tuned.model);
        out.metrics.push(tuned.metrics);
        out.curves.push(run.curve);
        out.datasets.push(data.clone());
    }
    Ok(out)
}
