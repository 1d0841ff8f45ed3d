//! Evaluation of a trained reward model against the segmentation oracle,
//! plus the statistics deployed with it (thresholds, reward scale).

use serde::{Deserialize, Serialize};

use crate::data::{make_windows, Trajectory};
use crate::epic::{epic_distance, EpicConfig, EpicEstimate};
use crate::error::{Error, Result};
use crate::model::{Evaluation, RewardModel};
use crate::numerics::RngStream;

/// Evaluates every window of every trajectory in one pass.
pub(crate) fn evaluate_all(
    model: &RewardModel,
    trajs: &[&Trajectory],
    instructions: &[Vec<String>],
) -> Result<Evaluation> {
    let mut windows = Vec::new();
    for t in trajs {
        windows.extend(make_windows(t, model.config().window)?);
    }
    if windows.is_empty() {
        return Err(Error::EmptyDataset("no timesteps to evaluate".into()));
    }
    model.evaluate(&windows, instructions)
}

fn labels(trajs: &[&Trajectory]) -> Vec<usize> {
    trajs.iter().flat_map(|t| t.labels()).collect()
}

/// Fraction of timesteps whose inferred subtask equals the stored label.
pub fn subtask_accuracy(
    model: &RewardModel,
    trajs: &[&Trajectory],
    instructions: &[Vec<String>],
    eta: f64,
) -> Result<f64> {
    let eval = evaluate_all(model, trajs, instructions)?;
    let labels = labels(trajs);
    let hits = labels
        .iter()
        .enumerate()
        .filter(|&(r, &l)| eval.infer(r, eta).0 == l)
        .count();
    Ok(hits as f64 / labels.len() as f64)
}

/// Fraction of pairs `(t, t + j)`, `j` in `j_set`, whose label-conditioned
/// reward strictly increases.
pub fn progressive_fraction(
    model: &RewardModel,
    trajs: &[&Trajectory],
    instructions: &[Vec<String>],
    j_set: &[usize],
) -> Result<f64> {
    let mut total = 0usize;
    let mut rising = 0usize;
    for t in trajs {
        let eval = evaluate_all(model, &[t], instructions)?;
        let r: Vec<f64> = t
            .steps
            .iter()
            .enumerate()
            .map(|(i, s)| eval.rewards[[i, s.subtask]])
            .collect();
        for &j in j_set {
            for i in 0..r.len().saturating_sub(j) {
                total += 1;
                if r[i + j] > r[i] {
                    rising += 1;
                }
            }
        }
    }
    if total == 0 {
        return Err(Error::EmptyDataset("no pairs for the progress metric".into()));
    }
    Ok(rising as f64 / total as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpicReport {
    /// One estimate per reward conditioning `U_i`.
    pub per_subtask: Vec<EpicEstimate>,
    pub mean_distance: f64,
}

/// EPIC distance between `R(.; U_i)` and the stored segmentation over every
/// timestep of `trajs`; canonical samples are drawn uniformly from the same
/// timesteps.
pub fn epic_to_psi(
    model: &RewardModel,
    trajs: &[&Trajectory],
    instructions: &[Vec<String>],
    cfg: &EpicConfig,
    rng: &mut RngStream,
) -> Result<EpicReport> {
    let eval = evaluate_all(model, trajs, instructions)?;
    let psi: Vec<f64> = labels(trajs).into_iter().map(|l| l as f64).collect();
    let n = psi.len();
    let samples: Vec<Vec<usize>> = (0..n)
        .map(|_| (0..cfg.num_canonical_samples).map(|_| rng.below(n)).collect())
        .collect();
    let canon_psi: Vec<Vec<f64>> = samples.iter().map(|s| s.iter().map(|&j| psi[j]).collect()).collect();
    let mut per_subtask = Vec::with_capacity(instructions.len());
    for i in 0..instructions.len() {
        let r: Vec<f64> = eval.rewards.column(i).to_vec();
        let canon_r: Vec<Vec<f64>> = samples.iter().map(|s| s.iter().map(|&j| r[j]).collect()).collect();
        per_subtask.push(epic_distance(&r, &psi, &canon_r, &canon_psi, cfg)?);
    }
    let mean_distance = per_subtask.iter().map(|e| e.distance).sum::<f64>() / per_subtask.len() as f64;
    Ok(EpicReport {
        per_subtask,
        mean_distance,
    })
}

/// Nearest-rank percentile: the value at 1-based rank `ceil(q * N)` of the
/// ascending sort.
pub fn nearest_rank_percentile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyDataset("percentile of no values".into()));
    }
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::Config(format!("percentile level {q} outside (0, 1]")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = ((q * sorted.len() as f64).ceil() as usize).max(1);
    Ok(sorted[rank - 1])
}

/// Per-subtask completion thresholds: the 75th percentile of `sim(v_t, e_i)`
/// over expert timesteps labelled `i`.
pub fn compute_thresholds(
    model: &RewardModel,
    trajs: &[&Trajectory],
    instructions: &[Vec<String>],
) -> Result<Vec<f64>> {
    let experts: Vec<&Trajectory> = trajs.iter().copied().filter(|t| t.expert).collect();
    if experts.is_empty() {
        return Err(Error::EmptyDataset("thresholds need expert trajectories".into()));
    }
    let eval = evaluate_all(model, &experts, instructions)?;
    let labels = labels(&experts);
    (0..instructions.len())
        .map(|i| {
            let scores: Vec<f64> = labels
                .iter()
                .enumerate()
                .filter(|(_, &l)| l == i)
                .map(|(r, _)| eval.sims[[r, i]])
                .collect();
            if scores.is_empty() {
                return Err(Error::EmptyDataset(format!("subtask {i} never occurs in expert data")));
            }
            nearest_rank_percentile(&scores, 0.75)
        })
        .collect()
}

/// Largest label-conditioned reward over expert timesteps; 1 when that
/// maximum is not positive.
pub fn normalize_factor(
    model: &RewardModel,
    trajs: &[&Trajectory],
    instructions: &[Vec<String>],
) -> Result<f64> {
    let experts: Vec<&Trajectory> = trajs.iter().copied().filter(|t| t.expert).collect();
    if experts.is_empty() {
        return Err(Error::EmptyDataset("normalization needs expert trajectories".into()));
    }
    let eval = evaluate_all(model, &experts, instructions)?;
    let max = labels(&experts)
        .iter()
        .enumerate()
        .map(|(r, &l)| eval.rewards[[r, l]])
        .fold(f64::NEG_INFINITY, f64::max);
    if max > 0.0 {
        Ok(max)
    } else {
        log::warn!("maximum expert reward {max} is not positive; using a normalization factor of 1");
        Ok(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_rank_examples() {
        let xs: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
        assert_eq!(nearest_rank_percentile(&xs, 0.75).unwrap(), 0.8);
        assert_eq!(nearest_rank_percentile(&[0.3; 7], 0.75).unwrap(), 0.3);
        assert_eq!(nearest_rank_percentile(&[0.42], 0.75).unwrap(), 0.42);
        let mut shuffled = xs.clone();
        shuffled.reverse();
        assert_eq!(nearest_rank_percentile(&shuffled, 0.75).unwrap(), 0.8);
        assert!(nearest_rank_percentile(&[], 0.75).is_err());
    }
}
