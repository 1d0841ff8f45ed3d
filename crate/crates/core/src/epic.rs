//! EPIC pseudometric for state-only rewards.
//!
//! With action-independent rewards the shaping terms of the canonicalization
//! cancel and the canonical reward at a coverage state is the reward minus
//! its expectation under the shaping distribution. The distance is then the
//! Pearson distance between the two canonicalized reward vectors over the
//! coverage states.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics;

pub use crate::numerics::tape::DistanceForm;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpicConfig {
    /// Shaping-distribution samples per coverage state.
    pub num_canonical_samples: usize,
    /// Kept for provenance; it cancels for state-only rewards.
    pub gamma: f64,
    pub distance_form: DistanceForm,
}

impl Default for EpicConfig {
    fn default() -> Self {
        Self {
            num_canonical_samples: 8,
            gamma: 0.99,
            distance_form: DistanceForm::Root,
        }
    }
}

impl EpicConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_canonical_samples == 0 {
            return Err(Error::Config("num_canonical_samples must be >= 1".into()));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::Config(format!("gamma {} outside (0, 1]", self.gamma)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpicEstimate {
    pub pearson: f64,
    pub distance: f64,
    pub coverage_size: usize,
}

impl EpicEstimate {
    fn new(rho: f64, root: f64, form: DistanceForm, coverage_size: usize) -> Self {
        let distance = match form {
            DistanceForm::Root => root,
            DistanceForm::Squared => root * root,
        };
        Self {
            pearson: rho,
            distance,
            coverage_size,
        }
    }
}

/// Subtracts, per coverage state, the mean of its canonical sample batch.
pub fn canonicalize(coverage_values: &[f64], canonical_values_per_state: &[Vec<f64>]) -> Result<Vec<f64>> {
    if coverage_values.len() != canonical_values_per_state.len() {
        return Err(Error::Shape(format!(
            "{} coverage values but {} canonical batches",
            coverage_values.len(),
            canonical_values_per_state.len()
        )));
    }
    coverage_values
        .iter()
        .zip(canonical_values_per_state)
        .map(|(v, canon)| {
            if canon.is_empty() {
                Err(Error::Config("empty canonical sample batch".into()))
            } else {
                Ok(v - numerics::mean(canon))
            }
        })
        .collect()
}

pub fn epic_distance(
    values_a: &[f64],
    values_b: &[f64],
    canon_a: &[Vec<f64>],
    canon_b: &[Vec<f64>],
    config: &EpicConfig,
) -> Result<EpicEstimate> {
    config.validate()?;
    if values_a.len() != values_b.len() {
        return Err(Error::Shape(format!(
            "reward vectors over {} and {} coverage states",
            values_a.len(),
            values_b.len()
        )));
    }
    let ca = canonicalize(values_a, canon_a)?;
    let cb = canonicalize(values_b, canon_b)?;
    let rho = numerics::pearson_correlation(&ca, &cb)?;
    let root = numerics::pearson_distance(&ca, &cb)?;
    Ok(EpicEstimate::new(rho, root, config.distance_form, ca.len()))
}

/// Invariance fixture for state-only potential shaping.
///
/// The comparand is `shaped_values[s] + gamma * potential[s] - potential[s]`,
/// i.e. shaping whose next-state proxy is the coverage state itself, so a
/// constant potential contributes a constant offset. Both sides are
/// canonicalized with the exact expectation over the coverage set.
pub fn epic_distance_potential_shaped(
    values_a: &[f64],
    shaped_values: &[f64],
    potential: &[f64],
    config: &EpicConfig,
) -> Result<EpicEstimate> {
    if potential.len() != shaped_values.len() {
        return Err(Error::Shape(format!(
            "{} potential values for {} states",
            potential.len(),
            shaped_values.len()
        )));
    }
    let shaped: Vec<f64> = shaped_values
        .iter()
        .zip(potential)
        .map(|(r, phi)| r + config.gamma * phi - phi)
        .collect();
    let canon_a = vec![values_a.to_vec(); values_a.len()];
    let canon_b = vec![shaped.clone(); shaped.len()];
    epic_distance(values_a, &shaped, &canon_a, &canon_b, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::RngStream;
    use approx::assert_abs_diff_eq;

    fn cfg() -> EpicConfig {
        EpicConfig::default()
    }

    #[test]
    fn canonicalize_examples() {
        let c = canonicalize(&[5.0, 5.0, 5.0], &vec![vec![5.0, 5.0]; 3]).unwrap();
        assert_eq!(c, vec![0.0, 0.0, 0.0]);
        let c = canonicalize(&[1.0, 2.0, 3.0], &vec![vec![1.0, 3.0]; 3]).unwrap();
        assert_eq!(c, vec![-1.0, 0.0, 1.0]);
        let c = canonicalize(&[1.0, 2.0], &[vec![1.0, 3.0], vec![2.0, 4.0]]).unwrap();
        assert_eq!(c, vec![-1.0, -1.0]);
        assert!(matches!(
            canonicalize(&[1.0], &[vec![]]),
            Err(Error::Config(_))
        ));
    }

    fn random_instance(rng: &mut RngStream, n: usize, m: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
        let vals = (0..n).map(|_| rng.normal()).collect();
        let canon = (0..n).map(|_| (0..m).map(|_| rng.normal()).collect()).collect();
        (vals, canon)
    }

    #[test]
    fn affine_and_negation() {
        let mut rng = RngStream::new(3);
        let (a, ca) = random_instance(&mut rng, 50, 8);
        let affine = |x: &f64| 2.0 * x + 7.0;
        let b: Vec<f64> = a.iter().map(affine).collect();
        let cb: Vec<Vec<f64>> = ca.iter().map(|v| v.iter().map(affine).collect()).collect();
        let d = epic_distance(&a, &b, &ca, &cb, &cfg()).unwrap();
        assert_abs_diff_eq!(d.distance, 0.0, epsilon = 1e-9);

        let neg: Vec<f64> = a.iter().map(|x| -x).collect();
        let cneg: Vec<Vec<f64>> = ca.iter().map(|v| v.iter().map(|x| -x).collect()).collect();
        let d = epic_distance(&a, &neg, &ca, &cneg, &cfg()).unwrap();
        assert_abs_diff_eq!(d.distance, 1.0, epsilon = 1e-9);
        assert_eq!(d.coverage_size, 50);
    }

    #[test]
    fn squared_form_is_square_of_root() {
        let mut rng = RngStream::new(4);
        let (a, ca) = random_instance(&mut rng, 30, 8);
        let (b, cb) = random_instance(&mut rng, 30, 8);
        let root = epic_distance(&a, &b, &ca, &cb, &cfg()).unwrap();
        let sq = epic_distance(
            &a,
            &b,
            &ca,
            &cb,
            &EpicConfig {
                distance_form: DistanceForm::Squared,
                ..cfg()
            },
        )
        .unwrap();
        assert_eq!(sq.distance, root.distance * root.distance);
    }

    #[test]
    fn independent_rewards_sit_near_root_half() {
        let mut rng = RngStream::new(5);
        let n = 10_000;
        let a: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
        let ca: Vec<Vec<f64>> = (0..n).map(|_| (0..8).map(|_| rng.uniform()).collect()).collect();
        let cb: Vec<Vec<f64>> = (0..n).map(|_| (0..8).map(|_| rng.uniform()).collect()).collect();
        let d = epic_distance(&a, &b, &ca, &cb, &cfg()).unwrap();
        assert!((d.distance - 0.5f64.sqrt()).abs() < 0.02, "{d:?}");
    }

    #[test]
    fn constant_reward_is_degenerate() {
        let a = vec![1.0; 5];
        let b = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let canon = vec![vec![1.0]; 5];
        let err = epic_distance(&a, &b, &canon, &canon, &cfg()).unwrap_err();
        assert!(matches!(err, Error::DegenerateVariance { .. }));
    }

    #[test]
    fn potential_shaped_fixture() {
        let mut rng = RngStream::new(6);
        let a: Vec<f64> = (0..40).map(|_| rng.normal()).collect();
        let zero = vec![0.0; 40];
        let d = epic_distance_potential_shaped(&a, &a, &zero, &cfg()).unwrap();
        assert_abs_diff_eq!(d.distance, 0.0, epsilon = 1e-9);

        let shifted: Vec<f64> = a.iter().map(|x| x + 3.0).collect();
        let d = epic_distance_potential_shaped(&a, &shifted, &zero, &cfg()).unwrap();
        assert_abs_diff_eq!(d.distance, 0.0, epsilon = 1e-9);

        let constant_phi = vec![4.2; 40];
        let d = epic_distance_potential_shaped(&a, &a, &constant_phi, &cfg()).unwrap();
        assert_abs_diff_eq!(d.distance, 0.0, epsilon = 1e-9);

        for seed in 0..100 {
            let mut r = RngStream::new(1000 + seed);
            let scale = r.uniform_range(0.5, 10.0);
            let shift = r.uniform_range(-1.0, 3.0);
            let b: Vec<f64> = a.iter().map(|x| scale * x + shift).collect();
            let d = epic_distance_potential_shaped(&a, &b, &zero, &cfg()).unwrap();
            assert!(d.distance < 1e-6, "seed {seed}: {d:?}");
        }
    }

    #[test]
    fn length_mismatch_is_shape_error() {
        let canon = vec![vec![0.0]; 3];
        assert!(matches!(
            epic_distance(&[1.0, 2.0, 3.0], &[1.0, 2.0], &canon, &canon, &cfg()),
            Err(Error::Shape(_))
        ));
    }
}
