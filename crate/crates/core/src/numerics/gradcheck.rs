use crate::error::{Error, Result};

/// Worst-case agreement between a supplied gradient and central differences.
#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    /// `max |g - g_fd| / max(1, |g|, |g_fd|)` over the checked coordinates.
    pub max_rel_error: f64,
    pub worst_index: usize,
    pub coords_checked: usize,
}

/// Checks every coordinate of `grad` against central finite differences of `f`.
pub fn grad_check<F>(f: F, params: &[f64], grad: &[f64], step: f64) -> Result<GradCheckReport>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let coords: Vec<usize> = (0..params.len()).collect();
    grad_check_coords(f, params, grad, step, &coords)
}

/// Same as [`grad_check`] restricted to `coords`.
pub fn grad_check_coords<F>(
    mut f: F,
    params: &[f64],
    grad: &[f64],
    step: f64,
    coords: &[usize],
) -> Result<GradCheckReport>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    if !(step > 0.0) {
        return Err(Error::Config(format!("grad_check step must be > 0, got {step}")));
    }
    if grad.len() != params.len() {
        return Err(Error::Shape(format!(
            "gradient has {} entries for {} parameters",
            grad.len(),
            params.len()
        )));
    }
    let mut work = params.to_vec();
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst_index: 0,
        coords_checked: 0,
    };
    for &i in coords {
        let orig = work[i];
        work[i] = orig + step;
        let plus = f(&work)?;
        work[i] = orig - step;
        let minus = f(&work)?;
        work[i] = orig;
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::NonFinite(format!(
                "function value at coordinate {i} during gradient check"
            )));
        }
        let fd = (plus - minus) / (2.0 * step);
        let g = grad[i];
        let rel = (g - fd).abs() / 1f64.max(g.abs()).max(fd.abs());
        if report.coords_checked == 0 || rel > report.max_rel_error {
            report.max_rel_error = rel;
            report.worst_index = i;
        }
        report.coords_checked += 1;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_is_exact() {
        let r = grad_check(|p| Ok(p[0] * p[0]), &[3.0], &[6.0], 1e-5).unwrap();
        assert!(r.max_rel_error < 1e-8, "{r:?}");
    }

    #[test]
    fn injected_fault_is_reported() {
        let r = grad_check(|p| Ok(p[0] * p[0]), &[3.0], &[6.6], 1e-5).unwrap();
        assert!((r.max_rel_error - 0.6 / 6.6).abs() < 1e-6, "{r:?}");

        // Off by 10% relative to the finite-difference value.
        let x = [2.0, 5.0];
        let wrong = [2.0 * x[0] * 1.1, 2.0 * x[1]];
        let r = grad_check(|p| Ok(p[0] * p[0] + p[1] * p[1]), &x, &wrong, 1e-5).unwrap();
        assert!((r.max_rel_error - 0.4 / 4.4).abs() < 1e-6, "{r:?}");
        assert_eq!(r.worst_index, 0);
    }

    #[test]
    fn rejects_bad_step_and_non_finite() {
        assert!(grad_check(|p| Ok(p[0]), &[1.0], &[1.0], 0.0).is_err());
        let r = grad_check(|p| Ok(if p[0] < 1.0 { f64::NAN } else { p[0] }), &[1.0], &[0.0], 1e-5);
        assert!(matches!(r, Err(Error::NonFinite(_))));
    }
}
