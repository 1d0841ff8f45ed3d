//! Numerical kernels shared by every other module: similarity, correlation,
//! gradient verification, deterministic random streams and the reverse-mode
//! tape used to differentiate the reward model and its objectives.

mod gradcheck;
mod rng;
pub mod tape;

pub use gradcheck::{grad_check, grad_check_coords, GradCheckReport};
pub use rng::RngStream;

use crate::error::{Error, Result, Side};

/// Clamp applied to the correlation wherever the derivative of the square
/// root in [`pearson_distance`] is taken; keeps that derivative bounded.
pub const RHO_CLAMP: f64 = 1.0 - 1e-12;

/// Relative variance floor below which a vector counts as constant.
const VARIANCE_FLOOR: f64 = 1e-24;

pub fn cosine_similarity(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() || u.is_empty() {
        return Err(Error::Shape(format!(
            "cosine similarity of lengths {} and {}",
            u.len(),
            v.len()
        )));
    }
    let nu = dot(u, u).sqrt();
    let nv = dot(v, v).sqrt();
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::DegenerateInput(
            "cosine similarity of a zero-norm vector".into(),
        ));
    }
    Ok((dot(u, v) / (nu * nv)).clamp(-1.0, 1.0))
}

pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Centered sums of squares and cross products, two-pass.
pub(crate) struct Moments {
    pub sxx: f64,
    pub syy: f64,
    pub sxy: f64,
}

pub(crate) fn centered_moments(xs: &[f64], ys: &[f64]) -> Moments {
    let mx = mean(xs);
    let my = mean(ys);
    let mut m = Moments {
        sxx: 0.0,
        syy: 0.0,
        sxy: 0.0,
    };
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mx;
        let dy = y - my;
        m.sxx += dx * dx;
        m.syy += dy * dy;
        m.sxy += dx * dy;
    }
    m
}

/// True when the centered sum of squares is negligible relative to the raw
/// second moment, i.e. the vector is constant up to rounding.
pub(crate) fn is_degenerate(centered_ss: f64, xs: &[f64]) -> bool {
    let raw: f64 = xs.iter().map(|x| x * x).sum();
    centered_ss <= VARIANCE_FLOOR * raw || centered_ss == 0.0
}

pub(crate) fn degenerate_side(m: &Moments, xs: &[f64], ys: &[f64]) -> Option<Side> {
    match (is_degenerate(m.sxx, xs), is_degenerate(m.syy, ys)) {
        (true, true) => Some(Side::Both),
        (true, false) => Some(Side::Left),
        (false, true) => Some(Side::Right),
        (false, false) => None,
    }
}

pub fn pearson_correlation(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::Shape(format!(
            "pearson correlation of lengths {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 3 {
        return Err(Error::Shape(format!(
            "pearson correlation needs at least 3 samples, got {}",
            xs.len()
        )));
    }
    let m = centered_moments(xs, ys);
    if let Some(side) = degenerate_side(&m, xs, ys) {
        return Err(Error::DegenerateVariance {
            side,
            context: "pearson correlation".into(),
        });
    }
    Ok((m.sxy / (m.sxx * m.syy).sqrt()).clamp(-1.0, 1.0))
}

/// `sqrt((1 - rho) / 2)`.
pub fn pearson_distance(xs: &[f64], ys: &[f64]) -> Result<f64> {
    pearson_correlation(xs, ys)?;
    Ok(standardized_distance(xs, ys, &centered_moments(xs, ys)))
}

/// `sqrt((1 - rho) / 2)` evaluated as half the Euclidean distance between the
/// standardized vectors, which stays accurate as `rho` approaches 1.
pub(crate) fn standardized_distance(xs: &[f64], ys: &[f64], m: &Moments) -> f64 {
    let (mx, my) = (mean(xs), mean(ys));
    let (sx, sy) = (m.sxx.sqrt(), m.syy.sqrt());
    let ss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| ((x - mx) / sx - (y - my) / sy).powi(2))
        .sum();
    (0.5 * ss.sqrt()).min(1.0)
}

pub fn distance_from_rho(rho: f64) -> f64 {
    ((1.0 - rho.clamp(-1.0, 1.0)) / 2.0).sqrt()
}

/// `d/d rho` of [`distance_from_rho`], evaluated at the clamped correlation.
pub fn distance_rho_derivative(rho: f64) -> f64 {
    let rc = rho.clamp(-RHO_CLAMP, RHO_CLAMP);
    -1.0 / (4.0 * ((1.0 - rc) / 2.0).sqrt())
}

/// Gradient of [`pearson_correlation`] with respect to `xs`.
pub fn pearson_correlation_grad(xs: &[f64], ys: &[f64]) -> Result<Vec<f64>> {
    let rho = pearson_correlation(xs, ys)?;
    let m = centered_moments(xs, ys);
    let mx = mean(xs);
    let my = mean(ys);
    let norm = (m.sxx * m.syy).sqrt();
    Ok(xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - my) / norm - rho * (x - mx) / m.sxx)
        .collect())
}

/// Gradient of [`pearson_distance`] with respect to `xs`.
pub fn pearson_distance_grad(xs: &[f64], ys: &[f64]) -> Result<Vec<f64>> {
    let rho = pearson_correlation(xs, ys)?;
    let d_rho = distance_rho_derivative(rho);
    Ok(pearson_correlation_grad(xs, ys)?
        .into_iter()
        .map(|g| g * d_rho)
        .collect())
}

/// Gradient of [`cosine_similarity`] with respect to `u`.
pub fn cosine_similarity_grad(u: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    let c = cosine_similarity(u, v)?;
    let nu = dot(u, u).sqrt();
    let nv = dot(v, v).sqrt();
    Ok(u
        .iter()
        .zip(v)
        .map(|(a, b)| b / (nu * nv) - c * a / (nu * nu))
        .collect())
}
