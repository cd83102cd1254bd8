//! Correlation coefficients.

use serde::{Deserialize, Serialize};

use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub n_points: usize,
    pub pearson_r: Option<f64>,
    pub spearman_rho: Option<f64>,
    pub kendall_tau: Option<f64>,
    pub partial_pearson_r: Option<f64>,
    pub partial_spearman_rho: Option<f64>,
    pub partial_kendall_tau: Option<f64>,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn sum_sq_dev(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m).powi(2)).sum()
}

/// Whether `v` carries no variation relative to `scale` (the sum of
/// squared deviations of the data it came from).
fn flat(v: &[f64], scale: f64) -> bool {
    sum_sq_dev(v) <= 1e-24 * (1.0 + scale)
}

fn check(x: &[f64], y: &[f64], min: usize) -> Result<(), EvalError> {
    if x.len() != y.len() {
        return Err(EvalError::DegenerateInput(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < min {
        return Err(EvalError::DegenerateInput(format!(
            "need at least {min} points, got {}",
            x.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(EvalError::DegenerateInput("non-finite value".into()));
    }
    Ok(())
}

fn pearson_raw(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
}

/// 1-based ranks, tied values sharing their average rank.
pub fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Tau-b.
fn kendall_raw(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let (mut s, mut tx, mut ty, mut pairs) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            pairs += 1;
            let dx = (x[i] - x[j]).signum() * f64::from(x[i] != x[j]);
            let dy = (y[i] - y[j]).signum() * f64::from(y[i] != y[j]);
            if dx == 0.0 {
                tx += 1;
            }
            if dy == 0.0 {
                ty += 1;
            }
            s += (dx * dy) as i64;
        }
    }
    let denom = (((pairs - tx) * (pairs - ty)) as f64).sqrt();
    (s as f64 / denom).clamp(-1.0, 1.0)
}

fn all_three(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    (
        pearson_raw(x, y),
        pearson_raw(&average_ranks(x), &average_ranks(y)),
        kendall_raw(x, y),
    )
}

/// Pearson, Spearman (average ranks) and Kendall tau-b.
pub fn correlations(x: &[f64], y: &[f64]) -> Result<CorrelationReport, EvalError> {
    check(x, y, 3)?;
    let (sx, sy) = (sum_sq_dev(x), sum_sq_dev(y));
    if flat(x, 0.0) || flat(y, 0.0) || sx == 0.0 || sy == 0.0 {
        return Err(EvalError::DegenerateInput("constant input".into()));
    }
    let (p, s, k) = all_three(x, y);
    Ok(CorrelationReport {
        n_points: x.len(),
        pearson_r: Some(p),
        spearman_rho: Some(s),
        kendall_tau: Some(k),
        ..CorrelationReport::default()
    })
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, EvalError> {
    Ok(correlations(x, y)?.pearson_r.expect("set"))
}

pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64, EvalError> {
    Ok(correlations(x, y)?.spearman_rho.expect("set"))
}

pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> Result<f64, EvalError> {
    Ok(correlations(x, y)?.kendall_tau.expect("set"))
}

/// Residuals of the least-squares line of `v` on `control` (with intercept).
pub fn residuals(v: &[f64], control: &[f64]) -> Result<Vec<f64>, EvalError> {
    check(v, control, 2)?;
    let (mv, mc) = (mean(v), mean(control));
    let scc = sum_sq_dev(control);
    if scc == 0.0 || flat(control, 0.0) {
        return Err(EvalError::DegenerateInput("constant control".into()));
    }
    let scv: f64 = v.iter().zip(control).map(|(a, c)| (a - mv) * (c - mc)).sum();
    let slope = scv / scc;
    let intercept = mv - slope * mc;
    Ok(v.iter()
        .zip(control)
        .map(|(a, c)| a - (intercept + slope * c))
        .collect())
}

/// Correlations of `x` and `y` after regressing `control` out of both.
pub fn partial_correlations(x: &[f64], y: &[f64], control: &[f64]) -> Result<CorrelationReport, EvalError> {
    check(x, y, 4)?;
    let rx = residuals(x, control)?;
    let ry = residuals(y, control)?;
    if flat(&rx, sum_sq_dev(x)) || flat(&ry, sum_sq_dev(y)) {
        return Err(EvalError::DegenerateInput("residuals are constant".into()));
    }
    let (p, s, k) = all_three(&rx, &ry);
    Ok(CorrelationReport {
        n_points: x.len(),
        partial_pearson_r: Some(p),
        partial_spearman_rho: Some(s),
        partial_kendall_tau: Some(k),
        ..CorrelationReport::default()
    })
}

/// Raw and partial coefficients in one report.
pub fn full_report(x: &[f64], y: &[f64], control: &[f64]) -> Result<CorrelationReport, EvalError> {
    let raw = correlations(x, y)?;
    let part = partial_correlations(x, y, control)?;
    Ok(CorrelationReport {
        partial_pearson_r: part.partial_pearson_r,
        partial_spearman_rho: part.partial_spearman_rho,
        partial_kendall_tau: part.partial_kendall_tau,
        ..raw
    })
}
