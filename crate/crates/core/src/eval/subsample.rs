use std::collections::{BTreeMap, HashMap};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{spearman, EvalError, MethodResult};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubsampleStats {
    pub n: usize,
    pub trials: usize,
    /// Trials where every method had the same coverage are left out.
    pub used_trials: usize,
    pub mean_rho: f64,
    /// Population standard deviation over used trials.
    pub std_rho: f64,
}

/// Spearman rho between per-method coverage on random `n`-instance
/// subsets and the external scores, over `trials` draws.
///
/// Methods without an external score are ignored. Instance ids come from
/// the first scored method.
pub fn subsample_rank_correlation(
    results: &[MethodResult],
    external_scores: &BTreeMap<String, f64>,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<SubsampleStats, EvalError> {
    let scored: Vec<(&MethodResult, f64)> = results
        .iter()
        .filter_map(|r| external_scores.get(&r.method_id).map(|&s| (r, s)))
        .collect();
    if scored.len() < 3 {
        return Err(EvalError::InsufficientData(format!(
            "{} scored methods, need at least 3",
            scored.len()
        )));
    }
    if trials == 0 {
        return Err(EvalError::InvalidArgument("trials must be at least 1".into()));
    }
    let ids: Vec<&str> = scored[0]
        .0
        .per_instance
        .iter()
        .map(|r| r.instance_id.as_str())
        .collect();
    if n == 0 || n > ids.len() {
        return Err(EvalError::InsufficientData(format!(
            "sample size {n} outside 1..={}",
            ids.len()
        )));
    }
    let covered: Vec<HashMap<&str, bool>> = scored
        .iter()
        .map(|(r, _)| {
            r.per_instance
                .iter()
                .map(|i| (i.instance_id.as_str(), i.covered))
                .collect()
        })
        .collect();
    let ext: Vec<f64> = scored.iter().map(|(_, s)| *s).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rhos = Vec::with_capacity(trials);
    for _ in 0..trials {
        let picked = sample(&mut rng, ids.len(), n);
        let cov: Vec<f64> = covered
            .iter()
            .map(|m| {
                picked
                    .iter()
                    .filter(|&i| m.get(ids[i]).copied().unwrap_or(false))
                    .count() as f64
                    / n as f64
            })
            .collect();
        match spearman(&cov, &ext) {
            Ok(r) => rhos.push(r),
            Err(EvalError::DegenerateInput(_)) => {}
            Err(e) => return Err(e),
        }
    }
    if rhos.is_empty() {
        return Err(EvalError::DegenerateInput(
            "coverage was constant across methods in every trial".into(),
        ));
    }
    let mean = rhos.iter().sum::<f64>() / rhos.len() as f64;
    let var = rhos.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / rhos.len() as f64;
    Ok(SubsampleStats {
        n,
        trials,
        used_trials: rhos.len(),
        mean_rho: mean,
        std_rho: var.sqrt(),
    })
}
