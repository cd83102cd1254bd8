use serde::{Deserialize, Serialize};

use super::{MfsError, Oracle, Partitioner, Verdict};
use crate::dom::{ElementRef, RefSet};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DdminOutcome {
    pub mfs: RefSet,
    /// Oracle calls made by this run, including the initial check on the
    /// full set.
    pub oracle_calls: usize,
}

/// Delta debugging over removal sets.
///
/// Starts at two chunks. When the candidates minus some chunk still fail,
/// that chunk is dropped and the granularity shrinks by one (never below
/// two); otherwise granularity doubles. Stops once chunks are single units
/// and none can go. `n` is clamped to the
/// current candidate count before each split.
pub fn ddmin(
    candidates: &RefSet,
    oracle: &dyn Oracle,
    partitioner: &mut dyn Partitioner,
) -> Result<DdminOutcome, MfsError> {
    let mut calls = 1;
    if oracle.test(candidates)? != Verdict::Fail {
        return Err(MfsError::PreconditionViolated);
    }
    let mut current: Vec<ElementRef> = candidates.iter().cloned().collect();
    let mut n = 2usize;
    while current.len() >= 2 {
        n = n.min(current.len());
        let chunks = partitioner.partition(&current, n)?;
        let mut reduced = None;
        for chunk in &chunks {
            let rest: RefSet = current.iter().filter(|r| !chunk.contains(r)).cloned().collect();
            calls += 1;
            if oracle.test(&rest)? == Verdict::Fail {
                reduced = Some(rest);
                break;
            }
        }
        match reduced {
            Some(rest) => {
                current = rest.into_iter().collect();
                n = n.saturating_sub(1).max(2);
            }
            None if n >= current.len() => break,
            None => n = (2 * n).min(current.len()),
        }
    }
    Ok(DdminOutcome {
        mfs: current.into_iter().collect(),
        oracle_calls: calls,
    })
}
