//! Coverage, reduction ratio and the statistics built on them.

mod report;
mod stats;
mod subsample;

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::base_dir;
use crate::dom::edit::{rebuild, Fate};
use crate::dom::{contains_ref, DomDocument, DomError, NodeKind, RefSet, UNK_TAG};
use crate::mfs::MfsInstance;
use crate::reduce::{MethodSpec, Reducer, ReductionRequest};

pub use report::{EvalReport, MethodSummary};
pub use stats::{
    average_ranks, correlations, full_report, kendall_tau_b, partial_correlations, pearson, residuals, spearman,
    CorrelationReport,
};
pub use subsample::{subsample_rank_correlation, SubsampleStats};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// An MFS instance with its observation parsed once up front. Parse
/// failures are kept and scored as misses.
#[derive(Debug, Clone)]
pub struct LoadedInstance {
    pub instance: MfsInstance,
    pub doc: Result<DomDocument, String>,
}

impl LoadedInstance {
    pub fn new(instance: MfsInstance, dataset_dir: &Path) -> Self {
        let doc = instance
            .html
            .load(dataset_dir)
            .map_err(|e| e.to_string())
            .and_then(|h| DomDocument::parse(&h).map_err(|e| e.to_string()));
        LoadedInstance { instance, doc }
    }
}

/// Loads every record, resolving `html_path` against the dataset file.
pub fn load_instances(instances: Vec<MfsInstance>, dataset_path: &Path) -> Vec<LoadedInstance> {
    let dir = base_dir(dataset_path);
    instances.into_iter().map(|i| LoadedInstance::new(i, &dir)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceResult {
    pub instance_id: String,
    pub covered: bool,
    pub rr: f64,
    /// Seconds spent inside the reducer.
    pub reduce_wall_time: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodResult {
    pub method_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<MethodSpec>,
    pub per_instance: Vec<InstanceResult>,
}

impl MethodResult {
    pub fn coverage(&self) -> f64 {
        mean(self.per_instance.iter().map(|r| f64::from(u8::from(r.covered))))
    }

    pub fn mean_rr(&self) -> f64 {
        mean(self.per_instance.iter().map(|r| r.rr))
    }

    pub fn mean_wall_time(&self) -> f64 {
        mean(self.per_instance.iter().map(|r| r.reduce_wall_time))
    }

    pub fn failures(&self) -> usize {
        self.per_instance.iter().filter(|r| r.error.is_some()).count()
    }
}

fn mean(it: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = it.len();
    if n == 0 {
        return 0.0;
    }
    it.sum::<f64>() / n as f64
}

pub fn retains(doc: &DomDocument, mfs: &RefSet) -> bool {
    mfs.iter().all(|r| contains_ref(doc, r))
}

pub fn reduction_ratio(reduced: &DomDocument, original: &DomDocument) -> f64 {
    let orig = original.char_length();
    if orig == 0 {
        return 1.0;
    }
    (reduced.char_length() as f64 / orig as f64).clamp(0.0, 1.0)
}

struct Outcome {
    result: InstanceResult,
    reduced: Option<DomDocument>,
}

fn run_one(reducer: &dyn Reducer, item: &LoadedInstance) -> Outcome {
    let inst = &item.instance;
    let failed = |msg: String, secs: f64| Outcome {
        result: InstanceResult {
            instance_id: inst.instance_id.clone(),
            covered: false,
            rr: 1.0,
            reduce_wall_time: secs,
            error: Some(msg),
        },
        reduced: None,
    };
    let doc = match &item.doc {
        Ok(d) => d,
        Err(e) => return failed(e.clone(), 0.0),
    };
    let req = ReductionRequest::new(doc)
        .goal(&inst.goal)
        .history(&inst.action_history);
    let start = Instant::now();
    let out = reducer.reduce(&req);
    let secs = start.elapsed().as_secs_f64();
    match out {
        Ok(reduced) => Outcome {
            result: InstanceResult {
                instance_id: inst.instance_id.clone(),
                covered: retains(&reduced, &inst.mfs),
                rr: reduction_ratio(&reduced, doc),
                reduce_wall_time: secs,
                error: None,
            },
            reduced: Some(reduced),
        },
        Err(e) => failed(e.to_string(), secs),
    }
}

/// Runs `reducer` over every instance in parallel. Instance-level failures
/// count as not covered with ratio 1.
pub fn coverage(reducer: &dyn Reducer, dataset: &[LoadedInstance]) -> Result<MethodResult, EvalError> {
    if dataset.is_empty() {
        return Err(EvalError::EmptyDataset);
    }
    let per_instance = dataset.par_iter().map(|i| run_one(reducer, i).result).collect();
    Ok(MethodResult {
        method_id: reducer.id().to_string(),
        config: reducer.id().parse().ok(),
        per_instance,
    })
}

/// 1 iff the reduced size is within `r_target` of the original and every
/// MFS unit survived.
pub fn gepa_objective(
    reduced: &DomDocument,
    original: &DomDocument,
    mfs: &RefSet,
    r_target: f64,
) -> Result<u8, EvalError> {
    if !(r_target > 0.0 && r_target <= 1.0) {
        return Err(EvalError::InvalidArgument(format!(
            "r_target must lie in (0, 1], got {r_target}"
        )));
    }
    Ok(u8::from(
        reduction_ratio(reduced, original) <= r_target && retains(reduced, mfs),
    ))
}

/// What [`ablate_element_type`] removes from reduced outputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum AblationTarget {
    /// Elements with this tag are renamed to the placeholder tag.
    Tag(String),
    /// This attribute is stripped from every element.
    Attr(String),
    /// All text is removed.
    Text,
}

impl FromStr for AblationTarget {
    type Err = EvalError;

    /// `TEXT`, `tag:<name>` or `attr:<name>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let name_ok = |n: &str| !n.is_empty() && !n.contains(char::is_whitespace);
        if s.eq_ignore_ascii_case("text") {
            return Ok(AblationTarget::Text);
        }
        match s.split_once(':') {
            Some(("tag", n)) if name_ok(n) => Ok(AblationTarget::Tag(n.to_ascii_lowercase())),
            Some(("attr", n)) if name_ok(n) => Ok(AblationTarget::Attr(n.to_ascii_lowercase())),
            _ => Err(EvalError::InvalidArgument(format!(
                "ablation target `{s}`: expected TEXT, tag:<name> or attr:<name>"
            ))),
        }
    }
}

impl fmt::Display for AblationTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AblationTarget::Tag(t) => write!(f, "tag:{t}"),
            AblationTarget::Attr(a) => write!(f, "attr:{a}"),
            AblationTarget::Text => f.write_str("TEXT"),
        }
    }
}

/// Removes every occurrence of `target` from `doc`.
pub fn strip_element_type(doc: &DomDocument, target: &AblationTarget) -> Result<DomDocument, DomError> {
    rebuild(doc, |_, kind| match (kind, target) {
        (NodeKind::Text(_), AblationTarget::Text) => Fate::Drop,
        (NodeKind::Element(e), AblationTarget::Tag(t)) if &e.tag == t => {
            let mut e = e.clone();
            e.tag = UNK_TAG.to_string();
            Fate::Keep(NodeKind::Element(e))
        }
        (NodeKind::Element(e), AblationTarget::Attr(a)) => {
            let mut e = e.clone();
            e.attrs.retain(|(k, _)| k != a);
            Fate::Keep(NodeKind::Element(e))
        }
        (other, _) => Fate::Keep(other.clone()),
    })
}

/// Coverage lost, in percentage points, when `target` is stripped from each
/// reduced output before the retention check.
pub fn ablate_element_type(
    reducer: &dyn Reducer,
    dataset: &[LoadedInstance],
    target: &AblationTarget,
) -> Result<f64, EvalError> {
    if dataset.is_empty() {
        return Err(EvalError::EmptyDataset);
    }
    let (base, ablated) = dataset
        .par_iter()
        .map(|item| {
            let out = run_one(reducer, item);
            let base = out.result.covered;
            let ablated = base
                && out
                    .reduced
                    .as_ref()
                    .and_then(|d| strip_element_type(d, target).ok())
                    .is_some_and(|d| retains(&d, &item.instance.mfs));
            (usize::from(base), usize::from(ablated))
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(100.0 * (base as f64 - ablated as f64) / dataset.len() as f64)
}
