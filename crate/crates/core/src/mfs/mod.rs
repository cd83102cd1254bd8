//! Minimal failure set mining.
//!
//! A candidate set of `(bid, attr)` units is shrunk with delta debugging
//! until removing any single remaining unit no longer reproduces the
//! failure. Chunks are formed by farthest-point sampling over tree distance
//! so that structurally close units tend to be removed together.

mod ddmin;
mod expand;
mod oracle;
mod partition;
mod simulate;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dom::{contains_ref, DomDocument, DomError, ElementRef, RefSet};
use crate::provider::ProviderError;

pub use ddmin::{ddmin, DdminOutcome};
pub use expand::{expand_candidates, ExpandConfig};
pub use oracle::{
    extract_action, proxy_oracle, simulation_oracle, FnOracle, Oracle, ProxyOracle, SimulationOracle, Verdict,
    AGENT_SYSTEM_PROMPT,
};
pub use partition::{fps_partition, ContiguousPartitioner, FpsPartitioner, Partitioner, RandomPartitioner, Strategy};
pub use simulate::{
    run_table4, simulate_partitioning, synthetic_instance, MfsSpec, SyntheticInstance, Table4, TreeSpec,
};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum MfsError {
    #[error("the full candidate set does not reproduce the failure")]
    PreconditionViolated,
    #[error("invalid simulation spec: {0}")]
    InvalidSpec(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error(transparent)]
    Dom(#[from] DomError),
    #[error(transparent)]
    Provider(#[from] ProviderError),
}

/// Where a candidate unit came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    SelfReport,
    Bm25Topk,
    DenseTopk,
    DomAdjacent,
}

/// Units that ddmin may remove, each tagged with its origin. Every unit is
/// present in `doc`.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    pub instance_id: String,
    pub doc: DomDocument,
    pub refs: RefSet,
    pub sources: BTreeMap<ElementRef, Source>,
}

impl CandidateSet {
    /// Keeps only the units that exist in `doc`; the rest are dropped.
    pub fn new(
        instance_id: impl Into<String>,
        doc: DomDocument,
        refs: impl IntoIterator<Item = ElementRef>,
        source: Source,
    ) -> Self {
        let mut set = CandidateSet {
            instance_id: instance_id.into(),
            doc,
            refs: RefSet::new(),
            sources: BTreeMap::new(),
        };
        for r in refs {
            set.insert(r, source);
        }
        set
    }

    /// Adds `r` if present in the document and not already known. Returns
    /// whether the set grew.
    pub fn insert(&mut self, r: ElementRef, source: Source) -> bool {
        if self.refs.contains(&r) || !contains_ref(&self.doc, &r) {
            return false;
        }
        self.sources.insert(r.clone(), source);
        self.refs.insert(r)
    }

    pub fn len(&self) -> usize {
        self.refs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.refs.is_empty()
    }

    pub fn source(&self, r: &ElementRef) -> Option<Source> {
        self.sources.get(r).copied()
    }
}

/// One mined record: an observation and its approximate MFS.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MfsInstance {
    pub instance_id: String,
    #[serde(default)]
    pub benchmark: String,
    #[serde(default)]
    pub source_model: String,
    #[serde(default)]
    pub goal: String,
    #[serde(default)]
    pub action_history: Vec<String>,
    #[serde(flatten)]
    pub html: crate::dataset::HtmlSource,
    pub mfs: RefSet,
    #[serde(default)]
    pub step_index: usize,
}

impl MfsInstance {
    /// Checks that the MFS is non-empty and present in `doc`.
    pub fn validate(&self, doc: &DomDocument) -> Result<(), MfsError> {
        if self.mfs.is_empty() {
            return Err(MfsError::InvalidInstance(format!("{}: empty mfs", self.instance_id)));
        }
        if let Some(r) = self.mfs.iter().find(|r| !contains_ref(doc, r)) {
            return Err(MfsError::InvalidInstance(format!(
                "{}: mfs unit {r} is not in the observation",
                self.instance_id
            )));
        }
        Ok(())
    }
}
