//! Extractive reduction methods.
//!
//! Every method maps a [`ReductionRequest`] to a reduced [`DomDocument`].
//! Selection-based methods pick bids and hand them to [`tree_prune`]; the
//! GEPA programs are self-contained rewrites.

mod basic;
mod bm25;
mod dense;
mod focus;
mod gepa;
pub mod prompts;
mod prune;
mod prune4web;
mod registry;
mod repr;

use crate::dom::{DomDocument, DomError};
use crate::provider::ProviderError;

pub use basic::{axtree_bids, reduce_axtree, reduce_original, reduce_random};
pub use bm25::{rank_bm25, reduce_dmr_bm25, Bm25, BM25_B, BM25_K1};
pub use dense::{rank_dense, reduce_dmr_dense, reduce_dmr_querygen};
pub use focus::reduce_focusagent;
pub use gepa::{reduce_gepa_program, run_gepa_program, GepaProgram};
pub use prompts::{parse_filter_response, parse_focusagent_response, parse_querygen_response};
pub use prune::{tree_prune, TreePruneConfig};
pub use prune4web::{plan_keywords, prune4web_score, reduce_prune4web, KeywordWeights};
pub use registry::{build_reducer, needs_k, MethodSpec, METHOD_IDS};
pub use repr::{build_query, element_repr, xpath, REPR_ATTRIBUTES};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ReduceError {
    #[error("method requires a selection budget k")]
    MissingK,
    #[error("invalid method configuration: {0}")]
    InvalidConfig(String),
    #[error("malformed model response: {0}")]
    MalformedResponse(String),
    #[error(transparent)]
    Dom(#[from] DomError),
    #[error(transparent)]
    Provider(#[from] ProviderError),
}

/// Inputs shared by all reduction methods.
#[derive(Debug, Clone, Copy)]
pub struct ReductionRequest<'a> {
    pub doc: &'a DomDocument,
    pub goal: &'a str,
    pub action_history: &'a [String],
    /// Selection budget for k-parameterized methods.
    pub k: Option<usize>,
    pub screenshot_ref: Option<&'a str>,
}

impl<'a> ReductionRequest<'a> {
    pub fn new(doc: &'a DomDocument) -> Self {
        ReductionRequest {
            doc,
            goal: "",
            action_history: &[],
            k: None,
            screenshot_ref: None,
        }
    }

    pub fn goal(mut self, goal: &'a str) -> Self {
        self.goal = goal;
        self
    }

    pub fn history(mut self, history: &'a [String]) -> Self {
        self.action_history = history;
        self
    }

    pub fn k(mut self, k: usize) -> Self {
        self.k = Some(k);
        self
    }

    pub(crate) fn require_k(&self) -> Result<usize, ReduceError> {
        match self.k {
            None => Err(ReduceError::MissingK),
            Some(0) => Err(ReduceError::InvalidConfig("k must be positive".into())),
            Some(k) => Ok(k),
        }
    }
}

/// A configured reduction method.
pub trait Reducer: Send + Sync {
    fn id(&self) -> &str;
    fn reduce(&self, req: &ReductionRequest<'_>) -> Result<DomDocument, ReduceError>;
}

/// Indices of the `k` highest scores, ties broken by lower index.
pub(crate) fn top_k(scores: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx.truncate(k);
    idx
}
