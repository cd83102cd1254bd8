use serde::{Deserialize, Serialize};

use super::{CandidateSet, MfsError, Source};
use crate::dom::{DomElement, ElementRef};
use crate::provider::EmbeddingProvider;
use crate::reduce::{build_query, rank_bm25, rank_dense};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpandConfig {
    pub bm25_top: usize,
    pub dense_top: usize,
    pub adjacent_max: usize,
    /// Skip the embedding source even when an embedder is given.
    pub skip_dense: bool,
}

impl Default for ExpandConfig {
    fn default() -> Self {
        ExpandConfig {
            bm25_top: 10,
            dense_top: 10,
            adjacent_max: 10,
            skip_dense: false,
        }
    }
}

fn neighbors<'a>(target: DomElement<'a>) -> Vec<DomElement<'a>> {
    let mut out = Vec::new();
    let parent = target.parent();
    out.extend(parent);
    out.extend(parent.and_then(|p| p.parent()));
    out.extend(target.element_children());
    if let Some(p) = parent {
        out.extend(p.element_children().filter(|s| s.node_id() != target.node_id()));
    }
    out
}

/// Adds retrieval hits and tree neighbors of the action target as `@tag`
/// units. Only hits with a positive score count. Units already present keep
/// their original source.
pub fn expand_candidates(
    base: &CandidateSet,
    goal: &str,
    history: &[String],
    action_target: Option<&str>,
    embedder: Option<&dyn EmbeddingProvider>,
    cfg: &ExpandConfig,
) -> Result<CandidateSet, MfsError> {
    let mut out = base.clone();
    let query = build_query(goal, history);
    for (bid, score) in rank_bm25(&base.doc, &query).into_iter().take(cfg.bm25_top) {
        if score > 0.0 {
            out.insert(ElementRef::tag(bid), Source::Bm25Topk);
        }
    }
    if let Some(emb) = embedder.filter(|_| !cfg.skip_dense) {
        for (bid, score) in rank_dense(&base.doc, &query, emb)?.into_iter().take(cfg.dense_top) {
            if score > 0.0 {
                out.insert(ElementRef::tag(bid), Source::DenseTopk);
            }
        }
    }
    if let Some(target) = action_target.and_then(|b| base.doc.element_by_bid(b)) {
        let bids = neighbors(target)
            .into_iter()
            .filter_map(|e| e.bid())
            .take(cfg.adjacent_max);
        for bid in bids {
            out.insert(ElementRef::tag(bid), Source::DomAdjacent);
        }
    }
    Ok(out)
}
