use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{tree_prune, ReduceError, ReductionRequest, TreePruneConfig};
use crate::dom::DomDocument;

const INTERACTIVE_TAGS: &[&str] = &["input", "button", "select", "textarea", "a", "label", "option"];
const AX_ATTRS: &[&str] = &["role", "aria-label", "tabindex"];

pub fn reduce_original(req: &ReductionRequest<'_>) -> DomDocument {
    req.doc.clone()
}

/// Picks `min(k, #bids)` bids uniformly without replacement.
pub fn reduce_random(req: &ReductionRequest<'_>, seed: u64) -> Result<DomDocument, ReduceError> {
    let k = req.require_k()?;
    let bids: Vec<&str> = req.doc.bids().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picked = rand::seq::index::sample(&mut rng, bids.len(), k.min(bids.len()));
    let chosen = picked.into_iter().map(|i| bids[i]);
    Ok(tree_prune(req.doc, chosen, TreePruneConfig::DEFAULT)?)
}

/// Accessibility-tree stand-in: interactive tags and elements carrying
/// `role`, `aria-label` or `tabindex`.
pub fn axtree_bids(doc: &DomDocument) -> Vec<String> {
    doc.bid_elements()
        .filter(|e| INTERACTIVE_TAGS.contains(&e.tag()) || AX_ATTRS.iter().any(|a| e.has_attr(a)))
        .filter_map(|e| e.bid().map(str::to_string))
        .collect()
}

/// Keeps `allowed ∩ bids` (or the heuristic set when `allowed` is None)
/// under the strict AXTree pruning config.
pub fn reduce_axtree(req: &ReductionRequest<'_>, allowed: Option<&[String]>) -> Result<DomDocument, ReduceError> {
    let chosen: Vec<String> = match allowed {
        Some(list) => list.iter().filter(|b| req.doc.contains_bid(b)).cloned().collect(),
        None => axtree_bids(req.doc),
    };
    Ok(tree_prune(req.doc, &chosen, TreePruneConfig::AXTREE)?)
}
