use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::prompts::{filter_prompt, parse_filter_response, planner_prompt};
use super::{top_k, tree_prune, ReduceError, ReductionRequest, TreePruneConfig};
use crate::dom::{DomDocument, DomElement};
use crate::provider::{CompletionRequest, TextCompletionProvider};
use crate::text::{partial_ratio, ratio, stem};

/// Keyword → positive weight, in insertion order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "IndexMap<String, f64>", into = "IndexMap<String, f64>")]
pub struct KeywordWeights(IndexMap<String, f64>);

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
#[error("weight of keyword `{keyword}` must be a positive number, got {weight}")]
pub struct InvalidWeight {
    pub keyword: String,
    pub weight: f64,
}

impl KeywordWeights {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, keyword: impl Into<String>, weight: f64) -> Result<(), InvalidWeight> {
        let keyword = keyword.into();
        if !(weight.is_finite() && weight > 0.0) {
            return Err(InvalidWeight { keyword, weight });
        }
        self.0.insert(keyword, weight);
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> + '_ {
        self.0.iter().map(|(k, &w)| (k.as_str(), w))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<IndexMap<String, f64>> for KeywordWeights {
    type Error = InvalidWeight;

    fn try_from(map: IndexMap<String, f64>) -> Result<Self, Self::Error> {
        let mut out = KeywordWeights::new();
        for (k, w) in map {
            out.insert(k, w)?;
        }
        Ok(out)
    }
}

impl From<KeywordWeights> for IndexMap<String, f64> {
    fn from(w: KeywordWeights) -> Self {
        w.0
    }
}

fn normalize(text: &str) -> String {
    text.to_lowercase().split_whitespace().collect::<Vec<_>>().join(" ")
}

fn fuzzy_score(keyword: &str, text: &str, tokens: &[&str]) -> f64 {
    let best_token = tokens.iter().map(|t| ratio(keyword, t)).fold(0.0, f64::max);
    partial_ratio(keyword, text).max(best_token)
}

/// Keyword-match score of one element: for every non-empty tier value and
/// keyword, the first matching stage (exact, phrase, stemmed word, fuzzy)
/// contributes `weight * alpha * beta`.
pub fn prune4web_score(el: &DomElement<'_>, weights: &KeywordWeights) -> f64 {
    let text = el.direct_text();
    let tiers: [(Option<&str>, f64); 7] = [
        (Some(text.as_str()), 1.0),
        (el.attr("aria-label"), 0.8),
        (el.attr("placeholder"), 0.8),
        (el.attr("name"), 0.8),
        (el.attr("role"), 0.8),
        (el.attr("class"), 0.5),
        (el.attr("id"), 0.5),
    ];
    let mut score = 0.0;
    for (value, beta) in tiers {
        let Some(value) = value.filter(|v| !v.is_empty()) else {
            continue;
        };
        let t = normalize(value);
        let tokens: Vec<&str> = t.split_whitespace().collect();
        let stemmed: Vec<String> = tokens.iter().map(|w| stem(w)).collect();
        for (kw, w) in weights.iter() {
            let k = normalize(kw);
            let alpha = if t == k {
                1.0
            } else if k.contains(' ') && t.contains(k.as_str()) {
                0.8
            } else if stemmed.contains(&stem(kw)) {
                0.6
            } else {
                let fs = fuzzy_score(&k, &t, &tokens);
                if fs >= 0.75 {
                    0.4 * fs
                } else {
                    continue;
                }
            };
            score += w * alpha * beta;
        }
    }
    score
}

/// Top-k bid elements by score (ties in document order), tree-pruned.
pub fn reduce_prune4web(req: &ReductionRequest<'_>, weights: &KeywordWeights) -> Result<DomDocument, ReduceError> {
    let k = req.require_k()?;
    let bids: Vec<&str> = req.doc.bids().collect();
    let scores: Vec<f64> = req.doc.bid_elements().map(|e| prune4web_score(&e, weights)).collect();
    let chosen = top_k(&scores, k).into_iter().map(|i| bids[i]);
    Ok(tree_prune(req.doc, chosen, TreePruneConfig::DEFAULT)?)
}

/// Planner then filter: returns the filter's keyword weights.
pub fn plan_keywords(
    req: &ReductionRequest<'_>,
    llm: &dyn TextCompletionProvider,
    action_space: &str,
) -> Result<KeywordWeights, ReduceError> {
    let plan = planner_prompt(req.goal, req.action_history, action_space);
    let plan_out = llm.complete(&CompletionRequest {
        system: &plan.system,
        user: &plan.user,
        image_ref: req.screenshot_ref,
    })?;
    let filt = filter_prompt(&plan_out);
    let filt_out = llm.complete(&CompletionRequest {
        system: &filt.system,
        user: &filt.user,
        image_ref: None,
    })?;
    parse_filter_response(&filt_out)
}
