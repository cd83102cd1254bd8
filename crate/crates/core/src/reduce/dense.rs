use super::prompts::{parse_querygen_response, querygen_prompt};
use super::{build_query, element_repr, top_k, tree_prune, ReduceError, ReductionRequest, TreePruneConfig};
use crate::dom::DomDocument;
use crate::provider::{cosine, CompletionRequest, EmbeddingProvider, ProviderError, TextCompletionProvider};

/// All bid elements with cosine similarity to `query`, best first (ties in
/// document order). The query and every representation go in one batch,
/// query first.
pub fn rank_dense(
    doc: &DomDocument,
    query: &str,
    embedder: &dyn EmbeddingProvider,
) -> Result<Vec<(String, f64)>, ProviderError> {
    let bids: Vec<&str> = doc.bids().collect();
    let mut texts = Vec::with_capacity(bids.len() + 1);
    texts.push(query.to_string());
    texts.extend(doc.bid_elements().map(|e| element_repr(&e)));
    let vecs = embedder.embed(&texts)?;
    if vecs.len() != texts.len() {
        return Err(ProviderError::BadResponse(format!(
            "expected {} embeddings, got {}",
            texts.len(),
            vecs.len()
        )));
    }
    let q = &vecs[0];
    if vecs.iter().any(|v| v.len() != q.len()) {
        return Err(ProviderError::BadResponse("embeddings of unequal length".into()));
    }
    let scores: Vec<f64> = vecs[1..].iter().map(|v| cosine(q, v)).collect();
    Ok(top_k(&scores, scores.len())
        .into_iter()
        .map(|i| (bids[i].to_string(), scores[i]))
        .collect())
}

fn select_dense(
    req: &ReductionRequest<'_>,
    query: &str,
    embedder: &dyn EmbeddingProvider,
) -> Result<DomDocument, ReduceError> {
    let k = req.require_k()?;
    let ranked = rank_dense(req.doc, query, embedder)?;
    let chosen = ranked.iter().take(k).map(|(b, _)| b.as_str());
    Ok(tree_prune(req.doc, chosen, TreePruneConfig::DEFAULT)?)
}

pub fn reduce_dmr_dense(
    req: &ReductionRequest<'_>,
    embedder: &dyn EmbeddingProvider,
) -> Result<DomDocument, ReduceError> {
    select_dense(req, &build_query(req.goal, req.action_history), embedder)
}

/// Dense retrieval with a model-written query.
pub fn reduce_dmr_querygen(
    req: &ReductionRequest<'_>,
    llm: &dyn TextCompletionProvider,
    embedder: &dyn EmbeddingProvider,
) -> Result<DomDocument, ReduceError> {
    req.require_k()?;
    let p = querygen_prompt(req.goal, req.action_history);
    let resp = llm.complete(&CompletionRequest {
        system: &p.system,
        user: &p.user,
        image_ref: None,
    })?;
    let query = parse_querygen_response(&resp)?;
    select_dense(req, &query, embedder)
}
