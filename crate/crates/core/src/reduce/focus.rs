use super::prompts::{focusagent_prompt, parse_focusagent_response};
use super::{tree_prune, ReduceError, ReductionRequest, TreePruneConfig};
use crate::dom::DomDocument;
use crate::provider::{CompletionRequest, TextCompletionProvider};

/// Lets the model pick k bids from the full HTML. Whatever list comes back
/// is used as is, minus bids that do not exist in the document.
pub fn reduce_focusagent(
    req: &ReductionRequest<'_>,
    llm: &dyn TextCompletionProvider,
) -> Result<DomDocument, ReduceError> {
    let k = req.require_k()?;
    let p = focusagent_prompt(req.goal, req.action_history, &req.doc.serialize(), k);
    let resp = llm.complete(&CompletionRequest {
        system: &p.system,
        user: &p.user,
        image_ref: None,
    })?;
    let picked = parse_focusagent_response(&resp)?;
    let known = picked.iter().filter(|b| req.doc.contains_bid(b));
    Ok(tree_prune(req.doc, known, TreePruneConfig::DEFAULT)?)
}
