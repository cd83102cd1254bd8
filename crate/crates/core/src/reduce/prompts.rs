//! Prompt builders and response parsers for the LLM-backed methods.

use serde_json::Value;

use super::{KeywordWeights, ReduceError};

pub const QUERYGEN_SYSTEM: &str = include_str!("../../assets/prompts/querygen_system.txt");
pub const QUERYGEN_USER: &str = include_str!("../../assets/prompts/querygen_user.txt");
pub const FOCUSAGENT_SYSTEM: &str = include_str!("../../assets/prompts/focusagent_system.txt");
pub const FOCUSAGENT_USER: &str = include_str!("../../assets/prompts/focusagent_user.txt");
pub const PRUNE4WEB_PLANNER_SYSTEM: &str = include_str!("../../assets/prompts/prune4web_planner_system.txt");
pub const PRUNE4WEB_FILTER_SYSTEM: &str = include_str!("../../assets/prompts/prune4web_filter_system.txt");

/// Action space substituted into the planner prompt when none is given.
pub const DEFAULT_ACTION_SPACE: &str = "Action space:
- click(bid): click the element with the given bid
- fill(bid, value): type value into the element with the given bid
- select_option(bid, option): choose an option of a select element";

/// A system/user prompt pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prompt {
    pub system: String,
    pub user: String,
}

/// Replaces `{name}` placeholders in one pass; other braces stay literal.
fn fill(template: &str, vars: &[(&str, &str)]) -> String {
    let template = template.trim_end_matches('\n');
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let hit = after.find('}').and_then(|close| {
            let name = &after[..close];
            vars.iter().find(|(k, _)| *k == name).map(|(_, v)| (close, *v))
        });
        match hit {
            Some((close, v)) => {
                out.push_str(v);
                rest = &after[close + 1..];
            }
            None => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

/// History as `- Step i: action` lines, or `None` when empty.
pub fn render_history(actions: &[String]) -> String {
    if actions.is_empty() {
        return "None".to_string();
    }
    actions
        .iter()
        .enumerate()
        .map(|(i, a)| format!("- Step {i}: {a}"))
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn querygen_prompt(goal: &str, actions: &[String]) -> Prompt {
    Prompt {
        system: QUERYGEN_SYSTEM.trim_end_matches('\n').to_string(),
        user: fill(
            QUERYGEN_USER,
            &[("goal", goal), ("action_history", &render_history(actions))],
        ),
    }
}

pub fn focusagent_prompt(goal: &str, actions: &[String], html: &str, k: usize) -> Prompt {
    let k = k.to_string();
    Prompt {
        system: FOCUSAGENT_SYSTEM.trim_end_matches('\n').to_string(),
        user: fill(
            FOCUSAGENT_USER,
            &[
                ("k", &k),
                ("goal", goal),
                ("history", &render_history(actions)),
                ("html_txt", html),
            ],
        ),
    }
}

pub fn planner_prompt(goal: &str, actions: &[String], action_space: &str) -> Prompt {
    Prompt {
        system: fill(PRUNE4WEB_PLANNER_SYSTEM, &[("action_space", action_space)]),
        user: format!("Task Goal: {goal}\n\nAction History:\n{}", render_history(actions)),
    }
}

/// The filter sees the planner output verbatim.
pub fn filter_prompt(planner_output: &str) -> Prompt {
    Prompt {
        system: PRUNE4WEB_FILTER_SYSTEM.trim_end_matches('\n').to_string(),
        user: planner_output.to_string(),
    }
}

fn tag_block<'a>(text: &'a str, tag: &str) -> Option<&'a str> {
    let open = format!("<{tag}>");
    let close = format!("</{tag}>");
    let start = text.find(&open)? + open.len();
    let end = text[start..].find(&close)? + start;
    Some(&text[start..end])
}

/// Content of the first `<query>` block, trimmed.
pub fn parse_querygen_response(text: &str) -> Result<String, ReduceError> {
    let q = tag_block(text, "query")
        .ok_or_else(|| ReduceError::MalformedResponse("no <query> block".into()))?
        .trim();
    if q.is_empty() {
        return Err(ReduceError::MalformedResponse("empty <query> block".into()));
    }
    Ok(q.to_string())
}

/// Bids from the bracketed list in the `<answer>` block, first occurrence
/// order, duplicates dropped.
pub fn parse_focusagent_response(text: &str) -> Result<Vec<String>, ReduceError> {
    let answer = tag_block(text, "answer").ok_or_else(|| ReduceError::MalformedResponse("no <answer> block".into()))?;
    let open = answer
        .find('[')
        .ok_or_else(|| ReduceError::MalformedResponse("no bracketed list in <answer>".into()))?;
    let close = answer[open..]
        .find(']')
        .ok_or_else(|| ReduceError::MalformedResponse("unclosed list in <answer>".into()))?
        + open;
    let mut out: Vec<String> = Vec::new();
    for tok in answer[open + 1..close].split(',') {
        let tok = tok.trim().trim_matches(|c| c == '"' || c == '\'').trim();
        if !tok.is_empty() && !out.iter().any(|b| b == tok) {
            out.push(tok.to_string());
        }
    }
    Ok(out)
}

/// `keyword_weights` from the JSON object inside the `<answer>` block.
pub fn parse_filter_response(text: &str) -> Result<KeywordWeights, ReduceError> {
    let answer = tag_block(text, "answer").ok_or_else(|| ReduceError::MalformedResponse("no <answer> block".into()))?;
    let (Some(start), Some(end)) = (answer.find('{'), answer.rfind('}')) else {
        return Err(ReduceError::MalformedResponse("no JSON object in <answer>".into()));
    };
    let v: Value = serde_json::from_str(&answer[start..=end])
        .map_err(|e| ReduceError::MalformedResponse(format!("answer payload: {e}")))?;
    let map = v
        .get("keyword_weights")
        .and_then(Value::as_object)
        .ok_or_else(|| ReduceError::MalformedResponse("missing `keyword_weights` object".into()))?;
    let mut out = KeywordWeights::new();
    for (k, w) in map {
        let w = w
            .as_f64()
            .ok_or_else(|| ReduceError::MalformedResponse(format!("weight of `{k}` is not a number")))?;
        out.insert(k.clone(), w)
            .map_err(|e| ReduceError::MalformedResponse(e.to_string()))?;
    }
    Ok(out)
}
