//! The three fixed pruning programs (seed and two learned ones).
//!
//! Each runs on a scratch [`DomEditor`] so that text nodes split by removed
//! elements stay separate strings until the end, the same way the programs
//! see them when run over a mutable soup.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use regex::Regex;

use super::{ReduceError, ReductionRequest};
use crate::dom::edit::DomEditor;
use crate::dom::{parse_html, DomDocument, DomError, ElementData, NodeId, NodeKind, BID_ATTR};
use crate::text::{collapse_ws, stem};

const INTERACTIVE: &[&str] = &["input", "button", "select", "textarea", "a", "label", "option"];

const WA_ATTRIBUTES_TO_KEEP: &[&str] = &[
    "bid",
    "id",
    "name",
    "value",
    "type",
    "href",
    "src",
    "alt",
    "title",
    "placeholder",
    "aria-label",
    "data-label",
    "for",
    "role",
    "checked",
    "selected",
    "disabled",
    "readonly",
];

const WL_PRESERVED_ATTRIBUTES: &[&str] = &[
    "bid",
    "id",
    "name",
    "value",
    "type",
    "href",
    "src",
    "alt",
    "title",
    "placeholder",
    "aria-label",
    "role",
    "checked",
    "selected",
    "disabled",
    "contenteditable",
    "for",
    "colspan",
    "rowspan",
    "tabindex",
    "maxlength",
    "data-testid",
    "data-test-id",
    "data-test",
    "content",
];

const WL_TEXTUAL_ATTRIBUTES: &[&str] = &["value", "placeholder", "aria-label", "title", "alt", "name", "content"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GepaProgram {
    Seed,
    WorkarenaR02,
    WeblinxR02,
}

impl GepaProgram {
    pub const ALL: [GepaProgram; 3] = [GepaProgram::Seed, GepaProgram::WorkarenaR02, GepaProgram::WeblinxR02];

    pub fn as_str(self) -> &'static str {
        match self {
            GepaProgram::Seed => "seed",
            GepaProgram::WorkarenaR02 => "workarena_r02",
            GepaProgram::WeblinxR02 => "weblinx_r02",
        }
    }
}

impl fmt::Display for GepaProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GepaProgram {
    type Err = ReduceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GepaProgram::ALL.into_iter().find(|p| p.as_str() == s).ok_or_else(|| {
            ReduceError::InvalidConfig(format!(
                "unknown program `{s}` (expected seed, workarena_r02 or weblinx_r02)"
            ))
        })
    }
}

/// Runs `program` with the history joined by newlines.
pub fn reduce_gepa_program(req: &ReductionRequest<'_>, program: GepaProgram) -> Result<DomDocument, ReduceError> {
    Ok(run_gepa_program(
        req.doc,
        req.goal,
        &req.action_history.join("\n"),
        program,
    )?)
}

pub fn run_gepa_program(
    doc: &DomDocument,
    goal: &str,
    action_history: &str,
    program: GepaProgram,
) -> Result<DomDocument, DomError> {
    match program {
        GepaProgram::Seed => seed(doc, goal, action_history),
        GepaProgram::WorkarenaR02 => workarena_r02(doc, goal, action_history),
        GepaProgram::WeblinxR02 => weblinx_r02(doc, goal, action_history),
    }
}

fn word_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\w+").expect("static regex"))
}

fn action_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?:click|fill)\('([^']+)'\)|select_option\('([^']+)',\s*'([^']+)'\)").expect("static regex")
    })
}

/// Stems of `\w+` words in `text` longer than `min_len` chars.
fn stems(text: &str, min_len: usize) -> HashSet<String> {
    word_re()
        .find_iter(text)
        .map(|m| m.as_str())
        .filter(|w| w.chars().count() > min_len)
        .map(stem)
        .collect()
}

fn query_stems(goal: &str, history: &str, min_len: usize) -> HashSet<String> {
    stems(&format!("{goal} {history}").to_lowercase(), min_len)
}

fn elem(ed: &DomEditor, id: NodeId) -> Option<&ElementData> {
    ed.element(id)
}

fn bid_of(ed: &DomEditor, id: NodeId) -> Option<&str> {
    elem(ed, id).and_then(|e| e.attr(BID_ATTR))
}

fn bid_elements(ed: &DomEditor) -> Vec<NodeId> {
    ed.walk(DomDocument::ROOT)
        .into_iter()
        .filter(|&id| bid_of(ed, id).is_some())
        .collect()
}

fn remove_tags(ed: &mut DomEditor, tags: &[&str]) {
    let doomed: Vec<NodeId> = ed
        .walk(DomDocument::ROOT)
        .into_iter()
        .filter(|&id| elem(ed, id).is_some_and(|e| tags.contains(&e.tag.as_str())))
        .collect();
    for id in doomed {
        ed.detach(id);
    }
}

/// Descendant strings, each trimmed, empties dropped, joined by `sep`.
fn get_text(ed: &DomEditor, id: NodeId, sep: &str) -> String {
    ed.strings(id)
        .into_iter()
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect::<Vec<_>>()
        .join(sep)
}

fn is_stringlike(kind: &NodeKind) -> Option<&str> {
    match kind {
        NodeKind::Text(t) | NodeKind::Comment(t) | NodeKind::Doctype(t) => Some(t),
        _ => None,
    }
}

/// Collapses a string node's whitespace into a plain text node, or removes
/// it when nothing is left.
fn clean_string(ed: &mut DomEditor, id: NodeId) {
    let Some(s) = is_stringlike(ed.kind(id)) else {
        return;
    };
    let c = collapse_ws(s);
    if c.is_empty() {
        ed.detach(id);
    } else {
        *ed.kind_mut(id) = NodeKind::Text(c);
    }
}

fn seed(doc: &DomDocument, goal: &str, history: &str) -> Result<DomDocument, DomError> {
    let mut ed = DomEditor::from_doc(doc);
    remove_tags(&mut ed, &["head", "script", "style", "link", "meta"]);
    let kw = query_stems(goal, history, 2);

    let all = bid_elements(&ed);
    let mut keep: HashSet<NodeId> = HashSet::new();
    for &id in &all {
        if INTERACTIVE.contains(&elem(&ed, id).expect("element").tag.as_str()) {
            keep.insert(id);
            continue;
        }
        let text = get_text(&ed, id, " ").to_lowercase();
        if !stems(&text, 0).is_disjoint(&kw) {
            keep.insert(id);
        }
    }
    for &id in &all {
        if keep.contains(&id) {
            let mut up = ed.parent(id);
            while let Some(p) = up {
                if bid_of(&ed, p).is_some() {
                    keep.insert(p);
                }
                up = ed.parent(p);
            }
        }
    }
    for &id in &all {
        if !keep.contains(&id) {
            ed.detach(id);
        }
    }
    ed.finish()
}

fn workarena_r02(doc: &DomDocument, goal: &str, history: &str) -> Result<DomDocument, DomError> {
    let mut ed = DomEditor::from_doc(doc);
    remove_tags(&mut ed, &["head", "script", "style", "link", "meta"]);
    let kw = query_stems(goal, history, 1);

    let mut action_bids: HashSet<&str> = HashSet::new();
    let mut select_targets: HashSet<&str> = HashSet::new();
    for c in action_re().captures_iter(history) {
        if let Some(b) = c.get(1) {
            action_bids.insert(b.as_str());
        } else if let (Some(b), Some(t)) = (c.get(2), c.get(3)) {
            action_bids.insert(b.as_str());
            select_targets.insert(t.as_str());
        }
    }

    let all = bid_elements(&ed);
    let mut keep: HashSet<NodeId> = HashSet::new();
    for &id in &all {
        let e = elem(&ed, id).expect("element");
        let bid = e.attr(BID_ATTR).expect("bid element");
        if action_bids.contains(bid) {
            keep.insert(id);
        }
        if e.tag == "option" && !select_targets.is_empty() {
            let v = e.attr("value").unwrap_or("");
            let t = get_text(&ed, id, "");
            if select_targets.contains(v) || select_targets.contains(t.as_str()) {
                keep.insert(id);
            }
        }
        let mut texts = vec![get_text(&ed, id, " ")];
        for a in ["title", "alt", "aria-label", "placeholder", "value", "data-label"] {
            if let Some(v) = e.attr(a) {
                texts.push(v.to_string());
            }
        }
        let combined = texts
            .into_iter()
            .filter(|s| !s.is_empty())
            .collect::<Vec<_>>()
            .join(" ")
            .to_lowercase();
        if INTERACTIVE.contains(&e.tag.as_str()) || !stems(&combined, 1).is_disjoint(&kw) {
            keep.insert(id);
        }
    }

    // bid ancestors up to (not including) the nearest body
    let mut queue: VecDeque<NodeId> = keep.iter().copied().collect();
    while let Some(id) = queue.pop_front() {
        let mut up = ed.parent(id);
        while let Some(p) = up {
            if let Some(e) = elem(&ed, p) {
                if e.tag == "body" {
                    break;
                }
                if e.attr(BID_ATTR).is_some() && keep.insert(p) {
                    queue.push_back(p);
                }
            }
            up = ed.parent(p);
        }
    }

    for &id in &all {
        if !keep.contains(&id) {
            ed.detach(id);
        }
    }

    for par in bid_elements(&ed) {
        let kids: Vec<NodeId> = ed.children(par).iter().rev().copied().collect();
        for ch in kids {
            match ed.kind(ch) {
                NodeKind::Element(e) => {
                    if e.attr(BID_ATTR).is_none() {
                        let ct = get_text(&ed, ch, " ").to_lowercase();
                        if stems(&ct, 1).is_disjoint(&kw) {
                            ed.detach(ch);
                        }
                    }
                }
                _ => clean_string(&mut ed, ch),
            }
        }
    }

    for id in bid_elements(&ed) {
        if let Some(e) = ed.element_mut(id) {
            e.attrs
                .retain(|(k, _)| WA_ATTRIBUTES_TO_KEEP.contains(&k.to_lowercase().as_str()));
        }
    }

    for id in ed.walk(DomDocument::ROOT) {
        clean_string(&mut ed, id);
    }
    ed.finish()
}

fn weblinx_r02(doc: &DomDocument, goal: &str, history: &str) -> Result<DomDocument, DomError> {
    let mut ed = DomEditor::from_doc(doc);
    remove_tags(&mut ed, &["script", "style", "noscript"]);
    let kw = query_stems(goal, history, 2);

    let all = bid_elements(&ed);
    let editable = |e: &ElementData| e.attr("contenteditable") == Some("true");
    let mut keep: HashSet<NodeId> = HashSet::new();
    for &id in &all {
        let e = elem(&ed, id).expect("element");
        if INTERACTIVE.contains(&e.tag.as_str())
            || editable(e)
            || e.tag == "title"
            || (e.tag == "meta" && e.attr("name") == Some("description"))
        {
            keep.insert(id);
            continue;
        }
        let mut parts: Vec<String> = Vec::new();
        for &ch in ed.children(id) {
            if let Some(s) = is_stringlike(ed.kind(ch)) {
                let s = s.trim();
                if !s.is_empty() {
                    parts.push(s.to_string());
                }
            }
        }
        for a in WL_TEXTUAL_ATTRIBUTES {
            if let Some(v) = e.attr(a) {
                parts.push(v.to_string());
            }
        }
        let text = parts
            .into_iter()
            .filter(|p| !p.is_empty())
            .collect::<Vec<_>>()
            .join(" ")
            .to_lowercase();
        if !text.is_empty() && !stems(&text, 0).is_disjoint(&kw) {
            keep.insert(id);
        }
    }

    let mut keep_final = keep.clone();
    for &id in &all {
        if keep.contains(&id) && editable(elem(&ed, id).expect("element")) {
            for d in ed.walk(id) {
                if bid_of(&ed, d).is_some() {
                    keep_final.insert(d);
                }
            }
        }
    }

    // rebuild: kept elements and html/body roots survive, others are
    // unwrapped; text survives only under a kept or root parent
    let is_root_tag = |e: &ElementData| e.tag == "html" || e.tag == "body";
    let mut out = DomEditor::new();
    let mut stack: Vec<(NodeId, NodeId)> = ed
        .children(DomDocument::ROOT)
        .iter()
        .rev()
        .map(|&c| (c, DomDocument::ROOT))
        .collect();
    while let Some((node, target)) = stack.pop() {
        if let Some(s) = is_stringlike(ed.kind(node)) {
            if s.trim().is_empty() {
                continue;
            }
            let parent_ok = ed
                .parent(node)
                .and_then(|p| elem(&ed, p).map(|pe| keep_final.contains(&p) || is_root_tag(pe)))
                .unwrap_or(false);
            if parent_ok {
                out.append(target, NodeKind::Text(s.to_string()));
            }
            continue;
        }
        let Some(e) = elem(&ed, node) else { continue };
        let mut next_target = target;
        if keep_final.contains(&node) || is_root_tag(e) {
            let attrs = e
                .attrs
                .iter()
                .filter(|(k, _)| WL_PRESERVED_ATTRIBUTES.contains(&k.as_str()))
                .cloned()
                .collect();
            next_target = out.append(
                target,
                NodeKind::Element(ElementData {
                    tag: e.tag.clone(),
                    attrs,
                }),
            );
        }
        for &c in ed.children(node).iter().rev() {
            stack.push((c, next_target));
        }
    }
    if out.children(DomDocument::ROOT).is_empty() {
        return parse_html("<html><body></body></html>");
    }
    out.finish()
}
