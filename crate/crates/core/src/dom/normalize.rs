//! Rule-driven DOM normalization used to compare observations across
//! sessions. Rules run in order; each rule is a full pass over the document.
//!
//! Only platform-independent rules ship built in (see [`builtin_rules`]).
//! Platform-specific rules are loaded from a rule file, one JSON object per
//! line with `id`, `kind`, `pattern` and optional `replacement`, `selector`
//! and `target` fields.

use std::path::Path;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::edit::DomEditor;
use super::select::Selector;
use super::{is_raw_text, parse_html, DomDocument, DomError, NodeId, NodeKind, BID_ATTR};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleKind {
    /// Drop elements matching the `pattern` selector, with their subtrees.
    RemoveElement,
    /// Drop attributes whose name fully matches the `pattern` regex, on
    /// elements matching `selector` (default: all).
    RemoveAttribute,
    /// Regex replacement over text and/or attribute values.
    ReplacePattern,
    /// Sort `style` declarations by property on elements matching `pattern`.
    SortCss,
    /// Drop trailing whitespace and blank lines inside text; standalone
    /// numeric lines become `replacement` (default `[ROW_COUNT]`).
    Whitespace,
    /// Rewrite elements matching `pattern` (normally `font`) as `span` with
    /// `size`/`face`/`color` folded into `style`.
    FontToSpan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleTarget {
    Text,
    Attributes,
    #[default]
    All,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizationRule {
    pub id: String,
    pub kind: RuleKind,
    #[serde(default)]
    pub pattern: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replacement: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selector: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<RuleTarget>,
}

impl NormalizationRule {
    pub fn new(id: &str, kind: RuleKind, pattern: &str) -> Self {
        NormalizationRule {
            id: id.to_string(),
            kind,
            pattern: pattern.to_string(),
            replacement: None,
            selector: None,
            target: None,
        }
    }

    pub fn with_replacement(mut self, replacement: &str) -> Self {
        self.replacement = Some(replacement.to_string());
        self
    }

    pub fn with_target(mut self, target: RuleTarget) -> Self {
        self.target = Some(target);
        self
    }

    fn invalid(&self, reason: impl Into<String>) -> DomError {
        DomError::InvalidRule {
            id: self.id.clone(),
            reason: reason.into(),
        }
    }

    fn compile(&self) -> Result<Compiled, DomError> {
        let selector = |s: &str| s.parse::<Selector>().map_err(|e| self.invalid(e.0));
        let scope = match &self.selector {
            Some(s) => selector(s)?,
            None => Selector::any(),
        };
        Ok(match self.kind {
            RuleKind::RemoveElement => Compiled::RemoveElement(selector(&self.pattern)?),
            RuleKind::SortCss => Compiled::SortCss(selector(&self.pattern)?),
            RuleKind::FontToSpan => Compiled::FontToSpan(selector(&self.pattern)?),
            RuleKind::RemoveAttribute => {
                if self.pattern.is_empty() {
                    return Err(self.invalid("empty attribute pattern"));
                }
                let re = Regex::new(&format!("^(?:{})$", self.pattern)).map_err(|e| self.invalid(e.to_string()))?;
                Compiled::RemoveAttribute(re, scope)
            }
            RuleKind::ReplacePattern => {
                if self.pattern.is_empty() {
                    return Err(self.invalid("empty pattern"));
                }
                let re = Regex::new(&self.pattern).map_err(|e| self.invalid(e.to_string()))?;
                let replacement = self
                    .replacement
                    .clone()
                    .ok_or_else(|| self.invalid("replace-pattern needs a replacement"))?;
                if re.is_match(&replacement) {
                    return Err(self.invalid("replacement matches its own pattern"));
                }
                Compiled::Replace {
                    re,
                    replacement,
                    scope,
                    target: self.target.unwrap_or_default(),
                }
            }
            RuleKind::Whitespace => {
                Compiled::Whitespace(self.replacement.clone().unwrap_or_else(|| "[ROW_COUNT]".to_string()))
            }
        })
    }
}

enum Compiled {
    RemoveElement(Selector),
    RemoveAttribute(Regex, Selector),
    Replace {
        re: Regex,
        replacement: String,
        scope: Selector,
        target: RuleTarget,
    },
    SortCss(Selector),
    Whitespace(String),
    FontToSpan(Selector),
}

/// The generic, platform-independent ruleset.
pub fn builtin_rules() -> Vec<NormalizationRule> {
    use RuleKind::*;
    vec![
        NormalizationRule::new("strip-script-style", RemoveElement, "script, style"),
        NormalizationRule::new("font-to-span", FontToSpan, "font"),
        NormalizationRule::new("sort-span-css", SortCss, "span"),
        NormalizationRule::new(
            "uuid",
            ReplacePattern,
            r"(?i)\b[0-9a-f]{8}-[0-9a-f]{4}-[0-9a-f]{4}-[0-9a-f]{4}-[0-9a-f]{12}\b",
        )
        .with_replacement("[UUID]"),
        NormalizationRule::new("sys-id", ReplacePattern, r"(?i)\b[0-9a-f]{32}\b")
            .with_replacement("[SYS_ID]"),
        NormalizationRule::new("date", ReplacePattern, r"\b\d{4}-\d{2}-\d{2}")
            .with_replacement("[DATE]"),
        NormalizationRule::new("time", ReplacePattern, r"\d{2}:\d{2}:\d{2}")
            .with_replacement("[TIME]"),
        NormalizationRule::new(
            "time-ago",
            ReplacePattern,
            r"(?i)\b(?:\d+|an?)[ \t]*(?:s|secs?|seconds?|m|mins?|minutes?|h|hrs?|hours?|d|days?|w|wks?|weeks?|mo|mos|months?|y|yrs?|years?)[ \t]+(?:ago|from[ \t]+now)\b",
        )
        .with_replacement("[TIMEAGO]"),
        NormalizationRule::new("whitespace", Whitespace, ""),
    ]
}

/// Reads a rule file: either a JSON array or one JSON object per line.
pub fn load_rules(path: &Path) -> Result<Vec<NormalizationRule>, RuleFileError> {
    let text = std::fs::read_to_string(path)?;
    parse_rules(&text)
}

#[derive(Debug, thiserror::Error)]
pub enum RuleFileError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("rule file line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error(transparent)]
    Rule(#[from] DomError),
}

pub fn parse_rules(text: &str) -> Result<Vec<NormalizationRule>, RuleFileError> {
    let rules: Vec<NormalizationRule> = if text.trim_start().starts_with('[') {
        serde_json::from_str(text).map_err(|source| RuleFileError::Json { line: 1, source })?
    } else {
        text.lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with("//"))
            .map(|(i, l)| serde_json::from_str(l).map_err(|source| RuleFileError::Json { line: i + 1, source }))
            .collect::<Result<_, _>>()?
    };
    for r in &rules {
        r.compile()?;
    }
    Ok(rules)
}

pub fn normalize(doc: &DomDocument, rules: &[NormalizationRule]) -> Result<DomDocument, DomError> {
    let compiled = rules
        .iter()
        .map(NormalizationRule::compile)
        .collect::<Result<Vec<_>, _>>()?;
    let mut cur = doc.clone();
    for rule in &compiled {
        cur = apply(&cur, rule)?;
    }
    Ok(cur)
}

/// True iff both inputs serialize identically after normalization.
pub fn normalized_equal(a: &str, b: &str, rules: &[NormalizationRule]) -> Result<bool, DomError> {
    let a = normalize(&parse_html(a)?, rules)?;
    let b = normalize(&parse_html(b)?, rules)?;
    Ok(a.serialize() == b.serialize())
}

fn matching(doc: &DomDocument, sel: &Selector) -> Vec<NodeId> {
    doc.elements().filter(|e| sel.matches(e)).map(|e| e.node_id()).collect()
}

fn in_raw_text(doc: &DomDocument, id: NodeId) -> bool {
    doc.parent_of(id)
        .and_then(|p| doc.element_data(p))
        .is_some_and(|e| is_raw_text(&e.tag))
}

fn apply(doc: &DomDocument, rule: &Compiled) -> Result<DomDocument, DomError> {
    let mut ed = DomEditor::from_doc(doc);
    match rule {
        Compiled::RemoveElement(sel) => {
            for id in matching(doc, sel) {
                ed.detach(id);
            }
        }
        Compiled::RemoveAttribute(re, scope) => {
            for id in matching(doc, scope) {
                if let Some(e) = ed.element_mut(id) {
                    e.attrs.retain(|(k, _)| !re.is_match(k));
                }
            }
        }
        Compiled::Replace {
            re,
            replacement,
            scope,
            target,
        } => {
            let in_scope = matching(doc, scope);
            if *target != RuleTarget::Attributes {
                for id in 0..doc.nodes.len() {
                    let scoped = doc
                        .parent_of(id)
                        .is_some_and(|p| in_scope.binary_search(&p).is_ok() || doc.element_data(p).is_none());
                    if !scoped || in_raw_text(doc, id) {
                        continue;
                    }
                    if let NodeKind::Text(t) = ed.kind_mut(id) {
                        if re.is_match(t) {
                            *t = re.replace_all(t, replacement.as_str()).into_owned();
                        }
                    }
                }
            }
            if *target != RuleTarget::Text {
                for id in in_scope {
                    if let Some(e) = ed.element_mut(id) {
                        for (k, v) in e.attrs.iter_mut() {
                            if k != BID_ATTR && re.is_match(v) {
                                *v = re.replace_all(v, replacement.as_str()).into_owned();
                            }
                        }
                    }
                }
            }
        }
        Compiled::SortCss(sel) => {
            for id in matching(doc, sel) {
                if let Some(e) = ed.element_mut(id) {
                    for (k, v) in e.attrs.iter_mut() {
                        if k == "style" {
                            *v = sort_css(v);
                        }
                    }
                }
            }
        }
        Compiled::Whitespace(row_count) => {
            for id in 0..doc.nodes.len() {
                if in_raw_text(doc, id) {
                    continue;
                }
                if let NodeKind::Text(t) = ed.kind_mut(id) {
                    *t = normalize_lines(t, row_count);
                }
            }
        }
        Compiled::FontToSpan(sel) => {
            for id in matching(doc, sel) {
                if let Some(e) = ed.element_mut(id) {
                    font_to_span(e);
                }
            }
        }
    }
    ed.finish()
}

fn parse_declarations(style: &str) -> Vec<(String, String)> {
    style
        .split(';')
        .filter_map(|decl| {
            let (prop, value) = decl.split_once(':')?;
            let prop = prop.trim().to_ascii_lowercase();
            let value = value.trim();
            (!prop.is_empty()).then(|| (prop, value.to_string()))
        })
        .collect()
}

fn render_declarations(decls: &[(String, String)]) -> String {
    decls
        .iter()
        .map(|(p, v)| format!("{p}: {v}"))
        .collect::<Vec<_>>()
        .join("; ")
}

pub(crate) fn sort_css(style: &str) -> String {
    let mut decls = parse_declarations(style);
    decls.sort_by(|a, b| a.0.cmp(&b.0));
    render_declarations(&decls)
}

fn font_size_keyword(size: &str) -> String {
    match size.trim() {
        "1" => "x-small",
        "2" => "small",
        "3" => "medium",
        "4" => "large",
        "5" => "x-large",
        "6" => "xx-large",
        "7" => "xxx-large",
        other => other,
    }
    .to_string()
}

fn font_to_span(e: &mut super::ElementData) {
    let mut decls = Vec::new();
    let mut extra = Vec::new();
    let mut kept = Vec::new();
    for (k, v) in std::mem::take(&mut e.attrs) {
        match k.as_str() {
            "size" => decls.push(("font-size".to_string(), font_size_keyword(&v))),
            "face" => decls.push(("font-family".to_string(), v.trim().to_string())),
            "color" => decls.push(("color".to_string(), v.trim().to_string())),
            "style" => extra = parse_declarations(&v),
            _ => kept.push((k, v)),
        }
    }
    extra.extend(decls);
    if !extra.is_empty() {
        kept.push(("style".to_string(), render_declarations(&extra)));
    }
    e.tag = "span".to_string();
    e.attrs = kept;
}

fn normalize_lines(text: &str, row_count: &str) -> String {
    text.split('\n')
        .filter_map(|line| {
            let line = line.trim_end();
            let core = line.trim_start();
            if core.is_empty() {
                None
            } else if core.bytes().all(|b| b.is_ascii_digit()) {
                Some(row_count)
            } else {
                Some(line)
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norm(html: &str) -> String {
        normalize(&parse_html(html).unwrap(), &builtin_rules())
            .unwrap()
            .serialize()
    }

    #[test]
    fn time_ago() {
        assert_eq!(norm("<p>updated 5m ago</p>"), "<p>updated [TIMEAGO]</p>");
        assert_eq!(norm("<p>in 3 days from now</p>"), "<p>in [TIMEAGO]</p>");
        assert_eq!(norm("<p>an hour ago</p>"), "<p>[TIMEAGO]</p>");
    }

    #[test]
    fn uuid_and_sys_id() {
        assert_eq!(
            norm(r#"<div id="row-123e4567-e89b-12d3-a456-426614174000">x</div>"#),
            r#"<div id="row-[UUID]">x</div>"#
        );
        assert_eq!(
            norm(r#"<a bid="1" href="/x?sys_id=0123456789abcdef0123456789abcdef">y</a>"#),
            r#"<a bid="1" href="/x?sys_id=[SYS_ID]">y</a>"#
        );
    }

    #[test]
    fn font_conversion() {
        assert_eq!(
            norm(r#"<font size="3" face="arial">x</font>"#),
            r#"<span style="font-family: arial; font-size: medium">x</span>"#
        );
    }

    #[test]
    fn css_sorting_only_on_spans() {
        assert_eq!(
            norm(r#"<span style="z-index:1; color: red">a</span><div style="b:1;a:2">b</div>"#),
            r#"<span style="color: red; z-index: 1">a</span><div style="b:1;a:2">b</div>"#
        );
    }

    #[test]
    fn dates_times_scripts_whitespace() {
        assert_eq!(
            norm("<div>Created 2024-03-01 10:22:33  \n\n 42 \n<script>var t=1;</script></div>"),
            "<div>Created [DATE] [TIME]\n[ROW_COUNT]</div>"
        );
    }

    #[test]
    fn idempotent_on_own_output() {
        let html = r#"<html><body><font size="2" color="red" style="b: 1">5m ago 2024-01-01T10:00:00</font>
            <span style="b:2;a:1">0123456789abcdef0123456789ABCDEF</span>

            12
        </body></html>"#;
        let once = normalize(&parse_html(html).unwrap(), &builtin_rules()).unwrap();
        let twice = normalize(&once, &builtin_rules()).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn invalid_rules() {
        let bad = NormalizationRule::new("bad", RuleKind::ReplacePattern, "(").with_replacement("x");
        let doc = parse_html("<p>x</p>").unwrap();
        assert!(matches!(normalize(&doc, &[bad]), Err(DomError::InvalidRule { .. })));
        let no_repl = NormalizationRule::new("nr", RuleKind::ReplacePattern, "x");
        assert!(normalize(&doc, &[no_repl]).is_err());
        let self_match = NormalizationRule::new("sm", RuleKind::ReplacePattern, "x+").with_replacement("xx");
        assert!(normalize(&doc, &[self_match]).is_err());
        let bad_sel = NormalizationRule::new("bs", RuleKind::RemoveElement, "div > p");
        assert!(normalize(&doc, &[bad_sel]).is_err());
    }

    #[test]
    fn rule_file_forms() {
        let jsonl = r#"
{"id":"a1","kind":"remove-element","pattern":".sys-banner"}
{"id":"a16","kind":"remove-attribute","pattern":"dir|data-tooltip.*"}
{"id":"d3","kind":"replace-pattern","pattern":"[a-z.]+@example\\.com","replacement":"[USER_EMAIL]","target":"text"}
"#;
        let rules = parse_rules(jsonl).unwrap();
        assert_eq!(rules.len(), 3);
        let out = normalize(
            &parse_html(r#"<div dir="ltr" data-tooltip-id="7"><p class="sys-banner">x</p>mail a.b@example.com</div>"#)
                .unwrap(),
            &rules,
        )
        .unwrap();
        assert_eq!(out.serialize(), "<div>mail [USER_EMAIL]</div>");
        let arr = serde_json::to_string(&builtin_rules()).unwrap();
        assert_eq!(parse_rules(&arr).unwrap(), builtin_rules());
    }

    #[test]
    fn normalized_equal_examples() {
        let r = builtin_rules();
        let a = r#"<div bid="1" data-id="123e4567-e89b-12d3-a456-426614174000">x</div>"#;
        let b = r#"<div bid="1" data-id="aaaaaaaa-bbbb-cccc-dddd-eeeeeeeeeeee">x</div>"#;
        assert!(normalized_equal(a, a, &r).unwrap());
        assert!(normalized_equal(a, b, &r).unwrap());
        assert!(!normalized_equal(a, &a.replace("div", "section"), &r).unwrap());
    }
}
