//! Canonical serialization: lowercase names, attributes in document order,
//! double-quoted values, no inserted whitespace, void elements as `<x/>`.

use super::{is_raw_text, is_void, DomDocument, NodeId, NodeKind};

pub(crate) fn serialize(doc: &DomDocument, start: NodeId) -> String {
    enum Step {
        Enter(NodeId),
        Close(NodeId),
    }
    let mut out = String::new();
    let mut stack = vec![Step::Enter(start)];
    while let Some(step) = stack.pop() {
        match step {
            Step::Close(id) => {
                if let NodeKind::Element(e) = &doc.nodes[id].kind {
                    out.push_str("</");
                    out.push_str(&e.tag);
                    out.push('>');
                }
            }
            Step::Enter(id) => {
                let node = &doc.nodes[id];
                match &node.kind {
                    NodeKind::Document => {}
                    NodeKind::Text(t) => {
                        let raw = node
                            .parent
                            .and_then(|p| doc.element_data(p))
                            .is_some_and(|e| is_raw_text(&e.tag));
                        if raw {
                            out.push_str(t);
                        } else {
                            escape_text(t, &mut out);
                        }
                        continue;
                    }
                    NodeKind::Comment(c) => {
                        out.push_str("<!--");
                        out.push_str(c);
                        out.push_str("-->");
                        continue;
                    }
                    NodeKind::Doctype(d) => {
                        out.push_str("<!DOCTYPE ");
                        out.push_str(d);
                        out.push('>');
                        continue;
                    }
                    NodeKind::Element(e) => {
                        out.push('<');
                        out.push_str(&e.tag);
                        for (k, v) in &e.attrs {
                            out.push(' ');
                            out.push_str(k);
                            out.push_str("=\"");
                            escape_attr(v, &mut out);
                            out.push('"');
                        }
                        if is_void(&e.tag) && node.children.is_empty() {
                            out.push_str("/>");
                            continue;
                        }
                        out.push('>');
                        stack.push(Step::Close(id));
                    }
                }
                stack.extend(node.children.iter().rev().map(|&c| Step::Enter(c)));
            }
        }
    }
    out
}

fn escape_text(s: &str, out: &mut String) {
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            c => out.push(c),
        }
    }
}

fn escape_attr(s: &str, out: &mut String) {
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '"' => out.push_str("&quot;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            c => out.push(c),
        }
    }
}
