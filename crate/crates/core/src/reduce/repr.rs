use crate::dom::{DomDocument, DomElement};
use crate::text::{collapse_ws, truncate_chars};

/// Attributes listed in an element representation, in output order.
pub const REPR_ATTRIBUTES: [&str; 14] = [
    "class",
    "id",
    "name",
    "role",
    "aria-label",
    "placeholder",
    "value",
    "href",
    "title",
    "type",
    "for",
    "src",
    "alt",
    "data-testid",
];

const MAX_TEXT: usize = 200;
const MAX_ATTR_VALUE: usize = 100;
const MAX_CHILDREN: usize = 5;

/// Retrieval query from the goal and the (zero-indexed) action history.
pub fn build_query(goal: &str, action_history: &[String]) -> String {
    let mut q = format!("Goal: {goal}\n\nPrevious Actions:");
    for (i, a) in action_history.iter().enumerate() {
        q.push_str(&format!("\n- Step {i}: {a}"));
    }
    q
}

/// Absolute tag path. Steps get a 1-based `[n]` index only when the tag
/// repeats among the element's siblings.
pub fn xpath(el: &DomElement<'_>) -> String {
    let doc: &DomDocument = el.document();
    let mut chain: Vec<DomElement<'_>> = el.ancestors().collect();
    chain.reverse();
    chain.push(*el);
    let mut out = String::new();
    for e in chain {
        let parent = doc.parent_of(e.node_id()).expect("element has a parent");
        let same: Vec<_> = doc
            .element_child_ids(parent)
            .filter(|&c| doc.element_data(c).is_some_and(|d| d.tag == e.tag()))
            .collect();
        out.push('/');
        out.push_str(e.tag());
        if same.len() > 1 {
            let pos = same
                .iter()
                .position(|&c| c == e.node_id())
                .expect("self among siblings");
            out.push_str(&format!("[{}]", pos + 1));
        }
    }
    out
}

/// Six-line structured text for one element.
pub fn element_repr(el: &DomElement<'_>) -> String {
    let text = collapse_ws(&el.direct_text());
    let attrs: Vec<String> = REPR_ATTRIBUTES
        .iter()
        .filter_map(|&name| {
            el.attr(name)
                .map(|v| format!("{name}='{}'", truncate_chars(v, MAX_ATTR_VALUE)))
        })
        .collect();
    let children: Vec<&str> = el.element_children().take(MAX_CHILDREN).map(|c| c.tag()).collect();
    let lines = [
        ("[[tag]]", el.tag().to_string()),
        ("[[xpath]]", xpath(el)),
        ("[[bid]]", el.bid().unwrap_or_default().to_string()),
        ("[[text]]", truncate_chars(&text, MAX_TEXT).to_string()),
        ("[[attributes]]", attrs.join(" ")),
        ("[[children]]", children.join(" ")),
    ];
    lines
        .iter()
        .map(|(label, v)| {
            if v.is_empty() {
                label.to_string()
            } else {
                format!("{label} {v}")
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}
