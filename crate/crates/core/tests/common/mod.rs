//! Random documents and small fixtures shared by the integration tests.
#![allow(dead_code)]

use std::fmt::Write as _;

use mfscope::dom::{DomDocument, ElementRef};
use rand::seq::SliceRandom;
use rand::Rng;

pub const WORDS: &[&str] = &[
    "search",
    "searching",
    "searches",
    "box",
    "login",
    "log",
    "submit",
    "order",
    "orders",
    "history",
    "cart",
    "home",
    "menu",
    "incident",
    "priority",
    "state",
    "new",
    "closed",
    "user",
    "name",
    "email",
    "sarch",
    "serch",
    "button",
    "input",
    "form",
    "nav",
    "list",
    "item",
    "compose",
    "message",
];

const TAGS: &[&str] = &[
    "div", "span", "p", "a", "button", "input", "ul", "li", "section", "label", "select", "option", "form", "img",
];
const VOID: &[&str] = &["input", "img"];
const ATTRS: &[&str] = &[
    "class",
    "id",
    "aria-label",
    "placeholder",
    "name",
    "role",
    "title",
    "value",
    "href",
    "type",
];

pub fn phrase(rng: &mut impl Rng, max_words: usize) -> String {
    let n = rng.gen_range(1..=max_words);
    (0..n)
        .map(|_| *WORDS.choose(rng).expect("non-empty"))
        .collect::<Vec<_>>()
        .join(" ")
}

struct Node {
    tag: &'static str,
    attrs: Vec<(&'static str, String)>,
    children: Vec<Child>,
}

enum Child {
    Text(String),
    El(usize),
}

/// `<html bid="e0"><body bid="e1">` holding `elements` more elements
/// (`e2`, `e3`, ...) under random parents, with attributes and text.
pub fn random_html(rng: &mut impl Rng, elements: usize) -> String {
    let mut nodes = vec![
        Node {
            tag: "html",
            attrs: vec![("bid", "e0".into())],
            children: vec![Child::El(1)],
        },
        Node {
            tag: "body",
            attrs: vec![("bid", "e1".into())],
            children: vec![],
        },
    ];
    for i in 2..elements + 2 {
        let tag = *TAGS.choose(rng).expect("non-empty");
        let mut attrs = vec![("bid", format!("e{i}"))];
        let n_attrs = rng.gen_range(0..3);
        for a in ATTRS.choose_multiple(rng, n_attrs) {
            attrs.push((a, phrase(rng, 2)));
        }
        let mut children = Vec::new();
        if !VOID.contains(&tag) && rng.gen_bool(0.6) {
            children.push(Child::Text(phrase(rng, 3)));
        }
        nodes.push(Node { tag, attrs, children });
        let parents: Vec<usize> = (1..i).filter(|&p| !VOID.contains(&nodes[p].tag)).collect();
        let parent = *parents.choose(rng).expect("body is always a parent");
        if rng.gen_bool(0.3) {
            nodes[parent]
                .children
                .push(Child::Text(format!(" {} ", phrase(rng, 2))));
        }
        nodes[parent].children.push(Child::El(i));
    }
    let mut out = String::new();
    write_node(&nodes, 0, &mut out);
    out
}

fn write_node(nodes: &[Node], i: usize, out: &mut String) {
    let n = &nodes[i];
    out.push('<');
    out.push_str(n.tag);
    for (k, v) in &n.attrs {
        let _ = write!(out, " {k}=\"{v}\"");
    }
    out.push('>');
    if VOID.contains(&n.tag) {
        return;
    }
    for c in &n.children {
        match c {
            Child::Text(t) => out.push_str(t),
            Child::El(j) => write_node(nodes, *j, out),
        }
    }
    let _ = write!(out, "</{}>", n.tag);
}

pub fn random_doc(rng: &mut impl Rng, elements: usize) -> DomDocument {
    DomDocument::parse(&random_html(rng, elements)).expect("generated html parses")
}

/// Every unit present in `doc`: `@tag` per bid element, `@text` where it
/// has direct text, and each non-bid attribute.
pub fn present_units(doc: &DomDocument) -> Vec<ElementRef> {
    let mut out = Vec::new();
    for el in doc.bid_elements() {
        let bid = el.bid().expect("bid element");
        out.push(ElementRef::tag(bid));
        if !el.direct_text().is_empty() {
            out.push(ElementRef::text(bid));
        }
        for (k, _) in el.attrs() {
            if k != "bid" {
                out.push(ElementRef::named(bid, k));
            }
        }
    }
    out
}

/// Markup dense in the patterns the built-in normalization rules touch.
pub fn noisy_html(rng: &mut impl Rng) -> String {
    let hex = |rng: &mut dyn rand::RngCore, n: usize| -> String {
        (0..n)
            .map(|_| char::from_digit(rng.gen_range(0..16), 16).expect("hex digit"))
            .collect()
    };
    let mut out = String::from("<html><body>");
    for i in 0..rng.gen_range(1..8) {
        let piece = match rng.gen_range(0..10) {
            0 => format!(
                r#"<div id="row-{}-{}-{}-{}-{}">x</div>"#,
                hex(rng, 8),
                hex(rng, 4),
                hex(rng, 4),
                hex(rng, 4),
                hex(rng, 12)
            ),
            1 => format!(r#"<a href="/r?sys_id={}">open</a>"#, hex(rng, 32).to_uppercase()),
            2 => format!(
                "<p>at {:04}-{:02}-{:02} {:02}:{:02}:{:02}</p>",
                rng.gen_range(1990..2030),
                rng.gen_range(1..13),
                rng.gen_range(1..29),
                rng.gen_range(0..24),
                rng.gen_range(0..60),
                rng.gen_range(0..60)
            ),
            3 => {
                let unit = ["m", "min", "minutes", "hours", "h", "days", "wk", "months", "yrs", "s"]
                    .choose(rng)
                    .expect("non-empty");
                let tail = if rng.gen_bool(0.5) { "ago" } else { "from now" };
                format!("<span>updated {} {unit} {tail}</span>", rng.gen_range(1..90))
            }
            4 => format!(
                r#"<font size="{}" face="{}" color="red">{}</font>"#,
                rng.gen_range(1..9),
                ["arial", "serif", " mono "].choose(rng).expect("non-empty"),
                phrase(rng, 2)
            ),
            5 => format!(
                r#"<span style="z-index: {}; color:red;  margin :0">{}</span>"#,
                rng.gen_range(0..9),
                phrase(rng, 2)
            ),
            6 => format!(
                "<script>var t{i} = {};</script><style>p {{ }}</style>",
                rng.gen_range(0..99)
            ),
            7 => format!("<div>{}  \n\n   {}\n  \n</div>", phrase(rng, 3), rng.gen_range(0..500)),
            8 => format!("<li>  {}\t</li>", phrase(rng, 4)),
            _ => format!(r#"<font face="x"><font size="2">{}</font></font>"#, phrase(rng, 2)),
        };
        out.push_str(&piece);
    }
    out.push_str("</body></html>");
    out
}
