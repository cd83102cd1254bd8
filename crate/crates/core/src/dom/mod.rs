//! HTML document model.
//!
//! Documents are stored as a flat arena of nodes in document (pre-)order with
//! parent links. A [`DomDocument`] is immutable once built; every transform
//! goes through [`edit::DomEditor`] and produces a fresh, re-compacted
//! document. Because compaction is canonical, two documents with the same
//! tree compare equal node-for-node.

mod ablate;
mod distance;
pub(crate) mod edit;
pub mod normalize;
mod parse;
mod refs;
pub mod select;
mod serialize;

use std::collections::HashMap;

pub use ablate::{ablate, contains_ref};
pub use distance::{dom_distance, hop};
pub use normalize::{normalize, normalized_equal, NormalizationRule, RuleKind};
pub use parse::parse_html;
pub use refs::{AttrKey, ElementRef, RefSet};

/// Placeholder tag written by `@tag` ablation.
pub const UNK_TAG: &str = "unk";

/// Attribute carrying the element identifier.
pub const BID_ATTR: &str = "bid";

/// Elements that never have children or an end tag.
pub(crate) const VOID_TAGS: &[&str] = &[
    "area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta", "param", "source", "track", "wbr",
];

/// Elements whose content is raw text (no markup, no entity decoding).
pub(crate) const RAW_TEXT_TAGS: &[&str] = &["script", "style"];

pub(crate) fn is_void(tag: &str) -> bool {
    VOID_TAGS.contains(&tag)
}

pub(crate) fn is_raw_text(tag: &str) -> bool {
    RAW_TEXT_TAGS.contains(&tag)
}

pub type NodeId = usize;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum DomError {
    #[error("no element structure could be recovered from the input")]
    UnparseableInput,
    #[error("unknown bid `{0}`")]
    UnknownBid(String),
    #[error("bid `{0}` appears on more than one element")]
    DuplicateBid(String),
    #[error("invalid normalization rule `{id}`: {reason}")]
    InvalidRule { id: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct ElementData {
    pub tag: String,
    pub attrs: Vec<(String, String)>,
}

impl ElementData {
    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attrs.iter().find(|(k, _)| k == name).map(|(_, v)| v.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum NodeKind {
    Document,
    Element(ElementData),
    Text(String),
    Comment(String),
    Doctype(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Node {
    pub kind: NodeKind,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
}

/// A parsed HTML document. Node 0 is the document root.
#[derive(Debug, Clone)]
pub struct DomDocument {
    pub(crate) nodes: Vec<Node>,
    pub(crate) bid_index: HashMap<String, NodeId>,
    /// Bid-carrying elements in document order.
    pub(crate) bid_order: Vec<NodeId>,
    /// Exclusive end of each node's subtree range in the pre-order arena.
    pub(crate) subtree_end: Vec<NodeId>,
}

impl PartialEq for DomDocument {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes
    }
}

impl Eq for DomDocument {}

impl DomDocument {
    pub(crate) const ROOT: NodeId = 0;

    pub fn parse(text: &str) -> Result<Self, DomError> {
        parse_html(text)
    }

    /// Canonical serialization.
    pub fn serialize(&self) -> String {
        serialize::serialize(self, Self::ROOT)
    }

    /// Character count of the canonical serialization.
    pub fn char_length(&self) -> usize {
        self.serialize().chars().count()
    }

    pub fn element_by_bid(&self, bid: &str) -> Option<DomElement<'_>> {
        self.bid_index.get(bid).map(|&id| DomElement { doc: self, id })
    }

    pub fn contains_bid(&self, bid: &str) -> bool {
        self.bid_index.contains_key(bid)
    }

    /// Bids in document order.
    pub fn bids(&self) -> impl Iterator<Item = &str> + '_ {
        self.bid_order.iter().map(move |&id| {
            self.element_data(id)
                .and_then(|e| e.attr(BID_ATTR))
                .expect("indexed node is a bid element")
        })
    }

    pub fn bid_count(&self) -> usize {
        self.bid_order.len()
    }

    /// Bid-carrying elements in document order.
    pub fn bid_elements(&self) -> impl Iterator<Item = DomElement<'_>> + '_ {
        self.bid_order.iter().map(move |&id| DomElement { doc: self, id })
    }

    /// Every element in document order.
    pub fn elements(&self) -> impl Iterator<Item = DomElement<'_>> + '_ {
        (0..self.nodes.len())
            .filter(move |&id| matches!(self.nodes[id].kind, NodeKind::Element(_)))
            .map(move |id| DomElement { doc: self, id })
    }

    /// Top-level nodes (children of the document root).
    pub fn top_level(&self) -> impl Iterator<Item = DomChild<'_>> + '_ {
        self.child_views(Self::ROOT)
    }

    pub(crate) fn element_data(&self, id: NodeId) -> Option<&ElementData> {
        match &self.nodes[id].kind {
            NodeKind::Element(e) => Some(e),
            _ => None,
        }
    }

    pub(crate) fn parent_of(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id].parent
    }

    /// Number of edges from the document root.
    pub(crate) fn depth_of(&self, mut id: NodeId) -> usize {
        let mut depth = 0;
        while let Some(p) = self.nodes[id].parent {
            depth += 1;
            id = p;
        }
        depth
    }

    pub(crate) fn element_child_ids(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes[id]
            .children
            .iter()
            .copied()
            .filter(move |&c| matches!(self.nodes[c].kind, NodeKind::Element(_)))
    }

    fn child_views(&self, id: NodeId) -> impl Iterator<Item = DomChild<'_>> + '_ {
        self.nodes[id].children.iter().map(move |&c| match &self.nodes[c].kind {
            NodeKind::Element(_) => DomChild::Element(DomElement { doc: self, id: c }),
            NodeKind::Text(t) => DomChild::Text(t),
            NodeKind::Comment(t) => DomChild::Comment(t),
            NodeKind::Doctype(t) => DomChild::Doctype(t),
            NodeKind::Document => unreachable!("document node is never a child"),
        })
    }

    pub(crate) fn descendants_of(&self, id: NodeId) -> std::ops::Range<NodeId> {
        id + 1..self.subtree_end[id]
    }
}

/// A child node view.
#[derive(Debug, Clone, Copy)]
pub enum DomChild<'a> {
    Element(DomElement<'a>),
    Text(&'a str),
    Comment(&'a str),
    Doctype(&'a str),
}

/// Borrowed view of one element inside a [`DomDocument`].
#[derive(Clone, Copy)]
pub struct DomElement<'a> {
    doc: &'a DomDocument,
    id: NodeId,
}

impl std::fmt::Debug for DomElement<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DomElement")
            .field("tag", &self.tag())
            .field("bid", &self.bid())
            .finish()
    }
}

impl PartialEq for DomElement<'_> {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.doc, other.doc) && self.id == other.id
    }
}

impl<'a> DomElement<'a> {
    fn data(&self) -> &'a ElementData {
        self.doc.element_data(self.id).expect("element view")
    }

    pub fn node_id(&self) -> NodeId {
        self.id
    }

    pub fn document(&self) -> &'a DomDocument {
        self.doc
    }

    pub fn tag(&self) -> &'a str {
        &self.data().tag
    }

    pub fn bid(&self) -> Option<&'a str> {
        self.attr(BID_ATTR)
    }

    pub fn attr(&self, name: &str) -> Option<&'a str> {
        self.data().attr(name)
    }

    pub fn has_attr(&self, name: &str) -> bool {
        self.attr(name).is_some()
    }

    /// Attributes in document order.
    pub fn attrs(&self) -> impl Iterator<Item = (&'a str, &'a str)> + 'a {
        self.data().attrs.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn children(&self) -> impl Iterator<Item = DomChild<'a>> + 'a {
        self.doc.child_views(self.id)
    }

    pub fn element_children(&self) -> impl Iterator<Item = DomElement<'a>> + 'a {
        let doc = self.doc;
        doc.element_child_ids(self.id).map(move |id| DomElement { doc, id })
    }

    pub fn parent(&self) -> Option<DomElement<'a>> {
        let p = self.doc.parent_of(self.id)?;
        self.doc.element_data(p).map(|_| DomElement { doc: self.doc, id: p })
    }

    /// Element ancestors, nearest first.
    pub fn ancestors(&self) -> impl Iterator<Item = DomElement<'a>> + 'a {
        let doc = self.doc;
        std::iter::successors(self.parent(), move |e| e.parent()).map(move |e| DomElement { doc, id: e.id })
    }

    /// Concatenation of the element's own text-node children.
    pub fn direct_text(&self) -> String {
        self.children()
            .filter_map(|c| match c {
                DomChild::Text(t) => Some(t),
                _ => None,
            })
            .collect()
    }

    /// All descendant text strings in document order (comments excluded).
    pub fn strings(&self) -> Vec<&'a str> {
        let doc = self.doc;
        doc.descendants_of(self.id)
            .filter_map(|id| match &doc.nodes[id].kind {
                NodeKind::Text(t) => Some(t.as_str()),
                _ => None,
            })
            .collect()
    }

    /// Descendant strings, each trimmed, empty ones dropped, joined by `sep`.
    pub fn stripped_text(&self, sep: &str) -> String {
        self.strings()
            .into_iter()
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .collect::<Vec<_>>()
            .join(sep)
    }

    /// Serialized markup of this element and its subtree.
    pub fn outer_html(&self) -> String {
        serialize::serialize(self.doc, self.id)
    }
}
