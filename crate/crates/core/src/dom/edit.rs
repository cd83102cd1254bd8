//! Mutable scratch tree used to build and transform documents.

use std::collections::HashMap;

use super::{DomDocument, DomError, ElementData, Node, NodeId, NodeKind, BID_ATTR};

/// Per-node outcome for [`rebuild`].
pub(crate) enum Fate {
    Keep(NodeKind),
    /// Remove the node together with its subtree.
    Drop,
    /// Remove the node, splicing its surviving children into its place.
    Unwrap,
}

/// Builds a new document by walking `doc` in document order and asking
/// `decide` what happens to each node whose ancestors were not dropped.
pub(crate) fn rebuild<F>(doc: &DomDocument, mut decide: F) -> Result<DomDocument, DomError>
where
    F: FnMut(NodeId, &NodeKind) -> Fate,
{
    let mut ed = DomEditor::new();
    let mut anchor: Vec<Option<NodeId>> = vec![None; doc.nodes.len()];
    anchor[DomDocument::ROOT] = Some(DomDocument::ROOT);
    for id in 1..doc.nodes.len() {
        let parent = doc.nodes[id].parent.expect("non-root node has a parent");
        let Some(target) = anchor[parent] else {
            continue;
        };
        anchor[id] = match decide(id, &doc.nodes[id].kind) {
            Fate::Keep(kind) => Some(ed.append(target, kind)),
            Fate::Drop => None,
            Fate::Unwrap => Some(target),
        };
    }
    ed.finish()
}

pub(crate) struct DomEditor {
    nodes: Vec<Node>,
}

impl DomEditor {
    pub fn new() -> Self {
        DomEditor {
            nodes: vec![Node {
                kind: NodeKind::Document,
                parent: None,
                children: Vec::new(),
            }],
        }
    }

    pub fn from_doc(doc: &DomDocument) -> Self {
        DomEditor {
            nodes: doc.nodes.clone(),
        }
    }

    pub fn kind(&self, id: NodeId) -> &NodeKind {
        &self.nodes[id].kind
    }

    pub fn kind_mut(&mut self, id: NodeId) -> &mut NodeKind {
        &mut self.nodes[id].kind
    }

    pub fn element_mut(&mut self, id: NodeId) -> Option<&mut ElementData> {
        match &mut self.nodes[id].kind {
            NodeKind::Element(e) => Some(e),
            _ => None,
        }
    }

    pub fn element(&self, id: NodeId) -> Option<&ElementData> {
        match &self.nodes[id].kind {
            NodeKind::Element(e) => Some(e),
            _ => None,
        }
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.nodes[id].children
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id].parent
    }

    pub fn append(&mut self, parent: NodeId, kind: NodeKind) -> NodeId {
        let id = self.nodes.len();
        self.nodes.push(Node {
            kind,
            parent: Some(parent),
            children: Vec::new(),
        });
        self.nodes[parent].children.push(id);
        id
    }

    /// Removes a node (and its subtree) from its parent.
    pub fn detach(&mut self, id: NodeId) {
        if let Some(p) = self.nodes[id].parent.take() {
            self.nodes[p].children.retain(|&c| c != id);
        }
    }

    /// Reachable nodes below `id` in document order.
    pub fn walk(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack: Vec<NodeId> = self.nodes[id].children.iter().rev().copied().collect();
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(self.nodes[n].children.iter().rev().copied());
        }
        out
    }

    /// Text-node contents below `id` in document order.
    pub fn strings(&self, id: NodeId) -> Vec<&str> {
        self.walk(id)
            .into_iter()
            .filter_map(|n| match &self.nodes[n].kind {
                NodeKind::Text(t) => Some(t.as_str()),
                _ => None,
            })
            .collect()
    }

    pub fn set_children(&mut self, id: NodeId, kids: Vec<NodeId>) {
        for &k in &kids {
            self.nodes[k].parent = Some(id);
        }
        self.nodes[id].children = kids;
    }

    /// Compacts reachable nodes into a canonical document: pre-order ids,
    /// adjacent text nodes merged, empty text nodes dropped.
    pub fn finish(self) -> Result<DomDocument, DomError> {
        enum Item {
            Old(NodeId, Option<NodeId>),
            Text(String, NodeId),
        }

        let mut out: Vec<Node> = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![Item::Old(0, None)];
        while let Some(item) = stack.pop() {
            let (kind, parent, old) = match item {
                Item::Old(id, p) => (self.nodes[id].kind.clone(), p, Some(id)),
                Item::Text(t, p) => (NodeKind::Text(t), Some(p), None),
            };
            let new_id = out.len();
            out.push(Node {
                kind,
                parent,
                children: Vec::new(),
            });
            if let Some(p) = parent {
                out[p].children.push(new_id);
            }
            let Some(old) = old else { continue };

            let mut merged: Vec<Item> = Vec::new();
            for &c in &self.nodes[old].children {
                match &self.nodes[c].kind {
                    NodeKind::Text(t) if t.is_empty() => {}
                    NodeKind::Text(t) => match merged.last_mut() {
                        Some(Item::Text(prev, _)) => prev.push_str(t),
                        _ => merged.push(Item::Text(t.clone(), new_id)),
                    },
                    _ => merged.push(Item::Old(c, Some(new_id))),
                }
            }
            stack.extend(merged.into_iter().rev());
        }

        let mut subtree_end = vec![0; out.len()];
        for id in (0..out.len()).rev() {
            subtree_end[id] = match out[id].children.last() {
                Some(&last) => subtree_end[last],
                None => id + 1,
            };
        }

        let mut bid_index = HashMap::new();
        let mut bid_order = Vec::new();
        for (id, node) in out.iter().enumerate() {
            if let NodeKind::Element(e) = &node.kind {
                if let Some(bid) = e.attr(BID_ATTR) {
                    if bid_index.insert(bid.to_string(), id).is_some() {
                        return Err(DomError::DuplicateBid(bid.to_string()));
                    }
                    bid_order.push(id);
                }
            }
        }

        Ok(DomDocument {
            nodes: out,
            bid_index,
            bid_order,
            subtree_end,
        })
    }
}
