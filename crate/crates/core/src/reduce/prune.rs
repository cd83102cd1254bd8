use serde::{Deserialize, Serialize};

use crate::dom::edit::{rebuild, Fate};
use crate::dom::{DomDocument, DomError, NodeKind};

/// Context kept around each selected element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreePruneConfig {
    /// Element descendants kept below a selected element, in levels.
    pub max_descendant_depth: usize,
    /// Element children kept per node while descending.
    pub max_children_per_node: usize,
    /// Element siblings kept on each side of a selected element.
    pub max_sibling: usize,
}

impl TreePruneConfig {
    pub const DEFAULT: TreePruneConfig = TreePruneConfig {
        max_descendant_depth: 5,
        max_children_per_node: 50,
        max_sibling: 3,
    };

    pub const AXTREE: TreePruneConfig = TreePruneConfig {
        max_descendant_depth: 1,
        max_children_per_node: 50,
        max_sibling: 0,
    };
}

impl Default for TreePruneConfig {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Keeps the selected elements plus their ancestors, bounded descendants and
/// nearby siblings; every other element is unwrapped.
///
/// Top-level elements always survive. Text and comment nodes survive only
/// when their original parent element is retained, so text belonging to an
/// unwrapped element is dropped with it.
pub fn tree_prune<I, S>(doc: &DomDocument, selected: I, cfg: TreePruneConfig) -> Result<DomDocument, DomError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let root = DomDocument::ROOT;
    let mut keep = vec![false; doc.nodes.len()];
    keep[root] = true;
    for id in doc.element_child_ids(root) {
        keep[id] = true;
    }

    for bid in selected {
        let bid = bid.as_ref();
        let id = *doc
            .bid_index
            .get(bid)
            .ok_or_else(|| DomError::UnknownBid(bid.to_string()))?;
        keep[id] = true;

        let mut up = doc.parent_of(id);
        while let Some(p) = up {
            keep[p] = true;
            up = doc.parent_of(p);
        }

        let mut frontier = vec![id];
        for _ in 0..cfg.max_descendant_depth {
            let mut next = Vec::new();
            for &f in &frontier {
                for c in doc.element_child_ids(f).take(cfg.max_children_per_node) {
                    keep[c] = true;
                    next.push(c);
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }

        if cfg.max_sibling > 0 {
            let parent = doc.parent_of(id).expect("element has a parent");
            let sibs: Vec<_> = doc.element_child_ids(parent).collect();
            let pos = sibs.iter().position(|&s| s == id).expect("child of its parent");
            let lo = pos.saturating_sub(cfg.max_sibling);
            let hi = (pos + cfg.max_sibling).min(sibs.len() - 1);
            for &s in &sibs[lo..=hi] {
                keep[s] = true;
            }
        }
    }

    rebuild(doc, |id, kind| match kind {
        NodeKind::Element(_) if keep[id] => Fate::Keep(kind.clone()),
        NodeKind::Element(_) => Fate::Unwrap,
        NodeKind::Text(_) | NodeKind::Comment(_) => {
            let parent = doc.parent_of(id).expect("non-root node has a parent");
            if keep[parent] {
                Fate::Keep(kind.clone())
            } else {
                Fate::Drop
            }
        }
        NodeKind::Doctype(_) => Fate::Keep(kind.clone()),
        NodeKind::Document => unreachable!("document node is never a child"),
    })
}
