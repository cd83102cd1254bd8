use super::{DomDocument, DomError, ElementRef, NodeId};

/// Edge count of the tree path between two bids through their lowest common
/// ancestor. Every node on the path counts, bid-carrying or not.
pub fn hop(doc: &DomDocument, a: &str, b: &str) -> Result<usize, DomError> {
    let ia = lookup(doc, a)?;
    let ib = lookup(doc, b)?;
    Ok(hop_ids(doc, ia, ib))
}

pub(crate) fn hop_ids(doc: &DomDocument, a: NodeId, b: NodeId) -> usize {
    let (mut x, mut y) = (a, b);
    let (mut dx, mut dy) = (doc.depth_of(x), doc.depth_of(y));
    let mut edges = 0;
    while dx > dy {
        x = doc.parent_of(x).expect("depth > 0 has parent");
        dx -= 1;
        edges += 1;
    }
    while dy > dx {
        y = doc.parent_of(y).expect("depth > 0 has parent");
        dy -= 1;
        edges += 1;
    }
    while x != y {
        x = doc.parent_of(x).expect("common root");
        y = doc.parent_of(y).expect("common root");
        edges += 2;
    }
    edges
}

fn lookup(doc: &DomDocument, bid: &str) -> Result<NodeId, DomError> {
    doc.bid_index
        .get(bid)
        .copied()
        .ok_or_else(|| DomError::UnknownBid(bid.to_string()))
}

/// 0 for identical units, 1 for two keys of one element, otherwise hop + 1.
pub fn dom_distance(doc: &DomDocument, a: &ElementRef, b: &ElementRef) -> Result<usize, DomError> {
    let ia = lookup(doc, &a.bid)?;
    let ib = lookup(doc, &b.bid)?;
    Ok(if a.bid == b.bid {
        usize::from(a.attr != b.attr)
    } else {
        hop_ids(doc, ia, ib) + 1
    })
}
