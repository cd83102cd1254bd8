use super::edit::DomEditor;
use super::{AttrKey, DomDocument, DomError, ElementRef, NodeKind, UNK_TAG};

/// Removes every unit in `refs` from a copy of `doc`.
///
/// Named refs delete the attribute (absent attributes are a no-op), `@text`
/// deletes the element's direct text nodes, and `@tag` renames the element
/// to [`UNK_TAG`] keeping its attributes and children.
pub fn ablate<'r, I>(doc: &DomDocument, refs: I) -> Result<DomDocument, DomError>
where
    I: IntoIterator<Item = &'r ElementRef>,
{
    let refs: Vec<&ElementRef> = refs.into_iter().collect();
    let mut targets = Vec::with_capacity(refs.len());
    for r in &refs {
        let id = *doc
            .bid_index
            .get(&r.bid)
            .ok_or_else(|| DomError::UnknownBid(r.bid.clone()))?;
        targets.push((id, &r.attr));
    }
    if targets.is_empty() {
        return Ok(doc.clone());
    }

    let mut ed = DomEditor::from_doc(doc);
    let mut text_strips = Vec::new();
    for (id, attr) in targets {
        match attr {
            AttrKey::Text => text_strips.push(id),
            AttrKey::Tag => {
                if let Some(e) = ed.element_mut(id) {
                    e.tag = UNK_TAG.to_string();
                }
            }
            AttrKey::Named(name) => {
                if let Some(e) = ed.element_mut(id) {
                    e.attrs.retain(|(k, _)| k != name);
                }
            }
        }
    }
    for id in text_strips {
        let kids: Vec<_> = ed
            .children(id)
            .iter()
            .copied()
            .filter(|&c| !matches!(ed.kind(c), NodeKind::Text(_)))
            .collect();
        ed.set_children(id, kids);
    }
    ed.finish()
}

/// Whether `r` is still present in `doc`. Absent bids yield false.
pub fn contains_ref(doc: &DomDocument, r: &ElementRef) -> bool {
    let Some(el) = doc.element_by_bid(&r.bid) else {
        return false;
    };
    match &r.attr {
        AttrKey::Named(name) => el.has_attr(name),
        AttrKey::Tag => el.tag() != UNK_TAG,
        AttrKey::Text => !el.direct_text().is_empty(),
    }
}
