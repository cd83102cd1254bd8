use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// What part of an element an ablation unit refers to.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AttrKey {
    /// A named attribute (lowercase).
    Named(String),
    /// The tag type itself, written `@tag`.
    Tag,
    /// The element's direct text, written `@text`.
    Text,
}

impl AttrKey {
    pub fn named(name: &str) -> Self {
        AttrKey::Named(name.to_ascii_lowercase())
    }

    pub fn as_str(&self) -> &str {
        match self {
            AttrKey::Named(n) => n,
            AttrKey::Tag => "@tag",
            AttrKey::Text => "@text",
        }
    }
}

impl fmt::Display for AttrKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AttrKey {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "" => Err("empty attribute key".into()),
            "@tag" => Ok(AttrKey::Tag),
            "@text" => Ok(AttrKey::Text),
            other if other.starts_with('@') => Err(format!("unknown special key `{other}`")),
            other => Ok(AttrKey::named(other)),
        }
    }
}

impl Serialize for AttrKey {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for AttrKey {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// An `(bid, attr)` ablation unit.
///
/// Ordering is lexical on `(bid, attr)` using the textual form of the key,
/// so `@tag` and `@text` sort before any named attribute of the same bid.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ElementRef {
    pub bid: String,
    pub attr: AttrKey,
}

impl ElementRef {
    pub fn new(bid: impl Into<String>, attr: AttrKey) -> Self {
        ElementRef { bid: bid.into(), attr }
    }

    pub fn named(bid: impl Into<String>, attr: &str) -> Self {
        Self::new(bid, AttrKey::named(attr))
    }

    pub fn tag(bid: impl Into<String>) -> Self {
        Self::new(bid, AttrKey::Tag)
    }

    pub fn text(bid: impl Into<String>) -> Self {
        Self::new(bid, AttrKey::Text)
    }
}

impl Ord for ElementRef {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bid
            .cmp(&other.bid)
            .then_with(|| self.attr.as_str().cmp(other.attr.as_str()))
    }
}

impl PartialOrd for ElementRef {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ElementRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.bid, self.attr)
    }
}

/// Parses `bid:attr`, splitting on the last `:`.
impl FromStr for ElementRef {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (bid, attr) = s
            .rsplit_once(':')
            .ok_or_else(|| format!("expected `bid:attr`, got `{s}`"))?;
        if bid.is_empty() {
            return Err(format!("empty bid in `{s}`"));
        }
        Ok(ElementRef::new(bid, attr.parse()?))
    }
}

pub type RefSet = BTreeSet<ElementRef>;
