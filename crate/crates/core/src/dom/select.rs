//! A small subset of CSS selectors for rule configs: comma-separated
//! compound selectors built from a tag name (or `*`), `.class`, `#id` and
//! attribute tests `[a]`, `[a=v]`, `[a~=v]`, `[a^=v]`, `[a$=v]`, `[a*=v]`.
//! Combinators are not supported.

use std::fmt;
use std::str::FromStr;

use super::DomElement;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selector {
    alternatives: Vec<Compound>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
struct Compound {
    tag: Option<String>,
    tests: Vec<AttrTest>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct AttrTest {
    name: String,
    op: Op,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Op {
    Exists,
    Equals(String),
    Word(String),
    Prefix(String),
    Suffix(String),
    Contains(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectorError(pub String);

impl fmt::Display for SelectorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for SelectorError {}

impl Selector {
    pub fn matches(&self, el: &DomElement<'_>) -> bool {
        self.alternatives.iter().any(|c| c.matches(el))
    }

    pub fn any() -> Self {
        Selector {
            alternatives: vec![Compound::default()],
        }
    }
}

impl Compound {
    fn matches(&self, el: &DomElement<'_>) -> bool {
        if let Some(tag) = &self.tag {
            if el.tag() != tag {
                return false;
            }
        }
        self.tests.iter().all(|t| {
            let Some(v) = el.attr(&t.name) else {
                return false;
            };
            match &t.op {
                Op::Exists => true,
                Op::Equals(x) => v == x,
                Op::Word(x) => v.split_ascii_whitespace().any(|w| w == x),
                Op::Prefix(x) => v.starts_with(x.as_str()),
                Op::Suffix(x) => v.ends_with(x.as_str()),
                Op::Contains(x) => v.contains(x.as_str()),
            }
        })
    }
}

impl FromStr for Selector {
    type Err = SelectorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let alternatives = s
            .split(',')
            .map(|part| parse_compound(part.trim()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Selector { alternatives })
    }
}

fn is_ident(c: char) -> bool {
    c.is_alphanumeric() || c == '-' || c == '_' || c == ':'
}

fn parse_compound(s: &str) -> Result<Compound, SelectorError> {
    if s.is_empty() {
        return Err(SelectorError("empty selector".into()));
    }
    let mut out = Compound::default();
    let mut rest = s;
    if let Some(r) = rest.strip_prefix('*') {
        rest = r;
    } else {
        let n = rest.find(|c: char| !is_ident(c)).unwrap_or(rest.len());
        if n > 0 {
            out.tag = Some(rest[..n].to_ascii_lowercase());
            rest = &rest[n..];
        }
    }
    while !rest.is_empty() {
        let mut chars = rest.chars();
        let lead = chars.next().expect("non-empty");
        match lead {
            '.' | '#' => {
                let body = &rest[1..];
                let n = body.find(|c: char| !is_ident(c)).unwrap_or(body.len());
                if n == 0 {
                    return Err(SelectorError(format!("missing name after `{lead}` in `{s}`")));
                }
                let value = body[..n].to_string();
                out.tests.push(if lead == '.' {
                    AttrTest {
                        name: "class".into(),
                        op: Op::Word(value),
                    }
                } else {
                    AttrTest {
                        name: "id".into(),
                        op: Op::Equals(value),
                    }
                });
                rest = &body[n..];
            }
            '[' => {
                let close = rest
                    .find(']')
                    .ok_or_else(|| SelectorError(format!("unclosed `[` in `{s}`")))?;
                out.tests.push(parse_attr_test(&rest[1..close], s)?);
                rest = &rest[close + 1..];
            }
            c => {
                return Err(SelectorError(format!("unsupported `{c}` in selector `{s}`")));
            }
        }
    }
    Ok(out)
}

fn parse_attr_test(body: &str, whole: &str) -> Result<AttrTest, SelectorError> {
    let Some(eq) = body.find('=') else {
        let name = body.trim();
        if name.is_empty() {
            return Err(SelectorError(format!("empty attribute test in `{whole}`")));
        }
        return Ok(AttrTest {
            name: name.to_ascii_lowercase(),
            op: Op::Exists,
        });
    };
    let (lhs, value) = (&body[..eq], body[eq + 1..].trim());
    let value = value
        .strip_prefix('"')
        .and_then(|v| v.strip_suffix('"'))
        .or_else(|| value.strip_prefix('\'').and_then(|v| v.strip_suffix('\'')))
        .unwrap_or(value)
        .to_string();
    let (name, op) = match lhs.chars().last() {
        Some('~') => (&lhs[..lhs.len() - 1], Op::Word(value)),
        Some('^') => (&lhs[..lhs.len() - 1], Op::Prefix(value)),
        Some('$') => (&lhs[..lhs.len() - 1], Op::Suffix(value)),
        Some('*') => (&lhs[..lhs.len() - 1], Op::Contains(value)),
        _ => (lhs, Op::Equals(value)),
    };
    let name = name.trim();
    if name.is_empty() {
        return Err(SelectorError(format!("empty attribute name in `{whole}`")));
    }
    Ok(AttrTest {
        name: name.to_ascii_lowercase(),
        op,
    })
}
