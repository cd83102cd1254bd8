//! Lenient HTML parser.
//!
//! No implied elements are inserted and no implicit end tags are generated:
//! the tree mirrors the markup as written. An end tag closes the nearest open
//! element with the same name; stray end tags are dropped; anything still
//! open at end of input is closed. Tag and attribute names are lowercased.

use super::edit::DomEditor;
use super::{is_raw_text, is_void, DomDocument, DomError, ElementData, NodeId, NodeKind};

pub fn parse_html(text: &str) -> Result<DomDocument, DomError> {
    let mut p = Parser {
        src: text,
        pos: 0,
        ed: DomEditor::new(),
        stack: vec![DomDocument::ROOT],
        saw_element: false,
    };
    p.run();
    if !p.saw_element {
        return Err(DomError::UnparseableInput);
    }
    p.ed.finish()
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    ed: DomEditor,
    stack: Vec<NodeId>,
    saw_element: bool,
}

impl<'a> Parser<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn current(&self) -> NodeId {
        *self.stack.last().expect("document root is never popped")
    }

    fn push_text(&mut self, raw: &str, decode: bool) {
        if raw.is_empty() {
            return;
        }
        let text = if decode { decode_entities(raw) } else { raw.to_string() };
        let parent = self.current();
        self.ed.append(parent, NodeKind::Text(text));
    }

    fn run(&mut self) {
        while self.pos < self.src.len() {
            let rest = self.rest();
            let Some(lt) = rest.find('<') else {
                self.push_text(rest, true);
                self.pos = self.src.len();
                break;
            };
            if lt > 0 {
                self.push_text(&rest[..lt], true);
                self.pos += lt;
            }
            if !self.markup() {
                // a lone '<' that starts nothing is literal text
                self.push_text("<", false);
                self.pos += 1;
            }
        }
    }

    /// Consumes one markup construct at `self.pos` (which is at `<`).
    /// Returns false when the `<` does not begin any construct.
    fn markup(&mut self) -> bool {
        let rest = self.rest();
        let bytes = rest.as_bytes();
        if let Some(body) = rest.strip_prefix("<!--") {
            let (content, consumed) = match body.find("-->") {
                Some(end) => (&body[..end], 4 + end + 3),
                None => (body, rest.len()),
            };
            let parent = self.current();
            self.ed.append(parent, NodeKind::Comment(content.to_string()));
            self.pos += consumed;
            return true;
        }
        if rest.starts_with("<!") || rest.starts_with("<?") {
            let (content, consumed) = match rest.find('>') {
                Some(end) => (&rest[2..end], end + 1),
                None => (&rest[2..], rest.len()),
            };
            let parent = self.current();
            if rest.starts_with("<!") && starts_with_ci(content, "doctype") {
                let name = content[7..].trim().to_string();
                self.ed.append(parent, NodeKind::Doctype(name));
            } else if let Some(cdata) = content
                .strip_prefix("[CDATA[")
                .map(|c| c.strip_suffix("]]").unwrap_or(c))
            {
                self.push_text(cdata, false);
            } else {
                let body = if rest.starts_with("<?") {
                    format!("?{content}")
                } else {
                    content.to_string()
                };
                self.ed.append(parent, NodeKind::Comment(body));
            }
            self.pos += consumed;
            return true;
        }
        if bytes.len() >= 3 && bytes[1] == b'/' && bytes[2].is_ascii_alphabetic() {
            let name_len = rest[2..]
                .find(|c: char| c.is_ascii_whitespace() || c == '>' || c == '/')
                .unwrap_or(rest.len() - 2);
            let name = rest[2..2 + name_len].to_ascii_lowercase();
            let consumed = rest.find('>').map(|i| i + 1).unwrap_or(rest.len());
            self.close(&name);
            self.pos += consumed;
            return true;
        }
        if bytes.len() >= 2 && bytes[1].is_ascii_alphabetic() {
            return self.start_tag();
        }
        false
    }

    fn close(&mut self, name: &str) {
        let found = self
            .stack
            .iter()
            .rposition(|&id| matches!(self.ed.kind(id), NodeKind::Element(e) if e.tag == name));
        if let Some(idx) = found {
            if idx > 0 {
                self.stack.truncate(idx);
            }
        }
    }

    fn start_tag(&mut self) -> bool {
        let rest = self.rest();
        let Some(tag) = lex_start_tag(rest) else {
            // unterminated tag: the remainder is text
            return false;
        };
        self.saw_element = true;
        let parent = self.current();
        let name = tag.name.clone();
        let id = self.ed.append(
            parent,
            NodeKind::Element(ElementData {
                tag: tag.name,
                attrs: tag.attrs,
            }),
        );
        self.pos += tag.consumed;
        if is_void(&name) || tag.self_closing {
            return true;
        }
        if is_raw_text(&name) {
            let body = self.rest();
            let end = find_ci(body, &format!("</{name}")).unwrap_or(body.len());
            if end > 0 {
                self.ed.append(id, NodeKind::Text(body[..end].to_string()));
            }
            self.pos += end;
            let after = self.rest();
            if !after.is_empty() {
                let consumed = after.find('>').map(|i| i + 1).unwrap_or(after.len());
                self.pos += consumed;
            }
            return true;
        }
        self.stack.push(id);
        true
    }
}

struct StartTag {
    name: String,
    attrs: Vec<(String, String)>,
    self_closing: bool,
    consumed: usize,
}

/// Lexes `<name attr=value ...>` at the start of `s`. Returns None when the
/// tag is never closed by `>`.
fn lex_start_tag(s: &str) -> Option<StartTag> {
    let b = s.as_bytes();
    let mut i = 1;
    while i < b.len() && !b[i].is_ascii_whitespace() && b[i] != b'>' && b[i] != b'/' {
        i += 1;
    }
    let name = s[1..i].to_ascii_lowercase();
    let mut attrs: Vec<(String, String)> = Vec::new();
    let mut self_closing = false;
    loop {
        while i < b.len() && b[i].is_ascii_whitespace() {
            i += 1;
        }
        if i >= b.len() {
            return None;
        }
        match b[i] {
            b'>' => {
                i += 1;
                break;
            }
            b'/' => {
                i += 1;
                if i < b.len() && b[i] == b'>' {
                    self_closing = true;
                    i += 1;
                    break;
                }
                continue;
            }
            _ => {}
        }
        let start = i;
        // attribute names may begin with '=' per HTML tokenization
        i += 1;
        while i < b.len() && !b[i].is_ascii_whitespace() && b[i] != b'=' && b[i] != b'>' && b[i] != b'/' {
            i += 1;
        }
        let key = s[start..i].to_ascii_lowercase();
        let mut j = i;
        while j < b.len() && b[j].is_ascii_whitespace() {
            j += 1;
        }
        let mut value = String::new();
        if j < b.len() && b[j] == b'=' {
            j += 1;
            while j < b.len() && b[j].is_ascii_whitespace() {
                j += 1;
            }
            if j >= b.len() {
                return None;
            }
            if b[j] == b'"' || b[j] == b'\'' {
                let q = b[j] as char;
                let close = s[j + 1..].find(q)?;
                value = decode_entities(&s[j + 1..j + 1 + close]);
                i = j + 1 + close + 1;
            } else {
                let vstart = j;
                while j < b.len() && !b[j].is_ascii_whitespace() && b[j] != b'>' {
                    j += 1;
                }
                value = decode_entities(&s[vstart..j]);
                i = j;
            }
        }
        if !attrs.iter().any(|(k, _)| *k == key) {
            attrs.push((key, value));
        }
    }
    Some(StartTag {
        name,
        attrs,
        self_closing,
        consumed: i,
    })
}

fn starts_with_ci(s: &str, prefix: &str) -> bool {
    s.len() >= prefix.len() && s.as_bytes()[..prefix.len()].eq_ignore_ascii_case(prefix.as_bytes())
}

fn find_ci(hay: &str, needle: &str) -> Option<usize> {
    let h = hay.as_bytes();
    let n = needle.as_bytes();
    if n.len() > h.len() {
        return None;
    }
    (0..=h.len() - n.len()).find(|&i| h[i..i + n.len()].eq_ignore_ascii_case(n))
}

/// Decodes the common named character references and numeric references.
/// Unknown or unterminated references are kept literally.
pub(crate) fn decode_entities(s: &str) -> String {
    if !s.contains('&') {
        return s.to_string();
    }
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(amp) = rest.find('&') {
        out.push_str(&rest[..amp]);
        rest = &rest[amp..];
        let semi = rest[1..].find(';').map(|i| i + 1).filter(|&i| i <= 32);
        let decoded = semi.and_then(|semi| decode_one(&rest[1..semi]).map(|c| (c, semi)));
        match decoded {
            Some((c, semi)) => {
                out.push(c);
                rest = &rest[semi + 1..];
            }
            None => {
                out.push('&');
                rest = &rest[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

fn decode_one(name: &str) -> Option<char> {
    if let Some(num) = name.strip_prefix('#') {
        let code = if let Some(hex) = num.strip_prefix(['x', 'X']) {
            u32::from_str_radix(hex, 16).ok()?
        } else {
            num.parse::<u32>().ok()?
        };
        return Some(match code {
            0 => '\u{FFFD}',
            c => char::from_u32(c).unwrap_or('\u{FFFD}'),
        });
    }
    Some(match name {
        "amp" => '&',
        "lt" => '<',
        "gt" => '>',
        "quot" => '"',
        "apos" => '\'',
        "nbsp" => '\u{a0}',
        "copy" => '©',
        "reg" => '®',
        "trade" => '™',
        "hellip" => '…',
        "mdash" => '—',
        "ndash" => '–',
        "laquo" => '«',
        "raquo" => '»',
        "times" => '×',
        _ => return None,
    })
}
