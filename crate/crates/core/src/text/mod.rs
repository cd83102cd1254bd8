//! Tokenizing, stemming and fuzzy string similarity.

mod fuzzy;
mod stem;

use std::sync::OnceLock;

use regex::Regex;

pub use fuzzy::{partial_ratio, ratio};
pub use stem::stem;

fn word_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\w+").expect("static regex"))
}

/// Lowercased `\w+` runs, duplicates kept.
pub fn tokenize(s: &str) -> Vec<String> {
    word_re().find_iter(s).map(|m| m.as_str().to_lowercase()).collect()
}

/// Collapses runs of whitespace to one space and trims.
pub fn collapse_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Truncates to at most `max` chars.
pub fn truncate_chars(s: &str, max: usize) -> &str {
    match s.char_indices().nth(max) {
        Some((i, _)) => &s[..i],
        None => s,
    }
}
