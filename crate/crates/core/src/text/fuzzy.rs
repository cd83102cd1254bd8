/// Normalized Levenshtein similarity: `1 - lev(a, b) / max(len)` over chars.
/// Two empty strings score 1.
pub fn ratio(a: &str, b: &str) -> f64 {
    let la = a.chars().count();
    let lb = b.chars().count();
    let longest = la.max(lb);
    if longest == 0 {
        return 1.0;
    }
    1.0 - strsim::levenshtein(a, b) as f64 / longest as f64
}

/// Best [`ratio`] of the shorter string against every same-length window of
/// the longer one. An empty side scores 0 unless both are empty.
pub fn partial_ratio(a: &str, b: &str) -> f64 {
    let (short, long) = if a.chars().count() <= b.chars().count() {
        (a, b)
    } else {
        (b, a)
    };
    let sl: Vec<char> = short.chars().collect();
    let ll: Vec<char> = long.chars().collect();
    if sl.is_empty() {
        return if ll.is_empty() { 1.0 } else { 0.0 };
    }
    let mut best: f64 = 0.0;
    for start in 0..=ll.len() - sl.len() {
        let window: String = ll[start..start + sl.len()].iter().collect();
        best = best.max(ratio(short, &window));
        if best >= 1.0 {
            break;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_values() {
        assert_eq!(ratio("", ""), 1.0);
        assert_eq!(ratio("abc", "abc"), 1.0);
        assert!((ratio("kitten", "sitting") - (1.0 - 3.0 / 7.0)).abs() < 1e-12);
        assert_eq!(ratio("abc", ""), 0.0);
    }

    #[test]
    fn partial_finds_substring() {
        assert_eq!(partial_ratio("log", "login button"), 1.0);
        assert_eq!(partial_ratio("login button", "log"), 1.0);
        assert!((partial_ratio("lgn", "login") - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(partial_ratio("", "x"), 0.0);
    }
}
