//! Tokenization shared by indexing, retrieval, linking and feature extraction.

/// Lowercased alphanumeric runs of `text`; everything else separates tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    raw_tokens(text).map(|(_, tok)| tok.to_lowercase()).collect()
}

/// Alphanumeric runs of `text` with their byte offsets, original case kept.
pub fn raw_tokens(text: &str) -> impl Iterator<Item = (usize, &str)> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(move |t| (t.as_ptr() as usize - text.as_ptr() as usize, t))
}

/// Drops a trailing parenthetical disambiguator: `"Blind Faith (miniseries)"` → `"Blind Faith"`.
pub fn strip_disambiguation(title: &str) -> &str {
    let trimmed = title.trim_end();
    if trimmed.ends_with(')') {
        if let Some(open) = trimmed.rfind(" (") {
            return trimmed[..open].trim_end();
        }
    }
    trimmed
}

/// Title tokens used for mention matching (disambiguator removed).
pub fn title_tokens(page_id: &str) -> Vec<String> {
    tokenize(strip_disambiguation(page_id))
}

/// True when `needle` occurs as a contiguous run inside `haystack`.
pub fn contains_subsequence(haystack: &[String], needle: &[String]) -> bool {
    !needle.is_empty() && haystack.windows(needle.len()).any(|w| w == needle)
}

pub fn bigrams(tokens: &[String]) -> Vec<(&str, &str)> {
    tokens.windows(2).map(|w| (w[0].as_str(), w[1].as_str())).collect()
}

/// Maximal runs of two or more consecutive capitalized tokens, lowercased.
/// A crude stand-in for named-entity spans.
pub fn capitalized_spans(text: &str) -> Vec<Vec<String>> {
    let mut spans = Vec::new();
    let mut current: Vec<String> = Vec::new();
    let mut last_end = 0usize;
    for (start, tok) in raw_tokens(text) {
        // a run only continues across whitespace, not across punctuation
        let contiguous = text[last_end..start].chars().all(char::is_whitespace);
        let capitalized = tok.chars().next().is_some_and(char::is_uppercase);
        if !(capitalized && contiguous) {
            flush(&mut current, &mut spans);
        }
        if capitalized {
            current.push(tok.to_lowercase());
        }
        last_end = start + tok.len();
    }
    flush(&mut current, &mut spans);
    spans
}

fn flush(current: &mut Vec<String>, spans: &mut Vec<Vec<String>>) {
    if current.len() >= 2 {
        spans.push(std::mem::take(current));
    } else {
        current.clear();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &[&str]) -> Vec<String> {
        s.iter().map(|t| t.to_string()).collect()
    }

    #[test]
    fn tokenize_lowercases_and_splits() {
        assert_eq!(tokenize("BBC, bbc!"), toks(&["bbc", "bbc"]));
        assert_eq!(tokenize("  --  "), Vec::<String>::new());
        assert_eq!(tokenize("isn't 2007"), toks(&["isn", "t", "2007"]));
    }

    #[test]
    fn raw_tokens_report_byte_offsets() {
        let t = "Ünïcode é-test";
        for (start, tok) in raw_tokens(t) {
            assert_eq!(&t[start..start + tok.len()], tok);
        }
    }

    #[test]
    fn disambiguation_suffix_is_stripped() {
        assert_eq!(strip_disambiguation("Blind Faith (miniseries)"), "Blind Faith");
        assert_eq!(strip_disambiguation("BBC"), "BBC");
        assert_eq!(strip_disambiguation("(film)"), "(film)");
    }

    #[test]
    fn subsequence_match() {
        let claim = tokenize("Stan Beeman is only in shows on BBC.");
        assert!(contains_subsequence(&claim, &title_tokens("Stan Beeman")));
        assert!(contains_subsequence(&claim, &title_tokens("BBC (broadcaster)")));
        assert!(!contains_subsequence(&claim, &title_tokens("Beeman Stan")));
        assert!(!contains_subsequence(&claim, &[]));
    }

    #[test]
    fn capitalized_spans_need_two_tokens() {
        let spans = capitalized_spans("Johnny Galecki acted in The Big Bang Theory on CBS.");
        assert_eq!(
            spans,
            vec![toks(&["johnny", "galecki"]), toks(&["the", "big", "bang", "theory"])]
        );
        assert!(capitalized_spans("Nothing here, Really").is_empty());
        assert_eq!(
            capitalized_spans("Ann Lee, Bob Ray"),
            vec![toks(&["ann", "lee"]), toks(&["bob", "ray"])]
        );
    }
}
