//! Shared tokenization rules for corpus statistics and text features.
//!
//! Tokens are whitespace-separated, lowercased, with leading and trailing
//! punctuation removed. Tokens that are pure punctuation vanish.

/// Lowercase `raw` and strip punctuation from both ends.
pub fn normalize_token(raw: &str) -> String {
    raw.trim_matches(|c: char| !c.is_alphanumeric())
        .to_lowercase()
}

/// Iterate over the normalized, nonempty tokens of `text`.
pub fn tokens(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split_whitespace()
        .map(normalize_token)
        .filter(|t| !t.is_empty())
}

/// Raw whitespace-token count (no normalization).
pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strips_edges_only() {
        assert_eq!(normalize_token("\"Don't!"), "don't");
        assert_eq!(normalize_token("(5-star)"), "5-star");
        assert_eq!(normalize_token("..."), "");
    }

    #[test]
    fn tokens_skip_punctuation() {
        let t: Vec<_> = tokens("Great stay ! Really - GREAT.").collect();
        assert_eq!(t, vec!["great", "stay", "really", "great"]);
        assert_eq!(word_count("Great stay ! Really - GREAT."), 6);
    }
}
