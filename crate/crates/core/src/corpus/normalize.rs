const ARTICLES: [&str; 3] = ["a", "an", "the"];

/// Lowercases, trims, collapses internal whitespace and strips leading
/// articles (`a`, `an`, `the`). May return an empty string.
pub fn normalize_answer(text: &str) -> String {
    let lower = text.to_lowercase();
    let mut tokens = lower.split_whitespace().peekable();
    while tokens.next_if(|t| ARTICLES.contains(t)).is_some() {}
    tokens.collect::<Vec<_>>().join(" ")
}

/// Replaces every non-alphanumeric, non-whitespace character with a space.
pub fn strip_punctuation(text: &str) -> String {
    text.chars()
        .map(|c| {
            if c.is_alphanumeric() || c.is_whitespace() {
                c
            } else {
                ' '
            }
        })
        .collect()
}

/// Normalization used for matching answers against fixed vocabularies
/// such as `{yes, no}`: punctuation is removed before [`normalize_answer`].
pub fn normalize_for_match(text: &str) -> String {
    normalize_answer(&strip_punctuation(text))
}
