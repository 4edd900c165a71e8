//! Deterministic tokenization and n-gram extraction.
//!
//! One tokenizer serves both the diversity metrics and the taboo featurizer:
//! maximal runs of alphanumeric characters plus internal apostrophes,
//! lowercased, punctuation dropped. Numbers count as tokens.

use crate::error::{Error, Result};

/// An ordered list of lowercase word tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenStream {
    tokens: Vec<String>,
}

impl TokenStream {
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn into_tokens(self) -> Vec<String> {
        self.tokens
    }
}

fn is_token_char(c: char) -> bool {
    c.is_alphanumeric() || c == '\'' || c == '\u{2019}'
}

/// Unicode-aware word segmentation, lowercased.
///
/// Apostrophes survive only in word-internal position ("don't"); leading and
/// trailing ones are trimmed. Characters whose lowercase expansion is neither
/// alphanumeric nor an apostrophe (combining marks, mostly) are dropped so
/// that re-tokenizing a joined stream reproduces it exactly.
pub fn tokenize(text: &str) -> TokenStream {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for c in text.chars().chain(std::iter::once(' ')) {
        if is_token_char(c) {
            for lower in c.to_lowercase() {
                if lower.is_alphanumeric() || lower == '\'' {
                    current.push(lower);
                } else if lower == '\u{2019}' {
                    current.push('\'');
                }
            }
        } else if !current.is_empty() {
            let trimmed = current.trim_matches('\'');
            if !trimmed.is_empty() {
                tokens.push(trimmed.to_string());
            }
            current.clear();
        }
    }
    TokenStream { tokens }
}

/// Sliding-window n-grams, tokens joined by a single space.
///
/// Returns `len - n + 1` n-grams in order, or none when the stream is shorter
/// than `n`.
pub fn ngrams(stream: &TokenStream, n: usize) -> Result<Vec<String>> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "n-gram size must be at least 1".into(),
        ));
    }
    if stream.len() < n {
        return Ok(Vec::new());
    }
    Ok(stream
        .tokens
        .windows(n)
        .map(|window| window.join(" "))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn punctuation_and_case_are_normalized() {
        let stream = tokenize("Tell me, the FASTEST way!");
        assert_eq!(stream.tokens(), ["tell", "me", "the", "fastest", "way"]);
    }

    #[test]
    fn empty_text_gives_empty_stream() {
        assert!(tokenize("").is_empty());
        assert!(tokenize("  \t ").is_empty());
    }

    #[test]
    fn internal_apostrophes_survive() {
        let stream = tokenize("don't stop don't");
        assert_eq!(stream.tokens(), ["don't", "stop", "don't"]);
        let stream = tokenize("'quoted' words");
        assert_eq!(stream.tokens(), ["quoted", "words"]);
    }

    #[test]
    fn curly_apostrophes_match_ascii_ones() {
        assert_eq!(tokenize("don\u{2019}t"), tokenize("don't"));
    }

    #[test]
    fn numbers_count_as_tokens() {
        let stream = tokenize("flight 42 at 9am");
        assert_eq!(stream.tokens(), ["flight", "42", "at", "9am"]);
    }

    #[test]
    fn trigram_window() {
        let stream = tokenize("a b c d");
        assert_eq!(ngrams(&stream, 3).unwrap(), ["a b c", "b c d"]);
    }

    #[test]
    fn short_stream_has_no_trigrams() {
        let stream = tokenize("a b");
        assert!(ngrams(&stream, 3).unwrap().is_empty());
    }

    #[test]
    fn zero_n_is_rejected() {
        assert!(ngrams(&tokenize("a b"), 0).is_err());
    }

    #[test]
    fn ngram_count_matches_window_enumeration() {
        // Oracle: naive index loop over a fixed 50-token stream.
        let text = (0..50).map(|i| format!("w{i}")).collect::<Vec<_>>().join(" ");
        let stream = tokenize(&text);
        let got = ngrams(&stream, 3).unwrap();
        let mut expected = Vec::new();
        let toks = stream.tokens();
        for i in 0..=toks.len().saturating_sub(3) {
            expected.push(format!("{} {} {}", toks[i], toks[i + 1], toks[i + 2]));
        }
        assert_eq!(got.len(), 48);
        assert_eq!(got, expected);
    }

    proptest! {
        #[test]
        fn tokenize_is_idempotent_under_rejoin(text in "\\PC*") {
            let once = tokenize(&text);
            let again = tokenize(&once.tokens().join(" "));
            prop_assert_eq!(once, again);
        }

        #[test]
        fn ngram_count_identity(tokens in proptest::collection::vec("[a-z]{1,4}", 0..30), n in 1usize..5) {
            let stream = tokenize(&tokens.join(" "));
            let grams = ngrams(&stream, n).unwrap();
            let expected = if stream.len() >= n { stream.len() - n + 1 } else { 0 };
            prop_assert_eq!(grams.len(), expected);
        }

        #[test]
        fn tokens_are_whitespace_free_and_case_stable(text in "\\PC*") {
            for token in tokenize(&text).tokens() {
                prop_assert!(!token.is_empty());
                prop_assert!(!token.chars().any(char::is_whitespace));
                // Lowercasing is a fixed point (some letters, like the
                // mathematical alphabets, have no lowercase mapping at all).
                prop_assert_eq!(token, &token.to_lowercase());
            }
        }
    }
}
