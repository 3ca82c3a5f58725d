//! The pinned tokenizer shared by every text statistic.
//!
//! Text is stripped of masking placeholders, lowercased and split on
//! non-alphanumeric characters. Terms shorter than two characters and the
//! 127 stopwords below are dropped.

use std::collections::HashSet;
use std::sync::OnceLock;

use super::mask::PLACEHOLDERS;

pub const STOPWORDS: [&str; 127] = [
    "i",
    "me",
    "my",
    "myself",
    "we",
    "our",
    "ours",
    "ourselves",
    "you",
    "your",
    "yours",
    "yourself",
    "yourselves",
    "he",
    "him",
    "his",
    "himself",
    "she",
    "her",
    "hers",
    "herself",
    "it",
    "its",
    "itself",
    "they",
    "them",
    "their",
    "theirs",
    "themselves",
    "what",
    "which",
    "who",
    "whom",
    "this",
    "that",
    "these",
    "those",
    "am",
    "is",
    "are",
    "was",
    "were",
    "be",
    "been",
    "being",
    "have",
    "has",
    "had",
    "having",
    "do",
    "does",
    "did",
    "doing",
    "a",
    "an",
    "the",
    "and",
    "but",
    "if",
    "or",
    "because",
    "as",
    "until",
    "while",
    "of",
    "at",
    "by",
    "for",
    "with",
    "about",
    "against",
    "between",
    "into",
    "through",
    "during",
    "before",
    "after",
    "above",
    "below",
    "to",
    "from",
    "up",
    "down",
    "in",
    "out",
    "on",
    "off",
    "over",
    "under",
    "again",
    "further",
    "then",
    "once",
    "here",
    "there",
    "when",
    "where",
    "why",
    "how",
    "all",
    "any",
    "both",
    "each",
    "few",
    "more",
    "most",
    "other",
    "some",
    "such",
    "no",
    "nor",
    "not",
    "only",
    "own",
    "same",
    "so",
    "than",
    "too",
    "very",
    "s",
    "t",
    "can",
    "will",
    "just",
    "don",
    "should",
    "now",
];

fn stopwords() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| STOPWORDS.iter().copied().collect())
}

pub fn is_stopword(term: &str) -> bool {
    stopwords().contains(term)
}

fn without_placeholders(text: &str) -> String {
    let mut out = text.to_string();
    for p in PLACEHOLDERS {
        if out.contains(p) {
            out = out.replace(p, " ");
        }
    }
    out
}

/// Lowercased alphanumeric words, placeholders removed, nothing else filtered.
pub fn words(text: &str) -> Vec<String> {
    without_placeholders(text)
        .to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_string)
        .collect()
}

/// Analysis terms: [`words`] minus short tokens and stopwords.
pub fn terms(text: &str) -> Vec<String> {
    words(text).into_iter().filter(|w| w.chars().count() >= 2 && !is_stopword(w)).collect()
}
