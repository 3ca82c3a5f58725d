//! Corpus analytics: parsing, PII masking and the aggregate algorithms.
//!
//! Everything here is pure and seeded; the runtime decides which of these a
//! job may call and what leaves the sandbox.

use std::collections::BTreeSet;

use thiserror::Error;

pub mod corpus;
pub mod eda;
pub mod email;
pub mod graph;
pub mod kmeans;
pub mod lda;
pub mod mask;
pub mod result;
pub mod rng;
pub mod sentiment;
pub mod synth;
pub mod tfidf;
pub mod tokenize;

pub use corpus::load_corpus;
pub use eda::eda;
pub use email::{parse_email, EmailDocument};
pub use graph::comm_graph;
pub use kmeans::{kmeans, KMeansConfig, KMeansFit};
pub use lda::{lda, LdaConfig, LdaFit};
pub use mask::{mask_corpus, mask_pii, MaskCounts, MaskedDocument, NameDictionary, PiiPatterns, Pseudonymizer};
pub use result::{AggregateResult, Payload, Provenance, ResultKind};
pub use rng::SplitMix64;
pub use sentiment::{sentiment, SentimentLexicon};
pub use tfidf::{tfidf, SparseRow, TfidfMatrix};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalyticsError {
    #[error("corpus has no usable terms")]
    EmptyCorpus,
    #[error("k = {k} is invalid for {n} documents")]
    BadK { k: usize, n: usize },
    #[error("topic count must be positive")]
    BadTopicCount,
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: String, reason: String },
    #[error("corpus load failed: {0}")]
    CorpusLoad(String),
    #[error("`{0}` appears in both sentiment lexicons")]
    LexiconOverlap(String),
}

/// One lowercase word per line; blank lines and `#` comments are skipped.
pub fn parse_word_list(text: &str) -> BTreeSet<String> {
    text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).map(str::to_lowercase).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn word_lists_skip_comments() {
        let set = parse_word_list("# header\n\nAlice\n  bob \nalice\n");
        assert_eq!(set.into_iter().collect::<Vec<_>>(), vec!["alice", "bob"]);
    }
}
