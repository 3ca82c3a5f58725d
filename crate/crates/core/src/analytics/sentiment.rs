//! Lexicon sentiment over time.
//!
//! A document scores `(pos − neg) / (pos + neg)` over its lexicon hits and 0
//! with no hits. Months average their dated documents; undated documents
//! only count toward the overall mean.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use super::email::month_key;
use super::mask::MaskedDocument;
use super::result::{MonthlySentiment, SentimentPayload};
use super::tokenize::words;
use super::{parse_word_list, AnalyticsError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentimentLexicon {
    positive: BTreeSet<String>,
    negative: BTreeSet<String>,
}

impl SentimentLexicon {
    pub fn new<I, J, S, T>(positive: I, negative: J) -> Result<Self, AnalyticsError>
    where
        I: IntoIterator<Item = S>,
        J: IntoIterator<Item = T>,
        S: AsRef<str>,
        T: AsRef<str>,
    {
        let positive: BTreeSet<String> = positive.into_iter().map(|s| s.as_ref().to_lowercase()).collect();
        let negative: BTreeSet<String> = negative.into_iter().map(|s| s.as_ref().to_lowercase()).collect();
        if let Some(both) = positive.intersection(&negative).next() {
            return Err(AnalyticsError::LexiconOverlap(both.clone()));
        }
        Ok(SentimentLexicon { positive, negative })
    }

    /// Build from two word-list files' contents.
    pub fn from_word_lists(positive: &str, negative: &str) -> Result<Self, AnalyticsError> {
        Self::new(parse_word_list(positive), parse_word_list(negative))
    }

    pub fn builtin() -> &'static SentimentLexicon {
        static LEXICON: OnceLock<SentimentLexicon> = OnceLock::new();
        LEXICON.get_or_init(|| {
            SentimentLexicon::from_word_lists(
                include_str!("../../data/positive_words.txt"),
                include_str!("../../data/negative_words.txt"),
            )
            .expect("bundled lexicons are disjoint")
        })
    }

    pub fn score(&self, text: &str) -> f64 {
        let (mut pos, mut neg) = (0u64, 0u64);
        for w in words(text) {
            if self.positive.contains(&w) {
                pos += 1;
            } else if self.negative.contains(&w) {
                neg += 1;
            }
        }
        if pos + neg == 0 {
            0.0
        } else {
            (pos as f64 - neg as f64) / (pos + neg) as f64
        }
    }
}

pub fn sentiment(corpus: &[MaskedDocument], lexicon: &SentimentLexicon) -> SentimentPayload {
    let mut months: BTreeMap<String, (f64, u64)> = BTreeMap::new();
    let mut total = 0.0;
    for doc in corpus {
        let s = lexicon.score(&doc.masked_body);
        total += s;
        if let Some(m) = doc.date.and_then(month_key) {
            let slot = months.entry(m).or_insert((0.0, 0));
            slot.0 += s;
            slot.1 += 1;
        }
    }
    SentimentPayload {
        total_docs: corpus.len() as u64,
        overall_mean: if corpus.is_empty() { 0.0 } else { total / corpus.len() as f64 },
        months: months
            .into_iter()
            .map(|(month, (sum, n))| MonthlySentiment { month, mean_score: sum / n as f64, doc_count: n })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::mask::MaskCounts;

    fn lex() -> SentimentLexicon {
        SentimentLexicon::new(["good", "great"], ["bad"]).unwrap()
    }

    fn doc(body: &str, date: Option<i64>) -> MaskedDocument {
        MaskedDocument {
            doc_id: body.into(),
            date,
            masked_body: body.into(),
            mask_counts: MaskCounts::default(),
            sender_pseudonym: None,
            recipient_pseudonyms: vec![],
        }
    }

    #[test]
    fn document_scores() {
        let l = lex();
        assert_eq!(l.score("nothing here"), 0.0);
        assert!((l.score("good good bad") - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(l.score("Good, GREAT!"), 1.0);
        assert_eq!(l.score("bad"), -1.0);
    }

    #[test]
    fn overlapping_lexicon_rejected() {
        assert!(matches!(
            SentimentLexicon::new(["ok"], ["ok"]),
            Err(AnalyticsError::LexiconOverlap(w)) if w == "ok"
        ));
    }

    #[test]
    fn monthly_means_skip_undated() {
        let may = 989_883_540;
        let p = sentiment(&[doc("good", Some(may)), doc("bad bad good", Some(may)), doc("bad", None)], &lex());
        assert_eq!(p.total_docs, 3);
        assert_eq!(p.months.len(), 1);
        assert_eq!(p.months[0].doc_count, 2);
        assert!((p.months[0].mean_score - (1.0 + (-1.0 / 3.0)) / 2.0).abs() < 1e-12);
        assert!((p.overall_mean - (1.0 - 1.0 / 3.0 - 1.0) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn builtin_lexicon_loads() {
        let l = SentimentLexicon::builtin();
        assert_eq!(l.score("great success"), 1.0);
        assert_eq!(l.score("terrible loss"), -1.0);
    }
}
