//! TF-IDF document-term weights.
//!
//! `tf` is the raw count, `idf = ln(N / df)`, weight = `tf × idf`, and each row
//! is scaled to unit L2 norm when its norm is positive. Columns follow the
//! sorted vocabulary.

use std::collections::{BTreeMap, BTreeSet};

use super::mask::MaskedDocument;
use super::tokenize::terms;
use super::AnalyticsError;

/// Sparse row: (column, weight) pairs sorted by column, zero weights omitted.
pub type SparseRow = Vec<(usize, f64)>;

#[derive(Debug, Clone, PartialEq)]
pub struct TfidfMatrix {
    pub vocabulary: Vec<String>,
    pub rows: Vec<SparseRow>,
}

impl TfidfMatrix {
    pub fn n_docs(&self) -> usize {
        self.rows.len()
    }

    pub fn n_terms(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn column(&self, term: &str) -> Option<usize> {
        self.vocabulary.binary_search_by(|t| t.as_str().cmp(term)).ok()
    }

    pub fn weight(&self, doc: usize, term: &str) -> f64 {
        let Some(col) = self.column(term) else { return 0.0 };
        self.rows[doc].binary_search_by_key(&col, |(c, _)| *c).map_or(0.0, |i| self.rows[doc][i].1)
    }

    pub fn dense_row(&self, doc: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.n_terms()];
        for &(c, w) in &self.rows[doc] {
            out[c] = w;
        }
        out
    }
}

/// TF-IDF over pre-tokenized documents.
pub fn tfidf_from_tokens(docs: &[Vec<String>], normalize: bool) -> Result<TfidfMatrix, AnalyticsError> {
    if docs.is_empty() {
        return Err(AnalyticsError::EmptyCorpus);
    }
    let vocabulary: Vec<String> = docs.iter().flatten().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let column = |t: &str| vocabulary.binary_search_by(|v| v.as_str().cmp(t)).expect("term is in vocabulary");

    let counts: Vec<BTreeMap<usize, u64>> = docs
        .iter()
        .map(|d| {
            let mut m = BTreeMap::new();
            for t in d {
                *m.entry(column(t)).or_insert(0) += 1;
            }
            m
        })
        .collect();

    let mut df = vec![0u64; vocabulary.len()];
    for row in &counts {
        for &c in row.keys() {
            df[c] += 1;
        }
    }
    let n = docs.len() as f64;
    let idf: Vec<f64> = df.iter().map(|&d| (n / d as f64).ln()).collect();

    let rows = counts
        .into_iter()
        .map(|row| {
            let mut weights: SparseRow =
                row.into_iter().map(|(c, tf)| (c, tf as f64 * idf[c])).filter(|&(_, w)| w > 0.0).collect();
            if normalize {
                let norm = weights.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
                if norm > 0.0 {
                    for (_, w) in &mut weights {
                        *w /= norm;
                    }
                }
            }
            weights
        })
        .collect();
    Ok(TfidfMatrix { vocabulary, rows })
}

/// Normalized TF-IDF over masked documents using the shared tokenizer.
pub fn tfidf(corpus: &[MaskedDocument]) -> Result<TfidfMatrix, AnalyticsError> {
    let tokens: Vec<Vec<String>> = corpus.iter().map(|d| terms(&d.masked_body)).collect();
    tfidf_from_tokens(&tokens, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(docs: &[&str]) -> Vec<Vec<String>> {
        docs.iter().map(|d| d.split_whitespace().map(str::to_string).collect()).collect()
    }

    #[test]
    fn hand_evaluated_weight() {
        let m = tfidf_from_tokens(&toks(&["a b", "a c"]), false).unwrap();
        assert!((m.weight(0, "b") - 2f64.ln()).abs() < 1e-12);
        assert_eq!(m.weight(0, "a"), 0.0);
        assert_eq!(m.weight(1, "a"), 0.0);
    }

    #[test]
    fn single_doc_is_all_zero() {
        let m = tfidf_from_tokens(&toks(&["x y y z"]), true).unwrap();
        assert!(m.rows[0].is_empty());
        assert_eq!(m.vocabulary, vec!["x", "y", "z"]);
    }

    #[test]
    fn rows_are_unit_or_zero() {
        let m = tfidf_from_tokens(&toks(&["a b b", "a c", "a", "a d d d e"]), true).unwrap();
        for (i, row) in m.rows.iter().enumerate() {
            let norm: f64 = row.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
            assert!(norm == 0.0 || (norm - 1.0).abs() < 1e-9, "row {i} norm {norm}");
        }
        assert!(m.rows[2].is_empty());
    }

    #[test]
    fn empty_corpus_errors() {
        assert!(matches!(tfidf_from_tokens(&[], true), Err(AnalyticsError::EmptyCorpus)));
    }
}
