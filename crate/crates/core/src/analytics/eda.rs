//! Exploratory statistics: document totals, monthly volume and term frequencies.

use std::collections::{BTreeMap, HashMap};

use super::email::month_key;
use super::mask::MaskedDocument;
use super::result::{EdaPayload, MonthCount, TermCount};
use super::tokenize::terms;

/// Term counts sorted by (count desc, term asc).
pub fn ranked_term_counts<'a, I: IntoIterator<Item = &'a MaskedDocument>>(docs: I) -> Vec<TermCount> {
    let mut counts: HashMap<String, u64> = HashMap::new();
    for doc in docs {
        for t in terms(&doc.masked_body) {
            *counts.entry(t).or_default() += 1;
        }
    }
    let mut ranked: Vec<TermCount> = counts.into_iter().map(|(term, count)| TermCount { term, count }).collect();
    ranked.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.term.cmp(&b.term)));
    ranked
}

pub fn eda(corpus: &[MaskedDocument], max_terms: usize) -> EdaPayload {
    let mut histogram: BTreeMap<String, u64> = BTreeMap::new();
    for doc in corpus {
        if let Some(month) = doc.date.and_then(month_key) {
            *histogram.entry(month).or_default() += 1;
        }
    }
    let mut top_terms = ranked_term_counts(corpus);
    top_terms.truncate(max_terms);
    EdaPayload {
        total_docs: corpus.len() as u64,
        date_histogram: histogram.into_iter().map(|(month, count)| MonthCount { month, count }).collect(),
        top_terms,
    }
}
