//! Aggregate-only output policy.
//!
//! Small buckets are dropped and counted, term lists are truncated, and the
//! canonical result is scanned for PII patterns. A match aborts the job
//! instead of being redacted: a silent redaction could still leak through
//! counts.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytics::mask::{PiiCategory, PiiPatterns};
use crate::analytics::result::{AggregateResult, Payload};
use crate::canonical::canonical_string;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputPolicy {
    /// Buckets backed by fewer documents than this are suppressed.
    pub k_min: u64,
    pub max_terms_per_list: usize,
}

impl Default for OutputPolicy {
    fn default() -> Self {
        OutputPolicy { k_min: 5, max_terms_per_list: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolicyViolation {
    #[error("result matched the {0:?} pattern")]
    PiiPattern(PiiCategory),
    #[error("a term list entry is not a single token")]
    MultiTokenTerm,
}

fn retain_counted<T>(items: &mut Vec<T>, k_min: u64, count: impl Fn(&T) -> u64) -> u64 {
    let before = items.len();
    items.retain(|x| count(x) >= k_min);
    (before - items.len()) as u64
}

pub fn enforce_output_policy(
    mut result: AggregateResult,
    policy: &OutputPolicy,
) -> Result<AggregateResult, PolicyViolation> {
    let k = policy.k_min;
    let max = policy.max_terms_per_list;
    let suppressed = match &mut result.payload {
        Payload::Eda(p) => {
            p.top_terms.truncate(max);
            retain_counted(&mut p.date_histogram, k, |m| m.count)
        }
        Payload::Clustering(p) => {
            let mut dropped = 0;
            let mut sizes = Vec::with_capacity(p.cluster_sizes.len());
            let mut kept = Vec::with_capacity(p.clusters.len());
            for (size, mut cluster) in p.cluster_sizes.drain(..).zip(p.clusters.drain(..)) {
                if size < k {
                    dropped += 1;
                    continue;
                }
                cluster.top_terms.truncate(max);
                sizes.push(size);
                kept.push(cluster);
            }
            p.cluster_sizes = sizes;
            p.clusters = kept;
            dropped
        }
        Payload::Topics(p) => {
            for t in &mut p.topics {
                t.top_terms.truncate(max);
            }
            0
        }
        Payload::Sentiment(p) => retain_counted(&mut p.months, k, |m| m.doc_count),
        Payload::CommGraph(p) => {
            let dropped = retain_counted(&mut p.edges, k, |e| e.count);
            p.nodes.retain(|n| p.edges.iter().any(|e| &e.source == n || &e.target == n));
            dropped
        }
    };
    result.suppressed_buckets += suppressed;

    // PII first, so a leaked value is reported as such even when it is also
    // malformed as a term.
    if let Some(category) = PiiPatterns::shared().find_any(&canonical_string(&result)) {
        return Err(PolicyViolation::PiiPattern(category));
    }
    if result.terms().iter().any(|t| t.is_empty() || t.chars().any(|c| !c.is_alphanumeric())) {
        return Err(PolicyViolation::MultiTokenTerm);
    }
    Ok(result)
}
