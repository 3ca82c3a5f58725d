//! `AggregateResult`: the only shape a computation may hand back to a consumer.
//!
//! Every struct denies unknown fields, so a stored result that decodes is
//! known to match the whitelist.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResultKind {
    Eda,
    Clustering,
    Topics,
    Sentiment,
    CommGraph,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub algorithm: String,
    pub params: BTreeMap<String, String>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AggregateResult {
    pub generated_with: Provenance,
    pub payload: Payload,
    pub suppressed_buckets: u64,
}

impl AggregateResult {
    pub fn new(generated_with: Provenance, payload: Payload) -> Self {
        AggregateResult { generated_with, payload, suppressed_buckets: 0 }
    }

    pub fn kind(&self) -> ResultKind {
        self.payload.kind()
    }

    /// Every term in every term list, for single-token checks.
    pub fn terms(&self) -> Vec<&str> {
        match &self.payload {
            Payload::Eda(p) => p.top_terms.iter().map(|t| t.term.as_str()).collect(),
            Payload::Clustering(p) => {
                p.clusters.iter().flat_map(|c| c.top_terms.iter().map(|t| t.term.as_str())).collect()
            }
            Payload::Topics(p) => p.topics.iter().flat_map(|t| t.top_terms.iter().map(|t| t.term.as_str())).collect(),
            Payload::Sentiment(_) | Payload::CommGraph(_) => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    Eda(EdaPayload),
    Clustering(ClusteringPayload),
    Topics(TopicsPayload),
    Sentiment(SentimentPayload),
    CommGraph(CommGraphPayload),
}

impl Payload {
    pub fn kind(&self) -> ResultKind {
        match self {
            Payload::Eda(_) => ResultKind::Eda,
            Payload::Clustering(_) => ResultKind::Clustering,
            Payload::Topics(_) => ResultKind::Topics,
            Payload::Sentiment(_) => ResultKind::Sentiment,
            Payload::CommGraph(_) => ResultKind::CommGraph,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermCount {
    pub term: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermWeight {
    pub term: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermProbability {
    pub term: String,
    pub probability: f64,
}

/// A `YYYY-MM` bin and the number of documents in it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonthCount {
    pub month: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdaPayload {
    pub total_docs: u64,
    pub date_histogram: Vec<MonthCount>,
    pub top_terms: Vec<TermCount>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterSummary {
    pub cluster: usize,
    pub top_terms: Vec<TermWeight>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusteringPayload {
    pub k: usize,
    /// Documents per reported cluster, aligned with `clusters`.
    pub cluster_sizes: Vec<u64>,
    pub clusters: Vec<ClusterSummary>,
    pub inertia: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopicSummary {
    pub topic: usize,
    pub top_terms: Vec<TermProbability>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopicsPayload {
    pub n_topics: usize,
    pub topics: Vec<TopicSummary>,
    pub topic_prevalence: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonthlySentiment {
    pub month: String,
    pub mean_score: f64,
    pub doc_count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SentimentPayload {
    pub total_docs: u64,
    pub overall_mean: f64,
    pub months: Vec<MonthlySentiment>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphEdge {
    pub source: String,
    pub target: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommGraphPayload {
    pub nodes: Vec<String>,
    pub edges: Vec<GraphEdge>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_fields_are_rejected() {
        let ok = r#"{"generated_with":{"algorithm":"eda","params":{},"seed":1},
            "payload":{"kind":"eda","total_docs":0,"date_histogram":[],"top_terms":[]},
            "suppressed_buckets":0}"#;
        let parsed: AggregateResult = serde_json::from_str(ok).unwrap();
        assert_eq!(parsed.kind(), ResultKind::Eda);

        let extra = ok.replace(r#""top_terms":[]"#, r#""top_terms":[],"raw_text":"x""#);
        assert!(serde_json::from_str::<AggregateResult>(&extra).is_err());
    }
}
