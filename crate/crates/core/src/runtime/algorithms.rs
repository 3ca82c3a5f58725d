//! Named algorithms the runtime can execute.
//!
//! Algorithm assets select one of these through a `builtin:<name>` tag. Each
//! receives the masked corpus, the job parameters and the seed, and returns a
//! whitelisted payload.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::analytics::graph::comm_graph;
use crate::analytics::kmeans::{kmeans, KMeansConfig};
use crate::analytics::lda::{lda, LdaConfig};
use crate::analytics::mask::MaskedDocument;
use crate::analytics::result::{
    ClusterSummary, ClusteringPayload, Payload, TermProbability, TermWeight, TopicSummary, TopicsPayload,
};
use crate::analytics::sentiment::{sentiment, SentimentLexicon};
use crate::analytics::tfidf::tfidf;
use crate::analytics::tokenize::terms;
use crate::analytics::{eda, AnalyticsError};

pub type Params = BTreeMap<String, String>;

pub trait Algorithm: Send + Sync {
    fn run(&self, corpus: &[MaskedDocument], params: &Params, seed: u64) -> Result<Payload, AnalyticsError>;
}

/// Read an optional numeric parameter.
pub fn param<T: FromStr>(params: &Params, name: &str, default: T) -> Result<T, AnalyticsError> {
    match params.get(name) {
        None => Ok(default),
        Some(raw) => raw
            .trim()
            .parse()
            .map_err(|_| AnalyticsError::InvalidParam { name: name.to_string(), reason: "not a valid number".into() }),
    }
}

struct Eda;

impl Algorithm for Eda {
    fn run(&self, corpus: &[MaskedDocument], params: &Params, _seed: u64) -> Result<Payload, AnalyticsError> {
        Ok(Payload::Eda(eda::eda(corpus, param(params, "max_terms", 50)?)))
    }
}

struct KMeans;

impl Algorithm for KMeans {
    fn run(&self, corpus: &[MaskedDocument], params: &Params, seed: u64) -> Result<Payload, AnalyticsError> {
        let k = param(params, "k", 3)?;
        let top = param(params, "top_terms", 10)?;
        let config = KMeansConfig { max_iter: param(params, "max_iter", 100)?, ..KMeansConfig::new(k, seed) };
        let matrix = tfidf(corpus)?;
        let fit = kmeans(&matrix.rows, matrix.n_terms(), &config)?;
        let clusters = fit
            .centroids
            .iter()
            .enumerate()
            .map(|(cluster, centroid)| {
                let mut ranked: Vec<(usize, f64)> =
                    centroid.iter().copied().enumerate().filter(|(_, w)| *w > 0.0).collect();
                ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
                let top_terms = ranked
                    .into_iter()
                    .take(top)
                    .map(|(c, weight)| TermWeight { term: matrix.vocabulary[c].clone(), weight })
                    .collect();
                ClusterSummary { cluster, top_terms }
            })
            .collect();
        Ok(Payload::Clustering(ClusteringPayload { k, cluster_sizes: fit.sizes, clusters, inertia: fit.inertia }))
    }
}

struct Topics;

impl Algorithm for Topics {
    fn run(&self, corpus: &[MaskedDocument], params: &Params, seed: u64) -> Result<Payload, AnalyticsError> {
        let n_topics = param(params, "n_topics", 3)?;
        let top = param(params, "top_terms", 10)?;
        let config = LdaConfig { iters: param(params, "iters", 200)?, ..LdaConfig::new(n_topics, seed) };
        let docs: Vec<Vec<String>> = corpus.iter().map(|d| terms(&d.masked_body)).collect();
        let fit = lda(&docs, &config)?;
        let topics = (0..n_topics)
            .map(|topic| TopicSummary {
                topic,
                top_terms: fit
                    .top_terms(topic, top)
                    .into_iter()
                    .map(|(term, probability)| TermProbability { term, probability })
                    .collect(),
            })
            .collect();
        Ok(Payload::Topics(TopicsPayload { n_topics, topics, topic_prevalence: fit.topic_prevalence }))
    }
}

struct Sentiment;

impl Algorithm for Sentiment {
    fn run(&self, corpus: &[MaskedDocument], _params: &Params, _seed: u64) -> Result<Payload, AnalyticsError> {
        Ok(Payload::Sentiment(sentiment(corpus, SentimentLexicon::builtin())))
    }
}

struct CommGraph;

impl Algorithm for CommGraph {
    fn run(&self, corpus: &[MaskedDocument], _params: &Params, _seed: u64) -> Result<Payload, AnalyticsError> {
        Ok(Payload::CommGraph(comm_graph(corpus)))
    }
}

#[derive(Clone, Default)]
pub struct AlgorithmRegistry {
    entries: BTreeMap<String, Arc<dyn Algorithm>>,
}

impl fmt::Debug for AlgorithmRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.entries.keys()).finish()
    }
}

impl AlgorithmRegistry {
    pub const BUILTINS: [&'static str; 5] = ["eda", "kmeans", "topics", "sentiment", "comm_graph"];

    pub fn builtin() -> Self {
        let mut r = AlgorithmRegistry::default();
        r.register("eda", Eda);
        r.register("kmeans", KMeans);
        r.register("topics", Topics);
        r.register("sentiment", Sentiment);
        r.register("comm_graph", CommGraph);
        r
    }

    pub fn register(&mut self, name: &str, algorithm: impl Algorithm + 'static) {
        self.entries.insert(name.to_string(), Arc::new(algorithm));
    }

    pub fn get(&self, name: &str) -> Option<Arc<dyn Algorithm>> {
        self.entries.get(name).cloned()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::email::parse_email;
    use crate::analytics::mask::{mask_corpus, NameDictionary};

    fn corpus() -> Vec<MaskedDocument> {
        let raw: Vec<_> = (0..8)
            .map(|i| {
                let body =
                    if i % 2 == 0 { "energy trading power prices great" } else { "football tickets weekend game bad" };
                parse_email(&format!(
                    "From: u{}@x.com\nTo: u{}@x.com\nDate: Mon, 14 May 2001 16:39:00 -0700\n\n{body}",
                    i % 3,
                    (i + 1) % 3
                ))
            })
            .collect();
        mask_corpus(&raw, &NameDictionary::default())
    }

    #[test]
    fn every_builtin_runs() {
        let reg = AlgorithmRegistry::builtin();
        let docs = corpus();
        let params =
            Params::from([("k".into(), "2".into()), ("n_topics".into(), "2".into()), ("iters".into(), "20".into())]);
        let kinds = ["eda", "clustering", "topics", "sentiment", "comm_graph"];
        for (name, kind) in AlgorithmRegistry::BUILTINS.into_iter().zip(kinds) {
            let payload = reg.get(name).unwrap().run(&docs, &params, 7).unwrap();
            assert_eq!(serde_json::to_value(&payload).unwrap()["kind"], kind);
        }
    }

    #[test]
    fn kmeans_separates_topics() {
        let params = Params::from([("k".into(), "2".into())]);
        let Payload::Clustering(p) = KMeans.run(&corpus(), &params, 1).unwrap() else { unreachable!() };
        assert_eq!(p.cluster_sizes.iter().sum::<u64>(), 8);
        assert_eq!(p.cluster_sizes, vec![4, 4]);
    }

    #[test]
    fn bad_params_are_errors() {
        let params = Params::from([("k".into(), "many".into())]);
        assert!(matches!(KMeans.run(&corpus(), &params, 1), Err(AnalyticsError::InvalidParam { .. })));
        let params = Params::from([("k".into(), "99".into())]);
        assert!(matches!(KMeans.run(&corpus(), &params, 1), Err(AnalyticsError::BadK { .. })));
    }
}
