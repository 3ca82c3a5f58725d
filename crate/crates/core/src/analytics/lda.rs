//! Latent Dirichlet allocation by collapsed Gibbs sampling.
//!
//! Symmetric priors α = 50 / K and β = 0.01. Each token's topic is resampled
//! from
//!
//! ```text
//! p(z = k) ∝ (n_dk + α) · (n_kw + β) / (n_k + V·β)
//! ```
//!
//! with the token's own assignment removed from the counts. After the last
//! sweep, topic-term distributions are the normalized topic-term counts and
//! prevalence is each topic's share of all tokens.

use std::collections::BTreeSet;

use super::rng::SplitMix64;
use super::AnalyticsError;

pub const BETA: f64 = 0.01;

pub fn alpha_for(n_topics: usize) -> f64 {
    50.0 / n_topics as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct LdaConfig {
    pub n_topics: usize,
    pub seed: u64,
    pub iters: usize,
}

impl LdaConfig {
    pub fn new(n_topics: usize, seed: u64) -> Self {
        LdaConfig { n_topics, seed, iters: 200 }
    }
}

/// Count totals observed after one sweep; all three equal the corpus token count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepTotals {
    pub topic_totals: u64,
    pub topic_term_totals: u64,
    pub doc_topic_totals: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LdaFit {
    pub vocabulary: Vec<String>,
    /// `topic_term[k][w]`, each row sums to 1.
    pub topic_term: Vec<Vec<f64>>,
    /// `doc_topic[d][k]`, smoothed by α so empty documents stay defined.
    pub doc_topic: Vec<Vec<f64>>,
    pub topic_prevalence: Vec<f64>,
    pub total_tokens: u64,
    pub sweeps: Vec<SweepTotals>,
}

impl LdaFit {
    /// Highest-probability terms of topic `k`, ties broken by term.
    pub fn top_terms(&self, k: usize, n: usize) -> Vec<(String, f64)> {
        let mut ranked: Vec<(usize, f64)> = self.topic_term[k].iter().copied().enumerate().collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| self.vocabulary[a.0].cmp(&self.vocabulary[b.0])));
        ranked.into_iter().filter(|(_, p)| *p > 0.0).take(n).map(|(w, p)| (self.vocabulary[w].clone(), p)).collect()
    }
}

struct Counts {
    doc_topic: Vec<Vec<u64>>,
    topic_term: Vec<Vec<u64>>,
    topic: Vec<u64>,
}

impl Counts {
    fn totals(&self) -> SweepTotals {
        SweepTotals {
            topic_totals: self.topic.iter().sum(),
            topic_term_totals: self.topic_term.iter().flatten().sum(),
            doc_topic_totals: self.doc_topic.iter().flatten().sum(),
        }
    }
}

pub fn lda(docs: &[Vec<String>], config: &LdaConfig) -> Result<LdaFit, AnalyticsError> {
    let k_topics = config.n_topics;
    if k_topics == 0 {
        return Err(AnalyticsError::BadTopicCount);
    }
    let vocabulary: Vec<String> = docs.iter().flatten().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    if vocabulary.is_empty() {
        return Err(AnalyticsError::EmptyCorpus);
    }
    let word_ids: Vec<Vec<usize>> = docs
        .iter()
        .map(|d| d.iter().map(|t| vocabulary.binary_search(t).expect("term is in vocabulary")).collect())
        .collect();
    let v = vocabulary.len();
    let alpha = alpha_for(k_topics);
    let v_beta = v as f64 * BETA;

    let mut rng = SplitMix64::new(config.seed);
    let mut counts = Counts {
        doc_topic: vec![vec![0; k_topics]; docs.len()],
        topic_term: vec![vec![0; v]; k_topics],
        topic: vec![0; k_topics],
    };
    let mut z: Vec<Vec<usize>> = word_ids
        .iter()
        .enumerate()
        .map(|(d, words)| {
            words
                .iter()
                .map(|&w| {
                    let k = rng.below(k_topics);
                    counts.doc_topic[d][k] += 1;
                    counts.topic_term[k][w] += 1;
                    counts.topic[k] += 1;
                    k
                })
                .collect()
        })
        .collect();

    let total_tokens: u64 = word_ids.iter().map(|d| d.len() as u64).sum();
    let mut weights = vec![0.0; k_topics];
    let mut sweeps = Vec::with_capacity(config.iters);
    for _ in 0..config.iters {
        for (d, words) in word_ids.iter().enumerate() {
            for (i, &w) in words.iter().enumerate() {
                let old = z[d][i];
                counts.doc_topic[d][old] -= 1;
                counts.topic_term[old][w] -= 1;
                counts.topic[old] -= 1;

                let mut total = 0.0;
                for (k, slot) in weights.iter_mut().enumerate() {
                    total += (counts.doc_topic[d][k] as f64 + alpha) * (counts.topic_term[k][w] as f64 + BETA)
                        / (counts.topic[k] as f64 + v_beta);
                    *slot = total;
                }
                let target = rng.next_f64() * total;
                let new = weights.iter().position(|&c| c > target).unwrap_or(k_topics - 1);

                z[d][i] = new;
                counts.doc_topic[d][new] += 1;
                counts.topic_term[new][w] += 1;
                counts.topic[new] += 1;
            }
        }
        sweeps.push(counts.totals());
    }

    let topic_term = counts
        .topic_term
        .iter()
        .zip(&counts.topic)
        .map(
            |(row, &n_k)| {
                if n_k == 0 {
                    vec![1.0 / v as f64; v]
                } else {
                    row.iter().map(|&c| c as f64 / n_k as f64).collect()
                }
            },
        )
        .collect();
    let doc_topic = counts
        .doc_topic
        .iter()
        .map(|row| {
            let n_d: u64 = row.iter().sum();
            let denom = n_d as f64 + k_topics as f64 * alpha;
            row.iter().map(|&c| (c as f64 + alpha) / denom).collect()
        })
        .collect();
    let topic_prevalence = if total_tokens == 0 {
        vec![1.0 / k_topics as f64; k_topics]
    } else {
        counts.topic.iter().map(|&n| n as f64 / total_tokens as f64).collect()
    };

    Ok(LdaFit { vocabulary, topic_term, doc_topic, topic_prevalence, total_tokens, sweeps })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(docs: &[&str]) -> Vec<Vec<String>> {
        docs.iter().map(|d| d.split_whitespace().map(str::to_string).collect()).collect()
    }

    #[test]
    fn single_topic_is_corpus_distribution() {
        let docs = toks(&["a b b c", "c c d", "a"]);
        let fit = lda(&docs, &LdaConfig { n_topics: 1, seed: 3, iters: 5 }).unwrap();
        let expected = [2.0 / 8.0, 2.0 / 8.0, 3.0 / 8.0, 1.0 / 8.0];
        for (p, e) in fit.topic_term[0].iter().zip(expected) {
            assert!((p - e).abs() < 1e-12);
        }
        assert_eq!(fit.topic_prevalence, vec![1.0]);
    }

    #[test]
    fn counts_are_conserved_every_sweep() {
        let docs = toks(&["a b c d e", "e f g", "a a a h", "i j k l m n"]);
        let fit = lda(&docs, &LdaConfig { n_topics: 3, seed: 11, iters: 30 }).unwrap();
        assert_eq!(fit.sweeps.len(), 30);
        for s in &fit.sweeps {
            assert_eq!(s.topic_totals, fit.total_tokens);
            assert_eq!(s.topic_term_totals, fit.total_tokens);
            assert_eq!(s.doc_topic_totals, fit.total_tokens);
        }
        for row in &fit.topic_term {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        assert!((fit.topic_prevalence.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn errors() {
        assert!(matches!(lda(&toks(&["a"]), &LdaConfig::new(0, 1)), Err(AnalyticsError::BadTopicCount)));
        assert!(matches!(lda(&toks(&["", ""]), &LdaConfig::new(2, 1)), Err(AnalyticsError::EmptyCorpus)));
    }

    #[test]
    fn seeded_runs_repeat() {
        let docs = toks(&["a b c", "b c d", "x y z", "y z w"]);
        let a = lda(&docs, &LdaConfig { n_topics: 2, seed: 5, iters: 20 }).unwrap();
        let b = lda(&docs, &LdaConfig { n_topics: 2, seed: 5, iters: 20 }).unwrap();
        assert_eq!(a, b);
    }
}
