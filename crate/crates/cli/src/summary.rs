//! Plain-text rendering of results for the terminal.

use cliox_core::analytics::Payload;
use cliox_core::JobResult;

fn terms<'a>(items: impl Iterator<Item = &'a str>, n: usize) -> String {
    items.take(n).collect::<Vec<_>>().join(", ")
}

/// A few lines describing a result, without the full payload.
pub fn summarize(result: &JobResult) -> String {
    let agg = &result.payload;
    let mut lines = vec![
        format!("job {}", result.job_did),
        format!("algorithm {} (seed {})", agg.generated_with.algorithm, agg.generated_with.seed),
        format!("result digest {}", result.result_digest),
    ];
    match &agg.payload {
        Payload::Eda(p) => {
            lines.push(format!("documents: {}", p.total_docs));
            lines.push(format!("months with enough documents: {}", p.date_histogram.len()));
            lines.push(format!("top terms: {}", terms(p.top_terms.iter().map(|t| t.term.as_str()), 10)));
        }
        Payload::Clustering(p) => {
            lines.push(format!("k = {}, inertia {:.4}", p.k, p.inertia));
            for (c, size) in p.clusters.iter().zip(&p.cluster_sizes) {
                lines.push(format!(
                    "cluster {} ({} docs): {}",
                    c.cluster,
                    size,
                    terms(c.top_terms.iter().map(|t| t.term.as_str()), 6)
                ));
            }
        }
        Payload::Topics(p) => {
            for (t, share) in p.topics.iter().zip(&p.topic_prevalence) {
                lines.push(format!(
                    "topic {} ({:.0}%): {}",
                    t.topic,
                    share * 100.0,
                    terms(t.top_terms.iter().map(|x| x.term.as_str()), 6)
                ));
            }
        }
        Payload::Sentiment(p) => {
            lines.push(format!("documents: {}, overall mean {:+.3}", p.total_docs, p.overall_mean));
            for m in &p.months {
                lines.push(format!("{}: {:+.3} over {} docs", m.month, m.mean_score, m.doc_count));
            }
        }
        Payload::CommGraph(p) => {
            lines.push(format!("{} correspondents, {} links", p.nodes.len(), p.edges.len()));
        }
    }
    lines.push(format!("suppressed buckets: {}", agg.suppressed_buckets));
    lines.join("\n")
}
