//! Pseudonymous communication graph.

use std::collections::{BTreeMap, BTreeSet};

use super::mask::MaskedDocument;
use super::result::{CommGraphPayload, GraphEdge};

fn pseudonym_number(p: &str) -> u64 {
    p.strip_prefix('P').and_then(|n| n.parse().ok()).unwrap_or(u64::MAX)
}

/// Directed sender → recipient edges with message counts. Nodes and edges
/// are ordered by pseudonym number, which is first-appearance order.
pub fn comm_graph(corpus: &[MaskedDocument]) -> CommGraphPayload {
    let mut nodes: BTreeSet<(u64, String)> = BTreeSet::new();
    let mut edges: BTreeMap<(u64, u64), (String, String, u64)> = BTreeMap::new();
    for doc in corpus {
        let Some(sender) = &doc.sender_pseudonym else { continue };
        let s = pseudonym_number(sender);
        nodes.insert((s, sender.clone()));
        for r in &doc.recipient_pseudonyms {
            let t = pseudonym_number(r);
            nodes.insert((t, r.clone()));
            edges.entry((s, t)).or_insert_with(|| (sender.clone(), r.clone(), 0)).2 += 1;
        }
    }
    CommGraphPayload {
        nodes: nodes.into_iter().map(|(_, p)| p).collect(),
        edges: edges.into_values().map(|(source, target, count)| GraphEdge { source, target, count }).collect(),
    }
}
