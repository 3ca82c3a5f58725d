//! Byte-stable outputs checked against files under `fixtures/`.
//! Set `CLIOX_UPDATE_GOLDEN=1` to rewrite them after an intended change.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use cliox_core::catalog::{AssetMetadata, AssetType};
use cliox_core::runtime::AlgorithmRegistry;
use cliox_core::{
    canonical_bytes, Ddo, HexId, Identity, JobRequest, JobState, Ledger, ManualClock, Market, MarketConfig,
    ProviderKey, Role, RuntimeConfig,
};
use serde_json::{json, Value};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn check(rel: &str, actual: &Value) {
    let path = fixtures().join(rel);
    // Text, not parsed values: float parsing is not guaranteed to round-trip.
    let rendered = serde_json::to_string_pretty(actual).unwrap() + "\n";
    if std::env::var_os("CLIOX_UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, rendered).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert!(rendered == expected, "{rel} differs:\n{rendered}");
}

fn meta(asset_type: AssetType, name: &str, tags: &[&str]) -> AssetMetadata {
    AssetMetadata {
        asset_type,
        name: name.into(),
        description: "Sent mail from four trading desk mailboxes".into(),
        license_text: "Research use only. No re-identification.".into(),
        requires_consent_ack: asset_type == AssetType::Dataset,
        price_per_access: 5_000,
        tags: tags.iter().map(|t| t.to_string()).collect(),
    }
}

#[test]
fn ddo_documents_are_stable() {
    let author = Identity::from_seed([42; 32], [Role::Holder].into());
    let dataset = Ddo::build(
        &author,
        meta(AssetType::Dataset, "Enron emails", &["email", "2001"]),
        1_000_000_000,
        Some(HexId::from_bytes([7; 16])),
    );
    let algorithm =
        Ddo::build(&author, meta(AssetType::Algorithm, "Topic model", &["builtin:topics"]), 1_000_000_060, None);
    for (name, ddo) in [("dataset", &dataset), ("algorithm", &algorithm)] {
        assert!(author.public().verify(&ddo.signing_bytes(), &ddo.signature));
        let doc: Value = serde_json::from_slice(&canonical_bytes(ddo)).unwrap();
        check(&format!("ddo/{name}.json"), &json!({ "digest": ddo.digest(), "ddo": doc }));
    }
}

#[test]
fn builtin_results_on_the_fixture_corpus_are_stable() {
    let clock = Arc::new(ManualClock::new(1_000_000_000));
    let ledger = Arc::new(Ledger::in_memory(clock));
    let config = MarketConfig {
        runtime: RuntimeConfig { data_root: Some(fixtures()), ..Default::default() },
        ..Default::default()
    };
    let market = Market::new(ledger.clone(), &ProviderKey::generate(), config).unwrap();
    let holder = ledger.create_identity([Role::Holder].into()).unwrap();
    let consumer = ledger.create_identity([Role::Consumer].into()).unwrap();
    let mut m = meta(AssetType::Dataset, "Enron emails", &[]);
    m.requires_consent_ack = false;
    let dataset = market.publish(&holder, m, Some("corpus")).unwrap().did;
    ledger.faucet(consumer.did(), 1_000_000).unwrap();

    let params: BTreeMap<&str, Vec<(&str, &str)>> = BTreeMap::from([
        ("eda", vec![]),
        ("kmeans", vec![("k", "2")]),
        ("topics", vec![("n_topics", "2"), ("iters", "100")]),
        ("sentiment", vec![]),
        ("comm_graph", vec![]),
    ]);
    for name in AlgorithmRegistry::BUILTINS {
        let tag = format!("builtin:{name}");
        let algo = market.publish(&holder, meta(AssetType::Algorithm, name, &[&tag]), None).unwrap().did;
        market.purchase(consumer.did(), &dataset, &algo, 3_600).unwrap();
        let mut p: BTreeMap<String, String> =
            params[name].iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        p.insert("seed".into(), "2001".into());
        let request = JobRequest {
            consumer: consumer.did().clone(),
            dataset_did: dataset.clone(),
            algorithm_did: algo,
            params: p,
        };
        let job = market.runtime.submit_job(&request, &consumer.sign(&request.signing_bytes())).unwrap();
        let job = market.runtime.run_job(&job.job_did).unwrap();
        assert_eq!(job.state, JobState::Succeeded, "{name}: {:?}", job.reason);
        let result = market.runtime.get_result(&job.job_did, consumer.did()).unwrap();
        let doc = json!({ "result_digest": result.result_digest, "result": result.payload });
        check(&format!("results/{name}.json"), &doc);
    }
}
