mod common;

use std::path::Path;

use common::{copy_dir, repo_root, run_cliox, shape, Portal, Run};
use serde_json::Value;

fn fixture_portal() -> Portal {
    Portal::start(true, |root| copy_dir(&repo_root().join("fixtures/corpus"), &root.join("corpus")))
}

/// Compare a `--json` document's shape with `fixtures/cli/<name>.json`.
/// Set `CLIOX_UPDATE_GOLDEN=1` to rewrite the file.
fn check_golden(name: &str, doc: &Value) {
    let path = repo_root().join("fixtures/cli").join(format!("{name}.json"));
    let actual = shape(doc);
    if std::env::var_os("CLIOX_UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, serde_json::to_string_pretty(&actual).unwrap() + "\n").unwrap();
        return;
    }
    let expected: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(actual, expected, "schema of `{name}` changed");
}

struct As<'a> {
    portal: &'a Portal,
    profile: &'a str,
}

impl As<'_> {
    fn json(&self, args: &[&str]) -> Run {
        let mut full = vec!["--profile", self.profile, "--json"];
        full.extend_from_slice(args);
        self.portal.cliox(&full)
    }

    fn text(&self, args: &[&str]) -> Run {
        let mut full = vec!["--profile", self.profile];
        full.extend_from_slice(args);
        self.portal.cliox(&full)
    }
}

#[test]
fn scripted_workflow_with_golden_output() {
    let p = fixture_portal();
    let holder = As { portal: &p, profile: "holder" };
    let reader = As { portal: &p, profile: "reader" };

    let r = holder.json(&["identity", "create", "--roles", "holder,ai_contributor"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    check_golden("identity_create", &r.json());

    let r = holder.json(&[
        "publish",
        "--name",
        "Enron emails",
        "--desc",
        "Energy trading desk mail",
        "--price",
        "5000",
        "--location",
        "corpus",
        "--license",
        "Research only",
        "--consent",
        "--tag",
        "email",
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    check_golden("publish", &r.json());
    let dataset = r.json()["did"].as_str().unwrap().to_string();
    let r = holder.json(&[
        "publish",
        "--name",
        "Topics",
        "--type",
        "algorithm",
        "--price",
        "1000",
        "--tag",
        "builtin:topics",
    ]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    let algorithm = r.json()["did"].as_str().unwrap().to_string();

    let r = holder.json(&["publish", "--name", "Enron emails", "--price", "5000", "--location", "corpus"]);
    assert_eq!((r.code, r.json()["error"].as_str()), (1, Some("DuplicateAsset")));
    check_golden("error", &r.json());

    let r = reader.json(&["search", "enron"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.json()["hits"][0]["did"], dataset.as_str());
    check_golden("search", &r.json());
    let r = reader.json(&["show", &dataset]);
    assert_eq!(r.code, 0);
    check_golden("show", &r.json());
    assert!(!r.stdout.contains("\"corpus\""), "location leaked: {}", r.stdout);

    assert_eq!(reader.json(&["identity", "create"]).code, 0);
    let r = reader.json(&["buy", "--dataset", &dataset, "--algorithm", &algorithm, "--hours", "2"]);
    assert_eq!((r.code, r.json()["error"].as_str()), (1, Some("ConsentMissing")));
    let r = reader.json(&["consent", &dataset]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    check_golden("consent", &r.json());
    let r = reader.json(&["buy", "--dataset", &dataset, "--algorithm", &algorithm, "--hours", "2"]);
    assert_eq!((r.code, r.json()["error"].as_str()), (1, Some("InsufficientFunds")));
    let r = reader.json(&["faucet", "20000"]);
    check_golden("faucet", &r.json());
    let r = reader.json(&["buy", "--dataset", &dataset, "--algorithm", &algorithm, "--hours", "2"]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    check_golden("buy", &r.json());

    let r =
        reader.json(&["run", "--dataset", &dataset, "--algorithm", &algorithm, "--param", "n_topics=2", "--seed", "5"]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    check_golden("run", &r.json());
    let job = r.json()["job_did"].as_str().unwrap().to_string();
    let mut status = Value::Null;
    for _ in 0..600 {
        status = reader.json(&["status", &job]).json();
        if status["state"] == "Succeeded" || status["state"] == "Failed" {
            break;
        }
        std::thread::sleep(std::time::Duration::from_millis(50));
    }
    assert_eq!(status["state"], "Succeeded", "{status}");
    check_golden("status", &status);

    let out = p.dir.path().join("result.json");
    let r = reader.json(&["result", &job, "--out", out.to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    check_golden("result_out", &r.json());
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(written["result_digest"], status["result_digest"]);
    assert_eq!(written["payload"]["payload"]["kind"], "topics");

    check_golden("events", &reader.json(&["events"]).json());
    let r = reader.json(&["audit", "verify"]);
    assert_eq!(r.json()["valid"], true);
    check_golden("audit_verify", &r.json());
    check_golden("governance", &reader.json(&["governance"]).json());

    // Human-readable output never carries key material.
    let key = std::fs::read_to_string(p.home().join("reader/access.key")).unwrap();
    let key = key.trim();
    for args in
        [vec!["identity", "show"], vec!["status", &job], vec!["result", &job], vec!["events"], vec!["audit", "list"]]
    {
        let r = reader.text(&args);
        assert_eq!(r.code, 0, "{args:?}: {}", r.stderr);
        assert!(!r.stdout.contains(key) && !r.stderr.contains(key));
    }
}

#[test]
fn corpus_ingest_prints_counts_only() {
    let dir = repo_root().join("fixtures/corpus");
    let r = run_cliox(
        Path::new("/nonexistent"),
        "http://127.0.0.1:1",
        &["corpus", "ingest", dir.to_str().unwrap(), "--json"],
    );
    assert_eq!(r.code, 0, "{}", r.stderr);
    let doc = r.json();
    assert_eq!(doc["documents"], 12);
    assert_eq!(doc["masked"]["ssn"], 2);
    check_golden("corpus_ingest", &doc);
    for planted in ["512-44-9083", "603-21-7745", "1400 Smith Street", "example-energy.com"] {
        assert!(!r.stdout.contains(planted), "{planted}");
    }
}

#[test]
fn demo_is_repeatable() {
    let p = fixture_portal();
    let first = p.cliox(&["demo", "--json"]);
    assert_eq!(first.code, 0, "{}\n{}", first.stdout, first.stderr);
    let doc = first.json();
    assert!(doc["audit_entries_created"].as_u64().unwrap() >= 10);
    assert_eq!(doc["steps"].as_array().unwrap().len(), 6);
    check_golden("demo", &doc);

    let second = p.cliox(&["demo", "--json"]);
    assert_eq!(second.code, 0, "{}", second.stderr);
    let again = second.json();
    assert_eq!(again["dataset_did"], doc["dataset_did"]);
    assert_eq!(again["result_digest"], doc["result_digest"]);

    let human = p.cliox(&["demo"]);
    assert_eq!(human.code, 0, "{}", human.stderr);
    assert!(human.stdout.contains("[6/6] explore"));
}

#[test]
fn exit_codes() {
    let home = tempfile::tempdir().unwrap();
    let dead = "http://127.0.0.1:1";
    assert_eq!(run_cliox(home.path(), dead, &["identity", "create"]).code, 1);
    let usage = run_cliox(home.path(), dead, &["run", "--dataset", "a", "--algorithm", "b"]);
    assert_eq!(usage.code, 2);
    assert_eq!(run_cliox(home.path(), dead, &["frobnicate"]).code, 2);
    let no_profile = run_cliox(home.path(), dead, &["faucet", "--json"]);
    assert_eq!(no_profile.code, 1);
    assert!(no_profile.json()["error"].is_string());
    assert_eq!(run_cliox(home.path(), dead, &["--help"]).code, 0);
}

#[test]
fn environment_overrides_flags() {
    let p = fixture_portal();
    let r = run_cliox(&p.home(), &p.base, &["--api", "http://127.0.0.1:1", "governance", "--json"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_cliox"))
        .args(["--profile", "ignored", "identity", "create", "--json"])
        .env("CLIOX_HOME", p.home())
        .env("CLIOX_API", &p.base)
        .env("CLIOX_PROFILE", "chosen")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(p.home().join("chosen/profile.json").is_file());
    assert!(!p.home().join("ignored").exists());
    let r = run_cliox(&p.home(), &p.base, &["--profile", "chosen", "faucet", "10"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        for f in ["access.key", "session.json"] {
            let mode = std::fs::metadata(p.home().join("chosen").join(f)).unwrap().permissions().mode();
            assert_eq!(mode & 0o777, 0o600, "{f}");
        }
    }
}
