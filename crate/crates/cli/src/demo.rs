//! `cliox demo`: publish → register → search → buy → compute → explore.
//!
//! Identities live in `<profile>-holder`, `<profile>-ai` and
//! `<profile>-consumer` profiles and are reused across runs. A repeated
//! publish answers 409; the demo then looks up the asset it published
//! earlier and carries on.

use std::time::Duration;

use clap::Args;
use cliox_core::JobResult;
use serde_json::{json, Value};

use crate::client::{encode, Client};
use crate::commands::{self, Context};
use crate::error::CliError;
use crate::profile::CliProfile;
use crate::summary::summarize;

pub const DATASET_NAME: &str = "Enron emails";

#[derive(Debug, Clone, Args)]
pub struct DemoArgs {
    /// Dataset location on the portal host, relative to its corpus root.
    #[arg(long, default_value = "corpus")]
    pub location: String,
    /// Built-in algorithm to run.
    #[arg(long, default_value = "eda")]
    pub algorithm: String,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

struct Step {
    name: &'static str,
    from: u64,
    to: u64,
    detail: String,
}

fn audit_total(client: &Client) -> Result<u64, CliError> {
    Ok(client.get("/audit?page=0", None)?["total"].as_u64().unwrap_or(0))
}

/// A context for `profile`, creating (or recreating) its identity when the
/// server does not know it.
fn ensure_identity(client: &Client, profile: &str, roles: &[&str]) -> Result<Context, CliError> {
    let ctx = Context { client: Client::new(client.base())?, profile: profile.to_string() };
    if CliProfile::exists(profile) {
        match ctx.profile()?.refresh_session(&ctx.client) {
            Ok(_) => return Ok(ctx),
            Err(e) if e.is_status(401) => {}
            Err(e) => return Err(e),
        }
    }
    let roles: Vec<String> = roles.iter().map(|r| r.to_string()).collect();
    commands::identity_create(&ctx, &roles)?;
    Ok(ctx)
}

/// Publish, or find the live asset this author already published under `name`.
fn publish_or_reuse(ctx: &Context, args: &commands::PublishArgs) -> Result<(String, bool), CliError> {
    match commands::publish(ctx, args) {
        Ok((doc, _)) => Ok((doc["did"].as_str().unwrap_or_default().to_string(), false)),
        Err(e) if e.is_status(409) => {
            let me = ctx.profile()?.did;
            let hits = ctx.client.get(&format!("/assets?query={}", encode(&args.name)), None)?;
            for hit in hits["hits"].as_array().into_iter().flatten() {
                let did = hit["did"].as_str().unwrap_or_default();
                let ddo = ctx.client.get(&format!("/assets/{did}"), None)?;
                if ddo["author"] == json!(me) && ddo["name"] == json!(args.name) {
                    return Ok((did.to_string(), true));
                }
            }
            Err(e)
        }
        Err(e) => Err(e),
    }
}

pub fn demo(ctx: &Context, args: &DemoArgs) -> Result<(Value, String), CliError> {
    let client = &ctx.client;
    let start = audit_total(client)?;
    let mut steps = Vec::new();
    let mut mark = |name, from, detail: String| -> Result<(), CliError> {
        steps.push(Step { name, from, to: audit_total(client)?, detail });
        Ok(())
    };

    // 1. The holder publishes the collection.
    let from = audit_total(client)?;
    let holder = ensure_identity(client, &format!("{}-holder", ctx.profile), &["holder"])?;
    let dataset_args = commands::PublishArgs {
        name: DATASET_NAME.into(),
        desc: "Mail from an energy-trading desk, for distant reading".into(),
        price: 5000,
        location: Some(args.location.clone()),
        license: "Non-commercial research. Results may be published in aggregate only.".into(),
        asset_type: "dataset".into(),
        tags: vec!["email".into(), "energy".into(), "enron".into()],
        consent: true,
    };
    let (dataset, reused) = publish_or_reuse(&holder, &dataset_args)?;
    mark("publish", from, format!("{dataset}{}", if reused { " (already published)" } else { "" }))?;

    // 2. An AI contributor registers the algorithm.
    let from = audit_total(client)?;
    let ai = ensure_identity(client, &format!("{}-ai", ctx.profile), &["ai_contributor"])?;
    let algo_args = commands::PublishArgs {
        name: format!("Built-in {}", args.algorithm),
        desc: format!("Aggregate-only {} over masked text", args.algorithm),
        price: 1000,
        location: None,
        license: "Open use".into(),
        asset_type: "algorithm".into(),
        tags: vec![format!("builtin:{}", args.algorithm)],
        consent: false,
    };
    let (algorithm, reused) = publish_or_reuse(&ai, &algo_args)?;
    mark("register", from, format!("{algorithm}{}", if reused { " (already registered)" } else { "" }))?;

    // 3. The researcher discovers it.
    let from = audit_total(client)?;
    let consumer = ensure_identity(client, &format!("{}-consumer", ctx.profile), &["consumer"])?;
    let (hits, _) = commands::search(&consumer, "enron", Some("dataset"), None, None)?;
    let found = hits["hits"].as_array().into_iter().flatten().any(|h| h["did"] == json!(dataset));
    if !found {
        return Err(CliError::Local("published dataset not found by search".into()));
    }
    mark("search", from, format!("{} hit(s) for \"enron\"", hits["total"]))?;

    // 4. ...funds the wallet and buys access, accepting the license.
    let from = audit_total(client)?;
    commands::faucet(&consumer, 20_000)?;
    let (order, _) = commands::buy(&consumer, &dataset, &algorithm, 24, true)?;
    mark("buy", from, format!("order {} for {}", order["order_id"].as_str().unwrap_or("-"), order["amount_locked"]))?;

    // 5. ...runs the job next to the data.
    let from = audit_total(client)?;
    let run = commands::RunArgs {
        dataset: dataset.clone(),
        algorithm: algorithm.clone(),
        params: Vec::new(),
        seed: args.seed,
        wait: false,
    };
    let (submitted, _) = commands::run(&consumer, &run)?;
    let job = submitted["job_did"].as_str().unwrap_or_default().to_string();
    let status = commands::wait_for(&consumer, &job, Duration::from_secs(300))?;
    if status["state"] != "Succeeded" {
        return Err(CliError::Local(format!("job ended {}", status["state"])));
    }
    mark("compute", from, format!("{job} Succeeded"))?;

    // 6. ...and explores the sanitized aggregate.
    let from = audit_total(client)?;
    let doc = consumer.authed(|c, t| c.get(&format!("/jobs/{job}/result"), Some(t)))?;
    let result: JobResult =
        serde_json::from_value(doc).map_err(|e| CliError::Local(format!("unexpected result document: {e}")))?;
    mark("explore", from, format!("result {}", result.result_digest))?;

    let end = audit_total(client)?;
    let json_steps: Vec<Value> = steps
        .iter()
        .map(|s| json!({ "step": s.name, "audit_from": s.from, "audit_to": s.to, "detail": s.detail }))
        .collect();
    let doc = json!({
        "steps": json_steps,
        "dataset_did": dataset,
        "algorithm_did": algorithm,
        "job_did": job,
        "state": status["state"],
        "result_digest": result.result_digest,
        "audit_entries_created": end - start,
    });
    let mut lines: Vec<String> = steps
        .iter()
        .enumerate()
        .map(|(i, s)| format!("[{}/6] {:<8} audit #{}..#{}  {}", i + 1, s.name, s.from, s.to, s.detail))
        .collect();
    lines.push(String::new());
    lines.push(summarize(&result));
    lines.push(format!("\n{} audit entries created", end - start));
    Ok((doc, lines.join("\n")))
}
