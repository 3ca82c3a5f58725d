//! Argument definitions and command handlers.
//!
//! Every handler returns a JSON document and a human rendering of it; the
//! caller prints one or the other depending on `--json`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use cliox_core::analytics::mask::NameDictionary;
use cliox_core::analytics::{load_corpus, mask_corpus};
use cliox_core::{JobResult, Role};
use serde_json::{json, Value};

use crate::client::{encode, Client};
use crate::error::CliError;
use crate::profile::CliProfile;
use crate::summary::summarize;

pub const DEFAULT_API: &str = "http://127.0.0.1:8080";

/// Client for the Clio-X compute-to-data portal.
#[derive(Debug, Parser)]
#[command(name = "cliox", version)]
pub struct Cli {
    /// Portal base URL (CLIOX_API takes precedence).
    #[arg(long, global = true, default_value = DEFAULT_API)]
    pub api: String,
    /// Local profile name (CLIOX_PROFILE takes precedence).
    #[arg(long, global = true, default_value = "default")]
    pub profile: String,
    /// Print machine-readable JSON.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Manage the profile's identity.
    #[command(subcommand)]
    Identity(IdentityCommand),
    /// Credit test funds (minor units) to this identity.
    Faucet {
        #[arg(default_value_t = 20_000)]
        amount: u64,
    },
    /// Publish a dataset or algorithm.
    Publish(PublishArgs),
    /// Keyword search over live assets.
    Search {
        #[arg(default_value = "")]
        query: String,
        #[arg(long = "type")]
        asset_type: Option<String>,
        #[arg(long)]
        max_price: Option<u64>,
        #[arg(long)]
        tag: Option<String>,
    },
    /// Show an asset's DDO.
    Show { did: String },
    /// Retire an asset you own.
    Retire { did: String },
    /// Accept an asset's current license.
    Consent { did: String },
    /// Buy time-bounded access to a (dataset, algorithm) pair.
    Buy {
        #[arg(long)]
        dataset: String,
        #[arg(long)]
        algorithm: String,
        #[arg(long, default_value_t = 24)]
        hours: u64,
        /// Accept any license that requires consent.
        #[arg(long)]
        accept_licenses: bool,
    },
    /// Submit a compute job.
    Run(RunArgs),
    /// Show a job's status.
    Status { job: String },
    /// Fetch a job's result.
    Result {
        job: String,
        /// Write the result document here instead of printing it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Job events after a sequence number.
    Events {
        #[arg(long, default_value_t = 0)]
        since: u64,
    },
    /// Inspect the audit chain.
    #[command(subcommand)]
    Audit(AuditCommand),
    /// Work with local corpora.
    #[command(subcommand)]
    Corpus(CorpusCommand),
    /// Show the operator's governance information.
    Governance,
    /// Run the full workflow against a portal.
    Demo(crate::demo::DemoArgs),
}

#[derive(Debug, Subcommand)]
pub enum IdentityCommand {
    /// Create an identity on the server and store it in the profile.
    Create {
        /// Comma-separated roles.
        #[arg(long, value_delimiter = ',', default_value = "consumer")]
        roles: Vec<String>,
    },
    /// Show the profile.
    Show,
}

#[derive(Debug, Subcommand)]
pub enum AuditCommand {
    /// Verify the hash chain.
    Verify,
    /// List a page of entries.
    List {
        #[arg(long, default_value_t = 0)]
        page: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum CorpusCommand {
    /// Parse and mask a local mail directory and report counts only.
    Ingest { dir: PathBuf },
}

#[derive(Debug, Args)]
pub struct PublishArgs {
    #[arg(long)]
    pub name: String,
    #[arg(long, default_value = "")]
    pub desc: String,
    #[arg(long)]
    pub price: u64,
    /// Storage location, sealed by the provider. Required for datasets.
    #[arg(long)]
    pub location: Option<String>,
    #[arg(long, default_value = "")]
    pub license: String,
    #[arg(long = "type", default_value = "dataset")]
    pub asset_type: String,
    #[arg(long = "tag")]
    pub tags: Vec<String>,
    /// Require consumers to accept the license before buying.
    #[arg(long)]
    pub consent: bool,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub dataset: String,
    #[arg(long)]
    pub algorithm: String,
    /// Algorithm parameter as key=value; repeatable.
    #[arg(long = "param")]
    pub params: Vec<String>,
    #[arg(long)]
    pub seed: u64,
    /// Wait for the job to finish.
    #[arg(long)]
    pub wait: bool,
}

pub type Output = (Value, String);

pub struct Context {
    pub client: Client,
    pub profile: String,
}

impl Context {
    pub fn profile(&self) -> Result<CliProfile, CliError> {
        CliProfile::load(&self.profile)
    }

    /// Call with the profile's session, refreshing it once on 401.
    pub fn authed(&self, f: impl Fn(&Client, &str) -> Result<Value, CliError>) -> Result<Value, CliError> {
        let profile = self.profile()?;
        let token = profile.session(&self.client)?;
        match f(&self.client, &token) {
            Err(e) if e.is_status(401) => f(&self.client, &profile.refresh_session(&self.client)?),
            other => other,
        }
    }
}

fn field(v: &Value, k: &str) -> String {
    match &v[k] {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

pub fn parse_params(raw: &[String]) -> Result<BTreeMap<String, String>, CliError> {
    raw.iter()
        .map(|p| {
            let (k, v) =
                p.split_once('=').ok_or_else(|| CliError::Usage(format!("--param expects key=value, got `{p}`")))?;
            if k.trim().is_empty() {
                return Err(CliError::Usage("--param key must not be empty".into()));
            }
            if k.trim() == "seed" {
                return Err(CliError::Usage("use --seed instead of --param seed=…".into()));
            }
            Ok((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

pub fn identity_create(ctx: &Context, roles: &[String]) -> Result<Output, CliError> {
    for r in roles {
        r.parse::<Role>().map_err(CliError::Usage)?;
    }
    let resp = ctx.client.post("/identities", None, &json!({ "roles": roles }))?;
    let did = field(&resp, "did");
    let key = resp["access_key"].as_str().unwrap_or_default();
    CliProfile::create(&ctx.profile, ctx.client.base(), &did, key)?;
    let doc = json!({ "did": did, "public_key": resp["public_key"], "roles": resp["roles"], "profile": ctx.profile });
    Ok((doc, format!("created {did} in profile `{}`", ctx.profile)))
}

pub fn identity_show(ctx: &Context) -> Result<Output, CliError> {
    let p = ctx.profile()?;
    let doc = json!({ "profile": p.profile_name, "did": p.did, "api_base_url": p.api_base_url });
    Ok((doc, format!("{} ({}) at {}", p.did, p.profile_name, p.api_base_url)))
}

pub fn faucet(ctx: &Context, amount: u64) -> Result<Output, CliError> {
    let acct = ctx.authed(|c, t| c.post("/faucet", Some(t), &json!({ "amount": amount })))?;
    let text = format!("balance {}", field(&acct, "balance"));
    Ok((json!({ "did": acct["did"], "balance": acct["balance"] }), text))
}

pub fn publish(ctx: &Context, a: &PublishArgs) -> Result<Output, CliError> {
    let body = json!({
        "asset_type": a.asset_type,
        "name": a.name,
        "description": a.desc,
        "license_text": a.license,
        "requires_consent_ack": a.consent,
        "price": a.price,
        "tags": a.tags,
        "location": a.location,
    });
    let resp = ctx.authed(|c, t| c.post("/assets", Some(t), &body))?;
    let text = format!("published {} (nft {})", field(&resp, "did"), field(&resp, "nft_id"));
    Ok((resp, text))
}

pub fn search(
    ctx: &Context,
    query: &str,
    asset_type: Option<&str>,
    max_price: Option<u64>,
    tag: Option<&str>,
) -> Result<Output, CliError> {
    let mut qs = format!("/assets?query={}", encode(query));
    if let Some(t) = asset_type {
        qs += &format!("&type={}", encode(t));
    }
    if let Some(p) = max_price {
        qs += &format!("&max_price={p}");
    }
    if let Some(t) = tag {
        qs += &format!("&tag={}", encode(t));
    }
    let resp = ctx.client.get(&qs, None)?;
    let hits = resp["hits"].as_array().cloned().unwrap_or_default();
    let text = if hits.is_empty() {
        "no matches".to_string()
    } else {
        hits.iter()
            .map(|h| {
                format!(
                    "{}  {:<9} {:>7}  {}",
                    field(h, "did"),
                    field(h, "asset_type"),
                    field(h, "price_per_access"),
                    field(h, "name")
                )
            })
            .collect::<Vec<_>>()
            .join("\n")
    };
    Ok((json!({ "total": hits.len(), "hits": hits }), text))
}

pub fn show(ctx: &Context, did: &str) -> Result<Output, CliError> {
    let ddo = ctx.client.get(&format!("/assets/{did}"), None)?;
    let text = format!(
        "{}\n  name: {}\n  type: {}\n  price: {}\n  license: {}\n  consent required: {}\n  retired: {}",
        field(&ddo, "did"),
        field(&ddo, "name"),
        field(&ddo, "asset_type"),
        field(&ddo, "price_per_access"),
        field(&ddo, "license_text"),
        field(&ddo, "requires_consent_ack"),
        field(&ddo, "retired"),
    );
    Ok((ddo, text))
}

pub fn retire(ctx: &Context, did: &str) -> Result<Output, CliError> {
    let ddo = ctx.authed(|c, t| c.post(&format!("/assets/{did}/retire"), Some(t), &json!({})))?;
    Ok((json!({ "did": ddo["did"], "retired": ddo["retired"] }), format!("retired {did}")))
}

pub fn consent(ctx: &Context, did: &str) -> Result<Output, CliError> {
    let ddo = ctx.client.get(&format!("/assets/{did}"), None)?;
    let body = json!({ "asset_did": did, "license_digest": ddo["license_digest"] });
    let receipt = ctx.authed(|c, t| c.post("/consents", Some(t), &body))?;
    let doc = json!({
        "receipt_id": receipt["receipt_id"],
        "asset_did": receipt["asset_did"],
        "license_digest": receipt["license_digest"],
        "signed_at": receipt["signed_at"],
    });
    Ok((doc, format!("accepted license {} of {did}", field(&receipt, "license_digest"))))
}

pub fn buy(ctx: &Context, dataset: &str, algorithm: &str, hours: u64, accept: bool) -> Result<Output, CliError> {
    let body = json!({
        "dataset_did": dataset,
        "algorithm_did": algorithm,
        "duration_secs": hours.saturating_mul(3600),
        "accept_licenses": accept,
    });
    let resp = ctx.authed(|c, t| c.post("/orders", Some(t), &body))?;
    let text = format!(
        "order {} ({} locked), grant {} until {}",
        field(&resp, "order_id"),
        field(&resp, "amount_locked"),
        field(&resp, "grant_id"),
        field(&resp, "expires_at")
    );
    Ok((resp, text))
}

pub fn run(ctx: &Context, a: &RunArgs) -> Result<Output, CliError> {
    let params = parse_params(&a.params)?;
    let body = json!({ "dataset_did": a.dataset, "algorithm_did": a.algorithm, "params": params, "seed": a.seed });
    let resp = ctx.authed(|c, t| c.post("/jobs", Some(t), &body))?;
    let job = field(&resp, "job_did");
    if a.wait {
        return status_after_wait(ctx, &job, Duration::from_secs(300));
    }
    Ok((resp, format!("submitted {job}")))
}

pub fn wait_for(ctx: &Context, job: &str, timeout: Duration) -> Result<Value, CliError> {
    let start = Instant::now();
    loop {
        let status = ctx.authed(|c, t| c.get(&format!("/jobs/{job}"), Some(t)))?;
        if matches!(status["state"].as_str(), Some("Succeeded" | "Failed" | "Rejected")) {
            return Ok(status);
        }
        if start.elapsed() > timeout {
            return Err(CliError::Local(format!("job {job} did not finish in time")));
        }
        std::thread::sleep(Duration::from_millis(100));
    }
}

fn status_text(s: &Value) -> String {
    let mut text = format!("{}: {}", field(s, "job_did"), field(s, "state"));
    if let Some(r) = s["reason"].as_str() {
        text += &format!(" ({r})");
    }
    text
}

fn status_after_wait(ctx: &Context, job: &str, timeout: Duration) -> Result<Output, CliError> {
    let s = wait_for(ctx, job, timeout)?;
    let text = status_text(&s);
    Ok((s, text))
}

pub fn status(ctx: &Context, job: &str) -> Result<Output, CliError> {
    let s = ctx.authed(|c, t| c.get(&format!("/jobs/{job}"), Some(t)))?;
    let text = status_text(&s);
    Ok((s, text))
}

pub fn result(ctx: &Context, job: &str, out: Option<&Path>) -> Result<Output, CliError> {
    let doc = ctx.authed(|c, t| c.get(&format!("/jobs/{job}/result"), Some(t)))?;
    let parsed: JobResult =
        serde_json::from_value(doc.clone()).map_err(|e| CliError::Local(format!("unexpected result document: {e}")))?;
    match out {
        Some(path) => {
            let bytes = serde_json::to_vec_pretty(&doc).map_err(|e| CliError::Local(e.to_string()))?;
            std::fs::write(path, bytes)?;
            let summary = json!({ "job_did": parsed.job_did, "result_digest": parsed.result_digest, "written": true });
            Ok((summary, format!("{}\nwritten to {}", summarize(&parsed), path.display())))
        }
        None => Ok((doc, summarize(&parsed))),
    }
}

pub fn events(ctx: &Context, since: u64) -> Result<Output, CliError> {
    let resp = ctx.authed(|c, t| c.get(&format!("/events?since={since}"), Some(t)))?;
    let lines: Vec<String> = resp["events"]
        .as_array()
        .into_iter()
        .flatten()
        .map(|e| format!("#{} {} {}", field(e, "seq"), field(e, "job_did"), field(e, "state")))
        .collect();
    let doc = json!({ "events": resp["events"], "next_since": resp["next_since"] });
    Ok((doc, if lines.is_empty() { "no new events".into() } else { lines.join("\n") }))
}

pub fn audit_verify(ctx: &Context) -> Result<Output, CliError> {
    let v = ctx.client.get("/audit/verify", None)?;
    let text = if v["valid"].as_bool() == Some(true) {
        format!("chain valid ({} entries)", field(&v, "entries"))
    } else {
        format!("chain INVALID at entry {}", field(&v, "first_bad_index"))
    };
    Ok((v, text))
}

pub fn audit_list(ctx: &Context, page: usize) -> Result<Output, CliError> {
    let resp = ctx.client.get(&format!("/audit?page={page}"), None)?;
    let lines: Vec<String> = resp["entries"]
        .as_array()
        .into_iter()
        .flatten()
        .map(|e| {
            format!(
                "{:>6} {} {}",
                field(e, "index"),
                field(e, "kind"),
                &field(e, "entry_hash")[..16.min(field(e, "entry_hash").len())]
            )
        })
        .collect();
    Ok((resp, lines.join("\n")))
}

pub fn governance(ctx: &Context) -> Result<Output, CliError> {
    let g = ctx.client.get("/governance", None)?;
    let members: Vec<String> = g["members"]
        .as_array()
        .into_iter()
        .flatten()
        .map(|m| format!("  {} <{}>", field(m, "name"), field(m, "affiliation_url")))
        .collect();
    let text = format!(
        "{} ({})\ncontact: {}\nmembers:\n{}",
        field(&g, "operator_name"),
        field(&g, "model"),
        field(&g, "contact"),
        members.join("\n")
    );
    Ok((g, text))
}

/// Counts only: no text, names or paths from the corpus are printed.
pub fn corpus_ingest(dir: &Path) -> Result<Output, CliError> {
    let docs = load_corpus(dir).map_err(|e| CliError::Local(e.to_string()))?;
    let masked = mask_corpus(&docs, NameDictionary::builtin());
    let mut counts = cliox_core::analytics::MaskCounts::default();
    for m in &masked {
        counts.add(&m.mask_counts);
    }
    let dated = masked.iter().filter(|m| m.date.is_some()).count();
    let senders: std::collections::BTreeSet<_> = masked.iter().filter_map(|m| m.sender_pseudonym.as_ref()).collect();
    let doc = json!({
        "documents": masked.len(),
        "dated_documents": dated,
        "distinct_senders": senders.len(),
        "masked": counts,
    });
    let text = format!(
        "{} documents ({} dated, {} senders)\nmasked: {} ssn, {} email, {} phone, {} name, {} address",
        masked.len(),
        dated,
        senders.len(),
        counts.ssn,
        counts.email,
        counts.phone,
        counts.name,
        counts.address
    );
    Ok((doc, text))
}
