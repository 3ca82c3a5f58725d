//! Route handlers.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use axum::extract::{FromRequest, FromRequestParts, Path, Query, Request, State};
use axum::http::request::Parts;
use axum::http::StatusCode;
use axum::response::IntoResponse;
use axum::routing::{get, post};
use axum::{Json, Router};
use cliox_core::catalog::{AssetMetadata, AssetType, SearchFilters};
use cliox_core::ledger::ChainVerification;
use cliox_core::provider::consent_message;
use cliox_core::runtime::JobState;
use cliox_core::{Did, Identity, JobRequest, Role};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::ApiError;
use crate::state::{ApiSession, SharedState};

pub const AUDIT_PAGE_SIZE: usize = 100;
const DEFAULT_ACCESS_SECS: u64 = 24 * 3600;

pub fn router(state: SharedState) -> Router {
    Router::new()
        .route("/identities", post(create_identity))
        .route("/sessions", post(create_session))
        .route("/faucet", post(faucet))
        .route("/assets", post(publish).get(search))
        .route("/assets/{did}", get(show_asset))
        .route("/assets/{did}/retire", post(retire))
        .route("/consents", post(consent))
        .route("/orders", post(order))
        .route("/jobs", post(submit_job))
        .route("/jobs/{did}", get(job_status))
        .route("/jobs/{did}/result", get(job_result))
        .route("/events", get(events))
        .route("/audit", get(audit))
        .route("/audit/verify", get(audit_verify))
        .route("/governance", get(governance))
        .fallback(|| async { ApiError::not_found("no such route") })
        .with_state(state)
}

/// JSON body whose rejection uses the API error body.
pub struct Body<T>(pub T);

impl<T: DeserializeOwned, S: Send + Sync> FromRequest<S> for Body<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, ApiError> {
        Json::<T>::from_request(req, state)
            .await
            .map(|Json(v)| Body(v))
            .map_err(|e| ApiError::bad_request(e.body_text()))
    }
}

/// Query string whose rejection uses the API error body.
pub struct Q<T>(pub T);

impl<T: DeserializeOwned, S: Send + Sync> FromRequestParts<S> for Q<T> {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &S) -> Result<Self, ApiError> {
        Query::<T>::from_request_parts(parts, state)
            .await
            .map(|Query(v)| Q(v))
            .map_err(|e| ApiError::bad_request(e.body_text()))
    }
}

/// The authenticated caller. Extracted before the body so that a missing
/// or expired session fails with 401 ahead of any other check.
pub struct Caller {
    pub identity: Arc<Identity>,
    pub session: ApiSession,
}

impl FromRequestParts<SharedState> for Caller {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &SharedState) -> Result<Self, ApiError> {
        let (identity, session) = state.authenticate(&parts.headers)?;
        Ok(Caller { identity, session })
    }
}

fn parse_did(s: &str) -> Result<Did, ApiError> {
    Did::parse(s).ok_or_else(|| ApiError::bad_request("malformed DID"))
}

// ---- identities and sessions -----------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NewIdentity {
    roles: Vec<String>,
}

async fn create_identity(
    State(st): State<SharedState>,
    Body(body): Body<NewIdentity>,
) -> Result<impl IntoResponse, ApiError> {
    let roles = body
        .roles
        .iter()
        .map(|r| r.parse::<Role>().map_err(ApiError::bad_request))
        .collect::<Result<BTreeSet<Role>, _>>()?;
    let (identity, access_key) = st.create_identity(roles)?;
    let roles: Vec<&str> = identity.roles().iter().map(|r| r.as_str()).collect();
    let public_key: String = identity.public_key().iter().map(|b| format!("{b:02x}")).collect();
    Ok((
        StatusCode::CREATED,
        Json(json!({ "did": identity.did(), "public_key": public_key, "roles": roles, "access_key": access_key })),
    ))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NewSession {
    did: String,
    access_key: String,
}

async fn create_session(
    State(st): State<SharedState>,
    Body(body): Body<NewSession>,
) -> Result<impl IntoResponse, ApiError> {
    let did = Did::parse(&body.did).ok_or_else(ApiError::unauthorized)?;
    let (token, session) = st.open_session(&did, &body.access_key)?;
    Ok((
        StatusCode::CREATED,
        Json(json!({
            "session_token": token,
            "did": session.did,
            "issued_at": session.issued_at,
            "expires_at": session.expires_at,
        })),
    ))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FaucetRequest {
    amount: u64,
}

async fn faucet(
    State(st): State<SharedState>,
    caller: Caller,
    Body(body): Body<FaucetRequest>,
) -> Result<impl IntoResponse, ApiError> {
    let account = st.market.ledger.faucet(caller.identity.did(), body.amount)?;
    Ok(Json(account))
}

// ---- assets ----------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PublishRequest {
    #[serde(default = "default_asset_type")]
    asset_type: AssetType,
    name: String,
    #[serde(default)]
    description: String,
    #[serde(default)]
    license_text: String,
    #[serde(default)]
    requires_consent_ack: bool,
    price: u64,
    #[serde(default)]
    tags: Vec<String>,
    #[serde(default)]
    location: Option<String>,
}

fn default_asset_type() -> AssetType {
    AssetType::Dataset
}

async fn publish(
    State(st): State<SharedState>,
    caller: Caller,
    Body(body): Body<PublishRequest>,
) -> Result<impl IntoResponse, ApiError> {
    if body.name.trim().is_empty() {
        return Err(ApiError::bad_request("name must not be empty"));
    }
    let meta = AssetMetadata {
        asset_type: body.asset_type,
        name: body.name,
        description: body.description,
        license_text: body.license_text,
        requires_consent_ack: body.requires_consent_ack,
        price_per_access: body.price,
        tags: body.tags,
    };
    let published = st.market.publish(&caller.identity, meta, body.location.as_deref())?;
    Ok((StatusCode::CREATED, Json(published)))
}

#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct SearchQuery {
    query: String,
    #[serde(rename = "type")]
    asset_type: Option<AssetType>,
    max_price: Option<u64>,
    tag: Option<String>,
}

async fn search(State(st): State<SharedState>, Q(q): Q<SearchQuery>) -> impl IntoResponse {
    let filters = SearchFilters { asset_type: q.asset_type, max_price: q.max_price, tag: q.tag };
    let hits = st.market.catalog.search(&q.query, &filters);
    Json(json!({ "total": hits.len(), "hits": hits }))
}

async fn show_asset(State(st): State<SharedState>, Path(did): Path<String>) -> Result<impl IntoResponse, ApiError> {
    let ddo = st.market.catalog.resolve(&parse_did(&did)?)?;
    Ok(Json(ddo))
}

async fn retire(
    State(st): State<SharedState>,
    caller: Caller,
    Path(did): Path<String>,
) -> Result<impl IntoResponse, ApiError> {
    let ddo = st.market.retire(&caller.identity, &parse_did(&did)?)?;
    Ok(Json(ddo))
}

// ---- consent and purchase --------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConsentRequest {
    asset_did: String,
    /// The license digest the caller read and accepts.
    license_digest: String,
}

async fn consent(
    State(st): State<SharedState>,
    caller: Caller,
    Body(body): Body<ConsentRequest>,
) -> Result<impl IntoResponse, ApiError> {
    let did = parse_did(&body.asset_did)?;
    let me = caller.identity.did();
    let signature = caller.identity.sign(&consent_message(me, &did, &body.license_digest));
    let receipt = st.market.provider.record_consent(me, &did, &body.license_digest, &signature)?;
    Ok((StatusCode::CREATED, Json(receipt)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OrderRequest {
    dataset_did: String,
    algorithm_did: String,
    #[serde(default = "default_access_secs")]
    duration_secs: u64,
    /// Accept the current license of every asset that requires consent.
    #[serde(default)]
    accept_licenses: bool,
}

fn default_access_secs() -> u64 {
    DEFAULT_ACCESS_SECS
}

async fn order(
    State(st): State<SharedState>,
    caller: Caller,
    Body(body): Body<OrderRequest>,
) -> Result<impl IntoResponse, ApiError> {
    let me = caller.identity.did();
    let dataset = parse_did(&body.dataset_did)?;
    let algorithm = parse_did(&body.algorithm_did)?;
    if body.accept_licenses {
        for did in [&dataset, &algorithm] {
            let Ok(ddo) = st.market.catalog.resolve(did) else { continue };
            if ddo.requires_consent_ack && !st.market.provider.has_consent(me, did) {
                let signature = caller.identity.sign(&consent_message(me, did, &ddo.license_digest));
                st.market.provider.record_consent(me, did, &ddo.license_digest, &signature)?;
            }
        }
    }
    let p = st.market.purchase(me, &dataset, &algorithm, body.duration_secs)?;
    Ok((
        StatusCode::CREATED,
        Json(json!({
            "order_id": p.order.order_id,
            "grant_id": p.grant.grant_id,
            "expires_at": p.grant.expires_at,
            "amount_locked": p.order.amount_locked,
            "state": p.order.state,
        })),
    ))
}

// ---- jobs ------------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JobSubmission {
    dataset_did: String,
    algorithm_did: String,
    #[serde(default)]
    params: BTreeMap<String, Value>,
    #[serde(default)]
    seed: Option<u64>,
}

fn param_text(v: Value) -> Result<String, ApiError> {
    match v {
        Value::String(s) => Ok(s),
        Value::Number(n) => Ok(n.to_string()),
        Value::Bool(b) => Ok(b.to_string()),
        _ => Err(ApiError::bad_request("job parameters must be scalars")),
    }
}

async fn submit_job(
    State(st): State<SharedState>,
    caller: Caller,
    Body(body): Body<JobSubmission>,
) -> Result<impl IntoResponse, ApiError> {
    let mut params = body
        .params
        .into_iter()
        .map(|(k, v)| Ok((k, param_text(v)?)))
        .collect::<Result<BTreeMap<String, String>, ApiError>>()?;
    if let Some(seed) = body.seed {
        params.insert("seed".into(), seed.to_string());
    }
    let request = JobRequest {
        consumer: caller.identity.did().clone(),
        dataset_did: parse_did(&body.dataset_did)?,
        algorithm_did: parse_did(&body.algorithm_did)?,
        params,
    };
    let signature = caller.identity.sign(&request.signing_bytes());
    let runtime = st.market.runtime.clone();
    let job = tokio::task::spawn_blocking(move || runtime.submit_job(&request, &signature))
        .await
        .map_err(|_| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", "internal error"))??;

    if job.state == JobState::Rejected {
        let reason = job.reason.unwrap_or_default();
        let message = format!("job {} was not authorized", job.job_did);
        return Err(ApiError::new(StatusCode::FORBIDDEN, &reason, message));
    }

    let job_did = job.job_did.clone();
    let (runtime, workers) = (st.market.runtime.clone(), st.workers.clone());
    tokio::spawn(async move {
        let Ok(_permit) = workers.acquire_owned().await else { return };
        let did = job_did.clone();
        match tokio::task::spawn_blocking(move || runtime.run_job(&did)).await {
            Ok(Ok(done)) => tracing::info!(job = %done.job_did, state = ?done.state, "job finished"),
            Ok(Err(e)) => tracing::warn!(job = %job_did, error = %e, "job could not run"),
            Err(_) => tracing::error!(job = %job_did, "job worker panicked"),
        }
    });
    Ok((StatusCode::ACCEPTED, Json(json!({ "job_did": job.job_did, "state": job.state }))))
}

async fn job_status(
    State(st): State<SharedState>,
    caller: Caller,
    Path(did): Path<String>,
) -> Result<impl IntoResponse, ApiError> {
    let job = st.market.runtime.job(&parse_did(&did)?)?;
    if &job.consumer != caller.identity.did() {
        return Err(cliox_core::runtime::RuntimeError::NotYourJob.into());
    }
    Ok(Json(job.status()))
}

async fn job_result(
    State(st): State<SharedState>,
    caller: Caller,
    Path(did): Path<String>,
) -> Result<impl IntoResponse, ApiError> {
    let result = st.market.runtime.get_result(&parse_did(&did)?, caller.identity.did())?;
    Ok(Json(result))
}

#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct EventsQuery {
    since: u64,
}

async fn events(State(st): State<SharedState>, caller: Caller, Q(q): Q<EventsQuery>) -> impl IntoResponse {
    let events = st.market.runtime.events_since(caller.identity.did(), q.since);
    let next = events.last().map_or(q.since, |e| e.seq);
    Json(json!({ "events": events, "next_since": next, "did": caller.session.did }))
}

// ---- audit and governance --------------------------------------------------------

#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct AuditQuery {
    page: usize,
}

#[derive(Serialize)]
struct AuditPage {
    page: usize,
    page_size: usize,
    total: usize,
    entries: Vec<cliox_core::LedgerEntry>,
}

async fn audit(State(st): State<SharedState>, Q(q): Q<AuditQuery>) -> impl IntoResponse {
    let start = q.page.saturating_mul(AUDIT_PAGE_SIZE);
    Json(AuditPage {
        page: q.page,
        page_size: AUDIT_PAGE_SIZE,
        total: st.market.ledger.audit_len(),
        entries: st.market.ledger.audit_entries(start, AUDIT_PAGE_SIZE),
    })
}

async fn audit_verify(State(st): State<SharedState>) -> Json<ChainVerification> {
    Json(st.market.ledger.verify_chain())
}

async fn governance(State(st): State<SharedState>) -> impl IntoResponse {
    Json(st.config.governance.clone())
}
