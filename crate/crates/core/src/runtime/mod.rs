//! Compute-to-data runtime.
//!
//! A job is submitted against a (dataset, algorithm) pair, authorized by the
//! provider, then run next to the data: the runtime alone unseals the corpus
//! location, masks every document, runs the algorithm and passes the output
//! through the [`OutputPolicy`]. Only the sanitized aggregate is stored and
//! returned. The first terminal job on an order settles its escrow.

pub mod algorithms;
pub mod policy;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use parking_lot::RwLock;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::analytics::corpus::load_corpus;
use crate::analytics::mask::{mask_corpus, total_counts, NameDictionary};
use crate::analytics::result::{AggregateResult, Provenance};
use crate::canonical::{canonical_bytes, digest_of};
use crate::catalog::{AssetType, Catalog, CatalogError, Ddo};
use crate::ids::{Did, HexId};
use crate::ledger::{AuditKind, Ledger, LedgerError, OrderState};
use crate::provider::{JobRequest, Provider, RuntimeToken};

pub use algorithms::{Algorithm, AlgorithmRegistry, Params};
pub use policy::{enforce_output_policy, OutputPolicy, PolicyViolation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum JobState {
    Submitted,
    Authorized,
    Running,
    Succeeded,
    Failed,
    Rejected,
}

impl JobState {
    pub fn is_terminal(self) -> bool {
        matches!(self, JobState::Succeeded | JobState::Failed | JobState::Rejected)
    }

    pub fn can_move_to(self, next: JobState) -> bool {
        use JobState::*;
        matches!(
            (self, next),
            (Submitted, Authorized)
                | (Submitted, Rejected)
                | (Authorized, Running)
                | (Running, Succeeded)
                | (Running, Failed)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComputeJob {
    pub job_did: Did,
    pub consumer: Did,
    pub dataset_did: Did,
    pub algorithm_did: Did,
    pub params: Params,
    pub state: JobState,
    pub reason: Option<String>,
    pub submitted_at: i64,
    pub finished_at: Option<i64>,
    pub result_digest: Option<String>,
    pub grant_id: Option<HexId>,
}

impl ComputeJob {
    fn move_to(&mut self, next: JobState) -> Result<(), RuntimeError> {
        if !self.state.can_move_to(next) {
            return Err(RuntimeError::IllegalTransition { from: self.state, to: next });
        }
        self.state = next;
        Ok(())
    }

    pub fn status(&self) -> JobStatus {
        JobStatus {
            job_did: self.job_did.clone(),
            state: self.state,
            reason: self.reason.clone(),
            finished_at: self.finished_at,
            result_digest: self.result_digest.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobStatus {
    pub job_did: Did,
    pub state: JobState,
    pub reason: Option<String>,
    pub finished_at: Option<i64>,
    pub result_digest: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobResult {
    pub job_did: Did,
    pub produced_at: i64,
    pub payload: AggregateResult,
    pub log_lines: Vec<String>,
    pub result_digest: String,
}

/// One state change, visible to the job's consumer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobEvent {
    pub seq: u64,
    pub job_did: Did,
    pub state: JobState,
    pub reason: Option<String>,
    pub at: i64,
}

#[derive(Debug, Error)]
pub enum RuntimeError {
    #[error("unknown asset {0}")]
    UnknownAsset(Did),
    #[error("asset {0} is retired")]
    AssetRetired(Did),
    #[error("asset {0} has the wrong type for this role")]
    WrongAssetType(Did),
    #[error("job parameters must include `seed`")]
    MissingSeed,
    #[error("`seed` must be an unsigned 64-bit integer")]
    InvalidSeed,
    #[error("unknown job {0}")]
    UnknownJob(Did),
    #[error("job belongs to another consumer")]
    NotYourJob,
    #[error("job has not finished")]
    NotFinished,
    #[error("job ended {0:?} and has no result")]
    NoResult(JobState),
    #[error("job cannot move from {from:?} to {to:?}")]
    IllegalTransition { from: JobState, to: JobState },
    #[error("result store: {0}")]
    ResultStore(String),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error("provider: {0}")]
    Provider(String),
}

pub type Result<T, E = RuntimeError> = std::result::Result<T, E>;

/// Why a running job failed. Messages are fixed strings: nothing from the
/// corpus or the algorithm's internals reaches the consumer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JobFailure {
    AlgorithmError,
    PolicyViolation,
    CorpusLoadError,
}

impl JobFailure {
    pub fn reason(self) -> &'static str {
        match self {
            JobFailure::AlgorithmError => "AlgorithmError: the algorithm did not complete",
            JobFailure::PolicyViolation => "PolicyViolation: the result failed the output policy",
            JobFailure::CorpusLoadError => "CorpusLoadError: the dataset could not be loaded",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RuntimeConfig {
    pub policy: OutputPolicy,
    /// Where `results/<job_did>` documents are written; memory only when unset.
    pub results_dir: Option<PathBuf>,
    /// Base for relative corpus locations.
    pub data_root: Option<PathBuf>,
}

pub struct Runtime {
    ledger: Arc<Ledger>,
    catalog: Arc<Catalog>,
    provider: Arc<Provider>,
    token: RuntimeToken,
    registry: AlgorithmRegistry,
    names: Arc<NameDictionary>,
    config: RuntimeConfig,
    jobs: RwLock<BTreeMap<Did, ComputeJob>>,
    results: RwLock<HashMap<Did, JobResult>>,
    events: RwLock<Vec<(Did, JobEvent)>>,
}

impl fmt::Debug for Runtime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Runtime")
            .field("jobs", &self.jobs.read().len())
            .field("registry", &self.registry)
            .finish_non_exhaustive()
    }
}

impl Runtime {
    pub fn new(
        ledger: Arc<Ledger>,
        catalog: Arc<Catalog>,
        provider: Arc<Provider>,
        token: RuntimeToken,
        config: RuntimeConfig,
    ) -> Self {
        Runtime {
            ledger,
            catalog,
            provider,
            token,
            registry: AlgorithmRegistry::builtin(),
            names: Arc::new(NameDictionary::builtin().clone()),
            config,
            jobs: RwLock::new(BTreeMap::new()),
            results: RwLock::new(HashMap::new()),
            events: RwLock::new(Vec::new()),
        }
    }

    pub fn with_registry(mut self, registry: AlgorithmRegistry) -> Self {
        self.registry = registry;
        self
    }

    pub fn with_names(mut self, names: NameDictionary) -> Self {
        self.names = Arc::new(names);
        self
    }

    pub fn registry(&self) -> &AlgorithmRegistry {
        &self.registry
    }

    pub fn policy(&self) -> &OutputPolicy {
        &self.config.policy
    }

    fn live_asset(&self, did: &Did, expected: AssetType) -> Result<Ddo> {
        let ddo = self.catalog.resolve(did).map_err(|e| match e {
            CatalogError::NotFound(d) => RuntimeError::UnknownAsset(d),
            _ => RuntimeError::UnknownAsset(did.clone()),
        })?;
        if ddo.retired {
            return Err(RuntimeError::AssetRetired(did.clone()));
        }
        if ddo.asset_type != expected {
            return Err(RuntimeError::WrongAssetType(did.clone()));
        }
        Ok(ddo)
    }

    fn emit(&self, job: &ComputeJob) {
        let mut events = self.events.write();
        let seq = events.len() as u64 + 1;
        let event = JobEvent {
            seq,
            job_did: job.job_did.clone(),
            state: job.state,
            reason: job.reason.clone(),
            at: self.ledger.now(),
        };
        events.push((job.consumer.clone(), event));
    }

    fn store(&self, job: ComputeJob) -> ComputeJob {
        self.emit(&job);
        self.jobs.write().insert(job.job_did.clone(), job.clone());
        job
    }

    /// Create a job, ask the provider to authorize it and return it in
    /// `Authorized` or `Rejected`.
    pub fn submit_job(&self, request: &JobRequest, signature: &str) -> Result<ComputeJob> {
        self.live_asset(&request.dataset_did, AssetType::Dataset)?;
        self.live_asset(&request.algorithm_did, AssetType::Algorithm)?;
        let seed = request.params.get("seed").ok_or(RuntimeError::MissingSeed)?;
        seed.trim().parse::<u64>().map_err(|_| RuntimeError::InvalidSeed)?;

        let mut job = ComputeJob {
            job_did: Did::new_job(),
            consumer: request.consumer.clone(),
            dataset_did: request.dataset_did.clone(),
            algorithm_did: request.algorithm_did.clone(),
            params: request.params.clone(),
            state: JobState::Submitted,
            reason: None,
            submitted_at: self.ledger.now(),
            finished_at: None,
            result_digest: None,
            grant_id: None,
        };
        self.ledger.record(
            AuditKind::JobSubmitted,
            &json!({
                "job_did": job.job_did,
                "consumer": job.consumer,
                "dataset_did": job.dataset_did,
                "algorithm_did": job.algorithm_did,
                "params": job.params,
            }),
        )?;
        self.store(job.clone());

        let decision =
            self.provider.authorize_job(request, signature).map_err(|e| RuntimeError::Provider(e.to_string()))?;
        if decision.authorized {
            job.move_to(JobState::Authorized)?;
            job.grant_id = decision.grant_id;
        } else {
            job.move_to(JobState::Rejected)?;
            job.reason = Some(decision.reason.to_string());
            job.finished_at = Some(self.ledger.now());
        }
        Ok(self.store(job))
    }

    /// Run an authorized job to completion and settle its order.
    pub fn run_job(&self, job_did: &Did) -> Result<ComputeJob> {
        let mut job = {
            let mut jobs = self.jobs.write();
            let job = jobs.get_mut(job_did).ok_or_else(|| RuntimeError::UnknownJob(job_did.clone()))?;
            job.move_to(JobState::Running)?;
            job.clone()
        };
        self.ledger.record(AuditKind::JobStarted, &json!({ "job_did": job.job_did }))?;
        self.emit(&job);

        let outcome = self.execute(&job);
        job.finished_at = Some(self.ledger.now());
        match outcome {
            Ok(result) => {
                self.persist(&result)?;
                job.move_to(JobState::Succeeded)?;
                job.result_digest = Some(result.result_digest.clone());
                self.results.write().insert(job.job_did.clone(), result);
            }
            Err(failure) => {
                job.move_to(JobState::Failed)?;
                job.reason = Some(failure.reason().to_string());
            }
        }
        self.ledger.record(
            AuditKind::JobFinished,
            &json!({
                "job_did": job.job_did,
                "state": job.state,
                "result_digest": job.result_digest,
                "reason": job.reason,
            }),
        )?;
        self.settle(&job)?;
        Ok(self.store(job))
    }

    /// Release on success, refund on failure, but only while the order is
    /// still locked: later runs on the same grant do not settle again.
    fn settle(&self, job: &ComputeJob) -> Result<()> {
        let Some(order) = job.grant_id.and_then(|g| self.ledger.grant(g)).and_then(|g| self.ledger.order(g.order_id))
        else {
            return Ok(());
        };
        if order.state != OrderState::Locked {
            return Ok(());
        }
        match job.state {
            JobState::Succeeded => {
                self.ledger.release_escrow(order.order_id)?;
            }
            JobState::Failed => {
                self.ledger.refund_escrow(order.order_id)?;
            }
            _ => {}
        }
        Ok(())
    }

    fn execute(&self, job: &ComputeJob) -> Result<JobResult, JobFailure> {
        let dataset = self.catalog.resolve(&job.dataset_did).map_err(|_| JobFailure::CorpusLoadError)?;
        let algorithm_ddo = self.catalog.resolve(&job.algorithm_did).map_err(|_| JobFailure::AlgorithmError)?;
        let algorithm_name = algorithm_ddo.builtin_algorithm().ok_or(JobFailure::AlgorithmError)?.to_string();
        let algorithm = self.registry.get(&algorithm_name).ok_or(JobFailure::AlgorithmError)?;
        let seed: u64 = job.params["seed"].trim().parse().map_err(|_| JobFailure::AlgorithmError)?;

        let locator_id = dataset.sealed_locator_id.ok_or(JobFailure::CorpusLoadError)?;
        let location =
            self.provider.unseal_for_runtime(locator_id, &self.token).map_err(|_| JobFailure::CorpusLoadError)?;
        let docs = load_corpus(self.resolve_location(&location)).map_err(|_| JobFailure::CorpusLoadError)?;
        let masked = mask_corpus(&docs, &self.names);
        drop(docs);
        let masked_spans: u64 = total_counts(&masked).values().sum();

        let params: Params =
            job.params.iter().filter(|(k, _)| *k != "seed").map(|(k, v)| (k.clone(), v.clone())).collect();
        let payload = catch_unwind(AssertUnwindSafe(|| algorithm.run(&masked, &params, seed)))
            .map_err(|_| JobFailure::AlgorithmError)?
            .map_err(|_| JobFailure::AlgorithmError)?;
        let raw = AggregateResult::new(Provenance { algorithm: algorithm_name.clone(), params, seed }, payload);
        let result = enforce_output_policy(raw, &self.config.policy).map_err(|_| JobFailure::PolicyViolation)?;

        let log_lines = vec![
            format!("loaded {} documents", masked.len()),
            format!("masked {masked_spans} PII spans"),
            format!("ran {algorithm_name} with seed {seed}"),
            format!("suppressed {} buckets below k_min {}", result.suppressed_buckets, self.config.policy.k_min),
        ];
        Ok(JobResult {
            job_did: job.job_did.clone(),
            produced_at: self.ledger.now(),
            result_digest: digest_of(&result),
            payload: result,
            log_lines,
        })
    }

    fn resolve_location(&self, location: &str) -> PathBuf {
        let path = Path::new(location);
        match &self.config.data_root {
            Some(root) if path.is_relative() => root.join(path),
            _ => path.to_path_buf(),
        }
    }

    fn persist(&self, result: &JobResult) -> Result<()> {
        let Some(dir) = &self.config.results_dir else { return Ok(()) };
        let err = |e: std::io::Error| RuntimeError::ResultStore(e.kind().to_string());
        std::fs::create_dir_all(dir).map_err(err)?;
        std::fs::write(dir.join(result.job_did.as_str()), canonical_bytes(result)).map_err(err)
    }

    pub fn job(&self, job_did: &Did) -> Result<ComputeJob> {
        self.jobs.read().get(job_did).cloned().ok_or_else(|| RuntimeError::UnknownJob(job_did.clone()))
    }

    pub fn get_status(&self, job_did: &Did) -> Result<JobStatus> {
        self.job(job_did).map(|j| j.status())
    }

    pub fn get_result(&self, job_did: &Did, consumer: &Did) -> Result<JobResult> {
        let job = self.job(job_did)?;
        if &job.consumer != consumer {
            return Err(RuntimeError::NotYourJob);
        }
        match job.state {
            JobState::Succeeded => {}
            JobState::Failed | JobState::Rejected => return Err(RuntimeError::NoResult(job.state)),
            _ => return Err(RuntimeError::NotFinished),
        }
        self.results.read().get(job_did).cloned().ok_or(RuntimeError::NotFinished)
    }

    /// Events for `consumer` with a sequence number above `since`.
    pub fn events_since(&self, consumer: &Did, since: u64) -> Vec<JobEvent> {
        self.events
            .read()
            .iter()
            .filter(|(owner, e)| e.seq > since && owner == consumer)
            .map(|(_, e)| e.clone())
            .collect()
    }

    pub fn jobs(&self) -> Vec<ComputeJob> {
        self.jobs.read().values().cloned().collect()
    }
}
