//! Shared server state: the market, server-held wallets and sessions.
//!
//! Identities live on the server and sign on their owner's behalf. A client
//! proves ownership with the access key returned once at creation; only its
//! SHA-256 digest is kept. Session tokens are stored the same way.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use axum::http::HeaderMap;
use cliox_core::ids::random_bytes;
use cliox_core::market::{Market, MarketConfig};
use cliox_core::runtime::{OutputPolicy, RuntimeConfig};
use cliox_core::{sha256_hex, Clock, Did, Identity, Ledger, ProviderKey, Role};
use parking_lot::RwLock;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tokio::sync::Semaphore;

use crate::config::PortalConfig;
use crate::error::ApiError;

#[derive(Debug, Error)]
pub enum StartupError {
    #[error("cannot prepare data directory: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Ledger(#[from] cliox_core::ledger::LedgerError),
    #[error(transparent)]
    Provider(#[from] cliox_core::provider::ProviderError),
    #[error(transparent)]
    Market(#[from] cliox_core::MarketError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiSession {
    pub did: Did,
    pub issued_at: i64,
    pub expires_at: i64,
}

struct Wallet {
    identity: Arc<Identity>,
    access_key_digest: String,
}

pub struct AppState {
    pub market: Market,
    pub config: PortalConfig,
    pub workers: Arc<Semaphore>,
    wallets: RwLock<HashMap<Did, Wallet>>,
    sessions: RwLock<HashMap<String, ApiSession>>,
}

pub type SharedState = Arc<AppState>;

fn secret() -> String {
    cliox_core::ids::HexId::from_bytes(random_bytes::<16>()).to_string()
        + &cliox_core::ids::HexId::from_bytes(random_bytes::<16>()).to_string()
}

impl AppState {
    pub fn new(config: PortalConfig, clock: Arc<dyn Clock>) -> Result<Self, StartupError> {
        let (ledger, key, results_dir) = match &config.data.dir {
            Some(dir) => {
                std::fs::create_dir_all(dir)?;
                let ledger = Ledger::persistent(dir.join("audit.log"), clock)?;
                let key = ProviderKey::load_or_create(dir.join("provider.key"))?;
                (ledger, key, Some(dir.join("results")))
            }
            None => (Ledger::in_memory(clock), ProviderKey::generate(), None),
        };
        let runtime = RuntimeConfig {
            policy: OutputPolicy { k_min: config.runtime.k_min, max_terms_per_list: config.runtime.max_terms_per_list },
            results_dir,
            data_root: config.data.corpus_root.clone(),
        };
        let market_config = MarketConfig { split: config.split, runtime, ..MarketConfig::default() };
        let market = Market::new(Arc::new(ledger), &key, market_config)?;
        Ok(AppState {
            market,
            workers: Arc::new(Semaphore::new(config.runtime.workers)),
            config,
            wallets: RwLock::new(HashMap::new()),
            sessions: RwLock::new(HashMap::new()),
        })
    }

    /// Register a new identity and return it with its one-time access key.
    pub fn create_identity(&self, roles: BTreeSet<Role>) -> Result<(Arc<Identity>, String), ApiError> {
        let identity = Arc::new(self.market.ledger.create_identity(roles)?);
        let access_key = secret();
        let wallet = Wallet { identity: identity.clone(), access_key_digest: sha256_hex(access_key.as_bytes()) };
        self.wallets.write().insert(identity.did().clone(), wallet);
        Ok((identity, access_key))
    }

    pub fn open_session(&self, did: &Did, access_key: &str) -> Result<(String, ApiSession), ApiError> {
        let known =
            self.wallets.read().get(did).is_some_and(|w| w.access_key_digest == sha256_hex(access_key.as_bytes()));
        if !known {
            return Err(ApiError::unauthorized());
        }
        let now = self.market.ledger.now();
        let ttl = i64::try_from(self.config.sessions.ttl_secs).unwrap_or(i64::MAX);
        let session = ApiSession { did: did.clone(), issued_at: now, expires_at: now.saturating_add(ttl) };
        self.market.ledger.record(cliox_core::ledger::AuditKind::SessionOpened, &session)?;
        let token = secret();
        self.sessions.write().insert(sha256_hex(token.as_bytes()), session.clone());
        Ok((token, session))
    }

    /// Resolve the bearer token in `headers` to a live session and its identity.
    pub fn authenticate(&self, headers: &HeaderMap) -> Result<(Arc<Identity>, ApiSession), ApiError> {
        let token = headers
            .get(axum::http::header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .ok_or_else(ApiError::unauthorized)?;
        let session = self
            .sessions
            .read()
            .get(&sha256_hex(token.trim().as_bytes()))
            .cloned()
            .ok_or_else(ApiError::unauthorized)?;
        if self.market.ledger.now() >= session.expires_at {
            return Err(ApiError::unauthorized());
        }
        let identity =
            self.wallets.read().get(&session.did).map(|w| w.identity.clone()).ok_or_else(ApiError::unauthorized)?;
        Ok((identity, session))
    }
}
