//! Access-control proxy: sealed data locators, consent receipts and job
//! authorization.
//!
//! Locations are sealed with AES-256-GCM under a provider key, a fresh 96-bit
//! nonce per seal and the asset DID as associated data. Only the ciphertext
//! digest reaches the audit chain. The plaintext is released solely to the
//! co-located runtime, which proves itself with the token handed out when the
//! provider was built.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use parking_lot::RwLock;
use ring::aead::{Aad, LessSafeKey, Nonce, UnboundKey, AES_256_GCM};
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::canonical::{canonical_bytes, sha256_hex};
use crate::catalog::{Catalog, CatalogError};
use crate::ids::{random_bytes, Did, HexId};
use crate::ledger::{AccessGrant, AuditKind, Ledger, LedgerError, OrderState};

pub const KEY_LEN: usize = 32;

#[derive(Debug, Error)]
pub enum ProviderError {
    #[error("location must not be empty")]
    EmptyLocation,
    #[error("license digest does not match the asset's current license")]
    DigestMismatch,
    #[error("signature does not verify")]
    BadSignature,
    #[error("asset {0} not found")]
    NotFound(Did),
    #[error("runtime token rejected")]
    BadRuntimeToken,
    #[error("unknown locator {0}")]
    UnknownLocator(HexId),
    #[error("sealed locator failed authentication")]
    Tampered,
    #[error("provider key file: {0}")]
    KeyFile(String),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
}

pub type Result<T, E = ProviderError> = std::result::Result<T, E>;

/// Symmetric key for sealing locators.
#[derive(Clone)]
pub struct ProviderKey([u8; KEY_LEN]);

impl fmt::Debug for ProviderKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ProviderKey(..)")
    }
}

impl ProviderKey {
    pub fn generate() -> Self {
        ProviderKey(random_bytes())
    }

    pub fn from_bytes(bytes: [u8; KEY_LEN]) -> Self {
        ProviderKey(bytes)
    }

    /// Read the key at `path`, or create one there readable only by the owner.
    pub fn load_or_create(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let err = |e: std::io::Error| ProviderError::KeyFile(e.kind().to_string());
        if path.exists() {
            let bytes = std::fs::read(path).map_err(err)?;
            let bytes: [u8; KEY_LEN] =
                bytes.try_into().map_err(|_| ProviderError::KeyFile("wrong key length".into()))?;
            return Ok(ProviderKey(bytes));
        }
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(err)?;
        }
        let key = Self::generate();
        let mut options = std::fs::OpenOptions::new();
        options.write(true).create_new(true);
        #[cfg(unix)]
        std::os::unix::fs::OpenOptionsExt::mode(&mut options, 0o600);
        let mut file = options.open(path).map_err(err)?;
        std::io::Write::write_all(&mut file, &key.0).map_err(err)?;
        Ok(key)
    }
}

/// Proof that the caller is the co-located runtime. Not serializable, not printable.
pub struct RuntimeToken(String);

impl fmt::Debug for RuntimeToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("RuntimeToken(..)")
    }
}

impl RuntimeToken {
    /// A token that will not match any provider; for trust-boundary tests.
    pub fn forged(value: &str) -> Self {
        RuntimeToken(value.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SealedLocator {
    pub locator_id: HexId,
    pub ciphertext: Vec<u8>,
    pub nonce: [u8; 12],
    pub asset_did: Did,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsentReceipt {
    pub receipt_id: HexId,
    pub consumer: Did,
    pub asset_did: Did,
    pub license_digest: String,
    pub signed_at: i64,
    pub signature: String,
}

/// The bytes a consumer signs to accept an asset's license.
pub fn consent_message(consumer: &Did, asset_did: &Did, license_digest: &str) -> Vec<u8> {
    format!("{consumer}{asset_did}{license_digest}").into_bytes()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AuthReason {
    Ok,
    NoGrant,
    GrantExpired,
    GrantRevoked,
    PaymentMissing,
    ConsentMissing,
    BadIdentity,
}

impl AuthReason {
    pub fn as_str(self) -> &'static str {
        match self {
            AuthReason::Ok => "Ok",
            AuthReason::NoGrant => "NoGrant",
            AuthReason::GrantExpired => "GrantExpired",
            AuthReason::GrantRevoked => "GrantRevoked",
            AuthReason::PaymentMissing => "PaymentMissing",
            AuthReason::ConsentMissing => "ConsentMissing",
            AuthReason::BadIdentity => "BadIdentity",
        }
    }
}

impl fmt::Display for AuthReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthorizationDecision {
    pub authorized: bool,
    pub reason: AuthReason,
    pub grant_id: Option<HexId>,
}

impl AuthorizationDecision {
    fn deny(reason: AuthReason) -> Self {
        AuthorizationDecision { authorized: false, reason, grant_id: None }
    }
}

/// A consumer's request to run an algorithm over a dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobRequest {
    pub consumer: Did,
    pub dataset_did: Did,
    pub algorithm_did: Did,
    pub params: BTreeMap<String, String>,
}

impl JobRequest {
    pub fn signing_bytes(&self) -> Vec<u8> {
        canonical_bytes(self)
    }
}

pub struct Provider {
    ledger: Arc<Ledger>,
    catalog: Arc<Catalog>,
    cipher: LessSafeKey,
    runtime_token: String,
    locators: RwLock<HashMap<HexId, SealedLocator>>,
    consents: RwLock<Vec<ConsentReceipt>>,
}

impl fmt::Debug for Provider {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Provider").field("locators", &self.locators.read().len()).finish_non_exhaustive()
    }
}

impl Provider {
    /// Build a provider and the token its co-located runtime must present.
    pub fn new(ledger: Arc<Ledger>, catalog: Arc<Catalog>, key: &ProviderKey) -> (Self, RuntimeToken) {
        let unbound = UnboundKey::new(&AES_256_GCM, &key.0).expect("32-byte AES key");
        let token = hex::encode(random_bytes::<32>());
        let provider = Provider {
            ledger,
            catalog,
            cipher: LessSafeKey::new(unbound),
            runtime_token: token.clone(),
            locators: RwLock::new(HashMap::new()),
            consents: RwLock::new(Vec::new()),
        };
        (provider, RuntimeToken(token))
    }

    pub fn seal_locator(&self, location: &str, asset_did: &Did) -> Result<SealedLocator> {
        if location.is_empty() {
            return Err(ProviderError::EmptyLocation);
        }
        let nonce = random_bytes::<12>();
        let mut buf = location.as_bytes().to_vec();
        self.cipher
            .seal_in_place_append_tag(
                Nonce::assume_unique_for_key(nonce),
                Aad::from(asset_did.as_str().as_bytes()),
                &mut buf,
            )
            .expect("sealing cannot fail for in-range lengths");
        let sealed =
            SealedLocator { locator_id: HexId::random(), ciphertext: buf, nonce, asset_did: asset_did.clone() };
        self.ledger.record(
            AuditKind::LocatorSealed,
            &json!({
                "locator_id": sealed.locator_id,
                "asset_did": asset_did,
                "ciphertext_digest": sha256_hex(&sealed.ciphertext),
            }),
        )?;
        self.locators.write().insert(sealed.locator_id, sealed.clone());
        Ok(sealed)
    }

    /// Decrypt a sealed locator. Fails closed on any tampering.
    pub fn open(&self, sealed: &SealedLocator) -> Result<String> {
        let mut buf = sealed.ciphertext.clone();
        let plain = self
            .cipher
            .open_in_place(
                Nonce::assume_unique_for_key(sealed.nonce),
                Aad::from(sealed.asset_did.as_str().as_bytes()),
                &mut buf,
            )
            .map_err(|_| ProviderError::Tampered)?;
        String::from_utf8(plain.to_vec()).map_err(|_| ProviderError::Tampered)
    }

    pub fn locator(&self, locator_id: HexId) -> Option<SealedLocator> {
        self.locators.read().get(&locator_id).cloned()
    }

    pub fn unseal_for_runtime(&self, locator_id: HexId, token: &RuntimeToken) -> Result<String> {
        // Compare digests so the comparison time does not depend on a shared prefix.
        if sha256_hex(token.0.as_bytes()) != sha256_hex(self.runtime_token.as_bytes()) {
            return Err(ProviderError::BadRuntimeToken);
        }
        let sealed = self.locator(locator_id).ok_or(ProviderError::UnknownLocator(locator_id))?;
        let plain = self.open(&sealed)?;
        self.ledger.record(AuditKind::LocatorUnsealed, &json!({ "locator_id": locator_id }))?;
        Ok(plain)
    }

    pub fn record_consent(
        &self,
        consumer: &Did,
        asset_did: &Did,
        license_digest: &str,
        signature: &str,
    ) -> Result<ConsentReceipt> {
        let ddo = self.catalog.resolve(asset_did).map_err(|e| match e {
            CatalogError::NotFound(d) => ProviderError::NotFound(d),
            _ => ProviderError::NotFound(asset_did.clone()),
        })?;
        if ddo.license_digest != license_digest {
            return Err(ProviderError::DigestMismatch);
        }
        let identity = self.ledger.identity(consumer).ok_or(ProviderError::BadSignature)?;
        if !identity.verify(&consent_message(consumer, asset_did, license_digest), signature) {
            return Err(ProviderError::BadSignature);
        }
        let receipt = ConsentReceipt {
            receipt_id: HexId::random(),
            consumer: consumer.clone(),
            asset_did: asset_did.clone(),
            license_digest: license_digest.to_string(),
            signed_at: self.ledger.now(),
            signature: signature.to_string(),
        };
        self.ledger.record(AuditKind::ConsentRecorded, &receipt)?;
        self.consents.write().push(receipt.clone());
        Ok(receipt)
    }

    /// Whether `consumer` holds a receipt for the asset's current license.
    pub fn has_consent(&self, consumer: &Did, asset_did: &Did) -> bool {
        let Ok(ddo) = self.catalog.resolve(asset_did) else { return false };
        self.consents
            .read()
            .iter()
            .any(|r| &r.consumer == consumer && &r.asset_did == asset_did && r.license_digest == ddo.license_digest)
    }

    fn consent_satisfied(&self, consumer: &Did, asset_did: &Did) -> bool {
        match self.catalog.resolve(asset_did) {
            Ok(ddo) if ddo.requires_consent_ack => self.has_consent(consumer, asset_did),
            Ok(_) => true,
            Err(_) => false,
        }
    }

    fn evaluate(&self, request: &JobRequest, signature: &str) -> AuthorizationDecision {
        let signed =
            self.ledger.identity(&request.consumer).is_some_and(|id| id.verify(&request.signing_bytes(), signature));
        if !signed {
            return AuthorizationDecision::deny(AuthReason::BadIdentity);
        }

        let grants = self.ledger.grants_for(&request.consumer, &request.dataset_did, &request.algorithm_did);
        if grants.is_empty() {
            return AuthorizationDecision::deny(AuthReason::NoGrant);
        }
        let paid: Vec<&AccessGrant> = grants
            .iter()
            .filter(|g| self.ledger.order(g.order_id).is_some_and(|o| o.state != OrderState::Refunded))
            .collect();
        let Some(latest) = paid.last() else {
            return AuthorizationDecision::deny(AuthReason::PaymentMissing);
        };

        let now = self.ledger.now();
        let Some(live) = paid.iter().rev().find(|g| g.is_live(now)) else {
            let reason = if latest.revoked { AuthReason::GrantRevoked } else { AuthReason::GrantExpired };
            return AuthorizationDecision::deny(reason);
        };

        let consented = [&request.dataset_did, &request.algorithm_did]
            .into_iter()
            .all(|asset| self.consent_satisfied(&request.consumer, asset));
        if !consented {
            return AuthorizationDecision::deny(AuthReason::ConsentMissing);
        }
        AuthorizationDecision { authorized: true, reason: AuthReason::Ok, grant_id: Some(live.grant_id) }
    }

    /// Check identity, payment, grant liveness and consent, in that order.
    /// The first failure decides the reason. Every decision is audited.
    pub fn authorize_job(&self, request: &JobRequest, signature: &str) -> Result<AuthorizationDecision> {
        let decision = self.evaluate(request, signature);
        self.ledger.record(
            AuditKind::JobAuthorization,
            &json!({
                "consumer": request.consumer,
                "dataset_did": request.dataset_did,
                "algorithm_did": request.algorithm_did,
                "authorized": decision.authorized,
                "reason": decision.reason,
                "grant_id": decision.grant_id,
            }),
        )?;
        Ok(decision)
    }
}
