//! Core of the Clio-X compute-to-data data space.
//!
//! Archives publish sensitive document collections as priced, license-governed
//! assets. Researchers buy time-bounded access and run distant-reading jobs that
//! execute next to the data; only sanitized aggregates leave the runtime. Every
//! state change lands in a hash-chained audit log and payments settle through a
//! simulated stablecoin escrow.
//!
//! The crate is organised by component:
//!
//! * [`ledger`]: identities, balances, data NFTs, escrow, grants and the audit chain.
//! * [`catalog`]: signed asset metadata (DDOs) and keyword discovery.
//! * [`provider`]: sealed data locators, consent receipts and job authorization.
//! * [`runtime`]: the compute-to-data job lifecycle and output policy.
//! * [`analytics`]: corpus ingestion, PII masking and the distant-reading algorithms.
//! * [`market`]: the publish, purchase and compute workflow over all of the above.

pub mod analytics;
pub mod canonical;
pub mod catalog;
pub mod clock;
pub mod crypto;
pub mod ids;
pub mod ledger;
pub mod market;
pub mod provider;
pub mod runtime;

pub use canonical::{canonical_bytes, sha256_hex};
pub use clock::{Clock, ManualClock, SystemClock};
pub use crypto::{Action, Authorization, Identity, PublicIdentity, Role};
pub use ids::{Did, HexId};

pub use analytics::{AggregateResult, EmailDocument, MaskedDocument, Payload};
pub use catalog::{AssetMetadata, AssetType, Catalog, Ddo, SearchFilters, SearchHit};
pub use ledger::{AccessGrant, EscrowOrder, Ledger, LedgerEntry, OrderState};
pub use market::{Market, MarketConfig, MarketError, PayeeSplit};
pub use provider::{AuthReason, AuthorizationDecision, JobRequest, Provider, ProviderKey};
pub use runtime::{ComputeJob, JobResult, JobState, JobStatus, OutputPolicy, Runtime, RuntimeConfig};
