//! The end-to-end workflow composed from the ledger, catalog, provider and
//! runtime: publish, consent, purchase and compute.
//!
//! Identities are held by the caller (a server or a test) and sign ledger
//! actions on the owner's behalf, standing in for a browser wallet.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{asset_did, AssetMetadata, AssetType, Catalog, CatalogError, Ddo};
use crate::crypto::{Action, Authorization, Identity, Role};
use crate::ids::{Did, HexId};
use crate::ledger::{AccessGrant, EscrowOrder, Ledger, LedgerError, Payee};
use crate::provider::{Provider, ProviderError, ProviderKey};
use crate::runtime::{AlgorithmRegistry, Runtime, RuntimeConfig};

#[derive(Debug, Error)]
pub enum MarketError {
    #[error("{0}")]
    Forbidden(String),
    #[error("a dataset needs a storage location")]
    MissingLocation,
    #[error("asset metadata must not contain the storage location")]
    LocationInMetadata,
    #[error("unknown asset {0}")]
    UnknownAsset(Did),
    #[error("asset {0} is retired")]
    AssetRetired(Did),
    #[error("asset {0} has the wrong type")]
    WrongAssetType(Did),
    #[error("consent to the license of {0} is required")]
    ConsentMissing(Did),
    #[error("payee split must have four shares summing to 10000 bp")]
    BadSplit,
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error(transparent)]
    Provider(#[from] ProviderError),
}

pub type Result<T, E = MarketError> = std::result::Result<T, E>;

/// Basis-point shares for holder, AI contributor, visualization contributor
/// and runtime operator, in that order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PayeeSplit {
    pub holder: u32,
    pub ai_contributor: u32,
    pub viz_contributor: u32,
    pub runtime_operator: u32,
}

impl Default for PayeeSplit {
    fn default() -> Self {
        PayeeSplit { holder: 2500, ai_contributor: 2500, viz_contributor: 2500, runtime_operator: 2500 }
    }
}

impl PayeeSplit {
    pub fn is_valid(&self) -> bool {
        self.holder + self.ai_contributor + self.viz_contributor + self.runtime_operator == 10_000
    }
}

pub struct MarketConfig {
    pub split: PayeeSplit,
    pub runtime: RuntimeConfig,
    pub registry: AlgorithmRegistry,
}

impl Default for MarketConfig {
    fn default() -> Self {
        MarketConfig {
            split: PayeeSplit::default(),
            runtime: RuntimeConfig::default(),
            registry: AlgorithmRegistry::builtin(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Published {
    pub did: Did,
    pub nft_id: HexId,
    pub token_id: HexId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Purchase {
    pub order: EscrowOrder,
    pub grant: AccessGrant,
}

pub struct Market {
    pub ledger: Arc<Ledger>,
    pub catalog: Arc<Catalog>,
    pub provider: Arc<Provider>,
    pub runtime: Arc<Runtime>,
    viz_contributor: Did,
    runtime_operator: Did,
    split: PayeeSplit,
}

impl Market {
    /// Wire the services together. Two operator identities are created to
    /// receive the visualization and runtime shares.
    pub fn new(ledger: Arc<Ledger>, key: &ProviderKey, config: MarketConfig) -> Result<Self> {
        if !config.split.is_valid() {
            return Err(MarketError::BadSplit);
        }
        let catalog = Arc::new(Catalog::new(ledger.clone()));
        let (provider, token) = Provider::new(ledger.clone(), catalog.clone(), key);
        let provider = Arc::new(provider);
        let runtime = Runtime::new(ledger.clone(), catalog.clone(), provider.clone(), token, config.runtime)
            .with_registry(config.registry);
        let viz = ledger.create_identity([Role::VizContributor].into())?;
        let operator = ledger.create_identity([Role::Provider].into())?;
        Ok(Market {
            ledger,
            catalog,
            provider,
            runtime: Arc::new(runtime),
            viz_contributor: viz.did().clone(),
            runtime_operator: operator.did().clone(),
            split: config.split,
        })
    }

    pub fn split(&self) -> PayeeSplit {
        self.split
    }

    /// Seal the location, sign and register the DDO, mint its data NFT and
    /// create the data-token class.
    pub fn publish(&self, author: &Identity, meta: AssetMetadata, location: Option<&str>) -> Result<Published> {
        let allowed = match meta.asset_type {
            AssetType::Dataset => author.has_role(Role::Holder),
            AssetType::Algorithm => author.has_role(Role::AiContributor) || author.has_role(Role::Holder),
            AssetType::VisualizationTool => author.has_role(Role::VizContributor) || author.has_role(Role::Holder),
        };
        if !allowed {
            return Err(MarketError::Forbidden(format!("role does not permit publishing a {}", meta.asset_type)));
        }
        let location = location.map(str::trim).filter(|l| !l.is_empty());
        if meta.asset_type == AssetType::Dataset && location.is_none() {
            return Err(MarketError::MissingLocation);
        }
        if let Some(loc) = location {
            let fields = [&meta.name, &meta.description, &meta.license_text];
            if fields.into_iter().chain(&meta.tags).any(|f| f.contains(loc)) {
                return Err(MarketError::LocationInMetadata);
            }
        }
        if self.catalog.find_live(author.did(), &meta.name).is_some() {
            return Err(CatalogError::DuplicateName(meta.name).into());
        }

        let created_at = self.ledger.now();
        let did = asset_did(author.did(), &meta.name, created_at);
        let locator = match location {
            Some(loc) => Some(self.provider.seal_locator(loc, &did)?.locator_id),
            None => None,
        };
        let price = meta.price_per_access;
        let ddo = Ddo::build(author, meta, created_at, locator);
        self.catalog.register_asset(ddo)?;

        let mint = Action::MintDataNft { owner: author.did().clone(), asset_did: did.clone() };
        let nft = self.ledger.mint_data_nft(author.did(), &did, &self.authorize(author, &mint))?;
        let create = Action::CreateDataToken { nft_id: nft.nft_id, price_per_access: price };
        let token = self.ledger.create_data_token(nft.nft_id, price, &self.authorize(author, &create))?;
        Ok(Published { did, nft_id: nft.nft_id, token_id: token.token_id })
    }

    /// Retire an asset on behalf of its owner.
    pub fn retire(&self, owner: &Identity, did: &Did) -> Result<Ddo> {
        let action = Action::RetireAsset { asset_did: did.clone() };
        Ok(self.catalog.retire_asset(did, &self.authorize(owner, &action))?)
    }

    /// Sign `action` with the identity's next nonce.
    pub fn authorize(&self, identity: &Identity, action: &Action) -> Authorization {
        let nonce = self.ledger.next_nonce(identity.did()).unwrap_or(0);
        Authorization::sign(identity, nonce, action)
    }

    fn live(&self, did: &Did, expected: AssetType) -> Result<Ddo> {
        let ddo = self.catalog.resolve(did).map_err(|_| MarketError::UnknownAsset(did.clone()))?;
        if ddo.retired {
            return Err(MarketError::AssetRetired(did.clone()));
        }
        if ddo.asset_type != expected {
            return Err(MarketError::WrongAssetType(did.clone()));
        }
        Ok(ddo)
    }

    /// Payees for a (dataset, algorithm) pair: the two NFT owners and the
    /// two operators.
    pub fn payees(&self, dataset: &Ddo, algorithm: &Ddo) -> Vec<Payee> {
        let owner = |d: &Ddo| self.ledger.nft_for_asset(&d.did).map_or_else(|| d.author.clone(), |n| n.owner);
        vec![
            Payee::new(owner(dataset), self.split.holder),
            Payee::new(owner(algorithm), self.split.ai_contributor),
            Payee::new(self.viz_contributor.clone(), self.split.viz_contributor),
            Payee::new(self.runtime_operator.clone(), self.split.runtime_operator),
        ]
    }

    /// Lock the combined price in escrow (or issue a free order) and grant
    /// access for `duration_secs`. Consent must already be on record for
    /// every asset that asks for it.
    pub fn purchase(
        &self,
        consumer: &Did,
        dataset_did: &Did,
        algorithm_did: &Did,
        duration_secs: u64,
    ) -> Result<Purchase> {
        let dataset = self.live(dataset_did, AssetType::Dataset)?;
        let algorithm = self.live(algorithm_did, AssetType::Algorithm)?;
        for ddo in [&dataset, &algorithm] {
            if ddo.requires_consent_ack && !self.provider.has_consent(consumer, &ddo.did) {
                return Err(MarketError::ConsentMissing(ddo.did.clone()));
            }
        }
        let amount = dataset.price_per_access + algorithm.price_per_access;
        let order = if amount == 0 {
            self.ledger.issue_free_order(consumer, dataset_did, algorithm_did)?
        } else {
            self.ledger.lock_escrow(consumer, dataset_did, algorithm_did, amount, self.payees(&dataset, &algorithm))?
        };
        let grant = self.ledger.grant_access(order.order_id, duration_secs)?;
        Ok(Purchase { order, grant })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::ManualClock;
    use crate::ledger::OrderState;
    use crate::provider::consent_message;

    fn market() -> Market {
        let ledger = Arc::new(Ledger::in_memory(Arc::new(ManualClock::new(100))));
        Market::new(ledger, &ProviderKey::generate(), MarketConfig::default()).unwrap()
    }

    fn meta(asset_type: AssetType, name: &str, price: u64, consent: bool) -> AssetMetadata {
        AssetMetadata {
            asset_type,
            name: name.into(),
            description: "Enron emails".into(),
            license_text: "research only".into(),
            requires_consent_ack: consent,
            price_per_access: price,
            tags: vec!["builtin:eda".into()],
        }
    }

    #[test]
    fn publish_flow_writes_all_four_records() {
        let m = market();
        let holder = m.ledger.create_identity([Role::Holder].into()).unwrap();
        let before = m.ledger.audit_len();
        let p = m.publish(&holder, meta(AssetType::Dataset, "Enron emails", 5000, false), Some("maildir")).unwrap();
        assert_eq!(m.ledger.audit_len() - before, 4);
        assert_eq!(m.ledger.nft(p.nft_id).unwrap().owner, *holder.did());
        assert_eq!(m.ledger.token_for_nft(p.nft_id).unwrap().price_per_access, 5000);
        assert!(matches!(
            m.publish(&holder, meta(AssetType::Dataset, "Enron emails", 5000, false), Some("maildir")),
            Err(MarketError::Catalog(CatalogError::DuplicateName(_)))
        ));
    }

    #[test]
    fn publish_rejections() {
        let m = market();
        let holder = m.ledger.create_identity([Role::Holder].into()).unwrap();
        let consumer = m.ledger.create_identity([Role::Consumer].into()).unwrap();
        let d = meta(AssetType::Dataset, "x", 1, false);
        assert!(matches!(m.publish(&consumer, d.clone(), Some("p")), Err(MarketError::Forbidden(_))));
        assert!(matches!(m.publish(&holder, d.clone(), None), Err(MarketError::MissingLocation)));
        assert!(matches!(m.publish(&holder, d, Some("Enron")), Err(MarketError::LocationInMetadata)));
        assert_eq!(m.catalog.len(), 0);
    }

    #[test]
    fn purchase_splits_four_ways_and_needs_consent() {
        let m = market();
        let holder = m.ledger.create_identity([Role::Holder].into()).unwrap();
        let ai = m.ledger.create_identity([Role::AiContributor].into()).unwrap();
        let consumer = m.ledger.create_identity([Role::Consumer].into()).unwrap();
        let data = m.publish(&holder, meta(AssetType::Dataset, "d", 5000, true), Some("loc")).unwrap();
        let algo = m.publish(&ai, meta(AssetType::Algorithm, "a", 1000, false), None).unwrap();
        m.ledger.faucet(consumer.did(), 20_000).unwrap();

        assert!(matches!(m.purchase(consumer.did(), &data.did, &algo.did, 60), Err(MarketError::ConsentMissing(_))));
        let ddo = m.catalog.resolve(&data.did).unwrap();
        let msg = consent_message(consumer.did(), &data.did, &ddo.license_digest);
        m.provider.record_consent(consumer.did(), &data.did, &ddo.license_digest, &consumer.sign(&msg)).unwrap();

        let p = m.purchase(consumer.did(), &data.did, &algo.did, 60).unwrap();
        assert_eq!(p.order.amount_locked, 6000);
        assert_eq!(p.order.payees.len(), 4);
        assert_eq!(p.order.payees[0].did, *holder.did());
        assert_eq!(p.order.payees[1].did, *ai.did());
        assert_eq!(m.ledger.account(consumer.did()).unwrap().balance, 14_000);
        assert!(matches!(m.purchase(consumer.did(), &algo.did, &data.did, 60), Err(MarketError::WrongAssetType(_))));
    }

    #[test]
    fn free_assets_need_no_balance() {
        let m = market();
        let holder = m.ledger.create_identity([Role::Holder].into()).unwrap();
        let consumer = m.ledger.create_identity([Role::Consumer].into()).unwrap();
        let data = m.publish(&holder, meta(AssetType::Dataset, "d", 0, false), Some("loc")).unwrap();
        let algo = m.publish(&holder, meta(AssetType::Algorithm, "a", 0, false), None).unwrap();
        let p = m.purchase(consumer.did(), &data.did, &algo.did, 60).unwrap();
        assert_eq!(p.order.state, OrderState::Released);
        m.retire(&holder, &data.did).unwrap();
        assert!(matches!(m.purchase(consumer.did(), &data.did, &algo.did, 60), Err(MarketError::AssetRetired(_))));
    }
}
