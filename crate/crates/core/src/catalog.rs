//! Signed asset metadata (DDOs) and keyword discovery.
//!
//! A DDO is signed by its author over its canonical form with `signature` and
//! `retired` removed; retirement is a soft-delete recorded in the audit chain,
//! so it does not need a fresh author signature.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use parking_lot::RwLock;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::canonical::{canonical_bytes, digest_of, sha256_hex};
use crate::crypto::{Action, Authorization, Identity};
use crate::ids::{Did, HexId};
use crate::ledger::{AuditKind, Ledger, LedgerError};

pub const SNIPPET_CHARS: usize = 160;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssetType {
    Dataset,
    Algorithm,
    VisualizationTool,
}

impl AssetType {
    pub fn as_str(self) -> &'static str {
        match self {
            AssetType::Dataset => "dataset",
            AssetType::Algorithm => "algorithm",
            AssetType::VisualizationTool => "visualization_tool",
        }
    }
}

impl fmt::Display for AssetType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AssetType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dataset" => Ok(AssetType::Dataset),
            "algorithm" => Ok(AssetType::Algorithm),
            "visualization_tool" => Ok(AssetType::VisualizationTool),
            other => Err(format!("unknown asset type `{other}`")),
        }
    }
}

/// Everything a publisher supplies; the DID, digest and signature are derived.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssetMetadata {
    pub asset_type: AssetType,
    pub name: String,
    pub description: String,
    pub license_text: String,
    pub requires_consent_ack: bool,
    pub price_per_access: u64,
    #[serde(default)]
    pub tags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ddo {
    pub did: Did,
    pub asset_type: AssetType,
    pub name: String,
    pub description: String,
    pub author: Did,
    pub license_text: String,
    pub license_digest: String,
    pub requires_consent_ack: bool,
    pub price_per_access: u64,
    pub tags: Vec<String>,
    pub created_at: i64,
    pub sealed_locator_id: Option<HexId>,
    pub signature: String,
    pub retired: bool,
}

/// `did:cliox:` + hex(SHA-256(author ‖ name ‖ created_at)[..20]).
pub fn asset_did(author: &Did, name: &str, created_at: i64) -> Did {
    Did::derive(format!("{author}{name}{created_at}").as_bytes())
}

pub fn license_digest(license_text: &str) -> String {
    sha256_hex(license_text.as_bytes())
}

impl Ddo {
    /// Build and sign a DDO for `author`.
    pub fn build(author: &Identity, meta: AssetMetadata, created_at: i64, sealed_locator_id: Option<HexId>) -> Self {
        let mut ddo = Ddo {
            did: asset_did(author.did(), &meta.name, created_at),
            asset_type: meta.asset_type,
            license_digest: license_digest(&meta.license_text),
            name: meta.name,
            description: meta.description,
            author: author.did().clone(),
            license_text: meta.license_text,
            requires_consent_ack: meta.requires_consent_ack,
            price_per_access: meta.price_per_access,
            tags: meta.tags,
            created_at,
            sealed_locator_id,
            signature: String::new(),
            retired: false,
        };
        ddo.sign(author);
        ddo
    }

    /// The bytes the author signs.
    pub fn signing_bytes(&self) -> Vec<u8> {
        let mut value = serde_json::to_value(self).expect("DDO serializes");
        if let Value::Object(map) = &mut value {
            map.remove("signature");
            map.remove("retired");
        }
        canonical_bytes(&value)
    }

    pub fn sign(&mut self, author: &Identity) {
        self.signature = author.sign(&self.signing_bytes());
    }

    pub fn canonical_bytes(&self) -> Vec<u8> {
        canonical_bytes(self)
    }

    pub fn digest(&self) -> String {
        digest_of(self)
    }

    /// The built-in algorithm named by a `builtin:<name>` tag, if any.
    pub fn builtin_algorithm(&self) -> Option<&str> {
        self.tags.iter().find_map(|t| t.strip_prefix("builtin:"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchHit {
    pub did: Did,
    pub name: String,
    pub asset_type: AssetType,
    pub price_per_access: u64,
    pub snippet: String,
    pub score: u32,
    #[serde(skip)]
    created_at: i64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchFilters {
    pub asset_type: Option<AssetType>,
    pub max_price: Option<u64>,
    pub tag: Option<String>,
}

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("signature does not verify against the author's key")]
    BadSignature,
    #[error("asset {0} is already registered")]
    DuplicateDid(Did),
    #[error("an asset named `{0}` by this author is already live")]
    DuplicateName(String),
    #[error("a dataset needs a sealed locator")]
    MissingLocator,
    #[error("asset DID does not match its author, name and creation time")]
    DidMismatch,
    #[error("license digest does not match the license text")]
    LicenseDigestMismatch,
    #[error("metadata must not contain a data location")]
    LocationInMetadata,
    #[error("unknown author {0}")]
    UnknownAuthor(Did),
    #[error("asset {0} not found")]
    NotFound(Did),
    #[error("caller does not own the asset")]
    NotOwner,
    #[error("asset {0} is retired")]
    Retired(Did),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
}

pub type Result<T, E = CatalogError> = std::result::Result<T, E>;

/// DDOs must not carry URL-shaped references to raw storage.
fn has_location_url(ddo: &Ddo) -> bool {
    let text = String::from_utf8_lossy(&ddo.canonical_bytes()).to_lowercase();
    text.contains("file:")
}

#[derive(Debug)]
pub struct Catalog {
    ledger: Arc<Ledger>,
    assets: RwLock<BTreeMap<Did, Ddo>>,
}

impl Catalog {
    pub fn new(ledger: Arc<Ledger>) -> Self {
        Catalog { ledger, assets: RwLock::new(BTreeMap::new()) }
    }

    fn check_signed(&self, ddo: &Ddo) -> Result<()> {
        let author =
            self.ledger.identity(&ddo.author).ok_or_else(|| CatalogError::UnknownAuthor(ddo.author.clone()))?;
        if !author.verify(&ddo.signing_bytes(), &ddo.signature) {
            return Err(CatalogError::BadSignature);
        }
        if ddo.license_digest != license_digest(&ddo.license_text) {
            return Err(CatalogError::LicenseDigestMismatch);
        }
        if ddo.asset_type == AssetType::Dataset && ddo.sealed_locator_id.is_none() {
            return Err(CatalogError::MissingLocator);
        }
        if has_location_url(ddo) {
            return Err(CatalogError::LocationInMetadata);
        }
        Ok(())
    }

    pub fn register_asset(&self, ddo: Ddo) -> Result<Did> {
        self.check_signed(&ddo)?;
        if ddo.did != asset_did(&ddo.author, &ddo.name, ddo.created_at) {
            return Err(CatalogError::DidMismatch);
        }
        let mut assets = self.assets.write();
        if assets.contains_key(&ddo.did) {
            return Err(CatalogError::DuplicateDid(ddo.did));
        }
        if assets.values().any(|d| !d.retired && d.author == ddo.author && d.name == ddo.name) {
            return Err(CatalogError::DuplicateName(ddo.name));
        }
        let mut ddo = ddo;
        ddo.retired = false;
        self.ledger.record(
            AuditKind::AssetRegistered,
            &json!({ "did": ddo.did, "asset_type": ddo.asset_type, "ddo_digest": ddo.digest() }),
        )?;
        let did = ddo.did.clone();
        assets.insert(did.clone(), ddo);
        Ok(did)
    }

    /// Replace a live asset's DDO with a re-signed revision by the same author.
    pub fn revise_asset(&self, ddo: Ddo) -> Result<Ddo> {
        self.check_signed(&ddo)?;
        let mut assets = self.assets.write();
        let current = assets.get(&ddo.did).ok_or_else(|| CatalogError::NotFound(ddo.did.clone()))?;
        if current.retired {
            return Err(CatalogError::Retired(ddo.did));
        }
        if current.author != ddo.author || current.name != ddo.name || current.created_at != ddo.created_at {
            return Err(CatalogError::DidMismatch);
        }
        self.ledger.record(
            AuditKind::AssetRevised,
            &json!({ "did": ddo.did, "ddo_digest": ddo.digest(), "license_digest": ddo.license_digest }),
        )?;
        assets.insert(ddo.did.clone(), ddo.clone());
        Ok(ddo)
    }

    pub fn resolve(&self, did: &Did) -> Result<Ddo> {
        self.assets.read().get(did).cloned().ok_or_else(|| CatalogError::NotFound(did.clone()))
    }

    /// Resolve and require the asset to be live.
    pub fn resolve_live(&self, did: &Did) -> Result<Ddo> {
        let ddo = self.resolve(did)?;
        if ddo.retired {
            return Err(CatalogError::Retired(did.clone()));
        }
        Ok(ddo)
    }

    /// The live asset `author` published under `name`, if any.
    pub fn find_live(&self, author: &Did, name: &str) -> Option<Ddo> {
        self.assets.read().values().find(|d| !d.retired && &d.author == author && d.name == name).cloned()
    }

    pub fn len(&self) -> usize {
        self.assets.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn all(&self) -> Vec<Ddo> {
        self.assets.read().values().cloned().collect()
    }

    /// Retire an asset. The signer must own the asset's data NFT, or be its
    /// author when no NFT was minted.
    pub fn retire_asset(&self, did: &Did, auth: &Authorization) -> Result<Ddo> {
        let mut assets = self.assets.write();
        let ddo = assets.get(did).ok_or_else(|| CatalogError::NotFound(did.clone()))?;
        let owner = self.ledger.nft_for_asset(did).map_or_else(|| ddo.author.clone(), |n| n.owner);
        if auth.signer != owner {
            return Err(CatalogError::NotOwner);
        }
        let action = Action::RetireAsset { asset_did: did.clone() };
        self.ledger.apply_signed(auth, &action, AuditKind::AssetRetired, &json!({ "did": did }))?;
        let ddo = assets.get_mut(did).expect("checked");
        ddo.retired = true;
        Ok(ddo.clone())
    }

    /// Keyword search over name, description and tags.
    ///
    /// Each distinct query term scores 2 when found in the name, otherwise 1
    /// when found in the description or a tag. Hits need a positive score; an
    /// empty query lists every live asset by recency.
    pub fn search(&self, query: &str, filters: &SearchFilters) -> Vec<SearchHit> {
        let terms: BTreeSet<String> = query.split_whitespace().map(str::to_lowercase).collect();
        let assets = self.assets.read();
        let mut hits: Vec<SearchHit> = assets
            .values()
            .filter(|d| !d.retired)
            .filter(|d| filters.asset_type.is_none_or(|t| t == d.asset_type))
            .filter(|d| filters.max_price.is_none_or(|p| d.price_per_access <= p))
            .filter(|d| filters.tag.as_ref().is_none_or(|t| d.tags.iter().any(|x| x.eq_ignore_ascii_case(t))))
            .filter_map(|d| {
                let score = score(d, &terms);
                (terms.is_empty() || score > 0).then(|| SearchHit {
                    did: d.did.clone(),
                    name: d.name.clone(),
                    asset_type: d.asset_type,
                    price_per_access: d.price_per_access,
                    snippet: d.description.chars().take(SNIPPET_CHARS).collect(),
                    score,
                    created_at: d.created_at,
                })
            })
            .collect();
        hits.sort_by(|a, b| {
            b.score.cmp(&a.score).then_with(|| b.created_at.cmp(&a.created_at)).then_with(|| a.did.cmp(&b.did))
        });
        hits
    }
}

fn score(ddo: &Ddo, terms: &BTreeSet<String>) -> u32 {
    let name = ddo.name.to_lowercase();
    let description = ddo.description.to_lowercase();
    let tags: Vec<String> = ddo.tags.iter().map(|t| t.to_lowercase()).collect();
    terms
        .iter()
        .map(|t| {
            if name.contains(t.as_str()) {
                2
            } else if description.contains(t.as_str()) || tags.iter().any(|x| x.contains(t.as_str())) {
                1
            } else {
                0
            }
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::ManualClock;
    use crate::crypto::Role;

    fn setup() -> (Arc<Ledger>, Catalog, Identity) {
        let ledger = Arc::new(Ledger::in_memory(Arc::new(ManualClock::new(1_000))));
        let holder = ledger.create_identity([Role::Holder].into()).unwrap();
        let catalog = Catalog::new(ledger.clone());
        (ledger, catalog, holder)
    }

    fn meta(name: &str, description: &str) -> AssetMetadata {
        AssetMetadata {
            asset_type: AssetType::Dataset,
            name: name.into(),
            description: description.into(),
            license_text: "research use only".into(),
            requires_consent_ack: true,
            price_per_access: 5_000,
            tags: vec!["email".into()],
        }
    }

    fn dataset(holder: &Identity, name: &str, description: &str, at: i64) -> Ddo {
        Ddo::build(holder, meta(name, description), at, Some(HexId::random()))
    }

    #[test]
    fn register_and_resolve_round_trip() {
        let (_, catalog, holder) = setup();
        let ddo = dataset(&holder, "Enron emails", "Corporate mail archive", 10);
        let did = catalog.register_asset(ddo.clone()).unwrap();
        let back = catalog.resolve(&did).unwrap();
        assert_eq!(back.canonical_bytes(), ddo.canonical_bytes());
        assert!(matches!(catalog.register_asset(ddo), Err(CatalogError::DuplicateDid(_))));
        assert!(matches!(catalog.resolve(&Did::derive(b"x")), Err(CatalogError::NotFound(_))));
    }

    #[test]
    fn did_is_derived_from_author_name_and_time() {
        let (_, _, holder) = setup();
        let ddo = dataset(&holder, "Enron emails", "", 42);
        let expected = &sha256_hex(format!("{}Enron emails42", holder.did()).as_bytes())[..40];
        assert_eq!(ddo.did.as_str(), format!("did:cliox:{expected}"));
    }

    #[test]
    fn altered_description_fails_signature() {
        let (_, catalog, holder) = setup();
        let mut ddo = dataset(&holder, "Enron emails", "Corporate mail archive", 10);
        ddo.description.replace_range(0..1, "K");
        assert!(matches!(catalog.register_asset(ddo), Err(CatalogError::BadSignature)));
    }

    #[test]
    fn dataset_needs_locator_and_no_file_urls() {
        let (_, catalog, holder) = setup();
        let ddo = Ddo::build(&holder, meta("a", "b"), 1, None);
        assert!(matches!(catalog.register_asset(ddo), Err(CatalogError::MissingLocator)));
        let ddo = dataset(&holder, "a", "stored at file:///srv/corpus", 1);
        assert!(matches!(catalog.register_asset(ddo), Err(CatalogError::LocationInMetadata)));
    }

    #[test]
    fn same_name_twice_is_a_conflict() {
        let (_, catalog, holder) = setup();
        catalog.register_asset(dataset(&holder, "Enron emails", "", 1)).unwrap();
        let again = dataset(&holder, "Enron emails", "", 2);
        assert!(matches!(catalog.register_asset(again), Err(CatalogError::DuplicateName(_))));
    }

    #[test]
    fn search_scores_and_orders() {
        let (_, catalog, holder) = setup();
        let a = catalog.register_asset(dataset(&holder, "Enron emails", "Corporate mail", 1)).unwrap();
        let b = catalog.register_asset(dataset(&holder, "Mail archive", "Letters about enron", 2)).unwrap();
        let c = catalog.register_asset(dataset(&holder, "Diaries", "Private notes", 3)).unwrap();

        let hits = catalog.search("ENRON", &SearchFilters::default());
        assert_eq!(hits.iter().map(|h| (&h.did, h.score)).collect::<Vec<_>>(), vec![(&a, 2), (&b, 1)]);
        assert!(catalog.search("zzzz-nomatch", &SearchFilters::default()).is_empty());

        let all = catalog.search("", &SearchFilters::default());
        assert_eq!(all.iter().map(|h| &h.did).collect::<Vec<_>>(), vec![&c, &b, &a]);

        let cheap = SearchFilters { max_price: Some(10), ..Default::default() };
        assert!(catalog.search("", &cheap).is_empty());
    }

    #[test]
    fn snippet_is_bounded() {
        let (_, catalog, holder) = setup();
        catalog.register_asset(dataset(&holder, "x", &"é".repeat(500), 1)).unwrap();
        let hit = &catalog.search("x", &SearchFilters::default())[0];
        assert_eq!(hit.snippet.chars().count(), SNIPPET_CHARS);
    }

    #[test]
    fn retirement_requires_owner() {
        let (ledger, catalog, holder) = setup();
        let other = ledger.create_identity([Role::Consumer].into()).unwrap();
        let did = catalog.register_asset(dataset(&holder, "Enron emails", "", 1)).unwrap();
        let action = Action::RetireAsset { asset_did: did.clone() };

        let bad = Authorization::sign(&other, 1, &action);
        assert!(matches!(catalog.retire_asset(&did, &bad), Err(CatalogError::NotOwner)));

        let ok = Authorization::sign(&holder, 1, &action);
        assert!(catalog.retire_asset(&did, &ok).unwrap().retired);
        assert!(catalog.search("enron", &SearchFilters::default()).is_empty());
        assert!(catalog.resolve(&did).unwrap().retired);
        assert!(matches!(catalog.retire_asset(&did, &ok), Err(CatalogError::Ledger(LedgerError::StaleNonce { .. }))));
    }

    #[test]
    fn revision_updates_license_digest() {
        let (_, catalog, holder) = setup();
        let mut ddo = dataset(&holder, "Enron emails", "", 1);
        let did = catalog.register_asset(ddo.clone()).unwrap();
        ddo.license_text.push('!');
        ddo.license_digest = license_digest(&ddo.license_text);
        ddo.sign(&holder);
        catalog.revise_asset(ddo.clone()).unwrap();
        assert_eq!(catalog.resolve(&did).unwrap().license_digest, ddo.license_digest);
    }
}
