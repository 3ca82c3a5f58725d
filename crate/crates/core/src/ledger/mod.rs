//! Simulated settlement and registry layer.
//!
//! Holds identities, euro-e balances (integer cents), data NFTs, data-token
//! classes, escrow orders and access grants. Every mutation goes through one
//! write lock and appends to the audit chain before state changes become
//! visible, so a failed append leaves state untouched.

pub mod audit;
pub mod escrow;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;
use std::sync::Arc;

use parking_lot::RwLock;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::canonical::canonical_string;
use crate::clock::Clock;
use crate::crypto::{Action, Authorization, Identity, PublicIdentity, Role};
use crate::ids::{Did, HexId};

pub use audit::{AuditError, AuditKind, AuditLog, ChainVerification, LedgerEntry};
pub use escrow::Payee;

#[derive(Debug, thiserror::Error)]
pub enum LedgerError {
    #[error("an identity needs at least one role")]
    EmptyRoles,
    #[error("unknown identity {0}")]
    UnknownIdentity(Did),
    #[error("identity {0} already registered")]
    DuplicateIdentity(Did),
    #[error("amount must be greater than zero")]
    ZeroAmount,
    #[error("insufficient funds: need {needed}, spendable {available}")]
    InsufficientFunds { needed: u64, available: u64 },
    #[error("asset {0} already has a data NFT")]
    DuplicateAsset(Did),
    #[error("signature does not verify")]
    BadSignature,
    #[error("nonce {got} is not above the last used nonce {last}")]
    StaleNonce { got: u64, last: u64 },
    #[error("unknown data NFT {0}")]
    UnknownNft(HexId),
    #[error("caller does not own the data NFT")]
    NotOwner,
    #[error("data NFT {0} already has a token class")]
    DuplicateTokenClass(HexId),
    #[error("payee shares must be non-empty and sum to 10000 bp")]
    BadSplit,
    #[error("unknown order {0}")]
    UnknownOrder(HexId),
    #[error("order {0} is not locked")]
    NotLocked(HexId),
    #[error("unknown grant {0}")]
    UnknownGrant(HexId),
    #[error(transparent)]
    Audit(#[from] AuditError),
}

pub type Result<T, E = LedgerError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Account {
    pub did: Did,
    /// Spendable euro-e minor units. Locked escrow is already deducted.
    pub balance: u64,
    pub nonce: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataNft {
    pub nft_id: HexId,
    pub owner: Did,
    pub asset_did: Did,
    pub minted_at: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataTokenClass {
    pub token_id: HexId,
    pub nft_id: HexId,
    pub price_per_access: u64,
    pub total_minted: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrderState {
    Locked,
    Released,
    Refunded,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EscrowOrder {
    pub order_id: HexId,
    pub buyer: Did,
    pub asset_did: Did,
    pub algorithm_did: Did,
    pub amount_locked: u64,
    pub payees: Vec<Payee>,
    pub state: OrderState,
    pub created_at: u64,
    pub settled_at: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessGrant {
    pub grant_id: HexId,
    pub order_id: HexId,
    pub consumer: Did,
    pub dataset_did: Did,
    pub algorithm_did: Did,
    pub expires_at: i64,
    pub revoked: bool,
}

impl AccessGrant {
    pub fn is_live(&self, now: i64) -> bool {
        !self.revoked && now < self.expires_at
    }
}

/// Sums used by the conservation check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Supply {
    pub balances: u128,
    pub locked: u128,
    pub minted: u128,
}

impl Supply {
    pub fn is_conserved(&self) -> bool {
        self.balances + self.locked == self.minted
    }
}

#[derive(Debug, Default)]
struct LedgerState {
    audit: AuditLog,
    identities: HashMap<Did, PublicIdentity>,
    accounts: BTreeMap<Did, Account>,
    nfts: BTreeMap<HexId, DataNft>,
    nft_by_asset: HashMap<Did, HexId>,
    tokens: BTreeMap<HexId, DataTokenClass>,
    token_by_nft: HashMap<HexId, HexId>,
    orders: BTreeMap<HexId, EscrowOrder>,
    grants: BTreeMap<HexId, AccessGrant>,
    minted_supply: u128,
}

impl LedgerState {
    fn append<T: Serialize>(&mut self, kind: AuditKind, payload: &T, now: i64) -> Result<LedgerEntry> {
        Ok(self.audit.append(kind, &canonical_string(payload), now)?)
    }

    fn next_index(&self) -> u64 {
        self.audit.len() as u64
    }

    fn account(&self, did: &Did) -> Result<&Account> {
        self.accounts.get(did).ok_or_else(|| LedgerError::UnknownIdentity(did.clone()))
    }

    fn spendable(&self, did: &Did) -> Result<u64> {
        Ok(self.account(did)?.balance)
    }

    /// Check signature and nonce for a signed action. Does not consume the nonce.
    fn check_authorization(&self, auth: &Authorization, action: &Action) -> Result<()> {
        let identity =
            self.identities.get(&auth.signer).ok_or_else(|| LedgerError::UnknownIdentity(auth.signer.clone()))?;
        let message = Authorization::message(action, &auth.signer, auth.nonce);
        if !identity.verify(&message, &auth.signature) {
            return Err(LedgerError::BadSignature);
        }
        let last = self.account(&auth.signer)?.nonce;
        if auth.nonce <= last {
            return Err(LedgerError::StaleNonce { got: auth.nonce, last });
        }
        Ok(())
    }

    fn consume_nonce(&mut self, auth: &Authorization) {
        if let Some(acct) = self.accounts.get_mut(&auth.signer) {
            acct.nonce = auth.nonce;
        }
    }

    fn locked_order(&self, order_id: HexId) -> Result<&EscrowOrder> {
        let order = self.orders.get(&order_id).ok_or(LedgerError::UnknownOrder(order_id))?;
        if order.state != OrderState::Locked {
            return Err(LedgerError::NotLocked(order_id));
        }
        Ok(order)
    }
}

/// The ledger. Cheap to share behind an `Arc`; all methods take `&self`.
pub struct Ledger {
    state: RwLock<LedgerState>,
    clock: Arc<dyn Clock>,
}

impl std::fmt::Debug for Ledger {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Ledger").field("entries", &self.audit_len()).finish()
    }
}

impl Ledger {
    pub fn in_memory(clock: Arc<dyn Clock>) -> Self {
        Ledger { state: RwLock::new(LedgerState::default()), clock }
    }

    /// Ledger whose audit chain is persisted at `path` (continued if the file exists).
    pub fn persistent(path: impl AsRef<Path>, clock: Arc<dyn Clock>) -> Result<Self> {
        let state = LedgerState { audit: AuditLog::open(path)?, ..LedgerState::default() };
        Ok(Ledger { state: RwLock::new(state), clock })
    }

    pub fn now(&self) -> i64 {
        self.clock.now()
    }

    pub fn clock(&self) -> Arc<dyn Clock> {
        Arc::clone(&self.clock)
    }

    // ---- identities and balances -------------------------------------------------

    pub fn create_identity(&self, roles: BTreeSet<Role>) -> Result<Identity> {
        if roles.is_empty() {
            return Err(LedgerError::EmptyRoles);
        }
        let identity = Identity::generate(roles);
        self.register_identity(&identity.public())?;
        Ok(identity)
    }

    /// Register an externally generated identity's public half.
    pub fn register_identity(&self, public: &PublicIdentity) -> Result<LedgerEntry> {
        if public.roles.is_empty() {
            return Err(LedgerError::EmptyRoles);
        }
        let now = self.now();
        let mut st = self.state.write();
        if st.identities.contains_key(&public.did) {
            return Err(LedgerError::DuplicateIdentity(public.did.clone()));
        }
        let entry = st.append(AuditKind::IdentityCreated, public, now)?;
        st.identities.insert(public.did.clone(), public.clone());
        st.accounts.insert(public.did.clone(), Account { did: public.did.clone(), balance: 0, nonce: 0 });
        Ok(entry)
    }

    pub fn identity(&self, did: &Did) -> Option<PublicIdentity> {
        self.state.read().identities.get(did).cloned()
    }

    pub fn account(&self, did: &Did) -> Option<Account> {
        self.state.read().accounts.get(did).cloned()
    }

    pub fn next_nonce(&self, did: &Did) -> Option<u64> {
        self.state.read().accounts.get(did).map(|a| a.nonce + 1)
    }

    pub fn faucet(&self, did: &Did, amount: u64) -> Result<Account> {
        if amount == 0 {
            return Err(LedgerError::ZeroAmount);
        }
        let now = self.now();
        let mut st = self.state.write();
        let balance = st.account(did)?.balance;
        st.append(AuditKind::Faucet, &json!({ "did": did, "amount": amount, "balance": balance + amount }), now)?;
        st.minted_supply += u128::from(amount);
        let acct = st.accounts.get_mut(did).expect("checked above");
        acct.balance += amount;
        Ok(acct.clone())
    }

    pub fn transfer(&self, from: &Did, to: &Did, amount: u64) -> Result<(Account, Account)> {
        if amount == 0 {
            return Err(LedgerError::ZeroAmount);
        }
        let now = self.now();
        let mut st = self.state.write();
        let available = st.spendable(from)?;
        st.account(to)?;
        if available < amount {
            return Err(LedgerError::InsufficientFunds { needed: amount, available });
        }
        st.append(AuditKind::Transfer, &json!({ "from": from, "to": to, "amount": amount }), now)?;
        st.accounts.get_mut(from).expect("checked").balance -= amount;
        st.accounts.get_mut(to).expect("checked").balance += amount;
        Ok((st.accounts[from].clone(), st.accounts[to].clone()))
    }

    pub fn supply(&self) -> Supply {
        let st = self.state.read();
        Supply {
            balances: st.accounts.values().map(|a| u128::from(a.balance)).sum(),
            locked: st
                .orders
                .values()
                .filter(|o| o.state == OrderState::Locked)
                .map(|o| u128::from(o.amount_locked))
                .sum(),
            minted: st.minted_supply,
        }
    }

    // ---- data NFTs and token classes ---------------------------------------------

    pub fn mint_data_nft(&self, owner: &Did, asset_did: &Did, auth: &Authorization) -> Result<DataNft> {
        let action = Action::MintDataNft { owner: owner.clone(), asset_did: asset_did.clone() };
        let now = self.now();
        let mut st = self.state.write();
        if &auth.signer != owner {
            return Err(LedgerError::BadSignature);
        }
        st.check_authorization(auth, &action)?;
        if st.nft_by_asset.contains_key(asset_did) {
            return Err(LedgerError::DuplicateAsset(asset_did.clone()));
        }
        let nft = DataNft {
            nft_id: HexId::random(),
            owner: owner.clone(),
            asset_did: asset_did.clone(),
            minted_at: st.next_index(),
        };
        st.append(AuditKind::NftMinted, &nft, now)?;
        st.consume_nonce(auth);
        st.nft_by_asset.insert(asset_did.clone(), nft.nft_id);
        st.nfts.insert(nft.nft_id, nft.clone());
        Ok(nft)
    }

    pub fn transfer_nft(&self, nft_id: HexId, to: &Did, auth: &Authorization) -> Result<DataNft> {
        let action = Action::TransferNft { nft_id, to: to.clone() };
        let now = self.now();
        let mut st = self.state.write();
        st.check_authorization(auth, &action)?;
        let nft = st.nfts.get(&nft_id).ok_or(LedgerError::UnknownNft(nft_id))?;
        if nft.owner != auth.signer {
            return Err(LedgerError::NotOwner);
        }
        st.account(to)?;
        st.append(AuditKind::NftTransferred, &json!({ "nft_id": nft_id, "from": auth.signer, "to": to }), now)?;
        st.consume_nonce(auth);
        let nft = st.nfts.get_mut(&nft_id).expect("checked");
        nft.owner = to.clone();
        Ok(nft.clone())
    }

    pub fn nft(&self, nft_id: HexId) -> Option<DataNft> {
        self.state.read().nfts.get(&nft_id).cloned()
    }

    pub fn nft_for_asset(&self, asset_did: &Did) -> Option<DataNft> {
        let st = self.state.read();
        st.nft_by_asset.get(asset_did).and_then(|id| st.nfts.get(id)).cloned()
    }

    pub fn create_data_token(
        &self,
        nft_id: HexId,
        price_per_access: u64,
        auth: &Authorization,
    ) -> Result<DataTokenClass> {
        let action = Action::CreateDataToken { nft_id, price_per_access };
        let now = self.now();
        let mut st = self.state.write();
        let nft = st.nfts.get(&nft_id).ok_or(LedgerError::UnknownNft(nft_id))?;
        let owner = nft.owner.clone();
        st.check_authorization(auth, &action)?;
        if auth.signer != owner {
            return Err(LedgerError::NotOwner);
        }
        if st.token_by_nft.contains_key(&nft_id) {
            return Err(LedgerError::DuplicateTokenClass(nft_id));
        }
        let token = DataTokenClass { token_id: HexId::random(), nft_id, price_per_access, total_minted: 0 };
        st.append(AuditKind::TokenClassCreated, &token, now)?;
        st.consume_nonce(auth);
        st.token_by_nft.insert(nft_id, token.token_id);
        st.tokens.insert(token.token_id, token.clone());
        Ok(token)
    }

    pub fn token_for_nft(&self, nft_id: HexId) -> Option<DataTokenClass> {
        let st = self.state.read();
        st.token_by_nft.get(&nft_id).and_then(|id| st.tokens.get(id)).cloned()
    }

    // ---- escrow --------------------------------------------------------------------

    pub fn lock_escrow(
        &self,
        buyer: &Did,
        asset_did: &Did,
        algorithm_did: &Did,
        amount: u64,
        payees: Vec<Payee>,
    ) -> Result<EscrowOrder> {
        if amount == 0 {
            return Err(LedgerError::ZeroAmount);
        }
        if !escrow::is_valid_split(&payees) {
            return Err(LedgerError::BadSplit);
        }
        let now = self.now();
        let mut st = self.state.write();
        let available = st.spendable(buyer)?;
        for p in &payees {
            st.account(&p.did)?;
        }
        if available < amount {
            return Err(LedgerError::InsufficientFunds { needed: amount, available });
        }
        let order = EscrowOrder {
            order_id: HexId::random(),
            buyer: buyer.clone(),
            asset_did: asset_did.clone(),
            algorithm_did: algorithm_did.clone(),
            amount_locked: amount,
            payees,
            state: OrderState::Locked,
            created_at: st.next_index(),
            settled_at: None,
        };
        st.append(AuditKind::EscrowLocked, &order, now)?;
        st.accounts.get_mut(buyer).expect("checked").balance -= amount;
        st.orders.insert(order.order_id, order.clone());
        Ok(order)
    }

    /// Zero-price purchase: an order that is settled the moment it exists.
    pub fn issue_free_order(&self, buyer: &Did, asset_did: &Did, algorithm_did: &Did) -> Result<EscrowOrder> {
        let now = self.now();
        let mut st = self.state.write();
        st.account(buyer)?;
        let index = st.next_index();
        let order = EscrowOrder {
            order_id: HexId::random(),
            buyer: buyer.clone(),
            asset_did: asset_did.clone(),
            algorithm_did: algorithm_did.clone(),
            amount_locked: 0,
            payees: Vec::new(),
            state: OrderState::Released,
            created_at: index,
            settled_at: Some(index),
        };
        st.append(AuditKind::FreeOrderIssued, &order, now)?;
        st.orders.insert(order.order_id, order.clone());
        Ok(order)
    }

    pub fn release_escrow(&self, order_id: HexId) -> Result<Vec<(Did, u64)>> {
        let now = self.now();
        let mut st = self.state.write();
        let order = st.locked_order(order_id)?;
        let payouts = escrow::payouts(order.amount_locked, &order.payees);
        let payload = json!({
            "order_id": order_id,
            "payouts": payouts.iter().map(|(d, v)| json!({ "did": d, "amount": v })).collect::<Vec<_>>(),
        });
        let index = st.next_index();
        st.append(AuditKind::EscrowReleased, &payload, now)?;
        for (did, amount) in &payouts {
            st.accounts.get_mut(did).expect("payees exist").balance += amount;
        }
        let order = st.orders.get_mut(&order_id).expect("checked");
        order.state = OrderState::Released;
        order.settled_at = Some(index);
        Ok(payouts)
    }

    /// Refund a locked order to its buyer. Grants bought with it are revoked.
    pub fn refund_escrow(&self, order_id: HexId) -> Result<Account> {
        let now = self.now();
        let mut st = self.state.write();
        let order = st.locked_order(order_id)?;
        let (buyer, amount) = (order.buyer.clone(), order.amount_locked);
        let index = st.next_index();
        st.append(AuditKind::EscrowRefunded, &json!({ "order_id": order_id, "buyer": buyer, "amount": amount }), now)?;
        let acct = st.accounts.get_mut(&buyer).expect("buyer exists");
        acct.balance += amount;
        let acct = acct.clone();
        let order = st.orders.get_mut(&order_id).expect("checked");
        order.state = OrderState::Refunded;
        order.settled_at = Some(index);
        for grant in st.grants.values_mut().filter(|g| g.order_id == order_id) {
            grant.revoked = true;
        }
        Ok(acct)
    }

    pub fn order(&self, order_id: HexId) -> Option<EscrowOrder> {
        self.state.read().orders.get(&order_id).cloned()
    }

    pub fn orders(&self) -> Vec<EscrowOrder> {
        self.state.read().orders.values().cloned().collect()
    }

    // ---- access grants ---------------------------------------------------------------

    pub fn grant_access(&self, order_id: HexId, duration_secs: u64) -> Result<AccessGrant> {
        let now = self.now();
        let mut st = self.state.write();
        let order = st.orders.get(&order_id).ok_or(LedgerError::UnknownOrder(order_id))?;
        if order.state == OrderState::Refunded {
            return Err(LedgerError::NotLocked(order_id));
        }
        let grant = AccessGrant {
            grant_id: HexId::random(),
            order_id,
            consumer: order.buyer.clone(),
            dataset_did: order.asset_did.clone(),
            algorithm_did: order.algorithm_did.clone(),
            expires_at: now.saturating_add(i64::try_from(duration_secs).unwrap_or(i64::MAX)),
            revoked: false,
        };
        st.append(AuditKind::AccessGranted, &grant, now)?;
        st.grants.insert(grant.grant_id, grant.clone());
        Ok(grant)
    }

    pub fn revoke_grant(&self, grant_id: HexId) -> Result<AccessGrant> {
        let now = self.now();
        let mut st = self.state.write();
        if !st.grants.contains_key(&grant_id) {
            return Err(LedgerError::UnknownGrant(grant_id));
        }
        st.append(AuditKind::GrantRevoked, &json!({ "grant_id": grant_id }), now)?;
        let grant = st.grants.get_mut(&grant_id).expect("checked");
        grant.revoked = true;
        Ok(grant.clone())
    }

    pub fn grant(&self, grant_id: HexId) -> Option<AccessGrant> {
        self.state.read().grants.get(&grant_id).cloned()
    }

    /// All grants bound to this (consumer, dataset, algorithm) triple, oldest first.
    pub fn grants_for(&self, consumer: &Did, dataset_did: &Did, algorithm_did: &Did) -> Vec<AccessGrant> {
        let st = self.state.read();
        let mut out: Vec<AccessGrant> = st
            .grants
            .values()
            .filter(|g| &g.consumer == consumer && &g.dataset_did == dataset_did && &g.algorithm_did == algorithm_did)
            .cloned()
            .collect();
        out.sort_by_key(|g| st.orders.get(&g.order_id).map_or(0, |o| o.created_at));
        out
    }

    /// Check a signed action, consume its nonce and record `payload` under `kind`,
    /// all under one write lock. Used by components that own their own state
    /// but need the ledger's replay protection.
    pub fn apply_signed<T: Serialize + ?Sized>(
        &self,
        auth: &Authorization,
        action: &Action,
        kind: AuditKind,
        payload: &T,
    ) -> Result<LedgerEntry> {
        let now = self.now();
        let mut st = self.state.write();
        st.check_authorization(auth, action)?;
        let entry = st.append(kind, &payload, now)?;
        st.consume_nonce(auth);
        Ok(entry)
    }

    // ---- audit chain -----------------------------------------------------------------

    /// Append a free-form audit entry.
    pub fn append_audit(&self, kind: AuditKind, payload: &str) -> Result<LedgerEntry> {
        let now = self.now();
        Ok(self.state.write().audit.append(kind, payload, now)?)
    }

    /// Append an entry whose payload is the canonical form of `payload`.
    pub fn record<T: Serialize + ?Sized>(&self, kind: AuditKind, payload: &T) -> Result<LedgerEntry> {
        self.append_audit(kind, &canonical_string(payload))
    }

    pub fn verify_chain(&self) -> ChainVerification {
        self.state.read().audit.verify()
    }

    pub fn audit_len(&self) -> usize {
        self.state.read().audit.len()
    }

    pub fn audit_entries(&self, start: usize, limit: usize) -> Vec<LedgerEntry> {
        let st = self.state.read();
        st.audit.entries().iter().skip(start).take(limit).cloned().collect()
    }

    pub fn audit_path(&self) -> Option<std::path::PathBuf> {
        self.state.read().audit.path().map(Path::to_path_buf)
    }
}
