//! Identities, Ed25519 signatures and signed ledger actions.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use ring::signature::{self, Ed25519KeyPair, KeyPair, UnparsedPublicKey};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::canonical::canonical_bytes;
use crate::ids::{random_bytes, Did, HexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Holder,
    AiContributor,
    VizContributor,
    Consumer,
    Provider,
    Keeper,
}

impl Role {
    pub const ALL: [Role; 6] =
        [Role::Holder, Role::AiContributor, Role::VizContributor, Role::Consumer, Role::Provider, Role::Keeper];

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Holder => "holder",
            Role::AiContributor => "ai_contributor",
            Role::VizContributor => "viz_contributor",
            Role::Consumer => "consumer",
            Role::Provider => "provider",
            Role::Keeper => "keeper",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Role::ALL.into_iter().find(|r| r.as_str() == s).ok_or_else(|| format!("unknown role `{s}`"))
    }
}

/// A locally held signing identity. The secret half never leaves this struct
/// through serialization; only [`PublicIdentity`] is serializable.
#[derive(Clone)]
pub struct Identity {
    did: Did,
    public_key: [u8; 32],
    // seed ‖ public key
    secret_key: [u8; 64],
    roles: BTreeSet<Role>,
}

impl fmt::Debug for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Identity").field("did", &self.did).field("roles", &self.roles).finish_non_exhaustive()
    }
}

impl Identity {
    /// Generate a fresh keypair. Roles are not validated here; the ledger rejects an empty set.
    pub fn generate(roles: BTreeSet<Role>) -> Self {
        Self::from_seed(random_bytes::<32>(), roles)
    }

    pub fn from_seed(seed: [u8; 32], roles: BTreeSet<Role>) -> Self {
        let pair = Ed25519KeyPair::from_seed_unchecked(&seed).expect("32-byte seed is always valid");
        let mut public_key = [0u8; 32];
        public_key.copy_from_slice(pair.public_key().as_ref());
        let mut secret_key = [0u8; 64];
        secret_key[..32].copy_from_slice(&seed);
        secret_key[32..].copy_from_slice(&public_key);
        Identity { did: did_for_public_key(&public_key), public_key, secret_key, roles }
    }

    pub fn did(&self) -> &Did {
        &self.did
    }

    pub fn public_key(&self) -> &[u8; 32] {
        &self.public_key
    }

    pub fn roles(&self) -> &BTreeSet<Role> {
        &self.roles
    }

    pub fn has_role(&self, role: Role) -> bool {
        self.roles.contains(&role)
    }

    /// Sign `message`, returning the 64-byte signature as lowercase hex.
    pub fn sign(&self, message: &[u8]) -> String {
        let pair = Ed25519KeyPair::from_seed_and_public_key(&self.secret_key[..32], &self.secret_key[32..])
            .expect("stored keypair is consistent");
        hex::encode(pair.sign(message).as_ref())
    }

    pub fn public(&self) -> PublicIdentity {
        PublicIdentity { did: self.did.clone(), public_key: hex::encode(self.public_key), roles: self.roles.clone() }
    }
}

/// DID for a verification key: `did:cliox:` + hex of SHA-256(public_key)[..20].
pub fn did_for_public_key(public_key: &[u8; 32]) -> Did {
    Did::derive(public_key)
}

/// The shareable half of an [`Identity`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicIdentity {
    pub did: Did,
    /// 32-byte Ed25519 verification key, lowercase hex.
    pub public_key: String,
    pub roles: BTreeSet<Role>,
}

impl PublicIdentity {
    pub fn verify(&self, message: &[u8], signature_hex: &str) -> bool {
        match hex::decode(&self.public_key) {
            Ok(key) => verify_signature(&key, message, signature_hex),
            Err(_) => false,
        }
    }
}

pub fn verify_signature(public_key: &[u8], message: &[u8], signature_hex: &str) -> bool {
    let Ok(sig) = hex::decode(signature_hex) else {
        return false;
    };
    UnparsedPublicKey::new(&signature::ED25519, public_key).verify(message, &sig).is_ok()
}

/// Ledger mutations that must be signed by the acting identity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Action {
    MintDataNft { owner: Did, asset_did: Did },
    CreateDataToken { nft_id: HexId, price_per_access: u64 },
    TransferNft { nft_id: HexId, to: Did },
    RetireAsset { asset_did: Did },
}

/// A signature over an [`Action`] bound to the signer's next nonce.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Authorization {
    pub signer: Did,
    pub nonce: u64,
    pub signature: String,
}

impl Authorization {
    /// The exact bytes that get signed for `action`.
    pub fn message(action: &Action, signer: &Did, nonce: u64) -> Vec<u8> {
        canonical_bytes(&json!({ "action": action, "nonce": nonce, "signer": signer }))
    }

    pub fn sign(identity: &Identity, nonce: u64, action: &Action) -> Self {
        let message = Self::message(action, identity.did(), nonce);
        Authorization { signer: identity.did().clone(), nonce, signature: identity.sign(&message) }
    }
}
