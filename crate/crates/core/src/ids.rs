//! Identifier newtypes shared across components.

use std::fmt;

use ring::rand::{SecureRandom, SystemRandom};
use serde::{Deserialize, Serialize};

use crate::canonical::sha256;

pub const DID_PREFIX: &str = "did:cliox:";
pub const JOB_DID_PREFIX: &str = "did:cliox:job:";

/// Fill a fixed-size array from the OS random source.
pub fn random_bytes<const N: usize>() -> [u8; N] {
    let mut out = [0u8; N];
    SystemRandom::new().fill(&mut out).expect("operating system random source unavailable");
    out
}

/// A decentralized identifier in the `did:cliox:` method.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Did(String);

impl Did {
    /// `did:cliox:` followed by the lowercase hex of the first 20 bytes of SHA-256(`material`).
    pub fn derive(material: &[u8]) -> Self {
        let digest = sha256(material);
        Did(format!("{DID_PREFIX}{}", hex::encode(&digest[..20])))
    }

    /// Fresh job identifier, `did:cliox:job:<32 hex>`.
    pub fn new_job() -> Self {
        Did(format!("{JOB_DID_PREFIX}{}", hex::encode(random_bytes::<16>())))
    }

    /// Accepts `did:cliox:<40 hex>` and `did:cliox:job:<32 hex>`.
    pub fn parse(s: &str) -> Option<Self> {
        let lower_hex =
            |t: &str, n: usize| t.len() == n && t.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b));
        if let Some(rest) = s.strip_prefix(JOB_DID_PREFIX) {
            return lower_hex(rest, 32).then(|| Did(s.to_string()));
        }
        let rest = s.strip_prefix(DID_PREFIX)?;
        lower_hex(rest, 40).then(|| Did(s.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_job(&self) -> bool {
        self.0.starts_with(JOB_DID_PREFIX)
    }
}

impl fmt::Display for Did {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Did {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// A 16-byte identifier rendered as 32 lowercase hex characters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HexId([u8; 16]);

impl HexId {
    pub fn random() -> Self {
        HexId(random_bytes())
    }

    pub fn from_bytes(bytes: [u8; 16]) -> Self {
        HexId(bytes)
    }

    pub fn parse(s: &str) -> Option<Self> {
        if s.len() != 32 || s.bytes().any(|b| b.is_ascii_uppercase()) {
            return None;
        }
        let mut out = [0u8; 16];
        hex::decode_to_slice(s, &mut out).ok()?;
        Some(HexId(out))
    }

    pub fn as_bytes(&self) -> &[u8; 16] {
        &self.0
    }
}

impl fmt::Display for HexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&hex::encode(self.0))
    }
}

impl Serialize for HexId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for HexId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        HexId::parse(&s).ok_or_else(|| serde::de::Error::custom("expected 32 lowercase hex characters"))
    }
}
