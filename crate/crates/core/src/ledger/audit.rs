//! Hash-chained, append-only audit log.
//!
//! Each entry commits to its predecessor:
//!
//! ```text
//! entry_hash = SHA-256(decimal(index) ‖ prev_hash ‖ payload_digest ‖ kind ‖ decimal(timestamp))
//! ```
//!
//! The genesis entry links to 64 zero characters. On disk the log is one
//! canonical JSON record per line.

use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::canonical::{canonical_bytes, sha256_hex};

pub const GENESIS_PREV_HASH: &str = "0000000000000000000000000000000000000000000000000000000000000000";

macro_rules! audit_kinds {
    ($($variant:ident => $tag:literal),+ $(,)?) => {
        /// Operation tag carried by every ledger entry.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum AuditKind {
            $($variant),+
        }

        impl AuditKind {
            pub const ALL: &'static [AuditKind] = &[$(AuditKind::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(AuditKind::$variant => $tag),+
                }
            }
        }

        impl FromStr for AuditKind {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($tag => Ok(AuditKind::$variant),)+
                    other => Err(format!("unknown audit kind `{other}`")),
                }
            }
        }
    };
}

audit_kinds! {
    IdentityCreated => "identity_created",
    Faucet => "faucet",
    NftMinted => "nft_minted",
    NftTransferred => "nft_transferred",
    TokenClassCreated => "token_class_created",
    Transfer => "transfer",
    EscrowLocked => "escrow_locked",
    FreeOrderIssued => "free_order_issued",
    EscrowReleased => "escrow_released",
    EscrowRefunded => "escrow_refunded",
    AccessGranted => "access_granted",
    GrantRevoked => "grant_revoked",
    AssetRegistered => "asset_registered",
    AssetRevised => "asset_revised",
    AssetRetired => "asset_retired",
    LocatorSealed => "locator_sealed",
    LocatorUnsealed => "locator_unsealed",
    ConsentRecorded => "consent_recorded",
    JobAuthorization => "job_authorization",
    JobSubmitted => "job_submitted",
    JobStarted => "job_started",
    JobFinished => "job_finished",
    SessionOpened => "session_opened",
    Note => "note",
}

impl fmt::Display for AuditKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LedgerEntry {
    pub index: u64,
    pub timestamp: i64,
    pub kind: AuditKind,
    /// Canonical payload text the digest was computed over.
    pub payload: String,
    pub payload_digest: String,
    pub prev_hash: String,
    pub entry_hash: String,
}

pub fn compute_entry_hash(
    index: u64,
    prev_hash: &str,
    payload_digest: &str,
    kind: AuditKind,
    timestamp: i64,
) -> String {
    let mut material = Vec::with_capacity(160);
    material.extend_from_slice(index.to_string().as_bytes());
    material.extend_from_slice(prev_hash.as_bytes());
    material.extend_from_slice(payload_digest.as_bytes());
    material.extend_from_slice(kind.as_str().as_bytes());
    material.extend_from_slice(timestamp.to_string().as_bytes());
    sha256_hex(&material)
}

impl LedgerEntry {
    fn build(index: u64, timestamp: i64, kind: AuditKind, payload: &str, prev_hash: &str) -> Self {
        let payload_digest = sha256_hex(payload.as_bytes());
        let entry_hash = compute_entry_hash(index, prev_hash, &payload_digest, kind, timestamp);
        LedgerEntry {
            index,
            timestamp,
            kind,
            payload: payload.to_string(),
            payload_digest,
            prev_hash: prev_hash.to_string(),
            entry_hash,
        }
    }

    /// Recompute this entry's own digest and hash, ignoring its link.
    fn self_consistent(&self) -> bool {
        self.payload_digest == sha256_hex(self.payload.as_bytes())
            && self.entry_hash
                == compute_entry_hash(self.index, &self.prev_hash, &self.payload_digest, self.kind, self.timestamp)
    }

    pub fn to_line(&self) -> Vec<u8> {
        let mut line = canonical_bytes(self);
        line.push(b'\n');
        line
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainVerification {
    pub valid: bool,
    pub first_bad_index: Option<u64>,
    pub entries: u64,
}

impl ChainVerification {
    fn ok(entries: u64) -> Self {
        ChainVerification { valid: true, first_bad_index: None, entries }
    }

    fn bad(index: u64, entries: u64) -> Self {
        ChainVerification { valid: false, first_bad_index: Some(index), entries }
    }
}

/// Verify an in-memory sequence of entries.
pub fn verify_entries(entries: &[LedgerEntry]) -> ChainVerification {
    let mut prev = GENESIS_PREV_HASH;
    for (position, entry) in entries.iter().enumerate() {
        if entry.index != position as u64 || entry.prev_hash != prev || !entry.self_consistent() {
            return ChainVerification::bad(position as u64, entries.len() as u64);
        }
        prev = &entry.entry_hash;
    }
    ChainVerification::ok(entries.len() as u64)
}

/// Verify a persisted log. A line counts as bad when it is not valid UTF-8,
/// does not decode, is not in canonical form, or breaks the chain.
pub fn verify_log_bytes(bytes: &[u8]) -> ChainVerification {
    let lines = split_lines(bytes);
    let total = lines.len() as u64;
    let mut prev = GENESIS_PREV_HASH.to_string();
    for (position, line) in lines.iter().enumerate() {
        let Some(entry) = decode_line(line) else {
            return ChainVerification::bad(position as u64, total);
        };
        if entry.index != position as u64 || entry.prev_hash != prev || !entry.self_consistent() {
            return ChainVerification::bad(position as u64, total);
        }
        prev = entry.entry_hash;
    }
    ChainVerification::ok(total)
}

fn split_lines(bytes: &[u8]) -> Vec<&[u8]> {
    if bytes.is_empty() {
        return Vec::new();
    }
    let body = bytes.strip_suffix(b"\n").unwrap_or(bytes);
    body.split(|b| *b == b'\n').collect()
}

fn decode_line(line: &[u8]) -> Option<LedgerEntry> {
    let entry: LedgerEntry = serde_json::from_slice(line).ok()?;
    (canonical_bytes(&entry) == line).then_some(entry)
}

#[derive(Debug, thiserror::Error)]
pub enum AuditError {
    #[error("audit log I/O failed: {0}")]
    Io(#[from] io::Error),
    #[error("existing audit log fails verification at entry {0}")]
    Corrupt(u64),
}

/// The log itself: entries in memory plus an optional append-only file.
#[derive(Debug, Default)]
pub struct AuditLog {
    entries: Vec<LedgerEntry>,
    sink: Option<(PathBuf, File)>,
}

impl AuditLog {
    pub fn in_memory() -> Self {
        AuditLog::default()
    }

    /// Open or create a persisted log. An existing file must verify; the chain continues from it.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, AuditError> {
        let path = path.as_ref().to_path_buf();
        let mut entries = Vec::new();
        if path.exists() {
            let bytes = std::fs::read(&path)?;
            let check = verify_log_bytes(&bytes);
            if let Some(bad) = check.first_bad_index {
                return Err(AuditError::Corrupt(bad));
            }
            entries = split_lines(&bytes).into_iter().map(|l| decode_line(l).expect("verified line decodes")).collect();
        }
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(AuditLog { entries, sink: Some((path, file)) })
    }

    pub fn append(&mut self, kind: AuditKind, payload: &str, timestamp: i64) -> Result<LedgerEntry, AuditError> {
        let prev = self.entries.last().map_or(GENESIS_PREV_HASH, |e| e.entry_hash.as_str());
        let entry = LedgerEntry::build(self.entries.len() as u64, timestamp, kind, payload, prev);
        if let Some((_, file)) = self.sink.as_mut() {
            file.write_all(&entry.to_line())?;
            file.flush()?;
        }
        self.entries.push(entry.clone());
        Ok(entry)
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn path(&self) -> Option<&Path> {
        self.sink.as_ref().map(|(p, _)| p.as_path())
    }

    /// Verify the persisted file when there is one, otherwise the in-memory chain.
    pub fn verify(&self) -> ChainVerification {
        match self.path() {
            Some(path) => match std::fs::read(path) {
                Ok(bytes) => verify_log_bytes(&bytes),
                Err(_) => ChainVerification::bad(0, self.entries.len() as u64),
            },
            None => verify_entries(&self.entries),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn log_of(n: usize) -> AuditLog {
        let mut log = AuditLog::in_memory();
        for i in 0..n {
            log.append(AuditKind::Note, &format!("{{\"i\":{i}}}"), 1_700_000_000 + i as i64).unwrap();
        }
        log
    }

    #[test]
    fn genesis_and_chaining() {
        let log = log_of(3);
        let e = log.entries();
        assert_eq!(e[0].prev_hash, GENESIS_PREV_HASH);
        assert_eq!(e[1].prev_hash, e[0].entry_hash);
        assert_eq!(e[2].prev_hash, e[1].entry_hash);
        for entry in e {
            assert_eq!(entry.entry_hash.len(), 64);
            assert!(entry.entry_hash.bytes().all(|b| b.is_ascii_hexdigit() && !b.is_ascii_uppercase()));
        }
    }

    #[test]
    fn entry_hash_matches_formula() {
        let log = log_of(1);
        let e = &log.entries()[0];
        let material = format!("0{GENESIS_PREV_HASH}{}note{}", e.payload_digest, e.timestamp);
        assert_eq!(e.entry_hash, sha256_hex(material.as_bytes()));
    }

    #[test]
    fn untampered_and_empty_logs_verify() {
        assert!(verify_entries(&[]).valid);
        assert!(verify_log_bytes(b"").valid);
        let log = log_of(100);
        assert_eq!(verify_entries(log.entries()), ChainVerification::ok(100));
    }

    #[test]
    fn flipped_payload_digest_is_located() {
        let log = log_of(100);
        let mut entries = log.entries().to_vec();
        let mut digest = entries[7].payload_digest.clone().into_bytes();
        digest[0] ^= 0x01;
        entries[7].payload_digest = String::from_utf8(digest).unwrap();
        let check = verify_entries(&entries);
        assert!(!check.valid);
        assert_eq!(check.first_bad_index, Some(7));
    }

    #[test]
    fn file_round_trip_and_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("audit.log");
        {
            let mut log = AuditLog::open(&path).unwrap();
            log.append(AuditKind::Note, "{}", 1).unwrap();
            log.append(AuditKind::Note, "{\"a\":1}", 2).unwrap();
        }
        let mut log = AuditLog::open(&path).unwrap();
        assert_eq!(log.len(), 2);
        log.append(AuditKind::Faucet, "{}", 3).unwrap();
        assert_eq!(log.verify(), ChainVerification::ok(3));

        let mut bytes = std::fs::read(&path).unwrap();
        let second_line = bytes.iter().position(|b| *b == b'\n').unwrap() + 5;
        bytes[second_line] ^= 0x20;
        std::fs::write(&path, &bytes).unwrap();
        assert_eq!(log.verify().first_bad_index, Some(1));
        assert!(matches!(AuditLog::open(&path), Err(AuditError::Corrupt(1))));
    }

    #[test]
    fn every_kind_round_trips_through_its_tag() {
        for kind in AuditKind::ALL {
            assert_eq!(kind.as_str().parse::<AuditKind>().unwrap(), *kind);
            assert_eq!(serde_json::to_string(kind).unwrap(), format!("\"{}\"", kind.as_str()));
        }
    }
}
