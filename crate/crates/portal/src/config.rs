//! Portal configuration, read from a TOML file.
//!
//! ```toml
//! bind = "127.0.0.1:8080"
//!
//! [data]
//! dir = "var/portal"          # audit log, provider key, result documents
//! corpus_root = "fixtures"    # base for relative dataset locations
//!
//! [runtime]
//! workers = 2
//! k_min = 5
//! max_terms_per_list = 50
//!
//! [sessions]
//! ttl_secs = 86400
//!
//! [split]                     # basis points, must sum to 10000
//! holder = 2500
//! ai_contributor = 2500
//! viz_contributor = 2500
//! runtime_operator = 2500
//!
//! [governance]
//! operator_name = "Clio-X Consortium"
//! model = "consortium"
//! contact = "governance@example.org"
//! members = [{ name = "City Archive", affiliation_url = "https://archive.example.org" }]
//! ```

use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use cliox_core::market::PayeeSplit;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid configuration: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PortalConfig {
    pub bind: SocketAddr,
    pub data: DataConfig,
    pub runtime: RuntimeSettings,
    pub sessions: SessionSettings,
    pub split: PayeeSplit,
    pub governance: GovernanceInfo,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    /// Persist the audit log, provider key and results here; memory only when unset.
    pub dir: Option<PathBuf>,
    pub corpus_root: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RuntimeSettings {
    pub workers: usize,
    pub k_min: u64,
    pub max_terms_per_list: usize,
}

impl Default for RuntimeSettings {
    fn default() -> Self {
        RuntimeSettings { workers: 2, k_min: 5, max_terms_per_list: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionSettings {
    pub ttl_secs: u64,
}

impl Default for SessionSettings {
    fn default() -> Self {
        SessionSettings { ttl_secs: 24 * 3600 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GovernanceModel {
    Consortium,
    NonProfit,
    Private,
    OpenSource,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Member {
    pub name: String,
    pub affiliation_url: String,
}

/// Served verbatim by `GET /governance`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GovernanceInfo {
    pub operator_name: String,
    pub model: GovernanceModel,
    pub members: Vec<Member>,
    pub contact: String,
}

impl Default for GovernanceInfo {
    fn default() -> Self {
        GovernanceInfo {
            operator_name: "Clio-X local node".into(),
            model: GovernanceModel::Consortium,
            members: vec![Member { name: "Local archive".into(), affiliation_url: "http://localhost".into() }],
            contact: "operator@localhost".into(),
        }
    }
}

impl Default for PortalConfig {
    fn default() -> Self {
        PortalConfig {
            bind: SocketAddr::from(([127, 0, 0, 1], 8080)),
            data: DataConfig::default(),
            runtime: RuntimeSettings::default(),
            sessions: SessionSettings::default(),
            split: PayeeSplit::default(),
            governance: GovernanceInfo::default(),
        }
    }
}

impl PortalConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let config: PortalConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.runtime.workers == 0 {
            return Err(ConfigError::Invalid("runtime.workers must be at least 1".into()));
        }
        if self.runtime.k_min == 0 {
            return Err(ConfigError::Invalid("runtime.k_min must be at least 1".into()));
        }
        if !self.split.is_valid() {
            return Err(ConfigError::Invalid("split shares must sum to 10000".into()));
        }
        if self.governance.model == GovernanceModel::Consortium && self.governance.members.is_empty() {
            return Err(ConfigError::Invalid("a consortium needs at least one member".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documented_example_parses() {
        let doc: String = include_str!("config.rs")
            .lines()
            .take_while(|l| l.starts_with("//!"))
            .map(|l| l.trim_start_matches("//!").strip_prefix(' ').unwrap_or(""))
            .skip_while(|l| !l.starts_with("```toml"))
            .skip(1)
            .take_while(|l| !l.starts_with("```"))
            .collect::<Vec<_>>()
            .join("\n");
        let config = PortalConfig::parse(&doc).unwrap();
        assert_eq!(config.runtime.workers, 2);
        assert_eq!(config.governance.members.len(), 1);
        assert_eq!(config.data.dir.as_deref(), Some(Path::new("var/portal")));
    }

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(PortalConfig::parse("").unwrap(), PortalConfig::default());
    }

    #[test]
    fn rejects_bad_values() {
        assert!(PortalConfig::parse("[split]\nholder = 1").is_err());
        assert!(PortalConfig::parse("[governance]\nmodel = \"consortium\"\nmembers = []").is_err());
        assert!(PortalConfig::parse("[runtime]\nworkers = 0").is_err());
        assert!(PortalConfig::parse("unknown = 1").is_err());
    }
}
