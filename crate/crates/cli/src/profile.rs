//! Local profiles under `~/.cliox/<profile>/`.
//!
//! A profile stands in for a wallet: it holds the identity's DID, the access
//! key that unlocks it on the server and a cached session token. Key and
//! session files are created owner-readable only.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::client::Client;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliProfile {
    pub profile_name: String,
    pub api_base_url: String,
    pub did: String,
    pub key_file: PathBuf,
    pub session_file: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SessionCache {
    session_token: String,
    expires_at: i64,
}

/// `$CLIOX_HOME`, else `$HOME/.cliox`.
pub fn base_dir() -> PathBuf {
    if let Some(dir) = std::env::var_os("CLIOX_HOME") {
        return PathBuf::from(dir);
    }
    let home = std::env::var_os("HOME").map_or_else(|| PathBuf::from("."), PathBuf::from);
    home.join(".cliox")
}

fn write_private(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let mut opts = OpenOptions::new();
    opts.write(true).create(true).truncate(true);
    #[cfg(unix)]
    {
        use std::os::unix::fs::OpenOptionsExt;
        opts.mode(0o600);
    }
    opts.open(path)?.write_all(contents)
}

fn now() -> i64 {
    std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_secs() as i64)
}

impl CliProfile {
    pub fn dir(name: &str) -> PathBuf {
        base_dir().join(name)
    }

    pub fn exists(name: &str) -> bool {
        Self::dir(name).join("profile.json").is_file()
    }

    pub fn load(name: &str) -> Result<Self, CliError> {
        let path = Self::dir(name).join("profile.json");
        let text = std::fs::read_to_string(&path).map_err(|_| CliError::NoProfile(name.to_string()))?;
        serde_json::from_str(&text).map_err(|e| CliError::Local(format!("corrupt profile `{name}`: {e}")))
    }

    /// Store a fresh identity, replacing any previous one in this profile.
    pub fn create(name: &str, api: &str, did: &str, access_key: &str) -> Result<Self, CliError> {
        let dir = Self::dir(name);
        std::fs::create_dir_all(&dir)?;
        let profile = CliProfile {
            profile_name: name.to_string(),
            api_base_url: api.to_string(),
            did: did.to_string(),
            key_file: dir.join("access.key"),
            session_file: dir.join("session.json"),
        };
        write_private(&profile.key_file, access_key.as_bytes())?;
        let _ = std::fs::remove_file(&profile.session_file);
        let doc = serde_json::to_vec_pretty(&profile).map_err(|e| CliError::Local(e.to_string()))?;
        std::fs::write(dir.join("profile.json"), doc)?;
        Ok(profile)
    }

    /// A valid session token, reusing the cache when it has not expired.
    pub fn session(&self, client: &Client) -> Result<String, CliError> {
        if let Ok(text) = std::fs::read_to_string(&self.session_file) {
            if let Ok(cache) = serde_json::from_str::<SessionCache>(&text) {
                if cache.expires_at > now() + 30 {
                    return Ok(cache.session_token);
                }
            }
        }
        self.refresh_session(client)
    }

    pub fn refresh_session(&self, client: &Client) -> Result<String, CliError> {
        let access_key =
            std::fs::read_to_string(&self.key_file).map_err(|_| CliError::NoProfile(self.profile_name.clone()))?;
        let resp = client.post("/sessions", None, &json!({ "did": self.did, "access_key": access_key.trim() }))?;
        let token = resp["session_token"].as_str().unwrap_or_default().to_string();
        let cache = SessionCache { session_token: token.clone(), expires_at: resp["expires_at"].as_i64().unwrap_or(0) };
        write_private(&self.session_file, &serde_json::to_vec(&cache).map_err(|e| CliError::Local(e.to_string()))?)?;
        Ok(token)
    }
}
