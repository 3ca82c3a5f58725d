#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;

use cliox_portal::{serve, state_from_config, AppState, PortalConfig};
use serde_json::Value;

pub struct Portal {
    pub base: String,
    pub state: Arc<AppState>,
    pub dir: tempfile::TempDir,
}

impl Portal {
    /// Start a portal on a free port. `setup` fills the corpus root first.
    pub fn start(persist: bool, setup: impl FnOnce(&Path)) -> Portal {
        let dir = tempfile::tempdir().unwrap();
        setup(dir.path());
        let mut config = PortalConfig::default();
        config.data.corpus_root = Some(dir.path().to_path_buf());
        if persist {
            config.data.dir = Some(dir.path().join("state"));
        }
        let state = state_from_config(config).unwrap();
        let (tx, rx) = std::sync::mpsc::channel();
        let served = state.clone();
        std::thread::spawn(move || {
            let rt = tokio::runtime::Builder::new_multi_thread().worker_threads(2).enable_all().build().unwrap();
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
                tx.send(listener.local_addr().unwrap()).unwrap();
                serve(served, listener).await.unwrap();
            });
        });
        let addr = rx.recv().unwrap();
        Portal { base: format!("http://{addr}"), state, dir }
    }

    pub fn home(&self) -> PathBuf {
        self.dir.path().join("home")
    }

    pub fn cliox(&self, args: &[&str]) -> Run {
        run_cliox(&self.home(), &self.base, args)
    }
}

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Run {
    pub fn json(&self) -> Value {
        serde_json::from_str(&self.stdout).unwrap_or_else(|e| panic!("not JSON ({e}): {}", self.stdout))
    }
}

pub fn run_cliox(home: &Path, api: &str, args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_cliox"))
        .args(args)
        .env("CLIOX_HOME", home)
        .env("CLIOX_API", api)
        .env_remove("CLIOX_PROFILE")
        .output()
        .unwrap();
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

/// Type skeleton of a JSON document: keys kept, values replaced by type names.
pub fn shape(v: &Value) -> Value {
    match v {
        Value::Null => "null".into(),
        Value::Bool(_) => "bool".into(),
        Value::Number(_) => "number".into(),
        Value::String(_) => "string".into(),
        Value::Array(items) => Value::Array(items.first().map(shape).into_iter().collect()),
        Value::Object(map) => Value::Object(map.iter().map(|(k, v)| (k.clone(), shape(v))).collect()),
    }
}

pub fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn copy_dir(from: &Path, to: &Path) {
    for file in walk(from) {
        let dest = to.join(file.strip_prefix(from).unwrap());
        std::fs::create_dir_all(dest.parent().unwrap()).unwrap();
        std::fs::copy(&file, dest).unwrap();
    }
}

pub fn walk(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out
}
