//! Thin blocking client for the portal routes.

use std::time::Duration;

use reqwest::blocking::Client as Http;
use reqwest::Method;
use serde_json::Value;

use crate::error::CliError;

pub struct Client {
    base: String,
    http: Http,
}

impl Client {
    pub fn new(base: &str) -> Result<Self, CliError> {
        let http =
            Http::builder().timeout(Duration::from_secs(60)).build().map_err(|e| CliError::Local(e.to_string()))?;
        Ok(Client { base: base.trim_end_matches('/').to_string(), http })
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    pub fn call(
        &self,
        method: Method,
        path: &str,
        token: Option<&str>,
        body: Option<&Value>,
    ) -> Result<Value, CliError> {
        let url = format!("{}{path}", self.base);
        let mut req = self.http.request(method, &url);
        if let Some(t) = token {
            req = req.bearer_auth(t);
        }
        if let Some(b) = body {
            req = req.json(b);
        }
        let resp = req.send().map_err(|e| CliError::Connection {
            url: self.base.clone(),
            reason: if e.is_connect() { "connection refused".into() } else { e.to_string() },
        })?;
        let status = resp.status();
        let text = resp.text().map_err(|e| CliError::Connection { url: self.base.clone(), reason: e.to_string() })?;
        let value: Value =
            if text.is_empty() { Value::Null } else { serde_json::from_str(&text).unwrap_or(Value::Null) };
        if status.is_success() {
            return Ok(value);
        }
        let field = |k: &str| value.get(k).and_then(Value::as_str).map(str::to_string);
        Err(CliError::Api {
            status: status.as_u16(),
            code: field("error").unwrap_or_else(|| status.to_string()),
            message: field("message").unwrap_or_default(),
            body: value,
        })
    }

    pub fn get(&self, path: &str, token: Option<&str>) -> Result<Value, CliError> {
        self.call(Method::GET, path, token, None)
    }

    pub fn post(&self, path: &str, token: Option<&str>, body: &Value) -> Result<Value, CliError> {
        self.call(Method::POST, path, token, Some(body))
    }
}

/// Percent-encode a query-string value.
pub fn encode(value: &str) -> String {
    value
        .bytes()
        .map(|b| match b {
            b'A'..=b'Z' | b'a'..=b'z' | b'0'..=b'9' | b'-' | b'_' | b'.' | b'~' => (b as char).to_string(),
            _ => format!("%{b:02X}"),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    #[test]
    fn encodes_reserved_bytes() {
        assert_eq!(super::encode("enron mail&x=é"), "enron%20mail%26x%3D%C3%A9");
    }
}
