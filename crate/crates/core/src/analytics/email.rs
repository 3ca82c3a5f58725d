//! Best-effort parsing of maildir-style messages.

use chrono::DateTime;
use serde::{Deserialize, Serialize};

use crate::canonical::sha256_hex;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmailDocument {
    pub doc_id: String,
    pub sender: String,
    pub recipients: Vec<String>,
    /// Seconds since the epoch, UTC. `None` when the header is missing or unparseable.
    pub date: Option<i64>,
    pub subject: String,
    pub body: String,
}

/// Split `raw` into headers and body at the first blank line.
///
/// Recognised headers are `From`, `To`, `Date` and `Subject` (case-insensitive);
/// folded continuation lines are joined to the header above them. The
/// document id defaults to a content hash; corpus loading replaces it with the
/// file's relative path.
pub fn parse_email(raw: &str) -> EmailDocument {
    let mut doc = EmailDocument {
        doc_id: sha256_hex(raw.as_bytes())[..16].to_string(),
        sender: String::new(),
        recipients: Vec::new(),
        date: None,
        subject: String::new(),
        body: String::new(),
    };

    let (header_block, body) = split_header_block(raw);
    doc.body = body.to_string();

    let mut headers: Vec<(String, String)> = Vec::new();
    for line in header_block.lines() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.starts_with([' ', '\t']) {
            if let Some((_, value)) = headers.last_mut() {
                value.push(' ');
                value.push_str(line.trim());
            }
            continue;
        }
        if let Some((name, value)) = line.split_once(':') {
            headers.push((name.trim().to_ascii_lowercase(), value.trim().to_string()));
        }
    }

    for (name, value) in headers {
        match name.as_str() {
            "from" => doc.sender = value,
            "to" => {
                doc.recipients = value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::to_string).collect()
            }
            "date" => doc.date = parse_date(&value),
            "subject" => doc.subject = value,
            _ => {}
        }
    }
    doc
}

fn split_header_block(raw: &str) -> (&str, &str) {
    let mut offset = 0;
    for line in raw.split_inclusive('\n') {
        let content = line.trim_end_matches(['\n', '\r']);
        if content.is_empty() {
            return (&raw[..offset], &raw[offset + line.len()..]);
        }
        offset += line.len();
    }
    (raw, "")
}

/// RFC 2822 dates with an optional trailing `(TZ)` comment, or RFC 3339.
pub fn parse_date(value: &str) -> Option<i64> {
    let trimmed = match value.find('(') {
        Some(i) => value[..i].trim(),
        None => value.trim(),
    };
    DateTime::parse_from_rfc2822(trimmed)
        .or_else(|_| DateTime::parse_from_rfc3339(trimmed))
        .ok()
        .map(|dt| dt.timestamp())
}

/// `YYYY-MM` of a UTC timestamp.
pub fn month_key(ts: i64) -> Option<String> {
    DateTime::from_timestamp(ts, 0).map(|dt| dt.format("%Y-%m").to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_message() {
        let doc = parse_email("From: a@x\nTo: b@y, c@z\nSubject: hi\n\nbody");
        assert_eq!(doc.sender, "a@x");
        assert_eq!(doc.recipients, vec!["b@y", "c@z"]);
        assert_eq!(doc.subject, "hi");
        assert_eq!(doc.body, "body");
        assert_eq!(doc.date, None);
    }

    #[test]
    fn missing_subject_and_header_only() {
        let doc = parse_email("From: a@x\nTo: b@y\n\nhello\n");
        assert_eq!(doc.subject, "");
        assert_eq!(doc.body, "hello\n");
        let header_only = parse_email("From: a@x\nSubject: s");
        assert_eq!(header_only.body, "");
        assert_eq!(header_only.subject, "s");
    }

    #[test]
    fn enron_style_headers() {
        let raw = "Message-ID: <1.JavaMail.evans@thyme>\r\n\
                   Date: Mon, 14 May 2001 16:39:00 -0700 (PDT)\r\n\
                   From: phillip.allen@enron.com\r\n\
                   To: tim.belden@enron.com,\r\n\
                   \tjohn.lavorato@enron.com\r\n\
                   Subject: Re: forecast\r\n\
                   X-Folder: \\Phillip_Allen_Jan2002_1\\Allen, Phillip K.\\'Sent Mail\r\n\
                   \r\n\
                   Here is our forecast\r\n";
        let doc = parse_email(raw);
        assert_eq!(doc.sender, "phillip.allen@enron.com");
        assert_eq!(doc.recipients, vec!["tim.belden@enron.com", "john.lavorato@enron.com"]);
        assert_eq!(doc.subject, "Re: forecast");
        assert_eq!(doc.date, Some(989883540));
        assert_eq!(month_key(doc.date.unwrap()).unwrap(), "2001-05");
        assert_eq!(doc.body, "Here is our forecast\r\n");
    }

    #[test]
    fn unparseable_date_is_none() {
        assert_eq!(parse_email("Date: sometime\n\nx").date, None);
    }
}
