//! Loading a directory tree of plain-text messages.

use std::path::Path;

use walkdir::WalkDir;

use super::email::{parse_email, EmailDocument};
use super::AnalyticsError;

/// Parse every regular file under `root`, walking in lexicographic path order.
///
/// Document ids are paths relative to `root` with `/` separators. Invalid
/// UTF-8 is decoded lossily. Errors never mention the root path.
pub fn load_corpus(root: impl AsRef<Path>) -> Result<Vec<EmailDocument>, AnalyticsError> {
    let root = root.as_ref();
    if !root.is_dir() {
        return Err(AnalyticsError::CorpusLoad("corpus root is not a readable directory".into()));
    }
    let mut docs = Vec::new();
    for entry in WalkDir::new(root).follow_links(false).sort_by_file_name() {
        let entry = entry.map_err(|_| AnalyticsError::CorpusLoad("corpus walk failed".into()))?;
        if !entry.file_type().is_file() {
            continue;
        }
        let bytes = std::fs::read(entry.path())
            .map_err(|_| AnalyticsError::CorpusLoad("a corpus file could not be read".into()))?;
        let mut doc = parse_email(&String::from_utf8_lossy(&bytes));
        let rel = entry.path().strip_prefix(root).unwrap_or(entry.path());
        doc.doc_id = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
        docs.push(doc);
    }
    Ok(docs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn walks_in_path_order() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir_all(dir.path().join("b/inbox")).unwrap();
        std::fs::create_dir_all(dir.path().join("a")).unwrap();
        for (p, s) in [("b/inbox/2", "x"), ("b/inbox/10", "y"), ("a/1", "z"), ("c", "w")] {
            std::fs::write(dir.path().join(p), format!("Subject: {s}\n\n{s}")).unwrap();
        }
        std::fs::write(dir.path().join("bad"), [0xff, 0xfe, b'\n', b'\n', b'o', b'k']).unwrap();
        let docs = load_corpus(dir.path()).unwrap();
        let ids: Vec<_> = docs.iter().map(|d| d.doc_id.as_str()).collect();
        assert_eq!(ids, vec!["a/1", "b/inbox/10", "b/inbox/2", "bad", "c"]);
        assert_eq!(docs[3].body, "ok");
        let again: Vec<_> = load_corpus(dir.path()).unwrap().into_iter().map(|d| d.doc_id).collect();
        assert_eq!(again, ids);
    }

    #[test]
    fn empty_and_missing_roots() {
        let dir = tempfile::tempdir().unwrap();
        assert!(load_corpus(dir.path()).unwrap().is_empty());
        let err = load_corpus(dir.path().join("missing")).unwrap_err();
        assert!(matches!(err, AnalyticsError::CorpusLoad(_)));
        assert!(!err.to_string().contains("missing"));
    }
}
