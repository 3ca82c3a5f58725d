//! Canonical document form used for signing and digesting.
//!
//! Canonical form is JSON with object keys sorted and no insignificant
//! whitespace, encoded as UTF-8. `serde_json::Value` keeps object keys in a
//! `BTreeMap`, so routing a value through it sorts every nested object.

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Serialize `value` into canonical bytes.
pub fn canonical_bytes<T: Serialize + ?Sized>(value: &T) -> Vec<u8> {
    let tree = serde_json::to_value(value).expect("canonical form requires a JSON-representable value");
    serde_json::to_vec(&tree).expect("serializing a JSON value cannot fail")
}

/// Canonical form as a `String`.
pub fn canonical_string<T: Serialize + ?Sized>(value: &T) -> String {
    String::from_utf8(canonical_bytes(value)).expect("JSON output is UTF-8")
}

/// Lowercase hex SHA-256.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256(bytes: &[u8]) -> [u8; 32] {
    Sha256::digest(bytes).into()
}

/// SHA-256 of the canonical serialization of `value`.
pub fn digest_of<T: Serialize + ?Sized>(value: &T) -> String {
    sha256_hex(&canonical_bytes(value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn keys_are_sorted_and_compact() {
        let v = json!({"b": 1, "a": {"z": [1, 2], "c": "x y"}});
        assert_eq!(canonical_string(&v), r#"{"a":{"c":"x y","z":[1,2]},"b":1}"#);
    }

    #[test]
    fn sha256_known_vector() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn struct_field_order_does_not_matter() {
        #[derive(Serialize)]
        struct A {
            zeta: u8,
            alpha: u8,
        }
        assert_eq!(canonical_string(&A { zeta: 1, alpha: 2 }), r#"{"alpha":2,"zeta":1}"#);
    }
}
