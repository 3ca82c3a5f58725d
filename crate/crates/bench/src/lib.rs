//! Shared inputs for the benchmarks.

use cliox_core::analytics::mask::{mask_corpus, NameDictionary};
use cliox_core::analytics::synth::{corpus, Sentinels};
use cliox_core::analytics::{parse_email, EmailDocument, MaskedDocument};

/// `n` parsed synthetic messages with planted PII.
pub fn raw_docs(n: usize) -> Vec<EmailDocument> {
    let sentinels = Sentinels::generate(20, 1);
    corpus(n, &sentinels, 1).iter().map(|m| parse_email(&m.raw)).collect()
}

/// The same messages after masking.
pub fn masked_docs(n: usize) -> Vec<MaskedDocument> {
    mask_corpus(&raw_docs(n), NameDictionary::builtin())
}
