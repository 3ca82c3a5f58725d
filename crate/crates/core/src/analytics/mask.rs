//! Typed PII masking and address pseudonymization.
//!
//! Passes run in a fixed order: SSN, email, phone, names, street addresses.
//! Each pass replaces matches with a typed placeholder. The whole pipeline is
//! repeated until the text stops changing, so the output never contains a
//! pattern match and masking an already-masked text is a no-op.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::email::EmailDocument;

pub const NAME_PLACEHOLDER: &str = "⟨NAME⟩";
pub const EMAIL_PLACEHOLDER: &str = "⟨EMAIL⟩";
pub const SSN_PLACEHOLDER: &str = "⟨SSN⟩";
pub const PHONE_PLACEHOLDER: &str = "⟨PHONE⟩";
pub const ADDRESS_PLACEHOLDER: &str = "⟨ADDRESS⟩";

pub const PLACEHOLDERS: [&str; 5] =
    [NAME_PLACEHOLDER, EMAIL_PLACEHOLDER, SSN_PLACEHOLDER, PHONE_PLACEHOLDER, ADDRESS_PLACEHOLDER];

const SALUTATIONS: [&str; 5] = ["Dear", "Mr.", "Mrs.", "Ms.", "Dr."];
const MAX_ROUNDS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PiiCategory {
    Ssn,
    Email,
    Phone,
    Name,
    Address,
}

impl PiiCategory {
    pub fn placeholder(self) -> &'static str {
        match self {
            PiiCategory::Ssn => SSN_PLACEHOLDER,
            PiiCategory::Email => EMAIL_PLACEHOLDER,
            PiiCategory::Phone => PHONE_PLACEHOLDER,
            PiiCategory::Name => NAME_PLACEHOLDER,
            PiiCategory::Address => ADDRESS_PLACEHOLDER,
        }
    }
}

/// The regex-detectable categories. Names need the dictionary and are not here.
#[derive(Debug, Clone)]
pub struct PiiPatterns {
    ssn: Regex,
    email: Regex,
    phone: Regex,
    address: Regex,
}

impl Default for PiiPatterns {
    fn default() -> Self {
        PiiPatterns::shared().clone()
    }
}

impl PiiPatterns {
    pub fn shared() -> &'static PiiPatterns {
        static PATTERNS: OnceLock<PiiPatterns> = OnceLock::new();
        PATTERNS.get_or_init(|| PiiPatterns {
            ssn: Regex::new(r"\d{3}-\d{2}-\d{4}").unwrap(),
            email: Regex::new(r"[A-Za-z0-9._%+\-]+@[A-Za-z0-9\-]+(?:\.[A-Za-z0-9\-]+)*\.[A-Za-z]{2,}").unwrap(),
            phone: Regex::new(r"(?:\+?1[-. ])?\(?\d{3}\)?[-. ]\d{3}[-. ]\d{4}").unwrap(),
            address: Regex::new(
                r"\b\d{1,6}(?: [A-Z][a-z]+){1,4} (?:(?:Street|Avenue|Road|Blvd|Drive|Lane|Ave|St|Rd)\b\.?|Dr\.)",
            )
            .unwrap(),
        })
    }

    fn regex(&self, category: PiiCategory) -> Option<&Regex> {
        match category {
            PiiCategory::Ssn => Some(&self.ssn),
            PiiCategory::Email => Some(&self.email),
            PiiCategory::Phone => Some(&self.phone),
            PiiCategory::Address => Some(&self.address),
            PiiCategory::Name => None,
        }
    }

    /// First category with a match anywhere in `text`.
    pub fn find_any(&self, text: &str) -> Option<PiiCategory> {
        [PiiCategory::Ssn, PiiCategory::Email, PiiCategory::Phone, PiiCategory::Address]
            .into_iter()
            .find(|c| self.regex(*c).is_some_and(|r| r.is_match(text)))
    }

    pub fn is_match(&self, category: PiiCategory, text: &str) -> bool {
        self.regex(category).is_some_and(|r| r.is_match(text))
    }
}

/// Given names, stored lowercase.
#[derive(Debug, Clone, Default)]
pub struct NameDictionary {
    names: HashSet<String>,
}

impl NameDictionary {
    /// The bundled list of common given names.
    pub fn builtin() -> &'static NameDictionary {
        static DICT: OnceLock<NameDictionary> = OnceLock::new();
        DICT.get_or_init(|| NameDictionary::from_word_list(include_str!("../../data/given_names.txt")))
    }

    /// One token per line, `#` starts a comment line.
    pub fn from_word_list(text: &str) -> Self {
        NameDictionary { names: super::parse_word_list(text).into_iter().collect() }
    }

    pub fn from_names<I: IntoIterator<Item = S>, S: AsRef<str>>(names: I) -> Self {
        NameDictionary { names: names.into_iter().map(|s| s.as_ref().to_lowercase()).collect() }
    }

    pub fn contains(&self, token: &str) -> bool {
        self.names.contains(&token.to_lowercase())
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskCounts {
    pub ssn: u64,
    pub email: u64,
    pub phone: u64,
    pub name: u64,
    pub address: u64,
}

impl MaskCounts {
    fn bump(&mut self, category: PiiCategory, n: u64) {
        let slot = match category {
            PiiCategory::Ssn => &mut self.ssn,
            PiiCategory::Email => &mut self.email,
            PiiCategory::Phone => &mut self.phone,
            PiiCategory::Name => &mut self.name,
            PiiCategory::Address => &mut self.address,
        };
        *slot += n;
    }

    pub fn add(&mut self, other: &MaskCounts) {
        self.ssn += other.ssn;
        self.email += other.email;
        self.phone += other.phone;
        self.name += other.name;
        self.address += other.address;
    }

    pub fn total(&self) -> u64 {
        self.ssn + self.email + self.phone + self.name + self.address
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskedDocument {
    pub doc_id: String,
    pub date: Option<i64>,
    pub masked_body: String,
    pub mask_counts: MaskCounts,
    pub sender_pseudonym: Option<String>,
    pub recipient_pseudonyms: Vec<String>,
}

/// Bijection from normalized address to `P<n>`, numbered by first appearance from 1.
#[derive(Debug, Clone, Default)]
pub struct Pseudonymizer {
    assigned: HashMap<String, usize>,
}

impl Pseudonymizer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Pseudonym for `address`, or `None` for a blank address.
    pub fn pseudonym(&mut self, address: &str) -> Option<String> {
        let key = address.trim().to_lowercase();
        if key.is_empty() {
            return None;
        }
        let next = self.assigned.len() + 1;
        let n = *self.assigned.entry(key).or_insert(next);
        Some(format!("P{n}"))
    }

    pub fn len(&self) -> usize {
        self.assigned.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assigned.is_empty()
    }
}

fn replace_counting(text: &str, re: &Regex, placeholder: &str) -> (String, u64) {
    let mut n = 0;
    let out = re.replace_all(text, |_: &regex::Captures<'_>| {
        n += 1;
        placeholder
    });
    (out.into_owned(), n)
}

fn capitalized_token() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\b[A-Z][a-z]+(?:[A-Z][a-z]+)?(?:['\-][A-Z][a-z]+)*\b").unwrap())
}

fn follows_salutation(text: &str, start: usize) -> bool {
    let before = text[..start].trim_end_matches([' ', '\t']);
    if before.len() == text[..start].len() {
        // no whitespace between the previous token and this one
        return false;
    }
    SALUTATIONS.iter().any(|s| {
        before.ends_with(s) && before[..before.len() - s.len()].chars().next_back().is_none_or(|c| !c.is_alphanumeric())
    })
}

/// Mask runs of capitalized tokens that start at a dictionary name or right after a salutation.
fn mask_names(text: &str, dict: &NameDictionary) -> (String, u64) {
    let tokens: Vec<(usize, usize)> = capitalized_token().find_iter(text).map(|m| (m.start(), m.end())).collect();
    // group into runs separated only by spaces/tabs
    let mut runs: Vec<Vec<(usize, usize)>> = Vec::new();
    for tok in tokens {
        match runs.last_mut() {
            Some(run)
                if {
                    let gap = &text[run.last().unwrap().1..tok.0];
                    !gap.is_empty() && gap.chars().all(|c| c == ' ' || c == '\t')
                } =>
            {
                run.push(tok)
            }
            _ => runs.push(vec![tok]),
        }
    }

    let mut spans: Vec<(usize, usize)> = Vec::new();
    for run in &runs {
        if let Some(i) = run.iter().position(|&(s, e)| dict.contains(&text[s..e]) || follows_salutation(text, s)) {
            spans.push((run[i].0, run.last().unwrap().1));
        }
    }

    let mut out = String::with_capacity(text.len());
    let mut cursor = 0;
    for &(s, e) in &spans {
        out.push_str(&text[cursor..s]);
        out.push_str(NAME_PLACEHOLDER);
        cursor = e;
    }
    out.push_str(&text[cursor..]);
    (out, spans.len() as u64)
}

fn mask_round(text: &str, dict: &NameDictionary, patterns: &PiiPatterns, counts: &mut MaskCounts) -> String {
    let mut current = text.to_string();
    for category in [PiiCategory::Ssn, PiiCategory::Email, PiiCategory::Phone] {
        let (next, n) = replace_counting(&current, patterns.regex(category).unwrap(), category.placeholder());
        counts.bump(category, n);
        current = next;
    }
    let (next, n) = mask_names(&current, dict);
    counts.bump(PiiCategory::Name, n);
    let (next, n) = replace_counting(&next, &patterns.address, ADDRESS_PLACEHOLDER);
    counts.bump(PiiCategory::Address, n);
    next
}

/// Mask free text. Returns the masked text and per-category replacement counts.
pub fn mask_text(text: &str, dict: &NameDictionary) -> (String, MaskCounts) {
    let patterns = PiiPatterns::shared();
    let mut counts = MaskCounts::default();
    let mut current = text.to_string();
    for _ in 0..MAX_ROUNDS {
        let next = mask_round(&current, dict, patterns, &mut counts);
        if next == current {
            break;
        }
        current = next;
    }
    (current, counts)
}

/// Mask one document, assigning pseudonyms through the corpus-wide `pseudonyms` map.
pub fn mask_pii(doc: &EmailDocument, dict: &NameDictionary, pseudonyms: &mut Pseudonymizer) -> MaskedDocument {
    let (masked_body, mask_counts) = mask_text(&doc.body, dict);
    let sender_pseudonym = pseudonyms.pseudonym(&doc.sender);
    let recipient_pseudonyms = doc.recipients.iter().filter_map(|r| pseudonyms.pseudonym(r)).collect();
    MaskedDocument {
        doc_id: doc.doc_id.clone(),
        date: doc.date,
        masked_body,
        mask_counts,
        sender_pseudonym,
        recipient_pseudonyms,
    }
}

/// Mask a corpus in order with one shared pseudonym table.
pub fn mask_corpus(docs: &[EmailDocument], dict: &NameDictionary) -> Vec<MaskedDocument> {
    let mut pseudonyms = Pseudonymizer::new();
    docs.iter().map(|d| mask_pii(d, dict, &mut pseudonyms)).collect()
}

/// Totals across a masked corpus, keyed by category name.
pub fn total_counts(docs: &[MaskedDocument]) -> BTreeMap<&'static str, u64> {
    let mut sum = MaskCounts::default();
    for d in docs {
        sum.add(&d.mask_counts);
    }
    BTreeMap::from([
        ("address", sum.address),
        ("email", sum.email),
        ("name", sum.name),
        ("phone", sum.phone),
        ("ssn", sum.ssn),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dict() -> NameDictionary {
        NameDictionary::from_names(["john", "mary", "jeff"])
    }

    #[test]
    fn ssn_pass() {
        let (out, counts) = mask_text("my SSN is 123-45-6789", &dict());
        assert_eq!(out, "my SSN is ⟨SSN⟩");
        assert_eq!(counts.ssn, 1);
        assert_eq!(counts.total(), 1);
    }

    #[test]
    fn salutation_rule() {
        let (out, counts) = mask_text("Dear John Smith,", &NameDictionary::default());
        assert_eq!(out, "Dear ⟨NAME⟩,");
        assert_eq!(counts.name, 1);
        let (out, _) = mask_text("Thanks to Mr. Skilling and Dr. Lay.", &NameDictionary::default());
        assert_eq!(out, "Thanks to Mr. ⟨NAME⟩ and Dr. ⟨NAME⟩.");
    }

    #[test]
    fn dictionary_rule_masks_run_from_first_name() {
        let (out, _) = mask_text("Please ask Jeff Skilling today, Thanks Mary", &dict());
        assert_eq!(out, "Please ask ⟨NAME⟩ today, Thanks ⟨NAME⟩");
        let (out, _) = mask_text("Greetings from Houston", &dict());
        assert_eq!(out, "Greetings from Houston");
    }

    #[test]
    fn emails_phones_addresses() {
        let (out, c) = mask_text(
            "mail jeff.s@enron.com or call (713) 853-6161 / +1 713.555.0199; office at 1400 Smith Street.",
            &dict(),
        );
        assert_eq!(out, "mail ⟨EMAIL⟩ or call ⟨PHONE⟩ / ⟨PHONE⟩; office at ⟨ADDRESS⟩");
        assert_eq!((c.email, c.phone, c.address), (1, 2, 1));
        let (out, _) = mask_text("meet at 22 Oak Ridge Dr. tomorrow, or 5 Elm St", &dict());
        assert_eq!(out, "meet at ⟨ADDRESS⟩ tomorrow, or ⟨ADDRESS⟩");
    }

    #[test]
    fn masking_is_idempotent_on_examples() {
        for text in [
            "Dear John Smith, my SSN is 123-45-6789 and phone 555-123-4567.",
            "Mr. Lay lives at 12 Main St. Email: k.lay@enron.com",
            "nothing sensitive here",
        ] {
            let (once, _) = mask_text(text, &dict());
            let (twice, counts) = mask_text(&once, &dict());
            assert_eq!(once, twice);
            assert_eq!(counts.total(), 0);
        }
    }

    #[test]
    fn pseudonyms_follow_first_appearance() {
        let mut p = Pseudonymizer::new();
        assert_eq!(p.pseudonym("a@x").as_deref(), Some("P1"));
        assert_eq!(p.pseudonym("b@y").as_deref(), Some("P2"));
        assert_eq!(p.pseudonym(" A@X ").as_deref(), Some("P1"));
        assert_eq!(p.pseudonym("  "), None);
        assert_eq!(p.len(), 2);
    }

    #[test]
    fn document_masking_uses_shared_pseudonyms() {
        let docs = vec![
            super::super::email::parse_email("From: a@x\nTo: b@y\n\nhi John"),
            super::super::email::parse_email("From: b@y\nTo: a@x, c@z\n\nhello"),
        ];
        let masked = mask_corpus(&docs, &dict());
        assert_eq!(masked[0].sender_pseudonym.as_deref(), Some("P1"));
        assert_eq!(masked[0].recipient_pseudonyms, vec!["P2"]);
        assert_eq!(masked[1].sender_pseudonym.as_deref(), Some("P2"));
        assert_eq!(masked[1].recipient_pseudonyms, vec!["P1", "P3"]);
        assert_eq!(masked[0].masked_body, "hi ⟨NAME⟩");
    }

    #[test]
    fn builtin_dictionary_is_large() {
        let d = NameDictionary::builtin();
        assert!(d.len() > 4000);
        assert!(d.contains("John"));
    }
}
