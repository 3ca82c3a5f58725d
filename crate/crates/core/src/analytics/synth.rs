//! Deterministic synthetic mail corpora with planted PII.
//!
//! Used by tests, benchmarks and the demo to exercise masking and the
//! end-to-end sovereignty checks without real personal data. Every planted
//! value is recorded in [`Sentinels`] so callers can scan outputs for it.

use std::path::Path;

use super::rng::SplitMix64;

const FIRST_NAMES: [&str; 20] = [
    "Marisol",
    "Cornelius",
    "Leopold",
    "Philippa",
    "Octavia",
    "Desmond",
    "Florence",
    "Beatrice",
    "Gwendolyn",
    "Rupert",
    "Imogen",
    "Jasper",
    "Reginald",
    "Edmund",
    "Harriet",
    "Agatha",
    "Clarissa",
    "Dorothea",
    "Frederick",
    "Matilda",
];
const SURNAMES: [&str; 20] = [
    "Quenneville",
    "Abernathy",
    "Vasquez",
    "Okonkwo",
    "Lindqvist",
    "Marchetti",
    "Delacroix",
    "Fairweather",
    "Hargreaves",
    "Kowalczyk",
    "Nakashima",
    "Oyelaran",
    "Pemberton",
    "Rasmussen",
    "Szymanski",
    "Thistlewood",
    "Underhill",
    "Vandermeer",
    "Whitlock",
    "Yarborough",
];
const STREETS: [&str; 10] =
    ["Louisiana", "Smith", "Travis", "Fannin", "Bagby", "Milam", "Walker", "Capitol", "Prairie", "Polk"];
const SUFFIXES: [&str; 6] = ["Street", "Avenue", "Road", "Lane", "Blvd", "Drive"];

const ENERGY: [&str; 16] = [
    "pipeline",
    "gas",
    "power",
    "trading",
    "contract",
    "capacity",
    "megawatt",
    "pricing",
    "supply",
    "demand",
    "forward",
    "curve",
    "settlement",
    "desk",
    "counterparty",
    "volume",
];
const OFFICE: [&str; 16] = [
    "meeting",
    "lunch",
    "schedule",
    "agenda",
    "conference",
    "travel",
    "report",
    "budget",
    "review",
    "deadline",
    "presentation",
    "calendar",
    "office",
    "team",
    "project",
    "update",
];
const MOOD: [&str; 12] = [
    "great",
    "good",
    "excellent",
    "happy",
    "thanks",
    "problem",
    "concern",
    "bad",
    "delay",
    "worried",
    "success",
    "loss",
];

/// Planted values, grouped by category.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Sentinels {
    pub ssns: Vec<String>,
    pub emails: Vec<String>,
    pub phones: Vec<String>,
    pub names: Vec<String>,
    pub addresses: Vec<String>,
}

impl Sentinels {
    /// `per_category` distinct values of each kind, reproducible from `seed`.
    pub fn generate(per_category: usize, seed: u64) -> Self {
        let mut rng = SplitMix64::new(seed);
        let mut s = Sentinels::default();
        for i in 0..per_category {
            s.ssns.push(format!("{:03}-{:02}-{:04}", 100 + rng.below(800), 10 + rng.below(89), 1000 + rng.below(9000)));
            let first = FIRST_NAMES[i % FIRST_NAMES.len()];
            let last = SURNAMES[(i * 7 + 3) % SURNAMES.len()];
            s.emails.push(format!("{}.{}{}@sentinel-mail.org", first.to_lowercase(), last.to_lowercase(), i));
            let (a, b, c) = (200 + rng.below(700), 200 + rng.below(700), 1000 + rng.below(9000));
            s.phones.push(match i % 3 {
                0 => format!("({a}) {b}-{c}"),
                1 => format!("{a}-{b}-{c}"),
                _ => format!("+1 {a}.{b}.{c}"),
            });
            s.names.push(format!("{first} {last}"));
            s.addresses.push(format!(
                "{} {} {}",
                100 + rng.below(9800),
                STREETS[i % STREETS.len()],
                SUFFIXES[i % SUFFIXES.len()]
            ));
        }
        s
    }

    pub fn all(&self) -> Vec<&str> {
        [&self.ssns, &self.emails, &self.phones, &self.names, &self.addresses]
            .into_iter()
            .flatten()
            .map(String::as_str)
            .collect()
    }

    /// The first given name of every planted name, for dictionary setup.
    pub fn given_names(&self) -> Vec<&str> {
        self.names.iter().filter_map(|n| n.split(' ').next()).collect()
    }
}

/// One synthetic message: relative path and raw RFC 822-style text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticMessage {
    pub path: String,
    pub raw: String,
}

fn pick<'a>(rng: &mut SplitMix64, words: &[&'a str]) -> &'a str {
    words[rng.below(words.len())]
}

fn sentence(rng: &mut SplitMix64, theme: &[&str]) -> String {
    let n = 5 + rng.below(6);
    let mut words: Vec<&str> = (0..n).map(|_| pick(rng, theme)).collect();
    words.push(pick(rng, &MOOD));
    let mut s = words.join(" ");
    s[..1].make_ascii_uppercase();
    s.push('.');
    s
}

/// `n_docs` messages cycling through every sentinel. Each sentinel appears at
/// least once when `n_docs` ≥ the number of sentinels per category.
pub fn corpus(n_docs: usize, sentinels: &Sentinels, seed: u64) -> Vec<SyntheticMessage> {
    let mut rng = SplitMix64::new(seed ^ 0x5EED_C0DE);
    let count = sentinels.names.len().max(1);
    (0..n_docs)
        .map(|i| {
            let j = i % count;
            let theme: &[&str] = if i % 2 == 0 { &ENERGY } else { &OFFICE };
            let sender = sentinels.emails.get(j).cloned().unwrap_or_else(|| format!("user{j}@example.com"));
            let recipient = sentinels
                .emails
                .get((j + 1) % count)
                .cloned()
                .unwrap_or_else(|| format!("user{}@example.com", j + 1));
            let month = 1 + (i % 12);
            let day = 1 + (i % 28);
            let mut body = Vec::new();
            if let Some(name) = sentinels.names.get(j) {
                body.push(format!("Dear {name},"));
            }
            body.push(sentence(&mut rng, theme));
            if let Some(ssn) = sentinels.ssns.get(j) {
                body.push(format!("Her SSN is {ssn} for the file."));
            }
            body.push(sentence(&mut rng, theme));
            if let Some(phone) = sentinels.phones.get(j) {
                body.push(format!("Call me at {phone} tomorrow."));
            }
            if let Some(addr) = sentinels.addresses.get(j) {
                body.push(format!("Send the package to {addr} please."));
            }
            if let Some(name) = sentinels.names.get((j + 2) % count) {
                body.push(format!("I spoke with {name} about it."));
            }
            if let Some(email) = sentinels.emails.get((j + 3) % count) {
                body.push(format!("Copy {email} on the reply."));
            }
            body.push(sentence(&mut rng, theme));
            SyntheticMessage {
                path: format!("mailbox{}/{:04}.", i % 4, i),
                raw: format!(
                    "Message-ID: <{i}.synthetic>\nDate: Mon, {day} {} 2001 09:{:02}:00 -0700\nFrom: {sender}\nTo: {recipient}\nSubject: {} {}\n\n{}\n",
                    ["Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"][month - 1],
                    i % 60,
                    pick(&mut rng, theme),
                    pick(&mut rng, theme),
                    body.join(" "),
                ),
            }
        })
        .collect()
}

/// Write messages under `root`, creating directories as needed.
pub fn write_corpus(root: &Path, messages: &[SyntheticMessage]) -> std::io::Result<()> {
    for m in messages {
        let path = root.join(&m.path);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(path, &m.raw)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::mask::NameDictionary;

    #[test]
    fn sentinels_are_distinct_and_repeatable() {
        let a = Sentinels::generate(5, 9);
        assert_eq!(a, Sentinels::generate(5, 9));
        let all = a.all();
        assert_eq!(all.len(), 25);
        let unique: std::collections::BTreeSet<_> = all.iter().collect();
        assert_eq!(unique.len(), 25);
    }

    #[test]
    fn every_sentinel_is_planted() {
        let s = Sentinels::generate(5, 1);
        let docs = corpus(20, &s, 1);
        let text: String = docs.iter().map(|d| d.raw.as_str()).collect();
        for v in s.all() {
            assert!(text.contains(v), "{v} missing");
        }
    }

    #[test]
    fn planted_given_names_are_in_the_bundled_dictionary() {
        let dict = NameDictionary::builtin();
        let s = Sentinels::generate(20, 1);
        for n in s.given_names() {
            assert!(dict.contains(n), "{n} not in dictionary");
        }
    }
}
