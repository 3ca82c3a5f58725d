//! Escrow split arithmetic in basis points.

use serde::{Deserialize, Serialize};

use crate::ids::Did;

pub const TOTAL_BP: u32 = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Payee {
    pub did: Did,
    pub share_bp: u32,
}

impl Payee {
    pub fn new(did: Did, share_bp: u32) -> Self {
        Payee { did, share_bp }
    }
}

/// Shares must be non-empty and sum to exactly 10000 bp.
pub fn is_valid_split(payees: &[Payee]) -> bool {
    !payees.is_empty() && payees.iter().map(|p| u64::from(p.share_bp)).sum::<u64>() == u64::from(TOTAL_BP)
}

/// Equal split over `n` payees; leftover basis points go to the first payee.
pub fn equal_shares(n: usize) -> Vec<u32> {
    if n == 0 {
        return Vec::new();
    }
    let each = TOTAL_BP / n as u32;
    let mut shares = vec![each; n];
    shares[0] += TOTAL_BP - each * n as u32;
    shares
}

/// `floor(amount × share / 10000)` per payee, remainder to the first payee.
/// The caller guarantees a valid split.
pub fn payouts(amount: u64, payees: &[Payee]) -> Vec<(Did, u64)> {
    let mut out: Vec<(Did, u64)> = payees
        .iter()
        .map(|p| {
            let share = u128::from(amount) * u128::from(p.share_bp) / u128::from(TOTAL_BP);
            (p.did.clone(), share as u64)
        })
        .collect();
    let paid: u64 = out.iter().map(|(_, v)| v).sum();
    if let Some(first) = out.first_mut() {
        first.1 += amount - paid;
    }
    out
}
