use std::sync::Arc;

use cliox_core::ledger::escrow::{equal_shares, payouts, Payee};
use cliox_core::ledger::{Ledger, LedgerError, OrderState};
use cliox_core::{Did, HexId, Identity, ManualClock, Role};
use proptest::prelude::*;

#[derive(Debug, Clone)]
enum Op {
    Faucet { who: usize, amount: u64 },
    Transfer { from: usize, to: usize, amount: u64 },
    Lock { buyer: usize, amount: u64 },
    Release { pick: usize },
    Refund { pick: usize },
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        (0..4usize, 0..5_000u64).prop_map(|(who, amount)| Op::Faucet { who, amount }),
        (0..4usize, 0..4usize, 0..3_000u64).prop_map(|(from, to, amount)| Op::Transfer { from, to, amount }),
        (0..4usize, 0..3_000u64).prop_map(|(buyer, amount)| Op::Lock { buyer, amount }),
        any::<usize>().prop_map(|pick| Op::Release { pick }),
        any::<usize>().prop_map(|pick| Op::Refund { pick }),
    ]
}

fn setup() -> (Ledger, Vec<Identity>) {
    let ledger = Ledger::in_memory(Arc::new(ManualClock::new(0)));
    let ids = (0..4).map(|_| ledger.create_identity([Role::Consumer].into()).unwrap()).collect();
    (ledger, ids)
}

fn four_way(ids: &[Identity]) -> Vec<Payee> {
    ids.iter().zip(equal_shares(4)).map(|(i, bp)| Payee::new(i.did().clone(), bp)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn supply_is_conserved(ops in prop::collection::vec(op(), 0..120)) {
        let (ledger, ids) = setup();
        let mut faucet_total: u128 = 0;
        let mut orders: Vec<HexId> = Vec::new();
        for op in ops {
            match op {
                Op::Faucet { who, amount } => {
                    if ledger.faucet(ids[who].did(), amount).is_ok() {
                        faucet_total += u128::from(amount);
                    }
                }
                Op::Transfer { from, to, amount } => {
                    let _ = ledger.transfer(ids[from].did(), ids[to].did(), amount);
                }
                Op::Lock { buyer, amount } => {
                    let asset = Did::derive(b"asset");
                    if let Ok(o) = ledger.lock_escrow(ids[buyer].did(), &asset, &asset, amount, four_way(&ids)) {
                        orders.push(o.order_id);
                    }
                }
                Op::Release { pick } if !orders.is_empty() => {
                    let _ = ledger.release_escrow(orders[pick % orders.len()]);
                }
                Op::Refund { pick } if !orders.is_empty() => {
                    let _ = ledger.refund_escrow(orders[pick % orders.len()]);
                }
                _ => {}
            }
            let supply = ledger.supply();
            prop_assert_eq!(supply.minted, faucet_total);
            prop_assert_eq!(supply.balances + supply.locked, faucet_total);
        }
    }

    #[test]
    fn payouts_sum_to_amount_for_any_split(amount in 1u64..1_000_000, cuts in prop::collection::vec(1u32..10_000, 0..6)) {
        let mut cuts = cuts;
        cuts.sort_unstable();
        cuts.dedup();
        let mut bounds = vec![0];
        bounds.extend(cuts);
        bounds.push(10_000);
        let payees: Vec<Payee> = bounds
            .windows(2)
            .enumerate()
            .map(|(i, w)| Payee::new(Did::derive(&[i as u8]), w[1] - w[0]))
            .collect();
        let out = payouts(amount, &payees);
        prop_assert_eq!(out.iter().map(|(_, v)| v).sum::<u64>(), amount);
        for ((_, v), p) in out.iter().zip(&payees).skip(1) {
            prop_assert_eq!(*v, amount * u64::from(p.share_bp) / 10_000);
        }
    }
}

#[test]
fn default_split_is_exact_for_every_small_amount() {
    let ids: Vec<Payee> =
        equal_shares(4).into_iter().enumerate().map(|(i, bp)| Payee::new(Did::derive(&[i as u8]), bp)).collect();
    for amount in 1..=10_000u64 {
        let out = payouts(amount, &ids);
        assert_eq!(out.iter().map(|(_, v)| v).sum::<u64>(), amount, "amount {amount}");
    }
}

#[test]
fn settlement_states_are_final() {
    let (ledger, ids) = setup();
    ledger.faucet(ids[0].did(), 10_000).unwrap();
    let asset = Did::derive(b"a");
    let order = ledger.lock_escrow(ids[0].did(), &asset, &asset, 10_000, four_way(&ids)).unwrap();
    assert_eq!(ledger.account(ids[0].did()).unwrap().balance, 0);
    ledger.refund_escrow(order.order_id).unwrap();
    assert_eq!(ledger.account(ids[0].did()).unwrap().balance, 10_000);
    assert_eq!(ledger.order(order.order_id).unwrap().state, OrderState::Refunded);
    assert!(matches!(ledger.release_escrow(order.order_id), Err(LedgerError::NotLocked(_))));
    assert!(matches!(ledger.refund_escrow(order.order_id), Err(LedgerError::NotLocked(_))));
}

#[test]
fn identical_public_key_gives_identical_did() {
    let a = Identity::from_seed([7; 32], [Role::Holder].into());
    let b = Identity::from_seed([7; 32], [Role::Consumer].into());
    assert_eq!(a.did(), b.did());
    assert_ne!(a.did(), Identity::from_seed([8; 32], [Role::Holder].into()).did());
}
