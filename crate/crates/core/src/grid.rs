//! Deterministic sample of invariants t from the grid {a/b : |a|, |b| ≤ p^{2n+2}, b | p^{2n+2}}.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;

use crate::orbital::valuations;
use crate::padic::ValuedRational;

/// Every grid point of the structured form ±u·p^i/p^j or (p^j ± u·p^i)/p^j, u ≤ 6 prime to p.
pub fn grid_candidates(p: u64, n: u32) -> Vec<ValuedRational> {
    let big = BigInt::from(p).pow(2 * n + 2);
    let jmax = 2 * n + 2;
    let units: Vec<i64> = (1..=6).filter(|u| u % p as i64 != 0).collect();
    let mut set = BTreeSet::new();
    for j in 0..=jmax {
        let den = BigInt::from(p).pow(j);
        for i in 0..=jmax {
            let pi = BigInt::from(p).pow(i);
            for &u in &units {
                let step = &pi * u;
                for a in [step.clone(), -step.clone(), &den + &step, &den - &step] {
                    if a == BigInt::from(0) || a == den || a.magnitude() > big.magnitude() {
                        continue;
                    }
                    set.insert(ValuedRational::new(a, den.clone()).expect("den > 0"));
                }
            }
        }
    }
    set.into_iter().collect()
}

/// At least `count` grid points (all of them if the grid is smaller): first
/// round-robin over the valuation classes (e(t), e(1−t)) of the structured
/// candidates, then the remaining grid in order of |a|, then j.
pub fn derived_grid(p: u64, n: u32, count: usize) -> Vec<ValuedRational> {
    let mut classes: BTreeMap<(i64, i64), Vec<ValuedRational>> = BTreeMap::new();
    for t in grid_candidates(p, n) {
        classes.entry(valuations(p, &t)).or_default().push(t);
    }
    for v in classes.values_mut() {
        v.sort_by_key(|t| (t.numer().magnitude() + t.denom().magnitude(), t.clone()));
    }
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    let mut depth = 0;
    while out.len() < count {
        let mut any = false;
        for v in classes.values() {
            if let Some(t) = v.get(depth) {
                seen.insert(t.clone());
                out.push(t.clone());
                any = true;
            }
        }
        if !any {
            break;
        }
        depth += 1;
    }
    let jmax = 2 * n + 2;
    let bound = p.pow(jmax) as i64;
    'fill: for a in 1..=bound {
        for j in 0..=jmax {
            for sa in [a, -a] {
                if out.len() >= count {
                    break 'fill;
                }
                let t = ValuedRational::new(sa, p.pow(j) as i64).expect("den > 0");
                if t.is_one() || !seen.insert(t.clone()) {
                    continue;
                }
                out.push(t);
            }
        }
    }
    out
}
