//! Valuation tests for short sums Σ c_i p^{e_i} with integer coefficients.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::arith::{mul_mod, pow_mod};

/// v_p(Σ c_i p^{e_i}) ≥ target.
pub(crate) fn val_at_least(p: u64, terms: &[(BigInt, i64)], target: i64) -> bool {
    let emin = match terms.iter().filter(|(c, _)| !c.is_zero()).map(|(_, e)| *e).min() {
        Some(e) => e,
        None => return true,
    };
    let prec = target - emin;
    if prec <= 0 {
        return true;
    }
    let modulus = BigInt::from(p).pow(prec as u32);
    let mut x = BigInt::zero();
    for (c, e) in terms {
        if c.is_zero() {
            continue;
        }
        let sh = e - emin;
        if sh >= prec {
            continue;
        }
        x += c * BigInt::from(p).pow(sh as u32);
    }
    x.mod_floor(&modulus).is_zero()
}

/// Same test for small coefficients, using u64 arithmetic when p^prec fits.
pub(crate) fn val_at_least_small(p: u64, terms: &[(i64, i64)], target: i64) -> bool {
    let emin = match terms.iter().filter(|(c, _)| *c != 0).map(|(_, e)| *e).min() {
        Some(e) => e,
        None => return true,
    };
    let prec = target - emin;
    if prec <= 0 {
        return true;
    }
    match modulus(p, prec) {
        Some(q) => {
            let mut x = 0u64;
            for &(c, e) in terms {
                let sh = e - emin;
                if c == 0 || sh >= prec {
                    continue;
                }
                let cm = c.rem_euclid(q as i64) as u64;
                x = (x + mul_mod(cm, pow_mod(p, sh as u64, q), q)) % q;
            }
            x == 0
        }
        None => {
            let big: Vec<(BigInt, i64)> = terms.iter().map(|&(c, e)| (BigInt::from(c), e)).collect();
            val_at_least(p, &big, target)
        }
    }
}

/// p^prec when it fits comfortably in u64.
pub(crate) fn modulus(p: u64, prec: i64) -> Option<u64> {
    if !(0..=64).contains(&prec) {
        return None;
    }
    p.checked_pow(prec as u32).filter(|&q| q < (1 << 62))
}

/// x mod q for a big integer, q > 0.
pub(crate) fn big_mod(x: &BigInt, q: u64) -> u64 {
    x.mod_floor(&BigInt::from(q)).to_u64().expect("reduced below q")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_and_big_agree() {
        for p in [2u64, 3, 5] {
            for a in -30i64..30 {
                for ea in -3i64..3 {
                    for eb in -3i64..3 {
                        for target in -4i64..6 {
                            let terms = [(a, ea), (7, eb)];
                            let big: Vec<(BigInt, i64)> = terms.iter().map(|&(c, e)| (c.into(), e)).collect();
                            assert_eq!(val_at_least_small(p, &terms, target), val_at_least(p, &big, target));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn direct_valuations() {
        // 1 + 3·(1/3)·2 = 3 has valuation 1 at p = 3
        assert!(val_at_least_small(3, &[(1, 0), (2, 0)], 1));
        assert!(!val_at_least_small(3, &[(1, 0), (2, 0)], 2));
        assert!(val_at_least_small(2, &[(1, -1), (1, -1)], 0));
        assert!(!val_at_least_small(2, &[(1, -1), (1, -1)], 1));
        assert!(val_at_least_small(7, &[], 100));
    }
}
