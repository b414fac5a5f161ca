//! Direct enumeration of the orbital integral over (r₁, r₂, α, β).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use super::kernel::{big_mod, modulus, val_at_least, val_at_least_small};
use super::{check_t, valuations, Branch, BranchTerm, LocalPlaceData, OrbitalValue};
use crate::arith::mul_mod;
use crate::characters::{unit_index, units_mod};
use crate::cyclotomic::CycAccumulator;
use crate::error::{Error, Result};
use crate::padic::{projective_k_m_shift, Matrix2, ValuedRational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Membership {
    /// closed-form valuation conditions on the entries of p^k·Y
    Valuation,
    /// build Y as a matrix and call projective_k_m_shift
    Literal,
}

/// 𝓔_p(t) by enumeration with window W = m + n + |e(t)| + |e(1−t)| + 2.
pub fn eval_orbital_bruteforce(place: &LocalPlaceData, t: &ValuedRational) -> Result<OrbitalValue> {
    run(place, t, 0, Membership::Valuation)
}

/// Enumeration with the window enlarged by `extra`.
pub fn eval_orbital_bruteforce_window(place: &LocalPlaceData, t: &ValuedRational, extra: i64) -> Result<OrbitalValue> {
    run(place, t, extra, Membership::Valuation)
}

/// Enumeration that forms every Y_{α,β,r₁,r₂,t} as a matrix. Slow.
pub fn eval_orbital_bruteforce_literal(place: &LocalPlaceData, t: &ValuedRational) -> Result<OrbitalValue> {
    run(place, t, 0, Membership::Literal)
}

fn run(place: &LocalPlaceData, t: &ValuedRational, extra: i64, mode: Membership) -> Result<OrbitalValue> {
    const OP: &str = "eval_orbital_bruteforce";
    check_t(OP, t)?;
    if place.n == 0 {
        return Err(Error::UseUnramified { op: OP });
    }
    let p = place.p;
    let (n, m) = (place.n as i64, place.m as i64);
    let (e_t, e1) = valuations(p, t);
    let (_, tn, td) = t.split_unit(p).expect("t != 0");
    let w = m + n + e_t.abs() + e1.abs() + 2 + extra;
    let l = place.value_order();
    let units: Vec<i64> = units_mod(p, place.n).into_iter().map(|u| u as i64).collect();
    let chi_idx: Vec<i64> = units
        .iter()
        .map(|&u| unit_index(&place.chi.unit, u, l).expect("unit"))
        .collect();
    let omega_ramified = !place.omega.unit.is_trivial();

    let mut trace = Vec::new();
    let mut hit = false;
    let mut acc = CycAccumulator::new(l);
    for r2 in -w..=w {
        if (r2 + e1).rem_euclid(2) != 0 {
            continue;
        }
        let k = -(r2 + e1) / 2;
        for r1 in -w..=w {
            let s = r1 + r2 - n;
            let pairs: Vec<(usize, usize)> = match mode {
                Membership::Valuation => {
                    if k + r1 + r2 < m {
                        continue;
                    }
                    let alphas: Vec<usize> = (0..units.len())
                        .filter(|&i| val_at_least_small(p, &[(1, r2), (units[i], s)], -k))
                        .collect();
                    if alphas.is_empty() {
                        continue;
                    }
                    let betas: Vec<usize> = (0..units.len())
                        .filter(|&j| val_at_least_small(p, &[(1, 0), (units[j], s)], -k))
                        .collect();
                    if betas.is_empty() {
                        continue;
                    }
                    entry_12_members(p, n, k, r1, r2, e_t, &tn, &td, &units, &alphas, &betas)
                }
                Membership::Literal => literal_members(place, t, k, r1, r2, &units),
            };
            if pairs.is_empty() {
                continue;
            }
            hit = true;
            let base = place.chi.uniformizer.times(-r2).index(l) + place.omega.uniformizer.times(k).index(l);
            for &(i, j) in &pairs {
                let mut idx = base + chi_idx[i] - chi_idx[j];
                if omega_ramified {
                    idx += omega_unit_index(place, k, s, units[j], l);
                }
                acc.add_root(idx, 1);
            }
            trace.push(BranchTerm {
                k,
                r1,
                r2,
                branch: Branch::Cell,
                partial: acc.finish(BigRational::one()),
            });
            acc = CycAccumulator::new(l);
        }
    }
    Ok(OrbitalValue::assemble(place, trace, hit))
}

/// Pairs with v(β p^{r₂} + αβ p^{r₁+r₂−n} + α + p^{n−r₁} t) ≥ n − k.
#[allow(clippy::too_many_arguments)]
fn entry_12_members(
    p: u64,
    n: i64,
    k: i64,
    r1: i64,
    r2: i64,
    e_t: i64,
    tn: &BigInt,
    td: &BigInt,
    units: &[i64],
    alphas: &[usize],
    betas: &[usize],
) -> Vec<(usize, usize)> {
    let s = r1 + r2 - n;
    let et = n - r1 + e_t;
    let emin = r2.min(s).min(0).min(et);
    let prec = n - k - emin;
    let mut out = Vec::new();
    if prec <= 0 {
        for &i in alphas {
            out.extend(betas.iter().map(|&j| (i, j)));
        }
        return out;
    }
    match modulus(p, prec) {
        Some(q) => {
            let pw = |e: i64| if e - emin >= prec { 0 } else { crate::arith::pow_mod(p, (e - emin) as u64, q) };
            let (tdq, tnq) = (big_mod(td, q), big_mod(tn, q));
            let a = mul_mod(tdq, pw(r2), q);
            let b = mul_mod(tdq, pw(s), q);
            let c = mul_mod(tdq, pw(0), q);
            let d = mul_mod(tnq, pw(et), q);
            for &i in alphas {
                let al = units[i].rem_euclid(q as i64) as u64;
                let c0 = (mul_mod(al, c, q) + d) % q;
                let c1 = (a + mul_mod(al, b, q)) % q;
                for &j in betas {
                    let be = units[j] as u64 % q;
                    if (c0 + mul_mod(be, c1, q)).is_multiple_of(q) {
                        out.push((i, j));
                    }
                }
            }
        }
        None => {
            for &i in alphas {
                for &j in betas {
                    let (al, be) = (BigInt::from(units[i]), BigInt::from(units[j]));
                    let terms = [
                        (td * &be, r2),
                        (td * &al * &be, s),
                        (td * &al, 0),
                        (tn.clone(), et),
                    ];
                    if val_at_least(p, &terms, n - k) {
                        out.push((i, j));
                    }
                }
            }
        }
    }
    out
}

fn literal_members(place: &LocalPlaceData, t: &ValuedRational, k: i64, r1: i64, r2: i64, units: &[i64]) -> Vec<(usize, usize)> {
    let p = place.p;
    let n = place.n as i64;
    let pw = |e: i64| ValuedRational::pow_p(p, e);
    let mut out = Vec::new();
    for (i, &a) in units.iter().enumerate() {
        for (j, &b) in units.iter().enumerate() {
            let (a, b) = (ValuedRational::from_int(a), ValuedRational::from_int(b));
            let y11 = &pw(r2) + &(&a * &pw(r1 + r2 - n));
            let y12 = &(&(&y11 * &b) * &pw(-n)) + &(&(&pw(-r1) * t) + &(&a * &pw(-n)));
            let y21 = pw(r1 + r2);
            let y22 = &ValuedRational::one() + &(&b * &pw(r1 + r2 - n));
            let y = Matrix2::new(y11, y12, y21, y22);
            if projective_k_m_shift(&y, p, place.m) == Some(k) {
                out.push((i, j));
            }
        }
    }
    out
}

/// ω̄ on the unit part of p^k·Y₂₂.
fn omega_unit_index(place: &LocalPlaceData, k: i64, s: i64, beta: i64, l: u64) -> i64 {
    let p = place.p;
    let y22 = &ValuedRational::one() + &(&ValuedRational::from_int(beta) * &ValuedRational::pow_p(p, s));
    let z = &ValuedRational::pow_p(p, k) * &y22;
    let (_, num, den) = z.split_unit(p).expect("member entries are nonzero");
    let t = place.omega.unit.value_rational(&num, &den).expect("unit");
    t.neg().index(l)
}
