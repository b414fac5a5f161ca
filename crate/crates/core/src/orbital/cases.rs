//! 𝓔_p(t) at ramified places via the three k-regimes and the sums S, 𝒥₁, 𝒥₂.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use super::kernel::val_at_least;
use super::{check_t, valuations, Branch, BranchTerm, LocalPlaceData, OrbitalValue};
use crate::characters::{unit_index, units_mod};
use crate::cyclotomic::{CycAccumulator, CyclotomicSum};
use crate::error::{Error, Result};
use crate::padic::{unit_mod, ValuedRational};

fn require_ramified(op: &'static str, place: &LocalPlaceData) -> Result<()> {
    if place.n == 0 {
        return Err(Error::UseUnramified { op });
    }
    if !place.omega.unit.is_trivial() {
        return Err(Error::Unsupported(format!(
            "{op}: omega must be unramified (only its value on p enters the case formulas)"
        )));
    }
    Ok(())
}

/// 𝓔_p(t) as boundary + Σ S(k) + Σ 𝒥₁ + Σ 𝒥₂ with the χ̄(p)^{r₂} weights.
pub fn eval_orbital_cases(place: &LocalPlaceData, t: &ValuedRational) -> Result<OrbitalValue> {
    const OP: &str = "eval_orbital_cases";
    check_t(OP, t)?;
    require_ramified(OP, place)?;
    let (n, m) = (place.n as i64, place.m as i64);
    let (e_t, e1) = valuations(place.p, t);
    let l = place.value_order();
    let chi_bar_p = |r2: i64| CyclotomicSum::root(l, place.chi.uniformizer.times(-r2).index(l));
    let mut trace = Vec::new();
    let mut hit = false;

    // k ≤ −1: r₂ = 0, r₁ = n, e(1−t) = −2k
    for k in (m - n).max(-n)..=-1 {
        if e1 != -2 * k {
            continue;
        }
        let (partial, count) = if k == -n {
            let idx = place.omega.uniformizer.times(k).index(l);
            (CyclotomicSum::root(l, idx), 1)
        } else {
            s_sum(place, k, t)
        };
        hit |= count > 0;
        trace.push(BranchTerm {
            k,
            r1: n,
            r2: 0,
            branch: if k == -n { Branch::Boundary } else { Branch::S },
            partial,
        });
    }

    // k = 0: r₂ = −e(1−t), max(m, n) + e(1−t) ≤ r₁ ≤ e(t) + n
    if e1 <= 0 {
        let r2 = -e1;
        for r1 in m.max(n) + e1..=e_t + n {
            let (j, count) = j1_sum(place, r1, t);
            hit |= count > 0;
            trace.push(BranchTerm {
                k: 0,
                r1,
                r2,
                branch: Branch::J1,
                partial: j.mul(&chi_bar_p(r2)),
            });
        }
    }

    // k ≥ 1: k + r₁ + r₂ = n, so only when m ≤ n
    if m <= n && e1 <= -1 {
        for k in 1..=-e1 {
            let r2 = -e1 - 2 * k;
            let r1 = n + e1 + k;
            let (j, count) = j2_sum(place, r1, r2, k, t);
            hit |= count > 0;
            trace.push(BranchTerm {
                k,
                r1,
                r2,
                branch: Branch::J2,
                partial: j.mul(&chi_bar_p(r2)),
            });
        }
    }
    Ok(OrbitalValue::assemble(place, trace, hit))
}

/// S(k) = Σ_{α′β′ ≡ −(t−1)p^{2k} mod p^{n+k}} χ(1 − p^{−k}α′)·χ̄(1 − p^{−k}β′)·ω̄(p^{−k}β′).
pub fn charsum_s(place: &LocalPlaceData, k: i64, t: &ValuedRational) -> Result<CyclotomicSum> {
    const OP: &str = "charsum_S";
    check_t(OP, t)?;
    require_ramified(OP, place)?;
    let (n, m) = (place.n as i64, place.m as i64);
    let (_, e1) = valuations(place.p, t);
    if k < (m - n).max(1 - n) || k > -1 || e1 != -2 * k {
        return Err(Error::OutOfWindow {
            op: OP,
            detail: format!("k = {k}, m = {m}, n = {n}, e(1-t) = {e1}"),
        });
    }
    Ok(s_sum(place, k, t).0)
}

fn s_sum(place: &LocalPlaceData, k: i64, t: &ValuedRational) -> (CyclotomicSum, u64) {
    let p = place.p;
    let n = place.n as i64;
    let l = place.value_order();
    let q = p.pow((n + k) as u32);
    let shift = p.pow((-k) as u32) as i64;
    // −(t − 1)p^{2k} is a unit; reduce it mod p^{n+k}
    let c = &(t - &ValuedRational::one()) * &ValuedRational::pow_p(p, 2 * k);
    let (_, num, den) = c.split_unit(p).expect("t != 1");
    let target = (q - unit_mod(&num, &den, q)) % q;
    let w = place.omega.uniformizer.times(k).index(l);
    let mut acc = CycAccumulator::new(l);
    let mut count = 0;
    for a in 0..q {
        for b in 0..q {
            if (a as u128 * b as u128 % q as u128) as u64 != target {
                continue;
            }
            let xa = unit_index(&place.chi.unit, 1 - shift * a as i64, l).expect("unit");
            let xb = unit_index(&place.chi.unit, 1 - shift * b as i64, l).expect("unit");
            acc.add_root(xa - xb + w, 1);
            count += 1;
        }
    }
    (acc.finish(BigRational::one()), count)
}

/// 𝒥₁(r₁, t) = Σ_{α,β} χ(α)χ̄(β)·ω̄(1 + βp^{r₁+r₂−n}) over
/// v(βp^{r₂} + αβp^{r₁+r₂−n} + α + p^{n−r₁}t) ≥ n, with r₂ = −e(1−t).
pub fn charsum_j1(place: &LocalPlaceData, r1: i64, t: &ValuedRational) -> Result<CyclotomicSum> {
    const OP: &str = "charsum_J1";
    check_t(OP, t)?;
    require_ramified(OP, place)?;
    Ok(j1_sum(place, r1, t).0)
}

fn j1_sum(place: &LocalPlaceData, r1: i64, t: &ValuedRational) -> (CyclotomicSum, u64) {
    let p = place.p;
    let n = place.n as i64;
    let (e_t, e1) = valuations(p, t);
    let r2 = -e1;
    let s = r1 + r2 - n;
    let (_, tn, td) = t.split_unit(p).expect("t != 0");
    let l = place.value_order();
    let units = units_mod(p, place.n);
    let mut acc = CycAccumulator::new(l);
    let mut count = 0;
    for &a in &units {
        for &b in &units {
            let (al, be) = (BigInt::from(a), BigInt::from(b));
            let terms = [
                (&td * &be, r2),
                (&td * &al * &be, s),
                (&td * &al, 0),
                (tn.clone(), n - r1 + e_t),
            ];
            if !val_at_least(p, &terms, n) {
                continue;
            }
            let mut idx = unit_index(&place.chi.unit, a as i64, l).unwrap()
                - unit_index(&place.chi.unit, b as i64, l).unwrap();
            if !place.omega.uniformizer.is_zero() {
                let y22 = &ValuedRational::one() + &(&ValuedRational::from_int(b as i64) * &ValuedRational::pow_p(p, s));
                idx += place.omega.uniformizer.times(-y22.v(p)).index(l);
            }
            acc.add_root(idx, 1);
            count += 1;
        }
    }
    (acc.finish(BigRational::one()), count)
}

/// 𝒥₂(r₁, r₂, k, t) = Σ_{α,β} χ(α)χ̄(β)·ω̄(1 + βp^{r₁+r₂−n}) over
/// (p^{k+r₂} + α)(β + p^k) ≡ p^{2k+r₂} − t·p^{n+k−r₁} mod p^n. Zero off the line k + r₁ + r₂ = n.
pub fn charsum_j2(place: &LocalPlaceData, r1: i64, r2: i64, k: i64, t: &ValuedRational) -> Result<CyclotomicSum> {
    const OP: &str = "charsum_J2";
    check_t(OP, t)?;
    require_ramified(OP, place)?;
    Ok(j2_sum(place, r1, r2, k, t).0)
}

fn j2_sum(place: &LocalPlaceData, r1: i64, r2: i64, k: i64, t: &ValuedRational) -> (CyclotomicSum, u64) {
    let p = place.p;
    let n = place.n as i64;
    let l = place.value_order();
    if k < 1 || k + r1 + r2 != n {
        return (CyclotomicSum::zero(l), 0);
    }
    let (e_t, _) = valuations(p, t);
    let (_, tn, td) = t.split_unit(p).expect("t != 0");
    let units = units_mod(p, place.n);
    let mut acc = CycAccumulator::new(l);
    let mut count = 0;
    let w = place.omega.uniformizer.times(k).index(l);
    for &a in &units {
        for &b in &units {
            let (al, be) = (BigInt::from(a), BigInt::from(b));
            // td·[(p^{k+r₂}+α)(β+p^k) − p^{2k+r₂}] + tn·p^{n+k−r₁+e(t)}
            let terms = [
                (&td * &be, k + r2),
                (&td * &al * &be, 0),
                (&td * &al, k),
                (tn.clone(), n + k - r1 + e_t),
            ];
            if !val_at_least(p, &terms, n) {
                continue;
            }
            let idx = unit_index(&place.chi.unit, a as i64, l).unwrap()
                - unit_index(&place.chi.unit, b as i64, l).unwrap()
                + w;
            acc.add_root(idx, 1);
            count += 1;
        }
    }
    (acc.finish(BigRational::one()), count)
}

