//! 𝓔_p(t) at primes where χ is unramified, by valuation shells.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{check_t, valuations, Branch, BranchTerm, LocalPlaceData, OrbitalValue};
use crate::cyclotomic::CyclotomicSum;
use crate::error::{Error, Result};
use crate::padic::{projective_k_m_shift, Matrix2, ValuedRational};

/// Sum over shells (r₁, r₂) of χ̄(p)^{r₂}·ω(p)^k where p^k·h(r₁, r₂) ∈ K[m].
pub fn eval_orbital_unramified(place: &LocalPlaceData, t: &ValuedRational) -> Result<OrbitalValue> {
    const OP: &str = "eval_orbital_unramified";
    check_t(OP, t)?;
    if place.n != 0 {
        return Err(Error::UseRamified { op: OP, n: place.n });
    }
    let p = place.p;
    let m = place.m as i64;
    let (e_t, e1) = valuations(p, t);
    let w = m + e_t.abs() + e1.abs() + 2;
    let l = place.value_order();
    let pw = |e: i64| ValuedRational::pow_p(p, e);
    let mut trace = Vec::new();
    for r2 in -w..=w {
        for r1 in -w..=w {
            let h = Matrix2::new(pw(r2), &pw(-r1) * t, pw(r1 + r2), ValuedRational::one());
            let Some(k) = projective_k_m_shift(&h, p, place.m) else {
                continue;
            };
            let idx = place.chi.uniformizer.times(-r2).index(l) + place.omega.uniformizer.times(k).index(l);
            trace.push(BranchTerm {
                k,
                r1,
                r2,
                branch: Branch::Shell,
                partial: CyclotomicSum::root(l, idx),
            });
        }
    }
    let hit = !trace.is_empty();
    let mut v = OrbitalValue::assemble(place, trace, hit);
    // no |τ|² at unramified places: the prefactor is Vol(K̄[m])^{-1} alone, as assembled with n = 0
    debug_assert_eq!(place.prefactor(), crate::padic::vol_k_bar(p, place.m).recip());
    v.support_hit = hit;
    Ok(v)
}

/// Vol^{-1}·(e(t) − e(1−t) − m + 1)·Σ_{k=0}^{−e(1−t)} χ̄(p)^{−2k−e(1−t)} on the support, else 0.
pub fn unramified_closed_form(place: &LocalPlaceData, t: &ValuedRational) -> CyclotomicSum {
    let p = place.p;
    let m = place.m as i64;
    let (e_t, e1) = valuations(p, t);
    let l = place.value_order();
    if e1 > 0 || e_t - e1 < m {
        return CyclotomicSum::zero(l);
    }
    let mut s = CyclotomicSum::zero(l);
    for k in 0..=-e1 {
        let r2 = -2 * k - e1;
        let idx = place.chi.uniformizer.times(-r2).index(l) + place.omega.uniformizer.times(k).index(l);
        s = s.add(&CyclotomicSum::root(l, idx));
    }
    let mult = BigRational::from_integer(BigInt::from(e_t - e1 - m + 1));
    if mult.is_zero() {
        return CyclotomicSum::zero(l);
    }
    s.scale(&(mult * place.prefactor())).scale(&BigRational::one())
}
