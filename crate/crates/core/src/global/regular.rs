//! Support lattice, the finite part of the regular orbital sum, and the
//! stability scan over levels.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use super::{ramification_profile, GlobalSetup};
use crate::arith::{factor, gcd};
use crate::characters::DirichletCharacter;
use crate::cyclotomic::CyclotomicSum;
use crate::error::{Error, Result};
use crate::orbital::{eval_orbital, LocalPlaceData, OrbitalValue, PlaceClass};
use crate::padic::ValuedRational;

/// Hard cap on lattice points per enumeration.
const MAX_CANDIDATES: u64 = 5_000_000;

/// One u = t/(t − 1) of the support lattice, with its local factors once
/// evaluated.
#[derive(Debug, Clone)]
pub struct SupportElement {
    pub u: ValuedRational,
    pub t: ValuedRational,
    pub local_values: BTreeMap<u64, OrbitalValue>,
}

impl SupportElement {
    fn new(u: ValuedRational) -> Self {
        let t = &u / &(&u - &ValuedRational::one());
        SupportElement {
            u,
            t,
            local_values: BTreeMap::new(),
        }
    }

    /// p | M·q·num(t)·num(1 − t)·den(t); 𝓔_p(t) = 1 at every other prime.
    pub fn relevant_primes(&self, setup: &GlobalSetup) -> Result<Vec<u64>> {
        let mut set: BTreeSet<u64> = setup.places.keys().copied().collect();
        let one_minus = &ValuedRational::one() - &self.t;
        for x in [self.t.numer(), one_minus.numer(), self.t.denom()] {
            let x = x.abs().to_u64().ok_or_else(|| {
                Error::Unsupported(format!("cannot factor {x}: exceeds 64 bits"))
            })?;
            set.extend(factor(x).into_iter().map(|(p, _)| p));
        }
        Ok(set.into_iter().collect())
    }

    /// Product of the local factors, which must already be filled in.
    pub fn product(&self) -> CyclotomicSum {
        self.local_values
            .values()
            .fold(CyclotomicSum::one(), |acc, v| acc.mul(&v.value))
    }
}

fn floor_div(a: &BigRational) -> BigInt {
    a.floor().to_integer()
}

/// Lattice points u = j·R/N² with 0 < |u| ≤ U_max, u ≠ 1, that pass the Σ⁺
/// filters e_p(u) ≥ 0 and e_p(u) ≥ m_p − n_p.
pub fn support_set(setup: &GlobalSetup, u_max: &ValuedRational) -> Result<Vec<SupportElement>> {
    if !u_max.as_big().is_positive() {
        return Err(Error::Argument(format!("U_max must be positive, got {u_max}")));
    }
    let n = setup.lattice_n();
    let step = BigRational::new(setup.lattice_r(), &n * &n);
    let jmax = floor_div(&(u_max.as_big() / &step));
    let jmax_u = jmax.to_u64().unwrap_or(u64::MAX);
    if jmax_u > MAX_CANDIDATES {
        return Err(Error::OutOfWindow {
            op: "support_set",
            detail: format!("{jmax} lattice points on each side exceeds {MAX_CANDIDATES}"),
        });
    }
    let jmax = jmax_u as i64;
    let mut out = vec![];
    for j in -jmax..=jmax {
        if j == 0 {
            continue;
        }
        let u = ValuedRational::from_big(&step * BigRational::from_integer(j.into()));
        if u.is_one() {
            continue;
        }
        let keep = setup.sigma_plus.iter().all(|&p| {
            let pl = &setup.places[&p];
            let e = u.v(p);
            e >= 0 && e >= pl.m as i64 - pl.n as i64
        });
        if keep {
            out.push(SupportElement::new(u));
        }
    }
    Ok(out)
}

/// Independent enumeration: every a/d with d | q², |a/d| ≤ U_max, satisfying
/// the local lattice conditions prime by prime. Sorted ascending.
pub fn lattice_oracle(setup: &GlobalSetup, u_max: &ValuedRational) -> Vec<ValuedRational> {
    let q2 = setup.q() * setup.q();
    let mut found = BTreeSet::new();
    for d in (1..=q2).filter(|d| q2.is_multiple_of(*d)) {
        let amax = floor_div(&(u_max.as_big() * BigRational::from_integer(d.into())))
            .to_i64()
            .expect("small window");
        for a in -amax..=amax {
            if a == 0 {
                continue;
            }
            let u = BigRational::new(a.into(), d.into());
            if u == BigRational::from_integer(1.into()) {
                continue;
            }
            let uv = ValuedRational::from_big(u.clone());
            let ok = setup.places.values().all(|pl| {
                let e = uv.v(pl.p);
                let (m, n) = (pl.m as i64, pl.n as i64);
                match pl.class() {
                    PlaceClass::Unramified => e >= m,
                    PlaceClass::SigmaMinus => e >= -2 * (n - m),
                    PlaceClass::SigmaPlus => e >= 0 && e >= m - n,
                }
            });
            if ok {
                found.insert(u);
            }
        }
    }
    found.into_iter().map(ValuedRational::from_big).collect()
}

#[derive(Debug, Clone)]
pub struct RegularFinite {
    /// Σ_u Π_p 𝓔_p(t), exact.
    pub total: CyclotomicSum,
    /// Σ_u |Π_p 𝓔_p(t)|.
    pub sum_abs: f64,
    pub support_size: usize,
    pub empty: bool,
    pub elements: Vec<SupportElement>,
}

/// Finite part of the regular orbital sum, evaluated with the case formulas.
pub fn regular_orbital_finite(setup: &GlobalSetup, u_max: &ValuedRational) -> Result<RegularFinite> {
    regular_orbital_finite_with(setup, u_max, eval_orbital)
}

/// Same sum with a caller-supplied local evaluator.
pub fn regular_orbital_finite_with<F>(setup: &GlobalSetup, u_max: &ValuedRational, eval: F) -> Result<RegularFinite>
where
    F: Fn(&LocalPlaceData, &ValuedRational) -> Result<OrbitalValue> + Sync,
{
    let support = support_set(setup, u_max)?;
    let elements: Vec<SupportElement> = support
        .into_par_iter()
        .map(|mut el| {
            for p in el.relevant_primes(setup)? {
                let v = eval(&setup.place_at(p), &el.t)?;
                el.local_values.insert(p, v);
            }
            Ok(el)
        })
        .collect::<Result<_>>()?;
    let mut total = CyclotomicSum::zero(1);
    let mut sum_abs = 0.0;
    for el in &elements {
        let prod = el.product();
        sum_abs += prod.abs();
        total = total.add(&prod);
    }
    Ok(RegularFinite {
        total,
        sum_abs,
        support_size: elements.len(),
        empty: elements.is_empty(),
        elements,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityRow {
    #[serde(rename = "M")]
    pub level: u64,
    pub q: u64,
    pub gcd: u64,
    pub support_size: usize,
    pub finite_part_abs: f64,
    pub empty: bool,
    /// M/gcd(M, q) > q²·U_max
    pub predicted_empty: bool,
    /// M/gcd(M, q) = q²·U_max, excluded from the monotone claim
    pub boundary: bool,
}

/// Per divisibility class gcd(M, q).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityClass {
    pub gcd: u64,
    pub predicted_threshold: f64,
    /// smallest M in the class from which every scanned M is empty
    pub empirical_threshold: Option<u64>,
    pub monotone: bool,
    /// emptiness agrees with the predicted rule at every non-boundary M
    pub matches_prediction: bool,
    /// every predicted-empty M is empty (one-sided form of the rule)
    pub sufficient: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub q: u64,
    pub u_max: String,
    pub rows: Vec<StabilityRow>,
    pub classes: Vec<StabilityClass>,
}

/// Support size and finite-part magnitude for every M in the range.
pub fn stability_threshold_scan(
    chi: &DirichletCharacter,
    levels: std::ops::RangeInclusive<u64>,
    u_max: &ValuedRational,
) -> Result<StabilityReport> {
    let q = chi.modulus();
    let levels: Vec<u64> = levels.collect();
    let q2u = u_max.as_big() * BigRational::from_integer((q * q).into());
    let rows: Vec<StabilityRow> = levels
        .par_iter()
        .map(|&level| {
            let setup = ramification_profile(level, chi)?;
            let reg = regular_orbital_finite(&setup, u_max)?;
            let g = gcd(level, q);
            let ratio = BigRational::new((level / g).into(), 1.into());
            Ok(StabilityRow {
                level,
                q,
                gcd: g,
                support_size: reg.support_size,
                finite_part_abs: reg.sum_abs,
                empty: reg.empty,
                predicted_empty: ratio > q2u,
                boundary: ratio == q2u,
            })
        })
        .collect::<Result<_>>()?;
    let mut by_class: BTreeMap<u64, Vec<&StabilityRow>> = BTreeMap::new();
    for r in &rows {
        by_class.entry(r.gcd).or_default().push(r);
    }
    let classes = by_class
        .into_iter()
        .map(|(g, rs)| {
            let mut monotone = true;
            let mut seen_empty = false;
            for r in rs.iter().filter(|r| !r.boundary) {
                if seen_empty && !r.empty {
                    monotone = false;
                }
                seen_empty |= r.empty;
            }
            let empirical_threshold = rs
                .iter()
                .rposition(|r| !r.empty)
                .map_or(rs.first().map(|r| r.level), |i| rs.get(i + 1).map(|r| r.level));
            StabilityClass {
                gcd: g,
                predicted_threshold: (&q2u * BigRational::from_integer(g.into())).to_f64().unwrap_or(f64::NAN),
                empirical_threshold,
                monotone,
                matches_prediction: rs.iter().filter(|r| !r.boundary).all(|r| r.empty == r.predicted_empty),
                sufficient: rs.iter().all(|r| !r.predicted_empty || r.empty),
            }
        })
        .collect();
    Ok(StabilityReport {
        q,
        u_max: u_max.to_string(),
        rows,
        classes,
    })
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::global::default_character;
    use crate::orbital::eval_orbital_bruteforce;

    fn u(a: i64, b: i64) -> ValuedRational {
        ValuedRational::new(a, b).unwrap()
    }

    #[test]
    fn support_examples() {
        let chi5 = default_character(5).unwrap();
        let s = ramification_profile(1_000_000, &chi5).unwrap();
        assert!(support_set(&s, &u(1, 1)).unwrap().is_empty());
        // j ∈ [−25, 25] without 0 and 25
        let s = ramification_profile(1, &chi5).unwrap();
        assert_eq!(support_set(&s, &u(1, 1)).unwrap().len(), 49);
        let s = ramification_profile(1, &DirichletCharacter::trivial()).unwrap();
        assert!(support_set(&s, &u(1, 2)).unwrap().is_empty());
    }

    #[test]
    fn support_matches_oracle() {
        for q in [1, 3, 4, 5, 8] {
            let chi = default_character(q).unwrap();
            for level in [1, 2, 3, 4, 6, 10, 12, 25, 40] {
                let s = ramification_profile(level, &chi).unwrap();
                let a: Vec<_> = support_set(&s, &u(1, 1)).unwrap().into_iter().map(|e| e.u).collect();
                let mut a = a;
                a.sort_by(|x, y| x.as_big().cmp(y.as_big()));
                assert_eq!(a, lattice_oracle(&s, &u(1, 1)), "q={q} M={level}");
            }
        }
    }

    #[test]
    fn empty_support_is_exact_zero() {
        let chi = default_character(5).unwrap();
        let s = ramification_profile(30, &chi).unwrap();
        let r = regular_orbital_finite(&s, &u(1, 1)).unwrap();
        assert!(r.empty && r.total.is_formal_zero());
    }

    #[test]
    fn regular_matches_bruteforce() {
        let chi = default_character(3).unwrap();
        let s = ramification_profile(1, &chi).unwrap();
        let a = regular_orbital_finite(&s, &u(1, 1)).unwrap();
        let b = regular_orbital_finite_with(&s, &u(1, 1), |pl, t| {
            if pl.n == 0 {
                eval_orbital(pl, t)
            } else {
                eval_orbital_bruteforce(pl, t)
            }
        })
        .unwrap();
        assert_eq!(a.support_size, 17);
        assert!(a.total.value_eq(&b.total));
    }

    #[test]
    fn outside_primes_give_one() {
        let chi = default_character(5).unwrap();
        let s = ramification_profile(2, &chi).unwrap();
        for el in support_set(&s, &u(1, 1)).unwrap() {
            let rel = el.relevant_primes(&s).unwrap();
            let outside = [7u64, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43]
                .into_iter()
                .filter(|p| !rel.contains(p))
                .take(3);
            for p in outside {
                let v = eval_orbital(&s.place_at(p), &el.t).unwrap();
                assert!(v.value.value_eq(&CyclotomicSum::one()), "p={p} t={}", el.t);
            }
        }
    }

    #[test]
    fn q5_threshold() {
        let chi = default_character(5).unwrap();
        let rep = stability_threshold_scan(&chi, 1..=60, &u(1, 1)).unwrap();
        for r in rep.rows.iter().filter(|r| r.gcd == 1) {
            assert_eq!(r.empty, r.level > 25, "M={}", r.level);
        }
        assert!(rep.classes.iter().all(|c| c.monotone && c.sufficient));
    }
}
