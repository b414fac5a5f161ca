//! Local regular orbital integrals 𝓔_p(t) at finite places.

mod brute;
mod cases;
mod kernel;
mod unramified;

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;

pub use brute::{eval_orbital_bruteforce, eval_orbital_bruteforce_literal, eval_orbital_bruteforce_window};
pub use cases::{charsum_j1, charsum_j2, charsum_s, eval_orbital_cases};
pub use unramified::{eval_orbital_unramified, unramified_closed_form};

use crate::arith::{is_prime, lcm};
use crate::characters::LocalCharacter;
use crate::cyclotomic::CyclotomicSum;
use crate::error::{Error, Result};
use crate::padic::{vol_k_bar, ValuedRational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PlaceClass {
    Unramified,
    SigmaPlus,
    SigmaMinus,
}

/// Ramification data at one prime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalPlaceData {
    pub p: u64,
    pub m: u32,
    pub n: u32,
    pub chi: LocalCharacter,
    pub omega: LocalCharacter,
}

impl LocalPlaceData {
    /// n is read off the unit part of χ, which must be primitive.
    pub fn new(p: u64, m: u32, chi: LocalCharacter, omega: Option<LocalCharacter>) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if chi.p() != p {
            return Err(Error::Argument(format!("character lives at {} not {p}", chi.p())));
        }
        if !chi.unit.is_primitive() {
            return Err(Error::Imprimitive { op: "LocalPlaceData" });
        }
        let omega = omega.unwrap_or_else(|| LocalCharacter::trivial(p));
        if omega.p() != p {
            return Err(Error::Argument(format!("omega lives at {} not {p}", omega.p())));
        }
        if omega.unit.conductor_exponent() > m {
            return Err(Error::Argument(format!(
                "omega conductor exponent {} exceeds m = {m}",
                omega.unit.conductor_exponent()
            )));
        }
        Ok(LocalPlaceData {
            p,
            m,
            n: chi.unit.n(),
            chi,
            omega,
        })
    }

    pub fn class(&self) -> PlaceClass {
        if self.n == 0 {
            PlaceClass::Unramified
        } else if self.m >= self.n {
            PlaceClass::SigmaPlus
        } else {
            PlaceClass::SigmaMinus
        }
    }

    /// Common root-of-unity order for every value produced at this place.
    pub fn value_order(&self) -> u64 {
        lcm(self.chi.order(), self.omega.order())
    }

    /// 1/(|τ(χ)|²·Vol(K̄[m])) with |τ(χ)|² = p^n.
    pub fn prefactor(&self) -> BigRational {
        let pn = BigRational::from_integer(BigInt::from(self.p).pow(self.n));
        (vol_k_bar(self.p, self.m) * pn).recip()
    }

    /// The vanishing classification: false means 𝓔_p(t) = 0.
    pub fn predicted_support(&self, t: &ValuedRational) -> bool {
        let (e_t, e1) = valuations(self.p, t);
        let (m, n) = (self.m as i64, self.n as i64);
        match self.class() {
            PlaceClass::Unramified => e1 <= 0 && e_t - e1 >= m,
            PlaceClass::SigmaMinus => {
                (m - n..=-1).any(|k| e1 == -2 * k) || e_t - e1 >= 0 || e_t <= -1
            }
            PlaceClass::SigmaPlus => (e_t <= -1 && m == n) || e_t - e1 >= m - n,
        }
    }

    /// Sum of the applicable case bounds for |𝓔_p(t)|.
    pub fn case_bound(&self, t: &ValuedRational) -> f64 {
        let (e_t, e1) = valuations(self.p, t);
        let (m, n) = (self.m as i64, self.n as i64);
        let q = self.p as f64;
        let mut b = 0.0;
        match self.class() {
            PlaceClass::Unramified => {
                if e1 <= 0 && e_t - e1 >= m {
                    b += ((e_t - e1 - m + 1) * (1 - e1)) as f64 * q.powi(m as i32);
                }
            }
            PlaceClass::SigmaMinus => {
                for k in m - n..=-1 {
                    if e1 == -2 * k {
                        b += q.powi((m + k) as i32);
                    }
                }
                if e_t - e1 >= 0 {
                    b += (e_t - e1 + 1) as f64 * q.powi(m as i32);
                }
                if e_t <= -1 {
                    b += ((1 - e_t) * (1 - e_t)) as f64 * q.powi(m as i32);
                }
            }
            PlaceClass::SigmaPlus => {
                if e_t <= -1 && m == n {
                    b += ((1 - e_t) * (1 - e_t)) as f64 * q.powi(m as i32);
                }
                if e_t >= m - n {
                    b += (e_t - e1 + 1 + m - n) as f64 * q.powi(m as i32);
                }
            }
        }
        b
    }
}

/// (e_p(t), e_p(1 − t)) for t ∉ {0, 1}.
pub fn valuations(p: u64, t: &ValuedRational) -> (i64, i64) {
    (t.v(p), (&ValuedRational::one() - t).v(p))
}

pub(crate) fn check_t(op: &'static str, t: &ValuedRational) -> Result<()> {
    if t.is_zero() || t.is_one() {
        return Err(Error::DegenerateT { op, t: t.to_string() });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// one (k, r₁, r₂) cell of the direct enumeration
    Cell,
    /// k = −n, single α = β = −1 class
    Boundary,
    /// −n < k ≤ −1 via S(k)
    S,
    /// k = 0 via 𝒥₁
    J1,
    /// k ≥ 1 via 𝒥₂
    J2,
    /// valuation shell at an unramified place
    Shell,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Cell => "cell",
            Branch::Boundary => "boundary",
            Branch::S => "S",
            Branch::J1 => "J1",
            Branch::J2 => "J2",
            Branch::Shell => "shell",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchTerm {
    pub k: i64,
    pub r1: i64,
    pub r2: i64,
    pub branch: Branch,
    pub partial: CyclotomicSum,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitalValue {
    pub value: CyclotomicSum,
    pub support_hit: bool,
    pub branch_trace: Vec<BranchTerm>,
}

impl OrbitalValue {
    pub(crate) fn assemble(place: &LocalPlaceData, trace: Vec<BranchTerm>, support_hit: bool) -> Self {
        let l = place.value_order();
        let total = trace
            .iter()
            .fold(CyclotomicSum::zero(l), |acc, b| acc.add(&b.partial));
        OrbitalValue {
            value: total.scale(&place.prefactor()),
            support_hit,
            branch_trace: trace,
        }
    }

    pub fn one() -> Self {
        OrbitalValue {
            value: CyclotomicSum::one(),
            support_hit: true,
            branch_trace: vec![],
        }
    }
}

/// Dispatches to the unramified or case evaluator.
pub fn eval_orbital(place: &LocalPlaceData, t: &ValuedRational) -> Result<OrbitalValue> {
    if place.n == 0 {
        eval_orbital_unramified(place, t)
    } else {
        eval_orbital_cases(place, t)
    }
}
