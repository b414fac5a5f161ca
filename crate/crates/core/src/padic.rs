//! Exact rationals with p-adic valuation, and membership in K_p[m].

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{inv_mod, is_prime};
use crate::error::{Error, Result};

/// e_p(x), with zero mapped to a sentinel above every integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinity,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinity => None,
        }
    }

    pub fn at_least(self, bound: i64) -> bool {
        self >= Valuation::Finite(bound)
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinity => f.write_str("inf"),
        }
    }
}

/// Number of times `p` divides a nonzero integer.
pub fn int_val(x: &BigInt, p: u64) -> i64 {
    debug_assert!(!x.is_zero());
    if let Some(mut v) = x.to_i128() {
        let p = p as i128;
        let mut e = 0;
        while v % p == 0 {
            v /= p;
            e += 1;
        }
        return e;
    }
    let pb = BigInt::from(p);
    let mut v = x.clone();
    let mut e = 0;
    loop {
        let (q, r) = v.div_rem(&pb);
        if !r.is_zero() {
            return e;
        }
        v = q;
        e += 1;
    }
}

/// An exact rational in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct ValuedRational(BigRational);

impl ValuedRational {
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Self> {
        let den = den.into();
        if den.is_zero() {
            return Err(Error::Argument("zero denominator".into()));
        }
        Ok(ValuedRational(BigRational::new(num.into(), den)))
    }

    pub fn from_int(n: impl Into<BigInt>) -> Self {
        ValuedRational(BigRational::from_integer(n.into()))
    }

    pub fn from_big(r: BigRational) -> Self {
        ValuedRational(r)
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    /// p^e for any integer e.
    pub fn pow_p(p: u64, e: i64) -> Self {
        let base = BigInt::from(p).pow(e.unsigned_abs() as u32);
        if e >= 0 {
            Self::from_int(base)
        } else {
            ValuedRational(BigRational::new(BigInt::one(), base))
        }
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn abs(&self) -> Self {
        ValuedRational(self.0.abs())
    }

    pub fn recip(&self) -> Self {
        ValuedRational(self.0.recip())
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// e_p(x); `p` must be prime.
    pub fn valuation(&self, p: u64) -> Result<Valuation> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(self.val(p))
    }

    /// e_p(x) without the primality check.
    pub fn val(&self, p: u64) -> Valuation {
        if self.0.is_zero() {
            return Valuation::Infinity;
        }
        Valuation::Finite(int_val(self.0.numer(), p) - int_val(self.0.denom(), p))
    }

    /// Finite valuation of a nonzero value.
    pub(crate) fn v(&self, p: u64) -> i64 {
        self.val(p).finite().expect("nonzero value")
    }

    /// x = p^{e_p(x)} · (num/den) with num, den prime to p (den > 0).
    pub fn split_unit(&self, p: u64) -> Option<(i64, BigInt, BigInt)> {
        if self.is_zero() {
            return None;
        }
        let pb = BigInt::from(p);
        let vn = int_val(self.numer(), p);
        let vd = int_val(self.denom(), p);
        let num = self.numer() / pb.pow(vn as u32);
        let den = self.denom() / pb.pow(vd as u32);
        Some((vn - vd, num, den))
    }

    /// Unit part of x reduced into (Z/p^N)^×.
    pub fn unit_residue(&self, p: u64, n: u32) -> Result<ResidueUnit> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let (_, num, den) = self
            .split_unit(p)
            .ok_or(Error::ZeroValue { op: "unit_residue" })?;
        let modulus = p
            .checked_pow(n)
            .ok_or_else(|| Error::Argument(format!("{p}^{n} exceeds 64 bits")))?;
        Ok(ResidueUnit {
            p,
            exponent: n,
            value: unit_mod(&num, &den, modulus),
        })
    }
}

/// num/den reduced modulo `modulus`, den invertible.
pub(crate) fn unit_mod(num: &BigInt, den: &BigInt, modulus: u64) -> u64 {
    if modulus == 1 {
        return 0;
    }
    let mb = BigInt::from(modulus);
    let n = num.mod_floor(&mb).to_u64().unwrap();
    let d = den.mod_floor(&mb).to_i128().unwrap();
    let di = inv_mod(d, modulus).expect("denominator is a unit");
    crate::arith::mul_mod(n, di, modulus)
}

impl fmt::Display for ValuedRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl From<ValuedRational> for String {
    fn from(v: ValuedRational) -> String {
        v.to_string()
    }
}

impl TryFrom<String> for ValuedRational {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Parses `a` or `a/b` with optional sign; decimals are rejected.
pub fn parse_rational(s: &str) -> Result<ValuedRational> {
    let err = |column: usize, msg: &str| Error::Parse {
        line: 1,
        column,
        msg: msg.to_string(),
    };
    let s = s.trim();
    if s.is_empty() {
        return Err(err(1, "empty rational"));
    }
    let (a, b) = match s.split_once('/') {
        Some((a, b)) => (a, Some(b)),
        None => (s, None),
    };
    let int = |t: &str, col: usize| -> Result<BigInt> {
        let digits = t.strip_prefix(['-', '+']).unwrap_or(t);
        if digits.is_empty() || !digits.bytes().all(|c| c.is_ascii_digit()) {
            return Err(err(col, "expected an integer"));
        }
        t.parse::<BigInt>().map_err(|_| err(col, "expected an integer"))
    };
    let num = int(a, 1)?;
    let den = match b {
        Some(b) => int(b, a.len() + 2)?,
        None => BigInt::one(),
    };
    if den.is_zero() {
        return Err(err(a.len() + 2, "zero denominator"));
    }
    Ok(ValuedRational(BigRational::new(num, den)))
}

impl FromStr for ValuedRational {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_rational(s)
    }
}

macro_rules! binop {
    ($tr:ident, $f:ident) => {
        impl $tr<&ValuedRational> for &ValuedRational {
            type Output = ValuedRational;
            fn $f(self, rhs: &ValuedRational) -> ValuedRational {
                ValuedRational((&self.0).$f(&rhs.0))
            }
        }
        impl $tr for ValuedRational {
            type Output = ValuedRational;
            fn $f(self, rhs: ValuedRational) -> ValuedRational {
                ValuedRational(self.0.$f(rhs.0))
            }
        }
    };
}
binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl Neg for ValuedRational {
    type Output = ValuedRational;
    fn neg(self) -> ValuedRational {
        ValuedRational(-self.0)
    }
}

impl From<i64> for ValuedRational {
    fn from(n: i64) -> Self {
        Self::from_int(n)
    }
}

/// Element of (Z/p^N)^×.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ResidueUnit {
    pub p: u64,
    pub exponent: u32,
    pub value: u64,
}

/// Row-major 2×2 matrix over Q.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix2 {
    pub a: ValuedRational,
    pub b: ValuedRational,
    pub c: ValuedRational,
    pub d: ValuedRational,
}

impl Matrix2 {
    pub fn new(a: ValuedRational, b: ValuedRational, c: ValuedRational, d: ValuedRational) -> Self {
        Matrix2 { a, b, c, d }
    }

    pub fn from_ints(a: i64, b: i64, c: i64, d: i64) -> Self {
        Matrix2::new(a.into(), b.into(), c.into(), d.into())
    }

    pub fn identity() -> Self {
        Self::from_ints(1, 0, 0, 1)
    }

    pub fn det(&self) -> ValuedRational {
        &(&self.a * &self.d) - &(&self.b * &self.c)
    }

    pub fn scale(&self, s: &ValuedRational) -> Matrix2 {
        Matrix2::new(&self.a * s, &self.b * s, &self.c * s, &self.d * s)
    }

    pub fn mul(&self, o: &Matrix2) -> Matrix2 {
        Matrix2::new(
            &(&self.a * &o.a) + &(&self.b * &o.c),
            &(&self.a * &o.b) + &(&self.b * &o.d),
            &(&self.c * &o.a) + &(&self.d * &o.c),
            &(&self.c * &o.b) + &(&self.d * &o.d),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero() && self.c.is_zero() && self.d.is_zero()
    }
}

/// g ∈ K_p[m]: integral entries, p^m | c, unit determinant.
pub fn in_k_m(g: &Matrix2, p: u64, m: u32) -> bool {
    let z = Valuation::Finite(0);
    g.a.val(p) >= z
        && g.b.val(p) >= z
        && g.d.val(p) >= z
        && g.c.val(p) >= Valuation::Finite(m as i64)
        && g.det().val(p) == z
}

/// The unique k with p^k·g ∈ K_p[m], if any.
pub fn projective_k_m_shift(g: &Matrix2, p: u64, m: u32) -> Option<i64> {
    let vd = g.det().val(p).finite()?;
    if vd % 2 != 0 {
        return None;
    }
    let k = -vd / 2;
    let shifted = |x: &ValuedRational| match x.val(p) {
        Valuation::Finite(v) => Valuation::Finite(v + k),
        inf => inf,
    };
    let z = Valuation::Finite(0);
    let ok = shifted(&g.a) >= z
        && shifted(&g.b) >= z
        && shifted(&g.d) >= z
        && shifted(&g.c) >= Valuation::Finite(m as i64);
    ok.then_some(k)
}

/// Vol(K̄_p[m]) with Vol(K̄_p) = 1.
pub fn vol_k_bar(p: u64, m: u32) -> BigRational {
    if m == 0 {
        return BigRational::one();
    }
    let idx = BigInt::from(p).pow(m - 1) * BigInt::from(p + 1);
    BigRational::new(BigInt::one(), idx)
}

impl PartialOrd<i64> for Valuation {
    fn partial_cmp(&self, other: &i64) -> Option<Ordering> {
        Some(self.cmp(&Valuation::Finite(*other)))
    }
}

impl PartialEq<i64> for Valuation {
    fn eq(&self, other: &i64) -> bool {
        *self == Valuation::Finite(*other)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(a: i64, b: i64) -> ValuedRational {
        ValuedRational::new(a, b).unwrap()
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(q(12, 1).valuation(2).unwrap(), Valuation::Finite(2));
        assert_eq!(q(5, 8).valuation(2).unwrap(), Valuation::Finite(-3));
        assert_eq!(q(0, 1).valuation(7).unwrap(), Valuation::Infinity);
        assert_eq!(q(3, 1).valuation(4), Err(Error::NotPrime(4)));
        assert!(Valuation::Infinity > Valuation::Finite(i64::MAX));
    }

    #[test]
    fn unit_residue_examples() {
        assert_eq!(q(12, 1).unit_residue(2, 3).unwrap().value, 3);
        assert_eq!(q(1, 3).unit_residue(2, 3).unwrap().value, 3);
        assert_eq!(q(7, 1).unit_residue(7, 2).unwrap().value, 1);
        assert!(matches!(q(0, 1).unit_residue(7, 2), Err(Error::ZeroValue { .. })));
    }

    #[test]
    fn membership_examples() {
        assert!(in_k_m(&Matrix2::identity(), 3, 1));
        assert!(in_k_m(&Matrix2::from_ints(1, 0, 3, 1), 3, 1));
        assert!(!in_k_m(&Matrix2::from_ints(1, 0, 1, 1), 3, 1));
        for p in [2u64, 3, 5] {
            let g = Matrix2::identity().scale(&q(1, p as i64));
            assert_eq!(projective_k_m_shift(&g, p, 0), Some(1));
        }
        assert_eq!(projective_k_m_shift(&Matrix2::from_ints(1, 0, 1, 1), 3, 1), None);
        assert_eq!(projective_k_m_shift(&Matrix2::identity(), 3, 0), Some(0));
        // independent scan over k ∈ [-4, 4]
        let g = Matrix2::from_ints(1, 0, 1, 1);
        assert!((-4..=4).all(|k| !in_k_m(&g.scale(&ValuedRational::pow_p(3, k)), 3, 1)));
    }

    #[test]
    fn vol_examples() {
        assert_eq!(vol_k_bar(5, 0), BigRational::one());
        assert_eq!(vol_k_bar(5, 1), BigRational::new(1.into(), 6.into()));
        assert_eq!(vol_k_bar(2, 3), BigRational::new(1.into(), 12.into()));
    }

    /// Index of K[m] in GL2(Z_p) by counting matrices mod p^m.
    fn brute_index(p: u64, m: u32) -> u64 {
        let pm = p.pow(m);
        let (mut gl, mut km) = (0u64, 0u64);
        for a in 0..pm {
            for b in 0..pm {
                for c in 0..pm {
                    for d in 0..pm {
                        if ((a * d + pm * pm - b * c) % pm).is_multiple_of(p) {
                            continue;
                        }
                        gl += 1;
                        if c == 0 {
                            km += 1;
                        }
                    }
                }
            }
        }
        gl / km
    }

    #[test]
    fn vol_matches_coset_count() {
        for (p, m) in [(2u64, 1u32), (2, 2), (2, 3), (2, 4), (3, 1), (3, 2), (3, 3), (5, 1), (5, 2), (7, 1)] {
            if p.pow(m) > 27 {
                continue;
            }
            let idx = brute_index(p, m);
            assert_eq!(vol_k_bar(p, m) * BigRational::from_integer(idx.into()), BigRational::one(), "p={p} m={m}");
        }
    }

    #[test]
    fn parse_rational_forms() {
        assert_eq!(parse_rational("10/9").unwrap(), q(10, 9));
        assert_eq!(parse_rational("-3").unwrap(), q(-3, 1));
        assert_eq!(parse_rational("4/-6").unwrap(), q(-2, 3));
        for bad in ["", "1.5", "1/0", "a/2", "/", "1/", "--1"] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    fn nonzero_rat() -> impl Strategy<Value = ValuedRational> {
        (-5000i64..5000, 1i64..5000)
            .prop_filter("nonzero", |(a, _)| *a != 0)
            .prop_map(|(a, b)| q(a, b))
    }

    proptest! {
        #[test]
        fn valuation_is_discrete(x in nonzero_rat(), y in nonzero_rat(), pi in 0usize..4) {
            let p = [2u64, 3, 5, 7][pi];
            let (vx, vy) = (x.v(p), y.v(p));
            prop_assert_eq!((&x * &y).val(p), Valuation::Finite(vx + vy));
            prop_assert!((&x + &y).val(p) >= Valuation::Finite(vx.min(vy)));
        }

        #[test]
        fn shift_is_unique(a in -30i64..30, b in -30i64..30, c in -30i64..30, d in -30i64..30,
                           e in -4i64..4, pi in 0usize..3, m in 0u32..3) {
            let p = [2u64, 3, 5][pi];
            let g = Matrix2::from_ints(a, b, c, d);
            prop_assume!(!g.det().is_zero() && g.det().v(p) == 0);
            let g = g.scale(&ValuedRational::pow_p(p, e));
            match projective_k_m_shift(&g, p, m) {
                Some(k) => {
                    for j in -8..=8 {
                        let member = in_k_m(&g.scale(&ValuedRational::pow_p(p, j)), p, m);
                        prop_assert_eq!(member, j == k);
                    }
                }
                None => {
                    for j in -8..=8 {
                        prop_assert!(!in_k_m(&g.scale(&ValuedRational::pow_p(p, j)), p, m));
                    }
                }
            }
        }
    }
}
