//! Dirichlet and local characters stored as discrete logs, and the exact
//! character sums built from them.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::arith::{self, gcd, is_prime, lcm, phi_pp};
use crate::cyclotomic::{CycAccumulator, CyclotomicSum};
use crate::error::{Error, Result};
use crate::orbital::LocalPlaceData;
use crate::padic::{unit_mod, ValuedRational};

/// A root of unity exp(2πi·num/den), kept reduced with 0 ≤ num < den.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Turn {
    num: u64,
    den: u64,
}

impl Turn {
    pub const ZERO: Turn = Turn { num: 0, den: 1 };
    pub const HALF: Turn = Turn { num: 1, den: 2 };

    pub fn new(num: i64, den: u64) -> Turn {
        assert!(den > 0);
        let n = num.rem_euclid(den as i64) as u64;
        let g = gcd(n, den);
        if n == 0 {
            Turn::ZERO
        } else {
            Turn { num: n / g, den: den / g }
        }
    }

    pub fn num(self) -> u64 {
        self.num
    }

    pub fn den(self) -> u64 {
        self.den
    }

    pub fn is_zero(self) -> bool {
        self.num == 0
    }

    pub fn add(self, o: Turn) -> Turn {
        let d = lcm(self.den, o.den);
        Turn::new((self.num * (d / self.den) + o.num * (d / o.den)) as i64, d)
    }

    pub fn neg(self) -> Turn {
        Turn::new(-(self.num as i64), self.den)
    }

    pub fn times(self, k: i64) -> Turn {
        let kk = k.rem_euclid(self.den as i64) as u64;
        Turn::new(((self.num as u128 * kk as u128) % self.den as u128) as i64, self.den)
    }

    /// Index j with ζ_L^j equal to this root; requires den | L.
    pub fn index(self, l: u64) -> i64 {
        debug_assert!(l.is_multiple_of(self.den));
        (self.num * (l / self.den)) as i64
    }

    pub fn to_sum(self) -> CyclotomicSum {
        CyclotomicSum::root(self.den, self.num as i64)
    }
}

impl fmt::Display for Turn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Generators of (Z/p^n)^× with their orders: one for odd p, ⟨−1, 5⟩ for p = 2.
pub fn unit_generators(p: u64, n: u32) -> Vec<(u64, u64)> {
    if n == 0 {
        return vec![];
    }
    let q = p.pow(n);
    if p == 2 {
        match n {
            1 => vec![],
            2 => vec![(q - 1, 2)],
            _ => vec![(q - 1, 2), (5, 1 << (n - 2))],
        }
    } else {
        vec![(arith::primitive_root_pp(p, n), phi_pp(p, n))]
    }
}

/// A character of (Z/p^n)^× as a discrete-log table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitGroupCharacter {
    p: u64,
    n: u32,
    order: u64,
    images: Vec<Turn>,
    /// exponent in Z/order for each residue mod p^n; -1 marks non-units
    log_table: Vec<i64>,
    conductor: u32,
}

impl UnitGroupCharacter {
    /// Builds the character sending the i-th generator of `unit_generators(p, n)` to `images[i]`.
    pub fn build(p: u64, n: u32, images: &[Turn]) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let gens = unit_generators(p, n);
        if gens.len() != images.len() {
            return Err(Error::Character(format!(
                "(Z/{p}^{n})^x has {} generator(s), got {} image(s)",
                gens.len(),
                images.len()
            )));
        }
        for (&(g, ord), t) in gens.iter().zip(images) {
            if ord % t.den() != 0 {
                return Err(Error::Character(format!(
                    "image {t} of generator {g} is incompatible with its order {ord}"
                )));
            }
        }
        let q = p
            .checked_pow(n)
            .filter(|&q| q <= 1 << 26)
            .ok_or_else(|| Error::Character(format!("modulus {p}^{n} too large to tabulate")))?;
        let order = images.iter().fold(1, |l, t| lcm(l, t.den()));
        let mut log_table = vec![-1i64; q as usize];
        match gens.len() {
            0 => {
                for (u, slot) in log_table.iter_mut().enumerate() {
                    if q == 1 || !(u as u64).is_multiple_of(p) {
                        *slot = 0;
                    }
                }
            }
            1 => {
                let (g, ord) = gens[0];
                let step = images[0].index(order);
                let mut x = 1u64;
                for i in 0..ord {
                    log_table[x as usize] = (i as i64 * step).rem_euclid(order as i64);
                    x = arith::mul_mod(x, g, q);
                }
            }
            _ => {
                let (s0, s1) = (images[0].index(order), images[1].index(order));
                let ord5 = gens[1].1;
                let mut x = 1u64;
                for j in 0..ord5 {
                    let e = (j as i64 * s1).rem_euclid(order as i64);
                    log_table[x as usize] = e;
                    log_table[(q - x) as usize] = (e + s0).rem_euclid(order as i64);
                    x = arith::mul_mod(x, 5, q);
                }
            }
        }
        let mut chi = UnitGroupCharacter {
            p,
            n,
            order,
            images: images.to_vec(),
            log_table,
            conductor: 0,
        };
        chi.conductor = (0..=n)
            .find(|&c| chi.trivial_on_one_plus(c))
            .expect("trivial on 1 + p^n");
        Ok(chi)
    }

    /// Images given as numerators over the generator orders.
    pub fn from_exponents(p: u64, n: u32, exps: &[i64]) -> Result<Self> {
        let gens = unit_generators(p, n);
        if gens.len() != exps.len() {
            return Err(Error::Character(format!(
                "(Z/{p}^{n})^x has {} generator(s), got {} exponent(s)",
                gens.len(),
                exps.len()
            )));
        }
        let images: Vec<Turn> = gens.iter().zip(exps).map(|(&(_, o), &e)| Turn::new(e, o)).collect();
        Self::build(p, n, &images)
    }

    pub fn trivial(p: u64) -> Self {
        Self::build(p, 0, &[]).expect("trivial character")
    }

    fn trivial_on_one_plus(&self, c: u32) -> bool {
        let q = self.modulus();
        if c >= self.n {
            return true;
        }
        if c == 0 {
            return self.log_table.iter().all(|&e| e <= 0);
        }
        let step = self.p.pow(c);
        (0..q / step).all(|i| self.log_table[(1 + i * step) as usize] == 0)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn modulus(&self) -> u64 {
        self.p.pow(self.n)
    }

    /// Order L₀ of the value group.
    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn images(&self) -> &[Turn] {
        &self.images
    }

    pub fn conductor_exponent(&self) -> u32 {
        self.conductor
    }

    pub fn is_trivial(&self) -> bool {
        self.conductor == 0
    }

    /// Primitive mod p^n: nontrivial on 1 + p^{n−1} (vacuous for n = 0).
    pub fn is_primitive(&self) -> bool {
        self.conductor == self.n
    }

    /// Discrete log of χ(u) in Z/order, or None when p | u.
    #[inline]
    pub fn log(&self, u: u64) -> Option<i64> {
        let e = self.log_table[(u % self.modulus()) as usize];
        (e >= 0).then_some(e)
    }

    /// Discrete log of χ(u) for a signed residue.
    #[inline]
    pub fn log_i(&self, u: i64) -> Option<i64> {
        self.log(u.rem_euclid(self.modulus() as i64) as u64)
    }

    pub fn value(&self, u: i64) -> Option<Turn> {
        self.log_i(u).map(|e| Turn::new(e, self.order))
    }

    /// χ on a p-adic unit given as a rational.
    pub fn value_rational(&self, num: &BigInt, den: &BigInt) -> Option<Turn> {
        if (num % BigInt::from(self.p)).is_zero() || (den % BigInt::from(self.p)).is_zero() {
            return None;
        }
        let r = unit_mod(num, den, self.modulus());
        self.value(r as i64)
    }

    pub fn conj(&self) -> Self {
        let mut c = self.clone();
        c.images = self.images.iter().map(|t| t.neg()).collect();
        c.log_table
            .iter_mut()
            .filter(|e| **e > 0)
            .for_each(|e| *e = self.order as i64 - *e);
        c
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        if self.p != o.p || self.n != o.n {
            return Err(Error::Character("product of characters on different groups".into()));
        }
        let images: Vec<Turn> = self.images.iter().zip(&o.images).map(|(a, b)| a.add(*b)).collect();
        Self::build(self.p, self.n, &images)
    }
}

/// A character of Q_p^×: unit part plus the value on p.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalCharacter {
    pub unit: UnitGroupCharacter,
    pub uniformizer: Turn,
}

impl LocalCharacter {
    pub fn new(unit: UnitGroupCharacter, uniformizer: Turn) -> Self {
        LocalCharacter { unit, uniformizer }
    }

    pub fn trivial(p: u64) -> Self {
        Self::new(UnitGroupCharacter::trivial(p), Turn::ZERO)
    }

    pub fn p(&self) -> u64 {
        self.unit.p
    }

    /// Order of the group of values.
    pub fn order(&self) -> u64 {
        lcm(self.unit.order, self.uniformizer.den())
    }

    pub fn conj(&self) -> Self {
        Self::new(self.unit.conj(), self.uniformizer.neg())
    }

    pub fn is_trivial(&self) -> bool {
        self.unit.is_trivial() && self.uniformizer.is_zero()
    }

    /// χ(x) = χ(ϖ)^{e_p(x)}·χ_unit(unit part of x).
    pub fn value(&self, x: &ValuedRational) -> Option<Turn> {
        let (v, num, den) = x.split_unit(self.p())?;
        let u = self.unit.value_rational(&num, &den)?;
        Some(self.uniformizer.times(v).add(u))
    }
}

/// A Dirichlet character mod q, factored into prime-power parts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirichletCharacter {
    q: u64,
    parts: Vec<UnitGroupCharacter>,
}

impl DirichletCharacter {
    pub fn new(mut parts: Vec<UnitGroupCharacter>) -> Result<Self> {
        parts.retain(|c| c.n > 0);
        parts.sort_by_key(|c| c.p);
        if parts.windows(2).any(|w| w[0].p == w[1].p) {
            return Err(Error::Character("repeated prime in character factors".into()));
        }
        let q = parts
            .iter()
            .try_fold(1u64, |q, c| q.checked_mul(c.modulus()))
            .ok_or_else(|| Error::Character("modulus overflow".into()))?;
        Ok(DirichletCharacter { q, parts })
    }

    pub fn trivial() -> Self {
        DirichletCharacter { q: 1, parts: vec![] }
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn parts(&self) -> &[UnitGroupCharacter] {
        &self.parts
    }

    pub fn part(&self, p: u64) -> Option<&UnitGroupCharacter> {
        self.parts.iter().find(|c| c.p == p)
    }

    pub fn is_primitive(&self) -> bool {
        self.parts.iter().all(|c| c.is_primitive())
    }

    pub fn conductor(&self) -> u64 {
        self.parts.iter().map(|c| c.p.pow(c.conductor)).product()
    }

    pub fn order(&self) -> u64 {
        self.parts.iter().fold(1, |l, c| lcm(l, c.order))
    }

    /// χ(a), or None when gcd(a, q) > 1.
    pub fn value(&self, a: i64) -> Option<Turn> {
        self.parts
            .iter()
            .try_fold(Turn::ZERO, |acc, c| c.value(a).map(|t| acc.add(t)))
    }

    /// χ(a) as an exact complex number in {0} ∪ μ_∞.
    pub fn value_sum(&self, a: i64) -> CyclotomicSum {
        match self.value(a) {
            Some(t) => t.to_sum(),
            None => CyclotomicSum::zero(1),
        }
    }

    /// χ(−1) as 0 or 1/2.
    pub fn sign(&self) -> Turn {
        self.value(-1).expect("-1 is a unit")
    }

    /// Real-valued (quadratic or trivial).
    pub fn is_real(&self) -> bool {
        self.order() <= 2
    }

    /// Component at p of the associated idele class character.
    pub fn local_component(&self, p: u64) -> LocalCharacter {
        match self.part(p) {
            None => LocalCharacter::new(
                UnitGroupCharacter::trivial(p),
                self.value(p as i64).expect("p does not divide q"),
            ),
            Some(cp) => {
                let unif = self
                    .parts
                    .iter()
                    .filter(|c| c.p != p)
                    .fold(Turn::ZERO, |acc, c| acc.add(c.value(p as i64).expect("coprime")));
                LocalCharacter::new(cp.conj(), unif)
            }
        }
    }

    pub fn local_components(&self, primes: &[u64]) -> Vec<LocalCharacter> {
        primes.iter().map(|&p| self.local_component(p)).collect()
    }
}

/// Kronecker symbol (d|n) for n > 0, computed by quadratic reciprocity.
pub fn kronecker_symbol(d: i64, n: u64) -> i32 {
    if n == 0 {
        return if d.abs() == 1 { 1 } else { 0 };
    }
    let mut n = n;
    let mut result = 1i32;
    let a = d;
    while n.is_multiple_of(2) {
        n /= 2;
        match a.rem_euclid(8) {
            0 | 2 | 4 | 6 => return 0,
            3 | 5 => result = -result,
            _ => {}
        }
    }
    // Jacobi symbol (a|n), n odd
    let mut a = a.rem_euclid(n as i64) as u64;
    while a != 0 {
        while a.is_multiple_of(2) {
            a /= 2;
            if n % 8 == 3 || n % 8 == 5 {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        a %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

fn squarefree(mut n: u64) -> bool {
    if n == 0 {
        return false;
    }
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p * p) {
            return false;
        }
        if n.is_multiple_of(p) {
            n /= p;
        }
        p += 1;
    }
    true
}

pub fn is_fundamental_discriminant(d: i64) -> bool {
    if d == 1 {
        return true;
    }
    match d.rem_euclid(4) {
        1 => squarefree(d.unsigned_abs()),
        0 => {
            let m = d / 4;
            matches!(m.rem_euclid(4), 2 | 3) && squarefree(m.unsigned_abs())
        }
        _ => false,
    }
}

/// The primitive real character n ↦ (d|n) of modulus |d|.
pub fn kronecker_character(d: i64) -> Result<DirichletCharacter> {
    if d == 0 || !is_fundamental_discriminant(d) {
        return Err(Error::NotFundamental(d));
    }
    let mut parts = Vec::new();
    let mut rest = d;
    for (p, _) in arith::factor(d.unsigned_abs()) {
        if p == 2 {
            continue;
        }
        // p* = ±p ≡ 1 mod 4 contributes the Legendre symbol mod p
        let pstar = if p % 4 == 1 { p as i64 } else { -(p as i64) };
        rest /= pstar;
        parts.push(UnitGroupCharacter::build(p, 1, &[Turn::HALF])?);
    }
    match rest {
        1 => {}
        -4 => parts.push(UnitGroupCharacter::build(2, 2, &[Turn::HALF])?),
        8 => parts.push(UnitGroupCharacter::build(2, 3, &[Turn::ZERO, Turn::HALF])?),
        -8 => parts.push(UnitGroupCharacter::build(2, 3, &[Turn::HALF, Turn::HALF])?),
        _ => return Err(Error::NotFundamental(d)),
    }
    DirichletCharacter::new(parts)
}

/// τ(χ) = Σ_{α mod p^n} χ(α)·ζ_{p^n}^α for χ primitive mod p^n.
pub fn gauss_sum(chi: &UnitGroupCharacter) -> Result<CyclotomicSum> {
    if chi.n == 0 || !chi.is_primitive() {
        return Err(Error::Imprimitive { op: "gauss_sum" });
    }
    let q = chi.modulus();
    let l = lcm(chi.order, q);
    let (sc, sq) = ((l / chi.order) as i64, (l / q) as i64);
    let mut acc = CycAccumulator::new(l);
    for a in 1..q {
        if let Some(e) = chi.log(a) {
            acc.add_root(e * sc + a as i64 * sq, 1);
        }
    }
    Ok(acc.finish(BigRational::one()))
}

/// ∫_{Z_p^×} ψ(γ p^m x) d^×γ for e_p(x) = e_x, Vol(Z_p^×) = 1.
pub fn ramanujan_sum(p: u64, m: i64, e_x: i64) -> BigRational {
    match m + e_x {
        s if s >= 0 => BigRational::one(),
        -1 => BigRational::new(BigInt::from(-1), BigInt::from(p - 1)),
        _ => BigRational::zero(),
    }
}

/// G(m) = Σ_{α ∈ (Z/p^n)^×} χ(1 + α p^{m−n}), extending χ to non-units.
pub fn dual_char_sum_g(place: &LocalPlaceData, m: i64) -> CyclotomicSum {
    let chi = &place.chi;
    let (p, n) = (place.p, place.n as i64);
    let q = p.pow(place.n);
    let l = chi.order();
    let mut acc = CycAccumulator::new(l);
    let shift = ValuedRational::pow_p(p, m - n);
    for a in (1..q).filter(|a| a % p != 0) {
        let x = &ValuedRational::one() + &(&ValuedRational::from_int(a) * &shift);
        if let Some(t) = chi.value(&x) {
            acc.add_root(t.index(l), 1);
        }
    }
    acc.finish(BigRational::one())
}

/// χ(u) for u a p-adic unit given by its residue, as an index into ζ_L.
#[inline]
pub(crate) fn unit_index(chi: &UnitGroupCharacter, u: i64, l: u64) -> Option<i64> {
    chi.log_i(u).map(|e| e * (l / chi.order) as i64)
}

/// p-part residues below p^n that are units, ascending.
pub fn units_mod(p: u64, n: u32) -> Vec<u64> {
    (0..p.pow(n)).filter(|&a| n == 0 || a % p != 0).collect()
}

/// Every character of (Z/p^n)^×, enumerated by generator exponents.
pub fn all_characters(p: u64, n: u32) -> Vec<UnitGroupCharacter> {
    let gens = unit_generators(p, n);
    let mut out = vec![vec![]];
    for &(_, ord) in &gens {
        out = out
            .into_iter()
            .flat_map(|v: Vec<i64>| {
                (0..ord as i64).map(move |e| {
                    let mut w = v.clone();
                    w.push(e);
                    w
                })
            })
            .collect();
    }
    out.into_iter()
        .map(|e| UnitGroupCharacter::from_exponents(p, n, &e).expect("valid exponents"))
        .collect()
}
