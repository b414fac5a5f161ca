//! Exact sums Σ c_j ζ_L^j with a rational prefactor, and their complex embedding.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::lcm;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclotomicSum {
    l: u64,
    coeffs: Vec<BigInt>,
    scalar: BigRational,
}

impl CyclotomicSum {
    pub fn new(l: u64, coeffs: Vec<BigInt>, scalar: BigRational) -> Self {
        assert!(l >= 1 && coeffs.len() as u64 == l, "coefficient vector must have length L");
        let mut s = CyclotomicSum { l, coeffs, scalar };
        s.normalize();
        s
    }

    pub fn from_counts(l: u64, counts: &[i64], scalar: BigRational) -> Self {
        Self::new(l, counts.iter().map(|&c| BigInt::from(c)).collect(), scalar)
    }

    pub fn zero(l: u64) -> Self {
        CyclotomicSum {
            l,
            coeffs: vec![BigInt::zero(); l as usize],
            scalar: BigRational::one(),
        }
    }

    pub fn from_rational(r: BigRational) -> Self {
        Self::new(1, vec![BigInt::one()], r)
    }

    pub fn one() -> Self {
        Self::from_rational(BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(BigRational::from_integer(n.into()))
    }

    /// ζ_L^j.
    pub fn root(l: u64, j: i64) -> Self {
        let mut c = vec![BigInt::zero(); l as usize];
        c[j.rem_euclid(l as i64) as usize] = BigInt::one();
        CyclotomicSum {
            l,
            coeffs: c,
            scalar: BigRational::one(),
        }
    }

    pub fn order(&self) -> u64 {
        self.l
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn scalar(&self) -> &BigRational {
        &self.scalar
    }

    /// Pulls the content of the coefficient vector into the scalar.
    fn normalize(&mut self) {
        if self.scalar.is_zero() || self.coeffs.iter().all(Zero::is_zero) {
            self.coeffs.iter_mut().for_each(|c| *c = BigInt::zero());
            self.scalar = BigRational::one();
            return;
        }
        let g = self
            .coeffs
            .iter()
            .fold(BigInt::zero(), |g, c| g.gcd(c));
        if !g.is_one() {
            self.coeffs.iter_mut().for_each(|c| *c /= &g);
            self.scalar *= BigRational::from_integer(g);
        }
    }

    /// Same value written over ζ_{L'} with L | L'.
    pub fn lift(&self, l2: u64) -> Self {
        assert!(l2.is_multiple_of(self.l), "lift target must be a multiple of L");
        if l2 == self.l {
            return self.clone();
        }
        let step = (l2 / self.l) as usize;
        let mut c = vec![BigInt::zero(); l2 as usize];
        for (j, v) in self.coeffs.iter().enumerate() {
            c[j * step] = v.clone();
        }
        CyclotomicSum {
            l: l2,
            coeffs: c,
            scalar: self.scalar.clone(),
        }
    }

    pub fn is_formal_zero(&self) -> bool {
        self.scalar.is_zero() || self.coeffs.iter().all(Zero::is_zero)
    }

    fn combine(&self, other: &Self, sign: i32) -> Self {
        if other.is_formal_zero() {
            return self.clone();
        }
        if self.is_formal_zero() {
            return if sign > 0 { other.clone() } else { other.neg() };
        }
        let l = lcm(self.l, other.l);
        let (a, b) = (self.lift(l), other.lift(l));
        let s = BigRational::new(
            a.scalar.numer().gcd(b.scalar.numer()),
            a.scalar.denom().lcm(b.scalar.denom()),
        );
        let fa = (&a.scalar / &s).to_integer();
        let fb = (&b.scalar / &s).to_integer();
        let coeffs = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(x, y)| if sign > 0 { x * &fa + y * &fb } else { x * &fa - y * &fb })
            .collect();
        Self::new(l, coeffs, s)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, 1)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, -1)
    }

    pub fn neg(&self) -> Self {
        CyclotomicSum {
            l: self.l,
            coeffs: self.coeffs.clone(),
            scalar: -self.scalar.clone(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_formal_zero() || other.is_formal_zero() {
            return Self::zero(lcm(self.l, other.l));
        }
        let l = lcm(self.l, other.l);
        let (a, b) = (self.lift(l), other.lift(l));
        let mut c = vec![BigInt::zero(); l as usize];
        for (i, x) in a.coeffs.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
            for (j, y) in b.coeffs.iter().enumerate().filter(|(_, y)| !y.is_zero()) {
                c[(i + j) % l as usize] += x * y;
            }
        }
        Self::new(l, c, &a.scalar * &b.scalar)
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        let mut s = self.clone();
        s.scalar *= r;
        s.normalize();
        s
    }

    /// Multiplies by ζ_L^j.
    pub fn rotate(&self, j: i64) -> Self {
        let l = self.l as i64;
        let mut c = vec![BigInt::zero(); self.l as usize];
        for (i, v) in self.coeffs.iter().enumerate() {
            c[(i as i64 + j).rem_euclid(l) as usize] = v.clone();
        }
        CyclotomicSum {
            l: self.l,
            coeffs: c,
            scalar: self.scalar.clone(),
        }
    }

    pub fn conj(&self) -> Self {
        let l = self.l as usize;
        let mut c = vec![BigInt::zero(); l];
        for (i, v) in self.coeffs.iter().enumerate() {
            c[(l - i) % l] = v.clone();
        }
        CyclotomicSum {
            l: self.l,
            coeffs: c,
            scalar: self.scalar.clone(),
        }
    }

    /// Exact test for the value 0: reduction of Σ c_j x^j modulo Φ_L.
    pub fn is_zero(&self) -> bool {
        if self.is_formal_zero() {
            return true;
        }
        let phi = cyclotomic_poly(self.l);
        let deg = phi.len() - 1;
        let mut f = self.coeffs.clone();
        for i in (deg..f.len()).rev() {
            if f[i].is_zero() {
                continue;
            }
            let c = std::mem::take(&mut f[i]);
            for (j, &pj) in phi.iter().enumerate().take(deg) {
                if pj != 0 {
                    f[i - deg + j] -= &c * pj;
                }
            }
        }
        f.iter().take(deg).all(Zero::is_zero)
    }

    /// Exact equality of values.
    pub fn value_eq(&self, other: &Self) -> bool {
        self.sub(other).is_zero()
    }

    /// Bit size of Σ|c_j|.
    pub fn coeff_bits(&self) -> u64 {
        self.coeffs
            .iter()
            .fold(BigInt::zero(), |s, c| s + c.abs())
            .bits()
    }

    /// Working precision P = 64 + bits(Σ|c_j|) + 8.
    pub fn precision(&self) -> u64 {
        64 + self.coeff_bits() + 8
    }

    /// Fixed-point embedding (re, im) scaled by 2^w, error below (Σ|c|·|scalar| + 1)·L·2^{-w+2}.
    pub fn embed_fixed(&self, w: u64) -> (BigInt, BigInt) {
        assert!(w.is_multiple_of(64), "fixed-point width must be a multiple of 64");
        let table = root_table(self.l, w);
        let (mut re, mut im) = (BigInt::zero(), BigInt::zero());
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            re += c * &table[j].0;
            im += c * &table[j].1;
        }
        let (n, d) = (self.scalar.numer(), self.scalar.denom());
        (div_round(&(re * n), d), div_round(&(im * n), d))
    }

    /// Complex value to double precision.
    pub fn to_complex(&self) -> (f64, f64) {
        let w = (self.precision() + 64).div_ceil(64) * 64;
        let (re, im) = self.embed_fixed(w);
        (fixed_to_f64(&re, w), fixed_to_f64(&im, w))
    }

    pub fn abs(&self) -> f64 {
        let (re, im) = self.to_complex();
        re.hypot(im)
    }

    /// |self − other| in the complex embedding, computed at precision P of the difference.
    pub fn distance(&self, other: &Self) -> f64 {
        self.sub(other).abs()
    }

    /// Embedding equality: |difference| < 2^{−P/2} with P = 64 + bits(Σ|c|) + 8.
    pub fn approx_eq(&self, other: &Self) -> bool {
        let d = self.sub(other);
        let p = d.precision();
        let w = (p + 32 + 64 - (self.l.leading_zeros() as u64)).div_ceil(64) * 64;
        let (re, im) = d.embed_fixed(w);
        let norm2 = &re * &re + &im * &im;
        norm2 < (BigInt::one() << (2 * w - p) as usize)
    }
}

fn div_round(a: &BigInt, d: &BigInt) -> BigInt {
    let twice = a * 2 + if a.sign() == Sign::Minus { -d } else { d.clone() };
    twice / (d * 2)
}

fn fixed_to_f64(x: &BigInt, w: u64) -> f64 {
    let shift = w.saturating_sub(60);
    let y: BigInt = x >> shift as usize;
    y.to_f64().unwrap_or(f64::NAN) * 2f64.powi(-((w - shift) as i32))
}

type Table = Arc<Vec<(BigInt, BigInt)>>;

fn table_cache() -> &'static Mutex<HashMap<(u64, u64), Table>> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u64), Table>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// (cos, sin)(2πj/L)·2^w for j < L.
fn root_table(l: u64, w: u64) -> Table {
    if let Some(t) = table_cache().lock().unwrap().get(&(l, w)) {
        return t.clone();
    }
    let guard = 32 + 64 - l.leading_zeros() as u64;
    let wg = w + guard;
    let one = BigInt::one() << wg as usize;
    let theta = (pi_fixed(wg) * 2) / BigInt::from(l);
    let (c1, s1) = cos_sin_fixed(&theta, wg);
    let mut out = Vec::with_capacity(l as usize);
    let (mut c, mut s) = (one.clone(), BigInt::zero());
    for _ in 0..l {
        out.push((&c >> guard as usize, &s >> guard as usize));
        let nc = (&c * &c1 - &s * &s1) >> wg as usize;
        let ns = (&c * &s1 + &s * &c1) >> wg as usize;
        c = nc;
        s = ns;
    }
    let t = Arc::new(out);
    table_cache().lock().unwrap().insert((l, w), t.clone());
    t
}

/// arctan(1/x)·2^w by its Taylor series.
fn atan_inv(x: u64, w: u64) -> BigInt {
    let xb = BigInt::from(x);
    let x2 = &xb * &xb;
    let mut term = (BigInt::one() << w as usize) / &xb;
    let mut sum = BigInt::zero();
    let mut k = 0u64;
    while !term.is_zero() {
        let t = &term / BigInt::from(2 * k + 1);
        if k.is_multiple_of(2) {
            sum += t;
        } else {
            sum -= t;
        }
        term /= &x2;
        k += 1;
    }
    sum
}

/// π·2^w via Machin's formula.
fn pi_fixed(w: u64) -> BigInt {
    let wg = w + 16;
    let pi = atan_inv(5, wg) * 16 - atan_inv(239, wg) * 4;
    pi >> 16usize
}

fn cos_sin_fixed(theta: &BigInt, w: u64) -> (BigInt, BigInt) {
    let sh = w as usize;
    let th2 = (theta * theta) >> sh;
    let (mut c, mut s) = (BigInt::one() << sh, theta.clone());
    let (mut ct, mut st) = (c.clone(), s.clone());
    let mut k = 0u64;
    while !(ct.is_zero() && st.is_zero()) {
        ct = -((&ct * &th2) >> sh) / BigInt::from((2 * k + 1) * (2 * k + 2));
        st = -((&st * &th2) >> sh) / BigInt::from((2 * k + 2) * (2 * k + 3));
        c += &ct;
        s += &st;
        k += 1;
    }
    (c, s)
}

fn phi_cache() -> &'static Mutex<HashMap<u64, Arc<Vec<i64>>>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<Vec<i64>>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Coefficients of Φ_L, constant term first.
pub fn cyclotomic_poly(l: u64) -> Arc<Vec<i64>> {
    if let Some(p) = phi_cache().lock().unwrap().get(&l) {
        return p.clone();
    }
    // x^L − 1 divided by Φ_d for every proper divisor d
    let mut f: Vec<i64> = vec![0; l as usize + 1];
    f[0] = -1;
    f[l as usize] = 1;
    for d in (1..l).filter(|d| l.is_multiple_of(*d)) {
        let g = cyclotomic_poly(d);
        let dg = g.len() - 1;
        let mut q = vec![0i64; f.len() - dg];
        for i in (0..q.len()).rev() {
            let c = f[i + dg];
            q[i] = c;
            if c != 0 {
                for (j, &gj) in g.iter().enumerate() {
                    f[i + j] -= c * gj;
                }
            }
        }
        f = q;
    }
    let f = Arc::new(f);
    phi_cache().lock().unwrap().insert(l, f.clone());
    f
}

/// Dense accumulator for hot loops.
#[derive(Debug, Clone)]
pub struct CycAccumulator {
    l: u64,
    counts: Vec<i64>,
}

impl CycAccumulator {
    pub fn new(l: u64) -> Self {
        CycAccumulator {
            l,
            counts: vec![0; l as usize],
        }
    }

    #[inline]
    pub fn add_root(&mut self, j: i64, c: i64) {
        self.counts[j.rem_euclid(self.l as i64) as usize] += c;
    }

    pub fn is_empty(&self) -> bool {
        self.counts.iter().all(|&c| c == 0)
    }

    pub fn finish(&self, scalar: BigRational) -> CyclotomicSum {
        CyclotomicSum::from_counts(self.l, &self.counts, scalar)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: (f64, f64), b: (f64, f64)) -> bool {
        (a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12
    }

    #[test]
    fn roots_embed() {
        for l in [1u64, 2, 3, 4, 5, 7, 12, 42, 1000] {
            for j in [0i64, 1, 5, 17] {
                let (re, im) = CyclotomicSum::root(l, j).to_complex();
                let th = 2.0 * std::f64::consts::PI * (j as f64) / l as f64;
                assert!(close((re, im), (th.cos(), th.sin())), "L={l} j={j}");
            }
        }
    }

    #[test]
    fn pi_digits() {
        let w = 200;
        let pi = pi_fixed(w);
        let approx = fixed_to_f64(&pi, w);
        assert!((approx - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn cyclotomic_polys() {
        assert_eq!(*cyclotomic_poly(1), vec![-1, 1]);
        assert_eq!(*cyclotomic_poly(4), vec![1, 0, 1]);
        assert_eq!(*cyclotomic_poly(6), vec![1, -1, 1]);
        assert_eq!(*cyclotomic_poly(12), vec![1, 0, -1, 0, 1]);
        assert_eq!(cyclotomic_poly(105).len() - 1, 48);
        assert!(cyclotomic_poly(105).contains(&-2));
    }

    #[test]
    fn exact_zero_via_relations() {
        let s = CyclotomicSum::root(3, 0)
            .add(&CyclotomicSum::root(3, 1))
            .add(&CyclotomicSum::root(3, 2));
        assert!(!s.is_formal_zero());
        assert!(s.is_zero());
        assert!(s.approx_eq(&CyclotomicSum::zero(1)));
        assert!(!CyclotomicSum::root(6, 1).is_zero());
        // ζ_4 + ζ_4^3 = 0 lifted to L = 12
        let t = CyclotomicSum::root(4, 1).add(&CyclotomicSum::root(4, 3)).lift(12);
        assert!(t.is_zero());
        let half = BigRational::new(1.into(), 2.into());
        assert!(CyclotomicSum::root(5, 2).scale(&half).value_eq(&CyclotomicSum::root(10, 4).scale(&half)));
    }

    fn arb_sum() -> impl Strategy<Value = CyclotomicSum> {
        (prop::sample::select(vec![1u64, 2, 3, 4, 6, 8, 9, 10, 12]), prop::collection::vec(-20i64..20, 12), -5i64..5, 1i64..6)
            .prop_map(|(l, v, n, d)| {
                CyclotomicSum::from_counts(l, &v[..l as usize], BigRational::new(n.into(), d.into()))
            })
    }

    proptest! {
        #[test]
        fn embedding_is_a_ring_map(a in arb_sum(), b in arb_sum()) {
            let (ea, eb) = (a.to_complex(), b.to_complex());
            let s = a.add(&b).to_complex();
            prop_assert!((s.0 - ea.0 - eb.0).abs() < 1e-9 && (s.1 - ea.1 - eb.1).abs() < 1e-9);
            let p = a.mul(&b).to_complex();
            let (pr, pi) = (ea.0 * eb.0 - ea.1 * eb.1, ea.0 * eb.1 + ea.1 * eb.0);
            prop_assert!((p.0 - pr).abs() < 1e-8 && (p.1 - pi).abs() < 1e-8);
            let c = a.conj().to_complex();
            prop_assert!((c.0 - ea.0).abs() < 1e-9 && (c.1 + ea.1).abs() < 1e-9);
        }

        #[test]
        fn exact_and_embedded_zero_agree(a in arb_sum(), b in arb_sum()) {
            let d = a.sub(&b);
            prop_assert_eq!(d.is_zero(), d.abs() < 1e-12);
            prop_assert!(a.sub(&a).is_zero());
            prop_assert!(a.approx_eq(&a.add(&CyclotomicSum::zero(7))));
        }
    }
}
