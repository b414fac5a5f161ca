//! Newform coefficient data: ingestion, Hecke relation checks and eta-quotient
//! expansions.

use std::path::Path;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{factor, gcd, is_prime};
use crate::error::{Error, Result};

/// A normalized newform given by its first K Fourier coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewformData {
    pub label: String,
    pub level: u64,
    pub weight: u32,
    /// an[i] = a_{i+1}
    #[serde(rename = "an")]
    pub coeffs: Vec<i64>,
}

impl NewformData {
    pub fn a(&self, n: usize) -> i64 {
        self.coeffs[n - 1]
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Builds from a q-expansion c_0, c_1, … as returned by `eta_product_coeffs`.
    pub fn from_series(label: &str, level: u64, weight: u32, series: &[BigInt]) -> Result<Self> {
        let coeffs = series
            .iter()
            .skip(1)
            .map(|c| c.to_i64().ok_or_else(|| Error::Unsupported(format!("coefficient {c} exceeds 64 bits"))))
            .collect::<Result<_>>()?;
        Ok(NewformData {
            label: label.to_string(),
            level,
            weight,
            coeffs,
        })
    }
}

/// A failed Hecke relation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum HeckeViolation {
    /// a_1 ≠ 1
    Normalization,
    /// a_{mn} ≠ a_m a_n with gcd(m, n) = 1
    Multiplicative { m: usize, n: usize },
    /// a_{p^{r+1}} ≠ a_p a_{p^r} − p^{k−1} a_{p^{r−1}} at p ∤ N
    Recursion { p: u64, exponent: u32 },
}

impl HeckeViolation {
    /// Every coefficient index the relation reads.
    pub fn indices(&self) -> Vec<usize> {
        match *self {
            HeckeViolation::Normalization => vec![1],
            HeckeViolation::Multiplicative { m, n } => vec![m, n, m * n],
            HeckeViolation::Recursion { p, exponent } => {
                let p = p as usize;
                vec![p, p.pow(exponent), p.pow(exponent - 1), p.pow(exponent - 2)]
            }
        }
    }

    /// (prime, exponent) to name in diagnostics.
    pub fn locus(&self) -> (u64, u32) {
        match *self {
            HeckeViolation::Normalization => (1, 0),
            HeckeViolation::Multiplicative { m, n } => {
                let (p, e) = factor((m * n) as u64)[0];
                (p, e)
            }
            HeckeViolation::Recursion { p, exponent } => (p, exponent),
        }
    }
}

/// Checks a_1 = 1, multiplicativity over coprime pairs and the p ∤ N
/// recursion on every index in range.
pub fn hecke_verify(f: &NewformData) -> Vec<HeckeViolation> {
    let k = f.len();
    let mut out = vec![];
    if k == 0 {
        return out;
    }
    if f.a(1) != 1 {
        out.push(HeckeViolation::Normalization);
    }
    let a = |i: usize| i128::from(f.a(i));
    for m in 2..=k {
        for n in (m + 1)..=k / m {
            if gcd(m as u64, n as u64) == 1 && a(m * n) != a(m) * a(n) {
                out.push(HeckeViolation::Multiplicative { m, n });
            }
        }
    }
    let pk1 = |p: u64| BigInt::from(p).pow(f.weight.saturating_sub(1));
    for p in (2..=k as u64).filter(|&p| is_prime(p) && !f.level.is_multiple_of(p)) {
        let w = pk1(p);
        let mut r = 1u32;
        while let Some(next) = (p as usize).checked_pow(r + 1).filter(|&x| x <= k) {
            let lhs = BigInt::from(a(next));
            let rhs = BigInt::from(a(p as usize)) * BigInt::from(a(p.pow(r) as usize))
                - &w * BigInt::from(a(p.pow(r - 1) as usize));
            if lhs != rhs {
                out.push(HeckeViolation::Recursion { p, exponent: r + 1 });
            }
            r += 1;
        }
    }
    out
}

fn json_error(line: usize, e: &serde_json::Error) -> Error {
    Error::Parse {
        line,
        column: e.column(),
        msg: e.to_string(),
    }
}

/// Parses line-delimited records {label, level, weight, an}; blank lines are
/// skipped. Each record must have even positive weight, a_1 = 1 and no Hecke
/// violations.
pub fn parse_newforms(text: &str) -> Result<Vec<NewformData>> {
    let mut out = vec![];
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let f: NewformData = serde_json::from_str(raw).map_err(|e| json_error(line, &e))?;
        let bad = |msg: String| Error::Parse { line, column: 1, msg };
        if f.level == 0 {
            return Err(bad(format!("{}: level must be positive", f.label)));
        }
        if f.weight == 0 || !f.weight.is_multiple_of(2) {
            return Err(bad(format!("{}: weight {} must be even and positive", f.label, f.weight)));
        }
        if f.coeffs.is_empty() {
            return Err(bad(format!("{}: empty coefficient list", f.label)));
        }
        if f.coeffs[0] != 1 {
            return Err(bad(format!("{}: a_1 = {} but newforms are normalized", f.label, f.coeffs[0])));
        }
        if let Some(v) = hecke_verify(&f).first() {
            let (p, exponent) = v.locus();
            return Err(Error::Hecke {
                label: f.label.clone(),
                p,
                exponent,
            });
        }
        out.push(f);
    }
    Ok(out)
}

pub fn ingest_newforms(path: impl AsRef<Path>) -> Result<Vec<NewformData>> {
    let text = std::fs::read_to_string(path)?;
    parse_newforms(&text)
}

/// q-expansion c_0..c_K of Π η(d z)^r.
pub fn eta_product_coeffs(spec: &[(u64, i64)], count: usize) -> Result<Vec<BigInt>> {
    let shift: i64 = spec.iter().map(|&(d, r)| d as i64 * r).sum();
    if shift % 24 != 0 {
        return Err(Error::Argument(format!("Σ d·r = {shift} is not divisible by 24")));
    }
    if spec.iter().any(|&(d, _)| d == 0) {
        return Err(Error::Argument("eta scale must be positive".into()));
    }
    let shift = shift / 24;
    if shift < 0 {
        return Err(Error::Unsupported(format!("q^{shift} leading term: pole at the cusp")));
    }
    let mut out = vec![BigInt::zero(); count + 1];
    if shift as usize > count {
        return Ok(out);
    }
    let len = count - shift as usize + 1;
    let mut series = vec![BigInt::zero(); len];
    series[0] = BigInt::one();
    for &(d, r) in spec {
        let eta = series_power(&pentagonal(d as usize, len), r);
        series = mul_trunc(&series, &eta);
    }
    for (i, c) in series.into_iter().enumerate() {
        out[i + shift as usize] = c;
    }
    Ok(out)
}

/// Π_{n ≥ 1} (1 − q^{dn}) to `len` terms from Euler's pentagonal theorem.
fn pentagonal(d: usize, len: usize) -> Vec<BigInt> {
    let mut s = vec![BigInt::zero(); len];
    s[0] = BigInt::one();
    for k in 1i64.. {
        let mut any = false;
        for j in [k, -k] {
            let e = (j * (3 * j - 1) / 2) as usize * d;
            if e < len {
                any = true;
                s[e] += if k % 2 == 0 { 1 } else { -1 };
            }
        }
        if !any {
            break;
        }
    }
    s
}

fn mul_trunc(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let len = a.len();
    let mut c = vec![BigInt::zero(); len];
    for (i, x) in a.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
        for (j, y) in b.iter().take(len - i).enumerate().filter(|(_, y)| !y.is_zero()) {
            c[i + j] += x * y;
        }
    }
    c
}

/// A^r for a series with A_0 = 1, via n·B_n = Σ_{k=1}^n ((r+1)k − n) A_k B_{n−k}.
fn series_power(a: &[BigInt], r: i64) -> Vec<BigInt> {
    let len = a.len();
    let mut b = vec![BigInt::zero(); len];
    b[0] = BigInt::one();
    for n in 1..len {
        let mut acc = BigInt::zero();
        for k in 1..=n {
            if a[k].is_zero() {
                continue;
            }
            let w = (r + 1) * k as i64 - n as i64;
            acc += &a[k] * &b[n - k] * w;
        }
        debug_assert!((&acc % n).is_zero());
        b[n] = acc / n;
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    fn delta(k: usize) -> NewformData {
        NewformData::from_series("1.12.a.a", 1, 12, &eta_product_coeffs(&[(1, 24)], k).unwrap()).unwrap()
    }

    #[test]
    fn eta_examples() {
        let d = eta_product_coeffs(&[(1, 24)], 3).unwrap();
        assert_eq!(d, [0, 1, -24, 252].map(BigInt::from));
        let e = eta_product_coeffs(&[(1, 2), (11, 2)], 3).unwrap();
        assert_eq!(e, [0, 1, -2, -1].map(BigInt::from));
        assert_eq!(eta_product_coeffs(&[], 2).unwrap(), [1, 0, 0].map(BigInt::from));
        assert!(eta_product_coeffs(&[(1, 1)], 2).is_err());
    }

    #[test]
    fn pentagonal_matches_product() {
        // direct product of (1 − q^n) as an oracle
        let len = 60;
        let mut direct = vec![BigInt::zero(); len];
        direct[0] = BigInt::one();
        for n in 1..len {
            let mut f = vec![BigInt::zero(); len];
            f[0] = BigInt::one();
            f[n] = BigInt::from(-1);
            direct = mul_trunc(&direct, &f);
        }
        assert_eq!(pentagonal(1, len), direct);
        let sq = series_power(&direct, 2);
        assert_eq!(sq, mul_trunc(&direct, &direct));
        let inv = series_power(&direct, -1);
        let one = mul_trunc(&inv, &direct);
        assert!(one[0].is_one() && one[1..].iter().all(Zero::is_zero));
    }

    #[test]
    fn delta_hecke() {
        let d = delta(200);
        assert!(hecke_verify(&d).is_empty());
        assert_eq!(d.a(4), -1472);
        assert_eq!(d.a(4), d.a(2) * d.a(2) - 2048);
    }

    #[test]
    fn perturbation_is_local() {
        let mut d = delta(60);
        d.coeffs[5] += 1; // a_6
        let v = hecke_verify(&d);
        assert!(!v.is_empty());
        assert!(v.iter().all(|x| x.indices().contains(&6)));
        assert!(v.contains(&HeckeViolation::Multiplicative { m: 2, n: 3 }));
    }

    #[test]
    fn short_lists_pass() {
        let d = delta(3);
        assert!(hecke_verify(&d).is_empty());
    }

    #[test]
    fn parse_rejects() {
        let good = serde_json::to_string(&delta(10)).unwrap();
        assert_eq!(parse_newforms(&format!("{good}\n\n{good}\n")).unwrap().len(), 2);
        let mut bad = delta(10);
        bad.coeffs[0] = 2;
        let e = parse_newforms(&serde_json::to_string(&bad).unwrap()).unwrap_err();
        assert!(matches!(e, Error::Parse { .. }));
        assert!(hecke_verify(&bad).contains(&HeckeViolation::Normalization));
        let mut bad = delta(10);
        bad.coeffs[3] += 5; // a_4 only, at p = 2
        match parse_newforms(&serde_json::to_string(&bad).unwrap()).unwrap_err() {
            Error::Hecke { p, exponent, .. } => assert_eq!((p, exponent), (2, 2)),
            e => panic!("{e}"),
        }
        match parse_newforms("{\"label\": 3}").unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 1),
            e => panic!("{e}"),
        }
    }
}
