//! Character spec mini-language:
//! `p:<prime>,n:<exp>,g:<e>[,h:<e>][,u:<a/b>]` per prime, factors joined by
//! `;`, or `kronecker:<d>`. `g`/`h` are generator exponents over the
//! generator orders; `u` is the value at the uniformizer as a fraction of a
//! turn (local characters only).

use crate::characters::{kronecker_character, unit_generators, DirichletCharacter, LocalCharacter, Turn, UnitGroupCharacter};
use crate::error::{Error, Result};

/// Largest modulus p^n accepted, matching the discrete-log table limit.
const MAX_MODULUS: u64 = 1 << 26;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorSpec {
    pub p: u64,
    pub n: u32,
    pub exponents: Vec<i64>,
    pub uniformizer: Option<Turn>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CharSpec {
    Kronecker(i64),
    Factors(Vec<FactorSpec>),
}

fn err(column: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line: 1,
        column,
        msg: msg.into(),
    }
}

fn int<T: std::str::FromStr>(s: &str, column: usize, what: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| err(column, format!("{what}: expected an integer, got {s:?}")))
}

fn turn(s: &str, column: usize) -> Result<Turn> {
    let (a, b) = s.split_once('/').unwrap_or((s, "1"));
    let a: i64 = int(a, column, "u numerator")?;
    let b: u64 = int(b, column, "u denominator")?;
    if b == 0 {
        return Err(err(column, "u denominator is zero"));
    }
    Ok(Turn::new(a.rem_euclid(b as i64), b))
}

fn parse_factor(text: &str, offset: usize) -> Result<FactorSpec> {
    let (mut p, mut n, mut g, mut h, mut u) = (None, None, None, None, None);
    let mut col = offset;
    for field in text.split(',') {
        let c = col + 1;
        col += field.len() + 1;
        let (key, val) = field
            .split_once(':')
            .ok_or_else(|| err(c, format!("expected key:value, got {field:?}")))?;
        let slot_dup = |set: bool| if set { Err(err(c, format!("duplicate key {key:?}"))) } else { Ok(()) };
        match key.trim() {
            "p" => {
                slot_dup(p.is_some())?;
                p = Some(int::<u64>(val, c, "p")?);
            }
            "n" => {
                slot_dup(n.is_some())?;
                n = Some(int::<u32>(val, c, "n")?);
            }
            "g" => {
                slot_dup(g.is_some())?;
                g = Some(int::<i64>(val, c, "g")?);
            }
            "h" => {
                slot_dup(h.is_some())?;
                h = Some(int::<i64>(val, c, "h")?);
            }
            "u" => {
                slot_dup(u.is_some())?;
                u = Some(turn(val.trim(), c)?);
            }
            other => return Err(err(c, format!("unknown key {other:?}"))),
        }
    }
    let p = p.ok_or_else(|| err(offset + 1, "missing p"))?;
    let n = n.ok_or_else(|| err(offset + 1, "missing n"))?;
    if !crate::arith::is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    match crate::arith::checked_pow(p, n) {
        Some(q) if q <= MAX_MODULUS => {}
        _ => return Err(Error::Argument(format!("modulus {p}^{n} is too large"))),
    }
    let gens = unit_generators(p, n).len();
    let exponents: Vec<i64> = [g, h].into_iter().flatten().collect();
    if h.is_some() && g.is_none() {
        return Err(err(offset + 1, "h given without g"));
    }
    // g may be left out for n = 0, or for the trivial character mod p^n
    let exponents = if exponents.is_empty() { vec![0; gens] } else { exponents };
    if exponents.len() != gens {
        return Err(Error::Character(format!(
            "(Z/{p}^{n})^x has {gens} generator(s), got {} exponent(s)",
            exponents.len()
        )));
    }
    Ok(FactorSpec {
        p,
        n,
        exponents,
        uniformizer: u,
    })
}

pub fn parse_character_spec(text: &str) -> Result<CharSpec> {
    let t = text.trim();
    if t.is_empty() {
        return Err(err(1, "empty character spec"));
    }
    if let Some(d) = t.strip_prefix("kronecker:") {
        return Ok(CharSpec::Kronecker(int(d, 11, "discriminant")?));
    }
    if t == "trivial" || t == "1" {
        return Ok(CharSpec::Factors(vec![]));
    }
    let mut factors = vec![];
    let mut offset = 0;
    for part in text.split(';') {
        factors.push(parse_factor(part, offset)?);
        offset += part.len() + 1;
    }
    let mut ps: Vec<u64> = factors.iter().map(|f| f.p).collect();
    ps.sort();
    ps.dedup();
    if ps.len() != factors.len() {
        return Err(err(1, "a prime appears in two factors"));
    }
    Ok(CharSpec::Factors(factors))
}

impl FactorSpec {
    pub fn unit(&self) -> Result<UnitGroupCharacter> {
        UnitGroupCharacter::from_exponents(self.p, self.n, &self.exponents)
    }
}

impl CharSpec {
    pub fn dirichlet(&self) -> Result<DirichletCharacter> {
        match self {
            CharSpec::Kronecker(d) => kronecker_character(*d),
            CharSpec::Factors(fs) => {
                if fs.iter().any(|f| f.uniformizer.is_some()) {
                    return Err(Error::Argument("u: applies to local characters only".into()));
                }
                DirichletCharacter::new(fs.iter().map(FactorSpec::unit).collect::<Result<_>>()?)
            }
        }
    }

    /// The character at p: a single local factor as written, or the local
    /// component of the global character otherwise.
    pub fn local(&self, p: u64) -> Result<LocalCharacter> {
        if !crate::arith::is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        match self {
            CharSpec::Factors(fs) if fs.len() == 1 && fs[0].uniformizer.is_some() || fs.len() == 1 && fs[0].p == p => {
                let f = &fs[0];
                if f.p != p {
                    return Err(Error::Argument(format!("character is given at {} but the place is {p}", f.p)));
                }
                Ok(LocalCharacter::new(f.unit()?, f.uniformizer.unwrap_or(Turn::ZERO)))
            }
            _ => Ok(self.dirichlet()?.local_component(p)),
        }
    }
}
