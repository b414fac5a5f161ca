//! Central values L(1/2, f × χ) from the approximate functional equation with
//! an elementary incomplete gamma weight.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::NewformData;
use crate::arith::gcd;
use crate::characters::DirichletCharacter;
use crate::error::{Error, Result};

/// Split points for the primary root-number fit.
pub const PRIMARY_SPLITS: (f64, f64) = (1.0, 1.25);
/// Split points for the confirming refit.
pub const REFIT_SPLITS: (f64, f64) = (1.0, 0.8);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LValueResult {
    pub value: Complex64,
    pub truncation: usize,
    pub afe_discrepancy: f64,
    pub root_number: Complex64,
}

impl LValueResult {
    pub fn flagged(&self, tol: f64) -> bool {
        !(self.afe_discrepancy < tol)
    }
}

/// Γ(a, x)/Γ(a) = e^{−x} Σ_{j<a} x^j/j! for integer a ≥ 1.
pub fn incomplete_gamma_ratio(a: u32, x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 1..a {
        term *= x / j as f64;
        sum += term;
    }
    (-x).exp() * sum
}

/// Coefficients a_n χ(n) n^{−k/2} for n = 1..=len, complex.
struct Twist {
    b: Vec<Complex64>,
    sqrt_c: f64,
    a: u32,
    real: bool,
}

impl Twist {
    fn new(f: &NewformData, chi: &DirichletCharacter, len: usize) -> Result<Self> {
        if f.weight == 0 || !f.weight.is_multiple_of(2) {
            return Err(Error::Unsupported(format!("weight {} is not even", f.weight)));
        }
        let q = chi.modulus();
        if gcd(q, f.level) != 1 {
            return Err(Error::Unsupported(format!(
                "gcd(q, N) = gcd({q}, {}) > 1: conductor of the twist is not N·q²",
                f.level
            )));
        }
        if !chi.is_primitive() {
            return Err(Error::Imprimitive { op: "central_value_afe" });
        }
        if f.len() < len {
            return Err(Error::InsufficientCoefficients {
                needed: len,
                have: f.len(),
            });
        }
        let half_k = f.weight as f64 / 2.0;
        let b = (1..=len)
            .map(|n| {
                let scale = f.a(n) as f64 / (n as f64).powf(half_k);
                match chi.value(n as i64) {
                    Some(t) => {
                        let ang = 2.0 * PI * t.num() as f64 / t.den() as f64;
                        Complex64::from_polar(scale, ang)
                    }
                    None => Complex64::new(0.0, 0.0),
                }
            })
            .collect();
        let c = f.level as f64 * (q * q) as f64;
        Ok(Twist {
            b,
            sqrt_c: c.sqrt(),
            a: f.weight / 2,
            real: chi.is_real(),
        })
    }

    /// (Σ b_n W(2πnA/√C), Σ b̄_n W(2πn/(A√C))) over the first `terms`.
    fn sides(&self, terms: usize, split: f64) -> (Complex64, Complex64) {
        let mut s1 = Complex64::new(0.0, 0.0);
        let mut s2 = Complex64::new(0.0, 0.0);
        for (i, b) in self.b.iter().take(terms).enumerate() {
            let x = 2.0 * PI * (i + 1) as f64 / self.sqrt_c;
            s1 += b * incomplete_gamma_ratio(self.a, x * split);
            s2 += b.conj() * incomplete_gamma_ratio(self.a, x / split);
        }
        (s1, s2)
    }

    fn fit(&self, terms: usize, (a1, a2): (f64, f64)) -> Result<Complex64> {
        let (s11, s12) = self.sides(terms, a1);
        let (s21, s22) = self.sides(terms, a2);
        let det = s22 - s12;
        if det.norm() < 1e-12 {
            return Err(Error::IllConditioned { det: det.norm() });
        }
        let eps = (s11 - s21) / det;
        let modulus = eps.norm();
        if (modulus - 1.0).abs() > 1e-8 {
            return Err(Error::RootNumber { modulus });
        }
        if self.real {
            for r in [1.0, -1.0] {
                if (eps - Complex64::new(r, 0.0)).norm() < 1e-6 {
                    return Ok(Complex64::new(r, 0.0));
                }
            }
        }
        Ok(eps)
    }

    fn value(&self, terms: usize, eps: Complex64) -> Complex64 {
        let (s1, s2) = self.sides(terms, 1.0);
        s1 + eps * s2
    }
}

/// Truncation used when none is given: 10·√C, at least 50.
pub fn default_terms(f: &NewformData, chi: &DirichletCharacter) -> usize {
    let q = chi.modulus() as f64;
    let c = f.level as f64 * q * q;
    ((10.0 * c.sqrt()).ceil() as usize).max(50)
}

/// ε from matching the two-sided expansion at two split points, using 2T terms.
pub fn root_number_fit_at(
    f: &NewformData,
    chi: &DirichletCharacter,
    terms: usize,
    splits: (f64, f64),
) -> Result<Complex64> {
    Twist::new(f, chi, 2 * terms)?.fit(2 * terms, splits)
}

pub fn root_number_fit(f: &NewformData, chi: &DirichletCharacter) -> Result<Complex64> {
    root_number_fit_at(f, chi, default_terms(f, chi), PRIMARY_SPLITS)
}

/// L(1/2, f × χ) with `terms` coefficients (default 10·√C); the discrepancy
/// compares against 2·terms, so 2·terms coefficients are required.
pub fn central_value_afe(f: &NewformData, chi: &DirichletCharacter, terms: Option<usize>) -> Result<LValueResult> {
    let t = terms.unwrap_or_else(|| default_terms(f, chi));
    if t == 0 {
        return Err(Error::Argument("terms must be positive".into()));
    }
    let tw = Twist::new(f, chi, 2 * t)?;
    let eps = tw.fit(2 * t, PRIMARY_SPLITS)?;
    let value = tw.value(t, eps);
    let wide = tw.value(2 * t, eps);
    Ok(LValueResult {
        value,
        truncation: t,
        afe_discrepancy: (value - wide).norm(),
        root_number: eps,
    })
}
