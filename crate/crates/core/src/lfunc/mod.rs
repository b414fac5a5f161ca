//! Newform ingestion, central twisted L-values and their second moment.

mod afe;
mod newforms;

use rayon::prelude::*;
use serde::Serialize;

pub use afe::{
    central_value_afe, default_terms, incomplete_gamma_ratio, root_number_fit, root_number_fit_at, LValueResult,
    PRIMARY_SPLITS, REFIT_SPLITS,
};
pub use newforms::{eta_product_coeffs, hecke_verify, ingest_newforms, parse_newforms, HeckeViolation, NewformData};

use crate::arith::gcd;
use crate::characters::DirichletCharacter;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentEntry {
    pub label: String,
    pub l_re: f64,
    pub l_im: f64,
    pub abs_l2: f64,
    pub afe_discrepancy: f64,
    pub root_number_re: f64,
    pub root_number_im: f64,
    pub truncation: usize,
}

/// Σ_f |L(1/2, f × χ)|² over one (N, k) family against kN + k^{1/2}q·𝟏.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    #[serde(rename = "N")]
    pub level: u64,
    pub k: u32,
    pub q: u64,
    pub entries: Vec<MomentEntry>,
    pub sum: f64,
    pub bound_kn: f64,
    pub bound_kq: f64,
    /// N ≤ c·q²·gcd(N, q)
    pub indicator: bool,
    pub threshold_c: f64,
    pub fitted_constant: f64,
    /// some entry has afe_discrepancy at or above the tolerance
    pub flagged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentOptions {
    pub terms: Option<usize>,
    pub threshold_c: f64,
    pub tol: f64,
}

impl Default for MomentOptions {
    fn default() -> Self {
        MomentOptions {
            terms: None,
            threshold_c: 1.0,
            tol: 1e-8,
        }
    }
}

pub fn second_moment(forms: &[NewformData], chi: &DirichletCharacter, opts: &MomentOptions) -> Result<MomentReport> {
    let q = chi.modulus();
    let (level, k) = forms.first().map_or((0, 0), |f| (f.level, f.weight));
    if forms.iter().any(|f| (f.level, f.weight) != (level, k)) {
        return Err(Error::Argument("all forms in a moment must share level and weight".into()));
    }
    let results: Vec<(String, LValueResult)> = forms
        .par_iter()
        .map(|f| Ok((f.label.clone(), central_value_afe(f, chi, opts.terms)?)))
        .collect::<Result<_>>()?;
    let mut entries: Vec<MomentEntry> = results
        .into_iter()
        .map(|(label, r)| MomentEntry {
            label,
            l_re: r.value.re,
            l_im: r.value.im,
            abs_l2: r.value.norm_sqr(),
            afe_discrepancy: r.afe_discrepancy,
            root_number_re: r.root_number.re,
            root_number_im: r.root_number.im,
            truncation: r.truncation,
        })
        .collect();
    entries.sort_by(|a, b| a.label.cmp(&b.label));
    let sum = entries.iter().map(|e| e.abs_l2).sum::<f64>();
    let bound_kn = k as f64 * level as f64;
    let bound_kq = (k as f64).sqrt() * q as f64;
    let indicator = !forms.is_empty() && (level as f64) <= opts.threshold_c * (q * q * gcd(level, q)) as f64;
    let denom = bound_kn + if indicator { bound_kq } else { 0.0 };
    let flagged = entries.iter().any(|e| !(e.afe_discrepancy < opts.tol));
    Ok(MomentReport {
        level,
        k,
        q,
        entries,
        sum,
        bound_kn,
        bound_kq,
        indicator,
        threshold_c: opts.threshold_c,
        fitted_constant: if denom > 0.0 { sum / denom } else { 0.0 },
        flagged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_form_moment() {
        let d = NewformData::from_series("1.12.a.a", 1, 12, &eta_product_coeffs(&[(1, 24)], 200).unwrap()).unwrap();
        let one = DirichletCharacter::trivial();
        let r = second_moment(std::slice::from_ref(&d), &one, &MomentOptions::default()).unwrap();
        let l = central_value_afe(&d, &one, None).unwrap();
        assert_eq!(r.sum, l.value.norm_sqr());
        assert!(r.indicator && !r.flagged);
        let again = second_moment(&[d], &one, &MomentOptions::default()).unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn empty_basis() {
        let r = second_moment(&[], &DirichletCharacter::trivial(), &MomentOptions::default()).unwrap();
        assert!(r.entries.is_empty() && r.sum == 0.0);
    }
}
