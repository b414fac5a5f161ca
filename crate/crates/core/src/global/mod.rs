//! Global assembly over Q: ramification profiles, the support lattice, the
//! finite part of the regular orbital sum, and the small-cell and dual terms.

mod irregular;
mod regular;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;

pub use irregular::{dual_kernel_direct, dual_kernel_eval, dual_support_check, small_cell_local_eval, small_cell_shell_sum, DualSupportRow, SmallCellValue};
pub use regular::{
    regular_orbital_finite_with,
    lattice_oracle, regular_orbital_finite, stability_threshold_scan, support_set, RegularFinite, StabilityClass,
    StabilityReport, StabilityRow, SupportElement,
};

use crate::arith::factor;
use crate::characters::{kronecker_character, DirichletCharacter};
use crate::error::{Error, Result};
use crate::orbital::{LocalPlaceData, PlaceClass};

/// Level M, primitive character χ mod q, and the local data at every p | Mq.
#[derive(Debug, Clone)]
pub struct GlobalSetup {
    pub level: u64,
    pub chi: DirichletCharacter,
    pub places: BTreeMap<u64, LocalPlaceData>,
    pub sigma_plus: Vec<u64>,
    pub sigma_minus: Vec<u64>,
}

pub fn ramification_profile(level: u64, chi: &DirichletCharacter) -> Result<GlobalSetup> {
    if level == 0 {
        return Err(Error::Argument("level M must be positive".into()));
    }
    if !chi.is_primitive() {
        return Err(Error::Imprimitive { op: "ramification_profile" });
    }
    let mut primes: Vec<(u64, u32)> = factor(level);
    for c in chi.parts() {
        if !primes.iter().any(|&(p, _)| p == c.p()) {
            primes.push((c.p(), 0));
        }
    }
    primes.sort();
    let mut places = BTreeMap::new();
    let (mut sigma_plus, mut sigma_minus) = (vec![], vec![]);
    for (p, m) in primes {
        let place = LocalPlaceData::new(p, m, chi.local_component(p), None)?;
        match place.class() {
            PlaceClass::SigmaPlus => sigma_plus.push(p),
            PlaceClass::SigmaMinus => sigma_minus.push(p),
            PlaceClass::Unramified => {}
        }
        places.insert(p, place);
    }
    Ok(GlobalSetup {
        level,
        chi: chi.clone(),
        places,
        sigma_plus,
        sigma_minus,
    })
}

impl GlobalSetup {
    pub fn q(&self) -> u64 {
        self.chi.modulus()
    }

    pub fn m_at(&self, p: u64) -> u32 {
        self.places.get(&p).map_or(0, |pl| pl.m)
    }

    pub fn n_at(&self, p: u64) -> u32 {
        self.places.get(&p).map_or(0, |pl| pl.n)
    }

    /// Local data at any prime; primes away from Mq get m = n = 0.
    pub fn place_at(&self, p: u64) -> LocalPlaceData {
        match self.places.get(&p) {
            Some(pl) => pl.clone(),
            None => LocalPlaceData::new(p, 0, self.chi.local_component(p), None).expect("unramified place"),
        }
    }

    /// R = Π_{p ∤ q} p^{m_p}.
    pub fn lattice_r(&self) -> BigInt {
        self.places
            .values()
            .filter(|pl| pl.n == 0)
            .map(|pl| BigInt::from(pl.p).pow(pl.m))
            .product()
    }

    /// N = Π_{p ∈ Σ⁻} p^{n_p − m_p}.
    pub fn lattice_n(&self) -> BigInt {
        self.sigma_minus
            .iter()
            .map(|p| {
                let pl = &self.places[p];
                BigInt::from(*p).pow(pl.n - pl.m)
            })
            .product()
    }

    /// Π_{p ∈ Σ⁺} p^{m_p − n_p}: the extra divisibility from e_p(u) ≥ m_p − n_p.
    pub fn lattice_plus(&self) -> BigInt {
        self.sigma_plus
            .iter()
            .map(|p| {
                let pl = &self.places[p];
                BigInt::from(*p).pow(pl.m - pl.n)
            })
            .product()
    }

    /// Spacing R·Π_{Σ⁺}p^{m−n}/N² of the filtered support lattice.
    pub fn lattice_step(&self) -> BigRational {
        let n = self.lattice_n();
        BigRational::new(self.lattice_r() * self.lattice_plus(), &n * &n)
    }
}

/// The real primitive character of conductor q used by the stability scans.
pub fn default_character(q: u64) -> Result<DirichletCharacter> {
    if q == 1 {
        return Ok(DirichletCharacter::trivial());
    }
    for d in [q as i64, -(q as i64)] {
        if let Ok(c) = kronecker_character(d) {
            return Ok(c);
        }
    }
    Err(Error::Argument(format!(
        "no real primitive character of conductor {q}; pass an explicit character"
    )))
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_examples() {
        let chi5 = default_character(5).unwrap();
        let s = ramification_profile(1, &chi5).unwrap();
        assert_eq!((s.sigma_minus.clone(), s.sigma_plus.clone()), (vec![5], vec![]));
        let s = ramification_profile(25, &chi5).unwrap();
        assert_eq!(s.sigma_plus, vec![5]);
        let s = ramification_profile(6, &DirichletCharacter::trivial()).unwrap();
        assert!(s.sigma_plus.is_empty() && s.sigma_minus.is_empty());
        assert_eq!((s.m_at(2), s.m_at(3)), (1, 1));
    }
}
