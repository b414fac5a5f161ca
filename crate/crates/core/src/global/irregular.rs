//! Small-cell and dual local terms at a finite place, with brute-force
//! evaluators over valuation shells.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::arith::{lcm, phi_pp};
use crate::characters::{dual_char_sum_g, ramanujan_sum, units_mod, Turn};
use crate::cyclotomic::{CycAccumulator, CyclotomicSum};
use crate::error::{Error, Result};
use crate::orbital::LocalPlaceData;
use crate::padic::{projective_k_m_shift, vol_k_bar, Matrix2, ValuedRational};

/// coeff · p^exponent; the exponent is rational because s is.
#[derive(Debug, Clone)]
pub struct SmallCellValue {
    pub p: u64,
    pub coeff: CyclotomicSum,
    pub exponent: BigRational,
}

impl SmallCellValue {
    /// Equal as complex numbers (exact on the coefficient, then on the power).
    pub fn value_eq(&self, other: &SmallCellValue) -> bool {
        let (z1, z2) = (self.coeff.is_zero(), other.coeff.is_zero());
        if z1 || z2 {
            return z1 && z2;
        }
        self.p == other.p && self.exponent == other.exponent && self.coeff.value_eq(&other.coeff)
    }

    pub fn to_complex(&self) -> (f64, f64) {
        let (re, im) = self.coeff.to_complex();
        let e = num_traits::ToPrimitive::to_f64(&self.exponent).unwrap_or(0.0);
        let f = (self.p as f64).powf(e);
        (re * f, im * f)
    }
}

fn check_s(s: &BigRational) -> Result<()> {
    if *s <= BigRational::zero() {
        return Err(Error::Argument(format!("small cell needs s > 0, got {s}")));
    }
    Ok(())
}

fn abs_power(e_x: i64, s: &BigRational) -> BigRational {
    // |x|^{1+2s} = p^{−e_x(1+2s)}
    -(BigRational::from_integer(e_x.into()) * (BigRational::one() + s + s))
}

/// Closed form of the small-cell local integral at x with e_p(x) = e_x.
pub fn small_cell_local_eval(place: &LocalPlaceData, e_x: i64, s: &BigRational) -> Result<SmallCellValue> {
    check_s(s)?;
    let vinv = vol_k_bar(place.p, place.m).recip();
    let (coeff, exponent) = if place.n >= 1 {
        // the sign comes from τ(χ)τ(χ̄) = χ(−1)p^n
        let c = if e_x == 0 {
            place.chi.unit.value(-1).expect("−1 is a unit").to_sum().scale(&vinv)
        } else {
            CyclotomicSum::zero(1)
        };
        (c, BigRational::zero())
    } else {
        let c = if e_x >= 0 {
            CyclotomicSum::from_rational(vinv)
        } else {
            CyclotomicSum::zero(1)
        };
        (c, abs_power(e_x, s))
    };
    Ok(SmallCellValue { p: place.p, coeff, exponent })
}

/// ψ(c/p^k) as an index into ζ_L, with ψ(x) = e^{2πi{x}_p}.
fn psi_index(c: i64, k: i64, p: u64, l: u64) -> i64 {
    if k <= 0 {
        return 0;
    }
    let pk = p.pow(k as u32);
    debug_assert!(l.is_multiple_of(pk));
    c.rem_euclid(pk as i64) * (l / pk) as i64
}

/// |x|^{1+2s} ∫∫ f_v([[y, b], [0, 1]]) ψ(xb) χ̄(y) db d^×y, x = p^{e_x}, by
/// summing over y in shells |e_y| ≤ width and b in classes mod Z_p, with
/// K[m]-membership decided on the actual matrix.
pub fn small_cell_shell_sum(place: &LocalPlaceData, e_x: i64, s: &BigRational, width: i64) -> Result<SmallCellValue> {
    check_s(s)?;
    let (p, n, m) = (place.p, place.n as i64, place.m);
    let chi = &place.chi;
    let b_prec = n + width;
    let alphas: Vec<i64> = if n == 0 { vec![0] } else { units_mod(p, n as u32).into_iter().map(|a| a as i64).collect() };
    let pn_inv = ValuedRational::pow_p(p, -n);

    // ∫_{Z_p} ψ(x b') db' from the p^K cosets it is constant on
    let kd = (-e_x).max(0);
    let pk = p.pow(kd as u32);
    let mut dacc = CycAccumulator::new(pk);
    for b in 0..pk as i64 {
        dacc.add_root(psi_index(b, kd, p, pk), 1);
    }
    let d = dacc.finish(BigRational::new(BigInt::one(), BigInt::from(pk)));
    if d.is_zero() {
        // the b-integral vanishes identically, whatever the membership pattern
        return Ok(SmallCellValue { p, coeff: CyclotomicSum::zero(1), exponent: abs_power(e_x, s) });
    }

    let l = lcm(chi.order(), p.pow(b_prec.max(0) as u32));
    let mut total = CyclotomicSum::zero(l);
    for e_y in -width..=width {
        let ny = n.max(n - e_y).max(1) as u32;
        let cells = units_mod(p, ny);
        let mut acc = CycAccumulator::new(l);
        for &u in &cells {
            let y = &ValuedRational::pow_p(p, e_y) * &ValuedRational::from_int(u);
            let chi_y = chi.value(&y).expect("y is nonzero").neg();
            for &a in &alphas {
                let na = Matrix2::new(ValuedRational::one(), &ValuedRational::from_int(a) * &pn_inv, ValuedRational::zero(), ValuedRational::one());
                let ca = if n == 0 { Turn::ZERO } else { chi.unit.value(a).expect("unit") };
                for &b in &alphas {
                    let nb = Matrix2::new(ValuedRational::one(), &ValuedRational::from_int(b) * &pn_inv, ValuedRational::zero(), ValuedRational::one());
                    let cb = if n == 0 { Turn::ZERO } else { chi.unit.value(b).expect("unit").neg() };
                    let weight = ca.add(cb).add(chi_y).index(l);
                    for c in 0..p.pow(b_prec as u32) as i64 {
                        let bv = &ValuedRational::from_int(c) * &ValuedRational::pow_p(p, -b_prec);
                        let g = Matrix2::new(y.clone(), bv, ValuedRational::zero(), ValuedRational::one());
                        let h = na.mul(&g).mul(&nb);
                        if projective_k_m_shift(&h, p, m).is_some() {
                            acc.add_root(weight + psi_index(c, b_prec - e_x, p, l), 1);
                        }
                    }
                }
            }
        }
        let cell = BigRational::new(BigInt::one(), BigInt::from(cells.len() as u64));
        total = total.add(&acc.finish(cell));
    }
    let pn = BigRational::from_integer(BigInt::from(p).pow(n as u32));
    let scale = vol_k_bar(p, m).recip() / pn;
    let coeff = total.mul(&d).scale(&scale);
    Ok(SmallCellValue { p, coeff, exponent: abs_power(e_x, s) })
}

fn require_ramified(place: &LocalPlaceData, op: &'static str) -> Result<()> {
    if place.n == 0 {
        return Err(Error::UseUnramified { op });
    }
    Ok(())
}

/// p^{−n}χ(−1)/(Vol(K̄[m])ζ_p(1)).
fn dual_prefactor(place: &LocalPlaceData) -> CyclotomicSum {
    let p = place.p;
    let pn = BigRational::from_integer(BigInt::from(p).pow(place.n));
    let zeta_inv = BigRational::new(BigInt::from(p - 1), BigInt::from(p));
    let r = zeta_inv / (vol_k_bar(p, place.m) * pn);
    place.chi.unit.value(-1).expect("−1 is a unit").to_sum().scale(&r)
}

fn p_pow_neg(p: u64, e: i64) -> BigRational {
    if e >= 0 {
        BigRational::new(BigInt::one(), BigInt::from(p).pow(e as u32))
    } else {
        BigRational::from_integer(BigInt::from(p).pow((-e) as u32))
    }
}

/// Dual kernel at x with e_p(x) = e_x: the finite sum over m' below
/// T = max(2n, −e_x, m) plus the geometric tail where G = φ(p^n), R = 1.
pub fn dual_kernel_eval(place: &LocalPlaceData, e_x: i64) -> Result<CyclotomicSum> {
    require_ramified(place, "dual_kernel_eval")?;
    let (p, n, m) = (place.p, place.n as i64, place.m as i64);
    let t = (2 * n).max(-e_x).max(m);
    let l = place.chi.order();
    let mut sum = CyclotomicSum::zero(l);
    for mm in m.max(-e_x - 1)..t {
        let r = ramanujan_sum(p, mm, e_x);
        if r.is_zero() {
            continue;
        }
        sum = sum.add(&dual_char_sum_g(place, mm).scale(&(r * p_pow_neg(p, mm))));
    }
    let tail = BigRational::from_integer(phi_pp(p, n as u32).into()) * p_pow_neg(p, t - 1)
        / BigRational::from_integer((p - 1).into());
    sum = sum.add(&CyclotomicSum::from_rational(tail));
    Ok(sum.mul(&dual_prefactor(place)))
}

/// Truncated direct sum over m' ∈ [m, upto] with R evaluated by summing ψ.
pub fn dual_kernel_direct(place: &LocalPlaceData, e_x: i64, upto: i64) -> Result<CyclotomicSum> {
    require_ramified(place, "dual_kernel_direct")?;
    let (p, m) = (place.p, place.m as i64);
    let l = place.chi.order();
    let mut sum = CyclotomicSum::zero(l);
    for mm in m..=upto {
        // R(m', x) = ∫_{Z_p^×} ψ(γ p^{m'+e_x}) d^×γ over γ mod p^k
        let k = (-(mm + e_x)).max(1);
        let pk = p.pow(k as u32);
        let mut acc = CycAccumulator::new(pk);
        for g in (1..pk).filter(|g| g % p != 0) {
            acc.add_root(psi_index(g as i64, -(mm + e_x), p, pk), 1);
        }
        let r = acc.finish(BigRational::new(BigInt::one(), BigInt::from(phi_pp(p, k as u32))));
        if r.is_zero() {
            continue;
        }
        let g = dual_char_sum_g(place, mm).scale(&p_pow_neg(p, mm));
        sum = sum.add(&g.mul(&r));
    }
    Ok(sum.mul(&dual_prefactor(place)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DualSupportRow {
    pub e_y: i64,
    pub e_b: i64,
    /// some sampled (α, β, y, b, z) lands in K[m]
    pub member: bool,
    /// e_y = 0 and e_b ≥ m
    pub predicted: bool,
}

impl DualSupportRow {
    /// Membership forces the predicted valuations.
    pub fn consistent(&self) -> bool {
        !self.member || self.predicted
    }
}

fn sample_units(p: u64) -> Vec<i64> {
    let mut v: Vec<i64> = [1, -1, 2, 1 + p as i64, 3, -(p as i64) - 1]
        .into_iter()
        .filter(|u| u.rem_euclid(p as i64) != 0)
        .collect();
    v.sort();
    v.dedup();
    v
}

/// For each (e_y, e_b), whether z·n(αp^{−n})·[[1,0],[b,1]]·diag(y,1)·n(βp^{−n})
/// lies in K[m] for some sampled unit parts of y, b, all α, β and any z.
pub fn dual_support_check(place: &LocalPlaceData, grid: &[(i64, i64)]) -> Result<Vec<DualSupportRow>> {
    require_ramified(place, "dual_support_check")?;
    let (p, n, m) = (place.p, place.n as i64, place.m);
    let units: Vec<i64> = units_mod(p, n as u32).into_iter().map(|a| a as i64).collect();
    let samples = sample_units(p);
    let pn_inv = ValuedRational::pow_p(p, -n);
    let one = ValuedRational::one();
    let mut rows = Vec::with_capacity(grid.len());
    for &(e_y, e_b) in grid {
        let mut member = false;
        'search: for &gy in &samples {
            let y = &ValuedRational::pow_p(p, e_y) * &ValuedRational::from_int(gy);
            for &gb in &samples {
                let b = &ValuedRational::pow_p(p, e_b) * &ValuedRational::from_int(gb);
                let by = &b * &y;
                for &a in &units {
                    let ap = &ValuedRational::from_int(a) * &pn_inv;
                    let top = &y + &(&ap * &by);
                    for &bt in &units {
                        let bp = &ValuedRational::from_int(bt) * &pn_inv;
                        let g = Matrix2::new(
                            top.clone(),
                            &(&top * &bp) + &ap,
                            by.clone(),
                            &one + &(&bp * &by),
                        );
                        if projective_k_m_shift(&g, p, m).is_some() {
                            member = true;
                            break 'search;
                        }
                    }
                }
            }
        }
        rows.push(DualSupportRow {
            e_y,
            e_b,
            member,
            predicted: e_y == 0 && e_b >= m as i64,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::{all_characters, LocalCharacter, UnitGroupCharacter};

    fn places(p: u64, n: u32, m: u32) -> LocalPlaceData {
        let chi = if n == 0 {
            LocalCharacter::new(UnitGroupCharacter::trivial(p), Turn::new(1, 3))
        } else {
            let u = all_characters(p, n).into_iter().find(|c| c.is_primitive()).unwrap();
            LocalCharacter::new(u, Turn::new(1, 4))
        };
        LocalPlaceData::new(p, m, chi, None).unwrap()
    }

    fn half() -> BigRational {
        BigRational::new(1.into(), 2.into())
    }

    #[test]
    fn small_cell_examples() {
        let v = small_cell_local_eval(&places(5, 0, 0), 0, &half()).unwrap();
        assert!(v.coeff.value_eq(&CyclotomicSum::one()));
        let v = small_cell_local_eval(&places(5, 1, 1), 1, &half()).unwrap();
        assert!(v.coeff.is_zero());
        let v = small_cell_local_eval(&places(3, 0, 1), 2, &half()).unwrap();
        assert!(v.coeff.value_eq(&CyclotomicSum::from_int(4)));
        assert_eq!(v.exponent, BigRational::from_integer((-4).into()));
        assert!(small_cell_local_eval(&places(3, 0, 1), 2, &BigRational::zero()).is_err());
    }

    #[test]
    fn small_cell_matches_shells() {
        for (p, n) in [(3, 0), (3, 1), (2, 2), (5, 1)] {
            for m in 0..=2 {
                let pl = places(p, n, m);
                for e_x in -2..=2 {
                    let a = small_cell_local_eval(&pl, e_x, &half()).unwrap();
                    let b = small_cell_shell_sum(&pl, e_x, &half(), 1).unwrap();
                    assert!(a.value_eq(&b), "p={p} n={n} m={m} e_x={e_x}: {:?} vs {:?}", a.to_complex(), b.to_complex());
                }
            }
        }
    }

    #[test]
    fn dual_matches_direct() {
        for (p, n, m) in [(5, 1, 1), (3, 1, 0), (3, 2, 1), (2, 2, 2), (7, 1, 3)] {
            let pl = places(p, n, m);
            for e_x in -6..=3 {
                let a = dual_kernel_eval(&pl, e_x).unwrap();
                let upto = if p == 2 { 60 } else { 30 };
                let b = dual_kernel_direct(&pl, e_x, upto).unwrap();
                assert!(a.distance(&b) < 2f64.powi(-40), "p={p} n={n} m={m} e_x={e_x}");
            }
        }
    }

    #[test]
    fn dual_pure_tail() {
        // m ≥ 2n and e_x ≤ −m−2: only the tail survives
        let pl = places(3, 1, 2);
        let v = dual_kernel_eval(&pl, -5).unwrap();
        let direct = dual_kernel_direct(&pl, -5, 40).unwrap();
        assert!(v.distance(&direct) < 1e-15);
    }

    #[test]
    fn dual_support_examples() {
        let pl = places(5, 1, 2);
        let rows = dual_support_check(&pl, &[(0, 2), (1, 2), (0, 1), (-1, 3)]).unwrap();
        assert!(rows[0].member);
        assert!(!rows[1].member);
        assert!(!rows[2].member);
        assert!(rows.iter().all(DualSupportRow::consistent));
    }
}
