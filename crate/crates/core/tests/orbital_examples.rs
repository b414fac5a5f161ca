//! Worked examples for the local orbital evaluators and their character sums,
//! each checked against an independent enumeration.

use num_bigint::BigInt;
use num_rational::BigRational;
use rtf_local::characters::*;
use rtf_local::cyclotomic::{CycAccumulator, CyclotomicSum};
use rtf_local::grid::derived_grid;
use rtf_local::orbital::*;
use rtf_local::{Error, ValuedRational};

fn place(p: u64, n: u32, m: u32, u: Turn) -> LocalPlaceData {
    let c = all_characters(p, n).into_iter().find(|c| c.is_primitive()).unwrap();
    LocalPlaceData::new(p, m, LocalCharacter::new(c, u), None).unwrap()
}

fn unramified(p: u64, m: u32, u: Turn) -> LocalPlaceData {
    LocalPlaceData::new(p, m, LocalCharacter::new(UnitGroupCharacter::trivial(p), u), None).unwrap()
}

fn t(a: i64, b: i64) -> ValuedRational {
    ValuedRational::new(a, b).unwrap()
}

fn rat(a: i64, b: i64) -> CyclotomicSum {
    CyclotomicSum::from_rational(BigRational::new(BigInt::from(a), BigInt::from(b)))
}

#[test]
fn boundary_fires_at_minus_one_eighth() {
    // e(t) = 0, e(1 − t) = 2 = 2n: the k = −n boundary term is live
    let pl = place(3, 1, 0, Turn::ZERO);
    let b = eval_orbital_bruteforce(&pl, &t(-1, 8)).unwrap();
    let c = eval_orbital_cases(&pl, &t(-1, 8)).unwrap();
    assert!(b.support_hit);
    assert!(b.value.value_eq(&rat(1, 3)));
    assert!(c.value.value_eq(&b.value));
    assert_eq!(c.branch_trace[0].branch, Branch::Boundary);
}

#[test]
fn ten_ninths_cancels() {
    let pl = place(3, 1, 0, Turn::ZERO);
    let b = eval_orbital_bruteforce(&pl, &t(10, 9)).unwrap();
    let c = eval_orbital_cases(&pl, &t(10, 9)).unwrap();
    assert!(b.support_hit && b.value.is_zero());
    assert!(c.value.is_zero());
    assert!(c.branch_trace.iter().any(|x| x.k == 1));
}

#[test]
fn sigma_plus_t_five() {
    let pl = place(5, 1, 1, Turn::ZERO);
    let b = eval_orbital_bruteforce(&pl, &t(5, 1)).unwrap();
    let c = eval_orbital_cases(&pl, &t(5, 1)).unwrap();
    assert!(b.value.value_eq(&rat(12, 5)));
    assert!(c.value.value_eq(&b.value));
}

#[test]
fn boundary_weight_is_p_to_minus_n() {
    // n = 2, m = 0, e(1 − t) = 4: the boundary alone contributes 1/9
    let pl = place(3, 2, 0, Turn::ZERO);
    let c = eval_orbital_cases(&pl, &t(-80, 1)).unwrap();
    let bd: Vec<_> = c.branch_trace.iter().filter(|x| x.branch == Branch::Boundary).collect();
    assert_eq!(bd.len(), 1);
    let alone = bd[0].partial.scale(&pl.prefactor());
    assert!(alone.value_eq(&rat(1, 9)));
}

/// S(k) straight from its definition: α′β′ ≡ −(t − 1)p^{2k} mod p^{n+k}.
fn s_oracle(pl: &LocalPlaceData, k: i64, tt: &ValuedRational) -> CyclotomicSum {
    let (p, n) = (pl.p, pl.n as i64);
    let md = p.pow((n + k) as u32);
    let l = pl.chi.order();
    let target = &(&ValuedRational::one() - tt) * &ValuedRational::pow_p(p, 2 * k);
    let mut acc = CycAccumulator::new(l);
    for a in (0..md).filter(|a| a % p != 0) {
        for b in (0..md).filter(|b| b % p != 0) {
            let diff = &ValuedRational::from_int((a * b) as i64) - &target;
            if !diff.val(p).at_least(n + k) {
                continue;
            }
            let pk = ValuedRational::pow_p(p, -k);
            let x = &ValuedRational::one() - &(&pk * &ValuedRational::from_int(a as i64));
            let y = &ValuedRational::one() - &(&pk * &ValuedRational::from_int(b as i64));
            let v = pl.chi.value(&x).unwrap().add(pl.chi.value(&y).unwrap().neg());
            acc.add_root(v.index(l), 1);
        }
    }
    acc.finish(BigRational::from_integer(1.into()))
}

#[test]
fn charsum_s_matches_definition() {
    // k = −1 needs e(1 − t) = 2
    let pl = place(3, 2, 0, Turn::ZERO);
    let tt = t(-17, 1);
    assert!(charsum_s(&pl, -1, &tt).unwrap().value_eq(&s_oracle(&pl, -1, &tt)));
    let pl = place(5, 2, 0, Turn::ZERO);
    for a in [1, 2, 3, 7, 11] {
        let tt = &ValuedRational::one() - &t(25 * a, 1);
        assert!(charsum_s(&pl, -1, &tt).unwrap().value_eq(&s_oracle(&pl, -1, &tt)), "t = {tt}");
    }
    // outside the window
    assert!(matches!(charsum_s(&pl, -1, &t(5, 1)), Err(Error::OutOfWindow { .. })));
}

#[test]
fn j_sums_match_bruteforce_cells() {
    // with χ(p) = 1 the brute-force cell at (k, r₁, r₂) is the bare 𝒥 sum
    let pl = place(5, 1, 1, Turn::ZERO);
    let b = eval_orbital_bruteforce(&pl, &t(5, 1)).unwrap();
    let cell = b.branch_trace.iter().find(|x| (x.k, x.r1, x.r2) == (0, 1, 0)).unwrap();
    assert!(charsum_j1(&pl, 1, &t(5, 1)).unwrap().value_eq(&cell.partial));

    let pl = place(3, 1, 1, Turn::ZERO);
    let b = eval_orbital_bruteforce(&pl, &t(-1, 3)).unwrap();
    let cell = b.branch_trace.iter().find(|x| (x.k, x.r1, x.r2) == (1, 1, -1)).unwrap();
    assert!(charsum_j2(&pl, 1, -1, 1, &t(-1, 3)).unwrap().value_eq(&cell.partial));
    // off the line k + r₁ + r₂ = n
    assert!(charsum_j2(&pl, 3, 3, 1, &t(-1, 3)).unwrap().is_zero());
}

#[test]
fn j_sums_trivially_bounded() {
    for (p, n) in [(3u64, 1u32), (3, 2), (5, 1)] {
        let pl = place(p, n, 0, Turn::new(1, 3));
        let pn = p.pow(n) as f64;
        for tt in derived_grid(p, n, 60) {
            let (e_t, e1) = valuations(p, &tt);
            for r1 in (e1 - 2)..=(e_t + n as i64 + 2) {
                assert!(charsum_j1(&pl, r1, &tt).unwrap().abs() <= pn + 1e-9);
                for k in 1..=3 {
                    let r2 = n as i64 - k - r1;
                    assert!(charsum_j2(&pl, r1, r2, k, &tt).unwrap().abs() <= pn + 1e-9);
                }
            }
        }
    }
}

#[test]
fn unramified_examples() {
    let pl = unramified(7, 0, Turn::ZERO);
    assert!(eval_orbital_unramified(&pl, &t(3, 1)).unwrap().value.value_eq(&CyclotomicSum::one()));
    let pl1 = unramified(7, 1, Turn::ZERO);
    assert!(eval_orbital_unramified(&pl1, &t(3, 1)).unwrap().value.is_zero());
    assert!(eval_orbital_unramified(&pl, &t(8, 1)).unwrap().value.is_zero());
}

#[test]
fn redirects_and_domain_errors() {
    let ram = place(3, 1, 0, Turn::ZERO);
    let unr = unramified(3, 0, Turn::ZERO);
    assert!(matches!(eval_orbital_bruteforce(&ram, &t(1, 1)), Err(Error::DegenerateT { .. })));
    assert!(matches!(eval_orbital_cases(&ram, &t(0, 1)), Err(Error::DegenerateT { .. })));
    assert!(matches!(eval_orbital_bruteforce(&unr, &t(2, 1)), Err(Error::UseUnramified { .. })));
    assert!(matches!(eval_orbital_cases(&unr, &t(2, 1)), Err(Error::UseUnramified { .. })));
    assert!(matches!(eval_orbital_unramified(&ram, &t(2, 1)), Err(Error::UseRamified { .. })));
}

#[test]
fn support_hit_false_means_zero() {
    for (p, n) in [(3u64, 1u32), (5, 1), (2, 2)] {
        for m in 0..=2 {
            let pl = place(p, n, m, Turn::new(1, 4));
            for tt in derived_grid(p, n, 80) {
                let b = eval_orbital_bruteforce(&pl, &tt).unwrap();
                assert!(b.support_hit || b.value.is_formal_zero());
            }
        }
    }
}

#[test]
fn case_bounds_hold_with_small_constant() {
    // sanity only: |𝓔| ≤ C·(case bound) with one C ≤ 4 across the scan
    let mut worst: f64 = 0.0;
    for (p, n) in [(3u64, 1u32), (3, 2), (5, 1), (7, 1), (2, 2)] {
        for m in 0..=3 {
            let pl = place(p, n, m, Turn::new(1, 3));
            for tt in derived_grid(p, n, 100) {
                let v = eval_orbital_cases(&pl, &tt).unwrap().value.abs();
                let b = pl.case_bound(&tt);
                if v > 1e-12 {
                    assert!(b > 0.0, "p={p} n={n} m={m} t={tt}: nonzero outside every case");
                    worst = worst.max(v / b);
                }
            }
        }
    }
    assert!(worst <= 4.0, "fitted constant {worst}");
}
