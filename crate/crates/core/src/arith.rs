//! Small-integer number theory used by the character and lattice code.

use num_integer::Integer;

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut r = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: i128, m: u64) -> Option<u64> {
    let m = m as i128;
    let a = a.rem_euclid(m);
    let g = a.extended_gcd(&m);
    if g.gcd != 1 {
        return None;
    }
    Some(g.x.rem_euclid(m) as u64)
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Prime factorization by trial division, primes ascending.
pub fn factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn checked_pow(p: u64, e: u32) -> Option<u64> {
    p.checked_pow(e)
}

/// φ(p^n).
pub fn phi_pp(p: u64, n: u32) -> u64 {
    if n == 0 {
        1
    } else {
        (p - 1) * p.pow(n - 1)
    }
}

/// Smallest generator of (Z/p)^× for an odd prime p (or 1 for p = 2).
pub fn primitive_root(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let fs: Vec<u64> = factor(p - 1).into_iter().map(|(q, _)| q).collect();
    (2..p)
        .find(|&g| fs.iter().all(|&q| pow_mod(g, (p - 1) / q, p) != 1))
        .expect("every prime has a primitive root")
}

/// Smallest generator of (Z/p^n)^× for odd p; a primitive root mod p that
/// stays primitive mod p².
pub fn primitive_root_pp(p: u64, n: u32) -> u64 {
    let g = primitive_root(p);
    if n <= 1 {
        return g;
    }
    if pow_mod(g, p - 1, p * p) != 1 {
        g
    } else {
        g + p
    }
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a.lcm(&b)
}

pub fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}
