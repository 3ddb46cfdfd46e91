//! Modular gcd of integer polynomials (small primes + Chinese remaindering).
//!
//! The common case in Q(t) arithmetic is a trivial gcd, which a single good
//! prime certifies. Otherwise images are combined until the candidate
//! stabilizes and divides both inputs.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, p);
        }
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    r
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let (mut d, mut s) = (n - 1, 0);
    while d % 2 == 0 {
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

/// Primes below 2^61, descending.
fn primes() -> impl Iterator<Item = u64> {
    let mut n = (1u64 << 61) - 1;
    std::iter::from_fn(move || {
        while !is_prime(n) {
            n -= 2;
        }
        let p = n;
        n -= 2;
        Some(p)
    })
}

fn reduce(a: &[BigInt], p: u64) -> Vec<u64> {
    let pb = BigInt::from(p);
    let mut v: Vec<u64> = a.iter().map(|c| c.mod_floor(&pb).to_u64().expect("reduced")).collect();
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

/// Monic gcd over Z/p.
fn gcd_mod(mut a: Vec<u64>, mut b: Vec<u64>, p: u64) -> Vec<u64> {
    while !b.is_empty() {
        // a <- a mod b
        let lb_inv = pow_mod(*b.last().unwrap(), p - 2, p);
        while a.len() >= b.len() {
            let c = mul_mod(*a.last().unwrap(), lb_inv, p);
            let shift = a.len() - b.len();
            for (j, bc) in b.iter().enumerate() {
                let s = mul_mod(c, *bc, p);
                a[shift + j] = (a[shift + j] + p - s) % p;
            }
            while a.last() == Some(&0) {
                a.pop();
            }
            if a.is_empty() {
                break;
            }
        }
        std::mem::swap(&mut a, &mut b);
    }
    let inv = pow_mod(*a.last().unwrap(), p - 2, p);
    a.iter().map(|&c| mul_mod(c, inv, p)).collect()
}

fn symmetric(x: BigInt, m: &BigInt) -> BigInt {
    let x = x.mod_floor(m);
    if &x * 2 > *m {
        x - m
    } else {
        x
    }
}

/// Primitive gcd with positive leading coefficient, or `None` if the search
/// gives up (the caller then falls back to a remainder sequence).
pub(super) fn int_poly_gcd(a: &[BigInt], b: &[BigInt], divides: impl Fn(&[BigInt]) -> bool) -> Option<Vec<BigInt>> {
    let la = a.last()?;
    let lb = b.last()?;
    let gamma = la.gcd(lb);
    let mut best_deg = usize::MAX;
    let mut modulus = BigInt::one();
    let mut acc: Vec<BigInt> = Vec::new();
    for p in primes().take(400) {
        let pb = BigInt::from(p);
        if (la % &pb).is_zero() || (lb % &pb).is_zero() {
            continue;
        }
        let g = gcd_mod(reduce(a, p), reduce(b, p), p);
        let d = g.len() - 1;
        if d == 0 {
            return Some(vec![BigInt::one()]);
        }
        if d > best_deg {
            continue;
        }
        let gm = gamma.mod_floor(&pb).to_u64().expect("reduced");
        let g: Vec<u64> = g.iter().map(|&c| mul_mod(c, gm, p)).collect();
        if d < best_deg {
            best_deg = d;
            modulus = pb;
            acc = g.iter().map(|&c| symmetric(BigInt::from(c), &modulus)).collect();
            continue;
        }
        // CRT: x = acc + M * ((g - acc) * M^-1 mod p)
        let minv = pow_mod(modulus.mod_floor(&pb).to_u64().expect("reduced"), p - 2, p);
        let new_mod = &modulus * &pb;
        let mut changed = false;
        let mut next = Vec::with_capacity(acc.len());
        for (x, &gc) in acc.iter().zip(&g) {
            let xm = x.mod_floor(&pb).to_u64().expect("reduced");
            let k = mul_mod((gc + p - xm) % p, minv, p);
            let y = symmetric(x + &modulus * BigInt::from(k), &new_mod);
            changed |= &y != x;
            next.push(y);
        }
        acc = next;
        modulus = new_mod;
        if !changed {
            let cand = primitive(&acc);
            if divides(&cand) {
                return Some(cand);
            }
        }
    }
    None
}

fn primitive(v: &[BigInt]) -> Vec<BigInt> {
    let mut g = BigInt::zero();
    for c in v {
        g = g.gcd(c);
    }
    if v.last().is_some_and(|c| c.is_negative()) {
        g = -g;
    }
    v.iter().map(|c| c / &g).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bi(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&c| BigInt::from(c)).collect()
    }

    #[test]
    fn primes_are_prime() {
        let ps: Vec<u64> = primes().take(3).collect();
        assert_eq!(ps[0], (1u64 << 61) - 1);
        assert!(ps.iter().all(|&p| is_prime(p)));
        assert!(!is_prime(561));
    }

    #[test]
    fn coprime_and_common_factor() {
        let none = |_: &[BigInt]| true;
        assert_eq!(int_poly_gcd(&bi(&[1, 0, 1]), &bi(&[-1, 1]), none), Some(bi(&[1])));
        // (2t + 3)(t - 5) and (2t + 3)(7t + 1)
        let g = int_poly_gcd(&bi(&[-15, -7, 2]), &bi(&[3, 23, 14]), none).unwrap();
        assert_eq!(g, bi(&[3, 2]));
    }
}
