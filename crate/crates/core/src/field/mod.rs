//! Exact coefficient arithmetic: rationals, univariate polynomials over the
//! rationals, the rational function field Q(t), and real-root isolation.

mod modgcd;
mod poly;
mod ratfun;
mod roots;

pub use poly::{Degree, UniPoly};
pub use ratfun::RatFun;
pub use roots::{
    isolate_real_roots, pole_zero_set, roots_in_open, refine_root, sturm_count, sturm_sequence, RootInterval,
    SingularKind, SingularPoint, SingularSet,
};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational, always stored in lowest terms with a
/// positive denominator.
pub type Rational = num_rational::BigRational;

/// Builds `num/den` as a reduced rational. Panics if `den == 0`.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Best-effort conversion for numeric sampling.
pub fn to_f64(q: &Rational) -> f64 {
    if let Some(v) = q.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // Very large numerators/denominators: scale both down by the same power of two.
    let n_bits = q.numer().bits() as i64;
    let d_bits = q.denom().bits() as i64;
    let shift_n = (n_bits - 900).max(0) as usize;
    let shift_d = (d_bits - 900).max(0) as usize;
    let n = (q.numer() >> shift_n).to_f64().unwrap_or(0.0);
    let d = (q.denom() >> shift_d).to_f64().unwrap_or(1.0);
    (n / d) * 2f64.powi((shift_n as i64 - shift_d as i64) as i32)
}

/// Exact conversion of a finite float into a rational.
pub fn from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

/// `2^-k` as an exact rational.
pub fn pow2_inv(k: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << k as usize)
}


pub(crate) fn factorial(k: u32) -> Rational {
    let mut acc = BigInt::one();
    for i in 2..=k {
        acc *= BigInt::from(i);
    }
    Rational::from_integer(acc)
}

pub(crate) fn sign_of(q: &Rational) -> i32 {
    if q.is_zero() {
        0
    } else if q.is_positive() {
        1
    } else {
        -1
    }
}

/// Exact `q^(p/r)` when the result is rational, e.g. `(9/4)^(1/2) = 3/2`.
pub(crate) fn rational_root_power(base: &Rational, exp: &Rational) -> Option<Rational> {
    if base.is_zero() {
        return if exp.is_positive() { Some(Rational::zero()) } else { None };
    }
    if base.is_negative() && !exp.denom().is_one() {
        return None;
    }
    let n = exp.denom().to_u32()?;
    let p = exp.numer().to_i32()?;
    let root = |x: &BigInt| -> Option<BigInt> {
        let r = x.nth_root(n);
        if r.pow(n) == *x {
            Some(r)
        } else {
            None
        }
    };
    let (num, den) = if base.is_negative() {
        // n == 1 here
        (base.numer().clone(), base.denom().clone())
    } else {
        (root(base.numer())?, root(base.denom())?)
    };
    let r = Rational::new(num, den);
    if p >= 0 {
        Some(num_traits::pow(r, p as usize))
    } else {
        Some(num_traits::pow(r.recip(), (-p) as usize))
    }
}
