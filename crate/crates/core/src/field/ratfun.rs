use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::{Rational, UniPoly};
use crate::Error;

/// Element of Q(t) in canonical form: coprime numerator and monic
/// denominator. Zero is `0/1`, so structural equality is field equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RatFun {
    num: UniPoly,
    den: UniPoly,
}

impl RatFun {
    /// Builds `num/den` and canonicalizes. Fails when `den` is zero.
    pub fn new(num: UniPoly, den: UniPoly) -> Result<Self, Error> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::reduce(num, den))
    }

    fn reduce(num: UniPoly, den: UniPoly) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        if den.is_constant() {
            let c = den.lc().recip();
            return RatFun { num: num.scale(&c), den: UniPoly::one() };
        }
        let g = num.gcd(&den);
        let (num, den) = if g.is_one() { (num, den) } else { (num.exact_div(&g), den.exact_div(&g)) };
        let c = den.lc().recip();
        RatFun { num: num.scale(&c), den: den.scale(&c) }
    }

    pub fn zero() -> Self {
        RatFun { num: UniPoly::zero(), den: UniPoly::one() }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        RatFun { num: UniPoly::constant(c), den: UniPoly::one() }
    }

    pub fn t() -> Self {
        Self::poly(UniPoly::t())
    }

    pub fn poly(p: UniPoly) -> Self {
        RatFun { num: p, den: UniPoly::one() }
    }

    pub fn num(&self) -> &UniPoly {
        &self.num
    }

    pub fn den(&self) -> &UniPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.den.is_one() && self.num.is_constant()
    }

    /// The value if this is a constant function.
    pub fn as_constant(&self) -> Option<Rational> {
        self.is_constant().then(|| self.num.coeff(0))
    }

    pub fn inv(&self) -> Result<Self, Error> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::reduce(self.den.clone(), self.num.clone()))
    }

    pub fn checked_div(&self, rhs: &RatFun) -> Result<RatFun, Error> {
        Ok(self * &rhs.inv()?)
    }

    pub fn scale(&self, c: &Rational) -> RatFun {
        if c.is_zero() {
            return Self::zero();
        }
        RatFun { num: self.num.scale(c), den: self.den.clone() }
    }

    /// d/dt by the quotient rule.
    pub fn derivative(&self) -> RatFun {
        if self.den.is_one() {
            return Self::poly(self.num.derivative());
        }
        // With g = gcd(d, d'), d = g h, d' = g k: (n/d)' = (n' h - n k) / (d h),
        // already in lowest terms since h carries every prime factor of d.
        let dd = self.den.derivative();
        let g = self.den.gcd(&dd);
        let h = self.den.exact_div(&g);
        let k = dd.exact_div(&g);
        let num = &(&self.num.derivative() * &h) - &(&self.num * &k);
        if num.is_zero() {
            return Self::zero();
        }
        RatFun { num, den: &self.den * &h }
    }

    pub fn pow(&self, k: i64) -> Result<RatFun, Error> {
        let base = if k < 0 { self.inv()? } else { self.clone() };
        let e = k.unsigned_abs() as u32;
        Ok(RatFun { num: base.num.pow(e), den: base.den.pow(e) })
    }

    /// Exact value at `x`; fails at a pole.
    pub fn eval(&self, x: &Rational) -> Result<Rational, Error> {
        let d = self.den.eval(x);
        if d.is_zero() {
            return Err(Error::Pole(x.clone()));
        }
        Ok(self.num.eval(x) / d)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.num.eval_f64(x) / self.den.eval_f64(x)
    }

    /// Sum of many terms: numerators over a shared denominator are added
    /// first, then everything is brought over one lcm and reduced once.
    pub fn sum(terms: impl IntoIterator<Item = RatFun>) -> RatFun {
        let mut groups: Vec<(UniPoly, UniPoly)> = Vec::new();
        for t in terms {
            if t.is_zero() {
                continue;
            }
            match groups.iter_mut().find(|(d, _)| *d == t.den) {
                Some((_, n)) => *n = &*n + &t.num,
                None => groups.push((t.den, t.num)),
            }
        }
        match groups.len() {
            0 => return Self::zero(),
            1 => {
                let (d, n) = groups.pop().unwrap();
                return if d.is_one() { RatFun { num: n, den: d } } else { Self::reduce(n, d) };
            }
            _ => {}
        }
        let mut lcm = UniPoly::one();
        for (d, _) in &groups {
            let g = lcm.gcd(d);
            lcm = &lcm * &d.exact_div(&g);
        }
        let mut num = UniPoly::zero();
        for (d, n) in &groups {
            num = &num + &(n * &lcm.exact_div(d));
        }
        Self::reduce(num, lcm)
    }

    /// Degree of the numerator minus degree of the denominator (`None` for zero).
    pub fn valuation_at_infinity(&self) -> Option<i64> {
        Some(self.num.degree().finite()? as i64 - self.den.degree().finite()? as i64)
    }
}

impl From<Rational> for RatFun {
    fn from(c: Rational) -> Self {
        RatFun::constant(c)
    }
}

impl From<UniPoly> for RatFun {
    fn from(p: UniPoly) -> Self {
        RatFun::poly(p)
    }
}

impl fmt::Display for RatFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::ratfun_string(self))
    }
}

impl Add for &RatFun {
    type Output = RatFun;
    fn add(self, rhs: &RatFun) -> RatFun {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        if self.den == rhs.den {
            return RatFun::reduce(&self.num + &rhs.num, self.den.clone());
        }
        if self.den.is_one() {
            return RatFun { num: &(&self.num * &rhs.den) + &rhs.num, den: rhs.den.clone() };
        }
        if rhs.den.is_one() {
            return RatFun { num: &self.num + &(&rhs.num * &self.den), den: self.den.clone() };
        }
        // Henrici: with g = gcd(b, d), a/b + c/d = (a d' + c b') / (b' d' g) and
        // only factors of g can cancel.
        let g = self.den.gcd(&rhs.den);
        if g.is_one() {
            let num = &(&self.num * &rhs.den) + &(&rhs.num * &self.den);
            if num.is_zero() {
                return RatFun::zero();
            }
            return RatFun { num, den: &self.den * &rhs.den };
        }
        let a = self.den.exact_div(&g);
        let b = rhs.den.exact_div(&g);
        let num = &(&self.num * &b) + &(&rhs.num * &a);
        if num.is_zero() {
            return RatFun::zero();
        }
        let h = num.gcd(&g);
        let (num, g) = if h.is_one() { (num, g) } else { (num.exact_div(&h), g.exact_div(&h)) };
        RatFun { num, den: &(&a * &b) * &g }
    }
}

impl Sub for &RatFun {
    type Output = RatFun;
    fn sub(self, rhs: &RatFun) -> RatFun {
        self + &(-rhs)
    }
}

impl Neg for &RatFun {
    type Output = RatFun;
    fn neg(self) -> RatFun {
        RatFun { num: -&self.num, den: self.den.clone() }
    }
}

impl Mul for &RatFun {
    type Output = RatFun;
    fn mul(self, rhs: &RatFun) -> RatFun {
        if self.is_zero() || rhs.is_zero() {
            return RatFun::zero();
        }
        if self.den.is_one() && rhs.den.is_one() {
            return RatFun { num: &self.num * &rhs.num, den: UniPoly::one() };
        }
        // cross-cancel before multiplying
        let g1 = self.num.gcd(&rhs.den);
        let g2 = rhs.num.gcd(&self.den);
        let n1 = self.num.exact_div(&g1);
        let d2 = rhs.den.exact_div(&g1);
        let n2 = rhs.num.exact_div(&g2);
        let d1 = self.den.exact_div(&g2);
        let num = &n1 * &n2;
        let den = &d1 * &d2;
        let c = den.lc().recip();
        RatFun { num: num.scale(&c), den: den.scale(&c) }
    }
}

/// Panics on division by zero; use [`RatFun::checked_div`] for a `Result`.
impl Div for &RatFun {
    type Output = RatFun;
    fn div(self, rhs: &RatFun) -> RatFun {
        self.checked_div(rhs).expect("division by the zero function")
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for RatFun {
            type Output = RatFun;
            fn $m(self, rhs: RatFun) -> RatFun {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for RatFun {
    type Output = RatFun;
    fn neg(self) -> RatFun {
        -&self
    }
}

impl Zero for RatFun {
    fn zero() -> Self {
        RatFun::zero()
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

impl One for RatFun {
    fn one() -> Self {
        RatFun::one()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::int;

    fn rf(n: &[i64], d: &[i64]) -> RatFun {
        RatFun::new(UniPoly::from_ints(n), UniPoly::from_ints(d)).unwrap()
    }

    #[test]
    fn like_terms() {
        let inv_t = rf(&[1], &[0, 1]);
        assert_eq!(&inv_t + &inv_t, rf(&[2], &[0, 1]));
    }

    #[test]
    fn inverse_gives_one() {
        assert!((&RatFun::t() * &rf(&[1], &[0, 1])).is_one());
    }

    #[test]
    fn difference_reduces() {
        // cross-multiply oracle: ((t^2+1) - 2t) / (t-1) = (t-1)^2/(t-1)
        let a = rf(&[1, 0, 1], &[-1, 1]);
        let b = rf(&[0, 2], &[-1, 1]);
        let unreduced_num = &UniPoly::from_ints(&[1, 0, 1]) - &UniPoly::from_ints(&[0, 2]);
        assert_eq!(unreduced_num, &UniPoly::from_ints(&[-1, 1]) * &UniPoly::from_ints(&[-1, 1]));
        assert_eq!(&a - &b, rf(&[-1, 1], &[1]));
    }

    #[test]
    fn derivative_examples() {
        let t4 = rf(&[0, 0, 0, 0, 1], &[1]);
        assert_eq!(t4.derivative(), rf(&[0, 0, 0, 4], &[1]));
        assert!(RatFun::constant(int(7)).derivative().is_zero());
        // quotient rule on the unreduced form: ((2t)(t-1) - (t^2+1)) / (t-1)^2
        let f = rf(&[1, 0, 1], &[-1, 1]);
        assert_eq!(f.derivative(), rf(&[-1, -2, 1], &[1, -2, 1]));
    }

    #[test]
    fn canonical_denominator_is_monic() {
        let f = rf(&[2], &[0, 4]);
        assert!(f.den().is_monic());
        assert_eq!(f, rf(&[1], &[0, 2]));
        assert_eq!(rf(&[0], &[3, 1]), RatFun::zero());
        assert!(RatFun::new(UniPoly::one(), UniPoly::zero()).is_err());
        assert!(RatFun::zero().inv().is_err());
    }
}
