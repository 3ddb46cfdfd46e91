//! The skew polynomial ring Q(t)[D] with the commutation rule `D*f = f*D + f'`.
//!
//! Elements are kept in left-coefficient normal form `sum a_i(t) D^i`.
//! Q(t)[D] is a left and right Euclidean domain under the D-degree; units are
//! exactly the nonzero elements of degree zero.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::Zero;

use crate::field::{Degree, RatFun, Rational};
use crate::trajectory::Expr;
use crate::Error;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct OrePoly {
    coeffs: Vec<RatFun>,
}

impl OrePoly {
    pub fn new(mut coeffs: Vec<RatFun>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        OrePoly { coeffs }
    }

    pub fn zero() -> Self {
        OrePoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(RatFun::one())
    }

    /// The indeterminate `D`.
    pub fn d() -> Self {
        Self::monomial(RatFun::one(), 1)
    }

    pub fn constant(c: RatFun) -> Self {
        Self::new(vec![c])
    }

    pub fn rational(c: Rational) -> Self {
        Self::constant(RatFun::constant(c))
    }

    pub fn monomial(c: RatFun, k: usize) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![RatFun::zero(); k + 1];
        coeffs[k] = c;
        OrePoly { coeffs }
    }

    pub fn coeffs(&self) -> &[RatFun] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> RatFun {
        self.coeffs.get(i).cloned().unwrap_or_else(RatFun::zero)
    }

    pub fn degree(&self) -> Degree {
        if self.coeffs.is_empty() {
            Degree::NegInf
        } else {
            Degree::Finite(self.coeffs.len() - 1)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    /// Nonzero and of degree zero.
    pub fn is_unit(&self) -> bool {
        self.coeffs.len() == 1
    }

    pub fn lc(&self) -> RatFun {
        self.coeffs.last().cloned().unwrap_or_else(RatFun::zero)
    }

    /// `c * self`, with `c` a coefficient multiplied in from the left.
    pub fn left_scale(&self, c: &RatFun) -> OrePoly {
        if c.is_zero() {
            return Self::zero();
        }
        OrePoly { coeffs: self.coeffs.iter().map(|a| c * a).collect() }
    }

    /// Left-normalized so the leading coefficient is 1.
    pub fn monic(&self) -> OrePoly {
        if self.is_zero() || self.lc().is_one() {
            return self.clone();
        }
        self.left_scale(&self.lc().inv().expect("nonzero leading coefficient"))
    }

    /// All coefficient functions, for collecting poles.
    pub fn coefficient_functions(&self) -> impl Iterator<Item = &RatFun> {
        self.coeffs.iter()
    }

    /// `a = q*b + r` with `deg r < deg b`.
    pub fn right_divrem(&self, b: &OrePoly) -> Result<(OrePoly, OrePoly), Error> {
        if b.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let db = b.coeffs.len() - 1;
        let lb_inv = b.lc().inv()?;
        let mut q = vec![RatFun::zero(); self.coeffs.len().saturating_sub(db)];
        let mut r = self.clone();
        while r.coeffs.len() > db {
            let k = r.coeffs.len() - 1 - db;
            let c = &r.lc() * &lb_inv;
            let term = OrePoly::monomial(c.clone(), k);
            let sub = &term * b;
            r = &r - &sub;
            q[k] = &q[k] + &c;
        }
        Ok((OrePoly::new(q), r))
    }

    /// `a = b*q + r` with `deg r < deg b`.
    pub fn left_divrem(&self, b: &OrePoly) -> Result<(OrePoly, OrePoly), Error> {
        if b.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let db = b.coeffs.len() - 1;
        let lb_inv = b.lc().inv()?;
        let mut q = vec![RatFun::zero(); self.coeffs.len().saturating_sub(db)];
        let mut r = self.clone();
        while r.coeffs.len() > db {
            let k = r.coeffs.len() - 1 - db;
            let c = &lb_inv * &r.lc();
            let term = OrePoly::monomial(c.clone(), k);
            let sub = b * &term;
            r = &r - &sub;
            q[k] = &q[k] + &c;
        }
        Ok((OrePoly::new(q), r))
    }

    /// Extended Euclid for the greatest common right divisor:
    /// `g = u*a + v*b` with `g` monic and right-dividing both inputs.
    pub fn gcrd_extended(a: &OrePoly, b: &OrePoly) -> Result<(OrePoly, OrePoly, OrePoly), Error> {
        let (g, u, v, _, _) = Self::right_euclid(a, b)?;
        Ok((g, u, v))
    }

    /// Runs the right remainder sequence to completion. Returns the monic gcrd
    /// with its Bezout pair and the final cofactor pair `(s, t)` with
    /// `s*a + t*b = 0`.
    fn right_euclid(
        a: &OrePoly,
        b: &OrePoly,
    ) -> Result<(OrePoly, OrePoly, OrePoly, OrePoly, OrePoly), Error> {
        if a.is_zero() && b.is_zero() {
            return Err(Error::BothZero);
        }
        let (mut r0, mut r1) = (a.clone(), b.clone());
        let (mut u0, mut u1) = (OrePoly::one(), OrePoly::zero());
        let (mut v0, mut v1) = (OrePoly::zero(), OrePoly::one());
        while !r1.is_zero() {
            let (q, r) = r0.right_divrem(&r1)?;
            let u = &u0 - &(&q * &u1);
            let v = &v0 - &(&q * &v1);
            r0 = std::mem::replace(&mut r1, r);
            u0 = std::mem::replace(&mut u1, u);
            v0 = std::mem::replace(&mut v1, v);
        }
        let inv = r0.lc().inv()?;
        Ok((r0.left_scale(&inv), u0.left_scale(&inv), v0.left_scale(&inv), u1, v1))
    }

    /// Least common left multiple, monic: `m = s*a = t*b` of minimal degree.
    pub fn lclm(a: &OrePoly, b: &OrePoly) -> Result<OrePoly, Error> {
        if a.is_zero() || b.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let (_, _, _, s, _) = Self::right_euclid(a, b)?;
        Ok((&s * a).monic())
    }

    /// Applies the operator to an expression: `sum a_i(t) * d^i e / dt^i`.
    pub fn apply(&self, e: &Expr) -> Expr {
        let mut terms = Vec::with_capacity(self.coeffs.len());
        let mut deriv = e.clone();
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                deriv = deriv.diff();
            }
            if c.is_zero() {
                continue;
            }
            terms.push(Expr::mul(vec![Expr::rat(c.clone()), deriv.clone()]));
        }
        Expr::add(terms)
    }

    pub fn map_coeffs(&self, f: impl Fn(&RatFun) -> RatFun) -> OrePoly {
        OrePoly::new(self.coeffs.iter().map(f).collect())
    }
}

fn binomial(n: usize, k: usize) -> Rational {
    let mut acc = BigInt::from(1);
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    Rational::from_integer(acc)
}

impl OrePoly {
    /// `sum a_k * b_k` with all coefficient additions batched.
    pub fn sum_of_products<'a>(pairs: impl IntoIterator<Item = (&'a OrePoly, &'a OrePoly)>) -> OrePoly {
        let mut terms: Vec<Vec<RatFun>> = Vec::new();
        for (a, b) in pairs {
            push_product_terms(a, b, &mut terms);
        }
        OrePoly::new(terms.into_iter().map(RatFun::sum).collect())
    }
}

impl OrePoly {
    /// Formal adjoint: `f* = f`, `D* = -D`, `(ab)* = b* a*`.
    pub fn adjoint(&self) -> OrePoly {
        // (a_i D^i)* = (-D)^i a_i = (-1)^i sum_l C(i,l) a_i^(l) D^(i-l)
        let mut terms: Vec<Vec<RatFun>> = vec![Vec::new(); self.coeffs.len()];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let mut der = a.clone();
            for l in 0..=i {
                if l > 0 {
                    der = der.derivative();
                }
                let mut c = binomial(i, l);
                if i % 2 == 1 {
                    c = -c;
                }
                terms[i - l].push(der.scale(&c));
            }
        }
        OrePoly::new(terms.into_iter().map(RatFun::sum).collect())
    }

    /// True when every coefficient is a polynomial in `t`.
    pub fn has_polynomial_coeffs(&self) -> bool {
        self.coeffs.iter().all(RatFun::is_polynomial)
    }
}

/// Pushes the coefficient terms of `a * b`, bucketed by power of `D`.
fn push_product_terms(a: &OrePoly, b: &OrePoly, out: &mut Vec<Vec<RatFun>>) {
    if a.is_zero() || b.is_zero() {
        return;
    }
    let da = a.coeffs.len() - 1;
    let db = b.coeffs.len() - 1;
    if out.len() < da + db + 1 {
        out.resize_with(da + db + 1, Vec::new);
    }
    // derivs[j][k] = k-th derivative of b's coefficient j
    let derivs: Vec<Vec<RatFun>> = b
        .coeffs
        .iter()
        .map(|c| {
            let mut v = Vec::with_capacity(da + 1);
            let mut cur = c.clone();
            for k in 0..=da {
                if k > 0 {
                    cur = cur.derivative();
                }
                v.push(cur.clone());
            }
            v
        })
        .collect();
    for (i, ai) in a.coeffs.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        // a_i D^i b_j D^j = a_i sum_k C(i,k) b_j^(k) D^(i-k+j)
        for k in 0..=i {
            let binom = binomial(i, k);
            for (j, dj) in derivs.iter().enumerate() {
                let bjk = &dj[k];
                if bjk.is_zero() {
                    continue;
                }
                out[i - k + j].push((ai * bjk).scale(&binom));
            }
        }
    }
}

impl Mul for &OrePoly {
    type Output = OrePoly;
    fn mul(self, rhs: &OrePoly) -> OrePoly {
        OrePoly::sum_of_products([(self, rhs)])
    }
}

impl Add for &OrePoly {
    type Output = OrePoly;
    fn add(self, rhs: &OrePoly) -> OrePoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        OrePoly::new((0..n).map(|i| &self.coeff(i) + &rhs.coeff(i)).collect())
    }
}

impl Sub for &OrePoly {
    type Output = OrePoly;
    fn sub(self, rhs: &OrePoly) -> OrePoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        OrePoly::new((0..n).map(|i| &self.coeff(i) - &rhs.coeff(i)).collect())
    }
}

impl Neg for &OrePoly {
    type Output = OrePoly;
    fn neg(self) -> OrePoly {
        OrePoly { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl Neg for OrePoly {
    type Output = OrePoly;
    fn neg(self) -> OrePoly {
        -&self
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for OrePoly {
            type Output = OrePoly;
            fn $m(self, rhs: OrePoly) -> OrePoly {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl From<RatFun> for OrePoly {
    fn from(c: RatFun) -> Self {
        OrePoly::constant(c)
    }
}

impl Zero for OrePoly {
    fn zero() -> Self {
        OrePoly::zero()
    }
    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
}

/// Prints in left-normal form with explicit `*` and `^`, e.g.
/// `t^4*D^2 + 4*t^3*D + t^2`. The output reparses with the operator grammar.
impl fmt::Display for OrePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let (neg, body) = crate::syntax::ratfun_term(c);
            let dpart = match i {
                0 => String::new(),
                1 => "D".to_string(),
                _ => format!("D^{i}"),
            };
            let text = if i == 0 {
                body
            } else if body == "1" {
                dpart
            } else {
                format!("{body}*{dpart}")
            };
            if first {
                if neg {
                    write!(f, "-")?;
                }
                write!(f, "{text}")?;
            } else {
                write!(f, " {} {text}", if neg { '-' } else { '+' })?;
            }
            first = false;
        }
        Ok(())
    }
}
