use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{to_f64, Rational};

/// Degree of a polynomial; the zero polynomial has degree `NegInf`, which
/// orders below every finite degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Degree {
    NegInf,
    Finite(usize),
}

impl Degree {
    pub fn finite(self) -> Option<usize> {
        match self {
            Degree::NegInf => None,
            Degree::Finite(d) => Some(d),
        }
    }

    /// Degree as a signed integer with `NegInf` mapped to `-1`.
    pub fn as_i64(self) -> i64 {
        match self {
            Degree::NegInf => -1,
            Degree::Finite(d) => d as i64,
        }
    }
}

impl Add for Degree {
    type Output = Degree;
    fn add(self, rhs: Degree) -> Degree {
        match (self, rhs) {
            (Degree::Finite(a), Degree::Finite(b)) => Degree::Finite(a + b),
            _ => Degree::NegInf,
        }
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degree::NegInf => write!(f, "-inf"),
            Degree::Finite(d) => write!(f, "{d}"),
        }
    }
}

/// Univariate polynomial over the rationals, stored as `content * prim` with
/// `prim` a primitive integer polynomial (positive leading coefficient).
/// Products of primitive polynomials are primitive, so multiplication,
/// scaling and exact division need no coefficient normalization.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct UniPoly {
    content: Rational,
    prim: Vec<BigInt>,
}

impl UniPoly {
    pub fn new(coeffs: Vec<Rational>) -> Self {
        let mut den = BigInt::one();
        for c in &coeffs {
            if !c.denom().is_one() {
                den = den.lcm(c.denom());
            }
        }
        let ints = coeffs
            .iter()
            .map(|c| if den.is_one() { c.numer().clone() } else { c.numer() * (&den / c.denom()) })
            .collect();
        Self::from_ints_scaled(ints, Rational::new(BigInt::one(), den))
    }

    /// `c * sum v[i] t^i`, normalized.
    fn from_ints_scaled(mut v: Vec<BigInt>, c: Rational) -> Self {
        while v.last().is_some_and(|x| x.is_zero()) {
            v.pop();
        }
        if v.is_empty() || c.is_zero() {
            return Self::zero();
        }
        let mut g = BigInt::zero();
        for x in &v {
            g = g.gcd(x);
            if g.is_one() {
                break;
            }
        }
        if v.last().unwrap().is_negative() {
            g = -g;
        }
        if !g.is_one() {
            for x in v.iter_mut() {
                *x = &*x / &g;
            }
        }
        UniPoly { content: c * Rational::from_integer(g), prim: v }
    }

    /// Wraps an integer polynomial already known to be primitive with
    /// positive leading coefficient.
    fn from_prim(prim: Vec<BigInt>, content: Rational) -> Self {
        debug_assert!(prim.last().is_some_and(|x| x.is_positive()));
        if content.is_zero() {
            return Self::zero();
        }
        UniPoly { content, prim }
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::from_ints_scaled(coeffs.iter().map(|&c| BigInt::from(c)).collect(), Rational::one())
    }

    pub fn zero() -> Self {
        UniPoly { content: Rational::zero(), prim: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::monomial(c, 0)
    }

    /// The polynomial `t`.
    pub fn t() -> Self {
        Self::monomial(Rational::one(), 1)
    }

    pub fn monomial(c: Rational, k: usize) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        let mut prim = vec![BigInt::zero(); k + 1];
        prim[k] = BigInt::one();
        UniPoly { content: c, prim }
    }

    /// `t - root`
    pub fn linear_root(root: &Rational) -> Self {
        Self::new(vec![-root.clone(), Rational::one()])
    }

    pub fn coeffs(&self) -> Vec<Rational> {
        self.prim.iter().map(|x| &self.content * x).collect()
    }

    pub fn coeff(&self, i: usize) -> Rational {
        self.prim.get(i).map(|x| &self.content * x).unwrap_or_else(Rational::zero)
    }

    /// Rational content and primitive part (positive leading coefficient).
    pub fn content_and_primitive(&self) -> (&Rational, &[BigInt]) {
        (&self.content, &self.prim)
    }

    pub fn degree(&self) -> Degree {
        if self.prim.is_empty() {
            Degree::NegInf
        } else {
            Degree::Finite(self.prim.len() - 1)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.prim.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.prim.len() <= 1
    }

    pub fn is_one(&self) -> bool {
        self.prim.len() == 1 && self.content.is_one()
    }

    /// Leading coefficient; zero for the zero polynomial.
    pub fn lc(&self) -> Rational {
        self.prim.last().map(|x| &self.content * x).unwrap_or_else(Rational::zero)
    }

    pub fn is_monic(&self) -> bool {
        self.prim.last().is_some_and(|x| (&self.content * x).is_one())
    }

    pub fn monic(&self) -> Self {
        match self.prim.last() {
            None => Self::zero(),
            Some(l) => UniPoly { content: Rational::new(BigInt::one(), l.clone()), prim: self.prim.clone() },
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        UniPoly { content: &self.content * c, prim: self.prim.clone() }
    }

    pub fn derivative(&self) -> Self {
        let ints = self.prim.iter().enumerate().skip(1).map(|(i, c)| c * BigInt::from(i)).collect();
        Self::from_ints_scaled(ints, self.content.clone())
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        // Homogenized Horner over the integers: sum prim[i] p^i q^(n-i).
        let (p, q) = (x.numer(), x.denom());
        let mut acc = BigInt::zero();
        let mut qpow = BigInt::one();
        for c in self.prim.iter().rev() {
            acc = acc * p + c * &qpow;
            qpow *= q;
        }
        if self.prim.is_empty() {
            return Rational::zero();
        }
        // qpow overshoots by one factor of q
        &self.content * Rational::new(acc * q, qpow)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs().iter().rev().fold(0.0, |acc, c| acc * x + to_f64(c))
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Euclidean division `self = q * divisor + r`, `deg r < deg divisor`.
    pub fn div_rem(&self, divisor: &UniPoly) -> (UniPoly, UniPoly) {
        assert!(!divisor.is_zero(), "polynomial division by zero");
        let dd = divisor.prim.len() - 1;
        if self.prim.len() <= dd {
            return (Self::zero(), self.clone());
        }
        if let Some(q) = int_exact_div(&self.prim, &divisor.prim) {
            return (Self::from_prim(q, &self.content / &divisor.content), Self::zero());
        }
        // Pseudo-division over the integers: L^k A = Q B + R.
        let b = &divisor.prim;
        let lb = b[dd].clone();
        let steps = self.prim.len() - dd;
        let mut r = self.prim.clone();
        let mut q = vec![BigInt::zero(); steps];
        let unit = lb.is_one();
        for k in (0..steps).rev() {
            let lr = r[k + dd].clone();
            if !unit {
                for c in q.iter_mut().chain(r.iter_mut()) {
                    *c *= &lb;
                }
            }
            if !lr.is_zero() {
                for (j, bc) in b.iter().enumerate() {
                    r[k + j] -= &lr * bc;
                }
                q[k] += lr;
            }
            r.pop();
        }
        let scale = Rational::from_integer(num_traits::pow(lb, steps));
        let cr = &self.content / &scale;
        let cq = &cr / &divisor.content;
        (Self::from_ints_scaled(q, cq), Self::from_ints_scaled(r, cr))
    }

    /// Exact quotient; the caller guarantees divisibility.
    pub fn exact_div(&self, divisor: &UniPoly) -> UniPoly {
        assert!(!divisor.is_zero(), "polynomial division by zero");
        match int_exact_div(&self.prim, &divisor.prim) {
            Some(q) if !self.is_zero() => Self::from_prim(q, &self.content / &divisor.content),
            _ => {
                let (q, r) = self.div_rem(divisor);
                debug_assert!(r.is_zero(), "inexact polynomial division");
                q
            }
        }
    }

    /// Monic greatest common divisor (zero iff both inputs are zero).
    pub fn gcd(&self, other: &UniPoly) -> UniPoly {
        if self.is_zero() {
            return other.monic();
        }
        if other.is_zero() {
            return self.monic();
        }
        if self.is_constant() || other.is_constant() {
            return Self::one();
        }
        let (mut a, mut b) = (&self.prim, &other.prim);
        if a.len() < b.len() {
            std::mem::swap(&mut a, &mut b);
        }
        let divides = |c: &[BigInt]| int_exact_div(a, c).is_some() && int_exact_div(b, c).is_some();
        let g = match super::modgcd::int_poly_gcd(a, b, divides) {
            Some(g) => g,
            None => {
                // Primitive remainder sequence.
                let (mut a, mut b) = (a.clone(), b.clone());
                while !b.is_empty() {
                    let r = int_pseudo_rem(&a, &b);
                    a = b;
                    b = int_primitive(r);
                }
                a
            }
        };
        Self::from_ints_scaled(g, Rational::one()).monic()
    }

    /// Coefficients scaled to coprime integers with positive leading term.
    pub fn primitive_integer(&self) -> Vec<BigInt> {
        self.prim.clone()
    }

    /// Square-free part, monic.
    pub fn squarefree(&self) -> UniPoly {
        if self.is_constant() {
            return self.monic();
        }
        let g = self.gcd(&self.derivative());
        self.exact_div(&g).monic()
    }

    /// Yun's square-free decomposition: monic pairwise coprime factors
    /// `(f_k, k)` with `self = lc * prod f_k^k`. Constant factors are omitted.
    pub fn squarefree_decomposition(&self) -> Vec<(UniPoly, u32)> {
        let mut out = Vec::new();
        if self.is_constant() {
            return out;
        }
        let f = self.monic();
        let df = f.derivative();
        let a0 = f.gcd(&df);
        let mut b = f.exact_div(&a0);
        let mut c = df.exact_div(&a0);
        let mut d = &c - &b.derivative();
        let mut k = 1;
        loop {
            let a = b.gcd(&d);
            if !a.is_constant() {
                out.push((a.monic(), k));
            }
            b = b.exact_div(&a);
            if b.is_constant() {
                break;
            }
            c = d.exact_div(&a);
            d = &c - &b.derivative();
            k += 1;
        }
        out
    }

    /// `self(b + s*x)` as a polynomial in `x`.
    pub fn shift_scale(&self, b: &Rational, s: &Rational) -> UniPoly {
        let lin = UniPoly::new(vec![b.clone(), s.clone()]);
        let mut acc = UniPoly::zero();
        for c in self.coeffs().into_iter().rev() {
            acc = &(&acc * &lin) + &UniPoly::constant(c);
        }
        acc
    }

    /// Multiplicity of `root` as a root of `self`.
    pub fn root_multiplicity(&self, root: &Rational) -> u32 {
        if self.is_zero() {
            return 0;
        }
        let lin = UniPoly::linear_root(root);
        let mut p = self.clone();
        let mut k = 0;
        loop {
            let (q, r) = p.div_rem(&lin);
            if !r.is_zero() {
                return k;
            }
            p = q;
            k += 1;
        }
    }

    /// Cauchy bound: every real root has absolute value strictly below it.
    pub fn root_bound(&self) -> Rational {
        let Some(lc) = self.prim.last() else { return Rational::one() };
        let m = self.prim[..self.prim.len() - 1].iter().map(|c| c.abs()).max().unwrap_or_default();
        Rational::new(m, lc.clone()) + Rational::one()
    }

    pub fn sign_at(&self, x: &Rational) -> i32 {
        super::sign_of(&self.eval(x))
    }

    pub(crate) fn fmt_with_var(&self, f: &mut fmt::Formatter<'_>, var: &str) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs().iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let unit = a.is_one();
            match (i, unit) {
                (0, _) => write!(f, "{a}")?,
                (_, true) => write!(f, "{var}")?,
                (_, false) => write!(f, "{a}*{var}")?,
            }
            if i > 1 {
                write!(f, "^{i}")?;
            }
        }
        Ok(())
    }
}

fn int_primitive(mut v: Vec<BigInt>) -> Vec<BigInt> {
    while v.last().is_some_and(|c| c.is_zero()) {
        v.pop();
    }
    if v.is_empty() {
        return v;
    }
    let mut g = BigInt::zero();
    for c in &v {
        g = g.gcd(c);
    }
    if v.last().unwrap().is_negative() {
        g = -g;
    }
    if !g.is_one() {
        for c in v.iter_mut() {
            *c = &*c / &g;
        }
    }
    v
}

/// Exact quotient over Z of `a` by `c`, if it exists.
fn int_exact_div(a: &[BigInt], c: &[BigInt]) -> Option<Vec<BigInt>> {
    if c.is_empty() || a.len() < c.len() {
        return a.is_empty().then(Vec::new);
    }
    let dc = c.len() - 1;
    let lc = &c[dc];
    let mut r = a.to_vec();
    let mut q = vec![BigInt::zero(); a.len() - dc];
    while r.len() > dc {
        let top = r.len() - 1;
        let (qt, rem) = r[top].div_rem(lc);
        if !rem.is_zero() {
            return None;
        }
        if !qt.is_zero() {
            let shift = top - dc;
            for (j, cc) in c.iter().enumerate() {
                r[shift + j] -= &qt * cc;
            }
            q[top - dc] = qt;
        }
        r.pop();
    }
    r.iter().all(|x| x.is_zero()).then_some(q)
}

/// Pseudo-remainder of integer polynomials: `lc(b)^k a = q b + r`.
fn int_pseudo_rem(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut r: Vec<BigInt> = a.to_vec();
    let db = b.len() - 1;
    let lb = &b[db];
    while r.len() > db && !r.is_empty() {
        let dr = r.len() - 1;
        let lr = r[dr].clone();
        let shift = dr - db;
        for c in r.iter_mut() {
            *c *= lb;
        }
        for (j, bc) in b.iter().enumerate() {
            r[shift + j] -= &lr * bc;
        }
        r.pop();
        while r.last().is_some_and(|c| c.is_zero()) {
            r.pop();
        }
        // keep entries small
        r = int_primitive_keep_sign(r);
    }
    r
}

fn int_primitive_keep_sign(v: Vec<BigInt>) -> Vec<BigInt> {
    if v.is_empty() {
        return v;
    }
    let mut g = BigInt::zero();
    for c in &v {
        g = g.gcd(c);
    }
    if g.is_one() || g.is_zero() {
        return v;
    }
    v.into_iter().map(|c| c / &g).collect()
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_with_var(f, "t")
    }
}

impl Add for &UniPoly {
    type Output = UniPoly;
    fn add(self, rhs: &UniPoly) -> UniPoly {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        // Bring both contents over a common denominator.
        let (na, da) = (self.content.numer(), self.content.denom());
        let (nb, db) = (rhs.content.numer(), rhs.content.denom());
        let g = da.gcd(db);
        let fa = na * (db / &g);
        let fb = nb * (da / &g);
        let den = da / &g * db;
        let n = self.prim.len().max(rhs.prim.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let x = match (self.prim.get(i), rhs.prim.get(i)) {
                (Some(a), Some(b)) => a * &fa + b * &fb,
                (Some(a), None) => a * &fa,
                (None, Some(b)) => b * &fb,
                (None, None) => unreachable!(),
            };
            out.push(x);
        }
        UniPoly::from_ints_scaled(out, Rational::new(BigInt::one(), den))
    }
}

impl Sub for &UniPoly {
    type Output = UniPoly;
    fn sub(self, rhs: &UniPoly) -> UniPoly {
        self + &(-rhs)
    }
}

impl Neg for &UniPoly {
    type Output = UniPoly;
    fn neg(self) -> UniPoly {
        UniPoly { content: -&self.content, prim: self.prim.clone() }
    }
}

impl Mul for &UniPoly {
    type Output = UniPoly;
    fn mul(self, rhs: &UniPoly) -> UniPoly {
        if self.is_zero() || rhs.is_zero() {
            return UniPoly::zero();
        }
        // Gauss: the product of primitive polynomials is primitive.
        let (a, b) = (&self.prim, &rhs.prim);
        let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        UniPoly::from_prim(out, &self.content * &rhs.content)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{int, rat};

    #[test]
    fn degree_of_zero_is_below_everything() {
        assert!(Degree::NegInf < Degree::Finite(0));
        assert_eq!(UniPoly::zero().degree(), Degree::NegInf);
        assert_eq!(UniPoly::from_ints(&[0, 0]).degree(), Degree::NegInf);
    }

    #[test]
    fn division_reconstructs() {
        let a = UniPoly::from_ints(&[1, 0, 3, 2]);
        let b = UniPoly::from_ints(&[-1, 2]);
        let (q, r) = a.div_rem(&b);
        assert_eq!(&(&q * &b) + &r, a);
        assert!(r.degree() < b.degree());
    }

    #[test]
    fn gcd_is_monic_common_factor() {
        let f = UniPoly::from_ints(&[-1, 1]); // t - 1
        let a = &f * &UniPoly::from_ints(&[2, 0, 3]);
        let b = &f * &UniPoly::from_ints(&[5, 7]);
        assert_eq!(a.gcd(&b), f);
        assert_eq!(UniPoly::from_ints(&[3]).gcd(&a), UniPoly::one());
    }

    #[test]
    fn yun_decomposition() {
        // t^2 (t-1)^3 (t+2)
        let t = UniPoly::t();
        let tm1 = UniPoly::from_ints(&[-1, 1]);
        let tp2 = UniPoly::from_ints(&[2, 1]);
        let p = &(&t.pow(2) * &tm1.pow(3)) * &tp2.scale(&int(4));
        let dec = p.squarefree_decomposition();
        assert_eq!(dec, vec![(tp2, 1), (t, 2), (tm1, 3)]);
    }

    #[test]
    fn shift_scale_substitutes() {
        let p = UniPoly::from_ints(&[1, 0, 1]); // t^2 + 1
        let q = p.shift_scale(&int(2), &int(-1)); // (2 - x)^2 + 1
        assert_eq!(q, UniPoly::from_ints(&[5, -4, 1]));
        assert_eq!(p.eval(&rat(1, 2)), rat(5, 4));
    }
}
