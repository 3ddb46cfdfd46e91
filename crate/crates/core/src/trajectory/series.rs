//! Truncated generalized power series `sum c_e s^e` (rational exponents) of an
//! expression at `t = b + sigma*s`, `s -> 0+`. This is what one-sided jets are
//! read off from.
//!
//! Coefficients stay exact while they can; `exp(1)`, `sin(1/2)` and irrational
//! roots of constants switch them to floats carrying an absolute error bound.

use std::collections::BTreeMap;

use num_traits::{One, Signed, ToPrimitive, Zero};

use super::expr::{Expr, Node};
use crate::field::{int, rational_root_power, to_f64, RatFun, Rational};

const EPS: f64 = 4.0 * f64::EPSILON;

#[derive(Clone, Debug)]
pub(crate) enum Coef {
    Exact(Rational),
    Approx { v: f64, e: f64 },
}

impl Coef {
    fn approx(v: f64, e: f64) -> Coef {
        Coef::Approx { v, e: e + EPS * v.abs() }
    }

    fn parts(&self) -> (f64, f64) {
        match self {
            Coef::Exact(q) => {
                let v = to_f64(q);
                (v, EPS * v.abs())
            }
            Coef::Approx { v, e } => (*v, *e),
        }
    }

    pub(crate) fn is_zero(&self) -> bool {
        match self {
            Coef::Exact(q) => q.is_zero(),
            Coef::Approx { v, e } => v.abs() <= *e,
        }
    }

    /// `Some(+-1)` when the sign is certain.
    fn sign(&self) -> Option<i32> {
        match self {
            Coef::Exact(q) => Some(crate::field::sign_of(q)),
            Coef::Approx { v, e } => {
                if v.abs() <= *e {
                    None
                } else {
                    Some(if *v > 0.0 { 1 } else { -1 })
                }
            }
        }
    }

    fn add(&self, o: &Coef) -> Coef {
        match (self, o) {
            (Coef::Exact(a), Coef::Exact(b)) => Coef::Exact(a + b),
            _ => {
                let ((a, ea), (b, eb)) = (self.parts(), o.parts());
                Coef::approx(a + b, ea + eb)
            }
        }
    }

    fn mul(&self, o: &Coef) -> Coef {
        match (self, o) {
            (Coef::Exact(a), Coef::Exact(b)) => Coef::Exact(a * b),
            _ => {
                let ((a, ea), (b, eb)) = (self.parts(), o.parts());
                Coef::approx(a * b, a.abs() * eb + b.abs() * ea + ea * eb)
            }
        }
    }

    fn neg(&self) -> Coef {
        match self {
            Coef::Exact(a) => Coef::Exact(-a),
            Coef::Approx { v, e } => Coef::Approx { v: -v, e: *e },
        }
    }

    fn recip(&self) -> Coef {
        match self {
            Coef::Exact(a) => Coef::Exact(a.recip()),
            Coef::Approx { v, e } => {
                // |1/v - 1/(v+d)| <= e / (|v| (|v| - e))
                Coef::approx(1.0 / v, e / (v.abs() * (v.abs() - e)))
            }
        }
    }

    /// `self^q` for a positive coefficient (any sign if `q` is an integer).
    fn powq(&self, q: &Rational) -> Option<Coef> {
        match self {
            Coef::Exact(c) => Some(match rational_root_power(c, q) {
                Some(r) => Coef::Exact(r),
                None => {
                    let v = to_f64(c).powf(to_f64(q));
                    Coef::approx(v, 0.0)
                }
            }),
            Coef::Approx { v, e } => {
                if *v <= *e && !q.is_integer() {
                    return None;
                }
                let qf = to_f64(q);
                let r = v.powf(qf);
                // first-order propagation with a safety factor
                let lo = (v.abs() - e).max(f64::MIN_POSITIVE);
                let de = 2.0 * qf.abs() * lo.powf(qf - 1.0).max(r.abs() / lo) * e;
                Some(Coef::approx(r, de))
            }
        }
    }
}

fn exp_coef(c: &Coef) -> Coef {
    match c {
        Coef::Exact(q) if q.is_zero() => Coef::Exact(Rational::one()),
        _ => {
            let (v, e) = c.parts();
            let r = v.exp();
            Coef::approx(r, r * (e.exp() - 1.0))
        }
    }
}

fn sin_cos_coef(c: &Coef) -> (Coef, Coef) {
    match c {
        Coef::Exact(q) if q.is_zero() => (Coef::Exact(Rational::zero()), Coef::Exact(Rational::one())),
        _ => {
            let (v, e) = c.parts();
            (Coef::approx(v.sin(), e), Coef::approx(v.cos(), e))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum SeriesError {
    /// More terms are needed; retry with a larger cap.
    Precision,
    /// The function itself is unbounded at the point.
    Divergent,
    Unsupported(String),
}

/// Terms with exponent below `prec` are exact; `prec = None` means the
/// series is a finite exact sum. A `flat` series is zero to every order but
/// not identically zero (e.g. `exp(-1/s)`).
#[derive(Clone, Debug)]
pub(crate) struct Series {
    pub(crate) terms: Vec<(Rational, Coef)>,
    pub(crate) prec: Option<Rational>,
    flat: bool,
}

fn min_prec(a: &Option<Rational>, b: &Option<Rational>) -> Option<Rational> {
    match (a, b) {
        (None, x) | (x, None) => x.clone(),
        (Some(x), Some(y)) => Some(x.min(y).clone()),
    }
}

fn below(e: &Rational, prec: &Option<Rational>) -> bool {
    prec.as_ref().is_none_or(|p| e < p)
}

impl Series {
    fn zero() -> Series {
        Series { terms: Vec::new(), prec: None, flat: false }
    }

    fn flat() -> Series {
        Series { terms: Vec::new(), prec: None, flat: true }
    }

    fn constant(c: Coef) -> Series {
        Series::from_map(BTreeMap::from([(Rational::zero(), c)]), None)
    }

    fn from_map(map: BTreeMap<Rational, Coef>, prec: Option<Rational>) -> Series {
        let terms = map.into_iter().filter(|(e, c)| !c.is_zero() && below(e, &prec)).collect();
        Series { terms, prec, flat: false }
    }

    fn is_exact_zero(&self) -> bool {
        self.terms.is_empty() && self.prec.is_none() && !self.flat
    }

    /// Leading exponent; `None` for the exact zero and flat series.
    fn valuation(&self) -> Option<Rational> {
        match self.terms.first() {
            Some((e, _)) => Some(e.clone()),
            None => self.prec.clone(),
        }
    }

    fn truncate(mut self, cap: &Rational) -> Series {
        if self.prec.as_ref().is_none_or(|p| p > cap) {
            self.terms.retain(|(e, _)| e < cap);
            self.prec = Some(cap.clone());
        }
        self
    }

    fn add(&self, o: &Series) -> Series {
        if self.flat || self.is_exact_zero() {
            return if o.is_exact_zero() && self.flat { self.clone() } else { o.clone() };
        }
        if o.flat || o.is_exact_zero() {
            return self.clone();
        }
        let prec = min_prec(&self.prec, &o.prec);
        let mut map: BTreeMap<Rational, Coef> = BTreeMap::new();
        for (e, c) in self.terms.iter().chain(&o.terms) {
            match map.get_mut(e) {
                Some(acc) => *acc = acc.add(c),
                None => {
                    map.insert(e.clone(), c.clone());
                }
            }
        }
        Series::from_map(map, prec)
    }

    fn neg(&self) -> Series {
        Series {
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c.neg())).collect(),
            prec: self.prec.clone(),
            flat: self.flat,
        }
    }

    fn mul(&self, o: &Series) -> Result<Series, SeriesError> {
        if self.is_exact_zero() || o.is_exact_zero() {
            return Ok(Series::zero());
        }
        if self.flat || o.flat {
            let other = if self.flat { o } else { self };
            if other.flat || !other.terms.is_empty() {
                return Ok(Series::flat());
            }
            return Err(SeriesError::Precision);
        }
        let (va, vb) = (self.valuation().expect("nonzero"), o.valuation().expect("nonzero"));
        let prec = min_prec(&self.prec.as_ref().map(|p| p + &vb), &o.prec.as_ref().map(|p| p + &va));
        let mut map: BTreeMap<Rational, Coef> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &o.terms {
                let e = ea + eb;
                if !below(&e, &prec) {
                    continue;
                }
                let c = ca.mul(cb);
                match map.get_mut(&e) {
                    Some(acc) => *acc = acc.add(&c),
                    None => {
                        map.insert(e, c);
                    }
                }
            }
        }
        Ok(Series::from_map(map, prec))
    }

    fn scale(&self, c: &Coef) -> Series {
        let map = self.terms.iter().map(|(e, x)| (e.clone(), x.mul(c))).collect();
        Series::from_map(map, self.prec.clone())
    }

    fn shift_exponents(&self, by: &Rational) -> Series {
        Series {
            terms: self.terms.iter().map(|(e, c)| (e + by, c.clone())).collect(),
            prec: self.prec.as_ref().map(|p| p + by),
            flat: self.flat,
        }
    }

    /// Leading sign, when certain.
    fn leading_sign(&self) -> Result<i32, SeriesError> {
        if self.flat {
            return Err(SeriesError::Unsupported("sign of a flat function".into()));
        }
        match self.terms.first() {
            None if self.prec.is_none() => Ok(0),
            None => Err(SeriesError::Precision),
            Some((_, c)) => c.sign().ok_or_else(|| SeriesError::Unsupported("indeterminate sign".into())),
        }
    }

    /// `sum_k a_k g^k` for `g` of positive valuation, truncated at `cap`.
    fn compose(g: &Series, coeffs: impl Fn(u32) -> Coef, cap: &Rational) -> Result<Series, SeriesError> {
        let mut acc = Series::constant(coeffs(0));
        if g.is_exact_zero() || g.flat {
            return Ok(acc);
        }
        let w = g.valuation().expect("nonzero");
        if !w.is_positive() {
            return Err(SeriesError::Precision);
        }
        let mut gk = Series::constant(Coef::Exact(Rational::one()));
        let mut k = 0u32;
        loop {
            k += 1;
            gk = gk.mul(g)?.truncate(cap);
            match gk.valuation() {
                Some(v) if &v < cap => {}
                _ => break,
            }
            let a = coeffs(k);
            if !a.is_zero() {
                acc = acc.add(&gk.scale(&a));
            }
        }
        acc = acc.add(&Series { terms: Vec::new(), prec: Some(cap.clone()), flat: false });
        Ok(acc.truncate(cap))
    }

    /// Splits `c s^v (1 + g)`.
    fn split_leading(&self) -> Result<(Coef, Rational, Series), SeriesError> {
        let Some((v, c)) = self.terms.first().cloned() else {
            return Err(SeriesError::Precision);
        };
        let inv = c.recip();
        let map = self.terms[1..].iter().map(|(e, x)| (e - &v, x.mul(&inv))).collect();
        let g = Series::from_map(map, self.prec.as_ref().map(|p| p - &v));
        Ok((c, v, g))
    }

    fn powq(&self, q: &Rational, cap: &Rational) -> Result<Series, SeriesError> {
        if self.is_exact_zero() {
            return if q.is_positive() { Ok(Series::zero()) } else { Err(SeriesError::Divergent) };
        }
        if self.flat {
            return if q.is_positive() {
                Ok(Series::flat())
            } else {
                Err(SeriesError::Unsupported("negative power of a flat function".into()))
            };
        }
        if q.is_zero() {
            return Ok(Series::constant(Coef::Exact(Rational::one())));
        }
        if q.is_one() {
            return Ok(self.clone());
        }
        let (c, v, g) = self.split_leading()?;
        if !q.is_integer() && c.sign() != Some(1) {
            return Err(SeriesError::Unsupported("non-integer power of a non-positive base".into()));
        }
        let cq = c.powq(q).ok_or_else(|| SeriesError::Unsupported("indeterminate base".into()))?;
        let vq = &v * q;
        let rel_cap = cap - &vq;
        let rel = match &g.prec {
            Some(p) => p.clone().min(rel_cap),
            None => rel_cap,
        };
        if !rel.is_positive() {
            return Err(SeriesError::Precision);
        }
        let binom = |k: u32| -> Coef {
            let mut acc = Rational::one();
            for i in 0..k {
                acc = acc * (q - int(i as i64)) / int(i as i64 + 1);
            }
            Coef::Exact(acc)
        };
        let body = if g.is_exact_zero() && q.is_integer() {
            Series::constant(Coef::Exact(Rational::one()))
        } else {
            Series::compose(&g, binom, &rel)?
        };
        Ok(body.scale(&cq).shift_exponents(&vq))
    }

    /// Splits into (part with negative exponents, constant term, positive part).
    fn split_at_zero(&self) -> (Series, Coef, Series) {
        let neg: Vec<_> = self.terms.iter().filter(|(e, _)| e.is_negative()).cloned().collect();
        let c0 = self
            .terms
            .iter()
            .find(|(e, _)| e.is_zero())
            .map(|(_, c)| c.clone())
            .unwrap_or(Coef::Exact(Rational::zero()));
        let pos: Vec<_> = self.terms.iter().filter(|(e, _)| e.is_positive()).cloned().collect();
        (
            Series { terms: neg, prec: None, flat: false },
            c0,
            Series { terms: pos, prec: self.prec.clone(), flat: false },
        )
    }

    fn exp(&self, cap: &Rational) -> Result<Series, SeriesError> {
        if self.is_exact_zero() || self.flat {
            return Ok(Series::constant(Coef::Exact(Rational::one())));
        }
        let (neg, c0, pos) = self.split_at_zero();
        if let Some((_, c)) = neg.terms.first() {
            return match c.sign() {
                Some(-1) => Ok(Series::flat()),
                Some(_) => Err(SeriesError::Divergent),
                None => Err(SeriesError::Unsupported("indeterminate exponential growth".into())),
            };
        }
        let prec = match &self.prec {
            Some(p) if !p.is_positive() => return Err(SeriesError::Precision),
            Some(p) => p.clone().min(cap.clone()),
            None => cap.clone(),
        };
        let inv_fact = |k: u32| Coef::Exact(crate::field::factorial(k).recip());
        let body = Series::compose(&pos, inv_fact, &prec)?;
        Ok(body.scale(&exp_coef(&c0)))
    }

    fn sin_cos(&self, cap: &Rational) -> Result<(Series, Series), SeriesError> {
        if self.is_exact_zero() || self.flat {
            return Ok((Series::zero(), Series::constant(Coef::Exact(Rational::one()))));
        }
        let (neg, c0, pos) = self.split_at_zero();
        if !neg.terms.is_empty() {
            return Err(SeriesError::Unsupported("oscillation without a limit".into()));
        }
        let prec = match &self.prec {
            Some(p) if !p.is_positive() => return Err(SeriesError::Precision),
            Some(p) => p.clone().min(cap.clone()),
            None => cap.clone(),
        };
        let sin_k = |k: u32| -> Coef {
            if k % 2 == 0 {
                Coef::Exact(Rational::zero())
            } else {
                let s = if k % 4 == 1 { int(1) } else { int(-1) };
                Coef::Exact(s / crate::field::factorial(k))
            }
        };
        let cos_k = |k: u32| -> Coef {
            if k % 2 == 1 {
                Coef::Exact(Rational::zero())
            } else {
                let s = if k % 4 == 0 { int(1) } else { int(-1) };
                Coef::Exact(s / crate::field::factorial(k))
            }
        };
        let sh = Series::compose(&pos, sin_k, &prec)?;
        let ch = Series::compose(&pos, cos_k, &prec)?;
        let (s0, c0) = sin_cos_coef(&c0);
        let sin = sh.scale(&c0).add(&ch.scale(&s0));
        let cos = ch.scale(&c0).add(&sh.scale(&s0).neg());
        Ok((sin, cos))
    }
}

/// Expansion context: `t = b + sigma*s`, infinite expansions cut at `cap`.
pub(crate) struct Expansion<'a> {
    pub(crate) b: &'a Rational,
    pub(crate) sigma: i32,
    pub(crate) cap: Rational,
}

impl Expansion<'_> {
    fn ratfun(&self, r: &RatFun) -> Result<Series, SeriesError> {
        if r.is_zero() {
            return Ok(Series::zero());
        }
        let s = int(self.sigma as i64);
        let num = r.num().shift_scale(self.b, &s).coeffs();
        let den = r.den().shift_scale(self.b, &s).coeffs();
        let m = den.iter().position(|c| !c.is_zero()).expect("nonzero denominator");
        let d = &den[m..];
        let shift = int(-(m as i64));
        if d.len() == 1 {
            let map = num.iter().enumerate().map(|(k, c)| (int(k as i64), Coef::Exact(c / &d[0]))).collect();
            return Ok(Series::from_map(map, None).shift_exponents(&shift));
        }
        // power-series division num / d up to exponent cap + m
        let n = (&self.cap + int(m as i64)).ceil().to_integer().to_i64().unwrap_or(0).max(1) as usize;
        let inv0 = d[0].recip();
        let mut q: Vec<Rational> = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc = num.get(k).cloned().unwrap_or_default();
            for j in 1..d.len().min(k + 1) {
                acc -= &d[j] * &q[k - j];
            }
            q.push(acc * &inv0);
        }
        let map = q.into_iter().enumerate().map(|(k, c)| (int(k as i64), Coef::Exact(c))).collect();
        Ok(Series::from_map(map, Some(int(n as i64))).shift_exponents(&shift))
    }

    pub(crate) fn expand(&self, e: &Expr) -> Result<Series, SeriesError> {
        let cap = &self.cap;
        match e.node() {
            Node::Rat(r) => self.ratfun(r),
            Node::Add(ts) => {
                let mut acc = Series::zero();
                for t in ts {
                    acc = acc.add(&self.expand(t)?);
                }
                Ok(acc)
            }
            Node::Mul(fs) => {
                let mut acc = Series::constant(Coef::Exact(Rational::one()));
                for f in fs {
                    acc = acc.mul(&self.expand(f)?)?;
                }
                Ok(acc)
            }
            Node::Pow(b, n) => self.expand(b)?.powq(&int(*n), cap),
            Node::RPow(b, q) => self.expand(b)?.powq(q, cap),
            Node::Abs(u) => {
                let s = self.expand(u)?;
                if s.flat {
                    return Ok(Series::flat());
                }
                Ok(if s.leading_sign()? < 0 { s.neg() } else { s })
            }
            Node::Sgn(u) => {
                let s = self.expand(u)?;
                Ok(match s.leading_sign()? {
                    0 => Series::zero(),
                    k => Series::constant(Coef::Exact(int(k as i64))),
                })
            }
            Node::Exp(u) => self.expand(u)?.exp(cap),
            Node::Sin(u) => Ok(self.expand(u)?.sin_cos(cap)?.0),
            Node::Cos(u) => Ok(self.expand(u)?.sin_cos(cap)?.1),
        }
    }
}
