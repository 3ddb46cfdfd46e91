//! Closed-form expressions in `t` with exact symbolic differentiation.
//!
//! Constructors canonicalize: every purely rational subtree collapses into a
//! single [`Node::Rat`] leaf, sums and products are flattened with their
//! rational part first, and equal summands are merged. Two expressions built
//! the same way therefore compare structurally equal.

use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::field::{int, rational_root_power, to_f64, RatFun, Rational, UniPoly};
use crate::Error;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Expr(Arc<Node>);

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    /// A rational function of `t` (covers constants and `t` itself).
    Rat(RatFun),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    /// Integer power of a non-rational base.
    Pow(Expr, i64),
    /// Non-integer rational power; the base is `abs(..)` or structurally positive.
    RPow(Expr, Rational),
    Abs(Expr),
    Sgn(Expr),
    Exp(Expr),
    Sin(Expr),
    Cos(Expr),
}

impl Expr {
    fn wrap(n: Node) -> Expr {
        Expr(Arc::new(n))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn rat(r: RatFun) -> Expr {
        Self::wrap(Node::Rat(r))
    }

    pub fn constant(c: Rational) -> Expr {
        Self::rat(RatFun::constant(c))
    }

    pub fn zero() -> Expr {
        Self::rat(RatFun::zero())
    }

    pub fn one() -> Expr {
        Self::rat(RatFun::one())
    }

    pub fn t() -> Expr {
        Self::rat(RatFun::t())
    }

    /// `t - c`
    pub fn shifted_t(c: &Rational) -> Expr {
        Self::rat(RatFun::poly(UniPoly::linear_root(c)))
    }

    pub fn as_rat(&self) -> Option<&RatFun> {
        match self.node() {
            Node::Rat(r) => Some(r),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_rat().is_some_and(|r| r.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.as_rat().is_some_and(|r| r.is_one())
    }

    pub fn add(terms: Vec<Expr>) -> Expr {
        let mut rat = RatFun::zero();
        // (coefficient, rest) with rest never a Rat
        let mut parts: Vec<(RatFun, Expr)> = Vec::new();
        let push = |coef: RatFun, rest: Expr, parts: &mut Vec<(RatFun, Expr)>| {
            if let Some(p) = parts.iter_mut().find(|p| p.1 == rest) {
                p.0 = &p.0 + &coef;
            } else {
                parts.push((coef, rest));
            }
        };
        let mut stack: Vec<Expr> = terms.into_iter().rev().collect();
        while let Some(e) = stack.pop() {
            match e.node() {
                Node::Rat(r) => rat = &rat + r,
                Node::Add(inner) => stack.extend(inner.iter().rev().cloned()),
                _ => {
                    let (c, rest) = e.split_coefficient();
                    push(c, rest, &mut parts);
                }
            }
        }
        let mut out = Vec::with_capacity(parts.len() + 1);
        if !rat.is_zero() {
            out.push(Expr::rat(rat));
        }
        for (c, rest) in parts {
            if c.is_zero() {
                continue;
            }
            out.push(if c.is_one() { rest } else { Expr::mul(vec![Expr::rat(c), rest]) });
        }
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => Self::wrap(Node::Add(out)),
        }
    }

    /// Splits `c * rest` with `c` the rational leading factor of a product.
    fn split_coefficient(&self) -> (RatFun, Expr) {
        if let Node::Mul(fs) = self.node() {
            if let Some(r) = fs[0].as_rat() {
                let rest = if fs.len() == 2 {
                    fs[1].clone()
                } else {
                    Self::wrap(Node::Mul(fs[1..].to_vec()))
                };
                return (r.clone(), rest);
            }
        }
        (RatFun::one(), self.clone())
    }

    pub fn mul(factors: Vec<Expr>) -> Expr {
        let mut rat = RatFun::one();
        let mut out = Vec::new();
        let mut stack: Vec<Expr> = factors.into_iter().rev().collect();
        while let Some(e) = stack.pop() {
            match e.node() {
                Node::Rat(r) => {
                    if r.is_zero() {
                        return Expr::zero();
                    }
                    rat = &rat * r;
                }
                Node::Mul(inner) => stack.extend(inner.iter().rev().cloned()),
                _ => out.push(e),
            }
        }
        if out.is_empty() {
            return Expr::rat(rat);
        }
        if !rat.is_one() {
            out.insert(0, Expr::rat(rat));
        }
        if out.len() == 1 {
            return out.pop().unwrap();
        }
        Self::wrap(Node::Mul(out))
    }

    pub fn neg(&self) -> Expr {
        Expr::mul(vec![Expr::constant(int(-1)), self.clone()])
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        Expr::add(vec![self.clone(), other.neg()])
    }

    pub fn scale(&self, c: &RatFun) -> Expr {
        Expr::mul(vec![Expr::rat(c.clone()), self.clone()])
    }

    pub fn pow(&self, n: i64) -> Expr {
        if n == 0 {
            return Expr::one();
        }
        if n == 1 {
            return self.clone();
        }
        match self.node() {
            Node::Rat(r) => match r.pow(n) {
                Ok(p) => Expr::rat(p),
                Err(_) => Self::wrap(Node::Pow(self.clone(), n)),
            },
            Node::Pow(b, m) => b.pow(m * n),
            Node::RPow(b, q) => b.rpow_unchecked(q * int(n)),
            _ => Self::wrap(Node::Pow(self.clone(), n)),
        }
    }

    /// `self^q` for rational `q`. A non-integer exponent requires an `abs(..)`
    /// or structurally positive base.
    pub fn rpow(&self, q: Rational) -> Result<Expr, Error> {
        if q.is_integer() {
            return Ok(self.pow(exp_to_i64(&q)?));
        }
        if !(matches!(self.node(), Node::Abs(_)) || self.is_structurally_positive()) {
            return Err(Error::Unsupported(format!(
                "non-integer power {q} needs an abs(..) or positive base"
            )));
        }
        Ok(self.rpow_unchecked(q))
    }

    fn rpow_unchecked(&self, q: Rational) -> Expr {
        if q.is_integer() {
            return self.pow(exp_to_i64(&q).expect("small exponent"));
        }
        match self.node() {
            Node::RPow(b, p) => b.rpow_unchecked(p * q),
            Node::Pow(b, m) if matches!(b.node(), Node::Abs(_)) || b.is_structurally_positive() => {
                b.rpow_unchecked(q * int(*m))
            }
            Node::Rat(r) => match r.as_constant().and_then(|c| rational_root_power(&c, &q)) {
                Some(v) => Expr::constant(v),
                None => Self::wrap(Node::RPow(self.clone(), q)),
            },
            _ => Self::wrap(Node::RPow(self.clone(), q)),
        }
    }

    pub fn abs(&self) -> Expr {
        match self.node() {
            Node::Rat(r) if r.is_constant() => Expr::constant(r.as_constant().unwrap().abs()),
            Node::Abs(_) | Node::Exp(_) => self.clone(),
            _ => Self::wrap(Node::Abs(self.clone())),
        }
    }

    pub fn sgn(&self) -> Expr {
        match self.node() {
            Node::Rat(r) if r.is_constant() => {
                Expr::constant(int(crate::field::sign_of(&r.as_constant().unwrap()) as i64))
            }
            Node::Exp(_) => Expr::one(),
            _ => Self::wrap(Node::Sgn(self.clone())),
        }
    }

    pub fn exp(&self) -> Expr {
        if self.is_zero() {
            return Expr::one();
        }
        Self::wrap(Node::Exp(self.clone()))
    }

    pub fn sin(&self) -> Expr {
        if self.is_zero() {
            return Expr::zero();
        }
        Self::wrap(Node::Sin(self.clone()))
    }

    pub fn cos(&self) -> Expr {
        if self.is_zero() {
            return Expr::one();
        }
        Self::wrap(Node::Cos(self.clone()))
    }

    pub fn recip(&self) -> Expr {
        self.pow(-1)
    }

    /// Positive wherever defined, by structure alone (exp, positive constants,
    /// sums and products of such).
    pub fn is_structurally_positive(&self) -> bool {
        match self.node() {
            Node::Exp(_) => true,
            Node::Rat(r) => r.as_constant().is_some_and(|c| c.is_positive()),
            Node::Add(ts) | Node::Mul(ts) => ts.iter().all(|e| e.is_structurally_positive()),
            Node::Pow(b, _) | Node::RPow(b, _) => b.is_structurally_positive(),
            _ => false,
        }
    }

    /// Exact derivative. `sgn` differentiates to zero, which is valid away from
    /// the zeros of its argument (piece interiors).
    pub fn diff(&self) -> Expr {
        match self.node() {
            Node::Rat(r) => Expr::rat(r.derivative()),
            Node::Add(ts) => Expr::add(ts.iter().map(|e| e.diff()).collect()),
            Node::Mul(fs) => {
                let mut terms = Vec::with_capacity(fs.len());
                for i in 0..fs.len() {
                    let di = fs[i].diff();
                    if di.is_zero() {
                        continue;
                    }
                    let mut prod = fs.clone();
                    prod[i] = di;
                    terms.push(Expr::mul(prod));
                }
                Expr::add(terms)
            }
            Node::Pow(b, n) => {
                Expr::mul(vec![Expr::constant(int(*n)), b.pow(n - 1), b.diff()])
            }
            Node::RPow(b, q) => Expr::mul(vec![
                Expr::constant(q.clone()),
                b.rpow_unchecked(q - Rational::one()),
                b.diff(),
            ]),
            Node::Abs(u) => Expr::mul(vec![u.sgn(), u.diff()]),
            Node::Sgn(_) => Expr::zero(),
            Node::Exp(u) => Expr::mul(vec![self.clone(), u.diff()]),
            Node::Sin(u) => Expr::mul(vec![u.cos(), u.diff()]),
            Node::Cos(u) => Expr::mul(vec![Expr::constant(int(-1)), u.sin(), u.diff()]),
        }
    }

    pub fn diff_n(&self, n: u32) -> Expr {
        let mut e = self.clone();
        for _ in 0..n {
            e = e.diff();
        }
        e
    }

    pub fn eval_f64(&self, t: f64) -> f64 {
        match self.node() {
            Node::Rat(r) => r.eval_f64(t),
            Node::Add(ts) => ts.iter().map(|e| e.eval_f64(t)).sum(),
            Node::Mul(fs) => fs.iter().map(|e| e.eval_f64(t)).product(),
            Node::Pow(b, n) => b.eval_f64(t).powi(*n as i32),
            Node::RPow(b, q) => b.eval_f64(t).powf(to_f64(q)),
            Node::Abs(u) => u.eval_f64(t).abs(),
            Node::Sgn(u) => {
                let v = u.eval_f64(t);
                if v > 0.0 {
                    1.0
                } else if v < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            Node::Exp(u) => u.eval_f64(t).exp(),
            Node::Sin(u) => u.eval_f64(t).sin(),
            Node::Cos(u) => u.eval_f64(t).cos(),
        }
    }

    /// Exact value at a rational point when it is rational.
    pub fn eval_exact(&self, t: &Rational) -> Option<Rational> {
        match self.node() {
            Node::Rat(r) => r.eval(t).ok(),
            Node::Add(ts) => {
                ts.iter().try_fold(Rational::zero(), |acc, e| Some(acc + e.eval_exact(t)?))
            }
            Node::Mul(fs) => fs.iter().try_fold(Rational::one(), |acc, e| Some(acc * e.eval_exact(t)?)),
            Node::Pow(b, n) => {
                let v = b.eval_exact(t)?;
                if v.is_zero() && *n < 0 {
                    return None;
                }
                Some(if *n >= 0 {
                    num_traits::pow(v, *n as usize)
                } else {
                    num_traits::pow(v.recip(), n.unsigned_abs() as usize)
                })
            }
            Node::RPow(b, q) => rational_root_power(&b.eval_exact(t)?, q),
            Node::Abs(u) => Some(u.eval_exact(t)?.abs()),
            Node::Sgn(u) => Some(int(crate::field::sign_of(&u.eval_exact(t)?) as i64)),
            Node::Exp(u) => u.eval_exact(t)?.is_zero().then(Rational::one),
            Node::Sin(u) => u.eval_exact(t)?.is_zero().then(Rational::zero),
            Node::Cos(u) => u.eval_exact(t)?.is_zero().then(Rational::one),
        }
    }

    /// Number of nodes, for guarding against runaway expression growth.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn children(&self) -> Vec<&Expr> {
        match self.node() {
            Node::Rat(_) => Vec::new(),
            Node::Add(v) | Node::Mul(v) => v.iter().collect(),
            Node::Pow(b, _) | Node::RPow(b, _) => vec![b],
            Node::Abs(u) | Node::Sgn(u) | Node::Exp(u) | Node::Sin(u) | Node::Cos(u) => vec![u],
        }
    }

    /// Substitutes `t -> t + shift` throughout.
    pub fn shift(&self, shift: &Rational) -> Expr {
        let map_rat = |r: &RatFun| {
            let s = Rational::one();
            let num = r.num().shift_scale(shift, &s);
            let den = r.den().shift_scale(shift, &s);
            RatFun::new(num, den).expect("nonzero denominator")
        };
        self.map_rat(&map_rat)
    }

    /// Replaces `sgn(u)` and bare `abs(u)` of rational `u` by their value
    /// on an interval where `u` keeps the sign it has at `at`. Powers of
    /// `abs` keep their base.
    pub fn resolve_signs(&self, at: &Rational) -> Expr {
        let sign = |u: &Expr| -> Option<i32> {
            let v = u.as_rat()?.eval(at).ok()?;
            (!v.is_zero()).then(|| crate::field::sign_of(&v))
        };
        match self.node() {
            Node::Rat(_) => self.clone(),
            Node::Sgn(u) => match sign(u) {
                Some(s) => Expr::constant(int(s as i64)),
                None => u.resolve_signs(at).sgn(),
            },
            Node::Abs(u) => match sign(u) {
                Some(s) if s > 0 => u.clone(),
                Some(_) => u.neg(),
                None => u.resolve_signs(at).abs(),
            },
            Node::RPow(b, q) => match b.node() {
                Node::Abs(u) => u.resolve_signs(at).abs().rpow_unchecked(q.clone()),
                _ => b.resolve_signs(at).rpow_unchecked(q.clone()),
            },
            Node::Add(ts) => Expr::add(ts.iter().map(|e| e.resolve_signs(at)).collect()),
            Node::Mul(ts) => Expr::mul(ts.iter().map(|e| e.resolve_signs(at)).collect()),
            Node::Pow(b, n) => b.resolve_signs(at).pow(*n),
            Node::Exp(u) => u.resolve_signs(at).exp(),
            Node::Sin(u) => u.resolve_signs(at).sin(),
            Node::Cos(u) => u.resolve_signs(at).cos(),
        }
    }

    fn map_rat(&self, f: &dyn Fn(&RatFun) -> RatFun) -> Expr {
        match self.node() {
            Node::Rat(r) => Expr::rat(f(r)),
            Node::Add(ts) => Expr::add(ts.iter().map(|e| e.map_rat(f)).collect()),
            Node::Mul(ts) => Expr::mul(ts.iter().map(|e| e.map_rat(f)).collect()),
            Node::Pow(b, n) => b.map_rat(f).pow(*n),
            Node::RPow(b, q) => b.map_rat(f).rpow_unchecked(q.clone()),
            Node::Abs(u) => u.map_rat(f).abs(),
            Node::Sgn(u) => u.map_rat(f).sgn(),
            Node::Exp(u) => u.map_rat(f).exp(),
            Node::Sin(u) => u.map_rat(f).sin(),
            Node::Cos(u) => u.map_rat(f).cos(),
        }
    }
}

fn exp_to_i64(q: &Rational) -> Result<i64, Error> {
    num_traits::ToPrimitive::to_i64(&q.to_integer())
        .ok_or_else(|| Error::Unsupported(format!("exponent {q} too large")))
}

impl From<RatFun> for Expr {
    fn from(r: RatFun) -> Self {
        Expr::rat(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::rat;

    fn abs_t() -> Expr {
        Expr::t().abs()
    }

    #[test]
    fn rational_parts_collapse() {
        let e = Expr::add(vec![Expr::t(), Expr::mul(vec![Expr::t(), Expr::t()])]);
        assert_eq!(e, Expr::rat(RatFun::poly(UniPoly::from_ints(&[0, 1, 1]))));
        let h = abs_t();
        assert!(Expr::add(vec![h.clone(), h.neg()]).is_zero());
    }

    #[test]
    fn derivative_of_abs_power() {
        let e = abs_t().rpow(rat(3, 2)).unwrap();
        let d = e.diff();
        let expected = Expr::mul(vec![
            Expr::constant(rat(3, 2)),
            abs_t().rpow(rat(1, 2)).unwrap(),
            Expr::t().sgn(),
        ]);
        assert_eq!(d, expected);
        // finite-difference oracle at +-1/2
        for &x in &[-0.5f64, 0.5] {
            let h = 1e-6;
            let fd = (e.eval_f64(x + h) - e.eval_f64(x - h)) / (2.0 * h);
            assert!((fd - d.eval_f64(x)).abs() < 1e-8);
        }
    }

    #[test]
    fn elementary_derivatives() {
        assert_eq!(Expr::t().sin().diff(), Expr::t().cos());
        let inv_t = RatFun::t().inv().unwrap();
        let e = Expr::rat(-&inv_t).exp();
        let expected = Expr::mul(vec![Expr::rat(&inv_t * &inv_t), e.clone()]);
        assert_eq!(e.diff(), expected);
    }

    #[test]
    fn non_integer_power_needs_abs() {
        assert!(Expr::t().rpow(rat(1, 2)).is_err());
        assert!(Expr::t().exp().rpow(rat(1, 2)).is_ok());
        assert_eq!(Expr::constant(rat(9, 4)).rpow(rat(1, 2)).unwrap(), Expr::constant(rat(3, 2)));
    }

    #[test]
    fn exact_evaluation() {
        let e = Expr::mul(vec![Expr::t(), abs_t().rpow(rat(3, 2)).unwrap()]);
        assert_eq!(e.eval_exact(&int(4)), Some(int(32)));
        assert_eq!(e.eval_exact(&int(2)), None);
    }
}
