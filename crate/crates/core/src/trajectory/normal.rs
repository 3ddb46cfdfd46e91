//! Canonical form of an expression on an open interval free of its
//! singularities, used as the exact zero test.
//!
//! On such an interval `abs` and `sgn` of a rational function are fixed
//! signs, so every expression becomes a sum of monomials
//! `c(t) * prod b_i^(q_i) * e^r * exp(A) * (trig and opaque factors)`,
//! where the `b_i` form a coprime basis of square-free polynomials
//! oriented positive on the interval, each `q_i` lies in `(0, 1)` and the
//! coefficient `c(t)` absorbs the integer parts. Distinct radical monomials
//! are linearly independent over Q(t), so a sum cancelling to nothing is
//! the zero function; the converse fails only for identities the form does
//! not know (e.g. `sin^2 + cos^2 = 1`), which the caller handles numerically.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::expr::{Expr, Node};
use crate::field::{int, RatFun, Rational, UniPoly};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Atom {
    /// Integer `> 1`, treated as prime (trial division leaves large cofactors).
    Prime(BigInt),
    /// Primitive square-free polynomial, positive on the interval.
    Root(UniPoly),
    /// Euler's number.
    E,
    /// `exp` of a sum without constant part; always to the first power.
    Exp(Sum),
    Sin(Sum),
    Cos(Sum),
    /// A sum that does not distribute (negative powers), scaled so its
    /// first coefficient is 1.
    Sum(Sum),
    Opaque(Expr),
}

impl Atom {
    fn is_positive(&self) -> bool {
        matches!(self, Atom::Prime(_) | Atom::Root(_) | Atom::E | Atom::Exp(_))
    }

    fn has_radical_exponent(&self) -> bool {
        matches!(self, Atom::Prime(_) | Atom::Root(_) | Atom::E)
    }
}

type Mono = BTreeMap<Atom, Rational>;

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
struct Sum(BTreeMap<Mono, RatFun>);

impl Sum {
    fn term(c: RatFun, m: Mono) -> Sum {
        let mut s = Sum::default();
        if !c.is_zero() {
            s.0.insert(m, c);
        }
        s
    }

    fn rat(c: RatFun) -> Sum {
        Sum::term(c, Mono::new())
    }

    fn single(&self) -> Option<(&Mono, &RatFun)> {
        if self.0.len() == 1 {
            self.0.iter().next()
        } else {
            None
        }
    }

    fn add_term(&mut self, m: Mono, c: RatFun) {
        if c.is_zero() {
            return;
        }
        match self.0.get_mut(&m) {
            Some(acc) => {
                *acc = &*acc + &c;
                if acc.is_zero() {
                    self.0.remove(&m);
                }
            }
            None => {
                self.0.insert(m, c);
            }
        }
    }

    fn add(mut self, o: &Sum) -> Sum {
        for (m, c) in &o.0 {
            self.add_term(m.clone(), c.clone());
        }
        self
    }

    fn scale(&self, c: &RatFun) -> Sum {
        let mut out = Sum::default();
        for (m, x) in &self.0 {
            out.add_term(m.clone(), x * c);
        }
        out
    }

    fn neg(&self) -> Sum {
        self.scale(&RatFun::constant(int(-1)))
    }

    fn mul(&self, o: &Sum) -> Sum {
        let mut out = Sum::default();
        for (ma, ca) in &self.0 {
            for (mb, cb) in &o.0 {
                let (f, m) = mono_mul(ma, mb);
                out.add_term(m, &(ca * cb) * &f);
            }
        }
        out
    }

    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }
}

/// Moves integer parts of radical exponents into a rational factor.
fn mono_normalize(m: Mono) -> (RatFun, Mono) {
    let mut factor = RatFun::one();
    let mut out = Mono::new();
    for (a, x) in m {
        if x.is_zero() {
            continue;
        }
        let base = match &a {
            Atom::Prime(p) => RatFun::constant(Rational::from_integer(p.clone())),
            Atom::Root(b) => RatFun::poly(b.clone()),
            _ => {
                out.insert(a, x);
                continue;
            }
        };
        let fl = x.floor();
        let k = fl.to_integer().to_i64().expect("small exponent");
        if k != 0 {
            factor = &factor * &base.pow(k).expect("nonzero base");
        }
        let rest = x - fl;
        if !rest.is_zero() {
            out.insert(a, rest);
        }
    }
    (factor, out)
}

fn mono_mul(a: &Mono, b: &Mono) -> (RatFun, Mono) {
    let mut m = a.clone();
    let mut exp_arg: Option<Sum> = None;
    for (atom, x) in m.iter() {
        if let Atom::Exp(s) = atom {
            debug_assert!(x.is_one());
            exp_arg = Some(s.clone());
        }
    }
    m.retain(|k, _| !matches!(k, Atom::Exp(_)));
    for (atom, x) in b {
        if let Atom::Exp(s) = atom {
            exp_arg = Some(match exp_arg {
                Some(e) => e.add(s),
                None => s.clone(),
            });
            continue;
        }
        let v = m.entry(atom.clone()).or_insert_with(Rational::zero);
        *v += x;
    }
    m.retain(|_, x| !x.is_zero());
    if let Some(s) = exp_arg {
        if !s.is_zero() {
            m.insert(Atom::Exp(s), Rational::one());
        }
    }
    mono_normalize(m)
}

/// `m^q`; `None` when a non-radical atom would get a fractional exponent.
fn mono_pow(m: &Mono, q: &Rational) -> Option<(RatFun, Mono)> {
    let mut out = Mono::new();
    for (a, x) in m {
        match a {
            Atom::Exp(s) => {
                let arg = s.scale(&RatFun::constant(q.clone()));
                out.insert(Atom::Exp(arg), Rational::one());
            }
            _ => {
                let y = x * q;
                if !a.has_radical_exponent() && !y.is_integer() {
                    return None;
                }
                out.insert(a.clone(), y);
            }
        }
    }
    Some(mono_normalize(out))
}

fn trial_factor(mut n: BigInt) -> Vec<(BigInt, u32)> {
    let mut out = Vec::new();
    let mut p = BigInt::from(2);
    let limit = BigInt::from(10_000);
    while n > BigInt::one() && p <= limit {
        let mut k = 0;
        while (&n % &p).is_zero() {
            n /= &p;
            k += 1;
        }
        if k > 0 {
            out.push((p.clone(), k));
        }
        p += 1;
    }
    if n > BigInt::one() {
        out.push((n, 1));
    }
    out
}

/// A radicand or sign that vanishes at the probe point: the interval is not
/// singularity-free after all, so the canonical form does not apply.
struct Unnormalizable;

struct Normalizer {
    mid: Rational,
    /// Coprime basis, oriented positive on the interval.
    basis: Vec<UniPoly>,
}

impl Normalizer {
    fn new(lo: &Rational, hi: &Rational, e: &Expr) -> Result<Normalizer, Unnormalizable> {
        let mid = (lo + hi) / int(2);
        let mut radicands = Vec::new();
        collect_radicands(e, &mut radicands);
        let mut basis: Vec<UniPoly> = Vec::new();
        for u in &radicands {
            for p in [u.num(), u.den()] {
                for (f, _) in p.squarefree_decomposition() {
                    if !f.is_constant() {
                        insert_coprime(&mut basis, f.monic());
                    }
                }
            }
        }
        let mut oriented = Vec::with_capacity(basis.len());
        for b in basis {
            let (c, _) = b.content_and_primitive();
            let prim = b.scale(&c.recip());
            match prim.sign_at(&mid) {
                0 => return Err(Unnormalizable),
                s if s < 0 => oriented.push(-&prim),
                _ => oriented.push(prim),
            }
        }
        Ok(Normalizer { mid, basis: oriented })
    }

    fn sign(&self, r: &RatFun) -> Result<i32, Unnormalizable> {
        match r.eval(&self.mid) {
            Ok(v) if !v.is_zero() => Ok(crate::field::sign_of(&v)),
            _ => Err(Unnormalizable),
        }
    }

    /// `|u|^q` for a rational function without zeros or poles on the interval.
    fn radical(&self, u: &RatFun, q: &Rational) -> Result<Sum, Unnormalizable> {
        let v = if self.sign(u)? < 0 { -u } else { u.clone() };
        let mut m = Mono::new();
        let mut rest = [v.num().clone(), v.den().clone()];
        for b in &self.basis {
            for (i, part) in rest.iter_mut().enumerate() {
                loop {
                    let (quo, rem) = part.div_rem(b);
                    if !rem.is_zero() {
                        break;
                    }
                    *part = quo;
                    let e = m.entry(Atom::Root(b.clone())).or_insert_with(Rational::zero);
                    *e += if i == 0 { q.clone() } else { -q.clone() };
                }
            }
        }
        if !rest[0].is_constant() || !rest[1].is_constant() {
            return Err(Unnormalizable);
        }
        let c = rest[0].lc() / rest[1].lc();
        if !c.is_positive() {
            return Err(Unnormalizable);
        }
        for (p, k) in trial_factor(c.numer().clone()) {
            *m.entry(Atom::Prime(p)).or_insert_with(Rational::zero) += q * int(k as i64);
        }
        for (p, k) in trial_factor(c.denom().clone()) {
            *m.entry(Atom::Prime(p)).or_insert_with(Rational::zero) -= q * int(k as i64);
        }
        m.retain(|_, x| !x.is_zero());
        let (f, m) = mono_normalize(m);
        Ok(Sum::term(f, m))
    }

    fn opaque(e: &Expr) -> Sum {
        Sum::term(RatFun::one(), Mono::from([(Atom::Opaque(e.clone()), Rational::one())]))
    }

    fn norm(&self, e: &Expr) -> Result<Sum, Unnormalizable> {
        Ok(match e.node() {
            Node::Rat(r) => Sum::rat(r.clone()),
            Node::Add(ts) => {
                let mut acc = Sum::default();
                for t in ts {
                    acc = acc.add(&self.norm(t)?);
                }
                acc
            }
            Node::Mul(fs) => {
                let mut acc = Sum::rat(RatFun::one());
                for f in fs {
                    acc = acc.mul(&self.norm(f)?);
                    if acc.is_zero() {
                        break;
                    }
                }
                acc
            }
            Node::Pow(b, n) => self.int_pow(&self.norm(b)?, *n, e),
            Node::RPow(b, q) => match b.node() {
                Node::Abs(u) if u.as_rat().is_some() => self.radical(u.as_rat().unwrap(), q)?,
                _ => {
                    let s = self.norm(b)?;
                    match s.single() {
                        Some((m, c)) if c.as_constant().is_some_and(|c| c.is_positive()) => {
                            let c = c.as_constant().unwrap();
                            match mono_pow(m, q) {
                                Some((f, m)) => {
                                    let cq = self.radical(&RatFun::constant(c), q)?;
                                    cq.mul(&Sum::term(f, m))
                                }
                                None => Self::opaque(e),
                            }
                        }
                        _ => Self::opaque(e),
                    }
                }
            },
            Node::Abs(u) => match u.as_rat() {
                Some(r) => Sum::rat(if self.sign(r)? < 0 { -r } else { r.clone() }),
                None => {
                    let s = self.norm(u)?;
                    match s.single() {
                        Some((m, c)) if m.keys().all(Atom::is_positive) => {
                            let c = if self.sign(c)? < 0 { -c } else { c.clone() };
                            Sum::term(c, m.clone())
                        }
                        _ => Self::opaque(e),
                    }
                }
            },
            Node::Sgn(u) => {
                let s = self.norm(u)?;
                if s.is_zero() {
                    return Ok(Sum::default());
                }
                match s.single() {
                    Some((m, c)) if m.keys().all(Atom::is_positive) => {
                        Sum::rat(RatFun::constant(int(self.sign(c)? as i64)))
                    }
                    _ => Self::opaque(e),
                }
            }
            Node::Exp(u) => {
                let mut s = self.norm(u)?;
                let mut m = Mono::new();
                if let Some(r) = s.0.get(&Mono::new()).cloned() {
                    let (quo, _) = r.num().div_rem(r.den());
                    let c = quo.coeff(0);
                    if !c.is_zero() {
                        s.add_term(Mono::new(), RatFun::constant(-c.clone()));
                        m.insert(Atom::E, c);
                    }
                }
                if !s.is_zero() {
                    m.insert(Atom::Exp(s), Rational::one());
                }
                Sum::term(RatFun::one(), m)
            }
            Node::Sin(u) => {
                let s = self.norm(u)?;
                let (neg, s) = orient(s);
                let c = RatFun::constant(int(if neg { -1 } else { 1 }));
                Sum::term(c, Mono::from([(Atom::Sin(s), Rational::one())]))
            }
            Node::Cos(u) => {
                let (_, s) = orient(self.norm(u)?);
                Sum::term(RatFun::one(), Mono::from([(Atom::Cos(s), Rational::one())]))
            }
        })
    }

    fn int_pow(&self, s: &Sum, n: i64, e: &Expr) -> Sum {
        if let Some((m, c)) = s.single() {
            if let (Ok(cn), Some((f, m))) = (c.pow(n), mono_pow(m, &int(n))) {
                return Sum::term(&cn * &f, m);
            }
        }
        if s.is_zero() {
            return if n > 0 { Sum::default() } else { Self::opaque(e) };
        }
        if (1..=6).contains(&n) {
            let mut acc = s.clone();
            for _ in 1..n {
                acc = acc.mul(s);
            }
            return acc;
        }
        // c * S' with S' starting with coefficient 1
        let lead = s.0.values().next().expect("nonzero").clone();
        let inv = lead.inv().expect("nonzero");
        let unit = s.scale(&inv);
        let cn = lead.pow(n).expect("nonzero");
        Sum::term(cn, Mono::from([(Atom::Sum(unit), int(n))]))
    }
}

/// Flips the sign so the first coefficient has a positive leading term.
fn orient(s: Sum) -> (bool, Sum) {
    match s.0.values().next() {
        Some(c) if c.num().lc().is_negative() => (true, s.neg()),
        _ => (false, s),
    }
}

fn collect_radicands(e: &Expr, out: &mut Vec<RatFun>) {
    if let Node::RPow(b, _) = e.node() {
        if let Node::Abs(u) = b.node() {
            if let Some(r) = u.as_rat() {
                out.push(r.clone());
            }
        }
    }
    for c in e.children() {
        collect_radicands(c, out);
    }
}

/// Inserts a monic square-free `x` into a list of pairwise coprime monic
/// square-free polynomials, splitting shared factors.
fn insert_coprime(basis: &mut Vec<UniPoly>, mut x: UniPoly) {
    let mut added = Vec::new();
    let mut i = 0;
    while i < basis.len() && !x.is_constant() {
        let g = x.gcd(&basis[i]);
        if g.is_constant() {
            i += 1;
            continue;
        }
        let b = basis.swap_remove(i);
        let rest = b.exact_div(&g);
        if !rest.is_constant() {
            added.push(rest.monic());
        }
        x = x.exact_div(&g).monic();
        added.push(g);
    }
    if !x.is_constant() {
        basis.push(x);
    }
    basis.extend(added);
}

/// Whether `e` is identically zero on `(lo, hi)`, decided by the canonical
/// form. `false` means "not shown to vanish", not "nonzero".
pub(crate) fn vanishes_on(e: &Expr, lo: &Rational, hi: &Rational) -> bool {
    if e.is_zero() {
        return true;
    }
    let Ok(n) = Normalizer::new(lo, hi, e) else { return false };
    n.norm(e).is_ok_and(|s| s.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::rat;
    use crate::syntax::parse_expr;

    fn zero_on(s: &str, lo: Rational, hi: Rational) -> bool {
        vanishes_on(&parse_expr(s).unwrap(), &lo, &hi)
    }

    #[test]
    fn puiseux_cancellation_on_each_half_axis() {
        let f = parse_expr("abs(t)^(3/2)").unwrap();
        let r = crate::syntax::parse_ore("t^4*D^2 + 4*t^3*D + t^2").unwrap();
        let res = Expr::add(vec![r.apply(&f), parse_expr("-31/4*t^2*abs(t)^(3/2)").unwrap()]);
        assert!(!res.is_zero());
        assert!(vanishes_on(&res, &int(-1), &int(0)));
        assert!(vanishes_on(&res, &int(0), &int(1)));
    }

    #[test]
    fn radicals_over_a_coprime_basis() {
        // |t^2 - t|^(1/2) = |t|^(1/2) |t - 1|^(1/2) on (0, 1)
        assert!(zero_on("abs(t^2 - t)^(1/2) - abs(t)^(1/2)*abs(t - 1)^(1/2)", int(0), int(1)));
        assert!(zero_on("abs(4*t)^(1/2) - 2*abs(t)^(1/2)", int(1), int(2)));
        assert!(zero_on("abs(t)^(1/2)*abs(t)^(1/2) - t", int(1), int(2)));
        assert!(!zero_on("abs(t)^(1/2)*abs(t)^(1/2) - t", int(-2), int(-1)));
        assert!(zero_on("abs(2*t)^(1/2)*abs(3*t)^(1/2) - pow(6, 1/2)*abs(t)", rat(1, 2), int(1)));
    }

    #[test]
    fn exponentials_and_signs() {
        assert!(zero_on("exp(t + 1)*exp(-t) - exp(1)", int(0), int(1)));
        assert!(zero_on("exp(2*t)^-1*exp(t)^2 - 1", int(0), int(1)));
        assert!(zero_on("sgn(t)*abs(t) - t", int(-1), int(0)));
        assert!(zero_on("sin(-t) + sin(t)", int(0), int(1)));
        assert!(!zero_on("sin(t)^2 + cos(t)^2 - 1", int(0), int(1)));
        assert!(!zero_on("exp(t) - 1", int(0), int(1)));
    }
}
