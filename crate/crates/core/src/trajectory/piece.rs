//! Pieces: expressions on a closed interval whose interior avoids every
//! pole, kink and jump of the expressions.

use super::expr::{Expr, Node};
use crate::field::{int, Rational, SingularKind, SingularSet, UniPoly};
use crate::Error;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Piece {
    lo: Rational,
    hi: Rational,
    comps: Vec<Expr>,
}

impl Piece {
    /// Checks `lo < hi` and that no component is singular inside `(lo, hi)`;
    /// `sgn` and bare `abs` of rational functions are replaced by their
    /// (constant-sign) values on the piece.
    pub fn new(lo: Rational, hi: Rational, comps: Vec<Expr>) -> Result<Piece, Error> {
        if lo >= hi {
            return Err(Error::InvalidPiece(format!("empty interval [{lo}, {hi}]")));
        }
        if comps.is_empty() {
            return Err(Error::InvalidPiece("no components".into()));
        }
        for e in &comps {
            if let Some(c) = singular_points(e, &lo, &hi)?.first() {
                return Err(Error::InvalidPiece(format!(
                    "{e} is singular at t = {c}, inside ({lo}, {hi}); split the piece there"
                )));
            }
        }
        let mid = (&lo + &hi) / int(2);
        let comps = comps.iter().map(|e| e.resolve_signs(&mid)).collect();
        Ok(Piece { lo, hi, comps })
    }

    /// For sub-intervals and combinations of already valid pieces.
    pub(crate) fn new_unchecked(lo: Rational, hi: Rational, comps: Vec<Expr>) -> Piece {
        debug_assert!(lo < hi);
        Piece { lo, hi, comps }
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn components(&self) -> &[Expr] {
        &self.comps
    }

    pub(crate) fn clip(&self, lo: &Rational, hi: &Rational) -> Piece {
        let lo = lo.max(&self.lo).clone();
        let hi = hi.min(&self.hi).clone();
        Piece::new_unchecked(lo, hi, self.comps.clone())
    }

    pub(crate) fn contains_open(&self, t: &Rational) -> bool {
        &self.lo < t && t < &self.hi
    }
}

/// Rational points inside `(lo, hi)` where `e` may fail to be smooth.
/// Irrational such points, and expressions whose zero set cannot be
/// certified (e.g. `1/sin(t)`), are errors: pieces need rational endpoints.
pub fn singular_points(e: &Expr, lo: &Rational, hi: &Rational) -> Result<Vec<Rational>, Error> {
    let mut polys = Vec::new();
    critical(e, &mut polys)?;
    let set = SingularSet::from_sources(&polys.into_iter().map(|p| (p, SingularKind::Pole)).collect::<Vec<_>>());
    let (points, irrational) = set.points_in_open(lo, hi);
    if irrational {
        return Err(Error::InvalidPiece(format!(
            "{e} is singular at an irrational point of ({lo}, {hi}); pieces need rational endpoints"
        )));
    }
    Ok(points)
}

/// Polynomials whose real roots cover the singular points of `e`.
fn critical(e: &Expr, out: &mut Vec<UniPoly>) -> Result<(), Error> {
    match e.node() {
        Node::Rat(r) => out.push(r.den().clone()),
        Node::Pow(b, n) => {
            if *n < 0 {
                zeros(b, out)?;
            }
        }
        Node::RPow(b, _) | Node::Abs(b) | Node::Sgn(b) => zeros(b, out)?,
        _ => {}
    }
    for c in e.children() {
        critical(c, out)?;
    }
    Ok(())
}

/// Polynomials whose roots cover the zeros of `e` (its own poles are found
/// by [`critical`]).
fn zeros(e: &Expr, out: &mut Vec<UniPoly>) -> Result<(), Error> {
    if e.is_structurally_positive() {
        return Ok(());
    }
    match e.node() {
        Node::Rat(r) => out.push(r.num().clone()),
        Node::Abs(u) | Node::Sgn(u) | Node::RPow(u, _) => zeros(u, out)?,
        Node::Pow(b, n) => {
            if *n > 0 {
                zeros(b, out)?;
            }
        }
        Node::Mul(fs) => {
            for f in fs {
                zeros(f, out)?;
            }
        }
        Node::Exp(_) => {}
        Node::Add(_) | Node::Sin(_) | Node::Cos(_) => {
            return Err(Error::Unsupported(format!("cannot locate the zeros of {e}")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::rat;
    use crate::syntax::parse_expr;

    fn pts(s: &str, lo: i64, hi: i64) -> Result<Vec<Rational>, Error> {
        singular_points(&parse_expr(s).unwrap(), &int(lo), &int(hi))
    }

    #[test]
    fn kinks_poles_and_jumps() {
        assert_eq!(pts("abs(t)^(3/2)", -1, 1).unwrap(), vec![int(0)]);
        assert_eq!(pts("sgn(2*t - 1) + t^-1", -1, 1).unwrap(), vec![int(0), rat(1, 2)]);
        assert_eq!(pts("exp(-t^-2)", 1, 2).unwrap(), Vec::<Rational>::new());
        assert!(pts("abs(t^2 - 2)", 0, 2).is_err());
        assert!(pts("sin(t)^-1", 1, 2).is_err());
        assert_eq!(pts("(exp(t) + 1)^-1", -1, 1).unwrap(), Vec::<Rational>::new());
    }

    #[test]
    fn construction_rejects_interior_singularities() {
        let e = parse_expr("abs(t)").unwrap();
        assert!(Piece::new(int(-1), int(1), vec![e.clone()]).is_err());
        assert!(Piece::new(int(0), int(1), vec![e.clone()]).is_ok());
        assert!(Piece::new(int(1), int(1), vec![e]).is_err());
    }
}
