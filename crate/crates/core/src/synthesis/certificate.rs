use std::fmt;

use crate::field::Rational;
use crate::orematrix::OreMatrix;
use crate::trajectory::{Order, Side, Trajectory, ZeroVerdict, K_MAX};
use crate::Error;

/// Jet comparison across one breakpoint of an assembled trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct Junction {
    pub point: Rational,
    /// Highest order compared (`None`: only `L = -1` was required).
    pub order: Option<u32>,
    /// All compared jet values were exact rationals and equal.
    pub exact: bool,
    /// Largest difference between left and right values.
    pub max_deviation: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PieceResidual {
    pub lo: Rational,
    pub hi: Rational,
    pub verdict: ZeroVerdict,
}

/// Machine-checkable evidence for a synthesized trajectory: the step sizes
/// used, every junction's jet comparison, and the residual per piece.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Certificate {
    pub steps: Vec<(String, Rational)>,
    pub junctions: Vec<Junction>,
    pub residual: Vec<PieceResidual>,
    pub notes: Vec<String>,
}

impl Certificate {
    pub fn residual_exact(&self) -> bool {
        self.residual.iter().all(|r| r.verdict == ZeroVerdict::ExactZero)
    }

    pub fn max_deviation(&self) -> f64 {
        self.junctions.iter().map(|j| j.max_deviation).fold(0.0, f64::max)
    }

    /// Compares jets across `point` up to `order` (capped at `K_MAX` for
    /// `L = inf`); fails if any order disagrees beyond `1e-9`.
    pub(crate) fn check_junction(&mut self, w: &Trajectory, point: &Rational, l: Order) -> Result<(), Error> {
        let Some(order) = l.checked_orders(K_MAX) else {
            self.junctions.push(Junction { point: point.clone(), order: None, exact: true, max_deviation: 0.0 });
            return Ok(());
        };
        let left = w.jet(point, order, Side::Left)?;
        let right = w.jet(point, order, Side::Right)?;
        let mut exact = true;
        let mut dev = 0.0f64;
        for (lj, rj) in left.iter().zip(&right) {
            for (k, (a, b)) in lj.values.iter().zip(&rj.values).enumerate() {
                if !a.agrees(b, 1e-9) {
                    return Err(Error::Verification(format!(
                        "jets at t = {point} differ at order {k}: {a} (left) vs {b} (right)"
                    )));
                }
                exact &= a.is_exact() && b.is_exact();
                dev = dev.max((a.to_f64() - b.to_f64()).abs());
            }
        }
        self.junctions.push(Junction { point: point.clone(), order: Some(order), exact, max_deviation: dev });
        Ok(())
    }

    /// Residual of `r` on every piece of `w`; any nonzero piece is an error.
    pub(crate) fn check_residual(&mut self, r: &OreMatrix, w: &Trajectory, tol: &Rational) -> Result<(), Error> {
        let res = w.apply(r)?;
        for p in res.pieces() {
            let single = Trajectory::new(vec![p.clone()])?;
            let verdict = single.is_zero(tol);
            if !verdict.is_zero() {
                return Err(Error::Verification(format!("residual on [{}, {}]: {verdict}", p.lo(), p.hi())));
            }
            self.residual.push(PieceResidual { lo: p.lo().clone(), hi: p.hi().clone(), verdict });
        }
        Ok(())
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "certificate:")?;
        for (name, v) in &self.steps {
            writeln!(f, "  step {name} = {v}")?;
        }
        for j in &self.junctions {
            match j.order {
                None => writeln!(f, "  junction t = {}: no jet condition (L = -1)", j.point)?,
                Some(k) => writeln!(
                    f,
                    "  junction t = {}: jets agree to order {k} ({}, max deviation {:.1e})",
                    j.point,
                    if j.exact { "exact" } else { "numeric" },
                    j.max_deviation
                )?,
            }
        }
        for r in &self.residual {
            writeln!(f, "  residual [{}, {}]: {}", r.lo, r.hi, r.verdict)?;
        }
        for n in &self.notes {
            writeln!(f, "  note: {n}")?;
        }
        Ok(())
    }
}
