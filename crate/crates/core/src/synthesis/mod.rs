//! Constructive continuation and steering for right-invertible systems:
//! a flat cutoff function, extension of solutions past their interval,
//! and steering between solutions with certified junctions.

mod certificate;
mod continuation;
mod steering;

pub use certificate::{Certificate, Junction, PieceResidual};
pub use continuation::{continue_solution, Branch, Continuation};
pub use steering::{steer, steer_to_zero, Steering};

use num_traits::One;

use crate::behaviour::{require_right_invertible, singular_system_set};
use crate::field::{int, pow2_inv, RatFun, Rational, SingularSet, UniPoly};
use crate::orematrix::{tn_form, OreMatrix, TnForm};
use crate::trajectory::{Expr, Piece, Trajectory};
use crate::Error;

/// A right-invertible system with its verified factorization and singular set.
#[derive(Clone, Debug)]
pub struct System {
    pub r: OreMatrix,
    pub form: TnForm,
    pub singular: SingularSet,
}

impl System {
    pub fn new(r: OreMatrix) -> Result<System, Error> {
        let form = tn_form(&r);
        System::with_form(r, form)
    }

    pub fn with_form(r: OreMatrix, form: TnForm) -> Result<System, Error> {
        form.verify(&r)?;
        require_right_invertible(&r, &form)?;
        let singular = singular_system_set(&form);
        Ok(System { r, form, singular })
    }

    /// Number of equations; components `0..m` of `Vinv w` vanish on solutions.
    pub fn m(&self) -> usize {
        self.r.rows()
    }

    pub fn n(&self) -> usize {
        self.r.cols()
    }

    /// Largest operator degree among `R`, `V` and `Vinv`.
    pub(crate) fn degree(&self) -> usize {
        [&self.r, &self.form.v, &self.form.vinv]
            .iter()
            .filter_map(|m| m.degree().finite())
            .max()
            .unwrap_or(0)
    }
}

/// Candidate step sizes `2^-k`, `k = 1..=max_halvings`; the largest one
/// satisfying every constraint wins.
#[derive(Clone, Copy, Debug)]
pub struct EpsilonPolicy {
    pub max_halvings: u32,
}

impl Default for EpsilonPolicy {
    fn default() -> Self {
        EpsilonPolicy { max_halvings: 40 }
    }
}

impl EpsilonPolicy {
    /// Largest `eps` with `eps <= limit`, `ok(eps)`, and no point of
    /// `singular` in `(b, b + 2 eps]` (`dir > 0`) or `[b - 2 eps, b)`.
    pub fn choose(
        &self,
        singular: &SingularSet,
        b: &Rational,
        dir: i32,
        limit: &Rational,
        ok: impl Fn(&Rational) -> bool,
    ) -> Result<Rational, Error> {
        for k in 1..=self.max_halvings {
            let eps = pow2_inv(k);
            if &eps > limit {
                continue;
            }
            let reach = b + int(2 * dir as i64) * &eps;
            let clear = if dir > 0 {
                singular.avoids_half_open(b, &reach)
            } else {
                avoids_left_open(singular, &reach, b)
            };
            if clear && ok(&eps) {
                return Ok(eps);
            }
        }
        Err(Error::Domain(format!(
            "no step 2^-k with k <= {} fits at t = {b} (limit {limit})",
            self.max_halvings
        )))
    }
}

/// No point in `[lo, hi)`.
fn avoids_left_open(set: &SingularSet, lo: &Rational, hi: &Rational) -> bool {
    let rest = SingularSet {
        points: set.points.iter().filter(|p| p.interval.exact() != Some(hi)).cloned().collect(),
    };
    rest.avoids_closed(lo, hi)
}

/// `sigma(x) = exp(-1/x)` composed with an affine map, as an expression
/// valid for `x > 0`.
fn sigma_of(x: RatFun) -> Expr {
    Expr::rat(-x.inv().expect("nonzero argument")).exp()
}

/// The cutoff on `[x0, x1]`: `1` at `x0`, `0` at `x1`, flat at both ends.
pub fn smooth_step_expr(x0: &Rational, x1: &Rational) -> Expr {
    let w = x1 - x0;
    let lin = |c0: Rational, c1: Rational| RatFun::poly(UniPoly::new(vec![c0 / &w, c1 / &w]));
    let a = sigma_of(lin(x1.clone(), -Rational::one()));
    let b = sigma_of(lin(-x0.clone(), Rational::one()));
    Expr::mul(vec![a.clone(), Expr::add(vec![a, b]).recip()])
}

/// Scalar trajectory on `[lo, hi]`: `1` left of `x0`, the cutoff on
/// `[x0, x1]`, `0` right of `x1`.
pub fn smooth_step(x0: &Rational, x1: &Rational, lo: &Rational, hi: &Rational) -> Result<Trajectory, Error> {
    if x0 >= x1 {
        return Err(Error::Domain(format!("smooth step needs x0 < x1, got {x0} >= {x1}")));
    }
    if lo > x0 || hi < x1 {
        return Err(Error::Domain(format!("[{lo}, {hi}] does not enclose [{x0}, {x1}]")));
    }
    let mut pieces = Vec::new();
    if lo < x0 {
        pieces.push(Piece::new(lo.clone(), x0.clone(), vec![Expr::one()])?);
    }
    pieces.push(Piece::new(x0.clone(), x1.clone(), vec![smooth_step_expr(x0, x1)])?);
    if x1 < hi {
        pieces.push(Piece::new(x1.clone(), hi.clone(), vec![Expr::zero()])?);
    }
    Trajectory::new(pieces)
}
