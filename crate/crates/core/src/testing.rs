//! Seeded random generators shared by the property and acceptance tests.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::field::{int, rat, RatFun, Rational, UniPoly};
use crate::ore::OrePoly;
use crate::orematrix::OreMatrix;
use crate::synthesis::System;
use crate::trajectory::{Expr, Piece, Trajectory};

fn small_int<R: Rng>(rng: &mut R, bound: i64) -> Rational {
    int(rng.gen_range(-bound..=bound))
}

/// Polynomial with integer coefficients in `[-bound, bound]`.
pub fn poly<R: Rng>(rng: &mut R, max_deg: usize, bound: i64) -> UniPoly {
    let d = rng.gen_range(0..=max_deg);
    UniPoly::new((0..=d).map(|_| small_int(rng, bound)).collect())
}

/// Random element of Q(t); the denominator is nonzero.
pub fn ratfun<R: Rng>(rng: &mut R, max_deg: usize, bound: i64) -> RatFun {
    let num = poly(rng, max_deg, bound);
    let mut den = poly(rng, max_deg, bound);
    while den.is_zero() {
        den = poly(rng, max_deg, bound);
    }
    RatFun::new(num, den).expect("nonzero denominator")
}

/// Random operator with polynomial coefficients of degree `<= coeff_deg`.
pub fn ore_poly<R: Rng>(rng: &mut R, max_deg: usize, coeff_deg: usize) -> OrePoly {
    let d = rng.gen_range(0..=max_deg);
    OrePoly::new((0..=d).map(|_| RatFun::poly(poly(rng, coeff_deg, 3))).collect())
}

pub fn nonzero_ore_poly<R: Rng>(rng: &mut R, max_deg: usize, coeff_deg: usize) -> OrePoly {
    loop {
        let p = ore_poly(rng, max_deg, coeff_deg);
        if !p.is_zero() {
            return p;
        }
    }
}

/// Random matrix with sparse entries (about a third are zero).
pub fn ore_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize, max_deg: usize, coeff_deg: usize) -> OreMatrix {
    let entries = (0..rows * cols)
        .map(|_| {
            if rng.gen_bool(0.3) {
                OrePoly::zero()
            } else {
                ore_poly(rng, max_deg, coeff_deg)
            }
        })
        .collect();
    OreMatrix::new(rows, cols, entries).expect("dimensions")
}

/// An expression smooth inside `(lo, hi)`, possibly singular at `lo`.
pub fn piece_expr<R: Rng>(rng: &mut R, lo: &Rational) -> Expr {
    let shifted = Expr::shifted_t(lo);
    let p = Expr::rat(RatFun::poly(poly(rng, 2, 3)));
    match rng.gen_range(0..6) {
        0 | 1 => p,
        2 => {
            let q = Rational::new(rng.gen_range(1..=7).into(), rng.gen_range(1..=3).into());
            Expr::mul(vec![p, shifted.abs().rpow(q).expect("abs base")])
        }
        3 => Expr::mul(vec![p, Expr::t().exp()]),
        4 => Expr::add(vec![p, Expr::t().sin()]),
        _ => Expr::mul(vec![p, shifted.sgn()]),
    }
}

/// Random trajectory on `[-2, 2]` with up to `max_pieces` pieces whose
/// breakpoints are multiples of `1/4`.
pub fn trajectory<R: Rng>(rng: &mut R, n: usize, max_pieces: usize) -> Trajectory {
    let k = rng.gen_range(1..=max_pieces);
    let mut cuts: Vec<i64> = (-7..=7).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<i64> = cuts.into_iter().take(k - 1).collect();
    cuts.sort();
    let mut ends = vec![-8i64];
    ends.extend(cuts);
    ends.push(8);
    let pieces = ends
        .windows(2)
        .map(|w| {
            let lo = rat(w[0], 4);
            let hi = rat(w[1], 4);
            let comps = (0..n).map(|_| piece_expr(rng, &lo)).collect();
            Piece::new(lo, hi, comps).expect("smooth inside")
        })
        .collect();
    Trajectory::new(pieces).expect("tiling")
}

/// Right-invertible systems used as a golden corpus.
pub const RIGHT_INVERTIBLE: &[&str] = &[
    "[[D, -1]]",
    "[[t^4*D^2 + 4*t^3*D + t^2, -1]]",
    "[[D - 1, -1]]",
    "[[t*D, -1]]",
    "[[D^2 + t*D, -1]]",
    "[[D, -t, 0], [0, D, -1]]",
    "[[D, 1, 0], [0, D, -1]]",
    "[[1, D, t]]",
];

/// A smooth (entire) expression.
pub fn smooth_expr<R: Rng>(rng: &mut R) -> Expr {
    let p = Expr::rat(RatFun::poly(poly(rng, 2, 3)));
    match rng.gen_range(0..4) {
        0 | 1 => p,
        2 => Expr::mul(vec![p, Expr::t().exp()]),
        _ => Expr::add(vec![p, Expr::t().sin()]),
    }
}

/// A solution `V (0, .., 0, free)` on a random quarter-grid interval of
/// `[-2, 2]` that avoids the system's singular set.
pub fn solution<R: Rng>(rng: &mut R, sys: &System) -> Trajectory {
    loop {
        let a = rng.gen_range(-8..8i64);
        let b = rng.gen_range(a + 1..=8);
        let (lo, hi) = (rat(a, 4), rat(b, 4));
        if !sys.singular.avoids_closed(&lo, &hi) {
            continue;
        }
        let mut comps = vec![Expr::zero(); sys.m()];
        comps.extend((sys.m()..sys.n()).map(|_| smooth_expr(rng)));
        let w = Trajectory::new(vec![Piece::new(lo, hi, comps).expect("smooth")]).expect("piece");
        return w.apply(&sys.form.v).expect("sizes match");
    }
}
