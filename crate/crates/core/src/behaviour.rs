//! System-level analysis of `R(d/dt) w = 0`: rank, right invertibility,
//! the controllability decision with its regularity threshold, and the
//! singular set of a factorization.

use std::fmt;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field::{int, rat, RatFun, Rational, SingularKind, SingularSet, UniPoly};
use crate::ore::OrePoly;
use crate::orematrix::{right_inverse_from, tn_form, OreMatrix, TnForm};
use crate::trajectory::{Expr, Order, Piece, Trajectory, K_MAX};
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Controllable,
    NotControllable,
    /// The requested regularity is below the threshold, where the
    /// decision procedure says nothing.
    Undecided,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Controllable => "controllable",
            Verdict::NotControllable => "not_controllable",
            Verdict::Undecided => "undecided",
        })
    }
}

pub const THRESHOLD_CAVEAT: &str = "L_threshold is computed from this particular factorization \
     (deg Vinv + deg r - 1); it is a sufficient bound, not the minimal one";

#[derive(Clone, Debug)]
pub struct ControllabilityReport {
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub full_row_rank: bool,
    pub deg_r: usize,
    pub right_invertible: bool,
    pub deg_vinv: usize,
    pub l_threshold: i64,
    /// The decision for `L >= l_threshold`, or for `requested_l` if given.
    pub verdict: Verdict,
    pub requested_l: Option<Order>,
    pub caveat: &'static str,
}

impl ControllabilityReport {
    /// Same report, with the verdict restated for a specific `L`.
    pub fn at_regularity(&self, l: Order) -> ControllabilityReport {
        let mut out = self.clone();
        out.requested_l = Some(l);
        if l < Order::Finite(self.l_threshold) {
            out.verdict = Verdict::Undecided;
        }
        out
    }

    pub fn porcelain(&self) -> String {
        let l = self.requested_l.map_or("-".to_string(), |l| l.to_string());
        format!(
            "verdict={} rank={} rows={} cols={} full_row_rank={} deg_r={} right_invertible={} deg_vinv={} L_threshold={} L={}",
            self.verdict,
            self.rank,
            self.rows,
            self.cols,
            self.full_row_rank,
            self.deg_r,
            self.right_invertible,
            self.deg_vinv,
            self.l_threshold,
            l
        )
    }
}

impl fmt::Display for ControllabilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: [(&str, String); 9] = [
            ("verdict", self.verdict.to_string()),
            ("size", format!("{} x {}", self.rows, self.cols)),
            ("rank", self.rank.to_string()),
            ("full_row_rank", self.full_row_rank.to_string()),
            ("deg_r", self.deg_r.to_string()),
            ("right_invertible", self.right_invertible.to_string()),
            ("deg_Vinv", self.deg_vinv.to_string()),
            ("L_threshold", self.l_threshold.to_string()),
            ("requested_L", self.requested_l.map_or("-".to_string(), |l| l.to_string())),
        ];
        for (k, v) in rows {
            writeln!(f, "{k:<17} {v}")?;
        }
        if self.verdict == Verdict::Undecided {
            writeln!(f, "{:<17} requested L is below L_threshold; no decision is available there", "note")?;
        }
        write!(f, "{:<17} {}", "caveat", self.caveat)
    }
}

pub fn controllability_report(r: &OreMatrix) -> ControllabilityReport {
    controllability_report_from(r, &tn_form(r))
}

/// Zero rows of `S` constrain nothing, so a rank-deficient `R` is decided
/// on the full-row-rank block `[I, r, 0] Vinv`, which is right invertible
/// exactly when `deg r = 0`.
pub fn controllability_report_from(r: &OreMatrix, form: &TnForm) -> ControllabilityReport {
    let full_row_rank = form.ell == r.rows();
    let deg_r = form.deg_r();
    let right_invertible = full_row_rank && deg_r == 0 && right_inverse_from(r, form).is_some();
    let deg_vinv = form.deg_vinv();
    ControllabilityReport {
        rows: r.rows(),
        cols: r.cols(),
        rank: form.ell,
        full_row_rank,
        deg_r,
        right_invertible,
        deg_vinv,
        l_threshold: deg_vinv as i64 + deg_r as i64 - 1,
        verdict: if deg_r == 0 { Verdict::Controllable } else { Verdict::NotControllable },
        requested_l: None,
        caveat: THRESHOLD_CAVEAT,
    }
}

/// Poles of every coefficient of `r`, `V` and `Vinv`, and the zeros of the
/// leading coefficient of `r`.
pub fn singular_system_set(form: &TnForm) -> SingularSet {
    let mut sources: Vec<(UniPoly, SingularKind)> = Vec::new();
    let polys = std::iter::once(&form.r).chain(form.v.entries()).chain(form.vinv.entries());
    for p in polys {
        for c in p.coefficient_functions() {
            if !c.den().is_constant() {
                sources.push((c.den().clone(), SingularKind::Pole));
            }
        }
    }
    let lc = form.r.lc();
    if !lc.num().is_constant() {
        sources.push((lc.num().clone(), SingularKind::Zero));
    }
    SingularSet::from_sources(&sources)
}

/// One sampled scalar case of the threshold experiment.
#[derive(Clone, Debug)]
pub struct ThresholdObservation {
    pub operator: OrePoly,
    pub deg_r: usize,
    /// What the factorization guarantees: `deg Vinv + deg r - 1`.
    pub l_threshold: i64,
    /// `deg r - 2`.
    pub conjectured: i64,
    /// For `D^k` only: for each `L` in `-1..k`, whether a piecewise kernel
    /// element joining two random kernel elements with `C^L` junctions was
    /// found.
    pub connections: Vec<(i64, bool)>,
}

impl fmt::Display for ThresholdObservation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "r = {}: deg r = {}, L_threshold = {}, deg r - 2 = {}",
            self.operator, self.deg_r, self.l_threshold, self.conjectured
        )?;
        if !self.connections.is_empty() {
            let cells: Vec<String> =
                self.connections.iter().map(|(l, ok)| format!("L={l}:{}", if *ok { "joined" } else { "no" })).collect();
            write!(f, "; connections {}", cells.join(" "))?;
        }
        Ok(())
    }
}

/// Samples scalar operators and records, for each, the factorization
/// threshold next to `deg r - 2`. For `r = D^k` it also tries to steer
/// between random polynomial solutions with piecewise polynomial kernel
/// elements of limited junction regularity. Nothing is asserted.
pub fn threshold_experiment(seed: u64, samples: usize) -> Vec<ThresholdObservation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for k in 1..=4usize {
        let op = OrePoly::monomial(RatFun::one(), k);
        let form = tn_form(&OreMatrix::from_rows(vec![vec![op.clone()]]).expect("1x1"));
        let connections = (-1..k as i64).map(|l| (l, try_connect_dk(k, l, &mut rng))).collect();
        out.push(observation(op, &form, connections));
    }
    for _ in 0..samples {
        let op = crate::testing::nonzero_ore_poly(&mut rng, 3, 2);
        if op.degree().finite() == Some(0) {
            continue;
        }
        let form = tn_form(&OreMatrix::from_rows(vec![vec![op.clone()]]).expect("1x1"));
        out.push(observation(op, &form, Vec::new()));
    }
    out
}

fn observation(op: OrePoly, form: &TnForm, connections: Vec<(i64, bool)>) -> ThresholdObservation {
    let deg_r = form.deg_r();
    ThresholdObservation {
        operator: op,
        deg_r,
        l_threshold: form.deg_vinv() as i64 + deg_r as i64 - 1,
        conjectured: deg_r as i64 - 2,
        connections,
    }
}

/// Joins `p` on `[0, 1]` to `q` on `[2, 3]` (random polynomials of degree
/// `< k`, i.e. solutions of `D^k w = 0`) by `k` polynomial pieces on
/// `[1, 2]` whose junctions are `C^L`; the result is then checked by the
/// trajectory engine (gluing with order `L`, residual zero).
fn try_connect_dk<R: Rng>(k: usize, l: i64, rng: &mut R) -> bool {
    let random_poly = |rng: &mut R| {
        UniPoly::new((0..k).map(|_| int(rng.gen_range(-5..=5))).collect())
    };
    let (p, q) = (random_poly(rng), random_poly(rng));
    let pieces = k;
    let breaks: Vec<Rational> = (0..=pieces).map(|i| int(1) + rat(i as i64, pieces as i64)).collect();
    // unknowns: k coefficients per piece, in the shifted basis (t - lo)^i
    let nvars = pieces * k;
    let mut rows: Vec<(Vec<Rational>, Rational)> = Vec::new();
    let matched = (l + 1).max(0) as usize;
    let deriv_row = |piece: usize, at_hi: bool, order: usize| -> Vec<Rational> {
        let mut row = vec![Rational::zero(); nvars];
        let h = if at_hi { &breaks[piece + 1] - &breaks[piece] } else { Rational::zero() };
        for i in order..k {
            // d^order/dt^order (t - lo)^i at t - lo = h
            let falling: i64 = ((i - order + 1)..=i).map(|x| x as i64).product();
            row[piece * k + i] = int(falling) * num_traits::pow(h.clone(), i - order);
        }
        row
    };
    let deriv_of = |poly: &UniPoly, at: &Rational, order: usize| {
        let mut d = poly.clone();
        for _ in 0..order {
            d = d.derivative();
        }
        d.eval(at)
    };
    for order in 0..matched.min(k) {
        rows.push((deriv_row(0, false, order), deriv_of(&p, &int(1), order)));
        rows.push((deriv_row(pieces - 1, true, order), deriv_of(&q, &int(2), order)));
        for j in 0..pieces - 1 {
            let mut row = deriv_row(j, true, order);
            for (x, y) in row.iter_mut().zip(deriv_row(j + 1, false, order)) {
                *x -= y;
            }
            rows.push((row, Rational::zero()));
        }
    }
    let Some(sol) = solve_exact(rows, nvars) else {
        return false;
    };
    let mut parts = vec![Piece::new(int(0), int(1), vec![Expr::rat(RatFun::poly(p))]).expect("interval")];
    for j in 0..pieces {
        let lo = &breaks[j];
        let shifted = UniPoly::new(sol[j * k..(j + 1) * k].to_vec());
        let g = shifted.shift_scale(&-lo, &Rational::one());
        parts.push(Piece::new(lo.clone(), breaks[j + 1].clone(), vec![Expr::rat(RatFun::poly(g))]).expect("interval"));
    }
    parts.push(Piece::new(int(2), int(3), vec![Expr::rat(RatFun::poly(q))]).expect("interval"));
    let order = if l < 0 { Order::NONE } else { Order::Finite(l) };
    let mut acc = Trajectory::new(vec![parts[0].clone()]).expect("piece");
    for p in &parts[1..] {
        let next = Trajectory::new(vec![p.clone()]).expect("piece");
        match Trajectory::glue(&acc, &next, order, K_MAX) {
            Ok(w) => acc = w,
            Err(_) => return false,
        }
    }
    let dk = OreMatrix::from_rows(vec![vec![OrePoly::monomial(RatFun::one(), k)]]).expect("1x1");
    acc.apply(&dk).is_ok_and(|res| res.is_zero(&rat(1, 1_000_000_000)).is_zero())
}

/// Some solution of a consistent linear system over Q, or `None`.
fn solve_exact(mut rows: Vec<(Vec<Rational>, Rational)>, nvars: usize) -> Option<Vec<Rational>> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..nvars {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i].0[c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r].0[c].recip();
        for x in rows[r].0.iter_mut() {
            *x *= &inv;
        }
        rows[r].1 *= &inv;
        for i in 0..rows.len() {
            if i != r && !rows[i].0[c].is_zero() {
                let f = rows[i].0[c].clone();
                let (pr, pb) = (rows[r].0.clone(), rows[r].1.clone());
                for (x, y) in rows[i].0.iter_mut().zip(&pr) {
                    *x -= &f * y;
                }
                rows[i].1 -= &f * &pb;
            }
        }
        pivots.push(c);
        r += 1;
    }
    if rows[r..].iter().any(|(_, b)| !b.is_zero()) {
        return None;
    }
    let mut sol = vec![Rational::zero(); nvars];
    for (i, &c) in pivots.iter().enumerate() {
        sol[c] = rows[i].1.clone();
    }
    Some(sol)
}

/// Errors unless the system is right invertible.
pub(crate) fn require_right_invertible(r: &OreMatrix, form: &TnForm) -> Result<(), Error> {
    if form.ell != r.rows() || form.deg_r() != 0 {
        return Err(Error::Domain(format!(
            "the system is not right invertible (rank {} of {} rows, deg r = {})",
            form.ell,
            r.rows(),
            form.deg_r()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_ore_matrix;

    fn report(s: &str) -> ControllabilityReport {
        controllability_report(&parse_ore_matrix(s).unwrap())
    }

    #[test]
    fn golden_reports() {
        let r = report("[[t^4*D^2 + 4*t^3*D + t^2, -1]]");
        assert_eq!((r.verdict, r.right_invertible, r.deg_r), (Verdict::Controllable, true, 0));
        let r = report("[[t*D + 1]]");
        assert_eq!((r.verdict, r.deg_r, r.l_threshold), (Verdict::NotControllable, 1, 0));
        let r = report("[[1, 0], [0, 1]]");
        assert_eq!(r.verdict, Verdict::Controllable);
    }

    #[test]
    fn below_threshold_is_undecided() {
        let r = report("[[t*D + 1]]");
        assert_eq!(r.at_regularity(Order::NONE).verdict, Verdict::Undecided);
        assert_eq!(r.at_regularity(Order::Finite(0)).verdict, Verdict::NotControllable);
    }

    #[test]
    fn singular_sets() {
        let f = tn_form(&parse_ore_matrix("[[t*D + 1]]").unwrap());
        let s = singular_system_set(&f);
        assert!(s.points.iter().any(|p| p.interval.exact() == Some(&int(0))));
        let f = tn_form(&parse_ore_matrix("[[D, -1]]").unwrap());
        assert!(singular_system_set(&f).is_empty());
    }

    #[test]
    fn double_integrator_joins_only_below_full_regularity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        // D^2: C^0 junctions suffice, C^1 forces a single line
        assert!(try_connect_dk(2, 0, &mut rng));
        let joined: Vec<bool> = (0..5).map(|_| try_connect_dk(2, 1, &mut rng)).collect();
        assert!(joined.iter().any(|ok| !ok));
    }
}
