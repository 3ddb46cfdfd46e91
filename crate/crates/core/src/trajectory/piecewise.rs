//! Piecewise trajectories on `[a, b]`: restriction, gluing, jets,
//! regularity, operator application and zero tests.

use std::fmt;
use std::str::FromStr;

use num_traits::One;

use super::expr::Expr;
use super::jet::{jets_upto, one_sided, Jet, JetFailure, JetValue, Side};
use super::normal::vanishes_on;
use super::piece::{singular_points, Piece};
use super::regularity::{Order, RegularityReport, RegularityTriple};
use crate::field::{to_f64, RatFun, Rational, SingularKind, SingularSet};
use crate::orematrix::OreMatrix;
use crate::syntax::{parse_trajectory_text, TrajectoryText};
use crate::Error;

/// Default cap on probed jet orders.
pub const K_MAX: u32 = 8;

/// Samples per piece for numeric checks.
pub const SAMPLES: usize = 257;

/// An element of `(C^{L,M,N}[a, b])^n` modulo equality off a finite set.
///
/// Adjacent pieces never carry the same expressions across a regular
/// breakpoint (such pairs are merged on construction), so two trajectories
/// built from the same function with the same singular breakpoints compare
/// equal structurally.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Trajectory {
    n: usize,
    pieces: Vec<Piece>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZeroReport {
    pub samples: usize,
    /// Largest sampled `|value| / (1 + scale)`.
    pub max_relative: f64,
    pub max_abs: f64,
    /// Pieces and components settled by the canonical form.
    pub exact_components: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ZeroVerdict {
    ExactZero,
    ZeroWithinTol(ZeroReport),
    NonZero { t: Rational, component: usize, value: f64 },
}

impl ZeroVerdict {
    pub fn is_zero(&self) -> bool {
        !matches!(self, ZeroVerdict::NonZero { .. })
    }
}

impl fmt::Display for ZeroVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ZeroVerdict::ExactZero => write!(f, "exact_zero"),
            ZeroVerdict::ZeroWithinTol(r) => write!(
                f,
                "zero_within_tol (samples {}, max |value| {:.3e}, max relative {:.3e}, exact components {})",
                r.samples, r.max_abs, r.max_relative, r.exact_components
            ),
            ZeroVerdict::NonZero { t, component, value } => {
                write!(f, "nonzero: w{} = {value:e} at t = {t}", component + 1)
            }
        }
    }
}

/// Low-discrepancy abscissae in `(0, 1)`: the base-2 van der Corput sequence.
fn van_der_corput(k: usize) -> Rational {
    let mut k = k;
    let mut num = 0u64;
    let mut den = 1u64;
    while k > 0 {
        num = 2 * num + (k & 1) as u64;
        den *= 2;
        k >>= 1;
    }
    Rational::new(num.into(), den.into())
}

fn sample_points(lo: &Rational, hi: &Rational, count: usize) -> Vec<Rational> {
    (1..=count).map(|k| lo + (hi - lo) * van_der_corput(k)).collect()
}

/// `|e(t)|`, or the sum of the magnitudes of its summands: the size of what
/// cancels in a residual.
fn magnitude(e: &Expr, t: f64) -> f64 {
    match e.node() {
        super::Node::Add(ts) => ts.iter().map(|x| x.eval_f64(t).abs()).sum(),
        _ => e.eval_f64(t).abs(),
    }
}

impl Trajectory {
    /// Pieces must tile an interval and agree on the component count.
    pub fn new(pieces: Vec<Piece>) -> Result<Trajectory, Error> {
        let Some(first) = pieces.first() else {
            return Err(Error::InvalidPiece("a trajectory needs at least one piece".into()));
        };
        let n = first.components().len();
        for w in pieces.windows(2) {
            if w[0].hi() != w[1].lo() {
                return Err(Error::InvalidPiece(format!(
                    "pieces [{}, {}] and [{}, {}] do not meet",
                    w[0].lo(),
                    w[0].hi(),
                    w[1].lo(),
                    w[1].hi()
                )));
            }
        }
        if let Some(p) = pieces.iter().find(|p| p.components().len() != n) {
            return Err(Error::DimensionMismatch(format!(
                "piece [{}, {}] has {} components, expected {n}",
                p.lo(),
                p.hi(),
                p.components().len()
            )));
        }
        Ok(Trajectory { n, pieces: coalesce(pieces) })
    }

    /// One expression vector on `[lo, hi]`, split at its singular points.
    pub fn from_exprs(lo: Rational, hi: Rational, comps: Vec<Expr>) -> Result<Trajectory, Error> {
        Trajectory::from_text(&TrajectoryText { components: comps.len(), pieces: vec![(lo, hi, comps)] })
    }

    pub fn zero(n: usize, lo: Rational, hi: Rational) -> Result<Trajectory, Error> {
        Trajectory::new(vec![Piece::new(lo, hi, vec![Expr::zero(); n])?])
    }

    /// Builds from parsed text, splitting each piece at the rational
    /// singular points of its expressions.
    pub fn from_text(tt: &TrajectoryText) -> Result<Trajectory, Error> {
        let mut pieces = Vec::new();
        for (lo, hi, comps) in &tt.pieces {
            if comps.len() != tt.components {
                return Err(Error::DimensionMismatch(format!(
                    "piece [{lo}, {hi}] has {} components, expected {}",
                    comps.len(),
                    tt.components
                )));
            }
            if lo >= hi {
                return Err(Error::InvalidPiece(format!("empty interval [{lo}, {hi}]")));
            }
            let mut cuts = Vec::new();
            for e in comps {
                cuts.extend(singular_points(e, lo, hi)?);
            }
            cuts.sort();
            cuts.dedup();
            let mut a = lo.clone();
            for c in cuts.into_iter().chain(std::iter::once(hi.clone())) {
                pieces.push(Piece::new(a.clone(), c.clone(), comps.clone())?);
                a = c;
            }
        }
        Trajectory::new(pieces)
    }

    pub fn components(&self) -> usize {
        self.n
    }

    /// The components with indices in `range`.
    pub fn select(&self, range: std::ops::Range<usize>) -> Trajectory {
        let pieces = self
            .pieces
            .iter()
            .map(|p| Piece::new_unchecked(p.lo().clone(), p.hi().clone(), p.components()[range.clone()].to_vec()))
            .collect();
        Trajectory::new(pieces).expect("same tiling")
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn domain(&self) -> (Rational, Rational) {
        (self.pieces[0].lo().clone(), self.pieces.last().expect("nonempty").hi().clone())
    }

    /// Breakpoints strictly inside the domain.
    pub fn breakpoints(&self) -> Vec<Rational> {
        self.pieces[1..].iter().map(|p| p.lo().clone()).collect()
    }

    fn contains(&self, t: &Rational) -> bool {
        let (a, b) = self.domain();
        &a <= t && t <= &b
    }

    pub fn restrict(&self, x: &Rational, y: &Rational) -> Result<Trajectory, Error> {
        let (a, b) = self.domain();
        if x >= y || x < &a || y > &b {
            return Err(Error::OutOfDomain { lo: x.clone(), hi: y.clone() });
        }
        let pieces = self
            .pieces
            .iter()
            .filter(|p| p.hi() > x && p.lo() < y)
            .map(|p| p.clip(x, y))
            .collect();
        Trajectory::new(pieces)
    }

    /// Pieces split at the given points (those strictly inside some piece).
    fn refined(&self, cuts: &[Rational]) -> Vec<Piece> {
        let mut out = Vec::new();
        for p in &self.pieces {
            let mut a = p.lo().clone();
            for c in cuts.iter().filter(|c| p.contains_open(c)) {
                out.push(Piece::new_unchecked(a.clone(), c.clone(), p.components().to_vec()));
                a = c.clone();
            }
            out.push(Piece::new_unchecked(a, p.hi().clone(), p.components().to_vec()));
        }
        out
    }

    /// `sum c_i w_i` over trajectories with a common domain.
    pub fn linear_combination(terms: &[(Rational, &Trajectory)]) -> Result<Trajectory, Error> {
        let Some((_, first)) = terms.first() else {
            return Err(Error::Domain("empty linear combination".into()));
        };
        let dom = first.domain();
        let n = first.n;
        let mut cuts = Vec::new();
        for (_, w) in terms {
            if w.domain() != dom || w.n != n {
                return Err(Error::DimensionMismatch("linear combination of trajectories with different domains or sizes".into()));
            }
            cuts.extend(w.breakpoints());
        }
        cuts.sort();
        cuts.dedup();
        let refined: Vec<Vec<Piece>> = terms.iter().map(|(_, w)| w.refined(&cuts)).collect();
        let mut pieces = Vec::with_capacity(refined[0].len());
        for k in 0..refined[0].len() {
            let p0 = &refined[0][k];
            let comps = (0..n)
                .map(|j| {
                    Expr::add(
                        terms
                            .iter()
                            .zip(&refined)
                            .map(|((c, _), ps)| ps[k].components()[j].scale(&RatFun::constant(c.clone())))
                            .collect(),
                    )
                })
                .collect();
            pieces.push(Piece::new_unchecked(p0.lo().clone(), p0.hi().clone(), comps));
        }
        Trajectory::new(pieces)
    }

    pub fn add(&self, other: &Trajectory) -> Result<Trajectory, Error> {
        Trajectory::linear_combination(&[(Rational::one(), self), (Rational::one(), other)])
    }

    pub fn scale(&self, c: &Rational) -> Trajectory {
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                let comps = p.components().iter().map(|e| e.scale(&RatFun::constant(c.clone()))).collect();
                Piece::new_unchecked(p.lo().clone(), p.hi().clone(), comps)
            })
            .collect();
        Trajectory::new(pieces).expect("same tiling")
    }

    fn piece_ending_at(&self, t: &Rational) -> Option<&Piece> {
        self.pieces.iter().find(|p| p.hi() == t || p.contains_open(t))
    }

    fn piece_starting_at(&self, t: &Rational) -> Option<&Piece> {
        self.pieces.iter().find(|p| p.lo() == t || p.contains_open(t))
    }

    /// Component values of the piece containing `t` (the right piece at a breakpoint).
    pub fn eval_f64(&self, t: f64) -> Vec<f64> {
        let p = self
            .pieces
            .iter()
            .find(|p| t < to_f64(p.hi()))
            .unwrap_or_else(|| self.pieces.last().expect("nonempty"));
        p.components().iter().map(|e| e.eval_f64(t)).collect()
    }

    fn side_jets(&self, b: &Rational, sigma: i32, order: u32) -> Result<Vec<Vec<JetValue>>, Error> {
        let p = if sigma < 0 { self.piece_ending_at(b) } else { self.piece_starting_at(b) };
        let p = p.ok_or_else(|| Error::Domain(format!("no {} side at t = {b}", if sigma < 0 { "left" } else { "right" })))?;
        let room = if sigma < 0 { b - p.lo() } else { p.hi() - b };
        p.components()
            .iter()
            .map(|e| one_sided(e, b, sigma, order, &room).map_err(|f| f.into_error(b)))
            .collect()
    }

    /// Jets of every component at `b`. A two-sided jet requires left and
    /// right to agree at every order (within `1e-9` for numeric values).
    pub fn jet(&self, b: &Rational, order: u32, side: Side) -> Result<Vec<Jet>, Error> {
        if !self.contains(b) {
            return Err(Error::OutOfDomain { lo: b.clone(), hi: b.clone() });
        }
        let wrap = |vals: Vec<Vec<JetValue>>, side: Side| {
            vals.into_iter().map(|values| Jet { point: b.clone(), side, values }).collect()
        };
        match side {
            Side::Left => Ok(wrap(self.side_jets(b, -1, order)?, Side::Left)),
            Side::Right => Ok(wrap(self.side_jets(b, 1, order)?, Side::Right)),
            Side::Both => {
                if self.pieces.iter().any(|p| p.contains_open(b)) {
                    return Ok(wrap(self.side_jets(b, 1, order)?, Side::Both));
                }
                let left = self.side_jets(b, -1, order)?;
                let right = self.side_jets(b, 1, order)?;
                for (l, r) in left.iter().zip(&right) {
                    if let Some(k) = (0..l.len()).find(|&k| !l[k].agrees(&r[k], 1e-9)) {
                        return Err(Error::NoJet { point: b.clone(), order: k as u32 });
                    }
                }
                Ok(wrap(left, Side::Both))
            }
        }
    }

    /// Concatenation of `f` on `[a, c]` and `g` on `[b, d]`, `a <= b <= c <= d`.
    /// With overlap the two must agree there; at a single point their jets
    /// must match to order `l` (capped at `kmax` for `l = inf`).
    pub fn glue(f: &Trajectory, g: &Trajectory, l: Order, kmax: u32) -> Result<Trajectory, Error> {
        let (a, c) = f.domain();
        let (b, d) = g.domain();
        if f.n != g.n {
            return Err(Error::DimensionMismatch(format!("{} vs {} components", f.n, g.n)));
        }
        if !(a <= b && b <= c && c <= d) {
            return Err(Error::Domain(format!(
                "gluing needs a <= b <= c <= d, got [{a}, {c}] and [{b}, {d}]"
            )));
        }
        if b < c {
            let fr = f.restrict(&b, &c)?;
            let gr = g.restrict(&b, &c)?;
            let mut cuts = fr.breakpoints();
            cuts.extend(gr.breakpoints());
            cuts.sort();
            cuts.dedup();
            for (p, q) in fr.refined(&cuts).iter().zip(gr.refined(&cuts)) {
                for (j, (x, y)) in p.components().iter().zip(q.components()).enumerate() {
                    if x == y {
                        continue;
                    }
                    let diff = x.sub(y);
                    if vanishes_on(&diff, p.lo(), p.hi()) {
                        continue;
                    }
                    if let Some((t, v)) = sample_mismatch(&diff, p.lo(), p.hi(), 1e-9) {
                        return Err(Error::Incompatible(format!(
                            "the trajectories differ on the overlap: w{} differs by {v:e} at t = {t}",
                            j + 1
                        )));
                    }
                }
            }
            let mut pieces = f.pieces.clone();
            if c < d {
                pieces.extend(g.restrict(&c, &d)?.pieces);
            }
            return Trajectory::new(pieces);
        }
        if let Some(order) = l.checked_orders(kmax) {
            let lp = f.pieces.last().expect("nonempty");
            let rp = &g.pieces[0];
            let identical = lp.components() == rp.components()
                && lp.components().iter().all(|e| singular_points(e, lp.lo(), rp.hi()).is_ok_and(|v| v.is_empty()));
            if !identical {
                let left = f.side_jets(&c, -1, order).map_err(|e| incompatible_jet(e, &c))?;
                let right = g.side_jets(&c, 1, order).map_err(|e| incompatible_jet(e, &c))?;
                for (j, (lv, rv)) in left.iter().zip(&right).enumerate() {
                    if let Some(k) = (0..lv.len()).find(|&k| !lv[k].agrees(&rv[k], 1e-9)) {
                        return Err(Error::Incompatible(format!(
                            "jets of w{} at t = {c} differ at order {k}: {} (left) vs {} (right)",
                            j + 1,
                            lv[k],
                            rv[k]
                        )));
                    }
                }
            }
        }
        let mut pieces = f.pieces.clone();
        pieces.extend(g.pieces.iter().cloned());
        Trajectory::new(pieces)
    }

    /// `R(d/dt) w`, piecewise; pieces are split at real poles of the
    /// coefficients of `R`.
    pub fn apply(&self, r: &OreMatrix) -> Result<Trajectory, Error> {
        if r.cols() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "operator has {} columns, trajectory has {} components",
                r.cols(),
                self.n
            )));
        }
        let dens: Vec<_> = r
            .entries()
            .iter()
            .flat_map(|e| e.coefficient_functions())
            .filter(|c| !c.den().is_constant())
            .map(|c| (c.den().clone(), SingularKind::Pole))
            .collect();
        let poles = SingularSet::from_sources(&dens);
        let (a, b) = self.domain();
        let (cuts, irrational) = poles.points_in_open(&a, &b);
        if irrational {
            return Err(Error::Unsupported(
                "the operator has an irrational pole inside the domain; pieces need rational endpoints".into(),
            ));
        }
        let pieces = self
            .refined(&cuts)
            .into_iter()
            .map(|p| {
                let comps = (0..r.rows())
                    .map(|i| Expr::add((0..self.n).map(|j| r.get(i, j).apply(&p.components()[j])).collect()))
                    .collect();
                Piece::new_unchecked(p.lo().clone(), p.hi().clone(), comps)
            })
            .collect();
        Trajectory::new(pieces)
    }

    /// Exact zero test per piece, falling back to sampling `SAMPLES`
    /// low-discrepancy points per piece with `|v| <= tol (1 + scale)`.
    pub fn is_zero(&self, tol: &Rational) -> ZeroVerdict {
        let tol = to_f64(tol);
        let mut report = ZeroReport { samples: 0, max_relative: 0.0, max_abs: 0.0, exact_components: 0 };
        let mut all_exact = true;
        for p in &self.pieces {
            for (j, e) in p.components().iter().enumerate() {
                if vanishes_on(e, p.lo(), p.hi()) {
                    report.exact_components += 1;
                    continue;
                }
                all_exact = false;
                let pts = sample_points(p.lo(), p.hi(), SAMPLES);
                let xs: Vec<f64> = pts.iter().map(to_f64).collect();
                let scale = xs.iter().map(|&x| magnitude(e, x)).fold(0.0, f64::max);
                for (t, &x) in pts.iter().zip(&xs) {
                    let v = e.eval_f64(x);
                    report.samples += 1;
                    let rel = v.abs() / (1.0 + scale);
                    if !(v.abs() <= tol * (1.0 + scale)) {
                        return ZeroVerdict::NonZero { t: t.clone(), component: j, value: v };
                    }
                    report.max_abs = report.max_abs.max(v.abs());
                    report.max_relative = report.max_relative.max(rel);
                }
            }
        }
        if all_exact {
            ZeroVerdict::ExactZero
        } else {
            ZeroVerdict::ZeroWithinTol(report)
        }
    }

    /// The maximal `(L, M, N)` with jets probed up to order `kmax`.
    pub fn classify_regularity(&self, kmax: u32) -> RegularityReport {
        let mut notes = Vec::new();
        // number of finite one-sided derivative orders at each end of each piece
        let mut ends: Vec<(Vec<Vec<JetValue>>, Vec<Vec<JetValue>>)> = Vec::with_capacity(self.pieces.len());
        let mut m = kmax as i64 + 1;
        for p in &self.pieces {
            let room = p.hi() - p.lo();
            let mut at = |b: &Rational, sigma: i32| -> Vec<Vec<JetValue>> {
                p.components()
                    .iter()
                    .enumerate()
                    .map(|(j, e)| {
                        let (vals, fail) = jets_upto(e, b, sigma, kmax, &room);
                        if let Some(JetFailure::Unavailable(reason)) = fail {
                            notes.push(format!(
                                "w{} at t = {b}: jets beyond order {} unavailable ({reason})",
                                j + 1,
                                vals.len() as i64 - 1
                            ));
                        }
                        m = m.min(vals.len() as i64);
                        vals
                    })
                    .collect()
            };
            let lo = at(p.lo(), 1);
            let hi = at(p.hi(), -1);
            ends.push((lo, hi));
        }
        // `m` counts orders 0..m-1
        let mut l = m;
        for w in ends.windows(2) {
            let (left, right) = (&w[0].1, &w[1].0);
            for (lv, rv) in left.iter().zip(right) {
                let matched = (0..lv.len().min(rv.len())).take_while(|&i| lv[i].agrees(&rv[i], 1e-9)).count();
                l = l.min(matched as i64);
            }
        }
        let to_order = |count: i64| if count > kmax as i64 { Order::Infinite } else { Order::Finite(count - 1) };
        let triple = RegularityTriple { l: to_order(l), m: to_order(m), n: Order::Infinite };
        RegularityReport { triple, kmax, notes }
    }

    /// Whether `self` lies in `C^{L,M,N}` for the given triple.
    pub fn is_member(&self, triple: &RegularityTriple, kmax: u32) -> bool {
        self.classify_regularity(kmax).triple.at_least(triple)
    }
}

fn incompatible_jet(e: Error, c: &Rational) -> Error {
    match e {
        Error::NoJet { order, .. } => {
            Error::Incompatible(format!("no finite derivative of order {order} at t = {c}"))
        }
        other => other,
    }
}

/// First sample where `|e| > tol (1 + scale)`.
fn sample_mismatch(e: &Expr, lo: &Rational, hi: &Rational, tol: f64) -> Option<(Rational, f64)> {
    let pts = sample_points(lo, hi, SAMPLES);
    let xs: Vec<f64> = pts.iter().map(to_f64).collect();
    let scale = xs.iter().map(|&x| magnitude(e, x)).fold(0.0, f64::max);
    pts.into_iter()
        .zip(xs)
        .map(|(t, x)| (t, e.eval_f64(x)))
        .find(|(_, v)| !(v.abs() <= tol * (1.0 + scale)))
}

/// Merges neighbours with identical expressions when the merged piece is
/// still free of interior singularities.
fn coalesce(pieces: Vec<Piece>) -> Vec<Piece> {
    let mut out: Vec<Piece> = Vec::with_capacity(pieces.len());
    for p in pieces {
        if let Some(last) = out.last() {
            if last.components() == p.components() {
                if let Ok(merged) = Piece::new(last.lo().clone(), p.hi().clone(), p.components().to_vec()) {
                    *out.last_mut().expect("nonempty") = merged;
                    continue;
                }
            }
        }
        out.push(p);
    }
    out
}

impl fmt::Display for Trajectory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "components: {}", self.n)?;
        for p in &self.pieces {
            writeln!(f, "piece [{}, {}]:", p.lo(), p.hi())?;
            for (j, e) in p.components().iter().enumerate() {
                writeln!(f, "  w{} = {e}", j + 1)?;
            }
        }
        Ok(())
    }
}

impl FromStr for Trajectory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Trajectory, Error> {
        Trajectory::from_text(&parse_trajectory_text(s)?)
    }
}

/// `R(d/dt) w`.
pub fn apply_operator(r: &OreMatrix, w: &Trajectory) -> Result<Trajectory, Error> {
    w.apply(r)
}

/// Low-discrepancy sample abscissae strictly inside a piece.
pub fn piece_samples(p: &Piece, count: usize) -> Vec<Rational> {
    sample_points(p.lo(), p.hi(), count)
}
