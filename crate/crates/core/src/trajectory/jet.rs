//! One-sided derivative limits of an expression at a point.

use std::fmt;

use num_traits::{Signed, Zero};

use super::expr::Expr;
use super::series::{Coef, Expansion, SeriesError};
use crate::field::{factorial, int, to_f64, Rational};
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
    Both,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
            Side::Both => "two-sided",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum JetValue {
    Exact(Rational),
    /// Numeric value with an absolute error bound.
    Approx { value: f64, err: f64 },
}

impl JetValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            JetValue::Exact(q) => to_f64(q),
            JetValue::Approx { value, .. } => *value,
        }
    }

    pub fn err(&self) -> f64 {
        match self {
            JetValue::Exact(_) => 0.0,
            JetValue::Approx { err, .. } => *err,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, JetValue::Exact(_))
    }

    /// Equal exactly, or within the error bounds plus `tol` relative slack.
    pub fn agrees(&self, other: &JetValue, tol: f64) -> bool {
        match (self, other) {
            (JetValue::Exact(a), JetValue::Exact(b)) => a == b,
            _ => {
                let (a, b) = (self.to_f64(), other.to_f64());
                (a - b).abs() <= self.err() + other.err() + tol * (1.0 + a.abs().max(b.abs()))
            }
        }
    }
}

impl fmt::Display for JetValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JetValue::Exact(q) => write!(f, "{q}"),
            JetValue::Approx { value, err } => write!(f, "{value:e} +- {err:.1e}"),
        }
    }
}

/// `values[k]` is the k-th derivative at `point` from `side`.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    pub point: Rational,
    pub side: Side,
    pub values: Vec<JetValue>,
}

impl Jet {
    pub fn order(&self) -> usize {
        self.values.len() - 1
    }

    pub fn is_exact(&self) -> bool {
        self.values.iter().all(JetValue::is_exact)
    }
}

impl fmt::Display for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "jet at t = {} ({}): (", self.point, self.side)?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// Why a jet could not be produced.
#[derive(Clone, Debug, PartialEq)]
pub(crate) enum JetFailure {
    /// The derivative of this order has no finite limit.
    Diverges(u32),
    Unavailable(String),
}

impl JetFailure {
    pub(crate) fn into_error(self, point: &Rational) -> Error {
        match self {
            JetFailure::Diverges(order) => Error::NoJet { point: point.clone(), order },
            JetFailure::Unavailable(reason) => Error::JetUnavailable { point: point.clone(), reason },
        }
    }
}

/// Derivatives of orders `0..=order` of `e` at `b` from one side (`sigma = +1`
/// right, `-1` left). `room` is how far the expression stays valid beyond
/// `b` on that side, used by the numeric fallback.
pub(crate) fn one_sided(e: &Expr, b: &Rational, sigma: i32, order: u32, room: &Rational) -> Result<Vec<JetValue>, JetFailure> {
    let mut reason = String::new();
    for extra in [2i64, 6, 14, 30] {
        let cap = int(order as i64 + extra);
        let series = match (Expansion { b, sigma, cap }).expand(e) {
            Ok(s) => s,
            Err(SeriesError::Precision) => continue,
            Err(SeriesError::Divergent) => return Err(JetFailure::Diverges(0)),
            Err(SeriesError::Unsupported(r)) => {
                reason = r;
                break;
            }
        };
        match read_jet(&series.terms, series.prec.as_ref(), sigma, order) {
            Some(r) => return r,
            None => continue,
        }
    }
    richardson(e, b, sigma, order, room).map_err(|f| match f {
        JetFailure::Unavailable(r) if !reason.is_empty() => JetFailure::Unavailable(format!("{reason}; {r}")),
        other => other,
    })
}

/// As many derivative orders as exist, up to `kmax`, and why the next
/// one failed.
pub(crate) fn jets_upto(e: &Expr, b: &Rational, sigma: i32, kmax: u32, room: &Rational) -> (Vec<JetValue>, Option<JetFailure>) {
    let mut k = kmax as i64;
    let mut first_failure = None;
    while k >= 0 {
        match one_sided(e, b, sigma, k as u32, room) {
            Ok(v) => return (v, first_failure),
            Err(f) => {
                let next = match &f {
                    JetFailure::Diverges(j) => *j as i64 - 1,
                    JetFailure::Unavailable(_) => k - 1,
                };
                first_failure.get_or_insert(f);
                k = next;
            }
        }
    }
    (Vec::new(), first_failure)
}

/// Leading exponent of the expansion of `e` in `|t - b|` from one side;
/// `None` when `e` vanishes to every order there.
pub(crate) fn leading_exponent(e: &Expr, b: &Rational, sigma: i32) -> Result<Option<Rational>, String> {
    for cap in [4i64, 12, 28, 60] {
        match (Expansion { b, sigma, cap: int(cap) }).expand(e) {
            Ok(s) => {
                if let Some((x, _)) = s.terms.first() {
                    return Ok(Some(x.clone()));
                }
                if s.prec.is_none() {
                    return Ok(None);
                }
            }
            Err(SeriesError::Precision) => {}
            Err(SeriesError::Divergent) => return Err("essential singularity".into()),
            Err(SeriesError::Unsupported(r)) => return Err(r),
        }
    }
    Err("no nonzero term found in the expansion".into())
}

/// `None` if the precision is insufficient.
fn read_jet(
    terms: &[(Rational, Coef)],
    prec: Option<&Rational>,
    sigma: i32,
    order: u32,
) -> Option<Result<Vec<JetValue>, JetFailure>> {
    let mut out = Vec::with_capacity(order as usize + 1);
    for k in 0..=order {
        let kq = int(k as i64);
        // a term c s^e with e < k survives k differentiations unless e is a
        // nonnegative integer
        if let Some((_, _)) = terms.iter().find(|(e, _)| e < &kq && (e.is_negative() || !e.is_integer())) {
            return Some(Err(JetFailure::Diverges(k)));
        }
        if prec.is_some_and(|p| p <= &kq) {
            return None;
        }
        let f = factorial(k) * int(if sigma < 0 && k % 2 == 1 { -1 } else { 1 });
        let v = match terms.iter().find(|(e, _)| e == &kq) {
            None => JetValue::Exact(Rational::zero()),
            Some((_, Coef::Exact(c))) => JetValue::Exact(c * &f),
            Some((_, Coef::Approx { v, e })) => {
                let ff = to_f64(&f);
                JetValue::Approx { value: v * ff, err: e * ff.abs() }
            }
        };
        out.push(v);
    }
    Some(Ok(out))
}

/// Richardson extrapolation on one-sided forward differences with step
/// halving. A derivative whose raw estimates grow tenfold across three
/// halvings is declared divergent.
fn richardson(e: &Expr, b: &Rational, sigma: i32, order: u32, room: &Rational) -> Result<Vec<JetValue>, JetFailure> {
    let b = to_f64(b);
    let room = to_f64(room).abs();
    let s = sigma as f64;
    let mut out = Vec::with_capacity(order as usize + 1);
    for k in 0..=order {
        let h0 = (room / (4.0 * (k as f64 + 1.0))).min(0.05);
        let levels = 9usize;
        let mut raw = Vec::with_capacity(levels);
        for i in 0..levels {
            let h = h0 / 2f64.powi(i as i32);
            let mut acc = 0.0;
            let mut binom = 1.0;
            for j in 0..=k {
                let sign = if (k - j) % 2 == 0 { 1.0 } else { -1.0 };
                acc += sign * binom * e.eval_f64(b + s * h * (j as f64 + 1.0));
                binom = binom * (k - j) as f64 / (j + 1) as f64;
            }
            raw.push(acc / (s * h).powi(k as i32));
        }
        if raw.iter().any(|v| !v.is_finite()) {
            return Err(JetFailure::Diverges(k));
        }
        let grows = raw.windows(4).rev().take(3).all(|w| {
            w[3].abs() > 10.0 * w[0].abs() && w[1].abs() < w[2].abs() && w[2].abs() < w[3].abs()
        });
        if grows {
            return Err(JetFailure::Diverges(k));
        }
        // Neville-style table; the leading error is O(h)
        let mut table = raw.clone();
        let mut best = (raw[levels - 1], f64::INFINITY);
        for j in 1..levels {
            let f = 2f64.powi(j as i32) - 1.0;
            for i in (j..levels).rev() {
                table[i] = table[i] + (table[i] - table[i - 1]) / f;
            }
            let diff = (table[levels - 1] - table[levels - 2]).abs();
            if diff < best.1 {
                best = (table[levels - 1], diff);
            }
        }
        let (value, err) = best;
        if !(err <= 1e-6 * (1.0 + value.abs())) {
            return Err(JetFailure::Unavailable(format!(
                "numeric derivative of order {k} did not settle (spread {err:.1e})"
            )));
        }
        out.push(JetValue::Approx { value, err: err.max(1e-9 * (1.0 + value.abs())) });
    }
    Ok(out)
}
