use num_traits::One;

use super::continuation::{choose_eps, extend, prepare};
use super::{smooth_step_expr, Certificate, EpsilonPolicy, System};
use crate::field::{int, Rational};
use crate::trajectory::{Expr, Order, Piece, Trajectory, ZeroVerdict, K_MAX};
use crate::Error;

/// A control `g` on `[b, c]` with the assembled trajectory and its evidence.
#[derive(Clone, Debug)]
pub struct Steering {
    pub control: Trajectory,
    /// `f ∪ g ∪ target` on `[a, d]`.
    pub assembled: Trajectory,
    pub certificate: Certificate,
}

fn order_for(sys: &System, l: Order) -> u32 {
    sys.degree().max(l.checked_orders(K_MAX).unwrap_or(0) as usize) as u32 + 2
}

fn concat(parts: &[&Trajectory]) -> Result<Trajectory, Error> {
    Trajectory::new(parts.iter().flat_map(|t| t.pieces().iter().cloned()).collect())
}

/// `g` on `[b, c]` taking the solution `f` (with `w = Vinv f`) to zero:
/// `V (Vinv f)^` on `[b, b+eps]`, `V (chi (Vinv f)^)` on `[b+eps, b+2eps]`,
/// zero beyond.
fn to_zero(
    sys: &System,
    f: &Trajectory,
    w: &Trajectory,
    c: &Rational,
    l: Order,
    policy: &EpsilonPolicy,
    cert: &mut Certificate,
    label: &str,
) -> Result<Trajectory, Error> {
    let b = f.domain().1;
    if c <= &b {
        return Err(Error::Domain(format!("the gap end {c} must lie right of {b}")));
    }
    let limit = (c - &b) / int(4);
    let eps = choose_eps(sys, w, 1, &limit, policy)
        .map_err(|e| Error::Domain(format!("gap [{b}, {c}] too small to steer to zero: {e}")))?;
    cert.steps.push((label.to_string(), eps.clone()));
    let ext = extend(sys, w, 1, &(&eps * int(2)), order_for(sys, l))?;
    if ext.order < l.min(Order::Finite(K_MAX as i64)) {
        return Err(Error::Domain(format!(
            "the solution extends only C^{} past t = {b}, below the requested L = {l}",
            ext.order
        )));
    }
    let (x1, x2) = (&b + &eps, &b + &eps * int(2));
    let first = ext.piece.restrict(&b, &x1)?;
    let chi = smooth_step_expr(&x1, &x2);
    let mut comps = vec![Expr::zero(); sys.m()];
    comps.extend(ext.free.iter().map(|e| Expr::mul(vec![chi.clone(), e.clone()])));
    let cut = Trajectory::new(vec![Piece::new(x1, x2.clone(), comps)?])?.apply(&sys.form.v)?;
    let mut parts = vec![first, cut];
    if &x2 < c {
        parts.push(Trajectory::zero(sys.n(), x2, c.clone())?);
    }
    concat(&parts.iter().collect::<Vec<_>>())
}

fn certify(sys: &System, assembled: &Trajectory, b: &Rational, c: &Rational, l: Order, tol: &Rational, cert: &mut Certificate) -> Result<(), Error> {
    let mut points: Vec<Rational> = assembled.breakpoints().into_iter().filter(|p| p > b && p < c).collect();
    points.push(b.clone());
    points.push(c.clone());
    points.sort();
    for p in &points {
        cert.check_junction(assembled, p, l)?;
    }
    cert.check_residual(&sys.r, assembled, tol)
}

/// Steers the solution `f` on `[a, b]` to zero on `[c, d]`: returns `g` on
/// `[b, c]` such that `f ∪ g ∪ 0` is a solution with `C^L` junctions.
pub fn steer_to_zero(
    sys: &System,
    f: &Trajectory,
    c: &Rational,
    d: &Rational,
    l: Order,
    policy: &EpsilonPolicy,
    tol: &Rational,
) -> Result<Steering, Error> {
    if d <= c {
        return Err(Error::Domain(format!("empty target interval [{c}, {d}]")));
    }
    let w = prepare(sys, f, tol)?;
    let mut cert = Certificate::default();
    let g = to_zero(sys, f, &w, c, l, policy, &mut cert, "eps")?;
    let assembled = concat(&[f, &g, &Trajectory::zero(sys.n(), c.clone(), d.clone())?])?;
    certify(sys, &assembled, &f.domain().1, c, l, tol, &mut cert)?;
    Ok(Steering { control: g, assembled, certificate: cert })
}

/// Steers `f` on `[a, b]` to `h` on `[c, d]`: `f` is steered to zero,
/// `h` is continued to the left to `ĥ`, and the difference of the two
/// near `c` is steered to zero again; `g = (f → 0) ∪ (ĥ + (−ĥ → 0))`.
pub fn steer(
    sys: &System,
    f: &Trajectory,
    h: &Trajectory,
    l: Order,
    policy: &EpsilonPolicy,
    tol: &Rational,
) -> Result<Steering, Error> {
    let (_, b) = f.domain();
    let (c, d) = h.domain();
    if c <= b {
        return Err(Error::Domain(format!("the target starts at {c}, not after {b}")));
    }
    let wh = prepare(sys, h, tol)?;
    if h.is_zero(tol) == ZeroVerdict::ExactZero {
        return steer_to_zero(sys, f, &c, &d, l, policy, tol);
    }
    let wf = prepare(sys, f, tol)?;
    let mut cert = Certificate::default();

    // (2) continue h to the left on [c - 2eps', c]
    let limit = (&c - &b) / int(8);
    let eps = choose_eps(sys, &wh, -1, &limit, policy)
        .map_err(|e| Error::Domain(format!("gap [{b}, {c}] too small to continue the target: {e}")))?;
    cert.steps.push(("eps'".into(), eps.clone()));
    let ext = extend(sys, &wh, -1, &(&eps * int(2)), order_for(sys, l))?;
    if ext.order < l.min(Order::Finite(K_MAX as i64)) {
        return Err(Error::Domain(format!(
            "the target extends only C^{} past t = {c}, below the requested L = {l}",
            ext.order
        )));
    }
    let (c2, c1) = (&c - &eps * int(2), &c - &eps);
    let hhat = concat(&[&ext.piece, h])?;

    // (1) f to zero on [b, c - 2eps']; e1 = f ∪ g1 ∪ 0
    let g1 = to_zero(sys, f, &wf, &c2, l, policy, &mut cert, "eps")?;
    let e1 = concat(&[f, &g1, &Trajectory::zero(sys.n(), c2.clone(), d.clone())?])?;

    // (3) the difference near c, steered to zero on [c - eps', c]
    let f2 = Trajectory::linear_combination(&[(Rational::one(), &e1.restrict(&c2, &d)?), (-Rational::one(), &hhat)])?
        .restrict(&c2, &c1)?;
    let wf2 = prepare(sys, &f2, tol)?;
    let g2 = to_zero(sys, &f2, &wf2, &c, l, policy, &mut cert, "eps''")?;

    // (4) h3 = ĥ + (f2 ∪ g2 ∪ 0) on [c - 2eps', d]
    let tail = concat(&[&f2, &g2, &Trajectory::zero(sys.n(), c.clone(), d.clone())?])?;
    let h3 = hhat.add(&tail)?;
    let g = concat(&[&g1, &h3.restrict(&c2, &c)?])?;
    let assembled = concat(&[f, &g, h])?;
    certify(sys, &assembled, &b, &c, l, tol, &mut cert)?;
    Ok(Steering { control: g, assembled, certificate: cert })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::rat;
    use crate::syntax::parse_ore_matrix;

    fn integrator() -> System {
        System::new(parse_ore_matrix("[[D, -1]]").unwrap()).unwrap()
    }

    fn tol() -> Rational {
        rat(1, 1_000_000_000)
    }

    #[test]
    fn zero_goes_to_zero() {
        let sys = integrator();
        let f = Trajectory::zero(2, int(0), int(1)).unwrap();
        let s = steer_to_zero(&sys, &f, &int(2), &int(3), Order::Finite(3), &EpsilonPolicy::default(), &tol()).unwrap();
        assert_eq!(s.control, Trajectory::zero(2, int(1), int(2)).unwrap());
    }

    #[test]
    fn integrator_to_zero() {
        let sys = integrator();
        let f: Trajectory = "components: 2\npiece [0, 1]:\n w1 = t\n w2 = 1\n".parse().unwrap();
        let s = steer_to_zero(&sys, &f, &int(2), &int(3), Order::Finite(3), &EpsilonPolicy::default(), &tol()).unwrap();
        assert_eq!(s.control.domain(), (int(1), int(2)));
        assert!(s.certificate.max_deviation() <= 1e-9);
        assert_eq!(s.control.eval_f64(1.99), vec![0.0, 0.0]);
    }
}
