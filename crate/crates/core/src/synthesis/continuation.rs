use num_traits::Signed;

use super::{Certificate, EpsilonPolicy, System};
use crate::field::{factorial, from_f64, int, RatFun, Rational, UniPoly};
use crate::trajectory::{
    jets_upto, leading_exponent, singular_points, Expr, JetValue, Order, Piece, Side, Trajectory, ZeroVerdict, K_MAX,
};
use crate::Error;

/// How a free component was carried past the boundary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Branch {
    /// The component's own expression is regular across the boundary.
    Expression,
    /// `(t - b)^n w` was replaced by its Taylor polynomial of the given
    /// order outside, then divided back; `numeric` if the jet was not exact.
    Taylor { pole_order: u32, order: u32, numeric: bool },
}

/// One side's extension.
#[derive(Clone, Debug)]
pub struct Extension {
    pub eps: Rational,
    pub branches: Vec<Branch>,
    /// Extended free components of `Vinv w` on the extension interval.
    pub free: Vec<Expr>,
    /// `V` applied to the extended components: the new part of the solution.
    pub piece: Trajectory,
    /// Junction regularity the construction aims for.
    pub order: Order,
}

#[derive(Clone, Debug)]
pub struct Continuation {
    pub trajectory: Trajectory,
    pub left: Option<Extension>,
    pub right: Option<Extension>,
    pub certificate: Certificate,
}

/// Checks that `s` solves the system and returns `Vinv s`, whose first `m`
/// components must vanish.
pub(crate) fn prepare(sys: &System, s: &Trajectory, tol: &Rational) -> Result<Trajectory, Error> {
    if s.components() != sys.n() {
        return Err(Error::DimensionMismatch(format!(
            "the system has {} variables, the trajectory {} components",
            sys.n(),
            s.components()
        )));
    }
    if let v @ ZeroVerdict::NonZero { .. } = s.apply(&sys.r)?.is_zero(tol) {
        return Err(Error::Domain(format!("the trajectory is not a solution: residual {v}")));
    }
    let w = s.apply(&sys.form.vinv)?;
    if let v @ ZeroVerdict::NonZero { .. } = w.select(0..sys.m()).is_zero(tol) {
        return Err(Error::Verification(format!("Vinv s has nonzero constrained components: {v}")));
    }
    Ok(w)
}

/// The boundary piece of `w` on the given side and its free expressions.
fn boundary(sys: &System, w: &Trajectory, dir: i32) -> (Rational, Rational, Vec<Expr>) {
    let p = if dir > 0 { w.pieces().last().expect("nonempty") } else { &w.pieces()[0] };
    let (end, inner) = if dir > 0 { (p.hi().clone(), p.lo().clone()) } else { (p.lo().clone(), p.hi().clone()) };
    (end, inner, p.components()[sys.m()..].to_vec())
}

/// Whether `e` is smooth on the closed boundary side and past it up to
/// `reach`; `Some(false)` if it is singular exactly at the boundary.
fn regular_through(e: &Expr, inner: &Rational, end: &Rational, reach: &Rational) -> Option<bool> {
    let (lo, hi) = if inner < reach { (inner, reach) } else { (reach, inner) };
    match singular_points(e, lo, hi) {
        Ok(v) if v.is_empty() => Some(true),
        Ok(v) if v.iter().all(|c| c == end) => Some(false),
        Ok(_) => None,
        Err(_) => Some(false),
    }
}

/// Step size for extending past the boundary on side `dir`: `𝕋`-avoiding,
/// at most `limit`, and short enough that components regular at the
/// boundary stay regular over twice the step.
pub(crate) fn choose_eps(
    sys: &System,
    w: &Trajectory,
    dir: i32,
    limit: &Rational,
    policy: &EpsilonPolicy,
) -> Result<Rational, Error> {
    let (end, inner, free) = boundary(sys, w, dir);
    policy.choose(&sys.singular, &end, dir, limit, |eps| {
        let reach = &end + int(2 * dir as i64) * eps;
        free.iter().all(|e| regular_through(e, &inner, &end, &reach).is_some())
    })
}

/// Extends the free components of `w = Vinv s` by `len` past the boundary
/// on side `dir` and maps them back with `V`.
pub(crate) fn extend(sys: &System, w: &Trajectory, dir: i32, len: &Rational, order: u32) -> Result<Extension, Error> {
    let (end, inner, free) = boundary(sys, w, dir);
    let reach = &end + int(dir as i64) * len;
    let mut branches = Vec::with_capacity(free.len());
    let mut ext = Vec::with_capacity(free.len());
    let mut achieved = Order::Infinite;
    for (j, e) in free.iter().enumerate() {
        if regular_through(e, &inner, &end, &reach) == Some(true) {
            branches.push(Branch::Expression);
            ext.push(e.clone());
            continue;
        }
        let (x, branch) = taylor_extension(e, &end, &inner, -dir, order).map_err(|why| {
            Error::Unsupported(format!(
                "continuation not computable for this expression class: w{} = {e} at t = {end}: {why}",
                sys.m() + j + 1
            ))
        })?;
        if let Branch::Taylor { order: k, .. } = branch {
            // V differentiates, costing up to deg V orders at the junction
            let vdeg = sys.form.v.degree().finite().unwrap_or(0) as i64;
            achieved = achieved.min(Order::Finite((k as i64 - vdeg).max(-1)));
        }
        branches.push(branch);
        ext.push(x);
    }
    let (lo, hi) = if dir > 0 { (end.clone(), reach) } else { (reach, end.clone()) };
    let mut comps = vec![Expr::zero(); sys.m()];
    comps.extend(ext.iter().cloned());
    let wt = Trajectory::new(vec![Piece::new(lo, hi, comps)?])?;
    let piece = wt.apply(&sys.form.v)?;
    Ok(Extension { eps: len.clone(), branches, free: ext, piece, order: achieved })
}

/// `P(t) / (t - b)^n` where `P` is the Taylor polynomial of `(t - b)^n e`
/// at `b` from side `sigma`, `n` the pole order of `e` there.
fn taylor_extension(e: &Expr, b: &Rational, inner: &Rational, sigma: i32, order: u32) -> Result<(Expr, Branch), String> {
    let pole = match leading_exponent(e, b, sigma)? {
        None => 0,
        Some(v) if !v.is_negative() => 0,
        Some(v) if v.is_integer() => (-v).to_integer().try_into().map_err(|_| "pole order too large".to_string())?,
        Some(v) => return Err(format!("branch point of order {v}")),
    };
    let shift = UniPoly::linear_root(b);
    let scaled = Expr::mul(vec![Expr::rat(RatFun::poly(shift.pow(pole))), e.clone()]);
    let room = (b - inner).abs();
    let (vals, _) = jets_upto(&scaled, b, sigma, order, &room);
    if vals.is_empty() {
        return Err("no finite one-sided value".into());
    }
    let mut numeric = false;
    let mut p = UniPoly::zero();
    let mut power = UniPoly::one();
    for (k, v) in vals.iter().enumerate() {
        let c = match v {
            JetValue::Exact(q) => q.clone(),
            JetValue::Approx { value, .. } => {
                numeric = true;
                from_f64(*value).ok_or_else(|| "non-finite derivative".to_string())?
            }
        };
        // jets are derivatives in t, so the sign of the side is already applied
        p = &p + &power.scale(&(c / factorial(k as u32)));
        power = &power * &shift;
    }
    let den = shift.pow(pole);
    let ext = RatFun::new(p, den).map_err(|e| e.to_string())?;
    let k = vals.len() as u32 - 1;
    Ok((Expr::rat(ext), Branch::Taylor { pole_order: pole, order: k, numeric }))
}

/// Extends a verified solution `s` on `[a, b]` a little to the left, right
/// or both. The result restricts to `s` exactly; the new parts are
/// `V (d/dt)` of the extended free components of `Vinv (d/dt) s`, checked
/// against `s` by jet matching and against the system by their residual.
pub fn continue_solution(
    sys: &System,
    s: &Trajectory,
    side: Side,
    policy: &EpsilonPolicy,
    tol: &Rational,
) -> Result<Continuation, Error> {
    let w = prepare(sys, s, tol)?;
    let order = sys.degree() as u32 + 2;
    let mut cert = Certificate::default();
    let mut out = s.clone();
    let (a, b) = s.domain();
    let limit = (&b - &a).max(int(1));
    let mut left = None;
    let mut right = None;
    for dir in [-1, 1] {
        let wanted = match side {
            Side::Both => true,
            Side::Left => dir < 0,
            Side::Right => dir > 0,
        };
        if !wanted {
            continue;
        }
        let eps = choose_eps(sys, &w, dir, &limit, policy)?;
        let ext = extend(sys, &w, dir, &eps, order)?;
        cert.steps.push((if dir < 0 { "eps_left" } else { "eps_right" }.into(), eps.clone()));
        let joined = if dir < 0 {
            Trajectory::glue(&ext.piece, &out, ext.order, K_MAX)
        } else {
            Trajectory::glue(&out, &ext.piece, ext.order, K_MAX)
        };
        out = joined.map_err(|e| Error::Verification(format!("continued solution does not join: {e}")))?;
        let at = if dir < 0 { &a } else { &b };
        cert.check_junction(&out, at, ext.order)?;
        cert.check_residual(&sys.r, &ext.piece, tol)?;
        for (j, br) in ext.branches.iter().enumerate() {
            if let Branch::Taylor { pole_order, order, numeric } = br {
                cert.notes.push(format!(
                    "w{} at t = {at}: Taylor extension of order {order} (pole order {pole_order}{}); junction is C^{order} only",
                    sys.m() + j + 1,
                    if *numeric { ", numeric jet" } else { "" }
                ));
            }
        }
        if dir < 0 {
            left = Some(ext);
        } else {
            right = Some(ext);
        }
    }
    Ok(Continuation { trajectory: out, left, right, certificate: cert })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::rat;
    use crate::syntax::parse_ore_matrix;

    fn sys(s: &str) -> System {
        System::new(parse_ore_matrix(s).unwrap()).unwrap()
    }

    fn tol() -> Rational {
        rat(1, 1_000_000_000)
    }

    #[test]
    fn integrator_extends_by_its_expressions() {
        let sys = sys("[[D, -1]]");
        let s: Trajectory = "components: 2\npiece [0, 1]:\n w1 = t\n w2 = 1\n".parse().unwrap();
        let c = continue_solution(&sys, &s, Side::Both, &EpsilonPolicy::default(), &tol()).unwrap();
        let (lo, hi) = c.trajectory.domain();
        assert!(lo < int(0) && hi > int(1));
        assert_eq!(c.trajectory.restrict(&int(0), &int(1)).unwrap(), s);
        assert!(c.right.unwrap().branches.iter().all(|b| *b == Branch::Expression));
    }

    #[test]
    fn scalar_singular_system_is_rejected() {
        let err = System::new(parse_ore_matrix("[[t*D + 1]]").unwrap()).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn kink_at_the_boundary_uses_taylor() {
        // example row, solution restricted to [-1, 0]: |t|^(3/2) is C^1 at 0
        let sys = sys("[[t^4*D^2 + 4*t^3*D + t^2, -1]]");
        let s: Trajectory =
            "components: 2\npiece [-1, 0]:\n w1 = abs(t)^(3/2)\n w2 = 31/4*t^2*abs(t)^(3/2)\n".parse().unwrap();
        let c = continue_solution(&sys, &s, Side::Right, &EpsilonPolicy::default(), &tol()).unwrap();
        assert_eq!(c.trajectory.restrict(&int(-1), &int(0)).unwrap(), s);
        let ext = c.right.unwrap();
        assert!(matches!(ext.branches[0], Branch::Taylor { order: 1, .. }), "{:?}", ext.branches);
    }
}
