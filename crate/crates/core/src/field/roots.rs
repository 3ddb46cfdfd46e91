//! Sturm sequences and real-root isolation with rational interval endpoints.

use std::fmt;

use num_traits::{One, Signed, Zero};

use super::{int, Rational, RatFun, UniPoly};
use crate::Error;

/// An isolating interval for one real root of `poly` (square-free, monic).
///
/// `lo == hi` means the root is the rational number `lo`. Otherwise neither
/// endpoint is a root and `(lo, hi)` contains exactly one root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootInterval {
    pub lo: Rational,
    pub hi: Rational,
    pub poly: UniPoly,
}

impl RootInterval {
    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn exact(&self) -> Option<&Rational> {
        self.is_exact().then_some(&self.lo)
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    /// Sturm certificate: number of distinct roots of `poly` in `(lo, hi]`,
    /// or 1 for an exact root.
    pub fn certificate_count(&self) -> usize {
        if self.is_exact() {
            return usize::from(self.poly.eval(&self.lo).is_zero());
        }
        sturm_count(&self.poly, &self.lo, &self.hi)
    }

    pub fn refine(&mut self, width: &Rational) {
        refine_root(self, width);
    }

    pub fn midpoint_f64(&self) -> f64 {
        super::to_f64(&((&self.lo + &self.hi) / int(2)))
    }
}

impl fmt::Display for RootInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

pub fn sturm_sequence(p: &UniPoly) -> Vec<UniPoly> {
    let mut seq = vec![p.clone()];
    if p.is_constant() {
        return seq;
    }
    seq.push(p.derivative());
    loop {
        let n = seq.len();
        let (_, r) = seq[n - 2].div_rem(&seq[n - 1]);
        if r.is_zero() {
            break;
        }
        // positive rescaling keeps signs intact and coefficients tame
        let r = -&r;
        let c = r.lc().abs().recip();
        seq.push(r.scale(&c));
    }
    seq
}

fn variations(seq: &[UniPoly], x: &Rational) -> usize {
    let mut count = 0;
    let mut last = 0;
    for p in seq {
        let s = p.sign_at(x);
        if s == 0 {
            continue;
        }
        if last != 0 && s != last {
            count += 1;
        }
        last = s;
    }
    count
}

fn count_with(seq: &[UniPoly], a: &Rational, b: &Rational) -> usize {
    variations(seq, a).saturating_sub(variations(seq, b))
}

/// Number of distinct real roots of `p` in the half-open interval `(a, b]`.
pub fn sturm_count(p: &UniPoly, a: &Rational, b: &Rational) -> usize {
    if p.is_constant() || a >= b {
        return 0;
    }
    let seq = sturm_sequence(&p.squarefree());
    count_with(&seq, a, b)
}

/// Number of distinct real roots strictly inside `(a, b)`.
pub fn roots_in_open(p: &UniPoly, a: &Rational, b: &Rational) -> usize {
    if p.is_zero() {
        return usize::MAX;
    }
    let n = sturm_count(p, a, b);
    if n > 0 && p.eval(b).is_zero() {
        n - 1
    } else {
        n
    }
}

/// One isolating interval per distinct real root, in increasing order.
pub fn isolate_real_roots(p: &UniPoly) -> Result<Vec<RootInterval>, Error> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let sf = p.squarefree();
    if sf.is_constant() {
        return Ok(Vec::new());
    }
    let seq = sturm_sequence(&sf);
    let bound = sf.root_bound();
    let lead = sf.primitive_integer().last().cloned().expect("nonzero");
    let lead = Rational::from_integer(lead);
    let mut out = Vec::new();
    let mut stack = vec![(-bound.clone(), bound)];
    while let Some((lo, hi)) = stack.pop() {
        let n = count_with(&seq, &lo, &hi);
        if n == 0 {
            continue;
        }
        if n == 1 {
            out.push(finalize(&sf, &lead, lo, hi));
            continue;
        }
        let mid = split_point(&sf, &lo, &hi);
        // push right first so output comes out sorted
        stack.push((mid.clone(), hi));
        stack.push((lo, mid));
    }
    Ok(out)
}

/// A point strictly between `lo` and `hi` that is not a root of `p`.
fn split_point(p: &UniPoly, lo: &Rational, hi: &Rational) -> Rational {
    let w = hi - lo;
    for k in 2i64.. {
        for j in 1..k {
            let m = lo + &w * rat_frac(j, k);
            if !p.eval(&m).is_zero() {
                return m;
            }
        }
    }
    unreachable!()
}

fn rat_frac(j: i64, k: i64) -> Rational {
    super::rat(j, k)
}

/// Turns `(lo, hi]` holding exactly one root into a [`RootInterval`], snapping
/// rational roots to degenerate intervals. Any rational root of the primitive
/// integer polynomial is a multiple of `1/lead`.
fn finalize(p: &UniPoly, lead: &Rational, mut lo: Rational, mut hi: Rational) -> RootInterval {
    if p.eval(&hi).is_zero() {
        return RootInterval { lo: hi.clone(), hi, poly: p.clone() };
    }
    let grid = lead.recip();
    let s_lo = p.sign_at(&lo);
    while &hi - &lo >= grid {
        let mid = (&lo + &hi) / int(2);
        let s = p.sign_at(&mid);
        if s == 0 {
            return RootInterval { lo: mid.clone(), hi: mid, poly: p.clone() };
        }
        if s == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let k_lo = (&lo * lead).ceil();
    let k_hi = (&hi * lead).floor();
    let mut k = k_lo;
    while k <= k_hi {
        let c = &k / lead;
        if p.eval(&c).is_zero() {
            return RootInterval { lo: c.clone(), hi: c, poly: p.clone() };
        }
        k += Rational::one();
    }
    RootInterval { lo, hi, poly: p.clone() }
}

/// Bisects until the width is at most `width`.
pub fn refine_root(iv: &mut RootInterval, width: &Rational) {
    if iv.is_exact() {
        return;
    }
    let s_lo = iv.poly.sign_at(&iv.lo);
    while iv.width() > *width {
        let mid = (&iv.lo + &iv.hi) / int(2);
        let s = iv.poly.sign_at(&mid);
        if s == 0 {
            iv.lo = mid.clone();
            iv.hi = mid;
            return;
        }
        if s == s_lo {
            iv.lo = mid;
        } else {
            iv.hi = mid;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SingularKind {
    Pole,
    Zero,
}

impl fmt::Display for SingularKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SingularKind::Pole => write!(f, "pole"),
            SingularKind::Zero => write!(f, "zero"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SingularPoint {
    pub interval: RootInterval,
    pub order: u32,
    pub kind: SingularKind,
}

/// Finite set of real algebraic points, each with a disjoint isolating interval.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SingularSet {
    pub points: Vec<SingularPoint>,
}

impl SingularSet {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Merges the real roots of several polynomials into one set of disjoint
    /// isolating intervals. A point that is a pole of any source is reported
    /// as a pole; the order is the largest multiplicity among sources of that kind.
    pub fn from_sources(sources: &[(UniPoly, SingularKind)]) -> SingularSet {
        let mut factors: Vec<(UniPoly, u32, SingularKind)> = Vec::new();
        for (p, kind) in sources {
            if p.is_zero() {
                continue;
            }
            for (f, k) in p.squarefree_decomposition() {
                factors.push((f, k, *kind));
            }
        }
        if factors.is_empty() {
            return SingularSet::default();
        }
        let mut combined = UniPoly::one();
        for (f, _, _) in &factors {
            let g = combined.gcd(f);
            combined = &combined * &f.exact_div(&g);
        }
        let roots = isolate_real_roots(&combined).expect("nonzero product");
        let mut points = Vec::with_capacity(roots.len());
        for iv in roots {
            let mut best: Option<(SingularKind, u32)> = None;
            for (f, k, kind) in &factors {
                let hit = match iv.exact() {
                    Some(c) => f.eval(c).is_zero(),
                    None => sturm_count(f, &iv.lo, &iv.hi) > 0,
                };
                if !hit {
                    continue;
                }
                best = Some(match best {
                    None => (*kind, *k),
                    Some((bk, bo)) if bk == *kind => (bk, bo.max(*k)),
                    Some((SingularKind::Pole, bo)) => (SingularKind::Pole, bo),
                    Some(_) => (*kind, *k),
                });
            }
            let (kind, order) = best.expect("root of the product belongs to some factor");
            points.push(SingularPoint { interval: iv, order, kind });
        }
        SingularSet { points }
    }

    /// Certifies that no point lies in the half-open interval `(lo, hi]`,
    /// refining isolating intervals as needed.
    pub fn avoids_half_open(&self, lo: &Rational, hi: &Rational) -> bool {
        self.points.iter().all(|p| !point_in_half_open(&p.interval, lo, hi))
    }

    /// Certifies that no point lies in the closed interval `[lo, hi]`.
    pub fn avoids_closed(&self, lo: &Rational, hi: &Rational) -> bool {
        self.points.iter().all(|p| match p.interval.exact() {
            Some(c) => c < lo || c > hi,
            None => !point_in_half_open(&p.interval, lo, hi),
        })
    }

    /// Exact rational points of the set lying strictly inside `(lo, hi)`, and
    /// whether any irrational point lies there.
    pub fn points_in_open(&self, lo: &Rational, hi: &Rational) -> (Vec<Rational>, bool) {
        let mut rational = Vec::new();
        let mut irrational = false;
        for p in &self.points {
            match p.interval.exact() {
                Some(c) if c > lo && c < hi => rational.push(c.clone()),
                Some(_) => {}
                None => {
                    if point_in_half_open(&p.interval, lo, hi) {
                        irrational = true;
                    }
                }
            }
        }
        rational.sort();
        rational.dedup();
        (rational, irrational)
    }
}

/// Whether the (irrational or exact) root isolated by `iv` lies in `(lo, hi]`.
fn point_in_half_open(iv: &RootInterval, lo: &Rational, hi: &Rational) -> bool {
    if let Some(c) = iv.exact() {
        return c > lo && c <= hi;
    }
    let mut iv = iv.clone();
    for _ in 0..400 {
        if iv.hi <= *lo || iv.lo >= *hi {
            return false;
        }
        if iv.lo >= *lo && iv.hi <= *hi {
            return true;
        }
        let w = iv.width() / int(2);
        refine_root(&mut iv, &w);
        if let Some(c) = iv.exact() {
            return c > lo && c <= hi;
        }
    }
    // unreachable for an irrational root and rational bounds; be conservative
    true
}

impl fmt::Display for SingularSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.points.is_empty() {
            return write!(f, "{{}}");
        }
        for (i, p) in self.points.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{} {} order {}", p.interval, p.kind, p.order)?;
        }
        Ok(())
    }
}

/// Real poles (roots of the denominator) and zeros (roots of the numerator),
/// with multiplicities from the square-free decomposition.
pub fn pole_zero_set(f: &RatFun) -> Result<SingularSet, Error> {
    if f.is_zero() {
        return Err(Error::ZeroFunction);
    }
    let mut points = SingularSet::from_sources(&[(f.den().clone(), SingularKind::Pole)]).points;
    points.extend(SingularSet::from_sources(&[(f.num().clone(), SingularKind::Zero)]).points);
    points.sort_by(|a, b| a.interval.lo.cmp(&b.interval.lo));
    Ok(SingularSet { points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::rat;

    #[test]
    fn simple_examples() {
        let r = isolate_real_roots(&UniPoly::t()).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].exact(), Some(&Rational::zero()));
        assert!(isolate_real_roots(&UniPoly::from_ints(&[1, 0, 1])).unwrap().is_empty());
        assert!(isolate_real_roots(&UniPoly::zero()).is_err());
    }

    #[test]
    fn cubic_isolates_three_roots() {
        let p = UniPoly::from_ints(&[0, -2, 0, 1]);
        let r = isolate_real_roots(&p).unwrap();
        assert_eq!(r.len(), 3);
        // -sqrt(2) < -7/5 and sqrt(2) > 7/5
        assert!(r[0].lo < rat(-7, 5) && r[0].hi < Rational::zero());
        assert_eq!(r[1].exact(), Some(&Rational::zero()));
        assert!(r[2].hi > rat(7, 5) && r[2].lo > Rational::zero());
        for iv in &r {
            assert_eq!(iv.certificate_count(), 1);
        }
    }

    #[test]
    fn rational_roots_snap() {
        // (3t - 1)(2t + 5)(t^2 - 2)
        let p = &(&UniPoly::from_ints(&[-1, 3]) * &UniPoly::from_ints(&[5, 2]))
            * &UniPoly::from_ints(&[-2, 0, 1]);
        let r = isolate_real_roots(&p).unwrap();
        let exact: Vec<_> = r.iter().filter_map(|iv| iv.exact().cloned()).collect();
        assert_eq!(exact, vec![rat(-5, 2), rat(1, 3)]);
        assert_eq!(r.len(), 4);
    }

    #[test]
    fn refinement_narrows() {
        let p = UniPoly::from_ints(&[-2, 0, 1]);
        let mut r = isolate_real_roots(&p).unwrap();
        let w = rat(1, 1 << 20);
        r[1].refine(&w);
        assert!(r[1].width() <= w);
        assert_eq!(r[1].certificate_count(), 1);
        let approx = r[1].midpoint_f64();
        assert!((approx - 2f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn pole_zero_examples() {
        let inv_t = RatFun::new(UniPoly::one(), UniPoly::t()).unwrap();
        let s = pole_zero_set(&inv_t).unwrap();
        assert_eq!(s.points.len(), 1);
        assert_eq!(s.points[0].kind, SingularKind::Pole);
        assert_eq!(s.points[0].order, 1);
        assert_eq!(s.points[0].interval.exact(), Some(&Rational::zero()));

        let t2 = RatFun::poly(UniPoly::from_ints(&[0, 0, 1]));
        let s = pole_zero_set(&t2).unwrap();
        assert_eq!((s.points[0].kind, s.points[0].order), (SingularKind::Zero, 2));

        let f = RatFun::new(UniPoly::from_ints(&[-1, 1]), UniPoly::from_ints(&[-1, 0, 1])).unwrap();
        let s = pole_zero_set(&f).unwrap();
        assert_eq!(s.points.len(), 1);
        assert_eq!(s.points[0].interval.exact(), Some(&int(-1)));
        assert_eq!((s.points[0].kind, s.points[0].order), (SingularKind::Pole, 1));

        assert!(pole_zero_set(&RatFun::zero()).is_err());
    }

    #[test]
    fn half_open_avoidance() {
        let s = SingularSet::from_sources(&[(UniPoly::from_ints(&[-2, 0, 1]), SingularKind::Pole)]);
        assert!(s.avoids_half_open(&int(0), &rat(14, 10)));
        assert!(!s.avoids_half_open(&int(0), &rat(15, 10)));
        let z = SingularSet::from_sources(&[(UniPoly::t(), SingularKind::Pole)]);
        assert!(z.avoids_half_open(&int(0), &int(1)));
        assert!(!z.avoids_half_open(&int(-1), &int(0)));
    }
}
