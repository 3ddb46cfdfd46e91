use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::OreMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::field::{Degree, RatFun, Rational, UniPoly};
use crate::ore::OrePoly;
use crate::Error;

/// `R = Uinv * S * Vinv` with `S = diag(I_{ell-1}, r, 0)`.
///
/// `U`, `V` are unimodular and tracked together with their inverses, so all
/// four matrices are exact. For `ell = 0` (zero matrix) `r` is `1` and `S`
/// is the zero matrix.
#[derive(Clone, Debug)]
pub struct TnForm {
    pub ell: usize,
    pub r: OrePoly,
    pub u: OreMatrix,
    pub uinv: OreMatrix,
    pub v: OreMatrix,
    pub vinv: OreMatrix,
    /// Multipliers used while merging adjacent diagonal entries.
    pub merges: Vec<MergeStep>,
}

/// One accepted trial multiplier of the merge phase.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MergeStep {
    pub index: usize,
    pub theta: OrePoly,
    pub degree_before: usize,
    pub degree_after: usize,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct TnOptions {
    /// Randomize the initial row/column order and pivot tie-breaking.
    pub pivot_seed: Option<u64>,
}

impl TnForm {
    pub fn rows(&self) -> usize {
        self.u.rows()
    }

    pub fn cols(&self) -> usize {
        self.v.rows()
    }

    /// `deg r`; `r` is never zero.
    pub fn deg_r(&self) -> usize {
        self.r.degree().finite().unwrap_or(0)
    }

    /// Maximal entry degree of `Vinv`.
    pub fn deg_vinv(&self) -> usize {
        self.vinv.degree().finite().unwrap_or(0)
    }

    pub fn s_matrix(&self) -> OreMatrix {
        let mut s = OreMatrix::zeros(self.rows(), self.cols());
        for i in 0..self.ell {
            let e = if i + 1 == self.ell { self.r.clone() } else { OrePoly::one() };
            s.set(i, i, e);
        }
        s
    }

    /// Re-multiply all parts against `r_orig`.
    pub fn verify(&self, r_orig: &OreMatrix) -> Result<(), Error> {
        let (m, n) = (r_orig.rows(), r_orig.cols());
        let check = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::Verification(what.to_string()))
            }
        };
        check(self.u.rows() == m && self.v.rows() == n, "transform dimensions")?;
        check(!self.r.is_zero() && self.r.lc().is_one(), "r must be monic")?;
        check(self.u.mat_mul(&self.uinv)?.is_identity(), "U * Uinv != I")?;
        check(self.v.mat_mul(&self.vinv)?.is_identity(), "V * Vinv != I")?;
        let prod = self.uinv.mat_mul(&self.s_matrix())?.mat_mul(&self.vinv)?;
        check(&prod == r_orig, "Uinv * S * Vinv != R")
    }
}

/// Working state: `s = u * R * v` at all times.
struct Reducer {
    s: OreMatrix,
    u: OreMatrix,
    uinv: OreMatrix,
    v: OreMatrix,
    vinv: OreMatrix,
    rng: Option<ChaCha8Rng>,
}

impl Reducer {
    fn new(r: &OreMatrix, seed: Option<u64>) -> Self {
        let (m, n) = (r.rows(), r.cols());
        Reducer {
            s: r.clone(),
            u: OreMatrix::identity(m),
            uinv: OreMatrix::identity(m),
            v: OreMatrix::identity(n),
            vinv: OreMatrix::identity(n),
            rng: seed.map(ChaCha8Rng::seed_from_u64),
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        self.s.swap_rows(a, b);
        self.u.swap_rows(a, b);
        self.uinv.swap_cols(a, b);
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        self.s.swap_cols(a, b);
        self.v.swap_cols(a, b);
        self.vinv.swap_rows(a, b);
    }

    /// `row[dst] += q * row[src]`
    fn add_row(&mut self, dst: usize, src: usize, q: &OrePoly) {
        self.s.add_row_multiple(dst, src, q);
        self.u.add_row_multiple(dst, src, q);
        self.uinv.add_col_multiple(src, dst, &-q);
    }

    /// `col[dst] += col[src] * q`
    fn add_col(&mut self, dst: usize, src: usize, q: &OrePoly) {
        self.s.add_col_multiple(dst, src, q);
        self.v.add_col_multiple(dst, src, q);
        self.vinv.add_row_multiple(src, dst, &-q);
    }

    /// `row[i] = c * row[i]` for a nonzero function `c`.
    fn scale_row(&mut self, i: usize, c: &RatFun) {
        let cp = OrePoly::constant(c.clone());
        let ci = OrePoly::constant(c.inv().expect("unit scale"));
        self.s.scale_row(i, &cp);
        self.u.scale_row(i, &cp);
        self.uinv.scale_col(i, &ci);
    }

    /// `col[j] = col[j] * c` for a nonzero function `c`.
    fn scale_col(&mut self, j: usize, c: &RatFun) {
        let cp = OrePoly::constant(c.clone());
        let ci = OrePoly::constant(c.inv().expect("unit scale"));
        self.s.scale_col(j, &cp);
        self.v.scale_col(j, &cp);
        self.vinv.scale_row(j, &ci);
    }

    /// Left-multiply every row by the lcm of its denominators, so that the
    /// fraction-free steps below keep all entries polynomial in `t`.
    fn clear_denominators(&mut self) {
        for i in 0..self.s.rows() {
            let mut l = UniPoly::one();
            for e in self.s.row(i) {
                for c in e.coeffs() {
                    if !c.den().is_one() {
                        l = &l * &c.den().exact_div(&l.gcd(c.den()));
                    }
                }
            }
            if !l.is_one() {
                self.scale_row(i, &RatFun::poly(l));
            }
        }
    }

    /// Reduce `s[i][k]` below the degree of the pivot `s[k][k]` by
    /// fraction-free row steps `row_i <- c * row_i - q * row_k`; true if it
    /// vanished.
    fn reduce_below(&mut self, i: usize, k: usize) -> bool {
        loop {
            let a = self.s.get(i, k);
            let p = self.s.get(k, k);
            if a.is_zero() {
                return true;
            }
            if a.degree() < p.degree() {
                self.strip_row_content(i);
                return false;
            }
            let shift = a.degree().as_i64() - p.degree().as_i64();
            let (ca, cp) = ff_factors(&a.lc(), &p.lc());
            if !cp.is_one() {
                self.scale_row(i, &cp);
            }
            self.add_row(i, k, &-OrePoly::monomial(ca, shift as usize));
        }
    }

    /// Column analogue of [`Self::reduce_below`] for `s[k][j]`:
    /// `col_j <- col_j * c - col_k * q`.
    fn reduce_right(&mut self, k: usize, j: usize) -> bool {
        loop {
            let a = self.s.get(k, j);
            let p = self.s.get(k, k);
            if a.is_zero() {
                return true;
            }
            if a.degree() < p.degree() {
                self.strip_col_content(j);
                return false;
            }
            let shift = a.degree().as_i64() - p.degree().as_i64();
            let (ca, cp) = ff_factors(&a.lc(), &p.lc());
            if !cp.is_one() {
                self.scale_col(j, &cp);
            }
            self.add_col(j, k, &-OrePoly::monomial(ca, shift as usize));
        }
    }

    /// Divide row `i` by the polynomial content shared by all its coefficients.
    fn strip_row_content(&mut self, i: usize) {
        if let Some(g) = content(self.s.row(i)) {
            self.scale_row(i, &g.inv().expect("nonzero content"));
        }
    }

    /// Columns only shed constant content: a function would not commute past `D`.
    fn strip_col_content(&mut self, j: usize) {
        let col: Vec<OrePoly> = (0..self.s.rows()).map(|i| self.s.get(i, j).clone()).collect();
        if let Some(g) = content(&col) {
            let (c, _) = g.num().content_and_primitive();
            if !c.is_one() && g.is_polynomial() {
                self.scale_col(j, &RatFun::constant(c.recip()));
            }
        }
    }

    fn shuffle(&mut self) {
        let Some(rng) = self.rng.as_mut() else { return };
        let mut rows: Vec<usize> = (0..self.s.rows()).collect();
        let mut cols: Vec<usize> = (0..self.s.cols()).collect();
        rows.shuffle(rng);
        cols.shuffle(rng);
        for (a, b) in permutation_swaps(&rows) {
            self.swap_rows(a, b);
        }
        for (a, b) in permutation_swaps(&cols) {
            self.swap_cols(a, b);
        }
    }

    /// Position of a minimal-degree nonzero entry in the block `k.., k..`.
    ///
    /// Ties are broken by fill-in (Markowitz count), then by coefficient
    /// size, then by `(row, col)`; in seeded mode the candidate is drawn at
    /// random among all minimal-degree entries instead.
    fn pick_pivot(&mut self, k: usize, rows: usize, cols: usize) -> Option<(usize, usize)> {
        let mut best: Option<usize> = None;
        let mut cands = Vec::new();
        for i in k..rows {
            for j in k..cols {
                let Degree::Finite(d) = self.s.get(i, j).degree() else { continue };
                match best {
                    Some(b) if d > b => {}
                    Some(b) if d == b => cands.push((i, j)),
                    _ => {
                        best = Some(d);
                        cands.clear();
                        cands.push((i, j));
                    }
                }
            }
        }
        if let Some(rng) = self.rng.as_mut() {
            return cands.choose(rng).copied();
        }
        let row_nnz = |i: usize| (k..cols).filter(|&j| !self.s.get(i, j).is_zero()).count();
        let col_nnz = |j: usize| (k..rows).filter(|&i| !self.s.get(i, j).is_zero()).count();
        cands.into_iter().min_by_key(|&(i, j)| {
            let fill = (row_nnz(i) - 1) * (col_nnz(j) - 1);
            (fill, entry_size(self.s.get(i, j)), i, j)
        })
    }

    /// Diagonalize the block `k..rows, k..cols`; returns the number of
    /// nonzero diagonal entries found (counted from `k`).
    fn diagonalize(&mut self, k0: usize, rows: usize, cols: usize) -> usize {
        let mut k = k0;
        while k < rows.min(cols) {
            let Some((pi, pj)) = self.pick_pivot(k, rows, cols) else { break };
            self.swap_rows(k, pi);
            self.swap_cols(k, pj);
            let mut clean = true;
            // Column below the pivot, by row operations.
            for i in k + 1..rows {
                clean &= self.reduce_below(i, k);
            }
            // Row right of the pivot, by column operations.
            for j in k + 1..cols {
                clean &= self.reduce_right(k, j);
            }
            if clean {
                k += 1;
            }
        }
        k - k0
    }

    /// Bring `diag(e_i, e_{i+1})` to `diag(1, e')`.
    fn merge_pair(&mut self, i: usize, log: &mut Vec<MergeStep>) {
        loop {
            let di = self.s.get(i, i).degree().finite().expect("nonzero diagonal");
            let dj = self.s.get(i + 1, i + 1).degree().finite().expect("nonzero diagonal");
            if dj < di {
                self.swap_rows(i, i + 1);
                self.swap_cols(i, i + 1);
                continue;
            }
            if di == 0 {
                let c = self.s.get(i, i).lc().inv().expect("nonzero");
                self.scale_row(i, &c);
                return;
            }
            let (theta, g_deg) = find_theta(self.s.get(i, i), self.s.get(i + 1, i + 1));
            // col_i += col_{i+1} * theta gives column (e_i, e_{i+1} theta).
            self.add_col(i, i + 1, &theta);
            // Right Euclid on the column by row operations.
            loop {
                let a = self.s.get(i, i);
                let b = self.s.get(i + 1, i);
                if b.is_zero() {
                    break;
                }
                if a.is_zero() || b.degree() < a.degree() {
                    self.swap_rows(i, i + 1);
                    continue;
                }
                self.reduce_below(i + 1, i);
            }
            debug_assert_eq!(self.s.get(i, i).degree(), Degree::Finite(g_deg));
            self.diagonalize(i, i + 2, i + 2);
            let after = self.s.get(i, i).degree().finite().expect("nonzero diagonal");
            log.push(MergeStep { index: i, theta, degree_before: di, degree_after: after });
        }
    }
}

/// `(ca, cp)` with `cp * la = ca * lp`, common factors removed.
fn ff_factors(la: &RatFun, lp: &RatFun) -> (RatFun, RatFun) {
    if lp.is_constant() || !(la.is_polynomial() && lp.is_polynomial()) {
        return (la / lp, RatFun::one());
    }
    let g = la.num().gcd(lp.num());
    let ca = la.num().exact_div(&g);
    let cp = lp.num().exact_div(&g);
    if cp.is_constant() {
        return (RatFun::poly(ca.scale(&cp.lc().recip())), RatFun::one());
    }
    // keep the scaling factor primitive
    let (c, _) = cp.content_and_primitive();
    let c = c.recip();
    (RatFun::poly(ca.scale(&c)), RatFun::poly(cp.scale(&c)))
}

/// Monic polynomial gcd of all coefficients times their rational content,
/// when every coefficient is a polynomial and the result is not one.
fn content(entries: &[OrePoly]) -> Option<RatFun> {
    let mut g = UniPoly::zero();
    let mut num = BigInt::zero();
    let mut den = BigInt::one();
    for e in entries {
        for c in e.coeffs() {
            if !c.is_polynomial() {
                return None;
            }
            if c.is_zero() {
                continue;
            }
            g = g.gcd(c.num());
            let (q, _) = c.num().content_and_primitive();
            num = num.gcd(q.numer());
            den = den.lcm(q.denom());
        }
    }
    if g.is_zero() {
        return None;
    }
    let gc = RatFun::poly(g.scale(&Rational::new(num, den)));
    (!gc.is_one()).then_some(gc)
}

/// Rough bit size of an operator's coefficients.
fn entry_size(p: &OrePoly) -> usize {
    p.coeffs()
        .iter()
        .map(|c| {
            let bits = |u: &UniPoly| u.coeffs().iter().map(|q| (q.numer().bits() + q.denom().bits()) as usize).sum::<usize>();
            bits(c.num()) + bits(c.den())
        })
        .sum()
}

/// Swaps that realize `perm` (position `p` receives original index `perm[p]`).
fn permutation_swaps(perm: &[usize]) -> Vec<(usize, usize)> {
    let mut cur: Vec<usize> = (0..perm.len()).collect();
    let mut out = Vec::new();
    for p in 0..perm.len() {
        let at = cur.iter().position(|&x| x == perm[p]).expect("permutation");
        if at != p {
            cur.swap(p, at);
            out.push((p, at));
        }
    }
    out
}

/// First monomial `theta = t^j D^k` (graded order) for which
/// `gcrd(a, b * theta)` has lower degree than `a`; returns it with that degree.
///
/// Such a monomial always exists when `deg a > 0`: otherwise the two-sided ideal
/// generated by `b` in the Weyl algebra would sit inside the proper left ideal of `a`.
fn find_theta(a: &OrePoly, b: &OrePoly) -> (OrePoly, usize) {
    let da = a.degree().finite().expect("nonzero");
    for total in 0usize.. {
        for k in 0..=total {
            let j = total - k;
            let theta = OrePoly::monomial(RatFun::poly(UniPoly::monomial(crate::field::int(1), j)), k);
            let bt = b * &theta;
            let (g, _, _) = OrePoly::gcrd_extended(a, &bt).expect("a nonzero");
            let dg = g.degree().finite().expect("nonzero gcrd");
            if dg < da {
                return (theta, dg);
            }
        }
        assert!(total < 4096, "merge search exhausted; the ring is simple so this is a bug");
    }
    unreachable!()
}

pub fn tn_form(r: &OreMatrix) -> TnForm {
    tn_form_with(r, TnOptions::default())
}

pub fn tn_form_with(r: &OreMatrix, opts: TnOptions) -> TnForm {
    let (m, n) = (r.rows(), r.cols());
    let mut red = Reducer::new(r, opts.pivot_seed);
    red.shuffle();
    red.clear_denominators();
    let ell = red.diagonalize(0, m, n);
    let mut merges = Vec::new();
    for i in 0..ell.saturating_sub(1) {
        red.merge_pair(i, &mut merges);
    }
    let rpoly = if ell == 0 {
        OrePoly::one()
    } else {
        let last = ell - 1;
        let c = red.s.get(last, last).lc().inv().expect("nonzero");
        red.scale_row(last, &c);
        red.s.get(last, last).clone()
    };
    let form = TnForm {
        ell,
        r: rpoly,
        u: red.u,
        uinv: red.uinv,
        v: red.v,
        vinv: red.vinv,
        merges,
    };
    form
}

/// Rank over Q(t)[D]; diagonalization only, no merging.
pub fn rank_ore(r: &OreMatrix) -> usize {
    let mut red = Reducer::new(r, None);
    red.diagonalize(0, r.rows(), r.cols())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{int, UniPoly};

    fn tpoly(c: &[i64]) -> RatFun {
        RatFun::poly(UniPoly::from_ints(c))
    }

    fn ex12_row() -> OreMatrix {
        let e = OrePoly::new(vec![tpoly(&[0, 0, 1]), tpoly(&[0, 0, 0, 4]), tpoly(&[0, 0, 0, 0, 1])]);
        OreMatrix::from_rows(vec![vec![e, OrePoly::rational(int(-1))]]).unwrap()
    }

    #[test]
    fn scalar_t_d_plus_one() {
        let r = OreMatrix::from_rows(vec![vec![OrePoly::new(vec![RatFun::one(), RatFun::t()])]]).unwrap();
        let f = tn_form(&r);
        assert_eq!(f.ell, 1);
        assert_eq!(f.r.to_string(), "D + t^-1");
        assert_eq!(f.deg_vinv(), 0);
    }

    #[test]
    fn integrator_row() {
        let r = OreMatrix::from_rows(vec![vec![OrePoly::d(), OrePoly::rational(int(-1))]]).unwrap();
        let f = tn_form(&r);
        assert_eq!((f.ell, f.deg_r()), (1, 0));
    }

    #[test]
    fn example_row_has_unit_r() {
        let f = tn_form(&ex12_row());
        assert_eq!((f.ell, f.deg_r()), (1, 0));
    }

    #[test]
    fn ranks() {
        assert_eq!(rank_ore(&OreMatrix::identity(2)), 2);
        let tdd = OrePoly::new(vec![RatFun::zero(), RatFun::t()]);
        let r = OreMatrix::from_rows(vec![vec![OrePoly::d()], vec![tdd]]).unwrap();
        assert_eq!(rank_ore(&r), 1);
        assert_eq!(rank_ore(&OreMatrix::zeros(2, 3)), 0);
        let z = tn_form(&OreMatrix::zeros(2, 3));
        assert_eq!((z.ell, z.r.is_one()), (0, true));
    }

    #[test]
    fn merge_of_two_nonunits() {
        // diag(D, D): the merged form is diag(1, D^2) up to units.
        let r = OreMatrix::from_rows(vec![
            vec![OrePoly::d(), OrePoly::zero()],
            vec![OrePoly::zero(), OrePoly::d()],
        ])
        .unwrap();
        let f = tn_form(&r);
        assert_eq!((f.ell, f.deg_r()), (2, 2));
        assert!(!f.merges.is_empty());
    }

    #[test]
    fn seeded_orders_agree() {
        let r = OreMatrix::from_rows(vec![
            vec![OrePoly::d(), OrePoly::new(vec![RatFun::t(), RatFun::one()])],
            vec![OrePoly::rational(int(2)), OrePoly::d()],
        ])
        .unwrap();
        let base = tn_form(&r).deg_r();
        for seed in 0..5 {
            let f = tn_form_with(&r, TnOptions { pivot_seed: Some(seed) });
            assert_eq!(f.deg_r(), base);
        }
    }

    #[test]
    fn swaps_realize_permutation() {
        let perm = [2, 0, 3, 1];
        let mut v: Vec<usize> = (0..4).collect();
        for (a, b) in permutation_swaps(&perm) {
            v.swap(a, b);
        }
        assert_eq!(v, perm);
    }
}
