use std::fmt;

use crate::field::Degree;
use crate::ore::OrePoly;
use crate::Error;

/// Dense `rows x cols` matrix over Q(t)[D], row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OreMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<OrePoly>,
}

impl OreMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<OrePoly>) -> Result<Self, Error> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch("matrices must be at least 1x1".into()));
        }
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Ok(OreMatrix { rows, cols, entries })
    }

    pub fn from_rows(rows: Vec<Vec<OrePoly>>) -> Result<Self, Error> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::new(r, c, rows.into_iter().flatten().collect())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        OreMatrix { rows, cols, entries: vec![OrePoly::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, OrePoly::one());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &OrePoly {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: OrePoly) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[OrePoly] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[OrePoly] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let e = self.get(i, j);
                    if i == j {
                        e.is_one()
                    } else {
                        e.is_zero()
                    }
                })
            })
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    /// Maximal D-degree over all entries.
    pub fn degree(&self) -> Degree {
        self.entries.iter().map(|e| e.degree()).max().unwrap_or(Degree::NegInf)
    }

    pub fn mat_mul(&self, rhs: &OreMatrix) -> Result<OreMatrix, Error> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        // Products are cheap when the right factor has polynomial
        // coefficients (its derivatives stay small). Otherwise, if the left
        // factor is the polynomial one, go through the adjoint:
        // A B = ((B*)^T (A*)^T)*^T.
        let poly = |m: &OreMatrix| m.entries.iter().all(OrePoly::has_polynomial_coeffs);
        if !poly(rhs) && poly(self) {
            return Ok(rhs.adjoint_transpose().plain_mul(&self.adjoint_transpose()).adjoint_transpose());
        }
        Ok(self.plain_mul(rhs))
    }

    fn plain_mul(&self, rhs: &OreMatrix) -> OreMatrix {
        let mut out = OreMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let acc = OrePoly::sum_of_products((0..self.cols).map(|k| (self.get(i, k), rhs.get(k, j))));
                out.set(i, j, acc);
            }
        }
        out
    }

    /// Entrywise formal adjoint of the transpose; an anti-automorphism
    /// for products and an involution.
    pub fn adjoint_transpose(&self) -> OreMatrix {
        let mut out = OreMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).adjoint());
            }
        }
        out
    }

    pub fn transpose(&self) -> OreMatrix {
        let mut out = OreMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    /// Rows `start..end` as a new matrix.
    pub fn row_block(&self, start: usize, end: usize) -> OreMatrix {
        OreMatrix {
            rows: end - start,
            cols: self.cols,
            entries: self.entries[start * self.cols..end * self.cols].to_vec(),
        }
    }

    pub fn col_block(&self, start: usize, end: usize) -> OreMatrix {
        let mut out = OreMatrix::zeros(self.rows, end - start);
        for i in 0..self.rows {
            for j in start..end {
                out.set(i, j - start, self.get(i, j).clone());
            }
        }
        out
    }

    // Elementary operations, used by the normal-form reduction.

    pub(crate) fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.entries.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub(crate) fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.entries.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// `row[dst] += q * row[src]`
    pub(crate) fn add_row_multiple(&mut self, dst: usize, src: usize, q: &OrePoly) {
        for j in 0..self.cols {
            let s = self.get(src, j);
            if s.is_zero() {
                continue;
            }
            let v = self.get(dst, j) + &(q * s);
            self.set(dst, j, v);
        }
    }

    /// `col[dst] += col[src] * q`
    pub(crate) fn add_col_multiple(&mut self, dst: usize, src: usize, q: &OrePoly) {
        for i in 0..self.rows {
            let s = self.get(i, src);
            if s.is_zero() {
                continue;
            }
            let v = self.get(i, dst) + &(s * q);
            self.set(i, dst, v);
        }
    }

    /// `row[i] = c * row[i]`
    pub(crate) fn scale_row(&mut self, i: usize, c: &OrePoly) {
        for j in 0..self.cols {
            let v = c * self.get(i, j);
            self.set(i, j, v);
        }
    }

    /// `col[j] = col[j] * c`
    pub(crate) fn scale_col(&mut self, j: usize, c: &OrePoly) {
        for i in 0..self.rows {
            let v = self.get(i, j) * c;
            self.set(i, j, v);
        }
    }
}

/// `[[a, b], [c, d]]` with entries in left-normal form.
impl fmt::Display for OreMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{int, RatFun};

    fn d_pow(j: usize) -> OrePoly {
        OrePoly::monomial(RatFun::one(), j)
    }

    /// The 3x3 factorization of the identity with a D^j entry.
    pub(crate) fn identity_factors(j: usize) -> (OreMatrix, OreMatrix) {
        let z = OrePoly::zero;
        let o = OrePoly::one;
        let a = OreMatrix::from_rows(vec![
            vec![o(), z(), z()],
            vec![z(), -&d_pow(j), o()],
            vec![z(), o(), z()],
        ])
        .unwrap();
        let b = OreMatrix::from_rows(vec![
            vec![o(), z(), z()],
            vec![z(), z(), o()],
            vec![z(), o(), d_pow(j)],
        ])
        .unwrap();
        (a, b)
    }

    #[test]
    fn identity_factorization() {
        for j in 1..=3 {
            let (a, b) = identity_factors(j);
            assert!(a.mat_mul(&b).unwrap().is_identity());
        }
    }

    #[test]
    fn identity_is_neutral_and_dims_checked() {
        let a = OreMatrix::from_rows(vec![vec![OrePoly::d(), OrePoly::rational(int(-1))]]).unwrap();
        assert_eq!(a.mat_mul(&OreMatrix::identity(2)).unwrap(), a);
        assert!(a.mat_mul(&a).is_err());
        assert!(OreMatrix::from_rows(vec![vec![OrePoly::d()], vec![]]).is_err());
    }
}
