use super::{tn_form, OreMatrix, TnForm};
use crate::ore::OrePoly;

/// `B` with `R * B = I_m`, if one exists.
pub fn right_inverse(r: &OreMatrix) -> Option<OreMatrix> {
    right_inverse_from(r, &tn_form(r))
}

pub fn right_inverse_from(r: &OreMatrix, form: &TnForm) -> Option<OreMatrix> {
    let (m, n) = (r.rows(), r.cols());
    if form.ell != m || form.deg_r() != 0 {
        return None;
    }
    // r is monic of degree zero, i.e. 1, so S^ = [I_m; 0].
    let mut shat = OreMatrix::zeros(n, m);
    for i in 0..m {
        shat.set(i, i, OrePoly::one());
    }
    let b = form.v.mat_mul(&shat).ok()?.mat_mul(&form.u).ok()?;
    let check = r.mat_mul(&b).ok()?;
    assert!(check.is_identity(), "right inverse failed verification");
    Some(b)
}

/// `B` with `B * R = I_n`, if one exists.
pub fn left_inverse(r: &OreMatrix) -> Option<OreMatrix> {
    left_inverse_from(r, &tn_form(r))
}

pub fn left_inverse_from(r: &OreMatrix, form: &TnForm) -> Option<OreMatrix> {
    let (m, n) = (r.rows(), r.cols());
    if form.ell != n || form.deg_r() != 0 {
        return None;
    }
    let mut shat = OreMatrix::zeros(n, m);
    for i in 0..n {
        shat.set(i, i, OrePoly::one());
    }
    let b = form.v.mat_mul(&shat).ok()?.mat_mul(&form.u).ok()?;
    let check = b.mat_mul(r).ok()?;
    assert!(check.is_identity(), "left inverse failed verification");
    Some(b)
}

/// Independent route to a right inverse: column operations bring `R` to
/// `[H | 0]` with `H` lower triangular; `R` is right invertible exactly when
/// every diagonal entry of `H` is a unit, and then `B = V [H^-1; 0]`.
pub fn right_inverse_by_triangularization(r: &OreMatrix) -> Option<OreMatrix> {
    let (m, n) = (r.rows(), r.cols());
    if m > n {
        return None;
    }
    let mut h = r.clone();
    let mut v = OreMatrix::identity(n);
    for i in 0..m {
        // Euclid along row i, columns i..n.
        loop {
            let nonzero: Vec<usize> = (i..n).filter(|&j| !h.get(i, j).is_zero()).collect();
            if nonzero.is_empty() {
                return None;
            }
            let p = *nonzero
                .iter()
                .min_by_key(|&&j| h.get(i, j).degree())
                .expect("nonempty");
            if p != i {
                h.swap_cols(i, p);
                v.swap_cols(i, p);
            }
            if nonzero.len() == 1 {
                break;
            }
            for j in i + 1..n {
                if h.get(i, j).is_zero() {
                    continue;
                }
                let (q, _) = h.get(i, j).left_divrem(h.get(i, i)).expect("nonzero pivot");
                let mq = -&q;
                h.add_col_multiple(j, i, &mq);
                v.add_col_multiple(j, i, &mq);
            }
        }
        if !h.get(i, i).is_unit() {
            return None;
        }
    }
    // Forward substitution for X = H^-1 (lower triangular).
    let mut x = OreMatrix::zeros(m, m);
    for c in 0..m {
        for i in c..m {
            let mut acc = if i == c { OrePoly::one() } else { OrePoly::zero() };
            for k in c..i {
                acc = &acc - &(h.get(i, k) * x.get(k, c));
            }
            let inv = OrePoly::constant(h.get(i, i).lc().inv().expect("unit"));
            x.set(i, c, &inv * &acc);
        }
    }
    let mut xs = OreMatrix::zeros(n, m);
    for i in 0..m {
        for j in 0..m {
            xs.set(i, j, x.get(i, j).clone());
        }
    }
    let b = v.mat_mul(&xs).ok()?;
    assert!(r.mat_mul(&b).ok()?.is_identity(), "triangular right inverse failed verification");
    Some(b)
}
