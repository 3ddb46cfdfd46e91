use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tvdae::behaviour::{controllability_report, Verdict};
use tvdae::orematrix::{
    left_inverse, rank_ore, right_inverse, right_inverse_by_triangularization, tn_form, tn_form_with, TnForm, TnOptions,
};
use tvdae::syntax::parse_ore_matrix;
use tvdae::testing;
use tvdae::{OreMatrix, OrePoly, RatFun};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn mat(s: &str) -> OreMatrix {
    parse_ore_matrix(s).unwrap()
}

fn random_shape(r: &mut ChaCha8Rng) -> OreMatrix {
    let (m, n) = (r.gen_range(1..=3), r.gen_range(1..=4));
    testing::ore_matrix(r, m, n, 2, 2)
}

fn assert_form(r: &OreMatrix, f: &TnForm) {
    f.verify(r).unwrap();
    let (m, n) = (r.rows(), r.cols());
    assert!(f.ell <= m.min(n));
    assert!(!f.r.is_zero() && f.r.lc().is_one());
    assert!(f.uinv.mat_mul(&f.u).unwrap().is_identity());
    assert!(f.vinv.mat_mul(&f.v).unwrap().is_identity());
    let s = f.s_matrix();
    for i in 0..m {
        for j in 0..n {
            let e = s.get(i, j);
            if i != j || i >= f.ell {
                assert!(e.is_zero());
            } else if i + 1 < f.ell {
                assert!(e.is_one());
            }
        }
    }
    if f.ell == 0 {
        assert!(r.is_zero());
    }
}

/// Product of a few elementary operations, with its inverse.
fn unimodular(r: &mut ChaCha8Rng, n: usize) -> (OreMatrix, OreMatrix) {
    let mut u = OreMatrix::identity(n);
    let mut uinv = OreMatrix::identity(n);
    for _ in 0..3 {
        let mut e = OreMatrix::identity(n);
        let mut einv = OreMatrix::identity(n);
        let i = r.gen_range(0..n);
        let j = r.gen_range(0..n);
        if i != j && r.gen_bool(0.7) {
            let q = testing::ore_poly(r, 1, 1);
            e.set(i, j, q.clone());
            einv.set(i, j, -q);
        } else if i != j {
            for x in [&mut e, &mut einv] {
                x.set(i, i, OrePoly::zero());
                x.set(j, j, OrePoly::zero());
                x.set(i, j, OrePoly::one());
                x.set(j, i, OrePoly::one());
            }
        } else {
            let mut c = testing::ratfun(r, 1, 3);
            while c.is_zero() {
                c = testing::ratfun(r, 1, 3);
            }
            e.set(i, i, OrePoly::constant(c.clone()));
            einv.set(i, i, OrePoly::constant(c.inv().unwrap()));
        }
        u = e.mat_mul(&u).unwrap();
        uinv = uinv.mat_mul(&einv).unwrap();
    }
    assert!(u.mat_mul(&uinv).unwrap().is_identity());
    (u, uinv)
}

#[test]
fn golden_forms() {
    let f = tn_form(&mat("[[t*D + 1]]"));
    assert_eq!((f.ell, f.r.clone()), (1, tvdae::syntax::parse_ore("D + t^-1").unwrap()));
    assert!(f.v.is_identity());
    for s in ["[[D, -1]]", "[[t^4*D^2 + 4*t^3*D + t^2, -1]]"] {
        let r = mat(s);
        let f = tn_form(&r);
        assert_form(&r, &f);
        assert_eq!((f.ell, f.deg_r()), (1, 0));
    }
}

#[test]
fn ranks() {
    assert_eq!(rank_ore(&OreMatrix::identity(2)), 2);
    assert_eq!(rank_ore(&mat("[[D], [t*D]]")), 1);
    assert_eq!(rank_ore(&OreMatrix::zeros(2, 3)), 0);
    assert_eq!(rank_ore(&mat("[[D, 1], [D^2, D]]")), 1);
}

#[test]
fn golden_inverses() {
    let r = mat("[[D, -1]]");
    let b = right_inverse(&r).unwrap();
    assert!(r.mat_mul(&b).unwrap().is_identity());
    assert_eq!(right_inverse(&OreMatrix::identity(3)).unwrap(), OreMatrix::identity(3));
    assert!(right_inverse(&mat("[[t*D + 1]]")).is_none());

    assert_eq!(left_inverse(&OreMatrix::identity(2)).unwrap(), OreMatrix::identity(2));
    let c = mat("[[D], [1]]");
    let l = left_inverse(&c).unwrap();
    assert!(l.mat_mul(&c).unwrap().is_identity());
    assert!(left_inverse(&mat("[[D]]")).is_none());
}

#[test]
fn identity_factorizations() {
    for j in 1..=3 {
        let dj = format!("D^{j}");
        let a = mat(&format!("[[1, 0, 0], [0, -{dj}, 1], [0, 1, 0]]"));
        let b = mat(&format!("[[1, 0, 0], [0, 0, 1], [0, 1, {dj}]]"));
        assert!(a.mat_mul(&b).unwrap().is_identity());
    }
}

#[test]
fn behaviour_golden() {
    let rep = controllability_report(&mat("[[t*D + 1]]"));
    assert_eq!((rep.verdict, rep.deg_r, rep.l_threshold), (Verdict::NotControllable, 1, 0));
    let rep = controllability_report(&OreMatrix::identity(3));
    assert_eq!(rep.verdict, Verdict::Controllable);
    assert!(rep.right_invertible);
}

/// Exact reduction has a heavy tail in coefficient growth; a fixed seed keeps
/// the runtime of these suites reproducible.
fn pinned(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, rng_seed: RngSeed::Fixed(0x7d_ae), ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(pinned(200))]

    #[test]
    fn tn_form_invariants(seed in any::<u64>()) {
        let r = random_shape(&mut rng(seed));
        let f = tn_form(&r);
        assert_form(&r, &f);
        prop_assert_eq!(rank_ore(&r), f.ell);
    }
}

proptest! {
    #![proptest_config(pinned(40))]

    #[test]
    fn deg_r_does_not_depend_on_pivot_order(seed in any::<u64>()) {
        let r = random_shape(&mut rng(seed));
        let base = tn_form(&r);
        for k in 0..5u64 {
            let f = tn_form_with(&r, TnOptions { pivot_seed: Some(seed ^ (k + 1)) });
            prop_assert_eq!((f.ell, f.deg_r()), (base.ell, base.deg_r()));
        }
    }

    #[test]
    fn matrix_product_is_associative(seed in any::<u64>()) {
        let mut g = rng(seed);
        let a = testing::ore_matrix(&mut g, 2, 2, 2, 1);
        let b = testing::ore_matrix(&mut g, 2, 2, 2, 1);
        let c = testing::ore_matrix(&mut g, 2, 2, 2, 1);
        prop_assert_eq!(a.mat_mul(&b).unwrap().mat_mul(&c).unwrap(), a.mat_mul(&b.mat_mul(&c).unwrap()).unwrap());
        prop_assert_eq!(a.mat_mul(&OreMatrix::identity(2)).unwrap(), a);
    }

    #[test]
    fn two_routes_to_a_right_inverse_agree(seed in any::<u64>()) {
        let mut g = rng(seed);
        let (m, n) = (g.gen_range(1..=2), g.gen_range(1..=3));
        // bias towards invertible rows: add a unit column now and then
        let mut r = testing::ore_matrix(&mut g, m, n, 2, 1);
        if g.gen_bool(0.5) {
            let j = g.gen_range(0..n);
            r.set(0, j, OrePoly::constant(RatFun::constant(tvdae::field::int(1))));
        }
        let a = right_inverse(&r);
        let b = right_inverse_by_triangularization(&r);
        prop_assert_eq!(a.is_some(), b.is_some(), "R = {}", r);
        for x in [a.as_ref(), b.as_ref()].into_iter().flatten() {
            prop_assert!(r.mat_mul(x).unwrap().is_identity());
        }
        let rep = controllability_report(&r);
        if rep.full_row_rank {
            prop_assert_eq!(rep.verdict == Verdict::Controllable, a.is_some());
        }
        prop_assert_eq!(rep.right_invertible, rep.full_row_rank && rep.deg_r == 0);
        prop_assert!(rep.l_threshold >= -1);
        if rep.right_invertible {
            prop_assert_eq!(rep.l_threshold, rep.deg_vinv as i64 - 1);
        }
    }

    #[test]
    fn verdict_survives_unimodular_multiplication(seed in any::<u64>()) {
        let mut g = rng(seed);
        let (m, n) = (g.gen_range(1..=2), g.gen_range(1..=3));
        let r = testing::ore_matrix(&mut g, m, n, 1, 1);
        let (u, _) = unimodular(&mut g, m);
        let (v, _) = unimodular(&mut g, n);
        let moved = u.mat_mul(&r).unwrap().mat_mul(&v).unwrap();
        let (a, b) = (controllability_report(&r), controllability_report(&moved));
        prop_assert_eq!(a.verdict, b.verdict, "R = {}, URV = {}", r, moved);
        prop_assert_eq!((a.rank, a.deg_r), (b.rank, b.deg_r));
    }
}
