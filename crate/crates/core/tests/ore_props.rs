use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tvdae::field::{int, Degree};
use tvdae::syntax::{parse_expr, parse_ore};
use tvdae::testing;
use tvdae::trajectory::Trajectory;
use tvdae::{OrePoly, RatFun};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn op(s: &str) -> OrePoly {
    parse_ore(s).unwrap()
}

/// `sum c_i f^(i)`, computed from the coefficients alone.
fn act(p: &OrePoly, f: &RatFun) -> RatFun {
    let mut out = RatFun::zero();
    let mut deriv = f.clone();
    for c in p.coeffs() {
        out = &out + &(c * &deriv);
        deriv = deriv.derivative();
    }
    out
}

#[test]
fn multiplication_examples() {
    assert_eq!(&op("D") * &op("t"), op("t*D + 1"));
    assert_eq!(&op("t") * &op("D"), op("t*D"));
    assert_eq!(&op("D^2") * &op("t"), op("t*D^2 + 2*D"));
    assert_eq!(&(&op("D") * &op("t")) - &(&op("t") * &op("D")), OrePoly::one());
}

#[test]
fn division_examples() {
    let (q, r) = op("D^2").right_divrem(&op("t*D - 1")).unwrap();
    assert_eq!((q, r), (op("t^-1*D"), OrePoly::zero()));
    let b = op("t*D - 1");
    assert_eq!(b.right_divrem(&b).unwrap(), (OrePoly::one(), OrePoly::zero()));
    assert_eq!(op("t*D + 1").right_divrem(&op("D")).unwrap(), (op("t"), OrePoly::one()));

    assert_eq!(b.left_divrem(&b).unwrap(), (OrePoly::one(), OrePoly::zero()));
    assert_eq!(op("t*D^2").left_divrem(&op("D")).unwrap(), (op("t*D - 1"), OrePoly::zero()));
    assert_eq!(OrePoly::one().left_divrem(&op("D")).unwrap(), (OrePoly::zero(), OrePoly::one()));
    assert!(op("D").right_divrem(&OrePoly::zero()).is_err());
}

#[test]
fn gcrd_and_lclm_examples() {
    let (g, u, v) = OrePoly::gcrd_extended(&op("D^2"), &op("t*D - 1")).unwrap();
    assert_eq!(g, op("D - t^-1"));
    assert_eq!(&(&u * &op("D^2")) + &(&v * &op("t*D - 1")), g);

    let a = op("2*t*D + 3");
    let (g, u, v) = OrePoly::gcrd_extended(&a, &OrePoly::zero()).unwrap();
    assert_eq!(g, a.monic());
    assert_eq!(u, OrePoly::constant(a.lc().inv().unwrap()));
    assert!(v.is_zero());

    assert_eq!(OrePoly::gcrd_extended(&op("D"), &op("t")).unwrap().0, OrePoly::one());
    assert!(OrePoly::gcrd_extended(&OrePoly::zero(), &OrePoly::zero()).is_err());

    assert_eq!(OrePoly::lclm(&op("D"), &op("D")).unwrap(), op("D"));
    assert_eq!(OrePoly::lclm(&a, &OrePoly::one()).unwrap(), a.monic());
    let m = OrePoly::lclm(&op("D"), &op("D - 1")).unwrap();
    assert_eq!(m.degree(), Degree::Finite(2));
    for b in [op("D"), op("D - 1")] {
        assert!(m.right_divrem(&b).unwrap().1.is_zero());
    }
}

#[test]
fn application_examples() {
    let applied = Trajectory::from_exprs(int(1), int(2), vec![op("t*D + 1").apply(&parse_expr("t^-1").unwrap())]).unwrap();
    assert_eq!(applied.is_zero(&int(1)), tvdae::trajectory::ZeroVerdict::ExactZero);
    assert_eq!(op("D").apply(&parse_expr("t^2").unwrap()).to_string(), "2*t");
    let u = op("t^4*D^2 + 4*t^3*D + t^2").apply(&parse_expr("abs(t)^(3/2)").unwrap());
    let want = parse_expr("31/4*t^2*abs(t)^(3/2)").unwrap();
    for x in [-0.9, -0.3, 0.2, 0.7] {
        assert!((u.eval_f64(x) - want.eval_f64(x)).abs() <= 1e-12 * (1.0 + want.eval_f64(x).abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn ring_axioms(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = testing::ore_poly(&mut r, 3, 2);
        let b = testing::ore_poly(&mut r, 3, 2);
        let c = testing::ore_poly(&mut r, 3, 2);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&(&a + &b) * &c, &(&a * &c) + &(&b * &c));
        prop_assert_eq!(&(&a * &b).degree(), &(a.degree() + b.degree()));
        // products act as compositions
        let f = testing::ratfun(&mut r, 2, 4);
        prop_assert_eq!(act(&(&a * &b), &f), act(&a, &act(&b, &f)));
    }

    #[test]
    fn division_reconstructs(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = testing::ore_poly(&mut r, 4, 2);
        let b = testing::nonzero_ore_poly(&mut r, 3, 2);
        let (q, rem) = a.right_divrem(&b).unwrap();
        prop_assert_eq!(&(&q * &b) + &rem, a.clone());
        prop_assert!(rem.degree() < b.degree());
        let (q, rem) = a.left_divrem(&b).unwrap();
        prop_assert_eq!(&(&b * &q) + &rem, a);
        prop_assert!(rem.degree() < b.degree());
    }

    #[test]
    fn gcrd_is_a_common_right_divisor(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = testing::nonzero_ore_poly(&mut r, 3, 2);
        let b = testing::ore_poly(&mut r, 3, 2);
        let (g, u, v) = OrePoly::gcrd_extended(&a, &b).unwrap();
        prop_assert!(g.lc().is_one());
        prop_assert_eq!(&(&u * &a) + &(&v * &b), g.clone());
        prop_assert!(a.right_divrem(&g).unwrap().1.is_zero());
        prop_assert!(b.right_divrem(&g).unwrap().1.is_zero());
    }

    #[test]
    fn common_factors_are_found(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = testing::nonzero_ore_poly(&mut r, 2, 1);
        let a = &testing::nonzero_ore_poly(&mut r, 2, 1) * &f;
        let b = &testing::nonzero_ore_poly(&mut r, 2, 1) * &f;
        let (g, _, _) = OrePoly::gcrd_extended(&a, &b).unwrap();
        prop_assert!(g.right_divrem(&f).unwrap().1.is_zero());
        let m = OrePoly::lclm(&a, &b).unwrap();
        prop_assert!(m.right_divrem(&a).unwrap().1.is_zero());
        prop_assert!(m.right_divrem(&b).unwrap().1.is_zero());
        let (da, db, dg) = (a.degree().as_i64(), b.degree().as_i64(), g.degree().as_i64());
        prop_assert_eq!(m.degree().as_i64(), da + db - dg);
    }

    #[test]
    fn derivative_rule_for_random_coefficients(seed in any::<u64>()) {
        let f = testing::ratfun(&mut rng(seed), 3, 5);
        let lhs = &OrePoly::d() * &OrePoly::constant(f.clone());
        let rhs = &(&OrePoly::constant(f.clone()) * &OrePoly::d()) + &OrePoly::constant(f.derivative());
        prop_assert_eq!(lhs, rhs);
    }
}
