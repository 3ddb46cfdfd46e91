//! One line per acceptance criterion; the test fails if any criterion does.
//! Run with `cargo test --release -p tvdae-cli --test acceptance -- --nocapture`.

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tvdae::behaviour::{controllability_report, Verdict};
use tvdae::field::{int, rat};
use tvdae::orematrix::{right_inverse, tn_form, tn_form_with, TnOptions};
use tvdae::synthesis::{continue_solution, steer, EpsilonPolicy, System};
use tvdae::syntax::{parse_expr, parse_ore_matrix};
use tvdae::testing;
use tvdae::trajectory::{Expr, Order, RegularityTriple, Side, Trajectory, ZeroVerdict, K_MAX};
use tvdae::{OreMatrix, OrePoly, Rational};

type Outcome = Result<String, String>;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn mat(s: &str) -> OreMatrix {
    parse_ore_matrix(s).unwrap()
}

fn tol() -> Rational {
    rat(1, 1_000_000_000)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn tvdae_exit(args: &[&str]) -> i32 {
    let mut child = Command::new(env!("CARGO_BIN_EXE_tvdae"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()
        .expect("spawn tvdae");
    drop(child.stdin.take());
    child.wait().expect("wait").code().expect("exit code")
}

fn fixture(name: &str, text: &str) -> String {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(format!("acceptance-{name}.txt"));
    std::fs::write(&path, text).expect("write fixture");
    path.to_string_lossy().into_owned()
}

fn ore_ring() -> Outcome {
    let (d, t) = (OrePoly::d(), OrePoly::constant(tvdae::RatFun::t()));
    ensure(&(&d * &t) - &(&t * &d) == OrePoly::one(), || "D t - t D != 1".into())?;
    for seed in 0..500u64 {
        let mut g = rng(seed);
        let a = testing::ore_poly(&mut g, 3, 2);
        let b = testing::ore_poly(&mut g, 3, 2);
        let c = testing::ore_poly(&mut g, 3, 2);
        ensure(&(&a * &b) * &c == &a * &(&b * &c), || format!("associativity, seed {seed}"))?;
        ensure(&a * &(&b + &c) == &(&a * &b) + &(&a * &c), || format!("left distributivity, seed {seed}"))?;
        ensure(&(&a + &b) * &c == &(&a * &c) + &(&b * &c), || format!("right distributivity, seed {seed}"))?;
        ensure((&a * &b).degree() == a.degree() + b.degree(), || format!("degree, seed {seed}"))?;
    }
    Ok("500 triples".into())
}

fn division() -> Outcome {
    for seed in 0..500u64 {
        let mut g = rng(seed);
        let a = testing::ore_poly(&mut g, 4, 2);
        let b = testing::nonzero_ore_poly(&mut g, 3, 2);
        let (q, r) = a.right_divrem(&b).map_err(|e| e.to_string())?;
        ensure(&(&q * &b) + &r == a && r.degree() < b.degree(), || format!("right division, seed {seed}"))?;
        let (q, r) = a.left_divrem(&b).map_err(|e| e.to_string())?;
        ensure(&(&b * &q) + &r == a && r.degree() < b.degree(), || format!("left division, seed {seed}"))?;
        let (gg, u, v) = OrePoly::gcrd_extended(&b, &a).map_err(|e| e.to_string())?;
        ensure(&(&u * &b) + &(&v * &a) == gg, || format!("Bezout, seed {seed}"))?;
        ensure(gg.lc().is_one(), || format!("gcrd not monic, seed {seed}"))?;
        for x in [&a, &b] {
            ensure(x.right_divrem(&gg).unwrap().1.is_zero(), || format!("gcrd does not divide, seed {seed}"))?;
        }
    }
    Ok("500 pairs, both sides".into())
}

fn tn_forms() -> Outcome {
    let mut worst = (0usize, 0u64);
    for seed in 0..200u64 {
        let mut g = rng(seed);
        let (m, n) = (g.gen_range(1..=3), g.gen_range(1..=4));
        let r = testing::ore_matrix(&mut g, m, n, 2, 2);
        let f = tn_form(&r);
        f.verify(&r).map_err(|e| format!("seed {seed}: {e}"))?;
        let s = f.s_matrix();
        for i in 0..m {
            for j in 0..n {
                let e = s.get(i, j);
                let ok = if i != j || i >= f.ell {
                    e.is_zero()
                } else if i + 1 < f.ell {
                    e.is_one()
                } else {
                    e.lc().is_one()
                };
                ensure(ok, || format!("S has the wrong shape, seed {seed}"))?;
            }
        }
        for k in 0..5u64 {
            let p = tn_form_with(&r, TnOptions { pivot_seed: Some(k) });
            ensure((p.ell, p.deg_r()) == (f.ell, f.deg_r()), || format!("deg r depends on pivot order, seed {seed}"))?;
        }
        worst = worst.max((f.deg_r(), seed));
    }
    Ok(format!("200 matrices, 5 pivot orders each, max deg r {}", worst.0))
}

fn unimodular_identity() -> Outcome {
    for j in 1..=3 {
        let a = mat(&format!("[[1, 0, 0], [0, -D^{j}, 1], [0, 1, 0]]"));
        let b = mat(&format!("[[1, 0, 0], [0, 0, 1], [0, 1, D^{j}]]"));
        ensure(a.mat_mul(&b).unwrap().is_identity(), || format!("A B != I for j = {j}"))?;
        ensure(b.mat_mul(&a).unwrap().is_identity(), || format!("B A != I for j = {j}"))?;
        let inv = right_inverse(&a).ok_or(format!("no right inverse for j = {j}"))?;
        ensure(a.mat_mul(&inv).unwrap().is_identity(), || format!("computed inverse fails for j = {j}"))?;
    }
    Ok("j = 1, 2, 3".into())
}

const EXAMPLE_ROW: &str = "[[t^4*D^2 + 4*t^3*D + t^2, -1]]";

fn example_row() -> Outcome {
    let r = mat(EXAMPLE_ROW);
    let f = Trajectory::from_exprs(
        int(-1),
        int(1),
        vec![parse_expr("abs(t)^(3/2)").unwrap(), parse_expr("31/4*t^2*abs(t)^(3/2)").unwrap()],
    )
    .unwrap();
    let res = f.apply(&r).map_err(|e| e.to_string())?.is_zero(&tol());
    ensure(res == ZeroVerdict::ExactZero, || format!("residual: {res:?}"))?;
    let triple = f.select(0..1).classify_regularity(K_MAX).triple;
    ensure(triple == "(1, 1, inf)".parse::<RegularityTriple>().unwrap(), || format!("first component is {triple}"))?;
    let rep = controllability_report(&r);
    ensure(rep.verdict == Verdict::Controllable, || format!("verdict {:?}", rep.verdict))?;
    let b = right_inverse(&r).ok_or("no right inverse")?;
    ensure(r.mat_mul(&b).unwrap().is_identity(), || "R B != I".into())?;
    let file = fixture("example", &f.to_string());
    ensure(tvdae_exit(&["check", EXAMPLE_ROW, &file]) == 0, || "cli check rejected the solution".into())?;
    Ok(format!("exact residual, first component {triple}, controllable"))
}

fn pendulum() -> Outcome {
    let x = parse_expr("abs(t)^(3/2)").unwrap();
    let l = parse_expr("t^2").unwrap();
    let linear = Trajectory::from_exprs(int(-1), int(1), vec![x.clone(), parse_expr("31/4*t^2*abs(t)^(3/2)").unwrap()])
        .unwrap()
        .apply(&mat(EXAMPLE_ROW))
        .map_err(|e| e.to_string())?
        .is_zero(&tol());
    ensure(linear == ZeroVerdict::ExactZero, || format!("linear residual: {linear:?}"))?;
    let u = parse_expr("27/4*t^2*abs(t)^(3/2) + t^2*sin(abs(t)^(3/2))").unwrap();
    let res = Expr::add(vec![
        Expr::mul(vec![l.pow(2), x.diff_n(2)]),
        Expr::mul(vec![Expr::constant(int(2)), l.clone(), l.diff(), x.diff()]),
        Expr::mul(vec![l, x.sin()]),
        u.neg(),
    ]);
    let mut worst: f64 = 0.0;
    for k in 0..=1000 {
        let t = -1.0 + 2.0 * k as f64 / 1000.0;
        if t == 0.0 {
            continue;
        }
        worst = worst.max(res.eval_f64(t).abs());
    }
    ensure(worst <= 1e-9, || format!("nonlinear residual {worst:e}"))?;
    Ok(format!("linear exact, nonlinear max |residual| {worst:.1e} on 1000 points"))
}

fn singular_scalar() -> Outcome {
    let sys = "[[t*D+1]]";
    ensure(tvdae_exit(&["controllable", sys]) == 1, || "reported controllable".into())?;
    let inv = fixture("inv", "components: 1\npiece [1/2, 1]:\n  w1 = t^-1\n");
    ensure(tvdae_exit(&["check", sys, &inv]) == 0, || "1/t rejected on [1/2, 1]".into())?;
    ensure(tvdae_exit(&["continue", sys, &inv]) == 3, || "continue did not refuse".into())?;
    let later = fixture("inv-later", "components: 1\npiece [2, 3]:\n  w1 = t^-1\n");
    ensure(tvdae_exit(&["steer", sys, &inv, &later]) == 3, || "steer did not refuse".into())?;
    for (i, e) in ["0", "t", "t^2", "1"].iter().enumerate() {
        let w = fixture(&format!("candidate{i}"), &format!("components: 1\npiece [-1, 1]:\n  w1 = {e}\n"));
        let want = if *e == "0" { 0 } else { 1 };
        ensure(tvdae_exit(&["check", sys, &w]) == want, || format!("candidate {e}"))?;
    }
    Ok("not controllable; only 0 passes through t = 0".into())
}

fn regularity_table() -> Outcome {
    let cases = [
        ("sgn(t)", "(-1, inf, inf)"),
        ("abs(t)", "(0, inf, inf)"),
        ("abs(t)^(1/2)", "(0, 0, inf)"),
        ("t^-1", "(-1, -1, inf)"),
    ];
    for (e, want) in cases {
        let w = Trajectory::from_exprs(int(-1), int(1), vec![parse_expr(e).unwrap()]).map_err(|err| err.to_string())?;
        let got = w.classify_regularity(K_MAX).triple;
        ensure(got == want.parse::<RegularityTriple>().unwrap(), || format!("{e}: {got}, expected {want}"))?;
    }
    Ok(format!("4 rows; inf means verified to order {K_MAX}"))
}

fn integrator_steering() -> Outcome {
    let sys = System::new(mat("[[D, -1]]")).map_err(|e| e.to_string())?;
    let f = Trajectory::from_exprs(int(0), int(1), vec![parse_expr("t").unwrap(), parse_expr("1").unwrap()]).unwrap();
    let h = Trajectory::from_exprs(int(2), int(3), vec![parse_expr("5").unwrap(), parse_expr("0").unwrap()]).unwrap();
    let s = steer(&sys, &f, &h, Order::Finite(2), &EpsilonPolicy::default(), &tol()).map_err(|e| e.to_string())?;
    let cert = &s.certificate;
    let at_one = cert.junctions.iter().find(|j| j.point == int(1)).ok_or("no junction at 1")?;
    ensure(at_one.exact, || "junction at 1 is not exact".into())?;
    ensure(cert.max_deviation() <= 1e-9, || format!("junction deviation {:e}", cert.max_deviation()))?;
    ensure(cert.residual_exact(), || "residual is not exactly zero".into())?;
    let res = s.assembled.apply(&sys.r).map_err(|e| e.to_string())?.is_zero(&tol());
    ensure(res.is_zero(), || format!("assembled residual: {res:?}"))?;
    ensure(s.assembled.domain() == (int(0), int(3)), || "assembled domain".into())?;
    Ok(format!("{} junctions, max deviation {:.1e}", cert.junctions.len(), cert.max_deviation()))
}

fn gluing_chains() -> Outcome {
    for seed in 0..100u64 {
        let mut g = rng(seed);
        let w = testing::trajectory(&mut g, 2, 4);
        let mut cuts: Vec<i64> = (-7..=7).collect();
        cuts.shuffle(&mut g);
        let mut cuts = cuts[..3].to_vec();
        cuts.sort();
        let ends: Vec<Rational> =
            std::iter::once(int(-2)).chain(cuts.iter().map(|&k| rat(k, 4))).chain(std::iter::once(int(2))).collect();
        let parts: Vec<Trajectory> = ends.windows(2).map(|e| w.restrict(&e[0], &e[1]).unwrap()).collect();
        let glue = |a: &Trajectory, b: &Trajectory| Trajectory::glue(a, b, Order::NONE, K_MAX).map_err(|e| e.to_string());
        let left = glue(&glue(&glue(&parts[0], &parts[1])?, &parts[2])?, &parts[3])?;
        let right = glue(&parts[0], &glue(&parts[1], &glue(&parts[2], &parts[3])?)?)?;
        ensure(left == right, || format!("folds differ, seed {seed}"))?;
        ensure(left == w, || format!("chain does not reassemble, seed {seed}"))?;
    }
    Ok("100 chains of 4 pieces".into())
}

fn golden_continuations() -> Outcome {
    let systems: Vec<System> = testing::RIGHT_INVERTIBLE.iter().map(|s| System::new(mat(s)).unwrap()).collect();
    for i in 0..50u64 {
        let sys = &systems[i as usize % systems.len()];
        let s = testing::solution(&mut rng(i), sys);
        let c = continue_solution(sys, &s, Side::Both, &EpsilonPolicy::default(), &tol()).map_err(|e| format!("instance {i}: {e}"))?;
        let (a, b) = s.domain();
        ensure(c.trajectory.restrict(&a, &b).unwrap() == s, || format!("instance {i}: restriction differs"))?;
        let res = c.trajectory.apply(&sys.r).map_err(|e| e.to_string())?.is_zero(&tol());
        ensure(res.is_zero(), || format!("instance {i}: residual {res:?}"))?;
    }
    Ok(format!("50 instances over {} systems", systems.len()))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome, Option<u64>); 11] = [
        ("Ore ring laws", ore_ring, Some(30)),
        ("division and gcrd", division, Some(60)),
        ("TN forms", tn_forms, Some(300)),
        ("unimodular identity", unimodular_identity, None),
        ("example row", example_row, None),
        ("pendulum", pendulum, Some(10)),
        ("singular scalar system", singular_scalar, None),
        ("regularity table", regularity_table, None),
        ("integrator steering", integrator_steering, Some(10)),
        ("gluing is associative", gluing_chains, None),
        ("golden continuations", golden_continuations, None),
    ];
    let mut failed = Vec::new();
    let mut out = std::io::stdout().lock();
    for (i, (name, run, limit)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or("panic".into()))
        });
        let took = start.elapsed();
        let outcome = match (outcome, limit) {
            (Ok(_), Some(s)) if took > Duration::from_secs(s) => Err(format!("took longer than {s} s")),
            (o, _) => o,
        };
        let limit = limit.map(|s| format!(", limit {s} s")).unwrap_or_default();
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d.clone()),
            Err(e) => ("FAIL", e.clone()),
        };
        writeln!(out, "{tag} [{}] {name}: {detail} ({:.2} s{limit})", i + 1, took.as_secs_f64()).unwrap();
        if outcome.is_err() {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
