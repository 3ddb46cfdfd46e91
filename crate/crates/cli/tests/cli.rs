use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Stdio};

const EXAMPLE_ROW: &str = "[[t^4*D^2 + 4*t^3*D + t^2, -1]]";
const EXAMPLE_SOLUTION: &str = "components: 2\npiece [-1, 1]:\n  w1 = abs(t)^(3/2)\n  w2 = 31/4*t^2*abs(t)^(3/2)\n";

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn tvdae(args: &[&str], stdin: Option<&str>) -> Run {
    let mut child = Command::new(env!("CARGO_BIN_EXE_tvdae"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn tvdae");
    {
        let mut pipe = child.stdin.take().expect("stdin");
        if let Some(s) = stdin {
            pipe.write_all(s.as_bytes()).expect("write stdin");
        }
    }
    let out = child.wait_with_output().expect("wait");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).expect("utf8"),
        stderr: String::from_utf8(out.stderr).expect("utf8"),
    }
}

fn file(name: &str, text: &str) -> String {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(format!("cli-{name}.txt"));
    std::fs::write(&path, text).expect("write fixture");
    path.to_string_lossy().into_owned()
}

fn scalar(name: &str, lo: &str, hi: &str, expr: &str) -> String {
    file(name, &format!("components: 1\npiece [{lo}, {hi}]:\n  w1 = {expr}\n"))
}

#[test]
fn example_row_is_controllable() {
    let r = tvdae(&["controllable", EXAMPLE_ROW], None);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.starts_with("verdict           controllable"));
    assert!(r.stdout.contains("L_threshold       1"));
    let r = tvdae(&["controllable", "--porcelain", EXAMPLE_ROW], None);
    assert_eq!(r.stdout.lines().count(), 1);
    assert!(r.stdout.contains("verdict=controllable"));
}

#[test]
fn below_threshold_is_not_affirmative() {
    let r = tvdae(&["controllable", "--L", "0", "--porcelain", EXAMPLE_ROW], None);
    assert_eq!(r.code, 1);
    assert!(r.stdout.contains("verdict=undecided"), "{}", r.stdout);
}

#[test]
fn scalar_singular_system() {
    assert_eq!(tvdae(&["controllable", "[[t*D+1]]"], None).code, 1);
    assert_eq!(tvdae(&["right-inverse", "[[t*D+1]]"], None).code, 1);
    let inv = scalar("inv", "1/2", "1", "t^-1");
    let r = tvdae(&["check", "[[t*D+1]]", &inv], None);
    assert_eq!(r.code, 0, "{}{}", r.stdout, r.stderr);
    assert!(r.stdout.contains("exact_zero"));
    let r = tvdae(&["continue", "[[t*D+1]]", &inv], None);
    assert_eq!(r.code, 3);
    assert!(r.stderr.contains("not right invertible"));
    let later = scalar("inv-later", "2", "3", "t^-1");
    assert_eq!(tvdae(&["steer", "[[t*D+1]]", &inv, &later], None).code, 3);
}

#[test]
fn only_zero_passes_through_the_singular_point() {
    for (name, e, want) in [("c0", "0", 0), ("c1", "t", 1), ("c2", "t^2", 1), ("c3", "1", 1)] {
        let w = scalar(name, "-1", "1", e);
        assert_eq!(tvdae(&["check", "[[t*D+1]]", &w], None).code, want, "candidate {e}");
    }
}

#[test]
fn example_solution_checks_and_classifies() {
    let f = file("example", EXAMPLE_SOLUTION);
    let r = tvdae(&["check", EXAMPLE_ROW, &f], None);
    assert_eq!(r.code, 0);
    assert!(r.stdout.contains("exact_zero"));
    let r = tvdae(&["classify", "--component", "1", "--porcelain", &f], None);
    assert_eq!(r.stdout, "L=1 M=1 N=inf kmax=8\n");
    let r = tvdae(&["right-inverse", "--verify", EXAMPLE_ROW], None);
    assert_eq!(r.code, 0, "{}", r.stderr);
}

#[test]
fn parse_errors_exit_2() {
    let r = tvdae(&["rank", "[[D, -1"], None);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("line 1, column"));
    let bad = file("bad", "components: 1\npiece [0, 1]:\n  w1 = D\n");
    assert_eq!(tvdae(&["check", "[[D]]", &bad], None).code, 2);
    assert_eq!(tvdae(&["check", "[[D]]", "/nonexistent/trajectory"], None).code, 2);
    assert_eq!(tvdae(&["check", "--tol", "abc", "[[D]]", &bad], None).code, 2);
}

#[test]
fn tn_form_survives_a_round_trip_and_detects_tampering() {
    let m = "[[D, -t, 0], [0, D, -1]]";
    let first = tvdae(&["tnf", m], None);
    assert_eq!(first.code, 0);
    let loaded = tvdae(&["tnf", "--verify", "-"], Some(&first.stdout));
    assert_eq!(loaded.code, 0, "{}", loaded.stderr);
    let body = |s: &str| s.lines().filter(|l| !l.starts_with('#')).map(str::to_string).collect::<Vec<_>>();
    assert_eq!(body(&loaded.stdout), body(&first.stdout));
    let tampered = first.stdout.replace("ell: 2", "ell: 1");
    assert_eq!(tvdae(&["tnf", "--verify", "-"], Some(&tampered)).code, 1);
}

#[test]
fn trajectories_print_and_reparse() {
    let f = file("roundtrip", EXAMPLE_SOLUTION);
    let once = tvdae(&["restrict", &f, "-1", "1"], None);
    assert_eq!(once.code, 0);
    // the loader splits the piece at the kink of abs(t)
    assert!(once.stdout.contains("piece [-1, 0]:") && once.stdout.contains("piece [0, 1]:"));
    let twice = tvdae(&["restrict", "-", "-1", "1"], Some(&once.stdout));
    assert_eq!(twice.stdout, once.stdout);
    let r = tvdae(&["apply", "[[D*t]]", &scalar("one", "0", "1", "1")], None);
    assert_eq!(r.stdout, "components: 1\npiece [0, 1]:\n  w1 = 1\n");
}

#[test]
fn glue_reports_incompatibility() {
    let a = scalar("glue-a", "0", "1", "t");
    let b = scalar("glue-b", "1", "2", "1");
    let c = scalar("glue-c", "1", "2", "2 - t");
    assert_eq!(tvdae(&["glue", "--L", "0", &a, &b], None).code, 0);
    assert_eq!(tvdae(&["glue", "--L", "1", &a, &b], None).code, 1);
    let r = tvdae(&["glue", "--L", "0", "--porcelain", &a, &c], None);
    assert_eq!(r.code, 0);
    assert_eq!(r.stdout, "components=1 domain=[0,2] pieces=[0,1]:t;[1,2]:-t + 2\n");
}

#[test]
fn steering_is_deterministic() {
    let f = file("steer-f", "components: 2\npiece [0, 1]:\n  w1 = t\n  w2 = 1\n");
    let h = file("steer-h", "components: 2\npiece [2, 3]:\n  w1 = 5\n  w2 = 0\n");
    let args = ["steer", "--L", "2", "[[D, -1]]", f.as_str(), h.as_str()];
    let a = tvdae(&args, None);
    assert_eq!(a.code, 0, "{}", a.stderr);
    assert!(a.stdout.contains("certificate:"));
    assert_eq!(tvdae(&args, None).stdout, a.stdout);
    let c = tvdae(&["continue", "--porcelain", "[[D, -1]]", &f], None);
    assert_eq!(c.code, 0);
    assert_eq!(c.stdout.lines().count(), 1);
}

#[test]
fn threshold_experiment_runs() {
    let r = tvdae(&["threshold-experiment", "--samples", "3", "--porcelain"], None);
    assert_eq!(r.code, 0);
    assert!(r.stdout.lines().count() >= 4);
    assert_eq!(tvdae(&["threshold-experiment", "--samples", "3", "--porcelain"], None).stdout, r.stdout);
}
