use std::io::Read;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use tvdae::behaviour::{controllability_report_from, singular_system_set, threshold_experiment, Verdict};
use tvdae::orematrix::{left_inverse_from, rank_ore, right_inverse_from, tn_form};
use tvdae::synthesis::{continue_solution, steer, Certificate, EpsilonPolicy, System};
use tvdae::syntax::{parse_expr, parse_ore_matrix, parse_tn_form, tn_form_text};
use tvdae::trajectory::{Order, Side, Trajectory, ZeroVerdict};
use tvdae::{Error, OreMatrix, Rational};

/// Exact algebra and piecewise trajectories for R(d/dt) w = 0.
///
/// Operator matrices are given inline (`"[[D, -1]]"`) or as `-` for stdin;
/// trajectories are files in the `components:` / `piece [a, b]:` format,
/// `-` for stdin.
#[derive(Parser, Debug)]
#[command(name = "tvdae", version)]
struct Cli {
    /// Tolerance for sampled zero tests and jet comparisons.
    #[arg(long, global = true, default_value = "1/10^9", value_parser = parse_tol)]
    tol: Rational,
    /// Highest derivative order probed when classifying or gluing.
    #[arg(long = "Kmax", global = true, default_value_t = 8)]
    kmax: u32,
    /// Junction regularity: an integer >= -1 or `inf`.
    #[arg(long = "L", global = true, allow_hyphen_values = true, value_parser = parse_order)]
    l: Option<Order>,
    /// Re-multiply factorizations and inverses before reporting them.
    #[arg(long, global = true)]
    verify: bool,
    /// One-line machine-readable output.
    #[arg(long, global = true)]
    porcelain: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Normal form R = Uinv diag(I, r, 0) Vinv; also loads a saved `tn-form` block.
    Tnf { input: String },
    Rank { matrix: String },
    RightInverse { matrix: String },
    LeftInverse { matrix: String },
    /// Controllability decision and regularity threshold.
    Controllable { matrix: String },
    SingularSet { matrix: String },
    /// Whether a trajectory solves R w = 0.
    Check { matrix: String, trajectory: String },
    /// Maximal (L, M, N) of a trajectory.
    Classify {
        trajectory: String,
        /// Classify only this component (1-based).
        #[arg(long)]
        component: Option<usize>,
    },
    /// Glue two trajectories with C^L junction (default L = -1).
    Glue { first: String, second: String },
    Restrict {
        trajectory: String,
        #[arg(allow_hyphen_values = true, value_parser = parse_rational)]
        from: Rational,
        #[arg(allow_hyphen_values = true, value_parser = parse_rational)]
        to: Rational,
    },
    /// R applied to a trajectory.
    Apply { matrix: String, trajectory: String },
    /// Extends a solution past its interval.
    Continue {
        matrix: String,
        trajectory: String,
        #[arg(long, value_enum, default_value_t = SideArg::Both)]
        side: SideArg,
    },
    /// Control on the gap between two solutions (default L = 0).
    Steer { matrix: String, from: String, to: String },
    /// Compares the factorization threshold with deg r - 2 on sampled operators.
    ThresholdExperiment {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 12)]
        samples: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SideArg {
    Left,
    Right,
    Both,
}

/// What a command decided; the exit code follows from it.
enum Outcome {
    Yes(String),
    No(String),
}

fn parse_rational(s: &str) -> Result<Rational, String> {
    let e = parse_expr(s).map_err(|e| e.to_string())?;
    e.as_rat()
        .and_then(|r| r.as_constant())
        .ok_or_else(|| format!("'{s}' is not a rational constant"))
}

fn parse_tol(s: &str) -> Result<Rational, String> {
    let q = parse_rational(s)?;
    if q <= Rational::from_integer(0.into()) {
        return Err("the tolerance must be positive".into());
    }
    Ok(q)
}

fn parse_order(s: &str) -> Result<Order, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn stdin_text() -> Result<String, Error> {
    let mut s = String::new();
    std::io::stdin()
        .read_to_string(&mut s)
        .map_err(|e| Error::Parse { line: 0, column: 0, message: format!("reading stdin: {e}") })?;
    Ok(s)
}

fn file_text(path: &str) -> Result<String, Error> {
    if path == "-" {
        return stdin_text();
    }
    std::fs::read_to_string(path).map_err(|e| Error::Parse { line: 0, column: 0, message: format!("{path}: {e}") })
}

fn matrix_arg(arg: &str) -> Result<OreMatrix, Error> {
    if arg == "-" {
        parse_ore_matrix(&stdin_text()?)
    } else {
        parse_ore_matrix(arg)
    }
}

fn trajectory_arg(path: &str) -> Result<Trajectory, Error> {
    file_text(path)?.parse()
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } => 2,
        Error::Incompatible(_) | Error::Verification(_) => 1,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Yes(out)) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Ok(Outcome::No(out)) => {
            print!("{out}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn line(s: impl std::fmt::Display) -> String {
    format!("{s}\n")
}

fn certificate_line(c: &Certificate) -> String {
    let steps: Vec<String> = c.steps.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!(
        "steps={} junctions={} max_deviation={:.1e} residual_exact={}",
        steps.join(","),
        c.junctions.len(),
        c.max_deviation(),
        c.residual_exact()
    )
}

fn run(cli: &Cli) -> Result<Outcome, Error> {
    let p = cli.porcelain;
    match &cli.command {
        Command::Tnf { input } => {
            let text = if input == "-" { stdin_text()? } else { input.clone() };
            let (r, form) = if text.trim_start().starts_with("tn-form") {
                parse_tn_form(&text)?
            } else {
                let r = parse_ore_matrix(&text)?;
                let form = tn_form(&r);
                (r, form)
            };
            if cli.verify {
                form.verify(&r)?;
            }
            let out = if p {
                line(format!(
                    "ell={} deg_r={} r={} verified={}",
                    form.ell,
                    form.deg_r(),
                    form.r,
                    cli.verify
                ))
            } else {
                let mut s = tn_form_text(&r, &form);
                if cli.verify {
                    s.push_str("# verified: U*Uinv = I, V*Vinv = I, Uinv*S*Vinv = R\n");
                }
                s
            };
            Ok(Outcome::Yes(out))
        }
        Command::Rank { matrix } => {
            let r = matrix_arg(matrix)?;
            let k = rank_ore(&r);
            Ok(Outcome::Yes(line(if p { format!("rank={k}") } else { k.to_string() })))
        }
        Command::RightInverse { matrix } | Command::LeftInverse { matrix } => {
            let right = matches!(cli.command, Command::RightInverse { .. });
            let r = matrix_arg(matrix)?;
            let form = tn_form(&r);
            let b = if right { right_inverse_from(&r, &form) } else { left_inverse_from(&r, &form) };
            let Some(b) = b else {
                let side = if right { "right" } else { "left" };
                return Ok(Outcome::No(line(if p { "invertible=false".to_string() } else { format!("no {side} inverse") })));
            };
            if cli.verify {
                let prod = if right { r.mat_mul(&b)? } else { b.mat_mul(&r)? };
                if !prod.is_identity() {
                    return Err(Error::Verification("the inverse does not multiply to the identity".into()));
                }
            }
            Ok(Outcome::Yes(line(if p { format!("invertible=true B={b}") } else { b.to_string() })))
        }
        Command::Controllable { matrix } => {
            let r = matrix_arg(matrix)?;
            let form = tn_form(&r);
            if cli.verify {
                form.verify(&r)?;
            }
            let mut report = controllability_report_from(&r, &form);
            if let Some(l) = cli.l {
                report = report.at_regularity(l);
            }
            let out = if p { line(report.porcelain()) } else { line(&report) };
            Ok(if report.verdict == Verdict::Controllable { Outcome::Yes(out) } else { Outcome::No(out) })
        }
        Command::SingularSet { matrix } => {
            let r = matrix_arg(matrix)?;
            let set = singular_system_set(&tn_form(&r));
            let out = if p {
                let pts: Vec<String> =
                    set.points.iter().map(|q| format!("{}:{}:{}", q.interval, q.kind, q.order)).collect();
                line(format!("points={}", pts.join(";")))
            } else {
                line(&set)
            };
            Ok(Outcome::Yes(out))
        }
        Command::Check { matrix, trajectory } => {
            let r = matrix_arg(matrix)?;
            let w = trajectory_arg(trajectory)?;
            let verdict = w.apply(&r)?.is_zero(&cli.tol);
            let head = if verdict.is_zero() { "solution" } else { "not a solution" };
            let out = if p {
                let kind = match &verdict {
                    ZeroVerdict::ExactZero => "exact_zero",
                    ZeroVerdict::ZeroWithinTol(_) => "zero_within_tol",
                    ZeroVerdict::NonZero { .. } => "nonzero",
                };
                line(format!("solution={} residual={kind}", verdict.is_zero()))
            } else {
                format!("{head}\nresidual: {verdict}\n")
            };
            Ok(if verdict.is_zero() { Outcome::Yes(out) } else { Outcome::No(out) })
        }
        Command::Classify { trajectory, component } => {
            let mut w = trajectory_arg(trajectory)?;
            if let Some(k) = *component {
                if k == 0 || k > w.components() {
                    return Err(Error::Domain(format!("component {k} out of range 1..={}", w.components())));
                }
                w = w.select(k - 1..k);
            }
            let report = w.classify_regularity(cli.kmax);
            let out = if p {
                let t = report.triple;
                line(format!("L={} M={} N={} kmax={}", t.l, t.m, t.n, report.kmax))
            } else {
                line(&report)
            };
            Ok(Outcome::Yes(out))
        }
        Command::Glue { first, second } => {
            let f = trajectory_arg(first)?;
            let g = trajectory_arg(second)?;
            let w = Trajectory::glue(&f, &g, cli.l.unwrap_or(Order::NONE), cli.kmax)?;
            Ok(Outcome::Yes(trajectory_out(&w, p)))
        }
        Command::Restrict { trajectory, from, to } => {
            let w = trajectory_arg(trajectory)?.restrict(from, to)?;
            Ok(Outcome::Yes(trajectory_out(&w, p)))
        }
        Command::Apply { matrix, trajectory } => {
            let r = matrix_arg(matrix)?;
            let w = trajectory_arg(trajectory)?.apply(&r)?;
            Ok(Outcome::Yes(trajectory_out(&w, p)))
        }
        Command::Continue { matrix, trajectory, side } => {
            let sys = System::new(matrix_arg(matrix)?)?;
            let s = trajectory_arg(trajectory)?;
            let side = match side {
                SideArg::Left => Side::Left,
                SideArg::Right => Side::Right,
                SideArg::Both => Side::Both,
            };
            let c = continue_solution(&sys, &s, side, &EpsilonPolicy::default(), &cli.tol)?;
            let out = if p {
                let (lo, hi) = c.trajectory.domain();
                line(format!("domain=[{lo},{hi}] {}", certificate_line(&c.certificate)))
            } else {
                format!("{}{}", c.trajectory, c.certificate)
            };
            Ok(Outcome::Yes(out))
        }
        Command::Steer { matrix, from, to } => {
            let sys = System::new(matrix_arg(matrix)?)?;
            let f = trajectory_arg(from)?;
            let h = trajectory_arg(to)?;
            let l = cli.l.unwrap_or(Order::Finite(0));
            let s = steer(&sys, &f, &h, l, &EpsilonPolicy::default(), &cli.tol)?;
            let out = if p {
                let (lo, hi) = s.control.domain();
                line(format!("control=[{lo},{hi}] pieces={} {}", s.control.pieces().len(), certificate_line(&s.certificate)))
            } else {
                format!("control:\n{}assembled:\n{}{}", s.control, s.assembled, s.certificate)
            };
            Ok(Outcome::Yes(out))
        }
        Command::ThresholdExperiment { seed, samples } => {
            let obs = threshold_experiment(*seed, *samples);
            let mut out = String::new();
            for o in &obs {
                if p {
                    let joins: Vec<String> =
                        o.connections.iter().map(|(l, ok)| format!("{l}:{}", u8::from(*ok))).collect();
                    out.push_str(&line(format!(
                        "deg_r={} L_threshold={} deg_r_minus_2={} joins={}",
                        o.deg_r,
                        o.l_threshold,
                        o.conjectured,
                        joins.join(",")
                    )));
                } else {
                    out.push_str(&line(o));
                }
            }
            Ok(Outcome::Yes(out))
        }
    }
}

fn trajectory_out(w: &Trajectory, porcelain: bool) -> String {
    if !porcelain {
        return w.to_string();
    }
    let (lo, hi) = w.domain();
    let pieces: Vec<String> = w
        .pieces()
        .iter()
        .map(|q| {
            let comps: Vec<String> = q.components().iter().map(|e| e.to_string()).collect();
            format!("[{},{}]:{}", q.lo(), q.hi(), comps.join("|"))
        })
        .collect();
    line(format!("components={} domain=[{lo},{hi}] pieces={}", w.components(), pieces.join(";")))
}
