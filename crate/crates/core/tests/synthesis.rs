use tvdae::field::{int, rat};
use tvdae::synthesis::{continue_solution, steer, steer_to_zero, EpsilonPolicy, System};
use tvdae::syntax::parse_ore_matrix;
use tvdae::trajectory::{Order, Side, Trajectory, ZeroVerdict};
use tvdae::{Error, Rational};

fn system(s: &str) -> System {
    System::new(parse_ore_matrix(s).unwrap()).unwrap()
}

fn traj(s: &str) -> Trajectory {
    s.parse().unwrap()
}

fn tol() -> Rational {
    rat(1, 1_000_000_000)
}

const EXAMPLE_ROW: &str = "[[t^4*D^2 + 4*t^3*D + t^2, -1]]";

#[test]
fn integrator_steering_between_solutions() {
    let sys = system("[[D, -1]]");
    let f = traj("components: 2\npiece [0, 1]:\n w1 = t\n w2 = 1\n");
    let h = traj("components: 2\npiece [2, 3]:\n w1 = 5\n w2 = 0\n");
    let s = steer(&sys, &f, &h, Order::Finite(2), &EpsilonPolicy::default(), &tol()).unwrap();
    println!("{}\n{}", s.control, s.certificate);
    assert_eq!(s.control.domain(), (int(1), int(2)));
    assert_eq!(s.assembled.restrict(&int(0), &int(1)).unwrap(), f);
    assert_eq!(s.assembled.restrict(&int(2), &int(3)).unwrap(), h);
    assert!(s.certificate.max_deviation() <= 1e-9);
    let b = s.certificate.junctions.iter().find(|j| j.point == int(1)).unwrap();
    assert!(b.exact);
}

#[test]
fn example_row_steered_to_zero() {
    let sys = system(EXAMPLE_ROW);
    let f = traj("components: 2\npiece [-1, -1/2]:\n w1 = abs(t)^(3/2)\n w2 = 31/4*t^2*abs(t)^(3/2)\n");
    let s = steer_to_zero(&sys, &f, &int(1), &int(2), Order::Finite(1), &EpsilonPolicy::default(), &tol()).unwrap();
    println!("{}", s.certificate);
    assert_eq!(s.control.domain(), (rat(-1, 2), int(1)));
}

#[test]
fn example_row_steered_to_a_shifted_solution() {
    let sys = system(EXAMPLE_ROW);
    let f = traj("components: 2\npiece [-1, -1/2]:\n w1 = abs(t)^(3/2)\n w2 = 31/4*t^2*abs(t)^(3/2)\n");
    // any solution on [1, 2]: w2 = r(D) w1 with w1 = t^2
    let h = traj("components: 2\npiece [1, 2]:\n w1 = t^2\n w2 = 2*t^4 + 8*t^4 + t^4\n");
    let s = steer(&sys, &f, &h, Order::Finite(1), &EpsilonPolicy::default(), &tol()).unwrap();
    println!("{}", s.certificate);
    assert_eq!(s.assembled.restrict(&int(1), &int(2)).unwrap(), h);
}

#[test]
fn continuation_of_the_example_away_from_the_kink() {
    let sys = system(EXAMPLE_ROW);
    let s = traj("components: 2\npiece [1/2, 1]:\n w1 = abs(t)^(3/2)\n w2 = 31/4*t^2*abs(t)^(3/2)\n");
    let c = continue_solution(&sys, &s, Side::Both, &EpsilonPolicy::default(), &tol()).unwrap();
    let (lo, hi) = c.trajectory.domain();
    assert!(lo < rat(1, 2) && lo > int(0) && hi > int(1));
    assert_eq!(c.trajectory.restrict(&rat(1, 2), &int(1)).unwrap(), s);
    assert!(c.trajectory.apply(&sys.r).unwrap().is_zero(&tol()).is_zero());
}

#[test]
fn singular_scalar_system_cannot_be_steered() {
    let err = System::new(parse_ore_matrix("[[t*D + 1]]").unwrap()).unwrap_err();
    assert!(matches!(err, Error::Domain(_)));
}

#[test]
fn non_solutions_are_rejected() {
    let sys = system("[[D, -1]]");
    let f = traj("components: 2\npiece [0, 1]:\n w1 = t\n w2 = 2\n");
    let err = steer_to_zero(&sys, &f, &int(2), &int(3), Order::Finite(1), &EpsilonPolicy::default(), &tol()).unwrap_err();
    assert!(matches!(err, Error::Domain(_)), "{err}");
    let zero = Trajectory::zero(2, int(0), int(1)).unwrap();
    assert_eq!(zero.apply(&sys.r).unwrap().is_zero(&tol()), ZeroVerdict::ExactZero);
}
