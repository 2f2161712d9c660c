use cme_core::moments::{cumulants_from_pgf, factorial_moment_system, first_order_closure};
use cme_core::reaction_model::{parse_dsl, ReactionSystem};
use cme_core::semilinear::solve_semilinear;
use cme_core::BigRational;

fn system(dsl: &str, m: u32) -> ReactionSystem {
    parse_dsl(dsl).unwrap().with_initial_state(vec![m]).unwrap()
}

#[test]
fn closed_first_moments_match_generating_function() {
    let cases = [("A -> 0 @ 4", [0.05, 0.25, 0.5]), ("0 -> A @ 50", [0.1, 0.5, 1.0]), ("A -> 2 A @ 1/2", [0.1, 0.5, 1.0])];
    for (dsl, times) in cases {
        let sys = system(dsl, 100);
        let closure = first_order_closure(&sys).unwrap();
        for t in times {
            let p = solve_semilinear(&sys, t, 600).unwrap();
            let c1 = cumulants_from_pgf(&p, 1).unwrap()[0];
            let m = closure.mean_at(&[100.0], t)[0];
            assert!((m - c1).abs() < 1e-7, "{dsl} t={t}: {m} vs {c1}");
        }
    }
}

#[test]
fn composite_mean_follows_affine_ode() {
    let sys = system("A -> 2 A @ 1/10; 0 -> A @ 2/5; 0 -> 2 A @ 1/5; A -> 0 @ 3/10", 100);
    let closure = first_order_closure(&sys).unwrap();
    assert_eq!(closure.source, vec![BigRational::new(4.into(), 5.into())]);
    for t in [0.5, 2.0, 8.0] {
        let p = solve_semilinear(&sys, t, 500).unwrap();
        let c = cumulants_from_pgf(&p, 3).unwrap();
        assert!((closure.mean_at(&[100.0], t)[0] - c[0]).abs() < 1e-7);
    }
}

#[test]
fn second_factorial_moment_row_closes_for_semilinear_systems() {
    let sys = system("A -> 2 A @ 1; 0 -> 2 A @ 3; A -> 0 @ 2", 0);
    let ode = factorial_moment_system(&sys, 4);
    assert!(ode.is_closed());
    let binary = system("2 A -> A @ 1", 0);
    let ode = factorial_moment_system(&binary, 4);
    assert!(!ode.is_closed());
    assert_eq!(ode.open.len(), 1);
}
