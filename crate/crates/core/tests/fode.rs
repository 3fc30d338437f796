use approx::assert_relative_eq;
use bernfrac_core::fode::*;
use bernfrac_core::frac_ops::{apply, Backend, FracOrder, OperatorKind, OperatorSpec, Side};
use bernfrac_core::oracles::{
    poly_fode_exact, poly_fode_forcing, relaxation_exact, OscillationOracle,
};
use bernfrac_core::special::recip_gamma;
use bernfrac_core::{BernsteinPoly, Error};

fn grid(points: usize) -> Vec<f64> {
    (0..points)
        .map(|j| j as f64 / (points - 1) as f64)
        .collect()
}

fn solve_default(p: &FodeProblem, n: usize) -> AnsatzSolution {
    solve(p, n, DEFAULT_NEWTON_TOL, DEFAULT_MAX_ITER).unwrap()
}

fn max_error(sol: &AnsatzSolution, exact: impl Fn(f64) -> f64, ts: &[f64]) -> f64 {
    ts.iter()
        .map(|&t| (eval_solution(sol, t).unwrap() - exact(t)).abs())
        .fold(0.0, f64::max)
}

fn relaxation_problem() -> FodeProblem {
    // c D^α x + k x = 1  =>  D^α x = (1 - k x) / c
    FodeProblem::new(0.5, |_, x| (1.0 - 10.0 * x) / 100.0)
        .unwrap()
        .with_rhs_dx(|_, _| -0.1)
}

fn poly_problem() -> FodeProblem {
    FodeProblem::new(1.5, |t, x| poly_fode_forcing(1.0, 1.5, t).unwrap() - x * x).unwrap()
}

fn oscillation_problem() -> FodeProblem {
    FodeProblem::new(1.5, |t, x| t * (-t).exp() - x).unwrap()
}

fn kia_problem(x0: f64) -> FodeProblem {
    FodeProblem::new(0.28, |t, x| 0.8 * t.powi(3) - (t - 0.5) * x.sin())
        .unwrap()
        .with_init_values(vec![x0])
        .unwrap()
}

#[test]
fn node_layouts() {
    let p = collocation_nodes(5, 2, NodeStrategy::PaperNodes).unwrap();
    assert_eq!(p.len(), 4);
    for (a, b) in p.iter().zip([0.0, 0.2, 0.4, 0.6]) {
        assert_relative_eq!(*a, b, epsilon = 1e-15);
    }
    let s = collocation_nodes(5, 2, NodeStrategy::ShiftedNodes).unwrap();
    for (a, b) in s.iter().zip([0.2, 0.4, 0.6, 0.8]) {
        assert_relative_eq!(*a, b, epsilon = 1e-15);
    }
    let s = collocation_nodes(3, 1, NodeStrategy::ShiftedNodes).unwrap();
    for (a, b) in s.iter().zip([1.0 / 3.0, 2.0 / 3.0, 1.0]) {
        assert_relative_eq!(*a, b, epsilon = 1e-15);
    }
    assert!(collocation_nodes(2, 2, NodeStrategy::ShiftedNodes).is_err());
}

#[test]
fn ansatz_caputo_small_cases() {
    let ord = FracOrder::new(0.5).unwrap();
    let zero = AnsatzSolution::from_coeffs(ord, 6, vec![0.0; 6]).unwrap();
    for t in [0.0, 0.3, 1.0] {
        assert_eq!(ansatz_caputo(&zero, t).unwrap(), 0.0);
    }
    // t(1 - t) = t - t^2
    let sol = AnsatzSolution::from_coeffs(ord, 2, vec![1.0, 0.0]).unwrap();
    let want = recip_gamma(1.5) - 2.0 * recip_gamma(2.5);
    assert_relative_eq!(
        ansatz_caputo(&sol, 1.0).unwrap(),
        want,
        max_relative = 1e-13
    );
    assert_eq!(ansatz_caputo(&sol, 0.0).unwrap(), 0.0);
}

#[test]
fn ansatz_caputo_matches_quadrature() {
    let ord = FracOrder::new(1.5).unwrap();
    let coeffs = vec![0.3, -1.2, 2.5, 0.7, -0.4, 1.1, 0.05];
    let sol = AnsatzSolution::from_coeffs(ord, 8, coeffs).unwrap();
    let spec = OperatorSpec::new(
        Side::Left,
        OperatorKind::CaputoDerivative,
        ord,
        Backend::Quadrature(6),
    );
    let q = apply(spec, &sol.ansatz_poly(), 0.7).unwrap();
    assert_relative_eq!(ansatz_caputo(&sol, 0.7).unwrap(), q, max_relative = 1e-10);
}

#[test]
fn polynomial_solution_in_ansatz_space() {
    let p = poly_problem();
    let sol = solve_default(&p, 5);
    let err = max_error(&sol, poly_fode_exact, &grid(101));
    assert!(err <= 1e-8, "n = 5 error {err:e}");
    assert!((eval_solution(&sol, 0.5).unwrap() - 0.09375).abs() <= 1e-8);
}

#[test]
fn manufactured_linear_problem_one_step() {
    // x = Σ c_i t^i (1-t)^(n-i), f(t, x) = -x + (D^α x_exact + x_exact)
    let ord = FracOrder::new(0.6).unwrap();
    let chosen = vec![0.5, -0.25, 1.0, 0.75, -0.5];
    let exact = AnsatzSolution::from_coeffs(ord, 5, chosen.clone()).unwrap();
    let ex = exact.clone();
    let p = FodeProblem::new(0.6, move |t, x| {
        let v = eval_solution(&ex, t).unwrap();
        ansatz_caputo(&ex, t).unwrap() + v - x
    })
    .unwrap()
    .with_rhs_dx(|_, _| -1.0);
    let sol = solve_default(&p, 5);
    assert!(sol.newton_report.iterations <= 1);
    for (a, b) in sol.coeffs.iter().zip(&chosen) {
        assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
    }
}

#[test]
fn exact_subspace_reproduction() {
    // nonlinear rhs, manufactured polynomial solutions up to degree 12
    for n in [3usize, 6, 9, 12] {
        let ord = FracOrder::new(0.7).unwrap();
        let chosen: Vec<f64> = (1..=n).map(|i| ((i * 7) % 5) as f64 * 0.2 - 0.4).collect();
        let exact = AnsatzSolution::from_coeffs(ord, n, chosen).unwrap();
        let ex = exact.clone();
        let p = FodeProblem::new(0.7, move |t, x| {
            let v = eval_solution(&ex, t).unwrap();
            ansatz_caputo(&ex, t).unwrap() + v * v - x * x
        })
        .unwrap();
        let sol = solve_default(&p, n);
        let err = max_error(&sol, |t| eval_solution(&exact, t).unwrap(), &grid(101));
        assert!(err <= 1e-8, "n = {n}: {err:e}");
    }
}

#[test]
fn relaxation_converges() {
    let p = relaxation_problem();
    let exact = |t| relaxation_exact(10.0, 100.0, 0.5, t).unwrap();
    let ts = grid(101);
    let errs: Vec<f64> = [5, 10, 15, 20]
        .iter()
        .map(|&n| max_error(&solve_default(&p, n), exact, &ts))
        .collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    let ratio = errs[3] / errs[1];
    assert!((0.35..=0.65).contains(&ratio), "ratio {ratio}");
}

#[test]
fn oscillation_converges() {
    let p = oscillation_problem();
    let oracle = OscillationOracle::new(1.5, 40).unwrap();
    let exact = |t| oracle.eval(t).unwrap();
    let ts = grid(101);
    let e10 = max_error(&solve_default(&p, 10), exact, &ts);
    let e15 = max_error(&solve_default(&p, 15), exact, &ts);
    let e20 = max_error(&solve_default(&p, 20), exact, &ts);
    assert!(e15 <= 5e-3, "{e15:e}");
    assert!(e20 < e10);
    // faster than first order here
    assert!((e10 / e20).log2() >= 0.7);
}

#[test]
fn shift_identity_and_kia() {
    let p = relaxation_problem();
    let q = shift_initial_conditions(&p);
    assert!(q.shift_poly().is_empty());
    assert_eq!(q.rhs(0.3, 0.01), p.rhs(0.3, 0.01));

    let k = kia_problem(1.2);
    let z = shift_initial_conditions(&k);
    assert_eq!(z.init_values(), &[0.0]);
    assert_eq!(z.shift_poly(), &[1.2]);
    for (t, zv) in [(0.0f64, 0.0f64), (0.4, 0.3), (1.0, -0.2)] {
        let want = 0.8 * f64::powi(t, 3) - (t - 0.5) * (zv + 1.2).sin();
        assert!((z.rhs(t, zv) - want).abs() <= 1e-15);
    }
}

#[test]
fn shift_reproduces_manufactured_solution() {
    // x = 1 + 2t + t^2 (t - 1)^2 ... written as shift + ansatz: α = 1.4, m = 2
    let exact = |t: f64| 1.0 + 2.0 * t + t * t * (1.0 - t);
    // ᶜD^1.4 (t^2 - t^3) = 2 t^0.6 / Γ(1.6) - 6 t^1.6 / Γ(2.6)
    let forcing = move |t: f64| {
        if t == 0.0 {
            0.0
        } else {
            2.0 * t.powf(0.6) * recip_gamma(1.6) - 6.0 * t.powf(1.6) * recip_gamma(2.6)
        }
    };
    let p = FodeProblem::new(1.4, move |t, x| forcing(t) + exact(t).sin() - x.sin())
        .unwrap()
        .with_init_values(vec![1.0, 2.0])
        .unwrap();
    let z = shift_initial_conditions(&p);
    assert_eq!(z.shift_poly(), &[1.0, 2.0]);
    let sol = solve_default(&p, 6);
    assert!(max_error(&sol, exact, &grid(101)) <= 1e-8);
    assert!((eval_solution(&sol, 0.0).unwrap() - 1.0).abs() <= 1e-15);
}

#[test]
fn endpoint_values() {
    let k = kia_problem(1.3);
    let sol = solve_default(&k, 8);
    assert_eq!(eval_solution(&sol, 0.0).unwrap(), 1.3);
    let at_one = eval_solution(&sol, 1.0).unwrap();
    assert_relative_eq!(
        at_one,
        sol.coeffs.last().unwrap() + 1.3,
        max_relative = 1e-14
    );
    assert!(eval_solution(&sol, 1.5).is_err());
}

#[test]
fn residual_certificate() {
    for (p, n) in [
        (relaxation_problem(), 12),
        (poly_problem(), 9),
        (kia_problem(1.5), 10),
    ] {
        let sol = solve_default(&p, n);
        assert!(sol.newton_report.residual <= DEFAULT_NEWTON_TOL);
        let r = residuals(&p, &sol).unwrap();
        let worst = r.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(worst <= 1e-10, "{worst:e}");
    }
}

#[test]
fn ansatz_vanishes_at_origin() {
    let sol = solve_default(&oscillation_problem(), 12);
    let p = sol.ansatz_poly();
    assert!(p.eval(0.0).unwrap().abs() <= 1e-12);
    let h = 1e-13;
    let d1 = (p.eval(h).unwrap() - p.eval(0.0).unwrap()) / h;
    assert!(d1.abs() <= 1e-12, "{d1:e}");
    assert!(p.derivative(1).unwrap().eval(0.0).unwrap().abs() <= 1e-12);
}

#[test]
fn kia_self_consistency() {
    let ts = grid(101);
    let mut at_zero = Vec::new();
    for x0 in [1.2, 1.3, 1.4, 1.5, 1.6] {
        let p = kia_problem(x0);
        let s10 = solve_default(&p, 10);
        let s15 = solve_default(&p, 15);
        let s20 = solve_default(&p, 20);
        let gap = |a: &AnsatzSolution, b: &AnsatzSolution| {
            max_error(a, |t| eval_solution(b, t).unwrap(), &ts)
        };
        let (d20, d15) = (gap(&s10, &s20), gap(&s10, &s15));
        assert!(d20 <= 2.0 * d15, "x0 = {x0}: {d20:e} vs {d15:e}");
        at_zero.push(eval_solution(&s10, 0.0).unwrap());
    }
    assert!(at_zero.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn stability_ratios() {
    let base = relaxation_problem();
    let same = stability_probe(&base, &base, 10, &grid(101)).unwrap();
    assert_eq!(same.solution_gap, 0.0);
    let ratio = |eps: f64| {
        let q = FodeProblem::new(0.5, move |_, x| (1.0 + eps - 10.0 * x) / 100.0).unwrap();
        let r = stability_probe(&base, &q, 10, &grid(101)).unwrap();
        // perturbation of the forcing itself, not of f = forcing / c
        r.solution_gap / eps
    };
    let (r3, r4) = (ratio(1e-3), ratio(1e-4));
    assert!(r3.is_finite() && r3 > 0.0);
    assert!((r3 - r4).abs() <= 0.1 * r4, "{r3} vs {r4}");

    let osc = oscillation_problem();
    let pert = FodeProblem::new(1.5, |t, x| t * (-t).exp() * (1.0 + 1e-4) - x).unwrap();
    let r = stability_probe(&osc, &pert, 15, &grid(101)).unwrap();
    assert!(r.rhs_gap > 0.0 && r.ratio() <= 10.0, "{r:?}");
}

#[test]
fn paper_nodes_are_singular() {
    let p = relaxation_problem().with_nodes(NodeStrategy::PaperNodes);
    assert_eq!(solve(&p, 6, 1e-12, 20).unwrap_err(), Error::SingularSystem);
}

#[test]
fn stagnation_reports_history() {
    let p = poly_problem();
    match solve(&p, 8, 1e-12, 1) {
        Err(Error::NewtonStagnation { residuals, .. }) => assert!(residuals.len() >= 2),
        other => panic!("expected stagnation, got {other:?}"),
    }
}

#[test]
fn invalid_problems() {
    assert!(FodeProblem::new(0.0, |_, _| 0.0).is_err());
    assert!(FodeProblem::new(1.5, |_, _| 0.0)
        .unwrap()
        .with_init_values(vec![1.0])
        .is_err());
    let sol = BernsteinPoly::new(vec![0.0; 3]).unwrap();
    assert_eq!(sol.degree(), 2);
    assert!(solve(&relaxation_problem(), 5, 0.0, 10).is_err());
}
