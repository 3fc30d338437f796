use bernfrac_core::fode::{eval_solution, solve, FodeProblem};
use bernfrac_core::harness::*;
use bernfrac_core::oracles::{poly_fode_exact, poly_fode_forcing, relaxation_exact};

#[test]
fn exp_derivative_report_at_one() {
    let r = approximation_error(ExpOrSin::Exp, Operation::Derivative, 0.5, 80, GRID_N).unwrap();
    assert_eq!(r.n, 80);
    assert_eq!(r.alpha_signed, 0.5);
    assert_eq!(r.per_point.len(), 100);
    assert!((r.error_at(1.0).unwrap() - 0.0053288670).abs() <= 1e-6);
    assert!(r.max_error >= r.error_at(1.0).unwrap());
}

#[test]
fn sin_integral_report_at_point_eight() {
    let r = approximation_error(ExpOrSin::Sin, Operation::Integral, 0.75, 80, GRID_N).unwrap();
    assert_eq!(r.alpha_signed, -0.75);
    assert!((r.error_at(0.8).unwrap() - 0.0005178911).abs() <= 1e-6);
}

#[test]
fn pointwise_table_row() {
    let t = table(TableKind::EC, ExpOrSin::Exp, &[0.5], &TABLE_NS).unwrap();
    let want = [0.0073719719, 0.0049132237, 0.0036843732, 0.0029472355];
    for (col, w) in want.iter().enumerate() {
        assert!((t.cell(0.4, col).unwrap() - w).abs() <= 1e-6);
    }
    let t = table(TableKind::EI, ExpOrSin::Exp, &[0.5], &[60]).unwrap();
    assert!((t.cell(0.6, 0).unwrap() - 0.0023986370).abs() <= 1e-6);
    assert!(table(TableKind::EC, ExpOrSin::Exp, &[0.25, 0.5], &[40]).is_err());
}

#[test]
fn eoc_cells() {
    let t = table(TableKind::EocD, ExpOrSin::Exp, &[0.5], &[20]).unwrap();
    assert!((t.cell(20.0, 0).unwrap() - 0.9927445216).abs() <= 1e-3);
    let t = table(TableKind::EocD, ExpOrSin::Sin, &[0.25], &[80]).unwrap();
    assert!((t.cell(80.0, 0).unwrap() - 0.9984573422).abs() <= 1e-3);
    let t = table(TableKind::EocI, ExpOrSin::Sin, &[0.75], &[320]).unwrap();
    assert!((t.cell(320.0, 0).unwrap() - 0.9999065568).abs() <= 1e-3);
}

#[test]
fn eoc_columns_approach_one() {
    for kind in [TableKind::EocD, TableKind::EocI] {
        let t = table(kind, ExpOrSin::Sin, &EOC_ALPHAS, &[20, 40, 80]).unwrap();
        for col in 0..EOC_ALPHAS.len() {
            let c: Vec<f64> = t.rows.iter().map(|r| r.1[col]).collect();
            assert!(c.windows(2).all(|w| w[1] > w[0]), "{kind:?} {c:?}");
        }
    }
}

#[test]
fn csv_is_deterministic() {
    let a = table(TableKind::EI, ExpOrSin::Sin, &[0.75], &TABLE_NS)
        .unwrap()
        .to_csv();
    let b = table(TableKind::EI, ExpOrSin::Sin, &[0.75], &TABLE_NS)
        .unwrap()
        .to_csv();
    assert_eq!(a, b);
    let first = a.lines().next().unwrap();
    assert_eq!(first, "x,EI_40,EI_60,EI_80,EI_100");
    assert!(!a.contains('\r'));
    let row = a.lines().nth(1).unwrap();
    assert_eq!(row, "0,0.0000000000,0.0000000000,0.0000000000,0.0000000000");
    let t = table(TableKind::EocI, ExpOrSin::Exp, &EOC_ALPHAS, &[20]).unwrap();
    assert_eq!(
        t.to_csv().lines().next().unwrap(),
        "n,EOCI_0.25,EOCI_0.5,EOCI_0.75"
    );
}

#[test]
fn fode_curves() {
    let p = FodeProblem::new(1.5, |t, x| poly_fode_forcing(1.0, 1.5, t).unwrap() - x * x).unwrap();
    let r = fode_error_curve(&p, |t| Ok(poly_fode_exact(t)), &[5], GRID_N).unwrap();
    assert!(r[0].max_error <= 1e-8);

    let relax = FodeProblem::new(0.5, |_, x| (1.0 - 10.0 * x) / 100.0).unwrap();
    let r = fode_error_curve(
        &relax,
        |t| relaxation_exact(10.0, 100.0, 0.5, t),
        &[5, 10, 15, 20],
        GRID_N,
    )
    .unwrap();
    assert!(r.windows(2).all(|w| w[1].max_error < w[0].max_error));
    assert!(r[1].eoc_vs_half.is_some() && r[3].eoc_vs_half.is_some());
    assert!(r[2].eoc_vs_half.is_none());

    // the solution measured against itself
    let sol = solve(&relax, 8, 1e-12, 50).unwrap();
    let r = fode_error_curve(&relax, |t| eval_solution(&sol, t), &[8], GRID_N).unwrap();
    assert_eq!(r[0].max_error, 0.0);
}
