//! Grid errors, experimental orders of convergence and the error tables for
//! the `e^x` and `sin x` examples.
//!
//! The error grid is `x_j = j / N`, `j = 1..=N`, with `N = 100` by default.

use std::fmt::{self, Write as _};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fode::{eval_solution, solve, FodeProblem, DEFAULT_MAX_ITER, DEFAULT_NEWTON_TOL};
use crate::frac_ops::{Backend, FracOperator, FracOrder, OperatorKind, OperatorSpec, Side};
use crate::oracles;
use crate::poly::BernsteinPoly;
use crate::precision::PrecisionMode;

/// Default number of error-grid points.
pub const GRID_N: usize = 100;

/// Sample points of the error tables.
pub const TABLE_XS: [f64; 6] = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];

/// Degrees of the EC/EI tables.
pub const TABLE_NS: [usize; 4] = [40, 60, 80, 100];

/// Degrees of the EOC tables.
pub const EOC_NS: [usize; 5] = [20, 40, 80, 160, 320];

/// Orders of the EOC tables.
pub const EOC_ALPHAS: [f64; 3] = [0.25, 0.5, 0.75];

/// `x_j = j / N`, `j = 1..=N`.
pub fn grid_points(grid_n: usize) -> Vec<f64> {
    (1..=grid_n).map(|j| j as f64 / grid_n as f64).collect()
}

/// Pointwise and maximum errors of one approximation.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub n: usize,
    /// Positive for derivatives, negative for integrals.
    pub alpha_signed: f64,
    pub grid_n: usize,
    pub max_error: f64,
    pub per_point: Vec<(f64, f64)>,
    pub eoc_vs_half: Option<f64>,
    /// Set when some error was NaN or infinite; `max_error` is then NaN.
    pub non_finite: bool,
}

impl ErrorReport {
    pub fn labelled(mut self, n: usize, alpha_signed: f64) -> Self {
        self.n = n;
        self.alpha_signed = alpha_signed;
        self
    }

    /// Error at the grid point nearest to `x`.
    pub fn error_at(&self, x: f64) -> Option<f64> {
        self.per_point
            .iter()
            .min_by(|a, b| (a.0 - x).abs().total_cmp(&(b.0 - x).abs()))
            .map(|p| p.1)
    }

    /// `x,error` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,error\n");
        for (x, e) in &self.per_point {
            writeln!(out, "{},{}", fmt_key(*x), fmt_cell(*e)).unwrap();
        }
        out
    }
}

/// `|oracle(x_j) - approx(x_j)|` on the `N`-point grid, evaluated left to
/// right.
pub fn grid_error<A, O>(approx: A, oracle: O, grid_n: usize) -> Result<ErrorReport>
where
    A: Fn(f64) -> Result<f64>,
    O: Fn(f64) -> Result<f64>,
{
    if grid_n == 0 {
        return Err(Error::InvalidParameter("grid size must be positive".into()));
    }
    let mut per_point = Vec::with_capacity(grid_n);
    for x in grid_points(grid_n) {
        per_point.push((x, (oracle(x)? - approx(x)?).abs()));
    }
    Ok(report_from(per_point, grid_n))
}

fn report_from(per_point: Vec<(f64, f64)>, grid_n: usize) -> ErrorReport {
    let non_finite = per_point.iter().any(|p| !p.1.is_finite());
    let max_error = if non_finite {
        f64::NAN
    } else {
        per_point.iter().fold(0.0f64, |m, p| m.max(p.1))
    };
    ErrorReport {
        n: 0,
        alpha_signed: 0.0,
        grid_n,
        max_error,
        per_point,
        eoc_vs_half: None,
        non_finite,
    }
}

/// `|log2|e_2n / e_n||`.
pub fn eoc(e_n: f64, e_2n: f64) -> Result<f64> {
    if e_n == 0.0 || e_2n == 0.0 || !e_n.is_finite() || !e_2n.is_finite() {
        return Err(Error::UndefinedEoc);
    }
    Ok((e_2n / e_n).abs().log2().abs())
}

/// Test function of the approximation tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExpOrSin {
    Exp,
    Sin,
}

impl ExpOrSin {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            ExpOrSin::Exp => x.exp(),
            ExpOrSin::Sin => x.sin(),
        }
    }

    fn name(self) -> &'static str {
        match self {
            ExpOrSin::Exp => "exp",
            ExpOrSin::Sin => "sin",
        }
    }
}

impl fmt::Display for ExpOrSin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ExpOrSin {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exp" => Ok(ExpOrSin::Exp),
            "sin" => Ok(ExpOrSin::Sin),
            _ => Err(Error::InvalidParameter(format!(
                "unknown test function {s:?} (expected exp or sin)"
            ))),
        }
    }
}

/// Derivative (`EC`) or integral (`EI`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Operation {
    Derivative,
    Integral,
}

/// Exact left Caputo derivative or RL integral of the test function.
pub fn exact_value(example: ExpOrSin, op: Operation, alpha: f64, x: f64) -> Result<f64> {
    match (example, op) {
        (ExpOrSin::Exp, Operation::Derivative) => oracles::exp_caputo(alpha, x),
        (ExpOrSin::Exp, Operation::Integral) => oracles::exp_integral(alpha, x),
        (ExpOrSin::Sin, Operation::Derivative) => oracles::sin_caputo(alpha, x),
        (ExpOrSin::Sin, Operation::Integral) => oracles::sin_integral(alpha, x),
    }
}

/// Operator applied to the degree-`n` Bernstein approximant, closed form in
/// the precision chosen by the degree.
pub fn approximation(
    example: ExpOrSin,
    op: Operation,
    alpha: f64,
    n: usize,
) -> Result<FracOperator> {
    approximation_with(example, op, alpha, n, PrecisionMode::auto(n))
}

pub fn approximation_with(
    example: ExpOrSin,
    op: Operation,
    alpha: f64,
    n: usize,
    precision: PrecisionMode,
) -> Result<FracOperator> {
    let p = BernsteinPoly::sample_function(|x| example.eval(x), n)?.with_precision(precision);
    let kind = match op {
        Operation::Derivative => OperatorKind::CaputoDerivative,
        Operation::Integral => OperatorKind::RLIntegral,
    };
    let spec = OperatorSpec::new(
        Side::Left,
        kind,
        FracOrder::new(alpha)?,
        Backend::ClosedForm,
    );
    FracOperator::new(spec, &p)
}

/// `E(n, ±α)` with its per-point errors.
pub fn approximation_error(
    example: ExpOrSin,
    op: Operation,
    alpha: f64,
    n: usize,
    grid_n: usize,
) -> Result<ErrorReport> {
    let operator = approximation(example, op, alpha, n)?;
    let xs = grid_points(grid_n);
    let approx = operator.eval_many(&xs)?;
    let per_point = xs
        .iter()
        .zip(approx)
        .map(|(&x, a)| Ok((x, (exact_value(example, op, alpha, x)? - a).abs())))
        .collect::<Result<Vec<_>>>()?;
    let signed = match op {
        Operation::Derivative => alpha,
        Operation::Integral => -alpha,
    };
    Ok(report_from(per_point, grid_n).labelled(n, signed))
}

/// Pointwise error of one operator at one point, as listed in the EC/EI
/// tables.
pub fn point_error(example: ExpOrSin, op: Operation, alpha: f64, n: usize, x: f64) -> Result<f64> {
    let a = approximation(example, op, alpha, n)?.eval(x)?;
    Ok((exact_value(example, op, alpha, x)? - a).abs())
}

/// Table layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TableKind {
    /// Pointwise derivative errors, rows `x`, columns `n`.
    EC,
    /// Pointwise integral errors, rows `x`, columns `n`.
    EI,
    /// EOC of the derivative, rows `n`, columns `α`.
    EocD,
    /// EOC of the integral, rows `n`, columns `α`.
    EocI,
}

impl TableKind {
    fn operation(self) -> Operation {
        match self {
            TableKind::EC | TableKind::EocD => Operation::Derivative,
            TableKind::EI | TableKind::EocI => Operation::Integral,
        }
    }
}

impl std::str::FromStr for TableKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ec" => Ok(TableKind::EC),
            "ei" => Ok(TableKind::EI),
            "eoc-d" | "eocd" => Ok(TableKind::EocD),
            "eoc-i" | "eoci" => Ok(TableKind::EocI),
            _ => Err(Error::InvalidParameter(format!(
                "unknown table kind {s:?} (expected ec, ei, eoc-d or eoc-i)"
            ))),
        }
    }
}

/// Keyed rows of numbers; the first column holds `x` or `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub kind: TableKind,
    pub example: ExpOrSin,
    pub header: Vec<String>,
    pub rows: Vec<(f64, Vec<f64>)>,
}

fn fmt_key(v: f64) -> String {
    format!("{v}")
}

fn fmt_cell(v: f64) -> String {
    format!("{v:.10}")
}

fn fmt_alpha(a: f64) -> String {
    format!("{a}")
}

impl Table {
    /// Cell at row key `key` and column `col` (0-based, excluding the key).
    pub fn cell(&self, key: f64, col: usize) -> Option<f64> {
        self.rows
            .iter()
            .find(|(k, _)| (k - key).abs() < 1e-12)
            .and_then(|(_, r)| r.get(col).copied())
    }

    /// CSV with a header such as `x,EC_40,EC_60`, ten fractional digits, LF
    /// line endings.
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for (key, row) in &self.rows {
            out.push_str(&fmt_key(*key));
            for v in row {
                out.push(',');
                out.push_str(&fmt_cell(*v));
            }
            out.push('\n');
        }
        out
    }
}

/// Builds one of the error tables.
///
/// EC/EI tables take a single `α` and list pointwise errors at
/// [`TABLE_XS`] for every `n`. EOC tables list `EOC(n) = |log2(E(2n)/E(n))|`
/// of the grid maximum for every `n` and `α`.
pub fn table(kind: TableKind, example: ExpOrSin, alphas: &[f64], ns: &[usize]) -> Result<Table> {
    table_on(kind, example, alphas, ns, GRID_N)
}

pub fn table_on(
    kind: TableKind,
    example: ExpOrSin,
    alphas: &[f64],
    ns: &[usize],
    grid_n: usize,
) -> Result<Table> {
    if alphas.is_empty() || ns.is_empty() {
        return Err(Error::InvalidParameter(
            "table needs at least one α and one n".into(),
        ));
    }
    let op = kind.operation();
    match kind {
        TableKind::EC | TableKind::EI => {
            let [alpha] = alphas else {
                return Err(Error::InvalidParameter(
                    "pointwise error tables take exactly one α".into(),
                ));
            };
            let label = if kind == TableKind::EC { "EC" } else { "EI" };
            let mut header = vec!["x".to_string()];
            header.extend(ns.iter().map(|n| format!("{label}_{n}")));
            let columns = ns
                .par_iter()
                .map(|&n| {
                    let operator = approximation(example, op, *alpha, n)?;
                    TABLE_XS
                        .iter()
                        .map(|&x| {
                            Ok((exact_value(example, op, *alpha, x)? - operator.eval(x)?).abs())
                        })
                        .collect::<Result<Vec<f64>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            let rows = TABLE_XS
                .iter()
                .enumerate()
                .map(|(i, &x)| (x, columns.iter().map(|c| c[i]).collect()))
                .collect();
            Ok(Table {
                kind,
                example,
                header,
                rows,
            })
        }
        TableKind::EocD | TableKind::EocI => {
            let mut degrees: Vec<usize> = ns.iter().flat_map(|&n| [n, 2 * n]).collect();
            degrees.sort_unstable();
            degrees.dedup();
            let jobs: Vec<(usize, usize)> = (0..alphas.len())
                .flat_map(|a| degrees.iter().map(move |&n| (a, n)))
                .collect();
            let maxima = jobs
                .par_iter()
                .map(|&(a, n)| {
                    Ok((
                        (a, n),
                        approximation_error(example, op, alphas[a], n, grid_n)?.max_error,
                    ))
                })
                .collect::<Result<std::collections::HashMap<_, _>>>()?;
            let label = if kind == TableKind::EocD {
                "EOCD"
            } else {
                "EOCI"
            };
            let mut header = vec!["n".to_string()];
            header.extend(alphas.iter().map(|a| format!("{label}_{}", fmt_alpha(*a))));
            let rows = ns
                .iter()
                .map(|&n| {
                    let row = (0..alphas.len())
                        .map(|a| eoc(maxima[&(a, n)], maxima[&(a, 2 * n)]))
                        .collect::<Result<Vec<f64>>>()?;
                    Ok((n as f64, row))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Table {
                kind,
                example,
                header,
                rows,
            })
        }
    }
}

/// Solves at every degree in `ns` and reports the error against `oracle` on
/// the `grid_n`-point grid. Consecutive reports carry the EOC when the degree
/// doubles.
pub fn fode_error_curve<O>(
    problem: &FodeProblem,
    oracle: O,
    ns: &[usize],
    grid_n: usize,
) -> Result<Vec<ErrorReport>>
where
    O: Fn(f64) -> Result<f64>,
{
    let mut reports: Vec<ErrorReport> = Vec::with_capacity(ns.len());
    for &n in ns {
        let sol = solve(problem, n, DEFAULT_NEWTON_TOL, DEFAULT_MAX_ITER)?;
        let mut r = grid_error(|t| eval_solution(&sol, t), &oracle, grid_n)?
            .labelled(n, problem.order().alpha());
        if let Some(prev) = reports.iter().find(|p| 2 * p.n == n) {
            r.eoc_vs_half = eoc(prev.max_error, r.max_error).ok();
        }
        reports.push(r);
    }
    Ok(reports)
}
