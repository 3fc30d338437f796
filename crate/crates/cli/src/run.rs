use std::fmt::{self, Write as _};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use bernfrac_core::fode::{eval_solution, solve, FodeProblem, NodeStrategy};
use bernfrac_core::harness::{
    approximation_with, eoc, exact_value, fode_error_curve, grid_error, table_on, ExpOrSin,
    Operation, TableKind, EOC_ALPHAS, EOC_NS, GRID_N, TABLE_NS,
};
use bernfrac_core::PrecisionMode;
use clap::{ArgAction, ArgGroup, Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::expr::{parse_expr, Expr, ParseError};
use crate::registry::{self, Exact, ProblemId};

#[derive(Debug, Parser)]
#[command(
    name = "bernfrac",
    version,
    about = "Bernstein approximation of fractional operators and fractional ODEs",
    after_help = registry::listing(),
    disable_help_flag = true,
    disable_version_flag = true
)]
pub struct Cli {
    /// Print help
    #[arg(long, global = true, action = ArgAction::Help)]
    help: Option<bool>,
    /// Print version
    #[arg(long, action = ArgAction::Version)]
    version: Option<bool>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Error of the Caputo derivative of B_n(f) on the grid
    Deriv(OpArgs),
    /// Error of the Riemann-Liouville integral of B_n(f) on the grid
    Integ(OpArgs),
    /// Solve a fractional ODE by Bernstein collocation
    Solve(SolveArgs),
    /// Pointwise error or EOC tables as CSV
    Tables(TableArgs),
    /// Experimental order of convergence for an operator or a registered problem
    Eoc(EocArgs),
}

#[derive(Debug, Args)]
pub struct OpArgs {
    /// Test function: exp or sin
    #[arg(long = "f")]
    pub f: ExpOrSin,
    #[arg(long)]
    pub alpha: f64,
    /// Polynomial degree
    #[arg(long)]
    pub n: usize,
    /// Error grid j/N, j = 1..N
    #[arg(long = "grid-n", default_value_t = GRID_N)]
    pub grid_n: usize,
    /// Decimal digits of the extended backend (default: automatic by degree)
    #[arg(long = "precision-digits")]
    pub precision_digits: Option<u32>,
    /// Write `x,error` rows here
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NodeArg {
    /// t_i = (i - m + 1)/(n - m + 1)
    Shifted,
    /// t_i = i/n, singular for every problem
    Uniform,
}

impl From<NodeArg> for NodeStrategy {
    fn from(a: NodeArg) -> Self {
        match a {
            NodeArg::Shifted => NodeStrategy::ShiftedNodes,
            NodeArg::Uniform => NodeStrategy::PaperNodes,
        }
    }
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["problem", "rhs"])))]
pub struct SolveArgs {
    /// Registered problem
    #[arg(long)]
    pub problem: Option<ProblemId>,
    /// Right-hand side f(t, x)
    #[arg(long)]
    pub rhs: Option<String>,
    /// Partial derivative of the right-hand side in x (default: finite differences)
    #[arg(long = "rhs-dx", requires = "rhs")]
    pub rhs_dx: Option<String>,
    /// Fractional order (default: the problem's own)
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Ansatz degree
    #[arg(long)]
    pub n: usize,
    /// Initial values x(0), x'(0), ...
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub x0: Vec<f64>,
    #[arg(long, value_enum, default_value_t = NodeArg::Shifted)]
    pub nodes: NodeArg,
    /// Output rows t = j/N, j = 0..N
    #[arg(long = "grid-n", default_value_t = GRID_N)]
    pub grid_n: usize,
    /// Degree of the comparison solve (default 2n, 0 disables)
    #[arg(long = "compare-n")]
    pub compare_n: Option<usize>,
    #[arg(long = "newton-tol", default_value_t = bernfrac_core::fode::DEFAULT_NEWTON_TOL)]
    pub newton_tol: f64,
    #[arg(long = "max-iter", default_value_t = bernfrac_core::fode::DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    /// Write `t,x_n,x_exact,error` rows here
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    /// ec, ei, eoc-d or eoc-i
    #[arg(long)]
    pub kind: TableKind,
    #[arg(long = "f")]
    pub f: ExpOrSin,
    /// One order for ec/ei, a list for EOC tables (default 0.25,0.5,0.75)
    #[arg(long, value_delimiter = ',')]
    pub alpha: Vec<f64>,
    /// Degrees (default 40,60,80,100 or 20,40,80,160,320)
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    #[arg(long = "grid-n", default_value_t = GRID_N)]
    pub grid_n: usize,
    /// Write the table here instead of standard output
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OpArg {
    Deriv,
    Integ,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("target").required(true).args(["f", "problem"])))]
pub struct EocArgs {
    #[arg(long = "f")]
    pub f: Option<ExpOrSin>,
    #[arg(long, value_enum, default_value_t = OpArg::Deriv)]
    pub op: OpArg,
    #[arg(long)]
    pub problem: Option<ProblemId>,
    /// Fractional order (required with --f)
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Degrees (default 20,40,80,160,320 for operators, 5,10,20,40 for problems)
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    #[arg(long = "grid-n", default_value_t = GRID_N)]
    pub grid_n: usize,
    #[arg(long = "precision-digits")]
    pub precision_digits: Option<u32>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("in expression: {0}")]
    Parse(#[from] ParseError),
    #[error("cannot write {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Numeric(#[from] bernfrac_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Numeric(_) => 2,
            _ => 1,
        }
    }
}

/// Numbers reported by one run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary {
    pub lines: Vec<(String, String)>,
    pub max_error: Option<f64>,
    pub eoc: Vec<(usize, f64)>,
    pub newton_iterations: Option<usize>,
    pub gap: Option<f64>,
    pub rows: Option<usize>,
}

impl Summary {
    fn push(&mut self, key: &str, value: impl fmt::Display) {
        self.lines.push((key.to_string(), value.to_string()));
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.lines {
            writeln!(f, "{k}: {v}")?;
        }
        Ok(())
    }
}

fn sci(v: f64) -> String {
    format!("{v:.10e}")
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io_err = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(contents.as_bytes()).map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

fn emit(out: &Option<PathBuf>, csv: &str, summary: &mut Summary) -> Result<(), CliError> {
    if let Some(path) = out {
        write_atomic(path, csv)?;
        summary.push("wrote", path.display());
    }
    Ok(())
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "--{name} must be positive, got {v}"
        )))
    }
}

fn nonzero(name: &str, v: usize) -> Result<(), CliError> {
    if v > 0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--{name} must be positive")))
    }
}

fn precision(digits: Option<u32>, n: usize) -> PrecisionMode {
    digits.map_or(PrecisionMode::auto(n), PrecisionMode::Extended)
}

fn operator_report(
    f: ExpOrSin,
    op: Operation,
    alpha: f64,
    n: usize,
    grid_n: usize,
    digits: Option<u32>,
) -> Result<bernfrac_core::harness::ErrorReport, CliError> {
    let operator = approximation_with(f, op, alpha, n, precision(digits, n))?;
    let signed = if op == Operation::Derivative {
        alpha
    } else {
        -alpha
    };
    let report = grid_error(
        |x| operator.eval(x),
        |x| exact_value(f, op, alpha, x),
        grid_n,
    )?;
    if report.non_finite {
        return Err(bernfrac_core::Error::Numeric("non-finite error on the grid".into()).into());
    }
    Ok(report.labelled(n, signed))
}

pub fn run(cli: Cli) -> Result<Summary, CliError> {
    match cli.command {
        Command::Deriv(a) => run_operator(a, Operation::Derivative),
        Command::Integ(a) => run_operator(a, Operation::Integral),
        Command::Solve(a) => run_solve(a),
        Command::Tables(a) => run_tables(a),
        Command::Eoc(a) => run_eoc(a),
    }
}

fn run_operator(a: OpArgs, op: Operation) -> Result<Summary, CliError> {
    positive("alpha", a.alpha)?;
    nonzero("n", a.n)?;
    nonzero("grid-n", a.grid_n)?;
    let report = operator_report(a.f, op, a.alpha, a.n, a.grid_n, a.precision_digits)?;
    let mut s = Summary::default();
    s.push("function", a.f);
    s.push("alpha", a.alpha);
    s.push("n", a.n);
    s.push(
        "precision",
        format!("{:?}", precision(a.precision_digits, a.n)),
    );
    s.push("max error", sci(report.max_error));
    s.push(
        "error at x = 1",
        sci(report.error_at(1.0).unwrap_or(f64::NAN)),
    );
    s.max_error = Some(report.max_error);
    s.rows = Some(report.per_point.len());
    emit(&a.out, &report.to_csv(), &mut s)?;
    Ok(s)
}

struct Built {
    problem: FodeProblem,
    exact: Option<Exact>,
}

fn expression_rhs(src: &str) -> Result<Arc<Expr>, CliError> {
    Ok(Arc::new(parse_expr(src)?))
}

fn build_problem(a: &SolveArgs) -> Result<Built, CliError> {
    let usage = |e: bernfrac_core::Error| CliError::Usage(e.to_string());
    let (mut problem, exact) = if let Some(id) = a.problem {
        let alpha = a.alpha.unwrap_or(id.default_alpha());
        positive("alpha", alpha)?;
        if !a.x0.is_empty() && !id.takes_init_values() {
            return Err(CliError::Usage(format!(
                "{} has fixed initial values; --x0 is not accepted",
                id.name()
            )));
        }
        (id.problem(alpha).map_err(usage)?, id.exact(alpha)?)
    } else {
        let src = a.rhs.as_deref().unwrap_or_default();
        let alpha = a
            .alpha
            .ok_or_else(|| CliError::Usage("--rhs requires --alpha".into()))?;
        positive("alpha", alpha)?;
        let rhs = expression_rhs(src)?;
        let mut p = FodeProblem::new(alpha, move |t, x| rhs.eval(t, x).unwrap_or(f64::NAN))
            .map_err(usage)?
            .with_label(src);
        if let Some(dx) = &a.rhs_dx {
            let dx = expression_rhs(dx)?;
            p = p.with_rhs_dx(move |t, x| dx.eval(t, x).unwrap_or(f64::NAN));
        }
        (p, None)
    };
    if !a.x0.is_empty() {
        problem = problem.with_init_values(a.x0.clone()).map_err(usage)?;
    }
    Ok(Built {
        problem: problem.with_nodes(a.nodes.into()),
        exact,
    })
}

fn run_solve(a: SolveArgs) -> Result<Summary, CliError> {
    nonzero("n", a.n)?;
    nonzero("grid-n", a.grid_n)?;
    let Built { problem, exact } = build_problem(&a)?;
    let sol = solve(&problem, a.n, a.newton_tol, a.max_iter)?;

    let ts: Vec<f64> = (0..=a.grid_n).map(|j| j as f64 / a.grid_n as f64).collect();
    let mut csv = String::from("t,x_n,x_exact,error\n");
    let mut max_error: Option<f64> = None;
    for &t in &ts {
        let xn = eval_solution(&sol, t)?;
        match &exact {
            Some(exact) => {
                let xe = exact(t)?;
                let e = (xn - xe).abs();
                max_error = Some(max_error.unwrap_or(0.0).max(e));
                writeln!(csv, "{t},{xn},{xe},{e}").unwrap();
            }
            None => writeln!(csv, "{t},{xn},,").unwrap(),
        }
    }

    let mut s = Summary::default();
    s.push("problem", problem.label());
    s.push("alpha", problem.order().alpha());
    s.push("n", a.n);
    s.push("newton iterations", sol.newton_report.iterations);
    s.push("newton residual", sci(sol.newton_report.residual));
    if sol.newton_report.reseeded {
        s.push("reseeded", "yes");
    }
    s.newton_iterations = Some(sol.newton_report.iterations);
    if let Some(e) = max_error {
        s.push("max error", sci(e));
    }
    s.max_error = max_error;

    let m = a.compare_n.unwrap_or(2 * a.n);
    if m > 0 {
        let other = solve(&problem, m, a.newton_tol, a.max_iter)?;
        let mut gap = 0.0f64;
        for &t in &ts {
            gap = gap.max((eval_solution(&sol, t)? - eval_solution(&other, t)?).abs());
        }
        s.push(&format!("gap vs n = {m}"), sci(gap));
        s.gap = Some(gap);
        if let (Some(exact), Some(e_n)) = (&exact, max_error) {
            let mut e_m = 0.0f64;
            for &t in &ts {
                e_m = e_m.max((eval_solution(&other, t)? - exact(t)?).abs());
            }
            s.push(&format!("max error at n = {m}"), sci(e_m));
            if m == 2 * a.n {
                if let Ok(v) = eoc(e_n, e_m) {
                    s.push(&format!("EOC({}, {m})", a.n), format!("{v:.4}"));
                    s.eoc.push((a.n, v));
                }
            }
        }
    }
    s.rows = Some(ts.len());
    emit(&a.out, &csv, &mut s)?;
    Ok(s)
}

fn run_tables(a: TableArgs) -> Result<Summary, CliError> {
    let eoc_kind = matches!(a.kind, TableKind::EocD | TableKind::EocI);
    let alphas = match (a.alpha.is_empty(), eoc_kind) {
        (true, true) => EOC_ALPHAS.to_vec(),
        (true, false) => {
            return Err(CliError::Usage(
                "--alpha is required for ec/ei tables".into(),
            ))
        }
        _ => a.alpha.clone(),
    };
    for &al in &alphas {
        positive("alpha", al)?;
    }
    let ns = match (a.n.is_empty(), eoc_kind) {
        (false, _) => a.n.clone(),
        (true, true) => EOC_NS.to_vec(),
        (true, false) => TABLE_NS.to_vec(),
    };
    for &n in &ns {
        nonzero("n", n)?;
    }
    let t = table_on(a.kind, a.f, &alphas, &ns, a.grid_n)?;
    let csv = t.to_csv();
    let mut s = Summary {
        rows: Some(t.rows.len()),
        ..Summary::default()
    };
    match &a.out {
        Some(_) => emit(&a.out, &csv, &mut s)?,
        None => s
            .lines
            .push(("table".into(), format!("\n{}", csv.trim_end()))),
    }
    Ok(s)
}

fn run_eoc(a: EocArgs) -> Result<Summary, CliError> {
    nonzero("grid-n", a.grid_n)?;
    let mut s = Summary::default();
    let mut csv = String::new();
    if let Some(f) = a.f {
        let alpha = a
            .alpha
            .ok_or_else(|| CliError::Usage("--f requires --alpha".into()))?;
        positive("alpha", alpha)?;
        let op = match a.op {
            OpArg::Deriv => Operation::Derivative,
            OpArg::Integ => Operation::Integral,
        };
        let ns = if a.n.is_empty() {
            EOC_NS.to_vec()
        } else {
            a.n.clone()
        };
        csv.push_str("n,E_n,E_2n,EOC\n");
        for n in ns {
            nonzero("n", n)?;
            let e_n = operator_report(f, op, alpha, n, a.grid_n, a.precision_digits)?.max_error;
            let e_2n =
                operator_report(f, op, alpha, 2 * n, a.grid_n, a.precision_digits)?.max_error;
            let v = eoc(e_n, e_2n)?;
            writeln!(csv, "{n},{e_n},{e_2n},{v}").unwrap();
            s.push(
                &format!("EOC({n}, {})", 2 * n),
                format!("{v:.6}  E = {} / {}", sci(e_n), sci(e_2n)),
            );
            s.eoc.push((n, v));
        }
    } else {
        let id = a.problem.expect("clap enforces --f or --problem");
        let alpha = a.alpha.unwrap_or(id.default_alpha());
        positive("alpha", alpha)?;
        let exact = id
            .exact(alpha)?
            .ok_or_else(|| CliError::Usage(format!("{} has no exact solution", id.name())))?;
        let problem = id
            .problem(alpha)
            .map_err(|e| CliError::Usage(e.to_string()))?;
        let ns = if a.n.is_empty() {
            vec![5, 10, 20, 40]
        } else {
            a.n.clone()
        };
        for &n in &ns {
            nonzero("n", n)?;
        }
        let reports = fode_error_curve(&problem, |t| exact(t), &ns, a.grid_n)?;
        csv.push_str("n,max_error,eoc\n");
        for r in &reports {
            let e = r.eoc_vs_half.map(|v| v.to_string()).unwrap_or_default();
            writeln!(csv, "{},{},{e}", r.n, r.max_error).unwrap();
            let mut line = sci(r.max_error);
            if let Some(v) = r.eoc_vs_half {
                line.push_str(&format!("  EOC({}, {}) = {v:.4}", r.n / 2, r.n));
                s.eoc.push((r.n / 2, v));
            }
            s.push(&format!("E({})", r.n), line);
        }
    }
    emit(&a.out, &csv, &mut s)?;
    Ok(s)
}
