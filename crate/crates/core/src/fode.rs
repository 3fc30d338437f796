//! Bernstein collocation for `ᶜD^α x(t) = f(t, x(t))` on [0, 1].
//!
//! The trial solution is `x_n(t) = Σ_{i=m}^{n} c_i t^i (1-t)^(n-i)`, which has
//! an `m`-fold zero at the origin, so the Caputo and Riemann–Liouville
//! derivatives of the ansatz coincide. Nonzero initial data are handled by
//! subtracting the Taylor polynomial of the initial values first.
//!
//! Internally the unknowns are the Bernstein coefficients
//! `b_i = c_i / C(n, i)`, which keeps the collocation matrix well scaled. The
//! matrix columns are fractional derivatives of single Bernstein basis
//! functions computed with the Gauss–Jacobi backend, which involves no
//! alternating sums.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::frac_ops::{
    default_nodes, Backend, FracOperator, FracOrder, OperatorKind, OperatorSpec, Side,
};
use crate::poly::{de_casteljau, BernsteinPoly};
use crate::precision::{PrecisionMode, TOLERANCES};

pub const DEFAULT_NEWTON_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 50;
const MAX_HALVINGS: usize = 30;

/// Scalar function of `(t, x)`.
pub type Rhs = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Where the collocation equations are imposed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum NodeStrategy {
    /// `t_j = j/n`, `j = 0..=n-m`. The `t = 0` equation degenerates to
    /// `0 = f(0, 0)`.
    PaperNodes,
    /// `t_j = j/n`, `j = 1..=n-m+1`.
    #[default]
    ShiftedNodes,
}

/// `ᶜD^α x = f(t, x)` with `x^(k)(0) = x_k`.
#[derive(Clone)]
pub struct FodeProblem {
    order: FracOrder,
    rhs: Rhs,
    rhs_dx: Option<Rhs>,
    init_values: Vec<f64>,
    node_strategy: NodeStrategy,
    label: String,
    /// Power coefficients of an already removed initial-value polynomial.
    shift_poly: Vec<f64>,
}

impl fmt::Debug for FodeProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FodeProblem")
            .field("order", &self.order)
            .field("has_rhs_dx", &self.rhs_dx.is_some())
            .field("init_values", &self.init_values)
            .field("node_strategy", &self.node_strategy)
            .field("label", &self.label)
            .field("shift_poly", &self.shift_poly)
            .finish()
    }
}

/// Number of initial conditions a Caputo problem of order `α` takes.
fn ic_count(order: FracOrder) -> usize {
    order.caputo_cutoff()
}

impl FodeProblem {
    /// Problem with zero initial data and the default node strategy.
    pub fn new<F>(alpha: f64, rhs: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        if !(alpha > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "FODE order must be positive, got {alpha}"
            )));
        }
        let order = FracOrder::new(alpha)?;
        Ok(FodeProblem {
            order,
            rhs: Arc::new(rhs),
            rhs_dx: None,
            init_values: vec![0.0; ic_count(order)],
            node_strategy: NodeStrategy::default(),
            label: String::new(),
            shift_poly: Vec::new(),
        })
    }

    pub fn with_rhs_dx<F>(mut self, rhs_dx: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        self.rhs_dx = Some(Arc::new(rhs_dx));
        self
    }

    /// Sets `x^(k)(0)`; exactly `ceil(α)` values are expected.
    pub fn with_init_values(mut self, values: Vec<f64>) -> Result<Self> {
        let want = ic_count(self.order);
        if values.len() != want {
            return Err(Error::InvalidParameter(format!(
                "order {} takes {want} initial values, got {}",
                self.order.alpha(),
                values.len()
            )));
        }
        self.init_values = values;
        Ok(self)
    }

    pub fn with_nodes(mut self, strategy: NodeStrategy) -> Self {
        self.node_strategy = strategy;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn order(&self) -> FracOrder {
        self.order
    }

    pub fn init_values(&self) -> &[f64] {
        &self.init_values
    }

    pub fn node_strategy(&self) -> NodeStrategy {
        self.node_strategy
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn shift_poly(&self) -> &[f64] {
        &self.shift_poly
    }

    pub fn rhs(&self, t: f64, x: f64) -> f64 {
        (self.rhs)(t, x)
    }

    /// `∂f/∂x`, analytic if supplied, otherwise a central difference.
    pub fn rhs_dx(&self, t: f64, x: f64) -> f64 {
        match &self.rhs_dx {
            Some(d) => d(t, x),
            None => {
                let h = TOLERANCES.fd_step;
                ((self.rhs)(t, x + h) - (self.rhs)(t, x - h)) / (2.0 * h)
            }
        }
    }

    fn has_nonzero_init(&self) -> bool {
        self.init_values.iter().any(|&v| v != 0.0)
    }
}

/// `Σ_k x_k t^k / k!` as power coefficients.
fn taylor_coeffs(values: &[f64]) -> Vec<f64> {
    let mut fact = 1.0;
    values
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            if k > 0 {
                fact *= k as f64;
            }
            v / fact
        })
        .collect()
}

fn horner(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

fn add_poly(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len().max(b.len())];
    for (i, v) in a.iter().enumerate() {
        out[i] += v;
    }
    for (i, v) in b.iter().enumerate() {
        out[i] += v;
    }
    out
}

/// Rewrites the problem for `z = x - Σ x_k t^k / k!`, which has zero initial
/// data. The removed polynomial has degree below `ceil(α)`, so its Caputo
/// derivative vanishes and only the right-hand side changes.
pub fn shift_initial_conditions(problem: &FodeProblem) -> FodeProblem {
    if !problem.has_nonzero_init() {
        return problem.clone();
    }
    let shift = taylor_coeffs(&problem.init_values);
    let s1 = shift.clone();
    let f = problem.rhs.clone();
    let rhs: Rhs = Arc::new(move |t, z| f(t, z + horner(&s1, t)));
    let rhs_dx = problem.rhs_dx.clone().map(|d| {
        let s2 = shift.clone();
        Arc::new(move |t: f64, z: f64| d(t, z + horner(&s2, t))) as Rhs
    });
    FodeProblem {
        order: problem.order,
        rhs,
        rhs_dx,
        init_values: vec![0.0; problem.init_values.len()],
        node_strategy: problem.node_strategy,
        label: problem.label.clone(),
        shift_poly: add_poly(&problem.shift_poly, &shift),
    }
}

/// Collocation points for degree `n` and `m` initial conditions.
pub fn collocation_nodes(n: usize, m: usize, strategy: NodeStrategy) -> Result<Vec<f64>> {
    if n <= m {
        return Err(Error::InvalidParameter(format!(
            "ansatz degree {n} must exceed the initial-condition count {m}"
        )));
    }
    let h = 1.0 / n as f64;
    let range = match strategy {
        NodeStrategy::PaperNodes => 0..=n - m,
        NodeStrategy::ShiftedNodes => 1..=n - m + 1,
    };
    Ok(range.map(|j| j as f64 * h).collect())
}

/// Convergence record of the Newton iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonReport {
    pub iterations: usize,
    /// Max-norm residual over the nodes after the last step.
    pub residual: f64,
    /// Residual after every iteration, starting with the initial guess.
    pub history: Vec<f64>,
    /// Whether the seeded restart was needed.
    pub reseeded: bool,
}

/// Collocation solution `Σ c_i t^i (1-t)^(n-i)` plus the initial-value
/// polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzSolution {
    pub n: usize,
    pub m: usize,
    pub order: FracOrder,
    /// `c_m..=c_n`.
    pub coeffs: Vec<f64>,
    /// Power coefficients of the re-added initial-value polynomial.
    pub shift_poly: Vec<f64>,
    pub nodes: Vec<f64>,
    pub newton_report: NewtonReport,
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

impl AnsatzSolution {
    /// Builds a solution from the ansatz coefficients `c_m..=c_n`.
    pub fn from_coeffs(order: FracOrder, n: usize, coeffs: Vec<f64>) -> Result<Self> {
        let m = ic_count(order);
        if n < m || coeffs.len() != n - m + 1 {
            return Err(Error::InvalidParameter(format!(
                "degree {n} with {m} initial conditions needs {} coefficients, got {}",
                (n + 1).saturating_sub(m),
                coeffs.len()
            )));
        }
        Ok(AnsatzSolution {
            n,
            m,
            order,
            coeffs,
            shift_poly: Vec::new(),
            nodes: Vec::new(),
            newton_report: NewtonReport {
                iterations: 0,
                residual: 0.0,
                history: Vec::new(),
                reseeded: false,
            },
        })
    }

    /// Bernstein coefficients of the ansatz part (zero below `m`).
    pub fn bernstein_coeffs(&self) -> Vec<f64> {
        let mut b = vec![0.0; self.n + 1];
        for (k, c) in self.coeffs.iter().enumerate() {
            let i = self.m + k;
            b[i] = c / binomial(self.n, i);
        }
        b
    }

    /// The ansatz part as a Bernstein polynomial, precision chosen by degree.
    pub fn ansatz_poly(&self) -> BernsteinPoly {
        BernsteinPoly::new(self.bernstein_coeffs())
            .expect("degree >= m >= 1")
            .with_precision(PrecisionMode::auto(self.n))
    }
}

/// Caputo derivative of the ansatz part, via the closed-form power rule.
/// Degrees above the cancellation threshold run in extended precision.
pub fn ansatz_caputo(sol: &AnsatzSolution, t: f64) -> Result<f64> {
    let p = sol.ansatz_poly();
    let spec = OperatorSpec::new(
        Side::Left,
        OperatorKind::CaputoDerivative,
        sol.order,
        Backend::ClosedForm,
    );
    FracOperator::new(spec, &p)?.eval(t)
}

/// `x_n(t)`: de Casteljau on the ansatz plus the initial-value polynomial.
pub fn eval_solution(sol: &AnsatzSolution, t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain {
            value: t,
            domain: "[0, 1]",
        });
    }
    Ok(de_casteljau(&sol.bernstein_coeffs(), t) + horner(&sol.shift_poly, t))
}

/// Collocation matrices: `a[j][i] = ᶜD^α B_i(t_j)`, `b[j][i] = B_i(t_j)` for
/// the Bernstein basis functions `B_i`, `i = m..=n`.
struct System {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
}

fn assemble(order: FracOrder, n: usize, m: usize, nodes: &[f64]) -> Result<System> {
    let cols = n - m + 1;
    let mut a = DMatrix::zeros(nodes.len(), cols);
    let mut b = DMatrix::zeros(nodes.len(), cols);
    let quad = Backend::Quadrature(default_nodes(n, OperatorKind::CaputoDerivative, order));
    let spec = OperatorSpec::new(Side::Left, OperatorKind::CaputoDerivative, order, quad);
    for col in 0..cols {
        let mut unit = vec![0.0; n + 1];
        unit[m + col] = 1.0;
        let p = BernsteinPoly::new(unit)?;
        let op = FracOperator::new(spec, &p)?;
        for (j, &t) in nodes.iter().enumerate() {
            a[(j, col)] = op.eval(t)?;
            b[(j, col)] = p.eval(t)?;
        }
    }
    Ok(System { a, b })
}

fn residual_vec(
    problem: &FodeProblem,
    sys: &System,
    nodes: &[f64],
    coef: &DVector<f64>,
) -> DVector<f64> {
    let d = &sys.a * coef;
    let x = &sys.b * coef;
    DVector::from_iterator(
        nodes.len(),
        nodes
            .iter()
            .enumerate()
            .map(|(j, &t)| d[j] - problem.rhs(t, x[j])),
    )
}

enum NewtonOutcome {
    Converged(DVector<f64>, usize),
    Stagnated,
}

fn newton(
    problem: &FodeProblem,
    sys: &System,
    nodes: &[f64],
    mut coef: DVector<f64>,
    tol: f64,
    max_iter: usize,
    history: &mut Vec<f64>,
) -> Result<NewtonOutcome> {
    let mut r = residual_vec(problem, sys, nodes, &coef);
    let mut norm = r.amax();
    history.push(norm);
    for iter in 0..max_iter {
        if norm <= tol {
            return Ok(NewtonOutcome::Converged(coef, iter));
        }
        let x = &sys.b * &coef;
        let mut jac = sys.a.clone();
        for (j, &t) in nodes.iter().enumerate() {
            let fx = problem.rhs_dx(t, x[j]);
            for col in 0..jac.ncols() {
                jac[(j, col)] -= fx * sys.b[(j, col)];
            }
        }
        let step = jac.lu().solve(&(-&r)).ok_or(Error::SingularSystem)?;
        if step.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularSystem);
        }
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let trial = &coef + &step * lambda;
            let r_trial = residual_vec(problem, sys, nodes, &trial);
            let n_trial = r_trial.amax();
            if n_trial.is_finite() && n_trial < norm {
                coef = trial;
                r = r_trial;
                norm = n_trial;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        history.push(norm);
        if !accepted {
            break;
        }
    }
    if norm <= tol {
        return Ok(NewtonOutcome::Converged(coef, history.len() - 1));
    }
    Ok(NewtonOutcome::Stagnated)
}

/// Solves the collocation system at degree `n` by damped Newton iteration.
///
/// Starts from `c = 0`; on stagnation a single restart from Bernstein
/// coefficients `f(i/n, 0)` is attempted.
pub fn solve(
    problem: &FodeProblem,
    n: usize,
    newton_tol: f64,
    max_iter: usize,
) -> Result<AnsatzSolution> {
    if !(newton_tol > 0.0) {
        return Err(Error::InvalidParameter(
            "newton_tol must be positive".into(),
        ));
    }
    let shifted = shift_initial_conditions(problem);
    let order = shifted.order;
    let m = ic_count(order);
    let nodes = collocation_nodes(n, m, shifted.node_strategy)?;
    let sys = assemble(order, n, m, &nodes)?;
    let cols = n - m + 1;

    let mut history = Vec::new();
    let mut reseeded = false;
    let mut outcome = newton(
        &shifted,
        &sys,
        &nodes,
        DVector::zeros(cols),
        newton_tol,
        max_iter,
        &mut history,
    )?;
    if matches!(outcome, NewtonOutcome::Stagnated) {
        reseeded = true;
        let h = 1.0 / n as f64;
        let seed = DVector::from_iterator(cols, (m..=n).map(|i| shifted.rhs(i as f64 * h, 0.0)));
        outcome = newton(
            &shifted,
            &sys,
            &nodes,
            seed,
            newton_tol,
            max_iter,
            &mut history,
        )?;
    }
    let (coef, iterations) = match outcome {
        NewtonOutcome::Converged(c, it) => (c, it),
        NewtonOutcome::Stagnated => {
            return Err(Error::NewtonStagnation {
                iterations: history.len() - 1,
                residuals: history,
            })
        }
    };
    let coeffs = coef
        .iter()
        .enumerate()
        .map(|(k, b)| b * binomial(n, m + k))
        .collect();
    Ok(AnsatzSolution {
        n,
        m,
        order,
        coeffs,
        shift_poly: shifted.shift_poly.clone(),
        nodes,
        newton_report: NewtonReport {
            iterations,
            residual: *history.last().unwrap_or(&f64::NAN),
            history,
            reseeded,
        },
    })
}

/// Collocation residuals `ᶜD^α x_n(t_j) - f(t_j, x_n(t_j))` recomputed from
/// the solution alone, with a fresh quadrature of the full ansatz.
pub fn residuals(problem: &FodeProblem, sol: &AnsatzSolution) -> Result<Vec<f64>> {
    let p = BernsteinPoly::new(sol.bernstein_coeffs())?;
    let quad = Backend::Quadrature(default_nodes(
        sol.n,
        OperatorKind::CaputoDerivative,
        sol.order,
    ));
    let spec = OperatorSpec::new(Side::Left, OperatorKind::CaputoDerivative, sol.order, quad);
    let op = FracOperator::new(spec, &p)?;
    sol.nodes
        .iter()
        .map(|&t| Ok(op.eval(t)? - problem.rhs(t, eval_solution(sol, t)?)))
        .collect()
}

/// Sensitivity of the collocation solution to a change of right-hand side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    /// `max_grid |x_n - x'_n|`.
    pub solution_gap: f64,
    /// `max_grid |f - f'|` along the unperturbed solution.
    pub rhs_gap: f64,
}

impl StabilityReport {
    /// `solution_gap / rhs_gap`; zero when both vanish.
    pub fn ratio(&self) -> f64 {
        if self.rhs_gap == 0.0 {
            if self.solution_gap == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.solution_gap / self.rhs_gap
        }
    }
}

/// Solves both problems at degree `n` and compares them on `norm_grid`.
pub fn stability_probe(
    problem: &FodeProblem,
    perturbed: &FodeProblem,
    n: usize,
    norm_grid: &[f64],
) -> Result<StabilityReport> {
    let a = solve(problem, n, DEFAULT_NEWTON_TOL, DEFAULT_MAX_ITER)?;
    let b = solve(perturbed, n, DEFAULT_NEWTON_TOL, DEFAULT_MAX_ITER)?;
    let mut solution_gap = 0.0f64;
    let mut rhs_gap = 0.0f64;
    for &t in norm_grid {
        let xa = eval_solution(&a, t)?;
        let xb = eval_solution(&b, t)?;
        solution_gap = solution_gap.max((xa - xb).abs());
        rhs_gap = rhs_gap.max((problem.rhs(t, xa) - perturbed.rhs(t, xa)).abs());
    }
    Ok(StabilityReport {
        solution_gap,
        rhs_gap,
    })
}
