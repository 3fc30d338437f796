//! Built-in fractional ODE problems.

use std::sync::Arc;

use bernfrac_core::fode::FodeProblem;
use bernfrac_core::oracles::{
    poly_fode_exact, poly_fode_forcing, relaxation_exact, OscillationOracle, OSCILLATION_NODES,
};
use bernfrac_core::Result;
use clap::ValueEnum;

pub type Exact = Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProblemId {
    /// Example 5.1: D^α x = (1 - 10x)/100, exact Mittag-Leffler solution
    Relaxation,
    /// Example 5.2: D^α x = f(t) - x², exact t⁵ - 3t⁴ + 2t³
    Polyfode,
    /// Example 5.3: D^α x = t e^{-t} - x, exact by convolution
    Oscillation,
    /// Example 5.4: D^α x = 0.8t³ - (t - 0.5) sin x, x(0) = x0, no exact solution
    Kiaproblem,
}

impl ProblemId {
    pub fn name(self) -> &'static str {
        match self {
            ProblemId::Relaxation => "relaxation",
            ProblemId::Polyfode => "polyfode",
            ProblemId::Oscillation => "oscillation",
            ProblemId::Kiaproblem => "kiaproblem",
        }
    }

    pub fn example(self) -> &'static str {
        match self {
            ProblemId::Relaxation => "5.1",
            ProblemId::Polyfode => "5.2",
            ProblemId::Oscillation => "5.3",
            ProblemId::Kiaproblem => "5.4",
        }
    }

    pub fn default_alpha(self) -> f64 {
        match self {
            ProblemId::Relaxation => 0.5,
            ProblemId::Polyfode | ProblemId::Oscillation => 1.5,
            ProblemId::Kiaproblem => 0.28,
        }
    }

    /// Whether `--x0` may override the initial values.
    pub fn takes_init_values(self) -> bool {
        self == ProblemId::Kiaproblem
    }

    pub fn problem(self, alpha: f64) -> Result<FodeProblem> {
        let p = match self {
            ProblemId::Relaxation => {
                FodeProblem::new(alpha, |_, x| (1.0 - 10.0 * x) / 100.0)?.with_rhs_dx(|_, _| -0.1)
            }
            ProblemId::Polyfode => {
                poly_fode_forcing(1.0, alpha, 0.5)?;
                FodeProblem::new(alpha, move |t, x| {
                    poly_fode_forcing(1.0, alpha, t).unwrap_or(f64::NAN) - x * x
                })?
                .with_rhs_dx(|_, x| -2.0 * x)
            }
            ProblemId::Oscillation => {
                FodeProblem::new(alpha, |t, x| t * (-t).exp() - x)?.with_rhs_dx(|_, _| -1.0)
            }
            ProblemId::Kiaproblem => {
                FodeProblem::new(alpha, |t, x| 0.8 * t.powi(3) - (t - 0.5) * x.sin())?
                    .with_rhs_dx(|t, x| -(t - 0.5) * x.cos())
                    .with_init_values(vec![1.2])?
            }
        };
        Ok(p.with_label(self.name()))
    }

    pub fn exact(self, alpha: f64) -> Result<Option<Exact>> {
        Ok(match self {
            ProblemId::Relaxation => {
                Some(Arc::new(move |t| relaxation_exact(10.0, 100.0, alpha, t)))
            }
            ProblemId::Polyfode => Some(Arc::new(|t| Ok(poly_fode_exact(t)))),
            ProblemId::Oscillation => {
                let oracle = OscillationOracle::new(alpha, OSCILLATION_NODES)?;
                Some(Arc::new(move |t| oracle.eval(t)))
            }
            ProblemId::Kiaproblem => None,
        })
    }
}

/// Registry listing for `--help`.
pub fn listing() -> String {
    let mut s = String::from("Registered problems:\n");
    for id in ProblemId::value_variants() {
        s.push_str(&format!(
            "  {:<12} Example {}  (default alpha {})\n",
            id.name(),
            id.example(),
            id.default_alpha()
        ));
    }
    s
}
