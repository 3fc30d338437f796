//! Analytic reference values: exact fractional derivatives and integrals of
//! `e^x` and `sin x`, and exact solutions of the model fractional ODEs.
//!
//! The power series are summed in extended precision and rounded to `f64`
//! only at the end, so they stay several digits ahead of any approximation
//! they are compared against.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::frac_ops::FracOrder;
use crate::precision::{CompensatedSum, Context, ExtContext, Scalar, DEFAULT_DIGITS};
use crate::special::{gauss_jacobi, log_gamma, recip_gamma, JacobiRule};

/// Default Gauss–Jacobi node count for [`oscillation_exact`].
pub const OSCILLATION_NODES: usize = 40;

const MAX_TERMS: usize = 400;

fn check_unit(x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Domain {
            value: x,
            domain: "[0, 1]",
        })
    }
}

/// `Σ_k σ^k x^(dk) / Γ(a0 + dk)` with `σ = ±1`, summed with `digits` digits.
///
/// Each term is obtained from the previous by dividing by the `d` factors
/// `(a0 + d(k-1) + j)`, so only `1/Γ(a0)` is needed in double precision.
fn gamma_series(x: f64, a0: f64, d: usize, alternating: bool, digits: u32) -> f64 {
    let ctx = ExtContext::for_degree(digits, 0);
    let xd = (0..d).fold(ctx.int(1), |acc, _| acc.mul(&ctx.float(x)));
    let eps = 2f64.powi(-(ctx.bits() as i32));
    let mut term = ctx.int(1);
    let mut sum = ctx.int(1);
    for k in 1..MAX_TERMS {
        term = term.mul(&xd);
        for j in 0..d {
            term = term.div(&ctx.float(a0 + (d * (k - 1) + j) as f64));
        }
        if alternating {
            term = ctx.zero().sub(&term);
        }
        sum = sum.add(&term);
        let t = term.to_f64().abs();
        if t <= eps * sum.to_f64().abs() || t == 0.0 {
            break;
        }
    }
    sum.to_f64() * recip_gamma(a0)
}

fn check_caputo_order(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            value: alpha,
            domain: "(0, 1]",
        })
    }
}

fn check_integral_order(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            value: alpha,
            domain: "(0, inf)",
        })
    }
}

/// Caputo derivative `₀ᶜD_x^α e^x = x^(1-α) Σ x^k / Γ(k+2-α)`.
pub fn exp_caputo(alpha: f64, x: f64) -> Result<f64> {
    exp_caputo_digits(alpha, x, DEFAULT_DIGITS)
}

pub fn exp_caputo_digits(alpha: f64, x: f64, digits: u32) -> Result<f64> {
    check_caputo_order(alpha)?;
    check_unit(x)?;
    if x == 0.0 {
        // α = 1 leaves x^0 in front
        return Ok(if alpha == 1.0 { 1.0 } else { 0.0 });
    }
    Ok(x.powf(1.0 - alpha) * gamma_series(x, 2.0 - alpha, 1, false, digits))
}

/// Riemann–Liouville integral `₀I_x^α e^x = Σ x^(k+α) / Γ(k+1+α)`.
pub fn exp_integral(alpha: f64, x: f64) -> Result<f64> {
    exp_integral_digits(alpha, x, DEFAULT_DIGITS)
}

pub fn exp_integral_digits(alpha: f64, x: f64, digits: u32) -> Result<f64> {
    check_integral_order(alpha)?;
    check_unit(x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    Ok(x.powf(alpha) * gamma_series(x, 1.0 + alpha, 1, false, digits))
}

/// Caputo derivative `₀ᶜD_x^α sin x = x^(1-α) Σ (-1)^k x^(2k) / Γ(2k+2-α)`.
pub fn sin_caputo(alpha: f64, x: f64) -> Result<f64> {
    sin_caputo_digits(alpha, x, DEFAULT_DIGITS)
}

pub fn sin_caputo_digits(alpha: f64, x: f64, digits: u32) -> Result<f64> {
    check_caputo_order(alpha)?;
    check_unit(x)?;
    if x == 0.0 {
        return Ok(if alpha == 1.0 { 1.0 } else { 0.0 });
    }
    Ok(x.powf(1.0 - alpha) * gamma_series(x, 2.0 - alpha, 2, true, digits))
}

/// Riemann–Liouville integral `₀I_x^α sin x = Σ (-1)^k x^(2k+1+α) / Γ(2k+2+α)`.
pub fn sin_integral(alpha: f64, x: f64) -> Result<f64> {
    sin_integral_digits(alpha, x, DEFAULT_DIGITS)
}

pub fn sin_integral_digits(alpha: f64, x: f64, digits: u32) -> Result<f64> {
    check_integral_order(alpha)?;
    check_unit(x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    Ok(x.powf(1.0 + alpha) * gamma_series(x, 2.0 + alpha, 2, true, digits))
}

/// Exact solution of `c ᶜD^α x + k x = 1`, `x(0) = 0`:
/// `(1 - E_{α,1}(-k t^α / c)) / k`.
///
/// The leading 1 of the Mittag-Leffler series is cancelled analytically.
pub fn relaxation_exact(k: f64, c: f64, alpha: f64, t: f64) -> Result<f64> {
    if !(k > 0.0) || !(c > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "relaxation needs k, c > 0 (k = {k}, c = {c})"
        )));
    }
    check_integral_order(alpha)?;
    check_unit(t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let z = -k / c * t.powf(alpha);
    let ln_abs = z.abs().ln();
    let mut sum = CompensatedSum::new();
    for j in 1..MAX_TERMS {
        let jf = j as f64;
        let mag = (jf * ln_abs - log_gamma(alpha * jf + 1.0)?).exp();
        sum.add(if j % 2 == 1 { -mag } else { mag });
        if alpha * jf > 1.0 && jf > z.abs() && mag <= 1e-17 * sum.value().abs() {
            return Ok(-sum.value() / k);
        }
    }
    Err(Error::Accuracy { terms: MAX_TERMS })
}

/// `t^5 - 3t^4 + 2t^3`.
pub fn poly_fode_exact(t: f64) -> f64 {
    t * t * t * (2.0 + t * (t - 3.0))
}

/// Forcing that makes [`poly_fode_exact`] solve `ᶜD^α x + k x² = f`.
pub fn poly_fode_forcing(k: f64, alpha: f64, t: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 3.0) {
        return Err(Error::Domain {
            value: alpha,
            domain: "(0, 3)",
        });
    }
    check_unit(t)?;
    let x = poly_fode_exact(t);
    // ᶜD^α t^p = Γ(p+1)/Γ(p+1-α) t^(p-α) for p = 5, 4, 3
    let term = |coef: f64, p: f64| {
        if t == 0.0 {
            0.0
        } else {
            coef * recip_gamma(p + 1.0 - alpha) * t.powf(p - alpha)
        }
    };
    Ok(term(120.0, 5.0) - term(72.0, 4.0) + term(12.0, 3.0) + k * x * x)
}

/// Exact solution of `ᶜD^α x + x = t e^(-t)` with zero initial data,
/// `∫_0^t G(t-s) s e^(-s) ds`, `G(u) = u^(α-1) E_{α,α}(-u^α)`.
///
/// `G` is expanded into its series and each term
/// `(t-s)^(α(j+1)-1) / Γ(α(j+1))` is integrated against the smooth factor
/// `s e^(-s)` by a Gauss–Jacobi rule carrying that power as its weight. The
/// rules do not depend on `t` and are built once.
#[derive(Debug, Clone)]
pub struct OscillationOracle {
    alpha: f64,
    terms: Vec<(JacobiRule, f64)>,
}

impl OscillationOracle {
    pub fn new(alpha: f64, quad_nodes: usize) -> Result<Self> {
        check_integral_order(alpha)?;
        let mut terms = Vec::new();
        for j in 0..MAX_TERMS {
            let beta = alpha * (j + 1) as f64;
            let scale = recip_gamma(beta);
            terms.push((gauss_jacobi(quad_nodes, beta - 1.0, 0.0)?, scale));
            // term j is at most 1/Γ(β + 1) on [0, 1]
            if recip_gamma(beta + 1.0) < 1e-20 {
                return Ok(OscillationOracle { alpha, terms });
            }
        }
        Err(Error::Accuracy { terms: MAX_TERMS })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        check_unit(t)?;
        if t == 0.0 {
            return Ok(0.0);
        }
        let g = |s: f64| s * (-s).exp();
        let sum: CompensatedSum = self
            .terms
            .iter()
            .enumerate()
            .map(|(j, (rule, scale))| {
                let mag = scale * rule.integrate_on(0.0, t, g);
                if j % 2 == 1 {
                    -mag
                } else {
                    mag
                }
            })
            .collect();
        Ok(sum.value())
    }
}

/// One-off evaluation of [`OscillationOracle`].
pub fn oscillation_exact(alpha: f64, t: f64, quad_nodes: usize) -> Result<f64> {
    check_unit(t)?;
    OscillationOracle::new(alpha, quad_nodes)?.eval(t)
}

/// Which reference function an [`OracleSpec`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OracleId {
    ExpDeriv,
    ExpInt,
    SinDeriv,
    SinInt,
    Relaxation,
    PolyFode,
    Oscillation,
}

impl OracleId {
    /// Parameter names the oracle requires, in sorted order.
    pub fn required_params(self) -> &'static [&'static str] {
        match self {
            OracleId::Relaxation => &["c", "k"],
            _ => &[],
        }
    }
}

impl fmt::Display for OracleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            OracleId::ExpDeriv => "exp-deriv",
            OracleId::ExpInt => "exp-int",
            OracleId::SinDeriv => "sin-deriv",
            OracleId::SinInt => "sin-int",
            OracleId::Relaxation => "relaxation",
            OracleId::PolyFode => "polyfode",
            OracleId::Oscillation => "oscillation",
        };
        f.write_str(s)
    }
}

/// A fully parameterised reference function of one variable.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSpec {
    pub id: OracleId,
    pub alpha: FracOrder,
    pub params: BTreeMap<String, f64>,
    pub tol: f64,
}

impl OracleSpec {
    pub fn new(id: OracleId, alpha: f64, params: BTreeMap<String, f64>) -> Result<Self> {
        let spec = OracleSpec {
            id,
            alpha: FracOrder::new(alpha)?,
            params,
            tol: 1e-15,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(
                "oracle tol must be positive".into(),
            ));
        }
        let have: Vec<&str> = self.params.keys().map(String::as_str).collect();
        let want = self.id.required_params();
        if have != want {
            return Err(Error::InvalidParameter(format!(
                "oracle {} takes parameters {:?}, got {:?}",
                self.id, want, have
            )));
        }
        Ok(())
    }

    fn param(&self, name: &str) -> f64 {
        self.params[name]
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let a = self.alpha.alpha();
        match self.id {
            OracleId::ExpDeriv => exp_caputo(a, x),
            OracleId::ExpInt => exp_integral(a, x),
            OracleId::SinDeriv => sin_caputo(a, x),
            OracleId::SinInt => sin_integral(a, x),
            OracleId::Relaxation => relaxation_exact(self.param("k"), self.param("c"), a, x),
            OracleId::PolyFode => {
                check_unit(x)?;
                Ok(poly_fode_exact(x))
            }
            OracleId::Oscillation => oscillation_exact(a, x, OSCILLATION_NODES),
        }
    }
}
