//! Fractional derivatives and integrals of Bernstein polynomials.
//!
//! Two independent backends are available:
//!
//! - [`Backend::ClosedForm`] expands the polynomial in powers of `x` (left
//!   operators) or `1 - x` (right operators) and applies the power rule
//!   `y^k -> Γ(k+1)/Γ(k+1-s) y^(k-s)` term by term, with `s = α` for
//!   derivatives and `s = -α` for integrals. The alternating expansion is
//!   carried out in the polynomial's [`PrecisionMode`].
//! - [`Backend::Quadrature`] integrates the singular kernel against the
//!   polynomial (or its `m`-th derivative) with a Gauss–Jacobi rule, which is
//!   exact for the polynomial factor once enough nodes are used.
//!
//! Caputo derivatives of integer order reduce to ordinary derivatives.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::poly::{Basis, BernsteinPoly, MonomialExpansion};
use crate::precision::{CompensatedSum, Context, PrecisionMode, Scalar, N_CANCEL};
use crate::special::{gamma_ratio, gauss_jacobi, recip_gamma, JacobiRule};

/// Fractional order `α >= 0` with its bracket `m - 1 <= α < m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracOrder {
    alpha: f64,
    m: usize,
}

impl FracOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "fractional order must be a finite nonnegative number, got {alpha}"
            )));
        }
        Ok(FracOrder {
            alpha,
            m: alpha.floor() as usize + 1,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn is_integer(&self) -> bool {
        self.alpha.fract() == 0.0
    }

    /// Number of leading monomials a Caputo derivative annihilates.
    pub(crate) fn caputo_cutoff(&self) -> usize {
        self.alpha.ceil() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    /// The mirror side under `x -> 1 - x`.
    pub fn flip(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OperatorKind {
    CaputoDerivative,
    RLDerivative,
    RLIntegral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Backend {
    ClosedForm,
    /// Gauss–Jacobi rule with the given number of nodes.
    Quadrature(usize),
}

impl Backend {
    /// ClosedForm unless the polynomial is held in double precision at a
    /// degree where the expansion would cancel catastrophically.
    pub fn auto(p: &BernsteinPoly, kind: OperatorKind, order: FracOrder) -> Backend {
        if p.precision() == PrecisionMode::Double && p.degree() > N_CANCEL {
            Backend::Quadrature(default_nodes(p.degree(), kind, order))
        } else {
            Backend::ClosedForm
        }
    }
}

/// Degree of the polynomial factor the quadrature rule has to integrate.
fn integrand_degree(n: usize, kind: OperatorKind, order: FracOrder) -> usize {
    match kind {
        OperatorKind::RLIntegral => n,
        _ => n.saturating_sub(order.caputo_cutoff()),
    }
}

/// Smallest node count that integrates the polynomial factor exactly.
pub fn required_nodes(n: usize, kind: OperatorKind, order: FracOrder) -> usize {
    (integrand_degree(n, kind, order) + 2) / 2
}

/// Default node count, one more degree of exactness than required.
pub fn default_nodes(n: usize, kind: OperatorKind, order: FracOrder) -> usize {
    (integrand_degree(n, kind, order) + 3) / 2
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorSpec {
    pub side: Side,
    pub kind: OperatorKind,
    pub order: FracOrder,
    pub backend: Backend,
}

impl OperatorSpec {
    pub fn new(side: Side, kind: OperatorKind, order: FracOrder, backend: Backend) -> Self {
        OperatorSpec {
            side,
            kind,
            order,
            backend,
        }
    }

    /// Exponent shift `s` of the power rule.
    fn shift(&self) -> f64 {
        match self.kind {
            OperatorKind::RLIntegral => -self.order.alpha,
            _ => self.order.alpha,
        }
    }
}

/// An operator bound to one polynomial, ready to be evaluated at many points.
#[derive(Debug, Clone)]
pub struct FracOperator {
    spec: OperatorSpec,
    inner: Inner,
}

#[derive(Debug, Clone)]
enum Inner {
    Closed(ClosedForm),
    Quad(QuadForm),
}

impl FracOperator {
    pub fn new(spec: OperatorSpec, p: &BernsteinPoly) -> Result<Self> {
        if spec.kind == OperatorKind::RLIntegral && !(spec.order.alpha > 0.0) {
            return Err(Error::InvalidParameter(
                "fractional integral order must be positive".into(),
            ));
        }
        let inner = match spec.backend {
            Backend::ClosedForm => Inner::Closed(ClosedForm::new(&spec, p)?),
            Backend::Quadrature(nodes) => Inner::Quad(QuadForm::new(&spec, p, nodes)?),
        };
        Ok(FracOperator { spec, inner })
    }

    pub fn spec(&self) -> &OperatorSpec {
        &self.spec
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain {
                value: x,
                domain: "[0, 1]",
            });
        }
        match &self.inner {
            Inner::Closed(c) => c.eval(x),
            Inner::Quad(q) => q.eval(x),
        }
    }

    /// Evaluates at every point; points are processed in parallel, each with
    /// a fixed summation order.
    pub fn eval_many(&self, xs: &[f64]) -> Result<Vec<f64>> {
        xs.par_iter().map(|&x| self.eval(x)).collect()
    }
}

/// Power-rule weights folded into the expansion coefficients:
/// value = `base * y^(-s) * Σ_k d_k y^k`.
#[derive(Debug, Clone)]
struct ClosedForm {
    side: Side,
    shift: f64,
    base: f64,
    weighted: WeightedCoeffs,
}

#[derive(Debug, Clone)]
enum WeightedCoeffs {
    Double(Vec<f64>),
    Extended(crate::precision::ExtContext, Vec<crate::precision::Ext>),
}

struct Weigh {
    shift: f64,
    cutoff: usize,
}

impl Weigh {
    /// Per-term weights and common factor in the working precision.
    ///
    /// Double: `Γ(k+1)/Γ(k+1-s)` from log-gamma differences, factor 1.
    /// Extended: `Π_{j<=k} j/(j-s)` exactly, factor `1/Γ(1-s)` in double.
    fn weights<C: Context>(&self, ctx: &C, len: usize, extended: bool) -> (Vec<C::Float>, f64) {
        let s = self.shift;
        let integer_order = s >= 0.0 && s.fract() == 0.0;
        if !extended {
            let w = (0..len)
                .map(|k| ctx.float(gamma_ratio(k as f64 + 1.0, s)))
                .collect();
            return (w, 1.0);
        }
        if integer_order {
            // k! / (k - s)!
            let s = s as usize;
            let w = (0..len)
                .map(|k| {
                    if k < s {
                        ctx.zero()
                    } else {
                        (0..s).fold(ctx.int(1), |acc, j| acc.mul(&ctx.int((k - j) as u64)))
                    }
                })
                .collect();
            return (w, 1.0);
        }
        let mut w = Vec::with_capacity(len);
        let mut acc = ctx.int(1);
        for k in 0..len {
            if k > 0 {
                let j = ctx.int(k as u64);
                acc = acc.mul(&j).div(&j.sub(&ctx.float(s)));
            }
            w.push(acc.clone());
        }
        (w, recip_gamma(1.0 - s))
    }
}

impl ClosedForm {
    fn new(spec: &OperatorSpec, p: &BernsteinPoly) -> Result<Self> {
        let basis = match spec.side {
            Side::Left => Basis::PowersOfX,
            Side::Right => Basis::PowersOfOneMinusX,
        };
        let expansion = p.expand(basis)?;
        let cutoff = match spec.kind {
            OperatorKind::CaputoDerivative => spec.order.caputo_cutoff(),
            _ => 0,
        };
        let weigh = Weigh {
            shift: spec.shift(),
            cutoff,
        };
        let (weighted, base) = weigh_expansion(&weigh, &expansion);
        Ok(ClosedForm {
            side: spec.side,
            shift: spec.shift(),
            base,
            weighted,
        })
    }

    fn eval(&self, x: f64) -> Result<f64> {
        let s = self.shift;
        let y = match self.side {
            Side::Left => x,
            Side::Right => 1.0 - x,
        };
        if y == 0.0 {
            return self.endpoint_limit();
        }
        let scale = self.base * y.powf(-s);
        let sum = match &self.weighted {
            WeightedCoeffs::Double(d) => {
                let mut acc = CompensatedSum::new();
                let mut pow = 1.0;
                for c in d {
                    acc.add(c * pow);
                    pow *= y;
                }
                acc.value()
            }
            WeightedCoeffs::Extended(ctx, d) => {
                let yy = match self.side {
                    Side::Left => ctx.float(x),
                    Side::Right => ctx.int(1).sub(&ctx.float(x)),
                };
                d.iter()
                    .rev()
                    .fold(ctx.zero(), |acc, c| acc.mul(&yy).add(c))
                    .to_f64()
            }
        };
        Ok(scale * sum)
    }

    /// Value at `y = 0`: the constant term if its exponent is zero, 0 when all
    /// exponents are positive, an error when a nonzero term is singular.
    fn endpoint_limit(&self) -> Result<f64> {
        let s = self.shift;
        let nonzero: Vec<(usize, f64)> = match &self.weighted {
            WeightedCoeffs::Double(d) => d
                .iter()
                .enumerate()
                .filter(|(_, c)| **c != 0.0)
                .map(|(k, c)| (k, *c))
                .collect(),
            WeightedCoeffs::Extended(_, d) => d
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(k, c)| (k, c.to_f64()))
                .collect(),
        };
        let mut value = 0.0;
        for (k, c) in nonzero {
            let exponent = k as f64 - s;
            if exponent < 0.0 {
                return Err(Error::Singularity { exponent });
            }
            if exponent == 0.0 {
                value += self.base * c;
            }
        }
        Ok(value)
    }
}

fn weigh_expansion(weigh: &Weigh, expansion: &MonomialExpansion) -> (WeightedCoeffs, f64) {
    use crate::poly::ExpansionCoeffs;
    fn combine<C: Context>(
        ctx: &C,
        weigh: &Weigh,
        coeffs: &[C::Float],
        extended: bool,
    ) -> (Vec<C::Float>, f64) {
        let (w, base) = weigh.weights(ctx, coeffs.len(), extended);
        let d = coeffs
            .iter()
            .zip(&w)
            .enumerate()
            .map(|(k, (c, w))| {
                if k < weigh.cutoff {
                    ctx.zero()
                } else {
                    c.mul(w)
                }
            })
            .collect();
        (d, base)
    }
    match expansion.raw() {
        ExpansionCoeffs::Double(c) => {
            let (d, base) = combine(&crate::precision::DoubleContext, weigh, c, false);
            (WeightedCoeffs::Double(d), base)
        }
        ExpansionCoeffs::Extended(ctx, c) => {
            let (d, base) = combine(ctx, weigh, c, true);
            (WeightedCoeffs::Extended(*ctx, d), base)
        }
    }
}

/// Gauss–Jacobi evaluation of the singular integral.
#[derive(Debug, Clone)]
struct QuadForm {
    side: Side,
    kind: OperatorKind,
    order: FracOrder,
    /// Polynomial under the kernel: `p` for integrals, `p^(m)` otherwise.
    integrand: Vec<f64>,
    /// `None` for integer-order derivatives, which need no kernel.
    rule: Option<JacobiRule>,
    /// `1/Γ(m - α)` (derivatives) or `1/Γ(α)` (integrals), with the
    /// `(-1)^m` of right derivatives folded in.
    prefactor: f64,
    /// Endpoint derivatives `p^(k)(0)` or `p^(k)(1)` for k < m, for RL terms.
    endpoint: Vec<f64>,
}

impl QuadForm {
    fn new(spec: &OperatorSpec, p: &BernsteinPoly, nodes: usize) -> Result<Self> {
        let n = p.degree();
        let order = spec.order;
        let required = required_nodes(n, spec.kind, order);
        if nodes < required {
            return Err(Error::TooFewNodes {
                nodes,
                degree: integrand_degree(n, spec.kind, order),
                required,
            });
        }
        let alpha = order.alpha();
        let sign_right = |k: usize| {
            if spec.side == Side::Right && k % 2 == 1 {
                -1.0
            } else {
                1.0
            }
        };
        match spec.kind {
            OperatorKind::RLIntegral => {
                let exponent = alpha - 1.0;
                let rule = match spec.side {
                    Side::Left => gauss_jacobi(nodes, exponent, 0.0)?,
                    Side::Right => gauss_jacobi(nodes, 0.0, exponent)?,
                };
                Ok(QuadForm {
                    side: spec.side,
                    kind: spec.kind,
                    order,
                    integrand: p.coeffs().to_vec(),
                    rule: Some(rule),
                    prefactor: recip_gamma(alpha),
                    endpoint: Vec::new(),
                })
            }
            OperatorKind::CaputoDerivative | OperatorKind::RLDerivative => {
                if order.is_integer() {
                    let q = alpha as usize;
                    let integrand = if q > n {
                        vec![0.0]
                    } else {
                        p.derivative(q)?.coeffs().to_vec()
                    };
                    return Ok(QuadForm {
                        side: spec.side,
                        kind: spec.kind,
                        order,
                        integrand,
                        rule: None,
                        prefactor: sign_right(q),
                        endpoint: Vec::new(),
                    });
                }
                let m = order.m();
                let exponent = m as f64 - alpha - 1.0;
                let integrand = if m > n {
                    vec![0.0]
                } else {
                    p.derivative(m)?.coeffs().to_vec()
                };
                let rule = match spec.side {
                    Side::Left => gauss_jacobi(nodes, exponent, 0.0)?,
                    Side::Right => gauss_jacobi(nodes, 0.0, exponent)?,
                };
                let endpoint = if spec.kind == OperatorKind::RLDerivative {
                    let kmax = (m - 1).min(n);
                    let mut d = match spec.side {
                        Side::Left => p.derivatives_at_zero(kmax)?,
                        Side::Right => p.derivatives_at_one(kmax)?,
                    };
                    d.resize(m, 0.0);
                    d
                } else {
                    Vec::new()
                };
                Ok(QuadForm {
                    side: spec.side,
                    kind: spec.kind,
                    order,
                    integrand,
                    rule: Some(rule),
                    prefactor: sign_right(m) * recip_gamma(m as f64 - alpha),
                    endpoint,
                })
            }
        }
    }

    fn eval(&self, x: f64) -> Result<f64> {
        let Some(rule) = &self.rule else {
            return Ok(self.prefactor * crate::poly::de_casteljau(&self.integrand, x));
        };
        let (a, b) = match self.side {
            Side::Left => (0.0, x),
            Side::Right => (x, 1.0),
        };
        let integral = if b > a {
            rule.integrate_on(a, b, |t| crate::poly::de_casteljau(&self.integrand, t))
        } else {
            0.0
        };
        let mut value = self.prefactor * integral;
        if self.kind == OperatorKind::RLDerivative {
            let y = b - a;
            let alpha = self.order.alpha();
            for (k, &d) in self.endpoint.iter().enumerate() {
                let sign = if self.side == Side::Right && k % 2 == 1 {
                    -1.0
                } else {
                    1.0
                };
                let exponent = k as f64 - alpha;
                let coef = sign * d * recip_gamma(k as f64 + 1.0 - alpha);
                if coef == 0.0 {
                    continue;
                }
                if y == 0.0 {
                    if exponent < 0.0 {
                        return Err(Error::Singularity { exponent });
                    }
                    continue;
                }
                value += coef * y.powf(exponent);
            }
        }
        Ok(value)
    }
}

/// Applies an operator at a single point.
pub fn apply(spec: OperatorSpec, p: &BernsteinPoly, x: f64) -> Result<f64> {
    FracOperator::new(spec, p)?.eval(x)
}

fn with_auto(
    side: Side,
    kind: OperatorKind,
    order: FracOrder,
    p: &BernsteinPoly,
    x: f64,
) -> Result<f64> {
    let backend = Backend::auto(p, kind, order);
    apply(OperatorSpec::new(side, kind, order, backend), p, x)
}

/// Left Riemann–Liouville derivative `₀D_x^α p`.
pub fn rl_derivative_left(p: &BernsteinPoly, order: FracOrder, x: f64) -> Result<f64> {
    with_auto(Side::Left, OperatorKind::RLDerivative, order, p, x)
}

/// Right Riemann–Liouville derivative `ₓD_1^α p`.
pub fn rl_derivative_right(p: &BernsteinPoly, order: FracOrder, x: f64) -> Result<f64> {
    with_auto(Side::Right, OperatorKind::RLDerivative, order, p, x)
}

/// Left Caputo derivative `₀ᶜD_x^α p`.
pub fn caputo_left(p: &BernsteinPoly, order: FracOrder, x: f64) -> Result<f64> {
    with_auto(Side::Left, OperatorKind::CaputoDerivative, order, p, x)
}

/// Right Caputo derivative `ₓᶜD_1^α p`.
pub fn caputo_right(p: &BernsteinPoly, order: FracOrder, x: f64) -> Result<f64> {
    with_auto(Side::Right, OperatorKind::CaputoDerivative, order, p, x)
}

fn integral_order(alpha: f64) -> Result<FracOrder> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "fractional integral order must be positive, got {alpha}"
        )));
    }
    FracOrder::new(alpha)
}

/// Left Riemann–Liouville integral `₀I_x^α p`.
pub fn rl_integral_left(p: &BernsteinPoly, alpha: f64, x: f64) -> Result<f64> {
    with_auto(
        Side::Left,
        OperatorKind::RLIntegral,
        integral_order(alpha)?,
        p,
        x,
    )
}

/// Right Riemann–Liouville integral `ₓI_1^α p`.
pub fn rl_integral_right(p: &BernsteinPoly, alpha: f64, x: f64) -> Result<f64> {
    with_auto(
        Side::Right,
        OperatorKind::RLIntegral,
        integral_order(alpha)?,
        p,
        x,
    )
}
