//! Bernstein polynomials on [0, 1].

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::precision::{Context, DoubleContext, Ext, ExtContext, PrecisionMode, Scalar, N_CANCEL};

/// `Σ b_i C(n, i) x^i (1 - x)^(n - i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BernsteinPoly {
    coeffs: Vec<f64>,
    precision: PrecisionMode,
}

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

/// Single de Casteljau pass; `x` is assumed to lie in [0, 1].
pub(crate) fn de_casteljau(coeffs: &[f64], x: f64) -> f64 {
    let mut work = coeffs.to_vec();
    let y = 1.0 - x;
    for level in (1..work.len()).rev() {
        for i in 0..level {
            work[i] = y * work[i] + x * work[i + 1];
        }
    }
    work.first().copied().unwrap_or(0.0)
}

/// Forward-difference table rows `Δ^k b_start` for k = 0..=kmax, built
/// pairwise in the working precision.
fn forward_differences<C: Context>(ctx: &C, b: &[f64], kmax: usize) -> Vec<Vec<C::Float>> {
    let mut rows = Vec::with_capacity(kmax + 1);
    let mut row: Vec<C::Float> = b.iter().map(|&v| ctx.float(v)).collect();
    for _ in 0..=kmax {
        let next: Vec<C::Float> = row.windows(2).map(|w| w[1].sub(&w[0])).collect();
        rows.push(row);
        row = next;
    }
    rows
}

/// `n! / (n - q)!` in the working precision.
fn falling_factorial<C: Context>(ctx: &C, n: usize, q: usize) -> C::Float {
    (0..q).fold(ctx.int(1), |acc, j| acc.mul(&ctx.int((n - j) as u64)))
}

impl BernsteinPoly {
    /// Builds a polynomial from Bernstein coefficients; the precision mode is
    /// chosen automatically from the degree.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter("empty coefficient vector".into()));
        }
        let degree = coeffs.len() - 1;
        if let Some((i, &v)) = coeffs.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFiniteSample {
                index: i,
                degree,
                value: v,
            });
        }
        Ok(BernsteinPoly {
            coeffs,
            precision: PrecisionMode::auto(degree),
        })
    }

    /// `B_n(f; x)`: coefficients are the samples `f(i / n)`.
    pub fn sample_function<F: Fn(f64) -> f64>(f: F, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("degree must be at least 1".into()));
        }
        let coeffs = (0..=n).map(|i| f(i as f64 / n as f64)).collect();
        Self::new(coeffs)
    }

    pub fn with_precision(mut self, precision: PrecisionMode) -> Self {
        self.precision = precision;
        self
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn precision(&self) -> PrecisionMode {
        self.precision
    }

    /// de Casteljau evaluation.
    pub fn eval(&self, x: f64) -> Result<f64> {
        check_unit(x)?;
        Ok(de_casteljau(&self.coeffs, x))
    }

    /// `q`-th derivative as a degree `n - q` Bernstein polynomial.
    pub fn derivative(&self, q: usize) -> Result<BernsteinPoly> {
        let n = self.degree();
        if q > n {
            return Err(Error::Degree {
                order: q,
                degree: n,
            });
        }
        if q == 0 {
            return Ok(self.clone());
        }
        let coeffs = match self.precision {
            PrecisionMode::Double => derivative_coeffs(&DoubleContext, &self.coeffs, q),
            PrecisionMode::Extended(digits) => {
                derivative_coeffs(&ExtContext::for_degree(digits, n), &self.coeffs, q)
            }
        };
        Ok(BernsteinPoly {
            coeffs,
            precision: self.precision,
        })
    }

    /// `B^{(k)}(0)` for k = 0..=kmax.
    pub fn derivatives_at_zero(&self, kmax: usize) -> Result<Vec<f64>> {
        self.endpoint_derivatives(kmax, false)
    }

    /// `B^{(k)}(1)` for k = 0..=kmax.
    pub fn derivatives_at_one(&self, kmax: usize) -> Result<Vec<f64>> {
        self.endpoint_derivatives(kmax, true)
    }

    fn endpoint_derivatives(&self, kmax: usize, right: bool) -> Result<Vec<f64>> {
        let n = self.degree();
        if kmax > n {
            return Err(Error::Degree {
                order: kmax,
                degree: n,
            });
        }
        fn go<C: Context>(ctx: &C, b: &[f64], kmax: usize, right: bool) -> Vec<f64> {
            let n = b.len() - 1;
            forward_differences(ctx, b, kmax)
                .iter()
                .enumerate()
                .map(|(k, row)| {
                    let d = if right { &row[n - k] } else { &row[0] };
                    falling_factorial(ctx, n, k).mul(d).to_f64()
                })
                .collect()
        }
        Ok(match self.precision {
            PrecisionMode::Double => go(&DoubleContext, &self.coeffs, kmax, right),
            PrecisionMode::Extended(digits) => go(
                &ExtContext::for_degree(digits, n),
                &self.coeffs,
                kmax,
                right,
            ),
        })
    }

    /// Monomial expansion in powers of `x` or of `1 - x`.
    pub fn expand(&self, basis: Basis) -> Result<MonomialExpansion> {
        let n = self.degree();
        let coeffs = match self.precision {
            PrecisionMode::Double => {
                if n > N_CANCEL {
                    return Err(Error::CancellationOverflow { degree: n });
                }
                ExpansionCoeffs::Double(expansion_coeffs(&DoubleContext, &self.coeffs, basis))
            }
            PrecisionMode::Extended(digits) => {
                let ctx = ExtContext::for_degree(digits, n);
                ExpansionCoeffs::Extended(ctx, expansion_coeffs(&ctx, &self.coeffs, basis))
            }
        };
        Ok(MonomialExpansion {
            basis,
            precision: self.precision,
            coeffs,
        })
    }

    /// Reflected polynomial `x -> p(1 - x)`.
    pub fn reflect(&self) -> BernsteinPoly {
        let mut coeffs = self.coeffs.clone();
        coeffs.reverse();
        BernsteinPoly {
            coeffs,
            precision: self.precision,
        }
    }
}

fn derivative_coeffs<C: Context>(ctx: &C, b: &[f64], q: usize) -> Vec<f64> {
    let n = b.len() - 1;
    let scale = falling_factorial(ctx, n, q);
    let rows = forward_differences(ctx, b, q);
    rows[q].iter().map(|d| scale.mul(d).to_f64()).collect()
}

/// Power-basis coefficients `C(n, k) Δ^k b_0`; for the `(1 - x)` basis the
/// same recurrence runs on the reversed coefficients.
fn expansion_coeffs<C: Context>(ctx: &C, b: &[f64], basis: Basis) -> Vec<C::Float> {
    let n = b.len() - 1;
    let mut row: Vec<C::Float> = match basis {
        Basis::PowersOfX => b.iter().map(|&v| ctx.float(v)).collect(),
        Basis::PowersOfOneMinusX => b.iter().rev().map(|&v| ctx.float(v)).collect(),
    };
    let mut out = Vec::with_capacity(n + 1);
    let mut binom = ctx.int(1);
    for k in 0..=n {
        out.push(binom.mul(&row[0]));
        if k < n {
            row = row.windows(2).map(|w| w[1].sub(&w[0])).collect();
            binom = binom
                .mul(&ctx.int((n - k) as u64))
                .div(&ctx.int((k + 1) as u64));
        }
    }
    out
}

/// Monomial basis of an expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    PowersOfX,
    PowersOfOneMinusX,
}

/// Coefficient storage of a [`MonomialExpansion`], in its working precision.
#[derive(Debug, Clone)]
pub enum ExpansionCoeffs {
    Double(Vec<f64>),
    Extended(ExtContext, Vec<Ext>),
}

/// Callback over the coefficient vector, generic in the working precision.
pub trait ExpansionVisitor {
    type Output;
    fn visit<C: Context>(self, ctx: &C, coeffs: &[C::Float]) -> Self::Output;
}

/// `Σ_k a_k y^k` with `y = x` or `y = 1 - x`.
#[derive(Debug, Clone)]
pub struct MonomialExpansion {
    basis: Basis,
    precision: PrecisionMode,
    coeffs: ExpansionCoeffs,
}

impl MonomialExpansion {
    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn precision(&self) -> PrecisionMode {
        self.precision
    }

    pub fn degree(&self) -> usize {
        self.len() - 1
    }

    fn len(&self) -> usize {
        match &self.coeffs {
            ExpansionCoeffs::Double(v) => v.len(),
            ExpansionCoeffs::Extended(_, v) => v.len(),
        }
    }

    pub fn raw(&self) -> &ExpansionCoeffs {
        &self.coeffs
    }

    pub fn visit<V: ExpansionVisitor>(&self, visitor: V) -> V::Output {
        match &self.coeffs {
            ExpansionCoeffs::Double(v) => visitor.visit(&DoubleContext, v),
            ExpansionCoeffs::Extended(ctx, v) => visitor.visit(ctx, v),
        }
    }

    /// Coefficient of the `k`-th power, rounded to double.
    pub fn coeff(&self, k: usize) -> f64 {
        match &self.coeffs {
            ExpansionCoeffs::Double(v) => v.get(k).copied().unwrap_or(0.0),
            ExpansionCoeffs::Extended(_, v) => v.get(k).map(Scalar::to_f64).unwrap_or(0.0),
        }
    }

    /// Exponent -> coefficient for the exactly nonzero coefficients.
    pub fn terms(&self) -> BTreeMap<usize, f64> {
        struct Collect;
        impl ExpansionVisitor for Collect {
            type Output = BTreeMap<usize, f64>;
            fn visit<C: Context>(self, _: &C, coeffs: &[C::Float]) -> Self::Output {
                coeffs
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(k, c)| (k, c.to_f64()))
                    .collect()
            }
        }
        self.visit(Collect)
    }

    /// Horner evaluation in the working precision.
    pub fn eval(&self, x: f64) -> Result<f64> {
        check_unit(x)?;
        struct Horner {
            x: f64,
            basis: Basis,
        }
        impl ExpansionVisitor for Horner {
            type Output = f64;
            fn visit<C: Context>(self, ctx: &C, coeffs: &[C::Float]) -> f64 {
                let y = match self.basis {
                    Basis::PowersOfX => ctx.float(self.x),
                    Basis::PowersOfOneMinusX => ctx.int(1).sub(&ctx.float(self.x)),
                };
                coeffs
                    .iter()
                    .rev()
                    .fold(ctx.zero(), |acc, c| acc.mul(&y).add(c))
                    .to_f64()
            }
        }
        Ok(self.visit(Horner {
            x,
            basis: self.basis,
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid21() -> impl Iterator<Item = f64> {
        (0..=20).map(|i| i as f64 / 20.0)
    }

    #[test]
    fn partition_of_unity() {
        for n in 1..=50 {
            let p = BernsteinPoly::sample_function(|_| 1.0, n).unwrap();
            for x in grid21() {
                assert!((p.eval(x).unwrap() - 1.0).abs() <= 1e-14, "n={n} x={x}");
            }
        }
        let p = BernsteinPoly::sample_function(|_| 1.0, 7).unwrap();
        assert!(p.coeffs().iter().all(|&b| b == 1.0));
    }

    #[test]
    fn linear_reproduction() {
        for n in 1..=50 {
            let p = BernsteinPoly::sample_function(|x| x, n).unwrap();
            for x in grid21() {
                assert!((p.eval(x).unwrap() - x).abs() <= 1e-14, "n={n} x={x}");
            }
        }
        let p = BernsteinPoly::sample_function(|x| x, 4).unwrap();
        assert_eq!(p.coeffs(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn coefficients_are_samples() {
        let p = BernsteinPoly::sample_function(f64::exp, 10).unwrap();
        for (i, &b) in p.coeffs().iter().enumerate() {
            assert_eq!(b, (i as f64 / 10.0).exp());
        }
    }

    #[test]
    fn rejects_non_finite_samples() {
        let err = BernsteinPoly::sample_function(|x| 1.0 / x, 4).unwrap_err();
        assert!(matches!(
            err,
            Error::NonFiniteSample {
                index: 0,
                degree: 4,
                ..
            }
        ));
        assert!(err.to_string().contains("non-finite sample at i/n"));
    }

    #[test]
    fn eval_domain() {
        let p = BernsteinPoly::new(vec![0.0, 0.0, 1.0]).unwrap();
        assert_eq!(p.eval(0.5).unwrap(), 0.25);
        assert!(matches!(p.eval(1.5), Err(Error::Domain { .. })));
        assert!(p.eval(-1e-9).is_err());
    }

    #[test]
    fn eval_matches_direct_sum() {
        // 50-digit direct summation of Σ C(n,i) f(i/n) x^i (1-x)^(n-i) (mpmath)
        let p = BernsteinPoly::sample_function(f64::exp, 10).unwrap();
        assert_relative_eq!(
            p.eval(0.5).unwrap(),
            1.669_450_942_020_348_8,
            max_relative = 1e-15
        );
        let p = BernsteinPoly::sample_function(f64::sin, 20).unwrap();
        assert_relative_eq!(
            p.eval(0.3).unwrap(),
            0.293_939_439_312_685_6,
            max_relative = 1e-14
        );
    }

    #[test]
    fn derivative_cases() {
        let p = BernsteinPoly::sample_function(|x| x, 5).unwrap();
        let d = p.derivative(1).unwrap();
        assert_eq!(d.degree(), 4);
        for x in grid21() {
            assert!((d.eval(x).unwrap() - 1.0).abs() < 1e-14);
        }
        assert_eq!(p.derivative(0).unwrap(), p);
        assert!(matches!(
            p.derivative(6),
            Err(Error::Degree {
                order: 6,
                degree: 5
            })
        ));
    }

    #[test]
    fn second_derivative_matches_high_precision() {
        // d²/dx² of the degree-30 Bernstein polynomial of exp at 0.5 (mpmath, 50 digits)
        let p = BernsteinPoly::sample_function(f64::exp, 30).unwrap();
        let v = p.derivative(2).unwrap().eval(0.5).unwrap();
        assert_relative_eq!(v, 1.600_121_796_115_359_7, max_relative = 1e-12);
    }

    #[test]
    fn endpoint_derivatives_match_derivative_poly() {
        let p = BernsteinPoly::sample_function(|x| (2.0 * x).sin(), 12).unwrap();
        let at0 = p.derivatives_at_zero(3).unwrap();
        let at1 = p.derivatives_at_one(3).unwrap();
        for k in 0..=3 {
            let d = p.derivative(k).unwrap();
            assert_relative_eq!(
                at0[k],
                d.eval(0.0).unwrap(),
                max_relative = 1e-12,
                epsilon = 1e-12
            );
            assert_relative_eq!(
                at1[k],
                d.eval(1.0).unwrap(),
                max_relative = 1e-12,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn expansion_small_cases() {
        let p = BernsteinPoly::sample_function(|_| 1.0, 3).unwrap();
        let e = p.expand(Basis::PowersOfX).unwrap();
        assert_eq!(e.terms(), BTreeMap::from([(0, 1.0)]));
        let p = BernsteinPoly::new(vec![0.0, 1.0]).unwrap();
        let e = p.expand(Basis::PowersOfX).unwrap();
        assert_eq!(e.terms(), BTreeMap::from([(1, 1.0)]));
        let e = p.expand(Basis::PowersOfOneMinusX).unwrap();
        assert_eq!(e.terms(), BTreeMap::from([(0, 1.0), (1, -1.0)]));
    }

    #[test]
    fn expansion_refuses_double_above_threshold() {
        let p = BernsteinPoly::sample_function(f64::exp, 26)
            .unwrap()
            .with_precision(PrecisionMode::Double);
        assert!(matches!(
            p.expand(Basis::PowersOfX),
            Err(Error::CancellationOverflow { degree: 26 })
        ));
        let msg = p.expand(Basis::PowersOfX).unwrap_err().to_string();
        assert!(msg.contains("use Extended"));
    }

    #[test]
    fn expansion_exp_degree_40_cubic_coefficient() {
        // exact rational arithmetic on the double samples (fractions.Fraction)
        let p = BernsteinPoly::sample_function(f64::exp, 40)
            .unwrap()
            .with_precision(PrecisionMode::Extended(50));
        let e = p.expand(Basis::PowersOfX).unwrap();
        assert_relative_eq!(e.coeff(3), 0.160_286_498_875_947_8, max_relative = 1e-15);
    }

    #[test]
    fn expansion_consistency_double() {
        for n in [1, 5, 12, 25] {
            let p = BernsteinPoly::sample_function(|x| (3.0 * x).cos() + x * x, n).unwrap();
            for basis in [Basis::PowersOfX, Basis::PowersOfOneMinusX] {
                let e = p.expand(basis).unwrap();
                for x in grid21() {
                    let d = (e.eval(x).unwrap() - p.eval(x).unwrap()).abs();
                    assert!(d <= 1e-10, "n={n} {basis:?} x={x}: {d}");
                }
            }
        }
    }

    #[test]
    fn expansion_consistency_extended() {
        for n in [40, 160, 320] {
            let p = BernsteinPoly::sample_function(f64::exp, n)
                .unwrap()
                .with_precision(PrecisionMode::Extended(50));
            for basis in [Basis::PowersOfX, Basis::PowersOfOneMinusX] {
                let e = p.expand(basis).unwrap();
                let ExpansionCoeffs::Extended(ctx, c) = e.raw() else {
                    panic!("extended expansion expected");
                };
                for x in [0.05, 0.3, 0.5, 0.85, 1.0] {
                    let xe = ctx.float(x);
                    let y = match basis {
                        Basis::PowersOfX => xe.clone(),
                        Basis::PowersOfOneMinusX => ctx.int(1).sub(&xe),
                    };
                    let horner = c.iter().rev().fold(ctx.zero(), |acc, v| acc.mul(&y).add(v));
                    // de Casteljau in the same precision
                    let mut work: Vec<Ext> = p.coeffs().iter().map(|&b| ctx.float(b)).collect();
                    let one_minus = ctx.int(1).sub(&xe);
                    for level in (1..work.len()).rev() {
                        for i in 0..level {
                            work[i] = one_minus.mul(&work[i]).add(&xe.mul(&work[i + 1]));
                        }
                    }
                    let d = horner.sub(&work[0]).to_f64().abs();
                    assert!(d <= 1e-30, "n={n} {basis:?} x={x}: {d:e}");
                }
            }
        }
    }

    #[test]
    fn voronovskaya_asymptotics() {
        let limit = 0.25 * 0.5f64.exp();
        let dist: Vec<f64> = [40usize, 80, 160]
            .iter()
            .map(|&n| {
                let b = BernsteinPoly::sample_function(f64::exp, n)
                    .unwrap()
                    .eval(0.5)
                    .unwrap();
                (2.0 * n as f64 * (b - 0.5f64.exp()) - limit).abs()
            })
            .collect();
        for w in dist.windows(2) {
            let r = w[0] / w[1];
            assert!((1.6..=2.4).contains(&r), "{dist:?}");
        }
    }

    #[test]
    fn uniform_convergence() {
        let err = |n| {
            let p = BernsteinPoly::sample_function(f64::exp, n).unwrap();
            (1..=100)
                .map(|j| {
                    let x = j as f64 / 100.0;
                    (p.eval(x).unwrap() - x.exp()).abs()
                })
                .fold(0.0, f64::max)
        };
        let e: Vec<f64> = [10, 20, 40, 80].iter().map(|&n| err(n)).collect();
        assert!(e.windows(2).all(|w| w[1] < w[0]), "{e:?}");
    }
}
