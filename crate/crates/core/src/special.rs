//! Scalar special functions and Gauss–Jacobi rules.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

// Lanczos coefficients, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Stirling series for `ln Γ(z)`, valid for `z >= 10`.
fn ln_gamma_stirling(z: f64) -> f64 {
    // B_{2k} / (2k (2k-1))
    const C: [f64; 8] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        1.0 / 156.0,
        -3617.0 / 122_400.0,
    ];
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let mut series = 0.0;
    for c in C.iter().rev() {
        series = series * inv2 + c;
    }
    (z - 0.5) * z.ln() - z + HALF_LN_2PI + series * inv
}

fn ln_gamma_lanczos(z: f64) -> f64 {
    let x = z - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    HALF_LN_2PI + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Natural logarithm of Γ(a) for `a > 0`.
pub fn log_gamma(a: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::Domain {
            value: a,
            domain: "(0, inf)",
        });
    }
    if a == 1.0 || a == 2.0 {
        return Ok(0.0);
    }
    if a.fract() == 0.0 && a <= 30.0 {
        let n = a as u64;
        return Ok((2..n).map(|k| (k as f64).ln()).sum());
    }
    if a >= 10.0 {
        return Ok(ln_gamma_stirling(a));
    }
    if a < 0.5 {
        // Γ(a) = Γ(a + 1) / a keeps the Lanczos argument away from 0.
        return Ok(ln_gamma_lanczos(a + 1.0) - a.ln());
    }
    Ok(ln_gamma_lanczos(a))
}

/// Γ(a) for `a > 0`.
pub fn gamma(a: f64) -> Result<f64> {
    log_gamma(a).map(f64::exp)
}

/// 1/Γ(z) for any real `z`; zero at the non-positive integers.
pub fn recip_gamma(z: f64) -> f64 {
    if z > 0.0 {
        return (-log_gamma(z).expect("positive argument")).exp();
    }
    if z.fract() == 0.0 {
        return 0.0;
    }
    // 1/Γ(z) = z (z+1) ... (z+k-1) / Γ(z+k)
    let mut prod = 1.0;
    let mut w = z;
    while w <= 0.0 {
        prod *= w;
        w += 1.0;
    }
    prod * (-log_gamma(w).expect("positive argument")).exp()
}

/// Γ(a) / Γ(a - s), via log-gamma differences when both arguments are
/// positive. Zero whenever `a - s` is a non-positive integer.
pub fn gamma_ratio(a: f64, s: f64) -> f64 {
    let b = a - s;
    if a > 0.0 && b > 0.0 {
        let la = log_gamma(a).expect("positive argument");
        let lb = log_gamma(b).expect("positive argument");
        return (la - lb).exp();
    }
    let ga = if a > 0.0 {
        gamma(a).expect("positive argument")
    } else {
        1.0 / recip_gamma(a)
    };
    ga * recip_gamma(b)
}

/// Parameters of the two-parameter Mittag-Leffler series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MLParams {
    pub alpha: f64,
    pub beta: f64,
    pub series_tol: f64,
    pub max_terms: usize,
}

impl MLParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        MLParams {
            alpha,
            beta,
            series_tol: 1e-16,
            max_terms: 500,
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.alpha > 0.0) || !(self.beta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Mittag-Leffler parameters must be positive (alpha = {}, beta = {})",
                self.alpha, self.beta
            )));
        }
        if !(self.series_tol > 0.0) || self.max_terms < 50 {
            return Err(Error::InvalidParameter(
                "series_tol must be positive and max_terms >= 50".into(),
            ));
        }
        Ok(self)
    }
}

/// Largest |z| accepted by [`mittag_leffler`].
pub const ML_MAX_ARG: f64 = 5.0;

/// E_{α,β}(z) = Σ z^k / Γ(αk + β) by direct power series.
pub fn mittag_leffler(params: &MLParams, z: f64) -> Result<f64> {
    let params = params.validated()?;
    if !(z.abs() <= ML_MAX_ARG) {
        return Err(Error::Domain {
            value: z,
            domain: "[-5, 5]",
        });
    }
    if z == 0.0 {
        return Ok(recip_gamma(params.beta));
    }
    let ln_abs = z.abs().ln();
    let mut sum = crate::precision::CompensatedSum::new();
    for k in 0..params.max_terms {
        let kf = k as f64;
        let mag = (kf * ln_abs - log_gamma(params.alpha * kf + params.beta)?).exp();
        let term = if z < 0.0 && k % 2 == 1 { -mag } else { mag };
        sum.add(term);
        let partial = sum.value();
        // the terms decay monotonically once αk + β passes the Γ minimum
        let past_peak = params.alpha * kf + params.beta > 2.0 && kf > z.abs();
        if past_peak && mag <= params.series_tol * partial.abs().max(1e-300) {
            return Ok(partial);
        }
    }
    Err(Error::Accuracy {
        terms: params.max_terms,
    })
}

/// Gauss–Jacobi rule on [-1, 1] for the weight (1 - t)^a (1 + t)^b.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiRule {
    pub exponent_left: f64,
    pub exponent_right: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl JacobiRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Highest polynomial degree integrated exactly.
    pub fn exactness_degree(&self) -> usize {
        2 * self.nodes.len() - 1
    }

    /// ∫_{-1}^{1} (1 - t)^a (1 + t)^b g(t) dt.
    pub fn integrate<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * g(t))
            .collect::<crate::precision::CompensatedSum>()
            .value()
    }

    /// ∫_a^b (b - s)^ea (s - a)^eb g(s) ds for the rule's exponents (ea, eb).
    pub fn integrate_on<F: Fn(f64) -> f64>(&self, a: f64, b: f64, g: F) -> f64 {
        let half = 0.5 * (b - a);
        let scale = half.powf(self.exponent_left + self.exponent_right + 1.0);
        scale * self.integrate(|t| g(a + half * (t + 1.0)))
    }
}

/// ∫_{-1}^{1} (1 - t)^a (1 + t)^b dt.
pub fn jacobi_moment(a: f64, b: f64) -> f64 {
    let ln = (a + b + 1.0) * std::f64::consts::LN_2
        + log_gamma(a + 1.0).unwrap()
        + log_gamma(b + 1.0).unwrap()
        - log_gamma(a + b + 2.0).unwrap();
    ln.exp()
}

/// Golub–Welsch construction of an `n_nodes`-point Gauss–Jacobi rule.
pub fn gauss_jacobi(n_nodes: usize, exp_left: f64, exp_right: f64) -> Result<JacobiRule> {
    let (a, b) = (exp_left, exp_right);
    if !(a > -1.0) || !(b > -1.0) {
        return Err(Error::Domain {
            value: a.min(b),
            domain: "(-1, inf)",
        });
    }
    if n_nodes == 0 {
        return Err(Error::InvalidParameter("n_nodes must be positive".into()));
    }
    let n = n_nodes;
    let ab = a + b;
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let s = 2.0 * kf + ab;
        jac[(k, k)] = if k == 0 {
            (b - a) / (ab + 2.0)
        } else {
            (b * b - a * a) / (s * (s + 2.0))
        };
    }
    for k in 1..n {
        let kf = k as f64;
        let s = 2.0 * kf + ab;
        let sq = if k == 1 {
            4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab).powi(2) * (3.0 + ab))
        } else {
            4.0 * kf * (kf + a) * (kf + b) * (kf + ab) / (s * s * (s + 1.0) * (s - 1.0))
        };
        let off = sq.sqrt();
        jac[(k, k - 1)] = off;
        jac[(k - 1, k)] = off;
    }
    let eig = SymmetricEigen::try_new(jac, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numeric("Jacobi matrix eigen-solve did not converge".into()))?;
    let mu0 = jacobi_moment(a, b);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let (nodes, weights) = pairs.into_iter().unzip();
    Ok(JacobiRule {
        exponent_left: a,
        exponent_right: b,
        nodes,
        weights,
    })
}
