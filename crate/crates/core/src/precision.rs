//! Working-precision arithmetic for the alternating sums of the monomial
//! expansions.
//!
//! Converting a degree-`n` Bernstein polynomial to either monomial basis
//! produces coefficients as large as `3^n` times the sample values while the
//! polynomial itself stays `O(1)`, so roughly `n * log10(3)` decimal digits
//! cancel. [`PrecisionMode::Extended`] carries the requested number of
//! significant digits *on top of* that cancellation budget.

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;

/// Largest degree for which the monomial expansions are allowed in plain
/// double precision.
pub const N_CANCEL: usize = 25;

/// Default number of significant decimal digits for extended precision.
pub const DEFAULT_DIGITS: u32 = 50;

/// Arithmetic used for expansions and closed-form fractional operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum PrecisionMode {
    #[default]
    Double,
    /// Decimal digits retained after cancellation.
    Extended(u32),
}

impl PrecisionMode {
    /// `Double` up to [`N_CANCEL`], `Extended(50)` above.
    pub fn auto(degree: usize) -> Self {
        if degree > N_CANCEL {
            PrecisionMode::Extended(DEFAULT_DIGITS)
        } else {
            PrecisionMode::Double
        }
    }

    pub fn is_extended(self) -> bool {
        matches!(self, PrecisionMode::Extended(_))
    }
}

/// Artifact-wide numeric tolerances, collected in one place.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Partition of unity and linear reproduction.
    pub reproduction: f64,
    /// Expansion vs de Casteljau, double precision, `n <= 25`.
    pub expansion_double: f64,
    /// Expansion vs de Casteljau, `Extended(50)`, `n <= 320`.
    pub expansion_extended: f64,
    /// ClosedForm vs Quadrature backends in double precision.
    pub backend_agreement: f64,
    /// Central finite-difference step for `df/dx`.
    pub fd_step: f64,
}

pub const TOLERANCES: Tolerances = Tolerances {
    reproduction: 1e-14,
    expansion_double: 1e-10,
    expansion_extended: 1e-30,
    backend_agreement: 1e-9,
    fd_step: 1e-6,
};

/// Binary precision for `digits` significant decimal digits after a
/// cancellation of `3^degree`.
pub fn working_bits(digits: u32, degree: usize) -> usize {
    let wanted = (f64::from(digits) * std::f64::consts::LOG2_10).ceil() as usize;
    let guard = (degree as f64 * 3f64.log2()).ceil() as usize;
    wanted + guard + 64
}

/// Minimal field interface shared by `f64` and [`Ext`].
pub trait Scalar: Clone + Send + Sync {
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn div(&self, other: &Self) -> Self;
    fn to_f64(&self) -> f64;
    fn is_zero(&self) -> bool;
}

/// Factory for scalars of a fixed working precision.
pub trait Context: Sync {
    type Float: Scalar;
    fn float(&self, x: f64) -> Self::Float;
    fn zero(&self) -> Self::Float {
        self.float(0.0)
    }
    fn int(&self, k: u64) -> Self::Float;
}

impl Scalar for f64 {
    #[inline]
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    #[inline]
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    #[inline]
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    #[inline]
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    #[inline]
    fn to_f64(&self) -> f64 {
        *self
    }
    #[inline]
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct DoubleContext;

impl Context for DoubleContext {
    type Float = f64;
    fn float(&self, x: f64) -> f64 {
        x
    }
    fn int(&self, k: u64) -> f64 {
        k as f64
    }
}

type Big = FBig<HalfEven, 2>;

/// Binary multiprecision float with a fixed working precision.
#[derive(Debug, Clone, PartialEq)]
pub struct Ext(Big);

impl Ext {
    pub fn precision(&self) -> usize {
        self.0.precision()
    }
}

impl Scalar for Ext {
    fn add(&self, other: &Self) -> Self {
        Ext(&self.0 + &other.0)
    }
    fn sub(&self, other: &Self) -> Self {
        Ext(&self.0 - &other.0)
    }
    fn mul(&self, other: &Self) -> Self {
        Ext(&self.0 * &other.0)
    }
    fn div(&self, other: &Self) -> Self {
        Ext(&self.0 / &other.0)
    }
    fn to_f64(&self) -> f64 {
        self.0.to_f64().value()
    }
    fn is_zero(&self) -> bool {
        let r = self.0.repr();
        r.is_pos_zero() || r.is_neg_zero()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ExtContext {
    bits: usize,
}

impl ExtContext {
    pub fn new(bits: usize) -> Self {
        ExtContext { bits: bits.max(64) }
    }

    /// Context for `digits` retained digits at the given degree.
    pub fn for_degree(digits: u32, degree: usize) -> Self {
        Self::new(working_bits(digits, degree))
    }

    pub fn bits(&self) -> usize {
        self.bits
    }
}

impl Context for ExtContext {
    type Float = Ext;
    fn float(&self, x: f64) -> Ext {
        // f64 -> binary float is exact
        let v = Big::try_from(x).expect("finite value");
        Ext(v.with_precision(self.bits).value())
    }
    fn int(&self, k: u64) -> Ext {
        Ext(Big::from(k).with_precision(self.bits).value())
    }
}

/// Neumaier-compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}
