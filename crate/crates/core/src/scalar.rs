//! Coefficient fields used by the diagram engines.
//!
//! Everything combinatorial in this crate is generic over [`Scalar`], so the
//! same code runs in double-precision complex arithmetic (for geometric
//! inputs) and in exact Gaussian rationals `Q(i)` (for identity checks).

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Double-precision complex numbers.
pub type C64 = Complex<f64>;

/// Exact complex rationals `a + b i` with `a, b ∈ Q`.
pub type ExactComplex = Complex<BigRational>;

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_i64(v: i64) -> Self;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }

    /// The imaginary unit.
    fn imag_unit() -> Self;

    fn to_c64(&self) -> C64;

    /// Whether the value should be dropped from sparse storage.
    fn is_negligible(&self) -> bool {
        self.is_zero()
    }
}

impl Scalar for C64 {
    fn from_i64(v: i64) -> Self {
        C64::new(v as f64, 0.0)
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        C64::new(num as f64 / den as f64, 0.0)
    }

    fn imag_unit() -> Self {
        C64::new(0.0, 1.0)
    }

    fn to_c64(&self) -> C64 {
        *self
    }
}

impl Scalar for ExactComplex {
    fn from_i64(v: i64) -> Self {
        Complex::new(
            BigRational::from_integer(BigInt::from(v)),
            BigRational::zero(),
        )
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Complex::new(
            BigRational::new(BigInt::from(num), BigInt::from(den)),
            BigRational::zero(),
        )
    }

    fn imag_unit() -> Self {
        Complex::new(BigRational::zero(), BigRational::one())
    }

    fn to_c64(&self) -> C64 {
        C64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
}

/// Exact rational `num/den` lifted into `Q(i)`.
pub fn exact(num: i64, den: i64) -> ExactComplex {
    ExactComplex::from_ratio(num, den)
}

/// Exact conversion of a binary64 value (every finite double is a rational).
pub fn exact_from_f64(v: f64) -> Option<ExactComplex> {
    Some(Complex::new(
        BigRational::from_float(v)?,
        BigRational::zero(),
    ))
}

/// Small square matrices stored row-major as nested vectors.
pub type Mat<S> = Vec<Vec<S>>;

pub fn scale_mat<S: Scalar>(m: &Mat<S>, s: &S) -> Mat<S> {
    m.iter()
        .map(|row| row.iter().map(|x| x.clone() * s.clone()).collect())
        .collect()
}

pub fn binomial(n: u32, k: u32) -> i64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: i64 = 1;
    for j in 0..k {
        acc = acc * (n - j) as i64 / (j + 1) as i64;
    }
    acc
}

pub fn factorial(n: u32) -> i64 {
    (1..=n as i64).product()
}

/// `base^e` by repeated squaring.
pub fn pow<S: Scalar>(base: &S, mut e: u32) -> S {
    let mut acc = S::one();
    let mut b = base.clone();
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b.clone();
        }
        e >>= 1;
        if e > 0 {
            b = b.clone() * b;
        }
    }
    acc
}
