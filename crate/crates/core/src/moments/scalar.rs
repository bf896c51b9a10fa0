//! Scalars that moment tables can be built over: IEEE double complex numbers
//! and exact Gaussian rationals.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// `p + q i` with `p, q` arbitrary-precision rationals.
pub type GaussianRational = Complex<BigRational>;

pub trait MomentScalar:
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
    + Neg<Output = Self>
{
    /// Arithmetic is exact; tolerances collapse to 0.
    const EXACT: bool;

    fn conj(&self) -> Self;
    fn modulus(&self) -> f64;
    fn from_i64(n: i64) -> Self;
    fn to_complex64(&self) -> Complex64;

    /// `tol` for floating scalars, `0` for exact ones.
    fn tolerance(tol: f64) -> f64 {
        if Self::EXACT {
            0.0
        } else {
            tol
        }
    }
}

impl MomentScalar for Complex64 {
    const EXACT: bool = false;

    fn conj(&self) -> Self {
        Complex::conj(self)
    }

    fn modulus(&self) -> f64 {
        self.norm()
    }

    fn from_i64(n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }

    fn to_complex64(&self) -> Complex64 {
        *self
    }
}

impl MomentScalar for GaussianRational {
    const EXACT: bool = true;

    fn conj(&self) -> Self {
        Complex::conj(self)
    }

    fn modulus(&self) -> f64 {
        self.to_complex64().norm()
    }

    fn from_i64(n: i64) -> Self {
        Complex::new(
            BigRational::from_integer(BigInt::from(n)),
            BigRational::zero(),
        )
    }

    fn to_complex64(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
}

/// `(re_num / den) + (im_num / den) i`.
pub fn gaussian_rational(re_num: i64, im_num: i64, den: i64) -> GaussianRational {
    let d = BigInt::from(den);
    Complex::new(
        BigRational::new(BigInt::from(re_num), d.clone()),
        BigRational::new(BigInt::from(im_num), d),
    )
}

/// Exact conversion of a finite double; every finite `f64` is a dyadic rational.
pub fn exact_from_f64(z: Complex64) -> Option<GaussianRational> {
    Some(Complex::new(
        BigRational::from_float(z.re)?,
        BigRational::from_float(z.im)?,
    ))
}
