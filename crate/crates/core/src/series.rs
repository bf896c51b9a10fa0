//! Truncated Taylor series with complex coefficients.
//!
//! A [`TaylorSeries`] of truncation order `N` stores `a_0, ..., a_N` and
//! stands for the polynomial `a_0 + a_1 z + ... + a_N z^N`. Products and
//! compositions never grow the order: the result is truncated to the smaller
//! operand order, so every coefficient that is kept is exact.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Truncation order used by the verification suites.
pub const DEFAULT_ORDER: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaylorSeries {
    coeffs: Vec<Complex64>,
}

impl TaylorSeries {
    /// Builds a series from its coefficients. An empty vector is read as the
    /// zero series of order 0.
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        if coeffs.is_empty() {
            return Self::zero(0);
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero(order: usize) -> Self {
        Self {
            coeffs: vec![Complex64::new(0.0, 0.0); order + 1],
        }
    }

    pub fn constant(c: Complex64, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = c;
        s
    }

    /// `1 / (1 - q z)` truncated at `order`.
    pub fn geometric(q: Complex64, order: usize) -> Self {
        let mut coeffs = Vec::with_capacity(order + 1);
        let mut p = Complex64::new(1.0, 0.0);
        for _ in 0..=order {
            coeffs.push(p);
            p *= q;
        }
        Self { coeffs }
    }

    /// `exp(z)` truncated at `order`.
    pub fn exp(order: usize) -> Self {
        let mut coeffs = Vec::with_capacity(order + 1);
        let mut c = 1.0;
        for k in 0..=order {
            if k > 0 {
                c /= k as f64;
            }
            coeffs.push(Complex64::new(c, 0.0));
        }
        Self { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Horner evaluation. Intended for `|z| <= 1`; outside the closed disk
    /// the truncation error is not controlled.
    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Evaluates the series and its derivative in one Horner pass.
    pub fn evaluate_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        let mut value = zero;
        let mut deriv = zero;
        for &c in self.coeffs.iter().rev() {
            deriv = deriv * z + value;
            value = value * z + c;
        }
        (value, deriv)
    }

    /// `b_k = (k+1) a_{k+1}`, order `N-1`. The derivative of an order-0
    /// series is the zero series of order 0.
    pub fn derivative(&self) -> Self {
        if self.order() == 0 {
            return Self::zero(0);
        }
        Self {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &a)| a * k as f64)
                .collect(),
        }
    }

    /// Antiderivative with zero constant term, order `N+1`.
    pub fn antiderivative(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(Complex64::new(0.0, 0.0));
        coeffs.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, &a)| a / (k + 1) as f64),
        );
        Self { coeffs }
    }

    /// `f_r(z) = f(r z)`.
    pub fn dilate(&self, r: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&r) {
            return domain(format!("dilation radius {r} is outside [0, 1]"));
        }
        let mut p = 1.0;
        let coeffs = self
            .coeffs
            .iter()
            .map(|&a| {
                let c = a * p;
                p *= r;
                c
            })
            .collect();
        Ok(Self { coeffs })
    }

    /// `sum |a_k|^2`.
    pub fn h2_norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|&a| a * c).collect(),
        }
    }

    /// Sum truncated to the smaller order.
    pub fn add(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        Self {
            coeffs: (0..=n).map(|k| self.coeffs[k] + other.coeffs[k]).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Cauchy product truncated to the smaller order.
    pub fn mul(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        let coeffs = (0..=n)
            .map(|k| {
                (0..=k)
                    .map(|i| self.coeffs[i] * other.coeffs[k - i])
                    .sum::<Complex64>()
            })
            .collect();
        Self { coeffs }
    }

    /// Multiplies by `z`, keeping the order (the top coefficient drops out).
    pub fn shift(&self) -> Self {
        let n = self.order();
        let mut coeffs = Vec::with_capacity(n + 1);
        coeffs.push(Complex64::new(0.0, 0.0));
        coeffs.extend_from_slice(&self.coeffs[..n]);
        Self { coeffs }
    }

    /// Coefficients of `exp(self)` at the same order, from `n e_n = sum_k k s_k e_{n-k}`.
    pub fn exp_of(&self) -> Self {
        let n = self.order();
        let mut e = Vec::with_capacity(n + 1);
        e.push(self.coeffs[0].exp());
        for m in 1..=n {
            let acc: Complex64 = (1..=m).map(|k| self.coeffs[k] * k as f64 * e[m - k]).sum();
            e.push(acc / m as f64);
        }
        Self { coeffs: e }
    }

    /// Same coefficients, padded with zeros or truncated to `order`.
    pub fn with_order(&self, order: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(order + 1, Complex64::new(0.0, 0.0));
        Self { coeffs }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn evaluate_examples() {
        let id = TaylorSeries::from_real(&[0.0, 1.0]);
        assert_eq!(id.evaluate(c(0.5, 0.0)), c(0.5, 0.0));
        let one = TaylorSeries::from_real(&[1.0, 0.0, 0.0]);
        assert_eq!(one.evaluate(c(0.3, -0.7)), c(1.0, 0.0));
        let e = TaylorSeries::exp(20);
        assert_abs_diff_eq!(e.evaluate(c(0.3, 0.0)).re, 0.3f64.exp(), epsilon = 1e-12);
        assert_abs_diff_eq!(e.evaluate(c(0.3, 0.0)).im, 0.0);
    }

    #[test]
    fn value_at_origin_is_first_coefficient() {
        let s = TaylorSeries::new(vec![c(0.25, -3.0), c(1e300, 0.0), c(-7.0, 2.0)]);
        assert_eq!(s.evaluate(c(0.0, 0.0)), c(0.25, -3.0));
    }

    #[test]
    fn derivative_examples() {
        let d = TaylorSeries::from_real(&[0.0, 1.0]).derivative();
        assert_eq!(d, TaylorSeries::from_real(&[1.0]));
        let d = TaylorSeries::from_real(&[0.0, 0.0, 1.0]).derivative();
        assert_eq!(d, TaylorSeries::from_real(&[0.0, 2.0]));
        assert_eq!(
            TaylorSeries::from_real(&[5.0]).derivative(),
            TaylorSeries::zero(0)
        );

        // k * (1/k!) = 1/(k-1)!
        let d = TaylorSeries::exp(10).derivative();
        let e9 = TaylorSeries::exp(9);
        assert_eq!(d.order(), 9);
        for k in 0..=9 {
            assert_abs_diff_eq!(d.coeff(k).re, e9.coeff(k).re, epsilon = 1e-15);
        }
    }

    #[test]
    fn evaluate_with_derivative_matches_derivative_series() {
        let s = TaylorSeries::new(vec![c(1.0, 2.0), c(-0.5, 0.25), c(0.0, 3.0), c(0.7, 0.0)]);
        let z = c(0.3, -0.4);
        let (v, d) = s.evaluate_with_derivative(z);
        assert_abs_diff_eq!((v - s.evaluate(z)).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            (d - s.derivative().evaluate(z)).norm(),
            0.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn dilate_examples() {
        let s = TaylorSeries::exp(8);
        assert_eq!(s.dilate(1.0).unwrap(), s);
        let d = TaylorSeries::from_real(&[0.0, 1.0]).dilate(0.5).unwrap();
        assert_eq!(d, TaylorSeries::from_real(&[0.0, 0.5]));
        assert!(s.dilate(1.5).is_err());
        assert!(s.dilate(-0.1).is_err());
    }

    #[test]
    fn h2_norm_examples() {
        assert_eq!(TaylorSeries::from_real(&[0.0, 1.0]).h2_norm_sq(), 1.0);
        assert_eq!(TaylorSeries::from_real(&[1.0, 0.5]).h2_norm_sq(), 1.25);
        let mut oracle = 0.0;
        let mut f = 1.0;
        for k in 0..=20 {
            if k > 0 {
                f *= k as f64;
            }
            oracle += 1.0 / (f * f);
        }
        assert_abs_diff_eq!(TaylorSeries::exp(20).h2_norm_sq(), oracle, epsilon = 1e-14);
    }

    #[test]
    fn product_truncates_to_smaller_order() {
        let a = TaylorSeries::from_real(&[1.0, 1.0]);
        let b = TaylorSeries::from_real(&[1.0, -1.0, 0.0, 4.0]);
        let p = a.mul(&b);
        assert_eq!(p, TaylorSeries::from_real(&[1.0, 0.0]));
        let g = TaylorSeries::geometric(c(0.5, 0.0), 30);
        let one_minus = TaylorSeries::from_real(&[1.0, -0.5]).with_order(30);
        let p = g.mul(&one_minus);
        assert_abs_diff_eq!(p.coeff(0).re, 1.0);
        for k in 1..=30 {
            assert_abs_diff_eq!(p.coeff(k).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn exp_of_inverts_log() {
        // log(1 - z/2) = -sum (1/2)^k z^k / k
        let n = 40;
        let mut l = vec![c(0.0, 0.0)];
        for k in 1..=n {
            l.push(c(-(0.5f64.powi(k as i32)) / k as f64, 0.0));
        }
        let a = TaylorSeries::new(l).exp_of();
        assert_abs_diff_eq!(a.coeff(0).re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(a.coeff(1).re, -0.5, epsilon = 1e-15);
        for k in 2..=n {
            assert_abs_diff_eq!(a.coeff(k).norm(), 0.0, epsilon = 1e-14);
        }
        // exp(z) from exp_of the identity
        let e = TaylorSeries::from_real(&[0.0, 1.0]).with_order(15).exp_of();
        let reference = TaylorSeries::exp(15);
        for k in 0..=15 {
            assert_abs_diff_eq!(e.coeff(k).re, reference.coeff(k).re, epsilon = 1e-15);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn series(max_order: usize) -> impl Strategy<Value = TaylorSeries> {
            prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 1..=max_order + 1)
                .prop_map(|v| TaylorSeries::new(v.into_iter().map(|(a, b)| c(a, b)).collect()))
        }

        fn disk_point() -> impl Strategy<Value = Complex64> {
            (0.0f64..1.0, 0.0f64..std::f64::consts::TAU)
                .prop_map(|(r, t)| Complex64::from_polar(r, t))
        }

        proptest! {
            #[test]
            fn derivative_inverts_antiderivative(s in series(20)) {
                let back = s.antiderivative().derivative();
                prop_assert_eq!(back.order(), s.order());
                for k in 0..=s.order() {
                    prop_assert!((back.coeff(k) - s.coeff(k)).norm() <= 1e-14 * (1.0 + s.coeff(k).norm()));
                }
            }

            #[test]
            fn dilation_is_composition(s in series(20), r in 0.0f64..=1.0, z in disk_point()) {
                let lhs = s.dilate(r).unwrap().evaluate(z);
                let rhs = s.evaluate(z * r);
                prop_assert!((lhs - rhs).norm() <= 1e-12);
            }

            #[test]
            fn dilation_shrinks_h2_norm(s in series(20), r in 0.0f64..=1.0) {
                prop_assert!(s.dilate(r).unwrap().h2_norm_sq() <= s.h2_norm_sq());
            }

            #[test]
            fn evaluate_is_linear(a in series(12), b in series(12), z in disk_point(), k in -3.0f64..3.0) {
                let k = c(k, 0.5);
                let lhs = a.scale(k).add(&b).evaluate(z);
                let n = a.order().min(b.order());
                let rhs = a.with_order(n).evaluate(z) * k + b.with_order(n).evaluate(z);
                prop_assert!((lhs - rhs).norm() <= 1e-12);
            }
        }
    }
}
