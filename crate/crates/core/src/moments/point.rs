//! Distributions supported at one point, `u = Σ c_{jk} ∂^j ∂̄^k δ_a`.

use serde::Serialize;

use super::scalar::MomentScalar;
use super::{MomentTable, Provenance};
use crate::error::{domain, Error, Result};

/// `c_00` is read as 0 or 1 when this close to it.
pub const SNAP_TOLERANCE: f64 = 1e-9;
/// Factorization tolerance for floating coefficients.
pub const FACTOR_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct PointDistribution<T> {
    a: T,
    c: Vec<Vec<T>>,
}

impl<T: MomentScalar> PointDistribution<T> {
    /// `c` is padded with zeros to a square table.
    pub fn new(a: T, c: Vec<Vec<T>>) -> Result<Self> {
        if c.is_empty() || c.iter().all(Vec::is_empty) {
            return domain("coefficient table is empty");
        }
        let n = c.len().max(c.iter().map(Vec::len).max().unwrap_or(0));
        let c = (0..n)
            .map(|j| {
                (0..n)
                    .map(|k| {
                        c.get(j)
                            .and_then(|r| r.get(k))
                            .cloned()
                            .unwrap_or_else(T::zero)
                    })
                    .collect()
            })
            .collect();
        Ok(Self { a, c })
    }

    /// `δ_a`.
    pub fn dirac(a: T) -> Self {
        Self {
            a,
            c: vec![vec![T::one()]],
        }
    }

    /// `p(∂) q(∂̄) δ_a`, i.e. `c_{jk} = p_j q_k`.
    pub fn from_factors(a: T, p: &[T], q: &[T]) -> Result<Self> {
        if p.is_empty() || q.is_empty() {
            return domain("factor polynomials must be nonempty");
        }
        let c = p
            .iter()
            .map(|pj| q.iter().map(|qk| pj.clone() * qk.clone()).collect())
            .collect();
        Self::new(a, c)
    }

    pub fn support(&self) -> &T {
        &self.a
    }

    /// Largest derivative order stored.
    pub fn degree(&self) -> usize {
        self.c.len() - 1
    }

    pub fn coeff(&self, j: usize, k: usize) -> T {
        self.c
            .get(j)
            .and_then(|r| r.get(k))
            .cloned()
            .unwrap_or_else(T::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().flatten().all(T::is_zero)
    }
}

fn factorial<T: MomentScalar>(n: usize) -> T {
    (1..=n as i64).fold(T::one(), |acc, i| acc * T::from_i64(i))
}

fn binomials(n: usize) -> Vec<Vec<i64>> {
    let mut b = vec![vec![0i64; n + 1]; n + 1];
    for i in 0..=n {
        b[i][0] = 1;
        for k in 1..=i {
            b[i][k] = b[i - 1][k - 1] + if k < i { b[i - 1][k] } else { 0 };
        }
    }
    b
}

/// `⟨u, (z-a)^m (z̄-ā)^n⟩ = (-1)^{m+n} m! n! c_{mn}`.
pub fn centered_moments<T: MomentScalar>(d: &PointDistribution<T>, order: usize) -> MomentTable<T> {
    MomentTable::from_fn(order, Provenance::Point, |m, n| {
        let f = factorial::<T>(m) * factorial::<T>(n) * d.coeff(m, n);
        if (m + n) % 2 == 0 {
            f
        } else {
            -f
        }
    })
}

/// Raw moments `⟨u, z^j z̄^k⟩`, from the centered ones through
/// `z^j = Σ_m C(j,m) a^{j-m} (z-a)^m` and its conjugate.
pub fn point_moments<T: MomentScalar>(d: &PointDistribution<T>, order: usize) -> MomentTable<T> {
    let centered = centered_moments(d, order.min(d.degree()));
    let top = centered.order();
    let binom = binomials(order);
    let a = d.support().clone();
    let ac = a.conj();
    let mut a_pow = vec![T::one()];
    let mut ac_pow = vec![T::one()];
    for i in 1..=order {
        a_pow.push(a_pow[i - 1].clone() * a.clone());
        ac_pow.push(ac_pow[i - 1].clone() * ac.clone());
    }
    MomentTable::from_fn(order, Provenance::Point, |j, k| {
        let mut s = T::zero();
        for m in 0..=j.min(top) {
            for n in 0..=k.min(top) {
                let cm = centered.get(m, n);
                if cm.is_zero() {
                    continue;
                }
                let coef = T::from_i64(binom[j][m]) * T::from_i64(binom[k][n]);
                s = s + coef * a_pow[j - m].clone() * ac_pow[k - n].clone() * cm.clone();
            }
        }
        s
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Factorization<T> {
    /// `u = 0`.
    Zero,
    /// `u = p(∂) q(∂̄) δ_a` with `p_0 = q_0 = 1`.
    Product { p: Vec<T>, q: Vec<T> },
}

/// Splits `c_{mn} = c_{m0} c_{0n}` into `p_m = c_{m0}`, `q_n = c_{0n}`.
pub fn factorize<T: MomentScalar>(d: &PointDistribution<T>) -> Result<Factorization<T>> {
    let n = d.degree();
    let snap = T::tolerance(SNAP_TOLERANCE);
    let c00 = d.coeff(0, 0);
    if c00.modulus() <= snap {
        for i in 0..=n {
            for j in 0..=n {
                if !d.coeff(i, j).is_zero() && !(i == 0 && j == 0) {
                    return Err(Error::InconsistentTable { m: i, n: j });
                }
            }
        }
        return Ok(Factorization::Zero);
    }
    if (c00.clone() - T::one()).modulus() > snap {
        return Err(Error::NotWeaklyMultiplicative(format!(
            "{}",
            c00.to_complex64()
        )));
    }
    let tol = T::tolerance(FACTOR_TOLERANCE);
    let mut p: Vec<T> = (0..=n).map(|m| d.coeff(m, 0)).collect();
    let mut q: Vec<T> = (0..=n).map(|k| d.coeff(0, k)).collect();
    // c_00 is snapped to exactly 1.
    p[0] = T::one();
    q[0] = T::one();
    for (m, pm) in p.iter().enumerate() {
        for (k, qk) in q.iter().enumerate() {
            let r = (d.coeff(m, k) - pm.clone() * qk.clone()).modulus();
            let r = if m == 0 && k == 0 { 0.0 } else { r };
            if r > tol {
                return Err(Error::NotRankOne {
                    m,
                    n: k,
                    residual: r,
                });
            }
        }
    }
    Ok(Factorization::Product { p, q })
}

#[cfg(test)]
mod tests {
    use super::super::scalar::{gaussian_rational, GaussianRational};
    use super::super::weak_mult_check;
    use super::*;
    use num_complex::Complex64;

    fn g(re: i64, im: i64) -> GaussianRational {
        gaussian_rational(re, im, 1)
    }

    #[test]
    fn dirac_moments_are_evaluation() {
        let a = gaussian_rational(3, -5, 4);
        let m = point_moments(&PointDistribution::dirac(a.clone()), 5);
        for j in 0..=5u32 {
            for k in 0..=5u32 {
                let expect = num_traits::pow(a.clone(), j as usize)
                    * num_traits::pow(a.clone().conj(), k as usize);
                assert_eq!(*m.get(j as usize, k as usize), expect);
            }
        }
    }

    #[test]
    fn single_derivative_at_origin() {
        let d = PointDistribution::new(g(0, 0), vec![vec![g(0, 0)], vec![g(1, 0)]]).unwrap();
        let m = point_moments(&d, 3);
        assert_eq!(*m.get(1, 0), g(-1, 0));
        assert_eq!(*m.get(0, 0), g(0, 0));
    }

    #[test]
    fn rank_one_at_origin_factorizes_moments() {
        let p = [g(1, 0), g(2, -1), gaussian_rational(1, 1, 3)];
        let q = [g(1, 0), gaussian_rational(-1, 0, 2), g(0, 4)];
        let d = PointDistribution::from_factors(g(0, 0), &p, &q).unwrap();
        let m = point_moments(&d, 6);
        for j in 0..=6 {
            for k in 0..=6 {
                assert_eq!(*m.get(j, k), m.get(j, 0).clone() * m.get(0, k).clone());
            }
        }
        assert!(weak_mult_check(&m, 0.0).exact_zero);
    }

    #[test]
    fn factorize_examples() {
        let dirac = PointDistribution::dirac(g(1, 1));
        assert_eq!(
            factorize(&dirac).unwrap(),
            Factorization::Product {
                p: vec![g(1, 0)],
                q: vec![g(1, 0)]
            }
        );

        let d = PointDistribution::from_factors(g(0, 0), &[g(1, 0), g(0, 2)], &[g(1, 0), g(-3, 0)])
            .unwrap();
        assert_eq!(
            factorize(&d).unwrap(),
            Factorization::Product {
                p: vec![g(1, 0), g(0, 2)],
                q: vec![g(1, 0), g(-3, 0)]
            }
        );

        let eye = PointDistribution::new(
            g(0, 0),
            vec![vec![g(1, 0), g(0, 0)], vec![g(0, 0), g(1, 0)]],
        )
        .unwrap();
        assert!(matches!(
            factorize(&eye),
            Err(Error::NotRankOne { m: 1, n: 1, .. })
        ));
    }

    #[test]
    fn factorize_rejects_bad_constant_term() {
        let d = PointDistribution::new(g(0, 0), vec![vec![g(2, 0)]]).unwrap();
        assert!(matches!(
            factorize(&d),
            Err(Error::NotWeaklyMultiplicative(_))
        ));
        let d = PointDistribution::new(g(0, 0), vec![vec![g(0, 0), g(1, 0)]]).unwrap();
        assert!(matches!(
            factorize(&d),
            Err(Error::InconsistentTable { m: 0, n: 1 })
        ));
        let d = PointDistribution::new(g(0, 0), vec![vec![g(0, 0)]]).unwrap();
        assert_eq!(factorize(&d).unwrap(), Factorization::Zero);
    }

    #[test]
    fn floating_coefficients_snap() {
        let one = Complex64::new(1.0 + 1e-11, 0.0);
        let d = PointDistribution::new(
            Complex64::new(0.5, 0.0),
            vec![
                vec![one, Complex64::new(2.0, 0.0)],
                vec![Complex64::new(0.0, 1.0), Complex64::new(0.0, 2.0)],
            ],
        )
        .unwrap();
        match factorize(&d).unwrap() {
            Factorization::Product { p, q } => {
                assert_eq!(p[0], Complex64::new(1.0, 0.0));
                assert_eq!(q[1], Complex64::new(2.0, 0.0));
            }
            Factorization::Zero => panic!("expected a product"),
        }
    }
}
