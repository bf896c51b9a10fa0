//! Moment tables `M[j][k] = ⟨u, z^j z̄^k⟩` of compactly supported
//! distributions, and the finite checks of weak multiplicativity.
//!
//! A distribution is weakly multiplicative when
//! `⟨u, z^j z̄^k⟩ = ⟨u, z^j⟩ ⟨u, z̄^k⟩` for all `j, k`; on a table this is
//! `M[j][k] = M[j][0] M[0][k]`. Tables can be exact (Gaussian rationals) or
//! floating point; see [`MomentScalar`].

mod generators;
mod point;
mod scalar;

pub use generators::{random_non_rank_one, random_rank_one, RandomPointSpec};
pub use point::{centered_moments, factorize, point_moments, Factorization, PointDistribution};
pub use scalar::{exact_from_f64, gaussian_rational, GaussianRational, MomentScalar};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::quadrature::{integrate_many, DiskGrid, Rule};
use crate::weights::{GreenDecomposition, Weight};

/// Moment order used by the verification suites.
pub const DEFAULT_MOMENT_ORDER: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    Point,
    /// Quadrature on the named grid.
    Measure(String),
    Synthetic,
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Provenance::Point => f.write_str("point"),
            Provenance::Measure(id) => write!(f, "measure:{id}"),
            Provenance::Synthetic => f.write_str("synthetic"),
        }
    }
}

/// `(N+1) x (N+1)` table of moments.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable<T = Complex64> {
    entries: Vec<Vec<T>>,
    provenance: Provenance,
}

impl<T: MomentScalar> MomentTable<T> {
    /// Builds a table from square `entries`.
    pub fn new(entries: Vec<Vec<T>>, provenance: Provenance) -> Result<Self> {
        let n = entries.len();
        if n == 0 || entries.iter().any(|row| row.len() != n) {
            return domain("moment table must be square and nonempty");
        }
        Ok(Self {
            entries,
            provenance,
        })
    }

    pub fn from_fn(order: usize, provenance: Provenance, f: impl Fn(usize, usize) -> T) -> Self {
        let entries = (0..=order)
            .map(|j| (0..=order).map(|k| f(j, k)).collect())
            .collect();
        Self {
            entries,
            provenance,
        }
    }

    pub fn order(&self) -> usize {
        self.entries.len() - 1
    }

    pub fn get(&self, j: usize, k: usize) -> &T {
        &self.entries[j][k]
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.entries
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn to_complex64(&self) -> MomentTable<Complex64> {
        MomentTable {
            entries: self
                .entries
                .iter()
                .map(|row| row.iter().map(MomentScalar::to_complex64).collect())
                .collect(),
            provenance: self.provenance.clone(),
        }
    }

    /// Leading `(order+1) x (order+1)` block.
    pub fn truncate(&self, order: usize) -> Self {
        let n = order.min(self.order());
        Self {
            entries: self.entries[..=n]
                .iter()
                .map(|row| row[..=n].to_vec())
                .collect(),
            provenance: self.provenance.clone(),
        }
    }

    /// `M[j][k] = conj(M[k][j])` within `tol`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        let tol = T::tolerance(tol);
        (0..=self.order()).all(|j| {
            (0..=self.order())
                .all(|k| (self.get(j, k).clone() - self.get(k, j).conj()).modulus() <= tol)
        })
    }

    pub fn to_json(&self) -> MomentTableJson {
        let c = self.to_complex64();
        MomentTableJson {
            order: self.order(),
            re: c
                .entries
                .iter()
                .map(|r| r.iter().map(|z| z.re).collect())
                .collect(),
            im: c
                .entries
                .iter()
                .map(|r| r.iter().map(|z| z.im).collect())
                .collect(),
            provenance: self.provenance.to_string(),
        }
    }
}

/// Wire form of a moment table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentTableJson {
    pub order: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
    pub provenance: String,
}

impl TryFrom<MomentTableJson> for MomentTable<Complex64> {
    type Error = crate::Error;

    fn try_from(j: MomentTableJson) -> Result<Self> {
        if j.re.len() != j.order + 1 || j.im.len() != j.order + 1 {
            return domain("moment table rows do not match its order");
        }
        let entries =
            j.re.iter()
                .zip(&j.im)
                .map(|(r, i)| {
                    if r.len() != j.order + 1 || i.len() != j.order + 1 {
                        return domain("moment table columns do not match its order");
                    }
                    Ok(r.iter()
                        .zip(i)
                        .map(|(&a, &b)| Complex64::new(a, b))
                        .collect())
                })
                .collect::<Result<Vec<Vec<_>>>>()?;
        let provenance = match j.provenance.as_str() {
            "point" => Provenance::Point,
            "synthetic" => Provenance::Synthetic,
            p => match p.strip_prefix("measure:") {
                Some(id) => Provenance::Measure(id.to_string()),
                None => return domain(format!("unknown provenance `{p}`")),
            },
        };
        MomentTable::new(entries, provenance)
    }
}

/// `M[j][k] = ∫ z^j z̄^k ω dA`.
pub fn measure_moments(w: &Weight, grid: &DiskGrid, order: usize) -> Result<MomentTable> {
    let n = order + 1;
    let flat = integrate_many(grid, n * n, |z, out| {
        let wz = w.eval_unchecked(z);
        let zc = z.conj();
        let mut zj = Complex64::new(wz, 0.0);
        for j in 0..n {
            let mut t = zj;
            for k in 0..n {
                out[j * n + k] = t;
                t *= zc;
            }
            zj *= z;
        }
    })?;
    Ok(MomentTable::from_fn(
        order,
        Provenance::Measure(grid.id()),
        |j, k| flat[j * n + k],
    ))
}

/// Moments of `u = -(1/4π)(1 - |z|²) Δω` from the moments `m` of `ω dA`.
///
/// Pairing `u` against `1/|1 - z w̄|²` gives `∫ (1-|w|²)/|1 - z w̄|⁴ ω dA`;
/// matching coefficients of `w̄^j w^k` yields
/// `M_u[j][k] = (j+1)(k+1) m[j][k] - j k m[j-1][k-1]`. No derivative of `ω`
/// is taken.
pub fn u_moments_from_measure<T: MomentScalar>(m: &MomentTable<T>) -> MomentTable<T> {
    MomentTable::from_fn(m.order(), m.provenance.clone(), |j, k| {
        let a = T::from_i64(((j + 1) * (k + 1)) as i64) * m.get(j, k).clone();
        if j == 0 || k == 0 {
            a
        } else {
            a - T::from_i64((j * k) as i64) * m.get(j - 1, k - 1).clone()
        }
    })
}

/// [`u_moments_from_measure`] applied to [`measure_moments`].
pub fn u_moments(w: &Weight, grid: &DiskGrid, order: usize) -> Result<MomentTable> {
    Ok(u_moments_from_measure(&measure_moments(w, grid, order)?))
}

/// Moments of the atomic measure `μ + ν`.
pub fn atomic_moments(d: &GreenDecomposition, order: usize) -> MomentTable {
    MomentTable::from_fn(order, Provenance::Synthetic, |j, k| {
        d.atoms()
            .map(|a| a.point.powu(j as u32) * a.point.conj().powu(k as u32) * a.mass)
            .sum()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakMultReport {
    pub passes: bool,
    /// `(j, k, |M[j][k] - M[j][0] M[0][k]|)`, lexicographically first among ties.
    pub worst: (usize, usize, f64),
    /// Every residual is exactly zero.
    pub exact_zero: bool,
}

pub fn weak_mult_check<T: MomentScalar>(m: &MomentTable<T>, tol: f64) -> WeakMultReport {
    let tol = T::tolerance(tol);
    let n = m.order();
    let mut worst = (0, 0, 0.0);
    let mut exact_zero = true;
    for j in 0..=n {
        for k in 0..=n {
            let r = m.get(j, k).clone() - m.get(j, 0).clone() * m.get(0, k).clone();
            if !r.is_zero() {
                exact_zero = false;
            }
            let r = r.modulus();
            if r > worst.2 || r.is_nan() {
                worst = (j, k, r);
            }
        }
    }
    WeakMultReport {
        passes: worst.2 <= tol,
        worst,
        exact_zero,
    }
}

/// Pairing of `u ⊗ u` with `(z₁ - z₂)(z₁^j z₂^k + z₁^k z₂^j) z̄₁^m z̄₂^n`.
pub fn tensor_expansion<T: MomentScalar>(
    m: &MomentTable<T>,
    j: usize,
    k: usize,
    mm: usize,
    n: usize,
) -> T {
    let g = |a: usize, b: usize| m.get(a, b).clone();
    g(j + 1, mm) * g(k, n) + g(k + 1, mm) * g(j, n)
        - g(j, mm) * g(k + 1, n)
        - g(k, mm) * g(j + 1, n)
}

pub type TensorWorst = (usize, usize, usize, usize, f64);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TensorReport {
    pub passes: bool,
    /// `(j, k, m, n, |E|)`, lexicographically first among ties.
    pub worst: TensorWorst,
    pub exact_zero: bool,
}

/// Sweeps `j, k < N`, `m, n <= N`.
pub fn tensor_diag_check<T: MomentScalar>(m: &MomentTable<T>, tol: f64) -> Result<TensorReport> {
    let order = m.order();
    if order < 1 {
        return domain("tensor check needs a moment table of order at least 1");
    }
    let tol = T::tolerance(tol);
    let per_j: Vec<(TensorWorst, bool)> = (0..order)
        .into_par_iter()
        .map(|j| {
            let mut worst = (j, 0, 0, 0, 0.0);
            let mut exact = true;
            for k in 0..order {
                for mm in 0..=order {
                    for n in 0..=order {
                        let e = tensor_expansion(m, j, k, mm, n);
                        if !e.is_zero() {
                            exact = false;
                        }
                        let r = e.modulus();
                        if r > worst.4 || r.is_nan() {
                            worst = (j, k, mm, n, r);
                        }
                    }
                }
            }
            (worst, exact)
        })
        .collect();
    let mut worst = (0, 0, 0, 0, 0.0);
    let mut exact_zero = true;
    for (w, e) in per_j {
        exact_zero &= e;
        if w.4 > worst.4 || w.4.is_nan() {
            worst = w;
        }
    }
    Ok(TensorReport {
        passes: worst.4 <= tol,
        worst,
        exact_zero,
    })
}
