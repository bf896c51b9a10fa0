//! The de Branges–Rovnyak side: `h`, the outer function `a`, the symbol
//! `b = z h a`, kernels of `H(b)` and the norm identity
//! `‖f‖²_{H(b)} = ‖f‖²_{H²} + D_ω(f)` on finite kernel spans.
//!
//! Moments of `u = -(1/4π)(1 - |z|²) Δω` are taken from the atomic
//! decomposition when the weight has one, and from area moments otherwise
//! (see [`crate::moments::u_moments`]). `u` is never differentiated.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::dirichlet::energy;
use crate::error::{domain, Error, Result};
use crate::moments::{atomic_moments, u_moments, MomentTable, DEFAULT_MOMENT_ORDER};
use crate::quadrature::{
    integrate_many, integrate_real, CircleGrid, DiskGrid, Rule, DEFAULT_ANGULAR_ORDER,
    DEFAULT_CIRCLE_ORDER, DEFAULT_RADIAL_ORDER,
};
use crate::series::{TaylorSeries, DEFAULT_ORDER};
use crate::weights::{GreenDecomposition, Weight};

/// `|M[0][0] - 1|` allowed by [`h_from_moments`].
pub const NORMALIZATION_TOLERANCE: f64 = 1e-6;
/// Largest `σ₂ / σ₁` accepted as rank one.
pub const RANK_ONE_TOLERANCE: f64 = 1e-6;
/// Gram matrices need a smallest eigenvalue above this.
pub const GRAM_TOLERANCE: f64 = 1e-10;
pub const ISOMETRY_TOLERANCE: f64 = 1e-2;
/// `|b| <= 1` is only asserted inside this radius; truncation spoils it near the circle.
pub const B_SAMPLE_RADIUS: f64 = 0.9;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Grid sizes for model construction. The disk grid is adapted to the
/// weight's singularities, the circle grid is staggered.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grids {
    pub radial_order: usize,
    pub angular_order: usize,
    pub circle_order: usize,
}

impl Default for Grids {
    fn default() -> Self {
        Self {
            radial_order: DEFAULT_RADIAL_ORDER,
            angular_order: DEFAULT_ANGULAR_ORDER,
            circle_order: DEFAULT_CIRCLE_ORDER,
        }
    }
}

impl Grids {
    pub fn disk_for(&self, w: &Weight) -> Result<DiskGrid> {
        w.adapted_grid(self.radial_order, self.angular_order)
    }

    pub fn circle(&self) -> Result<CircleGrid> {
        CircleGrid::staggered(self.circle_order)
    }
}

/// `|φ(w)|² = (1 - |w|²) ∫ |w|² / |1 - z w̄|⁴ ω(z) dA(z)`.
pub fn phi_modulus_sq(w: Complex64, weight: &Weight, grid: &DiskGrid) -> Result<f64> {
    if !(w.norm_sqr() < 1.0) {
        return domain(format!("{w} is not inside the open disk"));
    }
    let wc = w.conj();
    let s = w.norm_sqr();
    let v = integrate_real(grid, |z| {
        s / (c(1.0, 0.0) - z * wc).norm_sqr().powi(2) * weight.eval_unchecked(z)
    })?;
    Ok((1.0 - s) * v)
}

/// Singular values of `M`, largest first.
fn singular_values(m: &MomentTable) -> Vec<f64> {
    let n = m.order() + 1;
    let a = DMatrix::from_fn(n, n, |j, k| *m.get(j, k));
    let mut s: Vec<f64> = a.singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// `σ₂ / σ₁`, or 0 for a 1×1 or zero table.
pub fn rank_one_ratio(m: &MomentTable) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.get(1)) {
        (Some(&s1), Some(&s2)) if s1 > 0.0 => s2 / s1,
        _ => 0.0,
    }
}

/// `h_k = M[0][k]`, from `M[j][k] = h̄_j h_k` and `h_0 = 1`.
pub fn h_from_moments(m: &MomentTable) -> Result<TaylorSeries> {
    let m00 = *m.get(0, 0);
    if (m00 - 1.0).norm() > NORMALIZATION_TOLERANCE {
        return Err(Error::NotNormalized(m00));
    }
    let ratio = rank_one_ratio(m);
    if !(ratio <= RANK_ONE_TOLERANCE) {
        return Err(Error::NotDbrWeight { ratio });
    }
    Ok(TaylorSeries::new(
        (0..=m.order()).map(|k| *m.get(0, k)).collect(),
    ))
}

/// Best rank-one fit `M ≈ h̄ hᵀ` from the top eigenpair of the Hermitian part,
/// with the phase fixed by `h_0 >= 0`. Returns `h` and `σ₂ / σ₁`.
pub fn best_rank_one(m: &MomentTable) -> (TaylorSeries, f64) {
    let n = m.order() + 1;
    let a = DMatrix::from_fn(n, n, |j, k| 0.5 * (*m.get(j, k) + m.get(k, j).conj()));
    let eig = a.symmetric_eigen();
    let top = (0..n)
        .max_by(|&i, &j| {
            eig.eigenvalues[i]
                .total_cmp(&eig.eigenvalues[j])
                .then(j.cmp(&i))
        })
        .expect("table is nonempty");
    let lambda = eig.eigenvalues[top].max(0.0);
    let v = eig.eigenvectors.column(top);
    let mut h: Vec<Complex64> = v.iter().map(|x| x.conj() * lambda.sqrt()).collect();
    if h[0].norm() > 0.0 {
        let phase = h[0].conj() / h[0].norm();
        h.iter_mut().for_each(|x| *x *= phase);
    }
    (TaylorSeries::new(h), rank_one_ratio(m))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HIdentityReport {
    pub passes: bool,
    pub worst_point: Complex64,
    /// `max |∫ (1-|w|²)/|1-zw̄|⁴ ω dA - |h(w)|²|`.
    pub worst_residual: f64,
    pub tolerance: f64,
}

/// Checks `∫ (1 - |w|²)/|1 - z w̄|⁴ ω(z) dA(z) = |h(w)|²` at every test point.
pub fn verify_h_identity(
    weight: &Weight,
    h: &TaylorSeries,
    points: &[Complex64],
    grid: &DiskGrid,
    tol: f64,
) -> Result<HIdentityReport> {
    if let Some(w) = points.iter().find(|w| !(w.norm_sqr() < 1.0)) {
        return domain(format!("test point {w} is not inside the open disk"));
    }
    if points.is_empty() {
        return domain("no test points");
    }
    let conj: Vec<Complex64> = points.iter().map(|w| w.conj()).collect();
    let lhs = integrate_many(grid, points.len(), |z, out| {
        let wz = weight.eval_unchecked(z);
        for (o, (w, wc)) in out.iter_mut().zip(points.iter().zip(&conj)) {
            let d = (c(1.0, 0.0) - z * wc).norm_sqr();
            *o = c((1.0 - w.norm_sqr()) / (d * d) * wz, 0.0);
        }
    })?;
    let mut worst = (points[0], 0.0f64);
    for (w, l) in points.iter().zip(lhs) {
        let r = (l.re - h.evaluate(*w).norm_sqr()).abs();
        if r > worst.1 || r.is_nan() {
            worst = (*w, r);
        }
    }
    Ok(HIdentityReport {
        passes: worst.1 <= tol,
        worst_point: worst.0,
        worst_residual: worst.1,
        tolerance: tol,
    })
}

/// Relative error of the 5-point Laplacian of `(1-|z|²)/|1-z w̄|²` at `z0`
/// against `-4(1-|w|²)/|1-z w̄|⁴`.
pub fn laplacian_identity_check(z0: Complex64, w0: Complex64, step: f64) -> Result<f64> {
    if !(step > 0.0 && step.is_finite()) {
        return domain(format!("step {step} must be positive"));
    }
    if !(w0.norm_sqr() < 1.0) {
        return domain(format!("{w0} is not inside the open disk"));
    }
    let stencil = [c(step, 0.0), c(-step, 0.0), c(0.0, step), c(0.0, -step)];
    if let Some(p) = stencil
        .iter()
        .map(|d| z0 + d)
        .find(|p| !(p.norm_sqr() < 1.0))
    {
        return domain(format!("stencil point {p} leaves the disk"));
    }
    let wc = w0.conj();
    let f = |z: Complex64| (1.0 - z.norm_sqr()) / (c(1.0, 0.0) - z * wc).norm_sqr();
    let lap = (stencil.iter().map(|d| f(z0 + d)).sum::<f64>() - 4.0 * f(z0)) / (step * step);
    let d = (c(1.0, 0.0) - z0 * wc).norm_sqr();
    let rhs = -4.0 * (1.0 - w0.norm_sqr()) / (d * d);
    Ok((lap - rhs).abs() / rhs.abs())
}

/// Outer function with `log|a| = target` on the circle and `a(0) > 0`.
///
/// With `c_k` the Fourier coefficients of the target, `log a = c_0 + 2 Σ c_k z^k`.
pub fn outer_function(target: &[f64], grid: &CircleGrid, order: usize) -> Result<TaylorSeries> {
    if target.len() != grid.len() {
        return domain(format!(
            "{} samples for a circle grid of {} nodes",
            target.len(),
            grid.len()
        ));
    }
    if let Some(i) = target.iter().position(|t| !t.is_finite()) {
        return Err(Error::SingularBoundaryData {
            node: Complex64::from_polar(1.0, grid.angle(i)),
            index: i,
        });
    }
    let m = grid.len() as f64;
    let log_a: Vec<Complex64> = (0..=order)
        .map(|k| {
            let ck: Complex64 = target
                .iter()
                .enumerate()
                .map(|(j, &t)| Complex64::from_polar(t, -(k as f64) * grid.angle(j)))
                .sum::<Complex64>()
                / m;
            if k == 0 {
                c(ck.re, 0.0)
            } else {
                ck * 2.0
            }
        })
        .collect();
    Ok(TaylorSeries::new(log_a).exp_of())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    /// `σ₂ / σ₁` of the `u` moment table used for the rank test.
    pub rank_one_ratio: f64,
    /// `|h_0 - 1|`.
    pub h0_deviation: f64,
    /// `|∫ ω dA - 1|` of the normalized weight on the model grid.
    pub l1_deviation: f64,
    /// `max |b|` on the sample points.
    pub max_b_modulus: f64,
    pub a0: f64,
    /// `"atomic"` or the disk grid id used for the moments.
    pub moment_source: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct DbrModel {
    /// Normalized, `‖ω‖₁ = 1`.
    #[serde(skip)]
    pub weight: Weight,
    /// `(w, φ(w))` on the sample points, `φ = w h`.
    #[serde(skip)]
    pub phi_samples: Vec<(Complex64, Complex64)>,
    pub h: TaylorSeries,
    pub a: TaylorSeries,
    pub b: TaylorSeries,
    /// `|a|` on the staggered circle grid used for `a`.
    #[serde(skip)]
    pub boundary_modulus: Vec<f64>,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct CoeffsJson {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl From<&TaylorSeries> for CoeffsJson {
    fn from(s: &TaylorSeries) -> Self {
        Self {
            re: s.coeffs().iter().map(|z| z.re).collect(),
            im: s.coeffs().iter().map(|z| z.im).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DbrModelJson {
    pub weight: String,
    pub order: usize,
    pub h: CoeffsJson,
    pub a: CoeffsJson,
    pub b: CoeffsJson,
    pub diagnostics: Diagnostics,
}

/// Points where `|b| <= 1` is checked: rings at 0, 0.5 and [`B_SAMPLE_RADIUS`].
fn sample_points() -> Vec<Complex64> {
    let mut pts = vec![c(0.0, 0.0)];
    for r in [0.5, B_SAMPLE_RADIUS] {
        pts.extend((0..32).map(|j| Complex64::from_polar(r, TAU * (j as f64 + 0.25) / 32.0)));
    }
    pts
}

/// Normalized weight and its decomposition, normalized by the atomic mass
/// when there is one.
fn normalized(weight: &Weight, grid: &DiskGrid) -> Result<(Weight, Option<GreenDecomposition>)> {
    match weight.decomposition() {
        Some(d) if d.total_mass() > 0.0 => {
            let s = 1.0 / d.total_mass();
            Ok((Weight::scaled(s, weight.clone())?, Some(d.scaled(s))))
        }
        _ => Ok((weight.normalize(grid)?, None)),
    }
}

/// Runs the pipeline `ω → u moments → h → |φ|² on the circle → a → b`.
pub fn build_model(weight: &Weight, grids: &Grids, order: usize) -> Result<DbrModel> {
    let disk = grids.disk_for(weight)?;
    let circle = grids.circle()?;
    let (weight, decomposition) = normalized(weight, &disk)?;
    let l1_deviation = (weight.l1_norm(&disk)? - 1.0).abs();

    let (h, rank_one_ratio, moment_source) = match &decomposition {
        Some(d) => {
            let m = atomic_moments(d, order);
            let h = h_from_moments(&m)?;
            (h, rank_one_ratio(&m), "atomic".to_string())
        }
        None => {
            let m = u_moments(&weight, &disk, DEFAULT_MOMENT_ORDER.min(order))?;
            let ratio = rank_one_ratio(&m);
            h_from_moments(&m)?;
            // Only the first row is needed past the rank test: h_k = (k+1) ∫ z̄^k ω dA.
            let row = integrate_many(&disk, order + 1, |z, out| {
                let mut t = c(weight.eval_unchecked(z), 0.0);
                for o in out.iter_mut() {
                    *o = t;
                    t *= z.conj();
                }
            })?;
            let h = row
                .iter()
                .enumerate()
                .map(|(k, v)| v * (k + 1) as f64)
                .collect();
            (TaylorSeries::new(h), ratio, disk.id())
        }
    };

    // |φ|² = |h|² on the circle. For a single atom m δ_ζ it is m / |1 - ζ̄e|², and
    // log|a| = log|1 - ζ̄e| - ½ log(|1 - ζ̄e|² + m): the singular part is the
    // outer function 1 - ζ̄z itself, so only the smooth part is sampled.
    let single_atom = decomposition.as_ref().and_then(|d| {
        let atoms: Vec<_> = d.atoms().collect();
        (atoms.len() == 1).then(|| *atoms[0])
    });
    let nodes = circle.nodes();
    let a = match single_atom {
        Some(atom) => {
            let zc = atom.point.conj();
            let target: Vec<f64> = nodes
                .iter()
                .map(|&e| -0.5 * ((c(1.0, 0.0) - zc * e).norm_sqr() + atom.mass).ln())
                .collect();
            let factor = TaylorSeries::new(vec![c(1.0, 0.0), -zc]).with_order(order);
            factor.mul(&outer_function(&target, &circle, order)?)
        }
        None => {
            let target: Vec<f64> = nodes
                .iter()
                .map(|&e| -0.5 * h.evaluate(e).norm_sqr().ln_1p())
                .collect();
            outer_function(&target, &circle, order)?
        }
    };
    let b = h.shift().mul(&a);

    let pts = sample_points();
    let phi_samples = pts.iter().map(|&w| (w, w * h.evaluate(w))).collect();
    let max_b_modulus = pts
        .iter()
        .map(|&w| b.evaluate(w).norm())
        .fold(0.0, f64::max);
    let boundary_modulus = circle
        .nodes()
        .iter()
        .copied()
        .map(|e| a.evaluate(e).norm())
        .collect();
    let diagnostics = Diagnostics {
        rank_one_ratio,
        h0_deviation: (h.coeff(0) - 1.0).norm(),
        l1_deviation,
        max_b_modulus,
        a0: a.coeff(0).re,
        moment_source,
    };
    Ok(DbrModel {
        weight,
        phi_samples,
        h,
        a,
        b,
        boundary_modulus,
        diagnostics,
    })
}

/// [`build_model`] at the default grids and series order.
pub fn build_default(weight: &Weight) -> Result<DbrModel> {
    build_model(weight, &Grids::default(), DEFAULT_ORDER)
}

impl DbrModel {
    pub fn order(&self) -> usize {
        self.b.order()
    }

    /// `(1 - b(z) conj(b(w))) / (1 - z w̄)`.
    pub fn kernel(&self, z: Complex64, w: Complex64) -> Complex64 {
        (c(1.0, 0.0) - self.b.evaluate(z) * self.b.evaluate(w).conj())
            / (c(1.0, 0.0) - z * w.conj())
    }

    /// Taylor series in `z` of `k_w(z) = kernel(z, w)`.
    pub fn kernel_series(&self, w: Complex64) -> TaylorSeries {
        let g = TaylorSeries::geometric(w.conj(), self.order());
        g.sub(&self.b.mul(&g).scale(self.b.evaluate(w).conj()))
    }

    /// Same model with `b` replaced; used to show the isometry check can fail.
    pub fn with_b(&self, b: TaylorSeries) -> Self {
        Self { b, ..self.clone() }
    }

    /// Model invariants: `h_0 = 1`, `a(0) > 0`, `|b| <= 1` on the samples.
    pub fn invariants_hold(&self) -> bool {
        self.diagnostics.h0_deviation <= NORMALIZATION_TOLERANCE
            && self.a.coeff(0).re > 0.0
            && self.a.coeff(0).im.abs() <= 1e-12
            && self.diagnostics.max_b_modulus <= 1.0 + 1e-9
    }

    pub fn to_json(&self) -> DbrModelJson {
        DbrModelJson {
            weight: self.weight.label().to_string(),
            order: self.order(),
            h: (&self.h).into(),
            a: (&self.a).into(),
            b: (&self.b).into(),
            diagnostics: self.diagnostics.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsometryReport {
    pub passes: bool,
    /// `c* G c`, the `H(b)` norm squared.
    pub hb_norm_sq: f64,
    pub h2_norm_sq: f64,
    pub energy: f64,
    /// `|‖f‖²_{H(b)} - ‖f‖²_{H²} - D_ω(f)| / ‖f‖²_{H(b)}`; absolute when `f = 0`.
    pub gap: f64,
    pub min_eigenvalue: f64,
    pub tolerance: f64,
}

/// Gram matrix `G[i][j] = kernel(w_i, w_j) = ⟨k_{w_j}, k_{w_i}⟩`.
pub fn gram(model: &DbrModel, nodes: &[Complex64]) -> DMatrix<Complex64> {
    let n = nodes.len();
    DMatrix::from_fn(n, n, |i, j| model.kernel(nodes[i], nodes[j]))
}

/// Compares both sides of the norm identity on `f = Σ c_i k_{w_i}`.
pub fn verify_isometry(
    model: &DbrModel,
    nodes: &[Complex64],
    coeffs: &[Complex64],
    grid: &DiskGrid,
    tol: f64,
) -> Result<IsometryReport> {
    if nodes.is_empty() || nodes.len() != coeffs.len() {
        return domain(format!(
            "{} nodes and {} coefficients",
            nodes.len(),
            coeffs.len()
        ));
    }
    if let Some(w) = nodes.iter().find(|w| !(w.norm_sqr() < 1.0)) {
        return domain(format!("node {w} is not inside the open disk"));
    }
    for (i, a) in nodes.iter().enumerate() {
        if nodes[..i].contains(a) {
            return domain(format!("node {a} is repeated"));
        }
    }
    let g = gram(model, nodes);
    let herm = (&g + g.adjoint()) * c(0.5, 0.0);
    let min_eigenvalue = herm
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if !(min_eigenvalue > GRAM_TOLERANCE) {
        return Err(Error::DegenerateNodeSet { min_eigenvalue });
    }
    let cv = nalgebra::DVector::from_column_slice(coeffs);
    let hb_norm_sq = (cv.adjoint() * &g * &cv)[(0, 0)].re;

    let f = nodes
        .iter()
        .zip(coeffs)
        .fold(TaylorSeries::zero(model.order()), |acc, (&w, &ci)| {
            acc.add(&model.kernel_series(w).scale(ci))
        });
    let h2 = f.h2_norm_sq();
    let e = energy(&f, &model.weight, grid)?;
    let diff = (hb_norm_sq - h2 - e).abs();
    let gap = if hb_norm_sq > 0.0 {
        diff / hb_norm_sq
    } else {
        diff
    };
    Ok(IsometryReport {
        passes: gap <= tol,
        hb_norm_sq,
        h2_norm_sq: h2,
        energy: e,
        gap,
        min_eigenvalue,
        tolerance: tol,
    })
}
