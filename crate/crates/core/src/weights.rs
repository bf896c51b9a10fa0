//! Weights on the unit disk.
//!
//! The two families that make `D_ω` a de Branges–Rovnyak space are
//!
//! * the Poisson kernel of a boundary point, `(1 - |z|²) / |z - ζ|²` with `|ζ| = 1`;
//! * the Green function of an interior point, `log |(1 - ζ̄z) / (z - ζ)|` with `|ζ| < 1`;
//!
//! together with their positive multiples. Arbitrary nonnegative functions
//! enter as [`WeightKind::Custom`], and finite sums of the two families are
//! produced by [`GreenDecomposition::synthesize`].
//!
//! Weights are written on the command line in a small spec language:
//! `harm:<re>,<im>`, `log:<re>,<im>`, `scaled:<c>:<spec>`, `uniform` and
//! `const:<c>`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quadrature::{integrate_real, CircleGrid, DiskGrid, Rule};

/// Boundary points must be unimodular to this accuracy.
pub const UNIT_TOLERANCE: f64 = 1e-12;
/// Allowed negative margin in [`Weight::superharmonic_test`].
/// Geometric refinement levels toward a singularity at the origin.
const ORIGIN_LEVELS: usize = 24;
pub const SUPERHARMONIC_TOLERANCE: f64 = 1e-8;

type WeightFn = Arc<dyn Fn(Complex64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct CustomWeight {
    func: WeightFn,
    singularities: Vec<Complex64>,
    harmonic: bool,
    decomposition: Option<GreenDecomposition>,
}

impl fmt::Debug for CustomWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomWeight")
            .field("singularities", &self.singularities)
            .field("harmonic", &self.harmonic)
            .field("decomposition", &self.decomposition)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub enum WeightKind {
    HarmonicBoundary { zeta: Complex64 },
    LogGreen { zeta: Complex64 },
    Scaled { factor: f64, inner: Box<Weight> },
    Custom(CustomWeight),
}

#[derive(Debug, Clone)]
pub struct Weight {
    kind: WeightKind,
    label: String,
}

impl Weight {
    /// Poisson kernel of the boundary point `zeta`.
    pub fn harmonic_boundary(zeta: Complex64) -> Result<Self> {
        if (zeta.norm() - 1.0).abs() > UNIT_TOLERANCE {
            return domain(format!("boundary point {zeta} is not unimodular"));
        }
        Ok(Self {
            label: format!("harm:{},{}", zeta.re, zeta.im),
            kind: WeightKind::HarmonicBoundary { zeta },
        })
    }

    /// Green function of the disk with pole at `zeta`.
    pub fn log_green(zeta: Complex64) -> Result<Self> {
        if !(zeta.norm() < 1.0) {
            return domain(format!("pole {zeta} is not inside the open disk"));
        }
        Ok(Self {
            label: format!("log:{},{}", zeta.re, zeta.im),
            kind: WeightKind::LogGreen { zeta },
        })
    }

    pub fn scaled(factor: f64, inner: Weight) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return domain(format!("scale factor {factor} must be positive and finite"));
        }
        Ok(Self {
            label: format!("scaled:{factor}:{}", inner.label),
            kind: WeightKind::Scaled {
                factor,
                inner: Box::new(inner),
            },
        })
    }

    /// A user-supplied nonnegative function with an explicit list of
    /// singular points.
    pub fn custom<F>(label: impl Into<String>, f: F, singularities: Vec<Complex64>) -> Self
    where
        F: Fn(Complex64) -> f64 + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            kind: WeightKind::Custom(CustomWeight {
                func: Arc::new(f),
                singularities,
                harmonic: false,
                decomposition: None,
            }),
        }
    }

    /// Marks a custom weight as harmonic, which enables the dilation
    /// monotonicity assertion for it.
    pub fn with_harmonic(mut self, harmonic: bool) -> Self {
        if let WeightKind::Custom(c) = &mut self.kind {
            c.harmonic = harmonic;
        }
        self
    }

    pub fn constant(c: f64) -> Result<Self> {
        if !(c >= 0.0 && c.is_finite()) {
            return domain(format!(
                "constant weight {c} must be finite and nonnegative"
            ));
        }
        let label = if c == 1.0 {
            "uniform".to_string()
        } else {
            format!("const:{c}")
        };
        Ok(Self::custom(label, move |_| c, Vec::new()).with_harmonic(true))
    }

    /// `ω ≡ 1`.
    pub fn uniform() -> Self {
        Self::constant(1.0).expect("1 is a valid constant")
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Value at `z`, `|z| < 1`.
    pub fn eval(&self, z: Complex64) -> Result<f64> {
        if !(z.norm_sqr() < 1.0) {
            return domain(format!("{z} is not inside the open disk"));
        }
        let v = self.eval_unchecked(z);
        if v.is_nan() || v == f64::INFINITY || self.singularities().contains(&z) {
            return Err(Error::SingularPoint {
                label: self.label.clone(),
                point: z,
            });
        }
        if v < 0.0 {
            return domain(format!("weight `{}` is negative ({v}) at {z}", self.label));
        }
        Ok(v)
    }

    /// Formula value without domain checks; non-finite at singular points.
    /// Used in quadrature loops, which detect non-finite values themselves.
    pub fn eval_unchecked(&self, z: Complex64) -> f64 {
        match &self.kind {
            WeightKind::HarmonicBoundary { zeta } => (1.0 - z.norm_sqr()) / (z - zeta).norm_sqr(),
            WeightKind::LogGreen { zeta } => {
                let num = (Complex64::new(1.0, 0.0) - zeta.conj() * z).norm();
                let den = (z - zeta).norm();
                (num / den).ln()
            }
            WeightKind::Scaled { factor, inner } => factor * inner.eval_unchecked(z),
            WeightKind::Custom(c) => (c.func)(z),
        }
    }

    pub fn singularities(&self) -> Vec<Complex64> {
        match &self.kind {
            WeightKind::HarmonicBoundary { zeta } | WeightKind::LogGreen { zeta } => vec![*zeta],
            WeightKind::Scaled { inner, .. } => inner.singularities(),
            WeightKind::Custom(c) => c.singularities.clone(),
        }
    }

    pub fn is_harmonic(&self) -> bool {
        match &self.kind {
            WeightKind::HarmonicBoundary { .. } => true,
            WeightKind::LogGreen { .. } => false,
            WeightKind::Scaled { inner, .. } => inner.is_harmonic(),
            WeightKind::Custom(c) => c.harmonic,
        }
    }

    /// Atomic measures `μ`, `ν` with `-(1/4π)(1 - |z|²) Δω = μ + ν`, when the
    /// weight is built from the two catalog families.
    pub fn decomposition(&self) -> Option<GreenDecomposition> {
        match &self.kind {
            WeightKind::HarmonicBoundary { zeta } => Some(GreenDecomposition {
                mu: Vec::new(),
                nu: vec![Atom {
                    point: *zeta,
                    mass: 1.0,
                }],
            }),
            WeightKind::LogGreen { zeta } => Some(GreenDecomposition {
                mu: vec![Atom {
                    point: *zeta,
                    mass: 0.5 * (1.0 - zeta.norm_sqr()),
                }],
                nu: Vec::new(),
            }),
            WeightKind::Scaled { factor, inner } => {
                inner.decomposition().map(|d| d.scaled(*factor))
            }
            WeightKind::Custom(c) => c.decomposition.clone(),
        }
    }

    /// Radii of interior singular points away from the origin.
    pub fn singular_radii(&self) -> Vec<f64> {
        self.singularities()
            .iter()
            .map(|s| s.norm())
            .filter(|&r| r > 1e-9 && r < 1.0 - 1e-9)
            .collect()
    }

    /// Disk grid whose radial rule is split at every interior singular radius.
    /// A singularity at the origin gets geometric radial panels instead.
    pub fn adapted_grid(&self, radial_order: usize, angular_order: usize) -> Result<DiskGrid> {
        let levels = if self.singularities().iter().any(|s| s.norm() <= 1e-9) {
            ORIGIN_LEVELS
        } else {
            0
        };
        DiskGrid::builder(radial_order, angular_order)
            .breaks(&self.singular_radii())
            .origin_levels(levels)
            .build()
    }

    /// `∫ ω dA`.
    pub fn l1_norm(&self, grid: &DiskGrid) -> Result<f64> {
        integrate_real(grid, |z| self.eval_unchecked(z))
    }

    /// `ω / ‖ω‖₁`.
    pub fn normalize(&self, grid: &DiskGrid) -> Result<Weight> {
        let l1 = self.l1_norm(grid)?;
        if !(l1 > 0.0) {
            return Err(Error::DegenerateWeight(self.label.clone()));
        }
        Weight::scaled(1.0 / l1, self.clone())
    }

    /// Checks `ω(z₀) >= mean of ω on |z - z₀| = r` on every (center, radius)
    /// pair, up to [`SUPERHARMONIC_TOLERANCE`].
    pub fn superharmonic_test(
        &self,
        centers: &[Complex64],
        radii: &[f64],
        circle: &CircleGrid,
    ) -> Result<SuperharmonicReport> {
        let mut worst: Option<(f64, Complex64, f64)> = None;
        for &c in centers {
            let value = self.eval(c)?;
            for &r in radii {
                if !(r > 0.0) || c.norm() + r >= 1.0 {
                    return domain(format!("circle |z - {c}| = {r} does not lie in the disk"));
                }
                let mut mean = 0.0;
                for (&u, &w) in circle.nodes().iter().zip(circle.weights()) {
                    mean += w * self.eval(c + u * r)?;
                }
                let margin = value - mean;
                if worst.is_none_or(|(m, _, _)| margin < m) {
                    worst = Some((margin, c, r));
                }
            }
        }
        let (worst_margin, worst_center, worst_radius) =
            worst.unwrap_or((f64::INFINITY, Complex64::new(0.0, 0.0), 0.0));
        Ok(SuperharmonicReport {
            passes: worst_margin >= -SUPERHARMONIC_TOLERANCE,
            worst_margin,
            worst_violation: (-worst_margin).max(0.0),
            worst_center,
            worst_radius,
        })
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// Ten centers on a spiral at radii `0.05 + 0.06k` and five radii
/// `0.02 + 0.06i`. Every circle stays inside `|z| <= 0.85` and at distance
/// at least 0.03 from the origin, where a log weight may be singular.
pub fn superharmonic_lattice() -> (Vec<Complex64>, Vec<f64>) {
    let centers = (0..10)
        .map(|k| Complex64::from_polar(0.05 + 0.06 * k as f64, 0.37 + 0.9 * k as f64))
        .collect();
    (centers, vec![0.02, 0.08, 0.14, 0.20, 0.26])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuperharmonicReport {
    pub passes: bool,
    /// Most negative `ω(z₀) - mean`.
    pub worst_margin: f64,
    pub worst_violation: f64,
    pub worst_center: Complex64,
    pub worst_radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub point: Complex64,
    pub mass: f64,
}

/// Finitely many atoms `μ` in the disk and `ν` on the circle.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GreenDecomposition {
    pub mu: Vec<Atom>,
    pub nu: Vec<Atom>,
}

impl GreenDecomposition {
    pub fn new(mu: Vec<Atom>, nu: Vec<Atom>) -> Result<Self> {
        for a in mu.iter().chain(&nu) {
            if !(a.mass > 0.0 && a.mass.is_finite()) {
                return domain(format!("atom mass {} must be positive", a.mass));
            }
        }
        if let Some(a) = mu.iter().find(|a| !(a.point.norm() < 1.0)) {
            return domain(format!("interior atom {} is not in the open disk", a.point));
        }
        if let Some(a) = nu
            .iter()
            .find(|a| (a.point.norm() - 1.0).abs() > UNIT_TOLERANCE)
        {
            return domain(format!("boundary atom {} is not unimodular", a.point));
        }
        Ok(Self { mu, nu })
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty() && self.nu.is_empty()
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.mu.iter().chain(&self.nu)
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms().map(|a| a.mass).sum()
    }

    pub fn scaled(&self, c: f64) -> Self {
        let s = |v: &[Atom]| {
            v.iter()
                .map(|a| Atom {
                    point: a.point,
                    mass: a.mass * c,
                })
                .collect()
        };
        Self {
            mu: s(&self.mu),
            nu: s(&self.nu),
        }
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.mu.extend_from_slice(&other.mu);
        out.nu.extend_from_slice(&other.nu);
        out
    }

    /// Pointwise value of the Green potential of `μ` plus the Poisson
    /// integral of `ν`.
    pub fn potential(&self, z: Complex64) -> f64 {
        let one = Complex64::new(1.0, 0.0);
        let green: f64 = self
            .mu
            .iter()
            .map(|a| {
                let g = ((one - a.point.conj() * z).norm() / (a.point - z).norm()).ln();
                a.mass * g * 2.0 / (1.0 - a.point.norm_sqr())
            })
            .sum();
        let poisson: f64 = self
            .nu
            .iter()
            .map(|a| a.mass * (1.0 - z.norm_sqr()) / (a.point - z).norm_sqr())
            .sum();
        green + poisson
    }

    /// The weight whose Riesz measure data is `self`.
    pub fn synthesize(&self) -> Weight {
        let d = self.clone();
        let singularities = self.atoms().map(|a| a.point).collect();
        let label = format!(
            "synth(mu={},nu={})",
            fmt_atoms(&self.mu),
            fmt_atoms(&self.nu)
        );
        let mut w = Weight::custom(label, move |z| d.potential(z), singularities)
            .with_harmonic(self.mu.is_empty());
        if let WeightKind::Custom(c) = &mut w.kind {
            c.decomposition = Some(self.clone());
        }
        w
    }
}

fn fmt_atoms(atoms: &[Atom]) -> String {
    let parts: Vec<String> = atoms
        .iter()
        .map(|a| format!("{}{:+}i@{}", a.point.re, a.point.im, a.mass))
        .collect();
    format!("[{}]", parts.join(";"))
}

fn parse_f64(token: &str) -> Result<f64> {
    token
        .trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Parse {
            token: token.to_string(),
            message: "expected a finite number".into(),
        })
}

fn parse_point(token: &str) -> Result<Complex64> {
    let (re, im) = token.split_once(',').ok_or_else(|| Error::Parse {
        token: token.to_string(),
        message: "expected `<re>,<im>`".into(),
    })?;
    Ok(Complex64::new(parse_f64(re)?, parse_f64(im)?))
}

fn spec_error(token: &str, e: Error) -> Error {
    match e {
        Error::Parse { .. } => e,
        other => Error::Parse {
            token: token.to_string(),
            message: other.to_string(),
        },
    }
}

impl FromStr for Weight {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if spec == "uniform" {
            return Ok(Weight::uniform());
        }
        let (head, rest) = spec.split_once(':').ok_or_else(|| Error::Parse {
            token: spec.to_string(),
            message: "expected `harm:`, `log:`, `scaled:`, `const:` or `uniform`".into(),
        })?;
        match head {
            "harm" => {
                let p = parse_point(rest)?;
                if p.norm() == 0.0 {
                    return Err(Error::Parse {
                        token: rest.to_string(),
                        message: "boundary direction must be nonzero".into(),
                    });
                }
                Weight::harmonic_boundary(p / p.norm()).map_err(|e| spec_error(rest, e))
            }
            "log" => {
                let p = parse_point(rest)?;
                Weight::log_green(p).map_err(|e| spec_error(rest, e))
            }
            "const" => Weight::constant(parse_f64(rest)?).map_err(|e| spec_error(rest, e)),
            "scaled" => {
                let (c, inner) = rest.split_once(':').ok_or_else(|| Error::Parse {
                    token: rest.to_string(),
                    message: "expected `scaled:<c>:<spec>`".into(),
                })?;
                let c = parse_f64(c)?;
                let inner: Weight = inner.parse()?;
                Weight::scaled(c, inner).map_err(|e| spec_error(rest, e))
            }
            other => Err(Error::Parse {
                token: other.to_string(),
                message: "unknown weight family".into(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::E;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eval_examples() {
        let h = Weight::harmonic_boundary(c(1.0, 0.0)).unwrap();
        assert_eq!(h.eval(c(0.0, 0.0)).unwrap(), 1.0);
        let g = Weight::log_green(c(0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(g.eval(c(0.0, 1.0 / E)).unwrap(), 1.0, epsilon = 1e-15);
        let g = Weight::log_green(c(0.5, 0.0)).unwrap();
        assert_abs_diff_eq!(g.eval(c(0.0, 0.0)).unwrap(), 2f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn eval_errors() {
        let g = Weight::log_green(c(0.5, 0.0)).unwrap();
        assert!(matches!(
            g.eval(c(0.5, 0.0)),
            Err(Error::SingularPoint { .. })
        ));
        assert!(matches!(g.eval(c(1.0, 0.0)), Err(Error::Domain(_))));
        let neg = Weight::custom("neg", |z| z.re, vec![]);
        assert!(neg.eval(c(-0.5, 0.0)).is_err());
    }

    #[test]
    fn constructor_invariants() {
        assert!(Weight::harmonic_boundary(c(0.9, 0.0)).is_err());
        assert!(Weight::log_green(c(1.0, 0.0)).is_err());
        assert!(Weight::scaled(0.0, Weight::uniform()).is_err());
        assert!(Weight::constant(-1.0).is_err());
    }

    #[test]
    fn l1_norm_examples() {
        let grid = DiskGrid::new(120, 256).unwrap();
        for k in 0..3 {
            let h = Weight::harmonic_boundary(Complex64::from_polar(1.0, 1.1 * k as f64)).unwrap();
            assert_abs_diff_eq!(h.l1_norm(&grid).unwrap(), 1.0, epsilon = 1e-6);
        }
        let g = Weight::log_green(c(0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(g.l1_norm(&grid).unwrap(), 0.5, epsilon = 1e-6);
        let s = Weight::scaled(2.0, g).unwrap();
        assert_abs_diff_eq!(s.l1_norm(&grid).unwrap(), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn log_green_mass_with_breakpoint() {
        // int G(., zeta) dA = (1 - |zeta|^2) / 2
        let zeta = c(0.3, 0.5);
        let g = Weight::log_green(zeta).unwrap();
        let grid = g.adapted_grid(120, 256).unwrap();
        assert_abs_diff_eq!(
            g.l1_norm(&grid).unwrap(),
            0.5 * (1.0 - zeta.norm_sqr()),
            epsilon = 1e-12
        );
    }

    #[test]
    fn normalize_examples() {
        let grid = DiskGrid::new(120, 256).unwrap();
        let g = Weight::log_green(c(0.0, 0.0)).unwrap();
        let n = g.normalize(&grid).unwrap();
        assert_abs_diff_eq!(n.l1_norm(&grid).unwrap(), 1.0, epsilon = 1e-6);

        let h = Weight::harmonic_boundary(c(0.0, -1.0)).unwrap();
        let nh = h.normalize(&grid).unwrap();
        let z = c(0.2, 0.3);
        assert_abs_diff_eq!(nh.eval(z).unwrap(), h.eval(z).unwrap(), epsilon = 1e-6);

        let five = Weight::scaled(5.0, g.clone())
            .unwrap()
            .normalize(&grid)
            .unwrap();
        for z in [c(0.1, 0.0), c(-0.4, 0.6), c(0.0, 0.95)] {
            assert_abs_diff_eq!(five.eval(z).unwrap(), n.eval(z).unwrap(), epsilon = 1e-12);
        }

        let zero = Weight::constant(0.0).unwrap();
        assert!(matches!(
            zero.normalize(&grid),
            Err(Error::DegenerateWeight(_))
        ));
    }

    #[test]
    fn superharmonic_examples() {
        let circle = CircleGrid::new(512).unwrap();
        let (centers, radii) = superharmonic_lattice();

        let cap = Weight::custom("1-|z|^2", |z| 1.0 - z.norm_sqr(), vec![]);
        assert!(
            cap.superharmonic_test(&centers, &radii, &circle)
                .unwrap()
                .passes
        );

        let bowl = Weight::custom("|z|^2", |z| z.norm_sqr(), vec![]);
        let r = bowl
            .superharmonic_test(&[c(0.0, 0.0)], &[0.1], &circle)
            .unwrap();
        assert!(!r.passes);
        assert_abs_diff_eq!(r.worst_violation, 0.01, epsilon = 1e-12);

        let g = Weight::log_green(c(0.4, 0.0)).unwrap();
        assert!(
            g.superharmonic_test(&centers, &radii, &circle)
                .unwrap()
                .passes
        );
        let h = Weight::harmonic_boundary(c(1.0, 0.0)).unwrap();
        let rh = h.superharmonic_test(&centers, &radii, &circle).unwrap();
        assert!(rh.passes);
        assert!(rh.worst_margin.abs() < 1e-8);

        assert!(bowl
            .superharmonic_test(&[c(0.8, 0.0)], &[0.3], &circle)
            .is_err());
    }

    #[test]
    fn synthesize_examples() {
        let z0 = c(0.3, -0.2);
        let d = GreenDecomposition::new(
            vec![Atom {
                point: z0,
                mass: 0.5 * (1.0 - z0.norm_sqr()),
            }],
            vec![],
        )
        .unwrap();
        let w = d.synthesize();
        let g = Weight::log_green(z0).unwrap();
        for z in [c(0.0, 0.0), c(0.5, 0.5), c(-0.9, 0.1)] {
            assert_abs_diff_eq!(w.eval(z).unwrap(), g.eval(z).unwrap(), epsilon = 1e-12);
        }
        assert_eq!(w.singularities(), vec![z0]);
        assert!(!w.is_harmonic());

        let zeta = Complex64::from_polar(1.0, 2.0);
        let d = GreenDecomposition::new(
            vec![],
            vec![Atom {
                point: zeta,
                mass: 1.0,
            }],
        )
        .unwrap();
        let w = d.synthesize();
        let h = Weight::harmonic_boundary(zeta).unwrap();
        for z in [c(0.0, 0.0), c(0.5, 0.5), c(-0.9, 0.1)] {
            assert_abs_diff_eq!(w.eval(z).unwrap(), h.eval(z).unwrap(), epsilon = 1e-12);
        }
        assert!(w.is_harmonic());

        let empty = GreenDecomposition::default().synthesize();
        assert_eq!(empty.eval(c(0.2, 0.1)).unwrap(), 0.0);

        assert!(GreenDecomposition::new(
            vec![Atom {
                point: z0,
                mass: -1.0
            }],
            vec![]
        )
        .is_err());
        assert!(GreenDecomposition::new(
            vec![],
            vec![Atom {
                point: z0,
                mass: 1.0
            }]
        )
        .is_err());
    }

    #[test]
    fn synthesize_is_additive() {
        let a = GreenDecomposition::new(
            vec![Atom {
                point: c(0.1, 0.2),
                mass: 0.7,
            }],
            vec![Atom {
                point: c(0.0, 1.0),
                mass: 0.2,
            }],
        )
        .unwrap();
        let b = GreenDecomposition::new(
            vec![Atom {
                point: c(-0.5, 0.0),
                mass: 1.3,
            }],
            vec![],
        )
        .unwrap();
        let (wa, wb, wab) = (a.synthesize(), b.synthesize(), a.union(&b).synthesize());
        for z in [c(0.0, 0.0), c(0.3, -0.3), c(0.7, 0.6)] {
            assert_abs_diff_eq!(
                wab.eval(z).unwrap(),
                wa.eval(z).unwrap() + wb.eval(z).unwrap(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn catalog_decompositions() {
        let zeta = c(0.6, 0.0);
        let g = Weight::scaled(3.0, Weight::log_green(zeta).unwrap()).unwrap();
        let d = g.decomposition().unwrap();
        assert!(d.nu.is_empty());
        assert_abs_diff_eq!(d.mu[0].mass, 3.0 * 0.5 * 0.64, epsilon = 1e-15);
        assert!(Weight::uniform().decomposition().is_none());
    }

    #[test]
    fn log_green_positive_and_unbounded() {
        let zeta = c(-0.2, 0.4);
        let g = Weight::log_green(zeta).unwrap();
        for k in 1..8 {
            let d = 10f64.powi(-k);
            let v = g.eval(zeta + c(d, 0.0)).unwrap();
            assert!(v > 0.0);
            assert!(v > (k as f64) * 10f64.ln() - 1.0);
        }
        assert!(g.eval(c(0.99, 0.0)).unwrap() > 0.0);
    }

    #[test]
    fn parse_specs() {
        let h: Weight = "harm:1,0".parse().unwrap();
        assert!(matches!(h.kind(), WeightKind::HarmonicBoundary { zeta } if *zeta == c(1.0, 0.0)));
        let h: Weight = "harm:3,4".parse().unwrap();
        assert!(
            matches!(h.kind(), WeightKind::HarmonicBoundary { zeta } if (*zeta - c(0.6, 0.8)).norm() < 1e-15)
        );
        let g: Weight = "log:0.4,0".parse().unwrap();
        assert_eq!(g.label(), "log:0.4,0");
        let s: Weight = "scaled:2:log:0,0".parse().unwrap();
        assert!(matches!(s.kind(), WeightKind::Scaled { factor, .. } if *factor == 2.0));
        assert_eq!(s.label(), "scaled:2:log:0,0");
        let u: Weight = "uniform".parse().unwrap();
        assert!(u.is_harmonic());

        for (bad, token) in [
            ("log:1,0", "1,0"),
            ("harm:x,0", "x"),
            ("bogus:1,0", "bogus"),
            ("harm:1", "1"),
            ("scaled:-1:uniform", "-1:uniform"),
            ("harm:0,0", "0,0"),
        ] {
            match bad.parse::<Weight>() {
                Err(Error::Parse { token: t, .. }) => assert_eq!(t, token, "{bad}"),
                other => panic!("{bad}: {other:?}"),
            }
        }
    }
}
