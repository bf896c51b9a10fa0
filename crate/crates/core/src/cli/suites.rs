use std::cell::OnceCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use super::report::{Check, Comparison, SuiteReport};
use super::{RunConfig, Suite};
use crate::dbr::{
    best_rank_one, build_model, laplacian_identity_check, phi_modulus_sq, verify_h_identity,
    verify_isometry, DbrModel, Grids, NORMALIZATION_TOLERANCE, RANK_ONE_TOLERANCE,
};
use crate::dirichlet::dilation_report;
use crate::error::{Error, Result};
use crate::moments::{tensor_diag_check, u_moments, weak_mult_check, MomentTable};
use crate::quadrature::{CircleGrid, DiskGrid, Rule};
use crate::series::TaylorSeries;
use crate::weights::{superharmonic_lattice, Weight};

/// Radii used by the dilation check.
pub const DILATION_RADII: [f64; 5] = [0.2, 0.4, 0.6, 0.8, 0.95];
pub const LAPLACIAN_STEP: f64 = 1e-3;
/// Steps for the convergence-order estimate; smaller steps are dominated by rounding.
pub const ORDER_STEPS: (f64, f64) = (1e-2, 5e-3);
const SUPERHARMONIC_CIRCLE: usize = 512;
const TRIALS: usize = 20;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn point(z: Complex64) -> Value {
    json!([z.re, z.im])
}

/// Uniform in the disk of radius `r`.
fn random_in_disk(rng: &mut ChaCha8Rng, r: f64) -> Complex64 {
    let rho = r * rng.random::<f64>().sqrt();
    Complex64::from_polar(rho, 2.0 * PI * rng.random::<f64>())
}

fn random_coeff(rng: &mut ChaCha8Rng) -> Complex64 {
    c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// Sunflower points filling `|w| <= r`.
pub fn spiral_points(n: usize, r: f64) -> Vec<Complex64> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| Complex64::from_polar(r * ((k as f64 + 0.5) / n as f64).sqrt(), golden * k as f64))
        .collect()
}

/// Shared state of one `verify` run; the model is built at most once.
pub(crate) struct Context<'a> {
    config: &'a RunConfig,
    weight: Weight,
    disk: DiskGrid,
    model: OnceCell<Result<DbrModel>>,
}

impl<'a> Context<'a> {
    pub(crate) fn new(config: &'a RunConfig, weight: Weight) -> Result<Self> {
        let disk = weight.adapted_grid(config.radial_order, config.angular_order)?;
        Ok(Self {
            config,
            weight,
            disk,
            model: OnceCell::new(),
        })
    }

    fn tol(&self, name: &str) -> f64 {
        self.config.tolerances[name]
    }

    fn inputs(&self) -> Map<String, Value> {
        let mut m = Map::new();
        m.insert("weight".into(), json!(self.weight.label()));
        m.insert("grid".into(), json!(self.disk.id()));
        m
    }

    fn with(&self, extra: Value) -> Map<String, Value> {
        let mut m = self.inputs();
        if let Value::Object(o) = extra {
            m.extend(o);
        }
        m
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(stream);
        rng
    }

    fn grids(&self) -> Grids {
        Grids {
            radial_order: self.config.radial_order,
            angular_order: self.config.angular_order,
            ..Grids::default()
        }
    }

    fn model(&self) -> &Result<DbrModel> {
        self.model
            .get_or_init(|| build_model(&self.weight, &self.grids(), self.config.order))
    }

    fn normalized_u(&self, grid: &DiskGrid) -> Result<MomentTable> {
        u_moments(
            &self.weight.normalize(grid)?,
            grid,
            self.config.moment_order,
        )
    }

    pub(crate) fn run(&self, suite: Suite) -> SuiteReport {
        let checks = match suite {
            Suite::Moments => self.moments(),
            Suite::Tensor => self.tensor(),
            Suite::Dirichlet => self.dirichlet(),
            Suite::Dbr => self.dbr(),
            Suite::Isometry => self.isometry(),
            Suite::All => unreachable!("expanded by the caller"),
        };
        SuiteReport::new(suite.name(), checks)
    }

    fn moments(&self) -> Vec<Check> {
        let mut out = Vec::new();
        let inputs = self.inputs();
        let tol_n = self.tol("normalization");
        out.push(match self.weight.l1_norm(&self.disk) {
            Ok(l1) => match self.weight.decomposition() {
                Some(d) => Check::measured(
                    "moments.l1_norm",
                    self.with(json!({"l1": l1, "atomic_mass": d.total_mass()})),
                    (l1 - d.total_mass()).abs(),
                    tol_n,
                    Comparison::Le,
                ),
                None => Check::measured(
                    "moments.l1_norm",
                    self.with(json!({"l1": l1})),
                    l1,
                    0.0,
                    Comparison::Ge,
                ),
            },
            Err(e) => Check::failed("moments.l1_norm", inputs.clone(), tol_n, e.to_string()),
        });

        let tol = self.tol("moments");
        let order = self.config.moment_order;
        let coarse = self
            .normalized_u(&self.disk)
            .map(|m| weak_mult_check(&m, tol));
        let fine_grid = self.disk.refined();
        let fine = fine_grid
            .as_ref()
            .map_err(Clone::clone)
            .and_then(|g| self.normalized_u(g))
            .map(|m| weak_mult_check(&m, tol));
        match &coarse {
            Ok(r) => out.push(Check::measured(
                "moments.weak_mult",
                self.with(json!({"order": order, "table": "u", "worst": [r.worst.0, r.worst.1]})),
                r.worst.2,
                tol,
                Comparison::Le,
            )),
            Err(e) => out.push(Check::failed(
                "moments.weak_mult",
                inputs.clone(),
                tol,
                e.to_string(),
            )),
        }
        match (&coarse, &fine, &fine_grid) {
            (Ok(rc), Ok(rf), Ok(g)) => {
                let mut m = self.with(json!({
                    "order": order,
                    "table": "u",
                    "worst": [rf.worst.0, rf.worst.1],
                    "coarse_residual": rc.worst.2,
                }));
                m.insert("grid".into(), json!(g.id()));
                out.push(Check::measured(
                    "moments.weak_mult_refined",
                    m,
                    rf.worst.2,
                    tol,
                    Comparison::Le,
                ));
            }
            (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => out.push(Check::failed(
                "moments.weak_mult_refined",
                inputs,
                tol,
                e.to_string(),
            )),
        }
        out
    }

    fn tensor(&self) -> Vec<Check> {
        let tol = self.tol("tensor");
        let order = self.config.moment_order;
        let r = self
            .normalized_u(&self.disk)
            .and_then(|m| tensor_diag_check(&m, tol));
        vec![match r {
            Ok(r) => Check::measured(
                "tensor.diag",
                self.with(json!({
                    "order": order,
                    "table": "u",
                    "worst": [r.worst.0, r.worst.1, r.worst.2, r.worst.3],
                })),
                r.worst.4,
                tol,
                Comparison::Le,
            ),
            Err(e) => Check::failed("tensor.diag", self.inputs(), tol, e.to_string()),
        }]
    }

    fn dirichlet(&self) -> Vec<Check> {
        let mut out = Vec::new();
        let tol = self.tol("superharmonic");
        let (centers, radii) = superharmonic_lattice();
        let circle = CircleGrid::new(SUPERHARMONIC_CIRCLE).expect("positive size");
        let base = json!({"centers": centers.len(), "radii": radii, "circle": circle.id()});
        out.push(
            match self.weight.superharmonic_test(&centers, &radii, &circle) {
                Ok(r) => {
                    let mut m = self.with(base);
                    m.insert("worst_center".into(), point(r.worst_center));
                    m.insert("worst_radius".into(), json!(r.worst_radius));
                    Check::measured(
                        "dirichlet.superharmonic",
                        m,
                        r.worst_violation,
                        tol,
                        Comparison::Le,
                    )
                }
                Err(e) => Check::failed(
                    "dirichlet.superharmonic",
                    self.with(base),
                    tol,
                    e.to_string(),
                ),
            },
        );

        let tol = self.tol("dilation");
        let mut rng = self.rng(1);
        let mut worst = 0.0f64;
        let mut error = None;
        for _ in 0..10 {
            let degree = rng.random_range(0..=10usize);
            let f = TaylorSeries::new((0..=degree).map(|_| random_coeff(&mut rng)).collect());
            match dilation_report(&f, &self.weight, &DILATION_RADII, &self.disk) {
                Ok(r) => worst = worst.max(r.worst_decrease),
                Err(e) => {
                    error = Some(e);
                    break;
                }
            }
        }
        let inputs = self.with(json!({
            "polynomials": 10, "max_degree": 10, "radii": DILATION_RADII,
            "seed": self.config.seed, "stream": 1,
        }));
        out.push(match error {
            None => Check::measured("dirichlet.dilation", inputs, worst, tol, Comparison::Le),
            Some(e) => Check::failed("dirichlet.dilation", inputs, tol, e.to_string()),
        });
        out
    }

    fn dbr(&self) -> Vec<Check> {
        let mut out = Vec::new();
        let points = spiral_points(25, 0.8);
        let model = self.model();
        let h = match model {
            Ok(m) => {
                let d = &m.diagnostics;
                let inputs = self.with(json!({
                    "order": self.config.order,
                    "moment_source": d.moment_source,
                    "circle": self.grids().circle_order,
                }));
                out.push(Check::measured(
                    "dbr.rank_one",
                    inputs.clone(),
                    d.rank_one_ratio,
                    RANK_ONE_TOLERANCE,
                    Comparison::Le,
                ));
                out.push(Check::measured(
                    "dbr.h0",
                    inputs.clone(),
                    d.h0_deviation,
                    NORMALIZATION_TOLERANCE,
                    Comparison::Le,
                ));
                out.push(Check::measured(
                    "dbr.b_bound",
                    self.with(json!({"order": self.config.order, "sample_radius": crate::dbr::B_SAMPLE_RADIUS})),
                    d.max_b_modulus,
                    1.0,
                    Comparison::Le,
                ));
                out.push(Check::measured(
                    "dbr.a0_positive",
                    inputs,
                    d.a0,
                    f64::MIN_POSITIVE,
                    Comparison::Ge,
                ));
                Some((m.h.clone(), "model"))
            }
            Err(e) => {
                out.push(Check::failed(
                    "dbr.rank_one",
                    self.with(json!({"order": self.config.order})),
                    RANK_ONE_TOLERANCE,
                    e.to_string(),
                ));
                // No h exists; the identity is tested against the best rank-one fit.
                self.normalized_u(&self.disk)
                    .ok()
                    .map(|m| (best_rank_one(&m).0, "best_rank_one"))
            }
        };

        let normalized = match model {
            Ok(m) => Ok(m.weight.clone()),
            Err(_) => self.weight.normalize(&self.disk),
        };
        let tol = self.tol("h_identity");
        let tol_phi = self.tol("phi");
        match (h, normalized) {
            (Some((h, source)), Ok(w)) => {
                let inputs = self
                    .with(json!({"points": points.len(), "max_radius": 0.8, "h_source": source}));
                out.push(match verify_h_identity(&w, &h, &points, &self.disk, tol) {
                    Ok(r) => {
                        let mut m = inputs.clone();
                        m.insert("worst_point".into(), point(r.worst_point));
                        Check::measured("dbr.h_identity", m, r.worst_residual, tol, Comparison::Le)
                    }
                    Err(e) => Check::failed("dbr.h_identity", inputs.clone(), tol, e.to_string()),
                });
                let phi = points
                    .iter()
                    .map(|&p| {
                        phi_modulus_sq(p, &w, &self.disk)
                            .map(|v| (v - (p * h.evaluate(p)).norm_sqr()).abs())
                    })
                    .collect::<Result<Vec<f64>>>();
                out.push(match phi {
                    Ok(v) => Check::measured(
                        "dbr.phi_modulus",
                        inputs,
                        v.into_iter().fold(0.0, f64::max),
                        tol_phi,
                        Comparison::Le,
                    ),
                    Err(e) => Check::failed("dbr.phi_modulus", inputs, tol_phi, e.to_string()),
                });
            }
            (_, Err(e)) => out.push(Check::failed(
                "dbr.h_identity",
                self.inputs(),
                tol,
                e.to_string(),
            )),
            (None, _) => out.push(Check::failed(
                "dbr.h_identity",
                self.inputs(),
                tol,
                "no moment table for a rank-one fit".into(),
            )),
        }

        out.extend(self.laplacian());
        out
    }

    fn laplacian(&self) -> Vec<Check> {
        let tol = self.tol("laplacian");
        let tol_order = self.tol("laplacian_order");
        let mut rng = self.rng(2);
        let pairs: Vec<(Complex64, Complex64)> = (0..TRIALS)
            .map(|_| (random_in_disk(&mut rng, 0.6), random_in_disk(&mut rng, 0.6)))
            .collect();
        let inputs = json!({
            "pairs": TRIALS, "max_radius": 0.6, "seed": self.config.seed, "stream": 2,
        });
        let errors = pairs
            .iter()
            .map(|&(z, w)| {
                Ok((
                    laplacian_identity_check(z, w, LAPLACIAN_STEP)?,
                    laplacian_identity_check(z, w, ORDER_STEPS.0)?,
                    laplacian_identity_check(z, w, ORDER_STEPS.1)?,
                ))
            })
            .collect::<Result<Vec<_>>>();
        let mut m = Map::new();
        if let Value::Object(o) = inputs {
            m.extend(o);
        }
        match errors {
            Ok(errs) => {
                let worst = errs.iter().map(|e| e.0).fold(0.0, f64::max);
                let order_dev = errs
                    .iter()
                    .map(|e| {
                        ((e.1 / e.2).log2() / (ORDER_STEPS.0 / ORDER_STEPS.1).log2() - 2.0).abs()
                    })
                    .fold(0.0, f64::max);
                let mut mo = m.clone();
                mo.insert("steps".into(), json!([ORDER_STEPS.0, ORDER_STEPS.1]));
                m.insert("step".into(), json!(LAPLACIAN_STEP));
                vec![
                    Check::measured("dbr.laplacian", m, worst, tol, Comparison::Le),
                    Check::measured(
                        "dbr.laplacian_order",
                        mo,
                        order_dev,
                        tol_order,
                        Comparison::Le,
                    ),
                ]
            }
            Err(e) => vec![Check::failed("dbr.laplacian", m, tol, e.to_string())],
        }
    }

    fn isometry(&self) -> Vec<Check> {
        let tol = self.tol("isometry");
        let tol_f = self.tol("falsification");
        let model = match self.model() {
            Ok(m) => m,
            Err(e) => {
                return vec![Check::failed(
                    "isometry.model",
                    self.with(json!({"order": self.config.order})),
                    tol,
                    e.to_string(),
                )]
            }
        };
        let wrong = model.with_b(TaylorSeries::zero(model.order()));
        let mut rng = self.rng(3);
        let mut gaps = Vec::with_capacity(TRIALS);
        let mut wrong_gaps = Vec::with_capacity(TRIALS);
        let inputs = self.with(json!({
            "trials": TRIALS, "max_nodes": 4, "max_radius": 0.6,
            "order": self.config.order, "seed": self.config.seed, "stream": 3,
        }));
        for t in 0..TRIALS {
            let size = 1 + t % 4;
            let coeffs: Vec<Complex64> = (0..size).map(|_| random_coeff(&mut rng)).collect();
            // Redraw node sets whose Gram matrix is numerically singular.
            let result = loop {
                let nodes: Vec<Complex64> =
                    (0..size).map(|_| random_in_disk(&mut rng, 0.6)).collect();
                match verify_isometry(model, &nodes, &coeffs, &self.disk, tol) {
                    Err(Error::DegenerateNodeSet { .. }) => continue,
                    Err(e) => break Err(e),
                    Ok(r) => {
                        break verify_isometry(&wrong, &nodes, &coeffs, &self.disk, tol)
                            .map(|w| (r.gap, w.gap))
                    }
                }
            };
            match result {
                Ok((g, wg)) => {
                    gaps.push(g);
                    wrong_gaps.push(wg);
                }
                Err(e) => return vec![Check::failed("isometry.gap", inputs, tol, e.to_string())],
            }
        }
        let worst = gaps.iter().copied().fold(0.0, f64::max);
        wrong_gaps.sort_by(f64::total_cmp);
        let median = 0.5 * (wrong_gaps[TRIALS / 2 - 1] + wrong_gaps[TRIALS / 2]);
        let mut wi = inputs.clone();
        wi.insert("b".into(), json!("zero"));
        wi.insert("statistic".into(), json!("median"));
        vec![
            Check::measured("isometry.gap", inputs, worst, tol, Comparison::Le),
            Check::measured("isometry.wrong_b_gap", wi, median, tol_f, Comparison::Ge),
        ]
    }
}
