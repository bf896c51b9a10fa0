//! Command-line front end: `verify`, `moments`, `dbr build` and `weights info`.
//!
//! Exit codes are 0 when everything passed, 1 when a check or computation
//! failed and 2 for usage errors. `verify` runs its suites in the order
//! moments, tensor, dirichlet, dbr, isometry.

mod report;
mod suites;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::builder::TypedValueParser;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

pub use report::{strip_timings, Check, Comparison, Report, SuiteReport, Timings};
pub use suites::{spiral_points, DILATION_RADII, LAPLACIAN_STEP, ORDER_STEPS};

use crate::dbr::{build_model, Grids};
use crate::error::Error;
use crate::moments::{measure_moments, u_moments, MomentTable, DEFAULT_MOMENT_ORDER};
use crate::quadrature::{
    CircleGrid, Rule, DEFAULT_ANGULAR_ORDER, DEFAULT_CIRCLE_ORDER, DEFAULT_RADIAL_ORDER,
};
use crate::series::DEFAULT_ORDER;
use crate::weights::{superharmonic_lattice, Weight};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Default tolerances, overridable with `--tol name=value`.
pub const DEFAULT_TOLERANCES: [(&str, f64); 11] = [
    ("normalization", 1e-6),
    ("moments", 1e-6),
    ("tensor", 1e-6),
    ("superharmonic", 1e-8),
    ("dilation", 1e-8),
    ("h_identity", 1e-4),
    ("phi", 1e-4),
    ("laplacian", 1e-5),
    ("laplacian_order", 0.2),
    ("isometry", 1e-2),
    ("falsification", 0.1),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Moments,
    Tensor,
    Dirichlet,
    Dbr,
    Isometry,
    All,
}

impl Suite {
    pub const ORDER: [Suite; 5] = [
        Suite::Moments,
        Suite::Tensor,
        Suite::Dirichlet,
        Suite::Dbr,
        Suite::Isometry,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Moments => "moments",
            Suite::Tensor => "tensor",
            Suite::Dirichlet => "dirichlet",
            Suite::Dbr => "dbr",
            Suite::Isometry => "isometry",
            Suite::All => "all",
        }
    }

    fn expand(self) -> Vec<Suite> {
        match self {
            Suite::All => Self::ORDER.to_vec(),
            s => vec![s],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableKind {
    /// Moments of `ω dA`.
    Measure,
    /// Moments of `u = -(1/4π)(1 - |z|²) Δω`.
    U,
}

fn weight_spec(s: &str) -> Result<String, Error> {
    s.parse::<Weight>()?;
    Ok(s.trim().to_string())
}

fn tol_override(s: &str) -> Result<(String, f64), String> {
    let (name, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected <name>=<value>, got `{s}`"))?;
    if !DEFAULT_TOLERANCES.iter().any(|(n, _)| *n == name) {
        let known: Vec<&str> = DEFAULT_TOLERANCES.iter().map(|(n, _)| *n).collect();
        return Err(format!(
            "unknown tolerance `{name}` (known: {})",
            known.join(", ")
        ));
    }
    let v: f64 = v
        .parse()
        .map_err(|_| format!("tolerance `{name}` needs a number, got `{v}`"))?;
    if !(v.is_finite() && v >= 0.0) {
        return Err(format!("tolerance `{name}` must be finite and nonnegative"));
    }
    Ok((name.to_string(), v))
}

#[derive(Debug, Args)]
struct GridArgs {
    /// Gauss–Legendre order in the radius.
    #[arg(long, default_value_t = DEFAULT_RADIAL_ORDER,
          value_parser = clap::value_parser!(u32).range(1..=4096).map(|v| v as usize))]
    radial: usize,
    /// Base number of angles per ring.
    #[arg(long, default_value_t = DEFAULT_ANGULAR_ORDER,
          value_parser = clap::value_parser!(u32).range(4..=65536).map(|v| v as usize))]
    angular: usize,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Parser)]
#[command(
    name = "dbrlab",
    version,
    about = "Weighted Dirichlet spaces and de Branges–Rovnyak models, checked numerically"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run verification suites and print a report.
    Verify(VerifyArgs),
    /// Print a moment table.
    Moments(MomentsArgs),
    /// de Branges–Rovnyak models.
    #[command(subcommand)]
    Dbr(DbrCommand),
    /// Weight diagnostics.
    #[command(subcommand)]
    Weights(WeightsCommand),
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    suite: Suite,
    /// `harm:<re>,<im>`, `log:<re>,<im>`, `scaled:<c>:<spec>`, `const:<c>` or `uniform`.
    #[arg(long, default_value = "harm:1,0", value_parser = weight_spec)]
    weight: String,
    /// Taylor series order N.
    #[arg(long, default_value_t = DEFAULT_ORDER,
          value_parser = clap::value_parser!(u32).range(1..=1024).map(|v| v as usize))]
    order: usize,
    /// Moment table order.
    #[arg(long, default_value_t = DEFAULT_MOMENT_ORDER,
          value_parser = clap::value_parser!(u32).range(1..=32).map(|v| v as usize))]
    moment_order: usize,
    #[command(flatten)]
    grid: GridArgs,
    /// Override a tolerance, e.g. `--tol isometry=1e-3`. Repeatable.
    #[arg(long = "tol", value_parser = tol_override)]
    tol: Vec<(String, f64)>,
    /// Seed for the random test data.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct MomentsArgs {
    #[arg(long, default_value = "harm:1,0", value_parser = weight_spec)]
    weight: String,
    /// Moment table order.
    #[arg(long, default_value_t = DEFAULT_MOMENT_ORDER,
          value_parser = clap::value_parser!(u32).range(0..=64).map(|v| v as usize))]
    order: usize,
    #[arg(long, value_enum, default_value_t = TableKind::Measure)]
    kind: TableKind,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Subcommand)]
enum DbrCommand {
    /// Build `h`, `a` and `b` for a weight and print the model.
    Build(BuildArgs),
}

#[derive(Debug, Args)]
struct BuildArgs {
    #[arg(long, default_value = "harm:1,0", value_parser = weight_spec)]
    weight: String,
    #[arg(long, default_value_t = DEFAULT_ORDER,
          value_parser = clap::value_parser!(u32).range(1..=1024).map(|v| v as usize))]
    order: usize,
    /// Nodes on the circle used for the outer function.
    #[arg(long, default_value_t = DEFAULT_CIRCLE_ORDER,
          value_parser = clap::value_parser!(u32).range(16..=1 << 22).map(|v| v as usize))]
    circle: usize,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Subcommand)]
enum WeightsCommand {
    /// Mass, singularities, decomposition and superharmonicity of a weight.
    Info(InfoArgs),
}

#[derive(Debug, Args)]
struct InfoArgs {
    #[arg(long, default_value = "harm:1,0", value_parser = weight_spec)]
    weight: String,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    output: OutputArgs,
}

/// Validated `verify` configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub suite: Suite,
    pub weight_spec: String,
    pub order: usize,
    pub moment_order: usize,
    pub radial_order: usize,
    pub angular_order: usize,
    pub tolerances: BTreeMap<String, f64>,
    pub seed: u64,
    #[serde(skip)]
    pub output_path: Option<PathBuf>,
    #[serde(skip)]
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            suite: Suite::All,
            weight_spec: "harm:1,0".into(),
            order: DEFAULT_ORDER,
            moment_order: DEFAULT_MOMENT_ORDER,
            radial_order: DEFAULT_RADIAL_ORDER,
            angular_order: DEFAULT_ANGULAR_ORDER,
            tolerances: default_tolerances(),
            seed: 0,
            output_path: None,
            format: Format::Json,
        }
    }
}

pub fn default_tolerances() -> BTreeMap<String, f64> {
    DEFAULT_TOLERANCES
        .iter()
        .map(|(n, v)| (n.to_string(), *v))
        .collect()
}

/// Parsed command line.
#[derive(Debug, Clone, PartialEq)]
pub enum Invocation {
    Verify(RunConfig),
    Moments {
        weight_spec: String,
        order: usize,
        kind: TableKind,
        radial_order: usize,
        angular_order: usize,
        output_path: Option<PathBuf>,
        format: Format,
    },
    DbrBuild {
        weight_spec: String,
        order: usize,
        grids: Grids,
        output_path: Option<PathBuf>,
        format: Format,
    },
    WeightsInfo {
        weight_spec: String,
        radial_order: usize,
        angular_order: usize,
        output_path: Option<PathBuf>,
        format: Format,
    },
}

/// Parses `argv` (program name first). Errors carry clap's usage message;
/// help and version requests come back as errors of the matching kind.
pub fn parse_args<I, T>(argv: I) -> Result<Invocation, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    Ok(match cli.command {
        Command::Verify(a) => {
            let mut tolerances = default_tolerances();
            tolerances.extend(a.tol);
            Invocation::Verify(RunConfig {
                suite: a.suite,
                weight_spec: a.weight,
                order: a.order,
                moment_order: a.moment_order,
                radial_order: a.grid.radial,
                angular_order: a.grid.angular,
                tolerances,
                seed: a.seed,
                output_path: a.output.out,
                format: a.output.format,
            })
        }
        Command::Moments(a) => Invocation::Moments {
            weight_spec: a.weight,
            order: a.order,
            kind: a.kind,
            radial_order: a.grid.radial,
            angular_order: a.grid.angular,
            output_path: a.output.out,
            format: a.output.format,
        },
        Command::Dbr(DbrCommand::Build(a)) => Invocation::DbrBuild {
            weight_spec: a.weight,
            order: a.order,
            grids: Grids {
                radial_order: a.grid.radial,
                angular_order: a.grid.angular,
                circle_order: a.circle,
            },
            output_path: a.output.out,
            format: a.output.format,
        },
        Command::Weights(WeightsCommand::Info(a)) => Invocation::WeightsInfo {
            weight_spec: a.weight,
            radial_order: a.grid.radial,
            angular_order: a.grid.angular,
            output_path: a.output.out,
            format: a.output.format,
        },
    })
}

/// Runs the selected suites. Errors inside a suite become failed checks.
pub fn run(config: &RunConfig) -> Report {
    let start = Instant::now();
    let echo = serde_json::to_value(config).expect("config serializes");
    let mut timings = Timings::default();
    let suites = match config
        .weight_spec
        .parse::<Weight>()
        .and_then(|w| suites::Context::new(config, w))
    {
        Ok(ctx) => config
            .suite
            .expand()
            .into_iter()
            .map(|s| {
                let t = Instant::now();
                let r = ctx.run(s);
                timings
                    .suites
                    .insert(s.name().into(), t.elapsed().as_secs_f64() * 1e3);
                r
            })
            .collect(),
        Err(e) => vec![SuiteReport::new(
            "setup",
            vec![Check::failed(
                "setup.weight",
                json!({"weight": config.weight_spec})
                    .as_object()
                    .cloned()
                    .unwrap_or_default(),
                0.0,
                e.to_string(),
            )],
        )],
    };
    timings.total_ms = start.elapsed().as_secs_f64() * 1e3;
    Report::new(config.suite.name(), echo, suites, timings)
}

fn emit(text: &str, path: &Option<PathBuf>) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn json_text<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializes");
    s.push('\n');
    s
}

fn table_text(t: &MomentTable, format: Format) -> String {
    match format {
        Format::Json => json_text(&t.to_json()),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["j", "k", "re", "im"])
                .expect("in-memory write");
            for (j, row) in t.rows().iter().enumerate() {
                for (k, z) in row.iter().enumerate() {
                    w.write_record([
                        j.to_string(),
                        k.to_string(),
                        format!("{:e}", z.re),
                        format!("{:e}", z.im),
                    ])
                    .expect("in-memory write");
                }
            }
            String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
        }
        Format::Text => {
            let mut s = format!("# {}\n", t.provenance());
            for row in t.rows() {
                let cells: Vec<String> = row
                    .iter()
                    .map(|z| format!("{:>11.4e}{:+.4e}i", z.re, z.im))
                    .collect();
                s.push_str(&cells.join("  "));
                s.push('\n');
            }
            s
        }
    }
}

/// Everything `main` does after parsing; returns the exit code.
pub fn execute(inv: Invocation) -> i32 {
    let result: Result<(String, Option<PathBuf>, bool), Error> = (|| match inv {
        Invocation::Verify(config) => {
            let report = run(&config);
            let text = match config.format {
                Format::Json => report.to_json(),
                Format::Csv => report.to_csv(),
                Format::Text => report.to_text(),
            };
            Ok((text, config.output_path, report.pass))
        }
        Invocation::Moments {
            weight_spec,
            order,
            kind,
            radial_order,
            angular_order,
            output_path,
            format,
        } => {
            let w: Weight = weight_spec.parse()?;
            let grid = w.adapted_grid(radial_order, angular_order)?;
            let t = match kind {
                TableKind::Measure => measure_moments(&w, &grid, order)?,
                TableKind::U => u_moments(&w, &grid, order)?,
            };
            Ok((table_text(&t, format), output_path, true))
        }
        Invocation::DbrBuild {
            weight_spec,
            order,
            grids,
            output_path,
            format,
        } => {
            let w: Weight = weight_spec.parse()?;
            let m = build_model(&w, &grids, order)?;
            let j = m.to_json();
            let text = match format {
                Format::Json => json_text(&j),
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    w.write_record(["k", "h_re", "h_im", "a_re", "a_im", "b_re", "b_im"])
                        .expect("in-memory write");
                    for k in 0..=j.order {
                        w.write_record([
                            k.to_string(),
                            format!("{:e}", j.h.re[k]),
                            format!("{:e}", j.h.im[k]),
                            format!("{:e}", j.a.re[k]),
                            format!("{:e}", j.a.im[k]),
                            format!("{:e}", j.b.re[k]),
                            format!("{:e}", j.b.im[k]),
                        ])
                        .expect("in-memory write");
                    }
                    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
                }
                Format::Text => {
                    let d = &j.diagnostics;
                    let mut s = format!(
                        "weight {}\norder {}\nrank-one ratio {:.3e}\nh0 deviation {:.3e}\nmax |b| {:.6}\na(0) {:.12}\n",
                        j.weight, j.order, d.rank_one_ratio, d.h0_deviation, d.max_b_modulus, d.a0
                    );
                    for k in 0..=j.order.min(8) {
                        s.push_str(&format!(
                            "b_{k} = {:+.12e} {:+.12e}i\n",
                            j.b.re[k], j.b.im[k]
                        ));
                    }
                    s
                }
            };
            Ok((text, output_path, true))
        }
        Invocation::WeightsInfo {
            weight_spec,
            radial_order,
            angular_order,
            output_path,
            format,
        } => {
            let w: Weight = weight_spec.parse()?;
            let grid = w.adapted_grid(radial_order, angular_order)?;
            let l1 = w.l1_norm(&grid)?;
            let (centers, radii) = superharmonic_lattice();
            let circle = CircleGrid::new(512)?;
            let sh = w.superharmonic_test(&centers, &radii, &circle)?;
            let info = json!({
                "weight": w.label(),
                "harmonic": w.is_harmonic(),
                "singularities": w.singularities().iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
                "l1_norm": l1,
                "grid": grid.id(),
                "decomposition": w.decomposition(),
                "superharmonic": sh,
            });
            let text = match format {
                Format::Json => json_text(&info),
                Format::Csv => {
                    let mut s = String::from("key,value\n");
                    for (k, v) in info.as_object().expect("object") {
                        let v = v.to_string();
                        s.push_str(&format!("{k},\"{}\"\n", v.replace('"', "\"\"")));
                    }
                    s
                }
                Format::Text => info
                    .as_object()
                    .expect("object")
                    .iter()
                    .map(|(k, v)| format!("{k}: {v}\n"))
                    .collect(),
            };
            Ok((text, output_path, true))
        }
    })();
    match result {
        Ok((text, path, pass)) => {
            if let Err(e) = emit(&text, &path) {
                eprintln!("dbrlab: cannot write output: {e}");
                return EXIT_FAIL;
            }
            if pass {
                EXIT_PASS
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            eprintln!("dbrlab: {e}");
            EXIT_FAIL
        }
    }
}

/// Parses, runs and returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match parse_args(argv) {
        Ok(inv) => execute(inv),
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_PASS
            };
            let _ = e.print();
            code
        }
    }
}
