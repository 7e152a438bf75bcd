//! Command-line interface.

use std::f64::consts::PI;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use crate::constants::{lookup, reference_constants};
use crate::curvature::{self, ElementaryInvariants};
use crate::error::{Error, Result};
use crate::estimators::{self, RunConfig, RunControl, RunType, DEFAULT_BATCHES, DEFAULT_GRID_CELLS};
use crate::linalg::Mat4;
use crate::measures::{self, MetricConvention};
use crate::qmc::Scramble;
use crate::report::{EstimateReport, Sig17};
use crate::separability;
use crate::state_space::{DensityMatrix, Spectrum};
use crate::linalg::ipow;

#[derive(Debug, Parser)]
#[command(name = "bures-sep", version, about = "Bures/SD volumes, areas and separability of two-qubit states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the table of reference constants.
    Constants,
    /// Estimate total and separable volumes, P_sep and mean entanglement.
    Volume(RunArgs),
    /// Total boundary area by quadrature.
    BoundaryTotal {
        #[arg(long, value_enum, default_value_t = MetricArg::Sd)]
        metric: MetricArg,
    },
    /// Estimate the area of the separable/entangled boundary.
    BoundarySeparable(RunArgs),
    /// Integral of the conditional element over the eigenvalue simplex.
    SimplexConstant {
        #[arg(long)]
        m: usize,
        #[arg(long, value_enum, default_value_t = MetricArg::Sd)]
        metric: MetricArg,
    },
    /// Classify a state given as 16 comma-separated row-major entries "a+bi".
    Classify { entries: String },
    /// Scalar curvature at a spectrum.
    Curvature {
        #[arg(allow_negative_numbers = true)]
        l1: f64,
        #[arg(allow_negative_numbers = true)]
        l2: f64,
        #[arg(allow_negative_numbers = true)]
        l3: f64,
        #[arg(allow_negative_numbers = true)]
        l4: f64,
    },
    /// Levy–Gromov isoperimetric comparison.
    Isoperimetric {
        #[arg(long, default_value_t = ipow(PI, 6) / 2310.0)]
        v_sep: f64,
        #[arg(long, default_value_t = ipow(PI, 8) / 1680.0)]
        v_total: f64,
        #[arg(long, default_value_t = 1.75414)]
        a_sep: f64,
    },
    /// Exact-constant checks; exits nonzero if any check fails.
    Selftest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScrambleArg {
    None,
    Faure,
    Seeded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Sd,
    Bures,
}

impl From<MetricArg> for MetricConvention {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Sd => MetricConvention::Sd,
            MetricArg::Bures => MetricConvention::Bures,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputArg {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,
    /// Seed for the digit permutations (seeded scrambling only).
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = ScrambleArg::Seeded)]
    pub scramble: ScrambleArg,
    /// Leading stream indices to skip.
    #[arg(long, default_value_t = 0)]
    pub skip: u64,
    /// Points per work chunk.
    #[arg(long)]
    pub chunks: Option<u64>,
    /// Worker threads (0: all cores).
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    #[arg(long, default_value_t = DEFAULT_BATCHES)]
    pub batches: u32,
    #[arg(long, value_enum, default_value_t = MetricArg::Sd)]
    pub metric: MetricArg,
    /// Root-scan cells per line (boundary runs).
    #[arg(long, default_value_t = DEFAULT_GRID_CELLS)]
    pub grid_cells: usize,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long, requires = "checkpoint")]
    pub resume: bool,
    /// Stop after this many samples, leaving the checkpoint for a later resume.
    #[arg(long)]
    pub stop_after: Option<u64>,
    #[arg(long, value_enum, default_value_t = OutputArg::Json)]
    pub output: OutputArg,
    /// Write every sample to a CSV file (volume runs).
    #[arg(long)]
    pub dump_samples: Option<PathBuf>,
}

/// How a failed invocation should exit.
#[derive(Debug)]
pub enum Failure {
    /// Exit status 2.
    Usage(String),
    /// Exit status 1, diagnostic JSON on standard error.
    Numerical(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(m) => Failure::Usage(m),
            other => Failure::Numerical(other),
        }
    }
}

/// Outcome of a successful invocation.
pub struct Output {
    pub stdout: String,
    /// Nonzero when selftest checks fail.
    pub status: i32,
}

fn ok(stdout: String) -> std::result::Result<Output, Failure> {
    Ok(Output { stdout, status: 0 })
}

fn pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serialization")
}

pub fn run(cli: Cli) -> std::result::Result<Output, Failure> {
    match cli.command {
        Command::Constants => ok(constants_json()),
        Command::Volume(a) => run_estimate(RunType::Volume, a),
        Command::BoundarySeparable(a) => run_estimate(RunType::BoundarySeparable, a),
        Command::BoundaryTotal { metric } => ok(estimators::total_boundary_area(metric.into())?.to_json()),
        Command::SimplexConstant { m, metric } => ok(simplex_json(m, metric.into())?),
        Command::Classify { entries } => ok(classify_json(&entries)?),
        Command::Curvature { l1, l2, l3, l4 } => ok(curvature_json([l1, l2, l3, l4])?),
        Command::Isoperimetric { v_sep, v_total, a_sep } => {
            ok(isoperimetric_json(v_sep, v_total, a_sep)?)
        }
        Command::Selftest => {
            let checks = selftest();
            let passed = checks.iter().all(|c| c.pass);
            #[derive(Serialize)]
            struct Selftest {
                passed: bool,
                checks: Vec<Check>,
            }
            let stdout = pretty(&Selftest { passed, checks });
            Ok(Output { stdout, status: if passed { 0 } else { 1 } })
        }
    }
}

#[derive(Serialize)]
struct ConstantOut {
    name: &'static str,
    closed_form: &'static str,
    decimal: Sig17,
    provenance: &'static str,
}

fn constants_json() -> String {
    // rendered by hand to keep the table order
    let mut s = String::from("{\n");
    let n = reference_constants().len();
    for (i, c) in reference_constants().into_iter().enumerate() {
        let out = ConstantOut {
            name: c.name,
            closed_form: c.closed_form,
            decimal: Sig17(c.decimal),
            provenance: c.provenance,
        };
        s.push_str(&format!("  {:?}: {}", c.name, serde_json::to_string(&out).expect("serialization")));
        s.push_str(if i + 1 < n { ",\n" } else { "\n" });
    }
    s.push('}');
    s
}

fn resolve_config(rt: RunType, a: &RunArgs) -> std::result::Result<RunConfig, Failure> {
    let scramble = match (a.scramble, a.seed) {
        (ScrambleArg::Seeded, seed) => Scramble::Seeded { seed: seed.unwrap_or(0) },
        (_, Some(_)) => return Err(Failure::Usage("--seed applies only to --scramble seeded".into())),
        (ScrambleArg::None, None) => Scramble::Identity,
        (ScrambleArg::Faure, None) => Scramble::Faure,
    };
    if a.dump_samples.is_some() && rt != RunType::Volume {
        return Err(Failure::Usage("--dump-samples is only available for volume runs".into()));
    }
    if a.dump_samples.is_some() && a.resume {
        return Err(Failure::Usage("--dump-samples cannot be combined with --resume".into()));
    }
    if a.stop_after.is_some() && a.checkpoint.is_none() {
        return Err(Failure::Usage("--stop-after needs --checkpoint".into()));
    }
    if rt == RunType::Volume && a.grid_cells != DEFAULT_GRID_CELLS {
        return Err(Failure::Usage("--grid-cells applies only to boundary runs".into()));
    }
    let mut cfg = RunConfig::new(rt, a.samples, scramble);
    cfg.skip = a.skip;
    cfg.metric = a.metric.into();
    cfg.batches = a.batches;
    cfg.grid_cells = a.grid_cells;
    cfg.chunk_size = match (a.chunks, &a.checkpoint) {
        (Some(c), _) => c,
        (None, Some(p)) if a.resume && p.exists() => estimators::checkpoint_config(p)?.chunk_size,
        (None, _) => RunConfig::default_chunk_size(a.samples, a.batches),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn run_estimate(rt: RunType, a: RunArgs) -> std::result::Result<Output, Failure> {
    let cfg = resolve_config(rt, &a)?;
    let ctl = RunControl {
        workers: a.workers,
        checkpoint: a.checkpoint.clone(),
        resume: a.resume,
        stop_after: a.stop_after,
        dump: a.dump_samples.clone(),
    };
    let outcome = estimators::execute(&cfg, &ctl)?;
    ok(match a.output {
        OutputArg::Json => outcome.report.to_json(),
        OutputArg::Csv => report_csv(&outcome.report),
    })
}

/// `name,value,batch_se` rows for the estimates of a report.
pub fn report_csv(r: &EstimateReport) -> String {
    let mut s = String::from("name,value,batch_se\n");
    for (name, e) in &r.estimates {
        let se = e.batch_se.map_or(String::new(), |x| crate::report::sig17(x.0));
        s.push_str(&format!("{name},{},{se}\n", crate::report::sig17(e.value.0)));
    }
    s
}

#[derive(Serialize)]
struct ReferenceOut {
    value: Sig17,
    delta: Sig17,
}

#[derive(Serialize)]
struct SimplexOut {
    m: usize,
    metric: MetricConvention,
    value: Sig17,
    quadrature_error: Sig17,
    evaluations: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    reference: Option<ReferenceOut>,
}

fn simplex_json(m: usize, metric: MetricConvention) -> Result<String> {
    let q = measures::simplex_constant(m, metric)?;
    let reference = match metric {
        MetricConvention::Sd => lookup(&format!("D{m}"))
            .map(|c| ReferenceOut { value: Sig17(c.decimal), delta: Sig17(q.value - c.decimal) }),
        MetricConvention::Bures => None,
    };
    Ok(pretty(&SimplexOut {
        m,
        metric,
        value: Sig17(q.value),
        quadrature_error: Sig17(q.error),
        evaluations: q.evaluations,
        reference,
    }))
}

/// Parse `a`, `a+bi`, `a-bi`, `bi`, `i`, `-i` (whitespace ignored).
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Parse(format!("cannot parse complex number {s:?}"));
    let num = |x: &str| x.parse::<f64>().map_err(|_| bad());
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix(['i', 'j']) else {
        return Ok(Complex64::new(num(&t)?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |x: &str| match x {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        _ => num(x),
    };
    match split {
        Some(k) => Ok(Complex64::new(num(&body[..k])?, imag(&body[k..])?)),
        None => Ok(Complex64::new(0.0, imag(body)?)),
    }
}

pub fn parse_matrix(entries: &str) -> Result<Mat4> {
    let parts: Vec<&str> = entries.split(',').collect();
    if parts.len() != 16 {
        return Err(Error::Parse(format!("expected 16 entries, got {}", parts.len())));
    }
    let mut m = [[Complex64::new(0.0, 0.0); 4]; 4];
    for (k, p) in parts.iter().enumerate() {
        m[k / 4][k % 4] = parse_complex(p)?;
    }
    Ok(m)
}

#[derive(Serialize)]
struct ClassifyOut {
    verdict: separability::Verdict,
    separable: bool,
    det_pt: Sig17,
    pt_eigenvalues: [Sig17; 4],
    negativity: Sig17,
    concurrence: Sig17,
}

fn classify_json(entries: &str) -> std::result::Result<String, Failure> {
    let m = parse_matrix(entries).map_err(|e| Failure::Usage(e.to_string()))?;
    let rho = DensityMatrix::from_matrix(m).map_err(|e| Failure::Usage(e.to_string()))?;
    let c = separability::classify(&rho)?;
    Ok(pretty(&ClassifyOut {
        verdict: c.verdict,
        separable: c.separable,
        det_pt: Sig17(c.det_pt),
        pt_eigenvalues: c.pt_eigenvalues.map(Sig17),
        negativity: Sig17(c.negativity),
        concurrence: Sig17(c.concurrence),
    }))
}

#[derive(Serialize)]
struct CurvatureOut {
    spectrum: [Sig17; 4],
    invariants: [Sig17; 4],
    scalar_curvature: Option<Sig17>,
    singular: bool,
    minimum: Sig17,
}

fn curvature_json(l: [f64; 4]) -> std::result::Result<String, Failure> {
    let s = Spectrum::new(l).map_err(|e| Failure::Usage(e.to_string()))?;
    let inv = ElementaryInvariants::of(&s.as_array());
    let c = curvature::scalar_curvature(&s);
    Ok(pretty(&CurvatureOut {
        spectrum: s.as_array().map(Sig17),
        invariants: [inv.e1, inv.e2, inv.e3, inv.e4].map(Sig17),
        scalar_curvature: c.finite().map(Sig17),
        singular: c.finite().is_none(),
        minimum: Sig17(curvature::min_scalar_curvature(4)?),
    }))
}

#[derive(Serialize)]
struct IsoperimetricOut {
    dimension: u32,
    alpha: Sig17,
    unit_ball_volume: Sig17,
    unit_sphere_area: Sig17,
    total_radius: Sig17,
    total_area: Sig17,
    sep_radius: Sig17,
    sep_area: Sig17,
    w: Sig17,
    ratio: Sig17,
    inequality_holds: bool,
}

fn isoperimetric_json(v_sep: f64, v_total: f64, a_sep: f64) -> std::result::Result<String, Failure> {
    let c = curvature::levy_gromov_comparison(v_sep, v_total, a_sep).map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(pretty(&IsoperimetricOut {
        dimension: c.dimension,
        alpha: Sig17(c.alpha),
        unit_ball_volume: Sig17(c.unit_ball_volume),
        unit_sphere_area: Sig17(c.unit_sphere_area),
        total_radius: Sig17(c.total_radius),
        total_area: Sig17(c.total_area),
        sep_radius: Sig17(c.sep_radius),
        sep_area: Sig17(c.sep_area),
        w: Sig17(c.w),
        ratio: Sig17(c.ratio),
        inequality_holds: c.inequality_holds,
    }))
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: Option<Sig17>,
    pub expected: Sig17,
    pub tolerance: Sig17,
    pub relative: bool,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn check(name: &str, value: Result<f64>, expected: f64, tolerance: f64, relative: bool) -> Check {
    let (value, error) = match value {
        Ok(v) => (Some(v), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let pass = value.is_some_and(|v| {
        let d = (v - expected).abs();
        d <= if relative { tolerance * expected.abs() } else { tolerance }
    });
    Check {
        name: name.to_string(),
        value: value.map(Sig17),
        expected: Sig17(expected),
        tolerance: Sig17(tolerance),
        relative,
        pass,
        error,
    }
}

/// Exact-constant suite: simplex constants, the boundary integral, total
/// area, minimum curvature and the unit 15-ball.
pub fn selftest() -> Vec<Check> {
    let sd = MetricConvention::Sd;
    let refv = |n: &str| lookup(n).expect("reference constant").decimal;
    let mut out = Vec::new();
    for m in 2..=5 {
        let name = format!("D{m}");
        out.push(check(&name, measures::simplex_constant(m, sd).map(|q| q.value), refv(&name), 1e-6, true));
    }
    let frame = crate::constants::haar_volume(4).expect("frame volume");
    let (r4, area) = match measures::boundary_restricted_integral(4, sd) {
        Ok(q) => (Ok(q.value), Ok(4.0 * q.value * frame)),
        Err(e) => (Err(Error::Numerical(e.to_string())), Err(e)),
    };
    out.push(check("boundary_integral_m4", r4, 0.871513859457, 1e-9, false));
    out.push(check("A_total", area, refv("A_total"), 1e-8, true));
    let s = Spectrum::new([0.25; 4]).expect("maximally mixed");
    let c = curvature::scalar_curvature(&s).finite().ok_or_else(|| Error::Numerical("singular".into()));
    out.push(check("scalar_curvature_maximally_mixed", c, 570.0, 1e-9, true));
    out.push(check(
        "unit_ball_volume_15",
        curvature::ball_geometry(15, 1.0).map(|b| b.volume),
        refv("unit_ball_volume_15"),
        1e-12,
        true,
    ));
    out
}
