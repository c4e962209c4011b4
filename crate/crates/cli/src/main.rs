//! Command-line front end: ingest specs and distributions, run the
//! solvers, oracles and verification suites, emit deterministic JSON or
//! CSV reports.
//!
//! Exit codes: 0 success, 1 failed verification, 2 parse/usage error,
//! 3 solver non-convergence, 4 singular denominator / vanishing Green
//! function.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use martinkern::boundary::{self, BoundaryDistribution, DistributionJson, HarmonicEvaluator};
use martinkern::error::Error;
use martinkern::forward::{self, ForwardSpec};
use martinkern::green::{self, estimate_rho};
use martinkern::isotropic::{self, IsotropicParams};
use martinkern::oracle::{TruncatedBall, DEFAULT_MAX_BALL};
use martinkern::poly::{self, PolyRepresentation};
use martinkern::tree::{EdgeTypeModel, TreeSpec, VertexPath};
use martinkern::{samples, verify};

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_NON_CONVERGENCE: u8 = 3;
const EXIT_SINGULAR: u8 = 4;

#[derive(Parser)]
#[command(
    name = "martinkern",
    version,
    about = "Green functions, Martin kernels and polyharmonic boundary representations on cone-type trees"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct CommonArgs {
    /// Tree spec JSON file; built-in T_2 simple random walk when omitted.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Spectral parameter as `re` or `re,im`.
    #[arg(long, default_value = "1.2", allow_hyphen_values = true)]
    lambda: String,
    /// Truncation order of the jet arithmetic (0..=8).
    #[arg(long, default_value_t = 0)]
    order: usize,
    /// Write the report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the first-passage fixed point; report F_up, G(o,o) and a rho bracket.
    Green {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Martin kernel jet K(x, arc | lambda).
    Kernel {
        #[command(flatten)]
        common: CommonArgs,
        /// Vertex address, e.g. `[0,1]`.
        #[arg(long)]
        x: String,
        /// Arc address, e.g. `[0]`.
        #[arg(long)]
        arc: String,
    },
    /// Poisson transform of a boundary distribution at a vertex.
    Poisson {
        #[command(flatten)]
        common: CommonArgs,
        /// Boundary distribution JSON file.
        #[arg(long)]
        dist: PathBuf,
        /// Evaluation vertex.
        #[arg(long, default_value = "[]")]
        at: String,
    },
    /// Recover the representing distribution of a harmonic function.
    Recover {
        #[command(flatten)]
        common: CommonArgs,
        /// Harmonic input: `ones` or `dist` (Poisson transform of --dist).
        #[arg(long, default_value = "ones")]
        h: String,
        #[arg(long)]
        dist: Option<PathBuf>,
        /// Carrier depth of the recovered distribution.
        #[arg(long, default_value_t = 2)]
        depth: usize,
    },
    /// Evaluate (and optionally apply defects to) a polyharmonic representation.
    Poly {
        /// Tree spec JSON file; built-in T_2 simple random walk when omitted.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Representation JSON file (lambda, order, distributions).
        #[arg(long)]
        synth: PathBuf,
        /// Evaluation vertex.
        #[arg(long, default_value = "[]")]
        at: String,
        /// Also report (lambda I - P)^n applied to the synthesis at the vertex.
        #[arg(long)]
        defect: Option<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Closed forms and horocycle coefficients for isotropic walks on T_q.
    Isotropic {
        #[arg(long, default_value_t = 2)]
        q: u32,
        #[arg(long, default_value = "1.5", allow_hyphen_values = true)]
        lambda: String,
        #[arg(long, default_value_t = 3)]
        order: usize,
        /// Representation order for the coefficient triangle.
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Forward-operator quantities: masses, kernels, transforms, syntheses.
    Forward {
        /// Forward spec JSON file (TreeSpec shape with up_prob 0 everywhere).
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, default_value = "1.0", allow_hyphen_values = true)]
        lambda: String,
        #[arg(long, value_enum, default_value_t = ForwardOp::Mass)]
        op: ForwardOp,
        #[arg(long, default_value = "[]")]
        x: String,
        #[arg(long)]
        arc: Option<String>,
        #[arg(long, default_value_t = 0)]
        r: usize,
        #[arg(long)]
        dist: Option<PathBuf>,
        /// Representation JSON for `--op synth`.
        #[arg(long)]
        rep: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Truncated-series oracle: Green series value with tail bound.
    Oracle {
        #[command(flatten)]
        common: CommonArgs,
        /// Series horizon (ball radius).
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, default_value = "[]")]
        x: String,
        #[arg(long, default_value = "[]")]
        y: String,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Run a verification suite; exit 1 if any check fails.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        suite: Suite,
        /// Seed for the randomized checks.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Override the suite's default tolerance.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        dist: Option<PathBuf>,
        /// Edge-type model JSON for the group suite.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        q: u32,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ForwardOp {
    Mass,
    Kernel,
    Poisson,
    Synth,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Suite {
    Eigen,
    Oracle,
    Roundtrip,
    Poly,
    Isotropic,
    Forward,
    Group,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn parse(message: impl Into<String>) -> Failure {
        Failure {
            code: EXIT_PARSE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Failure {
        let code = match err {
            Error::NonConvergence { .. } => EXIT_NON_CONVERGENCE,
            Error::DivisionBySingularJet { .. }
            | Error::SqrtOfSingularJet { .. }
            | Error::ZeroDenominator { .. }
            | Error::VanishingGreen { .. }
            | Error::DenominatorNearOne { .. }
            | Error::SpectralBound { .. } => EXIT_SINGULAR,
            _ => EXIT_PARSE,
        };
        Failure {
            code,
            message: err.to_string(),
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

// ---------------------------------------------------------------------------
// Deterministic serialization: 17 significant digits on every float.

struct SciFormatter;

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SciFormatter);
    value
        .serialize(&mut ser)
        .expect("report serialization cannot fail");
    let mut text = String::from_utf8(out).expect("serializer emits UTF-8");
    text.push('\n');
    text
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), Failure> {
    match output {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::parse(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::parse(format!("cannot write to stdout: {e}"))),
    }
}

// ---------------------------------------------------------------------------
// Input parsing.

fn parse_lambda(text: &str) -> Result<Complex64, Failure> {
    let parts: Vec<&str> = text.split(',').collect();
    let parse = |s: &str| -> Result<f64, Failure> {
        s.trim()
            .parse::<f64>()
            .map_err(|e| Failure::parse(format!("cannot parse lambda component {s:?}: {e}")))
    };
    match parts.as_slice() {
        [re] => Ok(Complex64::new(parse(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(parse(re)?, parse(im)?)),
        _ => Err(Failure::parse(format!(
            "lambda must be `re` or `re,im`, got {text:?}"
        ))),
    }
}

fn parse_path(text: &str) -> Result<VertexPath, Failure> {
    VertexPath::from_str(text).map_err(|e| Failure::parse(e.to_string()))
}

fn check_order(order: usize) -> Result<(), Failure> {
    if order > 8 {
        return Err(Failure::parse(format!("order {order} outside 0..=8")));
    }
    Ok(())
}

fn load_spec(path: Option<&Path>) -> Result<TreeSpec, Failure> {
    let spec = match path {
        None => TreeSpec::homogeneous_srw(2),
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::parse(format!("cannot read {}: {e}", path.display())))?;
            TreeSpec::from_json(&text).map_err(|e| Failure::parse(e.to_string()))?
        }
    };
    let report = spec.validate();
    if !report.is_empty() {
        return Err(Failure::parse(format!(
            "invalid spec: {}",
            report.join("; ")
        )));
    }
    Ok(spec)
}

fn load_forward_spec(path: Option<&Path>) -> Result<ForwardSpec, Failure> {
    match path {
        None => ForwardSpec::new(samples::binary_forward()).map_err(Failure::from),
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::parse(format!("cannot read {}: {e}", path.display())))?;
            ForwardSpec::from_json(&text).map_err(|e| Failure::parse(e.to_string()))
        }
    }
}

fn load_distribution(spec: &TreeSpec, path: &Path) -> Result<BoundaryDistribution, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::parse(format!("cannot read {}: {e}", path.display())))?;
    let json: DistributionJson =
        serde_json::from_str(&text).map_err(|e| Failure::parse(e.to_string()))?;
    BoundaryDistribution::from_json_struct(spec, &json).map_err(|e| Failure::parse(e.to_string()))
}

#[derive(serde::Deserialize)]
struct PolyRepJson {
    lambda: [f64; 2],
    order: usize,
    distributions: Vec<DistributionJson>,
}

fn load_representation(spec: &TreeSpec, path: &Path) -> Result<PolyRepresentation, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::parse(format!("cannot read {}: {e}", path.display())))?;
    let json: PolyRepJson =
        serde_json::from_str(&text).map_err(|e| Failure::parse(e.to_string()))?;
    if json.order != json.distributions.len() {
        return Err(Failure::parse(format!(
            "representation order {} does not match {} distributions",
            json.order,
            json.distributions.len()
        )));
    }
    let dists = json
        .distributions
        .iter()
        .map(|d| BoundaryDistribution::from_json_struct(spec, d))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Failure::parse(e.to_string()))?;
    PolyRepresentation::new(Complex64::new(json.lambda[0], json.lambda[1]), dists)
        .map_err(Failure::from)
}

fn max_ball() -> Result<usize, Failure> {
    match std::env::var("MARTINKERN_MAX_BALL") {
        Err(_) => Ok(DEFAULT_MAX_BALL),
        Ok(text) => text
            .parse::<usize>()
            .map_err(|e| Failure::parse(format!("MARTINKERN_MAX_BALL={text:?}: {e}"))),
    }
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn jet_coeffs(jet: &martinkern::Jet) -> Vec<[f64; 2]> {
    jet.coeffs().iter().map(|&c| pair(c)).collect()
}

// ---------------------------------------------------------------------------
// Reports.

#[derive(Serialize)]
struct RhoReport {
    lo: f64,
    hi: f64,
}

#[derive(Serialize)]
struct GreenReport {
    lambda: [f64; 2],
    order: usize,
    rho: RhoReport,
    f_up: BTreeMap<String, Vec<[f64; 2]>>,
    g_root: Vec<[f64; 2]>,
    iterations: usize,
    residual: f64,
}

#[derive(Serialize)]
struct KernelReport {
    lambda: [f64; 2],
    order: usize,
    x: Vec<u32>,
    arc: Vec<u32>,
    value: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct PoissonReport {
    lambda: [f64; 2],
    order: usize,
    at: Vec<u32>,
    value: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct ArcReport {
    path: Vec<u32>,
    value: [f64; 2],
}

#[derive(Serialize)]
struct RecoverReport {
    lambda: [f64; 2],
    depth: usize,
    arcs: Vec<ArcReport>,
    max_additivity_residual: f64,
}

#[derive(Serialize)]
struct PolyReport {
    lambda: [f64; 2],
    order: usize,
    at: Vec<u32>,
    value: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    defect_order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    defect: Option<[f64; 2]>,
}

#[derive(Serialize)]
struct CoeffReport {
    k: usize,
    r: usize,
    value: [f64; 2],
}

#[derive(Serialize)]
struct IsotropicReport {
    q: u32,
    lambda: [f64; 2],
    rho: f64,
    order: usize,
    closed_f: Vec<[f64; 2]>,
    f: Vec<[f64; 2]>,
    n: usize,
    coeffs: Vec<CoeffReport>,
    matrix_determinant: [f64; 2],
}

#[derive(Serialize)]
struct ForwardReport {
    lambda: [f64; 2],
    op: String,
    x: Vec<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    arc: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    r: Option<usize>,
    value: [f64; 2],
}

#[derive(Serialize)]
struct OracleReport {
    lambda: [f64; 2],
    n: usize,
    x: Vec<u32>,
    y: Vec<u32>,
    rho: RhoReport,
    series: [f64; 2],
    tail_bound: f64,
    terms: usize,
    solver: [f64; 2],
    difference: f64,
}

#[derive(Serialize)]
struct CheckReport {
    name: String,
    passed: bool,
    residual: f64,
    tolerance: f64,
    detail: String,
}

#[derive(Serialize)]
struct VerifyReport {
    suite: String,
    lambda: [f64; 2],
    seed: u64,
    passed: bool,
    checks: Vec<CheckReport>,
}

// ---------------------------------------------------------------------------

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Green { common, format } => cmd_green(common, format),
        Command::Kernel { common, x, arc } => cmd_kernel(common, &x, &arc),
        Command::Poisson { common, dist, at } => cmd_poisson(common, &dist, &at),
        Command::Recover {
            common,
            h,
            dist,
            depth,
        } => cmd_recover(common, &h, dist.as_deref(), depth),
        Command::Poly {
            spec,
            synth,
            at,
            defect,
            output,
        } => cmd_poly(spec.as_deref(), &synth, &at, defect, output.as_deref()),
        Command::Isotropic {
            q,
            lambda,
            order,
            n,
            output,
        } => cmd_isotropic(q, &lambda, order, n, output.as_deref()),
        Command::Forward {
            spec,
            lambda,
            op,
            x,
            arc,
            r,
            dist,
            rep,
            output,
        } => cmd_forward(
            spec.as_deref(),
            &lambda,
            op,
            &x,
            arc.as_deref(),
            r,
            dist.as_deref(),
            rep.as_deref(),
            output.as_deref(),
        ),
        Command::Oracle {
            common,
            n,
            x,
            y,
            format,
        } => cmd_oracle(common, n, &x, &y, format),
        Command::Verify {
            common,
            suite,
            seed,
            tol,
            dist,
            model,
            q,
        } => cmd_verify(
            common,
            suite,
            seed,
            tol,
            dist.as_deref(),
            model.as_deref(),
            q,
        ),
    }
}

fn cmd_green(common: CommonArgs, format: Format) -> Result<(), Failure> {
    check_order(common.order)?;
    let spec = load_spec(common.spec.as_deref())?;
    let lambda = parse_lambda(&common.lambda)?;
    let table = green::solve_f_up(&spec, lambda, common.order)?;
    let g = green::green_diag(&spec, &table, &VertexPath::root())?;
    let bracket = estimate_rho(&spec)?;
    let mut f_up = BTreeMap::new();
    for t in 0..spec.num_types() {
        if t == spec.root_index() {
            continue;
        }
        f_up.insert(spec.type_name(t).to_string(), jet_coeffs(table.f_up(t)?));
    }
    match format {
        Format::Json => {
            let report = GreenReport {
                lambda: pair(lambda),
                order: common.order,
                rho: RhoReport {
                    lo: bracket.lo,
                    hi: bracket.hi,
                },
                f_up,
                g_root: jet_coeffs(&g),
                iterations: table.iterations(),
                residual: table.residual(),
            };
            emit(common.output.as_deref(), &to_json(&report))
        }
        Format::Csv => {
            let mut text = String::from("type,coeff,re,im\n");
            for (name, coeffs) in &f_up {
                for (k, c) in coeffs.iter().enumerate() {
                    writeln!(text, "{name},{k},{:.16e},{:.16e}", c[0], c[1])
                        .expect("writing to a string cannot fail");
                }
            }
            emit(common.output.as_deref(), &text)
        }
    }
}

fn cmd_kernel(common: CommonArgs, x: &str, arc: &str) -> Result<(), Failure> {
    check_order(common.order)?;
    let spec = load_spec(common.spec.as_deref())?;
    let lambda = parse_lambda(&common.lambda)?;
    let x = parse_path(x)?;
    let arc = parse_path(arc)?;
    let table = green::solve_f_up(&spec, lambda, common.order)?;
    let jet = green::martin_kernel(&spec, &table, &x, &arc)?;
    let report = KernelReport {
        lambda: pair(lambda),
        order: common.order,
        x: x.slots().to_vec(),
        arc: arc.slots().to_vec(),
        value: jet_coeffs(&jet),
    };
    emit(common.output.as_deref(), &to_json(&report))
}

fn cmd_poisson(common: CommonArgs, dist: &Path, at: &str) -> Result<(), Failure> {
    check_order(common.order)?;
    let spec = load_spec(common.spec.as_deref())?;
    let lambda = parse_lambda(&common.lambda)?;
    let at = parse_path(at)?;
    let nu = load_distribution(&spec, dist)?;
    let table = green::solve_f_up(&spec, lambda, common.order)?;
    let jet = boundary::poisson_transform(&spec, &table, &nu, &at)?;
    let report = PoissonReport {
        lambda: pair(lambda),
        order: common.order,
        at: at.slots().to_vec(),
        value: jet_coeffs(&jet),
    };
    emit(common.output.as_deref(), &to_json(&report))
}

fn cmd_recover(
    common: CommonArgs,
    h: &str,
    dist: Option<&Path>,
    depth: usize,
) -> Result<(), Failure> {
    check_order(common.order)?;
    let spec = load_spec(common.spec.as_deref())?;
    let lambda = parse_lambda(&common.lambda)?;
    let table = green::solve_f_up(&spec, lambda, common.order)?;
    let evaluator = match h {
        "ones" => HarmonicEvaluator::Table(
            spec.vertices_to_depth(depth + 1)
                .into_iter()
                .map(|v| (v, Complex64::ONE))
                .collect(),
        ),
        "dist" => {
            let path = dist.ok_or_else(|| Failure::parse("--h dist requires --dist FILE"))?;
            HarmonicEvaluator::Poisson(load_distribution(&spec, path)?)
        }
        other => {
            return Err(Failure::parse(format!(
                "--h must be `ones` or `dist`, got {other:?}"
            )))
        }
    };
    let mut arcs = Vec::new();
    let mut values: BTreeMap<VertexPath, Complex64> = BTreeMap::new();
    for v in spec.vertices_to_depth(depth) {
        let value = boundary::recover_distribution(&spec, &table, &evaluator, &v)?;
        values.insert(v.clone(), value);
        arcs.push(ArcReport {
            path: v.slots().to_vec(),
            value: pair(value),
        });
    }
    let mut worst = 0.0f64;
    for v in spec.vertices_to_depth(depth.saturating_sub(1)) {
        let t = spec.type_of(&v)?;
        let sum: Complex64 = (0..spec.num_slots(t))
            .map(|s| values[&v.child(s as u32)])
            .sum();
        worst = worst.max((sum - values[&v]).norm());
    }
    let report = RecoverReport {
        lambda: pair(lambda),
        depth,
        arcs,
        max_additivity_residual: worst,
    };
    emit(common.output.as_deref(), &to_json(&report))
}

fn cmd_poly(
    spec: Option<&Path>,
    synth: &Path,
    at: &str,
    defect: Option<usize>,
    output: Option<&Path>,
) -> Result<(), Failure> {
    let spec = load_spec(spec)?;
    let at = parse_path(at)?;
    let rep = load_representation(&spec, synth)?;
    let order = rep.order() - 1;
    check_order(order)?;
    let table = green::solve_f_up(&spec, rep.lambda, order)?;
    let value = poly::synthesize(&spec, &table, &rep, &at)?;
    let defect_value = match defect {
        None => None,
        Some(n) => {
            let f = |v: &VertexPath| poly::synthesize(&spec, &table, &rep, v);
            Some(poly::apply_defect(&spec, rep.lambda, &f, &at, n)?)
        }
    };
    let report = PolyReport {
        lambda: pair(rep.lambda),
        order: rep.order(),
        at: at.slots().to_vec(),
        value: pair(value),
        defect_order: defect,
        defect: defect_value.map(pair),
    };
    emit(output, &to_json(&report))
}

fn cmd_isotropic(
    q: u32,
    lambda: &str,
    order: usize,
    n: usize,
    output: Option<&Path>,
) -> Result<(), Failure> {
    check_order(order)?;
    if n == 0 || n > 9 {
        return Err(Failure::parse(format!("n {n} outside 1..=9")));
    }
    let lambda = parse_lambda(lambda)?;
    let params = IsotropicParams::new(q, lambda)?;
    let f = isotropic::closed_f(&params, order)?;
    let coeffs = isotropic::horocycle_coeffs(&params, n)?;
    let mut table = Vec::new();
    for r in 1..n {
        for k in 1..=r {
            table.push(CoeffReport {
                k,
                r,
                value: pair(coeffs.coeff(k, r)),
            });
        }
    }
    let report = IsotropicReport {
        q,
        lambda: pair(lambda),
        rho: params.rho(),
        order,
        closed_f: jet_coeffs(&f),
        f: jet_coeffs(coeffs.f_jet()),
        n,
        coeffs: table,
        matrix_determinant: pair(coeffs.matrix_determinant()),
    };
    emit(output, &to_json(&report))
}

#[allow(clippy::too_many_arguments)]
fn cmd_forward(
    spec: Option<&Path>,
    lambda: &str,
    op: ForwardOp,
    x: &str,
    arc: Option<&str>,
    r: usize,
    dist: Option<&Path>,
    rep: Option<&Path>,
    output: Option<&Path>,
) -> Result<(), Failure> {
    let fwd = load_forward_spec(spec)?;
    let lambda = parse_lambda(lambda)?;
    let x = parse_path(x)?;
    let (value, arc_out, r_out) = match op {
        ForwardOp::Mass => (
            Complex64::from(forward::forward_mass(&fwd, &x)?),
            None,
            None,
        ),
        ForwardOp::Kernel => {
            let arc =
                parse_path(arc.ok_or_else(|| Failure::parse("--op kernel requires --arc"))?)?;
            let v = forward::forward_kernel(&fwd, &x, &arc, lambda, r)?;
            (v, Some(arc.slots().to_vec()), Some(r))
        }
        ForwardOp::Poisson => {
            let path = dist.ok_or_else(|| Failure::parse("--op poisson requires --dist"))?;
            let sigma = load_distribution(fwd.tree(), path)?;
            (
                forward::forward_poisson(&fwd, &sigma, lambda, &x)?,
                None,
                None,
            )
        }
        ForwardOp::Synth => {
            let path = rep.ok_or_else(|| Failure::parse("--op synth requires --rep"))?;
            let rep = load_representation(fwd.tree(), path)?;
            (
                forward::forward_poly_synthesize(&fwd, &rep.distributions, rep.lambda, &x)?,
                None,
                None,
            )
        }
    };
    let report = ForwardReport {
        lambda: pair(lambda),
        op: format!("{op:?}").to_lowercase(),
        x: x.slots().to_vec(),
        arc: arc_out,
        r: r_out,
        value: pair(value),
    };
    emit(output, &to_json(&report))
}

fn cmd_oracle(
    common: CommonArgs,
    n: usize,
    x: &str,
    y: &str,
    format: Format,
) -> Result<(), Failure> {
    let spec = load_spec(common.spec.as_deref())?;
    let lambda = parse_lambda(&common.lambda)?;
    let x = parse_path(x)?;
    let y = parse_path(y)?;
    let limit = max_ball()?;
    let bracket = estimate_rho(&spec)?;
    let ball = TruncatedBall::with_limit(&spec, &x, n, limit)?;
    let series = ball.green_series(&y, lambda, n, bracket.hi)?;
    let table = green::solve_f_up(&spec, lambda, 0)?;
    let solver = green::green_pair(&spec, &table, &x, &y)?.value();
    match format {
        Format::Json => {
            let report = OracleReport {
                lambda: pair(lambda),
                n,
                x: x.slots().to_vec(),
                y: y.slots().to_vec(),
                rho: RhoReport {
                    lo: bracket.lo,
                    hi: bracket.hi,
                },
                series: pair(series.value),
                tail_bound: series.tail_bound,
                terms: series.terms,
                solver: pair(solver),
                difference: (series.value - solver).norm(),
            };
            emit(common.output.as_deref(), &to_json(&report))
        }
        Format::Csv => {
            let profile = ball.n_step_profile(&y, n)?;
            let mut text = String::from("n,p_n\n");
            for (k, p) in profile.iter().enumerate() {
                writeln!(text, "{k},{p:.16e}").expect("writing to a string cannot fail");
            }
            emit(common.output.as_deref(), &text)
        }
    }
}

fn cmd_verify(
    common: CommonArgs,
    suite: Suite,
    seed: u64,
    tol: Option<f64>,
    dist: Option<&Path>,
    model: Option<&Path>,
    q: u32,
) -> Result<(), Failure> {
    if let Some(t) = tol {
        if t <= 0.0 {
            return Err(Failure::parse(format!(
                "tolerance must be positive, got {t}"
            )));
        }
    }
    let lambda = parse_lambda(&common.lambda)?;
    let checks = match suite {
        Suite::Eigen => {
            let spec = load_spec(common.spec.as_deref())?;
            verify::eigen_suite(&spec, lambda, seed, tol.unwrap_or(1e-10))?
        }
        Suite::Oracle => {
            let spec = load_spec(common.spec.as_deref())?;
            verify::oracle_suite(&spec, lambda, seed, 16, max_ball()?, tol.unwrap_or(1e-8))?
        }
        Suite::Roundtrip => {
            let spec = load_spec(common.spec.as_deref())?;
            let nu = match dist {
                None => None,
                Some(path) => Some(load_distribution(&spec, path)?),
            };
            verify::roundtrip_suite(&spec, lambda, nu, seed, tol.unwrap_or(1e-9))?
        }
        Suite::Poly => {
            let spec = load_spec(common.spec.as_deref())?;
            verify::poly_suite(&spec, lambda, seed, tol.unwrap_or(1e-8))?
        }
        Suite::Isotropic => verify::isotropic_suite(q, lambda, seed, tol.unwrap_or(1e-8))?,
        Suite::Forward => {
            let fwd = load_forward_spec(common.spec.as_deref())?;
            verify::forward_suite(&fwd, lambda, seed, tol.unwrap_or(1e-10))?
        }
        Suite::Group => {
            let models: Vec<(String, EdgeTypeModel)> = match model {
                Some(path) => {
                    let text = fs::read_to_string(path).map_err(|e| {
                        Failure::parse(format!("cannot read {}: {e}", path.display()))
                    })?;
                    let model = EdgeTypeModel::from_json(&text)
                        .map_err(|e| Failure::parse(e.to_string()))?;
                    vec![("model".into(), model)]
                }
                None => vec![
                    ("srw".into(), samples::srw_edge_model()),
                    ("oriented".into(), samples::oriented_edge_model()),
                    ("two_class".into(), samples::two_class_edge_model()),
                ],
            };
            verify::group_suite(&models, lambda, tol.unwrap_or(1e-10))?
        }
    };
    let passed = verify::all_passed(&checks);
    let report = VerifyReport {
        suite: format!("{suite:?}").to_lowercase(),
        lambda: pair(lambda),
        seed,
        passed,
        checks: checks
            .into_iter()
            .map(|c| CheckReport {
                name: c.name,
                passed: c.passed,
                residual: c.residual,
                tolerance: c.tolerance,
                detail: c.detail,
            })
            .collect(),
    };
    emit(common.output.as_deref(), &to_json(&report))?;
    if passed {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_CHECK_FAILED,
            message: "one or more checks failed".into(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_to_exit_code_mapping() {
        let f = Failure::from(Error::NonConvergence {
            iterations: 10,
            last_delta: 1.0,
        });
        assert_eq!(f.code, EXIT_NON_CONVERGENCE);
        let f = Failure::from(Error::DivisionBySingularJet { magnitude: 0.0 });
        assert_eq!(f.code, EXIT_SINGULAR);
        let f = Failure::from(Error::ZeroDenominator { magnitude: 0.0 });
        assert_eq!(f.code, EXIT_SINGULAR);
        let f = Failure::from(Error::DenominatorNearOne { magnitude: 0.0 });
        assert_eq!(f.code, EXIT_SINGULAR);
        let f = Failure::from(Error::ZeroLambda);
        assert_eq!(f.code, EXIT_PARSE);
    }

    #[test]
    fn lambda_parsing() {
        assert_eq!(parse_lambda("1.5").unwrap(), Complex64::new(1.5, 0.0));
        assert_eq!(
            parse_lambda("1.5,-0.25").unwrap(),
            Complex64::new(1.5, -0.25)
        );
        assert!(parse_lambda("a").is_err());
        assert!(parse_lambda("1,2,3").is_err());
    }

    #[test]
    fn float_formatting_has_17_significant_digits() {
        #[derive(Serialize)]
        struct One {
            x: f64,
        }
        let text = to_json(&One {
            x: std::f64::consts::PI,
        });
        assert!(text.contains("3.1415926535897931e0"), "{text}");
    }
}
