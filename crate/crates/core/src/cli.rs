//! Command-line front end. `run` parses arguments, executes one subcommand
//! and returns the process exit code: 0 on success, 1 when the analysis
//! itself fails, 2 on usage errors (bad flags, unreadable inputs, weight
//! parse errors).

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::boyd::{self, BoydExpr, DilationGrid};
use crate::error::Error;
use crate::experiments::{
    self, BrownianConfig, ExperimentReport, Generator, InclusionConfig, RademacherConfig,
    SmoothConfig,
};
use crate::jet_extract;
use crate::lp_approx::PolyJet;
use crate::oscillation::{
    self, batch_membership, default_radii, LittleOConfig, MembershipConfig, Policy,
};
use crate::report::{self, fmt_f64, parse_exponent, VERSION};
use crate::signals::{self, GridSpec, SampledFunction};
use crate::whitney::{self, BoundGrid, JetField};

/// Environment variable naming the directory for outputs whose path is not
/// given explicitly.
pub const OUT_DIR_ENV: &str = "CZSPACE_OUT_DIR";

const FORMATS: &str = "\
FILE FORMATS
  .szf   4-byte magic \"SZF1\", little-endian u64 header length H, H bytes of
         UTF-8 JSON {dim, origin, spacing, shape, meta}, then the samples as
         little-endian f64 in row-major order (first axis slowest).
  .csv   samples as text: one value per line (1-D) or one grid row per line,
         comma separated (2-D). Reading needs --origin and --spacing.
  ratios CSV (experiment)  columns case,series,point,r,rho
  ratios CSV (analyze)     columns point,r,rho
  reports  pretty-printed JSON {tool, version, config, result}; the exponent
           p = inf is written as the string \"inf\".

EXIT CODES
  0 success, 1 analysis error, 2 usage error or unreadable input.

ENVIRONMENT
  CZSPACE_OUT_DIR  directory for outputs whose path is not given (default .)";

#[derive(Parser, Debug)]
#[command(name = "czspace", version, about = "Pointwise regularity analysis in weighted Calderón–Zygmund spaces", after_long_help = FORMATS)]
pub struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sample a synthetic signal and save it (.szf or .csv by extension).
    Generate(GenerateArgs),
    /// Oscillation profiles, seminorms and membership verdicts at probe points.
    Analyze(AnalyzeArgs),
    /// Extract a jet at a point by mollification.
    Jet(JetArgs),
    /// Whitney extension of a one-dimensional jet field.
    Extend(ExtendArgs),
    /// Evaluate a weight, its dilation function and its indices.
    Boyd(BoydArgs),
    /// Run a seeded experiment and write its report and ratio table.
    Experiment(ExperimentArgs),
}

fn parse_p(s: &str) -> Result<f64, String> {
    parse_exponent(s)
}

fn parse_phi(s: &str) -> Result<String, String> {
    boyd::parse(s).map(|_| s.to_string()).map_err(|e| e.to_string())
}

fn phi_of(s: &str) -> BoydExpr {
    boyd::parse(s).expect("validated by the argument parser")
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Brownian,
    Weierstrass,
    Cusp,
    Poly,
    Sine,
}

#[derive(Args, Debug, Serialize)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    /// Samples per axis.
    #[arg(long, default_value_t = 4097)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Weierstrass amplitude ratio.
    #[arg(long, default_value_t = 0.5)]
    pub a: f64,
    /// Weierstrass frequency ratio.
    #[arg(long, default_value_t = 3)]
    pub b: u32,
    /// Weierstrass terms (default: every term resolved by the grid).
    #[arg(long)]
    pub terms: Option<usize>,
    /// Cusp exponent.
    #[arg(long, default_value_t = 0.6)]
    pub u: f64,
    /// Cusp center (one value per axis).
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub x0: Vec<f64>,
    /// Polynomial coefficients `c_k` of `sum c_k (x - x0)^k` (1-D).
    #[arg(long, value_delimiter = ',', default_value = "0,1")]
    pub coeffs: Vec<f64>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub dim: u8,
    #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
    pub lo: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub hi: f64,
    /// Output path (default: `<kind>.szf` in the output directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct InputArgs {
    /// Input signal (.szf, or .csv with --origin and --spacing).
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Grid origin for CSV input (one value per axis).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub origin: Option<Vec<f64>>,
    /// Grid spacing for CSV input.
    #[arg(long)]
    pub spacing: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Exponent of the norm: a number >= 1.1 or `inf`.
    #[arg(long, default_value = "2", value_parser = parse_p)]
    #[serde(with = "crate::report::exponent")]
    pub p: f64,
    /// Weight, e.g. `t^0.5 * L2^0.5`.
    #[arg(long, value_parser = parse_phi)]
    pub phi: String,
    /// Polynomial degree.
    #[arg(long, default_value_t = 0)]
    pub degree: usize,
    #[arg(long, default_value = "per-ball")]
    pub policy: Policy,
    /// Number of evenly spread probe points.
    #[arg(long, default_value_t = 64)]
    pub points: usize,
    /// Explicit probe points (1-D), in addition to --points.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub x: Vec<f64>,
    /// Dyadic radii from a quarter of the window down to eight cells.
    #[arg(long, default_value_t = 12)]
    pub radii_levels: usize,
    /// Minimal decay slope of the little-o test.
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    /// Required relative drop of the little-o test.
    #[arg(long, default_value_t = 0.2)]
    pub tau: f64,
    /// Report path (default: `analyze.json` in the output directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the ratio curves as CSV.
    #[arg(long)]
    pub ratios_csv: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct JetArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Point (one value per axis).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub x: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    pub degree: usize,
    /// Largest mollification scale (default: 256 cells, clipped to the window).
    #[arg(long)]
    pub eps_max: Option<f64>,
    /// Number of dyadic scales below --eps-max.
    #[arg(long, default_value_t = 7)]
    pub eps_levels: usize,
    /// Lower index of the weight, for the extrapolation exponent.
    #[arg(long)]
    pub lower_index: Option<f64>,
    /// Output path (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct ExtendArgs {
    /// JSON list of `{"x": .., "coeffs": [..]}`, coefficients `D^k P(x) / k!`.
    #[arg(long)]
    pub jets: PathBuf,
    #[arg(long, value_parser = parse_phi)]
    pub phi: String,
    #[arg(long)]
    pub degree: usize,
    /// Order of the difference in the bound check (must exceed the upper index).
    #[arg(long)]
    pub m: Option<usize>,
    /// Bound M of the field; the compatibility cap is 10 M / phi(1).
    #[arg(long, default_value_t = 1.0)]
    pub bound: f64,
    /// Samples of the extension written to --out.
    #[arg(long, default_value_t = 4097)]
    pub samples: usize,
    /// Output path for the sampled extension (default: `extension.szf` in the output directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Measure the constant of the difference bound and print it.
    #[arg(long)]
    pub verify: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct BoydArgs {
    #[arg(long, value_parser = parse_phi)]
    pub phi: String,
    /// Print exact and numeric indices.
    #[arg(long)]
    pub indices: bool,
    /// Values `phi(t)`.
    #[arg(long, value_delimiter = ',')]
    pub eval: Vec<f64>,
    /// Values of the dilation function `sup_s phi(st) / phi(s)`.
    #[arg(long, value_delimiter = ',')]
    pub dilation: Vec<f64>,
    /// Admissibility for this exponent (with --dim).
    #[arg(long, value_parser = parse_p)]
    #[serde(with = "opt_exponent")]
    pub p: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    /// Print the fractional band n with n < lower <= upper < n + 1.
    #[arg(long)]
    pub band: bool,
}

mod opt_exponent {
    use serde::Serializer;

    pub fn serialize<S: Serializer>(p: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match p {
            Some(v) => crate::report::exponent::serialize(v, s),
            None => s.serialize_none(),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentName {
    Rademacher,
    BrownianLil,
    SmoothRemark,
    Inclusions,
}

#[derive(Args, Debug, Serialize)]
pub struct ExperimentArgs {
    #[arg(value_enum)]
    pub name: ExperimentName,
    /// Seed of the Brownian path.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Samples of the generated signal.
    #[arg(long)]
    pub n: Option<usize>,
    /// Weight (rademacher, smooth-remark).
    #[arg(long, value_parser = parse_phi)]
    pub phi: Option<String>,
    #[arg(long, value_parser = parse_p)]
    #[serde(with = "opt_exponent")]
    pub p: Option<f64>,
    #[arg(long)]
    pub degree: Option<usize>,
    /// Number of probe points.
    #[arg(long)]
    pub points: Option<usize>,
    /// Signal for rademacher and smooth-remark.
    #[arg(long, value_enum)]
    pub generator: Option<Kind>,
    /// Output directory (default: the output directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Errors split by exit code.
enum Failure {
    Usage(String),
    Analysis(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Analysis(e)
    }
}

fn default_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."))
}

fn resolve(out: &Option<PathBuf>, name: &str) -> PathBuf {
    out.clone().unwrap_or_else(|| default_dir().join(name))
}

#[derive(Serialize)]
struct Envelope<'a, C: Serialize, R: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config: &'a C,
    result: R,
}

fn envelope<C: Serialize, R: Serialize>(command: &'static str, config: &C, result: R) -> String {
    report::to_json(&Envelope {
        tool: "czspace",
        version: VERSION,
        command,
        config,
        result,
    })
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    signals::write_atomic(path, bytes).map_err(Failure::Analysis)
}

fn load_input(args: &InputArgs) -> Result<SampledFunction, Failure> {
    let path = &args.input;
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let loaded = if is_csv {
        let (Some(origin), Some(spacing)) = (&args.origin, args.spacing) else {
            return Err(Failure::Usage("CSV input needs --origin and --spacing".into()));
        };
        signals::load_csv(path, origin, spacing)
    } else {
        signals::load(path)
    };
    loaded.map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    if let Some(j) = cli.jobs {
        if j == 0 {
            eprintln!("error: --jobs must be positive");
            return 2;
        }
        // a global pool can be set once per process; later calls keep the first
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j).build_global();
    }
    let outcome = match &cli.command {
        Command::Generate(a) => generate(a),
        Command::Analyze(a) => analyze(a),
        Command::Jet(a) => jet(a),
        Command::Extend(a) => extend(a),
        Command::Boyd(a) => boyd_cmd(a),
        Command::Experiment(a) => experiment(a),
    };
    match outcome {
        Ok(()) => 0,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            2
        }
        Err(Failure::Analysis(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn generate(a: &GenerateArgs) -> Result<(), Failure> {
    let d = a.dim as usize;
    let grid = if d == 1 {
        GridSpec::interval(a.lo, a.hi, a.n)
    } else {
        GridSpec::square(a.lo, a.hi, a.n)
    }
    .map_err(|e| Failure::Usage(e.to_string()))?;
    let f = match a.kind {
        Kind::Brownian => {
            if d != 1 {
                return Err(Failure::Usage("brownian paths are one-dimensional".into()));
            }
            signals::gen_brownian(a.n, a.hi - a.lo, a.seed)?
        }
        Kind::Weierstrass => {
            let terms = a.terms.unwrap_or_else(|| experiments::nyquist_terms(a.b, grid.spacing));
            signals::gen_weierstrass(a.a, a.b, terms, &grid)?
        }
        Kind::Cusp => {
            let x0 = if a.x0.len() == 1 && d == 2 { vec![a.x0[0]; 2] } else { a.x0.clone() };
            signals::gen_cusp(&x0, a.u, &grid)?
        }
        Kind::Poly => {
            if d != 1 || a.coeffs.is_empty() {
                return Err(Failure::Usage("--kind poly needs --dim 1 and at least one coefficient".into()));
            }
            let jet = PolyJet::new(vec![a.x0[0]], a.coeffs.len() - 1, a.coeffs.clone())?;
            signals::gen_poly(&jet, &grid)?
        }
        Kind::Sine => signals::from_fn(&grid, |x| x.iter().map(|v| v.sin()).sum(), "sine"),
    };
    let name = format!("{}.szf", serde_json::to_value(a.kind).unwrap().as_str().unwrap());
    let out = resolve(&a.out, &name);
    if out.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        signals::save_csv(&f, &out)?;
    } else {
        signals::save(&f, &out)?;
    }
    println!("wrote {} ({} samples)", out.display(), f.len());
    Ok(())
}

#[derive(Serialize)]
struct AnalyzeResult {
    summary: oscillation::BatchSummary,
    radii: Vec<f64>,
    reports: Vec<oscillation::MembershipReport>,
}

fn analyze(a: &AnalyzeArgs) -> Result<(), Failure> {
    let f = load_input(&a.input)?;
    let phi = phi_of(&a.phi);
    let radii = default_radii(&f, a.radii_levels);
    if radii.is_empty() {
        return Err(Failure::Analysis(Error::InsufficientSamples { found: 0, needed: 1 }));
    }
    let mut points = oscillation::probe_points(&f, a.points, radii[0]);
    if !a.x.is_empty() {
        if f.dim() != 1 {
            return Err(Failure::Usage("--x takes 1-D points".into()));
        }
        points.extend(a.x.iter().map(|x| f.snap(&[*x])));
    }
    let cfg = MembershipConfig {
        p: a.p,
        degree: a.degree,
        phi,
        policy: a.policy,
        radii: radii.clone(),
        little_o: LittleOConfig {
            delta: a.delta,
            tau: a.tau,
            ..LittleOConfig::default()
        },
    };
    let b = batch_membership(&f, &points, &cfg)?;
    let out = resolve(&a.out, "analyze.json");
    let mut effective = serde_json::to_value(a).expect("arguments serialize");
    effective["out"] = serde_json::json!(out);
    let text = envelope(
        "analyze",
        &effective,
        AnalyzeResult {
            summary: b.summary.clone(),
            radii,
            reports: b.reports.clone(),
        },
    );
    write(&out, text.as_bytes())?;
    if let Some(csv) = &a.ratios_csv {
        let rows = b.reports.iter().flat_map(|r| {
            r.ratios.iter().map(move |q| {
                let pt: Vec<String> = r.point.iter().map(|v| fmt_f64(*v)).collect();
                vec![pt.join(" "), fmt_f64(q.r), fmt_f64(q.rho)]
            })
        });
        write(csv, report::to_csv(&["point", "r", "rho"], rows).as_bytes())?;
    }
    let s = &b.summary;
    println!(
        "{} points: {} pass, {} fail, {} indeterminate, {} errors; big-O holds at {}; report {}",
        s.points,
        s.pass,
        s.fail,
        s.indeterminate,
        s.errors,
        s.big_o_pass,
        out.display()
    );
    Ok(())
}

fn jet(a: &JetArgs) -> Result<(), Failure> {
    let f = load_input(&a.input)?;
    if a.x.len() != f.dim() {
        return Err(Failure::Usage(format!("--x needs {} coordinate(s)", f.dim())));
    }
    let eps = match a.eps_max {
        Some(e) => jet_extract::dyadic_epsilons(e, a.eps_levels),
        None => jet_extract::default_epsilons(&f, &a.x),
    };
    let ex = jet_extract::extract_jet(&f, &a.x, a.degree, &eps, a.lower_index)?;
    let text = envelope("jet", a, &ex);
    match &a.out {
        Some(p) => write(p, text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(())
}

#[derive(serde::Deserialize)]
struct JetEntry {
    x: f64,
    coeffs: Vec<f64>,
}

#[derive(Serialize)]
struct ExtendResult {
    compatibility: whitney::Compatibility,
    domain: [f64; 2],
    intervals: usize,
    samples: PathBuf,
    bound: Option<whitney::BoundReport>,
}

fn extend(a: &ExtendArgs) -> Result<(), Failure> {
    let text = std::fs::read_to_string(&a.jets)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", a.jets.display())))?;
    let mut entries: Vec<JetEntry> = serde_json::from_str(&text)
        .map_err(|e| Failure::Usage(format!("cannot parse {}: {e}", a.jets.display())))?;
    entries.sort_by(|p, q| p.x.total_cmp(&q.x));
    let phi = phi_of(&a.phi);
    let jets = entries
        .iter()
        .map(|e| PolyJet::new(vec![e.x], a.degree, e.coeffs.clone()))
        .collect::<crate::Result<Vec<_>>>()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let field = JetField::new(entries.iter().map(|e| e.x).collect(), jets, phi.clone(), a.bound)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let compatibility = if field.points.len() >= 2 {
        whitney::check_compatibility(&field)?
    } else {
        whitney::Compatibility {
            compatible: true,
            measured: 0.0,
            cap: field.cap(),
            worst: None,
        }
    };
    let ext = whitney::extend(&field)?;
    let out = resolve(&a.out, "extension.szf");
    signals::save(&ext.sample(a.samples)?, &out)?;
    let bound = if a.verify {
        let m = a.m.unwrap_or(a.degree + 1);
        Some(whitney::verify_bound(&ext, &phi, a.degree, m, &BoundGrid::default())?)
    } else {
        None
    };
    let result = ExtendResult {
        compatibility,
        domain: ext.domain,
        intervals: ext.intervals.len(),
        samples: out,
        bound,
    };
    print!("{}", envelope("extend", a, &result));
    Ok(())
}

#[derive(Serialize)]
struct BoydResult {
    expression: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    indices: Option<boyd::BoydIndices>,
    #[serde(skip_serializing_if = "Option::is_none")]
    numeric_indices: Option<boyd::BoydIndices>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    eval: Vec<[f64; 2]>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    dilation: Vec<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    admissible: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    band: Option<usize>,
}

fn boyd_cmd(a: &BoydArgs) -> Result<(), Failure> {
    let phi = phi_of(&a.phi);
    let grid = DilationGrid::default();
    let exact = boyd::indices(&phi);
    let mut r = BoydResult {
        expression: phi.to_string(),
        indices: None,
        numeric_indices: None,
        eval: Vec::new(),
        dilation: Vec::new(),
        admissible: None,
        band: None,
    };
    if a.indices {
        r.indices = Some(exact);
        r.numeric_indices = Some(boyd::numeric_indices(&phi, &grid)?);
    }
    for &t in &a.eval {
        r.eval.push([t, phi.eval(t)?]);
    }
    for &t in &a.dilation {
        r.dilation.push([t, boyd::dilation(&phi, t, &grid)?.value]);
    }
    if let Some(p) = a.p {
        r.admissible = Some(boyd::admissible(&exact, p, a.dim)?);
    }
    if a.band {
        r.band = Some(boyd::fractional_band(&exact)?);
    }
    if let Some(ind) = &r.indices {
        println!("lower {} upper {}", fmt_f64(ind.lower), fmt_f64(ind.upper));
    }
    print!("{}", envelope("boyd", a, &r));
    Ok(())
}

fn generator_for(kind: Kind, n: Option<usize>, seed: Option<u64>) -> Generator {
    let samples = n.unwrap_or(1 << 14);
    match kind {
        Kind::Brownian => Generator::Brownian {
            samples: n.unwrap_or(1 << 18),
            seed: seed.unwrap_or(1),
        },
        Kind::Weierstrass => Generator::Weierstrass {
            a: 0.5,
            b: 3,
            terms: None,
            lo: 0.0,
            hi: 1.0,
            samples: n.unwrap_or(1 << 16),
        },
        Kind::Cusp => Generator::Cusp {
            x0: 0.0,
            u: 0.6,
            lo: -1.0,
            hi: 1.0,
            samples: samples + 1,
        },
        Kind::Poly => Generator::Poly {
            coeffs: vec![1.0, -1.0, 0.5],
            lo: -1.0,
            hi: 1.0,
            samples,
        },
        Kind::Sine => Generator::Sine {
            lo: 0.0,
            hi: 4.0,
            samples,
        },
    }
}

fn experiment(a: &ExperimentArgs) -> Result<(), Failure> {
    let start = Instant::now();
    let unused: &[(&str, bool)] = match a.name {
        ExperimentName::Rademacher | ExperimentName::SmoothRemark => &[],
        ExperimentName::BrownianLil => &[
            ("--phi", a.phi.is_some()),
            ("--degree", a.degree.is_some()),
            ("--generator", a.generator.is_some()),
        ],
        ExperimentName::Inclusions => &[
            ("--phi", a.phi.is_some()),
            ("--p", a.p.is_some()),
            ("--degree", a.degree.is_some()),
            ("--generator", a.generator.is_some()),
            ("--n", a.n.is_some()),
        ],
    };
    if let Some((flag, _)) = unused.iter().find(|(_, set)| *set) {
        return Err(Failure::Usage(format!(
            "{flag} does not apply to experiment {}",
            serde_json::to_value(a.name).unwrap().as_str().unwrap()
        )));
    }
    let phi = a.phi.as_deref().map(phi_of);
    let rep: ExperimentReport = match a.name {
        ExperimentName::Rademacher => {
            let mut cfg = RademacherConfig::weierstrass();
            if let Some(k) = a.generator {
                cfg.generator = generator_for(k, a.n, a.seed);
            } else if let Some(n) = a.n {
                cfg.generator = generator_for(Kind::Weierstrass, Some(n), None);
            }
            if let Some(phi) = phi {
                cfg.phi = phi;
            }
            cfg.p = a.p.unwrap_or(cfg.p);
            cfg.degree = a.degree.unwrap_or(cfg.degree);
            cfg.points = a.points.unwrap_or(cfg.points);
            experiments::exp_rademacher(&cfg)?
        }
        ExperimentName::BrownianLil => {
            let d = BrownianConfig::default();
            let cfg = BrownianConfig {
                seed: a.seed.unwrap_or(d.seed),
                samples: a.n.unwrap_or(d.samples),
                p: a.p.unwrap_or(d.p),
                points: a.points.unwrap_or(d.points),
                ..d
            };
            experiments::exp_brownian_lil(&cfg)?
        }
        ExperimentName::SmoothRemark => {
            let mut cfg = SmoothConfig::sine();
            if let Some(k) = a.generator {
                cfg.generator = generator_for(k, a.n, a.seed);
            }
            if let Some(phi) = phi {
                cfg.phi = phi;
            }
            cfg.p = a.p.unwrap_or(cfg.p);
            cfg.degree = a.degree.unwrap_or(cfg.degree);
            cfg.points = a.points.unwrap_or(cfg.points);
            experiments::exp_smooth_remark(&cfg)?
        }
        ExperimentName::Inclusions => {
            let mut cfg = InclusionConfig::default();
            cfg.points = a.points.unwrap_or(cfg.points);
            if let Some(seed) = a.seed {
                for c in &mut cfg.cases {
                    if let Generator::Brownian { seed: s, .. } = &mut c.generator {
                        *s = seed;
                    }
                }
            }
            experiments::exp_inclusions(&cfg)?
        }
    };
    let dir = a.out.clone().unwrap_or_else(default_dir);
    std::fs::create_dir_all(&dir).map_err(|e| Failure::Usage(format!("cannot create {}: {e}", dir.display())))?;
    let stem = serde_json::to_value(a.name).unwrap().as_str().unwrap().to_string();
    let json_path = dir.join(format!("{stem}.json"));
    let csv_path = dir.join(format!("{stem}_ratios.csv"));
    let mut effective = serde_json::to_value(a).expect("arguments serialize");
    effective["out"] = serde_json::json!(dir);
    write(&json_path, envelope("experiment", &effective, &rep).as_bytes())?;
    write(&csv_path, rep.ratios_csv().as_bytes())?;
    for c in &rep.checks {
        println!(
            "{} {} = {} ({})",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            fmt_f64(c.value),
            c.condition
        );
    }
    println!("report {}", json_path.display());
    eprintln!("runtime {:.2}s", start.elapsed().as_secs_f64());
    Ok(())
}
