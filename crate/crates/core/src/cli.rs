//! The `compent` command line.
//!
//! Exit codes: 0 success, 1 domain failure (invalid model, infeasible
//! target, empty feasible set, strict-mode regression), 2 usage or parse
//! failure.

use std::ffi::OsString;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;

use crate::chain::ChainStats;
use crate::entropy::EntropyReport;
use crate::error::Error;
use crate::io::{fmt_sig, write_identification_csv, write_path_csv, write_sweep_csv, Builtin, ModelDocument};
use crate::maxent::{
    identify, implied_input, maxent_fixed_steady_state, maxent_fixed_transit, GammaConstraints, IdentifyOptions,
    Objective, SteadyStateConstraintProblem, TransitConstraintProblem,
};
use crate::sampler::{estimate_with, path_record, Estimate, PathSampler};
use crate::system::{validate, CompartmentalSystem, DEFAULT_TOL};
use crate::zoo::{range_values, sweep, Family, Features, SweepRow, WangParameters};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "COMPENT_WORKERS";

const TEXT_DIGITS: usize = 4;

#[derive(Debug, Parser)]
#[command(
    name = "compent",
    version,
    about = "Path entropy of compartmental systems in equilibrium"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a model and list every violated invariant.
    Validate(ModelArgs),
    /// Chain statistics and entropy measures of a model.
    Analyze(AnalyzeArgs),
    /// Monte Carlo estimates compared with the exact values.
    Simulate(SimulateArgs),
    /// Sweep a model family over a parameter range.
    Sweep(SweepArgs),
    /// Emit the maximum-entropy model for a constraint class.
    Maxent(MaxentArgs),
    /// Select a two-pool model from transfer-function coefficients.
    Identify(IdentifyArgs),
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Model document (TOML).
    #[arg(conflicts_with = "builtin", required_unless_present = "builtin")]
    pub file: Option<PathBuf>,
    /// Builtin model: emanuel[:xi], wang[:epsilon], table1:row[:lambda].
    #[arg(long)]
    pub builtin: Option<String>,
    /// Relative tolerance for sign and singularity checks.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LogBase {
    Nats,
    Bits,
}

impl LogBase {
    fn factor(self) -> f64 {
        match self {
            LogBase::Nats => 1.0,
            LogBase::Bits => 1.0 / std::f64::consts::LN_2,
        }
    }
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Display unit for entropies.
    #[arg(long, value_enum, default_value_t = LogBase::Nats)]
    pub log_base: LogBase,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 100_000)]
    pub paths: u64,
    #[arg(long, env = WORKERS_ENV)]
    pub workers: Option<usize>,
    /// Per-path CSV output.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Fail when any |z| exceeds 5.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyName {
    Emanuel,
    Wang,
    Custom,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    pub family: FamilyName,
    /// start:stop:step
    pub range: String,
    /// Sweep CSV output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Fail on the first invalid parameter value instead of skipping it.
    #[arg(long)]
    pub strict: bool,
    /// Base model for the custom family (its matrix is scaled by the swept value).
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, env = WORKERS_ENV)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub mu_b: Option<f64>,
    #[arg(long)]
    pub f_npp: Option<f64>,
    #[arg(long)]
    pub k_s: Option<f64>,
    #[arg(long)]
    pub v_s: Option<f64>,
}

#[derive(Debug, Args)]
pub struct MaxentArgs {
    #[command(subcommand)]
    pub class: MaxentClass,
}

#[derive(Debug, Subcommand)]
pub enum MaxentClass {
    /// Fixed input vector and mean transit time.
    Transit {
        #[arg(long = "d")]
        d: Option<usize>,
        /// Comma-separated input vector (default: all input into pool 1).
        #[arg(long, value_delimiter = ',')]
        u: Option<Vec<f64>>,
        #[arg(long = "T", allow_negative_numbers = true)]
        t: f64,
        /// Recompute the constraint from the emitted model.
        #[arg(long)]
        verify: bool,
    },
    /// Fixed steady-state vector.
    Steady {
        #[arg(long, value_delimiter = ',', required = true)]
        xstar: Vec<f64>,
        /// Ignored unless it matches the implied input sqrt(x*).
        #[arg(long, value_delimiter = ',')]
        u: Option<Vec<f64>>,
        #[arg(long)]
        verify: bool,
    },
}

#[derive(Debug, Args)]
pub struct IdentifyArgs {
    /// gamma1,gamma2,gamma3
    #[arg(long, value_delimiter = ',', num_args = 1, required = true)]
    pub gamma: Vec<f64>,
    #[arg(long, default_value_t = 0.2)]
    pub mesh: f64,
    /// lo:hi for every start coordinate.
    #[arg(long, default_value = "0:5")]
    pub bounds: String,
    #[arg(long, default_value = "rate-per-time")]
    pub objective: String,
    /// Comma-separated input vector.
    #[arg(long, value_delimiter = ',', default_value = "1,0")]
    pub u: Vec<f64>,
    /// Points of the dense one-dimensional scan.
    #[arg(long, default_value_t = 100_001)]
    pub scan_points: usize,
    /// CSV of the distinct local maxima.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// CSV with one row per converged grid start.
    #[arg(long)]
    pub csv_all: Option<PathBuf>,
    #[arg(long, env = WORKERS_ENV)]
    pub workers: Option<usize>,
}

/// A failure carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn domain(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_DOMAIN,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Document(_) => EXIT_USAGE,
            _ => EXIT_DOMAIN,
        };
        let message = match &e {
            Error::EmptyFeasibleSet(_) => format!("EMPTY_FEASIBLE_SET: {e}"),
            _ => e.to_string(),
        };
        Failure { code, message }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::domain(format!("i/o error: {e}"))
    }
}

type CmdResult = Result<i32, Failure>;

/// Parses `args` (including the program name) and runs the command,
/// writing reports to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if code == EXIT_OK {
                write!(out, "{rendered}")
            } else {
                write!(err, "{rendered}")
            };
            return code;
        }
    };
    match execute(&cli.command, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

pub fn execute(command: &Command, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    match command {
        Command::Validate(a) => cmd_validate(a, out),
        Command::Analyze(a) => cmd_analyze(a, out),
        Command::Simulate(a) => cmd_simulate(a, out),
        Command::Sweep(a) => cmd_sweep(a, out, err),
        Command::Maxent(a) => cmd_maxent(a, out, err),
        Command::Identify(a) => cmd_identify(a, out),
    }
}

fn default_workers(flag: Option<usize>) -> usize {
    flag.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1)
}

fn read_document(path: &Path) -> Result<ModelDocument, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    Ok(ModelDocument::parse(&text)?)
}

fn load_document(model: &ModelArgs) -> Result<ModelDocument, Failure> {
    match (&model.file, &model.builtin) {
        (Some(path), None) => read_document(path),
        (None, Some(spec)) => Ok(ModelDocument::from_builtin(Builtin::from_spec(
            &spec.replacen('=', ":", 1),
        )?)),
        _ => Err(Failure::usage("give either a model file or --builtin")),
    }
}

fn load_system(model: &ModelArgs) -> Result<CompartmentalSystem, Failure> {
    let doc = load_document(model)?;
    let label = match (&doc.label, &doc.builtin) {
        (Some(l), _) => Some(l.clone()),
        (None, Some(b)) => b.build()?.label().map(str::to_string),
        (None, None) => None,
    };
    let (u, b) = doc.raw_parts()?;
    let sys = CompartmentalSystem::with_tolerance(u, b, model.tol)?;
    Ok(match label {
        Some(l) => sys.labeled(l),
        None => sys,
    })
}

fn t(x: f64) -> String {
    fmt_sig(x, TEXT_DIGITS)
}

fn t_vec(v: impl IntoIterator<Item = f64>) -> String {
    v.into_iter().map(t).collect::<Vec<_>>().join(" ")
}

fn cmd_validate(a: &ModelArgs, out: &mut dyn Write) -> CmdResult {
    let doc = load_document(a)?;
    let (u, b) = doc.raw_parts()?;
    let report = validate(&b, &u, a.tol);
    if report.is_valid() {
        writeln!(out, "valid (dimension {})", u.len())?;
        return Ok(EXIT_OK);
    }
    for v in &report.violations {
        writeln!(out, "{}\t{}\t{}", v.code, v.location, fmt_sig(v.magnitude, TEXT_DIGITS))?;
    }
    Ok(EXIT_DOMAIN)
}

fn cmd_analyze(a: &AnalyzeArgs, out: &mut dyn Write) -> CmdResult {
    let sys = load_system(&a.model)?;
    let stats = ChainStats::new(&sys)?;
    let r = EntropyReport::from_stats(&sys, &stats)?;
    let k = a.log_base.factor();
    let unit = match a.log_base {
        LogBase::Nats => "nats",
        LogBase::Bits => "bits",
    };
    let d = sys.dimension();
    match a.format {
        Format::Text => {
            if let Some(label) = sys.label() {
                writeln!(out, "model            {label}")?;
            }
            writeln!(out, "dimension        {d}")?;
            writeln!(out, "entropy unit     {unit}")?;
            writeln!(out, "steady state     {}", t_vec(stats.x_star.iter().copied()))?;
            writeln!(out, "H                {}", t(k * r.path_entropy))?;
            writeln!(out, "  H_beta         {}", t(k * r.decomposition.entry))?;
            writeln!(out, "  H_jump         {}", t(k * r.decomposition.jump))?;
            writeln!(out, "  H_sojourn      {}", t(k * r.decomposition.sojourn))?;
            writeln!(out, "theta            {}", t(k * r.rate_per_time))?;
            writeln!(out, "theta_J          {}", t(k * r.rate_per_jump))?;
            writeln!(out, "E[T]             {}", t(stats.mean_transit))?;
            writeln!(out, "E[N]             {}", t(stats.expected_jumps))?;
            writeln!(out, "E[O]             {}", t_vec(stats.mean_occupation.iter().copied()))?;
            writeln!(
                out,
                "P(exit)          {}",
                t_vec(stats.exit_distribution.iter().copied())
            )?;
            writeln!(out, "one-pool lambda  {}", t(r.one_pool.lambda))?;
            writeln!(out, "one-pool H       {}", t(k * r.one_pool.path_entropy))?;
            writeln!(out, "one-pool theta   {}", t(k * r.one_pool.rate_per_time))?;
            writeln!(out, "one-pool theta_J {}", t(k * r.one_pool.rate_per_jump))?;
            for &j in &r.zero_rate_pools {
                writeln!(out, "note: pool {} has zero exit rate", j + 1)?;
            }
        }
        Format::Csv => {
            let row = SweepRow {
                param: f64::NAN,
                stocks: stats.x_star.clone(),
                exit_rates: stats.lambda.clone(),
                mean_transit: stats.mean_transit,
                expected_jumps: stats.expected_jumps,
                report: scale_report(&r, k),
            };
            let mut buf = Vec::new();
            write_sweep_csv(&mut buf, d, [&row])?;
            // no sweep parameter here: drop the leading column
            for line in String::from_utf8_lossy(&buf).lines() {
                writeln!(out, "{}", line.split_once(',').map_or(line, |(_, rest)| rest))?;
            }
        }
    }
    Ok(EXIT_OK)
}

fn scale_report(r: &EntropyReport, k: f64) -> EntropyReport {
    let mut s = r.clone();
    s.path_entropy *= k;
    s.decomposition.entry *= k;
    s.decomposition.jump *= k;
    s.decomposition.sojourn *= k;
    s.rate_per_time *= k;
    s.rate_per_jump *= k;
    s.one_pool.path_entropy *= k;
    s.one_pool.rate_per_time *= k;
    s.one_pool.rate_per_jump *= k;
    s
}

fn cmd_simulate(a: &SimulateArgs, out: &mut dyn Write) -> CmdResult {
    if a.paths == 0 {
        return Err(Failure::usage("--paths must be at least 1"));
    }
    let sys = load_system(&a.model)?;
    let stats = ChainStats::new(&sys)?;
    let report = EntropyReport::from_stats(&sys, &stats)?;
    let sampler = PathSampler::new(&sys)?;
    let mc = estimate_with(&sampler, a.paths, a.seed, default_workers(a.workers))?;

    writeln!(out, "paths {}  seed {}", mc.n_paths, mc.seed)?;
    writeln!(
        out,
        "{:<12} {:>12} {:>12} {:>12} {:>8}",
        "quantity", "estimate", "std_error", "exact", "z"
    )?;
    let mut worst: f64 = 0.0;
    let mut line = |out: &mut dyn Write, name: &str, e: &Estimate, exact: f64| -> io::Result<()> {
        let z = e.z_score(exact);
        worst = worst.max(z.abs());
        writeln!(
            out,
            "{:<12} {:>12} {:>12} {:>12} {:>8}",
            name,
            t(e.estimate),
            t(e.std_error),
            t(exact),
            format!("{z:.2}")
        )
    };
    line(out, "E[T]", &mc.mean_transit, stats.mean_transit)?;
    line(out, "E[N]", &mc.mean_jumps, stats.expected_jumps)?;
    for (j, e) in mc.mean_occupation.iter().enumerate() {
        line(out, &format!("E[O{}]", j + 1), e, stats.mean_occupation[j])?;
    }
    for (j, e) in mc.exit_distribution.iter().enumerate() {
        line(out, &format!("P(E={})", j + 1), e, stats.exit_distribution[j])?;
    }
    line(out, "H", &mc.entropy, report.path_entropy)?;

    if let Some(path) = &a.csv {
        let mut w = BufWriter::new(fs::File::create(path)?);
        let records = (0..a.paths)
            .map(|k| path_record(&sampler, a.seed, k))
            .collect::<Result<Vec<_>, _>>()?;
        write_path_csv(&mut w, &records)?;
        w.flush()?;
    }
    if a.strict && worst > 5.0 {
        writeln!(out, "strict: max |z| = {worst:.2} exceeds 5")?;
        return Ok(EXIT_DOMAIN);
    }
    Ok(EXIT_OK)
}

fn parse_range(spec: &str) -> Result<(f64, f64, f64), Failure> {
    let parts: Vec<&str> = spec.split(':').collect();
    let nums: Option<Vec<f64>> = parts.iter().map(|p| p.trim().parse().ok()).collect();
    match nums.as_deref() {
        Some(&[a, b, c]) => Ok((a, b, c)),
        _ => Err(Failure::usage(format!("range must be start:stop:step, got {spec:?}"))),
    }
}

fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let (start, stop, step) = parse_range(&a.range)?;
    let values = range_values(start, stop, step).map_err(|e| Failure::usage(e.to_string()))?;
    let (family, name) = match a.family {
        FamilyName::Emanuel => (Family::Emanuel, "xi"),
        FamilyName::Wang => {
            let d = WangParameters::default();
            (
                Family::Wang(WangParameters {
                    mu_b: a.mu_b.unwrap_or(d.mu_b),
                    f_npp: a.f_npp.unwrap_or(d.f_npp),
                    k_s: a.k_s.unwrap_or(d.k_s),
                    v_s: a.v_s.unwrap_or(d.v_s),
                    epsilon: d.epsilon,
                }),
                "epsilon",
            )
        }
        FamilyName::Custom => {
            let path = a
                .model
                .as_ref()
                .ok_or_else(|| Failure::usage("custom sweeps need --model"))?;
            (Family::Custom(read_document(path)?.to_system()?), "factor")
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(default_workers(a.workers))
        .build()
        .map_err(|e| Failure::domain(e.to_string()))?;
    let results = pool.install(|| sweep(&family, &values));

    let mut rows = Vec::with_capacity(results.len());
    for (v, r) in values.iter().zip(results) {
        match r {
            Ok(row) => rows.push(row),
            Err(e) if a.strict => return Err(Failure::domain(format!("{name}={v}: {e}"))),
            Err(e) => writeln!(err, "skipped {name}={v}: {e}")?,
        }
    }
    if let Some(path) = &a.out {
        let dimension = rows.first().map_or(0, |r| r.stocks.len());
        let mut w = BufWriter::new(fs::File::create(path)?);
        write_sweep_csv(&mut w, dimension, &rows)?;
        w.flush()?;
    }
    writeln!(out, "rows {}", rows.len())?;
    let features = pool.install(|| Features::extract(&family, &rows));
    let mut feature = |label: &str, v: Option<f64>| -> io::Result<()> {
        match v {
            Some(x) => writeln!(out, "{label}_{name} {}", fmt_sig(x, 6)),
            None => Ok(()),
        }
    };
    feature("break_even", features.break_even)?;
    feature("theta_peak", features.theta_peak)?;
    feature("unit_rate", features.unit_rate)?;
    Ok(EXIT_OK)
}

fn emit_model(out: &mut dyn Write, sys: &CompartmentalSystem) -> io::Result<()> {
    write!(out, "{}", ModelDocument::from_system(sys).to_toml())
}

fn cmd_maxent(a: &MaxentArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    match &a.class {
        MaxentClass::Transit {
            d,
            u,
            t: target,
            verify,
        } => {
            let input = match (d, u) {
                (Some(d), Some(u)) if *d != u.len() => {
                    return Err(Failure::usage(format!("--d {d} but --u has {} entries", u.len())))
                }
                (_, Some(u)) => u.clone(),
                (Some(d), None) if *d > 0 => {
                    let mut u = vec![0.0; *d];
                    u[0] = 1.0;
                    u
                }
                _ => return Err(Failure::usage("give --d or --u")),
            };
            let problem = TransitConstraintProblem::new(DVector::from_vec(input), *target)?;
            let sys = maxent_fixed_transit(&problem)?;
            if *verify {
                let stats = ChainStats::new(&sys)?;
                let rel = (stats.mean_transit - target).abs() / target;
                if rel > 1e-9 {
                    return Err(Failure::domain(format!(
                        "verify: E[T] = {} (target {target})",
                        stats.mean_transit
                    )));
                }
                writeln!(err, "verified: E[T] = {}", stats.mean_transit)?;
            }
            emit_model(out, &sys)?;
        }
        MaxentClass::Steady { xstar, u, verify } => {
            let x = DVector::from_vec(xstar.clone());
            let problem = SteadyStateConstraintProblem::new(x.clone())?;
            let sys = maxent_fixed_steady_state(&problem)?;
            if let Some(u) = u {
                let implied = implied_input(&x);
                if u.len() != x.len() {
                    return Err(Failure::usage("--u and --xstar differ in length"));
                }
                if (DVector::from_vec(u.clone()) - &implied).amax() > 1e-9 * implied.amax() {
                    writeln!(
                        err,
                        "note: the maximiser is driven by u = sqrt(x*) = [{}]; --u is not used",
                        t_vec(implied.iter().copied())
                    )?;
                }
            }
            if *verify {
                let got = sys.steady_state()?.x_star;
                let rel = (&got - &x).amax() / x.amax();
                if rel > 1e-9 {
                    return Err(Failure::domain(format!("verify: steady state off by {rel:e}")));
                }
                writeln!(err, "verified: x* = [{}]", t_vec(got.iter().copied()))?;
            }
            emit_model(out, &sys)?;
        }
    }
    Ok(EXIT_OK)
}

fn parse_bounds(spec: &str) -> Result<(f64, f64), Failure> {
    let (lo, hi) = spec
        .split_once(':')
        .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)))
        .ok_or_else(|| Failure::usage(format!("bounds must be lo:hi, got {spec:?}")))?;
    if !(lo < hi) {
        return Err(Failure::usage(format!("bounds lo must be below hi, got {spec:?}")));
    }
    Ok((lo, hi))
}

fn cmd_identify(a: &IdentifyArgs, out: &mut dyn Write) -> CmdResult {
    let [g1, g2, g3] = a.gamma[..] else {
        return Err(Failure::usage(format!(
            "--gamma needs three values, got {}",
            a.gamma.len()
        )));
    };
    let objective: Objective = a.objective.parse().map_err(|e: Error| Failure::usage(e.to_string()))?;
    if !(a.mesh > 0.0) {
        return Err(Failure::usage("--mesh must be positive"));
    }
    if a.u.len() != 2 {
        return Err(Failure::usage("--u needs two values"));
    }
    let options = IdentifyOptions {
        input: DVector::from_vec(a.u.clone()),
        mesh: a.mesh,
        bounds: parse_bounds(&a.bounds)?,
        objective,
        scan_points: a.scan_points.max(1),
        workers: default_workers(a.workers),
        record_starts: a.csv_all.is_some(),
        ..IdentifyOptions::default()
    };
    let result = identify(&GammaConstraints::new(g1, g2, g3), &options)?;
    let best = &result.best;
    let p = &best.parameters;
    let b = result.best_system.matrix();

    writeln!(out, "objective        {}", result.objective)?;
    writeln!(
        out,
        "feasible B12     [{}, {}]",
        t(result.interval.lo),
        t(result.interval.hi)
    )?;
    writeln!(
        out,
        "grid starts      total {}  feasible {}  converged {}",
        result.starts_total, result.starts_feasible, result.starts_converged
    )?;
    writeln!(out, "local maxima     {}", result.local_maxima.len())?;
    writeln!(out, "objective max    {}", fmt_sig(best.value, 6))?;
    writeln!(out, "theta_max        {}", fmt_sig(best.theta, 6))?;
    writeln!(out, "H                {}", fmt_sig(best.path_entropy, 6))?;
    writeln!(out, "E[T]             {}", fmt_sig(best.mean_transit, 6))?;
    writeln!(
        out,
        "B12 B21 z1 z2    {} {} {} {}",
        fmt_sig(p.b12, 6),
        fmt_sig(p.b21, 6),
        fmt_sig(p.z1, 6),
        fmt_sig(p.z2, 6)
    )?;
    writeln!(
        out,
        "B                [[{}, {}], [{}, {}]]",
        t(b[(0, 0)]),
        t(b[(0, 1)]),
        t(b[(1, 0)]),
        t(b[(1, 1)])
    )?;
    writeln!(
        out,
        "scan             B12 {}  value {}  points {}",
        fmt_sig(result.scan.b12, 6),
        fmt_sig(result.scan.value, 6),
        result.scan.points
    )?;
    if let Some(path) = &a.csv {
        let mut maxima = result.clone();
        maxima.start_outcomes.clear();
        let mut w = BufWriter::new(fs::File::create(path)?);
        write_identification_csv(&mut w, &maxima)?;
        w.flush()?;
    }
    if let Some(path) = &a.csv_all {
        let mut w = BufWriter::new(fs::File::create(path)?);
        write_identification_csv(&mut w, &result)?;
        w.flush()?;
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("compent").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn analyze_table1_row2() {
        let (code, out, _) = run_str(&["analyze", "--builtin", "table1:2"]);
        assert_eq!(code, 0);
        assert!(out.contains("H                2.000"), "{out}");
        assert!(out.contains("theta_J          0.6667"), "{out}");
        let (_, bits, _) = run_str(&["analyze", "--builtin", "table1:2", "--log-base", "bits"]);
        assert!(bits.contains("H                2.885"), "{bits}");
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(
            run_str(&["simulate", "--builtin", "table1:4", "--seed", "1", "--paths", "0"]).0,
            2
        );
        assert_eq!(run_str(&["analyze"]).0, 2);
        assert_eq!(run_str(&["analyze", "--builtin", "bogus"]).0, 2);
        assert_eq!(run_str(&["frobnicate"]).0, 2);
    }

    #[test]
    fn domain_errors_exit_1() {
        let (code, _, err) = run_str(&["identify", "--gamma", "1,1,5"]);
        assert_eq!(code, 1);
        assert!(err.contains("EMPTY_FEASIBLE_SET"));
        assert_eq!(run_str(&["maxent", "steady", "--xstar", "0,1"]).0, 1);
    }

    #[test]
    fn maxent_emits_documents() {
        let (code, out, _) = run_str(&["maxent", "transit", "--d", "3", "--u", "1,0,0", "--T", "1", "--verify"]);
        assert_eq!(code, 0);
        let sys = ModelDocument::parse(&out).unwrap().to_system().unwrap();
        assert_eq!(sys.matrix()[(0, 0)], -3.0);
        assert_eq!(sys.matrix()[(2, 1)], 1.0);

        let (code, out, err) = run_str(&["maxent", "steady", "--u", "1,0", "--xstar", "4,1"]);
        assert_eq!(code, 0);
        assert!(err.contains("not used"));
        let sys = ModelDocument::parse(&out).unwrap().to_system().unwrap();
        assert_eq!(sys.matrix()[(0, 1)], 2.0);
        assert_eq!(sys.matrix()[(1, 0)], 0.5);
    }

    #[test]
    fn single_point_sweep_has_no_features() {
        let (code, out, _) = run_str(&["sweep", "emanuel", "5:5:1", "--workers", "1"]);
        assert_eq!(code, 0);
        assert_eq!(out, "rows 1\n");
    }

    #[test]
    fn range_and_bounds_grammar() {
        assert_eq!(parse_range("0.5:10:0.01").unwrap(), (0.5, 10.0, 0.01));
        assert!(parse_range("1:2").is_err());
        assert_eq!(parse_bounds("0:5").unwrap(), (0.0, 5.0));
        assert!(parse_bounds("5:0").is_err());
    }
}
