//! The `gtm` command line.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 a verification check
//! failed, 3 an internal invariant broke.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use itertools::Itertools;
use rayon::prelude::*;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::cascade::{
    cascade_to_threshold, check_decreasing_node, exact_cascade_distribution, max_prob_difference, threshold_to_cascade,
    DEFAULT_CASCADE_EXACT_CAP,
};
use crate::coupling::{
    build_counterexample, export_trace, import_trace, replay_matches, run_coupled, verify_grid, verify_trace,
    CouplingViolation, SetFunctionDocument, TraceDocument,
};
use crate::diffusion::{run, run_antisense, run_lazy, sample_thresholds, StagePlan, Trajectory};
use crate::error::{Error, Result};
use crate::influence::{
    empirical_distribution, estimate_mc, required_replicates, total_variation, ExactOracle, DEFAULT_EXACT_CAP,
};
use crate::maximize::{
    curve_csv, exhaustive_opt, greedy, heuristic_baseline, influence_curve, Evaluator, Heuristic, MaximizationResult,
    Method, DEFAULT_EXHAUSTIVE_BUDGET,
};
use crate::network::{
    check_properties, check_set_function, check_weight_properties, load_network_with, LoadOptions, PropertyReport,
    SocialNetwork, Violation, MAX_TABLE_UNIVERSE,
};
use crate::rng::{derive_seed, replicate_rng};
use crate::set::NodeSet;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFICATION: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

const VERSION: &str = env!("CARGO_PKG_VERSION");
const DEFAULT_EPSILON: f64 = 0.05;

#[derive(Debug, Parser)]
#[command(name = "gtm", version, about = "Threshold diffusion: simulation, influence, seed selection and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct Common {
    /// Network document (JSON).
    #[arg(long)]
    network: Option<PathBuf>,
    /// Comma-separated seed labels.
    #[arg(long, default_value = "")]
    seeds: String,
    /// Master seed for every random stream.
    #[arg(long, default_value_t = 0)]
    rng_seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    /// Reject non-monotone tables and order-dependent cascade activations.
    #[arg(long)]
    strict: bool,
}

#[derive(Debug, Clone, Args)]
struct Sampling {
    /// Monte Carlo replicates (overrides --epsilon).
    #[arg(long)]
    replicates: Option<u64>,
    #[arg(long, default_value_t = 0.95)]
    confidence: f64,
    /// Target confidence radius as a fraction of the weight range.
    #[arg(long)]
    epsilon: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Exact,
    Mc,
    GreedyExact,
    GreedyMc,
    Degree,
    Distance,
    Random,
    Exhaustive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Check {
    SubmodularLocal,
    SubmodularGlobal,
    Coupling,
    Piecemeal,
    Antisense,
    CascadeEquivalence,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the process once and print the trajectory.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Staged seeding: label groups separated by `;` (replaces --seeds).
        #[arg(long)]
        stages: Option<String>,
        /// Antisense tail injected after the stages.
        #[arg(long)]
        tail: Option<String>,
        /// Reveal thresholds only when needed.
        #[arg(long)]
        lazy: bool,
        /// With --b: export a coupled four-process trace for seed sets A and B.
        #[arg(long)]
        a: Option<String>,
        #[arg(long)]
        b: Option<String>,
    },
    /// Influence of a seed set.
    Influence {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "exact")]
        method: MethodArg,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Choose k seeds.
    Maximize {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value = "greedy-exact")]
        method: MethodArg,
        #[command(flatten)]
        sampling: Sampling,
        /// Largest number of subsets the exhaustive search may evaluate.
        #[arg(long, default_value_t = DEFAULT_EXHAUSTIVE_BUDGET)]
        budget: u128,
    },
    /// Run one property check; exits 2 when it fails.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        check: Check,
        /// Coupling: verify this exported trace instead of sampling.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        a: Option<String>,
        #[arg(long)]
        b: Option<String>,
        /// Antisense: tail set injected after --seeds.
        #[arg(long)]
        tail: Option<String>,
        /// Sampled traces (coupling) or runs per process (antisense).
        #[arg(long)]
        replicates: Option<u64>,
        /// Coupling: also check every point of a threshold grid with this step.
        #[arg(long)]
        grid_step: Option<f64>,
        /// Largest tolerated total-variation distance.
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Build a network whose influence is not submodular from a set function.
    Counterexample {
        #[command(flatten)]
        common: Common,
        /// Set function document: {"nodes": [...], "values": [...]}.
        #[arg(long)]
        function: PathBuf,
        #[arg(long)]
        a: Option<String>,
        #[arg(long)]
        b: Option<String>,
        /// Also write the constructed network document here.
        #[arg(long)]
        emit_network: Option<PathBuf>,
    },
    /// Influence against seed-set size for several methods.
    Curve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k_max: usize,
        /// Comma-separated methods.
        #[arg(long, default_value = "greedy-exact,degree,distance,random")]
        methods: String,
        #[command(flatten)]
        sampling: Sampling,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Simulate { common, .. }
            | Command::Influence { common, .. }
            | Command::Maximize { common, .. }
            | Command::Verify { common, .. }
            | Command::Counterexample { common, .. }
            | Command::Curve { common, .. } => common,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Command::Simulate { .. } => "simulate",
            Command::Influence { .. } => "influence",
            Command::Maximize { .. } => "maximize",
            Command::Verify { .. } => "verify",
            Command::Counterexample { .. } => "counterexample",
            Command::Curve { .. } => "curve",
        }
    }
}

/// A finished command: the report and whether its checks passed.
struct Outcome {
    report: Report,
    passed: bool,
    message: Option<String>,
}

enum Report {
    Json(Map<String, Value>),
    Csv(String),
}

impl Outcome {
    fn json(body: Value) -> Self {
        Outcome { report: Report::Json(into_map(body)), passed: true, message: None }
    }

    fn check(body: Value, passed: bool, message: impl Into<String>) -> Self {
        let message = (!passed).then(|| message.into());
        Outcome { report: Report::Json(into_map(body)), passed, message }
    }
}

fn into_map(body: Value) -> Map<String, Value> {
    match body {
        Value::Object(map) => map,
        other => Map::from_iter([("result".to_string(), other)]),
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let sink: &mut dyn Write = if code == EXIT_OK { stdout } else { stderr };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let result = match cli.command.common().workers {
        Some(0) => Err(Error::InvalidArgument("--workers must be positive".into())),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::InvalidArgument(e.to_string()))
            .and_then(|pool| pool.install(|| execute(&cli.command))),
        None => execute(&cli.command),
    };
    match result.and_then(|outcome| emit(&cli.command, outcome, stdout)) {
        Ok(None) => EXIT_OK,
        Ok(Some(msg)) => {
            let _ = writeln!(stderr, "verification failed: {msg}");
            EXIT_VERIFICATION
        }
        Err(e @ Error::InternalInvariant(_)) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_INTERNAL
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}

/// Entry point for the binary.
pub fn main_with_args(args: impl IntoIterator<Item = OsString>) -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_cli(args, &mut stdout.lock(), &mut stderr.lock())
}

fn sha256_file(path: &Path) -> Result<String> {
    Ok(hex::encode(Sha256::digest(fs::read(path)?)))
}

fn input_digest(command: &Command) -> Result<(&'static str, String)> {
    match command {
        Command::Counterexample { function, .. } => Ok(("function_sha256", sha256_file(function)?)),
        other => Ok(("network_sha256", sha256_file(network_path(other.common())?)?)),
    }
}

/// Writes the report; returns the failure message when a check failed.
fn emit(command: &Command, outcome: Outcome, stdout: &mut dyn Write) -> Result<Option<String>> {
    let common = command.common();
    let (digest_key, digest) = input_digest(command)?;
    let text = match outcome.report {
        Report::Json(mut map) => {
            map.insert("tool".into(), json!("gtm"));
            map.insert("version".into(), json!(VERSION));
            map.insert("command".into(), json!(command.name()));
            map.insert("rng_seed".into(), json!(common.rng_seed));
            map.insert(digest_key.into(), json!(digest));
            let mut s = serde_json::to_string_pretty(&Value::Object(map)).map_err(|e| Error::Parse(e.to_string()))?;
            s.push('\n');
            s
        }
        Report::Csv(body) => {
            format!(
                "# tool=gtm version={VERSION} command={} rng_seed={} {digest_key}={digest}\n{body}",
                command.name(),
                common.rng_seed
            )
        }
    };
    match &common.out {
        Some(path) => fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    if outcome.passed {
        return Ok(None);
    }
    Ok(Some(outcome.message.unwrap_or_else(|| "check failed".into())))
}

fn network_path(common: &Common) -> Result<&Path> {
    common.network.as_deref().ok_or_else(|| Error::InvalidArgument("--network is required".into()))
}

fn load(common: &Common) -> Result<SocialNetwork> {
    let text = fs::read_to_string(network_path(common)?)?;
    load_network_with(&text, LoadOptions { strict: common.strict })
}

fn labels(net: &SocialNetwork, set: &NodeSet) -> Value {
    json!(net.set_labels(set))
}

fn format_of(common: &Common, default: Format) -> Format {
    common.format.unwrap_or(default)
}

fn json_only(common: &Common) -> Result<()> {
    if common.format == Some(Format::Csv) {
        return Err(Error::InvalidArgument("this command only writes JSON".into()));
    }
    Ok(())
}

/// Replicate count for a Monte Carlo evaluator.
fn mc_replicates(sampling: &Sampling, range: f64) -> Result<u64> {
    if let Some(r) = sampling.replicates {
        if r == 0 {
            return Err(Error::InvalidArgument("--replicates must be positive".into()));
        }
        return Ok(r);
    }
    let eps = sampling.epsilon.unwrap_or(DEFAULT_EPSILON);
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon {eps} must be positive")));
    }
    required_replicates(range, eps * range.max(f64::MIN_POSITIVE), sampling.confidence)
}

fn mc_evaluator(net: &SocialNetwork, sampling: &Sampling, seed: u64) -> Result<Evaluator> {
    Ok(Evaluator::MonteCarlo {
        replicates: mc_replicates(sampling, net.weight().range(net.n()))?,
        confidence: sampling.confidence,
        seed,
    })
}

/// Exact when the network is small enough and no sampling knob was given.
fn default_evaluator(net: &SocialNetwork, sampling: &Sampling, seed: u64) -> Result<Evaluator> {
    if net.n() <= DEFAULT_EXACT_CAP && sampling.replicates.is_none() && sampling.epsilon.is_none() {
        Ok(Evaluator::Exact)
    } else {
        mc_evaluator(net, sampling, seed)
    }
}

fn execute(command: &Command) -> Result<Outcome> {
    match command {
        Command::Simulate { common, stages, tail, lazy, a, b } => simulate(common, stages, tail, *lazy, a, b),
        Command::Influence { common, method, sampling } => influence(common, *method, sampling),
        Command::Maximize { common, k, method, sampling, budget } => maximize(common, *k, *method, sampling, *budget),
        Command::Verify { common, check, trace, a, b, tail, replicates, grid_step, tolerance } => {
            json_only(common)?;
            let net = load(common)?;
            let opts =
                VerifyOptions { a, b, tail, replicates: *replicates, grid_step: *grid_step, tolerance: *tolerance };
            match check {
                Check::SubmodularLocal => verify_local(&net),
                Check::SubmodularGlobal => verify_global(&net),
                Check::Coupling => verify_coupling(&net, common, trace.as_deref(), &opts),
                Check::Piecemeal => verify_piecemeal(&net, common, &opts),
                Check::Antisense => verify_antisense(&net, common, &opts),
                Check::CascadeEquivalence => verify_cascade(&net, common),
            }
        }
        Command::Counterexample { common, function, a, b, emit_network } => {
            counterexample(common, function, a, b, emit_network.as_deref())
        }
        Command::Curve { common, k_max, methods, sampling } => curve(common, *k_max, methods, sampling),
    }
}

fn trajectory_body(net: &SocialNetwork, traj: &Trajectory) -> Value {
    json!({
        "trajectory": traj.sets.iter().map(|s| labels(net, s)).collect::<Vec<_>>(),
        "stage_boundaries": traj.stage_boundaries,
        "terminal": labels(net, traj.terminal()),
        "weight": net.weight().eval(traj.terminal()),
    })
}

fn simulate(
    common: &Common,
    stages: &Option<String>,
    tail: &Option<String>,
    lazy: bool,
    a: &Option<String>,
    b: &Option<String>,
) -> Result<Outcome> {
    let net = load(common)?;
    let mut rng = replicate_rng(common.rng_seed, 0);
    if a.is_some() || b.is_some() {
        let (Some(a), Some(b)) = (a, b) else {
            return Err(Error::InvalidArgument("--a and --b go together".into()));
        };
        json_only(common)?;
        let trace = run_coupled(&net, &net.parse_set(a)?, &net.parse_set(b)?, &mut rng)?;
        let doc = serde_json::to_value(export_trace(&trace, &net)).map_err(|e| Error::Parse(e.to_string()))?;
        return Ok(Outcome::json(json!({ "trace": doc })));
    }
    let plan = match stages {
        Some(groups) => {
            if !common.seeds.is_empty() {
                return Err(Error::InvalidArgument("use either --seeds or --stages".into()));
            }
            StagePlan::staged(groups.split(';').map(|g| net.parse_set(g)).collect::<Result<_>>()?)
        }
        None => StagePlan::single(net.parse_set(&common.seeds)?),
    };
    let plan = match tail {
        Some(t) => plan.with_tail(net.parse_set(t)?),
        None => plan,
    };
    let (traj, thresholds) = if lazy {
        (run_lazy(&net, &plan, &mut rng)?, None)
    } else {
        let th = sample_thresholds(net.n(), &mut rng);
        let traj = if plan.tail.is_some() { run_antisense(&net, &plan, &th)? } else { run(&net, &plan, &th)? };
        (traj, Some(th))
    };
    if format_of(common, Format::Json) == Format::Csv {
        let mut csv = String::from("t,active\n");
        for (t, s) in traj.sets.iter().enumerate() {
            csv.push_str(&format!("{t},{}\n", net.format_set(s)));
        }
        return Ok(Outcome { report: Report::Csv(csv), passed: true, message: None });
    }
    let mut body = trajectory_body(&net, &traj);
    if let Some(th) = thresholds {
        let map: Map<String, Value> = net.labels().iter().zip(&th.theta).map(|(l, t)| (l.clone(), json!(t))).collect();
        body["thresholds"] = Value::Object(map);
    }
    body["lazy"] = json!(lazy);
    Ok(Outcome::json(body))
}

fn influence(common: &Common, method: MethodArg, sampling: &Sampling) -> Result<Outcome> {
    let net = load(common)?;
    let seeds = net.parse_set(&common.seeds)?;
    let plan = StagePlan::single(seeds.clone());
    let csv = format_of(common, Format::Json) == Format::Csv;
    let (sigma, ci, body) = match method {
        MethodArg::Exact => {
            let result = ExactOracle::new(&net)?.evaluate(&plan, net.weight())?;
            let dist: Vec<Value> =
                result.distribution.iter().map(|(s, p)| json!({"set": labels(&net, s), "p": p})).collect();
            let body =
                json!({"method": "exact", "seeds": labels(&net, &seeds), "sigma": result.sigma, "distribution": dist});
            (result.sigma, 0.0, body)
        }
        MethodArg::Mc => {
            let replicates = mc_replicates(sampling, net.weight().range(net.n()))?;
            let est = estimate_mc(&net, &plan, net.weight(), replicates, sampling.confidence, common.rng_seed)?;
            let body = json!({
                "method": "mc",
                "seeds": labels(&net, &seeds),
                "sigma": est.mean,
                "half_width": est.half_width,
                "replicates": est.replicates,
                "confidence": est.confidence,
            });
            (est.mean, est.half_width, body)
        }
        other => return Err(Error::InvalidArgument(format!("influence takes --method exact or mc, not {other:?}"))),
    };
    if csv {
        let tag = if method == MethodArg::Exact { "exact" } else { "mc" };
        return Ok(Outcome {
            report: Report::Csv(format!("method,sigma,ci\n{tag},{sigma},{ci}\n")),
            passed: true,
            message: None,
        });
    }
    Ok(Outcome::json(body))
}

fn result_body(net: &SocialNetwork, k: usize, r: &MaximizationResult) -> Value {
    json!({
        "k": k,
        "chosen": r.chosen.iter().map(|&v| net.label(v)).collect::<Vec<_>>(),
        "value": r.value,
        "half_width": r.half_width,
        "gains": r.gains,
        "method": r.method.to_string(),
        "evaluations": r.evaluations,
    })
}

fn maximize(common: &Common, k: usize, method: MethodArg, sampling: &Sampling, budget: u128) -> Result<Outcome> {
    let net = load(common)?;
    let w = net.weight();
    let mut rng = replicate_rng(derive_seed(common.rng_seed, &[1]), 0);
    let result = match method {
        MethodArg::GreedyExact => greedy(&net, w, k, Evaluator::Exact)?,
        MethodArg::GreedyMc => greedy(&net, w, k, mc_evaluator(&net, sampling, common.rng_seed)?)?,
        MethodArg::Exhaustive => exhaustive_opt(&net, w, k, budget)?,
        MethodArg::Degree | MethodArg::Distance | MethodArg::Random => {
            let kind = match method {
                MethodArg::Degree => Heuristic::Degree,
                MethodArg::Distance => Heuristic::Distance,
                _ => Heuristic::Random,
            };
            heuristic_baseline(&net, w, kind, k, default_evaluator(&net, sampling, common.rng_seed)?, &mut rng)?
        }
        other => return Err(Error::InvalidArgument(format!("maximize does not take --method {other:?}"))),
    };
    if format_of(common, Format::Json) == Format::Csv {
        let chosen = result.chosen.iter().map(|&v| net.label(v)).join("|");
        let csv = format!(
            "k,method,chosen,value,ci\n{k},{},{chosen},{},{}\n",
            result.method, result.value, result.half_width
        );
        return Ok(Outcome { report: Report::Csv(csv), passed: true, message: None });
    }
    Ok(Outcome::json(result_body(&net, k, &result)))
}

fn curve(common: &Common, k_max: usize, methods: &str, sampling: &Sampling) -> Result<Outcome> {
    let net = load(common)?;
    let methods = methods
        .split(',')
        .map(str::trim)
        .filter(|m| !m.is_empty())
        .map(|m| match MethodArg::from_str(m, true) {
            Ok(MethodArg::GreedyExact) => Ok(Method::GreedyExact),
            Ok(MethodArg::GreedyMc) => Ok(Method::GreedyMc),
            Ok(MethodArg::Exhaustive) => Ok(Method::Exhaustive),
            Ok(MethodArg::Degree) => Ok(Method::Degree),
            Ok(MethodArg::Distance) => Ok(Method::Distance),
            Ok(MethodArg::Random) => Ok(Method::Random),
            _ => Err(Error::InvalidArgument(format!("unknown curve method `{m}`"))),
        })
        .collect::<Result<Vec<_>>>()?;
    let evaluator = if methods.contains(&Method::GreedyMc) {
        mc_evaluator(&net, sampling, common.rng_seed)?
    } else {
        default_evaluator(&net, sampling, common.rng_seed)?
    };
    let mut rng = replicate_rng(derive_seed(common.rng_seed, &[1]), 0);
    let rows = influence_curve(&net, net.weight(), k_max, &methods, evaluator, &mut rng)?;
    if format_of(common, Format::Csv) == Format::Csv {
        return Ok(Outcome { report: Report::Csv(curve_csv(&rows)), passed: true, message: None });
    }
    Ok(Outcome::json(json!({ "evaluator": evaluator.label(), "rows": rows })))
}

struct VerifyOptions<'a> {
    a: &'a Option<String>,
    b: &'a Option<String>,
    tail: &'a Option<String>,
    replicates: Option<u64>,
    grid_step: Option<f64>,
    tolerance: Option<f64>,
}

fn violation_body(labels_of: impl Fn(u64) -> Value, v: &Violation) -> Value {
    json!({
        "base": labels_of(v.base),
        "extended": labels_of(v.extended),
        "element": labels_of(1 << v.element),
        "lhs": v.lhs,
        "rhs": v.rhs,
    })
}

fn property_body(report: &PropertyReport, labels_of: impl Fn(u64) -> Value) -> Value {
    json!({
        "monotone": report.is_monotone(),
        "submodular": report.is_submodular(),
        "normalized_submodular": report.normalized_submodular.as_ref().map(|v| v.is_none()),
        "monotone_witness": report.monotone.as_ref().map(|v| violation_body(&labels_of, v)),
        "submodular_witness": report.submodular.as_ref().map(|v| violation_body(&labels_of, v)),
        "normalized_witness": report.normalized_submodular.as_ref().and_then(|v| v.as_ref()).map(|v| violation_body(&labels_of, v)),
    })
}

fn verify_local(net: &SocialNetwork) -> Result<Outcome> {
    let mut nodes = Map::new();
    let mut failing = Vec::new();
    for v in 0..net.n() {
        let f = net.activation(v);
        let report = check_properties(f)?;
        if !(report.is_monotone() && report.is_submodular()) {
            failing.push(net.label(v).to_string());
        }
        let neighbors = f.neighbors();
        let labels_of = |mask: u64| {
            json!((0..neighbors.len())
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| net.label(neighbors[i]))
                .collect::<Vec<_>>())
        };
        nodes.insert(net.label(v).to_string(), property_body(&report, labels_of));
    }
    let weight = if net.n() <= MAX_TABLE_UNIVERSE {
        let report = check_weight_properties(net.weight(), net.n())?;
        if !(report.is_monotone() && report.is_submodular()) {
            failing.push("weight function".into());
        }
        property_body(&report, |m| labels(net, &NodeSet::from_mask(net.n(), m)))
    } else {
        Value::Null
    };
    let passed = failing.is_empty();
    let body = json!({"check": "submodular-local", "holds": passed, "nodes": nodes, "weight_function": weight, "failing": failing});
    Ok(Outcome::check(body, passed, format!("not monotone submodular: {}", failing.join(", "))))
}

fn verify_global(net: &SocialNetwork) -> Result<Outcome> {
    let n = net.n();
    let sigma = ExactOracle::new(net)?.sigma_table(net.weight())?;
    let report = check_set_function(n, |m| sigma[m as usize])?;
    let set = |m: u64| NodeSet::from_mask(n, m);
    let witness = report.submodular.as_ref().map(|v| {
        let a = v.extended;
        let b = v.base | 1 << v.element;
        json!({
            "A": labels(net, &set(a)),
            "B": labels(net, &set(b)),
            "sigma_A": sigma[a as usize],
            "sigma_B": sigma[b as usize],
            "sigma_intersection": sigma[(a & b) as usize],
            "sigma_union": sigma[(a | b) as usize],
        })
    });
    let monotone_witness = report.monotone.as_ref().map(|v| {
        json!({"smaller": labels(net, &set(v.base)), "larger": labels(net, &set(v.extended)), "sigma_smaller": v.lhs, "sigma_larger": v.rhs})
    });
    let passed = report.is_monotone() && report.is_submodular();
    let body = json!({
        "check": "submodular-global",
        "holds": passed,
        "monotone": report.is_monotone(),
        "submodular": report.is_submodular(),
        "witness": witness,
        "monotone_witness": monotone_witness,
    });
    Ok(Outcome::check(body, passed, "influence is not monotone submodular"))
}

fn coupling_violation_body(net: &SocialNetwork, w: &CouplingViolation) -> Value {
    json!({
        "t": w.t,
        "kind": w.kind,
        "node": w.node.map(|v| net.label(v)),
        "A": labels(net, &w.sets[0]),
        "B": labels(net, &w.sets[1]),
        "C": labels(net, &w.sets[2]),
        "D": labels(net, &w.sets[3]),
    })
}

fn verify_coupling(
    net: &SocialNetwork,
    common: &Common,
    trace: Option<&Path>,
    opts: &VerifyOptions,
) -> Result<Outcome> {
    if let Some(path) = trace {
        let value: Value = serde_json::from_str(&fs::read_to_string(path)?).map_err(|e| Error::Parse(e.to_string()))?;
        let inner = value.get("trace").cloned().unwrap_or(value);
        let doc: TraceDocument = serde_json::from_value(inner).map_err(|e| Error::Parse(e.to_string()))?;
        let trace = import_trace(&doc, net)?;
        let report = verify_trace(&trace, net)?;
        let replay = replay_matches(&trace, net)?;
        let passed = report.holds();
        let body = json!({
            "check": "coupling",
            "holds": passed,
            "replay_matches": replay,
            "containment_ok": report.containment_ok,
            "early_equality_ok": report.early_equality_ok,
            "omega1_ok": report.omega1_ok,
            "omega2_ok": report.omega2_ok,
            "first_violation": report.first_violation.as_ref().map(|w| coupling_violation_body(net, w)),
        });
        return Ok(Outcome::check(body, passed, "coupling invariant violated in trace"));
    }
    let (Some(a), Some(b)) = (opts.a, opts.b) else {
        return Err(Error::InvalidArgument("coupling check needs --trace or both --a and --b".into()));
    };
    let (a, b) = (net.parse_set(a)?, net.parse_set(b)?);
    let traces = opts.replicates.unwrap_or(10_000);
    let seed = derive_seed(common.rng_seed, &[2]);
    let outcomes = (0..traces)
        .into_par_iter()
        .map(|i| {
            let trace = run_coupled(net, &a, &b, &mut replicate_rng(seed, i))?;
            Ok(verify_trace(&trace, net)?.first_violation)
        })
        .collect::<Result<Vec<_>>>()?;
    let violations = outcomes.iter().filter(|o| o.is_some()).count();
    let first = outcomes.iter().position(Option::is_some);
    let mut passed = violations == 0;
    let mut body = json!({
        "check": "coupling",
        "A": labels(net, &a),
        "B": labels(net, &b),
        "traces": traces,
        "violations": violations,
        "first_violation": first.map(|i| json!({
            "replicate": i,
            "witness": coupling_violation_body(net, outcomes[i].as_ref().unwrap()),
        })),
    });
    if let Some(step) = opts.grid_step {
        let grid = verify_grid(net, &a, &b, step)?;
        passed &= grid.violations == 0;
        body["grid"] = json!({
            "step": step,
            "points_per_node": grid.points_per_node,
            "distinct_threshold_vectors": grid.traces,
            "violations": grid.violations,
            "first_violation": grid.first_violation.as_ref().map(|(theta, w)| json!({
                "theta": theta,
                "witness": coupling_violation_body(net, w),
            })),
        });
    }
    body["holds"] = json!(passed);
    Ok(Outcome::check(body, passed, "coupling invariant violated"))
}

fn verify_piecemeal(net: &SocialNetwork, common: &Common, opts: &VerifyOptions) -> Result<Outcome> {
    let n = net.n();
    let seeds = net.parse_set(&common.seeds)?;
    let members: Vec<usize> = seeds.iter().collect();
    if members.len() > 10 {
        return Err(Error::DomainTooLarge { size: members.len(), limit: 10 });
    }
    let tolerance = opts.tolerance.unwrap_or(1e-9);
    let oracle = ExactOracle::new(net)?;
    let direct = oracle.distribution(&StagePlan::single(seeds.clone()))?;
    let assignments = 3u64.pow(members.len() as u32);
    let results = (0..assignments)
        .into_par_iter()
        .map(|code| {
            let mut stages = vec![NodeSet::empty(n); 3];
            let mut c = code;
            for &v in &members {
                stages[(c % 3) as usize].insert(v);
                c /= 3;
            }
            let staged = oracle.distribution(&StagePlan::staged(stages.clone()))?;
            Ok((total_variation(&direct, &staged), stages))
        })
        .collect::<Result<Vec<_>>>()?;
    let (worst_tv, worst_stages) =
        results.iter().max_by(|x, y| x.0.total_cmp(&y.0)).map(|(tv, s)| (*tv, s.clone())).unwrap_or_default();
    let passed = worst_tv <= tolerance;
    let body = json!({
        "check": "piecemeal",
        "holds": passed,
        "seeds": labels(net, &seeds),
        "partitions": assignments,
        "max_tv": worst_tv,
        "tolerance": tolerance,
        "worst_stages": worst_stages.iter().map(|s| labels(net, s)).collect::<Vec<_>>(),
    });
    Ok(Outcome::check(body, passed, format!("staged and direct distributions differ by TV {worst_tv}")))
}

fn verify_antisense(net: &SocialNetwork, common: &Common, opts: &VerifyOptions) -> Result<Outcome> {
    let seeds = net.parse_set(&common.seeds)?;
    let tail = net.parse_set(opts.tail.as_deref().unwrap_or(""))?;
    let replicates = opts.replicates.unwrap_or(1_000_000);
    let tolerance = opts.tolerance.unwrap_or(0.01);
    let standard = StagePlan::staged(vec![seeds.clone(), tail.clone()]);
    let antisense = StagePlan::staged(vec![seeds.clone()]).with_tail(tail.clone());
    let p = empirical_distribution(net, &standard, replicates, derive_seed(common.rng_seed, &[3]))?;
    let q = empirical_distribution(net, &antisense, replicates, derive_seed(common.rng_seed, &[4]))?;
    let tv = total_variation(&p, &q);
    let exact_tv = if net.n() <= DEFAULT_EXACT_CAP {
        let exact: std::collections::BTreeMap<NodeSet, f64> = ExactOracle::new(net)?
            .distribution(&standard)?
            .into_iter()
            .map(|(m, pr)| (NodeSet::from_mask(net.n(), m), pr))
            .collect();
        Some(total_variation(&exact, &q))
    } else {
        None
    };
    let passed = tv <= tolerance;
    let body = json!({
        "check": "antisense",
        "holds": passed,
        "seeds": labels(net, &seeds),
        "tail": labels(net, &tail),
        "replicates": replicates,
        "tv_empirical": tv,
        "tv_antisense_vs_exact": exact_tv,
        "tolerance": tolerance,
    });
    Ok(Outcome::check(body, passed, format!("antisense and standard distributions differ by TV {tv}")))
}

fn verify_cascade(net: &SocialNetwork, common: &Common) -> Result<Outcome> {
    let n = net.n();
    let spec = threshold_to_cascade(net)?;
    let back = cascade_to_threshold(&spec)?;
    let mut round_trip_error = 0.0f64;
    for v in 0..n {
        let (f, g) = (net.activation(v), back.activation(v));
        for m in 0..1u64 << f.neighbors().len() {
            round_trip_error = round_trip_error.max((f.eval_local(m) - g.eval_local(m)).abs());
        }
    }
    let spec_error = max_prob_difference(&spec, &threshold_to_cascade(&back)?).unwrap_or(f64::INFINITY);

    let mut mismatched = Vec::new();
    for v in 0..n {
        let normalized = check_properties(net.activation(v))?.is_normalized_submodular();
        let decreasing = check_decreasing_node(&spec, v).is_none();
        if normalized != decreasing {
            mismatched.push(net.label(v).to_string());
        }
    }

    let mut distribution_tv = Value::Null;
    let mut worst_tv = 0.0f64;
    if n <= DEFAULT_CASCADE_EXACT_CAP.min(DEFAULT_EXACT_CAP) {
        let seed_sets: Vec<NodeSet> = if common.seeds.is_empty() {
            (0..n).map(|v| NodeSet::from_ids(n, [v])).collect()
        } else {
            vec![net.parse_set(&common.seeds)?]
        };
        let oracle = ExactOracle::new(net)?;
        let mut rows = Vec::new();
        for s in &seed_sets {
            let cascade = exact_cascade_distribution(&spec, s, DEFAULT_CASCADE_EXACT_CAP)?;
            let threshold = oracle.distribution(&StagePlan::single(s.clone()))?;
            let tv = total_variation(&cascade, &threshold);
            worst_tv = worst_tv.max(tv);
            rows.push(json!({"seeds": labels(net, s), "tv": tv}));
        }
        distribution_tv = json!(rows);
    }
    let passed = round_trip_error <= 1e-9 && spec_error <= 1e-9 && mismatched.is_empty() && worst_tv <= 1e-9;
    let body = json!({
        "check": "cascade-equivalence",
        "holds": passed,
        "round_trip_error": round_trip_error,
        "spec_round_trip_error": spec_error,
        "normalized_vs_decreasing_mismatches": mismatched,
        "distributions": distribution_tv,
        "max_tv": worst_tv,
    });
    Ok(Outcome::check(body, passed, "cascade and threshold descriptions disagree"))
}

fn counterexample(
    common: &Common,
    function: &Path,
    a: &Option<String>,
    b: &Option<String>,
    emit_network: Option<&Path>,
) -> Result<Outcome> {
    json_only(common)?;
    let f: SetFunctionDocument =
        serde_json::from_str(&fs::read_to_string(function)?).map_err(|e| Error::Parse(e.to_string()))?;
    let split = |s: &str| s.split(',').map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect::<Vec<_>>();
    let (a, b) = match (a, b) {
        (Some(a), Some(b)) => (split(a), split(b)),
        (None, None) => {
            let m = f.nodes.len();
            if f.values.len() != 1usize.checked_shl(m as u32).unwrap_or(0) {
                return Err(Error::InvalidArgument(format!("{} values for {m} elements", f.values.len())));
            }
            let report = check_set_function(m, |mask| f.values[mask as usize])?;
            let v = report.submodular.ok_or_else(|| Error::NoViolation("f is submodular everywhere".into()))?;
            let names = |mask: u64| (0..m).filter(|i| mask >> i & 1 == 1).map(|i| f.nodes[i].clone()).collect();
            (names(v.extended), names(v.base | 1 << v.element))
        }
        _ => return Err(Error::InvalidArgument("--a and --b go together".into())),
    };
    let cx = build_counterexample(&f, &a, &b)?;
    let doc = cx.network.to_document();
    if let Some(path) = emit_network {
        let text = serde_json::to_string_pretty(&doc).map_err(|e| Error::Parse(e.to_string()))?;
        fs::write(path, text + "\n")?;
    }
    let net = &cx.network;
    Ok(Outcome::json(json!({
        "A": labels(net, &cx.a),
        "B": labels(net, &cx.b),
        "sigma_A": cx.sigma_a,
        "sigma_B": cx.sigma_b,
        "sigma_intersection": cx.sigma_intersection,
        "sigma_union": cx.sigma_union,
        "gap": cx.gap(),
        "network": serde_json::to_value(&doc).map_err(|e| Error::Parse(e.to_string()))?,
    })))
}
