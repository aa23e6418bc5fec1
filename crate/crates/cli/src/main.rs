//! `rsm`: generate instances, solve them, check them against brute force,
//! and summarize run reports.
//!
//! Exit codes: 0 on success (including time-limited runs), 1 when
//! verification fails, 2 on usage, parse or input errors.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use rsm_core::cuts::SubmodularCut;
use rsm_core::dcg::{brute_force, solve_rsm_seeded, DcgConfig, SolveStatus, BRUTE_FORCE_LIMIT};
use rsm_core::report::{aggregate, parse_records, write_records, write_rows, RunRecord};
use rsm_core::rsm3::{solve_rsm3, solve_single_submodmax, Rsm3Config};
use rsm_core::subset::Subset;
use rsm_core::water::{generate_instance, parse_instance, serialize_instance, AlphaSpec, GeneratorParams, Instance};

#[derive(Parser)]
#[command(name = "rsm", version, about = "Exact robust submodular maximization for sensor placement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random water-network instance.
    Generate(GenerateArgs),
    /// Solve instances and print one CSV row per instance.
    Solve(SolveArgs),
    /// Compare every solver configuration with exhaustive enumeration.
    Verify(VerifyArgs),
    /// Aggregate report CSVs into per-configuration means.
    Report(ReportArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    nodes: usize,
    /// Edge count; defaults to ⌈edge_factor · nodes⌉.
    #[arg(long)]
    edges: Option<usize>,
    #[arg(long, default_value_t = 1.14)]
    edge_factor: f64,
    #[arg(long, default_value_t = 1)]
    scenarios: usize,
    #[arg(long)]
    sources: usize,
    #[arg(long)]
    budget: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; the instance goes to stdout when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Rsm,
    Rsm3,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Rsm => "rsm",
            Mode::Rsm3 => "rsm3",
        }
    }
}

#[derive(Args, Clone)]
struct SolverFlags {
    /// `unit`, `solve`, or `values v1 ... vm`; defaults to the instance's own line.
    #[arg(long, num_args = 1.., value_name = "ALPHA")]
    alpha: Option<Vec<String>>,
    #[arg(long, overrides_with = "no_reduce")]
    reduce: bool,
    #[arg(long = "no-reduce", overrides_with = "reduce")]
    no_reduce: bool,
    #[arg(long, default_value_t = 2)]
    stop_pt: usize,
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    /// Wall-clock limit per instance, in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long)]
    filter_dominated: bool,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

impl SolverFlags {
    fn reduce(&self) -> bool {
        !self.no_reduce
    }

    fn config(&self) -> Result<DcgConfig, String> {
        if !(self.epsilon >= 0.0) {
            return Err("--epsilon must be nonnegative".into());
        }
        Ok(DcgConfig {
            reduce: self.reduce(),
            stop_pt: self.stop_pt,
            epsilon: self.epsilon,
            time_limit: self.time_limit.map(seconds).transpose()?,
            filter_dominated: self.filter_dominated,
            ..DcgConfig::default()
        })
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(required = true)]
    instances: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = Mode::Rsm)]
    mode: Mode,
    #[command(flatten)]
    flags: SolverFlags,
    /// Per-scenario budget in seconds for `--mode rsm3`.
    #[arg(long, default_value_t = 30.0)]
    scenario_budget: f64,
    /// Also append the rows to this CSV file.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Accepted for a uniform experiment interface; solving is deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(required = true)]
    instances: Vec<PathBuf>,
    #[arg(long, num_args = 1.., value_name = "ALPHA")]
    alpha: Option<Vec<String>>,
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    #[arg(long)]
    filter_dominated: bool,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Seed the pool with an invalid cut to exercise the failure path.
    #[arg(long, hide = true)]
    corrupt_cut: bool,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(required = true)]
    files: Vec<PathBuf>,
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    msg: String,
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure { code: 2, msg: msg.into() }
}

fn seconds(s: f64) -> Result<Duration, String> {
    Duration::try_from_secs_f64(s).map_err(|_| format!("invalid duration {s}"))
}

fn load(path: &Path) -> Result<Instance, Failure> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let inst = parse_instance(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    inst.validate().map_err(|e| usage(format!("{}: {e}", path.display())))?;
    Ok(inst)
}

fn instance_name(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

fn parse_alpha(words: &[String], m: usize) -> Result<AlphaSpec, String> {
    match words.split_first() {
        Some((w, [])) if w == "unit" => Ok(AlphaSpec::Unit),
        Some((w, [])) if w == "solve" => Ok(AlphaSpec::Solve),
        Some((w, vals)) if w == "values" => {
            let v: Vec<f64> = vals
                .iter()
                .map(|t| t.parse().map_err(|_| format!("invalid alpha value `{t}`")))
                .collect::<Result<_, _>>()?;
            if v.len() != m {
                return Err(format!("--alpha values needs {m} entries, got {}", v.len()));
            }
            if v.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
                return Err("alpha values must be positive".into());
            }
            Ok(AlphaSpec::Values(v))
        }
        _ => Err("--alpha expects `unit`, `solve` or `values v1 ... vm`".into()),
    }
}

fn alpha_spec(flag: &Option<Vec<String>>, inst: &Instance) -> Result<AlphaSpec, Failure> {
    match flag {
        Some(words) => parse_alpha(words, inst.scenario_count()).map_err(usage),
        None => Ok(inst.alpha.clone()),
    }
}

/// Scenario optima by single-function solves, each flagged with whether it
/// finished within `limit`.
fn solved_alphas(inst: &Instance, limit: Option<Duration>) -> Result<Vec<(f64, bool)>, Failure> {
    let budget = limit.unwrap_or(Duration::from_secs(u32::MAX as u64));
    let ks = inst.knapsack();
    let mut out = Vec::new();
    for (i, f) in inst.oracles().iter().enumerate() {
        let run = solve_single_submodmax(f, &ks, i, budget, &DcgConfig::default()).map_err(|e| usage(e.to_string()))?;
        if !(run.bounds.lb > 0.0) {
            return Err(usage(format!("scenario {i} has optimum 0; --alpha solve is undefined")));
        }
        out.push((run.bounds.lb, run.bounds.solved_exactly));
    }
    Ok(out)
}

fn resolve_alphas(spec: &AlphaSpec, inst: &Instance, limit: Option<Duration>) -> Result<Vec<f64>, Failure> {
    Ok(match spec {
        AlphaSpec::Unit => vec![1.0; inst.scenario_count()],
        AlphaSpec::Values(v) => v.clone(),
        AlphaSpec::Solve => {
            let solved = solved_alphas(inst, limit)?;
            if solved.iter().any(|(_, exact)| !exact) {
                eprintln!("warning: some scenario optima were not proven; using the best values found");
            }
            solved.into_iter().map(|(a, _)| a).collect()
        }
    })
}

fn solve_one(path: &Path, args: &SolveArgs, jobs_inside: usize) -> Result<RunRecord, Failure> {
    let inst = load(path)?;
    if inst.budget_warning() {
        eprintln!("warning: {}: no sensor fits the budget", path.display());
    }
    let cfg = args.flags.config().map_err(usage)?;
    let start = Instant::now();
    let record = |eta: f64, ub: f64, lb: f64, gap: f64, iterations: usize, cuts: usize, status: &str| RunRecord {
        instance: instance_name(path),
        mode: args.mode.name().into(),
        reduce: cfg.reduce,
        stop_pt: cfg.stop_pt,
        time_s: start.elapsed().as_secs_f64(),
        gap_pct: 100.0 * gap,
        iterations,
        cuts,
        eta,
        ub,
        lb,
        status: status.into(),
        verdict: String::new(),
    };
    let (oracles, ks) = (inst.oracles(), inst.knapsack());
    match args.mode {
        Mode::Rsm => {
            let spec = alpha_spec(&args.flags.alpha, &inst)?;
            let alphas = resolve_alphas(&spec, &inst, cfg.time_limit)?;
            let r = solve_rsm_seeded(&oracles, &ks, &alphas, &cfg, Vec::new()).map_err(|e| usage(e.to_string()))?;
            Ok(record(r.eta, r.upper_bound, r.eta, r.gap, r.iterations, r.cuts_added, r.status.as_str()))
        }
        Mode::Rsm3 => {
            let rc = Rsm3Config { scenario_budget: seconds(args.scenario_budget).map_err(usage)?, dcg: cfg, jobs: jobs_inside };
            if rc.scenario_budget.is_zero() {
                return Err(usage("--scenario-budget must be positive"));
            }
            if rc.dcg.time_limit.is_some_and(|t| rc.scenario_budget.saturating_mul(inst.scenario_count() as u32) >= t) {
                eprintln!("warning: {}: scenario budgets exhaust the time limit", path.display());
            }
            let r = solve_rsm3(&oracles, &ks, &rc).map_err(|e| usage(e.to_string()))?;
            let status = if r.gap == 0.0 {
                "optimal"
            } else if r.solve.status == SolveStatus::Optimal {
                "bounded"
            } else {
                r.solve.status.as_str()
            };
            Ok(record(r.solve.eta, r.upper, r.lower, r.gap, r.solve.iterations, r.solve.cuts_added, status))
        }
    }
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool, Failure> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| usage(e.to_string()))
}

fn append_csv(path: &Path, records: &[RunRecord]) -> Result<(), Failure> {
    let fresh = fs::metadata(path).map_or(true, |m| m.len() == 0);
    let text = if fresh { write_records(records) } else { write_rows(records) };
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| usage(format!("{}: {e}", path.display())))?;
    f.write_all(text.as_bytes()).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn cmd_solve(args: SolveArgs) -> Result<(), Failure> {
    let inside = if args.instances.len() == 1 { args.flags.jobs.max(1) } else { 1 };
    let results: Vec<Result<RunRecord, Failure>> =
        pool(args.flags.jobs)?.install(|| args.instances.par_iter().map(|p| solve_one(p, &args, inside)).collect());
    let records = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    print!("{}", write_records(&records));
    if let Some(path) = &args.csv {
        append_csv(path, &records)?;
    }
    Ok(())
}

/// Cut that claims `η ≤ −1` everywhere.
fn corrupt_cut(n: usize) -> SubmodularCut {
    SubmodularCut { constant: -1.0, coefficients: vec![0.0; n], scenario: 0, generating_set: Subset::empty(n), scale: 1.0 }
}

enum Verdict {
    Pass(String),
    Fail(String),
}

fn verify_one(path: &Path, args: &VerifyArgs) -> Result<Verdict, Failure> {
    let inst = load(path)?;
    let n = inst.node_count();
    if n > BRUTE_FORCE_LIMIT {
        return Err(usage(format!("{}: {n} nodes exceed the enumeration limit {BRUTE_FORCE_LIMIT}", path.display())));
    }
    let (oracles, ks) = (inst.oracles(), inst.knapsack());
    let alphas = match alpha_spec(&args.alpha, &inst)? {
        // exact scenario optima by enumeration
        AlphaSpec::Solve => oracles
            .iter()
            .map(|f| brute_force(std::slice::from_ref(f), &ks, &[1.0]).map(|(v, _)| v))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| usage(e.to_string()))?
            .into_iter()
            .map(|v| if v > 0.0 { Ok(v) } else { Err(usage("a scenario has optimum 0; --alpha solve is undefined")) })
            .collect::<Result<Vec<_>, _>>()?,
        spec => resolve_alphas(&spec, &inst, None)?,
    };
    let (best, _) = brute_force(&oracles, &ks, &alphas).map_err(|e| usage(e.to_string()))?;
    let name = instance_name(path);
    for (reduce, stop_pt) in [(false, 0), (false, 2), (true, 0), (true, 2)] {
        let cfg = DcgConfig {
            reduce,
            stop_pt,
            epsilon: args.epsilon,
            filter_dominated: args.filter_dominated,
            ..DcgConfig::default()
        };
        let seed = if args.corrupt_cut { vec![corrupt_cut(n)] } else { Vec::new() };
        let r = solve_rsm_seeded(&oracles, &ks, &alphas, &cfg, seed).map_err(|e| usage(e.to_string()))?;
        let agree = (r.eta - best).abs() <= 1e-9 && r.upper_bound >= best - 1e-9;
        if !agree {
            return Ok(Verdict::Fail(format!(
                "FAIL {name} reduce={reduce} stop_pt={stop_pt} eta={} ub={} brute_force={best}",
                r.eta, r.upper_bound
            )));
        }
    }
    Ok(Verdict::Pass(format!("PASS {name} eta={best}")))
}

fn cmd_verify(args: VerifyArgs) -> Result<(), Failure> {
    let results: Vec<Result<Verdict, Failure>> =
        pool(args.jobs)?.install(|| args.instances.par_iter().map(|p| verify_one(p, &args)).collect());
    let mut failed = false;
    for r in results {
        match r? {
            Verdict::Pass(line) => println!("{line}"),
            Verdict::Fail(line) => {
                println!("{line}");
                failed = true;
            }
        }
    }
    if failed {
        return Err(Failure { code: 1, msg: "verification failed".into() });
    }
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<(), Failure> {
    let mut records = Vec::new();
    for path in &args.files {
        let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        records.extend(parse_records(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?);
    }
    let mut w = csv::Writer::from_writer(std::io::stdout());
    let io = |e: csv::Error| usage(e.to_string());
    w.write_record([
        "mode",
        "reduce",
        "stop_pt",
        "runs",
        "optimal",
        "mean_time_s",
        "mean_gap_pct",
        "mean_iterations",
        "mean_cuts",
    ])
    .map_err(io)?;
    for s in aggregate(&records) {
        w.write_record([
            s.mode,
            s.reduce.to_string(),
            s.stop_pt.to_string(),
            s.runs.to_string(),
            s.optimal.to_string(),
            format!("{:.4}", s.mean_time_s),
            format!("{:.4}", s.mean_gap_pct),
            format!("{:.2}", s.mean_iterations),
            format!("{:.2}", s.mean_cuts),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| usage(e.to_string()))
}

fn checksum(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

fn cmd_generate(args: GenerateArgs) -> Result<(), Failure> {
    let edges = args
        .edges
        .unwrap_or_else(|| GeneratorParams::with_edge_factor(args.nodes, args.edge_factor, 0, 0, 0, 0).edges);
    let p = GeneratorParams {
        nodes: args.nodes,
        edges,
        scenarios: args.scenarios,
        sources: args.sources,
        budget: args.budget,
        seed: args.seed,
    };
    let inst = generate_instance(&p).map_err(|e| usage(e.to_string()))?;
    if inst.budget_warning() {
        eprintln!("warning: no sensor fits budget {}; only the empty placement is feasible", args.budget);
    }
    let text = serialize_instance(&inst);
    let sum = checksum(&text);
    match &args.out {
        Some(path) => {
            fs::write(path, &text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            println!("sha256 {sum}");
        }
        None => {
            print!("{text}");
            eprintln!("sha256 {sum}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Report(a) => cmd_report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
