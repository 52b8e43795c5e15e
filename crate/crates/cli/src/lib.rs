//! Command-line harness for the `l2b` library.
//!
//! Every subcommand writes one result (JSON, CSV or JSONL) to `--out` or
//! stdout and a short summary to stderr. Output depends only on the
//! arguments, so repeated runs are byte-identical unless `--timing` is set.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use l2b::adversary::{self, AdversaryConfig, Variant};
use l2b::algorithms::{self, Algorithm, ConstantsBundle, CorrelatedRun};
use l2b::certificate::{self, CertificateReport, DualState};
use l2b::model::{self, Instance};
use l2b::stats::{Interval, Summary, Verdict};

pub const SCHEMA: u32 = 1;
pub const DEFAULT_CAP: u64 = 1_000_000;
pub const DEFAULT_TRIALS: usize = 1000;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Breach(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Input(_) => 2,
            CliError::Breach(_) => 3,
        }
    }
}

impl From<l2b::Error> for CliError {
    fn from(e: l2b::Error) -> Self {
        match e {
            l2b::Error::Model(m) => CliError::Input(m.to_string()),
            l2b::Error::InvalidArgument(m) => CliError::Usage(m),
            other => CliError::Breach(other.to_string()),
        }
    }
}

impl From<l2b::error::ModelError> for CliError {
    fn from(e: l2b::error::ModelError) -> Self {
        match e {
            l2b::error::ModelError::TooLargeForBruteForce { .. } => CliError::Usage(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "l2b", version, about = "Online load balancing under the sum of squared loads")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one algorithm and report its cost and dual objective.
    Run(RunArgs),
    /// Run one algorithm and check every certificate property.
    Verify(RunArgs),
    /// Sweep the lower-bound instance and emit CSV.
    Sweep(SweepArgs),
    /// Check the correlated algorithm's constants.
    Constants(ConstantsArgs),
    /// Compare dual objectives with the brute-force optimum.
    Oracle(OracleArgs),
    /// Write an instance as JSONL.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SourceArgs {
    /// Instance file in JSONL format.
    #[arg(long, conflicts_with_all = ["adversary", "random", "stress"])]
    pub instance: Option<PathBuf>,
    /// Lower-bound instance, `n=..,variant=..,t=..,seed=..`.
    #[arg(long, conflicts_with_all = ["random", "stress"])]
    pub adversary: Option<String>,
    /// Random standard instance `MxN`, drawn from `--seed`.
    #[arg(long, value_name = "MxN", conflicts_with = "stress")]
    pub random: Option<String>,
    /// Hard-group stress instance `groups,spread`, drawn from `--seed`.
    #[arg(long, value_name = "G,S")]
    pub stress: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub alg: Algorithm,
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Feasibility tolerance, relative to constraint scale.
    #[arg(long, default_value_t = certificate::FEASIBILITY_TOL)]
    pub tol: f64,
    /// Override γ of the correlated algorithm.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Trials for the objective-guarantee estimate (verify only).
    #[arg(long)]
    pub guarantee_trials: Option<usize>,
    /// Record wall-clock time in the result.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// One or more algorithms, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub alg: Vec<Algorithm>,
    /// Repeatable; one lower-bound configuration per occurrence.
    #[arg(long, required = true)]
    pub adversary: Vec<String>,
    /// Overrides the seed of every configuration.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of consecutive seeds per configuration.
    #[arg(long, default_value_t = 1)]
    pub seeds: u64,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ConstantsArgs {
    #[arg(long, default_value_t = certificate::DEFAULT_GRID_STEP)]
    pub grid_step: f64,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of consecutive seeds for `--random`.
    #[arg(long, default_value_t = 1)]
    pub seeds: u64,
    #[arg(long, default_value_t = DEFAULT_CAP)]
    pub cap: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_args<I, T>(args: I) -> CliResult<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Usage(e.to_string()))?;
    execute(&cli.command)
}

pub fn execute(command: &Command) -> CliResult<()> {
    match command {
        Command::Run(a) => cmd_run(a, false),
        Command::Verify(a) => cmd_run(a, true),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Constants(a) => cmd_constants(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Gen(a) => cmd_gen(a),
    }
}

// ------------------------------------------------------------- plumbing

fn write_output(out: Option<&Path>, body: &[u8]) -> CliResult<()> {
    let res = match out {
        Some(p) => std::fs::write(p, body),
        None => std::io::stdout().lock().write_all(body),
    };
    res.map_err(|e| CliError::Input(format!("cannot write output: {e}")))
}

fn write_json(out: Option<&Path>, value: &Value) -> CliResult<()> {
    let mut body = serde_json::to_vec_pretty(value).map_err(|e| CliError::Breach(e.to_string()))?;
    body.push(b'\n');
    write_output(out, &body)
}

fn need_seed(seed: Option<u64>) -> CliResult<u64> {
    seed.ok_or_else(|| CliError::Usage("seed required".into()))
}

fn parse_pair(s: &str, sep: char, what: &str) -> CliResult<(usize, usize)> {
    let bad = || CliError::Usage(format!("bad {what} `{s}`"));
    let (a, b) = s.split_once(sep).ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn parse_adversary(s: &str) -> CliResult<AdversaryConfig> {
    let cfg: AdversaryConfig = s.parse()?;
    cfg.validate()?;
    Ok(cfg)
}

/// Loads the instance described by `src`; returns it with a description.
pub fn load_instance(src: &SourceArgs, seed: Option<u64>) -> CliResult<(Instance, Value)> {
    if let Some(p) = &src.instance {
        let inst = Instance::from_path(p)?;
        return Ok((inst, json!({ "file": p.display().to_string() })));
    }
    if let Some(s) = &src.adversary {
        let cfg = parse_adversary(s)?;
        if cfg.variant != Variant::FractionalLb {
            return Err(CliError::Usage("only the fractional_lb variant is a load-balancing instance".into()));
        }
        return Ok((adversary::gen_lb_instance(&cfg)?, json!({ "adversary": cfg.to_string() })));
    }
    if let Some(s) = &src.random {
        let (m, n) = parse_pair(&s.to_ascii_lowercase(), 'x', "--random")?;
        if m == 0 {
            return Err(CliError::Usage("random instance needs at least one machine".into()));
        }
        let seed = need_seed(seed)?;
        let mut r = l2b::rng::substream(seed, "instance");
        let inst = model::random_standard_instance(m, n, 0.6, &mut r);
        return Ok((inst, json!({ "random": format!("{m}x{n}"), "seed": seed })));
    }
    if let Some(s) = &src.stress {
        let (groups, spread) = parse_pair(s, ',', "--stress")?;
        let seed = need_seed(seed)?;
        let inst = adversary::gen_hard_group_instance(groups, spread, seed)?;
        return Ok((inst, json!({ "stress": format!("{groups},{spread}"), "seed": seed })));
    }
    Err(CliError::Usage("one of --instance, --adversary, --random or --stress is required".into()))
}

fn interval_json(ci: &Interval) -> Value {
    json!({ "mean": ci.mean, "ci99": [ci.lower, ci.upper], "samples": ci.samples })
}

fn constants_for(gamma: Option<f64>) -> CliResult<ConstantsBundle> {
    let k = ConstantsBundle::paper();
    Ok(match gamma {
        Some(g) if !(g.is_finite() && g > 0.0) => return Err(CliError::Usage(format!("bad gamma {g}"))),
        Some(g) => k.with_gamma(g),
        None => k,
    })
}

// ------------------------------------------------------------- run/verify

struct Outcome {
    cost: Interval,
    dual: DualState,
    extra: serde_json::Map<String, Value>,
    failures: Vec<String>,
    inconclusive: Vec<String>,
}

fn cmd_run(a: &RunArgs, verify: bool) -> CliResult<()> {
    let randomized = a.alg.is_randomized();
    let seed = if randomized { Some(need_seed(a.seed)?) } else { a.seed };
    let trials = a.trials.unwrap_or(DEFAULT_TRIALS);
    if randomized && trials == 0 {
        return Err(CliError::Usage("trials ≥ 1 required".into()));
    }
    if a.gamma.is_some() && a.alg != Algorithm::Correlated {
        return Err(CliError::Usage("--gamma applies to the correlated algorithm only".into()));
    }
    let (inst, source) = load_instance(&a.source, a.seed)?;
    let start = Instant::now();
    let outcome = match a.alg {
        Algorithm::Greedy => run_greedy(&inst, verify)?,
        Algorithm::FracBalance => run_frac_balance(&inst, verify)?,
        Algorithm::Balance => run_balance(&inst, trials, seed.unwrap_or(0), verify)?,
        Algorithm::Correlated => {
            let k = constants_for(a.gamma)?;
            let gt = a.guarantee_trials.unwrap_or(trials);
            run_correlated(&inst, trials, seed.unwrap_or(0), k, verify, gt)?
        }
    };
    let elapsed = start.elapsed().as_secs_f64();

    let feas = certificate::check_feasibility(&inst, &outcome.dual, a.tol);
    let mut report = CertificateReport::new(outcome.dual.objective(), outcome.cost, &feas);
    let mut failures = outcome.failures;
    if !feas.feasible() {
        failures.push(format!("{} dual constraint violations", feas.violations.len()));
    }
    if verify {
        for f in &failures {
            report.invariants.insert(f.clone(), false);
        }
    }
    let cost = if randomized {
        interval_json(&outcome.cost)
    } else {
        json!(outcome.cost.mean)
    };
    let mut result = json!({
        "schema": SCHEMA,
        "command": if verify { "verify" } else { "run" },
        "algorithm": a.alg.name(),
        "instance": source,
        "machines": inst.machines(),
        "jobs": inst.len(),
        "seed": seed,
        "trials": if randomized { Some(trials) } else { None },
        "cost": cost,
        "dual_objective": report.objective,
        "ratio_bound": report.ratio_bound,
        "feasible": feas.feasible(),
        "violations": feas.violations.len(),
        "worst_scaled_slack": feas.worst_scaled_slack,
        "wall_time": if a.timing { Some(elapsed) } else { None },
    });
    if verify {
        let obj = result.as_object_mut().expect("object");
        obj.insert("certificate".into(), serde_json::to_value(&report).map_err(|e| CliError::Breach(e.to_string()))?);
        obj.insert("checks".into(), Value::Object(outcome.extra));
        obj.insert("failures".into(), json!(failures));
        obj.insert("inconclusive".into(), json!(outcome.inconclusive));
    }
    write_json(a.out.as_deref(), &result)?;
    eprintln!(
        "{}: cost {} dual objective {} ratio bound {}",
        a.alg,
        outcome.cost.mean,
        report.objective,
        report.ratio_bound
    );
    for i in &outcome.inconclusive {
        eprintln!("inconclusive, increase samples: {i}");
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Breach(failures.join("; ")))
    }
}

fn identity_check(extra: &mut serde_json::Map<String, Value>, failures: &mut Vec<String>, name: &str, objective: f64, expected: f64) {
    let err = (objective - expected).abs();
    let ok = err <= 1e-9 * expected.abs().max(f64::MIN_POSITIVE) || err == 0.0;
    extra.insert(name.into(), json!({ "objective": objective, "expected": expected, "passed": ok }));
    if !ok {
        failures.push(format!("{name}: objective {objective} differs from {expected}"));
    }
}

fn run_greedy(inst: &Instance, verify: bool) -> CliResult<Outcome> {
    let (a, trace) = algorithms::run_greedy(inst)?;
    let cost = model::cost_quadratic(&a, inst)?;
    let dual = certificate::fit_greedy(inst, &trace);
    let mut extra = serde_json::Map::new();
    let mut failures = Vec::new();
    if verify {
        identity_check(&mut extra, &mut failures, "ratio_identity", dual.objective(), cost * certificate::greedy_ratio_factor());
        let (alpha, beta) = certificate::greedy_constants();
        identity_check(&mut extra, &mut failures, "telescoping", dual.y.iter().sum(), 0.5 * alpha * beta * cost);
        let v = trace.max_step_violation();
        extra.insert("max_step_violation".into(), json!(v));
        if v > 1e-9 {
            failures.push(format!("greedy step violation {v}"));
        }
    }
    Ok(Outcome {
        cost: Interval::exact(cost),
        dual,
        extra,
        failures,
        inconclusive: Vec::new(),
    })
}

fn run_frac_balance(inst: &Instance, verify: bool) -> CliResult<Outcome> {
    let (x, trace) = algorithms::run_frac_balance(inst)?;
    let cost = model::cost_quadratic(&x, inst)?;
    let dual = certificate::fit_frac_balance(inst, &trace);
    let mut extra = serde_json::Map::new();
    let mut failures = Vec::new();
    if verify {
        identity_check(&mut extra, &mut failures, "ratio_identity", dual.objective(), cost / 4.0);
    }
    Ok(Outcome {
        cost: Interval::exact(cost),
        dual,
        extra,
        failures,
        inconclusive: Vec::new(),
    })
}

fn run_balance(inst: &Instance, trials: usize, seed: u64, verify: bool) -> CliResult<Outcome> {
    let run = algorithms::run_balance(inst, trials, seed)?;
    let costs: Summary = run
        .samples
        .iter()
        .map(|s| model::cost_quadratic(s, inst))
        .collect::<Result<Vec<f64>, _>>()?
        .into_iter()
        .collect();
    let dual = certificate::fit_balance(inst, &run.trace);
    let mut extra = serde_json::Map::new();
    let mut failures = Vec::new();
    let mut inconclusive = Vec::new();
    let (sum_y, mean_sq, second) = certificate::balance_moments(inst, &run.trace, &dual);
    extra.insert("expected_cost".into(), json!(second));
    if verify {
        let scale = 1.0 + second;
        let excess = certificate::balance_increment_excess(inst, &run.trace);
        extra.insert("increment_excess".into(), json!(excess));
        if excess > 1e-10 {
            failures.push(format!("moment increments exceed x f by {excess}"));
        }
        let moments_ok = sum_y >= 0.2 * (mean_sq + second) - 1e-9 * scale;
        let objective_ok = dual.objective() >= 0.2 * second - 1e-9 * scale;
        extra.insert("moment_bound".into(), json!({ "sum_y": sum_y, "mean_sq": mean_sq, "second_moment": second, "passed": moments_ok && objective_ok }));
        if !(moments_ok && objective_ok) {
            failures.push("objective below a fifth of the expected cost".into());
        }
        let ci = costs.ci99();
        let consistent = ci.lower <= second && second <= ci.upper;
        extra.insert("sampled_cost_consistent".into(), json!(consistent));
        if !consistent {
            inconclusive.push(format!("sampled mean {} outside the 99% interval around {second}", ci.mean));
        }
    }
    Ok(Outcome {
        cost: costs.ci99(),
        dual,
        extra,
        failures,
        inconclusive,
    })
}

fn run_correlated(inst: &Instance, trials: usize, seed: u64, k: ConstantsBundle, verify: bool, guarantee_trials: usize) -> CliResult<Outcome> {
    let mut run = CorrelatedRun::fractional(inst, k)?;
    run.sample(trials, seed)?;
    let costs: Summary = run
        .samples
        .iter()
        .map(|s| model::cost_quadratic(s, inst))
        .collect::<Result<Vec<f64>, _>>()?
        .into_iter()
        .collect();
    let mut extra = serde_json::Map::new();
    let mut failures = Vec::new();
    let mut inconclusive = Vec::new();
    if verify {
        let nl = certificate::check_nu_load_invariants(&k, inst, &run.trace, &run.grouping);
        if !nl.passed() {
            failures.extend(nl.violations.iter().take(5).cloned());
        }
        extra.insert("nu_load".into(), serde_json::to_value(&nl).map_err(|e| CliError::Breach(e.to_string()))?);
        if let Err(e) = run.grouping.check_invariants() {
            failures.push(format!("grouping: {e}"));
        }
        let step = certificate::check_step_feasibility(inst, &run.trace, certificate::FEASIBILITY_TOL);
        extra.insert("step_feasible".into(), json!(step.feasible()));
        if !step.feasible() {
            failures.push(format!("{} per-step constraint violations", step.violations.len()));
        }
        let g = certificate::check_objective_guarantee(inst, &run, guarantee_trials, seed)?;
        match g.overall() {
            Verdict::Violated => failures.push("objective guarantee violated".into()),
            Verdict::Inconclusive => inconclusive.push("objective guarantee".into()),
            Verdict::Holds => {}
        }
        extra.insert("guarantee".into(), serde_json::to_value(&g).map_err(|e| CliError::Breach(e.to_string()))?);
        extra.insert("hard_groups".into(), json!(run.grouping.hard_groups().count()));
    }
    Ok(Outcome {
        cost: costs.ci99(),
        dual: run.dual,
        extra,
        failures,
        inconclusive,
    })
}

// ------------------------------------------------------------- sweep

/// One CSV row of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub seed: u64,
    pub algorithm: Algorithm,
    pub cost: f64,
    pub opt_upper: f64,
    pub ratio: f64,
    pub analytic_lower_ratio: f64,
}

pub fn sweep_row(alg: Algorithm, n: usize, seed: u64, trials: usize) -> CliResult<SweepRow> {
    let b = adversary::analytic_baselines(n);
    let cost = match alg {
        Algorithm::FracBalance => adversary::sweep_fracbalance(n, seed)?,
        Algorithm::Greedy => adversary::sweep_greedy(n, seed),
        Algorithm::Balance => adversary::sweep_balance(n, seed, trials)?.mean(),
        Algorithm::Correlated => adversary::sweep_correlated(n, seed, trials)?.mean(),
    };
    let lower = match alg {
        Algorithm::Balance => b.indep_cost_lower,
        _ => b.frac_cost_lower,
    };
    Ok(SweepRow {
        n,
        seed,
        algorithm: alg,
        cost,
        opt_upper: b.opt_upper,
        ratio: cost / b.opt_upper,
        analytic_lower_ratio: lower / b.opt_upper,
    })
}

fn cmd_sweep(a: &SweepArgs) -> CliResult<()> {
    let randomized = a.alg.iter().any(|x| x.is_randomized());
    let mut configs = Vec::new();
    for s in &a.adversary {
        let cfg = parse_adversary(s)?;
        if cfg.variant != Variant::FractionalLb {
            return Err(CliError::Usage("sweep supports the fractional_lb variant only".into()));
        }
        if randomized && a.seed.is_none() && !s.contains("seed=") {
            return Err(CliError::Usage("seed required".into()));
        }
        configs.push(cfg);
    }
    let trials = a.trials.unwrap_or(100);
    if randomized && trials == 0 {
        return Err(CliError::Usage("trials ≥ 1 required".into()));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["n", "seed", "algorithm", "cost", "opt_upper", "ratio", "analytic_lower_ratio"])
        .map_err(|e| CliError::Breach(e.to_string()))?;
    for cfg in &configs {
        let base = a.seed.unwrap_or(cfg.seed);
        for seed in base..base + a.seeds {
            for &alg in &a.alg {
                let r = sweep_row(alg, cfg.n, seed, trials)?;
                w.write_record([
                    r.n.to_string(),
                    r.seed.to_string(),
                    r.algorithm.name().to_string(),
                    r.cost.to_string(),
                    r.opt_upper.to_string(),
                    r.ratio.to_string(),
                    r.analytic_lower_ratio.to_string(),
                ])
                .map_err(|e| CliError::Breach(e.to_string()))?;
                eprintln!("n={} seed={} {}: ratio {:.4}", r.n, r.seed, r.algorithm, r.ratio);
            }
        }
    }
    let body = w.into_inner().map_err(|e| CliError::Breach(e.to_string()))?;
    write_output(a.out.as_deref(), &body)
}

// ------------------------------------------------------------- constants

fn cmd_constants(a: &ConstantsArgs) -> CliResult<()> {
    if !(a.grid_step > 0.0 && a.grid_step < 1.0) {
        return Err(CliError::Usage(format!("bad grid step {}", a.grid_step)));
    }
    let k = constants_for(a.gamma)?;
    let r = certificate::check_constants(&k, a.grid_step);
    let mut v = serde_json::to_value(&r).map_err(|e| CliError::Breach(e.to_string()))?;
    if let Some(o) = v.as_object_mut() {
        o.insert("schema".into(), json!(SCHEMA));
        o.insert("command".into(), json!("constants"));
    }
    write_json(a.out.as_deref(), &v)?;
    for c in &r.inequalities {
        eprintln!("{:<24} slack {:+.3e} {}", c.name, c.slack, if c.passed { "ok" } else { "FAIL" });
    }
    for c in &r.regions {
        eprintln!("{:<24} max   {:+.3e} {}", c.name, c.max, if c.passed { "ok" } else { "FAIL" });
    }
    if r.passed {
        Ok(())
    } else {
        Err(CliError::Breach(format!("constants rejected: {}", r.failures().join(", "))))
    }
}

// ------------------------------------------------------------- oracle

fn oracle_one(inst: &Instance, cap: u64) -> CliResult<(Value, usize)> {
    let (opt, _) = model::bruteforce_opt(inst, cap)?;
    let mut objectives = serde_json::Map::new();
    let mut violations = 0;
    let mut record = |name: &str, obj: f64| {
        if obj > opt + 1e-9 * opt.abs() {
            violations += 1;
        }
        objectives.insert(name.into(), json!(obj));
    };
    let (_, t) = algorithms::run_greedy(inst)?;
    record("greedy", certificate::fit_greedy(inst, &t).objective());
    if inst.model() == model::Model::Standard {
        let (_, t) = algorithms::balance_fractional(inst)?;
        record("balance", certificate::fit_balance(inst, &t).objective());
        let (_, t) = algorithms::run_frac_balance(inst)?;
        record("fracbalance", certificate::fit_frac_balance(inst, &t).objective());
        let run = CorrelatedRun::fractional(inst, ConstantsBundle::paper())?;
        record("correlated", run.dual.objective());
    }
    Ok((json!({ "opt": opt, "objectives": objectives, "violations": violations }), violations))
}

fn cmd_oracle(a: &OracleArgs) -> CliResult<()> {
    let mut results = Vec::new();
    let mut total = 0;
    if a.source.random.is_some() || a.source.stress.is_some() {
        let base = need_seed(a.seed)?;
        for seed in base..base + a.seeds {
            let (inst, source) = load_instance(&a.source, Some(seed))?;
            let (mut v, bad) = oracle_one(&inst, a.cap)?;
            v["instance"] = source;
            total += bad;
            results.push(v);
        }
    } else {
        let (inst, source) = load_instance(&a.source, a.seed)?;
        let (mut v, bad) = oracle_one(&inst, a.cap)?;
        v["instance"] = source;
        total += bad;
        results.push(v);
    }
    let out = json!({
        "schema": SCHEMA,
        "command": "oracle",
        "cap": a.cap,
        "instances": results,
        "violations": total,
    });
    write_json(a.out.as_deref(), &out)?;
    for r in &results {
        eprintln!("OPT {} objectives {}", r["opt"], r["objectives"]);
    }
    if total == 0 {
        Ok(())
    } else {
        Err(CliError::Breach(format!("{total} weak-duality violations")))
    }
}

// ------------------------------------------------------------- gen

fn cmd_gen(a: &GenArgs) -> CliResult<()> {
    let (inst, _) = load_instance(&a.source, a.seed)?;
    let mut body = Vec::new();
    inst.write_jsonl(&mut body)?;
    write_output(a.out.as_deref(), &body)
}
