//! Command-line front end for `el-sched`.
//!
//! [`run`] parses an argument vector and executes one subcommand, writing
//! reports to the given sink. Exit statuses: 0 on success (for `analyze`:
//! every set schedulable), 1 when a test gives no decision, a simulation
//! misses a deadline or a campaign fails, and 2 on malformed input.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use el_sched::analysis::{baseline_susp_obl, test_fixed, test_variable, AnalysisResult, ChosenOffsets, TestConfig};
use el_sched::experiments::{
    acceptance_sweep, find_non_dominance_pair, fixed_vs_variable_campaign, lambda_sweep, overload_campaign,
    partition_campaign, runtime_benchmark, soundness_campaign, tfp_equivalence_campaign, write_csv, CampaignConfig,
    CampaignReport, LambdaFamily, NonDominanceConfig, SweepConfig, SweepFile, SweepRow, TestKind,
};
use el_sched::generator::{generate_batch, read_jsonl, synthesize, write_jsonl, GenSpec};
use el_sched::policy::parse_points;
use el_sched::sim::{
    check_feasibility, generate_job_sequence, response_times, simulate_el, DemandModel, ReleaseModel, SuspensionModel,
};
use el_sched::time::parse_ratio;
use el_sched::{derive_priority_points, PriorityPolicy, TaskSet, Tick};
use num::rational::Ratio;

/// Exit status for a completed run with a positive outcome.
pub const EXIT_OK: u8 = 0;
/// No decision, deadline miss or failed campaign.
pub const EXIT_NEGATIVE: u8 = 1;
/// Malformed arguments or input files.
pub const EXIT_INPUT: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "el-sched",
    version,
    about = "Schedulability analysis and simulation for self-suspending sporadic tasks under EDF-like scheduling",
    after_help = "Times are integer ticks (1 tick = 1 µs). EL_SCHED_THREADS caps the worker count of sweep, verify and bench."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw random task sets (UUniFast utilizations, log-uniform periods).
    Generate(GenerateArgs),
    /// Run a schedulability test on a task-set file.
    Analyze(AnalyzeArgs),
    /// Simulate one random job sequence of a task set.
    Simulate(SimulateArgs),
    /// Acceptance-ratio sweep over utilization and deadline factor.
    Sweep(SweepArgs),
    /// Acceptance ratios of EQDF or SAEDF for a range of λ.
    LambdaSweep(LambdaSweepArgs),
    /// Randomized verification campaign.
    Verify(VerifyArgs),
    /// Time the fixed-window test under EDF.
    Bench(BenchArgs),
}

/// Search parameters of the tests.
#[derive(Debug, Clone, Args)]
struct TestArgs {
    /// Candidate grid step as a share of the deadline (decimal or fraction)
    #[arg(long, default_value = "0.01")]
    eta: String,
    /// Passes over the task list
    #[arg(long, default_value_t = 5)]
    depth: u32,
    /// Largest active-interval length tried by the variable-window test
    #[arg(long, default_value_t = 10)]
    max_a: u32,
}

impl TestArgs {
    fn config(&self) -> Result<TestConfig> {
        Ok(TestConfig::new(unsigned_ratio(&self.eta)?, self.depth, self.max_a)?)
    }
}

/// Test parameters that override a configuration file only when given.
#[derive(Debug, Clone, Args)]
struct TestOverrides {
    /// Candidate grid step as a share of the deadline [default: 0.01, or the config file's eta]
    #[arg(long)]
    eta: Option<String>,
    /// Passes over the task list [default: 5, or the config file's depth]
    #[arg(long)]
    depth: Option<u32>,
    /// Largest active-interval length tried by the variable-window test [default: 10, or the config file's max_a]
    #[arg(long)]
    max_a: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PolicyName {
    Edf,
    Fifo,
    Eqdf,
    Saedf,
    Dm,
    Tfp,
    Explicit,
}

/// Priority-point policy selection.
#[derive(Debug, Clone, Args)]
struct PolicyArgs {
    /// Priority-point policy (tfp: list order, index 0 highest)
    #[arg(long, value_enum, default_value = "edf")]
    policy: PolicyName,
    /// λ of eqdf and saedf (decimal or fraction)
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    lambda: String,
    /// Comma-separated relative priority points for the explicit policy
    #[arg(long, allow_hyphen_values = true)]
    pp: Option<String>,
}

impl PolicyArgs {
    fn policy(&self) -> Result<PriorityPolicy> {
        if self.pp.is_some() && self.policy != PolicyName::Explicit {
            bail!("--pp only applies to --policy explicit");
        }
        Ok(match self.policy {
            PolicyName::Edf => PriorityPolicy::Edf,
            PolicyName::Fifo => PriorityPolicy::Fifo,
            PolicyName::Eqdf => PriorityPolicy::Eqdf(parse_ratio(&self.lambda)?),
            PolicyName::Saedf => PriorityPolicy::Saedf(parse_ratio(&self.lambda)?),
            PolicyName::Dm => PriorityPolicy::DeadlineMonotonic,
            PolicyName::Tfp => PriorityPolicy::TfpEmulation,
            PolicyName::Explicit => {
                let pp = self.pp.as_deref().context("--policy explicit needs --pp")?;
                PriorityPolicy::Explicit(parse_points(pp)?)
            }
        })
    }
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// Tasks per set
    #[arg(long, default_value_t = 10)]
    n: usize,
    /// Total utilization (decimal or fraction)
    #[arg(long, default_value = "0.5")]
    u: String,
    /// Deadline factor: D = round(x·T)
    #[arg(long, default_value = "1")]
    x: String,
    /// Master seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of sets; more than one selects the JSON-lines batch format
    #[arg(long, default_value_t = 1)]
    count: u64,
    /// Write the batch format even for a single set
    #[arg(long)]
    jsonl: bool,
    /// Output file [default: stdout]
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TestName {
    Fixed,
    Variable,
    Baseline,
}

impl From<TestName> for TestKind {
    fn from(t: TestName) -> Self {
        match t {
            TestName::Fixed => TestKind::Fixed,
            TestName::Variable => TestKind::Variable,
            TestName::Baseline => TestKind::Baseline,
        }
    }
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// Task-set file, text format or JSON-lines batch
    taskset: PathBuf,
    #[command(flatten)]
    policy: PolicyArgs,
    /// Test to run (baseline: suspension-oblivious, for comparison)
    #[arg(long, value_enum, default_value = "fixed")]
    test: TestName,
    #[command(flatten)]
    test_args: TestArgs,
    /// Print one CSV row per set instead of the report
    #[arg(long)]
    csv: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReleaseName {
    Periodic,
    Sporadic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SuspensionName {
    None,
    MaxBlock,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DemandName {
    Wcet,
    Random,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Task-set file in the text format
    taskset: PathBuf,
    #[command(flatten)]
    policy: PolicyArgs,
    /// Simulated ticks [default: 20 times the largest period]
    #[arg(long)]
    horizon: Option<Tick>,
    /// Seed of the job sequence
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// periodic: releases every T; sporadic: random extra separation
    #[arg(long, value_enum, default_value = "sporadic")]
    release_model: ReleaseName,
    /// none; max-block: one suspension of S after the first tick; random: up to three random blocks
    #[arg(long, value_enum, default_value = "random")]
    suspension_model: SuspensionName,
    /// wcet: every job runs C; random: uniform in [0, C]
    #[arg(long, value_enum, default_value = "wcet")]
    demand_model: DemandName,
    /// Write the full trace to this file
    #[arg(long)]
    trace_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(
    after_help = "Without --config the sweep uses 5 % to 100 % utilization, 100 sets per point, n = 10, EDF with the fixed-window test, x = 1 and seed 0."
)]
struct SweepArgs {
    /// TOML configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured master seed
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    tests: TestOverrides,
    /// Directory receiving sweep_<name>_<seed>.csv
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyName {
    Eqdf,
    Saedf,
}

#[derive(Debug, Args)]
struct LambdaSweepArgs {
    /// TOML configuration file; its policies are ignored
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured master seed
    #[arg(long)]
    seed: Option<u64>,
    /// Policy family [default: the config file's family, else eqdf]
    #[arg(long, value_enum)]
    family: Option<FamilyName>,
    /// Comma-separated λ values [default: the config file's lambdas, else -10..=10]
    #[arg(long, allow_hyphen_values = true)]
    lambdas: Option<String>,
    #[arg(long, value_enum, default_value = "fixed")]
    test: TestName,
    #[command(flatten)]
    tests: TestOverrides,
    /// Directory receiving sweep_<name>_<family>_<seed>.csv
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Campaign {
    /// Simulated response times stay within accepted bounds (EDF)
    Soundness,
    /// Prefix-sum EL and task-level fixed priority give identical traces
    TfpEquivalence,
    /// Both tests agree on constrained-deadline sets
    FixedVsVariable,
    /// Witnesses that neither test dominates the other (x > 1)
    NonDominance,
    /// Sets with utilization above 1 are rejected
    Overload,
    /// Processor-state partition identities on simulated traces
    Partition,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(value_enum)]
    campaign: Campaign,
    /// Task sets drawn at most
    #[arg(long, default_value_t = 1000)]
    budget: u64,
    /// Master seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Tasks per set
    #[arg(long, default_value_t = 10)]
    n: usize,
    /// Deadline factor [default: 1.5 for non-dominance, else 1]
    #[arg(long)]
    x: Option<String>,
    /// Job sequences simulated per accepted set
    #[arg(long, default_value_t = 100)]
    sims: u64,
    /// tfp-equivalence: accepted sets required for a pass
    #[arg(long, default_value_t = 1)]
    target: u64,
    /// partition: random (k, c, d) probes per trace
    #[arg(long, default_value_t = 50)]
    probes: u64,
    #[command(flatten)]
    test_args: TestArgs,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Comma-separated task counts
    #[arg(long, default_value = "10,20,50")]
    n_list: String,
    /// Comma-separated utilizations
    #[arg(long, default_value = "0.3,0.5,0.7,0.9")]
    utilizations: String,
    /// Sets per (n, utilization)
    #[arg(long, default_value_t = 5)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    test_args: TestArgs,
}

/// Parses `argv` (program name first) and runs the subcommand, writing
/// reports to `out` and diagnostics to stderr.
pub fn run<I, T>(argv: I, out: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_INPUT
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<u8> {
    match cmd {
        Command::Generate(a) => generate(a, out),
        Command::Analyze(a) => analyze(a, out),
        Command::Simulate(a) => simulate(a, out),
        Command::Sweep(a) => sweep(a, out),
        Command::LambdaSweep(a) => lambda(a, out),
        Command::Verify(a) => verify(a, out),
        Command::Bench(a) => bench(a, out),
    }
}

fn unsigned_ratio(text: &str) -> Result<Ratio<u64>> {
    let r = parse_ratio(text)?;
    if *r.numer() < 0 {
        bail!("expected a non-negative number, got {text:?}");
    }
    Ok(Ratio::new(*r.numer() as u64, *r.denom() as u64))
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>> {
    text.split(',').map(|s| s.trim().parse::<T>().map_err(|_| anyhow::anyhow!("bad {what} {s:?}"))).collect()
}

fn generate(a: GenerateArgs, out: &mut dyn Write) -> Result<u8> {
    let spec = GenSpec::new(a.n, unsigned_ratio(&a.u)?, a.seed).with_deadline_factor(unsigned_ratio(&a.x)?);
    let text = if a.count == 1 && !a.jsonl {
        synthesize(&spec)?.taskset.to_string()
    } else {
        let mut buf = Vec::new();
        write_jsonl(&mut buf, &generate_batch(&spec, a.count)?)?;
        String::from_utf8(buf)?
    };
    match &a.output {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(EXIT_OK)
}

/// Reads a text-format set, or every set of a JSON-lines batch, labelled.
fn read_tasksets(path: &Path) -> Result<Vec<(String, TaskSet)>> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let label = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    if text.trim_start().starts_with('{') {
        read_jsonl(text.as_bytes())?
            .into_iter()
            .map(|e| Ok((format!("{label}#{}", e.id), e.taskset()?)))
            .collect::<Result<_>>()
            .with_context(|| format!("in {}", path.display()))
    } else {
        let ts: TaskSet = text.parse().with_context(|| format!("in {}", path.display()))?;
        Ok(vec![(label, ts)])
    }
}

fn read_taskset(path: &Path) -> Result<TaskSet> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    text.parse::<TaskSet>().with_context(|| format!("in {}", path.display()))
}

fn run_test(
    ts: &TaskSet,
    policy: &PriorityPolicy,
    test: TestName,
    cfg: &TestConfig,
) -> Result<(Vec<i64>, AnalysisResult)> {
    let pa = derive_priority_points(ts, policy)?;
    let res = match test {
        TestName::Fixed => test_fixed(ts, &pa, cfg)?,
        TestName::Variable => test_variable(ts, &pa, cfg)?,
        TestName::Baseline => baseline_susp_obl(ts, &pa, cfg)?,
    };
    Ok((pa.pp, res))
}

/// `bounded` when the last evaluation of task `k` produced a bound within
/// `D_k`; otherwise `R̃_k` is only the deadline it was reset to.
fn task_status(res: &AnalysisResult, k: usize) -> &'static str {
    let bounded = match &res.offsets {
        ChosenOffsets::Fixed(v) => v[k].is_some(),
        ChosenOffsets::Variable(v) => v[k].is_some(),
    };
    match (bounded, res.verdict) {
        (true, _) => "bounded",
        (false, false) => "no bound",
        (false, true) => unreachable!("accepted sets bound every task"),
    }
}

fn analyze(a: AnalyzeArgs, out: &mut dyn Write) -> Result<u8> {
    let policy = a.policy.policy()?;
    let cfg = a.test_args.config()?;
    let sets = read_tasksets(&a.taskset)?;
    let mut all = true;
    if a.csv {
        writeln!(out, "{}", AnalysisResult::csv_header(sets.iter().map(|s| s.1.len()).max().unwrap_or(0)))?;
    }
    for (label, ts) in &sets {
        let (pp, res) = run_test(ts, &policy, a.test, &cfg)?;
        all &= res.verdict;
        if a.csv {
            writeln!(out, "{}", res.to_csv_row(label, &policy.to_string()))?;
            continue;
        }
        writeln!(
            out,
            "{label}: {} tasks, U = {:.4}, policy {policy}, {} test (η {}, depth {}, max_a {})",
            ts.len(),
            ts.utilization_f64(),
            TestKind::from(a.test),
            cfg.eta,
            cfg.depth,
            cfg.max_a
        )?;
        writeln!(out, "{:>5} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}  status", "task", "C", "S", "D", "T", "Π", "R̃")?;
        for (k, t) in ts.iter().enumerate() {
            writeln!(
                out,
                "{:>5} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}  {}",
                k + 1,
                t.wcet,
                t.max_suspension,
                t.deadline,
                t.min_interarrival,
                pp[k],
                res.bounds.r_tilde[k],
                task_status(&res, k)
            )?;
        }
        let verdict = if res.verdict { "schedulable" } else { "no decision" };
        writeln!(out, "verdict: {verdict} after {} passes", res.iterations)?;
    }
    Ok(if all { EXIT_OK } else { EXIT_NEGATIVE })
}

fn simulate(a: SimulateArgs, out: &mut dyn Write) -> Result<u8> {
    let ts = read_taskset(&a.taskset)?;
    let pa = derive_priority_points(&ts, &a.policy.policy()?)?;
    let horizon = a.horizon.unwrap_or(20 * ts.max_interarrival());
    let releases = match a.release_model {
        ReleaseName::Periodic => ReleaseModel::Periodic,
        ReleaseName::Sporadic => ReleaseModel::SporadicJittered,
    };
    let suspensions = match a.suspension_model {
        SuspensionName::None => SuspensionModel::None,
        SuspensionName::MaxBlock => SuspensionModel::MaxSingleBlock,
        SuspensionName::Random => SuspensionModel::RandomPhases,
    };
    let demands = match a.demand_model {
        DemandName::Wcet => DemandModel::Wcet,
        DemandName::Random => DemandModel::Random,
    };
    let seq = generate_job_sequence(&ts, horizon, a.seed, releases, suspensions, demands)?;
    let trace = simulate_el(&ts, &pa, &seq)?;
    if let Some(path) = &a.trace_out {
        fs::write(path, trace.export()).with_context(|| format!("cannot write {}", path.display()))?;
    }
    let rt = response_times(&trace, ts.len());
    let feasible = check_feasibility(&trace, &ts);
    writeln!(out, "horizon {horizon}, {} jobs, Π = {:?}", trace.jobs.len(), pa.pp)?;
    writeln!(out, "{:>5} {:>8} {:>10} {:>10} {:>10}", "task", "jobs", "max resp", "D", "unfinished")?;
    for (k, t) in ts.iter().enumerate() {
        let jobs = trace.jobs_of(k);
        let unfinished = jobs.iter().filter(|j| j.finish.is_none()).count();
        let max = rt.per_task_max[k].map_or("-".to_string(), |r| r.to_string());
        writeln!(out, "{:>5} {:>8} {:>10} {:>10} {:>10}", k + 1, jobs.len(), max, t.deadline, unfinished)?;
    }
    writeln!(out, "feasible: {feasible}")?;
    Ok(if feasible { EXIT_OK } else { EXIT_NEGATIVE })
}

fn load_sweep_file(path: Option<&Path>) -> Result<SweepFile> {
    match path {
        None => Ok(SweepFile::default()),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
            toml::from_str(&text).with_context(|| format!("in {}", p.display()))
        }
    }
}

fn apply_overrides(mut file: SweepFile, seed: Option<u64>, t: &TestOverrides) -> SweepFile {
    file.master_seed = seed.or(file.master_seed);
    file.eta = t.eta.clone().or(file.eta);
    file.depth = t.depth.or(file.depth);
    file.max_a = t.max_a.or(file.max_a);
    file
}

fn print_rows(out: &mut dyn Write, rows: &[SweepRow]) -> Result<()> {
    writeln!(out, "{:>6} {:>6} {:<24} {:>9} {:>6}", "U", "x", "policy", "accepted", "ratio")?;
    for r in rows {
        writeln!(
            out,
            "{:>6.2} {:>6.2} {:<24} {:>9} {:>6.3}",
            r.utilization,
            r.deadline_factor,
            r.policy,
            format!("{}/{}", r.accepted, r.total),
            r.ratio
        )?;
    }
    Ok(())
}

fn sweep(a: SweepArgs, out: &mut dyn Write) -> Result<u8> {
    let cfg = apply_overrides(load_sweep_file(a.config.as_deref())?, a.seed, &a.tests).into_config()?;
    let rows = acceptance_sweep(&cfg)?;
    let path = write_csv(&a.out_dir, &cfg.name, cfg.master_seed, &rows)?;
    print_rows(out, &rows)?;
    writeln!(out, "wrote {}", path.display())?;
    Ok(EXIT_OK)
}

fn lambda(a: LambdaSweepArgs, out: &mut dyn Write) -> Result<u8> {
    let file = apply_overrides(load_sweep_file(a.config.as_deref())?, a.seed, &a.tests);
    let family = match (a.family, file.family.as_deref()) {
        (Some(FamilyName::Eqdf), _) => LambdaFamily::Eqdf,
        (Some(FamilyName::Saedf), _) => LambdaFamily::Saedf,
        (None, Some(name)) => name.parse()?,
        (None, None) => LambdaFamily::Eqdf,
    };
    let lambdas = match (&a.lambdas, &file.lambdas) {
        (Some(list), _) => parse_list(list, "λ")?,
        (None, Some(list)) => list.clone(),
        (None, None) => el_sched::experiments::default_lambdas(),
    };
    let cfg: SweepConfig = file.into_config()?;
    let result = lambda_sweep(&cfg, &lambdas, family, a.test.into())?;
    if let Some(w) = &result.warning {
        eprintln!("warning: {w}");
    }
    let path = write_csv(&a.out_dir, &format!("{}_{family}", cfg.name), cfg.master_seed, &result.rows)?;
    print_rows(out, &result.rows)?;
    writeln!(out, "wrote {}", path.display())?;
    Ok(EXIT_OK)
}

fn report(out: &mut dyn Write, r: &CampaignReport) -> Result<u8> {
    write!(out, "{r}")?;
    Ok(if r.passed() { EXIT_OK } else { EXIT_NEGATIVE })
}

fn verify(a: VerifyArgs, out: &mut dyn Write) -> Result<u8> {
    let test_config = a.test_args.config()?;
    let default_x = if a.campaign == Campaign::NonDominance { "1.5" } else { "1" };
    let x = unsigned_ratio(a.x.as_deref().unwrap_or(default_x))?;
    let cfg = CampaignConfig {
        n: a.n,
        deadline_factor: x,
        test_config,
        sims_per_set: a.sims,
        ..CampaignConfig::new(a.budget, a.seed)
    };
    match a.campaign {
        Campaign::Soundness => {
            let r = soundness_campaign(&cfg)?;
            writeln!(
                out,
                "accepted: fixed {}, variable {}, baseline {} of {}",
                r.accepted_fixed, r.accepted_variable, r.accepted_baseline, r.soundness.examined
            )?;
            let sound = report(out, &r.soundness)?;
            let dom = report(out, &r.dominance)?;
            Ok(sound.max(dom))
        }
        Campaign::TfpEquivalence => report(out, &tfp_equivalence_campaign(&cfg, a.target)?),
        Campaign::FixedVsVariable => {
            if x > Ratio::from_integer(1) {
                bail!("fixed-vs-variable compares constrained-deadline sets; use --x 1 or less");
            }
            report(out, &fixed_vs_variable_campaign(&cfg)?)
        }
        Campaign::Overload => report(out, &overload_campaign(&cfg)?),
        Campaign::Partition => report(out, &partition_campaign(&cfg, a.probes)?),
        Campaign::NonDominance => {
            let nd = NonDominanceConfig { n: a.n, test_config, ..NonDominanceConfig::new(x, a.budget, a.seed) };
            let r = find_non_dominance_pair(&nd)?;
            writeln!(out, "non-dominance at x = {x}: {} sets drawn", r.examined)?;
            for (dir, w) in [("fixed-only", &r.fixed_only), ("variable-only", &r.variable_only)] {
                match w {
                    Some(w) => {
                        writeln!(
                            out,
                            "{dir}: set {} (generator seed {}, U = {})",
                            w.index, w.spec.seed, w.spec.u_total
                        )?;
                        write!(out, "{}", w.taskset)?;
                    }
                    None => writeln!(out, "{dir}: not found")?,
                }
            }
            Ok(if r.complete() { EXIT_OK } else { EXIT_NEGATIVE })
        }
    }
}

fn bench(a: BenchArgs, out: &mut dyn Write) -> Result<u8> {
    let n_list: Vec<usize> = parse_list(&a.n_list, "task count")?;
    let utilizations = a.utilizations.split(',').map(unsigned_ratio).collect::<Result<Vec<_>>>()?;
    let rows = runtime_benchmark(&n_list, &utilizations, a.reps, a.seed, &a.test_args.config()?)?;
    let cpus = std::thread::available_parallelism().map_or(1, |n| n.get());
    writeln!(
        out,
        "# {} {}, {cpus} logical CPUs, single-threaded timing",
        std::env::consts::OS,
        std::env::consts::ARCH
    )?;
    writeln!(out, "n,sets,mean_seconds,max_seconds")?;
    for r in rows {
        writeln!(out, "{},{},{:.6},{:.6}", r.n, r.sets, r.mean_seconds, r.max_seconds)?;
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    fn run_capture(args: &[&str]) -> (u8, String) {
        let mut buf = Vec::new();
        let code = run(std::iter::once("el-sched").chain(args.iter().copied()), &mut buf);
        (code, String::from_utf8(buf).unwrap())
    }

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn help_documents_test_defaults() {
        for sub in ["analyze", "verify", "bench", "sweep", "lambda-sweep"] {
            let help = Cli::command().find_subcommand_mut(sub).unwrap().render_long_help().to_string();
            for needle in ["0.01", "5", "10", "--eta", "--depth", "--max-a"] {
                assert!(help.contains(needle), "{sub} help lacks {needle}");
            }
        }
    }

    #[test]
    fn policy_flags() {
        let p = |policy, lambda: &str, pp: Option<&str>| {
            PolicyArgs { policy, lambda: lambda.into(), pp: pp.map(String::from) }.policy()
        };
        assert_eq!(p(PolicyName::Eqdf, "-1/2", None).unwrap(), PriorityPolicy::Eqdf(Ratio::new(-1, 2)));
        assert_eq!(p(PolicyName::Explicit, "0", Some("4,-10")).unwrap(), PriorityPolicy::Explicit(vec![4, -10]));
        assert!(p(PolicyName::Explicit, "0", None).is_err());
        assert!(p(PolicyName::Edf, "0", Some("1")).is_err());
    }

    #[test]
    fn malformed_input_exits_2() {
        let dir = tempfile::tempdir().unwrap();
        let bad = dir.path().join("bad.ts");
        fs::write(&bad, "# el-sched taskset v1\n1 0 5 0\n").unwrap();
        assert_eq!(run_capture(&["analyze", bad.to_str().unwrap()]).0, EXIT_INPUT);
        assert_eq!(run_capture(&["analyze", "/nonexistent.ts"]).0, EXIT_INPUT);
        assert_eq!(run_capture(&["analyze"]).0, EXIT_INPUT);
        assert_eq!(run_capture(&["generate", "--u", "-1"]).0, EXIT_INPUT);
        assert_eq!(run_capture(&["--help"]).0, EXIT_OK);
    }

    // Every generated set must parse back and analyze without error.
    #[test]
    fn generate_then_analyze_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.ts");
        let cfg = TestConfig::default();
        for seed in 0..10_000u64 {
            let u = format!("{}/100", 5 + 5 * (seed % 20));
            let x = ["1", "1.5", "2"][(seed % 3) as usize];
            let (code, _) = run_capture(&[
                "generate",
                "--n",
                "5",
                "--u",
                &u,
                "--x",
                x,
                "--seed",
                &seed.to_string(),
                "-o",
                path.to_str().unwrap(),
            ]);
            assert_eq!(code, EXIT_OK, "seed {seed}");
            let ts = read_taskset(&path).unwrap();
            for test in [TestName::Fixed, TestName::Variable] {
                run_test(&ts, &PriorityPolicy::Edf, test, &cfg).unwrap();
            }
        }
    }

    #[test]
    fn batch_files_are_analyzed_set_by_set() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.jsonl");
        let p = path.to_str().unwrap();
        assert_eq!(run_capture(&["generate", "--n", "3", "--u", "0.1", "--count", "4", "-o", p]).0, EXIT_OK);
        let (code, text) = run_capture(&["analyze", p, "--csv"]);
        assert_eq!(text.lines().count(), 5);
        assert!(text.lines().nth(1).unwrap().starts_with("b#0,edf,"));
        assert_eq!(code, if text.contains(",false,") { EXIT_NEGATIVE } else { EXIT_OK });
    }
}
