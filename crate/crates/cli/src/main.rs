use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use trifree_core::adversary::{oblivious_bipartite_trace, validate_trace, Trace};
use trifree_core::entropy::{read_log, recover, replay, write_log, LogMode};
use trifree_core::harness::{
    self, bench_label, format_bench_table, metrics_jsonl, parse_seed, AdversaryConfig, EngineKind,
    RunConfig, Snapshot, SEED_ENV,
};

#[derive(Parser)]
#[command(
    name = "trifree",
    version,
    about = "Dynamic coloring of triangle-free graphs"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write line-delimited metrics.
    Run(RunArgs),
    /// Compare A_k for several k against the greedy baseline.
    Bench(BenchArgs),
    /// Write an oblivious bipartite trace.
    GenTrace(GenTraceArgs),
    /// Check a trace against the degree cap and triangle-freeness.
    ValidateTrace(ValidateArgs),
    /// Check a graph-and-coloring snapshot.
    Verify { snapshot: PathBuf },
    /// Recover the random draws of a toy run from its log and trace.
    Recover(RecoverArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum AdversaryArg {
    Oblivious,
    Monochrome,
    Trace,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Local,
    Greedy,
}

#[derive(Clone, Copy, ValueEnum)]
enum LogModeArg {
    Toy,
    Production,
    Both,
}

impl From<LogModeArg> for LogMode {
    fn from(m: LogModeArg) -> Self {
        match m {
            LogModeArg::Toy => LogMode::Toy,
            LogModeArg::Production => LogMode::Production,
            LogModeArg::Both => LogMode::Both,
        }
    }
}

#[derive(Args, Clone, Default)]
struct ConfigArgs {
    /// Base configuration as JSON; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    delta: Option<u32>,
    /// Number of updates.
    #[arg(long = "T", alias = "steps")]
    steps: Option<u64>,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long, value_enum)]
    engine: Option<EngineArg>,
    #[arg(long)]
    eps: Option<f64>,
    /// Override the primary palette size.
    #[arg(long)]
    q: Option<u32>,
    #[arg(long)]
    thr_a: Option<u32>,
    #[arg(long)]
    thr_f: Option<u32>,
    /// Decimal or 0x-prefixed hex; the seed environment variable overrides
    /// the config file but not this flag.
    #[arg(long)]
    seed: Option<String>,
    #[arg(long, value_enum)]
    adversary: Option<AdversaryArg>,
    #[arg(long)]
    insert_frac: Option<f64>,
    /// Maximum resamples before the run aborts.
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long, value_enum)]
    log_mode: Option<LogModeArg>,
    #[arg(long)]
    checkpoint: Option<u64>,
    /// Run every check after every update.
    #[arg(long)]
    full_check: bool,
}

impl ConfigArgs {
    fn resolve(&self) -> anyhow::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => serde_json::from_reader(BufReader::new(open(p)?))
                .with_context(|| format!("parsing config {}", p.display()))?,
            None => RunConfig::new(
                self.n.context("--n is required without --config")?,
                self.delta.context("--delta is required without --config")?,
                self.steps.context("--T is required without --config")?,
            ),
        };
        if let Some(n) = self.n {
            cfg.n = n;
        }
        if let Some(d) = self.delta {
            cfg.delta = d;
        }
        if let Some(t) = self.steps {
            cfg.steps = t;
        }
        if let Some(k) = self.k {
            cfg.k = k;
        }
        if let Some(e) = self.engine {
            cfg.engine = match e {
                EngineArg::Local => EngineKind::Local,
                EngineArg::Greedy => EngineKind::Greedy,
            };
        }
        if let Some(e) = self.eps {
            cfg.eps = e;
        }
        cfg.q = self.q.or(cfg.q);
        cfg.thr_a = self.thr_a.or(cfg.thr_a);
        cfg.thr_f = self.thr_f.or(cfg.thr_f);
        if let Ok(s) = std::env::var(SEED_ENV) {
            cfg.seed = parse_seed(&s).with_context(|| format!("{SEED_ENV}={s}"))?;
        }
        if let Some(s) = &self.seed {
            cfg.seed = parse_seed(s)?;
        }
        let frac = self.insert_frac.unwrap_or(match cfg.adversary {
            AdversaryConfig::Oblivious { insert_frac } => insert_frac,
            _ => 0.7,
        });
        if let Some(a) = self.adversary {
            cfg.adversary = match a {
                AdversaryArg::Oblivious => AdversaryConfig::Oblivious { insert_frac: frac },
                AdversaryArg::Monochrome => AdversaryConfig::Monochrome,
                AdversaryArg::Trace => AdversaryConfig::Trace,
            };
        } else if let AdversaryConfig::Oblivious { insert_frac } = &mut cfg.adversary {
            *insert_frac = frac;
        }
        cfg.budget = self.budget.or(cfg.budget);
        if let Some(m) = self.log_mode {
            cfg.log_mode = Some(m.into());
        }
        if let Some(c) = self.checkpoint {
            cfg.checkpoint_every = c;
        }
        cfg.full_check |= self.full_check;
        Ok(cfg)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Input trace for `--adversary trace`.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Metrics output; defaults to stdout.
    #[arg(long)]
    metrics: Option<PathBuf>,
    /// Binary entropy log output (k = 1 only; needs --log-mode).
    #[arg(long)]
    log: Option<PathBuf>,
    /// Writes the updates actually applied.
    #[arg(long)]
    trace_out: Option<PathBuf>,
    /// Writes the final graph and coloring as JSON.
    #[arg(long)]
    snapshot: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 2000)]
    n: usize,
    #[arg(long, value_delimiter = ',', default_values_t = vec![4096])]
    delta: Vec<u32>,
    #[arg(long = "T", alias = "steps", default_value_t = 20000)]
    steps: u64,
    /// Hierarchy depths to run.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1, 2])]
    k: Vec<u32>,
    /// Skip the greedy baseline.
    #[arg(long)]
    no_greedy: bool,
    #[arg(long, default_value = "1")]
    seed: String,
    #[arg(long, default_value_t = 0.7)]
    insert_frac: f64,
    /// Worker threads; each run stays single-threaded.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Also write the rows as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct GenTraceArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    delta: u32,
    #[arg(long = "T", alias = "steps")]
    steps: usize,
    #[arg(long, default_value_t = 0.7)]
    insert_frac: f64,
    #[arg(long, default_value = "0")]
    seed: String,
    /// Output path; defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    trace: PathBuf,
    /// Override the header's n.
    #[arg(long)]
    n: Option<usize>,
    /// Override the header's degree cap.
    #[arg(long)]
    delta: Option<u32>,
}

#[derive(Args)]
struct RecoverArgs {
    #[arg(long)]
    log: PathBuf,
    #[arg(long)]
    trace: PathBuf,
    /// Also replay with the recovered draws and compare logs.
    #[arg(long)]
    replay: bool,
}

fn open(p: &Path) -> anyhow::Result<File> {
    File::open(p).with_context(|| format!("opening {}", p.display()))
}

fn create(p: &Path) -> anyhow::Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(p).with_context(|| format!("creating {}", p.display()))?,
    ))
}

fn read_trace(p: &Path) -> anyhow::Result<Trace> {
    Trace::read_from(BufReader::new(open(p)?))
        .with_context(|| format!("reading trace {}", p.display()))
}

fn write_out(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => {
            let mut w = create(p)?;
            w.write_all(text.as_bytes())?;
            w.flush()?;
        }
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn cmd_run(args: &RunArgs) -> anyhow::Result<bool> {
    let cfg = args.config.resolve()?;
    let trace = args.trace.as_deref().map(read_trace).transpose()?;
    if trace.is_some() && cfg.adversary != AdversaryConfig::Trace {
        bail!("--trace given without --adversary trace");
    }
    if args.log.is_some() && cfg.log_mode.is_none() {
        bail!("--log needs --log-mode");
    }
    let out = harness::run(&cfg, trace.as_ref())?;
    write_out(args.metrics.as_deref(), &metrics_jsonl(&out.records))?;
    if let (Some(p), Some(log)) = (&args.log, &out.log) {
        let mut w = create(p)?;
        write_log(log, &mut w)?;
        w.flush()?;
    }
    if let Some(p) = &args.trace_out {
        let mut w = create(p)?;
        out.executed.write_to(&mut w)?;
        w.flush()?;
    }
    if let Some(p) = &args.snapshot {
        let mut w = create(p)?;
        serde_json::to_writer(&mut w, &Snapshot::of(&out.engine))?;
        w.flush()?;
    }
    let t = out.totals();
    eprintln!(
        "{}: {} updates, {} resamples, recourse {}, max color {}, budget {}, checks {}",
        bench_label(&cfg),
        t.updates,
        t.resamples,
        t.recourse,
        t.max_color,
        t.budget_status,
        if t.checks_passed { "passed" } else { "FAILED" }
    );
    if let Some(f) = &t.first_failure {
        eprintln!("failure: {f}");
    }
    Ok(out.succeeded())
}

fn cmd_bench(args: &BenchArgs) -> anyhow::Result<bool> {
    let seed = parse_seed(&args.seed)?;
    let mut configs = Vec::new();
    for &delta in &args.delta {
        let mut base = RunConfig::new(args.n, delta, args.steps);
        base.seed = seed;
        base.adversary = AdversaryConfig::Oblivious {
            insert_frac: args.insert_frac,
        };
        for &k in &args.k {
            configs.push(RunConfig { k, ..base.clone() });
        }
        if !args.no_greedy {
            configs.push(RunConfig {
                engine: EngineKind::Greedy,
                ..base
            });
        }
    }
    let rows = harness::bench(&configs, args.jobs)?;
    print!("{}", format_bench_table(&rows));
    if let Some(p) = &args.json {
        let mut w = create(p)?;
        serde_json::to_writer_pretty(&mut w, &rows)?;
        w.flush()?;
    }
    Ok(rows.iter().all(|r| r.ok))
}

fn cmd_gen_trace(args: &GenTraceArgs) -> anyhow::Result<bool> {
    let seed = parse_seed(&args.seed)?;
    let trace = oblivious_bipartite_trace(args.n, args.delta, args.steps, args.insert_frac, seed)?;
    write_out(args.out.as_deref(), &trace.to_text())?;
    Ok(true)
}

fn cmd_validate(args: &ValidateArgs) -> anyhow::Result<bool> {
    let trace = read_trace(&args.trace)?;
    let report = validate_trace(
        &trace,
        args.n.unwrap_or(trace.n),
        args.delta.unwrap_or(trace.delta),
    );
    match &report.first_violation {
        None => println!("clean: {} steps, {} no-ops", report.steps, report.noops),
        Some((step, why)) => println!("invalid at step {step}: {why}"),
    }
    Ok(report.is_clean())
}

fn cmd_verify(path: &Path) -> anyhow::Result<bool> {
    let snap: Snapshot = serde_json::from_reader(BufReader::new(open(path)?))
        .with_context(|| format!("parsing snapshot {}", path.display()))?;
    let report = snap.verify();
    println!("{report}");
    Ok(report.ok)
}

fn cmd_recover(args: &RecoverArgs) -> anyhow::Result<bool> {
    let (log, ledger) = read_log(BufReader::new(open(&args.log)?))?;
    let trace = read_trace(&args.trace)?;
    let draws = recover(&log, &trace)?;
    println!(
        "recovered {} draws from {} resamples ({} log bits vs {} random bits)",
        draws.len(),
        ledger.resamples,
        ledger.l_total,
        ledger.r_total
    );
    if args.replay {
        replay(&log, &trace, draws)?;
        println!("replay reproduced the log and final coloring");
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Command::Run(a) => cmd_run(a),
        Command::Bench(a) => cmd_bench(a),
        Command::GenTrace(a) => cmd_gen_trace(a),
        Command::ValidateTrace(a) => cmd_validate(a),
        Command::Verify { snapshot } => cmd_verify(snapshot),
        Command::Recover(a) => cmd_recover(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
