//! Command-line front end: `simulate`, `learn`, `eval` and `bench`.
//!
//! Exit codes: 0 on success, 1 on invalid input or a failed run, 2 when a
//! bench finished but some of its runs failed.

pub mod bench;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::dag::is_dag;
use crate::error::{Error, Result};
use crate::lbfgs::{OptimOptions, OptimReport};
use crate::matrix::DenseMatrix;
use crate::metrics::{delta_f, shd};
use crate::nocurl::{nocurl_run, notears_baseline, Method, NoCurlConfig, NotearsConfig, NotearsStep};
use crate::objective::{Dataset, HKind};
use crate::synth::{simulate, GraphScheme, GraphSpec, NoiseKind};

use bench::{bench_to_dir, BenchConfig, FORMAT_VERSION};

#[derive(Debug, Parser)]
#[command(name = "nocurl", version, about = "DAG structure learning with curl-free projections")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a random weighted DAG and data from its linear SEM.
    Simulate(SimulateArgs),
    /// Learn a DAG from a data matrix.
    Learn(LearnArgs),
    /// Compare a predicted graph against the ground truth.
    Eval(EvalArgs),
    /// Run many trials of several methods and summarize them.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    d: usize,
    #[arg(long, default_value = "er")]
    scheme: GraphScheme,
    #[arg(long)]
    k: f64,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value = "gaussian")]
    noise: NoiseKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct LearnArgs {
    /// n x d data matrix, one sample per row.
    #[arg(long)]
    data: PathBuf,
    /// A NoCurl variant tag or `notears`.
    #[arg(long, default_value = "nocurl2")]
    variant: Method,
    /// Penalty coefficient; repeat for a schedule.
    #[arg(long = "lambda")]
    lambdas: Vec<f64>,
    #[arg(long, default_value_t = 0.3)]
    eps: f64,
    #[arg(long, default_value = "poly")]
    h: HKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    /// Data matrix; adds the score difference to the report.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Also write the report to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// JSON bench config; flags given alongside override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    d: Option<Vec<usize>>,
    #[arg(long)]
    scheme: Option<GraphScheme>,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    noise: Option<NoiseKind>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    variants: Option<Vec<Method>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    h: Option<HKind>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, env = "NOCURL_JOBS")]
    jobs: Option<usize>,
}

/// Parses `args` (program name first) and runs the chosen subcommand.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => cmd_simulate(&a).map(|_| ExitCode::SUCCESS),
        Command::Learn(a) => cmd_learn(&a).map(|_| ExitCode::SUCCESS),
        Command::Eval(a) => cmd_eval(&a).map(|_| ExitCode::SUCCESS),
        Command::Bench(a) => cmd_bench(&a),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::from(1)
    })
}

#[derive(Serialize)]
struct SimulateMeta<'a> {
    format_version: u32,
    generator: &'static str,
    generator_version: &'static str,
    d: usize,
    scheme: GraphScheme,
    k: f64,
    n: usize,
    noise: NoiseKind,
    seed: u64,
    edges: usize,
    files: [&'a str; 2],
}

fn cmd_simulate(a: &SimulateArgs) -> Result<()> {
    let spec = GraphSpec { d: a.d, scheme: a.scheme, k: a.k, seed: a.seed };
    let sim = simulate(&spec, a.n, a.noise)?;
    std::fs::create_dir_all(&a.out)?;
    sim.data.x().write_csv(a.out.join("X.csv"))?;
    sim.a_true.write_csv(a.out.join("A_true.csv"))?;
    let meta = SimulateMeta {
        format_version: FORMAT_VERSION,
        generator: "chacha8",
        generator_version: env!("CARGO_PKG_VERSION"),
        d: a.d,
        scheme: a.scheme,
        k: a.k,
        n: a.n,
        noise: a.noise,
        seed: a.seed,
        edges: sim.a_true.nnz(),
        files: ["X.csv", "A_true.csv"],
    };
    write_json(&a.out.join("meta.json"), &meta)
}

#[derive(Serialize)]
struct OptimSummary {
    iterations: usize,
    function_evals: usize,
    converged_by: crate::lbfgs::StopReason,
    f_initial: f64,
    f_final: f64,
}

impl From<&OptimReport> for OptimSummary {
    fn from(r: &OptimReport) -> Self {
        Self {
            iterations: r.iterations,
            function_evals: r.function_evals,
            converged_by: r.converged_by,
            f_initial: r.f_initial,
            f_final: r.f_final,
        }
    }
}

#[derive(Serialize)]
struct LearnRecord {
    format_version: u32,
    variant: String,
    lambdas: Vec<f64>,
    h: HKind,
    seed: u64,
    final_h: f64,
    wall_time: f64,
    threshold: f64,
    final_threshold: f64,
    exhausted: bool,
    edges: usize,
    p_tilde: Option<Vec<f64>>,
    optimizer: Vec<OptimSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    notears_schedule: Option<NotearsConfig>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    notears_trace: Vec<NotearsStep>,
}

fn cmd_learn(a: &LearnArgs) -> Result<()> {
    let data = Dataset::new(DenseMatrix::read_csv(&a.data)?)?;
    let mut optim = OptimOptions::default();
    if let Some(m) = a.max_iters {
        optim.max_iters = m;
    }
    let result = match a.variant {
        Method::NoCurl(v) => {
            let mut cfg = NoCurlConfig { threshold_eps: a.eps, h_kind: a.h, optim, seed: a.seed, ..NoCurlConfig::new(v) };
            if !a.lambdas.is_empty() {
                cfg.lambdas.clone_from(&a.lambdas);
            }
            nocurl_run(&data, &cfg)?
        }
        Method::Notears => notears_baseline(&data, a.h, a.eps, &optim)?,
    };
    if !is_dag(&result.a_hat) {
        return Err(Error::Invariant("learned graph is cyclic".into()));
    }
    std::fs::create_dir_all(&a.out)?;
    result.a_hat.write_csv(a.out.join("A_hat.csv"))?;
    let record = LearnRecord {
        format_version: FORMAT_VERSION,
        variant: result.method.clone(),
        lambdas: result.lambdas.clone(),
        h: a.h,
        seed: a.seed,
        final_h: result.final_h,
        wall_time: result.wall_time,
        threshold: a.eps,
        final_threshold: result.final_threshold,
        exhausted: result.exhausted,
        edges: result.a_hat.nnz(),
        p_tilde: result.p_tilde.as_ref().map(|p| p.values().to_vec()),
        optimizer: result.optim_reports.iter().map(OptimSummary::from).collect(),
        notears_schedule: (a.variant == Method::Notears).then(NotearsConfig::default),
        notears_trace: result.notears_trace.clone(),
    };
    write_json(&a.out.join("result.json"), &record)
}

#[derive(Serialize)]
struct EvalRecord {
    format_version: u32,
    shd: usize,
    extra: usize,
    missing: usize,
    reverse: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta_f: Option<f64>,
}

fn cmd_eval(a: &EvalArgs) -> Result<()> {
    let pred = DenseMatrix::read_csv(&a.pred)?;
    let truth = DenseMatrix::read_csv(&a.truth)?;
    let report = shd(&pred, &truth)?;
    let df = match &a.data {
        Some(p) => Some(delta_f(&pred, &truth, &Dataset::new(DenseMatrix::read_csv(p)?)?)?),
        None => None,
    };
    let record = EvalRecord {
        format_version: FORMAT_VERSION,
        shd: report.shd,
        extra: report.extra,
        missing: report.missing,
        reverse: report.reverse,
        delta_f: df,
    };
    let text = serde_json::to_string_pretty(&record)?;
    println!("{text}");
    if let Some(out) = &a.out {
        std::fs::write(out, text + "\n")?;
    }
    Ok(())
}

fn bench_config(a: &BenchArgs) -> Result<BenchConfig> {
    let mut cfg = match &a.config {
        Some(p) => serde_json::from_str::<BenchConfig>(&std::fs::read_to_string(p)?)?,
        None => BenchConfig {
            d: a.d.clone().ok_or_else(|| missing("--d"))?,
            scheme: a.scheme.unwrap_or(GraphScheme::Er),
            k: a.k.ok_or_else(|| missing("--k"))?,
            noise: a.noise.unwrap_or(NoiseKind::Gaussian),
            n: a.n.unwrap_or(1000),
            trials: a.trials.ok_or_else(|| missing("--trials"))?,
            variants: a.variants.clone().ok_or_else(|| missing("--variants"))?,
            seed: a.seed.unwrap_or(0),
            eps: 0.3,
            h: HKind::Poly,
            max_iters: None,
        },
    };
    if let Some(v) = &a.d {
        cfg.d.clone_from(v);
    }
    if let Some(v) = a.scheme {
        cfg.scheme = v;
    }
    if let Some(v) = a.k {
        cfg.k = v;
    }
    if let Some(v) = a.noise {
        cfg.noise = v;
    }
    if let Some(v) = a.n {
        cfg.n = v;
    }
    if let Some(v) = a.trials {
        cfg.trials = v;
    }
    if let Some(v) = &a.variants {
        cfg.variants.clone_from(v);
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(v) = a.eps {
        cfg.eps = v;
    }
    if let Some(v) = a.h {
        cfg.h = v;
    }
    if a.max_iters.is_some() {
        cfg.max_iters = a.max_iters;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn missing(flag: &str) -> Error {
    Error::InvalidArgument(format!("{flag} is required when no --config is given"))
}

fn cmd_bench(a: &BenchArgs) -> Result<ExitCode> {
    let cfg = bench_config(a)?;
    let jobs = match a.jobs {
        Some(0) => return Err(Error::InvalidArgument("--jobs must be at least 1".into())),
        Some(j) => j,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let (rows, _) = bench_to_dir(&cfg, jobs, &a.out)?;
    let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
    if failed > 0 {
        eprintln!("{failed} of {} runs failed; see the error column of results.csv", rows.len());
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}
