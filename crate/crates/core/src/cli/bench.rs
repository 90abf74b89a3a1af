//! Multi-trial benchmarking: every (d, trial, method) cell is simulated and
//! learned independently, then written as `results.csv` plus `summary.json`.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dag::is_dag;
use crate::error::{arg_err, Error, Result};
use crate::lbfgs::OptimOptions;
use crate::matrix::DenseMatrix;
use crate::metrics::{delta_f, shd, ShdReport};
use crate::nocurl::Method;
use crate::objective::{h_poly, HKind};
use crate::synth::{simulate, GraphScheme, GraphSpec, NoiseKind};

pub const FORMAT_VERSION: u32 = 1;

pub const RESULT_COLUMNS: [&str; 14] = [
    "variant",
    "d",
    "scheme",
    "k",
    "noise",
    "seed",
    "shd",
    "extra",
    "missing",
    "reverse",
    "delta_f",
    "time_seconds",
    "final_h",
    "error",
];

fn default_eps() -> f64 {
    0.3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub d: Vec<usize>,
    pub scheme: GraphScheme,
    pub k: f64,
    pub noise: NoiseKind,
    pub n: usize,
    pub trials: usize,
    pub variants: Vec<Method>,
    /// Master seed; see [`data_seed`] and [`learner_seed`].
    pub seed: u64,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default)]
    pub h: HKind,
    #[serde(default)]
    pub max_iters: Option<usize>,
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return arg_err("trials must be at least 1");
        }
        if self.variants.is_empty() {
            return arg_err("at least one variant is required");
        }
        if self.d.is_empty() {
            return arg_err("at least one dimension is required");
        }
        if self.n == 0 {
            return arg_err("sample count must be positive");
        }
        for &d in &self.d {
            self.spec(d, 0).validate()?;
        }
        self.optim().validate()
    }

    fn spec(&self, d: usize, seed: u64) -> GraphSpec {
        GraphSpec { d, scheme: self.scheme, k: self.k, seed }
    }

    fn optim(&self) -> OptimOptions {
        let mut o = OptimOptions::default();
        if let Some(m) = self.max_iters {
            o.max_iters = m;
        }
        o
    }
}

/// Seed of the simulated dataset for a trial, shared by every method so
/// methods are compared on identical data.
pub fn data_seed(master: u64, trial: usize) -> u64 {
    master ^ trial as u64
}

/// Seed handed to a method's own randomness (random initializations).
pub fn learner_seed(master: u64, trial: usize, method: Method) -> u64 {
    data_seed(master, trial) ^ fnv1a(method.tag())
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub variant: Method,
    pub d: usize,
    pub trial: usize,
    pub seed: u64,
    pub outcome: std::result::Result<RunMetrics, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub shd: ShdReport,
    pub delta_f: f64,
    pub time_seconds: f64,
    pub final_h: f64,
    pub a_hat: DenseMatrix,
}

fn run_cell(cfg: &BenchConfig, d: usize, trial: usize, method: Method) -> BenchRow {
    let seed = data_seed(cfg.seed, trial);
    let outcome = (|| -> Result<RunMetrics> {
        let sim = simulate(&cfg.spec(d, seed), cfg.n, cfg.noise)?;
        let r = method.run(&sim.data, cfg.h, cfg.eps, &cfg.optim(), learner_seed(cfg.seed, trial, method))?;
        if !is_dag(&r.a_hat) {
            return Err(Error::Invariant(format!("{method} returned a cyclic graph")));
        }
        Ok(RunMetrics {
            shd: shd(&r.a_hat, &sim.a_true)?,
            delta_f: delta_f(&r.a_hat, &sim.a_true, &sim.data)?,
            time_seconds: r.wall_time,
            final_h: h_poly(&r.a_hat)?,
            a_hat: r.a_hat,
        })
    })();
    BenchRow { variant: method, d, trial, seed, outcome: outcome.map_err(|e| e.to_string()) }
}

/// Runs every cell on a pool of `jobs` threads. Rows come back ordered by
/// dimension, then trial, then method as listed in the config.
pub fn run_bench(cfg: &BenchConfig, jobs: usize) -> Result<Vec<BenchRow>> {
    cfg.validate()?;
    let cells: Vec<(usize, usize, Method)> = cfg
        .d
        .iter()
        .flat_map(|&d| (0..cfg.trials).flat_map(move |t| cfg.variants.iter().map(move |&m| (d, t, m))))
        .collect();
    if jobs <= 1 {
        return Ok(cells.into_iter().map(|(d, t, m)| run_cell(cfg, d, t, m)).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| cells.par_iter().map(|&(d, t, m)| run_cell(cfg, d, t, m)).collect()))
}

pub fn write_results_csv(cfg: &BenchConfig, rows: &[BenchRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_io)?;
    w.write_record(RESULT_COLUMNS).map_err(csv_io)?;
    for r in rows {
        let mut rec = vec![
            r.variant.tag().to_string(),
            r.d.to_string(),
            cfg.scheme.to_string(),
            cfg.k.to_string(),
            cfg.noise.to_string(),
            r.seed.to_string(),
        ];
        match &r.outcome {
            Ok(m) => rec.extend([
                m.shd.shd.to_string(),
                m.shd.extra.to_string(),
                m.shd.missing.to_string(),
                m.shd.reverse.to_string(),
                m.delta_f.to_string(),
                m.time_seconds.to_string(),
                m.final_h.to_string(),
                String::new(),
            ]),
            Err(e) => {
                rec.extend(std::iter::repeat_n(String::new(), 7));
                rec.push(e.clone());
            }
        }
        w.write_record(&rec).map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSe {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(count)`; absent with one value.
    pub se: Option<f64>,
}

impl MeanSe {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let se = (values.len() > 1).then(|| {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        });
        Some(Self { mean, se })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryCell {
    pub variant: Method,
    pub d: usize,
    pub scheme: GraphScheme,
    pub k: f64,
    pub noise: NoiseKind,
    pub trials: usize,
    pub failures: usize,
    pub shd: Option<MeanSe>,
    pub extra: Option<MeanSe>,
    pub missing: Option<MeanSe>,
    pub reverse: Option<MeanSe>,
    pub delta_f: Option<MeanSe>,
    pub time_seconds: Option<MeanSe>,
    pub final_h: Option<MeanSe>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub format_version: u32,
    pub config: BenchConfig,
    pub cells: Vec<SummaryCell>,
}

pub fn summarize(cfg: &BenchConfig, rows: &[BenchRow]) -> Summary {
    let mut groups: BTreeMap<(usize, usize), Vec<&BenchRow>> = BTreeMap::new();
    for r in rows {
        let idx = cfg.variants.iter().position(|m| *m == r.variant).unwrap_or(usize::MAX);
        groups.entry((r.d, idx)).or_default().push(r);
    }
    let cells = groups
        .into_values()
        .map(|rs| {
            let ok: Vec<&RunMetrics> = rs.iter().filter_map(|r| r.outcome.as_ref().ok()).collect();
            let col = |f: &dyn Fn(&RunMetrics) -> f64| MeanSe::of(&ok.iter().map(|m| f(m)).collect::<Vec<_>>());
            SummaryCell {
                variant: rs[0].variant,
                d: rs[0].d,
                scheme: cfg.scheme,
                k: cfg.k,
                noise: cfg.noise,
                trials: rs.len(),
                failures: rs.len() - ok.len(),
                shd: col(&|m| m.shd.shd as f64),
                extra: col(&|m| m.shd.extra as f64),
                missing: col(&|m| m.shd.missing as f64),
                reverse: col(&|m| m.shd.reverse as f64),
                delta_f: col(&|m| m.delta_f),
                time_seconds: col(&|m| m.time_seconds),
                final_h: col(&|m| m.final_h),
            }
        })
        .collect();
    Summary { format_version: FORMAT_VERSION, config: cfg.clone(), cells }
}

/// Runs the bench and writes `results.csv` and `summary.json` under `out`.
pub fn bench_to_dir(cfg: &BenchConfig, jobs: usize, out: &Path) -> Result<(Vec<BenchRow>, Summary)> {
    cfg.validate()?;
    std::fs::create_dir_all(out)?;
    let rows = run_bench(cfg, jobs)?;
    write_results_csv(cfg, &rows, &out.join("results.csv"))?;
    let summary = summarize(cfg, &rows);
    std::fs::write(out.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    Ok((rows, summary))
}
