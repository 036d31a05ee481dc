//! Randomized query sets and success/timing statistics per solver mode.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{csv_writer, fmt_f64, write_json};
use crate::kinematics::{RobotKind, RobotModel};
use crate::solver::{self, IkQuery, IkStatus, SolverConfig};

/// Name of the generator behind [`generate_queries`], recorded in summaries.
pub const PRNG: &str = "ChaCha8";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuerySet {
    pub robot: RobotKind,
    pub seed: u64,
    pub queries: Vec<IkQuery>,
    /// Configuration each `t_des` was generated from.
    pub samples: Vec<Vec<f64>>,
}

impl QuerySet {
    pub fn len(&self) -> usize {
        self.queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queries.is_empty()
    }
}

fn sample(model: &RobotModel, rng: &mut ChaCha8Rng) -> Vec<f64> {
    model.limits().iter().map(|l| rng.random_range(l.lo..=l.hi)).collect()
}

/// `n` reachable queries: `t_des = FK(θ_sample)` and an independent `θ_init`, both
/// uniform within the joint limits.
pub fn generate_queries(model: &RobotModel, n: usize, seed: u64) -> Result<QuerySet> {
    if n == 0 {
        return Err(Error::InvalidInput("query count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut queries = Vec::with_capacity(n);
    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        let theta = sample(model, &mut rng);
        let init = sample(model, &mut rng);
        queries.push(IkQuery::new(model.forward_kinematics(&theta)?, init));
        samples.push(theta);
    }
    Ok(QuerySet {
        robot: model.kind(),
        seed,
        queries,
        samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BenchMode {
    Combined { n_l: usize },
    FabrikOnly { n_max: usize },
}

impl BenchMode {
    pub fn config(&self, kind: RobotKind) -> SolverConfig {
        match *self {
            BenchMode::Combined { n_l } => SolverConfig::for_robot(kind).with_n_l(n_l),
            BenchMode::FabrikOnly { n_max } => SolverConfig::fabrik_only(kind, n_max),
        }
    }
}

impl fmt::Display for BenchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BenchMode::Combined { n_l } => write!(f, "combined:{n_l}"),
            BenchMode::FabrikOnly { n_max } => write!(f, "fabrik:{n_max}"),
        }
    }
}

/// `combined:<n_l>` or `fabrik:<n_max>`.
impl FromStr for BenchMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("mode must be combined:<n_l> or fabrik:<n_max>, got {s:?}"));
        let (name, count) = s.split_once(':').ok_or_else(bad)?;
        let count: usize = count.parse().map_err(|_| bad())?;
        if count == 0 {
            return Err(bad());
        }
        match name {
            "combined" => Ok(BenchMode::Combined { n_l: count }),
            "fabrik" => Ok(BenchMode::FabrikOnly { n_max: count }),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub query_id: usize,
    pub status: IkStatus,
    pub theta: Vec<f64>,
    pub eps_pos: f64,
    pub eps_rot: f64,
    pub fabrik_iters: usize,
    pub opt_used: bool,
    pub time_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub robot: RobotKind,
    pub mode: BenchMode,
    pub seed: u64,
    pub success_rate: f64,
    pub avg_time: f64,
    /// Per-query seconds, indexed by query id.
    pub times: Vec<f64>,
    pub per_query: Vec<QueryRecord>,
}

impl BenchmarkReport {
    pub fn solved(&self) -> usize {
        self.per_query.iter().filter(|r| r.status == IkStatus::Solved).count()
    }

    pub fn max_time(&self) -> f64 {
        self.times.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mode: String,
    pub success_rate: f64,
    pub avg_time_s: f64,
    pub n: usize,
    pub seed: u64,
    pub prng: String,
}

impl From<&BenchmarkReport> for Summary {
    fn from(r: &BenchmarkReport) -> Self {
        Self {
            mode: r.mode.to_string(),
            success_rate: r.success_rate,
            avg_time_s: r.avg_time,
            n: r.per_query.len(),
            seed: r.seed,
            prng: PRNG.into(),
        }
    }
}

/// Execution knobs that do not change which queries solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchOptions {
    /// Thread-pool size; `None` uses the available parallelism.
    pub workers: Option<usize>,
    /// Solves per query; the recorded time is the fastest, which suppresses scheduler
    /// noise. Solving is deterministic, so the outcome is the same on every repeat.
    pub repeats: usize,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            workers: None,
            repeats: 1,
        }
    }
}

fn run_mode(model: &RobotModel, queries: &QuerySet, mode: BenchMode, repeats: usize) -> Result<BenchmarkReport> {
    let config = mode.config(model.kind());
    let per_query = queries
        .queries
        .par_iter()
        .enumerate()
        .map(|(query_id, q)| {
            let r = solver::solve(model, q, &config)?;
            let mut time = r.solve_time;
            for _ in 1..repeats {
                time = time.min(solver::solve(model, q, &config)?.solve_time);
            }
            Ok(QueryRecord {
                query_id,
                status: r.status,
                theta: r.theta,
                eps_pos: r.error.eps_pos,
                eps_rot: r.error.eps_rot,
                fabrik_iters: r.fabrik_iterations,
                opt_used: r.optimizer_used,
                time_seconds: time,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let n = per_query.len() as f64;
    let times: Vec<f64> = per_query.iter().map(|r| r.time_seconds).collect();
    let solved = per_query.iter().filter(|r| r.status == IkStatus::Solved).count();
    Ok(BenchmarkReport {
        robot: model.kind(),
        mode,
        seed: queries.seed,
        success_rate: solved as f64 / n,
        avg_time: times.iter().sum::<f64>() / n,
        times,
        per_query,
    })
}

/// Runs every query under every mode. Records are keyed by query id, so results do not
/// depend on scheduling apart from the measured times.
pub fn run_benchmark(
    model: &RobotModel,
    queries: &QuerySet,
    modes: &[BenchMode],
    options: &BenchOptions,
) -> Result<Vec<BenchmarkReport>> {
    if queries.robot != model.kind() {
        return Err(Error::InvalidInput(format!(
            "query set was generated for {} but the model is {}",
            queries.robot,
            model.kind()
        )));
    }
    if options.repeats == 0 {
        return Err(Error::InvalidInput("repeat count must be at least 1".into()));
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = options.workers {
        if w == 0 {
            return Err(Error::InvalidInput("worker count must be at least 1".into()));
        }
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot start worker pool: {e}")))?;
    pool.install(|| {
        modes
            .iter()
            .map(|&m| run_mode(model, queries, m, options.repeats))
            .collect()
    })
}

/// Minimum, quartiles, and maximum with linear interpolation between order statistics.
pub fn five_number_summary(values: &[f64]) -> Option<[f64; 5]> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let at = |p: f64| {
        let h = p * (v.len() - 1) as f64;
        let (i, frac) = (h.floor() as usize, h.fract());
        if i + 1 < v.len() {
            v[i] + frac * (v[i + 1] - v[i])
        } else {
            v[i]
        }
    };
    Some([v[0], at(0.25), at(0.5), at(0.75), v[v.len() - 1]])
}

/// `query_id,mode,status,eps_pos,eps_rot,fabrik_iters,opt_used,time_seconds`.
pub fn write_report_csv(report: &BenchmarkReport, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    let mode = report.mode.to_string();
    let err = |e| Error::csv(path, e);
    w.write_record([
        "query_id",
        "mode",
        "status",
        "eps_pos",
        "eps_rot",
        "fabrik_iters",
        "opt_used",
        "time_seconds",
    ])
    .map_err(err)?;
    for r in &report.per_query {
        w.write_record([
            r.query_id.to_string(),
            mode.clone(),
            r.status.as_str().to_string(),
            fmt_f64(r.eps_pos),
            fmt_f64(r.eps_rot),
            r.fabrik_iters.to_string(),
            r.opt_used.to_string(),
            fmt_f64(r.time_seconds),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_summary_json(report: &BenchmarkReport, path: &Path) -> Result<()> {
    write_json(path, &Summary::from(report))
}

/// `query_id,mode,time_seconds,log10_time` per query, then rows `min`, `q1`, `median`,
/// `q3`, `max` in the `query_id` column.
pub fn export_time_distribution(report: &BenchmarkReport, path: &Path) -> Result<()> {
    let stats = five_number_summary(&report.times)
        .ok_or_else(|| Error::InvalidInput("cannot summarize an empty report".into()))?;
    let mut w = csv_writer(path)?;
    let err = |e| Error::csv(path, e);
    let mode = report.mode.to_string();
    w.write_record(["query_id", "mode", "time_seconds", "log10_time"])
        .map_err(err)?;
    for (i, t) in report.times.iter().enumerate() {
        w.write_record([i.to_string(), mode.clone(), fmt_f64(*t), fmt_f64(t.log10())])
            .map_err(err)?;
    }
    for (name, t) in ["min", "q1", "median", "q3", "max"].iter().zip(stats) {
        w.write_record([name.to_string(), mode.clone(), fmt_f64(t), fmt_f64(t.log10())])
            .map_err(err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
