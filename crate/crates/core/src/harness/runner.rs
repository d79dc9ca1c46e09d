use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::config::ExperimentConfig;
use crate::environment::Environment;
use crate::error::{Error, Result};
use crate::model::PreferenceMatrix;
use crate::policies::PolicySpec;

/// Cumulative regret of one run, sampled at the checkpoint steps.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrace {
    pub run_id: usize,
    pub seed: u64,
    /// `(t, cumulative regret after step t)`
    pub points: Vec<(u64, f64)>,
}

impl RegretTrace {
    pub fn regret_at(&self, t: u64) -> Option<f64> {
        self.points.iter().find(|p| p.0 == t).map(|p| p.1)
    }

    pub fn final_regret(&self) -> f64 {
        self.points.last().map_or(0.0, |p| p.1)
    }
}

/// Per-checkpoint mean and unbiased sample variance across runs.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateReport {
    pub runs: usize,
    pub checkpoints: Vec<u64>,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    pub warnings: Vec<String>,
}

impl AggregateReport {
    pub fn mean_at(&self, t: u64) -> Option<f64> {
        self.checkpoints
            .iter()
            .position(|&c| c == t)
            .map(|i| self.mean[i])
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub policy: &'static str,
    pub traces: Vec<RegretTrace>,
    pub report: AggregateReport,
    pub wall_time: Duration,
}

/// One seeded run of `policy` against `matrix` for `horizon` steps.
pub fn run_single(
    matrix: &PreferenceMatrix,
    policy: &PolicySpec,
    horizon: u64,
    checkpoints: &[u64],
    run_id: usize,
    seed: u64,
) -> Result<RegretTrace> {
    let mut env = Environment::new(matrix.clone(), policy.capacity(), seed)?;
    let mut agent = policy.build(matrix.k())?;
    let mut points = Vec::with_capacity(checkpoints.len());
    let mut next = checkpoints.iter().copied().peekable();
    for t in 1..=horizon {
        let set = agent.select(t, env.rng_mut())?;
        let outcomes = env.step(&set)?;
        agent.observe(&outcomes)?;
        if next.peek() == Some(&t) {
            points.push((t, env.cumulative_regret()));
            next.next();
        }
    }
    Ok(RegretTrace {
        run_id,
        seed,
        points,
    })
}

/// Run every seeded replicate of `config`, in parallel on `threads` workers
/// (rayon's default when `None`). Traces come back in run order whatever
/// the scheduling.
pub fn run_experiment(
    config: &ExperimentConfig,
    threads: Option<usize>,
) -> Result<ExperimentOutcome> {
    let matrix = config.instance.build()?;
    config.policy.validate(matrix.k())?;
    let started = Instant::now();

    let job = || {
        (0..config.runs)
            .into_par_iter()
            .map(|r| {
                run_single(
                    &matrix,
                    &config.policy,
                    config.horizon,
                    &config.checkpoints,
                    r,
                    config.base_seed.wrapping_add(r as u64),
                )
            })
            .collect::<Result<Vec<_>>>()
    };
    let traces = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {n} worker threads: {e}")))?
            .install(job)?,
        None => job()?,
    };

    let report = aggregate(&traces)?;
    Ok(ExperimentOutcome {
        policy: config.policy.kind().name(),
        traces,
        report,
        wall_time: started.elapsed(),
    })
}

pub fn aggregate(traces: &[RegretTrace]) -> Result<AggregateReport> {
    let first = traces
        .first()
        .ok_or_else(|| Error::Contract("nothing to aggregate".into()))?;
    let checkpoints: Vec<u64> = first.points.iter().map(|p| p.0).collect();
    for tr in traces {
        if tr.points.len() != checkpoints.len()
            || tr.points.iter().zip(&checkpoints).any(|(p, &c)| p.0 != c)
        {
            return Err(Error::Contract(format!(
                "run {} has a different checkpoint schedule",
                tr.run_id
            )));
        }
    }

    let n = traces.len();
    let mut warnings = Vec::new();
    if n == 1 {
        warnings.push("single run: variance reported as 0".to_string());
    }
    let mut mean = Vec::with_capacity(checkpoints.len());
    let mut variance = Vec::with_capacity(checkpoints.len());
    for c in 0..checkpoints.len() {
        let m = traces.iter().map(|tr| tr.points[c].1).sum::<f64>() / n as f64;
        let v = if n > 1 {
            traces
                .iter()
                .map(|tr| (tr.points[c].1 - m).powi(2))
                .sum::<f64>()
                / (n - 1) as f64
        } else {
            0.0
        };
        mean.push(m);
        variance.push(v);
    }
    Ok(AggregateReport {
        runs: n,
        checkpoints,
        mean,
        variance,
        warnings,
    })
}
