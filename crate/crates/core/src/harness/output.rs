use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{ExperimentConfig, RawConfig};
use super::runner::ExperimentOutcome;
use crate::error::{Error, Result};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "MULTIDUEL_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "results";

pub const TRACES_FILE: &str = "traces.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const METADATA_FILE: &str = "metadata.toml";

/// `--out` if given, else `$MULTIDUEL_OUT_DIR`, else `./results`.
pub fn resolve_out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

#[derive(Serialize)]
struct TraceRow<'a> {
    policy: &'a str,
    run_id: usize,
    seed: u64,
    t: u64,
    cumulative_regret: f64,
}

#[derive(Serialize)]
struct SummaryRow<'a> {
    policy: &'a str,
    t: u64,
    mean_regret: f64,
    variance: f64,
}

/// Not covered by the determinism guarantee (wall time varies).
#[derive(Serialize)]
struct Metadata<'a> {
    version: &'a str,
    policy: &'a str,
    runs: usize,
    wall_time_seconds: f64,
    config: &'a RawConfig,
}

#[derive(Debug, Clone)]
pub struct OutputPaths {
    pub traces: PathBuf,
    pub summary: PathBuf,
    pub metadata: PathBuf,
}

pub fn write_traces(path: &Path, outcome: &ExperimentOutcome) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for tr in &outcome.traces {
        for &(t, r) in &tr.points {
            w.serialize(TraceRow {
                policy: outcome.policy,
                run_id: tr.run_id,
                seed: tr.seed,
                t,
                cumulative_regret: r,
            })?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_summary(path: &Path, outcome: &ExperimentOutcome) -> Result<()> {
    let rep = &outcome.report;
    let mut w = csv::Writer::from_path(path)?;
    for (c, &t) in rep.checkpoints.iter().enumerate() {
        w.serialize(SummaryRow {
            policy: outcome.policy,
            t,
            mean_regret: rep.mean[c],
            variance: rep.variance[c],
        })?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Write the two CSVs and the metadata file into `dir`, creating it if needed.
pub fn write_results(
    dir: &Path,
    config: &ExperimentConfig,
    outcome: &ExperimentOutcome,
) -> Result<OutputPaths> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let paths = OutputPaths {
        traces: dir.join(TRACES_FILE),
        summary: dir.join(SUMMARY_FILE),
        metadata: dir.join(METADATA_FILE),
    };
    write_traces(&paths.traces, outcome)?;
    write_summary(&paths.summary, outcome)?;
    let meta = Metadata {
        version: env!("CARGO_PKG_VERSION"),
        policy: outcome.policy,
        runs: outcome.report.runs,
        wall_time_seconds: outcome.wall_time.as_secs_f64(),
        config: &config.echo,
    };
    let text = toml::to_string(&meta).map_err(|e| Error::Config(e.to_string()))?;
    fs::write(&paths.metadata, text).map_err(|e| Error::io(&paths.metadata, e))?;
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::run_experiment;

    #[test]
    fn writes_expected_headers() {
        let cfg = ExperimentConfig::parse(
            "policy = \"uniform_random\"\narms = 3\nm = 2\nhorizon = 100\nruns = 2\ncheckpoints = [10, 100]\n",
            Path::new("."),
        )
        .unwrap();
        let out = run_experiment(&cfg, Some(1)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let paths = write_results(dir.path(), &cfg, &out).unwrap();

        let traces = fs::read_to_string(&paths.traces).unwrap();
        let mut lines = traces.lines();
        assert_eq!(lines.next(), Some("policy,run_id,seed,t,cumulative_regret"));
        assert_eq!(lines.count(), 4);

        let summary = fs::read_to_string(&paths.summary).unwrap();
        assert!(summary.starts_with("policy,t,mean_regret,variance\n"));
        assert_eq!(summary.lines().count(), 3);

        let meta = fs::read_to_string(&paths.metadata).unwrap();
        assert!(meta.contains("wall_time_seconds"));
        assert!(meta.contains("policy = \"uniform_random\""));
    }

    #[test]
    fn out_dir_flag_wins() {
        assert_eq!(resolve_out_dir(Some("x".into())), PathBuf::from("x"));
    }
}
