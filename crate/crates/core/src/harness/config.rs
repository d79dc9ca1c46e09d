use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::environment::load_matrix;
use crate::error::{Error, Result};
use crate::model::{ArmId, LinkFunction, PreferenceMatrix};
use crate::policies::{PolicyKind, PolicySpec};
use crate::sbm::{recommended_alpha, DEFAULT_ALPHA};

pub const DEFAULT_RUCB_ALPHA: f64 = 1.01;
pub const DEFAULT_CHECKPOINTS: u64 = 50;

/// Checkpoint schedule as written in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CheckpointSpec {
    /// `"log:N"`: `N` log-spaced distinct steps from 1 to `T`.
    Log(String),
    Explicit(Vec<u64>),
}

/// The config file as written: flat keys, everything but `policy` and
/// `horizon` optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub policy: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instance: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub arms: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub link: Option<LinkFunction>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    pub horizon: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checkpoints: Option<CheckpointSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InstanceSpec {
    Synthetic { k: usize, link: LinkFunction },
    Matrix { path: PathBuf, best: Option<ArmId> },
}

impl InstanceSpec {
    pub fn build(&self) -> Result<PreferenceMatrix> {
        match self {
            InstanceSpec::Synthetic { k, link } => PreferenceMatrix::synthetic(*k, *link),
            InstanceSpec::Matrix { path, best } => load_matrix(path, *best),
        }
    }
}

/// A validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub instance: InstanceSpec,
    pub policy: PolicySpec,
    pub horizon: u64,
    pub runs: usize,
    pub base_seed: u64,
    pub checkpoints: Vec<u64>,
    /// Non-fatal remarks produced while resolving defaults.
    pub warnings: Vec<String>,
    /// Resolved configuration, for echoing into result metadata.
    pub echo: RawConfig,
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Parse config text. Relative matrix paths resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Self::from_raw(raw, base_dir)
    }

    pub fn from_raw(raw: RawConfig, base_dir: &Path) -> Result<Self> {
        let mut warnings = Vec::new();
        let kind: PolicyKind = raw.policy.parse()?;
        let horizon = raw.horizon;
        if horizon < 1 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        let runs = raw.runs.unwrap_or(1);
        if runs < 1 {
            return Err(Error::Config("runs must be at least 1".into()));
        }

        let instance_kind = raw.instance.as_deref().unwrap_or(if raw.matrix.is_some() {
            "matrix"
        } else {
            "synthetic"
        });
        let (instance, k) = match instance_kind {
            "synthetic" => {
                let k = raw
                    .arms
                    .ok_or_else(|| Error::Config("synthetic instance needs `arms`".into()))?;
                let link = raw.link.unwrap_or(LinkFunction::Linear);
                if raw.matrix.is_some() || raw.best.is_some() {
                    warnings.push("`matrix`/`best` ignored for a synthetic instance".into());
                }
                (InstanceSpec::Synthetic { k, link }, k)
            }
            "matrix" => {
                let file = raw
                    .matrix
                    .as_ref()
                    .ok_or_else(|| Error::Config("matrix instance needs `matrix`".into()))?;
                let path = if file.is_relative() {
                    base_dir.join(file)
                } else {
                    file.clone()
                };
                let best = raw.best.map(ArmId::from_one_based).transpose()?;
                let spec = InstanceSpec::Matrix { path, best };
                let k = spec.build()?.k();
                if raw.arms.is_some_and(|a| a != k) {
                    return Err(Error::Config(format!(
                        "`arms` = {} disagrees with the {k}x{k} matrix",
                        raw.arms.unwrap_or_default()
                    )));
                }
                if raw.link.is_some() {
                    warnings.push("`link` ignored for a matrix instance".into());
                }
                (spec, k)
            }
            other => {
                return Err(Error::Config(format!(
                    "unknown instance kind {other:?}; expected \"synthetic\" or \"matrix\""
                )))
            }
        };

        let mut unused = |key: &str, present: bool| {
            if present {
                warnings.push(format!(
                    "`{key}` does not apply to policy {kind} and is ignored"
                ));
            }
        };
        let mut echo = raw.clone();
        let policy = match kind {
            PolicyKind::DoublerBai => {
                unused("alpha", raw.alpha.is_some());
                unused("m", raw.m.is_some());
                let a = raw.a.unwrap_or(10.0);
                let b = raw.b.unwrap_or(1.1);
                echo.a = Some(a);
                echo.b = Some(b);
                PolicySpec::DoublerBai { a, b }
            }
            PolicyKind::MultiSbm | PolicyKind::MultiSbmFeedback => {
                unused("m", raw.m.is_some());
                unused("a", raw.a.is_some());
                unused("b", raw.b.is_some());
                let alpha = match raw.alpha {
                    Some(alpha) => alpha,
                    None if horizon >= 16 => recommended_alpha(k, horizon)?,
                    None => DEFAULT_ALPHA,
                };
                echo.alpha = Some(alpha);
                PolicySpec::MultiSbm {
                    alpha,
                    feedback: kind == PolicyKind::MultiSbmFeedback,
                }
            }
            PolicyKind::MultiRucb => {
                unused("a", raw.a.is_some());
                unused("b", raw.b.is_some());
                let alpha = raw.alpha.unwrap_or(DEFAULT_RUCB_ALPHA);
                let m = raw
                    .m
                    .ok_or_else(|| Error::Config("multirucb needs `m`".into()))?;
                echo.alpha = Some(alpha);
                PolicySpec::MultiRucb { alpha, m }
            }
            PolicyKind::UniformRandom => {
                unused("alpha", raw.alpha.is_some());
                unused("a", raw.a.is_some());
                unused("b", raw.b.is_some());
                let m = raw
                    .m
                    .ok_or_else(|| Error::Config("uniform_random needs `m`".into()))?;
                PolicySpec::UniformRandom { m }
            }
        };
        policy.validate(k)?;
        if let PolicySpec::MultiRucb { alpha, .. } = policy {
            if alpha <= 1.0 {
                warnings.push(format!(
                    "MultiRUCB alpha = {alpha} <= 1: the regret guarantee needs alpha > 1"
                ));
            }
        }

        let checkpoints = match &raw.checkpoints {
            None => log_checkpoints(DEFAULT_CHECKPOINTS.min(horizon), horizon)?,
            Some(CheckpointSpec::Log(s)) => {
                let n = s
                    .strip_prefix("log:")
                    .and_then(|n| n.trim().parse::<u64>().ok())
                    .ok_or_else(|| {
                        Error::Config(format!("checkpoints {s:?}: expected \"log:N\" or a list"))
                    })?;
                log_checkpoints(n, horizon)?
            }
            Some(CheckpointSpec::Explicit(list)) => {
                check_explicit(list, horizon)?;
                list.clone()
            }
        };

        echo.instance = Some(instance_kind.to_string());
        echo.runs = Some(runs);
        echo.seed = Some(raw.seed.unwrap_or(0));
        if let InstanceSpec::Synthetic { link, .. } = instance {
            echo.link = Some(link);
        }
        Ok(Self {
            instance,
            policy,
            horizon,
            runs,
            base_seed: raw.seed.unwrap_or(0),
            checkpoints,
            warnings,
            echo,
        })
    }
}

/// `n` distinct, increasing, roughly log-spaced steps in `[1, horizon]`,
/// starting at 1 (when `n > 1`) and ending at `horizon`.
pub fn log_checkpoints(n: u64, horizon: u64) -> Result<Vec<u64>> {
    if n == 0 || n > horizon {
        return Err(Error::Config(format!(
            "cannot place {n} distinct checkpoints in 1..={horizon}"
        )));
    }
    if n == 1 {
        return Ok(vec![horizon]);
    }
    let ln_t = (horizon as f64).ln();
    let mut out = Vec::with_capacity(n as usize);
    let mut prev = 0u64;
    for i in 0..n {
        let geo = (ln_t * i as f64 / (n - 1) as f64).exp().round() as u64;
        let room = horizon - (n - 1 - i);
        let v = geo.max(prev + 1).min(room);
        out.push(v);
        prev = v;
    }
    Ok(out)
}

fn check_explicit(list: &[u64], horizon: u64) -> Result<()> {
    if list.is_empty() {
        return Err(Error::Config("checkpoint list is empty".into()));
    }
    if list[0] < 1 || *list.last().unwrap_or(&0) > horizon {
        return Err(Error::Config(format!(
            "checkpoints must lie in 1..={horizon}"
        )));
    }
    if list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(
            "checkpoints must be strictly increasing".into(),
        ));
    }
    Ok(())
}
