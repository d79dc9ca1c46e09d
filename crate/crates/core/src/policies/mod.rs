//! Arm-selection policies.
//!
//! Every policy follows the same two-call protocol per step: `select` returns
//! the comparison set for global step `t` (1-based), the environment plays it,
//! and `observe` receives the resulting duel outcomes.

mod doubler;
mod multirucb;
mod multisbm;
mod uniform;

use std::fmt;
use std::str::FromStr;

pub use doubler::{DoublerBai, EpochSchedule};
pub use multirucb::{candidate_set, optimistic_matrix, MultiRucb, RucbCase};
pub use multisbm::MultiSbmFeedback;
pub use uniform::{sample_distinct, UniformRandom};

use crate::baim::Lucb;
use crate::environment::{ComparisonSet, DuelOutcome, SimRng};
use crate::error::{Error, Result};

pub trait Policy {
    fn name(&self) -> &'static str;

    /// Largest comparison set this policy will ever return.
    fn capacity(&self) -> usize;

    fn select(&mut self, t: u64, rng: &mut SimRng) -> Result<ComparisonSet>;

    fn observe(&mut self, outcomes: &[DuelOutcome]) -> Result<()>;
}

/// Policy names accepted in configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    DoublerBai,
    MultiSbmFeedback,
    MultiSbm,
    MultiRucb,
    UniformRandom,
}

/// Baselines from the literature that this crate deliberately does not ship.
const EXCLUDED: &[&str] = &[
    "doubler",
    "sparring",
    "multisparring",
    "mdb",
    "indselfsparring",
    "if",
    "btm",
    "savage",
    "scb",
];

impl PolicyKind {
    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::DoublerBai => "doubler_bai",
            PolicyKind::MultiSbmFeedback => "multisbm_feedback",
            PolicyKind::MultiSbm => "multisbm",
            PolicyKind::MultiRucb => "multirucb",
            PolicyKind::UniformRandom => "uniform_random",
        }
    }

    /// Two-dueling policies always play an ordered pair.
    pub fn is_two_dueling(self) -> bool {
        matches!(
            self,
            PolicyKind::DoublerBai | PolicyKind::MultiSbmFeedback | PolicyKind::MultiSbm
        )
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let name = s.trim().to_ascii_lowercase();
        match name.as_str() {
            "doubler_bai" => Ok(PolicyKind::DoublerBai),
            "multisbm_feedback" => Ok(PolicyKind::MultiSbmFeedback),
            "multisbm" => Ok(PolicyKind::MultiSbm),
            "multirucb" => Ok(PolicyKind::MultiRucb),
            "uniform_random" => Ok(PolicyKind::UniformRandom),
            other if EXCLUDED.contains(&other) => Err(Error::Config(format!(
                "policy {other:?} is an external baseline and is not implemented; \
                 available: doubler_bai, multisbm_feedback, multisbm, multirucb, uniform_random"
            ))),
            other => Err(Error::Config(format!(
                "unknown policy {other:?}; available: doubler_bai, multisbm_feedback, \
                 multisbm, multirucb, uniform_random"
            ))),
        }
    }
}

/// A fully parameterised policy, ready to instantiate for a given `K`.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicySpec {
    DoublerBai { a: f64, b: f64 },
    MultiSbm { alpha: f64, feedback: bool },
    MultiRucb { alpha: f64, m: usize },
    UniformRandom { m: usize },
}

impl PolicySpec {
    pub fn kind(&self) -> PolicyKind {
        match self {
            PolicySpec::DoublerBai { .. } => PolicyKind::DoublerBai,
            PolicySpec::MultiSbm { feedback: true, .. } => PolicyKind::MultiSbmFeedback,
            PolicySpec::MultiSbm {
                feedback: false, ..
            } => PolicyKind::MultiSbm,
            PolicySpec::MultiRucb { .. } => PolicyKind::MultiRucb,
            PolicySpec::UniformRandom { .. } => PolicyKind::UniformRandom,
        }
    }

    /// Comparison-set capacity the environment must allow.
    pub fn capacity(&self) -> usize {
        match self {
            PolicySpec::MultiRucb { m, .. } | PolicySpec::UniformRandom { m } => *m,
            _ => 2,
        }
    }

    /// Check parameters against `K` without building anything.
    pub fn validate(&self, k: usize) -> Result<()> {
        match *self {
            PolicySpec::DoublerBai { a, b } => EpochSchedule::new(a, b).map(|_| ()),
            PolicySpec::MultiSbm { alpha, .. } => {
                if alpha > 0.0 && alpha.is_finite() {
                    Ok(())
                } else {
                    Err(Error::Config(format!(
                        "alpha must be positive, got {alpha}"
                    )))
                }
            }
            PolicySpec::MultiRucb { alpha, m } => {
                if !(alpha > 0.5) || !alpha.is_finite() {
                    return Err(Error::Config(format!(
                        "MultiRUCB needs alpha > 1/2, got {alpha}"
                    )));
                }
                check_m(m, k)
            }
            PolicySpec::UniformRandom { m } => check_m(m, k),
        }
        .and_then(|_| {
            if k < 2 {
                Err(Error::Config(format!("need at least 2 arms, got {k}")))
            } else {
                Ok(())
            }
        })
    }

    pub fn build(&self, k: usize) -> Result<Box<dyn Policy + Send>> {
        self.validate(k)?;
        Ok(match *self {
            PolicySpec::DoublerBai { a, b } => Box::new(DoublerBai::new(
                EpochSchedule::new(a, b)?,
                Lucb::new(k, 0.5)?,
            )),
            PolicySpec::MultiSbm { alpha, feedback } => {
                Box::new(MultiSbmFeedback::new(k, alpha, feedback)?)
            }
            PolicySpec::MultiRucb { alpha, m } => Box::new(MultiRucb::new(k, m, alpha)?),
            PolicySpec::UniformRandom { m } => Box::new(UniformRandom::new(k, m)?),
        })
    }
}

fn check_m(m: usize, k: usize) -> Result<()> {
    if m < 2 || m > k {
        Err(Error::Config(format!(
            "comparison size m = {m} must satisfy 2 <= m <= K = {k}"
        )))
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for kind in [
            PolicyKind::DoublerBai,
            PolicyKind::MultiSbmFeedback,
            PolicyKind::MultiSbm,
            PolicyKind::MultiRucb,
            PolicyKind::UniformRandom,
        ] {
            assert_eq!(kind.name().parse::<PolicyKind>().unwrap(), kind);
        }
    }

    #[test]
    fn excluded_baselines_are_rejected_with_pointer() {
        let err = "Sparring".parse::<PolicyKind>().unwrap_err();
        assert!(err.to_string().contains("not implemented"), "{err}");
        assert!("thompson".parse::<PolicyKind>().is_err());
    }

    #[test]
    fn m_bounds_checked() {
        assert!(PolicySpec::MultiRucb { alpha: 1.01, m: 5 }
            .build(4)
            .is_err());
        assert!(PolicySpec::UniformRandom { m: 1 }.build(4).is_err());
        assert!(PolicySpec::MultiRucb { alpha: 0.5, m: 2 }.build(4).is_err());
        assert!(PolicySpec::MultiRucb { alpha: 0.6, m: 4 }.build(4).is_ok());
    }
}
