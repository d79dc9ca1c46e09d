//! Singleton bandit machine: UCB over `K` arms with an extra channel for
//! observations that arrive without a pull.
//!
//! Arms start at an infinite mean, so every arm is tried once before any
//! confidence index matters. The index is
//! `mean_i + sqrt((alpha + 2) ln t / (2 n_i))` with `n_i = rho_i + s_i`,
//! where `rho_i` counts pulls and `s_i` counts additional feedback.

use crate::error::{Error, Result};
use crate::model::ArmId;

/// Default confidence parameter when the horizon is unknown.
pub const DEFAULT_ALPHA: f64 = 3.0;

/// `max(3, ln K / ln ln T)`, the horizon-aware choice of `alpha`.
pub fn recommended_alpha(k: usize, horizon: u64) -> Result<f64> {
    if k < 2 {
        return Err(Error::Argument(format!("need K >= 2, got {k}")));
    }
    if horizon < 16 {
        return Err(Error::Argument(format!(
            "recommended alpha needs T >= 16 so that ln ln T > 0, got {horizon}"
        )));
    }
    let ratio = (k as f64).ln() / (horizon as f64).ln().ln();
    Ok(ratio.max(3.0))
}

#[derive(Debug, Clone)]
pub struct Sbm {
    alpha: f64,
    /// Sum of all observed values (pulls and additional feedback) per arm.
    wins: Vec<u64>,
    rho: Vec<u64>,
    s: Vec<u64>,
    /// Starts at 1, incremented once per completed pull.
    t: u64,
    pending_feedback: Option<(ArmId, bool)>,
    awaiting: Option<ArmId>,
}

impl Sbm {
    pub fn new(k: usize, alpha: f64) -> Result<Self> {
        if k < 1 {
            return Err(Error::Argument("SBM needs at least one arm".into()));
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::Argument(format!(
                "alpha must be positive and finite, got {alpha}"
            )));
        }
        Ok(Self {
            alpha,
            wins: vec![0; k],
            rho: vec![0; k],
            s: vec![0; k],
            t: 1,
            pending_feedback: None,
            awaiting: None,
        })
    }

    pub fn reset(&mut self) {
        let k = self.wins.len();
        *self = Self {
            alpha: self.alpha,
            wins: vec![0; k],
            rho: vec![0; k],
            s: vec![0; k],
            t: 1,
            pending_feedback: None,
            awaiting: None,
        };
    }

    pub fn num_arms(&self) -> usize {
        self.wins.len()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn internal_t(&self) -> u64 {
        self.t
    }

    pub fn pulls(&self, arm: ArmId) -> u64 {
        self.rho[arm.0]
    }

    pub fn additional(&self, arm: ArmId) -> u64 {
        self.s[arm.0]
    }

    pub fn has_pending_feedback(&self) -> bool {
        self.pending_feedback.is_some()
    }

    /// Pooled empirical mean, `+inf` before the first observation.
    pub fn mean(&self, arm: ArmId) -> f64 {
        let n = self.rho[arm.0] + self.s[arm.0];
        if n == 0 {
            f64::INFINITY
        } else {
            self.wins[arm.0] as f64 / n as f64
        }
    }

    /// Upper confidence index of `arm` at the current internal time.
    pub fn index(&self, arm: ArmId) -> f64 {
        let n = self.rho[arm.0] + self.s[arm.0];
        if n == 0 {
            return f64::INFINITY;
        }
        let radius = ((self.alpha + 2.0) * (self.t as f64).ln() / (2.0 * n as f64)).sqrt();
        self.mean(arm) + radius
    }

    /// Queue one observation of `arm` obtained without pulling it. It is
    /// folded into the statistics at the start of the next `advance`.
    pub fn additional_feedback(&mut self, arm: ArmId, value: bool) -> Result<()> {
        if arm.0 >= self.num_arms() {
            return Err(Error::Contract(format!("{arm} out of range")));
        }
        if let Some((held, _)) = self.pending_feedback {
            return Err(Error::Contract(format!(
                "additional feedback slot already holds an observation of {held}"
            )));
        }
        self.pending_feedback = Some((arm, value));
        Ok(())
    }

    /// Drain pending feedback, then pick the arm with the highest index
    /// (lowest index on ties).
    pub fn advance(&mut self) -> ArmId {
        debug_assert!(self.awaiting.is_none(), "advance with a pull outstanding");
        if let Some((arm, value)) = self.pending_feedback.take() {
            self.wins[arm.0] += value as u64;
            self.s[arm.0] += 1;
        }
        let mut best = ArmId(0);
        let mut best_index = self.index(best);
        for i in 1..self.num_arms() {
            let idx = self.index(ArmId(i));
            if idx > best_index {
                best = ArmId(i);
                best_index = idx;
            }
        }
        self.awaiting = Some(best);
        best
    }

    /// Reward for the arm returned by the last `advance`.
    pub fn feedback(&mut self, value: bool) -> Result<()> {
        let arm = self
            .awaiting
            .take()
            .ok_or_else(|| Error::Contract("feedback without a preceding advance".into()))?;
        self.wins[arm.0] += value as u64;
        self.rho[arm.0] += 1;
        self.t += 1;
        Ok(())
    }
}
