//! Best-arm identification machines.
//!
//! A machine is driven one pull at a time: `advance` names the next arm,
//! `feedback` reports its Bernoulli reward, and `stop_test` tells the driver
//! when the machine is confident enough to `return_best`.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::model::ArmId;

pub trait BestArmIdentifier {
    /// Clear all statistics and start a fresh identification at confidence `1 - delta`.
    fn reset(&mut self, delta: f64) -> Result<()>;
    fn advance(&mut self) -> Result<ArmId>;
    fn feedback(&mut self, reward: bool) -> Result<()>;
    fn stop_test(&mut self) -> bool;
    fn return_best(&self) -> Result<ArmId>;
    fn num_arms(&self) -> usize;
}

/// LUCB1.
///
/// Starts with one pull of every arm, then repeatedly pulls the empirical
/// leader `h` and the strongest challenger `l` (highest upper bound among the
/// rest). Two-pull rounds are queued so the driver sees one arm per `advance`.
/// Stops once the leader's lower bound clears every other arm's upper bound.
#[derive(Debug, Clone)]
pub struct Lucb {
    k: usize,
    delta: f64,
    pulls: Vec<u64>,
    wins: Vec<u64>,
    /// Completed scheduling rounds; the initialisation sweep counts as round 1.
    rounds: u64,
    pending: VecDeque<ArmId>,
    awaiting: Option<ArmId>,
    stopped: bool,
    best: Option<ArmId>,
}

impl Lucb {
    pub fn new(k: usize, delta: f64) -> Result<Self> {
        if k < 2 {
            return Err(Error::Argument(format!(
                "LUCB needs at least 2 arms, got {k}"
            )));
        }
        let mut machine = Self {
            k,
            delta,
            pulls: vec![0; k],
            wins: vec![0; k],
            rounds: 0,
            pending: VecDeque::new(),
            awaiting: None,
            stopped: false,
            best: None,
        };
        machine.reset(delta)?;
        Ok(machine)
    }

    /// Exploration radius `sqrt(ln(5 K t^4 / (4 delta)) / (2 u))`.
    pub fn beta(k: usize, delta: f64, pulls: u64, round: u64) -> f64 {
        let t = round.max(1) as f64;
        let num = (5.0 * k as f64 * t.powi(4) / (4.0 * delta)).ln();
        (num / (2.0 * pulls as f64)).sqrt()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn pulls(&self, arm: ArmId) -> u64 {
        self.pulls[arm.0]
    }

    pub fn total_pulls(&self) -> u64 {
        self.pulls.iter().sum()
    }

    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    /// Empirical mean, `None` before the first pull.
    pub fn mean(&self, arm: ArmId) -> Option<f64> {
        let n = self.pulls[arm.0];
        (n > 0).then(|| self.wins[arm.0] as f64 / n as f64)
    }

    pub fn is_stopped(&self) -> bool {
        self.stopped
    }

    fn mean_of(&self, i: usize) -> f64 {
        self.wins[i] as f64 / self.pulls[i] as f64
    }

    fn radius(&self, i: usize) -> f64 {
        Self::beta(self.k, self.delta, self.pulls[i], self.rounds)
    }

    fn leader(&self) -> usize {
        let mut h = 0;
        for i in 1..self.k {
            if self.mean_of(i) > self.mean_of(h) {
                h = i;
            }
        }
        h
    }

    fn schedule_round(&mut self) {
        let h = self.leader();
        let mut l = None;
        let mut best_ucb = f64::NEG_INFINITY;
        for i in (0..self.k).filter(|&i| i != h) {
            let ucb = self.mean_of(i) + self.radius(i);
            if ucb > best_ucb {
                best_ucb = ucb;
                l = Some(i);
            }
        }
        self.pending.push_back(ArmId(h));
        if let Some(l) = l {
            self.pending.push_back(ArmId(l));
        }
    }
}

impl BestArmIdentifier for Lucb {
    fn reset(&mut self, delta: f64) -> Result<()> {
        // delta = 1 is reachable from epoch schedules with a unit-length next epoch
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::Argument(format!(
                "confidence delta must lie in (0, 1], got {delta}"
            )));
        }
        self.delta = delta;
        self.pulls.iter_mut().for_each(|x| *x = 0);
        self.wins.iter_mut().for_each(|x| *x = 0);
        self.rounds = 0;
        self.pending = (0..self.k).map(ArmId).collect();
        self.awaiting = None;
        self.stopped = false;
        self.best = None;
        Ok(())
    }

    fn advance(&mut self) -> Result<ArmId> {
        if self.stopped {
            return Err(Error::Contract("advance on a stopped LUCB machine".into()));
        }
        if let Some(a) = self.awaiting {
            return Err(Error::Contract(format!(
                "advance while feedback for {a} is outstanding"
            )));
        }
        if self.pending.is_empty() {
            self.schedule_round();
        }
        let arm = self
            .pending
            .pop_front()
            .expect("scheduling round always enqueues the leader");
        self.awaiting = Some(arm);
        Ok(arm)
    }

    fn feedback(&mut self, reward: bool) -> Result<()> {
        let arm = self
            .awaiting
            .take()
            .ok_or_else(|| Error::Contract("feedback without a preceding advance".into()))?;
        self.pulls[arm.0] += 1;
        self.wins[arm.0] += reward as u64;
        if self.pending.is_empty() {
            self.rounds += 1;
        }
        Ok(())
    }

    fn stop_test(&mut self) -> bool {
        if self.stopped {
            return true;
        }
        if self.pulls.contains(&0) {
            return false;
        }
        let h = self.leader();
        let lower = self.mean_of(h) - self.radius(h);
        let upper = (0..self.k)
            .filter(|&j| j != h)
            .map(|j| self.mean_of(j) + self.radius(j))
            .fold(f64::NEG_INFINITY, f64::max);
        if lower > upper {
            self.stopped = true;
            self.best = Some(ArmId(h));
        }
        self.stopped
    }

    fn return_best(&self) -> Result<ArmId> {
        self.best
            .ok_or_else(|| Error::Contract("return_best before the stop test fired".into()))
    }

    fn num_arms(&self) -> usize {
        self.k
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn beta_value() {
        assert_abs_diff_eq!(
            Lucb::beta(2, 0.1, 1, 1),
            1.268_636_241_179_519_6,
            epsilon = 1e-12
        );
    }

    #[test]
    fn initial_sweep_in_order() {
        let mut m = Lucb::new(3, 0.1).unwrap();
        for expected in 0..3 {
            assert_eq!(m.advance().unwrap(), ArmId(expected));
            m.feedback(false).unwrap();
        }
        assert_eq!(m.rounds(), 1);
    }

    #[test]
    fn round_schedules_leader_then_challenger() {
        let mut m = Lucb::new(3, 0.1).unwrap();
        for r in [true, false, false] {
            m.advance().unwrap();
            m.feedback(r).unwrap();
        }
        assert_eq!(m.advance().unwrap(), ArmId(0));
        m.feedback(true).unwrap();
        let l = m.advance().unwrap();
        assert!(l == ArmId(1) || l == ArmId(2));
    }

    #[test]
    fn reset_clears_stopped_machine() {
        let mut m = Lucb::new(2, 0.1).unwrap();
        // arm 0 always wins, arm 1 always loses
        let mut steps = 0;
        while !m.stop_test() {
            let a = m.advance().unwrap();
            m.feedback(a == ArmId(0)).unwrap();
            steps += 1;
            assert!(steps < 1000);
        }
        assert_eq!(m.return_best().unwrap(), ArmId(0));
        assert!(m.advance().is_err());

        m.reset(0.5).unwrap();
        assert!(!m.is_stopped());
        assert!(m.return_best().is_err());
        assert_eq!(m.total_pulls(), 0);
        assert_eq!(m.advance().unwrap(), ArmId(0));
    }

    #[test]
    fn reset_rejects_bad_delta() {
        let mut m = Lucb::new(2, 0.1).unwrap();
        assert!(m.reset(0.0).is_err());
        assert!(m.reset(1.5).is_err());
        assert!(m.reset(1.0).is_ok());
    }

    #[test]
    fn feedback_contract() {
        let mut m = Lucb::new(2, 0.1).unwrap();
        assert!(matches!(m.feedback(true), Err(Error::Contract(_))));
        m.advance().unwrap();
        assert!(matches!(m.advance(), Err(Error::Contract(_))));
    }

    #[test]
    fn means_from_feedback() {
        let mut m = Lucb::new(2, 0.1).unwrap();
        m.advance().unwrap();
        m.feedback(true).unwrap();
        assert_eq!(m.mean(ArmId(0)), Some(1.0));
        assert_eq!(m.mean(ArmId(1)), None);

        // second pull of arm 0 comes after arm 1's initial pull
        m.advance().unwrap();
        m.feedback(false).unwrap();
        assert_eq!(m.advance().unwrap(), ArmId(0));
        m.feedback(false).unwrap();
        assert_eq!(m.mean(ArmId(0)), Some(0.5));
    }

    #[test]
    fn bernoulli_mean_within_three_sigma() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut m = Lucb::new(2, 0.1).unwrap();
        let mut fed = 0;
        while m.pulls(ArmId(0)) < 100 {
            let a = m.advance().unwrap();
            let p = if a == ArmId(0) { 0.7 } else { 0.2 };
            m.feedback(rng.random_bool(p)).unwrap();
            fed += 1;
            assert!(fed < 10_000);
        }
        let sigma = (0.7f64 * 0.3 / 100.0).sqrt();
        assert!((m.mean(ArmId(0)).unwrap() - 0.7).abs() <= 3.0 * sigma);
    }

    #[test]
    fn stop_test_separated_means() {
        // 200 pulls each with means (1, 0): radius < 0.5 so intervals separate
        let mut m = Lucb::new(2, 0.1).unwrap();
        m.pulls = vec![200, 200];
        m.wins = vec![200, 0];
        m.rounds = 200;
        m.pending.clear();
        assert!(Lucb::beta(2, 0.1, 200, 200) < 0.5);
        assert!(m.stop_test());
        assert!(m.stop_test());
        assert_eq!(m.return_best().unwrap(), ArmId(0));
    }

    #[test]
    fn stop_test_overlapping() {
        let mut m = Lucb::new(2, 0.1).unwrap();
        for r in [true, true] {
            m.advance().unwrap();
            m.feedback(r).unwrap();
        }
        assert!(!m.stop_test());
    }
}
