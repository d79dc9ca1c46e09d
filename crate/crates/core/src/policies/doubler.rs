use rand::Rng;

use super::Policy;
use crate::baim::{BestArmIdentifier, Lucb};
use crate::environment::{ComparisonSet, DuelOutcome, SimRng};
use crate::error::{Error, Result};
use crate::model::ArmId;

/// Epoch boundaries `T_i = floor(a^(b^i))`.
///
/// Epoch 0 covers steps `1..=T_0`, epoch `i > 0` covers `T_{i-1}+1..=T_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochSchedule {
    a: f64,
    b: f64,
}

impl EpochSchedule {
    /// Requires `a, b > 1` and `a^b - a > 1`. The latter makes the first
    /// increment exceed one step, and since `a^(b^x)` is convex in `x`, every
    /// later epoch is at least one step long.
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 1.0 && a.is_finite() && b > 1.0 && b.is_finite()) {
            return Err(Error::Config(format!(
                "epoch schedule needs a > 1 and b > 1, got a = {a}, b = {b}"
            )));
        }
        if a.powf(b) - a <= 1.0 {
            return Err(Error::Config(format!(
                "epoch schedule a = {a}, b = {b} yields empty epochs (need a^b - a > 1)"
            )));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// `T_i`, saturating at `u64::MAX`.
    pub fn end(&self, epoch: usize) -> u64 {
        let exponent = self.b.powi(epoch as i32);
        let v = self.a.powf(exponent).floor();
        if v >= u64::MAX as f64 {
            u64::MAX
        } else {
            v as u64
        }
    }

    /// `tau_i`: `T_0` for epoch 0, `T_i - T_{i-1}` afterwards.
    pub fn len(&self, epoch: usize) -> u64 {
        if epoch == 0 {
            self.end(0)
        } else {
            self.end(epoch) - self.end(epoch - 1)
        }
    }

    /// Confidence handed to the identification machine in epoch `i`: `1 / tau_{i+1}`.
    pub fn confidence(&self, epoch: usize) -> f64 {
        1.0 / self.len(epoch + 1) as f64
    }
}

impl Default for EpochSchedule {
    fn default() -> Self {
        Self { a: 10.0, b: 1.1 }
    }
}

#[derive(Debug, Clone, Copy)]
struct PendingPlay {
    left: ArmId,
    right: ArmId,
    exploring: bool,
}

/// DoublerBAI: epochs of exponentially growing length. Within an epoch the
/// left arm is fixed (last epoch's identified best, or a random arm) and the
/// right arm is chosen by a best-arm-identification machine estimating each
/// arm's probability of beating the left arm. Once the machine stops, the
/// right arm is its answer for the rest of the epoch.
#[derive(Debug, Clone)]
pub struct DoublerBai<B = Lucb> {
    schedule: EpochSchedule,
    machine: B,
    epoch: Option<usize>,
    epoch_end: u64,
    played: u64,
    step_in_epoch: u64,
    left: ArmId,
    identified: Option<ArmId>,
    explore_len: Option<u64>,
    pending: Option<PendingPlay>,
}

impl<B: BestArmIdentifier> DoublerBai<B> {
    pub fn new(schedule: EpochSchedule, machine: B) -> Self {
        Self {
            schedule,
            machine,
            epoch: None,
            epoch_end: 0,
            played: 0,
            step_in_epoch: 0,
            left: ArmId(0),
            identified: None,
            explore_len: None,
            pending: None,
        }
    }

    pub fn schedule(&self) -> &EpochSchedule {
        &self.schedule
    }

    pub fn machine(&self) -> &B {
        &self.machine
    }

    /// Current epoch, `None` before the first step.
    pub fn epoch(&self) -> Option<usize> {
        self.epoch
    }

    pub fn left(&self) -> ArmId {
        self.left
    }

    /// Arm identified in the current epoch, if the machine has stopped.
    pub fn identified(&self) -> Option<ArmId> {
        self.identified
    }

    /// Step within the current epoch at which identification finished.
    pub fn explore_len(&self) -> Option<u64> {
        self.explore_len
    }

    fn start_epoch(&mut self, rng: &mut SimRng) -> Result<()> {
        let next = self.epoch.map_or(0, |e| e + 1);
        self.left = match self.identified.take() {
            Some(best) => best,
            None => ArmId(rng.random_range(0..self.machine.num_arms())),
        };
        self.machine.reset(self.schedule.confidence(next))?;
        self.epoch = Some(next);
        self.epoch_end = self.schedule.end(next);
        self.step_in_epoch = 0;
        self.explore_len = None;
        Ok(())
    }
}

impl<B: BestArmIdentifier> Policy for DoublerBai<B> {
    fn name(&self) -> &'static str {
        "doubler_bai"
    }

    fn capacity(&self) -> usize {
        2
    }

    fn select(&mut self, _t: u64, rng: &mut SimRng) -> Result<ComparisonSet> {
        if self.pending.is_some() {
            return Err(Error::Contract(
                "select called twice without observe".into(),
            ));
        }
        self.played += 1;
        while self.epoch.is_none() || self.played > self.epoch_end {
            self.start_epoch(rng)?;
        }
        self.step_in_epoch += 1;
        let (right, exploring) = match self.identified {
            Some(best) => (best, false),
            None => (self.machine.advance()?, true),
        };
        self.pending = Some(PendingPlay {
            left: self.left,
            right,
            exploring,
        });
        Ok(ComparisonSet::pair(self.left, right))
    }

    fn observe(&mut self, outcomes: &[DuelOutcome]) -> Result<()> {
        let play = self
            .pending
            .take()
            .ok_or_else(|| Error::Contract("observe without select".into()))?;
        if !play.exploring {
            return Ok(());
        }
        let outcome = outcomes
            .iter()
            .find(|o| {
                (o.i == play.left && o.j == play.right) || (o.i == play.right && o.j == play.left)
            })
            .ok_or_else(|| Error::Contract("no outcome for the played duel".into()))?;
        // reward is 1 when the right arm beats the fixed left arm
        self.machine.feedback(outcome.won_by(play.right))?;
        if self.machine.stop_test() {
            self.identified = Some(self.machine.return_best()?);
            self.explore_len = Some(self.step_in_epoch);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{seeded_rng, Environment};
    use crate::model::PreferenceMatrix;

    #[test]
    fn schedule_example() {
        let s = EpochSchedule::new(10.0, 1.1).unwrap();
        assert_eq!(s.end(0), 10);
        assert_eq!(s.end(1), 12);
        assert_eq!(s.len(0), 10);
        assert_eq!(s.len(1), 2);
        assert_eq!(s.confidence(0), 0.5);
    }

    #[test]
    fn schedule_rejects_degenerate() {
        assert!(EpochSchedule::new(1.0, 2.0).is_err());
        assert!(EpochSchedule::new(10.0, 1.0).is_err());
        assert!(EpochSchedule::new(2.0, 1.01).is_err());
    }

    #[test]
    fn schedule_strictly_increasing_to_ten_million() {
        let s = EpochSchedule::default();
        let mut i = 0;
        while s.end(i) <= 10_000_000 {
            assert!(s.end(i + 1) > s.end(i));
            let d = s.confidence(i);
            assert!(d > 0.0 && d <= 1.0);
            i += 1;
        }
        assert!(i > 20);
    }

    fn two_arm_certain() -> PreferenceMatrix {
        PreferenceMatrix::new(vec![vec![0.5, 1.0], vec![0.0, 0.5]], None).unwrap()
    }

    #[test]
    fn exploit_outcomes_leave_machine_untouched() {
        let pm = two_arm_certain();
        let mut env = Environment::new(pm, 2, 4).unwrap();
        let mut p = DoublerBai::new(
            EpochSchedule::new(10.0, 1.5).unwrap(),
            Lucb::new(2, 0.5).unwrap(),
        );
        let mut exploited = false;
        for t in 1..=2000 {
            let set = p.select(t, env.rng_mut()).unwrap();
            let before = p.machine().total_pulls();
            let exploring = p.identified().is_none();
            let out = env.step(&set).unwrap();
            p.observe(&out).unwrap();
            if !exploring {
                exploited = true;
                assert_eq!(p.machine().total_pulls(), before);
            }
        }
        assert!(exploited);
    }

    #[test]
    fn reward_orientation_is_right_beats_left() {
        // arm 0 always beats arm 1; with left = arm 1 the machine sees reward 1
        // for arm 0 and a fair coin for the self-duel of arm 1
        let pm = two_arm_certain();
        for seed in 0..64 {
            let mut env = Environment::new(pm.clone(), 2, seed).unwrap();
            let mut p = DoublerBai::new(
                EpochSchedule::new(1000.0, 1.1).unwrap(),
                Lucb::new(2, 0.5).unwrap(),
            );
            let set = p.select(1, env.rng_mut()).unwrap();
            if p.left() != ArmId(1) {
                continue;
            }
            let out = env.step(&set).unwrap();
            p.observe(&out).unwrap();
            for t in 2..=40 {
                let set = p.select(t, env.rng_mut()).unwrap();
                let out = env.step(&set).unwrap();
                p.observe(&out).unwrap();
            }
            let m = p.machine();
            assert_eq!(m.mean(ArmId(0)), Some(1.0));
            assert!(m.mean(ArmId(1)).unwrap() < 1.0);
            return;
        }
        panic!("no seed produced left = arm 2");
    }

    #[test]
    fn first_epoch_left_is_random() {
        let pm = PreferenceMatrix::synthetic(6, crate::model::LinkFunction::Linear).unwrap();
        let mut seen = std::collections::BTreeSet::new();
        for seed in 0..40 {
            let mut rng = seeded_rng(seed);
            let mut p = DoublerBai::new(EpochSchedule::default(), Lucb::new(pm.k(), 0.5).unwrap());
            p.select(1, &mut rng).unwrap();
            seen.insert(p.left());
        }
        assert!(seen.len() > 3);
    }

    #[test]
    fn identification_latches_for_rest_of_epoch() {
        let pm = two_arm_certain();
        let mut env = Environment::new(pm, 2, 9).unwrap();
        let mut p = DoublerBai::new(
            EpochSchedule::new(10.0, 1.5).unwrap(),
            Lucb::new(2, 0.5).unwrap(),
        );
        for t in 1..=3000 {
            let set = p.select(t, env.rng_mut()).unwrap();
            if let (Some(best), Some(j)) = (p.identified(), p.explore_len()) {
                assert_eq!(set.declared_pair(), Some((p.left(), best)));
                assert!(j >= 1);
            }
            let out = env.step(&set).unwrap();
            p.observe(&out).unwrap();
        }
        assert_eq!(p.left(), ArmId(0));
    }

    #[test]
    fn observe_requires_select() {
        let mut p = DoublerBai::new(EpochSchedule::default(), Lucb::new(3, 0.5).unwrap());
        assert!(p.observe(&[]).is_err());
    }
}
