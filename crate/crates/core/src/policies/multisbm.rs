use super::Policy;
use crate::environment::{ComparisonSet, DuelOutcome, SimRng};
use crate::error::{Error, Result};
use crate::model::ArmId;
use crate::sbm::Sbm;

/// MultiSBM with optional additional feedback.
///
/// One [`Sbm`] per arm. At step `t` the left arm is last step's right arm,
/// and the left arm's machine picks the right arm. The machine is rewarded
/// when the right arm wins. With additional feedback enabled, the right arm's
/// machine also receives the left arm's result (`1 - b`), to be folded in at
/// its next advance, which is always the very next step.
#[derive(Debug, Clone)]
pub struct MultiSbmFeedback {
    machines: Vec<Sbm>,
    previous_right: ArmId,
    additional_feedback: bool,
    pending: Option<(ArmId, ArmId)>,
}

impl MultiSbmFeedback {
    pub fn new(k: usize, alpha: f64, additional_feedback: bool) -> Result<Self> {
        if k < 2 {
            return Err(Error::Argument(format!("need at least 2 arms, got {k}")));
        }
        let machines = (0..k)
            .map(|_| Sbm::new(k, alpha))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            machines,
            // the initial "previous right arm" is fixed to arm 0
            previous_right: ArmId(0),
            additional_feedback,
            pending: None,
        })
    }

    pub fn machine(&self, arm: ArmId) -> &Sbm {
        &self.machines[arm.0]
    }

    pub fn additional_feedback_enabled(&self) -> bool {
        self.additional_feedback
    }

    /// The `(x_t, y_t)` pair awaiting its outcome, if any.
    pub fn pending_pair(&self) -> Option<(ArmId, ArmId)> {
        self.pending
    }
}

impl Policy for MultiSbmFeedback {
    fn name(&self) -> &'static str {
        if self.additional_feedback {
            "multisbm_feedback"
        } else {
            "multisbm"
        }
    }

    fn capacity(&self) -> usize {
        2
    }

    fn select(&mut self, _t: u64, _rng: &mut SimRng) -> Result<ComparisonSet> {
        if self.pending.is_some() {
            return Err(Error::Contract(
                "select called twice without observe".into(),
            ));
        }
        let left = self.previous_right;
        let right = self.machines[left.0].advance();
        self.pending = Some((left, right));
        Ok(ComparisonSet::pair(left, right))
    }

    fn observe(&mut self, outcomes: &[DuelOutcome]) -> Result<()> {
        let (left, right) = self
            .pending
            .take()
            .ok_or_else(|| Error::Contract("observe without select".into()))?;
        let outcome = outcomes
            .iter()
            .find(|o| (o.i == left && o.j == right) || (o.i == right && o.j == left))
            .ok_or_else(|| Error::Contract("no outcome for the played duel".into()))?;
        let right_won = outcome.won_by(right);
        self.machines[left.0].feedback(right_won)?;
        if self.additional_feedback && left != right {
            self.machines[right.0].additional_feedback(left, !right_won)?;
        }
        self.previous_right = right;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::Environment;
    use crate::model::{LinkFunction, PreferenceMatrix};

    #[test]
    fn first_left_arm_is_zero() {
        let mut p = MultiSbmFeedback::new(4, 3.0, true).unwrap();
        let mut rng = crate::environment::seeded_rng(0);
        let set = p.select(1, &mut rng).unwrap();
        // fresh machine picks arm 0 as well: a self-duel
        assert_eq!(set.declared_pair(), Some((ArmId(0), ArmId(0))));
    }

    #[test]
    fn self_duel_sends_no_additional_feedback() {
        let pm = PreferenceMatrix::synthetic(4, LinkFunction::Linear).unwrap();
        let mut env = Environment::new(pm, 2, 1).unwrap();
        let mut p = MultiSbmFeedback::new(4, 3.0, true).unwrap();
        let set = p.select(1, env.rng_mut()).unwrap();
        let out = env.step(&set).unwrap();
        p.observe(&out).unwrap();
        for k in 0..4 {
            assert!(!p.machine(ArmId(k)).has_pending_feedback());
        }
        assert_eq!(p.machine(ArmId(0)).pulls(ArmId(0)), 1);
    }

    #[test]
    fn flag_off_never_counts_additional_feedback() {
        let pm = PreferenceMatrix::synthetic(6, LinkFunction::Logit).unwrap();
        let mut env = Environment::new(pm, 2, 17).unwrap();
        let mut p = MultiSbmFeedback::new(6, 3.0, false).unwrap();
        for t in 1..=5000 {
            let set = p.select(t, env.rng_mut()).unwrap();
            let out = env.step(&set).unwrap();
            p.observe(&out).unwrap();
        }
        for x in 0..6 {
            for k in 0..6 {
                assert_eq!(p.machine(ArmId(x)).additional(ArmId(k)), 0);
            }
        }
    }

    #[test]
    fn next_left_is_previous_right() {
        let pm = PreferenceMatrix::synthetic(5, LinkFunction::Natural).unwrap();
        let mut env = Environment::new(pm, 2, 2).unwrap();
        let mut p = MultiSbmFeedback::new(5, 3.0, true).unwrap();
        let mut prev_right = ArmId(0);
        for t in 1..=300 {
            let set = p.select(t, env.rng_mut()).unwrap();
            let (l, r) = set.declared_pair().unwrap();
            assert_eq!(l, prev_right);
            prev_right = r;
            let out = env.step(&set).unwrap();
            p.observe(&out).unwrap();
        }
    }
}
