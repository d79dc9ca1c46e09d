use rand::seq::index;

use super::Policy;
use crate::environment::{ComparisonSet, DuelOutcome, SimRng};
use crate::error::{Error, Result};
use crate::model::ArmId;

/// `amount` distinct elements of `pool`, uniformly without replacement.
pub fn sample_distinct(rng: &mut SimRng, pool: &[ArmId], amount: usize) -> Vec<ArmId> {
    debug_assert!(amount <= pool.len());
    index::sample(rng, pool.len(), amount)
        .into_iter()
        .map(|i| pool[i])
        .collect()
}

/// Plays `m` uniformly random distinct arms every step. Linear-regret control.
#[derive(Debug, Clone)]
pub struct UniformRandom {
    arms: Vec<ArmId>,
    m: usize,
}

impl UniformRandom {
    pub fn new(k: usize, m: usize) -> Result<Self> {
        if m < 2 || m > k {
            return Err(Error::Config(format!(
                "need 2 <= m <= K, got m = {m}, K = {k}"
            )));
        }
        Ok(Self {
            arms: (0..k).map(ArmId).collect(),
            m,
        })
    }
}

impl Policy for UniformRandom {
    fn name(&self) -> &'static str {
        "uniform_random"
    }

    fn capacity(&self) -> usize {
        self.m
    }

    fn select(&mut self, _t: u64, rng: &mut SimRng) -> Result<ComparisonSet> {
        Ok(ComparisonSet::from_arms(sample_distinct(
            rng, &self.arms, self.m,
        )))
    }

    fn observe(&mut self, _outcomes: &[DuelOutcome]) -> Result<()> {
        Ok(())
    }
}
