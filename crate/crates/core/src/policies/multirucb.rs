use rand::Rng;

use super::uniform::sample_distinct;
use super::Policy;
use crate::environment::{ComparisonSet, DuelOutcome, SimRng};
use crate::error::{Error, Result};
use crate::model::ArmId;

/// Optimistic estimate of `p_ij` from win counts:
/// `w_ij / n + sqrt(alpha ln t / n)` with `n = w_ij + w_ji`.
///
/// With `n = 0` the ratio is taken as 1 and `1/n` as 1, giving
/// `1 + sqrt(alpha ln t)`.
#[inline]
fn optimistic(w_ij: u64, w_ji: u64, alpha_ln_t: f64) -> f64 {
    let n = w_ij + w_ji;
    if n == 0 {
        1.0 + alpha_ln_t.sqrt()
    } else {
        let n = n as f64;
        w_ij as f64 / n + (alpha_ln_t / n).sqrt()
    }
}

/// The full `K x K` optimistic matrix `U` (row-major), `u_ii = 1/2`.
pub fn optimistic_matrix(w: &[u64], k: usize, t: u64, alpha: f64) -> Vec<f64> {
    let alpha_ln_t = alpha * (t as f64).ln();
    let mut u = vec![0.5; k * k];
    for i in 0..k {
        for j in 0..k {
            if i != j {
                u[i * k + j] = optimistic(w[i * k + j], w[j * k + i], alpha_ln_t);
            }
        }
    }
    u
}

/// Arms whose optimistic estimate is at least 1/2 against every opponent.
pub fn candidate_set(w: &[u64], k: usize, t: u64, alpha: f64) -> Vec<ArmId> {
    let alpha_ln_t = alpha * (t as f64).ln();
    (0..k)
        .filter(|&c| {
            (0..k).all(|j| j == c || optimistic(w[c * k + j], w[j * k + c], alpha_ln_t) >= 0.5)
        })
        .map(ArmId)
        .collect()
}

/// Which selection branch produced a comparison set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RucbCase {
    /// No candidates: `m` random arms from all of them.
    NoCandidates,
    /// A single candidate, which becomes the hypothesis and is played alone.
    SingleCandidate,
    /// Between 2 and `m` candidates: all of them.
    AllCandidates,
    /// More than `m` candidates and no hypothesis: `m` random candidates.
    RandomCandidates,
    /// More than `m` candidates: the hypothesis plus `m - 1` random others.
    WithHypothesis,
    /// More than `m` candidates: `m` random candidates other than the hypothesis.
    WithoutHypothesis,
}

impl RucbCase {
    pub const ALL: [RucbCase; 6] = [
        RucbCase::NoCandidates,
        RucbCase::SingleCandidate,
        RucbCase::AllCandidates,
        RucbCase::RandomCandidates,
        RucbCase::WithHypothesis,
        RucbCase::WithoutHypothesis,
    ];

    fn slot(self) -> usize {
        self as usize
    }
}

/// Relative-UCB selection over comparison sets of up to `m` arms.
#[derive(Debug, Clone)]
pub struct MultiRucb {
    k: usize,
    m: usize,
    alpha: f64,
    /// `wins[i * k + j]`: times arm `i` was observed beating arm `j`.
    wins: Vec<u64>,
    hypothesis: Option<ArmId>,
    last_case: Option<RucbCase>,
    case_counts: [u64; 6],
}

impl MultiRucb {
    pub fn new(k: usize, m: usize, alpha: f64) -> Result<Self> {
        if m < 2 || m > k {
            return Err(Error::Config(format!(
                "comparison size m = {m} must satisfy 2 <= m <= K = {k}"
            )));
        }
        if !(alpha > 0.5) || !alpha.is_finite() {
            return Err(Error::Config(format!(
                "MultiRUCB needs alpha > 1/2, got {alpha}"
            )));
        }
        Ok(Self {
            k,
            m,
            alpha,
            wins: vec![0; k * k],
            hypothesis: None,
            last_case: None,
            case_counts: [0; 6],
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn wins(&self) -> &[u64] {
        &self.wins
    }

    pub fn win_count(&self, i: ArmId, j: ArmId) -> u64 {
        self.wins[i.0 * self.k + j.0]
    }

    pub fn hypothesis(&self) -> Option<ArmId> {
        self.hypothesis
    }

    pub fn last_case(&self) -> Option<RucbCase> {
        self.last_case
    }

    pub fn case_count(&self, case: RucbCase) -> u64 {
        self.case_counts[case.slot()]
    }

    fn record(&mut self, case: RucbCase) {
        self.last_case = Some(case);
        self.case_counts[case.slot()] += 1;
    }
}

impl Policy for MultiRucb {
    fn name(&self) -> &'static str {
        "multirucb"
    }

    fn capacity(&self) -> usize {
        self.m
    }

    fn select(&mut self, t: u64, rng: &mut SimRng) -> Result<ComparisonSet> {
        if t == 0 {
            return Err(Error::Contract("time steps start at 1".into()));
        }
        let candidates = candidate_set(&self.wins, self.k, t, self.alpha);

        if candidates.is_empty() {
            // the hypothesis is deliberately left alone here
            let all: Vec<ArmId> = (0..self.k).map(ArmId).collect();
            self.record(RucbCase::NoCandidates);
            return Ok(ComparisonSet::from_arms(sample_distinct(rng, &all, self.m)));
        }

        if self.hypothesis.is_some_and(|b| !candidates.contains(&b)) {
            self.hypothesis = None;
        }

        let (case, arms) = if candidates.len() == 1 {
            self.hypothesis = Some(candidates[0]);
            (RucbCase::SingleCandidate, candidates)
        } else if candidates.len() <= self.m {
            (RucbCase::AllCandidates, candidates)
        } else {
            // the coin is drawn even when there is no hypothesis, so the
            // random stream does not depend on whether B survived pruning
            let heads = rng.random_bool(0.5);
            match self.hypothesis {
                None => (
                    RucbCase::RandomCandidates,
                    sample_distinct(rng, &candidates, self.m),
                ),
                Some(b) => {
                    let others: Vec<ArmId> =
                        candidates.iter().copied().filter(|&c| c != b).collect();
                    if heads {
                        let mut arms = sample_distinct(rng, &others, self.m - 1);
                        arms.push(b);
                        (RucbCase::WithHypothesis, arms)
                    } else {
                        (
                            RucbCase::WithoutHypothesis,
                            sample_distinct(rng, &others, self.m),
                        )
                    }
                }
            }
        };
        self.record(case);
        Ok(ComparisonSet::from_arms(arms))
    }

    fn observe(&mut self, outcomes: &[DuelOutcome]) -> Result<()> {
        for o in outcomes.iter().filter(|o| !o.is_self_duel()) {
            if o.i.0 >= self.k || o.j.0 >= self.k {
                return Err(Error::Contract(format!("outcome {o:?} out of range")));
            }
            self.wins[o.winner().0 * self.k + o.loser().0] += 1;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{seeded_rng, Environment};
    use crate::model::{LinkFunction, PreferenceMatrix};
    use approx::assert_abs_diff_eq;

    #[test]
    fn first_step_everyone_is_a_candidate() {
        let w = vec![0; 16];
        let u = optimistic_matrix(&w, 4, 1, 1.01);
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == j { 0.5 } else { 1.0 };
                assert_eq!(u[i * 4 + j], expected);
            }
        }
        assert_eq!(candidate_set(&w, 4, 1, 1.01).len(), 4);

        let mut p = MultiRucb::new(6, 3, 1.01).unwrap();
        let mut rng = seeded_rng(1);
        let set = p.select(1, &mut rng).unwrap();
        assert_eq!(set.len(), 3);
        assert_eq!(p.last_case(), Some(RucbCase::RandomCandidates));
    }

    #[test]
    fn two_arm_example() {
        let w = vec![0, 3, 1, 0];
        let u = optimistic_matrix(&w, 2, 10, 1.0);
        assert_abs_diff_eq!(u[1], 1.508_713_564_692_573_3, epsilon = 1e-12);
        assert_abs_diff_eq!(u[2], 1.008_713_564_692_573_3, epsilon = 1e-12);
        assert_eq!(candidate_set(&w, 2, 10, 1.0), vec![ArmId(0), ArmId(1)]);
    }

    #[test]
    fn single_candidate_latches_hypothesis() {
        // arm 2 has beaten everyone many times; everyone else has lost to it
        let k = 3;
        let mut p = MultiRucb::new(k, 2, 1.01).unwrap();
        p.wins[2 * k] = 500;
        p.wins[2 * k + 1] = 500;
        p.wins[1] = 250;
        p.wins[k] = 250;
        let mut rng = seeded_rng(0);
        let set = p.select(100, &mut rng).unwrap();
        assert_eq!(set.arms(), &[ArmId(2)]);
        assert_eq!(p.hypothesis(), Some(ArmId(2)));
        assert_eq!(p.last_case(), Some(RucbCase::SingleCandidate));
    }

    #[test]
    fn observe_counts_winners() {
        let mut p = MultiRucb::new(3, 3, 1.01).unwrap();
        let o = |i: usize, j: usize, i_wins: bool| DuelOutcome {
            i: ArmId(i),
            j: ArmId(j),
            i_wins,
        };
        p.observe(&[o(0, 1, true), o(1, 2, true), o(0, 2, true)])
            .unwrap();
        assert_eq!(p.win_count(ArmId(0), ArmId(1)), 1);
        assert_eq!(p.win_count(ArmId(1), ArmId(2)), 1);
        assert_eq!(p.win_count(ArmId(0), ArmId(2)), 1);
        assert_eq!(p.wins().iter().sum::<u64>(), 3);
        p.observe(&[]).unwrap();
        assert_eq!(p.wins().iter().sum::<u64>(), 3);
    }

    #[test]
    fn rejects_bad_configuration() {
        assert!(MultiRucb::new(4, 1, 1.01).is_err());
        assert!(MultiRucb::new(4, 5, 1.01).is_err());
        assert!(MultiRucb::new(4, 2, 0.5).is_err());
    }

    #[test]
    fn win_conservation_over_a_run() {
        let pm = PreferenceMatrix::synthetic(6, LinkFunction::Linear).unwrap();
        let mut env = Environment::new(pm, 4, 3).unwrap();
        let mut p = MultiRucb::new(6, 4, 1.01).unwrap();
        let mut observed = 0u64;
        for t in 1..=3000 {
            let set = p.select(t, env.rng_mut()).unwrap();
            assert!(!set.is_empty() && set.len() <= 4);
            let out = env.step(&set).unwrap();
            observed += out.len() as u64;
            p.observe(&out).unwrap();
        }
        assert_eq!(p.wins().iter().sum::<u64>(), observed);
    }
}
