//! Seeded duel simulator.
//!
//! [`Environment::step`] draws every pairwise outcome inside the chosen
//! comparison set and adds the set's average gap to the best arm to the
//! cumulative regret. The policy draws its own randomness from the same
//! per-run stream (see [`Environment::rng_mut`]), so a single seed fixes a run.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{ArmId, GapTable, PreferenceMatrix};

/// Per-run random stream shared by the environment and the policy.
pub type SimRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// The arms compared at one step.
///
/// `arms` is de-duplicated. Two-dueling policies declare an ordered pair; a
/// pair `(a, a)` collapses to the singleton `{a}` for regret purposes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComparisonSet {
    arms: Vec<ArmId>,
    declared_pair: Option<(ArmId, ArmId)>,
}

impl ComparisonSet {
    /// A set of arms, de-duplicated and sorted.
    pub fn from_arms(arms: impl IntoIterator<Item = ArmId>) -> Self {
        let mut arms: Vec<ArmId> = arms.into_iter().collect();
        arms.sort_unstable();
        arms.dedup();
        Self {
            arms,
            declared_pair: None,
        }
    }

    /// An ordered `(left, right)` duel.
    pub fn pair(left: ArmId, right: ArmId) -> Self {
        let arms = if left == right {
            vec![left]
        } else {
            vec![left, right]
        };
        Self {
            arms,
            declared_pair: Some((left, right)),
        }
    }

    pub fn arms(&self) -> &[ArmId] {
        &self.arms
    }

    pub fn len(&self) -> usize {
        self.arms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arms.is_empty()
    }

    pub fn declared_pair(&self) -> Option<(ArmId, ArmId)> {
        self.declared_pair
    }

    pub fn contains(&self, arm: ArmId) -> bool {
        self.arms.contains(&arm)
    }
}

/// One realised duel. `i == j` only for the self-duel of a declared `(a, a)`
/// pair, whose result is a fair coin and carries no information.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DuelOutcome {
    pub i: ArmId,
    pub j: ArmId,
    pub i_wins: bool,
}

impl DuelOutcome {
    pub fn winner(&self) -> ArmId {
        if self.i_wins {
            self.i
        } else {
            self.j
        }
    }

    pub fn loser(&self) -> ArmId {
        if self.i_wins {
            self.j
        } else {
            self.i
        }
    }

    pub fn is_self_duel(&self) -> bool {
        self.i == self.j
    }

    /// Whether `arm` won this duel, read from `arm`'s side. For a self-duel
    /// `arm` is taken to be the `j` side.
    pub fn won_by(&self, arm: ArmId) -> bool {
        if self.is_self_duel() || arm == self.j {
            !self.i_wins
        } else {
            self.i_wins
        }
    }
}

/// Ground truth plus the mutable simulation state of one run.
#[derive(Debug, Clone)]
pub struct Environment {
    matrix: PreferenceMatrix,
    gaps: GapTable,
    capacity: usize,
    rng: SimRng,
    seed: u64,
    cumulative_regret: f64,
    t: u64,
}

impl Environment {
    /// `capacity` is the largest comparison set `m` a step may use.
    pub fn new(matrix: PreferenceMatrix, capacity: usize, seed: u64) -> Result<Self> {
        if capacity < 1 || capacity > matrix.k() {
            return Err(Error::Config(format!(
                "comparison capacity m = {capacity} must lie in [1, K = {}]",
                matrix.k()
            )));
        }
        let gaps = matrix.gaps();
        Ok(Self {
            matrix,
            gaps,
            capacity,
            rng: seeded_rng(seed),
            seed,
            cumulative_regret: 0.0,
            t: 0,
        })
    }

    /// Restart the run with a fresh stream: zero regret, zero elapsed steps.
    pub fn reseed(&mut self, seed: u64) {
        self.rng = seeded_rng(seed);
        self.seed = seed;
        self.cumulative_regret = 0.0;
        self.t = 0;
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn matrix(&self) -> &PreferenceMatrix {
        &self.matrix
    }

    pub fn gaps(&self) -> &GapTable {
        &self.gaps
    }

    pub fn k(&self) -> usize {
        self.matrix.k()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn cumulative_regret(&self) -> f64 {
        self.cumulative_regret
    }

    /// Steps played so far.
    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn rng_mut(&mut self) -> &mut SimRng {
        &mut self.rng
    }

    /// Expected regret of playing `set` once: the mean of the best arm's gap
    /// over the de-duplicated arms.
    pub fn regret_of(&self, set: &ComparisonSet) -> f64 {
        let sum: f64 = set.arms().iter().map(|&a| self.gaps.best_gap(a)).sum();
        sum / set.len() as f64
    }

    pub fn step(&mut self, set: &ComparisonSet) -> Result<Vec<DuelOutcome>> {
        if set.is_empty() {
            return Err(Error::Contract("empty comparison set".into()));
        }
        if set.len() > self.capacity {
            return Err(Error::Contract(format!(
                "comparison set of size {} exceeds capacity m = {}",
                set.len(),
                self.capacity
            )));
        }
        if let Some(&bad) = set.arms().iter().find(|a| a.0 >= self.k()) {
            return Err(Error::Contract(format!(
                "{bad} out of range for K = {}",
                self.k()
            )));
        }

        let outcomes = match set.declared_pair() {
            Some((a, b)) if a == b => vec![DuelOutcome {
                i: a,
                j: a,
                i_wins: self.rng.random_bool(0.5),
            }],
            Some((a, b)) => vec![self.duel(a, b)],
            None => {
                let arms = set.arms();
                let mut out = Vec::with_capacity(arms.len() * (arms.len() - 1) / 2);
                for (x, &a) in arms.iter().enumerate() {
                    for &b in &arms[x + 1..] {
                        out.push(self.duel(a, b));
                    }
                }
                out
            }
        };

        self.cumulative_regret += self.regret_of(set);
        self.t += 1;
        Ok(outcomes)
    }

    fn duel(&mut self, i: ArmId, j: ArmId) -> DuelOutcome {
        let p = self.matrix.p(i, j);
        DuelOutcome {
            i,
            j,
            i_wins: self.rng.random::<f64>() < p,
        }
    }
}

/// Parse a preference-matrix grid: one row per line, entries separated by
/// commas and/or whitespace, blank lines and `#` comments ignored.
pub fn parse_matrix(text: &str, declared_best: Option<ArmId>) -> Result<PreferenceMatrix> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>().map_err(|_| {
                    Error::Validation(format!("line {}: {s:?} is not a number", lineno + 1))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    PreferenceMatrix::new(rows, declared_best)
}

pub fn load_matrix(
    path: impl AsRef<Path>,
    declared_best: Option<ArmId>,
) -> Result<PreferenceMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix(&text, declared_best)
}
