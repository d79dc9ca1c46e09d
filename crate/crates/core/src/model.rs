//! Ground-truth instance description.
//!
//! Each arm has an expected latent utility in `[0, 1]`. A [`LinkFunction`]
//! turns a pair of utilities into the probability that the first arm wins a
//! duel, and the resulting [`PreferenceMatrix`] is the environment's ground
//! truth. [`GapTable`] holds `p_ij - 1/2` for every ordered pair.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for validating `p_ij + p_ji = 1` on matrices.
pub const MATRIX_TOLERANCE: f64 = 1e-9;

/// Slack used when checking analytic identities such as Property 1 under the
/// linear link, where both sides agree up to rounding.
pub const IDENTITY_TOLERANCE: f64 = 1e-12;

/// Zero-based arm index. Rendered one-based in every user-facing string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ArmId(pub usize);

impl ArmId {
    pub fn index(self) -> usize {
        self.0
    }

    /// Build from a one-based label as written in files and on the command line.
    pub fn from_one_based(label: usize) -> Result<Self> {
        if label == 0 {
            return Err(Error::Argument("arm labels are 1-indexed".into()));
        }
        Ok(ArmId(label - 1))
    }

    pub fn one_based(self) -> usize {
        self.0 + 1
    }
}

impl fmt::Display for ArmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "arm {}", self.one_based())
    }
}

/// Expected latent utilities, one per arm. Entry 0 is the unique maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityVector {
    mu: Vec<f64>,
}

impl UtilityVector {
    pub fn new(mu: Vec<f64>) -> Result<Self> {
        if mu.len() < 2 {
            return Err(Error::Argument(format!(
                "need at least 2 arms, got {}",
                mu.len()
            )));
        }
        if let Some((i, &u)) = mu
            .iter()
            .enumerate()
            .find(|(_, u)| !(0.0..=1.0).contains(*u))
        {
            return Err(Error::Domain(format!(
                "utility of {} is {u}, outside [0, 1]",
                ArmId(i)
            )));
        }
        if let Some((i, _)) = mu.iter().enumerate().skip(1).find(|(_, &u)| u >= mu[0]) {
            return Err(Error::Argument(format!(
                "utility of arm 1 must be strictly maximal, but {} has {} >= {}",
                ArmId(i),
                mu[i],
                mu[0]
            )));
        }
        Ok(Self { mu })
    }

    /// The synthetic instance: `mu[0] = 0.8`, then a geometric sequence from
    /// 0.7 down to exactly 0.2 over the remaining `k - 1` arms.
    pub fn synthetic(k: usize) -> Result<Self> {
        if k < 3 {
            return Err(Error::Argument(format!(
                "synthetic instance needs K >= 3, got {k}"
            )));
        }
        let ratio = (0.2f64 / 0.7).powf(1.0 / (k - 2) as f64);
        let mut mu = Vec::with_capacity(k);
        mu.push(0.8);
        mu.extend((1..k).map(|i| 0.7 * ratio.powi(i as i32 - 1)));
        // pin the endpoint against powf rounding
        mu[k - 1] = 0.2;
        Self::new(mu)
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.mu
    }
}

/// Maps two utilities to the probability that the first one wins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkFunction {
    /// `(u - v + 1) / 2`
    Linear,
    /// `u / (u + v)`, with `1/2` at `u = v = 0`
    Natural,
    /// `1 / (1 + exp(v - u))`
    Logit,
}

impl LinkFunction {
    pub const ALL: [LinkFunction; 3] = [
        LinkFunction::Linear,
        LinkFunction::Natural,
        LinkFunction::Logit,
    ];

    pub fn eval(self, u: f64, v: f64) -> Result<f64> {
        for x in [u, v] {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::Domain(format!(
                    "link arguments must lie in [0, 1], got {x}"
                )));
            }
        }
        Ok(self.eval_unchecked(u, v))
    }

    fn eval_unchecked(self, u: f64, v: f64) -> f64 {
        match self {
            LinkFunction::Linear => (u - v + 1.0) / 2.0,
            LinkFunction::Natural => {
                if u == 0.0 && v == 0.0 {
                    0.5
                } else {
                    u / (u + v)
                }
            }
            LinkFunction::Logit => 1.0 / (1.0 + (v - u).exp()),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LinkFunction::Linear => "linear",
            LinkFunction::Natural => "natural",
            LinkFunction::Logit => "logit",
        }
    }
}

impl fmt::Display for LinkFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LinkFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linear" => Ok(LinkFunction::Linear),
            "natural" => Ok(LinkFunction::Natural),
            "logit" => Ok(LinkFunction::Logit),
            other => Err(Error::Argument(format!(
                "unknown link function {other:?} (expected linear, natural or logit)"
            ))),
        }
    }
}

/// `K x K` win probabilities with a designated best arm.
///
/// Invariants: `p[i][j] + p[j][i] = 1` within [`MATRIX_TOLERANCE`],
/// `p[i][i] = 1/2` exactly, and `p[best][j] >= 1/2` for every `j`
/// (strictly greater whenever the matrix has a Condorcet winner; see
/// [`PreferenceMatrix::new`]).
#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceMatrix {
    k: usize,
    p: Vec<f64>,
    best: ArmId,
}

impl PreferenceMatrix {
    /// Validate a square grid and identify its best arm.
    ///
    /// The best arm is the unique Condorcet winner when there is one.
    /// Otherwise `declared_best` is used, provided it loses to nobody
    /// (`p[best][j] >= 1/2`), so that regret increments stay non-negative.
    pub fn new(rows: Vec<Vec<f64>>, declared_best: Option<ArmId>) -> Result<Self> {
        let k = rows.len();
        if k < 2 {
            return Err(Error::Validation(format!(
                "matrix must have at least 2 rows, got {k}"
            )));
        }
        if let Some((r, row)) = rows.iter().enumerate().find(|(_, row)| row.len() != k) {
            return Err(Error::Validation(format!(
                "matrix is not square: row {} has {} entries, expected {k}",
                r + 1,
                row.len()
            )));
        }
        for (r, row) in rows.iter().enumerate() {
            for (c, &x) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&x) {
                    return Err(Error::Validation(format!(
                        "entry ({}, {}) = {x} is not a probability",
                        r + 1,
                        c + 1
                    )));
                }
            }
        }
        for i in 0..k {
            if (rows[i][i] - 0.5).abs() > MATRIX_TOLERANCE {
                return Err(Error::Validation(format!(
                    "diagonal entry ({}, {}) = {} must be 0.5",
                    i + 1,
                    i + 1,
                    rows[i][i]
                )));
            }
            for j in i + 1..k {
                if (rows[i][j] + rows[j][i] - 1.0).abs() > MATRIX_TOLERANCE {
                    return Err(Error::Validation(format!(
                        "asymmetry at cell ({}, {}): p = {} but p({}, {}) = {}, sum {} != 1",
                        i + 1,
                        j + 1,
                        rows[i][j],
                        j + 1,
                        i + 1,
                        rows[j][i],
                        rows[i][j] + rows[j][i]
                    )));
                }
            }
        }

        let mut p: Vec<f64> = rows.into_iter().flatten().collect();
        for i in 0..k {
            p[i * k + i] = 0.5;
        }

        let beats_all = |i: usize| (0..k).all(|j| j == i || p[i * k + j] > 0.5);
        let best = match ((0..k).find(|&i| beats_all(i)), declared_best) {
            (Some(i), Some(d)) if d.0 != i => {
                return Err(Error::Validation(format!(
                    "declared best {d} disagrees with the Condorcet winner {}",
                    ArmId(i)
                )))
            }
            (Some(i), _) => ArmId(i),
            (None, Some(d)) => {
                if d.0 >= k {
                    return Err(Error::Validation(format!(
                        "declared best {d} out of range for K = {k}"
                    )));
                }
                if let Some(j) = (0..k).find(|&j| p[d.0 * k + j] < 0.5) {
                    return Err(Error::Validation(format!(
                        "declared best {d} loses to {} (p = {})",
                        ArmId(j),
                        p[d.0 * k + j]
                    )));
                }
                d
            }
            (None, None) => {
                let losses: Vec<String> = (0..k)
                    .map(|i| {
                        let lost: Vec<String> = (0..k)
                            .filter(|&j| j != i && p[i * k + j] <= 0.5)
                            .map(|j| (j + 1).to_string())
                            .collect();
                        format!("row {}: does not beat [{}]", i + 1, lost.join(", "))
                    })
                    .collect();
                return Err(Error::Validation(format!(
                    "no Condorcet winner and no declared best arm; {}",
                    losses.join("; ")
                )));
            }
        };

        Ok(Self { k, p, best })
    }

    /// `p[i][j] = link(mu[i], mu[j])`; arm 0 is best.
    pub fn from_utilities(mu: &UtilityVector, link: LinkFunction) -> Result<Self> {
        let u = mu.as_slice();
        let k = u.len();
        let mut p = vec![0.5; k * k];
        for i in 0..k {
            for j in 0..k {
                if i != j {
                    p[i * k + j] = link.eval(u[i], u[j])?;
                }
            }
        }
        if let Some(j) = (1..k).find(|&j| p[j] <= 0.5) {
            return Err(Error::Validation(format!(
                "arm 1 does not beat {} under the {link} link (p = {})",
                ArmId(j),
                p[j]
            )));
        }
        Ok(Self {
            k,
            p,
            best: ArmId(0),
        })
    }

    /// Synthetic instance with `k` arms under `link`.
    pub fn synthetic(k: usize, link: LinkFunction) -> Result<Self> {
        Self::from_utilities(&UtilityVector::synthetic(k)?, link)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn best_arm(&self) -> ArmId {
        self.best
    }

    #[inline]
    pub fn p(&self, i: ArmId, j: ArmId) -> f64 {
        self.p[i.0 * self.k + j.0]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.p.chunks(self.k)
    }

    pub fn gaps(&self) -> GapTable {
        GapTable::new(self)
    }
}

/// `delta[i][j] = p[i][j] - 1/2` plus the largest gap of the best arm.
#[derive(Debug, Clone, PartialEq)]
pub struct GapTable {
    k: usize,
    best: ArmId,
    delta: Vec<f64>,
    delta_max: f64,
}

impl GapTable {
    pub fn new(pm: &PreferenceMatrix) -> Self {
        let k = pm.k;
        let delta: Vec<f64> = pm.p.iter().map(|p| p - 0.5).collect();
        let b = pm.best.0;
        let delta_max = (0..k)
            .filter(|&j| j != b)
            .map(|j| delta[b * k + j])
            .fold(f64::NEG_INFINITY, f64::max);
        Self {
            k,
            best: pm.best,
            delta,
            delta_max,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn best_arm(&self) -> ArmId {
        self.best
    }

    #[inline]
    pub fn gap(&self, i: ArmId, j: ArmId) -> f64 {
        self.delta[i.0 * self.k + j.0]
    }

    /// The best arm's advantage over `i`.
    #[inline]
    pub fn best_gap(&self, i: ArmId) -> f64 {
        self.gap(self.best, i)
    }

    pub fn delta_max(&self) -> f64 {
        self.delta_max
    }

    /// Suboptimal arms in index order.
    pub fn suboptimal_arms(&self) -> impl Iterator<Item = ArmId> + '_ {
        (0..self.k).map(ArmId).filter(move |&a| a != self.best)
    }
}

/// Outcome of checking `Δ(best, i) <= γ (Δ(best, j) - Δ(i, j))` over all pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Property1Report {
    pub holds: bool,
    /// The pair with the largest violation, and the amount by which the
    /// left side exceeds the right. `None` when the property holds.
    pub worst: Option<(ArmId, ArmId, f64)>,
}

pub fn check_property1(pm: &PreferenceMatrix, gamma: f64) -> Result<Property1Report> {
    if !(gamma > 0.0) {
        return Err(Error::Argument(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    let gaps = pm.gaps();
    let k = pm.k;
    let mut worst: Option<(ArmId, ArmId, f64)> = None;
    for i in (0..k).map(ArmId) {
        for j in (0..k).map(ArmId) {
            let lhs = gaps.best_gap(i);
            let rhs = gamma * (gaps.best_gap(j) - gaps.gap(i, j));
            let excess = lhs - rhs;
            if excess > IDENTITY_TOLERANCE && worst.is_none_or(|(_, _, w)| excess > w) {
                worst = Some((i, j, excess));
            }
        }
    }
    Ok(Property1Report {
        holds: worst.is_none(),
        worst,
    })
}

/// Smallest `γ` for which Property 1 holds, or `None` if no positive `γ` works
/// (some pair has a positive left side but a non-positive bracket).
pub fn min_property1_gamma(pm: &PreferenceMatrix) -> Option<f64> {
    let gaps = pm.gaps();
    let k = pm.k;
    let mut gamma = 0.0f64;
    for i in (0..k).map(ArmId) {
        let lhs = gaps.best_gap(i);
        if lhs <= 0.0 {
            continue;
        }
        for j in (0..k).map(ArmId) {
            let bracket = gaps.best_gap(j) - gaps.gap(i, j);
            if bracket <= 0.0 {
                return None;
            }
            gamma = gamma.max(lhs / bracket);
        }
    }
    Some(gamma)
}
