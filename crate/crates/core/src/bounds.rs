//! Closed-form quantities from the regret analyses.
//!
//! Only explicit terms are computed. Asymptotic tails whose constants are
//! unspecified (the `O(ln ln T)` parts) are left out on purpose, so these
//! numbers are diagnostics, not complete bounds, for DoublerBAI and
//! MultiSBM-Feedback. The MultiRUCB bound is complete.

use crate::error::{Error, Result};
use crate::model::{ArmId, GapTable};

/// Instance quantities shared by the bound formulas.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceComplexity {
    /// `sum_{i != best} 1 / Δ_i^2`
    pub h: f64,
    /// `sum_{i} 4α/Δ_i^2 + sum_{i<j, both suboptimal} 4α / (C_m^2 Δ_ij^2)`
    pub d: f64,
    /// `m (m - 1) / 2`
    pub c_m2: u64,
    /// `Δ_i` for every suboptimal arm, in index order.
    pub best_gaps: Vec<f64>,
    /// `(i, j, Δ_ij)` for every unordered suboptimal pair `i < j`.
    pub pair_gaps: Vec<(ArmId, ArmId, f64)>,
}

impl InstanceComplexity {
    pub fn new(gaps: &GapTable, alpha: f64, m: usize) -> Result<Self> {
        Ok(Self {
            h: complexity_h(gaps)?,
            d: complexity_d(gaps, alpha, m)?,
            c_m2: pairs_in(m),
            best_gaps: suboptimal_gaps(gaps)?,
            pair_gaps: suboptimal_pairs(gaps),
        })
    }
}

fn pairs_in(m: usize) -> u64 {
    let m = m as u64;
    m * (m - 1) / 2
}

fn suboptimal_gaps(gaps: &GapTable) -> Result<Vec<f64>> {
    gaps.suboptimal_arms()
        .map(|a| {
            let d = gaps.best_gap(a);
            if d > 0.0 {
                Ok(d)
            } else {
                Err(Error::Argument(format!(
                    "degenerate instance: best arm has gap {d} over {a}"
                )))
            }
        })
        .collect()
}

fn suboptimal_pairs(gaps: &GapTable) -> Vec<(ArmId, ArmId, f64)> {
    let arms: Vec<ArmId> = gaps.suboptimal_arms().collect();
    let mut out = Vec::new();
    for (x, &i) in arms.iter().enumerate() {
        for &j in &arms[x + 1..] {
            out.push((i, j, gaps.gap(i, j)));
        }
    }
    out
}

/// `H = sum_{i != best} 1/Δ_i^2`.
pub fn complexity_h(gaps: &GapTable) -> Result<f64> {
    Ok(suboptimal_gaps(gaps)?.iter().map(|d| 1.0 / (d * d)).sum())
}

/// `D` from the MultiRUCB bound.
///
/// Pairs of suboptimal arms with `Δ_ij = 0` (equal utilities) contribute an
/// infinite term, which makes the `D ln T` branch vacuous.
pub fn complexity_d(gaps: &GapTable, alpha: f64, m: usize) -> Result<f64> {
    if m < 2 {
        return Err(Error::Argument(format!("need m >= 2, got {m}")));
    }
    let c_m2 = pairs_in(m) as f64;
    let arm_term: f64 = suboptimal_gaps(gaps)?
        .iter()
        .map(|d| 4.0 * alpha / (d * d))
        .sum();
    let pair_term: f64 = suboptimal_pairs(gaps)
        .iter()
        .map(|&(_, _, d)| 4.0 * alpha / (c_m2 * d * d))
        .sum();
    Ok(arm_term + pair_term)
}

/// Expected-regret bound for MultiRUCB with comparison sets of size `m`.
pub fn multirucb_bound(gaps: &GapTable, alpha: f64, m: usize, horizon: f64) -> Result<f64> {
    let k = gaps.k();
    if !(alpha > 1.0) {
        return Err(Error::Argument(format!(
            "the MultiRUCB bound requires alpha > 1, got {alpha}"
        )));
    }
    if m < 2 || m > k {
        return Err(Error::Argument(format!(
            "need 2 <= m <= K = {k}, got m = {m}"
        )));
    }
    if !(horizon >= 2.0) {
        return Err(Error::Argument(format!("need T >= 2, got {horizon}")));
    }
    let dm = gaps.delta_max();
    let ln_t = horizon.ln();
    let kf = k as f64;
    let e = 2.0 * alpha - 1.0;

    let burn_in = (2.0 * (4.0 * alpha - 1.0) * kf * kf / e).powf(1.0 / e) * e / (alpha - 1.0);
    let d = complexity_d(gaps, alpha, m)?;
    let arm_sum: f64 = suboptimal_gaps(gaps)?
        .iter()
        .map(|g| 4.0 * alpha * dm / (g * g))
        .sum();
    let mf = m as f64;
    let via_d = d * dm * ln_t;
    let via_hypothesis =
        (8.0 + 2.0 * d * (2.0 * d).ln()) * dm + (mf + 1.0) / (mf - 1.0) * arm_sum * ln_t;
    Ok(burn_in * dm + via_d.min(via_hypothesis))
}

/// Explicit terms of the MultiSBM-Feedback bound:
/// `min{sum (α+2)Δ_max/Δ_i^2 ln T, sum 2(α+2)/Δ_i ln T} + (α+8)Δ_max K / (2α)`.
///
/// The guarantee itself assumes `α >= 3` and `T >= 16`; the formula is
/// evaluated for any `α > 0`, `T >= 1` so that it can be tabulated freely.
pub fn multisbm_feedback_leading_bound(gaps: &GapTable, alpha: f64, horizon: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Argument(format!("need alpha > 0, got {alpha}")));
    }
    if !(horizon >= 1.0) {
        return Err(Error::Argument(format!("need T >= 1, got {horizon}")));
    }
    let dm = gaps.delta_max();
    let ln_t = horizon.ln();
    let sub = suboptimal_gaps(gaps)?;
    let quadratic: f64 = sub.iter().map(|g| (alpha + 2.0) * dm / (g * g)).sum();
    let linear: f64 = sub.iter().map(|g| 2.0 * (alpha + 2.0) / g).sum();
    Ok(quadratic.min(linear) * ln_t + (alpha + 8.0) * dm / (2.0 * alpha) * gaps.k() as f64)
}

/// `C(δ) = ((4α - 1) K^2 / ((2α - 1) δ))^(1 / (2α - 1))`: steps after which
/// every preference lies inside its confidence interval w.p. at least `1 - δ`.
pub fn confidence_horizon(delta: f64, alpha: f64, k: usize) -> Result<f64> {
    if !(alpha > 0.5) {
        return Err(Error::Argument(format!("need alpha > 1/2, got {alpha}")));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Argument(format!("need 0 < delta <= 1, got {delta}")));
    }
    let e = 2.0 * alpha - 1.0;
    let kf = k as f64;
    Ok(((4.0 * alpha - 1.0) * kf * kf / (e * delta)).powf(1.0 / e))
}

/// Upper bound `2C + 2D ln(2D)` on the first time the hypothesis is reliably set.
pub fn t_hat_bound(c: f64, d: f64) -> Result<f64> {
    if !(d > 2.0) {
        return Err(Error::Argument(format!("need D > 2, got {d}")));
    }
    Ok(2.0 * c + 2.0 * d * (2.0 * d).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LinkFunction, PreferenceMatrix, UtilityVector};
    use approx::assert_relative_eq;

    fn gaps_of(mu: Vec<f64>) -> GapTable {
        PreferenceMatrix::from_utilities(&UtilityVector::new(mu).unwrap(), LinkFunction::Linear)
            .unwrap()
            .gaps()
    }

    #[test]
    fn h_examples() {
        // linear link: Δ = (μ_1 - μ_i) / 2
        assert_relative_eq!(
            complexity_h(&gaps_of(vec![0.8, 0.7])).unwrap(),
            400.0,
            max_relative = 1e-9
        );
        assert_relative_eq!(
            complexity_h(&gaps_of(vec![0.8, 0.7, 0.2])).unwrap(),
            411.111_111_111_111_1,
            max_relative = 1e-9
        );
        let a = complexity_h(&gaps_of(vec![0.5, 0.45, 0.3])).unwrap();
        let b = complexity_h(&gaps_of(vec![0.6, 0.5, 0.2])).unwrap();
        assert_relative_eq!(a, 4.0 * b, max_relative = 1e-9);
    }

    #[test]
    fn h_rejects_zero_gap() {
        let pm =
            PreferenceMatrix::new(vec![vec![0.5, 0.5], vec![0.5, 0.5]], Some(ArmId(0))).unwrap();
        assert!(complexity_h(&pm.gaps()).is_err());
    }

    #[test]
    fn multirucb_example() {
        let g = gaps_of(vec![1.0, 0.0]);
        assert_relative_eq!(
            complexity_d(&g, 2.0, 2).unwrap(),
            32.0,
            max_relative = 1e-12
        );
        let b = multirucb_bound(&g, 2.0, 2, std::f64::consts::E).unwrap();
        assert_relative_eq!(b, 19.979_057_207_896_393, max_relative = 1e-9);
        assert!(multirucb_bound(&g, 1.0, 2, 10.0).is_err());
    }

    #[test]
    fn multirucb_monotone_in_m_and_t() {
        let pm = PreferenceMatrix::synthetic(8, LinkFunction::Linear).unwrap();
        let g = pm.gaps();
        let mut prev = f64::INFINITY;
        for m in 2..=8 {
            let b = multirucb_bound(&g, 1.01, m, 1e5).unwrap();
            assert!(b <= prev);
            prev = b;
        }
        assert!(
            multirucb_bound(&g, 1.01, 4, 1e6).unwrap() > multirucb_bound(&g, 1.01, 4, 1e5).unwrap()
        );
    }

    #[test]
    fn multisbm_example() {
        let g = gaps_of(vec![0.7, 0.5]);
        let e = std::f64::consts::E;
        assert_relative_eq!(
            multisbm_feedback_leading_bound(&g, 3.0, e).unwrap(),
            50.366_666_666_666_67,
            max_relative = 1e-9
        );
        assert!(multisbm_feedback_leading_bound(&g, 0.0, 100.0).is_err());
        assert!(multisbm_feedback_leading_bound(&g, 3.0, 0.5).is_err());
    }

    #[test]
    fn multisbm_equal_gaps_take_quadratic_branch() {
        // Δ_max / Δ^2 <= 2 / Δ whenever Δ_max = Δ <= 2Δ
        for &d in &[0.05, 0.1, 0.3, 0.5] {
            let quad = d / (d * d);
            let lin = 2.0 / d;
            assert!(quad <= lin);
        }
    }

    #[test]
    fn confidence_horizon_examples() {
        assert_relative_eq!(
            confidence_horizon(1.0, 1.5, 2).unwrap(),
            3.162_277_660_168_379_5,
            max_relative = 1e-12
        );
        assert!(
            confidence_horizon(0.1, 1.5, 2).unwrap() > confidence_horizon(0.5, 1.5, 2).unwrap()
        );
        let big = confidence_horizon(0.5, 1e6, 10).unwrap();
        assert!((big - 1.0).abs() < 1e-4);
    }

    #[test]
    fn t_hat_examples() {
        assert_relative_eq!(
            t_hat_bound(10.0, 10.0).unwrap(),
            79.914_645_471_079_81,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            t_hat_bound(0.0, 2.5).unwrap(),
            8.047_189_562_170_502,
            max_relative = 1e-12
        );
        let a = t_hat_bound(3.0, 5.0).unwrap();
        let b = t_hat_bound(6.0, 5.0).unwrap();
        assert_relative_eq!(b - a, 6.0, max_relative = 1e-12);
        assert!(t_hat_bound(1.0, 2.0).is_err());
    }

    #[test]
    fn instance_complexity_bundle() {
        let pm = PreferenceMatrix::synthetic(4, LinkFunction::Linear).unwrap();
        let ic = InstanceComplexity::new(&pm.gaps(), 1.01, 3).unwrap();
        assert_eq!(ic.c_m2, 3);
        assert_eq!(ic.best_gaps.len(), 3);
        assert_eq!(ic.pair_gaps.len(), 3);
        assert!(ic.h > 0.0 && ic.d > 0.0);
    }
}
