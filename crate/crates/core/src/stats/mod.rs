//! Two-sample test statistics and the permutation engine that computes their
//! cut-offs.
//!
//! Univariate tests (t, Wilcoxon-Mann-Whitney, Kolmogorov-Smirnov) carry
//! their classical p-values; the multivariate statistics (Hotelling T²,
//! coordinate-wise rank, spatial rank) are nonnegative with large values
//! indicating separation, and get their p-values from the permutation engine.

mod multivariate;
mod permutation;
mod univariate;

pub use multivariate::{
    coordwise_rank_stat, hotelling_f_pvalue, hotelling_t2, spatial_rank_stat,
};
pub(crate) use multivariate::{CoordRankEval, HotellingEval, SpatialRankEval};
pub use permutation::{permutation_pvalue, PermutationPValue};
pub use univariate::{ks_test, t_test, wmw_test};
pub(crate) use univariate::{oriented_t_statistic, raw_t_statistic};

use serde::{Deserialize, Serialize};

use crate::data::PointSet;
use crate::error::{Error, Result};

/// Direction of the alternative hypothesis, stated for the treatment group:
/// `Greater` means treatment values tend to be larger than control values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Alternative {
    #[default]
    TwoSided,
    Greater,
    Less,
}

/// How a p-value was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PMethod {
    Exact,
    Asymptotic,
    Permutation,
}

/// Result of a single two-sample test.
#[derive(Debug, Clone, Serialize)]
pub struct TestOutcome {
    pub statistic: f64,
    pub p_value: f64,
    /// True iff `p_value <= alpha`.
    pub reject: bool,
    pub alpha: f64,
    pub alternative: Alternative,
    pub p_method: PMethod,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_permutations: Option<usize>,
    /// Set when a zero-variance input forced a boundary p-value.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub degenerate: bool,
}

impl TestOutcome {
    pub(crate) fn new(
        statistic: f64,
        p_value: f64,
        alpha: f64,
        alternative: Alternative,
        p_method: PMethod,
    ) -> Self {
        let p_value = p_value.clamp(0.0, 1.0);
        TestOutcome {
            statistic,
            p_value,
            reject: p_value <= alpha,
            alpha,
            alternative,
            p_method,
            n_permutations: None,
            degenerate: false,
        }
    }

    pub(crate) fn with_permutations(mut self, n: usize) -> Self {
        self.n_permutations = Some(n);
        self
    }

    pub(crate) fn flag_degenerate(mut self) -> Self {
        self.degenerate = true;
        self
    }
}

/// Which of the two samples a pooled observation came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Group {
    Control,
    Treatment,
}

/// The pooled sample with group labels: the permutation engine's unit of work.
#[derive(Debug, Clone)]
pub struct LabeledPool {
    pub points: PointSet,
    pub labels: Vec<Group>,
    pub n1: usize,
    pub n2: usize,
}

impl LabeledPool {
    pub fn from_pair(x1: &PointSet, x2: &PointSet) -> Result<Self> {
        if x1.is_empty() || x2.is_empty() {
            return Err(Error::invalid("both groups must be non-empty"));
        }
        let points = x1.concat(x2)?;
        let mut labels = vec![Group::Control; x1.len()];
        labels.extend(vec![Group::Treatment; x2.len()]);
        Ok(LabeledPool {
            points,
            labels,
            n1: x1.len(),
            n2: x2.len(),
        })
    }

    /// Group-2 (treatment) values of a univariate pool.
    pub(crate) fn split_values(&self) -> (Vec<f64>, Vec<f64>) {
        let mut a = Vec::with_capacity(self.n1);
        let mut b = Vec::with_capacity(self.n2);
        for (p, &g) in self.points.iter().zip(&self.labels) {
            match g {
                Group::Control => a.push(p[0]),
                Group::Treatment => b.push(p[0]),
            }
        }
        (a, b)
    }
}

/// Midranks of `values`: ties share the average of the ranks they occupy.
/// Ranks are 1-based.
pub(crate) fn midranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // Positions i..=j (0-based) share the midrank.
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Sum of (t^3 - t) over tie groups, used in tie-corrected rank variances.
pub(crate) fn tie_correction_sum(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut total = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        total += t * t * t - t;
        i = j + 1;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midranks_handle_ties() {
        let r = midranks(&[3.0, 1.0, 3.0, 2.0]);
        assert_eq!(r, vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn midranks_sum_is_invariant() {
        let r = midranks(&[5.0, 5.0, 5.0, 1.0, 2.0]);
        let sum: f64 = r.iter().sum();
        assert_eq!(sum, 15.0); // n(n+1)/2
    }

    #[test]
    fn tie_sum_counts_groups() {
        // Two tie groups of sizes 2 and 3: (8-2) + (27-3) = 30.
        assert_eq!(tie_correction_sum(&[1.0, 1.0, 4.0, 4.0, 4.0, 9.0]), 30.0);
    }
}
