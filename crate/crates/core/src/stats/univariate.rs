//! Classical univariate two-sample tests: pooled t, Wilcoxon-Mann-Whitney,
//! and Kolmogorov-Smirnov.

use itertools::Itertools;
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use super::{midranks, tie_correction_sum, Alternative, PMethod, TestOutcome};
use crate::error::{Error, Result};

/// Pooled sample size at or below which the rank tests enumerate the exact
/// permutation distribution (only when the pooled sample has no ties).
const EXACT_ENUMERATION_LIMIT: usize = 12;

fn validate_sample(name: &str, s: &[f64], min: usize) -> Result<()> {
    if s.len() < min {
        return Err(Error::invalid(format!(
            "{name} needs at least {min} observations (got {})",
            s.len()
        )));
    }
    if let Some(i) = s.iter().position(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("{name}[{i}] is not finite")));
    }
    Ok(())
}

/// Two-sample pooled-variance Student t test.
///
/// The statistic is (mean(x) - mean(y)) / se, so a positive treatment shift
/// pushes it negative; `Alternative::Greater` (treatment larger) therefore
/// rejects in the lower tail.
pub fn t_test(x: &[f64], y: &[f64], alternative: Alternative, alpha: f64) -> Result<TestOutcome> {
    validate_sample("x", x, 2)?;
    validate_sample("y", y, 2)?;
    let n1 = x.len() as f64;
    let n2 = y.len() as f64;
    let mean1 = x.iter().sum::<f64>() / n1;
    let mean2 = y.iter().sum::<f64>() / n2;
    let ss1: f64 = x.iter().map(|v| (v - mean1) * (v - mean1)).sum();
    let ss2: f64 = y.iter().map(|v| (v - mean2) * (v - mean2)).sum();
    let df = n1 + n2 - 2.0;
    let pooled_var = (ss1 + ss2) / df;

    if pooled_var <= 0.0 {
        if mean1 == mean2 {
            return Err(Error::degenerate(
                "zero pooled variance with equal means: t statistic undefined",
            ));
        }
        // Constant groups at different levels: the evidence is one-sided and
        // infinitely strong, except against an alternative it contradicts.
        let diff = mean1 - mean2;
        let p = match alternative {
            Alternative::TwoSided => 0.0,
            Alternative::Greater => {
                if diff < 0.0 {
                    0.0
                } else {
                    1.0
                }
            }
            Alternative::Less => {
                if diff > 0.0 {
                    0.0
                } else {
                    1.0
                }
            }
        };
        let statistic = if diff > 0.0 {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        };
        return Ok(
            TestOutcome::new(statistic, p, alpha, alternative, PMethod::Exact)
                .flag_degenerate(),
        );
    }

    let se = (pooled_var * (1.0 / n1 + 1.0 / n2)).sqrt();
    let t = (mean1 - mean2) / se;
    let dist = StudentsT::new(0.0, 1.0, df)
        .map_err(|e| Error::numerical(format!("t distribution: {e}")))?;
    let p = match alternative {
        Alternative::TwoSided => 2.0 * (1.0 - dist.cdf(t.abs())),
        Alternative::Greater => dist.cdf(t),
        Alternative::Less => 1.0 - dist.cdf(t),
    };
    Ok(TestOutcome::new(t, p, alpha, alternative, PMethod::Asymptotic))
}

/// The raw pooled t statistic with conventions that keep the permutation
/// engine total: 0 when the pool is entirely constant, +-infinity when the
/// groups are constant at different levels.
pub(crate) fn raw_t_statistic(x: &[f64], y: &[f64]) -> f64 {
    let n1 = x.len() as f64;
    let n2 = y.len() as f64;
    let mean1 = x.iter().sum::<f64>() / n1;
    let mean2 = y.iter().sum::<f64>() / n2;
    let ss1: f64 = x.iter().map(|v| (v - mean1) * (v - mean1)).sum();
    let ss2: f64 = y.iter().map(|v| (v - mean2) * (v - mean2)).sum();
    let pooled_var = (ss1 + ss2) / (n1 + n2 - 2.0);
    if pooled_var <= 0.0 {
        return if mean1 == mean2 {
            0.0
        } else if mean1 > mean2 {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        };
    }
    let se = (pooled_var * (1.0 / n1 + 1.0 / n2)).sqrt();
    (mean1 - mean2) / se
}

/// Orients a signed statistic so that larger values are more extreme under
/// the given alternative (upper-tail convention of the permutation engine).
pub(crate) fn orient_t(t: f64, alternative: Alternative) -> f64 {
    match alternative {
        Alternative::TwoSided => t.abs(),
        // Treatment larger pulls (mean1 - mean2) negative.
        Alternative::Greater => -t,
        Alternative::Less => t,
    }
}

/// Oriented t statistic of a labeled pool, for permutation use.
pub(crate) fn oriented_t_statistic(
    pool: &super::LabeledPool,
    alternative: Alternative,
) -> f64 {
    let (x, y) = pool.split_values();
    orient_t(raw_t_statistic(&x, &y), alternative)
}

/// Wilcoxon-Mann-Whitney test.
///
/// U counts pairs where the treatment value exceeds the control value, with
/// ties counted half. Exact enumeration over all group assignments when the
/// pooled size is at most 12 and tie-free; otherwise the normal approximation
/// with continuity and tie correction.
pub fn wmw_test(x: &[f64], y: &[f64], alternative: Alternative, alpha: f64) -> Result<TestOutcome> {
    validate_sample("x", x, 1)?;
    validate_sample("y", y, 1)?;
    let n1 = x.len();
    let n2 = y.len();
    let n = n1 + n2;
    let pooled: Vec<f64> = x.iter().chain(y.iter()).copied().collect();
    let u_obs = u_statistic(&pooled, n1);
    let mu = n1 as f64 * n2 as f64 / 2.0;

    let has_ties = {
        let mut sorted = pooled.clone();
        sorted.sort_by(f64::total_cmp);
        sorted.windows(2).any(|w| w[0] == w[1])
    };

    if n <= EXACT_ENUMERATION_LIMIT && !has_ties {
        let mut count = 0usize;
        let mut total = 0usize;
        for combo in (0..n).combinations(n1) {
            let u = u_for_assignment(&pooled, &combo);
            let extreme = match alternative {
                Alternative::TwoSided => (u - mu).abs() >= (u_obs - mu).abs(),
                Alternative::Greater => u >= u_obs,
                Alternative::Less => u <= u_obs,
            };
            if extreme {
                count += 1;
            }
            total += 1;
        }
        let p = count as f64 / total as f64;
        return Ok(TestOutcome::new(u_obs, p, alpha, alternative, PMethod::Exact));
    }

    let nf = n as f64;
    let variance = (n1 as f64 * n2 as f64 / 12.0)
        * ((nf + 1.0) - tie_correction_sum(&pooled) / (nf * (nf - 1.0)));
    if variance <= 0.0 {
        // Entirely tied pool: no information either way.
        return Ok(
            TestOutcome::new(u_obs, 1.0, alpha, alternative, PMethod::Asymptotic)
                .flag_degenerate(),
        );
    }
    let sd = variance.sqrt();
    let normal = Normal::standard();
    let p = match alternative {
        Alternative::TwoSided => {
            let z = ((u_obs - mu).abs() - 0.5) / sd;
            2.0 * (1.0 - normal.cdf(z))
        }
        Alternative::Greater => 1.0 - normal.cdf((u_obs - mu - 0.5) / sd),
        Alternative::Less => normal.cdf((u_obs - mu + 0.5) / sd),
    };
    Ok(TestOutcome::new(u_obs, p, alpha, alternative, PMethod::Asymptotic))
}

/// U for the pooled values with group 1 at the given indices.
fn u_for_assignment(pooled: &[f64], group1: &[usize]) -> f64 {
    let mut in_g1 = vec![false; pooled.len()];
    for &i in group1 {
        in_g1[i] = true;
    }
    let mut u = 0.0;
    for (i, &xi) in pooled.iter().enumerate() {
        if !in_g1[i] {
            continue;
        }
        for (j, &yj) in pooled.iter().enumerate() {
            if in_g1[j] {
                continue;
            }
            if yj > xi {
                u += 1.0;
            } else if yj == xi {
                u += 0.5;
            }
        }
    }
    u
}

/// U via midranks: equals the pair count with ties counted half.
fn u_statistic(pooled: &[f64], n1: usize) -> f64 {
    let ranks = midranks(pooled);
    let n2 = pooled.len() - n1;
    let rank_sum2: f64 = ranks[n1..].iter().sum();
    rank_sum2 - (n2 * (n2 + 1)) as f64 / 2.0
}

/// Kolmogorov-Smirnov two-sample test.
///
/// Two-sided D is the largest absolute gap between the two empirical
/// distribution functions; one-sided variants use the signed gap in the
/// direction of the alternative. Exact enumeration for tie-free pools of at
/// most 12 points, otherwise the asymptotic Kolmogorov (or one-sided
/// exponential) tail with effective size n1*n2/(n1+n2).
pub fn ks_test(x: &[f64], y: &[f64], alternative: Alternative, alpha: f64) -> Result<TestOutcome> {
    validate_sample("x", x, 1)?;
    validate_sample("y", y, 1)?;
    let n1 = x.len();
    let n2 = y.len();
    let n = n1 + n2;
    let pooled: Vec<f64> = x.iter().chain(y.iter()).copied().collect();
    let group1: Vec<usize> = (0..n1).collect();
    let d_obs = ks_for_assignment(&pooled, &group1, alternative);

    let has_ties = {
        let mut sorted = pooled.clone();
        sorted.sort_by(f64::total_cmp);
        sorted.windows(2).any(|w| w[0] == w[1])
    };

    if n <= EXACT_ENUMERATION_LIMIT && !has_ties {
        let mut count = 0usize;
        let mut total = 0usize;
        for combo in (0..n).combinations(n1) {
            if ks_for_assignment(&pooled, &combo, alternative) >= d_obs {
                count += 1;
            }
            total += 1;
        }
        let p = count as f64 / total as f64;
        return Ok(TestOutcome::new(d_obs, p, alpha, alternative, PMethod::Exact));
    }

    let n_eff = (n1 * n2) as f64 / n as f64;
    let p = match alternative {
        Alternative::TwoSided => kolmogorov_sf(n_eff.sqrt() * d_obs),
        _ => (-2.0 * n_eff * d_obs * d_obs).exp().min(1.0),
    };
    Ok(TestOutcome::new(d_obs, p, alpha, alternative, PMethod::Asymptotic))
}

/// KS statistic for the pooled values with group 1 at the given indices.
/// Two-sided: sup |F1 - F2|. Greater (treatment shifted up): sup (F1 - F2).
fn ks_for_assignment(pooled: &[f64], group1: &[usize], alternative: Alternative) -> f64 {
    let n = pooled.len();
    let mut in_g1 = vec![false; n];
    for &i in group1 {
        in_g1[i] = true;
    }
    let n1 = group1.len();
    let n2 = n - n1;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| pooled[a].total_cmp(&pooled[b]));

    let mut c1 = 0usize;
    let mut c2 = 0usize;
    let mut best = f64::NEG_INFINITY;
    let mut idx = 0;
    while idx < n {
        // Process all observations tied at this value before evaluating.
        let v = pooled[order[idx]];
        while idx < n && pooled[order[idx]] == v {
            if in_g1[order[idx]] {
                c1 += 1;
            } else {
                c2 += 1;
            }
            idx += 1;
        }
        let f1 = c1 as f64 / n1 as f64;
        let f2 = c2 as f64 / n2 as f64;
        let gap = match alternative {
            Alternative::TwoSided => (f1 - f2).abs(),
            Alternative::Greater => f1 - f2,
            Alternative::Less => f2 - f1,
        };
        if gap > best {
            best = gap;
        }
    }
    best
}

/// Survival function of the Kolmogorov distribution.
fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.05 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let jf = j as f64;
        let term = (-2.0 * jf * jf * lambda * lambda).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn t_test_hand_computed_example() {
        // x = [1,2,3], y = [2,3,4]: pooled variance 1, se = sqrt(2/3),
        // t = -1/se, df = 4.
        let out = t_test(&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0], Alternative::TwoSided, 0.05)
            .unwrap();
        assert_relative_eq!(out.statistic, -1.224745, epsilon = 1e-6);
        assert_relative_eq!(out.p_value, 0.2879, epsilon = 5e-4);
        assert!(!out.reject);
    }

    #[test]
    fn t_test_identical_samples() {
        let x = [1.0, 2.0, 5.0];
        let out = t_test(&x, &x, Alternative::TwoSided, 0.05).unwrap();
        assert_eq!(out.statistic, 0.0);
        assert_relative_eq!(out.p_value, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn t_test_zero_variance_equal_means_is_degenerate() {
        let err = t_test(&[1.0, 1.0], &[1.0, 1.0], Alternative::TwoSided, 0.05).unwrap_err();
        assert!(matches!(err, Error::DegenerateInput(_)));
    }

    #[test]
    fn t_test_zero_variance_unequal_means_flags_p_zero() {
        let out = t_test(&[1.0, 1.0], &[2.0, 2.0], Alternative::TwoSided, 0.05).unwrap();
        assert!(out.degenerate);
        assert_eq!(out.p_value, 0.0);
        assert!(out.reject);
        // One-sided against the evidence: no rejection.
        let contra = t_test(&[2.0, 2.0], &[1.0, 1.0], Alternative::Greater, 0.05).unwrap();
        assert_eq!(contra.p_value, 1.0);
    }

    #[test]
    fn t_shift_moves_statistic_monotonically() {
        let x = [0.1, -0.4, 0.7, 1.2, -0.9];
        let y0 = [0.0, 0.3, -0.2, 0.8, -0.5];
        let mut last = f64::INFINITY;
        for shift in [0.0, 0.5, 1.0, 2.0] {
            let y: Vec<f64> = y0.iter().map(|v| v + shift).collect();
            let t = t_test(&x, &y, Alternative::TwoSided, 0.05).unwrap().statistic;
            assert!(t < last);
            last = t;
        }
    }

    #[test]
    fn wmw_fully_separated_two_sided() {
        let out = wmw_test(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], Alternative::TwoSided, 0.05)
            .unwrap();
        assert_eq!(out.statistic, 9.0);
        assert_eq!(out.p_method, PMethod::Exact);
        assert_relative_eq!(out.p_value, 0.1, epsilon = 1e-12);
    }

    #[test]
    fn wmw_identical_pairs_midranks() {
        let out = wmw_test(&[1.0, 2.0], &[1.0, 2.0], Alternative::TwoSided, 0.05).unwrap();
        assert_eq!(out.statistic, 2.0); // n1 n2 / 2
        assert_relative_eq!(out.p_value, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn wmw_one_sided_exact() {
        let out = wmw_test(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], Alternative::Greater, 0.05)
            .unwrap();
        assert_relative_eq!(out.p_value, 0.05, epsilon = 1e-12);
        assert!(out.reject);
        let other = wmw_test(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], Alternative::Less, 0.05)
            .unwrap();
        assert_relative_eq!(other.p_value, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn wmw_normal_approximation_matches_exact_shape() {
        // Large separated samples: tiny p, U maximal.
        let x: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let y: Vec<f64> = (0..30).map(|i| 100.0 + i as f64).collect();
        let out = wmw_test(&x, &y, Alternative::TwoSided, 0.05).unwrap();
        assert_eq!(out.statistic, 900.0);
        assert!(out.p_value < 1e-9);
    }

    #[test]
    fn ks_disjoint_supports() {
        let out = ks_test(&[1.0, 2.0], &[3.0, 4.0], Alternative::TwoSided, 0.05).unwrap();
        assert_relative_eq!(out.statistic, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn ks_interleaved_supports() {
        let out = ks_test(&[1.0, 3.0], &[2.0, 4.0], Alternative::TwoSided, 0.05).unwrap();
        assert_relative_eq!(out.statistic, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn ks_identical_samples() {
        let x = [1.0, 2.0, 3.0];
        let out = ks_test(&x, &x, Alternative::TwoSided, 0.05).unwrap();
        assert_eq!(out.statistic, 0.0);
        assert_relative_eq!(out.p_value, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn ks_exact_enumeration_small_sample() {
        // Fully separated, n1 = n2 = 3: only C(6,3) splits; both the observed
        // and the mirrored split reach D = 1.
        let out = ks_test(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], Alternative::TwoSided, 0.05)
            .unwrap();
        assert_eq!(out.p_method, PMethod::Exact);
        assert_relative_eq!(out.p_value, 0.1, epsilon = 1e-12);
    }

    #[test]
    fn kolmogorov_sf_reference_values() {
        // Known quantile: Q(1.3581) ~ 0.05.
        assert!((kolmogorov_sf(1.3581) - 0.05).abs() < 5e-4);
        assert!(kolmogorov_sf(0.01) == 1.0);
        assert!(kolmogorov_sf(3.0) < 1e-7);
    }
}
