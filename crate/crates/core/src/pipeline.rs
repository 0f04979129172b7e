//! Orchestration of the full procedure: baseline tests on raw data, Method-1
//! (cluster, whiten with the hard labels, test), and Method-2 (average the
//! test decision over the posterior distribution of label assignments).
//!
//! Clustering happens exactly once per analysis; permutation cut-offs are
//! computed on the (transformed) data afterwards. Every stage draws from a
//! stream derived from the config seed, so a report is a pure function of
//! (data, config).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::clustering::{pam, select_k0, KSelection};
use crate::data::{PointSet, TwoSampleData};
use crate::error::{Error, Result};
use crate::mixture::{
    em_fit, map_assign, pseudo_log_likelihood, responsibilities_matrix, sample_assignment_from,
    AssignmentPair, MixtureModel,
};
use crate::rng::{derive_seed, rng_from_seed};
use crate::stats::{
    ks_test, oriented_t_statistic, permutation_pvalue, raw_t_statistic, t_test, wmw_test,
    Alternative, CoordRankEval, HotellingEval, LabeledPool, PMethod, SpatialRankEval, TestOutcome,
};
use crate::transform::transform_pair;

const EM_TOL: f64 = 1e-8;
const EM_MAX_ITER: usize = 500;

// Seed stream tags.
const TAG_K_SELECT: u64 = 0x10;
const TAG_FINAL_PAM: u64 = 0x20;
const TAG_POSTERIOR_DRAWS: u64 = 0x30;
const TAG_PERMUTATION: u64 = 0x1000;

/// The two-sample tests the pipeline can run.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, Hash,
)]
#[serde(rename_all = "lowercase")]
pub enum TestKind {
    T,
    Wmw,
    Ks,
    Hotelling,
    Coord,
    Spatial,
}

impl TestKind {
    pub fn is_univariate(self) -> bool {
        matches!(self, TestKind::T | TestKind::Wmw | TestKind::Ks)
    }

    pub fn all() -> [TestKind; 6] {
        [
            TestKind::T,
            TestKind::Wmw,
            TestKind::Ks,
            TestKind::Hotelling,
            TestKind::Coord,
            TestKind::Spatial,
        ]
    }

    fn seed_offset(self) -> u64 {
        match self {
            TestKind::T => 0,
            TestKind::Wmw => 1,
            TestKind::Ks => 2,
            TestKind::Hotelling => 3,
            TestKind::Coord => 4,
            TestKind::Spatial => 5,
        }
    }
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            TestKind::T => "t",
            TestKind::Wmw => "wmw",
            TestKind::Ks => "ks",
            TestKind::Hotelling => "hotelling",
            TestKind::Coord => "coord",
            TestKind::Spatial => "spatial",
        };
        f.write_str(name)
    }
}

impl std::str::FromStr for TestKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "t" => Ok(TestKind::T),
            "wmw" => Ok(TestKind::Wmw),
            "ks" => Ok(TestKind::Ks),
            "hotelling" => Ok(TestKind::Hotelling),
            "coord" => Ok(TestKind::Coord),
            "spatial" => Ok(TestKind::Spatial),
            other => Err(Error::invalid(format!(
                "unknown test kind '{other}' (expected t, wmw, ks, hotelling, coord, spatial)"
            ))),
        }
    }
}

/// Analysis mode.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, Hash,
)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Usual,
    Method1,
    Method2,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Mode::Usual => "usual",
            Mode::Method1 => "method1",
            Mode::Method2 => "method2",
        };
        f.write_str(name)
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "usual" => Ok(Mode::Usual),
            "method1" => Ok(Mode::Method1),
            "method2" => Ok(Mode::Method2),
            other => Err(Error::invalid(format!(
                "unknown mode '{other}' (expected usual, method1, method2)"
            ))),
        }
    }
}

/// Tuning parameters for a full analysis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalysisConfig {
    /// Test level.
    pub alpha: f64,
    /// Minimum per-group share a mixed cluster must hold; below it the
    /// degeneracy guard fires.
    pub beta: f64,
    /// Largest cluster count tried during selection.
    pub k_max: usize,
    /// Reference draws for the gap statistic.
    pub gap_b: usize,
    /// Permutation count for permutation cut-offs.
    pub perm_b: usize,
    /// Posterior draws for the sampled Method-2 average.
    pub m_draws: usize,
    /// Method-2 enumerates all k0^n assignments when that count stays at or
    /// below this cap.
    pub enumeration_cap: u64,
    pub seed: u64,
    /// Requested tests; empty means choose by dimension (t/wmw/ks for
    /// univariate data, hotelling/coord/spatial otherwise).
    pub test_kinds: BTreeSet<TestKind>,
    pub alternative: Alternative,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            alpha: 0.05,
            beta: 0.1,
            k_max: 6,
            gap_b: 50,
            perm_b: 999,
            m_draws: 100,
            enumeration_cap: 100_000,
            seed: 0,
            test_kinds: BTreeSet::new(),
            alternative: Alternative::TwoSided,
        }
    }
}

impl AnalysisConfig {
    fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid(format!("alpha must be in (0,1), got {}", self.alpha)));
        }
        if !(0.0..0.5).contains(&self.beta) {
            return Err(Error::invalid(format!(
                "beta must be in [0, 0.5), got {}",
                self.beta
            )));
        }
        if self.m_draws < 1 {
            return Err(Error::invalid("m_draws must be at least 1"));
        }
        if self.perm_b < 1 {
            return Err(Error::invalid("perm_b must be at least 1"));
        }
        if self.gap_b < 1 {
            return Err(Error::invalid("gap_b must be at least 1"));
        }
        Ok(())
    }

    /// The tests to run for data of dimension `d`, validated against it.
    fn effective_kinds(&self, d: usize) -> Result<BTreeSet<TestKind>> {
        let kinds: BTreeSet<TestKind> = if self.test_kinds.is_empty() {
            if d == 1 {
                [TestKind::T, TestKind::Wmw, TestKind::Ks].into()
            } else {
                [TestKind::Hotelling, TestKind::Coord, TestKind::Spatial].into()
            }
        } else {
            self.test_kinds.clone()
        };
        for &kind in &kinds {
            if kind.is_univariate() && d != 1 {
                return Err(Error::invalid(format!(
                    "test '{kind}' needs univariate data but the input has dimension {d}"
                )));
            }
            if !kind.is_univariate() && self.alternative != Alternative::TwoSided {
                return Err(Error::invalid(format!(
                    "test '{kind}' supports only the two-sided alternative"
                )));
            }
        }
        Ok(kinds)
    }
}

/// Per-cluster composition of an assignment, by group.
#[derive(Debug, Clone, Serialize)]
pub struct ClusterComposition {
    pub cluster: usize,
    pub control: usize,
    pub treatment: usize,
}

/// Everything one analysis produced.
#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub mode: Mode,
    /// Absent in `usual` mode, which never clusters.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_selection: Option<KSelection>,
    /// True when some cluster held less than a beta share of one group and
    /// the analysis fell back to the usual tests on raw data.
    pub guard_triggered: bool,
    /// Per-test outcomes. Under Method-2 these are the conditional outcomes
    /// at the maximum-posterior assignment; the averaged decision lives in
    /// `phi`.
    pub outcomes: BTreeMap<TestKind, TestOutcome>,
    /// Method-2 rejection mass per test: the posterior-weighted share of
    /// assignments whose conditional test rejects.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<BTreeMap<TestKind, f64>>,
    pub assignment_summary: Vec<ClusterComposition>,
}

impl AnalysisReport {
    /// The final accept/reject decision for one test: under Method-2 this is
    /// `phi >= 0.5` (majority of posterior mass), otherwise the outcome's own
    /// rejection flag.
    pub fn decision(&self, kind: TestKind) -> Option<bool> {
        if let Some(phi) = &self.phi {
            return phi.get(&kind).map(|&p| p >= 0.5);
        }
        self.outcomes.get(&kind).map(|o| o.reject)
    }

    /// Selected k0, when clustering ran.
    pub fn k0(&self) -> Option<usize> {
        self.k_selection.as_ref().map(|s| s.k0)
    }
}

/// Runs one analysis in the requested mode.
pub fn analyze(data: &TwoSampleData, cfg: &AnalysisConfig, mode: Mode) -> Result<AnalysisReport> {
    match mode {
        Mode::Usual => usual_test(data, cfg),
        Mode::Method1 => method1(data, cfg),
        Mode::Method2 => method2(data, cfg),
    }
}

/// Baseline: every requested test on the raw data. Univariate tests use
/// their classical p-values; multivariate statistics use permutation
/// cut-offs.
pub fn usual_test(data: &TwoSampleData, cfg: &AnalysisConfig) -> Result<AnalysisReport> {
    cfg.validate()?;
    let kinds = cfg.effective_kinds(data.dim())?;
    let outcomes = run_tests(&data.x1, &data.x2, cfg, &kinds, TStyle::Classical)?;
    Ok(AnalysisReport {
        mode: Mode::Usual,
        k_selection: None,
        guard_triggered: false,
        outcomes,
        phi: None,
        assignment_summary: Vec::new(),
    })
}

/// Method-1: select k0 per group, cluster the pooled data once, fit the
/// mixture, whiten with the maximum-posterior labels, and test the
/// transformed data. With k0 = 1 the tests run on raw data (permutation
/// cut-offs where the classical ones would need Gaussianity); when the
/// degeneracy guard fires the usual tests run instead and the report says so.
pub fn method1(data: &TwoSampleData, cfg: &AnalysisConfig) -> Result<AnalysisReport> {
    cfg.validate()?;
    let kinds = cfg.effective_kinds(data.dim())?;
    let prep = prepare_clustered(data, cfg)?;
    finish_method1(data, cfg, &kinds, prep)
}

fn finish_method1(
    data: &TwoSampleData,
    cfg: &AnalysisConfig,
    kinds: &BTreeSet<TestKind>,
    prep: ClusteredPrep,
) -> Result<AnalysisReport> {
    match prep {
        ClusteredPrep::SingleCluster { selection } => {
            let outcomes = run_tests(&data.x1, &data.x2, cfg, kinds, TStyle::Permutation)?;
            Ok(AnalysisReport {
                mode: Mode::Method1,
                k_selection: Some(selection),
                guard_triggered: false,
                outcomes,
                phi: None,
                assignment_summary: vec![ClusterComposition {
                    cluster: 0,
                    control: data.n1(),
                    treatment: data.n2(),
                }],
            })
        }
        ClusteredPrep::Guarded { selection, summary } => {
            let outcomes = run_tests(&data.x1, &data.x2, cfg, kinds, TStyle::Classical)?;
            Ok(AnalysisReport {
                mode: Mode::Method1,
                k_selection: Some(selection),
                guard_triggered: true,
                outcomes,
                phi: None,
                assignment_summary: summary,
            })
        }
        ClusteredPrep::Mixture {
            selection,
            model,
            map_pair,
            summary,
        } => {
            let transformed = transform_pair(&data.x1, &data.x2, &model, &map_pair)?;
            let outcomes =
                run_tests(&transformed.t1, &transformed.t2, cfg, kinds, TStyle::Permutation)?;
            Ok(AnalysisReport {
                mode: Mode::Method1,
                k_selection: Some(selection),
                guard_triggered: false,
                outcomes,
                phi: None,
                assignment_summary: summary,
            })
        }
    }
}

/// Method-2: Bayesian model averaging of the conditional test decision over
/// the posterior distribution of label assignments.
///
/// The conditional decision for an assignment C transforms the data with C's
/// labels and runs the Method-1 tests, reusing one fixed permutation seed per
/// test so that variation in the average reflects assignment uncertainty
/// only. The average is exact (all k0^n assignments) below the enumeration
/// cap, otherwise a Monte Carlo mean over `m_draws` exact posterior draws.
/// The final decision per test is `phi >= 0.5`.
pub fn method2(data: &TwoSampleData, cfg: &AnalysisConfig) -> Result<AnalysisReport> {
    cfg.validate()?;
    let kinds = cfg.effective_kinds(data.dim())?;
    let prep = prepare_clustered(data, cfg)?;

    let (selection, model, map_pair, summary) = match prep {
        ClusteredPrep::SingleCluster { .. } | ClusteredPrep::Guarded { .. } => {
            // Point-mass cases: the conditional test equals an unconditional
            // one, so phi is its 0/1 decision.
            let mut report = finish_method1(data, cfg, &kinds, prep)?;
            report.mode = Mode::Method2;
            let phi: BTreeMap<TestKind, f64> = report
                .outcomes
                .iter()
                .map(|(&k, o)| (k, if o.reject { 1.0 } else { 0.0 }))
                .collect();
            report.phi = Some(phi);
            return Ok(report);
        }
        ClusteredPrep::Mixture {
            selection,
            model,
            map_pair,
            summary,
        } => (selection, model, map_pair, summary),
    };

    let k0 = model.k();
    let n = data.n1() + data.n2();

    // Conditional outcomes at the maximum-posterior assignment, reported for
    // transparency alongside the averaged decision.
    let map_transformed = transform_pair(&data.x1, &data.x2, &model, &map_pair)?;
    let outcomes = run_tests(
        &map_transformed.t1,
        &map_transformed.t2,
        cfg,
        &kinds,
        TStyle::Permutation,
    )?;

    let mut phi: BTreeMap<TestKind, f64> = kinds.iter().map(|&k| (k, 0.0)).collect();

    // k0^n <= cap, computed in logs to avoid overflow.
    let enumerable =
        (n as f64) * (k0 as f64).ln() <= (cfg.enumeration_cap as f64).ln() + 1e-12;

    if enumerable {
        let log_norm = posterior_log_norm(&model, data)?;
        let mut total_weight = 0.0;
        let mut assignment = AssignmentPair {
            labels1: vec![0; data.n1()],
            labels2: vec![0; data.n2()],
        };
        let mut digits = vec![0usize; n];
        loop {
            assignment.labels1.copy_from_slice(&digits[..data.n1()]);
            assignment.labels2.copy_from_slice(&digits[data.n1()..]);
            let weight =
                (pseudo_log_likelihood(&model, &data.x1, &data.x2, &assignment)? - log_norm)
                    .exp();
            total_weight += weight;
            let decisions =
                conditional_decisions(data, cfg, &kinds, &model, &assignment)?;
            for (&kind, &rejected) in kinds.iter().zip(decisions.iter()) {
                if rejected {
                    *phi.get_mut(&kind).unwrap() += weight;
                }
            }
            if !increment_base_k(&mut digits, k0) {
                break;
            }
        }
        // Guard against accumulated rounding in the weights.
        if total_weight > 0.0 {
            for v in phi.values_mut() {
                *v = (*v / total_weight).clamp(0.0, 1.0);
            }
        }
    } else {
        let resp1 = responsibilities_matrix(&model, &data.x1)?;
        let resp2 = responsibilities_matrix(&model, &data.x2)?;
        let mut rng = rng_from_seed(derive_seed(cfg.seed, TAG_POSTERIOR_DRAWS));
        let m = cfg.m_draws;
        for _ in 0..m {
            let assignment = sample_assignment_from(&resp1, &resp2, &mut rng);
            let decisions =
                conditional_decisions(data, cfg, &kinds, &model, &assignment)?;
            for (&kind, &rejected) in kinds.iter().zip(decisions.iter()) {
                if rejected {
                    *phi.get_mut(&kind).unwrap() += 1.0 / m as f64;
                }
            }
        }
    }

    Ok(AnalysisReport {
        mode: Mode::Method2,
        k_selection: Some(selection),
        guard_triggered: false,
        outcomes,
        phi: Some(phi),
        assignment_summary: summary,
    })
}

/// Returns true when some cluster's membership is less than a `beta` share
/// from one of the groups — the signature of a treatment effect strong
/// enough to hijack the clustering, where the transform would do harm.
pub fn degeneracy_guard(assignment: &AssignmentPair, k0: usize, beta: f64) -> bool {
    if k0 < 2 {
        return false;
    }
    for r in 0..k0 {
        let c1 = assignment.labels1.iter().filter(|&&l| l == r).count();
        let c2 = assignment.labels2.iter().filter(|&&l| l == r).count();
        let total = c1 + c2;
        if total == 0 {
            continue;
        }
        let min_frac = c1.min(c2) as f64 / total as f64;
        if min_frac < beta {
            return true;
        }
    }
    false
}

/// Shared clustering stage of both methods.
enum ClusteredPrep {
    SingleCluster {
        selection: KSelection,
    },
    Guarded {
        selection: KSelection,
        summary: Vec<ClusterComposition>,
    },
    Mixture {
        selection: KSelection,
        model: MixtureModel,
        map_pair: AssignmentPair,
        summary: Vec<ClusterComposition>,
    },
}

fn prepare_clustered(data: &TwoSampleData, cfg: &AnalysisConfig) -> Result<ClusteredPrep> {
    let selection = select_k0(
        &data.x1,
        &data.x2,
        cfg.k_max,
        cfg.gap_b,
        derive_seed(cfg.seed, TAG_K_SELECT),
    )?;
    if selection.k0 == 1 {
        return Ok(ClusteredPrep::SingleCluster { selection });
    }

    let pooled = data.x1.concat(&data.x2)?;
    let initial = pam(&pooled, selection.k0, derive_seed(cfg.seed, TAG_FINAL_PAM))?;
    let model = em_fit(&pooled, selection.k0, &initial, EM_TOL, EM_MAX_ITER)?;
    let labels = map_assign(&model, &pooled)?;
    let map_pair = AssignmentPair {
        labels1: labels[..data.n1()].to_vec(),
        labels2: labels[data.n1()..].to_vec(),
    };
    let summary = composition(&map_pair, selection.k0);

    if degeneracy_guard(&map_pair, selection.k0, cfg.beta) {
        return Ok(ClusteredPrep::Guarded { selection, summary });
    }
    Ok(ClusteredPrep::Mixture {
        selection,
        model,
        map_pair,
        summary,
    })
}

fn composition(pair: &AssignmentPair, k0: usize) -> Vec<ClusterComposition> {
    (0..k0)
        .map(|r| ClusterComposition {
            cluster: r,
            control: pair.labels1.iter().filter(|&&l| l == r).count(),
            treatment: pair.labels2.iter().filter(|&&l| l == r).count(),
        })
        .collect()
}

/// How the t statistic's cut-off is computed.
#[derive(Clone, Copy, PartialEq, Eq)]
enum TStyle {
    /// Student distribution (the usual baseline).
    Classical,
    /// Permutation cut-off (the proposed methods).
    Permutation,
}

/// Runs the requested tests on one pair of samples. WMW and KS always use
/// their distribution-free classical p-values; multivariate statistics always
/// use the permutation engine; the t test follows `style`.
fn run_tests(
    x1: &PointSet,
    x2: &PointSet,
    cfg: &AnalysisConfig,
    kinds: &BTreeSet<TestKind>,
    style: TStyle,
) -> Result<BTreeMap<TestKind, TestOutcome>> {
    let mut outcomes = BTreeMap::new();
    let mut pool: Option<LabeledPool> = None;

    for &kind in kinds {
        let perm_seed = derive_seed(cfg.seed, TAG_PERMUTATION + kind.seed_offset());
        let outcome = match kind {
            TestKind::T => {
                let a = x1.values()?;
                let b = x2.values()?;
                if style == TStyle::Classical {
                    t_test(&a, &b, cfg.alternative, cfg.alpha)?
                } else {
                    let pool = pool.get_or_insert_with(|| {
                        LabeledPool::from_pair(x1, x2).expect("validated sizes")
                    });
                    let alt = cfg.alternative;
                    let raw = raw_t_statistic(&a, &b);
                    let perm = permutation_pvalue(
                        pool,
                        |p| Ok(oriented_t_statistic(p, alt)),
                        cfg.perm_b,
                        perm_seed,
                    )?;
                    TestOutcome::new(raw, perm.p_value, cfg.alpha, alt, PMethod::Permutation)
                        .with_permutations(perm.n_permutations)
                }
            }
            TestKind::Wmw => {
                wmw_test(&x1.values()?, &x2.values()?, cfg.alternative, cfg.alpha)?
            }
            TestKind::Ks => {
                ks_test(&x1.values()?, &x2.values()?, cfg.alternative, cfg.alpha)?
            }
            TestKind::Hotelling => {
                let pool = pool.get_or_insert_with(|| {
                    LabeledPool::from_pair(x1, x2).expect("validated sizes")
                });
                let eval = HotellingEval::prepare(pool)?;
                let perm =
                    permutation_pvalue(pool, |p| eval.evaluate(&p.labels), cfg.perm_b, perm_seed)?;
                TestOutcome::new(
                    perm.observed,
                    perm.p_value,
                    cfg.alpha,
                    cfg.alternative,
                    PMethod::Permutation,
                )
                .with_permutations(perm.n_permutations)
            }
            TestKind::Coord => {
                let pool = pool.get_or_insert_with(|| {
                    LabeledPool::from_pair(x1, x2).expect("validated sizes")
                });
                let eval = CoordRankEval::prepare(pool)?;
                let perm =
                    permutation_pvalue(pool, |p| eval.evaluate(&p.labels), cfg.perm_b, perm_seed)?;
                TestOutcome::new(
                    perm.observed,
                    perm.p_value,
                    cfg.alpha,
                    cfg.alternative,
                    PMethod::Permutation,
                )
                .with_permutations(perm.n_permutations)
            }
            TestKind::Spatial => {
                let pool = pool.get_or_insert_with(|| {
                    LabeledPool::from_pair(x1, x2).expect("validated sizes")
                });
                let eval = SpatialRankEval::prepare(pool)?;
                let perm =
                    permutation_pvalue(pool, |p| eval.evaluate(&p.labels), cfg.perm_b, perm_seed)?;
                TestOutcome::new(
                    perm.observed,
                    perm.p_value,
                    cfg.alpha,
                    cfg.alternative,
                    PMethod::Permutation,
                )
                .with_permutations(perm.n_permutations)
            }
        };
        outcomes.insert(kind, outcome);
    }
    Ok(outcomes)
}

/// Conditional test decisions (one bool per requested kind, in kind order)
/// for a specific assignment.
fn conditional_decisions(
    data: &TwoSampleData,
    cfg: &AnalysisConfig,
    kinds: &BTreeSet<TestKind>,
    model: &MixtureModel,
    assignment: &AssignmentPair,
) -> Result<Vec<bool>> {
    let transformed = transform_pair(&data.x1, &data.x2, model, assignment)?;
    let outcomes = run_tests(
        &transformed.t1,
        &transformed.t2,
        cfg,
        kinds,
        TStyle::Permutation,
    )?;
    Ok(kinds.iter().map(|k| outcomes[k].reject).collect())
}

/// log sum over assignments of the pseudo-likelihood: with a uniform prior
/// it factorizes into a per-point log-sum over components.
fn posterior_log_norm(model: &MixtureModel, data: &TwoSampleData) -> Result<f64> {
    let k = model.k();
    let mut total = 0.0;
    for points in [&data.x1, &data.x2] {
        for x in points.iter() {
            let logs: Vec<f64> = (0..k)
                .map(|r| model.component(r).log_density(x))
                .collect::<Result<_>>()?;
            let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            total += max + logs.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
        }
    }
    Ok(total)
}

fn increment_base_k(digits: &mut [usize], k: usize) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < k {
            return true;
        }
        *d = 0;
    }
    false
}
