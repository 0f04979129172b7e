//! Mixture-design generators and the Monte Carlo experiment runner that
//! produces rejection-proportion tables.

use std::collections::BTreeMap;

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{PointSet, TwoSampleData};
use crate::error::{Error, Result};
use crate::pipeline::{analyze, AnalysisConfig, Mode, TestKind};
use crate::rng::{derive_seed, rng_from_seed};
use crate::stats::Alternative;

/// Elliptical family of one mixture component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Gaussian,
    /// Elliptical Cauchy: a Gaussian deviate divided by an independent
    /// chi(1) deviate (multivariate t with one degree of freedom).
    Cauchy,
}

/// One sub-population of a mixture design.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub location: Vec<f64>,
    /// Scatter matrix, row-major.
    pub scale: Vec<Vec<f64>>,
    pub family: Family,
}

/// A mixture distribution for one group, with an optional location shift
/// applied to every component (the treatment effect).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MixtureSpec {
    pub components: Vec<MixtureComponent>,
    pub weights: Vec<f64>,
    /// Added to every sampled point after the component draw.
    pub shift: Vec<f64>,
}

impl MixtureSpec {
    pub fn dim(&self) -> usize {
        self.components[0].location.len()
    }

    fn validate(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(Error::invalid("mixture needs at least one component"));
        }
        let d = self.dim();
        if self.weights.len() != self.components.len() {
            return Err(Error::invalid(format!(
                "{} weights for {} components",
                self.weights.len(),
                self.components.len()
            )));
        }
        if self.weights.iter().any(|&w| w < 0.0) {
            return Err(Error::invalid("mixture weights must be nonnegative"));
        }
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "mixture weights sum to {total}, expected 1"
            )));
        }
        if self.shift.len() != d {
            return Err(Error::invalid("shift dimension mismatch"));
        }
        for (i, c) in self.components.iter().enumerate() {
            if c.location.len() != d
                || c.scale.len() != d
                || c.scale.iter().any(|row| row.len() != d)
            {
                return Err(Error::invalid(format!("component {i} dimension mismatch")));
            }
        }
        Ok(())
    }
}

/// Draws `n` observations from a mixture.
///
/// The shift is applied after the draw, so for a fixed seed the shifted and
/// unshifted samples differ by exactly the shift vector.
pub fn sample_mixture(spec: &MixtureSpec, n: usize, rng: &mut impl Rng) -> Result<PointSet> {
    spec.validate()?;
    let d = spec.dim();
    let factors: Vec<Cholesky<f64, nalgebra::Dyn>> = spec
        .components
        .iter()
        .map(|c| {
            let m = DMatrix::from_fn(d, d, |i, j| c.scale[i][j]);
            Cholesky::new(m).ok_or_else(|| {
                Error::invalid("component scale matrix is not positive definite")
            })
        })
        .collect::<Result<_>>()?;

    let mut out = PointSet::with_capacity(n, d);
    let mut z = DVector::zeros(d);
    for _ in 0..n {
        let u: f64 = rng.random();
        let mut pick = spec.components.len() - 1;
        let mut acc = 0.0;
        for (i, &w) in spec.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                pick = i;
                break;
            }
        }
        for j in 0..d {
            z[j] = StandardNormal.sample(rng);
        }
        let mut x = factors[pick].l() * &z;
        if spec.components[pick].family == Family::Cauchy {
            let c: f64 = StandardNormal.sample(rng);
            x /= c.abs().max(f64::MIN_POSITIVE);
        }
        for j in 0..d {
            // Shift applied as its own addition so a shifted sample equals
            // the unshifted one plus the shift, exactly.
            x[j] += spec.components[pick].location[j];
            x[j] += spec.shift[j];
        }
        out.push(x.as_slice());
    }
    Ok(out)
}

/// A complete simulation experiment: two group designs, sizes, replication
/// count, the analysis configuration, and which modes to run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub control: MixtureSpec,
    pub treatment: MixtureSpec,
    pub n1: usize,
    pub n2: usize,
    pub replicates: usize,
    pub cfg: AnalysisConfig,
    pub modes: Vec<Mode>,
    /// Unit direction scaled by a delta override (`with_delta`).
    pub delta_direction: Vec<f64>,
}

impl ExperimentSpec {
    /// Sets the treatment shift to `delta` times the design's direction.
    pub fn with_delta(mut self, delta: f64) -> Self {
        self.treatment.shift = self
            .delta_direction
            .iter()
            .map(|&v| v * delta)
            .collect();
        self
    }

    pub fn with_replicates(mut self, replicates: usize) -> Self {
        self.replicates = replicates;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.cfg.seed = seed;
        self
    }
}

/// Outcome of one experiment.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentResult {
    /// Fraction of successful replicates rejecting, per mode and test.
    pub rejection_proportion: BTreeMap<Mode, BTreeMap<TestKind, f64>>,
    /// Binomial standard error of each proportion.
    pub standard_error: BTreeMap<Mode, BTreeMap<TestKind, f64>>,
    /// Per-replicate decisions (None for replicates that failed numerically).
    pub decisions: Vec<Option<BTreeMap<Mode, BTreeMap<TestKind, bool>>>>,
    /// Replicates dropped due to numerical failure.
    pub failures: usize,
    pub replicates_used: usize,
    pub base_seed: u64,
}

impl ExperimentResult {
    pub fn proportion(&self, mode: Mode, kind: TestKind) -> Option<f64> {
        self.rejection_proportion.get(&mode)?.get(&kind).copied()
    }
}

/// Runs all replicates of an experiment.
///
/// Each replicate draws fresh samples and analyzes them with its own derived
/// seed; replicates run in parallel and merge by index, so the result does
/// not depend on scheduling. Replicates that fail numerically (heavy-tailed
/// draws can break the mixture fit) are excluded and counted.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    if spec.replicates < 1 {
        return Err(Error::invalid("need at least one replicate"));
    }
    spec.control.validate()?;
    spec.treatment.validate()?;
    if spec.modes.is_empty() {
        return Err(Error::invalid("no analysis modes requested"));
    }

    let base_seed = spec.cfg.seed;
    let replicate_outcomes: Vec<Result<BTreeMap<Mode, BTreeMap<TestKind, bool>>>> = (0..spec
        .replicates)
        .into_par_iter()
        .map(|rep| run_replicate(spec, base_seed, rep as u64))
        .collect();

    let mut decisions = Vec::with_capacity(spec.replicates);
    let mut failures = 0usize;
    for outcome in replicate_outcomes {
        match outcome {
            Ok(d) => decisions.push(Some(d)),
            Err(Error::NumericalFailure(_)) | Err(Error::DegenerateInput(_)) => {
                failures += 1;
                decisions.push(None);
            }
            Err(e) => return Err(e),
        }
    }
    let used = spec.replicates - failures;
    if used == 0 {
        return Err(Error::numerical("every replicate failed"));
    }

    let mut rejection_proportion: BTreeMap<Mode, BTreeMap<TestKind, f64>> = BTreeMap::new();
    let mut standard_error: BTreeMap<Mode, BTreeMap<TestKind, f64>> = BTreeMap::new();
    for d in decisions.iter().flatten() {
        for (&mode, kinds) in d {
            for (&kind, &reject) in kinds {
                *rejection_proportion
                    .entry(mode)
                    .or_default()
                    .entry(kind)
                    .or_insert(0.0) += if reject { 1.0 } else { 0.0 };
            }
        }
    }
    for (mode, kinds) in &mut rejection_proportion {
        for (kind, v) in kinds.iter_mut() {
            *v /= used as f64;
            let se = (*v * (1.0 - *v) / used as f64).sqrt();
            standard_error
                .entry(*mode)
                .or_default()
                .insert(*kind, se);
        }
    }

    Ok(ExperimentResult {
        rejection_proportion,
        standard_error,
        decisions,
        failures,
        replicates_used: used,
        base_seed,
    })
}

fn run_replicate(
    spec: &ExperimentSpec,
    base_seed: u64,
    rep: u64,
) -> Result<BTreeMap<Mode, BTreeMap<TestKind, bool>>> {
    let mut rng = rng_from_seed(derive_seed(base_seed, 0xdead_0000 + rep));
    let x1 = sample_mixture(&spec.control, spec.n1, &mut rng)?;
    let x2 = sample_mixture(&spec.treatment, spec.n2, &mut rng)?;
    let data = TwoSampleData::new(x1, x2)?;
    let mut cfg = spec.cfg.clone();
    cfg.seed = derive_seed(base_seed, 0xcafe_0000 + rep);

    let mut out = BTreeMap::new();
    for &mode in &spec.modes {
        let report = analyze(&data, &cfg, mode)?;
        let mut per_kind = BTreeMap::new();
        for (&kind, _) in &report.outcomes {
            per_kind.insert(kind, report.decision(kind).unwrap_or(false));
        }
        out.insert(mode, per_kind);
    }
    Ok(out)
}

fn gaussian(location: Vec<f64>, scale: Vec<Vec<f64>>) -> MixtureComponent {
    MixtureComponent {
        location,
        scale,
        family: Family::Gaussian,
    }
}

fn cauchy(location: Vec<f64>, scale: Vec<Vec<f64>>) -> MixtureComponent {
    MixtureComponent {
        location,
        scale,
        family: Family::Cauchy,
    }
}

fn univariate_config(alternative: Alternative) -> AnalysisConfig {
    AnalysisConfig {
        alternative,
        test_kinds: [TestKind::T, TestKind::Wmw, TestKind::Ks].into(),
        ..AnalysisConfig::default()
    }
}

fn multivariate_config() -> AnalysisConfig {
    AnalysisConfig {
        test_kinds: [TestKind::Hotelling, TestKind::Coord, TestKind::Spatial].into(),
        ..AnalysisConfig::default()
    }
}

const ALL_MODES: [Mode; 3] = [Mode::Usual, Mode::Method1, Mode::Method2];

/// The built-in simulation designs.
///
/// Each is a named, fully specified experiment; the CLI scales the treatment
/// shift along `delta_direction` via `--delta` and can override replicates
/// and the seed.
pub fn builtin_designs() -> BTreeMap<String, ExperimentSpec> {
    let mut designs = BTreeMap::new();

    // Two sub-populations at 0 and 3 (variance 0.25 each), equal halves of
    // the population; p1/p2 give each sub-population's treatment exposure, so
    // the control group mixes with weights (1-p1, 1-p2) and the treatment
    // group with (p1, p2).
    let intro = |p1: f64, p2: f64, delta: f64| -> ExperimentSpec {
        let comps = vec![
            gaussian(vec![0.0], vec![vec![0.25]]),
            gaussian(vec![3.0], vec![vec![0.25]]),
        ];
        ExperimentSpec {
            control: MixtureSpec {
                components: comps.clone(),
                weights: vec![1.0 - p1, 1.0 - p2],
                shift: vec![0.0],
            },
            treatment: MixtureSpec {
                components: comps,
                weights: vec![p1, p2],
                shift: vec![delta],
            },
            n1: 100,
            n2: 100,
            replicates: 100,
            cfg: univariate_config(Alternative::Greater),
            modes: ALL_MODES.to_vec(),
            delta_direction: vec![1.0],
        }
    };
    designs.insert("intro-false-alarm".to_string(), intro(0.25, 0.75, 0.0));
    designs.insert("intro-masked-effect".to_string(), intro(0.75, 0.25, 1.0));

    // Three univariate components at 0, mu, 2*mu with variance 0.25; control
    // weights (.4, .3, .3), treatment weights (.6, .2, .2); two-sided.
    let table1 = |mu: f64| -> ExperimentSpec {
        let comps = vec![
            gaussian(vec![0.0], vec![vec![0.25]]),
            gaussian(vec![mu], vec![vec![0.25]]),
            gaussian(vec![2.0 * mu], vec![vec![0.25]]),
        ];
        ExperimentSpec {
            control: MixtureSpec {
                components: comps.clone(),
                weights: vec![0.4, 0.3, 0.3],
                shift: vec![0.0],
            },
            treatment: MixtureSpec {
                components: comps,
                weights: vec![0.6, 0.2, 0.2],
                shift: vec![0.0],
            },
            n1: 100,
            n2: 100,
            replicates: 100,
            cfg: univariate_config(Alternative::TwoSided),
            modes: ALL_MODES.to_vec(),
            delta_direction: vec![1.0],
        }
    };
    designs.insert("table1-mu2".to_string(), table1(2.0));
    designs.insert("table1-mu3".to_string(), table1(3.0));

    // Bivariate designs share the scatter with off-diagonal -0.5.
    let sigma = vec![vec![1.0, -0.5], vec![-0.5, 1.0]];

    // Three bivariate components at 0, mu, 2*mu with mu = (3,3); diagonal
    // shift; weights as in table 1.
    let table2 = {
        let comps = vec![
            gaussian(vec![0.0, 0.0], sigma.clone()),
            gaussian(vec![3.0, 3.0], sigma.clone()),
            gaussian(vec![6.0, 6.0], sigma.clone()),
        ];
        ExperimentSpec {
            control: MixtureSpec {
                components: comps.clone(),
                weights: vec![0.4, 0.3, 0.3],
                shift: vec![0.0, 0.0],
            },
            treatment: MixtureSpec {
                components: comps,
                weights: vec![0.6, 0.2, 0.2],
                shift: vec![0.0, 0.0],
            },
            n1: 100,
            n2: 100,
            replicates: 100,
            cfg: multivariate_config(),
            modes: ALL_MODES.to_vec(),
            delta_direction: vec![1.0, 1.0],
        }
    };
    designs.insert("table2-bivariate".to_string(), table2);

    // Same geometry with elliptical Cauchy components and mu = (5,5).
    let table3 = {
        let comps = vec![
            cauchy(vec![0.0, 0.0], sigma.clone()),
            cauchy(vec![5.0, 5.0], sigma.clone()),
            cauchy(vec![10.0, 10.0], sigma.clone()),
        ];
        ExperimentSpec {
            control: MixtureSpec {
                components: comps.clone(),
                weights: vec![0.4, 0.3, 0.3],
                shift: vec![0.0, 0.0],
            },
            treatment: MixtureSpec {
                components: comps,
                weights: vec![0.6, 0.2, 0.2],
                shift: vec![0.0, 0.0],
            },
            n1: 100,
            n2: 100,
            replicates: 100,
            cfg: multivariate_config(),
            modes: ALL_MODES.to_vec(),
            delta_direction: vec![1.0, 1.0],
        }
    };
    designs.insert("table3-cauchy".to_string(), table3);

    // Shift orthogonal to the sub-population axis: mu = (3,3), delta along
    // the y-axis, equal mixing (.3, .4, .3) in both groups.
    let table4 = {
        let comps = vec![
            gaussian(vec![0.0, 0.0], sigma.clone()),
            gaussian(vec![3.0, 3.0], sigma.clone()),
            gaussian(vec![6.0, 6.0], sigma.clone()),
        ];
        ExperimentSpec {
            control: MixtureSpec {
                components: comps.clone(),
                weights: vec![0.3, 0.4, 0.3],
                shift: vec![0.0, 0.0],
            },
            treatment: MixtureSpec {
                components: comps,
                weights: vec![0.3, 0.4, 0.3],
                shift: vec![0.0, 0.0],
            },
            n1: 100,
            n2: 100,
            replicates: 100,
            cfg: multivariate_config(),
            modes: ALL_MODES.to_vec(),
            delta_direction: vec![0.0, 1.0],
        }
    };
    designs.insert("table4-orthogonal".to_string(), table4);

    // Centers off a common line and unequal scatters; shift along y.
    let table5 = {
        let comps = vec![
            gaussian(vec![0.0, 0.0], vec![vec![1.0, 0.0], vec![0.0, 0.5]]),
            gaussian(vec![3.0, 3.0], vec![vec![0.5, 0.0], vec![0.0, 1.0]]),
            gaussian(vec![6.0, 0.0], vec![vec![1.0, 0.0], vec![0.0, 0.5]]),
        ];
        ExperimentSpec {
            control: MixtureSpec {
                components: comps.clone(),
                weights: vec![0.3, 0.4, 0.3],
                shift: vec![0.0, 0.0],
            },
            treatment: MixtureSpec {
                components: comps,
                weights: vec![0.3, 0.4, 0.3],
                shift: vec![0.0, 0.0],
            },
            n1: 100,
            n2: 100,
            replicates: 100,
            cfg: multivariate_config(),
            modes: ALL_MODES.to_vec(),
            delta_direction: vec![0.0, 1.0],
        }
    };
    designs.insert("table5-unequal-scale".to_string(), table5);

    // Composition stress in the style of the synthetic benchmark: two
    // bivariate clusters separated along x, treatment effect along y, both
    // groups drawn from the same population but with opposite cluster
    // weights (20:10 vs 10:20 out of 30).
    let synthetic = {
        let quarter_eye = vec![vec![0.25, 0.0], vec![0.0, 0.25]];
        let comps = vec![
            gaussian(vec![0.0, 0.0], quarter_eye.clone()),
            gaussian(vec![3.0, 0.0], quarter_eye),
        ];
        ExperimentSpec {
            control: MixtureSpec {
                components: comps.clone(),
                weights: vec![2.0 / 3.0, 1.0 / 3.0],
                shift: vec![0.0, 0.0],
            },
            treatment: MixtureSpec {
                components: comps,
                weights: vec![1.0 / 3.0, 2.0 / 3.0],
                shift: vec![0.0, 0.0],
            },
            n1: 30,
            n2: 30,
            replicates: 200,
            cfg: multivariate_config(),
            modes: ALL_MODES.to_vec(),
            delta_direction: vec![0.0, 1.0],
        }
    };
    designs.insert("synthetic-stress".to_string(), synthetic);

    designs
}
