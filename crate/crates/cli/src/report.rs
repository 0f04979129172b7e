//! Structured and human-readable rendering of analysis and experiment
//! results.
//!
//! The structured document is pure serde output over deterministic
//! containers, so re-running a command with the provenance it records
//! reproduces the bytes exactly.

use serde::Serialize;
use subpop::pipeline::{AnalysisConfig, AnalysisReport, Mode, TestKind};
use subpop::simgen::{ExperimentResult, ExperimentSpec};

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub version: String,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    /// SHA-256 of the raw input bytes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_digest: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub design: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    pub seed: u64,
}

impl Provenance {
    pub fn new(command: &str, seed: u64) -> Self {
        Provenance {
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            input: None,
            input_digest: None,
            design: None,
            delta: None,
            seed,
        }
    }
}

/// Full document for an `analyze` run.
#[derive(Debug, Serialize)]
pub struct AnalysisDocument {
    pub provenance: Provenance,
    pub config: AnalysisConfig,
    pub control_label: String,
    pub treatment_label: String,
    pub feature_names: Vec<String>,
    pub n1: usize,
    pub n2: usize,
    pub dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pca_explained_fraction: Option<f64>,
    pub report: AnalysisReport,
}

/// Full document for an `experiment` run.
#[derive(Debug, Serialize)]
pub struct ExperimentDocument {
    pub provenance: Provenance,
    pub spec: ExperimentSpec,
    pub result: ExperimentResult,
}

pub fn render_analysis_table(doc: &AnalysisDocument) -> String {
    let mut out = String::new();
    let r = &doc.report;
    out.push_str(&format!(
        "mode: {}   groups: {} (control, n={}) vs {} (treatment, n={})   dim: {}\n",
        r.mode, doc.control_label, doc.n1, doc.treatment_label, doc.n2, doc.dim
    ));
    if let Some(frac) = doc.pca_explained_fraction {
        out.push_str(&format!(
            "pca: first component explains {:.1}% of total variance\n",
            100.0 * frac
        ));
    }
    if let Some(sel) = &r.k_selection {
        out.push_str(&format!(
            "clusters: k1={} k2={} -> k0={}\n",
            sel.k1(),
            sel.k2(),
            sel.k0
        ));
    }
    if !r.assignment_summary.is_empty() {
        out.push_str("cluster composition (control/treatment):");
        for c in &r.assignment_summary {
            out.push_str(&format!("  [{}] {}/{}", c.cluster, c.control, c.treatment));
        }
        out.push('\n');
    }
    if r.guard_triggered {
        out.push_str(
            "guard: a cluster is dominated by one group; fell back to usual tests on raw data\n",
        );
    }
    out.push_str(&format!(
        "{:<10} {:>12} {:>10} {:>12} {:>7} {:>8}\n",
        "test", "statistic", "p-value", "method", "reject", "phi"
    ));
    for (kind, o) in &r.outcomes {
        let phi = r
            .phi
            .as_ref()
            .and_then(|m| m.get(kind))
            .map(|p| format!("{p:.3}"))
            .unwrap_or_else(|| "-".to_string());
        let decision = r.decision(*kind).unwrap_or(o.reject);
        out.push_str(&format!(
            "{:<10} {:>12.4} {:>10.4} {:>12} {:>7} {:>8}\n",
            kind.to_string(),
            o.statistic,
            o.p_value,
            format!("{:?}", o.p_method).to_lowercase(),
            if decision { "yes" } else { "no" },
            phi,
        ));
    }
    out
}

pub fn render_experiment_table(doc: &ExperimentDocument) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "design: {}   delta: {}   replicates: {} (failures: {})   seed: {}\n",
        doc.provenance.design.as_deref().unwrap_or("custom"),
        doc.provenance.delta.unwrap_or(0.0),
        doc.result.replicates_used + doc.result.failures,
        doc.result.failures,
        doc.provenance.seed,
    ));
    out.push_str(&format!(
        "{:<10} {:<10} {:>9} {:>9}\n",
        "mode", "test", "reject", "se"
    ));
    for (mode, kinds) in &doc.result.rejection_proportion {
        for (kind, prop) in kinds {
            let se = doc
                .result
                .standard_error
                .get(mode)
                .and_then(|m| m.get(kind))
                .copied()
                .unwrap_or(0.0);
            out.push_str(&format!(
                "{:<10} {:<10} {:>9.3} {:>9.3}\n",
                mode.to_string(),
                kind.to_string(),
                prop,
                se
            ));
        }
    }
    out
}

/// Deterministic pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable document");
    s.push('\n');
    s
}

/// Human-readable mode list for usage errors.
pub fn mode_names() -> String {
    [Mode::Usual, Mode::Method1, Mode::Method2]
        .map(|m| m.to_string())
        .join(", ")
}

/// Human-readable test list for usage errors.
pub fn test_names() -> String {
    TestKind::all().map(|k| k.to_string()).join(", ")
}
