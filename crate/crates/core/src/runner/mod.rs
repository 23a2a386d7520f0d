//! Experiment runner: configuration, execution, and artifact output.

pub mod artifacts;
pub mod config;
pub mod experiments;
pub mod stats;
pub mod svg;

pub use artifacts::{emit_artifacts, read_manifest, Artifact, Manifest, ManifestEntry};
pub use config::{AblationConfig, BanditGridConfig, ExperimentKind, RunConfig};
pub use experiments::{
    run, run_bandit_grid, run_bias_comparison, run_jobs, run_k_ablation, AblationRow,
    BanditGridReport, BiasComparisonReport, Curve, GroupSummary, HeatmapResult, KAblationReport,
    Report, RunRecord, RunSpec,
};

use crate::error::Result;

/// Runs the configured experiment and writes its artifacts and manifest to
/// `cfg.output_dir`.
pub fn execute(cfg: &RunConfig) -> Result<(Report, Manifest)> {
    let report = run(cfg)?;
    let manifest = emit_artifacts(report.artifacts(), &cfg.output_dir)?;
    Ok((report, manifest))
}
