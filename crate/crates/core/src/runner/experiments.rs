//! The three experiments. Each returns its numeric result together with the
//! artifacts to write; [`super::execute`] writes them.
//!
//! CSV headers:
//!
//! | file | columns |
//! |---|---|
//! | `heatmap.csv` | `alpha_c, alpha_d, mean_step_reward, mean_total_reward` |
//! | `heatmap_matrix.csv` | `alpha_c` then one column per `alpha_d`; cells hold the mean per-step reward |
//! | `summary.csv` (bandit grid) | `statistic, value` |
//! | `curves.csv` | `episode, bias, mean, min, max` (test return over seeds) |
//! | `runs.csv` | `run_id, bias, k, seed, final_window_mean, all_episode_mean` |
//! | `summary.csv` (bias comparison) | `bias, k, seeds, final_window_mean, final_window_min, final_window_max, all_episode_mean` |
//! | `k_ablation.csv` | `label, bias, k, seeds, all_episode_mean, final_window_mean, final_window_min, final_window_max` |

use serde::Serialize;

use super::artifacts::{csv_bytes, jsonl_bytes, Artifact};
use super::config::{ExperimentKind, RunConfig};
use super::{stats, svg};
use crate::agent::{train_run, BiasType, EpisodeLog, TraceStep};
use crate::bandit::{grid_search, rate_axis, rate_grid, ArmConfig, GridSpec};
use crate::error::{Error, Result};
use crate::par::{self, Parallelism};
use crate::rng::derive_seed;

#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapResult {
    pub alpha_c_axis: Vec<f64>,
    pub alpha_d_axis: Vec<f64>,
    /// `matrix[i][j]` is the mean per-step reward at
    /// `(alpha_c_axis[i], alpha_d_axis[j])`, averaged over trials and seeds.
    pub matrix: Vec<Vec<f64>>,
    /// Same layout, mean total reward per trial.
    pub total_matrix: Vec<Vec<f64>>,
    pub trials_per_cell: usize,
    pub seeds: usize,
}

impl HeatmapResult {
    fn cells(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.alpha_c_axis
            .iter()
            .enumerate()
            .flat_map(move |(i, &c)| {
                self.alpha_d_axis
                    .iter()
                    .enumerate()
                    .map(move |(j, &d)| (c, d, self.matrix[i][j]))
            })
    }

    /// Mean per-step reward over the cells with `alpha_c > alpha_d`.
    pub fn confirmatory_region_mean(&self) -> f64 {
        let v: Vec<f64> = self
            .cells()
            .filter(|(c, d, _)| c > d)
            .map(|x| x.2)
            .collect();
        stats::mean(&v)
    }

    /// Mean per-step reward over the cells with `alpha_c < alpha_d`.
    pub fn disconfirmatory_region_mean(&self) -> f64 {
        let v: Vec<f64> = self
            .cells()
            .filter(|(c, d, _)| c < d)
            .map(|x| x.2)
            .collect();
        stats::mean(&v)
    }

    /// Spearman correlation between `alpha_c + alpha_d` and cell reward.
    pub fn rate_sum_spearman(&self) -> f64 {
        let (sums, values): (Vec<f64>, Vec<f64>) = self.cells().map(|(c, d, v)| (c + d, v)).unzip();
        stats::spearman(&sums, &values)
    }
}

#[derive(Debug, Clone)]
pub struct BanditGridReport {
    pub heatmap: HeatmapResult,
    pub artifacts: Vec<Artifact>,
}

#[derive(Serialize)]
struct HeatmapRow {
    alpha_c: f64,
    alpha_d: f64,
    mean_step_reward: f64,
    mean_total_reward: f64,
}

#[derive(Serialize)]
struct StatRow<'a> {
    statistic: &'a str,
    value: f64,
}

pub fn run_bandit_grid(cfg: &RunConfig) -> Result<BanditGridReport> {
    let b = &cfg.bandit;
    let arms = ArmConfig::new(b.arms.clone())?;
    let axis = rate_axis(b.rate_step, b.rate_max);
    let n = axis.len();
    let mut step_sum = vec![vec![0.0; n]; n];
    let mut total_sum = vec![vec![0.0; n]; n];
    for &seed in &cfg.seeds {
        let spec = GridSpec {
            arms: arms.clone(),
            grid: rate_grid(&axis),
            trials: b.trials,
            trial_length: b.trial_length,
            temperature: b.temperature,
            feedback_mode: b.feedback,
            seed: derive_seed(cfg.master_seed, &[seed]),
        };
        let cells = grid_search(&spec, Parallelism(cfg.parallel))?;
        // rate_grid is alpha_c-major
        for (idx, cell) in cells.iter().enumerate() {
            step_sum[idx / n][idx % n] += cell.mean_step_reward;
            total_sum[idx / n][idx % n] += cell.mean_total_reward;
        }
    }
    let s = cfg.seeds.len() as f64;
    let scale = |m: Vec<Vec<f64>>| -> Vec<Vec<f64>> {
        m.into_iter()
            .map(|row| row.into_iter().map(|v| v / s).collect())
            .collect()
    };
    let heatmap = HeatmapResult {
        alpha_c_axis: axis.clone(),
        alpha_d_axis: axis,
        matrix: scale(step_sum),
        total_matrix: scale(total_sum),
        trials_per_cell: b.trials,
        seeds: cfg.seeds.len(),
    };

    let mut rows = Vec::with_capacity(n * n);
    for (i, &c) in heatmap.alpha_c_axis.iter().enumerate() {
        for (j, &d) in heatmap.alpha_d_axis.iter().enumerate() {
            rows.push(HeatmapRow {
                alpha_c: c,
                alpha_d: d,
                mean_step_reward: heatmap.matrix[i][j],
                mean_total_reward: heatmap.total_matrix[i][j],
            });
        }
    }
    let mut matrix_csv = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["alpha_c".to_string()];
    header.extend(heatmap.alpha_d_axis.iter().map(|d| format!("alpha_d={d}")));
    matrix_csv.write_record(&header)?;
    for (i, c) in heatmap.alpha_c_axis.iter().enumerate() {
        let mut record = vec![c.to_string()];
        record.extend(heatmap.matrix[i].iter().map(f64::to_string));
        matrix_csv.write_record(&record)?;
    }
    let matrix_bytes = matrix_csv
        .into_inner()
        .map_err(|e| Error::invalid(format!("csv buffer: {e}")))?;
    let summary = [
        StatRow {
            statistic: "cells",
            value: (n * n) as f64,
        },
        StatRow {
            statistic: "trials_per_cell",
            value: b.trials as f64,
        },
        StatRow {
            statistic: "seeds",
            value: s,
        },
        StatRow {
            statistic: "region_mean_alpha_c_gt_alpha_d",
            value: heatmap.confirmatory_region_mean(),
        },
        StatRow {
            statistic: "region_mean_alpha_c_lt_alpha_d",
            value: heatmap.disconfirmatory_region_mean(),
        },
        StatRow {
            statistic: "spearman_rate_sum_vs_reward",
            value: heatmap.rate_sum_spearman(),
        },
    ];
    let chart = svg::heatmap(
        "Mean reward per step",
        "alpha_C",
        "alpha_D",
        &heatmap.alpha_c_axis,
        &heatmap.alpha_d_axis,
        &heatmap.matrix,
    );
    let artifacts = vec![
        Artifact::new("config.toml", cfg.to_toml()?),
        Artifact::new("heatmap.csv", csv_bytes(&rows)?),
        Artifact::new("heatmap_matrix.csv", matrix_bytes),
        Artifact::new("summary.csv", csv_bytes(&summary)?),
        Artifact::new("heatmap.svg", chart),
    ];
    Ok(BanditGridReport { heatmap, artifacts })
}

/// One (bias, K, seed) training job.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSpec {
    pub bias: BiasType,
    pub k: f64,
    pub seed: u64,
}

impl RunSpec {
    pub fn run_id(&self) -> String {
        format!("{}-k{}-s{}", self.bias, self.k, self.seed)
    }
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub spec: RunSpec,
    pub logs: Vec<EpisodeLog>,
    pub final_window_mean: f64,
    pub all_episode_mean: f64,
    pub checkpoint: String,
    pub trace: Option<Vec<TraceStep>>,
}

impl RunRecord {
    pub fn test_returns(&self) -> Vec<f64> {
        self.logs.iter().map(|l| l.test_return).collect()
    }
}

/// Trains every job, up to `cfg.parallel` at a time. Output order matches
/// `jobs`.
pub fn run_jobs(cfg: &RunConfig, jobs: Vec<RunSpec>) -> Result<Vec<RunRecord>> {
    par::map(jobs, Parallelism(cfg.parallel), |spec| {
        let mut hp = cfg.agent.clone();
        hp.k = spec.k;
        let out = train_run(
            &cfg.env,
            &hp,
            spec.bias,
            cfg.master_seed,
            spec.seed,
            cfg.trace,
        )?;
        Ok(RunRecord {
            spec,
            final_window_mean: out.final_window_mean(cfg.final_window),
            all_episode_mean: out.all_episode_mean(),
            checkpoint: out.agent.q_net.to_json()?,
            logs: out.logs,
            trace: out.trace,
        })
    })
    .into_iter()
    .collect()
}

#[derive(Serialize)]
struct RunRow {
    run_id: String,
    bias: BiasType,
    k: f64,
    seed: u64,
    final_window_mean: f64,
    all_episode_mean: f64,
}

/// Seed-aggregated results for one (bias, K) group.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSummary {
    pub bias: BiasType,
    pub k: f64,
    pub seeds: usize,
    pub final_window_mean: f64,
    pub final_window_min: f64,
    pub final_window_max: f64,
    pub all_episode_mean: f64,
}

fn summarize(bias: BiasType, k: f64, runs: &[&RunRecord]) -> GroupSummary {
    let fw: Vec<f64> = runs.iter().map(|r| r.final_window_mean).collect();
    let all: Vec<f64> = runs.iter().map(|r| r.all_episode_mean).collect();
    GroupSummary {
        bias,
        k,
        seeds: runs.len(),
        final_window_mean: stats::mean(&fw),
        final_window_min: stats::min(&fw),
        final_window_max: stats::max(&fw),
        all_episode_mean: stats::mean(&all),
    }
}

/// Per-run logs, checkpoints and optional traces.
fn run_artifacts(records: &[RunRecord]) -> Result<Vec<Artifact>> {
    let mut out = Vec::new();
    for r in records {
        let id = r.spec.run_id();
        out.push(Artifact::new(
            format!("logs/{id}.jsonl"),
            jsonl_bytes(&r.logs)?,
        ));
        out.push(Artifact::new(
            format!("checkpoints/{id}.json"),
            r.checkpoint.clone(),
        ));
        if let Some(trace) = &r.trace {
            out.push(Artifact::new(
                format!("traces/{id}.jsonl"),
                jsonl_bytes(trace)?,
            ));
        }
    }
    let rows: Vec<RunRow> = records
        .iter()
        .map(|r| RunRow {
            run_id: r.spec.run_id(),
            bias: r.spec.bias,
            k: r.spec.k,
            seed: r.spec.seed,
            final_window_mean: r.final_window_mean,
            all_episode_mean: r.all_episode_mean,
        })
        .collect();
    out.push(Artifact::new("runs.csv", csv_bytes(&rows)?));
    Ok(out)
}

/// Per-episode mean/min/max over seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub bias: BiasType,
    pub mean: Vec<f64>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

fn curve(bias: BiasType, runs: &[&RunRecord]) -> Curve {
    let episodes = runs.iter().map(|r| r.logs.len()).min().unwrap_or(0);
    let mut c = Curve {
        bias,
        mean: Vec::new(),
        min: Vec::new(),
        max: Vec::new(),
    };
    for e in 0..episodes {
        let v: Vec<f64> = runs.iter().map(|r| r.logs[e].test_return).collect();
        c.mean.push(stats::mean(&v));
        c.min.push(stats::min(&v));
        c.max.push(stats::max(&v));
    }
    c
}

#[derive(Serialize)]
struct CurveRow {
    episode: usize,
    bias: BiasType,
    mean: f64,
    min: f64,
    max: f64,
}

#[derive(Debug, Clone)]
pub struct BiasComparisonReport {
    pub records: Vec<RunRecord>,
    pub curves: Vec<Curve>,
    /// One row per bias type, in [`BiasType::ALL`] order.
    pub summary: Vec<GroupSummary>,
    pub artifacts: Vec<Artifact>,
}

pub fn run_bias_comparison(cfg: &RunConfig) -> Result<BiasComparisonReport> {
    let k = cfg.agent.k;
    let jobs: Vec<RunSpec> = BiasType::ALL
        .iter()
        .flat_map(|&bias| cfg.seeds.iter().map(move |&seed| RunSpec { bias, k, seed }))
        .collect();
    let records = run_jobs(cfg, jobs)?;

    let mut curves = Vec::new();
    let mut summary = Vec::new();
    for bias in BiasType::ALL {
        let group: Vec<&RunRecord> = records.iter().filter(|r| r.spec.bias == bias).collect();
        curves.push(curve(bias, &group));
        summary.push(summarize(bias, k, &group));
    }
    let mut rows = Vec::new();
    for c in &curves {
        for e in 0..c.mean.len() {
            rows.push(CurveRow {
                episode: e,
                bias: c.bias,
                mean: c.mean[e],
                min: c.min[e],
                max: c.max[e],
            });
        }
    }
    let series: Vec<svg::Series<'_>> = curves
        .iter()
        .map(|c| svg::Series {
            label: c.bias.label(),
            mean: &c.mean,
            band: Some((&c.min, &c.max)),
        })
        .collect();
    let chart = svg::line_chart(
        &format!(
            "Test return on {} (K = {k}, {} seeds)",
            cfg.env.label(),
            cfg.seeds.len()
        ),
        "episode",
        "test return",
        &series,
    );

    let mut artifacts = vec![
        Artifact::new("config.toml", cfg.to_toml()?),
        Artifact::new("curves.csv", csv_bytes(&rows)?),
        Artifact::new("summary.csv", csv_bytes(&summary)?),
        Artifact::new("curves.svg", chart),
    ];
    artifacts.extend(run_artifacts(&records)?);
    Ok(BiasComparisonReport {
        records,
        curves,
        summary,
        artifacts,
    })
}

/// One row of the K-ablation table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationRow {
    pub label: String,
    pub bias: BiasType,
    pub k: f64,
    pub seeds: usize,
    /// Test return averaged over every episode of every seed.
    pub all_episode_mean: f64,
    pub final_window_mean: f64,
    pub final_window_min: f64,
    pub final_window_max: f64,
}

#[derive(Debug, Clone)]
pub struct KAblationReport {
    pub records: Vec<RunRecord>,
    /// One row per configured K, then the unbiased reference row.
    pub rows: Vec<AblationRow>,
    pub artifacts: Vec<Artifact>,
}

impl KAblationReport {
    pub fn row_for_k(&self, k: f64) -> Option<&AblationRow> {
        self.rows
            .iter()
            .find(|r| r.bias != BiasType::None && r.k == k)
    }

    pub fn reference(&self) -> Option<&AblationRow> {
        self.rows.iter().find(|r| r.bias == BiasType::None)
    }
}

pub fn run_k_ablation(cfg: &RunConfig) -> Result<KAblationReport> {
    let bias = cfg.ablation.bias;
    let mut groups: Vec<(String, BiasType, f64)> = cfg
        .ablation
        .k_values
        .iter()
        .map(|&k| (format!("K={k}"), bias, k))
        .collect();
    // unbiased reference, whose metric the K = 0 row must reproduce
    groups.push(("none".to_string(), BiasType::None, 0.0));

    let jobs: Vec<RunSpec> = groups
        .iter()
        .flat_map(|&(_, bias, k)| cfg.seeds.iter().map(move |&seed| RunSpec { bias, k, seed }))
        .collect();
    let records = run_jobs(cfg, jobs)?;

    let rows: Vec<AblationRow> = groups
        .iter()
        .map(|(label, b, k)| {
            let group: Vec<&RunRecord> = records
                .iter()
                .filter(|r| r.spec.bias == *b && r.spec.k == *k)
                .collect();
            let s = summarize(*b, *k, &group);
            AblationRow {
                label: label.clone(),
                bias: *b,
                k: *k,
                seeds: s.seeds,
                all_episode_mean: s.all_episode_mean,
                final_window_mean: s.final_window_mean,
                final_window_min: s.final_window_min,
                final_window_max: s.final_window_max,
            }
        })
        .collect();

    let labels: Vec<String> = rows.iter().map(|r| r.label.clone()).collect();
    let all: Vec<f64> = rows.iter().map(|r| r.all_episode_mean).collect();
    let finals: Vec<f64> = rows.iter().map(|r| r.final_window_mean).collect();
    let chart = svg::bar_chart(
        &format!(
            "{} bias on {}: test return averaged over all episodes",
            bias,
            cfg.env.label()
        ),
        "bias constraint K",
        "mean test return",
        &labels,
        &all,
    );
    let finals_chart = svg::bar_chart(
        &format!(
            "{} bias on {}: final-window test return",
            bias,
            cfg.env.label()
        ),
        "bias constraint K",
        "mean test return",
        &labels,
        &finals,
    );
    let mut artifacts = vec![
        Artifact::new("config.toml", cfg.to_toml()?),
        Artifact::new("k_ablation.csv", csv_bytes(&rows)?),
        Artifact::new("k_ablation.svg", chart),
        Artifact::new("k_ablation_final_window.svg", finals_chart),
    ];
    artifacts.extend(run_artifacts(&records)?);
    Ok(KAblationReport {
        records,
        rows,
        artifacts,
    })
}

/// Result of any experiment.
#[derive(Debug, Clone)]
pub enum Report {
    BanditGrid(BanditGridReport),
    BiasComparison(BiasComparisonReport),
    KAblation(KAblationReport),
}

impl Report {
    pub fn artifacts(&self) -> &[Artifact] {
        match self {
            Report::BanditGrid(r) => &r.artifacts,
            Report::BiasComparison(r) => &r.artifacts,
            Report::KAblation(r) => &r.artifacts,
        }
    }
}

/// Runs the configured experiment without writing anything.
pub fn run(cfg: &RunConfig) -> Result<Report> {
    cfg.validate()?;
    Ok(match cfg.experiment {
        ExperimentKind::BanditGrid => Report::BanditGrid(run_bandit_grid(cfg)?),
        ExperimentKind::BiasCompare => Report::BiasComparison(run_bias_comparison(cfg)?),
        ExperimentKind::KAblation => Report::KAblation(run_k_ablation(cfg)?),
    })
}
