use std::path::Path;

use cmdqn::agent::BiasType;
use cmdqn::envs::EnvConfig;
use cmdqn::runner::{emit_artifacts, execute, read_manifest, ExperimentKind, Report, RunConfig};
use cmdqn::Error;
use sha2::{Digest, Sha256};

fn small(kind: ExperimentKind, out: &Path) -> RunConfig {
    let mut cfg = RunConfig::defaults(kind, EnvConfig::lineworld());
    cfg.output_dir = out.to_path_buf();
    cfg.seeds = vec![0, 1];
    cfg.parallel = 2;
    cfg.agent.episodes = 6;
    cfg.agent.max_steps_per_episode = 30;
    cfg.agent.mlp_width = 8;
    cfg.agent.batch_size = 8;
    cfg.agent.buffer_capacity = 100;
    cfg.final_window = 3;
    cfg.bandit.rate_step = 0.25;
    cfg.bandit.rate_max = 0.75;
    cfg.bandit.trials = 4;
    cfg.bandit.trial_length = 30;
    cfg.ablation.k_values = vec![0.0, 0.1];
    cfg
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    out.sort();
    out
}

#[test]
fn manifest_lists_every_file_with_its_hash() {
    for kind in [
        ExperimentKind::BanditGrid,
        ExperimentKind::BiasCompare,
        ExperimentKind::KAblation,
    ] {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small(kind, dir.path());
        cfg.trace = true;
        let (_, manifest) = execute(&cfg).unwrap();
        assert_eq!(read_manifest(dir.path()).unwrap(), manifest);

        let mut on_disk: Vec<String> = walk(dir.path())
            .into_iter()
            .map(|p| {
                p.strip_prefix(dir.path())
                    .unwrap()
                    .to_string_lossy()
                    .replace('\\', "/")
            })
            .filter(|p| p != "manifest.json")
            .collect();
        on_disk.sort();
        let listed: Vec<String> = manifest.files.iter().map(|f| f.path.clone()).collect();
        assert_eq!(listed, on_disk, "{kind:?}");
        for f in &manifest.files {
            let bytes = std::fs::read(dir.path().join(&f.path)).unwrap();
            assert_eq!(f.sha256, hex::encode(Sha256::digest(&bytes)), "{}", f.path);
            assert_eq!(f.bytes, bytes.len() as u64);
        }
        assert!(listed.iter().any(|p| p.ends_with(".svg")));
        assert!(listed.contains(&"config.toml".to_string()));
        if kind != ExperimentKind::BanditGrid {
            assert!(listed.iter().any(|p| p.starts_with("traces/")));
            assert!(listed.iter().any(|p| p.starts_with("checkpoints/")));
            assert!(listed.iter().any(|p| p.starts_with("logs/")));
        }
    }
}

fn walk(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out
}

#[test]
fn reruns_reproduce_csv_bytes() {
    for kind in [
        ExperimentKind::BanditGrid,
        ExperimentKind::BiasCompare,
        ExperimentKind::KAblation,
    ] {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        execute(&small(kind, a.path())).unwrap();
        let mut serial = small(kind, b.path());
        serial.parallel = 1;
        execute(&serial).unwrap();
        let (ca, cb) = (csv_files(a.path()), csv_files(b.path()));
        assert!(!ca.is_empty());
        assert_eq!(ca, cb, "{kind:?}");
    }
}

#[test]
fn single_cell_grid_is_byte_stable() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        let mut cfg = small(ExperimentKind::BanditGrid, dir);
        cfg.bandit.rate_step = 0.5;
        cfg.bandit.rate_max = 0.5;
        cfg.bandit.trials = 1;
        cfg.seeds = vec![0];
        let (report, _) = execute(&cfg).unwrap();
        let Report::BanditGrid(r) = report else {
            panic!()
        };
        assert_eq!(r.heatmap.matrix.len(), 1);
    }
    assert_eq!(csv_files(a.path()), csv_files(b.path()));
}

#[test]
fn config_snapshot_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(ExperimentKind::KAblation, dir.path());
    cfg.agent.two_phase_updates = true;
    cfg.env = EnvConfig::landerlite();
    cfg.agent.episodes = 2;
    cfg.agent.max_steps_per_episode = 20;
    cfg.seeds = vec![4];
    execute(&cfg).unwrap();
    let snapshot = std::fs::read_to_string(dir.path().join("config.toml")).unwrap();
    let parsed = RunConfig::from_toml(&snapshot, None).unwrap();
    assert_eq!(parsed, cfg);
    assert_eq!(parsed.to_toml().unwrap(), snapshot);
}

#[test]
fn bias_comparison_reports_three_rows() {
    let dir = tempfile::tempdir().unwrap();
    let (report, _) = execute(&small(ExperimentKind::BiasCompare, dir.path())).unwrap();
    let Report::BiasComparison(r) = report else {
        panic!()
    };
    let biases: Vec<BiasType> = r.summary.iter().map(|s| s.bias).collect();
    assert_eq!(biases, BiasType::ALL.to_vec());
    assert!(r.summary.iter().all(|s| s.seeds == 2));
    assert!(r.curves.iter().all(|c| c.mean.len() == 6));
    let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 4);
    assert!(summary.starts_with(
        "bias,k,seeds,final_window_mean,final_window_min,final_window_max,all_episode_mean"
    ));
    let curves = std::fs::read_to_string(dir.path().join("curves.csv")).unwrap();
    assert_eq!(curves.lines().count(), 1 + 3 * 6);
}

#[test]
fn ablation_table_is_bounded_by_the_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(ExperimentKind::KAblation, dir.path());
    cfg.ablation.k_values = vec![0.0, 0.05, 0.1];
    let (report, _) = execute(&cfg).unwrap();
    let Report::KAblation(r) = report else {
        panic!()
    };
    assert_eq!(r.rows.len(), 4);
    assert!(r
        .rows
        .iter()
        .all(|row| row.all_episode_mean <= 0.9 + 1e-12 && row.final_window_mean <= 0.9 + 1e-12));
    assert_eq!(
        r.row_for_k(0.0).unwrap().all_episode_mean,
        r.reference().unwrap().all_episode_mean
    );
    let table = std::fs::read_to_string(dir.path().join("k_ablation.csv")).unwrap();
    assert_eq!(table.lines().count(), 5);
}

#[test]
fn empty_results_write_nothing() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(
        emit_artifacts(&[], dir.path()),
        Err(Error::EmptyResults)
    ));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn invalid_configs_are_rejected_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(ExperimentKind::BiasCompare, dir.path());
    cfg.seeds.clear();
    assert!(execute(&cfg).is_err());
    let mut cfg = small(ExperimentKind::KAblation, dir.path());
    cfg.ablation.k_values = vec![1.0];
    assert!(execute(&cfg).is_err());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}
