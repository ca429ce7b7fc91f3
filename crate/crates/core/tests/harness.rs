use std::fs;

use seqcode::cluster::LatencyModel;
use seqcode::harness::experiment::parse_summary_csv;
use seqcode::harness::{
    derive_seed, parse_trace, run_experiment, write_outputs, ConfigChoice, ExperimentConfig, ExperimentSummary,
    MatrixKind, MatrixSource, PhaseSpec, Preset, ProblemSpec,
};

fn small(seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        preset: None,
        workers: 3,
        rows_per_worker: 3,
        configuration: ConfigChoice::Explicit(vec![1, 2, 3]),
        baseline_configuration: ConfigChoice::Auto,
        latency: LatencyModel::Exponential { rate: 1.0 },
        seed,
        replications: 4,
        trace_replications: 4,
        problem: ProblemSpec {
            rows: 6,
            cols: 12,
            rank: 6,
            gamma: 0.05,
            source: MatrixSource::Random(MatrixKind::Uniform),
        },
        phases: vec![PhaseSpec::new(1, 15), PhaseSpec::new(3, 30), PhaseSpec::new(6, 300)],
        stop_below: None,
        baseline_iterations: 300,
        baseline_stop_below: None,
        charge_second_round: false,
        thresholds: vec![1.0, 1e-2],
        output: None,
    }
}

#[test]
fn written_traces_are_byte_identical_across_runs() {
    let exp = small(99).validate().unwrap();
    let dir = tempfile::tempdir().unwrap();
    for name in ["a", "b"] {
        write_outputs(&run_experiment(&exp).unwrap(), &dir.path().join(name)).unwrap();
    }
    for file in ["trace.csv", "summary.csv", "report.txt"] {
        let a = fs::read(dir.path().join("a").join(file)).unwrap();
        let b = fs::read(dir.path().join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file}");
    }
    let other = run_experiment(&small(100).validate().unwrap()).unwrap();
    assert_ne!(
        other.trace_csv(),
        fs::read_to_string(dir.path().join("a/trace.csv")).unwrap()
    );
}

#[test]
fn trace_rows_satisfy_run_invariants() {
    let report = run_experiment(&small(7).validate().unwrap()).unwrap();
    let rows = parse_trace(&report.trace_csv()).unwrap();
    assert_eq!(rows.len(), 4 * (345 + 300));
    let mut by_run: std::collections::BTreeMap<&str, Vec<_>> = Default::default();
    for r in &rows {
        by_run.entry(r.run_id.as_str()).or_default().push(r);
    }
    assert_eq!(by_run.len(), 8);
    for run in by_run.values() {
        let mut cum = 0.0;
        for (i, r) in run.iter().enumerate() {
            assert_eq!(r.record.iteration, i + 1);
            assert!(r.record.iter_time > 0.0);
            cum += r.record.iter_time;
            assert!((r.record.cum_time - cum).abs() <= 1e-9 * cum);
            assert!(r.record.suboptimality >= -1e-9);
        }
        if run[0].algorithm == "sequential" {
            let phases: Vec<usize> = run.iter().map(|r| r.record.phase).collect();
            assert_eq!(phases.iter().filter(|&&p| p == 1).count(), 15);
            assert_eq!(phases.iter().filter(|&&p| p == 2).count(), 30);
            assert!(phases.windows(2).all(|w| w[0] <= w[1]));
        } else {
            assert!(run.iter().all(|r| r.record.phase == 1));
        }
    }
}

#[test]
fn summary_is_recomputable_from_written_csv() {
    let report = run_experiment(&small(3).validate().unwrap()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_outputs(&report, dir.path()).unwrap();
    let text = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    let (thresholds, pairs) = parse_summary_csv(&text).unwrap();
    assert_eq!(pairs.len(), 4);
    let again = ExperimentSummary::from_runs(pairs.iter().map(|(s, b)| (s, b)), &thresholds);
    assert_eq!(again, report.summary());
}

#[test]
fn preset_label_only_when_parameters_match() {
    for preset in [Preset::Example1, Preset::Example2] {
        let mut c = preset.config();
        c.seed = 12;
        c.replications = 3;
        c.output = Some("elsewhere".into());
        assert_eq!(c.label(), preset.name());
        assert!(c.validate().is_ok());
        let mut changed = c.clone();
        changed.problem.gamma = 4.0;
        assert_eq!(changed.label(), "custom");
        let mut changed = c.clone();
        changed.phases[0].iterations += 1;
        assert_eq!(changed.label(), "custom");
        let mut changed = c;
        changed.latency = LatencyModel::Exponential { rate: 2.0 };
        assert_eq!(changed.label(), "custom");
    }
}

#[test]
fn invalid_configurations_are_rejected() {
    let mut c = small(1);
    c.configuration = ConfigChoice::Explicit(vec![3, 3, 0]);
    assert!(c.validate().is_err());
    let mut c = small(1);
    c.phases = vec![PhaseSpec::new(4, 10)];
    assert!(c.validate().is_ok());
    c.phases = vec![PhaseSpec::new(7, 10)];
    assert!(c.validate().is_err());
    let mut c = small(1);
    c.problem.rank = 7;
    assert!(c.validate().is_err());
    let mut c = small(1);
    c.problem.gamma = -1.0;
    assert!(c.validate().is_err());
    let mut c = small(1);
    c.latency = LatencyModel::Exponential { rate: 0.0 };
    assert!(c.validate().is_err());
}

#[test]
fn config_file_with_matrix_files_runs() {
    let dir = tempfile::tempdir().unwrap();
    let rows: Vec<String> = (0..4)
        .map(|i| {
            (0..8)
                .map(|j| format!("{}", ((i * 7 + j * 3) % 11) as f64 / 5.0 - 1.0 + (i == j) as u8 as f64))
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect();
    fs::write(dir.path().join("f.txt"), rows.join("\n")).unwrap();
    fs::write(dir.path().join("b.txt"), "1\n-2\n0.5\n3\n").unwrap();
    let cfg = r#"
seed = 4
replications = 2

[cluster]
workers = 2
rows_per_worker = 4
configuration = [2, 2]

[latency]
kind = "exponential"
rate = 1.5

[problem]
rows = 4
cols = 8
rank = 4
gamma = 0.1
matrix = "file"
f_file = "f.txt"
b_file = "b.txt"

[schedule]
phases = [[2, 20], [4, 200]]
thresholds = [0.01]

[baseline]
iterations = 200
"#;
    let path = dir.path().join("run.toml");
    fs::write(&path, cfg).unwrap();
    let c = ExperimentConfig::from_file(&path).unwrap();
    assert_eq!(c.label(), "custom");
    assert_eq!(c.seed, 4);
    let report = run_experiment(&c.validate().unwrap()).unwrap();
    assert_eq!(report.replications.len(), 2);
    assert!(report.render().contains("custom"));

    fs::write(&path, "[cluster]\nworkers = 2\nbogus = 1\n").unwrap();
    assert!(ExperimentConfig::from_file(&path).is_err());
    assert!(ExperimentConfig::from_file(&dir.path().join("missing.toml")).is_err());
}

#[test]
fn derived_seeds_are_distinct() {
    let mut seen = std::collections::HashSet::new();
    for seed in 0..20 {
        for rep in 0..50 {
            assert!(seen.insert(derive_seed(seed, rep)));
        }
    }
    assert_eq!(derive_seed(5, 3), derive_seed(5, 3));
}
