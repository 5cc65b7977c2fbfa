use std::fs;

use apocalift::harness::{execute, format_matrix, parse_matrix, read_jsonl, run_experiment};
use apocalift::{ExperimentConfig, LiftKind, SolverKind};

#[test]
fn run_experiment_writes_what_execute_computes() {
    let dir = tempfile::tempdir().unwrap();
    for (solver, lift) in [(SolverKind::P2gd, LiftKind::Lr), (SolverKind::Hrtr, LiftKind::Stiefel)] {
        let mut cfg = ExperimentConfig::apocalypse_demo(solver, lift);
        cfg.output = dir.path().join(format!("{solver:?}"));
        let summary = run_experiment(&cfg).unwrap();
        let (again, records) = execute(&cfg).unwrap();
        assert_eq!(summary.final_f, again.final_f);

        let written = read_jsonl(&fs::read_to_string(cfg.output.join("trace.jsonl")).unwrap()).unwrap();
        assert_eq!(written, records);
        let text = fs::read_to_string(cfg.output.join("summary.json")).unwrap();
        assert!(text.ends_with('\n'));
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed["iterations"].as_u64(), Some(summary.iterations as u64));
        assert_eq!(parsed["final_f"].as_f64(), Some(summary.final_f));
    }
}

#[test]
fn matrix_text_round_trip() {
    let x = apocalift::linalg::diag(&[1.0 / 3.0, -2.5e-17, 7.0]);
    assert_eq!(parse_matrix(&format_matrix(&x)).unwrap(), x);
    assert!(parse_matrix("2 2\n1 2\n3\n").is_err());
}
