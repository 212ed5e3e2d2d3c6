use std::fs;
use std::path::Path;
use std::process::Command;

use cvarvi_cli::experiment::{run_experiment, ExperimentSummary, RunOptions, Stats};
use cvarvi_cli::traces::read_trace_dir;
use cvarvi_cli::ExperimentConfig;

fn config(dir: &Path, body: &str) -> ExperimentConfig {
    let text = format!("{body}\nrun.output_dir = \"out\"\n");
    fs::write(dir.join("exp.toml"), &text).unwrap();
    ExperimentConfig::from_toml(&text, dir).unwrap()
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cvarvi"))
}

#[test]
fn toy1_projected_example() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "problem.preset = \"toy1\"\nalgorithm.name = \"projected\"\nsamples.n = 100\nrun.max_iter = 2000\nrun.seeds = [1, 2, 3, 4, 5]",
    );
    let out = run_experiment(&cfg, &RunOptions { jobs: 2, seed_offset: 0 }).unwrap();
    assert_eq!(out.trace_paths.len(), 5);
    let g = &out.summary.groups[0];
    assert_eq!((g.runs, g.completed), (5, 5));
    assert!(g.terminal_error.as_ref().unwrap().mean <= 0.05);
}

#[test]
fn summary_matches_traces() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "problem.preset = \"nash2\"\nalgorithm.name = \"multiplier\"\nsamples.n = [10, 40]\nrun.max_iter = 300\nrun.seeds = [3, 4, 5]",
    );
    run_experiment(&cfg, &RunOptions::default()).unwrap();
    let summary: ExperimentSummary =
        serde_json::from_str(&fs::read_to_string(cfg.output_dir.join("summary.json")).unwrap()).unwrap();
    let traces = read_trace_dir(&cfg.output_dir).unwrap();
    assert_eq!(traces.len(), 6);
    for g in &summary.groups {
        let finals: Vec<f64> = traces.iter().filter(|t| t.samples == g.samples).map(|t| t.rows.last().unwrap().error).collect();
        let recomputed = Stats::of(&finals).unwrap();
        let emitted = g.terminal_error.as_ref().unwrap();
        for (a, b) in [(recomputed.mean, emitted.mean), (recomputed.min, emitted.min), (recomputed.max, emitted.max)] {
            assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
        }
    }
    for r in &summary.runs {
        let t = traces.iter().find(|t| t.samples == r.samples && t.seed == r.seed).unwrap();
        assert_eq!(t.rows.last().unwrap().k, r.iterations);
        assert!(t.rows.iter().all(|row| row.samples == r.samples));
    }
}

#[test]
fn sioux_falls_projected_improves_by_1000() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "problem.preset = \"sioux_falls_cvar\"\nalgorithm.name = \"projected\"\nrun.seeds = [0]");
    assert_eq!(cfg.max_iter, 1000);
    let out = run_experiment(&cfg, &RunOptions::default()).unwrap();
    let t = &read_trace_dir(&cfg.output_dir).unwrap()[0];
    assert!(t.rows.iter().all(|r| r.error.is_finite()));
    assert_eq!(t.rows.last().unwrap().k, 1000);
    assert!(t.rows.last().unwrap().error < t.rows[0].error);
    assert_eq!(out.summary.runs[0].status, "completed");
}

#[test]
fn reference_is_cached() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "problem.preset = \"toy1\"\nalgorithm.name = \"projected\"\nrun.max_iter = 10\nrun.seeds = [0]");
    let first = run_experiment(&cfg, &RunOptions::default()).unwrap();
    let second = run_experiment(&cfg, &RunOptions::default()).unwrap();
    assert!(!first.summary.reference.from_cache);
    assert!(second.summary.reference.from_cache);
    assert_eq!(first.summary.reference.key, second.summary.reference.key);
    let entries: Vec<_> = fs::read_dir(&cfg.cache_dir).unwrap().collect();
    assert_eq!(entries.len(), 1);

    let other = config(
        dir.path(),
        "problem.preset = \"toy1\"\nproblem.alpha = 0.1\nalgorithm.name = \"projected\"\nrun.max_iter = 10\nrun.seeds = [0]",
    );
    let third = run_experiment(&other, &RunOptions::default()).unwrap();
    assert!(!third.summary.reference.from_cache);
    assert_ne!(third.summary.reference.key, first.summary.reference.key);
}

#[test]
fn seed_offset_shifts_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "problem.preset = \"toy1\"\nalgorithm.name = \"projected\"\nsamples.n = 5\nrun.max_iter = 50\nrun.seeds = [1, 2]",
    );
    run_experiment(&cfg, &RunOptions { jobs: 1, seed_offset: 10 }).unwrap();
    let seeds: Vec<u64> = read_trace_dir(&cfg.output_dir).unwrap().iter().map(|t| t.seed).collect();
    assert_eq!(seeds, vec![11, 12]);

    let base = tempfile::tempdir().unwrap();
    let plain = config(
        base.path(),
        "problem.preset = \"toy1\"\nalgorithm.name = \"projected\"\nsamples.n = 5\nrun.max_iter = 50\nrun.seeds = [11]",
    );
    run_experiment(&plain, &RunOptions::default()).unwrap();
    let name = "projected_N5_seed11.csv";
    assert_eq!(fs::read(cfg.output_dir.join(name)).unwrap(), fs::read(plain.output_dir.join(name)).unwrap());
}

#[test]
fn jobs_do_not_change_output() {
    let body = "problem.preset = \"toy1\"\nalgorithm.name = \"subspace\"\nsamples.n = [5, 20]\nrun.max_iter = 200\nrun.seeds = [1, 2, 3]";
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ca = config(a.path(), body);
    let cb = config(b.path(), body);
    run_experiment(&ca, &RunOptions { jobs: 1, seed_offset: 0 }).unwrap();
    run_experiment(&cb, &RunOptions { jobs: 4, seed_offset: 0 }).unwrap();
    for t in read_trace_dir(&ca.output_dir).unwrap() {
        let name = t.path.file_name().unwrap();
        assert_eq!(fs::read(&t.path).unwrap(), fs::read(cb.output_dir.join(name)).unwrap());
    }
}

#[test]
fn binary_run_table_plotdata() {
    let dir = tempfile::tempdir().unwrap();
    config(
        dir.path(),
        "problem.preset = \"toy1\"\nalgorithm.name = \"projected\"\nsamples.n = [25, 50]\nrun.max_iter = 100\nrun.seeds = [1, 2]",
    );
    let st = bin().arg("run").arg(dir.path().join("exp.toml")).args(["--jobs", "2"]).output().unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    let out_dir = dir.path().join("out");
    assert!(out_dir.join("summary.json").exists());

    let table = bin().arg("table").arg(&out_dir).args(["--thresholds", "0.1,0.05", "--sizes", "25,50"]).output().unwrap();
    assert!(table.status.success());
    let text = String::from_utf8(table.stdout).unwrap();
    assert!(text.starts_with("algorithm"));
    assert!(text.contains("projected"));
    assert!(text.contains("first iterate"));

    let csv = bin().arg("table").arg(&out_dir).args(["--thresholds", "0.1", "--sizes", "25", "--csv"]).output().unwrap();
    assert!(String::from_utf8(csv.stdout).unwrap().starts_with("algorithm,N,threshold"));

    let plot_path = dir.path().join("plot.csv");
    let plot = bin().arg("plotdata").arg(&out_dir).arg("--out").arg(&plot_path).output().unwrap();
    assert!(plot.status.success());
    let plot = fs::read_to_string(plot_path).unwrap();
    assert!(plot.starts_with("algorithm,N,seed,k,error,clamped\n"));
    assert_eq!(plot.lines().count(), 1 + 4 * 101);
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "problem.preset = \"nope\"\n").unwrap();
    let out = bin().arg("run").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope"));

    fs::write(&bad, "problem.preset = \"toy1\"\nrun.bogus = 1\n").unwrap();
    assert_eq!(bin().arg("run").arg(&bad).output().unwrap().status.code(), Some(2));
    assert_eq!(bin().arg("run").arg(dir.path().join("missing.toml")).output().unwrap().status.code(), Some(2));

    fs::write(&bad, "problem.preset = \"toy1\"\nalgorithm.name = \"projected\"\nrun.max_iter = 5\nrun.seeds = [0]\nrun.output_dir = \"out\"\n").unwrap();
    let env = bin().arg("run").arg(&bad).env("CVARVI_SEED_OFFSET", "-3").output().unwrap();
    assert_eq!(env.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&env.stderr).contains("CVARVI_SEED_OFFSET"));

    let missing_dir = bin().args(["table", "/nonexistent/dir", "--thresholds", "0.6", "--sizes", "25"]).output().unwrap();
    assert_eq!(missing_dir.status.code(), Some(1));
}

#[test]
fn presets_list() {
    let out = bin().args(["presets", "list"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["sioux_falls_cvar", "toy1", "nash2"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name}");
    }
}

#[test]
fn tntp_config_runs() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("net.tntp"),
        "<NUMBER OF ZONES> 3\n<NUMBER OF NODES> 3\n<FIRST THRU NODE> 1\n<NUMBER OF LINKS> 3\n<END OF METADATA>\n\n\
~ init term cap len fft b power speed toll type ;\n\
1 2 10 1 1 0.15 4 0 0 1 ;\n\
2 3 10 1 1 0.15 4 0 0 1 ;\n\
1 3 10 1 3 0.15 4 0 0 1 ;\n",
    )
    .unwrap();
    let cfg = config(
        dir.path(),
        "problem.tntp = \"net.tntp\"\nproblem.od = [[1, 3, 2.0]]\nproblem.k_paths = 2\nproblem.noise_nodes = [2]\nproblem.noise = [0.0, 0.5]\nalgorithm.name = \"projected\"\nsamples.n = 20\nrun.max_iter = 300\nrun.seeds = [1]",
    );
    let out = run_experiment(&cfg, &RunOptions::default()).unwrap();
    assert_eq!(out.summary.runs[0].status, "completed");
    let t = &read_trace_dir(&cfg.output_dir).unwrap()[0];
    assert!(t.rows.last().unwrap().error < t.rows[0].error);
}
