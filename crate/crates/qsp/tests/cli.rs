use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use qsp::commands::ExperimentRecord;
use qsp::files;

fn qsp(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsp"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = qsp(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn small_config(dir: &Path) -> String {
    let path = dir.join("small.toml");
    fs::write(
        &path,
        "seed = 3\n\n[uncertainty]\nscenarios = 4\nn_data = 300\nn_test = 40\n\n[qgan]\nepochs = 60\n\n[qaoa]\np1 = 2\np2 = 2\nmax_evals = 60\n",
    )
    .unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn gen_data_writes_the_full_set_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["gen-data"]);
    let data = dir.path().join("out/data");
    let mut names: Vec<String> = fs::read_dir(&data)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names.len(), 31);
    assert_eq!(names.iter().filter(|n| n.starts_with("samples_")).count(), 15);
    assert_eq!(names.iter().filter(|n| n.starts_with("dist_")).count(), 15);
    assert!(names.contains(&"test_set.csv".to_string()));

    let before: Vec<Vec<u8>> = names.iter().map(|n| fs::read(data.join(n)).unwrap()).collect();
    ok(dir.path(), &["gen-data"]);
    let after: Vec<Vec<u8>> = names.iter().map(|n| fs::read(data.join(n)).unwrap()).collect();
    assert!(before == after);

    let test = files::read_test_set(&data.join("test_set.csv")).unwrap();
    assert_eq!(test.xi.len(), 200);
    let grid = files::read_grid(&data.join("dist_03.csv")).unwrap();
    assert_eq!(grid.xi.len(), 32);
    assert!((grid.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn tiny_data_config() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("tiny.toml"), "[uncertainty]\nn_data = 10\nn_test = 5\n").unwrap();
    ok(dir.path(), &["gen-data", "--config", "tiny.toml"]);
    let samples = files::read_samples(&dir.path().join("out/data/samples_00.csv")).unwrap();
    assert_eq!(samples.len(), 10);
    assert!(samples.iter().all(|v| (0.0..=2500.0).contains(v)));
}

#[test]
fn full_small_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = small_config(d);
    ok(d, &["gen-data", "--config", &cfg]);
    ok(d, &["train-qgan", "--config", &cfg]);
    ok(d, &["baselines", "--config", &cfg, "--lambdas", "30"]);
    ok(d, &["run", "--config", &cfg, "--lambdas", "30", "--seeds", "5"]);
    let first = fs::read(d.join("out/records.jsonl")).unwrap();
    let records: Vec<ExperimentRecord> = files::read_jsonl(&d.join("out/records.jsonl")).unwrap();
    assert_eq!(records.len(), 5);
    for r in &records {
        assert_eq!(r.lambda, 30.0);
        assert_eq!(r.map.len(), 3);
        assert!(r.map.chars().all(|c| c == '0' || c == '1'));
        assert!(r.expected_cost >= r.rp);
        assert!(r.rp <= r.eev);
        assert!((r.marginal.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
    // same config, same bytes
    ok(d, &["run", "--config", &cfg, "--lambdas", "30", "--seeds", "5"]);
    assert!(first == fs::read(d.join("out/records.jsonl")).unwrap());

    let table = ok(d, &["report", "--config", &cfg]);
    assert!(table.contains("30"));
    let report = fs::read_to_string(d.join("out/report.csv")).unwrap();
    assert!(report.starts_with("lambda,runs,mean_cost,min_cost,max_cost,rp,eev\n"));
    assert_eq!(report.lines().count(), 2);

    let baselines = fs::read_to_string(d.join("out/baselines.csv")).unwrap();
    assert!(baselines.starts_with("lambda,rp,eev,x_rp,x_ev,cost_000,"));
}

#[test]
fn four_scenario_generator_fits_well() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("n4.toml"), "[uncertainty]\nscenarios = 4\n").unwrap();
    ok(dir.path(), &["gen-data", "--config", "n4.toml"]);
    ok(dir.path(), &["train-qgan", "--config", "n4.toml"]);
    let g = files::read_generator(&dir.path().join("out/generator.json")).unwrap();
    assert_eq!(g.n_xi(), 2);
    assert!(g.test_score >= 0.99, "{}", g.test_score);
}

#[test]
fn resources_cover_every_scenario_count() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["resources"]);
    let text = fs::read_to_string(dir.path().join("out/resources.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "panel,N,M,p1,p2,include_qgan,rz,sx,x,cx,total,depth");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    for panel in ["qgan_only", "first_stage_depth", "second_stage_depth"] {
        for n in ["4", "8", "16", "32", "64"] {
            assert!(rows.iter().any(|r| r[0] == panel && r[1] == n), "{panel} {n}");
        }
    }
    assert!(rows.iter().any(|r| r[0] == "units"));
}

#[test]
fn missing_inputs_and_bad_config_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(qsp(d, &["train-qgan"]).status.code(), Some(2));
    assert_eq!(qsp(d, &["run"]).status.code(), Some(2));

    fs::create_dir_all(d.join("out")).unwrap();
    fs::write(d.join("out/records.jsonl"), "").unwrap();
    let out = qsp(d, &["report"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no records"));

    fs::write(d.join("bad.toml"), "[uncertainty]\nscenarios = 12\n").unwrap();
    assert_eq!(qsp(d, &["gen-data", "--config", "bad.toml"]).status.code(), Some(2));
    fs::write(d.join("typo.toml"), "[qaoa]\ndepth = 3\n").unwrap();
    assert_eq!(qsp(d, &["gen-data", "--config", "typo.toml"]).status.code(), Some(2));
    assert_eq!(qsp(d, &["baselines", "--lambdas=-5"]).status.code(), Some(2));
}

#[test]
fn records_below_rp_are_an_invariant_violation() {
    let dir = tempfile::tempdir().unwrap();
    let r = ExperimentRecord {
        lambda: 30.0,
        seed: 0,
        map: "111".into(),
        expected_cost: 10.0,
        rp: 20.0,
        eev: 30.0,
        objective: 0.0,
        evaluations: 1,
        marginal: vec![0.0; 8],
        initial_objective: 0.0,
    };
    files::write_jsonl(&dir.path().join("records.jsonl"), &[r]).unwrap();
    let out = qsp(dir.path(), &["report", "records.jsonl"]);
    assert_eq!(out.status.code(), Some(1));
}
