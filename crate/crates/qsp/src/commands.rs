//! One function per subcommand. Each reads its inputs from the output
//! directory named in the config and writes its results there.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use qsp_core::baselines::{evaluate, expected_cost, EvaluationReport};
use qsp_core::qaoa::optimize;
use qsp_core::qgan::{train, TrainedGenerator};
use qsp_core::resources::{sweep_scaling, SweepSpec};
use qsp_core::rng::derive_seed;
use qsp_core::scenarios::{bin_to_grid, quantile_test_set, replicate_pv, uniform_grid};
use qsp_core::ucp::{build_hamiltonian, Bits, RegisterLayout};

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};
use crate::files::{self, dist_path, samples_path, test_set_path};

pub fn generator_path(cfg: &ExperimentConfig) -> PathBuf {
    cfg.output.dir.join("generator.json")
}

pub fn records_path(cfg: &ExperimentConfig) -> PathBuf {
    cfg.output.dir.join("records.jsonl")
}

/// Sample sets, their histograms on the scenario grid, and the quantile
/// test set drawn from the first held-out set. Returns the files written.
pub fn gen_data(cfg: &ExperimentConfig) -> CliResult<Vec<PathBuf>> {
    let u = &cfg.uncertainty;
    let dir = cfg.data_dir();
    files::ensure_dir(&dir)?;
    let sets = replicate_pv(cfg.seed, cfg.datasets(), u.n_data, u.alpha, u.beta, u.xi_max)?;
    let grid = uniform_grid(0.0, u.xi_max, u.scenarios)?;
    let mut written = Vec::new();
    for (k, set) in sets.iter().enumerate() {
        let path = samples_path(&dir, k);
        files::write_samples(&path, &set.values)?;
        written.push(path);
        let binned = bin_to_grid(set, &grid)?;
        let path = dist_path(&dir, k);
        files::write_distribution(&path, &binned.xi, &binned.probs)?;
        written.push(path);
    }
    let test = quantile_test_set(&sets[cfg.qgan.train_sets], u.n_test)?;
    let path = test_set_path(&dir);
    files::write_distribution(&path, &test.xi, &test.probs)?;
    written.push(path);
    Ok(written)
}

fn load_distributions(cfg: &ExperimentConfig) -> CliResult<Vec<Vec<f64>>> {
    let dir = cfg.data_dir();
    (0..cfg.datasets())
        .map(|k| {
            let path = dist_path(&dir, k);
            let grid = files::read_grid(&path)?;
            if grid.probs.len() != cfg.uncertainty.scenarios {
                return Err(CliError::Config(format!(
                    "{} has {} bins but uncertainty.scenarios = {}; rerun gen-data",
                    path.display(),
                    grid.probs.len(),
                    cfg.uncertainty.scenarios
                )));
            }
            Ok(grid.probs)
        })
        .collect()
}

/// Train the generator on the first `train_sets` distributions and keep the
/// epoch that scores best on the rest.
pub fn train_qgan(cfg: &ExperimentConfig) -> CliResult<TrainedGenerator> {
    let dists = load_distributions(cfg)?;
    let (tr, te) = dists.split_at(cfg.qgan.train_sets);
    let training = train(tr, te, &cfg.train_config(), derive_seed(cfg.seed, "qgan", 0))?;
    files::write_json(&generator_path(cfg), &training.generator)?;
    files::write_csv(
        &cfg.output.dir.join("qgan_trace.csv"),
        &["epoch", "test_score", "d_loss", "g_loss"].map(String::from),
        training
            .trace
            .iter()
            .map(|r| [r.epoch.to_string(), r.test_score.to_string(), r.d_loss.to_string(), r.g_loss.to_string()]),
    )?;
    Ok(training.generator)
}

/// One optimized run at one imbalance cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub lambda: f64,
    pub seed: u64,
    /// Most likely commitment, generator 1 first.
    pub map: String,
    /// Expected cost of `map` on the test set.
    pub expected_cost: f64,
    pub rp: f64,
    pub eev: f64,
    pub objective: f64,
    pub evaluations: usize,
    pub marginal: Vec<f64>,
    pub initial_objective: f64,
}

fn baseline_reports(cfg: &ExperimentConfig) -> CliResult<Vec<EvaluationReport>> {
    let test = files::read_test_set(&test_set_path(&cfg.data_dir()))?;
    cfg.sweep
        .lambdas
        .iter()
        .map(|&l| evaluate(&test, &cfg.params(l)).map_err(CliError::from))
        .collect()
}

/// Optimize every (lambda, seed) pair, in parallel, and write the records in
/// sweep order.
pub fn run(cfg: &ExperimentConfig) -> CliResult<Vec<ExperimentRecord>> {
    let gen = files::read_generator(&generator_path(cfg))?;
    if gen.n_xi() != cfg.n_xi() {
        return Err(CliError::Config(format!(
            "generator has {} qubits but the config needs {}; retrain",
            gen.n_xi(),
            cfg.n_xi()
        )));
    }
    let test = files::read_test_set(&test_set_path(&cfg.data_dir()))?;
    let reports = baseline_reports(cfg)?;
    let qaoa = cfg.qaoa_config();
    let layout = RegisterLayout::new(cfg.n_xi(), cfg.problem.p_min.len());
    let jobs: Vec<(usize, u64)> = (0..reports.len())
        .flat_map(|l| (0..cfg.qaoa.seeds).map(move |s| (l, s)))
        .collect();
    let records = jobs
        .par_iter()
        .map(|&(l, s)| {
            let report = &reports[l];
            let params = cfg.params(report.lambda);
            let ham = build_hamiltonian(&params, &layout, 0.0, cfg.uncertainty.xi_max)?;
            let r = optimize(&gen.spec, &ham, &qaoa, derive_seed(cfg.seed, "run", s))?;
            Ok(ExperimentRecord {
                lambda: report.lambda,
                seed: s,
                map: r.map.to_string(),
                expected_cost: expected_cost(&r.map, &test, &params)?,
                rp: report.rp_value,
                eev: report.eev_value,
                objective: r.objective,
                evaluations: r.evaluations,
                marginal: r.first_stage_marginal,
                initial_objective: r.trace.first().copied().unwrap_or(r.objective),
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    files::write_jsonl(&records_path(cfg), &records)?;
    check_records(&records)?;
    Ok(records)
}

fn check_records(records: &[ExperimentRecord]) -> CliResult<()> {
    match records.iter().find(|r| r.expected_cost < r.rp) {
        Some(r) => Err(CliError::Invariant(format!(
            "lambda {} seed {}: cost {} of {} is below RP {}",
            r.lambda, r.seed, r.expected_cost, r.map, r.rp
        ))),
        None => Ok(()),
    }
}

/// RP, EEV and the expected cost of every commitment per imbalance cost.
pub fn baselines(cfg: &ExperimentConfig) -> CliResult<Vec<EvaluationReport>> {
    let reports = baseline_reports(cfg)?;
    let m = cfg.problem.p_min.len();
    let mut header: Vec<String> = ["lambda", "rp", "eev", "x_rp", "x_ev"].map(String::from).to_vec();
    header.extend((0..1usize << m).map(|k| format!("cost_{}", Bits::from_index(k, m))));
    files::write_csv(
        &cfg.output.dir.join("baselines.csv"),
        &header,
        reports.iter().map(|r| {
            let mut row = vec![
                r.lambda.to_string(),
                r.rp_value.to_string(),
                r.eev_value.to_string(),
                r.rp_solution.to_string(),
                r.ev_solution.to_string(),
            ];
            row.extend(r.per_x_costs.iter().map(|(_, c)| c.to_string()));
            row
        }),
    )?;
    if let Some(r) = reports.iter().find(|r| r.rp_value > r.eev_value) {
        return Err(CliError::Invariant(format!("RP above EEV at lambda {}", r.lambda)));
    }
    Ok(reports)
}

/// Gate counts and depths of the scaling sweeps.
pub fn resources(cfg: &ExperimentConfig) -> CliResult<PathBuf> {
    let rows = sweep_scaling(&SweepSpec::default())?;
    let path = cfg.output.dir.join("resources.csv");
    let header = ["panel", "N", "M", "p1", "p2", "include_qgan", "rz", "sx", "x", "cx", "total", "depth"];
    files::write_csv(
        &path,
        &header.map(String::from),
        rows.iter().map(|r| {
            let c = &r.report;
            [
                r.panel.label().to_string(),
                r.n_scenarios.to_string(),
                r.units.to_string(),
                r.p1.to_string(),
                r.p2.to_string(),
                r.include_qgan.to_string(),
                c.rz.to_string(),
                c.sx.to_string(),
                c.x.to_string(),
                c.cx.to_string(),
                c.total.to_string(),
                c.depth.to_string(),
            ]
        }),
    )?;
    Ok(path)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub lambda: f64,
    pub runs: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub rp: f64,
    pub eev: f64,
}

/// Mean, min and max expected cost over seeds for each imbalance cost.
pub fn summarize(records: &[ExperimentRecord]) -> Vec<SummaryRow> {
    let mut lambdas: Vec<f64> = records.iter().map(|r| r.lambda).collect();
    lambdas.sort_by(f64::total_cmp);
    lambdas.dedup();
    lambdas
        .into_iter()
        .map(|lambda| {
            let group: Vec<&ExperimentRecord> = records.iter().filter(|r| r.lambda == lambda).collect();
            let costs: Vec<f64> = group.iter().map(|r| r.expected_cost).collect();
            SummaryRow {
                lambda,
                runs: costs.len(),
                mean: costs.iter().sum::<f64>() / costs.len() as f64,
                min: costs.iter().copied().fold(f64::INFINITY, f64::min),
                max: costs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                rp: group[0].rp,
                eev: group[0].eev,
            }
        })
        .collect()
}

/// Aggregate a records file into `report.csv` next to it.
pub fn report(records_file: &Path) -> CliResult<Vec<SummaryRow>> {
    let records: Vec<ExperimentRecord> = files::read_jsonl(records_file)?;
    if records.is_empty() {
        return Err(CliError::format(records_file, "no records"));
    }
    check_records(&records)?;
    let rows = summarize(&records);
    let out = records_file.with_file_name("report.csv");
    files::write_csv(
        &out,
        &["lambda", "runs", "mean_cost", "min_cost", "max_cost", "rp", "eev"].map(String::from),
        rows.iter().map(|r| {
            [
                r.lambda.to_string(),
                r.runs.to_string(),
                r.mean.to_string(),
                r.min.to_string(),
                r.max.to_string(),
                r.rp.to_string(),
                r.eev.to_string(),
            ]
        }),
    )?;
    Ok(rows)
}
