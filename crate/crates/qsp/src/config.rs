//! Experiment configuration, read from a TOML file. Every key is optional;
//! missing keys take the desk-scale defaults below.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use qsp_core::baselines::lambda_grid;
use qsp_core::qaoa::{EvalMode, QaoaConfig};
use qsp_core::qgan::{ReadoutMode, TrainConfig};
use qsp_core::ucp::UcpParams;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Master seed; every sub-seed is derived from it.
    pub seed: u64,
    pub problem: Problem,
    pub uncertainty: Uncertainty,
    pub qgan: Qgan,
    pub qaoa: Qaoa,
    pub sweep: Sweep,
    pub output: Output,
}

/// Unit data without the imbalance cost, which comes from the sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Problem {
    pub demand: f64,
    pub p_min: Vec<f64>,
    pub p_max: Vec<f64>,
    pub startup_cost: Vec<f64>,
    pub unit_cost: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Uncertainty {
    pub alpha: f64,
    pub beta: f64,
    pub xi_max: f64,
    /// Number of scenarios N, a power of two.
    pub scenarios: usize,
    pub n_data: usize,
    pub n_test: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Qgan {
    pub epochs: usize,
    pub lr_g: f64,
    pub lr_d: f64,
    /// Readout shots per epoch; 0 reads exact probabilities.
    pub shots: u64,
    pub train_sets: usize,
    pub test_sets: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Qaoa {
    pub p1: usize,
    pub p2: usize,
    /// Shots per objective evaluation; 0 evaluates exactly.
    pub shots: u64,
    pub max_evals: usize,
    pub tol: f64,
    pub rhobeg: f64,
    /// Random initializations per imbalance cost.
    pub seeds: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sweep {
    pub lambdas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Output {
    pub dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 1,
            problem: Problem::default(),
            uncertainty: Uncertainty::default(),
            qgan: Qgan::default(),
            qaoa: Qaoa::default(),
            sweep: Sweep::default(),
            output: Output::default(),
        }
    }
}

impl Default for Problem {
    fn default() -> Self {
        let p = UcpParams::case_study(0.0);
        Problem {
            demand: p.demand,
            p_min: p.p_min,
            p_max: p.p_max,
            startup_cost: p.startup_cost,
            unit_cost: p.unit_cost,
        }
    }
}

impl Default for Uncertainty {
    fn default() -> Self {
        Uncertainty {
            alpha: 3.0,
            beta: 7.0,
            xi_max: 2500.0,
            scenarios: 32,
            n_data: 2000,
            n_test: 200,
        }
    }
}

impl Default for Qgan {
    fn default() -> Self {
        Qgan {
            epochs: 400,
            lr_g: 0.002,
            lr_d: 0.002,
            shots: 0,
            train_sets: 10,
            test_sets: 5,
        }
    }
}

impl Default for Qaoa {
    fn default() -> Self {
        let q = QaoaConfig::default();
        Qaoa {
            p1: q.p1,
            p2: q.p2,
            shots: 0,
            max_evals: q.max_evals,
            tol: q.tol,
            rhobeg: q.rhobeg,
            seeds: 5,
        }
    }
}

impl Default for Sweep {
    fn default() -> Self {
        Sweep {
            lambdas: vec![30.0, 90.0, 150.0, 200.0],
        }
    }
}

impl Default for Output {
    fn default() -> Self {
        Output { dir: "out".into() }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text)
    }

    /// Full protocol: 18 imbalance costs, 40 seeds, sampled estimators.
    pub fn paper_scale(mut self) -> Self {
        self.sweep.lambdas = lambda_grid();
        self.qaoa.seeds = 40;
        self.qaoa.shots = 50_000;
        self.qgan.shots = 10_000;
        self
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |msg: &str| Err(CliError::Config(msg.into()));
        let u = &self.uncertainty;
        if u.scenarios < 2 || !u.scenarios.is_power_of_two() {
            return bad("uncertainty.scenarios must be a power of two >= 2");
        }
        if u.n_data == 0 || u.n_test == 0 || u.n_test > u.n_data {
            return bad("need 0 < uncertainty.n_test <= uncertainty.n_data");
        }
        if self.qgan.train_sets == 0 || self.qgan.test_sets == 0 {
            return bad("qgan.train_sets and qgan.test_sets must be positive");
        }
        if self.qaoa.p1 == 0 || self.qaoa.p2 == 0 || self.qaoa.seeds == 0 {
            return bad("qaoa.p1, qaoa.p2 and qaoa.seeds must be positive");
        }
        if self.sweep.lambdas.is_empty() {
            return bad("sweep.lambdas is empty");
        }
        for &lambda in &self.sweep.lambdas {
            self.params(lambda).validate().map_err(|e| CliError::Config(e.to_string()))?;
        }
        Ok(())
    }

    pub fn params(&self, lambda: f64) -> UcpParams {
        let p = &self.problem;
        UcpParams {
            demand: p.demand,
            p_min: p.p_min.clone(),
            p_max: p.p_max.clone(),
            startup_cost: p.startup_cost.clone(),
            unit_cost: p.unit_cost.clone(),
            lambda,
        }
    }

    pub fn n_xi(&self) -> usize {
        self.uncertainty.scenarios.trailing_zeros() as usize
    }

    pub fn datasets(&self) -> usize {
        self.qgan.train_sets + self.qgan.test_sets
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.qgan.epochs,
            lr_g: self.qgan.lr_g,
            lr_d: self.qgan.lr_d,
            readout: match self.qgan.shots {
                0 => ReadoutMode::Exact,
                n => ReadoutMode::Shots(n),
            },
            reps: None,
        }
    }

    pub fn qaoa_config(&self) -> QaoaConfig {
        let q = &self.qaoa;
        QaoaConfig {
            p1: q.p1,
            p2: q.p2,
            eval_mode: match q.shots {
                0 => EvalMode::Exact,
                n => EvalMode::Shots(n),
            },
            max_evals: q.max_evals,
            tol: q.tol,
            rhobeg: q.rhobeg,
        }
    }

    pub fn data_dir(&self) -> PathBuf {
        self.output.dir.join("data")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(ExperimentConfig::from_toml("").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn partial_sections_keep_other_defaults() {
        let cfg = ExperimentConfig::from_toml("seed = 9\n[qaoa]\np1 = 2\n[sweep]\nlambdas = [40.0]\n").unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.qaoa.p1, 2);
        assert_eq!(cfg.qaoa.p2, 4);
        assert_eq!(cfg.sweep.lambdas, vec![40.0]);
        assert_eq!(cfg.n_xi(), 5);
        assert_eq!(cfg.params(40.0), UcpParams::case_study(40.0));
    }

    #[test]
    fn rejects_bad_values() {
        for text in [
            "[uncertainty]\nscenarios = 6",
            "[uncertainty]\nn_test = 5000",
            "[qaoa]\nseeds = 0",
            "[sweep]\nlambdas = []",
            "[problem]\np_min = [1.0]",
            "unknown = 1",
        ] {
            assert!(matches!(ExperimentConfig::from_toml(text), Err(CliError::Config(_))), "{text}");
        }
    }

    #[test]
    fn paper_scale_settings() {
        let cfg = ExperimentConfig::default().paper_scale();
        assert_eq!(cfg.sweep.lambdas.len(), 18);
        assert_eq!(cfg.qaoa.seeds, 40);
        assert_eq!(cfg.qaoa_config().eval_mode, EvalMode::Shots(50_000));
        assert_eq!(cfg.train_config().readout, ReadoutMode::Shots(10_000));
    }
}
