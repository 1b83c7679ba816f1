//! Quantum generator, classical discriminator and adversarial training.

mod adam;
mod discriminator;

pub use adam::Adam;
pub use discriminator::Discriminator;

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};
use crate::scenarios::js_agreement;
use crate::statevec::{Circuit, Gate, StateVector, MAX_QUBITS};

/// Hidden layer widths of the discriminator.
pub const HIDDEN: [usize; 2] = [50, 50];

/// Layered RY/CZ ansatz over the scenario register.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub n_xi: usize,
    pub reps: usize,
    pub theta: Vec<f64>,
}

impl GeneratorSpec {
    /// All angles zero, `reps = n_xi`.
    pub fn new(n_xi: usize) -> Result<Self> {
        Self::with_reps(n_xi, n_xi)
    }

    pub fn with_reps(n_xi: usize, reps: usize) -> Result<Self> {
        if n_xi == 0 || n_xi > MAX_QUBITS {
            return Err(Error::Capacity {
                what: "generator qubits",
                requested: n_xi,
                max: MAX_QUBITS,
            });
        }
        Ok(GeneratorSpec {
            n_xi,
            reps,
            theta: vec![0.0; n_xi * (reps + 1)],
        })
    }

    pub fn with_theta(n_xi: usize, reps: usize, theta: Vec<f64>) -> Result<Self> {
        let mut spec = Self::with_reps(n_xi, reps)?;
        if theta.len() != spec.theta.len() {
            return Err(Error::LengthMismatch {
                expected: spec.theta.len(),
                found: theta.len(),
            });
        }
        spec.theta = theta;
        Ok(spec)
    }

    pub fn n_params(&self) -> usize {
        self.n_xi * (self.reps + 1)
    }

    pub fn dim(&self) -> usize {
        1 << self.n_xi
    }

    fn check(&self) -> Result<()> {
        if self.theta.len() != self.n_params() {
            return Err(Error::LengthMismatch {
                expected: self.n_params(),
                found: self.theta.len(),
            });
        }
        Ok(())
    }
}

/// Generator gates on qubits `offset..offset + n_xi` of an `n_total` register.
pub fn generator_circuit_at(spec: &GeneratorSpec, offset: usize, n_total: usize) -> Result<Circuit> {
    spec.check()?;
    let n = spec.n_xi;
    let mut c = Circuit::new(n_total);
    for q in 0..n {
        c.push(Gate::H(offset + q))?;
    }
    let mut angles = spec.theta.chunks_exact(n);
    let rotations = |c: &mut Circuit, layer: &[f64]| -> Result<()> {
        for (q, &t) in layer.iter().enumerate() {
            c.push(Gate::Ry(offset + q, t))?;
        }
        Ok(())
    };
    rotations(&mut c, angles.next().unwrap_or(&[]))?;
    for layer in angles {
        for q in 0..n.saturating_sub(1) {
            c.push(Gate::Cz(offset + q, offset + q + 1))?;
        }
        rotations(&mut c, layer)?;
    }
    Ok(c)
}

pub fn generator_circuit(spec: &GeneratorSpec) -> Result<Circuit> {
    generator_circuit_at(spec, 0, spec.n_xi)
}

/// How generator probabilities are read out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReadoutMode {
    Exact,
    Shots(u64),
}

fn exact_probs(spec: &GeneratorSpec) -> Result<Vec<f64>> {
    let mut sv = StateVector::zero(spec.n_xi)?;
    sv.run(&generator_circuit(spec)?)?;
    Ok(sv.probabilities())
}

pub fn generator_probs<R: Rng + ?Sized>(spec: &GeneratorSpec, mode: ReadoutMode, rng: &mut R) -> Result<Vec<f64>> {
    match mode {
        ReadoutMode::Exact => exact_probs(spec),
        ReadoutMode::Shots(shots) => {
            let mut sv = StateVector::zero(spec.n_xi)?;
            sv.run(&generator_circuit(spec)?)?;
            Ok(sv.sample(shots, rng)?.frequencies(spec.dim()))
        }
    }
}

/// Gradient of `-log D(p_theta)` with respect to every angle, by the
/// parameter-shift rule on the exact basis probabilities.
pub fn generator_gradient(spec: &GeneratorSpec, disc: &Discriminator) -> Result<Vec<f64>> {
    spec.check()?;
    if disc.input_len() != spec.dim() {
        return Err(Error::LengthMismatch {
            expected: spec.dim(),
            found: disc.input_len(),
        });
    }
    let p = exact_probs(spec)?;
    let (_, dl_dp) = disc.backward(&p, 1.0);
    let mut shifted = spec.clone();
    let mut grad = Vec::with_capacity(spec.n_params());
    for j in 0..spec.n_params() {
        let t = spec.theta[j];
        shifted.theta[j] = t + FRAC_PI_2;
        let up = exact_probs(&shifted)?;
        shifted.theta[j] = t - FRAC_PI_2;
        let dn = exact_probs(&shifted)?;
        shifted.theta[j] = t;
        grad.push(dl_dp.iter().zip(up.iter().zip(&dn)).map(|(g, (u, d))| g * (u - d) / 2.0).sum());
    }
    Ok(grad)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr_g: f64,
    pub lr_d: f64,
    /// Readout used for the discriminator input and for scoring.
    pub readout: ReadoutMode,
    pub reps: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 400,
            lr_g: 0.002,
            lr_d: 0.002,
            readout: ReadoutMode::Exact,
            reps: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedGenerator {
    pub spec: GeneratorSpec,
    pub best_epoch: usize,
    pub train_score: f64,
    pub test_score: f64,
}

impl TrainedGenerator {
    /// Untrained, uniform generator. Useful as a baseline.
    pub fn uniform(n_xi: usize) -> Result<Self> {
        Ok(TrainedGenerator {
            spec: GeneratorSpec::new(n_xi)?,
            best_epoch: 0,
            train_score: 0.0,
            test_score: 0.0,
        })
    }

    pub fn n_xi(&self) -> usize {
        self.spec.n_xi
    }

    pub fn probabilities(&self) -> Result<Vec<f64>> {
        exact_probs(&self.spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub test_score: f64,
    pub d_loss: f64,
    pub g_loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Training {
    pub generator: TrainedGenerator,
    pub trace: Vec<EpochRecord>,
}

fn check_targets(targets: &[Vec<f64>], dim: usize) -> Result<()> {
    if targets.is_empty() {
        return Err(Error::invalid("no target distributions"));
    }
    for t in targets {
        if t.len() != dim {
            return Err(Error::LengthMismatch {
                expected: dim,
                found: t.len(),
            });
        }
        let sum: f64 = t.iter().sum();
        if t.iter().any(|&v| !(v >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized(sum));
        }
    }
    Ok(())
}

fn mean_score(p: &[f64], targets: &[Vec<f64>]) -> Result<f64> {
    let mut acc = 0.0;
    for t in targets {
        acc += js_agreement(p, t)?;
    }
    Ok(acc / targets.len() as f64)
}

/// Adversarial training from all-zero angles. Keeps the angles with the best
/// mean test agreement seen over all epochs (including the final one).
pub fn train(train_targets: &[Vec<f64>], test_targets: &[Vec<f64>], cfg: &TrainConfig, seed: u64) -> Result<Training> {
    let dim = train_targets.first().map(Vec::len).unwrap_or(0);
    if !dim.is_power_of_two() || dim < 2 {
        return Err(Error::NotPowerOfTwo(dim));
    }
    check_targets(train_targets, dim)?;
    check_targets(test_targets, dim)?;
    let n_xi = dim.trailing_zeros() as usize;
    let mut spec = GeneratorSpec::with_reps(n_xi, cfg.reps.unwrap_or(n_xi))?;

    let mut widths = vec![dim];
    widths.extend(HIDDEN);
    widths.push(1);
    let mut disc = Discriminator::new(&widths, &mut rng_from_seed(derive_seed(seed, "qgan-disc", 0)));
    let mut pick = rng_from_seed(derive_seed(seed, "qgan-pick", 0));
    let mut shots = rng_from_seed(derive_seed(seed, "qgan-shots", 0));
    let mut opt_d = Adam::new(disc.params().len(), cfg.lr_d);
    let mut opt_g = Adam::new(spec.n_params(), cfg.lr_g);

    let mut best = (f64::NEG_INFINITY, 0, spec.theta.clone());
    let mut trace = Vec::with_capacity(cfg.epochs + 1);
    for epoch in 0..=cfg.epochs {
        let p = generator_probs(&spec, cfg.readout, &mut shots)?;
        let score = mean_score(&p, test_targets)?;
        if score > best.0 {
            best = (score, epoch, spec.theta.clone());
        }
        if epoch == cfg.epochs {
            trace.push(EpochRecord {
                epoch,
                test_score: score,
                d_loss: f64::NAN,
                g_loss: f64::NAN,
            });
            break;
        }
        let real = &train_targets[pick.random_range(0..train_targets.len())];

        let (g_real, _) = disc.backward(real, 1.0);
        let (g_fake, _) = disc.backward(&p, 0.0);
        let d_loss = disc.loss(real, 1.0) + disc.loss(&p, 0.0);
        let g: Vec<f64> = g_real.iter().zip(&g_fake).map(|(a, b)| a + b).collect();
        opt_d.step(disc.params_mut(), &g);

        let g_loss = disc.loss(&p, 1.0);
        let grad = generator_gradient(&spec, &disc)?;
        opt_g.step(&mut spec.theta, &grad);

        trace.push(EpochRecord {
            epoch,
            test_score: score,
            d_loss,
            g_loss,
        });
    }

    let (test_score, best_epoch, theta) = best;
    spec.theta = theta;
    let train_score = mean_score(&exact_probs(&spec)?, train_targets)?;
    Ok(Training {
        generator: TrainedGenerator {
            spec,
            best_epoch,
            train_score,
            test_score,
        },
        trace,
    })
}
