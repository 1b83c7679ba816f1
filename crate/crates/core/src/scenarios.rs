//! PV uncertainty: Beta capacity-factor samples, grid discretization,
//! quantile test scenarios and the JS agreement score.

use alloc::vec;
use alloc::vec::Vec;

use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::math;
use crate::rng::{derive_seed, rng_from_seed};
use crate::{Error, Result};

/// Continuous PV output samples (kWh).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub values: Vec<f64>,
    pub seed: u64,
}

impl SampleSet {
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// Discrete distribution on an equally spaced grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioGrid {
    pub xi: Vec<f64>,
    pub probs: Vec<f64>,
}

/// Equally weighted evaluation scenarios, sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestScenarioSet {
    pub xi: Vec<f64>,
    pub probs: Vec<f64>,
}

impl TestScenarioSet {
    pub fn from_values(mut xi: Vec<f64>) -> Result<Self> {
        if xi.is_empty() {
            return Err(Error::invalid("test set is empty"));
        }
        xi.sort_by(f64::total_cmp);
        let p = 1.0 / xi.len() as f64;
        Ok(TestScenarioSet {
            probs: vec![p; xi.len()],
            xi,
        })
    }

    pub fn mean(&self) -> f64 {
        self.xi.iter().zip(&self.probs).map(|(x, p)| x * p).sum()
    }

    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }
}

/// `n` draws of `xi_max * CF`, `CF ~ Beta(alpha, beta)`, each Beta variate
/// built from two Gamma variates `X / (X + Y)`.
pub fn sample_pv(n: usize, alpha: f64, beta: f64, xi_max: f64, seed: u64) -> Result<SampleSet> {
    if !(alpha > 0.0) || !(beta > 0.0) {
        return Err(Error::invalid("Beta shape parameters must be positive"));
    }
    let ga = Gamma::new(alpha, 1.0).map_err(|_| Error::invalid("bad Gamma shape"))?;
    let gb = Gamma::new(beta, 1.0).map_err(|_| Error::invalid("bad Gamma shape"))?;
    let mut rng = rng_from_seed(seed);
    let values = (0..n)
        .map(|_| {
            let x: f64 = ga.sample(&mut rng);
            let y: f64 = gb.sample(&mut rng);
            xi_max * x / (x + y)
        })
        .collect();
    Ok(SampleSet { values, seed })
}

/// `count` independent sample sets, dataset `k` seeded from `master` and `k`.
pub fn replicate_pv(master: u64, count: usize, n: usize, alpha: f64, beta: f64, xi_max: f64) -> Result<Vec<SampleSet>> {
    (0..count)
        .map(|k| sample_pv(n, alpha, beta, xi_max, derive_seed(master, "pv", k as u64)))
        .collect()
}

/// `n` equally spaced points including both endpoints. `n` must be a power
/// of two so the grid fits a qubit register.
pub fn uniform_grid(xi_min: f64, xi_max: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    if !(xi_max > xi_min) {
        return Err(Error::invalid("grid needs xi_max > xi_min"));
    }
    let step = (xi_max - xi_min) / (n - 1) as f64;
    let mut g: Vec<f64> = (0..n).map(|s| xi_min + s as f64 * step).collect();
    g[n - 1] = xi_max;
    Ok(g)
}

/// Histogram of samples on bins centred at the grid points. Inner edges
/// sit at midpoints; the outer bins extend to infinity.
pub fn bin_to_grid(samples: &SampleSet, grid: &[f64]) -> Result<ScenarioGrid> {
    if samples.values.is_empty() {
        return Err(Error::invalid("no samples to bin"));
    }
    if grid.len() < 2 {
        return Err(Error::invalid("grid needs at least two points"));
    }
    let edges: Vec<f64> = grid.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let mut counts = vec![0u64; grid.len()];
    for &v in &samples.values {
        counts[edges.partition_point(|&e| e <= v)] += 1;
    }
    let n = samples.values.len() as f64;
    let last = grid.len() - 1;
    let mut probs: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
    // a nonempty last bin takes the rounding residue so the total is exactly 1
    if counts[last] > 0 {
        let head: f64 = probs[..last].iter().sum();
        probs[last] = (1.0 - head).max(0.0);
    }
    Ok(ScenarioGrid {
        xi: grid.to_vec(),
        probs,
    })
}

/// `n_test` empirical quantiles at levels `(s + 0.5) / n_test`, linearly
/// interpolating the order statistics.
pub fn quantile_test_set(samples: &SampleSet, n_test: usize) -> Result<TestScenarioSet> {
    let n = samples.values.len();
    if n_test == 0 || n_test > n {
        return Err(Error::invalid("n_test must be in 1..=sample count"));
    }
    let mut sorted = samples.values.clone();
    sorted.sort_by(f64::total_cmp);
    let xi = (0..n_test)
        .map(|s| {
            let h = (s as f64 + 0.5) / n_test as f64 * (n - 1) as f64;
            let lo = h as usize;
            let hi = (lo + 1).min(n - 1);
            sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
        })
        .collect();
    TestScenarioSet::from_values(xi)
}

fn check_distribution(p: &[f64]) -> Result<()> {
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-9 || p.iter().any(|&x| x < 0.0) {
        return Err(Error::NotNormalized(total));
    }
    Ok(())
}

/// `1 - JS(p, q)` with base-2 logarithms, so the score lies in `[0, 1]`.
pub fn js_agreement(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch {
            expected: p.len(),
            found: q.len(),
        });
    }
    check_distribution(p)?;
    check_distribution(q)?;
    let mut js = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        let m = 0.5 * (a + b);
        let term = |v: f64| if v > 0.0 { 0.5 * v * math::log2(v / m) } else { 0.0 };
        // summed pairwise so swapping p and q gives the identical float
        js += term(a) + term(b);
    }
    Ok((1.0 - js).clamp(0.0, 1.0))
}
