//! Dense statevector simulation.
//!
//! Qubit `q` is the bit of weight `2^q` in a basis index (little-endian).
//! Gates act in place on the amplitude array; no gate matrices are built.
//! Global phase is never tracked.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;

use crate::math;
use crate::{Error, Result};

/// Largest register the simulator will allocate.
pub const MAX_QUBITS: usize = 28;

#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    Ry(usize, f64),
    Rz(usize, f64),
    Rx(usize, f64),
    H(usize),
    X(usize),
    Sx(usize),
    /// `Cx(control, target)`
    Cx(usize, usize),
    Cz(usize, usize),
    /// `exp(-i * angle * Z_mask)` where `Z_mask` is the Z-string on the set
    /// bits of `mask`.
    ZPhase { mask: u64, angle: f64 },
    /// `exp(-i * angle * diag(values))`. Exact oracle for diagonal operators;
    /// it has no basis-gate lowering.
    DiagPhase { values: Vec<f64>, angle: f64 },
}

impl Gate {
    pub fn name(&self) -> &'static str {
        match self {
            Gate::Ry(..) => "ry",
            Gate::Rz(..) => "rz",
            Gate::Rx(..) => "rx",
            Gate::H(_) => "h",
            Gate::X(_) => "x",
            Gate::Sx(_) => "sx",
            Gate::Cx(..) => "cx",
            Gate::Cz(..) => "cz",
            Gate::ZPhase { .. } => "zphase",
            Gate::DiagPhase { .. } => "diagphase",
        }
    }

    /// Check the gate against a register of `n_qubits`.
    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let check = |q: usize| {
            if q < n_qubits {
                Ok(())
            } else {
                Err(Error::QubitOutOfRange { qubit: q, n_qubits })
            }
        };
        match self {
            Gate::Ry(q, _) | Gate::Rz(q, _) | Gate::Rx(q, _) => check(*q),
            Gate::H(q) | Gate::X(q) | Gate::Sx(q) => check(*q),
            Gate::Cx(c, t) | Gate::Cz(c, t) => {
                check(*c)?;
                check(*t)?;
                if c == t {
                    return Err(Error::invalid("two-qubit gate on a single qubit"));
                }
                Ok(())
            }
            Gate::ZPhase { mask, .. } => {
                if *mask == 0 {
                    return Err(Error::invalid("ZPhase mask must be nonzero"));
                }
                let top = 63 - mask.leading_zeros() as usize;
                check(top)
            }
            Gate::DiagPhase { values, .. } => {
                let dim = 1usize << n_qubits;
                if values.len() != dim {
                    return Err(Error::LengthMismatch {
                        expected: dim,
                        found: values.len(),
                    });
                }
                Ok(())
            }
        }
    }
}

/// Ordered gate list over a fixed register.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Circuit {
            n_qubits,
            gates: Vec::new(),
        }
    }

    /// Append a gate after checking its qubit indices.
    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend(&mut self, other: &Circuit) -> Result<()> {
        if other.n_qubits > self.n_qubits {
            return Err(Error::LengthMismatch {
                expected: self.n_qubits,
                found: other.n_qubits,
            });
        }
        self.gates.extend(other.gates.iter().cloned());
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }
}

/// Measurement record: basis index to count.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ShotCounts {
    pub counts: BTreeMap<usize, u64>,
    pub total_shots: u64,
}

impl ShotCounts {
    /// Dense relative frequencies over `dim` outcomes.
    pub fn frequencies(&self, dim: usize) -> Vec<f64> {
        let mut f = vec![0.0; dim];
        let total = self.total_shots as f64;
        for (&i, &c) in &self.counts {
            if i < dim {
                f[i] = c as f64 / total;
            }
        }
        f
    }

    /// Marginal frequencies of a contiguous bit field `[offset, offset + width)`.
    pub fn field_frequencies(&self, offset: usize, width: usize) -> Vec<f64> {
        let dim = 1usize << width;
        let mut f = vec![0.0; dim];
        let total = self.total_shots as f64;
        for (&i, &c) in &self.counts {
            f[(i >> offset) & (dim - 1)] += c as f64 / total;
        }
        f
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0>` on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::Capacity {
                what: "n_qubits",
                requested: n_qubits,
                max: MAX_QUBITS,
            });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1usize << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n_qubits, amps })
    }

    /// Build a state from raw amplitudes, normalizing them.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(len));
        }
        let n_qubits = len.trailing_zeros() as usize;
        if n_qubits > MAX_QUBITS {
            return Err(Error::Capacity {
                what: "n_qubits",
                requested: n_qubits,
                max: MAX_QUBITS,
            });
        }
        let norm = math::sqrt(amps.iter().map(|a| a.norm_sqr()).sum::<f64>());
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::invalid("amplitudes must have a finite nonzero norm"));
        }
        let amps = amps.into_iter().map(|a| a / norm).collect();
        Ok(StateVector { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        match *gate {
            Gate::Ry(q, t) => {
                let (c, s) = (math::cos(t / 2.0), math::sin(t / 2.0));
                let m = [
                    [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
                    [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
                ];
                self.apply_1q(q, m);
            }
            Gate::Rx(q, t) => {
                let (c, s) = (math::cos(t / 2.0), math::sin(t / 2.0));
                let m = [
                    [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
                    [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
                ];
                self.apply_1q(q, m);
            }
            Gate::Rz(q, t) => {
                let lo = Complex64::from_polar(1.0, -t / 2.0);
                let hi = Complex64::from_polar(1.0, t / 2.0);
                let bit = 1usize << q;
                for (i, a) in self.amps.iter_mut().enumerate() {
                    *a *= if i & bit == 0 { lo } else { hi };
                }
            }
            Gate::H(q) => {
                let r = core::f64::consts::FRAC_1_SQRT_2;
                let m = [
                    [Complex64::new(r, 0.0), Complex64::new(r, 0.0)],
                    [Complex64::new(r, 0.0), Complex64::new(-r, 0.0)],
                ];
                self.apply_1q(q, m);
            }
            Gate::X(q) => {
                let bit = 1usize << q;
                for i in 0..self.amps.len() {
                    if i & bit == 0 {
                        self.amps.swap(i, i | bit);
                    }
                }
            }
            Gate::Sx(q) => {
                let p = Complex64::new(0.5, 0.5);
                let m = Complex64::new(0.5, -0.5);
                self.apply_1q(q, [[p, m], [m, p]]);
            }
            Gate::Cx(c, t) => {
                let (cb, tb) = (1usize << c, 1usize << t);
                for i in 0..self.amps.len() {
                    if i & cb != 0 && i & tb == 0 {
                        self.amps.swap(i, i | tb);
                    }
                }
            }
            Gate::Cz(c, t) => {
                let both = (1usize << c) | (1usize << t);
                for (i, a) in self.amps.iter_mut().enumerate() {
                    if i & both == both {
                        *a = -*a;
                    }
                }
            }
            Gate::ZPhase { mask, angle } => {
                let even = Complex64::from_polar(1.0, -angle);
                let odd = even.conj();
                let mask = mask as usize;
                for (i, a) in self.amps.iter_mut().enumerate() {
                    *a *= if (i & mask).count_ones() & 1 == 0 {
                        even
                    } else {
                        odd
                    };
                }
            }
            Gate::DiagPhase { ref values, angle } => self.phase_by_diagonal(values, angle),
        }
        Ok(())
    }

    /// `exp(-i * angle * diag(values))` without building a gate. `values`
    /// must have one entry per amplitude.
    pub fn apply_diagonal_phase(&mut self, values: &[f64], angle: f64) -> Result<()> {
        if values.len() != self.amps.len() {
            return Err(Error::LengthMismatch {
                expected: self.amps.len(),
                found: values.len(),
            });
        }
        self.phase_by_diagonal(values, angle);
        Ok(())
    }

    fn phase_by_diagonal(&mut self, values: &[f64], angle: f64) {
        for (a, &v) in self.amps.iter_mut().zip(values) {
            *a *= Complex64::from_polar(1.0, -angle * v);
        }
    }

    pub fn run(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.n_qubits > self.n_qubits {
            return Err(Error::LengthMismatch {
                expected: self.n_qubits,
                found: circuit.n_qubits,
            });
        }
        for g in &circuit.gates {
            self.apply(g)?;
        }
        Ok(())
    }

    fn apply_1q(&mut self, q: usize, m: [[Complex64; 2]; 2]) {
        let bit = 1usize << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let j = i | bit;
                let (a0, a1) = (self.amps[i], self.amps[j]);
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[j] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    /// `sum_i |amp_i|^2 * diag_i`
    pub fn expectation_diagonal(&self, diag: &[f64]) -> Result<f64> {
        if diag.len() != self.amps.len() {
            return Err(Error::LengthMismatch {
                expected: self.amps.len(),
                found: diag.len(),
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(diag)
            .map(|(a, d)| a.norm_sqr() * d)
            .sum())
    }

    /// Draw `shots` computational-basis samples.
    pub fn sample<R: Rng + ?Sized>(&self, shots: u64, rng: &mut R) -> Result<ShotCounts> {
        if shots == 0 {
            return Err(Error::invalid("shots must be at least 1"));
        }
        let mut cdf = Vec::with_capacity(self.amps.len());
        let mut acc = 0.0;
        for a in &self.amps {
            acc += a.norm_sqr();
            cdf.push(acc);
        }
        let total = acc;
        let mut counts = BTreeMap::new();
        for _ in 0..shots {
            let u: f64 = rng.random::<f64>() * total;
            let idx = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
            *counts.entry(idx).or_insert(0) += 1;
        }
        Ok(ShotCounts {
            counts,
            total_shots: shots,
        })
    }

    /// Marginal distribution of `qubits`. The lowest listed qubit is the least
    /// significant bit of the outcome index.
    pub fn marginal_probs(&self, qubits: &[usize]) -> Result<Vec<f64>> {
        let qs = self.sorted_subset(qubits)?;
        let mut out = vec![0.0; 1usize << qs.len()];
        for (i, a) in self.amps.iter().enumerate() {
            out[extract_bits(i, &qs)] += a.norm_sqr();
        }
        Ok(out)
    }

    /// Marginal of `target` conditioned on the `given` qubits reading
    /// `outcome` (bit k of `outcome` is the k-th lowest qubit of `given`).
    pub fn conditional_marginal(
        &self,
        target: &[usize],
        given: &[usize],
        outcome: usize,
    ) -> Result<Vec<f64>> {
        let ts = self.sorted_subset(target)?;
        let gs = self.sorted_subset(given)?;
        if ts.iter().any(|q| gs.contains(q)) {
            return Err(Error::invalid("target and given qubit sets overlap"));
        }
        if outcome >= 1usize << gs.len() {
            return Err(Error::invalid("outcome does not fit the conditioning set"));
        }
        let mut out = vec![0.0; 1usize << ts.len()];
        let mut mass = 0.0;
        for (i, a) in self.amps.iter().enumerate() {
            if extract_bits(i, &gs) == outcome {
                let p = a.norm_sqr();
                out[extract_bits(i, &ts)] += p;
                mass += p;
            }
        }
        if mass <= 0.0 {
            return Err(Error::ZeroProbability);
        }
        out.iter_mut().for_each(|p| *p /= mass);
        Ok(out)
    }

    fn sorted_subset(&self, qubits: &[usize]) -> Result<Vec<usize>> {
        if qubits.is_empty() {
            return Err(Error::invalid("qubit subset is empty"));
        }
        let mut qs = qubits.to_vec();
        qs.sort_unstable();
        qs.dedup();
        if let Some(&q) = qs.iter().find(|&&q| q >= self.n_qubits) {
            return Err(Error::QubitOutOfRange {
                qubit: q,
                n_qubits: self.n_qubits,
            });
        }
        Ok(qs)
    }
}

fn extract_bits(index: usize, qubits: &[usize]) -> usize {
    qubits
        .iter()
        .enumerate()
        .fold(0, |acc, (k, &q)| acc | (((index >> q) & 1) << k))
}
