//! Single-period stochastic unit commitment under PV uncertainty.
//!
//! First stage: on/off bits `x_i`. Second stage: outputs encoded as
//! `y_i = x_i * (P_min + delta_i * sum_j 2^j b_ij)`, so the capacity bounds
//! hold for every bit pattern. The imbalance penalty uses the squared
//! surrogate `lambda * (D - xi - sum y)^2` for the Hamiltonian, and the
//! original `lambda * |D - xi - sum y|` for evaluation.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::walsh::{arithmetic_expansion, ZPolynomial};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UcpParams {
    /// Demand (kWh).
    pub demand: f64,
    pub p_min: Vec<f64>,
    pub p_max: Vec<f64>,
    /// Start-up cost per committed unit (JPY).
    pub startup_cost: Vec<f64>,
    /// Generation cost (JPY/kWh).
    pub unit_cost: Vec<f64>,
    /// Imbalance cost coefficient.
    pub lambda: f64,
}

impl UcpParams {
    /// Three thermal units, D = 2500 kWh.
    pub fn case_study(lambda: f64) -> Self {
        UcpParams {
            demand: 2500.0,
            p_min: vec![300.0, 500.0, 100.0],
            p_max: vec![750.0, 1000.0, 200.0],
            startup_cost: vec![4000.0, 5000.0, 1000.0],
            unit_cost: vec![15.0, 20.0, 10.0],
            lambda,
        }
    }

    /// `m` units built by cycling the case-study units. Used for scaling sweeps.
    pub fn cycled(m: usize, lambda: f64) -> Self {
        let base = Self::case_study(lambda);
        let pick = |v: &[f64]| (0..m).map(|i| v[i % v.len()]).collect::<Vec<_>>();
        UcpParams {
            demand: base.demand,
            p_min: pick(&base.p_min),
            p_max: pick(&base.p_max),
            startup_cost: pick(&base.startup_cost),
            unit_cost: pick(&base.unit_cost),
            lambda,
        }
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        UcpParams {
            lambda,
            ..self.clone()
        }
    }

    pub fn units(&self) -> usize {
        self.p_min.len()
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.p_min.len();
        if m == 0 {
            return Err(Error::invalid("at least one generator is required"));
        }
        for len in [self.p_max.len(), self.startup_cost.len(), self.unit_cost.len()] {
            if len != m {
                return Err(Error::LengthMismatch {
                    expected: m,
                    found: len,
                });
            }
        }
        for i in 0..m {
            if !(self.p_min[i] < self.p_max[i]) {
                return Err(Error::invalid("p_min must be below p_max"));
            }
            if self.startup_cost[i] < 0.0 || self.unit_cost[i] < 0.0 || self.p_min[i] < 0.0 {
                return Err(Error::invalid("costs and output bounds must be non-negative"));
            }
        }
        if !(self.lambda >= 0.0) || !self.demand.is_finite() {
            return Err(Error::invalid("lambda must be non-negative"));
        }
        Ok(())
    }
}

/// Commitment or level bits. Element 0 is generator 1; `Display` prints
/// generator 1 leftmost.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Bits(pub Vec<bool>);

impl Bits {
    /// Bit `i` of `index` becomes element `i`.
    pub fn from_index(index: usize, len: usize) -> Self {
        Bits((0..len).map(|i| (index >> i) & 1 == 1).collect())
    }

    pub fn to_index(&self) -> usize {
        self.0
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &b)| acc | ((b as usize) << i))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Bits {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::invalid(String::from("bit strings contain only 0 and 1"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Bits)
    }
}

/// Qubit assignment: scenario register lowest, then first stage (one bit
/// per generator), then second stage (`bits_per_unit` bits per generator).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterLayout {
    pub n_xi: usize,
    pub units: usize,
    pub bits_per_unit: usize,
}

impl RegisterLayout {
    pub fn new(n_xi: usize, units: usize) -> Self {
        Self::with_bits(n_xi, units, 1)
    }

    pub fn with_bits(n_xi: usize, units: usize, bits_per_unit: usize) -> Self {
        RegisterLayout {
            n_xi,
            units,
            bits_per_unit,
        }
    }

    pub fn n_first(&self) -> usize {
        self.units
    }

    pub fn n_second(&self) -> usize {
        self.units * self.bits_per_unit
    }

    pub fn first_offset(&self) -> usize {
        self.n_xi
    }

    pub fn second_offset(&self) -> usize {
        self.n_xi + self.units
    }

    pub fn total_qubits(&self) -> usize {
        self.n_xi + self.n_first() + self.n_second()
    }

    pub fn scenario_qubits(&self) -> Vec<usize> {
        (0..self.n_xi).collect()
    }

    pub fn first_qubits(&self) -> Vec<usize> {
        (self.first_offset()..self.second_offset()).collect()
    }

    pub fn second_qubits(&self) -> Vec<usize> {
        (self.second_offset()..self.total_qubits()).collect()
    }

    pub fn scenario_mask(&self) -> u64 {
        (1u64 << self.n_xi) - 1
    }

    pub fn x_qubit(&self, unit: usize) -> usize {
        self.first_offset() + unit
    }

    pub fn b_qubit(&self, unit: usize, bit: usize) -> usize {
        self.second_offset() + unit * self.bits_per_unit + bit
    }

    /// Split a basis index into (scenario index, x bits, b bits).
    pub fn decode(&self, index: usize) -> (usize, Bits, Bits) {
        let s = index & ((1usize << self.n_xi) - 1);
        let x = Bits::from_index(index >> self.first_offset(), self.n_first());
        let b = Bits::from_index(index >> self.second_offset(), self.n_second());
        (s, x, b)
    }

    pub fn encode(&self, s: usize, x: &Bits, b: &Bits) -> usize {
        s | (x.to_index() << self.first_offset()) | (b.to_index() << self.second_offset())
    }
}

/// Output of unit `i` under the x-controlled encoding.
pub fn encoded_output(i: usize, x: &Bits, b: &Bits, params: &UcpParams, bits_per_unit: usize) -> f64 {
    if !x.get(i) {
        return 0.0;
    }
    let delta = level_step(i, params, bits_per_unit);
    let level: usize = (0..bits_per_unit)
        .map(|j| (b.get(i * bits_per_unit + j) as usize) << j)
        .sum();
    params.p_min[i] + delta * level as f64
}

fn level_step(i: usize, params: &UcpParams, bits_per_unit: usize) -> f64 {
    (params.p_max[i] - params.p_min[i]) / ((1u64 << bits_per_unit) - 1) as f64
}

/// `y_i` as a Z-polynomial on the full register.
pub fn build_y_operator(i: usize, params: &UcpParams, layout: &RegisterLayout) -> Result<ZPolynomial> {
    if i >= params.units() || i >= layout.units {
        return Err(Error::invalid("generator index out of range"));
    }
    let n = layout.total_qubits();
    let delta = level_step(i, params, layout.bits_per_unit);
    let mut inner = ZPolynomial::constant(n, params.p_min[i])?;
    for j in 0..layout.bits_per_unit {
        let b = ZPolynomial::bit(n, layout.b_qubit(i, j))?;
        inner = inner.add(&b.scale(delta * (1u64 << j) as f64))?;
    }
    ZPolynomial::bit(n, layout.x_qubit(i))?.mul(&inner)
}

/// Diagonal problem Hamiltonian, split for circuit construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemHamiltonian {
    pub layout: RegisterLayout,
    pub params: UcpParams,
    pub xi_min: f64,
    pub xi_max: f64,
    /// Start-up cost, first-stage register only.
    pub h1: ZPolynomial,
    /// Second-stage terms with no scenario-register support.
    pub h2_indep: ZPolynomial,
    /// Second-stage terms touching the scenario register (the mapping gate).
    pub h2_dep: ZPolynomial,
}

impl ProblemHamiltonian {
    pub fn h2(&self) -> Result<ZPolynomial> {
        self.h2_indep.add(&self.h2_dep)
    }

    pub fn total(&self) -> Result<ZPolynomial> {
        self.h1.add(&self.h2()?)
    }

    /// Scenario values `xi_s` on the uniform grid.
    pub fn scenario_values(&self) -> Vec<f64> {
        let n = 1usize << self.layout.n_xi;
        let d = (self.xi_max - self.xi_min) / (n - 1) as f64;
        (0..n).map(|s| self.xi_min + s as f64 * d).collect()
    }
}

/// `H = sum d_i x_i + sum c_i y_i + lambda (D - xi - sum y_i)^2`, with the
/// scenario operator expanded on the arithmetic grid over `[xi_min, xi_max]`.
pub fn build_hamiltonian(
    params: &UcpParams,
    layout: &RegisterLayout,
    xi_min: f64,
    xi_max: f64,
) -> Result<ProblemHamiltonian> {
    params.validate()?;
    if layout.n_xi == 0 {
        return Err(Error::invalid("scenario register needs at least one qubit"));
    }
    if layout.units != params.units() {
        return Err(Error::LengthMismatch {
            expected: params.units(),
            found: layout.units,
        });
    }
    if layout.bits_per_unit == 0 {
        return Err(Error::invalid("at least one second-stage bit per unit"));
    }
    let n = layout.total_qubits();

    let mut h1 = ZPolynomial::zero(n)?;
    for i in 0..params.units() {
        let x = ZPolynomial::bit(n, layout.x_qubit(i))?;
        h1 = h1.add(&x.scale(params.startup_cost[i]))?;
    }

    let xi = arithmetic_expansion(xi_min, xi_max, layout.n_xi)?.embed(0, n)?;
    let mut generation = ZPolynomial::zero(n)?;
    let mut supply = ZPolynomial::zero(n)?;
    for i in 0..params.units() {
        let y = build_y_operator(i, params, layout)?;
        generation = generation.add(&y.scale(params.unit_cost[i]))?;
        supply = supply.add(&y)?;
    }
    let imbalance = ZPolynomial::constant(n, params.demand)?
        .sub(&xi)?
        .sub(&supply)?;
    let h2 = generation.add(&imbalance.mul(&imbalance)?.scale(params.lambda))?;
    let (h2_dep, h2_indep) = h2.split_by_support(layout.scenario_mask());

    Ok(ProblemHamiltonian {
        layout: *layout,
        params: params.clone(),
        xi_min,
        xi_max,
        h1,
        h2_indep,
        h2_dep,
    })
}

/// First-stage cost plus the squared-penalty recourse for one scenario.
/// `b` holds `bits_per_unit` bits per unit, unit-major.
pub fn classical_surrogate(x: &Bits, b: &Bits, xi: f64, params: &UcpParams) -> Result<f64> {
    let m = params.units();
    if x.len() != m || b.is_empty() || !b.len().is_multiple_of(m) {
        return Err(Error::LengthMismatch {
            expected: m,
            found: x.len(),
        });
    }
    let bits = b.len() / m;
    let mut cost = 0.0;
    let mut supply = 0.0;
    for i in 0..m {
        let y = encoded_output(i, x, b, params, bits);
        if x.get(i) {
            cost += params.startup_cost[i];
        }
        cost += params.unit_cost[i] * y;
        supply += y;
    }
    let sigma = params.demand - xi - supply;
    Ok(cost + params.lambda * sigma * sigma)
}

/// First-stage cost plus the L1-penalty recourse for explicit outputs `y`.
pub fn classical_l1_cost(x: &Bits, y: &[f64], xi: f64, params: &UcpParams) -> Result<f64> {
    let m = params.units();
    if x.len() != m || y.len() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            found: if x.len() != m { x.len() } else { y.len() },
        });
    }
    let mut cost = 0.0;
    let mut supply = 0.0;
    for i in 0..m {
        let ok = if x.get(i) {
            y[i] >= params.p_min[i] && y[i] <= params.p_max[i]
        } else {
            y[i] == 0.0
        };
        if !ok {
            return Err(Error::invalid("output inconsistent with commitment"));
        }
        if x.get(i) {
            cost += params.startup_cost[i];
        }
        cost += params.unit_cost[i] * y[i];
        supply += y[i];
    }
    Ok(cost + params.lambda * (params.demand - xi - supply).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn bits(s: &str) -> Bits {
        s.parse().unwrap()
    }

    #[test]
    fn bits_display_and_index() {
        let x = bits("110");
        assert_eq!(x.to_index(), 0b011);
        assert_eq!(alloc::format!("{x}"), "110");
        assert_eq!(Bits::from_index(0b011, 3), x);
        assert!("12".parse::<Bits>().is_err());
    }

    #[test]
    fn y_operator_unit_three() {
        let params = UcpParams::case_study(30.0);
        let layout = RegisterLayout::new(5, 3);
        let y = build_y_operator(2, &params, &layout).unwrap();
        let xq = 1usize << layout.x_qubit(2);
        let bq = 1usize << layout.b_qubit(2, 0);
        assert!(y.eval_at(0).abs() < 1e-12);
        assert!(y.eval_at(bq).abs() < 1e-12);
        assert!((y.eval_at(xq) - 100.0).abs() < 1e-9);
        assert!((y.eval_at(xq | bq) - 200.0).abs() < 1e-9);

        let y1 = build_y_operator(0, &params, &layout).unwrap();
        let idx = (1usize << layout.x_qubit(0)) | (1usize << layout.b_qubit(0, 0));
        assert!((y1.eval_at(idx) - 750.0).abs() < 1e-9);
        assert!(build_y_operator(3, &params, &layout).is_err());
    }

    #[test]
    fn y_operator_gated_for_every_unit() {
        let params = UcpParams::case_study(30.0);
        let layout = RegisterLayout::new(2, 3);
        for i in 0..3 {
            let y = build_y_operator(i, &params, &layout).unwrap();
            for b in 0..2usize {
                let idx = b << layout.b_qubit(i, 0);
                assert!(y.eval_at(idx).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn surrogate_examples() {
        let p = UcpParams::case_study(7.0);
        // 750 + 1000 + 750 PV = D, no imbalance
        let v = classical_surrogate(&bits("110"), &bits("110"), 750.0, &p).unwrap();
        assert!((v - 40250.0).abs() < 1e-9);
        let v = classical_surrogate(&bits("000"), &bits("000"), 0.0, &p).unwrap();
        assert!((v - 7.0 * 6.25e6).abs() < 1e-6);
        let v = classical_surrogate(&bits("001"), &bits("001"), 2500.0, &p).unwrap();
        assert!((v - (1000.0 + 2000.0 + 7.0 * 4e4)).abs() < 1e-9);
    }

    #[test]
    fn l1_examples() {
        let p = UcpParams::case_study(30.0);
        let v = classical_l1_cost(&bits("110"), &[750.0, 1000.0, 0.0], 750.0, &p).unwrap();
        assert!((v - 40250.0).abs() < 1e-9);
        let v = classical_l1_cost(&bits("000"), &[0.0; 3], 2500.0, &p).unwrap();
        assert_eq!(v, 0.0);
        let v = classical_l1_cost(&bits("100"), &[750.0, 0.0, 0.0], 750.0, &p).unwrap();
        assert!((v - 45250.0).abs() < 1e-9);
        assert!(classical_l1_cost(&bits("100"), &[0.0, 500.0, 0.0], 750.0, &p).is_err());
        assert!(classical_l1_cost(&bits("100"), &[900.0, 0.0, 0.0], 750.0, &p).is_err());
    }

    #[test]
    fn hamiltonian_matches_derived_value() {
        // x = 110, b = 01 on units 1..3 gives y = (300, 1000, 0); xi_0 = 0.
        let lambda = 30.0;
        let p = UcpParams::case_study(lambda);
        let layout = RegisterLayout::new(5, 3);
        let h = build_hamiltonian(&p, &layout, 0.0, 2500.0).unwrap();
        let total = h.total().unwrap();
        let idx = layout.encode(0, &bits("110"), &bits("010"));
        let expected = 33500.0 + 1_440_000.0 * lambda;
        assert!((total.eval_at(idx) - expected).abs() < 1e-6);
        let direct = classical_surrogate(&bits("110"), &bits("010"), 0.0, &p).unwrap();
        assert!((direct - expected).abs() < 1e-9);
    }

    #[test]
    fn lambda_zero_has_no_scenario_coupling() {
        let p = UcpParams::case_study(0.0);
        let layout = RegisterLayout::new(3, 3);
        let h = build_hamiltonian(&p, &layout, 0.0, 2500.0).unwrap();
        assert!(h.h2_dep.is_empty());
        let mut gen = ZPolynomial::zero(layout.total_qubits()).unwrap();
        for i in 0..3 {
            gen = gen
                .add(&build_y_operator(i, &p, &layout).unwrap().scale(p.unit_cost[i]))
                .unwrap();
        }
        let diff = h.h2_indep.sub(&gen).unwrap();
        assert!(diff.terms().values().all(|c| c.abs() < 1e-9));
    }

    #[test]
    fn structure_invariants() {
        let p = UcpParams::case_study(30.0);
        let layout = RegisterLayout::new(5, 3);
        let h = build_hamiltonian(&p, &layout, 0.0, 2500.0).unwrap();
        let smask = layout.scenario_mask();
        let fmask = ((1u64 << layout.n_first()) - 1) << layout.first_offset();
        assert!(h.h2_dep.terms().keys().all(|m| m & smask != 0));
        assert!(h.h2_indep.terms().keys().all(|m| m & smask == 0));
        assert!(h.h1.terms().keys().all(|m| m & !fmask == 0));
        for part in [&h.h1, &h.h2_indep, &h.h2_dep] {
            assert!(part.max_weight() <= 4);
        }
    }

    #[test]
    fn split_reassembles() {
        let p = UcpParams::case_study(55.0);
        let layout = RegisterLayout::new(3, 3);
        let h = build_hamiltonian(&p, &layout, 0.0, 2500.0).unwrap();
        let joined = h.h2().unwrap().reconstruct().unwrap();
        let dep = h.h2_dep.reconstruct().unwrap();
        let indep = h.h2_indep.reconstruct().unwrap();
        for i in 0..joined.values.len() {
            assert!((joined.values[i] - dep.values[i] - indep.values[i]).abs() < 1e-6);
        }
    }

    #[test]
    fn decode_examples() {
        let layout = RegisterLayout::new(5, 3);
        let (s, x, b) = layout.decode(0);
        assert_eq!((s, x.to_string(), b.to_string()), (0, "000".into(), "000".into()));
        let (_, x, _) = layout.decode((1 << 5) | (1 << 6));
        assert_eq!(x.to_string(), "110");
        for idx in 0..(1usize << layout.total_qubits()) {
            let (s, x, b) = layout.decode(idx);
            assert_eq!(layout.encode(s, &x, &b), idx);
        }
    }

    #[test]
    fn multi_bit_encoding_levels() {
        let p = UcpParams::case_study(10.0);
        let layout = RegisterLayout::with_bits(2, 3, 2);
        let y = build_y_operator(1, &p, &layout).unwrap();
        let x = 1usize << layout.x_qubit(1);
        let levels: Vec<f64> = (0..4usize)
            .map(|lvl| {
                let idx = x
                    | ((lvl & 1) << layout.b_qubit(1, 0))
                    | (((lvl >> 1) & 1) << layout.b_qubit(1, 1));
                y.eval_at(idx)
            })
            .collect();
        let expect = [500.0, 500.0 + 500.0 / 3.0, 500.0 + 1000.0 / 3.0, 1000.0];
        for (a, e) in levels.iter().zip(expect) {
            assert!((a - e).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_bad_params() {
        let mut p = UcpParams::case_study(30.0);
        p.p_min[0] = 800.0;
        assert!(p.validate().is_err());
        let p = UcpParams::case_study(30.0);
        assert!(build_hamiltonian(&p, &RegisterLayout::new(0, 3), 0.0, 1.0).is_err());
        assert!(build_hamiltonian(&p, &RegisterLayout::new(2, 2), 0.0, 1.0).is_err());
    }
}
