//! Two-stage QAOA on top of a loaded scenario register.
//!
//! The circuit is: generator on the scenario register, `H` on both decision
//! registers, `p1` first-stage layers (cost phase of `h1`, mixer on the
//! first-stage qubits), then `p2` second-stage layers (mapping gate from the
//! scenario-dependent terms, the remaining second-stage phase, mixer on the
//! second-stage qubits).

pub mod cobyla;

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qgan::{generator_circuit_at, GeneratorSpec};
use crate::rng::{derive_seed, rng_from_seed};
use crate::statevec::{Circuit, Gate, StateVector};
use crate::ucp::{classical_surrogate, Bits, ProblemHamiltonian, RegisterLayout};
use crate::walsh::ZPolynomial;

use cobyla::{minimize, CobylaOptions};

/// Angles of both stages. The mixer of layer `l` is `RX(-2 beta[l])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationalParams {
    pub gamma1: Vec<f64>,
    pub beta1: Vec<f64>,
    pub gamma2: Vec<f64>,
    pub beta2: Vec<f64>,
}

impl VariationalParams {
    pub fn zeros(p1: usize, p2: usize) -> Self {
        VariationalParams {
            gamma1: vec![0.0; p1],
            beta1: vec![0.0; p1],
            gamma2: vec![0.0; p2],
            beta2: vec![0.0; p2],
        }
    }

    /// `gamma` uniform on `[0, 2 pi)`, `beta` uniform on `[0, pi)`.
    pub fn random<R: Rng + ?Sized>(p1: usize, p2: usize, rng: &mut R) -> Self {
        let mut draw = |n: usize, hi: f64| (0..n).map(|_| rng.random::<f64>() * hi).collect::<Vec<_>>();
        let gamma1 = draw(p1, 2.0 * PI);
        let beta1 = draw(p1, PI);
        let gamma2 = draw(p2, 2.0 * PI);
        let beta2 = draw(p2, PI);
        VariationalParams {
            gamma1,
            beta1,
            gamma2,
            beta2,
        }
    }

    pub fn p1(&self) -> usize {
        self.gamma1.len()
    }

    pub fn p2(&self) -> usize {
        self.gamma2.len()
    }

    /// `[gamma1, beta1, gamma2, beta2]` concatenated.
    pub fn to_flat(&self) -> Vec<f64> {
        [&self.gamma1, &self.beta1, &self.gamma2, &self.beta2]
            .into_iter()
            .flatten()
            .copied()
            .collect()
    }

    pub fn from_flat(p1: usize, p2: usize, v: &[f64]) -> Result<Self> {
        if v.len() != 2 * (p1 + p2) {
            return Err(Error::LengthMismatch {
                expected: 2 * (p1 + p2),
                found: v.len(),
            });
        }
        let (g1, rest) = v.split_at(p1);
        let (b1, rest) = rest.split_at(p1);
        let (g2, b2) = rest.split_at(p2);
        let vp = VariationalParams {
            gamma1: g1.to_vec(),
            beta1: b1.to_vec(),
            gamma2: g2.to_vec(),
            beta2: b2.to_vec(),
        };
        vp.check()?;
        Ok(vp)
    }

    fn check(&self) -> Result<()> {
        if self.beta1.len() != self.gamma1.len() {
            return Err(Error::LengthMismatch {
                expected: self.gamma1.len(),
                found: self.beta1.len(),
            });
        }
        if self.beta2.len() != self.gamma2.len() {
            return Err(Error::LengthMismatch {
                expected: self.gamma2.len(),
                found: self.beta2.len(),
            });
        }
        if self.to_flat().iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("variational angles must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EvalMode {
    Exact,
    Shots(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QaoaConfig {
    pub p1: usize,
    pub p2: usize,
    pub eval_mode: EvalMode,
    /// Budget of objective evaluations.
    pub max_evals: usize,
    /// Final trust radius of the optimizer.
    pub tol: f64,
    /// Initial trust radius of the optimizer.
    pub rhobeg: f64,
}

impl Default for QaoaConfig {
    fn default() -> Self {
        QaoaConfig {
            p1: 4,
            p2: 4,
            eval_mode: EvalMode::Exact,
            max_evals: 400,
            tol: 1e-3,
            rhobeg: 0.6,
        }
    }
}

fn check_register(gen: &GeneratorSpec, layout: &RegisterLayout) -> Result<()> {
    if gen.n_xi != layout.n_xi {
        return Err(Error::LengthMismatch {
            expected: layout.n_xi,
            found: gen.n_xi,
        });
    }
    Ok(())
}

fn push_phases(c: &mut Circuit, poly: &ZPolynomial, gamma: f64) -> Result<()> {
    for (&mask, &coef) in poly.terms() {
        // the identity term is a global phase
        if mask != 0 {
            c.push(Gate::ZPhase {
                mask,
                angle: gamma * coef,
            })?;
        }
    }
    Ok(())
}

/// The full circuit as ZPhase and rotation gates.
pub fn assemble(gen: &GeneratorSpec, ham: &ProblemHamiltonian, vp: &VariationalParams) -> Result<Circuit> {
    check_register(gen, &ham.layout)?;
    let mut c = generator_circuit_at(gen, 0, ham.layout.total_qubits())?;
    c.extend(&decision_layers(ham, vp)?)?;
    Ok(c)
}

/// Everything after the generator: `H` on the decision registers and both
/// QAOA stages. The scenario register is left untouched.
pub fn decision_layers(ham: &ProblemHamiltonian, vp: &VariationalParams) -> Result<Circuit> {
    let layout = &ham.layout;
    vp.check()?;
    let mut c = Circuit::new(layout.total_qubits());
    for q in layout.first_qubits().into_iter().chain(layout.second_qubits()) {
        c.push(Gate::H(q))?;
    }
    for (&g, &b) in vp.gamma1.iter().zip(&vp.beta1) {
        push_phases(&mut c, &ham.h1, g)?;
        for q in layout.first_qubits() {
            c.push(Gate::Rx(q, -2.0 * b))?;
        }
    }
    for (&g, &b) in vp.gamma2.iter().zip(&vp.beta2) {
        push_phases(&mut c, &ham.h2_dep, g)?;
        push_phases(&mut c, &ham.h2_indep, g)?;
        for q in layout.second_qubits() {
            c.push(Gate::Rx(q, -2.0 * b))?;
        }
    }
    Ok(c)
}

fn without_constant(poly: &ZPolynomial) -> Result<Vec<f64>> {
    let terms = poly.terms().iter().filter(|(&m, _)| m != 0).map(|(&m, &c)| (m, c));
    Ok(ZPolynomial::from_terms(poly.n_qubits(), terms)?.reconstruct()?.values)
}

/// Cached simulator for one (generator, Hamiltonian) pair. Cost layers are
/// applied as whole diagonals, which equals the ZPhase products of
/// [`assemble`] exactly because all terms commute.
#[derive(Debug, Clone)]
pub struct Evaluator {
    layout: RegisterLayout,
    start: StateVector,
    phase1: Vec<f64>,
    phase2: Vec<f64>,
    cost: Vec<f64>,
}

impl Evaluator {
    pub fn new(gen: &GeneratorSpec, ham: &ProblemHamiltonian) -> Result<Self> {
        let layout = ham.layout;
        check_register(gen, &layout)?;
        let n = layout.total_qubits();
        let mut start = StateVector::zero(n)?;
        start.run(&generator_circuit_at(gen, 0, n)?)?;
        for q in layout.first_qubits().into_iter().chain(layout.second_qubits()) {
            start.apply(&Gate::H(q))?;
        }
        Ok(Evaluator {
            layout,
            start,
            phase1: without_constant(&ham.h1)?,
            phase2: without_constant(&ham.h2()?)?,
            cost: ham.total()?.reconstruct()?.values,
        })
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    /// `H_P` on every basis state.
    pub fn cost_diagonal(&self) -> &[f64] {
        &self.cost
    }

    pub fn final_state(&self, vp: &VariationalParams) -> Result<StateVector> {
        vp.check()?;
        let mut sv = self.start.clone();
        for (&g, &b) in vp.gamma1.iter().zip(&vp.beta1) {
            sv.apply_diagonal_phase(&self.phase1, g)?;
            for q in self.layout.first_qubits() {
                sv.apply(&Gate::Rx(q, -2.0 * b))?;
            }
        }
        for (&g, &b) in vp.gamma2.iter().zip(&vp.beta2) {
            sv.apply_diagonal_phase(&self.phase2, g)?;
            for q in self.layout.second_qubits() {
                sv.apply(&Gate::Rx(q, -2.0 * b))?;
            }
        }
        Ok(sv)
    }

    pub fn exact(&self, vp: &VariationalParams) -> Result<f64> {
        self.final_state(vp)?.expectation_diagonal(&self.cost)
    }

    /// Mean of `H_P` over `shots` measured basis states.
    pub fn sampled<R: Rng + ?Sized>(&self, vp: &VariationalParams, shots: u64, rng: &mut R) -> Result<f64> {
        let counts = self.final_state(vp)?.sample(shots, rng)?;
        let total: f64 = counts.counts.iter().map(|(&i, &k)| self.cost[i] * k as f64).sum();
        Ok(total / shots as f64)
    }

    pub fn evaluate<R: Rng + ?Sized>(&self, vp: &VariationalParams, mode: EvalMode, rng: &mut R) -> Result<f64> {
        match mode {
            EvalMode::Exact => self.exact(vp),
            EvalMode::Shots(n) => self.sampled(vp, n, rng),
        }
    }
}

/// One-off objective evaluation. Prefer [`Evaluator`] in loops.
pub fn objective<R: Rng + ?Sized>(
    gen: &GeneratorSpec,
    ham: &ProblemHamiltonian,
    vp: &VariationalParams,
    mode: EvalMode,
    rng: &mut R,
) -> Result<f64> {
    Evaluator::new(gen, ham)?.evaluate(vp, mode, rng)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub params: VariationalParams,
    pub objective: f64,
    pub first_stage_marginal: Vec<f64>,
    pub map: Bits,
    pub evaluations: usize,
    pub trace: Vec<f64>,
}

/// Random start, then derivative-free search. Returns the best parameters
/// seen; the marginal is exact in exact mode and sampled otherwise.
pub fn optimize(gen: &GeneratorSpec, ham: &ProblemHamiltonian, cfg: &QaoaConfig, seed: u64) -> Result<RunResult> {
    if cfg.p1 == 0 || cfg.p2 == 0 {
        return Err(Error::invalid("QAOA depths must be at least 1"));
    }
    let ev = Evaluator::new(gen, ham)?;
    let x0 = VariationalParams::random(cfg.p1, cfg.p2, &mut rng_from_seed(derive_seed(seed, "qaoa-init", 0))).to_flat();
    let mut shots = rng_from_seed(derive_seed(seed, "qaoa-shots", 0));
    let opts = CobylaOptions {
        rho_begin: cfg.rhobeg,
        rho_end: cfg.tol,
        max_evals: cfg.max_evals,
    };
    let found = minimize(
        |x| {
            let vp = VariationalParams::from_flat(cfg.p1, cfg.p2, x)?;
            ev.evaluate(&vp, cfg.eval_mode, &mut shots)
        },
        &x0,
        &opts,
    )?;
    let params = VariationalParams::from_flat(cfg.p1, cfg.p2, &found.x)?;
    let state = ev.final_state(&params)?;
    let layout = &ham.layout;
    let marginal = match cfg.eval_mode {
        EvalMode::Exact => first_stage_marginal(&state, layout)?,
        EvalMode::Shots(n) => {
            let mut rng = rng_from_seed(derive_seed(seed, "qaoa-readout", 0));
            state.sample(n, &mut rng)?.field_frequencies(layout.first_offset(), layout.n_first())
        }
    };
    let map = map_solution(&marginal, layout.n_first())?;
    Ok(RunResult {
        params,
        objective: found.f,
        first_stage_marginal: marginal,
        map,
        evaluations: found.evaluations,
        trace: found.trace,
    })
}

pub fn first_stage_marginal(state: &StateVector, layout: &RegisterLayout) -> Result<Vec<f64>> {
    state.marginal_probs(&layout.first_qubits())
}

/// Most probable first-stage outcome; ties go to the smallest index.
pub fn map_solution(marginal: &[f64], units: usize) -> Result<Bits> {
    if marginal.len() != 1usize << units {
        return Err(Error::LengthMismatch {
            expected: 1 << units,
            found: marginal.len(),
        });
    }
    let mut best = 0;
    for (k, &p) in marginal.iter().enumerate() {
        if p > marginal[best] {
            best = k;
        }
    }
    Ok(Bits::from_index(best, units))
}

/// `|<H_P>_full - sum_k |alpha_k|^2 [h1(x_k) + sum_s p_s Q(k, s)]|`, where the
/// right side is rebuilt from small independent simulations: the first-stage
/// register alone, the generator alone, and the second-stage register for
/// each fixed `(x_k, xi_s)` with its recourse diagonal taken from the
/// classical cost function.
pub fn verify_prop1(gen: &GeneratorSpec, ham: &ProblemHamiltonian, vp: &VariationalParams) -> Result<f64> {
    let layout = &ham.layout;
    let params = &ham.params;
    let lhs = Evaluator::new(gen, ham)?.exact(vp)?;

    let m = layout.n_first();
    let startup = |x: &Bits| -> f64 { (0..m).filter(|&i| x.get(i)).map(|i| params.startup_cost[i]).sum() };
    let firsts: Vec<Bits> = (0..1usize << m).map(|k| Bits::from_index(k, m)).collect();
    let h1: Vec<f64> = firsts.iter().map(startup).collect();
    let mut first = StateVector::zero(m)?;
    for q in 0..m {
        first.apply(&Gate::H(q))?;
    }
    for (&g, &b) in vp.gamma1.iter().zip(&vp.beta1) {
        first.apply_diagonal_phase(&h1, g)?;
        for q in 0..m {
            first.apply(&Gate::Rx(q, -2.0 * b))?;
        }
    }
    let alpha = first.probabilities();

    let mut scen = StateVector::zero(gen.n_xi)?;
    scen.run(&crate::qgan::generator_circuit(gen)?)?;
    let p = scen.probabilities();
    let xi = ham.scenario_values();

    let n2 = layout.n_second();
    let seconds: Vec<Bits> = (0..1usize << n2).map(|b| Bits::from_index(b, n2)).collect();
    let mut rhs = 0.0;
    for (k, x) in firsts.iter().enumerate() {
        let mut inner = 0.0;
        for (s, &xs) in xi.iter().enumerate() {
            let q: Vec<f64> = seconds
                .iter()
                .map(|b| classical_surrogate(x, b, xs, params).map(|v| v - h1[k]))
                .collect::<Result<_>>()?;
            let mut sv = StateVector::zero(n2)?;
            for t in 0..n2 {
                sv.apply(&Gate::H(t))?;
            }
            for (&g, &b) in vp.gamma2.iter().zip(&vp.beta2) {
                sv.apply_diagonal_phase(&q, g)?;
                for t in 0..n2 {
                    sv.apply(&Gate::Rx(t, -2.0 * b))?;
                }
            }
            inner += p[s] * sv.expectation_diagonal(&q)?;
        }
        rhs += alpha[k] * (h1[k] + inner);
    }
    Ok((lhs - rhs).abs())
}

/// Largest gap between the first-stage marginal conditioned on a scenario
/// outcome and the unconditioned marginal, over outcomes with nonzero mass.
pub fn verify_nonanticipativity(state: &StateVector, layout: &RegisterLayout) -> Result<f64> {
    let first = layout.first_qubits();
    let scen = layout.scenario_qubits();
    let marginal = state.marginal_probs(&first)?;
    let ps = state.marginal_probs(&scen)?;
    let mut worst: f64 = 0.0;
    for (s, &p) in ps.iter().enumerate() {
        if p <= 1e-12 {
            continue;
        }
        let cond = state.conditional_marginal(&first, &scen, s)?;
        for (a, b) in cond.iter().zip(&marginal) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}
