//! Lowering to the `{rz, sx, x, cx}` basis, gate and depth counts, and the
//! scaling sweeps over scenario count, QAOA depth and unit count.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::qaoa::{assemble, decision_layers, VariationalParams};
use crate::qgan::{generator_circuit, GeneratorSpec};
use crate::statevec::{Circuit, Gate};
use crate::ucp::{build_hamiltonian, ProblemHamiltonian, RegisterLayout, UcpParams};
use crate::walsh::ZPolynomial;
use crate::{Error, Result};

fn is_basis(g: &Gate) -> bool {
    matches!(g, Gate::Rz(..) | Gate::Sx(_) | Gate::X(_) | Gate::Cx(..))
}

fn lower_h(q: usize, out: &mut Vec<Gate>) {
    out.extend([Gate::Rz(q, FRAC_PI_2), Gate::Sx(q), Gate::Rz(q, FRAC_PI_2)]);
}

/// `rz(lam) sx rz(theta + pi) sx rz(phi + pi)` in circuit order, equal to
/// `U(theta, phi, lam)` up to global phase.
fn lower_u(q: usize, theta: f64, phi: f64, lam: f64, out: &mut Vec<Gate>) {
    out.extend([
        Gate::Rz(q, lam),
        Gate::Sx(q),
        Gate::Rz(q, theta + PI),
        Gate::Sx(q),
        Gate::Rz(q, phi + PI),
    ]);
}

fn lower_gate(g: &Gate, out: &mut Vec<Gate>) -> Result<()> {
    match *g {
        Gate::Rz(..) | Gate::Sx(_) | Gate::X(_) | Gate::Cx(..) => out.push(g.clone()),
        Gate::H(q) => lower_h(q, out),
        Gate::Ry(q, t) => lower_u(q, t, 0.0, 0.0, out),
        Gate::Rx(q, t) => lower_u(q, t, -FRAC_PI_2, FRAC_PI_2, out),
        Gate::Cz(c, t) => {
            lower_h(t, out);
            out.push(Gate::Cx(c, t));
            lower_h(t, out);
        }
        Gate::ZPhase { mask, angle } => {
            let support: Vec<usize> = (0..64).filter(|&q| mask >> q & 1 == 1).collect();
            // parity of the support collects on the lowest qubit
            let ladder: Vec<Gate> = support.windows(2).rev().map(|w| Gate::Cx(w[1], w[0])).collect();
            out.extend(ladder.iter().cloned());
            if let Some(&low) = support.first() {
                out.push(Gate::Rz(low, 2.0 * angle));
            }
            out.extend(ladder.into_iter().rev());
        }
        Gate::DiagPhase { .. } => return Err(Error::UnsupportedGate("diagphase")),
    }
    Ok(())
}

/// Rewrite every gate with a fixed table. No cancellation is attempted.
pub fn lower_to_basis(circuit: &Circuit) -> Result<Circuit> {
    let mut gates = Vec::with_capacity(circuit.gates.len() * 3);
    for g in &circuit.gates {
        lower_gate(g, &mut gates)?;
    }
    Ok(Circuit {
        n_qubits: circuit.n_qubits,
        gates,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ResourceReport {
    pub n_qubits: usize,
    pub rz: usize,
    pub sx: usize,
    pub x: usize,
    pub cx: usize,
    pub total: usize,
    pub depth: usize,
}

/// Gate counts and layered depth of a basis-gate circuit.
pub fn count_and_depth(circuit: &Circuit) -> Result<ResourceReport> {
    let mut r = ResourceReport {
        n_qubits: circuit.n_qubits,
        ..ResourceReport::default()
    };
    let mut frontier = vec![0usize; circuit.n_qubits];
    for g in &circuit.gates {
        if !is_basis(g) {
            return Err(Error::UnsupportedGate(g.name()));
        }
        match *g {
            Gate::Rz(q, _) => {
                r.rz += 1;
                frontier[q] += 1;
            }
            Gate::Sx(q) => {
                r.sx += 1;
                frontier[q] += 1;
            }
            Gate::X(q) => {
                r.x += 1;
                frontier[q] += 1;
            }
            Gate::Cx(c, t) => {
                r.cx += 1;
                let level = frontier[c].max(frontier[t]) + 1;
                frontier[c] = level;
                frontier[t] = level;
            }
            _ => unreachable!(),
        }
    }
    r.total = r.rz + r.sx + r.x + r.cx;
    r.depth = frontier.into_iter().max().unwrap_or(0);
    Ok(r)
}

pub fn resources_of(circuit: &Circuit) -> Result<ResourceReport> {
    count_and_depth(&lower_to_basis(circuit)?)
}

/// Which scaling study a sweep row belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Panel {
    /// Generator alone, `N` varying.
    QganOnly,
    /// Decision layers without the generator, `p1` varying.
    FirstStageDepth,
    /// Decision layers without the generator, `p2` varying.
    SecondStageDepth,
    /// Full circuit, unit count varying.
    Units,
}

impl Panel {
    pub fn label(self) -> &'static str {
        match self {
            Panel::QganOnly => "qgan_only",
            Panel::FirstStageDepth => "first_stage_depth",
            Panel::SecondStageDepth => "second_stage_depth",
            Panel::Units => "units",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub panel: Panel,
    pub n_scenarios: usize,
    pub units: usize,
    pub p1: usize,
    pub p2: usize,
    pub include_qgan: bool,
    pub report: ResourceReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    /// Scenario counts, powers of two.
    pub n_list: Vec<usize>,
    /// Unit counts for the [`Panel::Units`] rows.
    pub m_list: Vec<usize>,
    /// Depths swept in the two depth panels.
    pub p_list: Vec<usize>,
    /// Depths held fixed while the other one varies, and for the unit panel.
    pub p1: usize,
    pub p2: usize,
    /// Units in the scenario and depth panels.
    pub units: usize,
    /// Scenario count in the unit panel.
    pub n_for_units: usize,
    pub lambda: f64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            n_list: vec![4, 8, 16, 32, 64],
            m_list: vec![1, 2, 3, 4, 5, 6],
            p_list: vec![1, 2, 3, 4],
            p1: 4,
            p2: 4,
            units: 3,
            n_for_units: 32,
            lambda: 30.0,
        }
    }
}

fn n_xi_of(n: usize) -> Result<usize> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    Ok(n.trailing_zeros() as usize)
}

fn hamiltonian(n_xi: usize, units: usize, lambda: f64) -> Result<ProblemHamiltonian> {
    let params = UcpParams::cycled(units, lambda);
    build_hamiltonian(&params, &RegisterLayout::new(n_xi, units), 0.0, 2500.0)
}

/// Lowered resources of the `h2_dep` phase block at one layer.
pub fn mapping_block(n_xi: usize, units: usize, lambda: f64) -> Result<ResourceReport> {
    let ham = hamiltonian(n_xi, units, lambda)?;
    let mut c = Circuit::new(ham.layout.total_qubits());
    push_block(&mut c, &ham.h2_dep)?;
    resources_of(&c)
}

fn push_block(c: &mut Circuit, poly: &ZPolynomial) -> Result<()> {
    for &mask in poly.terms().keys() {
        if mask != 0 {
            c.push(Gate::ZPhase { mask, angle: 0.0 })?;
        }
    }
    Ok(())
}

/// All rows of the four panels, built with zero angles.
pub fn sweep_scaling(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for &n in &spec.n_list {
        let n_xi = n_xi_of(n)?;
        let report = resources_of(&generator_circuit(&GeneratorSpec::new(n_xi)?)?)?;
        rows.push(SweepRow {
            panel: Panel::QganOnly,
            n_scenarios: n,
            units: 0,
            p1: 0,
            p2: 0,
            include_qgan: true,
            report,
        });
    }
    for &n in &spec.n_list {
        let ham = hamiltonian(n_xi_of(n)?, spec.units, spec.lambda)?;
        for (panel, depths) in [
            (Panel::FirstStageDepth, spec.p_list.iter().map(|&p| (p, spec.p2)).collect::<Vec<_>>()),
            (Panel::SecondStageDepth, spec.p_list.iter().map(|&p| (spec.p1, p)).collect()),
        ] {
            for (p1, p2) in depths {
                let report = resources_of(&decision_layers(&ham, &VariationalParams::zeros(p1, p2))?)?;
                rows.push(SweepRow {
                    panel,
                    n_scenarios: n,
                    units: spec.units,
                    p1,
                    p2,
                    include_qgan: false,
                    report,
                });
            }
        }
    }
    let n_xi = n_xi_of(spec.n_for_units)?;
    let gen = GeneratorSpec::new(n_xi)?;
    for &m in &spec.m_list {
        let ham = hamiltonian(n_xi, m, spec.lambda)?;
        let report = resources_of(&assemble(&gen, &ham, &VariationalParams::zeros(spec.p1, spec.p2))?)?;
        rows.push(SweepRow {
            panel: Panel::Units,
            n_scenarios: spec.n_for_units,
            units: m,
            p1: spec.p1,
            p2: spec.p2,
            include_qgan: true,
            report,
        });
    }
    Ok(rows)
}
