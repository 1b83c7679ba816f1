//! Algorithmic core for solving two-stage stochastic programs with a
//! scenario-loaded QAOA circuit.
//!
//! The crate is `no_std` (it needs `alloc`) and contains no I/O. Everything
//! that touches files, configuration or the command line lives in the `qsp`
//! companion crate.
//!
//! Layout of the pipeline:
//!
//! - [`scenarios`]: PV samples, grid discretization, quantile test sets, JS agreement.
//! - [`qgan`]: TwoLocal generator, MLP discriminator and adversarial training.
//! - [`walsh`]: Pauli-Z polynomials and the Walsh-Hadamard expansion of diagonals.
//! - [`ucp`]: the unit-commitment model and its diagonal problem Hamiltonian.
//! - [`statevec`]: dense statevector simulator.
//! - [`qaoa`]: circuit assembly, objective, optimizer and the structural checks.
//! - [`baselines`]: RP / EV / EEV under the L1 evaluation.
//! - [`resources`]: lowering to `{rz, sx, x, cx}` and gate/depth counting.
#![no_std]
// `!(x > 0.0)` style guards are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod baselines;
pub mod error;
mod math;
pub mod qaoa;
pub mod qgan;
pub mod resources;
pub mod rng;
pub mod scenarios;
pub mod statevec;
pub mod ucp;
pub mod walsh;

pub use error::{Error, Result};
