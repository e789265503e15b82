//! Classical simulator for the encoded lattice Schwinger model.
//!
//! Quantum electrodynamics in one spatial dimension, discretized with
//! staggered fermions and with the gauge field eliminated through the Gauss
//! law, reduces to a spin-1/2 chain with asymmetric long-range ZZ couplings,
//! nearest-neighbour flip-flop terms and staggered local fields. This crate
//! simulates that chain three ways:
//!
//! - **exactly**, with a matrix-free Krylov propagator ([`engine`]) — the
//!   ground truth for every other path;
//! - **digitally**, compiling the Hamiltonian into the native gate set of a
//!   trapped-ion simulator (collective Mølmer–Sørensen blocks, local
//!   rotations, hide/unhide transfers) and executing the Trotterized
//!   protocol ([`trotter`], [`gates`]);
//! - **noisily**, averaging trajectory ensembles over quasi-static coupling
//!   fluctuations, collective dephasing, and hiding-pulse failures
//!   ([`noise`]).
//!
//! Observables ([`observables`]) cover particle density, vacuum persistence
//! and its rate functions, half-chain entanglement entropy, electric field
//! profiles and total magnetization. The [`continuum`] module adds
//! lattice-spacing parameterization, adiabatic ground-state preparation,
//! quench runs and 1/N thermodynamic-limit extrapolation. [`config`] and
//! [`run`] drive everything from declarative TOML run files; the
//! `schwinger-sim` binary is a thin wrapper around them.

pub mod config;
pub mod continuum;
pub mod engine;
pub mod error;
pub mod gates;
mod linalg;
pub mod model;
pub mod noise;
pub mod observables;
pub mod oracle;
pub mod run;
pub mod trotter;

pub use error::{Error, Result};
