//! Simulator and fidelity-analysis toolkit for dynamically decoupled
//! radio-frequency (DDRF) control of nuclear-spin registers around an
//! NV-center electron spin.
//!
//! The crate models the conditional single-spin propagators generated by a
//! `(tau - pi - 2tau - pi - tau)^(N/2)` decoupling sequence with phase-stepped
//! RF driving, assembles multi-spin entangling gates from them, and scores
//! those gates with average gate fidelity and Kraus-map bath fidelity models.
//!
//! Module map:
//! - [`spinalg`]: complex 2x2/Kronecker kernel, Pauli rotations, axis-angle.
//! - [`system`]: physical parameters, derived frequencies, config loading.
//! - [`evolution`]: piecewise rotating-frame propagators and Bloch sampling.
//! - [`fidelity`]: gate/bath/sinc fidelity models and composition.
//! - [`calibration`]: Rabi-amplitude calibration against the ideal gate.
//! - [`oracle`]: fixed-step integrator of the unapproximated lab Hamiltonian.
//! - [`cli`]: deterministic CSV/JSON command layer used by the `ddrf` binary.

pub mod calibration;
pub mod cli;
pub mod evolution;
pub mod fidelity;
pub mod oracle;
pub mod spinalg;
pub mod system;

pub use spinalg::C64;
