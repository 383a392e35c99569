//! Shared fixtures for the integration tests: the register parameters used
//! throughout (omega_L = 2pi*432 kHz, N = 48, tau = 8 tau_L, target at
//! A_par = 2pi*50 kHz), plus an independent series-based matrix exponential
//! and seeded random generators for property checks.

#![allow(dead_code)]

use ddrf::spinalg::{CMatrix, C64};
use ddrf::system::{khz_to_rad_per_s, DdrfSequence, NuclearSpinParams, SpinRole};
use rand::Rng;

pub const LARMOR_KHZ: f64 = 432.0;
pub const TARGET_APAR_KHZ: f64 = 50.0;
pub const UNADDRESSED_APAR_KHZ: f64 = 30.0;
pub const N_PULSES: u32 = 48;
pub const TAU_OVER_TAU_L: f64 = 8.0;

pub fn khz(v: f64) -> f64 {
    khz_to_rad_per_s(v)
}

pub fn omega_l() -> f64 {
    khz(LARMOR_KHZ)
}

pub fn tau() -> f64 {
    TAU_OVER_TAU_L * std::f64::consts::TAU / omega_l()
}

pub fn paper_target() -> NuclearSpinParams {
    NuclearSpinParams::new("n1", khz(TARGET_APAR_KHZ), 0.0, SpinRole::Target)
}

pub fn unaddressed(beta_bar: f64) -> NuclearSpinParams {
    NuclearSpinParams::new(
        "n2",
        khz(UNADDRESSED_APAR_KHZ),
        beta_bar,
        SpinRole::Unaddressed,
    )
}

pub fn bath_spin(apar: f64, beta_bar: f64) -> NuclearSpinParams {
    NuclearSpinParams::new("b1", apar, beta_bar, SpinRole::Bath)
}

/// Sequence tuned to the standard target with the given Rabi factor.
pub fn paper_sequence(rabi_factor: f64) -> DdrfSequence {
    DdrfSequence::tuned(
        N_PULSES,
        tau(),
        omega_l(),
        0.0,
        rabi_factor,
        &paper_target(),
    )
    .expect("paper parameters are valid")
}

/// `exp(-i H t)` by scaled Taylor series with repeated squaring: scales the
/// generator until its norm is below 1/2, sums 30 series terms, squares
/// back. Independent of the closed-form Pauli route in the library.
pub fn expm_taylor(h: &CMatrix, t: f64) -> CMatrix {
    let n = h.rows();
    let mut a = h.scale(C64::new(0.0, -t));
    let mut squarings = 0u32;
    while a.max_abs() * n as f64 > 0.5 {
        a = a.scale(C64::new(0.5, 0.0));
        squarings += 1;
    }
    let mut sum = CMatrix::identity(n);
    let mut term = CMatrix::identity(n);
    for k in 1..=30u32 {
        term = term.matmul(&a).expect("square");
        term = term.scale(C64::new(1.0 / k as f64, 0.0));
        sum = sum.add(&term).expect("shape");
    }
    for _ in 0..squarings {
        sum = sum.matmul(&sum).expect("square");
    }
    sum
}

/// Random Hermitian 2x2 with Pauli coefficients in [-bound, bound].
pub fn random_hermitian2(rng: &mut impl Rng, bound: f64) -> CMatrix {
    ddrf::spinalg::hermitian2(
        rng.gen_range(-bound..bound),
        rng.gen_range(-bound..bound),
        rng.gen_range(-bound..bound),
        rng.gen_range(-bound..bound),
    )
}

/// Haar-ish random normalized 2-spinor.
pub fn random_state(rng: &mut impl Rng) -> [C64; 2] {
    let raw = [
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
    ];
    let norm = (raw[0].norm_sqr() + raw[1].norm_sqr()).sqrt();
    [raw[0] / norm, raw[1] / norm]
}
