//! Rabi-amplitude calibration: a deterministic 1-D search for the correction
//! factor that maximizes the target-only gate fidelity.
//!
//! The uncorrected relation `N Omega tau = pi/2` is exact only in the
//! idealized precession/driving alternation; the optimal factor under the
//! full rotating-wave model sits slightly below 1.

use thiserror::Error;

use crate::evolution::corrected_evolution;
use crate::fidelity::{assemble_gate, gate_fidelity, ideal_crot, FidelityError};
use crate::system::{DdrfSequence, NuclearSpinParams, SpinRole, SystemError};

#[derive(Debug, Error)]
pub enum CalibrationError {
    #[error("calibration target {label:?} has role {role}")]
    NotATarget { label: String, role: SpinRole },
    #[error("sequence drive {drive:.6e} rad/s is not the spin's omega_1 {omega1:.6e} rad/s")]
    DriveMismatch { drive: f64, omega1: f64 },
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Fidelity(#[from] FidelityError),
}

/// Outcome of a Rabi-factor calibration run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationResult {
    pub rabi_factor: f64,
    pub achieved_fidelity: f64,
    /// Number of objective (gate-fidelity) evaluations performed.
    pub iterations: u32,
    /// False when the search ended on a boundary of the allowed interval.
    pub converged: bool,
}

pub const SEARCH_INTERVAL: (f64, f64) = (0.8, 1.0);
pub const COARSE_GRID_POINTS: usize = 21;
pub const BRACKET_TOLERANCE: f64 = 1.0e-7;

const INV_PHI: f64 = 0.618_033_988_749_894_9;
const BOUNDARY_MARGIN: f64 = 1.0e-6;

/// Maximize the d=4 gate fidelity of the assembled target gate against the
/// ideal conditional rotation over the Rabi factor in `[0.8, 1.0]`: a
/// 21-point coarse grid seeds a golden-section refinement of the best
/// surrounding bracket down to width 1e-7.
pub fn calibrate_rabi(
    spin: &NuclearSpinParams,
    seq: &DdrfSequence,
) -> Result<CalibrationResult, CalibrationError> {
    calibrate_rabi_with_grid(spin, seq, COARSE_GRID_POINTS)
}

/// Same search with an explicit coarse-grid size; the result is expected to
/// be invariant to refinement of the seeding grid (the objective's best
/// basin is broad), which the test suite asserts.
pub fn calibrate_rabi_with_grid(
    spin: &NuclearSpinParams,
    seq: &DdrfSequence,
    grid_points: usize,
) -> Result<CalibrationResult, CalibrationError> {
    if spin.role != SpinRole::Target {
        return Err(CalibrationError::NotATarget {
            label: spin.label.clone(),
            role: spin.role,
        });
    }
    let omega1 = spin.omega1(seq.omega_l())?;
    if (seq.drive_freq() - omega1).abs() > 1.0e-6 * omega1 {
        return Err(CalibrationError::DriveMismatch { drive: seq.drive_freq(), omega1 });
    }
    let grid_points = grid_points.max(2);
    let mut iterations = 0u32;
    let mut best = (f64::NAN, f64::NEG_INFINITY);
    let mut objective = |factor: f64| -> Result<f64, CalibrationError> {
        let tuned = seq.with_rabi_factor(factor)?;
        let ev = corrected_evolution(spin, &tuned).map_err(FidelityError::from)?;
        let gate = assemble_gate(std::slice::from_ref(&ev))?;
        let f = gate_fidelity(&ideal_crot(0), &gate.matrix)?.fidelity;
        iterations += 1;
        if f > best.1 {
            best = (factor, f);
        }
        Ok(f)
    };

    let (lo, hi) = SEARCH_INTERVAL;
    let step = (hi - lo) / (grid_points - 1) as f64;
    let mut grid_best = (0usize, f64::NEG_INFINITY);
    for i in 0..grid_points {
        let f = objective(lo + step * i as f64)?;
        if f > grid_best.1 {
            grid_best = (i, f);
        }
    }
    let mut a = lo + step * grid_best.0.saturating_sub(1) as f64;
    let mut b = lo + step * (grid_best.0 + 1).min(grid_points - 1) as f64;

    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = objective(c)?;
    let mut fd = objective(d)?;
    while b - a > BRACKET_TOLERANCE {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = objective(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = objective(d)?;
        }
    }

    let (factor, fidelity) = best;
    let interior = factor - lo > BOUNDARY_MARGIN && hi - factor > BOUNDARY_MARGIN;
    Ok(CalibrationResult {
        rabi_factor: factor,
        achieved_fidelity: fidelity,
        iterations,
        converged: interior,
    })
}
