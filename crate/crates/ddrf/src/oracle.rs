//! Brute-force validation integrator: fixed-step RK4 propagation of the full
//! time-dependent branch Hamiltonians with the cosine drive (no rotating-wave
//! approximation), in the same frame the piecewise propagators are computed
//! in. Validates exactly the RWA step and nothing else.

use thiserror::Error;

use crate::evolution::{ConditionalEvolution, ElectronBranch};
use crate::spinalg::{CMatrix, C64};
use crate::system::{DdrfSequence, NuclearSpinParams, SystemError};

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("steps per drive period {0} below the minimum {1}")]
    StepTooCoarse(u32, u32),
    #[error(transparent)]
    System(#[from] SystemError),
}

/// Fixed-step integrator settings. The method is a classical 4th-order
/// Runge-Kutta scheme; adaptivity is deliberately absent for reproducibility.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntegratorSpec {
    pub steps_per_drive_period: u32,
}

impl IntegratorSpec {
    pub const METHOD: &'static str = "fixed-step classical RK4";
    pub const MIN_STEPS_PER_PERIOD: u32 = 64;
    /// Accumulated unitarity defect target over one full sequence.
    pub const UNITARITY_TARGET: f64 = 1.0e-8;

    pub fn new(steps_per_drive_period: u32) -> Result<Self, OracleError> {
        if steps_per_drive_period < Self::MIN_STEPS_PER_PERIOD {
            return Err(OracleError::StepTooCoarse(
                steps_per_drive_period,
                Self::MIN_STEPS_PER_PERIOD,
            ));
        }
        Ok(IntegratorSpec { steps_per_drive_period })
    }
}

impl Default for IntegratorSpec {
    fn default() -> Self {
        IntegratorSpec { steps_per_drive_period: 4096 }
    }
}

type M2 = [[C64; 2]; 2];

const M2_ZERO: M2 = [[C64::new(0.0, 0.0); 2]; 2];

fn m2_identity() -> M2 {
    let mut m = M2_ZERO;
    m[0][0] = C64::new(1.0, 0.0);
    m[1][1] = C64::new(1.0, 0.0);
    m
}

fn m2_mul(a: &M2, b: &M2) -> M2 {
    let mut out = M2_ZERO;
    for r in 0..2 {
        for c in 0..2 {
            out[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}

fn m2_axpy(y: &M2, s: f64, x: &M2) -> M2 {
    let mut out = *y;
    for r in 0..2 {
        for c in 0..2 {
            out[r][c] += s * x[r][c];
        }
    }
    out
}

/// `-i (S + drive(t) I_x) U`
fn deriv(s: &M2, drive: f64, u: &M2) -> M2 {
    let minus_i = C64::new(0.0, -1.0);
    let half_drive = C64::new(0.5 * drive, 0.0);
    let mut h = *s;
    h[0][1] += half_drive;
    h[1][0] += half_drive;
    let mut out = m2_mul(&h, u);
    for r in 0..2 {
        for c in 0..2 {
            out[r][c] *= minus_i;
        }
    }
    out
}

/// Propagate the full-drive branch Hamiltonian of one electron branch across
/// all segments, toggling the static part at pi-pulse times. Returns the
/// 2x2 propagator in the same frame as `evolution::branch_propagator`.
pub fn integrate_branch(
    spin: &NuclearSpinParams,
    seq: &DdrfSequence,
    sigma: ElectronBranch,
    spec: &IntegratorSpec,
) -> Result<CMatrix, OracleError> {
    if spec.steps_per_drive_period < IntegratorSpec::MIN_STEPS_PER_PERIOD {
        return Err(OracleError::StepTooCoarse(
            spec.steps_per_drive_period,
            IntegratorSpec::MIN_STEPS_PER_PERIOD,
        ));
    }
    let omega = seq.drive_freq();
    let omega1 = spin.omega1(seq.omega_l())?;
    let (cb, sb) = (spin.beta.cos(), spin.beta.sin());
    // static parts: omega_L I_z (branch 0) and omega_1 (cos b I_z + sin b I_x)
    let mut static0 = M2_ZERO;
    static0[0][0] = C64::new(0.5 * seq.omega_l(), 0.0);
    static0[1][1] = C64::new(-0.5 * seq.omega_l(), 0.0);
    let mut static1 = M2_ZERO;
    static1[0][0] = C64::new(0.5 * omega1 * cb, 0.0);
    static1[1][1] = C64::new(-0.5 * omega1 * cb, 0.0);
    static1[0][1] = C64::new(0.5 * omega1 * sb, 0.0);
    static1[1][0] = C64::new(0.5 * omega1 * sb, 0.0);

    let h_max = (std::f64::consts::TAU / omega) / spec.steps_per_drive_period as f64;
    let rabi2 = 2.0 * seq.rabi();
    let mut u = m2_identity();
    let n = seq.n_pulses();
    let tau = seq.tau();
    for k in 1..=n + 1 {
        let (start, duration) = if k == 1 {
            (0.0, tau)
        } else if k <= n {
            ((2 * k - 3) as f64 * tau, 2.0 * tau)
        } else {
            ((2 * n - 1) as f64 * tau, tau)
        };
        let branch = if k % 2 == 1 { sigma } else { sigma.other() };
        let s = match branch {
            ElectronBranch::Zero => &static0,
            ElectronBranch::One => &static1,
        };
        let phi = seq.rf_phase(k);
        let steps = (duration / h_max).ceil() as u64;
        let h = duration / steps as f64;
        for m in 0..steps {
            let t = start + m as f64 * h;
            let drive = |tt: f64| rabi2 * (omega * tt + phi).cos();
            let k1 = deriv(s, drive(t), &u);
            let k2 = deriv(s, drive(t + 0.5 * h), &m2_axpy(&u, 0.5 * h, &k1));
            let k3 = deriv(s, drive(t + 0.5 * h), &m2_axpy(&u, 0.5 * h, &k2));
            let k4 = deriv(s, drive(t + h), &m2_axpy(&u, h, &k3));
            let mut incr = k1;
            for r in 0..2 {
                for c in 0..2 {
                    incr[r][c] += 2.0 * (k2[r][c] + k3[r][c]) + k4[r][c];
                }
            }
            u = m2_axpy(&u, h / 6.0, &incr);
        }
    }
    let mut out = CMatrix::zeros(2, 2);
    for r in 0..2 {
        for c in 0..2 {
            out[(r, c)] = u[r][c];
        }
    }
    Ok(out)
}

/// Both branch propagators from the validation integrator, packaged so the
/// standard phase-correction path applies to them.
pub fn integrate_conditional(
    spin: &NuclearSpinParams,
    seq: &DdrfSequence,
    spec: &IntegratorSpec,
) -> Result<ConditionalEvolution, OracleError> {
    let v0 = integrate_branch(spin, seq, ElectronBranch::Zero, spec)?;
    let v1 = integrate_branch(spin, seq, ElectronBranch::One, spec)?;
    Ok(ConditionalEvolution::from_branches(v0, v1, &spin.label, seq.clone()))
}
