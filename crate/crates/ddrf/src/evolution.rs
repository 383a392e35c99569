//! Piecewise rotating-frame propagators for one nuclear spin over a full
//! decoupling sequence, conditional on the electron branch.
//!
//! Each RF segment evolves under a static rotating-wave Hamiltonian in the
//! frame attached to the current electron branch; frame-change factors are
//! inserted at every pi-pulse boundary and the final propagator is returned
//! in the common frame of the sequence start. The deterministic z-rotation
//! left over at the end is removed by `apply_phase_correction`.

use std::f64::consts::TAU;

use thiserror::Error;

use crate::spinalg::{
    expm_herm2, rot_unit, spin_half_ops, CMatrix, SpinAlgError, C64,
};
use crate::system::{DdrfSequence, NuclearSpinParams, SystemError};

#[derive(Debug, Error, PartialEq)]
pub enum EvolutionError {
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    SpinAlg(#[from] SpinAlgError),
    #[error("phase correction applied twice")]
    AlreadyCorrected,
    #[error("initial state norm {0} is not 1 within 1e-9")]
    UnnormalizedState(f64),
    #[error("samples_per_segment must be at least 1")]
    NoSamples,
}

/// Electron spin branch conditioning the nuclear dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElectronBranch {
    Zero,
    One,
}

impl ElectronBranch {
    pub fn index(self) -> usize {
        match self {
            ElectronBranch::Zero => 0,
            ElectronBranch::One => 1,
        }
    }

    pub fn other(self) -> Self {
        match self {
            ElectronBranch::Zero => ElectronBranch::One,
            ElectronBranch::One => ElectronBranch::Zero,
        }
    }
}

impl std::fmt::Display for ElectronBranch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.index())
    }
}

/// Rotating frame a Bloch sample is expressed in: the frame attached to the
/// unflipped (`R0`) or flipped (`R1`) electron branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameTag {
    R0,
    R1,
}

impl std::fmt::Display for FrameTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FrameTag::R0 => write!(f, "R0"),
            FrameTag::R1 => write!(f, "R1"),
        }
    }
}

/// Branch the electron occupies during segment `k` (1-based) given its state
/// `sigma` before the sequence: pi pulses at odd multiples of tau flip it
/// after every odd segment, so odd segments see `sigma`, even see the other.
pub fn branch_in_segment(k: u32, sigma: ElectronBranch) -> ElectronBranch {
    if k % 2 == 1 {
        sigma
    } else {
        sigma.other()
    }
}

/// One RF segment. Start and duration are kept in units of `tau` (exact
/// small integers) so that segment boundaries land on the same float when
/// reached from either side; multiply by `tau` only at the point of use.
#[derive(Debug, Clone, Copy)]
struct Segment {
    k: u32,
    start_units: f64,
    dur_units: f64,
}

impl Segment {
    fn start(&self, tau: f64) -> f64 {
        self.start_units * tau
    }

    fn duration(&self, tau: f64) -> f64 {
        self.dur_units * tau
    }

    fn end(&self, tau: f64) -> f64 {
        (self.start_units + self.dur_units) * tau
    }
}

fn segments(seq: &DdrfSequence) -> Vec<Segment> {
    let n = seq.n_pulses();
    let mut out = Vec::with_capacity(n as usize + 1);
    out.push(Segment { k: 1, start_units: 0.0, dur_units: 1.0 });
    for k in 2..=n {
        out.push(Segment { k, start_units: (2 * k - 3) as f64, dur_units: 2.0 });
    }
    out.push(Segment { k: n + 1, start_units: (2 * n - 1) as f64, dur_units: 1.0 });
    out
}

/// Rotating-wave Hamiltonians of one RF segment with phase `phi` for the two
/// electron branches, in the respective branch frames.
///
/// Built by combining tilted spin operators; the unflipped branch sees the
/// static detuning `omega_L - omega` and the bare drive, the flipped branch
/// the detuning `omega_1 - omega` and the drive projected on its tilted axes.
pub fn rwa_hamiltonians(
    spin: &NuclearSpinParams,
    seq: &DdrfSequence,
    phi: f64,
) -> Result<(CMatrix, CMatrix), SystemError> {
    Ok((
        rwa_hamiltonian(spin, seq, phi, ElectronBranch::Zero)?,
        rwa_hamiltonian(spin, seq, phi, ElectronBranch::One)?,
    ))
}

fn rwa_hamiltonian(
    spin: &NuclearSpinParams,
    seq: &DdrfSequence,
    phi: f64,
    branch: ElectronBranch,
) -> Result<CMatrix, SystemError> {
    let (ix, iy, iz) = spin_half_ops();
    let omega = seq.drive_freq();
    let rabi = seq.rabi();
    let re = |x: f64| C64::new(x, 0.0);
    match branch {
        ElectronBranch::Zero => {
            let h = iz.scale(re(seq.omega_l() - omega));
            let drive = ix
                .scale(re(rabi * phi.cos()))
                .add(&iy.scale(re(rabi * phi.sin())))
                .expect("shape");
            Ok(h.add(&drive).expect("shape"))
        }
        ElectronBranch::One => {
            let omega1 = spin.omega1(seq.omega_l())?;
            let (cb, sb) = (spin.beta.cos(), spin.beta.sin());
            let tilde_z = iz.scale(re(cb)).add(&ix.scale(re(sb))).expect("shape");
            let tilde_x = ix.scale(re(cb)).sub(&iz.scale(re(sb))).expect("shape");
            let tilde_y = iy;
            let h = tilde_z.scale(re(omega1 - omega));
            let drive = tilde_x
                .scale(re(rabi * cb * phi.cos()))
                .add(&tilde_y.scale(re(rabi * cb * phi.sin())))
                .expect("shape");
            Ok(h.add(&drive).expect("shape"))
        }
    }
}

/// Rotating frame attached to branch `j` at time `t`: a rotation by `-omega t`
/// about z (branch 0) or about the tilted axis `(sin beta, 0, cos beta)`
/// (branch 1).
fn frame(spin: &NuclearSpinParams, seq: &DdrfSequence, j: ElectronBranch, t: f64) -> CMatrix {
    let axis = match j {
        ElectronBranch::Zero => [0.0, 0.0, 1.0],
        ElectronBranch::One => [spin.beta.sin(), 0.0, spin.beta.cos()],
    };
    rot_unit(axis, -seq.drive_freq() * t)
}

pub(crate) fn propagate_branch_with(
    spin: &NuclearSpinParams,
    seq: &DdrfSequence,
    sigma: ElectronBranch,
    interior_frames: bool,
    subdivisions: u32,
) -> Result<CMatrix, EvolutionError> {
    assert!(subdivisions >= 1);
    let tau = seq.tau();
    let mut v = CMatrix::identity(2);
    let mut prev: Option<ElectronBranch> = None;
    for seg in segments(seq) {
        let j = branch_in_segment(seg.k, sigma);
        if let Some(p) = prev {
            if interior_frames {
                let change = frame(spin, seq, j, seg.start(tau))
                    .matmul(&frame(spin, seq, p, seg.start(tau)).dagger())
                    .expect("shape");
                v = change.matmul(&v).expect("shape");
            }
        }
        let h = rwa_hamiltonian(spin, seq, seq.rf_phase(seg.k), j)?;
        let u = expm_herm2(&h, seg.duration(tau) / subdivisions as f64)?;
        for _ in 0..subdivisions {
            v = u.matmul(&v).expect("shape");
        }
        prev = Some(j);
    }
    let back = frame(spin, seq, sigma, seq.total_time()).dagger();
    Ok(back.matmul(&v).expect("shape"))
}

/// Propagator of the full sequence for one nuclear spin with the electron in
/// branch `sigma`, expressed in the frame of the sequence start.
pub fn branch_propagator(
    spin: &NuclearSpinParams,
    seq: &DdrfSequence,
    sigma: ElectronBranch,
) -> Result<CMatrix, EvolutionError> {
    propagate_branch_with(spin, seq, sigma, true, 1)
}

/// The pair of branch propagators `(V_0, V_1)` of one spin under one
/// sequence, with a flag recording whether the deterministic end-of-sequence
/// z-rotation has been removed.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalEvolution {
    pub v0: CMatrix,
    pub v1: CMatrix,
    pub spin_label: String,
    pub phase_corrected: bool,
    sequence: DdrfSequence,
}

impl ConditionalEvolution {
    /// Package externally computed branch propagators (e.g. from the
    /// validation integrator) so they share the correction path.
    pub fn from_branches(
        v0: CMatrix,
        v1: CMatrix,
        spin_label: &str,
        sequence: DdrfSequence,
    ) -> Self {
        ConditionalEvolution {
            v0,
            v1,
            spin_label: spin_label.to_string(),
            phase_corrected: false,
            sequence,
        }
    }

    pub fn sequence(&self) -> &DdrfSequence {
        &self.sequence
    }

    pub fn branch(&self, sigma: ElectronBranch) -> &CMatrix {
        match sigma {
            ElectronBranch::Zero => &self.v0,
            ElectronBranch::One => &self.v1,
        }
    }

    /// Remove the deterministic precession accumulated over the sequence by
    /// left-multiplying both branches with `rot(z, -(N omega_1 tau mod 2pi))`,
    /// where `omega_1` belongs to the spin being corrected.
    pub fn apply_phase_correction(self, omega1: f64) -> Result<Self, EvolutionError> {
        if self.phase_corrected {
            return Err(EvolutionError::AlreadyCorrected);
        }
        let angle = (self.sequence.n_pulses() as f64 * omega1 * self.sequence.tau()).rem_euclid(TAU);
        let c = rot_unit([0.0, 0.0, 1.0], -angle);
        Ok(ConditionalEvolution {
            v0: c.matmul(&self.v0).expect("shape"),
            v1: c.matmul(&self.v1).expect("shape"),
            spin_label: self.spin_label,
            phase_corrected: true,
            sequence: self.sequence,
        })
    }
}

/// Compute both branch propagators of `spin` under `seq` (uncorrected).
pub fn ddrf_evolution(
    spin: &NuclearSpinParams,
    seq: &DdrfSequence,
) -> Result<ConditionalEvolution, EvolutionError> {
    Ok(ConditionalEvolution {
        v0: branch_propagator(spin, seq, ElectronBranch::Zero)?,
        v1: branch_propagator(spin, seq, ElectronBranch::One)?,
        spin_label: spin.label.clone(),
        phase_corrected: false,
        sequence: seq.clone(),
    })
}

/// `ddrf_evolution` followed by the phase correction at the spin's own
/// flipped-branch frequency.
pub fn corrected_evolution(
    spin: &NuclearSpinParams,
    seq: &DdrfSequence,
) -> Result<ConditionalEvolution, EvolutionError> {
    let omega1 = spin.omega1(seq.omega_l())?;
    ddrf_evolution(spin, seq)?.apply_phase_correction(omega1)
}

/// One Bloch-vector sample `(2<I_x>, 2<I_y>, 2<I_z>)` at time `t`, expressed
/// in the rotating frame of the segment it was taken in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochSample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub frame: FrameTag,
}

/// Bloch trajectory of one spin across the sequence for a fixed electron
/// branch. Segment boundaries appear twice, once in each adjacent frame.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochTrajectory {
    pub spin_label: String,
    pub branch: ElectronBranch,
    pub samples: Vec<BlochSample>,
    /// State at the end of the sequence in the common start frame.
    pub final_state: [C64; 2],
    /// `final_state` with the end-of-sequence phase correction applied.
    pub corrected_final_state: [C64; 2],
}

fn bloch_of(state: [C64; 2]) -> (f64, f64, f64) {
    let cross = state[0].conj() * state[1];
    (
        2.0 * cross.re,
        2.0 * cross.im,
        state[0].norm_sqr() - state[1].norm_sqr(),
    )
}

/// Sample the in-frame state of `spin` every `duration / samples_per_segment`
/// within each segment, starting from `initial` (in the common start frame).
pub fn bloch_trajectory(
    spin: &NuclearSpinParams,
    seq: &DdrfSequence,
    sigma: ElectronBranch,
    initial: [C64; 2],
    samples_per_segment: u32,
) -> Result<BlochTrajectory, EvolutionError> {
    if samples_per_segment == 0 {
        return Err(EvolutionError::NoSamples);
    }
    let norm = (initial[0].norm_sqr() + initial[1].norm_sqr()).sqrt();
    if (norm - 1.0).abs() > 1.0e-9 {
        return Err(EvolutionError::UnnormalizedState(norm));
    }
    let tau = seq.tau();
    let mut psi = initial;
    let mut samples = Vec::new();
    for seg in segments(seq) {
        let j = branch_in_segment(seg.k, sigma);
        let tag = match j {
            ElectronBranch::Zero => FrameTag::R0,
            ElectronBranch::One => FrameTag::R1,
        };
        let h = rwa_hamiltonian(spin, seq, seq.rf_phase(seg.k), j)?;
        let entering = frame(spin, seq, j, seg.start(tau)).mul_vec2(psi);
        for m in 0..=samples_per_segment {
            let frac = m as f64 / samples_per_segment as f64;
            let dt = seg.duration(tau) * frac;
            let t = (seg.start_units + seg.dur_units * frac) * tau;
            let in_frame = expm_herm2(&h, dt)?.mul_vec2(entering);
            let (x, y, z) = bloch_of(in_frame);
            samples.push(BlochSample { t, x, y, z, frame: tag });
        }
        let leaving = expm_herm2(&h, seg.duration(tau))?.mul_vec2(entering);
        psi = frame(spin, seq, j, seg.end(tau)).dagger().mul_vec2(leaving);
    }
    let omega1 = spin.omega1(seq.omega_l())?;
    let angle = (seq.n_pulses() as f64 * omega1 * seq.tau()).rem_euclid(TAU);
    let corrected = rot_unit([0.0, 0.0, 1.0], -angle).mul_vec2(psi);
    Ok(BlochTrajectory {
        spin_label: spin.label.clone(),
        branch: sigma,
        samples,
        final_state: psi,
        corrected_final_state: corrected,
    })
}
