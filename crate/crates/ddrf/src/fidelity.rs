//! Fidelity models: average gate fidelity against ideal conditional
//! rotations, the Kraus-channel fidelity of traced-out bath spins, the sinc^2
//! resonance approximation, the unaddressed-spin error relation, and
//! multi-pair fidelity composition.

use std::f64::consts::FRAC_PI_2;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::evolution::{corrected_evolution, ConditionalEvolution, EvolutionError};
use crate::spinalg::{kron_all, rot_unit, CMatrix, SpinAlgError, C64, ONE, ZERO};
use crate::system::{DdrfSequence, NuclearSpinParams, SpinRole};

#[derive(Debug, Error)]
pub enum FidelityError {
    #[error("gate dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("matrix is not unitary within tolerance (defect {0:.3e})")]
    NonUnitary(f64),
    #[error("evolution of spin {0:?} is not phase corrected")]
    NotPhaseCorrected(String),
    #[error("evolutions stem from different sequences")]
    MixedSequences,
    #[error("gate assembly needs at least one spin evolution")]
    EmptyGate,
    #[error("spin {label:?} has role {role}, expected {expected}")]
    RoleMismatch {
        label: String,
        role: SpinRole,
        expected: SpinRole,
    },
    #[error("conditional state norm {0} is not 1 within 1e-9")]
    BadOverlapNorm(f64),
    #[error("target-subspace qubit count must be in 1..=30, got {0}")]
    BadSubspaceCount(usize),
    #[error("fidelity factor {0} outside [0, 1]")]
    FactorOutOfRange(f64),
    #[error("pair count must be at least 1")]
    NoPairs,
    #[error("expected {expected} per-pair factors, got {got}")]
    FactorCountMismatch { expected: usize, got: usize },
    #[error("factorization check needs exactly 2 register spins, found {0}")]
    RegisterCount(usize),
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
    #[error(transparent)]
    SpinAlg(#[from] SpinAlgError),
}

/// Which model produced a fidelity number.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FidelityModel {
    ExactGate,
    KrausBath,
    SincApprox,
    Composed,
}

impl std::fmt::Display for FidelityModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FidelityModel::ExactGate => write!(f, "exact"),
            FidelityModel::KrausBath => write!(f, "kraus"),
            FidelityModel::SincApprox => write!(f, "sinc"),
            FidelityModel::Composed => write!(f, "composed"),
        }
    }
}

/// A fidelity value with its complement and provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelityReport {
    pub fidelity: f64,
    pub infidelity: f64,
    pub model: FidelityModel,
    /// Short hash of the numeric inputs, for traceable outputs.
    pub inputs_digest: String,
}

impl FidelityReport {
    fn new(fidelity: f64, model: FidelityModel, digest: String) -> Self {
        FidelityReport { fidelity, infidelity: 1.0 - fidelity, model, inputs_digest: digest }
    }
}

/// First 16 hex digits of a SHA-256 over a tag and the input values.
fn digest_inputs<I: IntoIterator<Item = f64>>(tag: &str, values: I) -> String {
    let mut hasher = Sha256::new();
    hasher.update(tag.as_bytes());
    for v in values {
        hasher.update(v.to_le_bytes());
    }
    let bytes = hasher.finalize();
    let mut out = String::with_capacity(16);
    for b in &bytes[..8] {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

fn matrix_values<'a>(ms: &'a [&'a CMatrix]) -> impl Iterator<Item = f64> + 'a {
    ms.iter().flat_map(|m| {
        (0..m.rows()).flat_map(move |r| {
            (0..m.cols()).flat_map(move |c| [m[(r, c)].re, m[(r, c)].im])
        })
    })
}

const GATE_UNITARY_TOL: f64 = 1e-9;

/// Average gate fidelity `(d + |Tr[V_ideal^dag V_actual]|^2) / (d(d+1))` of
/// two unitaries on the same space.
pub fn gate_fidelity(
    v_ideal: &CMatrix,
    v_actual: &CMatrix,
) -> Result<FidelityReport, FidelityError> {
    if v_ideal.rows() != v_actual.rows() || v_ideal.cols() != v_actual.cols() {
        return Err(FidelityError::DimensionMismatch(v_ideal.rows(), v_actual.rows()));
    }
    for m in [v_ideal, v_actual] {
        let defect = m.unitarity_defect();
        if defect > GATE_UNITARY_TOL {
            return Err(FidelityError::NonUnitary(defect));
        }
    }
    let d = v_ideal.rows() as f64;
    let tr = v_ideal.dagger().matmul(v_actual)?.trace();
    let f = (d + tr.norm_sqr()) / (d * (d + 1.0));
    let digest = digest_inputs("gate", matrix_values(&[v_ideal, v_actual]));
    Ok(FidelityReport::new(f, FidelityModel::ExactGate, digest))
}

/// Ideal conditional rotation `|0><0| x R_x(pi/2) x 1 + |1><1| x R_x(-pi/2) x 1`
/// with the target spin first and `spectators` identity slots after it.
pub fn ideal_crot(spectators: usize) -> CMatrix {
    ideal_crot_at(0, spectators + 1)
}

/// Ideal conditional rotation on `n_spins` nuclear spins with the rotated
/// spin at position `slot` (0-based); all other spins are untouched.
pub fn ideal_crot_at(slot: usize, n_spins: usize) -> CMatrix {
    assert!(slot < n_spins);
    let id = CMatrix::identity(2);
    let proj0 = CMatrix::from_rows(&[&[ONE, ZERO], &[ZERO, ZERO]]);
    let proj1 = CMatrix::from_rows(&[&[ZERO, ZERO], &[ZERO, ONE]]);
    let mut total = CMatrix::zeros(2 << n_spins, 2 << n_spins);
    for (proj, sign) in [(proj0, 1.0), (proj1, -1.0)] {
        let rx = rot_unit([1.0, 0.0, 0.0], sign * FRAC_PI_2);
        let mut factors: Vec<&CMatrix> = vec![&proj];
        for i in 0..n_spins {
            factors.push(if i == slot { &rx } else { &id });
        }
        total = total.add(&kron_all(&factors)).expect("shape");
    }
    total
}

/// Electron-block-diagonal gate over electron x (ordered nuclear spins),
/// built from per-spin conditional evolutions.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiSpinGate {
    pub matrix: CMatrix,
    pub spin_labels: Vec<String>,
}

impl MultiSpinGate {
    pub fn dimension(&self) -> usize {
        self.matrix.rows()
    }
}

/// Assemble `sum_j sigma_jj x V_j^(1) x ... x V_j^(K)` from phase-corrected
/// evolutions of the same sequence, in the given spin order.
pub fn assemble_gate(evs: &[ConditionalEvolution]) -> Result<MultiSpinGate, FidelityError> {
    if evs.is_empty() {
        return Err(FidelityError::EmptyGate);
    }
    for ev in evs {
        if !ev.phase_corrected {
            return Err(FidelityError::NotPhaseCorrected(ev.spin_label.clone()));
        }
        if ev.sequence() != evs[0].sequence() {
            return Err(FidelityError::MixedSequences);
        }
    }
    let proj0 = CMatrix::from_rows(&[&[ONE, ZERO], &[ZERO, ZERO]]);
    let proj1 = CMatrix::from_rows(&[&[ZERO, ZERO], &[ZERO, ONE]]);
    let dim = 2 << evs.len();
    let mut total = CMatrix::zeros(dim, dim);
    for (proj, pick) in [
        (proj0, fn_v0 as fn(&ConditionalEvolution) -> &CMatrix),
        (proj1, fn_v1 as fn(&ConditionalEvolution) -> &CMatrix),
    ] {
        let mut factors: Vec<&CMatrix> = vec![&proj];
        factors.extend(evs.iter().map(pick));
        total = total.add(&kron_all(&factors)).expect("shape");
    }
    Ok(MultiSpinGate {
        matrix: total,
        spin_labels: evs.iter().map(|e| e.spin_label.clone()).collect(),
    })
}

fn fn_v0(ev: &ConditionalEvolution) -> &CMatrix {
    &ev.v0
}

fn fn_v1(ev: &ConditionalEvolution) -> &CMatrix {
    &ev.v1
}

/// Conditional final-state amplitudes of one bath spin started in `|up>`:
/// `up[j] = <up|Psi_j>`, `down[j] = <down|Psi_j>` for electron branch `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct BathSpinOverlaps {
    pub label: String,
    pub up: [C64; 2],
    pub down: [C64; 2],
}

impl BathSpinOverlaps {
    pub fn from_states(
        label: &str,
        psi0: [C64; 2],
        psi1: [C64; 2],
    ) -> Result<Self, FidelityError> {
        for psi in [psi0, psi1] {
            let norm = (psi[0].norm_sqr() + psi[1].norm_sqr()).sqrt();
            if (norm - 1.0).abs() > 1.0e-9 {
                return Err(FidelityError::BadOverlapNorm(norm));
            }
        }
        Ok(BathSpinOverlaps {
            label: label.to_string(),
            up: [psi0[0], psi1[0]],
            down: [psi0[1], psi1[1]],
        })
    }

    /// `<Psi_0|Psi_1>`; the bath fidelity depends on the spin only through
    /// this number, making it invariant under joint rotations of both states.
    pub fn overlap(&self) -> C64 {
        self.up[0].conj() * self.up[1] + self.down[0].conj() * self.down[1]
    }
}

/// Run the sequence on a bath spin and record its conditional final states.
pub fn bath_overlaps_from_sequence(
    spin: &NuclearSpinParams,
    seq: &DdrfSequence,
) -> Result<BathSpinOverlaps, FidelityError> {
    if spin.role != SpinRole::Bath {
        return Err(FidelityError::RoleMismatch {
            label: spin.label.clone(),
            role: spin.role,
            expected: SpinRole::Bath,
        });
    }
    let ev = corrected_evolution(spin, seq)?;
    let psi0 = ev.v0.col(0);
    let psi1 = ev.v1.col(0);
    BathSpinOverlaps::from_states(&spin.label, [psi0[0], psi0[1]], [psi1[0], psi1[1]])
}

/// Beyond this many bath spins the `2^(L-K)`-term enumeration is replaced by
/// the algebraically identical product form.
pub const BATH_ENUMERATION_MAX: usize = 12;

/// Fidelity of an ideally performed gate on `k` target-subspace nuclear spins
/// when the listed bath spins are traced out:
/// `F = (1 + 2^(k-1) sum_i |sum_j c_j^(i) p_j^(i)|^2) / (2^(k+1) + 1)`.
pub fn bath_fidelity(
    k: usize,
    baths: &[BathSpinOverlaps],
) -> Result<FidelityReport, FidelityError> {
    if k == 0 || k > 30 {
        return Err(FidelityError::BadSubspaceCount(k));
    }
    let sum = if baths.len() <= BATH_ENUMERATION_MAX {
        bath_sum_enumerated(baths)
    } else {
        bath_sum_product(baths)
    };
    let weight = (1u64 << (k - 1)) as f64;
    let dim_plus = (2u64 << k) as f64 + 1.0;
    let f = (1.0 + weight * sum) / dim_plus;
    let digest = digest_inputs(
        "bath",
        std::iter::once(k as f64).chain(baths.iter().flat_map(|b| {
            [
                b.up[0].re, b.up[0].im, b.up[1].re, b.up[1].im,
                b.down[0].re, b.down[0].im, b.down[1].re, b.down[1].im,
            ]
        })),
    );
    Ok(FidelityReport::new(f, FidelityModel::KrausBath, digest))
}

/// `sum_i |sum_j c_j^(i) p_j^(i)|^2` by enumerating bath basis outcomes.
fn bath_sum_enumerated(baths: &[BathSpinOverlaps]) -> f64 {
    let m = baths.len();
    let mut sum = 0.0;
    for i in 0..(1u64 << m) {
        let mut amp = [ONE, ONE];
        for (l, bath) in baths.iter().enumerate() {
            let down = (i >> l) & 1 == 1;
            for j in 0..2 {
                amp[j] *= if down { bath.down[j] } else { bath.up[j] };
            }
        }
        sum += (amp[0] + amp[1]).norm_sqr();
    }
    sum
}

/// Same sum in closed form: `2 + 2 Re prod_l <Psi_0^(l)|Psi_1^(l)>`.
fn bath_sum_product(baths: &[BathSpinOverlaps]) -> f64 {
    let prod: C64 = baths.iter().map(|b| b.overlap()).product();
    2.0 + 2.0 * prod.re
}

/// Resonance-lineshape approximation of the single-bath infidelity:
/// `sinc^2(N (A_par_bar - A_par_res) tau / 2)` with unnormalized
/// `sinc(x) = sin(x)/x`. Valid in the tails; at resonance it reaches 1 while
/// the exact model caps at 0.4.
pub fn sinc_infidelity(a_par_bar: f64, a_par_res: f64, seq: &DdrfSequence) -> f64 {
    let x = seq.n_pulses() as f64 * (a_par_bar - a_par_res) * seq.tau() / 2.0;
    if x == 0.0 {
        return 1.0;
    }
    let s = x.sin() / x;
    s * s
}

/// The two sides of the unaddressed-spin error relation
/// `1 - |<Psi_0|Psi_1>|^2 = 5 (1 - F)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnaddressedErrorReport {
    /// `1 - |<Psi_0|Psi_1>|^2`.
    pub overlap_error: f64,
    /// `5 (1 - F)` with `F` the single-bath-spin fidelity of this spin.
    pub five_times_infidelity: f64,
}

/// Evaluate both sides of the error relation for a phase-corrected evolution,
/// with `|up>` as the initial state for the conditional final states.
pub fn unaddressed_error(
    ev: &ConditionalEvolution,
) -> Result<UnaddressedErrorReport, FidelityError> {
    if !ev.phase_corrected {
        return Err(FidelityError::NotPhaseCorrected(ev.spin_label.clone()));
    }
    let psi0 = ev.v0.col(0);
    let psi1 = ev.v1.col(0);
    let overlaps = BathSpinOverlaps::from_states(
        &ev.spin_label,
        [psi0[0], psi0[1]],
        [psi1[0], psi1[1]],
    )?;
    let overlap_error = 1.0 - overlaps.overlap().norm_sqr();
    let f = bath_fidelity(1, std::slice::from_ref(&overlaps))?.fidelity;
    Ok(UnaddressedErrorReport {
        overlap_error,
        five_times_infidelity: 5.0 * (1.0 - f),
    })
}

/// Total fidelity of entangling `p` remote nuclear-spin pairs:
/// `F = F_ee^p * prod F_enn_a * prod F_enn_b`, one elementary-process factor
/// per pair and node.
pub fn compose_total(
    f_ee: f64,
    f_enn_a: &[f64],
    f_enn_b: &[f64],
    p: usize,
) -> Result<FidelityReport, FidelityError> {
    if p == 0 {
        return Err(FidelityError::NoPairs);
    }
    for factors in [f_enn_a, f_enn_b] {
        if factors.len() != p {
            return Err(FidelityError::FactorCountMismatch { expected: p, got: factors.len() });
        }
    }
    for &f in std::iter::once(&f_ee).chain(f_enn_a).chain(f_enn_b) {
        if !(0.0..=1.0).contains(&f) {
            return Err(FidelityError::FactorOutOfRange(f));
        }
    }
    let mut total = f_ee.powi(p as i32);
    for &f in f_enn_a.iter().chain(f_enn_b) {
        total *= f;
    }
    let digest = digest_inputs(
        "composed",
        std::iter::once(f_ee)
            .chain(std::iter::once(p as f64))
            .chain(f_enn_a.iter().copied())
            .chain(f_enn_b.iter().copied()),
    );
    Ok(FidelityReport::new(total, FidelityModel::Composed, digest))
}

/// Result of comparing a sequentially composed two-round process against the
/// product of its elementary-process fidelities.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorizationCheck {
    /// Elementary d=8 fidelities of round 1 (first register spin addressed)
    /// and round 2 (second register spin addressed).
    pub round_fidelities: [f64; 2],
    /// Fidelity of the composed two-round unitary on d=16, with each round
    /// acting on its own fresh electron slot (ideal electron reset).
    pub composed_fidelity: f64,
    /// Product of the two elementary fidelities.
    pub product_fidelity: f64,
    /// `|composed - product|`.
    pub gap: f64,
}

/// Simulate two sequential addressing rounds on a two-spin register and
/// check that the d=16 composed-process fidelity factorizes into the two
/// elementary d=8 fidelities.
///
/// `register` lists the two spins in fixed tensor order; round `r` addresses
/// `register[r]` with a sequence tuned to it at Rabi factor
/// `rabi_factors[r]`. The electron is idealized as reset between rounds by
/// giving each round its own electron slot.
pub fn sequential_factorization_check(
    register: &[NuclearSpinParams],
    n_pulses: u32,
    tau: f64,
    omega_l: f64,
    varphi: f64,
    rabi_factors: [f64; 2],
) -> Result<FactorizationCheck, FidelityError> {
    if register.len() != 2 {
        return Err(FidelityError::RegisterCount(register.len()));
    }
    let id2 = CMatrix::identity(2);
    let proj = [
        CMatrix::from_rows(&[&[ONE, ZERO], &[ZERO, ZERO]]),
        CMatrix::from_rows(&[&[ZERO, ZERO], &[ZERO, ONE]]),
    ];
    let mut round_fidelities = [0.0; 2];
    let mut composed: Vec<CMatrix> = Vec::with_capacity(2);
    let mut composed_ideal: Vec<CMatrix> = Vec::with_capacity(2);
    for round in 0..2 {
        let seq = DdrfSequence::tuned(
            n_pulses,
            tau,
            omega_l,
            varphi,
            rabi_factors[round],
            &register[round],
        )
        .map_err(EvolutionError::from)?;
        let evs: Vec<ConditionalEvolution> = register
            .iter()
            .map(|s| corrected_evolution(s, &seq))
            .collect::<Result<_, _>>()?;
        let gate = assemble_gate(&evs)?;
        let ideal8 = ideal_crot_at(round, 2);
        round_fidelities[round] = gate_fidelity(&ideal8, &gate.matrix)?.fidelity;
        let rx = |sign: f64| rot_unit([1.0, 0.0, 0.0], sign * FRAC_PI_2);
        let mut u16 = CMatrix::zeros(16, 16);
        let mut ideal16 = CMatrix::zeros(16, 16);
        for (j, sign) in [(0usize, 1.0), (1usize, -1.0)] {
            let electron_slots = if round == 0 {
                [&proj[j], &id2]
            } else {
                [&id2, &proj[j]]
            };
            let vj: [&CMatrix; 2] = if j == 0 {
                [&evs[0].v0, &evs[1].v0]
            } else {
                [&evs[0].v1, &evs[1].v1]
            };
            u16 = u16
                .add(&kron_all(&[electron_slots[0], electron_slots[1], vj[0], vj[1]]))
                .expect("shape");
            let rxj = rx(sign);
            let nuclear_slots = if round == 0 {
                [&rxj, &id2]
            } else {
                [&id2, &rxj]
            };
            ideal16 = ideal16
                .add(&kron_all(&[
                    electron_slots[0],
                    electron_slots[1],
                    nuclear_slots[0],
                    nuclear_slots[1],
                ]))
                .expect("shape");
        }
        composed.push(u16);
        composed_ideal.push(ideal16);
    }
    let total = composed[1].matmul(&composed[0])?;
    let total_ideal = composed_ideal[1].matmul(&composed_ideal[0])?;
    let composed_fidelity = gate_fidelity(&total_ideal, &total)?.fidelity;
    let product_fidelity = round_fidelities[0] * round_fidelities[1];
    Ok(FactorizationCheck {
        round_fidelities,
        composed_fidelity,
        product_fidelity,
        gap: (composed_fidelity - product_fidelity).abs(),
    })
}
