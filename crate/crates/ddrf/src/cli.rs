//! Command layer shared by the `ddrf` binary and the integration tests:
//! deterministic CSV/JSON rendering for trajectories, fidelity sweeps,
//! calibration, composition, and oracle validation.
//!
//! Angle-valued sweep parameters are in radians, coupling sweeps in kHz
//! (matching the config units). Every rendered output embeds the SHA-256 of
//! the config text and the tool version; no timestamps, so identical runs
//! produce identical bytes.

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::calibration::{calibrate_rabi, CalibrationError, CalibrationResult};
use crate::evolution::{
    bloch_trajectory, corrected_evolution, BlochTrajectory, ConditionalEvolution,
    ElectronBranch, EvolutionError,
};
use crate::fidelity::{
    assemble_gate, bath_fidelity, bath_overlaps_from_sequence, compose_total, gate_fidelity,
    ideal_crot, sinc_infidelity, FidelityError, FidelityModel,
};
use crate::oracle::{integrate_conditional, IntegratorSpec, OracleError};
use crate::spinalg::C64;
use crate::system::{
    khz_to_rad_per_s, resonant_apar, ConfigError, DdrfSequence, NodeConfig,
    NuclearSpinParams, SpinRole, SystemError,
};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Oracle-vs-RWA distance above which `validate` reports failure.
pub const VALIDATE_DISTANCE_TOL: f64 = 1.0e-3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
    #[error(transparent)]
    Fidelity(#[from] FidelityError),
    #[error(transparent)]
    Calibration(#[from] CalibrationError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("no spin labeled {0:?} in config")]
    UnknownSpin(String),
    #[error("sweep over {0} needs a spin with role {1}")]
    MissingRole(&'static str, SpinRole),
    #[error("sweep count must be at least 1")]
    EmptySweep,
    #[error("worker pool: {0}")]
    Jobs(String),
}

/// Parameter swept by the sweep subcommands. `beta` tilts the target spin,
/// `betaBar` the swept non-target spin, `aParBar` its parallel coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    Beta,
    BetaBar,
    AParBar,
}

impl FromStr for SweepParameter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "beta" => Ok(SweepParameter::Beta),
            "betaBar" => Ok(SweepParameter::BetaBar),
            "aParBar" => Ok(SweepParameter::AParBar),
            other => Err(format!(
                "unknown sweep parameter {other:?}; expected beta, betaBar, or aParBar"
            )),
        }
    }
}

impl std::fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SweepParameter::Beta => write!(f, "beta"),
            SweepParameter::BetaBar => write!(f, "betaBar"),
            SweepParameter::AParBar => write!(f, "aParBar"),
        }
    }
}

/// An evenly spaced sweep of one parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl SweepSpec {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        if self.count == 0 {
            return Err(CliError::EmptySweep);
        }
        if self.count == 1 {
            return Ok(vec![self.start]);
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        Ok((0..self.count).map(|i| self.start + step * i as f64).collect())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SweepRow {
    pub parameter: SweepParameter,
    pub value: f64,
    pub fidelity: f64,
    pub infidelity: f64,
    pub model: FidelityModel,
}

/// Rabi factor to simulate with: the configured one, or the calibrated
/// optimum when the config leaves it out.
pub fn resolved_rabi_factor(config: &NodeConfig) -> Result<f64, CliError> {
    match config.rabi_factor {
        Some(f) => Ok(f),
        None => {
            let seq = config.sequence(1.0)?;
            Ok(calibrate_rabi(config.target(), &seq)?.rabi_factor)
        }
    }
}

/// Register spins (target first, then unaddressed in config order); these
/// define the gate subspace, bath spins act only through the Kraus channel.
fn register_spins(config: &NodeConfig) -> Vec<NuclearSpinParams> {
    let mut out = vec![config.target().clone()];
    out.extend(
        config
            .spins
            .iter()
            .filter(|s| s.role == SpinRole::Unaddressed)
            .cloned(),
    );
    out
}

fn first_with_role(config: &NodeConfig, role: SpinRole) -> Option<NuclearSpinParams> {
    config.spins.iter().find(|s| s.role == role).cloned()
}

fn csv_preamble(config: &NodeConfig) -> String {
    format!(
        "# tool_version = {TOOL_VERSION}\n# config_sha256 = {}\n",
        config.digest
    )
}

fn run_jobs<T, F>(values: &[f64], jobs: usize, f: F) -> Result<Vec<T>, CliError>
where
    T: Send,
    F: Fn(f64) -> Result<T, CliError> + Sync + Send,
{
    if jobs <= 1 {
        values.iter().copied().map(f).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| CliError::Jobs(e.to_string()))?;
        pool.install(|| values.par_iter().copied().map(f).collect())
    }
}

/// Bloch trajectory of one spin as CSV (`t_s,x,y,z,frame,branch`).
///
/// Spins default to the target; target spins start in `|up>`, all others on
/// the equator at `(|up> + |down>)/sqrt(2)`.
pub fn cmd_trajectory(
    config: &NodeConfig,
    spin_label: Option<&str>,
    branch: ElectronBranch,
    samples_per_segment: u32,
) -> Result<String, CliError> {
    let spin = match spin_label {
        Some(l) => config
            .spin(l)
            .cloned()
            .ok_or_else(|| CliError::UnknownSpin(l.to_string()))?,
        None => config.target().clone(),
    };
    let factor = resolved_rabi_factor(config)?;
    let seq = config.sequence(factor)?;
    let initial = if spin.role == SpinRole::Target {
        [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]
    } else {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        [C64::new(r, 0.0), C64::new(r, 0.0)]
    };
    let traj = bloch_trajectory(&spin, &seq, branch, initial, samples_per_segment)?;
    Ok(render_trajectory_csv(&traj, config))
}

pub fn render_trajectory_csv(traj: &BlochTrajectory, config: &NodeConfig) -> String {
    let mut out = csv_preamble(config);
    let _ = write!(out, "# spin = {}\n", traj.spin_label);
    out.push_str("t_s,x,y,z,frame,branch\n");
    for s in &traj.samples {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            s.t, s.x, s.y, s.z, s.frame, traj.branch
        );
    }
    out
}

fn render_sweep_csv(rows: &[SweepRow], config: &NodeConfig) -> String {
    let mut out = csv_preamble(config);
    out.push_str("sweep_param,value,fidelity,infidelity,model\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.parameter, r.value, r.fidelity, r.infidelity, r.model
        );
    }
    out
}

/// Gate-fidelity sweep of the assembled register gate against the ideal
/// conditional rotation, as CSV.
///
/// `beta` re-tilts the target and recalibrates the Rabi factor at every
/// point; `betaBar`/`aParBar` modify the first unaddressed spin under a
/// fixed, once-resolved sequence.
pub fn cmd_sweep_gatefid(
    config: &NodeConfig,
    spec: &SweepSpec,
    jobs: usize,
) -> Result<String, CliError> {
    let values = spec.values()?;
    let rows = match spec.parameter {
        SweepParameter::Beta => run_jobs(&values, jobs, |value| {
            let mut spins = register_spins(config);
            spins[0].beta = value;
            let base = DdrfSequence::tuned(
                config.n_pulses,
                config.tau,
                config.omega_l,
                config.varphi,
                1.0,
                &spins[0],
            )?;
            let factor = calibrate_rabi(&spins[0], &base)?.rabi_factor;
            let seq = base.with_rabi_factor(factor)?;
            gatefid_row(&spins, &seq, spec.parameter, value)
        }),
        SweepParameter::BetaBar | SweepParameter::AParBar => {
            let factor = resolved_rabi_factor(config)?;
            let seq = config.sequence(factor)?;
            run_jobs(&values, jobs, |value| {
                let mut spins = register_spins(config);
                let swept = spins
                    .iter_mut()
                    .skip(1)
                    .next()
                    .ok_or(CliError::MissingRole("gate sweep", SpinRole::Unaddressed))?;
                match spec.parameter {
                    SweepParameter::BetaBar => swept.beta = value,
                    SweepParameter::AParBar => swept.a_par = khz_to_rad_per_s(value),
                    SweepParameter::Beta => unreachable!(),
                }
                gatefid_row(&spins, &seq, spec.parameter, value)
            })
        }
    }?;
    Ok(render_sweep_csv(&rows, config))
}

fn gatefid_row(
    spins: &[NuclearSpinParams],
    seq: &DdrfSequence,
    parameter: SweepParameter,
    value: f64,
) -> Result<SweepRow, CliError> {
    let evs: Vec<ConditionalEvolution> = spins
        .iter()
        .map(|s| corrected_evolution(s, seq))
        .collect::<Result<_, _>>()?;
    let gate = assemble_gate(&evs)?;
    let report = gate_fidelity(&ideal_crot(spins.len() - 1), &gate.matrix)?;
    Ok(SweepRow {
        parameter,
        value,
        fidelity: report.fidelity,
        infidelity: report.infidelity,
        model: report.model,
    })
}

/// Bath-spin infidelity sweep as CSV with two rows per point: the exact
/// Kraus-channel model and the sinc^2 lineshape approximation.
pub fn cmd_sweep_bathfid(
    config: &NodeConfig,
    spec: &SweepSpec,
    jobs: usize,
) -> Result<String, CliError> {
    let bath = first_with_role(config, SpinRole::Bath)
        .ok_or(CliError::MissingRole("bath sweep", SpinRole::Bath))?;
    let factor = resolved_rabi_factor(config)?;
    let seq = config.sequence(factor)?;
    let k = register_spins(config).len();
    let values = spec.values()?;
    let rows_nested = run_jobs(&values, jobs, |value| {
        let mut spin = bath.clone();
        match spec.parameter {
            SweepParameter::AParBar => spin.a_par = khz_to_rad_per_s(value),
            SweepParameter::BetaBar => spin.beta = value,
            SweepParameter::Beta => {
                return Err(CliError::MissingRole("bath sweep", SpinRole::Bath))
            }
        }
        let overlaps = bath_overlaps_from_sequence(&spin, &seq)?;
        let kraus = bath_fidelity(k, std::slice::from_ref(&overlaps))?;
        let a_par_res = resonant_apar(spin.beta, seq.drive_freq(), seq.omega_l());
        let sinc = sinc_infidelity(spin.a_par, a_par_res, &seq);
        Ok([
            SweepRow {
                parameter: spec.parameter,
                value,
                fidelity: kraus.fidelity,
                infidelity: kraus.infidelity,
                model: kraus.model,
            },
            SweepRow {
                parameter: spec.parameter,
                value,
                fidelity: 1.0 - sinc,
                infidelity: sinc,
                model: FidelityModel::SincApprox,
            },
        ])
    })?;
    let rows: Vec<SweepRow> = rows_nested.into_iter().flatten().collect();
    Ok(render_sweep_csv(&rows, config))
}

#[derive(Debug, Serialize)]
struct CalibrateOutput {
    factor: f64,
    fidelity: f64,
    iterations: u32,
    converged: bool,
    config_sha256: String,
    tool_version: String,
}

/// Calibrate the Rabi factor for the configured target, as JSON.
pub fn cmd_calibrate(config: &NodeConfig) -> Result<String, CliError> {
    let seq = config.sequence(1.0)?;
    let result: CalibrationResult = calibrate_rabi(config.target(), &seq)?;
    render_json(&CalibrateOutput {
        factor: result.rabi_factor,
        fidelity: result.achieved_fidelity,
        iterations: result.iterations,
        converged: result.converged,
        config_sha256: config.digest.clone(),
        tool_version: TOOL_VERSION.to_string(),
    })
}

#[derive(Debug, Serialize)]
struct TotalOutput {
    pairs: usize,
    f_ee: f64,
    f_enn: f64,
    total_fidelity: f64,
    total_infidelity: f64,
    model: String,
    electron_reset: String,
    config_sha256: String,
    tool_version: String,
}

/// Total fidelity for entangling `p` remote pairs, using this node's
/// elementary-process fidelity for both nodes, as JSON.
pub fn cmd_total(config: &NodeConfig, p: usize) -> Result<String, CliError> {
    let factor = resolved_rabi_factor(config)?;
    let seq = config.sequence(factor)?;
    let spins = register_spins(config);
    let evs: Vec<ConditionalEvolution> = spins
        .iter()
        .map(|s| corrected_evolution(s, &seq))
        .collect::<Result<_, _>>()?;
    let gate = assemble_gate(&evs)?;
    let f_enn = gate_fidelity(&ideal_crot(spins.len() - 1), &gate.matrix)?.fidelity;
    let per_node = vec![f_enn; p];
    let report = compose_total(config.f_ee, &per_node, &per_node, p)?;
    render_json(&TotalOutput {
        pairs: p,
        f_ee: config.f_ee,
        f_enn,
        total_fidelity: report.fidelity,
        total_infidelity: report.infidelity,
        model: report.model.to_string(),
        electron_reset: "ideal".to_string(),
        config_sha256: config.digest.clone(),
        tool_version: TOOL_VERSION.to_string(),
    })
}

#[derive(Debug, Serialize)]
struct ValidateSpinOutput {
    label: String,
    branch0_distance: f64,
    branch1_distance: f64,
    rwa_unitarity_defect: f64,
    oracle_unitarity_defect: f64,
}

#[derive(Debug, Serialize)]
struct ValidateOutput {
    steps_per_drive_period: u32,
    distance_tolerance: f64,
    max_distance: f64,
    passed: bool,
    spins: Vec<ValidateSpinOutput>,
    config_sha256: String,
    tool_version: String,
}

/// Compare every spin's rotating-wave propagators against the full-drive
/// integrator, as JSON. The boolean return is false when any branch distance
/// exceeds the tolerance.
pub fn cmd_validate(
    config: &NodeConfig,
    spec: &IntegratorSpec,
) -> Result<(String, bool), CliError> {
    let factor = resolved_rabi_factor(config)?;
    let seq = config.sequence(factor)?;
    let mut spins_out = Vec::new();
    let mut max_distance: f64 = 0.0;
    for spin in &config.spins {
        let omega1 = spin.omega1(config.omega_l)?;
        let rwa = corrected_evolution(spin, &seq)?;
        let oracle = integrate_conditional(spin, &seq, spec)?
            .apply_phase_correction(omega1)?;
        let d0 = rwa.v0.distance(&oracle.v0).map_err(EvolutionError::from)?;
        let d1 = rwa.v1.distance(&oracle.v1).map_err(EvolutionError::from)?;
        max_distance = max_distance.max(d0).max(d1);
        spins_out.push(ValidateSpinOutput {
            label: spin.label.clone(),
            branch0_distance: d0,
            branch1_distance: d1,
            rwa_unitarity_defect: rwa
                .v0
                .unitarity_defect()
                .max(rwa.v1.unitarity_defect()),
            oracle_unitarity_defect: oracle
                .v0
                .unitarity_defect()
                .max(oracle.v1.unitarity_defect()),
        });
    }
    let passed = max_distance <= VALIDATE_DISTANCE_TOL;
    let json = render_json(&ValidateOutput {
        steps_per_drive_period: spec.steps_per_drive_period,
        distance_tolerance: VALIDATE_DISTANCE_TOL,
        max_distance,
        passed,
        spins: spins_out,
        config_sha256: config.digest.clone(),
        tool_version: TOOL_VERSION.to_string(),
    })?;
    Ok((json, passed))
}

fn render_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).expect("serializable output");
    s.push('\n');
    Ok(s)
}
