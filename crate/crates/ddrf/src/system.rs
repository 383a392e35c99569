//! Physical parameters of an electron-nuclear register, derived quantities,
//! and TOML config loading.
//!
//! All frequencies are angular (rad/s) internally; config files use kHz for
//! couplings and the Larmor frequency. Hyperfine conventions follow the
//! secular electron-nuclear Hamiltonian `A_par S_z I_z + A_perp S_z I_x`
//! written per electron branch, with the flipped-branch precession frequency
//! `omega_1 = (omega_L - A_par)/cos(beta)` and tilt `tan(beta) =
//! A_perp / (omega_L - A_par)`.

use std::collections::HashSet;
use std::f64::consts::{PI, TAU};

use serde::Deserialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

pub fn khz_to_rad_per_s(khz: f64) -> f64 {
    TAU * 1.0e3 * khz
}

pub fn rad_per_s_to_khz(w: f64) -> f64 {
    w / (TAU * 1.0e3)
}

#[derive(Debug, Error, PartialEq)]
pub enum SystemError {
    #[error("pulse count must be even and nonzero, got {0}")]
    OddPulseCount(u32),
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("larmor frequency {omega_l:.3e} rad/s does not exceed parallel coupling {a_par:.3e} rad/s")]
    LarmorNotAboveCoupling { omega_l: f64, a_par: f64 },
    #[error("tilt angle {0} rad outside (-pi/2, pi/2)")]
    TiltOutOfRange(f64),
    #[error("zero-field splitting and Zeeman terms cancel; effective coupling undefined")]
    GammaZero,
    #[error("net coupling is zero; conditional gate time undefined")]
    ZeroNetCoupling,
}

/// Role a nuclear spin plays in a simulated register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpinRole {
    Target,
    Unaddressed,
    Bath,
}

impl std::fmt::Display for SpinRole {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SpinRole::Target => write!(f, "target"),
            SpinRole::Unaddressed => write!(f, "unaddressed"),
            SpinRole::Bath => write!(f, "bath"),
        }
    }
}

/// One nuclear spin coupled to the electron: parallel hyperfine component
/// `a_par` (rad/s), quantization-axis tilt `beta` (rad) of the flipped
/// electron branch, and its register role.
#[derive(Debug, Clone, PartialEq)]
pub struct NuclearSpinParams {
    pub label: String,
    pub a_par: f64,
    pub beta: f64,
    pub role: SpinRole,
}

impl NuclearSpinParams {
    pub fn new(label: &str, a_par: f64, beta: f64, role: SpinRole) -> Self {
        NuclearSpinParams { label: label.to_string(), a_par, beta, role }
    }

    fn check_domain(&self, omega_l: f64) -> Result<(), SystemError> {
        if self.beta.abs() >= PI / 2.0 {
            return Err(SystemError::TiltOutOfRange(self.beta));
        }
        if omega_l <= self.a_par {
            return Err(SystemError::LarmorNotAboveCoupling { omega_l, a_par: self.a_par });
        }
        Ok(())
    }

    /// Precession frequency of the flipped electron branch,
    /// `(omega_L - A_par)/cos(beta)`. Requires `omega_L > A_par`.
    pub fn omega1(&self, omega_l: f64) -> Result<f64, SystemError> {
        self.check_domain(omega_l)?;
        Ok((omega_l - self.a_par) / self.beta.cos())
    }

    /// Perpendicular hyperfine component `(omega_L - A_par) tan(beta)`.
    pub fn a_perp(&self, omega_l: f64) -> Result<f64, SystemError> {
        self.check_domain(omega_l)?;
        Ok((omega_l - self.a_par) * self.beta.tan())
    }
}

/// Timing, tuning, and drive amplitude of one decoupling-plus-RF sequence
/// `(tau - pi - 2tau - pi - tau)^(N/2)` with `N + 1` RF segments.
///
/// The pulse count is kept even by construction; the drive frequency is the
/// precession frequency of the addressed spin's flipped branch.
#[derive(Debug, Clone, PartialEq)]
pub struct DdrfSequence {
    n_pulses: u32,
    tau: f64,
    omega_l: f64,
    drive_freq: f64,
    varphi: f64,
    rabi_factor: f64,
    rabi: f64,
}

impl DdrfSequence {
    pub fn new(
        n_pulses: u32,
        tau: f64,
        omega_l: f64,
        drive_freq: f64,
        varphi: f64,
        rabi_factor: f64,
    ) -> Result<Self, SystemError> {
        if n_pulses == 0 || n_pulses % 2 != 0 {
            return Err(SystemError::OddPulseCount(n_pulses));
        }
        if tau <= 0.0 {
            return Err(SystemError::NonPositive("tau"));
        }
        if omega_l <= 0.0 {
            return Err(SystemError::NonPositive("larmor frequency"));
        }
        if drive_freq <= 0.0 {
            return Err(SystemError::NonPositive("drive frequency"));
        }
        if rabi_factor < 0.0 {
            return Err(SystemError::NonPositive("rabi factor"));
        }
        let rabi = rabi_factor * PI / (2.0 * n_pulses as f64 * tau);
        Ok(DdrfSequence { n_pulses, tau, omega_l, drive_freq, varphi, rabi_factor, rabi })
    }

    /// Sequence with the drive tuned to `target`'s flipped-branch frequency.
    pub fn tuned(
        n_pulses: u32,
        tau: f64,
        omega_l: f64,
        varphi: f64,
        rabi_factor: f64,
        target: &NuclearSpinParams,
    ) -> Result<Self, SystemError> {
        let drive = target.omega1(omega_l)?;
        DdrfSequence::new(n_pulses, tau, omega_l, drive, varphi, rabi_factor)
    }

    pub fn n_pulses(&self) -> u32 {
        self.n_pulses
    }

    /// Number of RF segments, `N + 1`.
    pub fn n_segments(&self) -> u32 {
        self.n_pulses + 1
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn omega_l(&self) -> f64 {
        self.omega_l
    }

    pub fn drive_freq(&self) -> f64 {
        self.drive_freq
    }

    pub fn varphi(&self) -> f64 {
        self.varphi
    }

    pub fn rabi_factor(&self) -> f64 {
        self.rabi_factor
    }

    /// Drive amplitude `Omega = rabi_factor * pi / (2 N tau)`.
    pub fn rabi(&self) -> f64 {
        self.rabi
    }

    pub fn total_time(&self) -> f64 {
        2.0 * self.n_pulses as f64 * self.tau
    }

    pub fn tau_larmor(&self) -> f64 {
        TAU / self.omega_l
    }

    /// Whether `tau` is an integer multiple of the Larmor period to 1e-9
    /// relative accuracy; the phase-corrected gate is only exact then.
    pub fn is_tau_resonant(&self) -> bool {
        let ratio = self.tau / self.tau_larmor();
        (ratio - ratio.round()).abs() <= 1.0e-9 * ratio.max(1.0)
    }

    /// Per-tau phase step `(omega_L - drive) tau` of the RF phase schedule.
    pub fn phase_step(&self) -> f64 {
        (self.omega_l - self.drive_freq) * self.tau
    }

    /// RF phase of segment `k` (1-based): `(k-1) phase_step + varphi`, plus
    /// `pi` on odd segments, reduced mod 2pi.
    pub fn rf_phase(&self, k: u32) -> f64 {
        assert!(
            (1..=self.n_segments()).contains(&k),
            "segment index {k} outside 1..={}",
            self.n_segments()
        );
        let base = (k - 1) as f64 * self.phase_step() + self.varphi;
        let parity = if k % 2 == 1 { PI } else { 0.0 };
        (base + parity).rem_euclid(TAU)
    }

    pub fn with_rabi_factor(&self, rabi_factor: f64) -> Result<Self, SystemError> {
        DdrfSequence::new(
            self.n_pulses,
            self.tau,
            self.omega_l,
            self.drive_freq,
            self.varphi,
            rabi_factor,
        )
    }
}

/// Parallel coupling at which a spin with tilt `beta_bar` is resonant with
/// the drive: `omega_L - drive * cos(beta_bar)`.
pub fn resonant_apar(beta_bar: f64, drive_freq: f64, omega_l: f64) -> f64 {
    debug_assert!(beta_bar.abs() < PI / 2.0);
    omega_l - drive_freq * beta_bar.cos()
}

/// Ground-state parameters entering the perturbative net coupling
/// `A_net = A_par - A_perp^2 / (2 Gamma)`, `Gamma = D + gamma_e Bz - gamma_n Bz`.
/// All fields in rad/s.
#[derive(Debug, Clone, PartialEq)]
pub struct NemotoParams {
    pub a_par: f64,
    pub a_perp: f64,
    pub zero_field_d: f64,
    pub electron_zeeman: f64,
    pub nuclear_zeeman: f64,
}

impl NemotoParams {
    /// Net conditional coupling and the corresponding controlled-phase gate
    /// time `pi / |A_net|`.
    pub fn effective_coupling(&self) -> Result<(f64, f64), SystemError> {
        let gamma = self.zero_field_d + self.electron_zeeman - self.nuclear_zeeman;
        if gamma == 0.0 {
            return Err(SystemError::GammaZero);
        }
        let a_net = self.a_par - self.a_perp * self.a_perp / (2.0 * gamma);
        if a_net == 0.0 {
            return Err(SystemError::ZeroNetCoupling);
        }
        Ok((a_net, PI / a_net.abs()))
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("config needs exactly one spin with role \"target\", found {0}")]
    TargetCount(usize),
    #[error("duplicate spin label {0:?}")]
    DuplicateLabel(String),
    #[error("spin {label:?}: {source}")]
    SpinDomain {
        label: String,
        source: SystemError,
    },
    #[error("sequence: {0}")]
    Sequence(#[from] SystemError),
    #[error("{0} out of range: {1}")]
    Range(&'static str, f64),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    sequence: RawSequence,
    #[serde(default)]
    spin: Vec<RawSpin>,
    #[serde(default)]
    node: RawNode,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSequence {
    #[serde(default = "default_n_pulses")]
    n_pulses: u32,
    #[serde(default = "default_tau_over_tau_l", rename = "tau_over_tauL")]
    tau_over_tau_l: f64,
    #[serde(default = "default_larmor_khz")]
    larmor_khz: f64,
    #[serde(default)]
    varphi_rad: f64,
    rabi_factor: Option<f64>,
}

fn default_n_pulses() -> u32 {
    48
}

fn default_tau_over_tau_l() -> f64 {
    8.0
}

fn default_larmor_khz() -> f64 {
    432.0
}

impl Default for RawSequence {
    fn default() -> Self {
        RawSequence {
            n_pulses: default_n_pulses(),
            tau_over_tau_l: default_tau_over_tau_l(),
            larmor_khz: default_larmor_khz(),
            varphi_rad: 0.0,
            rabi_factor: None,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpin {
    label: String,
    apar_khz: f64,
    #[serde(default)]
    beta_rad: f64,
    role: SpinRole,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNode {
    #[serde(default = "default_f_ee")]
    f_ee: f64,
}

fn default_f_ee() -> f64 {
    0.99
}

impl Default for RawNode {
    fn default() -> Self {
        RawNode { f_ee: default_f_ee() }
    }
}

/// A loaded and validated register configuration. Frequencies are rad/s.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeConfig {
    pub spins: Vec<NuclearSpinParams>,
    pub n_pulses: u32,
    pub tau: f64,
    pub omega_l: f64,
    pub varphi: f64,
    /// `None` means the caller is expected to calibrate before simulating.
    pub rabi_factor: Option<f64>,
    pub f_ee: f64,
    /// SHA-256 of the raw config text, hex encoded.
    pub digest: String,
}

impl NodeConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text)?;
        let omega_l = khz_to_rad_per_s(raw.sequence.larmor_khz);
        if omega_l <= 0.0 {
            return Err(ConfigError::Range("larmor_khz", raw.sequence.larmor_khz));
        }
        if raw.sequence.n_pulses == 0 || raw.sequence.n_pulses % 2 != 0 {
            return Err(SystemError::OddPulseCount(raw.sequence.n_pulses).into());
        }
        if raw.sequence.tau_over_tau_l <= 0.0 {
            return Err(ConfigError::Range("tau_over_tauL", raw.sequence.tau_over_tau_l));
        }
        if let Some(f) = raw.sequence.rabi_factor {
            if f < 0.0 {
                return Err(ConfigError::Range("rabi_factor", f));
            }
        }
        if !(raw.node.f_ee > 0.0 && raw.node.f_ee <= 1.0) {
            return Err(ConfigError::Range("f_ee", raw.node.f_ee));
        }
        let tau = raw.sequence.tau_over_tau_l * TAU / omega_l;
        let mut labels = HashSet::new();
        let mut spins = Vec::with_capacity(raw.spin.len());
        for s in &raw.spin {
            if !labels.insert(s.label.clone()) {
                return Err(ConfigError::DuplicateLabel(s.label.clone()));
            }
            let spin = NuclearSpinParams::new(
                &s.label,
                khz_to_rad_per_s(s.apar_khz),
                s.beta_rad,
                s.role,
            );
            spin.check_domain(omega_l).map_err(|source| ConfigError::SpinDomain {
                label: s.label.clone(),
                source,
            })?;
            spins.push(spin);
        }
        let n_targets = spins.iter().filter(|s| s.role == SpinRole::Target).count();
        if n_targets != 1 {
            return Err(ConfigError::TargetCount(n_targets));
        }
        let digest = hex_sha256(text.as_bytes());
        Ok(NodeConfig {
            spins,
            n_pulses: raw.sequence.n_pulses,
            tau,
            omega_l,
            varphi: raw.sequence.varphi_rad,
            rabi_factor: raw.sequence.rabi_factor,
            f_ee: raw.node.f_ee,
            digest,
        })
    }

    pub fn target(&self) -> &NuclearSpinParams {
        self.spins
            .iter()
            .find(|s| s.role == SpinRole::Target)
            .expect("validated config has one target")
    }

    pub fn spin(&self, label: &str) -> Option<&NuclearSpinParams> {
        self.spins.iter().find(|s| s.label == label)
    }

    /// Sequence tuned to the target spin with the given Rabi factor.
    pub fn sequence(&self, rabi_factor: f64) -> Result<DdrfSequence, SystemError> {
        DdrfSequence::tuned(
            self.n_pulses,
            self.tau,
            self.omega_l,
            self.varphi,
            rabi_factor,
            self.target(),
        )
    }

    /// Non-fatal lints: addressing-crowded spins and off-resonant timing.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        let seq = match self.sequence(self.rabi_factor.unwrap_or(1.0)) {
            Ok(s) => s,
            Err(_) => return out,
        };
        if !seq.is_tau_resonant() {
            out.push(format!(
                "tau = {:.6} Larmor periods is not an integer multiple; \
                 residual precession is not removed by the phase correction",
                seq.tau() / seq.tau_larmor()
            ));
        }
        // spectral crowding: flipped-branch frequencies closer than the
        // sequence bandwidth 2pi/(N tau) cannot be addressed independently
        let bandwidth = TAU / (self.n_pulses as f64 * self.tau);
        let freqs: Vec<(String, f64)> = self
            .spins
            .iter()
            .filter_map(|s| s.omega1(self.omega_l).ok().map(|w| (s.label.clone(), w)))
            .collect();
        for i in 0..freqs.len() {
            for j in i + 1..freqs.len() {
                let gap = (freqs[i].1 - freqs[j].1).abs();
                if gap < bandwidth {
                    out.push(format!(
                        "spins {:?} and {:?} are spectrally crowded: \
                         |omega1 difference| = {:.1} rad/s < 2pi/(N tau) = {:.1} rad/s",
                        freqs[i].0, freqs[j].0, gap, bandwidth
                    ));
                }
            }
        }
        out
    }
}

pub(crate) fn hex_sha256(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}
