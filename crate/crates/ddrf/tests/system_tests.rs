//! Tests for the parameter model: derived spin frequencies, the RF phase
//! schedule, the resonance condition, the perturbative net coupling, sequence
//! invariants, and TOML configuration ingestion.

mod common;

use ddrf::system::{
    khz_to_rad_per_s, rad_per_s_to_khz, resonant_apar, ConfigError, DdrfSequence, NemotoParams,
    NodeConfig, NuclearSpinParams, SpinRole, SystemError,
};
use proptest::prelude::*;

use common::*;

const PI: f64 = std::f64::consts::PI;
const TAU2: f64 = std::f64::consts::TAU;

#[test]
fn omega1_collapses_to_detuning_at_zero_tilt() {
    // 432 - 50 = 382 kHz precession for the standard target.
    let w1 = paper_target().omega1(omega_l()).unwrap();
    assert!((rad_per_s_to_khz(w1) - 382.0).abs() < 1e-9);

    let uncoupled = NuclearSpinParams::new("u", 0.0, 0.0, SpinRole::Bath);
    assert_eq!(uncoupled.omega1(omega_l()).unwrap(), omega_l());
}

#[test]
fn omega1_matches_quadrature_form_at_nonzero_tilt() {
    let spin = NuclearSpinParams::new("n", khz(30.0), 0.1, SpinRole::Unaddressed);
    let w1 = spin.omega1(omega_l()).unwrap();
    assert!((w1 - (omega_l() - khz(30.0)) / 0.1f64.cos()).abs() < 1e-6);

    // omega1^2 = aPerp^2 + (omega_l - aPar)^2 ties the two derived quantities.
    let aperp = spin.a_perp(omega_l()).unwrap();
    let quadrature = (aperp.powi(2) + (omega_l() - khz(30.0)).powi(2)).sqrt();
    assert!((w1 - quadrature).abs() / w1 < 1e-12);
}

#[test]
fn omega1_rejects_coupling_at_or_above_larmor() {
    let spin = NuclearSpinParams::new("n", khz(500.0), 0.0, SpinRole::Bath);
    assert!(matches!(
        spin.omega1(omega_l()),
        Err(SystemError::LarmorNotAboveCoupling { .. })
    ));
}

#[test]
fn rf_phase_schedule_matches_stated_values() {
    let seq = paper_sequence(1.0);
    // k = 1 is odd: just the pi offset.
    assert!((seq.rf_phase(1) - PI).abs() < 1e-12);
    // k = 2: one step of phi_tau = (omega_L - omega) tau = 2pi (50 * 8 / 432).
    let phi_tau = TAU2 * 50.0 * 8.0 / 432.0;
    assert!((seq.rf_phase(2) - phi_tau.rem_euclid(TAU2)).abs() < 1e-9);
    assert!((phi_tau.rem_euclid(TAU2) - 5.8178).abs() < 1e-3);
    // k = 3 minus k = 1 advances by 2 phi_tau.
    let diff = (seq.rf_phase(3) - seq.rf_phase(1)).rem_euclid(TAU2);
    assert!((diff - (2.0 * phi_tau).rem_euclid(TAU2)).abs() < 1e-9);
}

#[test]
fn rf_phase_advances_by_two_steps_for_all_k() {
    let seq = paper_sequence(1.0);
    let step2 = (2.0 * seq.phase_step()).rem_euclid(TAU2);
    for k in 1..=seq.n_segments() - 2 {
        let diff = (seq.rf_phase(k + 2) - seq.rf_phase(k)).rem_euclid(TAU2);
        let wrapped = (diff - step2).abs().min(TAU2 - (diff - step2).abs());
        assert!(wrapped < 1e-9, "k = {k}: diff {diff} vs 2 phi_tau {step2}");
    }
}

#[test]
fn resonant_apar_examples_and_round_trip() {
    let target_w1 = paper_target().omega1(omega_l()).unwrap();

    // Same parametrization resonates with itself.
    let at_zero = resonant_apar(0.0, target_w1, omega_l());
    assert!((at_zero - khz(50.0)).abs() < 1e-6);

    // beta_bar = 0.1: A_res = omega_L - omega1 cos(beta_bar).
    let tilted = resonant_apar(0.1, target_w1, omega_l());
    assert!((tilted - (omega_l() - target_w1 * 0.1f64.cos())).abs() < 1e-9);

    // Tilted target, untilted probe.
    let tilted_target = NuclearSpinParams::new("t", khz(50.0), 0.1, SpinRole::Target);
    let w1_tilted = tilted_target.omega1(omega_l()).unwrap();
    let res = resonant_apar(0.0, w1_tilted, omega_l());
    assert!((res - (omega_l() - (omega_l() - khz(50.0)) / 0.1f64.cos())).abs() < 1e-6);

    // Round trip: a spin placed at the resonant coupling precesses at the
    // drive frequency again.
    for beta_bar in [0.0, 0.05, 0.1, 0.3] {
        let apar = resonant_apar(beta_bar, target_w1, omega_l());
        let probe = NuclearSpinParams::new("p", apar, beta_bar, SpinRole::Bath);
        let w1 = probe.omega1(omega_l()).unwrap();
        assert!(
            (w1 - target_w1).abs() / target_w1 < 1e-9,
            "beta_bar = {beta_bar}: {w1} vs {target_w1}"
        );
    }
}

#[test]
fn nemoto_coupling_limits_and_reference_values() {
    let gamma_args = |a_par: f64, a_perp: f64| NemotoParams {
        a_par,
        a_perp,
        zero_field_d: TAU2 * 2.87e9,
        electron_zeeman: TAU2 * 28.0e9 * 40.3e-3,
        nuclear_zeeman: TAU2 * 4.3166e6 * 40.3e-3,
    };

    // No transverse coupling: identity on a_par, gate time pi / a_par.
    let plain = gamma_args(khz(3.0), 0.0);
    let (a_net, t_cz) = plain.effective_coupling().unwrap();
    assert_eq!(a_net, khz(3.0));
    assert!((t_cz - PI / khz(3.0)).abs() < 1e-18);

    // No parallel coupling: sign forced negative by the formula.
    let perp_only = gamma_args(0.0, khz(3.0));
    let (a_net, _) = perp_only.effective_coupling().unwrap();
    assert!(a_net < 0.0);

    // Representative NV values against an independent scalar evaluation.
    let nv = gamma_args(khz(3.0), khz(2.0));
    let (a_net, t_cz) = nv.effective_coupling().unwrap();
    let gamma = TAU2 * 2.87e9 + TAU2 * 28.0e9 * 40.3e-3 - TAU2 * 4.3166e6 * 40.3e-3;
    let expected = khz(3.0) - khz(2.0) * khz(2.0) / (2.0 * gamma);
    assert!((a_net - expected).abs() / expected.abs() < 1e-15);
    assert!((t_cz - PI / expected.abs()).abs() / t_cz < 1e-15);

    // Degenerate cases are rejected rather than silently divided through.
    let degenerate = NemotoParams {
        a_par: khz(3.0),
        a_perp: khz(2.0),
        zero_field_d: khz(1.0),
        electron_zeeman: 0.0,
        nuclear_zeeman: khz(1.0),
    };
    assert_eq!(degenerate.effective_coupling(), Err(SystemError::GammaZero));
    let balanced = gamma_args(0.0, 0.0);
    assert_eq!(balanced.effective_coupling(), Err(SystemError::ZeroNetCoupling));
}

#[test]
fn sequence_derived_quantities() {
    let seq = paper_sequence(0.9);
    assert_eq!(seq.n_segments(), N_PULSES + 1);
    assert!((seq.total_time() - 2.0 * N_PULSES as f64 * tau()).abs() < 1e-18);
    // Rabi amplitude derives from N Omega tau = factor * pi / 2.
    let expected_rabi = 0.9 * PI / (2.0 * N_PULSES as f64 * tau());
    assert!((seq.rabi() - expected_rabi).abs() / expected_rabi < 1e-12);
    assert!((seq.tau_larmor() - TAU2 / omega_l()).abs() < 1e-18);
    assert!(seq.is_tau_resonant());

    // The drive sits at the target's flipped-branch frequency.
    assert_eq!(seq.drive_freq(), paper_target().omega1(omega_l()).unwrap());

    let off = DdrfSequence::new(N_PULSES, 8.3 * TAU2 / omega_l(), omega_l(), khz(382.0), 0.0, 1.0)
        .unwrap();
    assert!(!off.is_tau_resonant());

    assert!(matches!(
        DdrfSequence::new(47, tau(), omega_l(), khz(382.0), 0.0, 1.0),
        Err(SystemError::OddPulseCount(47))
    ));
    assert!(DdrfSequence::new(48, tau(), omega_l(), khz(382.0), 0.0, -0.1).is_err());
}

const FIG4_CONFIG: &str = r#"
[sequence]
n_pulses = 48
tau_over_tauL = 8.0
larmor_khz = 432.0

[[spin]]
label = "n1"
apar_khz = 50.0
role = "target"

[[spin]]
label = "n2"
apar_khz = 30.0
role = "unaddressed"
"#;

#[test]
fn config_loads_standard_register_without_warnings() {
    let cfg = NodeConfig::from_toml_str(FIG4_CONFIG).unwrap();
    assert_eq!(cfg.n_pulses, 48);
    assert!((cfg.tau - 8.0 * TAU2 / cfg.omega_l).abs() < 1e-18);
    assert_eq!(cfg.spins.len(), 2);
    assert_eq!(cfg.target().label, "n1");
    assert_eq!(cfg.spin("n2").unwrap().a_par, khz_to_rad_per_s(30.0));
    assert!(cfg.spin("nope").is_none());
    assert_eq!(cfg.f_ee, 0.99, "f_ee defaults to 0.99");
    assert_eq!(cfg.rabi_factor, None);
    assert!(cfg.warnings().is_empty(), "warnings: {:?}", cfg.warnings());
    assert_eq!(cfg.digest.len(), 64);
    assert!(cfg.digest.chars().all(|c| c.is_ascii_hexdigit()));

    // The digest follows the raw text, so any edit changes it.
    let other = NodeConfig::from_toml_str(&FIG4_CONFIG.replace("30.0", "31.0")).unwrap();
    assert_ne!(cfg.digest, other.digest);
    let again = NodeConfig::from_toml_str(FIG4_CONFIG).unwrap();
    assert_eq!(cfg.digest, again.digest);
}

#[test]
fn config_flags_spectral_crowding_and_offresonant_tau() {
    let crowded = FIG4_CONFIG.replace("apar_khz = 30.0", "apar_khz = 50.0");
    let cfg = NodeConfig::from_toml_str(&crowded).unwrap();
    let warnings = cfg.warnings();
    assert!(
        warnings.iter().any(|w| w.contains("crowded")),
        "expected crowding warning, got {warnings:?}"
    );

    let off = FIG4_CONFIG.replace("tau_over_tauL = 8.0", "tau_over_tauL = 8.25");
    let cfg = NodeConfig::from_toml_str(&off).unwrap();
    let warnings = cfg.warnings();
    assert!(
        warnings.iter().any(|w| w.contains("not an integer multiple")),
        "expected off-resonant tau warning, got {warnings:?}"
    );
}

#[test]
fn config_rejections() {
    let unknown = FIG4_CONFIG.replace("larmor_khz", "larmor_mhz");
    assert!(matches!(
        NodeConfig::from_toml_str(&unknown),
        Err(ConfigError::Parse(_))
    ));

    let duplicate = FIG4_CONFIG.replace("label = \"n2\"", "label = \"n1\"");
    assert!(matches!(
        NodeConfig::from_toml_str(&duplicate),
        Err(ConfigError::DuplicateLabel(l)) if l == "n1"
    ));

    let no_target = FIG4_CONFIG.replace("role = \"target\"", "role = \"unaddressed\"");
    assert!(matches!(
        NodeConfig::from_toml_str(&no_target),
        Err(ConfigError::TargetCount(0))
    ));
    let two_targets = FIG4_CONFIG.replace("role = \"unaddressed\"", "role = \"target\"");
    assert!(matches!(
        NodeConfig::from_toml_str(&two_targets),
        Err(ConfigError::TargetCount(2))
    ));

    let strong = FIG4_CONFIG.replace("apar_khz = 50.0", "apar_khz = 432.0");
    assert!(matches!(
        NodeConfig::from_toml_str(&strong),
        Err(ConfigError::SpinDomain { label, .. }) if label == "n1"
    ));

    let bad_fee = format!("{FIG4_CONFIG}\n[node]\nf_ee = 1.5\n");
    assert!(matches!(
        NodeConfig::from_toml_str(&bad_fee),
        Err(ConfigError::Range("f_ee", _))
    ));
    let bad_larmor = FIG4_CONFIG.replace("larmor_khz = 432.0", "larmor_khz = -1.0");
    assert!(matches!(
        NodeConfig::from_toml_str(&bad_larmor),
        Err(ConfigError::Range("larmor_khz", _))
    ));
}

#[test]
fn config_sequence_round_trip() {
    let cfg = NodeConfig::from_toml_str(FIG4_CONFIG).unwrap();
    let seq = cfg.sequence(0.93).unwrap();
    assert_eq!(seq.rabi_factor(), 0.93);
    assert_eq!(seq.n_pulses(), 48);
    assert_eq!(
        seq.drive_freq(),
        cfg.target().omega1(cfg.omega_l).unwrap(),
        "sequence drive must follow the configured target"
    );
}

proptest! {
    #[test]
    fn omega1_quadrature_identity(apar_khz in -100.0..400.0f64, beta in 0.0..1.4f64) {
        let spin = NuclearSpinParams::new("p", khz(apar_khz), beta, SpinRole::Bath);
        let w1 = spin.omega1(omega_l()).unwrap();
        let aperp = spin.a_perp(omega_l()).unwrap();
        let quad = (aperp.powi(2) + (omega_l() - khz(apar_khz)).powi(2)).sqrt();
        prop_assert!((w1 - quad).abs() / w1 < 1e-9);
        prop_assert!(aperp >= 0.0);
    }

    #[test]
    fn resonance_round_trips(beta_bar in 0.0..1.2f64, drive_khz in 150.0..431.0f64) {
        let apar = resonant_apar(beta_bar, khz(drive_khz), omega_l());
        let probe = NuclearSpinParams::new("p", apar, beta_bar, SpinRole::Bath);
        let w1 = probe.omega1(omega_l()).unwrap();
        prop_assert!((w1 - khz(drive_khz)).abs() / w1 < 1e-9);
    }
}
