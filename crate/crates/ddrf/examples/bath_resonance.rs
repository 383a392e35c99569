//! Scan a single bath spin's parallel coupling across the drive resonance
//! and compare the exact Kraus-channel infidelity with the sinc^2 lineshape
//! approximation: the exact model caps at 0.4 on resonance while the
//! approximation saturates at 1.
//!
//! Run with `cargo run --example bath_resonance`.

use ddrf::fidelity::{bath_fidelity, bath_overlaps_from_sequence, sinc_infidelity};
use ddrf::system::{
    khz_to_rad_per_s, rad_per_s_to_khz, resonant_apar, DdrfSequence, NuclearSpinParams,
    SpinRole,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let omega_l = khz_to_rad_per_s(432.0);
    let tau = 8.0 * std::f64::consts::TAU / omega_l;
    let target = NuclearSpinParams::new("n1", khz_to_rad_per_s(50.0), 0.0, SpinRole::Target);
    let seq = DdrfSequence::tuned(48, tau, omega_l, 0.0, 0.9283815197379353, &target)?;

    let a_res = resonant_apar(0.0, seq.drive_freq(), seq.omega_l());
    println!(
        "resonant bath coupling {:.3} kHz; lobe width {:.3} kHz",
        rad_per_s_to_khz(a_res),
        rad_per_s_to_khz(2.0 * std::f64::consts::TAU / seq.total_time())
    );
    println!("{:>9}  {:>12}  {:>12}", "aPar/kHz", "1-F (kraus)", "1-F (sinc)");
    for i in 0..=24 {
        let a_khz = 44.0 + 0.5 * i as f64;
        let bath =
            NuclearSpinParams::new("b", khz_to_rad_per_s(a_khz), 0.0, SpinRole::Bath);
        let overlaps = bath_overlaps_from_sequence(&bath, &seq)?;
        let kraus = bath_fidelity(1, std::slice::from_ref(&overlaps))?;
        let sinc = sinc_infidelity(bath.a_par, a_res, &seq);
        let mark = if (a_khz - rad_per_s_to_khz(a_res)).abs() < 0.25 { "  <- resonance" } else { "" };
        println!("{a_khz:>9.1}  {:>12.4e}  {sinc:>12.4e}{mark}", kraus.infidelity);
    }
    Ok(())
}
