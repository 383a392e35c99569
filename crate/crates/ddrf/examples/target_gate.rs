//! Calibrate the RF amplitude for a 50 kHz target spin under a 48-pulse
//! sequence, then report the conditional rotation it generates and the
//! register-level gate fidelity with a 30 kHz spin riding along.
//!
//! Run with `cargo run --example target_gate`.

use ddrf::calibration::calibrate_rabi;
use ddrf::evolution::{corrected_evolution, ElectronBranch};
use ddrf::fidelity::{assemble_gate, gate_fidelity, ideal_crot};
use ddrf::spinalg::axis_angle_of;
use ddrf::system::{khz_to_rad_per_s, DdrfSequence, NuclearSpinParams, SpinRole};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let omega_l = khz_to_rad_per_s(432.0);
    let tau = 8.0 * std::f64::consts::TAU / omega_l;
    let target = NuclearSpinParams::new("n1", khz_to_rad_per_s(50.0), 0.0, SpinRole::Target);
    let rider =
        NuclearSpinParams::new("n2", khz_to_rad_per_s(30.0), 0.02, SpinRole::Unaddressed);

    let nominal = DdrfSequence::tuned(48, tau, omega_l, 0.0, 1.0, &target)?;
    let cal = calibrate_rabi(&target, &nominal)?;
    println!(
        "calibration: factor {:.9} after {} iterations (converged: {})",
        cal.rabi_factor, cal.iterations, cal.converged
    );
    let seq = nominal.with_rabi_factor(cal.rabi_factor)?;

    let ev = corrected_evolution(&target, &seq)?;
    for sigma in [ElectronBranch::Zero, ElectronBranch::One] {
        let aa = axis_angle_of(ev.branch(sigma))?;
        println!(
            "branch {sigma}: axis [{:+.4} {:+.4} {:+.4}], angle {:.6} pi",
            aa.axis[0],
            aa.axis[1],
            aa.axis[2],
            aa.angle / std::f64::consts::PI
        );
    }

    let alone = assemble_gate(std::slice::from_ref(&ev))?;
    let f1 = gate_fidelity(&ideal_crot(0), &alone.matrix)?;
    println!("target-only gate (d = 4): infidelity {:.3e}", f1.infidelity);

    let ev_rider = corrected_evolution(&rider, &seq)?;
    let register = assemble_gate(&[ev, ev_rider])?;
    let f2 = gate_fidelity(&ideal_crot(1), &register.matrix)?;
    println!(
        "with 30 kHz rider (d = 8): infidelity {:.3e} [digest {}]",
        f2.infidelity, f2.inputs_digest
    );
    Ok(())
}
