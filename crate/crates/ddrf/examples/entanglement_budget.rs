//! Compose a network-level fidelity budget: simulate this node's
//! electron-nuclear swap gate, then stack it with an electron-electron link
//! fidelity of 0.99 for growing numbers of remote Bell pairs.
//!
//! Run with `cargo run --example entanglement_budget`.

use ddrf::calibration::calibrate_rabi;
use ddrf::evolution::corrected_evolution;
use ddrf::fidelity::{assemble_gate, compose_total, gate_fidelity, ideal_crot};
use ddrf::system::{khz_to_rad_per_s, DdrfSequence, NuclearSpinParams, SpinRole};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let omega_l = khz_to_rad_per_s(432.0);
    let tau = 8.0 * std::f64::consts::TAU / omega_l;
    let target = NuclearSpinParams::new("n1", khz_to_rad_per_s(50.0), 0.0, SpinRole::Target);
    let rider =
        NuclearSpinParams::new("n2", khz_to_rad_per_s(30.0), 0.02, SpinRole::Unaddressed);

    let nominal = DdrfSequence::tuned(48, tau, omega_l, 0.0, 1.0, &target)?;
    let seq = nominal.with_rabi_factor(calibrate_rabi(&target, &nominal)?.rabi_factor)?;
    let gate = assemble_gate(&[
        corrected_evolution(&target, &seq)?,
        corrected_evolution(&rider, &seq)?,
    ])?;
    let f_enn = gate_fidelity(&ideal_crot(1), &gate.matrix)?.fidelity;
    let f_ee = 0.99;
    println!("per-node storage gate fidelity {f_enn:.6}, link fidelity {f_ee}");

    println!("{:>6}  {:>10}  {:>12}", "pairs", "F_total", "1-F_total");
    for pairs in 1..=4 {
        let per_node = vec![f_enn; pairs];
        let report = compose_total(f_ee, &per_node, &per_node, pairs)?;
        println!("{pairs:>6}  {:>10.6}  {:>12.4e}", report.fidelity, report.infidelity);
    }
    println!("each extra pair costs one link factor and two storage factors");
    Ok(())
}
