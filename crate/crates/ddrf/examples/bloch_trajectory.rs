//! Sample the Bloch vector of the target spin through the pulse sequence for
//! both electron branches and print a coarse picture of the conditional
//! descent from the pole, plus the corrected end states.
//!
//! Run with `cargo run --example bloch_trajectory`.

use ddrf::evolution::{bloch_trajectory, ElectronBranch};
use ddrf::system::{khz_to_rad_per_s, DdrfSequence, NuclearSpinParams, SpinRole};
use ddrf::C64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let omega_l = khz_to_rad_per_s(432.0);
    let tau = 8.0 * std::f64::consts::TAU / omega_l;
    let target = NuclearSpinParams::new("n1", khz_to_rad_per_s(50.0), 0.0, SpinRole::Target);
    let seq = DdrfSequence::tuned(48, tau, omega_l, 0.0, 0.9283815197379353, &target)?;
    let up = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];

    for sigma in [ElectronBranch::Zero, ElectronBranch::One] {
        let traj = bloch_trajectory(&target, &seq, sigma, up, 1)?;
        println!("branch {sigma}: {} samples", traj.samples.len());
        println!("  {:>10}  {:>7} {:>7} {:>7}  frame", "t [us]", "x", "y", "z");
        for s in traj.samples.iter().step_by(12) {
            println!(
                "  {:>10.3}  {:>7.3} {:>7.3} {:>7.3}  {}",
                s.t * 1.0e6,
                s.x,
                s.y,
                s.z,
                s.frame
            );
        }
        let end = traj.samples.last().unwrap();
        println!("  final Bloch vector: [{:+.4} {:+.4} {:+.4}]", end.x, end.y, end.z);
        let c = traj.corrected_final_state;
        println!(
            "  corrected end state: [{:+.4}{:+.4}i, {:+.4}{:+.4}i]",
            c[0].re, c[0].im, c[1].re, c[1].im
        );
    }
    println!(
        "the two branches land on opposite sides of the y-z plane: the spin \
         rotates about +x or -x depending on the electron state"
    );
    Ok(())
}
