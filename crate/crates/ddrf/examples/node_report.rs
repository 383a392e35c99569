//! Drive the command layer from a TOML node description: load the config,
//! surface its warnings, and print the calibration and total-fidelity
//! reports the `ddrf` binary would emit.
//!
//! Run with `cargo run --example node_report`.

use ddrf::cli::{cmd_calibrate, cmd_total};
use ddrf::system::NodeConfig;

const NODE_TOML: &str = include_str!("configs/node.toml");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = NodeConfig::from_toml_str(NODE_TOML)?;
    for warning in config.warnings() {
        println!("warning: {warning}");
    }
    println!("config digest {}", config.digest);
    println!("--- calibrate ---");
    println!("{}", cmd_calibrate(&config)?);
    println!("--- total (2 pairs) ---");
    println!("{}", cmd_total(&config, 2)?);
    Ok(())
}
