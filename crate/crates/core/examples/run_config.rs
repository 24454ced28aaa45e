//! Driving the library from the same TOML the command line reads.

use sagnac_fidelity::cli::config::parse;
use sagnac_fidelity::fidelity::mutual_information_mc;

const CONFIG: &str = r#"
[geometry]
area = 0.25
perimeter = 2.0
turns = 1

[spectrum]
kind = "comb"
omega_bar = 1e6
delta_omega = 1.0

[prior]
kind = "flat-circular"

[estimator]
samples = 20000
seed = 7
"#;

fn main() -> sagnac_fidelity::Result<()> {
    let cfg = parse(CONFIG)?;
    cfg.validate()?;
    let channel = cfg.channel()?;
    let prior = cfg.prior()?;
    let mc = cfg.monte_carlo();
    let est = mutual_information_mc(&channel, &prior, mc.samples, mc.seed, &cfg.quadrature())?;
    println!(
        "comb of {} modes, prior ±{:.4} rad/s: {:.4} ± {:.4} bits",
        channel.spectrum().modes().map_or(0, |m| m.len()),
        prior.half_width(),
        est.bits().unwrap(),
        est.uncertainty
    );
    Ok(())
}
