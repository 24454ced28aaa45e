//! Mutual information between measured shift and rotation rate, by every
//! estimator, next to the closed-form H_max.

use std::time::Instant;

use sagnac_fidelity::bayes::RotationPrior;
use sagnac_fidelity::channel::SagnacChannel;
use sagnac_fidelity::fidelity::{
    closed_form_bound, mutual_information_direct, mutual_information_mc, mutual_information_quadrature,
    FidelityEstimate, QuadratureSettings,
};
use sagnac_fidelity::sagnac::GyroGeometry;
use sagnac_fidelity::spectrum::InputSpectrum;

fn show(est: &FidelityEstimate, started: Instant) {
    match est.bits() {
        Some(b) => println!(
            "{:>12}: {b:.6} ± {:.1e} bits  ({:.0?})",
            est.method.as_str(),
            est.uncertainty,
            started.elapsed()
        ),
        None => println!("{:>12}: unbounded", est.method.as_str()),
    }
}

fn main() -> sagnac_fidelity::Result<()> {
    let (omega_bar, ratio) = (2.976e15, 1e3);
    let ch = SagnacChannel::new(
        GyroGeometry::planar(1.0, 4.0, 1)?,
        InputSpectrum::gaussian(omega_bar, omega_bar / ratio)?,
    );
    let prior = RotationPrior::uniform_cutoff(1.0)?;
    let settings = QuadratureSettings::default();

    println!("ω̄/σ_ω = {ratio:e}");
    let t = Instant::now();
    show(&closed_form_bound(omega_bar, omega_bar / ratio)?, t);
    let t = Instant::now();
    show(&mutual_information_quadrature(&ch, &prior, &settings)?, t);
    let t = Instant::now();
    show(&mutual_information_direct(&ch, &prior, &settings)?, t);
    let t = Instant::now();
    show(&mutual_information_mc(&ch, &prior, 100_000, 0, &settings)?, t);

    let mono = SagnacChannel::new(*ch.geometry(), InputSpectrum::monochromatic(omega_bar)?);
    show(
        &mutual_information_quadrature(&mono, &prior, &settings)?,
        Instant::now(),
    );
    Ok(())
}
