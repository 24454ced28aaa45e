//! Inverting one measured shift into a posterior over the rotation rate.

use sagnac_fidelity::bayes::{posterior, posterior_width, tail_diagnostic, PosteriorDensity, RotationPrior};
use sagnac_fidelity::channel::SagnacChannel;
use sagnac_fidelity::sagnac::GyroGeometry;
use sagnac_fidelity::spectrum::InputSpectrum;

fn main() -> sagnac_fidelity::Result<()> {
    let (omega_bar, sigma) = (2.976e15, 2.976e11);
    let ch = SagnacChannel::new(
        GyroGeometry::planar(1.0, 4.0, 1)?,
        InputSpectrum::gaussian(omega_bar, sigma)?,
    );
    let prior = RotationPrior::uniform_cutoff(1.0)?;

    let measured = 0.25 * 9_926_867.47; // Δω for Ω = 0.25 rad/s at the line centre
    let PosteriorDensity::Curve(post) = posterior(&ch, &prior, measured)? else {
        unreachable!("broadband line")
    };
    let mode = post.mode();
    println!("predicted peak  {:.9}", post.predicted_peak());
    println!("located mode    {mode:.9}");
    println!("curvature width {:.4e}", post.curvature_width(mode).unwrap());
    println!("σ_ω/ω̄ · Ω̄      {:.4e}", posterior_width(omega_bar, sigma, mode)?);
    println!("total mass      {:.9}", post.total_mass()?);

    // walk out from the mode in posterior widths
    let width = posterior_width(omega_bar, sigma, mode)?;
    let grid: Vec<f64> = [1.0, 3.0, 6.0, 10.0].iter().map(|z| mode + z * width).collect();
    let tails = tail_diagnostic(&ch, &prior, measured, &grid)?;
    println!(
        "tail suppression ln[(ω̄/σ_ω) e^(−(ω̄/σ_ω)²/2)] = {:.1}",
        tails.ln_smallness_factor
    );
    for (z, row) in [1, 3, 6, 10].iter().zip(&tails.rows) {
        println!("  mode + {z:>2} widths: density {:.3e}", row.density);
    }

    let mono = SagnacChannel::new(*ch.geometry(), InputSpectrum::monochromatic(omega_bar)?);
    if let PosteriorDensity::PointMass { location } = posterior(&mono, &prior, measured)? {
        println!("monochromatic: Ω = {location:.9} exactly");
    }
    Ok(())
}
