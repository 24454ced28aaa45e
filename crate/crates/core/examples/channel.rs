//! The measurement channel p(Δω | Ω): ridge, width, density and sampling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sagnac_fidelity::channel::{ChannelDensity, MeasurementChannel, SagnacChannel};
use sagnac_fidelity::sagnac::GyroGeometry;
use sagnac_fidelity::spectrum::InputSpectrum;

fn main() -> sagnac_fidelity::Result<()> {
    let ch = SagnacChannel::new(
        GyroGeometry::planar(1.0, 4.0, 1)?,
        InputSpectrum::gaussian(2.976e15, 2.976e12)?,
    );
    println!("k = 4A/(Lc) = {:e} s", ch.coefficient());

    let rot = 7.292e-5;
    let (mu, s) = (ch.ridge(rot), ch.ridge_width(rot));
    println!("Ω = {rot:e}: Δω ~ N({mu:.4}, {s:.4}²)");
    for z in [-2.0, -1.0, 0.0, 1.0, 2.0] {
        let dw = mu + z * s;
        println!(
            "  p({dw:.4} | Ω) = {:.6e}",
            ch.conditional_density(dw, rot).value().unwrap()
        );
    }

    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let n = 100_000;
    let mean = (0..n).map(|_| ch.sample_measurement(rot, &mut rng)).sum::<f64>() / n as f64;
    println!("sample mean of {n} draws: {mean:.4}");

    if let ChannelDensity::PointMass { location } = ch.conditional_density(1.0, 0.0) {
        println!("at rest the shift is exactly {location}");
    }
    let mono = SagnacChannel::new(*ch.geometry(), InputSpectrum::monochromatic(2.976e15)?);
    println!("monochromatic channel is a point mass: {}", mono.is_point_mass(rot));
    Ok(())
}
