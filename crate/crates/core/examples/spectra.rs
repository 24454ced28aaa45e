//! Input spectra: a Gaussian line, a comb built from a mode spacing, and an
//! arbitrary discrete spectrum.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sagnac_fidelity::spectrum::{InputSpectrum, SpectralDensity};

fn main() -> sagnac_fidelity::Result<()> {
    let line = InputSpectrum::gaussian(2.976e15, 2.976e12)?;
    println!(
        "gaussian: ω̄ = {:e}, σ_ω = {:e}, h = {:.4} bits, marginal = {}",
        line.omega_bar(),
        line.sigma_omega(),
        line.entropy_bits().unwrap(),
        line.is_marginally_narrow()
    );

    // spacing δω gives variance δω·ω̄
    let comb = InputSpectrum::gaussian_comb(1e6, 1.0)?;
    let modes = comb.modes().unwrap();
    println!(
        "comb: {} modes, nominal σ_ω = {}, h = {:.4} bits",
        modes.len(),
        comb.sigma_omega(),
        comb.entropy_bits().unwrap()
    );
    let matched = InputSpectrum::gaussian(1e6, comb.sigma_omega())?;
    println!(
        "       matching Gaussian h = {:.4} bits",
        matched.entropy_bits().unwrap()
    );

    let lasers = InputSpectrum::discrete(&[(100.0, 0.2), (101.0, 0.5), (102.0, 0.3)])?;
    for w in [99.7, 100.6, 101.2, 103.0] {
        if let SpectralDensity::Density(p) = lasers.density(w) {
            println!("discrete density at {w:>5}: {p}");
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let draws: Vec<f64> = (0..5).map(|_| line.sample(&mut rng)).collect();
    println!("gaussian draws: {draws:?}");
    Ok(())
}
