//! Sagnac observables for a 1 m² square loop turning at Earth's rate.

use sagnac_fidelity::sagnac::{
    frequency_shift, fringe_shift, phase_shift, scale_factor, wavelength, GyroGeometry, RotationRate, Vec3,
};

fn main() -> sagnac_fidelity::Result<()> {
    let earth = 7.292e-5; // rad/s
    let omega = 2.976e15; // HeNe, 633 nm

    let ring = GyroGeometry::planar(1.0, 4.0, 1)?;
    let lambda = wavelength(omega)?;
    let rate = RotationRate::about_normal(&ring, earth)?;
    println!("wavelength        {lambda:.4e} m");
    println!("fringe shift ΔN   {:.6e}", fringe_shift(&ring, &rate, lambda)?);
    println!("scale factor S    {:.6e}", scale_factor(&ring, omega)?);
    println!("splitting Δω      {:.6} rad/s", frequency_shift(&ring, omega, earth)?);
    println!("phase Δφ          {:.6e} rad", phase_shift(&ring, omega, earth)?);

    // a 1000-turn fibre coil multiplies the phase, not the splitting
    let coil = GyroGeometry::planar(1.0, 4.0, 1000)?;
    println!("1000-turn phase   {:.6e} rad", phase_shift(&coil, omega, earth)?);

    // tilting the rotation axis by 60° halves the projected fringe shift
    let tilted = RotationRate::new(Vec3::new(earth * 60f64.to_radians().sin(), 0.0, earth * 0.5))?;
    println!("tilted ΔN         {:.6e}", fringe_shift(&ring, &tilted, lambda)?);
    Ok(())
}
