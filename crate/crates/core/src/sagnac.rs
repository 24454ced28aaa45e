//! Classical Sagnac observables: fringe shift, frequency shift, phase shift.
//!
//! All quantities are SI: metres, seconds, radians per second.

use std::f64::consts::PI;
use std::ops::{Mul, Neg};

use serde::{Deserialize, Serialize};

use crate::error::{domain, invalid, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec3(pub [f64; 3]);

impl Vec3 {
    pub const Z: Vec3 = Vec3([0.0, 0.0, 1.0]);

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3([x, y, z])
    }

    pub fn dot(&self, other: &Vec3) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;

    fn mul(self, rhs: f64) -> Vec3 {
        Vec3(self.0.map(|c| c * rhs))
    }
}

impl Neg for Vec3 {
    type Output = Vec3;

    fn neg(self) -> Vec3 {
        self * -1.0
    }
}

/// Loop geometry of a ring interferometer or fibre coil.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GyroGeometry {
    area_vector: Vec3,
    perimeter: f64,
    turns: u32,
}

impl GyroGeometry {
    /// `area_vector` is normal to the enclosed area with magnitude equal to it (m²).
    pub fn new(area_vector: Vec3, perimeter: f64, turns: u32) -> Result<Self> {
        if !area_vector.is_finite() || area_vector.norm() <= 0.0 {
            return Err(invalid("geometry", "area vector must be finite and non-zero"));
        }
        if !(perimeter.is_finite() && perimeter > 0.0) {
            return Err(invalid(
                "geometry",
                format!("perimeter must be positive, got {perimeter}"),
            ));
        }
        if turns == 0 {
            return Err(invalid("geometry", "turn count must be at least 1"));
        }
        let area = area_vector.norm();
        let max_area = perimeter * perimeter / (4.0 * PI);
        // relative slack so that an exact circle passes
        if area > max_area * (1.0 + 1e-12) {
            return Err(invalid(
                "geometry",
                format!("area {area} m² exceeds the isoperimetric limit {max_area} m² for perimeter {perimeter} m"),
            ));
        }
        Ok(Self {
            area_vector,
            perimeter,
            turns,
        })
    }

    /// Planar loop with its normal along +z.
    pub fn planar(area: f64, perimeter: f64, turns: u32) -> Result<Self> {
        Self::new(Vec3::Z * area, perimeter, turns)
    }

    pub fn area_vector(&self) -> Vec3 {
        self.area_vector
    }

    pub fn area(&self) -> f64 {
        self.area_vector.norm()
    }

    pub fn perimeter(&self) -> f64 {
        self.perimeter
    }

    pub fn turns(&self) -> u32 {
        self.turns
    }

    pub fn unit_normal(&self) -> Vec3 {
        self.area_vector * (1.0 / self.area())
    }

    /// Frequency-independent part of the scale factor, 4A/(Lc), in seconds per radian.
    pub fn scale_coefficient(&self) -> f64 {
        4.0 * self.area() / (self.perimeter * SPEED_OF_LIGHT)
    }
}

/// Angular velocity of the interferometer frame, rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RotationRate(Vec3);

impl RotationRate {
    pub fn new(omega_vector: Vec3) -> Result<Self> {
        if !omega_vector.is_finite() {
            return Err(invalid("rotation rate", "components must be finite"));
        }
        Ok(Self(omega_vector))
    }

    /// Rotation of magnitude `rate` about the geometry's area normal.
    pub fn about_normal(geom: &GyroGeometry, rate: f64) -> Result<Self> {
        Self::new(geom.unit_normal() * rate)
    }

    pub fn vector(&self) -> Vec3 {
        self.0
    }

    /// Signed component along the geometry's area normal.
    pub fn along(&self, geom: &GyroGeometry) -> f64 {
        self.0.dot(&geom.unit_normal())
    }
}

fn check_frequency(omega: f64) -> Result<()> {
    if omega.is_finite() && omega > 0.0 {
        Ok(())
    } else {
        Err(domain(format!(
            "light frequency must be positive and finite, got {omega}"
        )))
    }
}

fn check_rate(rate: f64) -> Result<()> {
    if rate.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("rotation rate must be finite, got {rate}")))
    }
}

/// Vacuum wavelength for angular frequency `omega`.
pub fn wavelength(omega: f64) -> Result<f64> {
    check_frequency(omega)?;
    Ok(2.0 * PI * SPEED_OF_LIGHT / omega)
}

/// Fringe shift ΔN = 4 A·Ω / (λ c).
pub fn fringe_shift(geom: &GyroGeometry, rotation: &RotationRate, wavelength: f64) -> Result<f64> {
    if !(wavelength.is_finite() && wavelength > 0.0) {
        return Err(domain(format!(
            "wavelength must be positive and finite, got {wavelength}"
        )));
    }
    Ok(4.0 * geom.area_vector.dot(&rotation.0) / (wavelength * SPEED_OF_LIGHT))
}

/// Scale factor S = 4Aω/(Lc) linking rotation rate to frequency splitting.
pub fn scale_factor(geom: &GyroGeometry, omega: f64) -> Result<f64> {
    check_frequency(omega)?;
    Ok(geom.scale_coefficient() * omega)
}

/// Frequency splitting Δω = S Ω of counter-propagating modes.
pub fn frequency_shift(geom: &GyroGeometry, omega: f64, rotation: f64) -> Result<f64> {
    check_rate(rotation)?;
    Ok(scale_factor(geom, omega)? * rotation)
}

/// Phase difference Δφ = N · 4AΩω/c² for an N-turn coil.
pub fn phase_shift(geom: &GyroGeometry, omega: f64, rotation: f64) -> Result<f64> {
    check_frequency(omega)?;
    check_rate(rotation)?;
    let single = 4.0 * geom.area() * rotation * omega / (SPEED_OF_LIGHT * SPEED_OF_LIGHT);
    Ok(f64::from(geom.turns) * single)
}
