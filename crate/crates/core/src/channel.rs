//! The measurement channel p(Δω | Ω): a noiseless Sagnac map Δω = kωΩ driven
//! by a random input frequency ω ~ P_in, with k = 4A/(Lc).

use rand::Rng;
use serde::Serialize;

use crate::sagnac::GyroGeometry;
use crate::spectrum::{normal_ln_pdf, InputSpectrum, SpectralDensity, SpectrumKind};

/// Result of evaluating a conditional density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ChannelDensity {
    /// Proper density, per rad/s of Δω.
    Density { value: f64 },
    /// All probability at a single Δω.
    PointMass { location: f64 },
}

impl ChannelDensity {
    pub fn value(&self) -> Option<f64> {
        match self {
            ChannelDensity::Density { value } => Some(*value),
            ChannelDensity::PointMass { .. } => None,
        }
    }
}

/// Minimal evaluation surface of a parameter-to-measurement channel.
///
/// `SagnacChannel` is the classical implementation; other physical models
/// (e.g. a density-matrix/POVM description) can slot in behind the same calls.
pub trait MeasurementChannel {
    fn conditional_density(&self, delta_omega: f64, rotation: f64) -> ChannelDensity;

    /// ln p(Δω | Ω); `None` when the conditional law is a point mass.
    fn ln_conditional_density(&self, delta_omega: f64, rotation: f64) -> Option<f64>;

    fn sample_measurement<R: Rng + ?Sized>(&self, rotation: f64, rng: &mut R) -> f64;

    /// Whether p(· | Ω) is a point mass at this rotation rate.
    fn is_point_mass(&self, rotation: f64) -> bool;
}

#[derive(Debug, Clone, PartialEq)]
pub struct SagnacChannel {
    geometry: GyroGeometry,
    spectrum: InputSpectrum,
    k: f64,
}

impl SagnacChannel {
    pub fn new(geometry: GyroGeometry, spectrum: InputSpectrum) -> Self {
        let k = geometry.scale_coefficient();
        Self { geometry, spectrum, k }
    }

    pub fn geometry(&self) -> &GyroGeometry {
        &self.geometry
    }

    pub fn spectrum(&self) -> &InputSpectrum {
        &self.spectrum
    }

    /// k = 4A/(Lc); Δω = k ω Ω.
    pub fn coefficient(&self) -> f64 {
        self.k
    }

    /// Noiseless shift for input frequency `omega`.
    pub fn shift(&self, omega: f64, rotation: f64) -> f64 {
        self.k * omega * rotation
    }

    /// Δω at the centre frequency, k ω̄ Ω.
    pub fn ridge(&self, rotation: f64) -> f64 {
        self.shift(self.spectrum.omega_bar(), rotation)
    }

    /// Standard deviation of Δω given Ω, k σ_ω |Ω|.
    pub fn ridge_width(&self, rotation: f64) -> f64 {
        self.k * self.spectrum.sigma_omega() * rotation.abs()
    }

    /// Rotation rate that a shift `delta_omega` implies at the centre frequency.
    pub fn invert(&self, delta_omega: f64) -> f64 {
        delta_omega / (self.k * self.spectrum.omega_bar())
    }
}

impl MeasurementChannel for SagnacChannel {
    fn conditional_density(&self, delta_omega: f64, rotation: f64) -> ChannelDensity {
        if rotation == 0.0 {
            return ChannelDensity::PointMass { location: 0.0 };
        }
        if let SpectralDensity::PointMass(w) = self.spectrum.density(0.0) {
            return ChannelDensity::PointMass {
                location: self.shift(w, rotation),
            };
        }
        let ln = self
            .ln_conditional_density(delta_omega, rotation)
            .expect("continuous spectrum");
        ChannelDensity::Density { value: ln.exp() }
    }

    fn ln_conditional_density(&self, delta_omega: f64, rotation: f64) -> Option<f64> {
        if rotation == 0.0 || self.spectrum.is_point_mass() {
            return None;
        }
        match self.spectrum.kind() {
            SpectrumKind::Gaussian => Some(normal_ln_pdf(
                delta_omega,
                self.ridge(rotation),
                self.ridge_width(rotation),
            )),
            _ => {
                let scale = self.k * rotation;
                self.spectrum
                    .ln_density(delta_omega / scale)
                    .map(|ln| ln - scale.abs().ln())
            }
        }
    }

    fn sample_measurement<R: Rng + ?Sized>(&self, rotation: f64, rng: &mut R) -> f64 {
        let omega = self.spectrum.sample(rng);
        self.shift(omega, rotation)
    }

    fn is_point_mass(&self, rotation: f64) -> bool {
        rotation == 0.0 || self.spectrum.is_point_mass()
    }
}
