//! Input light spectra P_in(ω): monochromatic lines, continuous Gaussian lines
//! and discrete mode combs.

use std::f64::consts::{E, LN_2, PI};

use rand::Rng;
use rand_distr::weighted::WeightedIndex;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::quadrature::{integrate, Tolerance};

/// Gaussian lines must satisfy ω̄/σ_ω above this.
pub const MIN_NARROWNESS: f64 = 10.0;
/// Below this ω̄/σ_ω a Gaussian line is accepted but flagged.
pub const WARN_NARROWNESS: f64 = 100.0;
/// Half-width, in standard deviations, of the window a discrete comb is built on.
pub const COMB_HALF_WIDTH: f64 = 8.0;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

pub(crate) fn normal_ln_pdf(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    -0.5 * z * z - sd.ln() - LN_SQRT_2PI
}

/// Two-sided normal tail mass beyond `widths` standard deviations.
pub(crate) fn normal_tail_mass(widths: f64) -> f64 {
    statrs::function::erf::erfc(widths / std::f64::consts::SQRT_2)
}

/// Evaluation of P_in at a single frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralDensity {
    /// Density per rad/s.
    Density(f64),
    /// All probability sits at this frequency.
    PointMass(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumKind {
    Monochromatic,
    Gaussian,
    Discrete,
}

#[derive(Debug, Clone, PartialEq)]
struct Comb {
    modes: Vec<f64>,
    probs: Vec<f64>,
    // bin i spans [edges[i], edges[i + 1]]
    edges: Vec<f64>,
    nominal_sigma: Option<f64>,
}

impl Comb {
    fn width(&self, i: usize) -> f64 {
        self.edges[i + 1] - self.edges[i]
    }

    fn bin_of(&self, omega: f64) -> Option<usize> {
        if omega < self.edges[0] || omega >= self.edges[self.edges.len() - 1] {
            return None;
        }
        Some(self.edges.partition_point(|e| *e <= omega) - 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Line {
    Monochromatic { omega_bar: f64 },
    Gaussian { omega_bar: f64, sigma: f64 },
    Discrete(Comb),
}

/// Distribution of input angular frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct InputSpectrum(Line);

impl InputSpectrum {
    pub fn monochromatic(omega_bar: f64) -> Result<Self> {
        if !(omega_bar.is_finite() && omega_bar > 0.0) {
            return Err(invalid(
                "spectrum",
                format!("centre frequency must be positive, got {omega_bar}"),
            ));
        }
        Ok(Self(Line::Monochromatic { omega_bar }))
    }

    pub fn gaussian(omega_bar: f64, sigma_omega: f64) -> Result<Self> {
        if !(omega_bar.is_finite() && omega_bar > 0.0) {
            return Err(invalid(
                "spectrum",
                format!("centre frequency must be positive, got {omega_bar}"),
            ));
        }
        if !(sigma_omega.is_finite() && sigma_omega > 0.0) {
            return Err(invalid(
                "spectrum",
                format!("bandwidth must be positive, got {sigma_omega}"),
            ));
        }
        let ratio = omega_bar / sigma_omega;
        if ratio <= MIN_NARROWNESS {
            return Err(invalid(
                "spectrum",
                format!("line too broad: omega_bar/sigma_omega = {ratio} must exceed {MIN_NARROWNESS}"),
            ));
        }
        Ok(Self(Line::Gaussian {
            omega_bar,
            sigma: sigma_omega,
        }))
    }

    /// Arbitrary comb of `(frequency, probability)` modes. Each mode owns the
    /// bin between the midpoints to its neighbours.
    pub fn discrete(modes: &[(f64, f64)]) -> Result<Self> {
        Self::comb(modes, None)
    }

    /// Gaussian comb with mode spacing `delta_omega` and variance δω·ω̄,
    /// laid out on ω̄ ± 8σ_ω with ω̄ itself one of the modes.
    pub fn gaussian_comb(omega_bar: f64, delta_omega: f64) -> Result<Self> {
        if !(omega_bar.is_finite() && omega_bar > 0.0 && delta_omega.is_finite() && delta_omega > 0.0) {
            return Err(invalid("spectrum", "comb centre and spacing must be positive"));
        }
        let variance = delta_omega * omega_bar;
        let sigma = variance.sqrt();
        if omega_bar / sigma <= MIN_NARROWNESS {
            return Err(invalid(
                "spectrum",
                format!(
                    "comb too broad: omega_bar/delta_omega = {} must exceed {}",
                    omega_bar / delta_omega,
                    MIN_NARROWNESS * MIN_NARROWNESS
                ),
            ));
        }
        let half = (COMB_HALF_WIDTH * sigma / delta_omega).ceil() as i64;
        let norm = (delta_omega / (2.0 * PI * omega_bar)).sqrt();
        let modes: Vec<(f64, f64)> = (-half..=half)
            .map(|j| {
                let offset = j as f64 * delta_omega;
                (omega_bar + offset, norm * (-offset * offset / (2.0 * variance)).exp())
            })
            .collect();
        Self::comb(&modes, Some(sigma))
    }

    fn comb(modes: &[(f64, f64)], nominal_sigma: Option<f64>) -> Result<Self> {
        if modes.len() < 2 {
            return Err(invalid("spectrum", "a discrete spectrum needs at least two modes"));
        }
        if modes
            .iter()
            .any(|(w, p)| !(w.is_finite() && *w > 0.0 && p.is_finite() && *p >= 0.0))
        {
            return Err(invalid(
                "spectrum",
                "modes must have positive frequency and non-negative probability",
            ));
        }
        if modes.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(invalid("spectrum", "mode frequencies must be strictly increasing"));
        }
        let total: f64 = modes.iter().map(|(_, p)| p).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(invalid("spectrum", format!("mode probabilities sum to {total}, not 1")));
        }
        let n = modes.len();
        let mut edges = Vec::with_capacity(n + 1);
        edges.push(modes[0].0 - 0.5 * (modes[1].0 - modes[0].0));
        edges.extend(modes.windows(2).map(|w| 0.5 * (w[0].0 + w[1].0)));
        edges.push(modes[n - 1].0 + 0.5 * (modes[n - 1].0 - modes[n - 2].0));
        if edges[0] <= 0.0 {
            return Err(invalid("spectrum", "lowest mode bin reaches non-positive frequency"));
        }
        Ok(Self(Line::Discrete(Comb {
            modes: modes.iter().map(|m| m.0).collect(),
            probs: modes.iter().map(|m| m.1).collect(),
            edges,
            nominal_sigma,
        })))
    }

    pub fn kind(&self) -> SpectrumKind {
        match self.0 {
            Line::Monochromatic { .. } => SpectrumKind::Monochromatic,
            Line::Gaussian { .. } => SpectrumKind::Gaussian,
            Line::Discrete(_) => SpectrumKind::Discrete,
        }
    }

    pub fn is_point_mass(&self) -> bool {
        matches!(self.0, Line::Monochromatic { .. })
    }

    /// Centre frequency ω̄ (probability-weighted mean for a general comb).
    pub fn omega_bar(&self) -> f64 {
        match &self.0 {
            Line::Monochromatic { omega_bar } | Line::Gaussian { omega_bar, .. } => *omega_bar,
            Line::Discrete(c) => c.modes.iter().zip(&c.probs).map(|(w, p)| w * p).sum(),
        }
    }

    /// Bandwidth σ_ω. Zero for a monochromatic line; for combs built with
    /// [`InputSpectrum::gaussian_comb`] this is exactly sqrt(δω·ω̄).
    pub fn sigma_omega(&self) -> f64 {
        match &self.0 {
            Line::Monochromatic { .. } => 0.0,
            Line::Gaussian { sigma, .. } => *sigma,
            Line::Discrete(c) => c.nominal_sigma.unwrap_or_else(|| {
                let mean = self.omega_bar();
                c.modes
                    .iter()
                    .zip(&c.probs)
                    .map(|(w, p)| p * (w - mean).powi(2))
                    .sum::<f64>()
                    .sqrt()
            }),
        }
    }

    /// True for Gaussian lines accepted but outside the comfortably narrow regime.
    pub fn is_marginally_narrow(&self) -> bool {
        match self.0 {
            Line::Gaussian { omega_bar, sigma } => omega_bar / sigma < WARN_NARROWNESS,
            _ => false,
        }
    }

    /// `(frequency, probability)` pairs of a discrete spectrum.
    pub fn modes(&self) -> Option<Vec<(f64, f64)>> {
        match &self.0 {
            Line::Discrete(c) => Some(c.modes.iter().copied().zip(c.probs.iter().copied()).collect()),
            _ => None,
        }
    }

    pub fn density(&self, omega: f64) -> SpectralDensity {
        match &self.0 {
            Line::Monochromatic { omega_bar } => SpectralDensity::PointMass(*omega_bar),
            Line::Gaussian { omega_bar, sigma } => {
                SpectralDensity::Density(normal_ln_pdf(omega, *omega_bar, *sigma).exp())
            }
            Line::Discrete(c) => SpectralDensity::Density(c.bin_of(omega).map_or(0.0, |i| c.probs[i] / c.width(i))),
        }
    }

    /// Natural log of the density; `None` for a point mass.
    pub fn ln_density(&self, omega: f64) -> Option<f64> {
        match &self.0 {
            Line::Monochromatic { .. } => None,
            Line::Gaussian { omega_bar, sigma } => Some(normal_ln_pdf(omega, *omega_bar, *sigma)),
            Line::Discrete(c) => Some(
                c.bin_of(omega)
                    .map_or(f64::NEG_INFINITY, |i| (c.probs[i] / c.width(i)).ln()),
            ),
        }
    }

    /// Draws a frequency. Gaussian draws at or below zero are redrawn.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.0 {
            Line::Monochromatic { omega_bar } => *omega_bar,
            Line::Gaussian { omega_bar, sigma } => {
                let normal = Normal::new(*omega_bar, *sigma).expect("validated on construction");
                loop {
                    let w = normal.sample(rng);
                    if w > 0.0 {
                        return w;
                    }
                }
            }
            Line::Discrete(c) => {
                let pick = WeightedIndex::new(&c.probs).expect("validated on construction");
                let i = pick.sample(rng);
                c.edges[i] + rng.random::<f64>() * c.width(i)
            }
        }
    }

    /// Differential entropy of P_in in bits; `None` for a point mass.
    pub fn entropy_bits(&self) -> Option<f64> {
        match &self.0 {
            Line::Monochromatic { .. } => None,
            Line::Gaussian { sigma, .. } => Some(0.5 * (2.0 * PI * E * sigma * sigma).log2()),
            Line::Discrete(c) => Some(
                c.probs
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| **p > 0.0)
                    .map(|(i, p)| -p * (p / c.width(i)).log2())
                    .sum(),
            ),
        }
    }

    /// Frequency interval holding all but a negligible part of the mass.
    /// For Gaussian lines this is ω̄ ± `widths`·σ_ω.
    pub fn window(&self, widths: f64) -> (f64, f64) {
        match &self.0 {
            Line::Monochromatic { omega_bar } => (*omega_bar, *omega_bar),
            Line::Gaussian { omega_bar, sigma } => (omega_bar - widths * sigma, omega_bar + widths * sigma),
            Line::Discrete(c) => (c.edges[0], c.edges[c.edges.len() - 1]),
        }
    }

    /// Frequencies where integrands built from P_in change character.
    pub fn feature_points(&self, widths: f64) -> Vec<f64> {
        match &self.0 {
            Line::Monochromatic { omega_bar } => vec![*omega_bar],
            Line::Gaussian { omega_bar, sigma } => {
                let mut zs = vec![-widths, widths];
                zs.extend([-8.0, -6.0, -4.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0]);
                zs.retain(|z| z.abs() <= widths);
                zs.sort_by(f64::total_cmp);
                zs.dedup();
                zs.iter().map(|z| omega_bar + z * sigma).filter(|w| *w > 0.0).collect()
            }
            Line::Discrete(c) => c.edges.clone(),
        }
    }

    /// ∫ over |ω| ≥ `lo` of P_in(ω)/|ω| dω, together with an error bound.
    ///
    /// Gaussian lines are truncated to ω̄ ± `widths`·σ_ω; the dropped tail is
    /// included in the error bound. Stretches of the integrand near ω = 0 are
    /// integrated in ln|ω| so the 1/|ω| factor stays bounded.
    pub fn inverse_frequency_tail(&self, lo: f64, widths: f64, tol: Tolerance) -> Result<(f64, f64)> {
        let lo = lo.abs().max(f64::MIN_POSITIVE);
        match &self.0 {
            Line::Monochromatic { omega_bar } => Ok((if *omega_bar >= lo { 1.0 / omega_bar } else { 0.0 }, 0.0)),
            Line::Discrete(c) => {
                let mut total = 0.0;
                for i in 0..c.probs.len() {
                    let (a, b) = (c.edges[i].max(lo), c.edges[i + 1]);
                    if b > a {
                        total += c.probs[i] / c.width(i) * (b / a).ln();
                    }
                }
                Ok((total, 0.0))
            }
            Line::Gaussian { omega_bar, sigma } => {
                let (omega_bar, sigma) = (*omega_bar, *sigma);
                let (w_lo, w_hi) = (omega_bar - widths * sigma, omega_bar + widths * sigma);
                let ln_pdf = |w: f64| normal_ln_pdf(w, omega_bar, sigma);
                let mut value = 0.0;
                let mut error = 0.0;

                // bulk, direct in ω
                let bulk_lo = lo.max(w_lo).max(0.5 * omega_bar);
                if w_hi > bulk_lo {
                    let mut pts = vec![bulk_lo];
                    pts.extend(
                        self.feature_points(widths)
                            .into_iter()
                            .filter(|w| *w > bulk_lo && *w < w_hi),
                    );
                    pts.push(w_hi);
                    let r = integrate(|w| (ln_pdf(w) - w.ln()).exp(), &pts, tol)?;
                    value += r.value;
                    error += r.abs_error;
                }
                // positive frequencies below ω̄/2, in s = ln ω
                let near_lo = lo.max(w_lo);
                let near_hi = (0.5 * omega_bar).min(w_hi);
                if near_hi > near_lo {
                    let r = integrate(|s| ln_pdf(s.exp()).exp(), &[near_lo.ln(), near_hi.ln()], tol)?;
                    value += r.value;
                    error += r.abs_error;
                }
                // negative frequencies, in s = ln|ω|
                if -w_lo > lo {
                    let r = integrate(|s| ln_pdf(-s.exp()).exp(), &[lo.ln(), (-w_lo).ln()], tol)?;
                    value += r.value;
                    error += r.abs_error;
                }
                // dropped tails
                let half_mass = 0.5 * normal_tail_mass(widths);
                error += half_mass / w_hi;
                if w_lo > 0.0 {
                    let mid = 0.5 * w_lo;
                    error += 2.0 * half_mass / w_lo;
                    if mid > lo {
                        error += ln_pdf(mid).exp() * (mid / lo).ln();
                    }
                } else {
                    error += half_mass / -w_lo;
                }
                Ok((value, error))
            }
        }
    }
}

/// Log base 2 of e, handy for entropy bookkeeping.
pub(crate) const LOG2_E: f64 = 1.0 / LN_2;
