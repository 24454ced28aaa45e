//! Fidelity: the Shannon mutual information, in bits, between the measured
//! shift Δω and the rotation rate Ω.
//!
//! Three estimators are provided and are expected to agree:
//!
//! * [`closed_form_bound`] — the closed-form benchmark
//!   H_max = ½ log₂[(e/2π)^½ ω̄/σ_ω].
//! * [`mutual_information_quadrature`] — H = h(Δω) − h(Δω|Ω), with the
//!   conditional entropy in closed form and the marginal entropy by nested
//!   adaptive quadrature. [`mutual_information_direct`] evaluates the double
//!   integral instead and serves as a consistency check.
//! * [`mutual_information_mc`] — plug-in Monte Carlo average of
//!   log₂[p(Δω|Ω)/m(Δω)] over ancestral samples.

use std::cell::Cell;
use std::collections::BTreeMap;
use std::f64::consts::{E, LN_2, PI};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bayes::{marginal, RotationPrior};
use crate::channel::{MeasurementChannel, SagnacChannel};
use crate::error::{domain, invalid, Error, Result};
use crate::quadrature::{integrate, Tolerance};
use crate::sagnac::GyroGeometry;
use crate::spectrum::{normal_tail_mass, InputSpectrum, MIN_NARROWNESS};

/// Smallest Monte Carlo sample count accepted.
pub const MIN_SAMPLES: usize = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Half-width of the integration window in ridge standard deviations.
    pub tail_widths: f64,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            max_subdivisions: 10_000,
            tail_widths: 12.0,
        }
    }
}

impl QuadratureSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(invalid("quadrature settings", "tolerances must be positive"));
        }
        if self.max_subdivisions < 10 {
            return Err(invalid("quadrature settings", "at least 10 subdivisions are required"));
        }
        if !(self.tail_widths.is_finite() && self.tail_widths > 0.0) {
            return Err(invalid("quadrature settings", "tail truncation must be positive"));
        }
        Ok(())
    }

    fn outer(&self) -> Tolerance {
        Tolerance {
            rel: self.rel_tol,
            abs: self.abs_tol,
            max_subdivisions: self.max_subdivisions,
        }
    }

    // nested integrals run tighter so their error stays below the outer budget
    fn inner(&self) -> Tolerance {
        Tolerance {
            rel: (self.rel_tol * 1e-2).max(1e-14),
            abs: 0.0,
            max_subdivisions: self.max_subdivisions,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    Quadrature,
    Direct,
    MonteCarlo,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::ClosedForm => "closed-form",
            Method::Quadrature => "quadrature",
            Method::Direct => "direct",
            Method::MonteCarlo => "monte-carlo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Fidelity {
    Bits(f64),
    /// A noiseless channel over a continuous parameter carries unbounded information.
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FidelityEstimate {
    pub value: Fidelity,
    /// Standard error (Monte Carlo), error bound (quadrature) or 0 (closed form).
    pub uncertainty: f64,
    pub method: Method,
    pub diagnostics: BTreeMap<String, f64>,
}

impl FidelityEstimate {
    fn unbounded(method: Method) -> Self {
        Self {
            value: Fidelity::Unbounded,
            uncertainty: 0.0,
            method,
            diagnostics: BTreeMap::new(),
        }
    }

    /// Value in bits, `None` if unbounded.
    pub fn bits(&self) -> Option<f64> {
        match self.value {
            Fidelity::Bits(b) => Some(b),
            Fidelity::Unbounded => None,
        }
    }
}

/// H_max = ½ log₂[(e/2π)^½ ω̄/σ_ω].
///
/// Ratios below (2π/e)^½ give a negative value, flagged by the
/// `negative_bound` diagnostic.
pub fn closed_form_bound(omega_bar: f64, sigma_omega: f64) -> Result<FidelityEstimate> {
    if !(omega_bar.is_finite() && omega_bar > 0.0 && sigma_omega.is_finite() && sigma_omega > 0.0) {
        return Err(domain(format!(
            "closed-form bound needs positive omega_bar and sigma_omega, got {omega_bar}, {sigma_omega}"
        )));
    }
    let arg = (E / (2.0 * PI)).sqrt() * (omega_bar / sigma_omega);
    let bits = 0.5 * arg.log2();
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("ratio".to_string(), omega_bar / sigma_omega);
    if arg < 1.0 {
        diagnostics.insert("negative_bound".to_string(), 1.0);
    }
    Ok(FidelityEstimate {
        value: Fidelity::Bits(bits),
        uncertainty: 0.0,
        method: Method::ClosedForm,
        diagnostics,
    })
}

/// h(Δω|Ω) in bits: h(P_in) + log₂ k + E[log₂|Ω|], since Δω = kΩω.
fn conditional_entropy_bits(channel: &SagnacChannel, prior: &RotationPrior) -> Option<f64> {
    let h_in = channel.spectrum().entropy_bits()?;
    Some(h_in + channel.coefficient().log2() + prior.mean_log2_abs())
}

fn convergence_to(err: Error, map: impl Fn(f64) -> f64, scale: f64) -> Error {
    match err {
        Error::Convergence {
            value,
            abs_error,
            subdivisions,
        } => Error::Convergence {
            value: map(value),
            abs_error: abs_error * scale,
            subdivisions,
        },
        other => other,
    }
}

/// Mutual information by entropy decomposition, H = h(Δω) − h(Δω|Ω).
pub fn mutual_information_quadrature(
    channel: &SagnacChannel,
    prior: &RotationPrior,
    settings: &QuadratureSettings,
) -> Result<FidelityEstimate> {
    settings.validate()?;
    if channel.spectrum().is_point_mass() {
        return Ok(FidelityEstimate::unbounded(Method::Quadrature));
    }
    let h_cond = conditional_entropy_bits(channel, prior).expect("continuous spectrum");

    let a = prior.half_width();
    let k = channel.coefficient();
    let spectrum = channel.spectrum();
    let (_, w_hi) = spectrum.window(settings.tail_widths);
    let reach = k * a * w_hi;

    // m(Δω) is even in Δω, so integrate over [0, reach] and double
    let mut pts = vec![0.0, reach];
    let features = spectrum.feature_points(settings.tail_widths);
    if let Some(first) = features.first() {
        // near Δω = 0 only rotations close to zero contribute
        pts.push(0.5 * k * a * first);
    }
    pts.extend(features.iter().map(|w| k * a * w));
    pts.retain(|p| *p >= 0.0 && *p <= reach);
    pts.sort_by(f64::total_cmp);
    pts.dedup();

    let inner_failure: Cell<Option<Error>> = Cell::new(None);
    let inner_err = Cell::new(0.0f64);
    let integrand = |x: f64| match marginal(channel, prior, x, settings.tail_widths, settings.inner()) {
        Ok((m, e)) => {
            if m > 0.0 {
                // an error e in m moves −m log₂ m by at most e·(|log₂ m| + log₂ e)
                let moved = e * (m.log2().abs() + 1.0 / LN_2);
                inner_err.set(inner_err.get().max(moved));
                -m * m.log2()
            } else {
                0.0
            }
        }
        Err(err) => {
            inner_failure.set(Some(err));
            0.0
        }
    };
    let outer =
        integrate(integrand, &pts, settings.outer()).map_err(|e| convergence_to(e, |v| 2.0 * v - h_cond, 2.0))?;
    if let Some(err) = inner_failure.take() {
        return Err(err);
    }

    let h_marg = 2.0 * outer.value;
    let bits = h_marg - h_cond;
    let truncated = normal_tail_mass(settings.tail_widths);
    let (m_flat, _) = marginal(channel, prior, 0.0, settings.tail_widths, settings.inner())?;
    let truncation_bits = truncated * (m_flat.log2().abs() + truncated.log2().abs() + 1.0);
    let inner_bits = 2.0 * reach * inner_err.get();
    let uncertainty = 2.0 * outer.abs_error + truncation_bits + inner_bits;

    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("h_marginal_bits".into(), h_marg);
    diagnostics.insert("h_conditional_bits".into(), h_cond);
    diagnostics.insert("subdivisions".into(), outer.subdivisions as f64);
    diagnostics.insert("evaluations".into(), outer.evaluations as f64);
    diagnostics.insert("truncation_widths".into(), settings.tail_widths);
    diagnostics.insert("truncated_mass".into(), truncated);
    diagnostics.insert("outer_limit".into(), reach);
    Ok(FidelityEstimate {
        value: Fidelity::Bits(bits),
        uncertainty,
        method: Method::Quadrature,
        diagnostics,
    })
}

/// Mutual information by direct quadrature of the double integral
/// ∫∫ p(Δω|Ω) p(Ω) log₂[p(Δω|Ω)/m(Δω)].
///
/// Uses the Ω ↔ −Ω symmetry and Ω = Ω_max e^(−v) so the log|Ω| growth near
/// Ω = 0 becomes an exponentially damped integrand.
pub fn mutual_information_direct(
    channel: &SagnacChannel,
    prior: &RotationPrior,
    settings: &QuadratureSettings,
) -> Result<FidelityEstimate> {
    settings.validate()?;
    if channel.spectrum().is_point_mass() {
        return Ok(FidelityEstimate::unbounded(Method::Direct));
    }
    let a = prior.half_width();
    let spectrum = channel.spectrum();
    let (w_lo, w_hi) = spectrum.window(settings.tail_widths);
    let features = spectrum.feature_points(settings.tail_widths);
    let v_max = 60.0;

    let failure: Cell<Option<Error>> = Cell::new(None);
    let information_at = |rot: f64| -> f64 {
        // ∫ p(Δω|Ω) log₂[p(Δω|Ω)/m(Δω)] dΔω for one Ω > 0
        let scale = channel.coefficient() * rot;
        let mut pts = vec![scale * w_lo, scale * w_hi];
        pts.extend(features.iter().map(|w| scale * w));
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let inner = integrate(
            |dw| {
                let Some(ln_p) = channel.ln_conditional_density(dw, rot) else {
                    return 0.0;
                };
                if ln_p == f64::NEG_INFINITY {
                    return 0.0;
                }
                match marginal(channel, prior, dw, settings.tail_widths, settings.inner()) {
                    Ok((m, _)) if m > 0.0 => ln_p.exp() * (ln_p - m.ln()) / LN_2,
                    Ok(_) => 0.0,
                    Err(e) => {
                        failure.set(Some(e));
                        0.0
                    }
                }
            },
            &pts,
            settings.inner(),
        );
        match inner {
            Ok(r) => r.value,
            Err(e) => {
                failure.set(Some(e));
                0.0
            }
        }
    };

    // rotations within a relative σ_ω/ω̄ of the cutoff see the marginal's edge
    let rel_width = spectrum.sigma_omega() / spectrum.omega_bar();
    let mut breaks: Vec<f64> = (0..=12).map(|i| v_max * f64::from(i) / 12.0).collect();
    breaks.extend(
        [1.0, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 24.0, 32.0]
            .iter()
            .map(|z| z * rel_width)
            .filter(|v| *v < v_max),
    );
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let outer = integrate(
        |v| information_at(a * (-v).exp()) * (-v).exp(),
        &breaks,
        settings.outer(),
    )?;
    if let Some(err) = failure.take() {
        return Err(err);
    }
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("subdivisions".into(), outer.subdivisions as f64);
    diagnostics.insert("log_depth".into(), v_max);
    Ok(FidelityEstimate {
        value: Fidelity::Bits(outer.value),
        uncertainty: outer.abs_error + (v_max + 1.0) * (-v_max).exp(),
        method: Method::Direct,
        diagnostics,
    })
}

/// Plug-in Monte Carlo estimate with its standard error.
///
/// Samples are drawn sequentially from a ChaCha8 stream seeded with `seed`;
/// the per-sample log-ratios are evaluated in parallel and summed in sample
/// order, so the result does not depend on the thread count.
pub fn mutual_information_mc(
    channel: &SagnacChannel,
    prior: &RotationPrior,
    samples: usize,
    seed: u64,
    settings: &QuadratureSettings,
) -> Result<FidelityEstimate> {
    settings.validate()?;
    if samples < MIN_SAMPLES {
        return Err(domain(format!(
            "Monte Carlo needs at least {MIN_SAMPLES} samples, got {samples}"
        )));
    }
    if channel.spectrum().is_point_mass() {
        return Ok(FidelityEstimate::unbounded(Method::MonteCarlo));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<(f64, f64)> = (0..samples)
        .map(|_| {
            let rot = loop {
                let r = prior.sample(&mut rng);
                if r != 0.0 {
                    break r;
                }
            };
            (rot, channel.sample_measurement(rot, &mut rng))
        })
        .collect();

    let terms: Vec<f64> = draws
        .par_iter()
        .map(|&(rot, dw)| {
            let ln_p = channel
                .ln_conditional_density(dw, rot)
                .ok_or_else(|| domain("point-mass conditional in Monte Carlo draw"))?;
            let (m, _) = marginal(channel, prior, dw, settings.tail_widths, settings.inner())?;
            if !(m > 0.0) {
                return Err(Error::Inconsistent(format!(
                    "sampled shift {dw:e} has zero marginal density"
                )));
            }
            Ok((ln_p - m.ln()) / LN_2)
        })
        .collect::<Result<_>>()?;

    let n = terms.len() as f64;
    let mean = terms.iter().sum::<f64>() / n;
    let var = terms.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("samples".into(), n);
    diagnostics.insert("seed".into(), seed as f64);
    diagnostics.insert("sample_std_bits".into(), var.sqrt());
    Ok(FidelityEstimate {
        value: Fidelity::Bits(mean),
        uncertainty: se,
        method: Method::MonteCarlo,
        diagnostics,
    })
}

/// Monte Carlo settings for [`bound_comparison_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonteCarloSettings {
    pub samples: usize,
    pub seed: u64,
}

impl Default for MonteCarloSettings {
    fn default() -> Self {
        Self {
            samples: 100_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub ratio: f64,
    pub h_quadrature_bits: f64,
    pub h_quadrature_err_bits: f64,
    pub h_mc_bits: f64,
    pub h_mc_se_bits: f64,
    pub h_max_bits: f64,
    pub ratio_to_bound: f64,
}

/// Numerical fidelity against the closed-form benchmark for a list of
/// narrowness ratios ω̄/σ_ω at fixed geometry and centre frequency.
/// Rows come back sorted by ratio.
pub fn bound_comparison_sweep(
    geometry: &GyroGeometry,
    omega_bar: f64,
    ratios: &[f64],
    prior: &RotationPrior,
    settings: &QuadratureSettings,
    mc: MonteCarloSettings,
) -> Result<Vec<SweepRow>> {
    if ratios.is_empty() {
        return Err(domain("sweep needs at least one ratio"));
    }
    if let Some(bad) = ratios.iter().find(|r| !(r.is_finite() && **r > MIN_NARROWNESS)) {
        return Err(domain(format!("sweep ratios must exceed {MIN_NARROWNESS}, got {bad}")));
    }
    let mut sorted = ratios.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
        .iter()
        .map(|&ratio| {
            let sigma = omega_bar / ratio;
            let spectrum = InputSpectrum::gaussian(omega_bar, sigma)?;
            let channel = SagnacChannel::new(*geometry, spectrum);
            let quad = mutual_information_quadrature(&channel, prior, settings)?;
            let carlo = mutual_information_mc(&channel, prior, mc.samples, mc.seed, settings)?;
            let bound = closed_form_bound(omega_bar, sigma)?;
            let h_quad = quad.bits().expect("broadband channel");
            let h_max = bound.bits().expect("closed form is finite");
            Ok(SweepRow {
                ratio,
                h_quadrature_bits: h_quad,
                h_quadrature_err_bits: quad.uncertainty,
                h_mc_bits: carlo.bits().expect("broadband channel"),
                h_mc_se_bits: carlo.uncertainty,
                h_max_bits: h_max,
                ratio_to_bound: h_quad / h_max,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn channel(ratio: f64) -> SagnacChannel {
        let wb = 2.976e15;
        SagnacChannel::new(
            GyroGeometry::planar(1.0, 4.0, 1).unwrap(),
            InputSpectrum::gaussian(wb, wb / ratio).unwrap(),
        )
    }

    #[test]
    fn closed_form_values() {
        let unity = (2.0 * PI / E).sqrt();
        assert!(closed_form_bound(unity, 1.0).unwrap().bits().unwrap().abs() < 1e-12);
        let one = closed_form_bound(4.0 * unity, 1.0).unwrap().bits().unwrap();
        assert!((one - 1.0).abs() < 1e-12);
        // ½ log₂(0.657744…e8), evaluated at 40 digits
        let big = closed_form_bound(1e8, 1.0).unwrap().bits().unwrap();
        assert!(((big - 12.985_512_107_403_61) / 12.985_512_107_403_61).abs() < 1e-12);
    }

    #[test]
    fn closed_form_flags_negative_values() {
        let est = closed_form_bound(1.0, 1.0).unwrap();
        assert!(est.bits().unwrap() < 0.0);
        assert_eq!(est.diagnostics.get("negative_bound"), Some(&1.0));
        assert!(closed_form_bound(0.0, 1.0).is_err());
        assert!(closed_form_bound(1.0, -1.0).is_err());
    }

    #[test]
    fn monochromatic_is_unbounded() {
        let ch = SagnacChannel::new(
            GyroGeometry::planar(1.0, 4.0, 1).unwrap(),
            InputSpectrum::monochromatic(1e15).unwrap(),
        );
        let prior = RotationPrior::uniform_cutoff(1.0).unwrap();
        let s = QuadratureSettings::default();
        assert_eq!(
            mutual_information_quadrature(&ch, &prior, &s).unwrap().value,
            Fidelity::Unbounded
        );
        assert_eq!(
            mutual_information_mc(&ch, &prior, 1000, 1, &s).unwrap().value,
            Fidelity::Unbounded
        );
        assert_eq!(
            mutual_information_direct(&ch, &prior, &s).unwrap().value,
            Fidelity::Unbounded
        );
    }

    #[test]
    fn quadrature_matches_frozen_oracle() {
        // two independent high-precision routes (mpmath over ω, scipy over Ω)
        // agree on these to ~1e-13
        let prior = RotationPrior::uniform_cutoff(1.0).unwrap();
        let s = QuadratureSettings::default();
        for (ratio, expected) in [
            (1e2, 7.052_343_674_870_142),
            (1e3, 10.362_685_337_870_84),
            (1e4, 13.683_442_124_657_73),
        ] {
            let est = mutual_information_quadrature(&channel(ratio), &prior, &s).unwrap();
            let h = est.bits().unwrap();
            assert!((h - expected).abs() < 1e-6, "ratio {ratio}: {h} vs {expected}");
            assert!(est.uncertainty < 1e-5);
        }
    }

    #[test]
    fn direct_agrees_with_decomposition() {
        let prior = RotationPrior::uniform_cutoff(1.0).unwrap();
        let s = QuadratureSettings::default();
        let ch = channel(1e2);
        let a = mutual_information_quadrature(&ch, &prior, &s).unwrap().bits().unwrap();
        let b = mutual_information_direct(&ch, &prior, &s).unwrap().bits().unwrap();
        assert!((a - b).abs() < 10.0 * s.rel_tol * a.abs(), "{a} vs {b}");
    }

    #[test]
    fn mc_is_deterministic() {
        let prior = RotationPrior::uniform_cutoff(1.0).unwrap();
        let s = QuadratureSettings::default();
        let ch = channel(1e3);
        let a = mutual_information_mc(&ch, &prior, 2000, 42, &s).unwrap();
        let b = mutual_information_mc(&ch, &prior, 2000, 42, &s).unwrap();
        assert_eq!(a, b);
        let c = mutual_information_mc(&ch, &prior, 2000, 43, &s).unwrap();
        assert_ne!(a.bits(), c.bits());
        assert!(mutual_information_mc(&ch, &prior, 999, 42, &s).is_err());
    }

    #[test]
    fn settings_validation() {
        let mut s = QuadratureSettings::default();
        assert!(s.validate().is_ok());
        s.max_subdivisions = 9;
        assert!(s.validate().is_err());
        let s = QuadratureSettings {
            rel_tol: 0.0,
            ..Default::default()
        };
        assert!(s.validate().is_err());
    }

    #[test]
    fn sweep_rejects_broad_ratios() {
        let g = GyroGeometry::planar(1.0, 4.0, 1).unwrap();
        let prior = RotationPrior::uniform_cutoff(1.0).unwrap();
        let r = bound_comparison_sweep(
            &g,
            1e15,
            &[5.0, 100.0],
            &prior,
            &QuadratureSettings::default(),
            MonteCarloSettings::default(),
        );
        assert!(r.is_err());
    }

    #[test]
    fn comb_spectrum_quadrature_runs() {
        // a comb is a piecewise-constant density; MI should sit close to the
        // matching continuous line
        let wb = 4e4;
        let comb = InputSpectrum::gaussian_comb(wb, 1.0).unwrap();
        let sigma = comb.sigma_omega();
        let g = GyroGeometry::planar(1.0, 4.0, 1).unwrap();
        let prior = RotationPrior::uniform_cutoff(1.0).unwrap();
        let s = QuadratureSettings::default();
        let h_comb = mutual_information_quadrature(&SagnacChannel::new(g, comb), &prior, &s).unwrap();
        let line = SagnacChannel::new(g, InputSpectrum::gaussian(wb, sigma).unwrap());
        let h_line = mutual_information_quadrature(&line, &prior, &s).unwrap();
        assert!((h_comb.bits().unwrap() - h_line.bits().unwrap()).abs() < 0.01);
    }
}
