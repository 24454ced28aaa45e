//! Priors over the rotation rate, the marginal density of the measured shift,
//! and posterior inversion p(Ω | Δω) ∝ p(Δω | Ω) p(Ω).

use std::f64::consts::PI;

use rand::Rng;
use serde::Serialize;

use crate::channel::{MeasurementChannel, SagnacChannel};
use crate::error::{domain, invalid, Error, Result};
use crate::quadrature::{integrate, Tolerance};
use crate::spectrum::LOG2_E;

/// Relative tolerance used to normalise posteriors.
const POSTERIOR_TOL: Tolerance = Tolerance {
    rel: 1e-12,
    abs: 0.0,
    max_subdivisions: 4_000,
};

/// Agreement required between the two normalisation routes.
pub const NORMALIZATION_TOL: f64 = 1e-6;

/// Prior density over the rotation rate, rad/s. Both variants are uniform on
/// a symmetric interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum RotationPrior {
    /// 1/(2 Ω_max) on [−Ω_max, Ω_max].
    UniformCutoff { omega_max: f64 },
    /// 1/(2π) on [−π, π] rad/s.
    FlatCircular,
}

impl RotationPrior {
    pub fn uniform_cutoff(omega_max: f64) -> Result<Self> {
        if !(omega_max.is_finite() && omega_max > 0.0) {
            return Err(invalid("prior", format!("omega_max must be positive, got {omega_max}")));
        }
        Ok(Self::UniformCutoff { omega_max })
    }

    pub fn half_width(&self) -> f64 {
        match self {
            Self::UniformCutoff { omega_max } => *omega_max,
            Self::FlatCircular => PI,
        }
    }

    pub fn contains(&self, rotation: f64) -> bool {
        rotation.abs() <= self.half_width()
    }

    pub fn density(&self, rotation: f64) -> f64 {
        if self.contains(rotation) {
            0.5 / self.half_width()
        } else {
            0.0
        }
    }

    pub fn ln_density(&self, rotation: f64) -> f64 {
        self.density(rotation).ln()
    }

    /// E[log₂ |Ω|] under the prior: log₂ Ω_max − log₂ e.
    pub fn mean_log2_abs(&self) -> f64 {
        self.half_width().log2() - LOG2_E
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let a = self.half_width();
        rng.random_range(-a..a)
    }

    /// Same shape, support stretched by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::uniform_cutoff(self.half_width() * factor)
    }
}

/// Marginal density m(Δω) = ∫ p(Δω|Ω) p(Ω) dΩ with its error bound.
///
/// The Ω integral is rewritten over the input frequency ω = Δω/(kΩ), which
/// turns the 1/|Ω| factor into a bounded 1/|ω| weight:
/// m(Δω) = (1/(2 Ω_max k)) ∫_{|ω| ≥ |Δω|/(k Ω_max)} P_in(ω)/|ω| dω.
pub fn marginal(
    channel: &SagnacChannel,
    prior: &RotationPrior,
    delta_omega: f64,
    tail_widths: f64,
    tol: Tolerance,
) -> Result<(f64, f64)> {
    if !delta_omega.is_finite() {
        return Err(domain("measured shift must be finite"));
    }
    let a = prior.half_width();
    let k = channel.coefficient();
    let lo = delta_omega.abs() / (k * a);
    let (v, e) = channel.spectrum().inverse_frequency_tail(lo, tail_widths, tol)?;
    let c = 0.5 / (a * k);
    Ok((c * v, c * e))
}

/// Posterior σ_Ω = (σ_ω/ω̄)|Ω|.
pub fn posterior_width(omega_bar: f64, sigma_omega: f64, rotation: f64) -> Result<f64> {
    if !(omega_bar.is_finite() && omega_bar > 0.0) {
        return Err(domain(format!("omega_bar must be positive, got {omega_bar}")));
    }
    if !(sigma_omega.is_finite() && sigma_omega > 0.0) {
        return Err(domain(format!("sigma_omega must be positive, got {sigma_omega}")));
    }
    Ok(sigma_omega / omega_bar * rotation.abs())
}

/// p(Ω | Δω) for a given observation.
#[derive(Debug, Clone)]
pub enum PosteriorDensity<'a> {
    PointMass { location: f64 },
    Curve(PosteriorCurve<'a>),
}

impl PosteriorDensity<'_> {
    pub fn density(&self, rotation: f64) -> f64 {
        match self {
            PosteriorDensity::PointMass { .. } => 0.0,
            PosteriorDensity::Curve(c) => c.density(rotation),
        }
    }
}

/// Continuous posterior, normalised over the prior's support.
#[derive(Debug, Clone)]
pub struct PosteriorCurve<'a> {
    channel: &'a SagnacChannel,
    prior: RotationPrior,
    delta_omega: f64,
    ln_evidence: f64,
    evidence_check: f64,
    breakpoints: Vec<f64>,
}

/// Bayes inversion of one measured shift.
///
/// The evidence is integrated over Ω in log-shifted form, split at 0, at the
/// peak and around the ridge; it is then cross-checked against [`marginal`].
pub fn posterior<'a>(
    channel: &'a SagnacChannel,
    prior: &RotationPrior,
    delta_omega: f64,
) -> Result<PosteriorDensity<'a>> {
    if !delta_omega.is_finite() {
        return Err(domain("measured shift must be finite"));
    }
    let a = prior.half_width();
    if channel.spectrum().is_point_mass() {
        let location = channel.invert(delta_omega);
        if !prior.contains(location) {
            return Err(Error::Inconsistent(format!(
                "shift {delta_omega:e} implies rotation {location:e} rad/s outside the prior support ±{a:e}"
            )));
        }
        return Ok(PosteriorDensity::PointMass { location });
    }
    if delta_omega == 0.0 {
        return Err(Error::Inconsistent(
            "a zero shift leaves a 1/|Ω| posterior that cannot be normalised near Ω = 0".into(),
        ));
    }

    let tails = 12.0;
    let (m, _) = marginal(channel, prior, delta_omega, tails, POSTERIOR_TOL)?;
    if m <= 0.0 {
        return Err(Error::Inconsistent(format!(
            "shift {delta_omega:e} has zero probability under this prior and channel"
        )));
    }

    let k = channel.coefficient();
    let mut pts = vec![-a, 0.0, a];
    for w in channel.spectrum().feature_points(tails) {
        pts.push(delta_omega / (k * w));
    }
    let peak = channel.invert(delta_omega);
    pts.push(peak);
    // the 1/|Ω| tail decays slowly on both sides of the ridge
    let mut g = 2.0 * peak;
    while g.abs() < a && pts.len() < 400 {
        pts.push(g);
        g *= 2.0;
    }
    let mut g = 0.5 * peak;
    for _ in 0..60 {
        pts.push(g);
        g *= 0.5;
    }
    pts.retain(|p| p.abs() <= a);
    pts.sort_by(f64::total_cmp);
    pts.dedup();

    let ln_joint = |rot: f64| match channel.ln_conditional_density(delta_omega, rot) {
        Some(ln) => ln + prior.ln_density(rot),
        None => f64::NEG_INFINITY,
    };
    let shift = pts
        .iter()
        .map(|p| ln_joint(*p))
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    let shift = if shift.is_finite() { shift } else { m.ln() };

    let integral = integrate(
        |rot| {
            let v = (ln_joint(rot) - shift).exp();
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        &pts,
        POSTERIOR_TOL,
    )?;
    if integral.value <= 0.0 {
        return Err(Error::Inconsistent(format!(
            "shift {delta_omega:e} has zero probability under this prior and channel"
        )));
    }
    let ln_evidence = shift + integral.value.ln();
    let evidence_check = (ln_evidence - m.ln()).exp();
    if (evidence_check - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::Convergence {
            value: evidence_check,
            abs_error: (evidence_check - 1.0).abs(),
            subdivisions: integral.subdivisions,
        });
    }
    Ok(PosteriorDensity::Curve(PosteriorCurve {
        channel,
        prior: *prior,
        delta_omega,
        ln_evidence,
        evidence_check,
        breakpoints: pts,
    }))
}

impl PosteriorCurve<'_> {
    pub fn delta_omega(&self) -> f64 {
        self.delta_omega
    }

    /// ln of p(Δω|Ω) p(Ω), before normalisation.
    pub fn ln_joint(&self, rotation: f64) -> f64 {
        match self.channel.ln_conditional_density(self.delta_omega, rotation) {
            Some(ln) => ln + self.prior.ln_density(rotation),
            None => f64::NEG_INFINITY,
        }
    }

    pub fn ln_density(&self, rotation: f64) -> f64 {
        self.ln_joint(rotation) - self.ln_evidence
    }

    pub fn density(&self, rotation: f64) -> f64 {
        self.ln_density(rotation).exp()
    }

    /// The evidence m(Δω) the curve was normalised by.
    pub fn evidence(&self) -> f64 {
        self.ln_evidence.exp()
    }

    /// Ratio of the Ω-route evidence to the ω-route marginal.
    pub fn evidence_check(&self) -> f64 {
        self.evidence_check
    }

    /// Peak location predicted by inverting the ridge, LcΔω/(4Aω̄).
    pub fn predicted_peak(&self) -> f64 {
        self.channel.invert(self.delta_omega)
    }

    /// Integral of the normalised density over the prior support.
    pub fn total_mass(&self) -> Result<f64> {
        Ok(integrate(|r| self.density(r), &self.breakpoints, POSTERIOR_TOL)?.value)
    }

    /// Numerically located maximum of the posterior.
    pub fn mode(&self) -> f64 {
        let a = self.prior.half_width();
        let guess = self.predicted_peak().clamp(-a, a);
        let sp = self.channel.spectrum();
        let span = 10.0 * (sp.sigma_omega() / sp.omega_bar()) * guess.abs();
        let (mut lo, mut hi) = ((guess - span).max(-a), (guess + span).min(a));
        if !(hi > lo) {
            return guess;
        }

        // coarse scan, then golden-section refinement
        let n = 200;
        let step = (hi - lo) / n as f64;
        let best = (0..=n)
            .map(|i| lo + i as f64 * step)
            .max_by(|x, y| self.ln_joint(*x).total_cmp(&self.ln_joint(*y)))
            .unwrap_or(guess);
        lo = (best - step).max(lo);
        hi = (best + step).min(hi);

        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = hi - inv_phi * (hi - lo);
        let mut d = lo + inv_phi * (hi - lo);
        let (mut fc, mut fd) = (self.ln_joint(c), self.ln_joint(d));
        for _ in 0..200 {
            if hi - lo <= 1e-14 * best.abs().max(f64::MIN_POSITIVE) {
                break;
            }
            if fc > fd {
                hi = d;
                d = c;
                fd = fc;
                c = hi - inv_phi * (hi - lo);
                fc = self.ln_joint(c);
            } else {
                lo = c;
                c = d;
                fc = fd;
                d = lo + inv_phi * (hi - lo);
                fd = self.ln_joint(d);
            }
        }
        0.5 * (lo + hi)
    }

    /// Laplace width (−d²/dΩ² ln p)^(−1/2) at `at`, by central differences.
    pub fn curvature_width(&self, at: f64) -> Option<f64> {
        let sp = self.channel.spectrum();
        let scale = (sp.sigma_omega() / sp.omega_bar()) * at.abs();
        if !(scale > 0.0) {
            return None;
        }
        let h = 0.05 * scale;
        let f0 = self.ln_joint(at);
        let second = (self.ln_joint(at + h) - 2.0 * f0 + self.ln_joint(at - h)) / (h * h);
        (second < 0.0).then(|| (-second).sqrt().recip())
    }
}

/// One row of [`tail_diagnostic`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailRow {
    pub rotation: f64,
    pub density: f64,
    /// (ω̄/(√(2π)σ_ω)) (1/|Ω|) exp(−(ω̄/σ_ω)²/2)
    pub limit: f64,
    /// density / limit, from log values. `None` when the limit vanishes identically.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailReport {
    /// (ω̄/σ_ω) exp(−(ω̄/σ_ω)²/2)
    pub smallness_factor: f64,
    pub ln_smallness_factor: f64,
    pub rows: Vec<TailRow>,
}

/// Compares the posterior far from its peak with its large-|Ω| limiting form.
pub fn tail_diagnostic(
    channel: &SagnacChannel,
    prior: &RotationPrior,
    delta_omega: f64,
    grid: &[f64],
) -> Result<TailReport> {
    let post = posterior(channel, prior, delta_omega)?;
    let sp = channel.spectrum();
    let rows = match &post {
        PosteriorDensity::PointMass { location } => {
            let rows = grid
                .iter()
                .map(|&rotation| TailRow {
                    rotation,
                    density: if rotation == *location { f64::INFINITY } else { 0.0 },
                    limit: 0.0,
                    ratio: None,
                })
                .collect();
            return Ok(TailReport {
                smallness_factor: 0.0,
                ln_smallness_factor: f64::NEG_INFINITY,
                rows,
            });
        }
        PosteriorDensity::Curve(curve) => {
            let r = sp.omega_bar() / sp.sigma_omega();
            let ln_pref = r.ln() - 0.5 * (2.0 * PI).ln();
            grid.iter()
                .map(|&rotation| {
                    let ln_density = curve.ln_density(rotation);
                    let ln_limit = ln_pref - rotation.abs().ln() - 0.5 * r * r;
                    TailRow {
                        rotation,
                        density: ln_density.exp(),
                        limit: ln_limit.exp(),
                        ratio: Some((ln_density - ln_limit).exp()),
                    }
                })
                .collect()
        }
    };
    let ln_small = ln_tail_smallness(sp.omega_bar(), sp.sigma_omega())?;
    Ok(TailReport {
        smallness_factor: ln_small.exp(),
        ln_smallness_factor: ln_small,
        rows,
    })
}

/// ln of the factor (ω̄/σ_ω) exp(−(ω̄/σ_ω)²/2) that suppresses the posterior's
/// non-normalisable large-|Ω| tail.
pub fn ln_tail_smallness(omega_bar: f64, sigma_omega: f64) -> Result<f64> {
    if !(omega_bar > 0.0 && sigma_omega > 0.0 && omega_bar.is_finite() && sigma_omega.is_finite()) {
        return Err(domain("omega_bar and sigma_omega must be positive"));
    }
    let r = omega_bar / sigma_omega;
    Ok(r.ln() - 0.5 * r * r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sagnac::GyroGeometry;
    use crate::spectrum::InputSpectrum;

    fn channel(ratio: f64) -> SagnacChannel {
        let wb = 2.976e15;
        SagnacChannel::new(
            GyroGeometry::planar(1.0, 4.0, 1).unwrap(),
            InputSpectrum::gaussian(wb, wb / ratio).unwrap(),
        )
    }

    #[test]
    fn prior_basics() {
        let p = RotationPrior::uniform_cutoff(2.0).unwrap();
        assert_eq!(p.density(1.9), 0.25);
        assert_eq!(p.density(-2.1), 0.0);
        assert!(RotationPrior::uniform_cutoff(0.0).is_err());
        assert_eq!(RotationPrior::FlatCircular.density(3.0), 1.0 / (2.0 * PI));
        assert_eq!(RotationPrior::FlatCircular.density(3.2), 0.0);
        // E ln|Ω| on [0, a] is ln a − 1
        let direct = integrate(|x: f64| x.log2() * 0.5, &[0.0, 2.0], Tolerance::default()).unwrap();
        assert!((direct.value - p.mean_log2_abs()).abs() < 1e-9);
    }

    #[test]
    fn width_relation() {
        assert!((posterior_width(1.0, 1e-3, 10.0).unwrap() - 1e-2).abs() < 1e-18);
        assert_eq!(posterior_width(1.0, 1e-3, 0.0).unwrap(), 0.0);
        assert_eq!(
            posterior_width(1.0, 1e-3, -10.0).unwrap(),
            posterior_width(1.0, 1e-3, 10.0).unwrap()
        );
        assert_eq!(
            posterior_width(2.0, 1e-3, 10.0).unwrap(),
            0.5 * posterior_width(1.0, 1e-3, 10.0).unwrap()
        );
        assert!(posterior_width(0.0, 1.0, 1.0).is_err());
        assert!(posterior_width(1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn monochromatic_inverts_exactly() {
        let ch = SagnacChannel::new(
            GyroGeometry::planar(1.0, 4.0, 1).unwrap(),
            InputSpectrum::monochromatic(2.976e15).unwrap(),
        );
        let prior = RotationPrior::uniform_cutoff(1.0).unwrap();
        let dw = ch.shift(2.976e15, 0.25);
        match posterior(&ch, &prior, dw).unwrap() {
            PosteriorDensity::PointMass { location } => assert!((location - 0.25).abs() < 1e-15),
            _ => panic!(),
        }
        let outside = ch.shift(2.976e15, 1.5);
        assert!(matches!(posterior(&ch, &prior, outside), Err(Error::Inconsistent(_))));
    }

    #[test]
    fn zero_shift_is_rejected() {
        let ch = channel(1e3);
        let prior = RotationPrior::uniform_cutoff(1.0).unwrap();
        assert!(matches!(posterior(&ch, &prior, 0.0), Err(Error::Inconsistent(_))));
    }

    #[test]
    fn shift_beyond_reach_is_inconsistent() {
        let ch = channel(1e3);
        let prior = RotationPrior::uniform_cutoff(1.0).unwrap();
        let dw = ch.ridge(2.0);
        assert!(matches!(posterior(&ch, &prior, dw), Err(Error::Inconsistent(_))));
    }

    #[test]
    fn posterior_is_normalised() {
        let ch = channel(1e3);
        let prior = RotationPrior::uniform_cutoff(1.0).unwrap();
        for target in [-0.9, -0.01, 1e-4, 0.3, 0.999] {
            let PosteriorDensity::Curve(c) = posterior(&ch, &prior, ch.ridge(target)).unwrap() else {
                panic!()
            };
            assert!((c.total_mass().unwrap() - 1.0).abs() < 1e-6);
            assert!((c.evidence_check() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn mode_and_width_near_prediction() {
        let ch = channel(1e4);
        let prior = RotationPrior::uniform_cutoff(1.0).unwrap();
        let PosteriorDensity::Curve(c) = posterior(&ch, &prior, ch.ridge(0.4)).unwrap() else {
            panic!()
        };
        let peak = c.predicted_peak();
        let sigma = posterior_width(1.0, 1e-4, peak).unwrap();
        assert!((c.mode() - peak).abs() < 0.1 * sigma);
        let w = c.curvature_width(c.mode()).unwrap();
        assert!(((w - sigma) / sigma).abs() < 3e-4);
    }

    #[test]
    fn tail_limit_and_smallness() {
        let ch = channel(10.5);
        let prior = RotationPrior::uniform_cutoff(1.0).unwrap();
        let r: f64 = 10.5;
        let peak = 1e-7;
        // the 1/Ω correction to the exponent is ~ r² Ω̄/Ω, so go far out
        let grid: Vec<f64> = [1e3, 1e4].iter().map(|m| m * r * r * peak).collect();
        let rep = tail_diagnostic(&ch, &prior, ch.ridge(peak), &grid).unwrap();
        for row in &rep.rows {
            assert!((row.ratio.unwrap() - 1.0).abs() < 0.01, "{row:?}");
        }
        assert!((rep.smallness_factor - r * (-0.5 * r * r).exp()).abs() < 1e-30);
    }

    #[test]
    fn smallness_factor_at_ten() {
        // 10·e^(−50), evaluated at 40 digits
        let v = ln_tail_smallness(1e15, 1e14).unwrap().exp();
        assert!((v - 1.928_749_847_963_917_8e-21).abs() / 1.93e-21 < 1e-12, "{v}");
        assert!(ln_tail_smallness(0.0, 1.0).is_err());
    }

    #[test]
    fn monochromatic_tail_is_zero() {
        let ch = SagnacChannel::new(
            GyroGeometry::planar(1.0, 4.0, 1).unwrap(),
            InputSpectrum::monochromatic(1e15).unwrap(),
        );
        let prior = RotationPrior::uniform_cutoff(1.0).unwrap();
        let rep = tail_diagnostic(&ch, &prior, ch.shift(1e15, 0.001), &[0.1, 0.5, -0.7]).unwrap();
        assert!(rep
            .rows
            .iter()
            .all(|r| r.density == 0.0 && r.limit == 0.0 && r.ratio.is_none()));
    }
}
