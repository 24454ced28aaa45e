use std::f64::consts::PI;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sagnac_fidelity::bayes::{marginal, posterior, PosteriorDensity, RotationPrior};
use sagnac_fidelity::channel::{MeasurementChannel, SagnacChannel};
use sagnac_fidelity::fidelity::{mutual_information_quadrature, QuadratureSettings};
use sagnac_fidelity::quadrature::Tolerance;
use sagnac_fidelity::sagnac::{
    frequency_shift, fringe_shift, phase_shift, wavelength, GyroGeometry, RotationRate, SPEED_OF_LIGHT,
};
use sagnac_fidelity::spectrum::InputSpectrum;

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

prop_compose! {
    fn geometry()(perimeter in 0.1f64..100.0, fill in 0.01f64..1.0, turns in 1u32..1000) -> GyroGeometry {
        let area = fill * perimeter * perimeter / (4.0 * PI);
        GyroGeometry::planar(area, perimeter, turns).unwrap()
    }
}

fn rate() -> impl Strategy<Value = f64> {
    prop_oneof![-1e3f64..-1e-9, 1e-9f64..1e3]
}

fn light() -> impl Strategy<Value = f64> {
    1e12f64..1e17
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn shifts_are_linear_and_odd(g in geometry(), w in light(), rot in rate(), a in 0.1f64..10.0) {
        let f = frequency_shift(&g, w, rot).unwrap();
        prop_assert!(rel(frequency_shift(&g, w, a * rot).unwrap(), a * f) < 1e-12);
        prop_assert_eq!(frequency_shift(&g, w, -rot).unwrap(), -f);
        let p = phase_shift(&g, w, rot).unwrap();
        prop_assert!(rel(phase_shift(&g, w, a * rot).unwrap(), a * p) < 1e-12);
        prop_assert_eq!(phase_shift(&g, w, -rot).unwrap(), -p);
    }

    #[test]
    fn frequency_and_phase_agree(g in geometry(), w in light(), rot in rate()) {
        let dw = frequency_shift(&g, w, rot).unwrap();
        let dphi = phase_shift(&g, w, rot).unwrap();
        let lhs = dw * g.perimeter() * f64::from(g.turns());
        prop_assert!(rel(lhs, dphi * SPEED_OF_LIGHT) < 1e-12);
    }

    #[test]
    fn fringes_are_phase_over_two_pi(perimeter in 0.1f64..100.0, fill in 0.01f64..1.0, w in light(), rot in rate()) {
        let g = GyroGeometry::planar(fill * perimeter * perimeter / (4.0 * PI), perimeter, 1).unwrap();
        let dn = fringe_shift(&g, &RotationRate::about_normal(&g, rot).unwrap(), wavelength(w).unwrap()).unwrap();
        prop_assert!(rel(dn, phase_shift(&g, w, rot).unwrap() / (2.0 * PI)) < 1e-12);
    }

    #[test]
    fn channel_is_symmetric(g in geometry(), ratio in 11f64..1e6, rot in rate(), z in -6f64..6.0) {
        let ch = SagnacChannel::new(g, InputSpectrum::gaussian(1e15, 1e15 / ratio).unwrap());
        let dw = ch.ridge(rot) + z * ch.ridge_width(rot);
        let p = ch.conditional_density(dw, rot).value().unwrap();
        let q = ch.conditional_density(-dw, -rot).value().unwrap();
        prop_assert!(p >= 0.0);
        prop_assert!(rel(q, p) < 1e-12);
    }

    #[test]
    fn channel_is_scale_covariant(ratio in 11f64..1e6, rot in rate(), z in -6f64..6.0, s in prop_oneof![-50f64..-0.02, 0.02f64..50.0]) {
        let g = GyroGeometry::planar(1.0, 4.0, 1).unwrap();
        let ch = SagnacChannel::new(g, InputSpectrum::gaussian(2e15, 2e15 / ratio).unwrap());
        let dw = ch.ridge(rot) + z * ch.ridge_width(rot);
        let p = ch.conditional_density(dw, rot).value().unwrap();
        let scaled = ch.conditional_density(s * dw, s * rot).value().unwrap();
        // Δω − kω̄Ω cancels to ~1/ratio relative, costing digits at large ratios
        prop_assert!(rel(scaled * s.abs(), p) < 1e-8);
    }
}

fn square() -> GyroGeometry {
    GyroGeometry::planar(1.0, 4.0, 1).unwrap()
}

#[test]
fn posterior_satisfies_bayes_rule() {
    let prior = RotationPrior::uniform_cutoff(1.0).unwrap();
    for ratio in [30.0, 1e3, 1e5] {
        let ch = SagnacChannel::new(square(), InputSpectrum::gaussian(2.976e15, 2.976e15 / ratio).unwrap());
        let dw = ch.ridge(0.37);
        let PosteriorDensity::Curve(c) = posterior(&ch, &prior, dw).unwrap() else {
            panic!()
        };
        let tol = Tolerance {
            rel: 1e-13,
            abs: 0.0,
            max_subdivisions: 4000,
        };
        let (m, _) = marginal(&ch, &prior, dw, 12.0, tol).unwrap();
        for z in [-4.0, -1.0, 0.0, 0.5, 3.0] {
            let rot = 0.37 * (1.0 + z / ratio);
            let joint = ch.conditional_density(dw, rot).value().unwrap() * prior.density(rot);
            let lhs = c.density(rot) * m;
            assert!(rel(lhs, joint) < 1e-10, "ratio {ratio}, z {z}: {lhs} vs {joint}");
        }
    }
}

#[test]
fn posterior_has_the_inverse_rotation_shape() {
    // p(Ω|Δω) ∝ (1/|Ω|) exp(−(Δω/(kΩ) − ω̄)²/(2σ²)) inside the prior support
    let (wb, ratio) = (2.976e15, 500.0);
    let sd = wb / ratio;
    let ch = SagnacChannel::new(square(), InputSpectrum::gaussian(wb, sd).unwrap());
    let prior = RotationPrior::uniform_cutoff(2.0).unwrap();
    let dw = ch.ridge(0.8);
    let PosteriorDensity::Curve(c) = posterior(&ch, &prior, dw).unwrap() else {
        panic!()
    };
    let k = ch.coefficient();
    let ratios: Vec<f64> = (-30..=30)
        .map(|i| 0.8 * (1.0 + f64::from(i) / (5.0 * ratio)))
        .map(|rot| {
            let u = (dw / (k * rot) - wb) / sd;
            let shape = -rot.abs().ln() - 0.5 * u * u;
            (c.ln_density(rot) - shape).exp()
        })
        .collect();
    for r in &ratios {
        assert!(rel(*r, ratios[0]) < 1e-10);
    }
}

#[test]
fn fidelity_falls_as_the_line_broadens() {
    let prior = RotationPrior::uniform_cutoff(1.0).unwrap();
    let settings = QuadratureSettings::default();
    let mut last = f64::INFINITY;
    for ratio in [1e5, 1e4, 3e3, 1e3, 1e2, 20.0] {
        let ch = SagnacChannel::new(square(), InputSpectrum::gaussian(1e15, 1e15 / ratio).unwrap());
        let h = mutual_information_quadrature(&ch, &prior, &settings)
            .unwrap()
            .bits()
            .unwrap();
        assert!(h >= 0.0);
        assert!(h < last, "{h} !< {last} at {ratio}");
        last = h;
    }
}

#[test]
fn measurement_sample_moments() {
    let (wb, ratio) = (2.976e15, 1e3);
    let ch = SagnacChannel::new(square(), InputSpectrum::gaussian(wb, wb / ratio).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for rot in [0.25, -3.0] {
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| ch.sample_measurement(rot, &mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        let (mu, s) = (ch.ridge(rot), ch.ridge_width(rot));
        assert!((mean - mu).abs() < 5.0 * s / (n as f64).sqrt());
        assert!(rel(sd, s) < 0.01);
    }
}
