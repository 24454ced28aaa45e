//! Globally adaptive Gauss–Kronrod (10/21 point) integration on finite intervals.
//!
//! The interval with the largest error estimate is bisected until the summed
//! error drops below `max(abs_tol, rel_tol * |integral|)`. Evaluation order is
//! fully deterministic, so identical inputs give bit-identical results.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// QUADPACK constants, kept at their published precision.
// Kronrod abscissae on [0, 1], descending; odd indices are the Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Stopping criteria for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_subdivisions: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rel: 1e-10,
            abs: 0.0,
            max_subdivisions: 2_000,
        }
    }
}

/// Value and error estimate of a converged integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
    pub subdivisions: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    let mut abs_sum = kronrod.abs();
    let mut fv = [0.0; 21];
    fv[10] = fc;
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv[j] = f1;
        fv[20 - j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        asc += WGK[j] * ((fv[j] - mean).abs() + (fv[20 - j] - mean).abs());
    }

    let value = kronrod * half;
    let res_abs = abs_sum * half.abs();
    let res_asc = asc * half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err)
}

/// Integrates `f` over `[points[0], points[last]]`, using every entry of
/// `points` as an initial breakpoint.
///
/// `points` must be finite and non-decreasing; empty pieces are skipped.
pub fn integrate<F>(mut f: F, points: &[f64], tol: Tolerance) -> Result<Integral>
where
    F: FnMut(f64) -> f64,
{
    if points.len() < 2 {
        return Err(crate::error::domain("integration needs at least two points"));
    }
    if points.iter().any(|p| !p.is_finite()) || points.windows(2).any(|w| w[1] < w[0]) {
        return Err(crate::error::domain(
            "integration breakpoints must be finite and non-decreasing",
        ));
    }

    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in points.windows(2) {
        if w[1] > w[0] {
            let (value, error) = gk21(&mut f, w[0], w[1]);
            evaluations += 21;
            heap.push(Segment {
                a: w[0],
                b: w[1],
                value,
                error,
            });
        }
    }
    let initial = heap.len();
    if initial == 0 {
        return Ok(Integral {
            value: 0.0,
            abs_error: 0.0,
            subdivisions: 0,
            evaluations: 0,
        });
    }

    let totals = |heap: &BinaryHeap<Segment>| {
        let mut segs: Vec<&Segment> = heap.iter().collect();
        segs.sort_by(|x, y| x.a.total_cmp(&y.a));
        segs.iter().fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error))
    };

    let (mut value, mut error) = totals(&heap);
    let mut subdivisions = initial;
    loop {
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::Convergence {
                value,
                abs_error: error,
                subdivisions,
            });
        }
        if error <= tol.abs.max(tol.rel * value.abs()) {
            break;
        }
        if subdivisions >= tol.max_subdivisions {
            return Err(Error::Convergence {
                value,
                abs_error: error,
                subdivisions,
            });
        }
        let worst = heap.pop().expect("heap is never empty here");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval cannot be split further in floating point
            return Err(Error::Convergence {
                value,
                abs_error: error,
                subdivisions,
            });
        }
        let (v1, e1) = gk21(&mut f, worst.a, mid);
        let (v2, e2) = gk21(&mut f, mid, worst.b);
        evaluations += 42;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
        subdivisions += 1;
        value += v1 + v2 - worst.value;
        error += e1 + e2 - worst.error;
        if subdivisions % 64 == 0 {
            (value, error) = totals(&heap);
        }
    }
    let (value, abs_error) = totals(&heap);
    Ok(Integral {
        value,
        abs_error,
        subdivisions,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| x.powi(7) - 3.0 * x * x, &[0.0, 2.0], Tolerance::default()).unwrap();
        assert!((r.value - (32.0 - 8.0)).abs() < 1e-13);
        assert_eq!(r.subdivisions, 1);
    }

    #[test]
    fn gaussian_mass() {
        let pdf = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let r = integrate(pdf, &[-10.0, 0.0, 10.0], Tolerance::default()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn log_singularity_converges() {
        // ∫_0^1 ln x dx = -1
        let tol = Tolerance {
            rel: 1e-10,
            abs: 0.0,
            max_subdivisions: 500,
        };
        let r = integrate(f64::ln, &[0.0, 1.0], tol).unwrap();
        assert!((r.value + 1.0).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn exhausting_subdivisions_reports_partial() {
        let tol = Tolerance {
            rel: 1e-14,
            abs: 0.0,
            max_subdivisions: 3,
        };
        let err = integrate(|x: f64| (1.0 / x).sin(), &[1e-3, 1.0], tol).unwrap_err();
        match err {
            Error::Convergence {
                value, subdivisions, ..
            } => {
                assert!(value.is_finite());
                assert_eq!(subdivisions, 3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_breakpoints() {
        assert!(integrate(|x| x, &[1.0], Tolerance::default()).is_err());
        assert!(integrate(|x| x, &[1.0, 0.0], Tolerance::default()).is_err());
        assert!(integrate(|x| x, &[0.0, f64::NAN], Tolerance::default()).is_err());
    }

    #[test]
    fn degenerate_interval_is_zero() {
        let r = integrate(|x| x, &[2.0, 2.0], Tolerance::default()).unwrap();
        assert_eq!(r.value, 0.0);
    }
}
