//! Globally adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.

use alloc::vec::Vec;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7 = centre).
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerances and budget for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadSettings {
    fn default() -> Self {
        QuadSettings {
            rel_tol: 1e-10,
            abs_tol: 0.0,
            max_intervals: 2000,
        }
    }
}

/// Integral estimate with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

#[derive(Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    Segment {
        a,
        b,
        value: k * h,
        error: ((k - g) * h).abs(),
    }
}

/// Integrates `f` over `[breaks[0], breaks[last]]`, starting from one segment
/// per consecutive pair of break points so that kinks never fall inside a rule.
pub fn integrate<F: Fn(f64) -> f64>(f: F, breaks: &[f64], settings: QuadSettings) -> Result<Quadrature> {
    if breaks.len() < 2 || breaks.iter().any(|x| !x.is_finite()) || breaks.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("breaks", "need >= 2 finite nondecreasing points"));
    }
    let mut segments: Vec<Segment> = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| kronrod(&f, w[0], w[1]))
        .collect();
    loop {
        let value: f64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        if !value.is_finite() {
            return Err(Error::Quadrature {
                estimate: value,
                error,
                intervals: segments.len(),
            });
        }
        if error <= settings.abs_tol.max(settings.rel_tol * value.abs()) {
            return Ok(Quadrature {
                value,
                error,
                intervals: segments.len(),
            });
        }
        if segments.len() >= settings.max_intervals {
            return Err(Error::Quadrature {
                estimate: value,
                error,
                intervals: segments.len(),
            });
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("at least one segment");
        let s = segments.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        if mid <= s.a || mid >= s.b {
            // Interval cannot be split further in floating point.
            return Err(Error::Quadrature {
                estimate: value,
                error,
                intervals: segments.len() + 1,
            });
        }
        segments.push(kronrod(&f, s.a, mid));
        segments.push(kronrod(&f, mid, s.b));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math;
    use core::f64::consts::PI;

    /// Composite Simpson on a fine uniform grid, independent of the rule above.
    fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
        let n = n + n % 2;
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn polynomials_are_exact() {
        let q = integrate(|x| x * x * x * x * x - 3.0 * x * x + 1.0, &[-1.0, 2.0], QuadSettings::default()).unwrap();
        let want = (64.0 - 1.0) / 6.0 - (8.0 + 1.0) + 3.0;
        assert!((q.value - want).abs() < 1e-13);
        assert_eq!(q.intervals, 1);
    }

    #[test]
    fn smooth_integrands_match_simpson() {
        let cases: [(fn(f64) -> f64, f64, f64); 3] = [
            (|x| math::exp(-x * x), -3.0, 3.0),
            (|x| math::sin(x) * math::sin(x), 0.0, PI),
            (|x| 1.0 / (1.0 + 25.0 * x * x), -1.0, 1.0),
        ];
        for (f, a, b) in cases {
            let q = integrate(f, &[a, b], QuadSettings::default()).unwrap();
            let s = simpson(f, a, b, 200_000);
            assert!((q.value - s).abs() < 1e-10 * s.abs(), "{} vs {}", q.value, s);
        }
    }

    #[test]
    fn breakpoints_handle_a_step() {
        let f = |x: f64| if x.abs() < 0.25 { 3.0 } else { 1.0 };
        let q = integrate(f, &[-1.0, -0.25, 0.25, 1.0], QuadSettings::default()).unwrap();
        assert!((q.value - (1.5 + 1.5)).abs() < 1e-13);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let settings = QuadSettings {
            max_intervals: 3,
            ..QuadSettings::default()
        };
        let err = integrate(|x| 1.0 / math::sqrt(x.abs() + 1e-14), &[-1.0, 1.0], settings).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }
}
