//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Every caller with a non-smooth integrand passes the kink abscissas as
//! breakpoints; panels never straddle a breakpoint, so the rule keeps its
//! order. Infinite limits are truncated at `tail_halfwidth` standard
//! deviations, which suits the Gaussian-weighted integrands used here.

use crate::error::{Error, Result};
use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Standard deviations beyond which a Gaussian weight is treated as zero.
    pub tail_halfwidth: f64,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_subdivisions: 2000,
            tail_halfwidth: 8.5,
        }
    }
}

impl QuadratureSettings {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize, tail_halfwidth: f64) -> Result<Self> {
        let s = Self {
            abs_tol,
            rel_tol,
            max_subdivisions,
            tail_halfwidth,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) {
            return Err(invalid("abs_tol", self.abs_tol, "must be positive"));
        }
        if !(self.rel_tol > 0.0) {
            return Err(invalid("rel_tol", self.rel_tol, "must be positive"));
        }
        if self.max_subdivisions == 0 {
            return Err(invalid("max_subdivisions", 0.0, "must be positive"));
        }
        if !(self.tail_halfwidth >= 8.0) {
            return Err(invalid("tail_halfwidth", self.tail_halfwidth, "must be at least 8"));
        }
        Ok(())
    }
}

fn invalid(name: &'static str, value: f64, reason: &'static str) -> Error {
    Error::InvalidParameter {
        name,
        value,
        reason,
    }
}

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
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);
    let mut kronrod = f_center * WGK[7];
    let mut gauss = f_center * WG[3];
    let mut abs_sum = kronrod.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = kronrod * half;
    let abs_half = half.abs();
    let res_abs = abs_sum * abs_half;
    let res_asc = asc * abs_half;
    let mut err = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        let scale = libm::pow(200.0 * err / res_asc, 1.5);
        err = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Panel { a, b, value, error: err }
}

/// ∫ f over [lo, hi]; infinite limits are cut at ±`tail_halfwidth`.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, lo: f64, hi: f64, settings: &QuadratureSettings) -> Result<f64> {
    integrate_with_breaks(f, lo, hi, &[], settings)
}

/// ∫ f over [lo, hi] with the domain pre-split at `breaks` (points outside
/// the open interval are ignored).
pub fn integrate_with_breaks<F: FnMut(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    breaks: &[f64],
    settings: &QuadratureSettings,
) -> Result<f64> {
    let w = settings.tail_halfwidth;
    let lo = if lo == f64::NEG_INFINITY { -w } else { lo };
    let hi = if hi == f64::INFINITY { w } else { hi };
    adaptive(f, lo, hi, breaks, settings)
}

/// ∫ g(z) φ(z − mean) dz over [lo, hi]. Infinite limits become
/// `mean ± tail_halfwidth`; finite limits beyond that window are clipped too.
pub fn integrate_normal_weighted<G: FnMut(f64) -> f64>(
    mut g: G,
    mean: f64,
    lo: f64,
    hi: f64,
    breaks: &[f64],
    settings: &QuadratureSettings,
) -> Result<f64> {
    let w = settings.tail_halfwidth;
    let lo = lo.max(mean - w);
    let hi = hi.min(mean + w);
    if !(lo < hi) {
        return Ok(0.0);
    }
    adaptive(
        |z| {
            let d = super::normal::norm_pdf(z - mean);
            if d == 0.0 {
                0.0
            } else {
                g(z) * d
            }
        },
        lo,
        hi,
        breaks,
        settings,
    )
}

fn adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    breaks: &[f64],
    settings: &QuadratureSettings,
) -> Result<f64> {
    if lo.is_nan() || hi.is_nan() {
        return Err(Error::Domain {
            what: "integrate bounds",
            value: f64::NAN,
        });
    }
    if lo == hi {
        return Ok(0.0);
    }
    if lo > hi {
        return adaptive(f, hi, lo, breaks, settings).map(|v| -v);
    }

    let mut cuts: Vec<f64> = Vec::with_capacity(breaks.len() + 2);
    cuts.push(lo);
    cuts.extend(breaks.iter().copied().filter(|&x| x > lo && x < hi));
    cuts.push(hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut heap = BinaryHeap::with_capacity(settings.max_subdivisions.min(4096));
    for pair in cuts.windows(2) {
        heap.push(gk15(&mut f, pair[0], pair[1]));
    }
    let mut panels = heap.len();
    loop {
        let (value, error) = heap
            .iter()
            .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
        if error <= settings.abs_tol.max(settings.rel_tol * value.abs()) {
            return Ok(value);
        }
        if panels >= settings.max_subdivisions {
            return Err(Error::Convergence {
                estimate: value,
                error_estimate: error,
            });
        }
        let worst = heap.pop().expect("at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            return Err(Error::Convergence {
                estimate: value,
                error_estimate: error,
            });
        }
        heap.push(gk15(&mut f, worst.a, mid));
        heap.push(gk15(&mut f, mid, worst.b));
        panels += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::normal::norm_pdf;

    fn s() -> QuadratureSettings {
        QuadratureSettings::default()
    }

    #[test]
    fn kronrod_weights_sum_to_two() {
        let k: f64 = 2.0 * WGK[..7].iter().sum::<f64>() + WGK[7];
        let g: f64 = 2.0 * WG[..3].iter().sum::<f64>() + WG[3];
        assert!((k - 2.0).abs() < 1e-14);
        assert!((g - 2.0).abs() < 1e-14);
    }

    #[test]
    fn exact_for_high_degree_polynomials() {
        let mut f = |x: f64| libm::pow(x, 20.0);
        let p = gk15(&mut f, 0.0, 1.0);
        assert!((p.value - 1.0 / 21.0).abs() < 1e-14);
    }

    #[test]
    fn density_normalisation() {
        let v = integrate(norm_pdf, f64::NEG_INFINITY, f64::INFINITY, &s()).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn upper_tail_at_conditional_registration_level() {
        let v = integrate(norm_pdf, 1.0364, f64::INFINITY, &s()).unwrap();
        assert!((v - 0.15).abs() < 5e-5);
    }

    #[test]
    fn first_moment_of_half_normal() {
        let v = integrate(|z| z * norm_pdf(z), 0.0, f64::INFINITY, &s()).unwrap();
        let oracle = 1.0 / libm::sqrt(2.0 * core::f64::consts::PI);
        assert!((v - oracle).abs() < 1e-11);
        assert!((v - 0.3989).abs() < 5e-5);
    }

    #[test]
    fn kinked_integrand_with_break() {
        let f = |x: f64| (x - 0.3).abs();
        let v = integrate_with_breaks(f, 0.0, 1.0, &[0.3], &s()).unwrap();
        assert!((v - (0.045 + 0.245)).abs() < 1e-14);
    }

    #[test]
    fn reversed_bounds_negate() {
        let v = integrate(|x| x * x, 1.0, 0.0, &s()).unwrap();
        assert!((v + 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn budget_exhaustion_reports_estimate() {
        let tight = QuadratureSettings {
            max_subdivisions: 2,
            abs_tol: 1e-300,
            rel_tol: 1e-300,
            ..s()
        };
        match integrate(|x: f64| libm::sqrt(x), 0.0, 1.0, &tight) {
            Err(Error::Convergence { estimate, .. }) => assert!((estimate - 2.0 / 3.0).abs() < 1e-3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn settings_validation() {
        assert!(QuadratureSettings::new(0.0, 1e-8, 10, 8.5).is_err());
        assert!(QuadratureSettings::new(1e-10, 1e-8, 10, 7.0).is_err());
        assert!(QuadratureSettings::new(1e-10, 1e-8, 10, 8.0).is_ok());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn additive_over_subintervals(
                a in -3.0f64..0.0, width1 in 0.1f64..3.0, width2 in 0.1f64..3.0,
                k in 0.1f64..3.0, m in -1.0f64..1.0,
            ) {
                let f = |x: f64| libm::sin(k * x) * libm::exp(-0.5 * (x - m) * (x - m)) + x * x;
                let b = a + width1;
                let c = b + width2;
                let whole = integrate(f, a, c, &s()).unwrap();
                let parts = integrate(f, a, b, &s()).unwrap() + integrate(f, b, c, &s()).unwrap();
                prop_assert!((whole - parts).abs() <= 2.0 * s().abs_tol.max(s().rel_tol * whole.abs()));
            }
        }
    }
}
