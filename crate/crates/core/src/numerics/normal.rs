//! Standard normal distribution: density, distribution function and quantile.
//!
//! `Φ` is evaluated through the complementary error function so that both
//! tails keep full relative precision. The quantile uses Wichura's AS 241
//! (PPND16) rational approximations followed by one Halley step.

use crate::error::{Error, Result};
use core::f64::consts::FRAC_1_SQRT_2;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density φ(x).
#[inline]
pub fn norm_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * libm::exp(-0.5 * x * x)
}

/// Φ(x). Total function: returns 0 or 1 at the infinities and NaN for NaN.
#[inline]
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Upper tail 1 − Φ(x), accurate for large positive x.
#[inline]
pub fn norm_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// Φ⁻¹(p). Returns −∞ at 0, +∞ at 1 and NaN outside [0, 1].
pub fn norm_quantile(p: f64) -> f64 {
    if p.is_nan() || !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    let x = ppnd16(p);
    if !x.is_finite() {
        return x;
    }
    // Halley refinement on whichever tail is represented exactly.
    let (err, dens) = if p < 0.5 {
        (norm_cdf(x) - p, norm_pdf(x))
    } else {
        (-(norm_sf(x) - (1.0 - p)), norm_pdf(x))
    };
    if dens <= 0.0 {
        return x;
    }
    let u = err / dens;
    x - u / (1.0 + 0.5 * x * u)
}

/// Φ⁻¹(1 − a) computed without forming `1 − a`, so small `a` keeps precision.
#[inline]
pub fn norm_quantile_upper(a: f64) -> f64 {
    -norm_quantile(a)
}

/// Φ(x) with input validation.
pub fn std_normal_cdf(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain {
            what: "std_normal_cdf",
            value: x,
        });
    }
    Ok(norm_cdf(x))
}

/// Φ⁻¹(p) for p strictly inside (0, 1).
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain {
            what: "std_normal_quantile",
            value: p,
        });
    }
    Ok(norm_quantile(p))
}

fn ppnd16(p: f64) -> f64 {
    const SPLIT1: f64 = 0.425;
    const SPLIT2: f64 = 5.0;
    const CONST1: f64 = 0.180625;
    const CONST2: f64 = 1.6;

    const A: [f64; 8] = [
        3.387_132_872_796_366_608,
        1.331_416_678_917_843_774_5e2,
        1.971_590_950_306_551_442_7e3,
        1.373_169_376_550_946_112_5e4,
        4.592_195_393_154_987_145_7e4,
        6.726_577_092_700_870_085_3e4,
        3.343_057_558_358_812_810_5e4,
        2.509_080_928_730_122_672_7e3,
    ];
    const B: [f64; 8] = [
        1.0,
        4.231_333_070_160_091_125_2e1,
        6.871_870_074_920_579_083e2,
        5.394_196_021_424_751_107_7e3,
        2.121_379_430_158_659_586_7e4,
        3.930_789_580_009_271_061e4,
        2.872_908_573_572_194_267_4e4,
        5.226_495_278_852_854_561e3,
    ];
    const C: [f64; 8] = [
        1.423_437_110_749_683_577_34,
        4.630_337_846_156_545_295_9,
        5.769_497_221_460_691_405_5,
        3.647_848_324_763_204_605_04,
        1.270_458_252_452_368_382_58,
        2.417_807_251_774_506_117_7e-1,
        2.272_384_498_926_918_458_33e-2,
        7.745_450_142_783_414_076_4e-4,
    ];
    const D: [f64; 8] = [
        1.0,
        2.053_191_626_637_758_821_87,
        1.676_384_830_183_803_849_4,
        6.897_673_349_851_000_045_5e-1,
        1.481_039_764_274_800_745_9e-1,
        1.519_866_656_361_645_719_66e-2,
        5.475_938_084_995_344_946e-4,
        1.050_750_071_644_416_843_24e-9,
    ];
    const E: [f64; 8] = [
        6.657_904_643_501_103_777_2,
        5.463_784_911_164_114_369_9,
        1.784_826_539_917_291_335_8,
        2.965_605_718_285_048_912_3e-1,
        2.653_218_952_657_612_309_3e-2,
        1.242_660_947_388_078_438_6e-3,
        2.711_555_568_743_487_578_15e-5,
        2.010_334_399_292_288_132_65e-7,
    ];
    const F: [f64; 8] = [
        1.0,
        5.998_322_065_558_879_376_9e-1,
        1.369_298_809_227_358_053_1e-1,
        1.487_536_129_085_061_485_25e-2,
        7.868_691_311_456_132_591e-4,
        1.846_318_317_510_054_681_8e-5,
        1.421_511_758_316_445_888_7e-7,
        2.044_263_103_389_939_785_64e-15,
    ];

    let q = p - 0.5;
    if q.abs() <= SPLIT1 {
        let r = CONST1 - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }
    let mut r = if q < 0.0 { p } else { 1.0 - p };
    r = libm::sqrt(-libm::log(r));
    let val = if r <= SPLIT2 {
        r -= CONST2;
        poly(&C, r) / poly(&D, r)
    } else {
        r -= SPLIT2;
        poly(&E, r) / poly(&F, r)
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

#[inline]
fn poly(coef: &[f64; 8], x: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}


#[cfg(test)]
mod tests {
    use super::*;

    // Maclaurin series of erf, summed in f64; accurate to ~1e-15 for |x| <= 2.
    fn erf_series(x: f64) -> f64 {
        let mut term = x;
        let mut sum = x;
        let x2 = x * x;
        let mut n = 0.0;
        loop {
            n += 1.0;
            term *= -x2 / n;
            let add = term / (2.0 * n + 1.0);
            sum += add;
            if add.abs() < 1e-18 {
                break;
            }
        }
        2.0 / libm::sqrt(core::f64::consts::PI) * sum
    }

    fn phi_oracle(x: f64) -> f64 {
        0.5 * (1.0 + erf_series(x / core::f64::consts::SQRT_2))
    }

    // Bisection inverse of the series oracle.
    fn quantile_oracle(p: f64) -> f64 {
        let (mut lo, mut hi) = (-2.5, 2.5);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if phi_oracle(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn cdf_matches_series_oracle() {
        let mut x = -2.5;
        while x <= 2.5 {
            assert!((norm_cdf(x) - phi_oracle(x)).abs() < 1e-13, "x = {x}");
            x += 0.01;
        }
        assert!((norm_cdf(1.96) - 0.9750021048517795).abs() < 1e-13);
        assert!((phi_oracle(1.96) - 0.9750).abs() < 5e-5);
    }

    #[test]
    fn cdf_examples() {
        assert_eq!(std_normal_cdf(0.0).unwrap(), 0.5);
        assert!((std_normal_cdf(1.0364).unwrap() - 0.85).abs() < 5e-5);
        assert!(std_normal_cdf(f64::NAN).is_err());
        assert!(std_normal_cdf(f64::INFINITY).is_err());
    }

    #[test]
    fn quantile_matches_bisection_oracle() {
        for &p in &[0.01, 0.025, 0.05, 0.15, 0.2, 0.5, 0.8, 0.85, 0.975, 0.99] {
            assert!((norm_quantile(p) - quantile_oracle(p)).abs() < 1e-11, "p = {p}");
        }
        assert!((std_normal_quantile(0.8).unwrap() - 0.8416).abs() < 5e-5);
        assert!((std_normal_quantile(0.85).unwrap() - 1.0364).abs() < 5e-5);
        assert_eq!(std_normal_quantile(0.5).unwrap(), 0.0);
    }

    #[test]
    fn quantile_rejects_out_of_range() {
        for &p in &[0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(std_normal_quantile(p).is_err());
        }
        assert_eq!(norm_quantile(0.0), f64::NEG_INFINITY);
        assert_eq!(norm_quantile(1.0), f64::INFINITY);
    }

    #[test]
    fn quantile_round_trip_in_tails() {
        for &p in &[1e-300, 1e-100, 1e-20, 1e-10, 1e-5, 0.3, 0.7] {
            let x = norm_quantile(p);
            assert!(((norm_cdf(x) - p) / p).abs() < 1e-12, "p = {p}");
        }
        let a = 1e-12;
        let x = norm_quantile_upper(a);
        assert!(((norm_sf(x) - a) / a).abs() < 1e-12);
    }
}
