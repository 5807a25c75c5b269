//! Conditional error functions `A(z₁)`: the constant rule, the inverse
//! normal and Fisher product families with an optional binding futility
//! bound `z₀`, and the combined-z function built on the fixed-size inverse
//! normal test. All are truncated at 0.5.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::numerics::{
    find_root, integrate_normal_weighted, norm_quantile_upper, norm_sf, Tolerances,
};
use libm::sqrt;

/// Upper truncation applied to every family.
pub const CEF_CAP: f64 = 0.5;

/// Upper end of the `α′` search for the combined-z function.
const ALPHA_PRIME_MAX: f64 = 1.0 - 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CefSpec {
    /// `A ≡ level`.
    Constant { level: f64 },
    /// Inverse normal combination with weights `w1² + w2² = 1`.
    InverseNormal { z0: f64, w1: f64, w2: f64 },
    /// Fisher's product criterion.
    FisherProduct { z0: f64 },
    /// Combined-z function: `Ã` at level `α` below `z_split`, at `α′` above.
    ZCombination { i1: f64, i2_const: f64, z_split: f64 },
}

impl CefSpec {
    /// Inverse normal family with equal weights.
    pub fn inverse_normal(z0: f64) -> Self {
        let w = core::f64::consts::FRAC_1_SQRT_2;
        CefSpec::InverseNormal { z0, w1: w, w2: w }
    }

    pub fn fisher(z0: f64) -> Self {
        CefSpec::FisherProduct { z0 }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, value, reason| {
            Err(Error::InvalidParameter {
                name,
                value,
                reason,
            })
        };
        match *self {
            CefSpec::Constant { level } => {
                if !(0.0..=1.0).contains(&level) {
                    return bad("level", level, "must lie in [0, 1]");
                }
            }
            CefSpec::InverseNormal { z0, w1, w2 } => {
                if z0.is_nan() || z0 == f64::INFINITY {
                    return bad("z0", z0, "must be finite or -inf");
                }
                if !(w1 > 0.0 && w2 > 0.0) || (w1 * w1 + w2 * w2 - 1.0).abs() > 1e-12 {
                    return bad("w1", w1, "weights must be positive with w1^2 + w2^2 = 1");
                }
            }
            CefSpec::FisherProduct { z0 } => {
                if z0.is_nan() || z0 == f64::INFINITY {
                    return bad("z0", z0, "must be finite or -inf");
                }
            }
            CefSpec::ZCombination {
                i1,
                i2_const,
                z_split,
            } => {
                if !(i1 > 0.0 && i1.is_finite()) {
                    return bad("i1", i1, "must be positive");
                }
                if !(i2_const > 0.0 && i2_const.is_finite()) {
                    return bad("i2_const", i2_const, "must be positive");
                }
                if !z_split.is_finite() {
                    return bad("z_split", z_split, "must be finite");
                }
            }
        }
        Ok(())
    }

    /// Binding futility bound, if any.
    pub fn z0(&self) -> Option<f64> {
        match *self {
            CefSpec::InverseNormal { z0, .. } | CefSpec::FisherProduct { z0 } if z0.is_finite() => Some(z0),
            _ => None,
        }
    }
}

/// A conditional error function with its level constant fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibratedCef {
    pub spec: CefSpec,
    /// `c_I(z₀)` / `c_F(z₀)`; the level for `Constant`; unused for `ZCombination`.
    pub c: f64,
    /// `α′` for `ZCombination`; equals `alpha` otherwise.
    pub alpha_prime: f64,
    /// Level integral at the calibrated constant.
    pub level_used: f64,
    /// Target level.
    pub alpha: f64,
    /// Lower limit of the level integral.
    pub lower: f64,
    /// The family could not reach `alpha`; `level_used < alpha`.
    pub saturated: bool,
}

impl CalibratedCef {
    /// `A ≡ level`, without any calibration.
    pub fn constant(level: f64) -> Self {
        CalibratedCef {
            spec: CefSpec::Constant { level },
            c: level,
            alpha_prime: level,
            level_used: level,
            alpha: level,
            lower: f64::NEG_INFINITY,
            saturated: false,
        }
    }

    pub fn eval(&self, z1: f64) -> f64 {
        eval_raw(&self.spec, self.c, self.alpha, self.alpha_prime, z1)
    }

    /// Abscissae where `A` is not smooth: `z₀`, where the 0.5 cap starts,
    /// and the split of the combined-z function.
    pub fn breaks(&self) -> Vec<f64> {
        breaks_raw(&self.spec, self.c, self.alpha, self.alpha_prime)
    }
}

pub fn eval_cef(cef: &CalibratedCef, z1: f64) -> f64 {
    cef.eval(z1)
}

fn eval_raw(spec: &CefSpec, c: f64, alpha: f64, alpha_prime: f64, z: f64) -> f64 {
    match *spec {
        CefSpec::Constant { level } => level.min(CEF_CAP),
        CefSpec::InverseNormal { z0, w1, w2 } => {
            if z < z0 || c <= 0.0 {
                return 0.0;
            }
            let q = norm_quantile_upper(c);
            norm_sf((q - w1 * z) / w2).min(CEF_CAP)
        }
        CefSpec::FisherProduct { z0 } => {
            if z < z0 || c <= 0.0 {
                return 0.0;
            }
            let s = norm_sf(z);
            if s <= 2.0 * c {
                CEF_CAP
            } else {
                c / s
            }
        }
        CefSpec::ZCombination {
            i1,
            i2_const,
            z_split,
        } => {
            let level = if z >= z_split { alpha_prime } else { alpha };
            atilde_z(z, level, i1, i2_const).min(CEF_CAP)
        }
    }
}

fn breaks_raw(spec: &CefSpec, c: f64, alpha: f64, alpha_prime: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(3);
    match *spec {
        CefSpec::Constant { .. } => {}
        CefSpec::InverseNormal { z0, w1, .. } => {
            out.push(z0);
            out.push(norm_quantile_upper(c) / w1);
        }
        CefSpec::FisherProduct { z0 } => {
            out.push(z0);
            if 2.0 * c < 1.0 {
                out.push(norm_quantile_upper(2.0 * c));
            }
        }
        CefSpec::ZCombination {
            i1,
            i2_const,
            z_split,
        } => {
            let r = sqrt((i1 + i2_const) / i1);
            out.push(z_split);
            out.push(norm_quantile_upper(alpha) * r);
            out.push(norm_quantile_upper(alpha_prime) * r);
        }
    }
    out.retain(|b| b.is_finite());
    out
}

/// `∫_{lower}^∞ A(z) φ(z) dz` (no early rejection).
pub fn level_integral(cef: &CalibratedCef, lower: f64, tol: &Tolerances) -> Result<f64> {
    level_raw(&cef.spec, cef.c, cef.alpha, cef.alpha_prime, lower, tol)
}

fn level_raw(spec: &CefSpec, c: f64, alpha: f64, alpha_prime: f64, lower: f64, tol: &Tolerances) -> Result<f64> {
    if let CefSpec::Constant { level } = *spec {
        return Ok(level.min(CEF_CAP) * norm_sf(lower));
    }
    let lo = match spec.z0() {
        Some(z0) => lower.max(z0),
        None => lower,
    };
    let br = breaks_raw(spec, c, alpha, alpha_prime);
    integrate_normal_weighted(
        |z| eval_raw(spec, c, alpha, alpha_prime, z),
        0.0,
        lo,
        f64::INFINITY,
        &br,
        &tol.quad,
    )
}

/// Fixes the constant of `spec` so that the level integral from `lower`
/// equals `alpha`. Families that cannot reach `alpha` even when identically
/// 0.5 are returned saturated at the smallest such constant.
pub fn calibrate(spec: CefSpec, alpha: f64, lower: f64, tol: &Tolerances) -> Result<CalibratedCef> {
    spec.validate()?;
    if !(alpha > 0.0 && alpha < CEF_CAP) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha,
            reason: "must lie in (0, 0.5)",
        });
    }
    if lower.is_nan() || lower == f64::INFINITY {
        return Err(Error::InvalidParameter {
            name: "lower",
            value: lower,
            reason: "must be finite or -inf",
        });
    }
    let mut out = CalibratedCef {
        spec,
        c: 0.0,
        alpha_prime: alpha,
        level_used: 0.0,
        alpha,
        lower,
        saturated: false,
    };
    match spec {
        CefSpec::Constant { level } => {
            out.c = level;
            out.alpha_prime = level;
            out.level_used = level_raw(&spec, level, alpha, level, lower, tol)?;
        }
        CefSpec::InverseNormal { .. } | CefSpec::FisherProduct { .. } => {
            let eff_lower = spec.z0().map_or(lower, |z0| lower.max(z0));
            // Identically 0.5 on [eff_lower, ∞) is the family's ceiling.
            let ceiling = CEF_CAP * norm_sf(eff_lower);
            if ceiling <= alpha {
                out.c = match spec {
                    CefSpec::InverseNormal { w1, .. } => norm_sf(w1 * eff_lower),
                    _ => CEF_CAP * norm_sf(eff_lower),
                };
                out.level_used = level_raw(&spec, out.c, alpha, alpha, lower, tol)?;
                out.saturated = out.level_used < alpha;
                return Ok(out);
            }
            let mut err = None;
            let c = find_root(
                |c| match level_raw(&spec, c, alpha, alpha, lower, tol) {
                    Ok(v) => v - alpha,
                    Err(e) => {
                        err.get_or_insert(e);
                        f64::NAN
                    }
                },
                0.0,
                1.0,
                &tol.root,
            );
            if let Some(e) = err {
                return Err(e);
            }
            out.c = c?;
            out.level_used = level_raw(&spec, out.c, alpha, alpha, lower, tol)?;
        }
        CefSpec::ZCombination { .. } => {
            let level = |ap: f64| level_raw(&spec, 0.0, alpha, ap, lower, tol);
            let at_alpha = level(alpha)?;
            if at_alpha >= alpha - tol.root.f_tol {
                out.level_used = at_alpha;
                return Ok(out);
            }
            let at_max = level(ALPHA_PRIME_MAX)?;
            if at_max <= alpha {
                out.alpha_prime = ALPHA_PRIME_MAX;
                out.level_used = at_max;
                out.saturated = true;
                return Ok(out);
            }
            let mut err = None;
            let ap = find_root(
                |ap| match level(ap) {
                    Ok(v) => v - alpha,
                    Err(e) => {
                        err.get_or_insert(e);
                        f64::NAN
                    }
                },
                alpha,
                ALPHA_PRIME_MAX,
                &tol.root,
            );
            if let Some(e) = err {
                return Err(e);
            }
            out.alpha_prime = ap?;
            out.level_used = level(out.alpha_prime)?;
        }
    }
    Ok(out)
}

/// Conditional error of the fixed-size inverse normal test with stage
/// weights proportional to `√I₁` and `√I₂c`.
pub fn atilde_z(z1: f64, level: f64, i1: f64, i2c: f64) -> f64 {
    let tot = i1 + i2c;
    let a = sqrt(i1 / tot);
    let b = sqrt(i2c / tot);
    norm_sf((norm_quantile_upper(level) - a * z1) / b)
}
