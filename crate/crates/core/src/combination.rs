//! Apply-or-waive strategy: if `Z₁ ≥ z_f` conditional registration is
//! applied for and the second stage is sized by conditional power with a
//! floor; otherwise the application is waived and a fixed second stage
//! `I_{2,const}` is run. Both branches target success probability `1 - β`.

use core::cell::Cell;

use crate::conditional_error::{atilde_z, calibrate, CalibratedCef, CefSpec};
use crate::design_space::{i1_max, DesignParams, InfoScale};
use crate::error::{Error, Result};
use crate::numerics::{norm_cdf, norm_quantile_upper, norm_sf, solve_monotone, Tolerances};
use crate::power_engine::{
    branch_power, max_stage2_info, mean_stage2_info, overall_power, solve_i2_min, Conditioning, StageTwoRule,
};
use libm::sqrt;

const I2_CONST_BRACKET: f64 = 64.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CefFamily {
    /// `A ≡ α`.
    Constant,
    /// Inverse normal, no futility bound.
    InverseNormal,
    /// Fisher product, no futility bound.
    Fisher,
    /// Combined-z function built on the lower-branch fixed-size test.
    ZCombination,
}

impl CefFamily {
    pub const ALL: [CefFamily; 4] = [
        CefFamily::Constant,
        CefFamily::InverseNormal,
        CefFamily::Fisher,
        CefFamily::ZCombination,
    ];

    pub fn label(self) -> &'static str {
        match self {
            CefFamily::Constant => "constant",
            CefFamily::InverseNormal => "inverse_normal",
            CefFamily::Fisher => "fisher",
            CefFamily::ZCombination => "z_combination",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombinationDesign {
    pub params: DesignParams,
    pub family: CefFamily,
    pub cef: CalibratedCef,
    pub i2_const: f64,
    pub i2_min: f64,
    pub branch_boundary: f64,
}

impl CombinationDesign {
    pub fn upper_rule(&self) -> StageTwoRule {
        StageTwoRule::AdaptiveConditionalPower {
            i2_min: self.i2_min,
            cef: self.cef,
            beta: self.params.beta,
        }
    }

    pub fn lower_rule(&self) -> StageTwoRule {
        StageTwoRule::ConstantInfo {
            i2_const: self.i2_const,
            cef: self.cef,
        }
    }

    /// Second-stage information for an observed `z₁`.
    pub fn stage2_info(&self, z1: f64) -> Result<f64> {
        if z1 >= self.branch_boundary {
            crate::power_engine::stage2_info(z1, self.params.i1, &self.upper_rule())
        } else {
            Ok(self.i2_const)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchMetrics {
    pub p_upper: f64,
    pub p_success_given_upper: f64,
    pub p_success_given_lower: f64,
    pub overall_power: f64,
    pub e_i2_both: f64,
    pub max_i2_both: f64,
    /// Largest information in the upper branch alone.
    pub max_i2_upper: f64,
}

/// The lower-branch rejection rule for a given constant information: the
/// family's own function, or `Ã_{Z,α}` for the combined-z family (whose cap
/// cannot bind below `z_f ≤ Φ⁻¹(1-α)`).
fn lower_cef(cef: &CalibratedCef, family: CefFamily, i1: f64, i2c: f64, z_split: f64) -> CalibratedCef {
    match family {
        CefFamily::ZCombination => CalibratedCef {
            spec: CefSpec::ZCombination {
                i1,
                i2_const: i2c,
                z_split,
            },
            c: 0.0,
            alpha_prime: cef.alpha,
            level_used: cef.alpha,
            alpha: cef.alpha,
            lower: f64::NEG_INFINITY,
            saturated: false,
        },
        _ => *cef,
    }
}

/// `P_δ(second stage rejects | Z₁ < z_split)` with `I₂ ≡ i2c`.
pub fn lower_branch_success(
    i1: f64,
    delta: f64,
    cef: &CalibratedCef,
    family: CefFamily,
    i2c: f64,
    z_split: f64,
    tol: &Tolerances,
) -> Result<f64> {
    let rule = StageTwoRule::ConstantInfo {
        i2_const: i2c,
        cef: lower_cef(cef, family, i1, i2c, z_split),
    };
    let p = branch_power(i1, &rule, delta, f64::NEG_INFINITY, z_split, tol)?;
    Ok(p / norm_cdf(z_split - sqrt(i1) * delta))
}

/// Constant second-stage information giving conditional success `1 - β`
/// below `z_split`.
pub fn solve_i2_const(
    i1: f64,
    delta: f64,
    cef: &CalibratedCef,
    family: CefFamily,
    beta: f64,
    z_split: f64,
    tol: &Tolerances,
) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter {
            name: "delta",
            value: delta,
            reason: "must be positive",
        });
    }
    let eta = norm_quantile_upper(beta) + norm_quantile_upper(cef.alpha);
    let i_delta = eta * eta / (delta * delta);
    let err: Cell<Option<Error>> = Cell::new(None);
    let root = solve_monotone(
        |i| match lower_branch_success(i1, delta, cef, family, i, z_split, tol) {
            Ok(p) => p,
            Err(e) => {
                err.set(Some(e));
                f64::NAN
            }
        },
        1.0 - beta,
        1e-9 * i_delta,
        I2_CONST_BRACKET * i_delta,
        &tol.root,
    );
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    Ok(root?.value())
}

pub fn build_combination(params: &DesignParams, family: CefFamily, tol: &Tolerances) -> Result<CombinationDesign> {
    params.validate()?;
    let (alpha, beta, i1, delta) = (params.alpha, params.beta, params.i1, params.delta());
    let z_f = params.z_f();
    let ninf = f64::NEG_INFINITY;
    let (cef, i2_const) = match family {
        CefFamily::ZCombination => {
            let seed = CalibratedCef::constant(alpha);
            let i2c = solve_i2_const(i1, delta, &seed, family, beta, z_f, tol)?;
            let spec = CefSpec::ZCombination {
                i1,
                i2_const: i2c,
                z_split: z_f,
            };
            (calibrate(spec, alpha, ninf, tol)?, i2c)
        }
        _ => {
            let spec = match family {
                CefFamily::Constant => CefSpec::Constant { level: alpha },
                CefFamily::InverseNormal => CefSpec::inverse_normal(ninf),
                _ => CefSpec::fisher(ninf),
            };
            let cef = calibrate(spec, alpha, ninf, tol)?;
            let i2c = solve_i2_const(i1, delta, &cef, family, beta, z_f, tol)?;
            (cef, i2c)
        }
    };
    let p_upper = norm_sf(z_f - sqrt(i1) * delta);
    let i2_min = solve_i2_min(i1, delta, &cef, beta, (1.0 - beta) * p_upper, z_f, tol)?;
    Ok(CombinationDesign {
        params: *params,
        family,
        cef,
        i2_const,
        i2_min,
        branch_boundary: z_f,
    })
}

pub fn branch_metrics(design: &CombinationDesign, tol: &Tolerances) -> Result<BranchMetrics> {
    let p = &design.params;
    let (i1, delta, z_f) = (p.i1, p.delta(), design.branch_boundary);
    let upper = design.upper_rule();
    let p_upper = norm_sf(z_f - sqrt(i1) * delta);
    let s_upper = overall_power(i1, &upper, delta, z_f, tol)?;
    let s_lower = lower_branch_success(i1, delta, &design.cef, design.family, design.i2_const, z_f, tol)?;
    let mean_upper = mean_stage2_info(i1, &upper, delta, z_f, Conditioning::Unconditional, tol)?;
    let max_upper = max_stage2_info(i1, &upper, z_f)?;
    Ok(BranchMetrics {
        p_upper,
        p_success_given_upper: s_upper / p_upper,
        p_success_given_lower: s_lower,
        overall_power: s_upper + (1.0 - p_upper) * s_lower,
        e_i2_both: mean_upper + (1.0 - p_upper) * design.i2_const,
        max_i2_both: max_upper.max(design.i2_const),
        max_i2_upper: max_upper,
    })
}

/// Probability of permanent registration (either branch) at true effect `theta`.
pub fn power_at(design: &CombinationDesign, theta: f64, tol: &Tolerances) -> Result<f64> {
    let (i1, z_f) = (design.params.i1, design.branch_boundary);
    let upper = overall_power(i1, &design.upper_rule(), theta, z_f, tol)?;
    let lower_rule = StageTwoRule::ConstantInfo {
        i2_const: design.i2_const,
        cef: lower_cef(&design.cef, design.family, i1, design.i2_const, z_f),
    };
    let lower = branch_power(i1, &lower_rule, theta, f64::NEG_INFINITY, z_f, tol)?;
    Ok(upper + lower)
}

/// Grid used by the threshold scan, on the `t_ξ` scale.
pub const GAMBLING_SCAN_START: f64 = 0.02;
pub const GAMBLING_SCAN_STEP: f64 = 0.002;

/// Largest `t_ξ(I₁)` up to which the upper-branch information is constant
/// (the floor dominates at `z_f`). Zero if it is never constant on the scan.
pub fn gambling_threshold(params: &DesignParams, family: CefFamily, tol: &Tolerances) -> Result<f64> {
    let excess = |t: f64| -> Result<f64> {
        let p = params.with_i1(t * params.i_delta());
        let d = build_combination(&p, family, tol)?;
        Ok(max_stage2_info(p.i1, &d.upper_rule(), d.branch_boundary)? - d.i2_min)
    };
    let t_end = params.t_xi(i1_max(params.alpha, params.delta_rel));
    let mut prev = GAMBLING_SCAN_START;
    if excess(prev)? > 0.0 {
        return Ok(0.0);
    }
    let mut k = 1;
    loop {
        let t = GAMBLING_SCAN_START + GAMBLING_SCAN_STEP * k as f64;
        if t > t_end {
            return Ok(prev);
        }
        if excess(t)? > 0.0 {
            let (mut lo, mut hi) = (prev, t);
            while hi - lo > 1e-7 {
                let m = 0.5 * (lo + hi);
                if excess(m)? > 0.0 {
                    hi = m;
                } else {
                    lo = m;
                }
            }
            return Ok(lo);
        }
        prev = t;
        k += 1;
    }
}

/// Type I error of the strategy if the waived branch were naively tested at
/// full level α on top of the fast track: `(1 + Φ(z_f))α`.
pub fn naive_inflation(alpha: f64, alpha_c: f64) -> f64 {
    (1.0 + norm_cdf(norm_quantile_upper(alpha_c))) * alpha
}

/// Design parameters of the worked example: `δ_rel = 1.4`, `ξ = 1.25`,
/// `t_ξ(I₁) = 0.5`, `α_c = 0.15`.
pub fn worked_example() -> DesignParams {
    DesignParams::with_relative_i1(0.025, 0.15, 0.2, 1.4, 1.25, 0.5, InfoScale::Xi).expect("valid example")
}

/// Decision of the fixed-size combined test on the cumulative data.
pub fn combined_test_rejects(z1: f64, z2: f64, alpha: f64, i1: f64, i2: f64) -> bool {
    let tot = i1 + i2;
    sqrt(i1 / tot) * z1 + sqrt(i2 / tot) * z2 >= norm_quantile_upper(alpha)
}

/// `Ã_{Z,α}` decision: reject if `Z₂ ≥ Φ⁻¹(1 - Ã_{Z,α}(Z₁))`.
pub fn cef_rejects(z1: f64, z2: f64, alpha: f64, i1: f64, i2: f64) -> bool {
    z2 >= norm_quantile_upper(atilde_z(z1, alpha, i1, i2))
}
