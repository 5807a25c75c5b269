//! Second-stage information rules and the operating characteristics of a
//! fast-track design: overall power, the information floor `I_{2,min}` that
//! meets a power target, and the minimum/maximum/mean second-stage
//! information.

use alloc::vec::Vec;
use core::cell::Cell;

use crate::conditional_error::{calibrate, CalibratedCef, CefSpec};
use crate::design_space::{eta_f, DesignParams};
use crate::error::{Error, Result};
use crate::numerics::{
    find_root, integrate_normal_weighted, norm_quantile_upper, norm_sf, solve_monotone, Tolerances,
};
use libm::sqrt;

/// Initial upper guess for `I_{2,min}`, in multiples of `I_δ`.
const I2_MIN_BRACKET: f64 = 64.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StageTwoRule {
    /// Conditional power `1 - β` at the interim estimate, floored at
    /// `i2_min`. With `cef = Constant(α)` this is the non-adaptive rule.
    AdaptiveConditionalPower {
        i2_min: f64,
        cef: CalibratedCef,
        beta: f64,
    },
    /// Fixed information; rejection still goes through `cef`.
    ConstantInfo { i2_const: f64, cef: CalibratedCef },
}

impl StageTwoRule {
    pub fn non_adaptive(alpha: f64, beta: f64, i2_min: f64) -> Self {
        StageTwoRule::AdaptiveConditionalPower {
            i2_min,
            cef: CalibratedCef::constant(alpha),
            beta,
        }
    }

    pub fn cef(&self) -> &CalibratedCef {
        match self {
            StageTwoRule::AdaptiveConditionalPower { cef, .. } | StageTwoRule::ConstantInfo { cef, .. } => cef,
        }
    }

    /// Smallest information the rule can prescribe.
    pub fn floor(&self) -> f64 {
        match *self {
            StageTwoRule::AdaptiveConditionalPower { i2_min, .. } => i2_min,
            StageTwoRule::ConstantInfo { i2_const, .. } => i2_const,
        }
    }

    pub fn with_floor(&self, floor: f64) -> Self {
        match *self {
            StageTwoRule::AdaptiveConditionalPower { cef, beta, .. } => StageTwoRule::AdaptiveConditionalPower {
                i2_min: floor,
                cef,
                beta,
            },
            StageTwoRule::ConstantInfo { cef, .. } => StageTwoRule::ConstantInfo { i2_const: floor, cef },
        }
    }
}

/// How the mean second-stage information treats trials stopped at the
/// interim analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Conditioning {
    /// `E[I₂ | Z₁ ≥ z_f]`.
    Continuation,
    /// `E[I₂ · 1{Z₁ ≥ z_f}]`: stopped trials contribute zero.
    #[default]
    Unconditional,
}

/// Which conditional error function a fast-track design uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FastTrackFamily {
    NonAdaptive,
    InverseNormal,
    Fisher,
}

/// Whether the futility stop at `z_f` is credited in the level condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Futility {
    #[default]
    Binding,
    NonBinding,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvaluationResult {
    pub overall_power: f64,
    pub p_cond_reg: f64,
    pub i2_min: f64,
    pub i2_max: f64,
    /// Under `conditioning`; with `Unconditional` it can fall below `i2_min`.
    pub i2_mean: f64,
    pub total_mean: f64,
    pub total_max: f64,
    pub conditioning: Conditioning,
}

/// `I₁(Φ⁻¹(1-β) + Φ⁻¹(1-A(z₁)))² / z₁²`, the unfloored adaptive rule.
fn cp_information(z1: f64, i1: f64, cef: &CalibratedCef, beta: f64) -> f64 {
    let s = norm_quantile_upper(beta) + norm_quantile_upper(cef.eval(z1));
    i1 * s * s / (z1 * z1)
}

pub fn stage2_info(z1: f64, i1: f64, rule: &StageTwoRule) -> Result<f64> {
    match *rule {
        StageTwoRule::ConstantInfo { i2_const, .. } => Ok(i2_const),
        StageTwoRule::AdaptiveConditionalPower { i2_min, cef, beta } => {
            if !(z1 > 0.0) {
                return Err(Error::Domain {
                    what: "stage2_info requires z1 > 0",
                    value: z1,
                });
            }
            Ok(cp_information(z1, i1, &cef, beta).max(i2_min))
        }
    }
}

/// Point in `[lo, hi]` where the unfloored rule drops to the floor, if the
/// floor is active on part of the range only.
fn floor_kink(i1: f64, rule: &StageTwoRule, lo: f64, hi: f64, tol: &Tolerances) -> Option<f64> {
    let StageTwoRule::AdaptiveConditionalPower { i2_min, cef, beta } = *rule else {
        return None;
    };
    if !(i2_min > 0.0) || !(lo > 0.0) || !hi.is_finite() || !(lo < hi) {
        return None;
    }
    let f = |z: f64| cp_information(z, i1, &cef, beta) - i2_min;
    if !(f(lo) > 0.0 && f(hi) < 0.0) {
        return None;
    }
    find_root(f, lo, hi, &tol.root).ok()
}

fn breaks_for(i1: f64, rule: &StageTwoRule, lo: f64, hi: f64, tol: &Tolerances) -> Vec<f64> {
    let mut br = rule.cef().breaks();
    if let Some(k) = floor_kink(i1, rule, lo, hi, tol) {
        br.push(k);
    }
    br
}

/// Integrates `g(z, I₂(z))·φ(z - √I₁δ)` over `[lo, hi]`, surfacing errors
/// raised inside the integrand.
fn integrate_rule<G: FnMut(f64, f64) -> f64>(
    mut g: G,
    i1: f64,
    rule: &StageTwoRule,
    delta: f64,
    lo: f64,
    hi: f64,
    tol: &Tolerances,
) -> Result<f64> {
    let mean = sqrt(i1) * delta;
    let w = tol.quad.tail_halfwidth;
    let br = breaks_for(i1, rule, lo.max(mean - w), hi.min(mean + w), tol);
    let err: Cell<Option<Error>> = Cell::new(None);
    let v = integrate_normal_weighted(
        |z| match stage2_info(z, i1, rule) {
            Ok(i2) => g(z, i2),
            Err(e) => {
                err.set(Some(e));
                0.0
            }
        },
        mean,
        lo,
        hi,
        &br,
        &tol.quad,
    )?;
    match err.into_inner() {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// `P_δ(Z₁ ∈ [lo, hi], second stage rejects)`.
pub fn branch_power(i1: f64, rule: &StageTwoRule, delta: f64, lo: f64, hi: f64, tol: &Tolerances) -> Result<f64> {
    let cef = *rule.cef();
    integrate_rule(
        |z, i2| norm_sf(norm_quantile_upper(cef.eval(z)) - sqrt(i2) * delta),
        i1,
        rule,
        delta,
        lo,
        hi,
        tol,
    )
}

/// Probability of permanent registration when continuing for `Z₁ ≥ z_lower`.
pub fn overall_power(i1: f64, rule: &StageTwoRule, delta: f64, z_lower: f64, tol: &Tolerances) -> Result<f64> {
    branch_power(i1, rule, delta, z_lower, f64::INFINITY, tol)
}

/// Smallest floor `I_{2,min} ≥ 0` for which the overall power reaches
/// `target`; zero if the unfloored rule already does.
pub fn solve_i2_min(
    i1: f64,
    delta: f64,
    cef: &CalibratedCef,
    beta: f64,
    target: f64,
    z_lower: f64,
    tol: &Tolerances,
) -> Result<f64> {
    let ceiling = norm_sf(z_lower - sqrt(i1) * delta);
    if !(target < ceiling) {
        return Err(Error::Infeasible { target, ceiling });
    }
    let rule = StageTwoRule::AdaptiveConditionalPower {
        i2_min: 0.0,
        cef: *cef,
        beta,
    };
    let eta = eta_f(cef.alpha.min(0.5 - 1e-12), beta);
    let i_delta = eta * eta / (delta * delta);
    let err: Cell<Option<Error>> = Cell::new(None);
    let root = solve_monotone(
        |x| match overall_power(i1, &rule.with_floor(x), delta, z_lower, tol) {
            Ok(p) => p,
            Err(e) => {
                err.set(Some(e));
                f64::NAN
            }
        },
        target,
        0.0,
        I2_MIN_BRACKET * i_delta,
        &tol.root,
    );
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    Ok(root?.value())
}

/// Largest information the rule prescribes for `Z₁ ≥ z_f`; attained at
/// `z_f` because `A` is non-decreasing.
pub fn max_stage2_info(i1: f64, rule: &StageTwoRule, z_f: f64) -> Result<f64> {
    stage2_info(z_f, i1, rule)
}

pub fn mean_stage2_info(
    i1: f64,
    rule: &StageTwoRule,
    delta: f64,
    z_lower: f64,
    conditioning: Conditioning,
    tol: &Tolerances,
) -> Result<f64> {
    let m = integrate_rule(|_, i2| i2, i1, rule, delta, z_lower, f64::INFINITY, tol)?;
    Ok(match conditioning {
        Conditioning::Unconditional => m,
        Conditioning::Continuation => m / norm_sf(z_lower - sqrt(i1) * delta),
    })
}

/// Calibrates the family's conditional error function at `z_f` and solves
/// the floor for overall power `1 - β`.
pub fn fast_track_rule(
    params: &DesignParams,
    family: FastTrackFamily,
    futility: Futility,
    tol: &Tolerances,
) -> Result<StageTwoRule> {
    params.validate()?;
    let z_f = params.z_f();
    let z0 = match futility {
        Futility::Binding => z_f,
        Futility::NonBinding => f64::NEG_INFINITY,
    };
    let cef = match family {
        FastTrackFamily::NonAdaptive => CalibratedCef::constant(params.alpha),
        FastTrackFamily::InverseNormal => calibrate(CefSpec::inverse_normal(z0), params.alpha, z0, tol)?,
        FastTrackFamily::Fisher => calibrate(CefSpec::fisher(z0), params.alpha, z0, tol)?,
    };
    let i2_min = solve_i2_min(
        params.i1,
        params.delta(),
        &cef,
        params.beta,
        1.0 - params.beta,
        z_f,
        tol,
    )?;
    Ok(StageTwoRule::AdaptiveConditionalPower {
        i2_min,
        cef,
        beta: params.beta,
    })
}

pub fn evaluate_design(
    params: &DesignParams,
    rule: &StageTwoRule,
    conditioning: Conditioning,
    tol: &Tolerances,
) -> Result<EvaluationResult> {
    let z_f = params.z_f();
    let delta = params.delta();
    let i1 = params.i1;
    let overall_power = overall_power(i1, rule, delta, z_f, tol)?;
    let i2_max = max_stage2_info(i1, rule, z_f)?;
    let i2_mean = mean_stage2_info(i1, rule, delta, z_f, conditioning, tol)?;
    Ok(EvaluationResult {
        overall_power,
        p_cond_reg: norm_sf(z_f - sqrt(i1) * delta),
        i2_min: rule.floor(),
        i2_max,
        i2_mean,
        total_mean: i1 + i2_mean,
        total_max: i1 + i2_max,
        conditioning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design_space::{i1_min, InfoScale};
    use crate::numerics::{norm_cdf, norm_pdf};

    fn scenario(xi: f64, t: f64) -> DesignParams {
        DesignParams::with_relative_i1(0.025, 0.15, 0.2, 1.0, xi, t, InfoScale::Xi).unwrap()
    }

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    /// Non-adaptive power by composite Simpson with the floor kink in
    /// closed form, written without the engine.
    fn non_adaptive_oracle(p: &DesignParams, i2_min: f64) -> f64 {
        let eta = p.eta_f();
        let zc = norm_quantile_upper(p.alpha);
        let mu = sqrt(p.i1) * p.delta();
        let zf = p.z_f();
        let info = |z: f64| (p.i1 * eta * eta / (z * z)).max(i2_min);
        let f = |z: f64| norm_cdf(sqrt(info(z)) * p.delta() - zc) * norm_pdf(z - mu);
        let simpson = |a: f64, b: f64| {
            let n = 20_000;
            let h = (b - a) / n as f64;
            let mut s = f(a) + f(b);
            for k in 1..n {
                s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
            }
            s * h / 3.0
        };
        let hi = mu + 10.0;
        let kink = if i2_min > 0.0 { sqrt(p.i1) * eta / sqrt(i2_min) } else { f64::INFINITY };
        if kink > zf && kink < hi {
            simpson(zf, kink) + simpson(kink, hi)
        } else {
            simpson(zf, hi)
        }
    }

    #[test]
    fn non_adaptive_power_matches_independent_oracle() {
        let t = tol();
        for (xi, tt, floor) in [(2.0, 0.6, 2.0), (2.0, 0.8, 0.5), (1.75, 0.7, 3.0), (2.5, 0.6, 0.0)] {
            let p = scenario(xi, tt);
            let rule = StageTwoRule::non_adaptive(p.alpha, p.beta, floor * p.i_delta());
            let got = overall_power(p.i1, &rule, p.delta(), p.z_f(), &t).unwrap();
            let want = non_adaptive_oracle(&p, floor * p.i_delta());
            assert!((got - want).abs() < 1e-10, "{got} vs {want}");
        }
    }

    #[test]
    fn landmarks_at_xi_two() {
        let t = tol();
        let p = scenario(2.0, 0.6);
        let id = p.i_delta();
        let expect = [
            (FastTrackFamily::NonAdaptive, 1.41, 4.0),
            (FastTrackFamily::InverseNormal, 0.33, f64::NAN),
            (FastTrackFamily::Fisher, 0.29, 3.0),
        ];
        for (fam, tmin, tmax) in expect {
            let rule = fast_track_rule(&p, fam, Futility::Binding, &t).unwrap();
            let r = evaluate_design(&p, &rule, Conditioning::Unconditional, &t).unwrap();
            assert!((r.overall_power - 0.8).abs() < 1e-8);
            assert!((r.i2_min / id - tmin).abs() < 0.01, "{fam:?} {}", r.i2_min / id);
            if tmax.is_finite() {
                assert!((r.i2_max / id - tmax).abs() < 0.01, "{fam:?} {}", r.i2_max / id);
            }
        }
    }

    #[test]
    fn power_monotone_in_floor_and_below_ceiling() {
        let t = tol();
        let p = scenario(2.0, 0.6);
        let cef = calibrate(CefSpec::fisher(p.z_f()), p.alpha, p.z_f(), &t).unwrap();
        let ceiling = norm_sf(p.z_f() - p.z1_mean());
        let mut prev = 0.0;
        for k in 0..30 {
            let rule = StageTwoRule::AdaptiveConditionalPower {
                i2_min: 0.25 * k as f64,
                cef,
                beta: 0.2,
            };
            let s = overall_power(p.i1, &rule, p.delta(), p.z_f(), &t).unwrap();
            assert!(s >= prev - 1e-12 && s <= ceiling);
            prev = s;
        }
        let rule = StageTwoRule::AdaptiveConditionalPower { i2_min: 1e4, cef, beta: 0.2 };
        let s = overall_power(p.i1, &rule, p.delta(), p.z_f(), &t).unwrap();
        assert!((s - ceiling).abs() < 1e-8);
    }

    #[test]
    fn floor_grows_without_bound_towards_i1_min() {
        // The growth is only logarithmic in the distance to I_{1,min}.
        let t = tol();
        for xi in [1.75, 2.0] {
            let base = scenario(xi, 1.0);
            let m = i1_min(&base).unwrap();
            let mut prev = 0.0;
            for f in [1.01, 1.001, 1.0001, 1.000_001] {
                let p = base.with_i1(m * f);
                let rule = fast_track_rule(&p, FastTrackFamily::NonAdaptive, Futility::Binding, &t).unwrap();
                let v = p.t_xi(rule.floor());
                assert!(v > prev + 0.3, "xi={xi} f={f}: {v}");
                prev = v;
            }
        }
    }

    #[test]
    fn infeasible_below_i1_min() {
        let t = tol();
        let base = scenario(2.0, 1.0);
        let p = base.with_i1(0.9 * i1_min(&base).unwrap());
        let e = fast_track_rule(&p, FastTrackFamily::Fisher, Futility::Binding, &t).unwrap_err();
        assert!(matches!(e, Error::Infeasible { .. }));
    }

    #[test]
    fn floor_is_zero_when_not_needed() {
        let t = tol();
        let p = scenario(2.0, 0.6);
        let cef = CalibratedCef::constant(0.025);
        let v = solve_i2_min(p.i1, p.delta(), &cef, 0.2, 0.3, p.z_f(), &t).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn adaptive_maximum_below_non_adaptive() {
        let t = tol();
        for xi in [1.75, 2.0] {
            let base = scenario(xi, 1.0);
            let lo = base.t_xi(i1_min(&base).unwrap());
            let hi = base.t_xi(crate::design_space::i1_max(0.025, 1.0));
            for k in 1..8 {
                let tt = lo + (hi - lo) * k as f64 / 8.0;
                let p = scenario(xi, tt);
                let na = fast_track_rule(&p, FastTrackFamily::NonAdaptive, Futility::Binding, &t).unwrap();
                let m_na = max_stage2_info(p.i1, &na, p.z_f()).unwrap();
                for fam in [FastTrackFamily::InverseNormal, FastTrackFamily::Fisher] {
                    let r = fast_track_rule(&p, fam, Futility::Binding, &t).unwrap();
                    let a = r.cef().eval(p.z_f());
                    assert!(a > p.alpha, "precondition fails at t={tt}");
                    assert!(max_stage2_info(p.i1, &r, p.z_f()).unwrap() < m_na);
                }
            }
        }
    }

    #[test]
    fn maximum_linear_while_boundary_fixed() {
        let t = tol();
        for fam in [FastTrackFamily::InverseNormal, FastTrackFamily::Fisher] {
            let ts = [0.46, 0.49, 0.52];
            let mut v = [0.0; 3];
            for (k, tt) in ts.into_iter().enumerate() {
                let p = scenario(2.0, tt);
                let r = fast_track_rule(&p, fam, Futility::Binding, &t).unwrap();
                v[k] = p.t_xi(max_stage2_info(p.i1, &r, p.z_f()).unwrap());
            }
            assert!((v[2] - 2.0 * v[1] + v[0]).abs() < 1e-6, "{fam:?}: {v:?}");
            assert!(v[2] > v[0]);
        }
    }

    #[test]
    fn constant_rule_statistics() {
        let t = tol();
        let p = scenario(2.0, 0.6);
        let rule = StageTwoRule::ConstantInfo {
            i2_const: 3.0,
            cef: CalibratedCef::constant(0.025),
        };
        let m = mean_stage2_info(p.i1, &rule, p.delta(), p.z_f(), Conditioning::Continuation, &t).unwrap();
        assert!((m - 3.0).abs() < 1e-9);
        let r = evaluate_design(&p, &rule, Conditioning::Continuation, &t).unwrap();
        assert_eq!(r.i2_min, r.i2_max);
        assert!((r.i2_mean - r.i2_max).abs() < 1e-9);
    }

    #[test]
    fn stage2_info_examples() {
        let rule = StageTwoRule::non_adaptive(0.025, 0.2, 0.0);
        assert!(stage2_info(1e6, 1.0, &rule).unwrap() < 1e-10);
        assert!(stage2_info(0.0, 1.0, &rule).is_err());
        let floored = StageTwoRule::non_adaptive(0.025, 0.2, 5.0);
        assert_eq!(stage2_info(3.0, 1.0, &floored).unwrap(), 5.0);
        // z1 = 1.4 at I1 = 1.18 is an estimate of 1.4/sqrt(1.18) ~ 1.289.
        let i2 = stage2_info(1.4, 1.18, &rule).unwrap();
        let th = 1.4 / sqrt(1.18);
        assert!((i2 - eta_f(0.025, 0.2).powi(2) / (th * th)).abs() < 1e-12);
    }

    #[test]
    fn null_power_bounded_by_alpha() {
        let t = tol();
        let p = scenario(2.0, 0.6);
        for fam in [FastTrackFamily::NonAdaptive, FastTrackFamily::InverseNormal, FastTrackFamily::Fisher] {
            let r = fast_track_rule(&p, fam, Futility::Binding, &t).unwrap();
            let s0 = overall_power(p.i1, &r, 0.0, p.z_f(), &t).unwrap();
            assert!(s0 <= p.alpha + 1e-9, "{fam:?} {s0}");
        }
    }
}
