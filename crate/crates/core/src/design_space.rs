//! Scenario parameters and the closed-form quantities derived from them:
//! noncentrality target, reference informations, the conditional
//! registration boundary `z_f`, its type I error levels and the admissible
//! range `[I_{1,min}, I_{1,max})` of pilot information.

use crate::error::{Error, Result};
use crate::numerics::{norm_quantile_upper, norm_sf};
use libm::{ceil, round, sqrt};

/// The five scenario scalars plus the first-stage information.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignParams {
    /// One-sided level for permanent registration.
    pub alpha: f64,
    /// One-sided level required for conditional registration.
    pub alpha_c: f64,
    /// Type II error; `1 - beta` is the power target.
    pub beta: f64,
    /// Minimal clinically relevant effect, in outcome units.
    pub delta_rel: f64,
    /// Effect ratio `delta / delta_rel`.
    pub xi: f64,
    /// First-stage information.
    pub i1: f64,
}

/// Which relative information scale a value is expressed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InfoScale {
    /// Relative to `I_rel` (power at `delta_rel`).
    Rel,
    /// Relative to `I_delta` (power at the assumed effect).
    Xi,
}

impl DesignParams {
    pub fn new(alpha: f64, alpha_c: f64, beta: f64, delta_rel: f64, xi: f64, i1: f64) -> Result<Self> {
        let p = Self {
            alpha,
            alpha_c,
            beta,
            delta_rel,
            xi,
            i1,
        };
        p.validate()?;
        Ok(p)
    }

    /// Builds parameters with `I₁` given on a relative scale.
    pub fn with_relative_i1(
        alpha: f64,
        alpha_c: f64,
        beta: f64,
        delta_rel: f64,
        xi: f64,
        t: f64,
        scale: InfoScale,
    ) -> Result<Self> {
        let mut p = Self::new(alpha, alpha_c, beta, delta_rel, xi, 1.0)?;
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "relative i1",
                value: t,
                reason: "must be positive",
            });
        }
        p.i1 = match scale {
            InfoScale::Rel => t * p.i_rel(),
            InfoScale::Xi => t * p.i_delta(),
        };
        Ok(p)
    }

    /// Same scenario with another first-stage information.
    pub fn with_i1(&self, i1: f64) -> Self {
        Self { i1, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, value, reason| {
            Err(Error::InvalidParameter {
                name,
                value,
                reason,
            })
        };
        if !(self.alpha > 0.0 && self.alpha < 0.5) {
            return bad("alpha", self.alpha, "must lie in (0, 0.5)");
        }
        if !(self.alpha_c > self.alpha && self.alpha_c < 0.5) {
            return bad("alpha_c", self.alpha_c, "must lie in (alpha, 0.5)");
        }
        if !(self.beta > 0.0 && self.beta < 0.5) {
            return bad("beta", self.beta, "must lie in (0, 0.5)");
        }
        if !(self.delta_rel > 0.0 && self.delta_rel.is_finite()) {
            return bad("delta_rel", self.delta_rel, "must be positive");
        }
        if !(self.xi >= 1.0 && self.xi.is_finite()) {
            return bad("xi", self.xi, "must be at least 1");
        }
        if !(self.i1 > 0.0 && self.i1.is_finite()) {
            return bad("i1", self.i1, "must be positive");
        }
        Ok(())
    }

    /// Assumed effect `delta = xi * delta_rel`.
    pub fn delta(&self) -> f64 {
        self.xi * self.delta_rel
    }

    pub fn eta_f(&self) -> f64 {
        eta_f(self.alpha, self.beta)
    }

    pub fn i_rel(&self) -> f64 {
        let e = self.eta_f();
        e * e / (self.delta_rel * self.delta_rel)
    }

    pub fn i_delta(&self) -> f64 {
        let e = self.eta_f();
        let d = self.delta();
        e * e / (d * d)
    }

    /// `I / I_delta`.
    pub fn t_xi(&self, info: f64) -> f64 {
        info / self.i_delta()
    }

    /// `I / I_rel`.
    pub fn t_rel(&self, info: f64) -> f64 {
        info / self.i_rel()
    }

    pub fn z_f(&self) -> f64 {
        z_f(self.i1, self.delta_rel, self.alpha_c)
    }

    /// Mean of `Z₁` under the assumed effect.
    pub fn z1_mean(&self) -> f64 {
        sqrt(self.i1) * self.delta()
    }
}

/// Everything that follows in closed form from a [`DesignParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedDesign {
    pub eta_f: f64,
    pub i_rel: f64,
    pub i_delta: f64,
    pub delta: f64,
    pub z_f: f64,
    pub alpha_rel: f64,
    pub alpha_f: f64,
    /// Infinite when `xi = 1` (the pilot power condition cannot be met).
    pub i1_min: f64,
    pub i1_max: f64,
    pub xi_min: f64,
    pub t_rel_i1: f64,
    pub t_xi_i1: f64,
}

impl DerivedDesign {
    /// Whether a fast-track with required conditional registration can reach
    /// the power target without the pilot information exceeding `I_{1,max}`.
    pub fn fast_track_feasible(&self) -> bool {
        self.i1_min < self.i1_max
    }
}

pub fn derive(params: &DesignParams) -> DerivedDesign {
    let eta = params.eta_f();
    let i_rel = params.i_rel();
    let i_delta = params.i_delta();
    let a_rel = alpha_rel(params.i1, params.delta_rel);
    DerivedDesign {
        eta_f: eta,
        i_rel,
        i_delta,
        delta: params.delta(),
        z_f: params.z_f(),
        alpha_rel: a_rel,
        alpha_f: a_rel.min(params.alpha_c),
        i1_min: i1_min(params).unwrap_or(f64::INFINITY),
        i1_max: i1_max(params.alpha, params.delta_rel),
        xi_min: xi_min(params.alpha, params.beta),
        t_rel_i1: params.i1 / i_rel,
        t_xi_i1: params.i1 / i_delta,
    }
}

/// `η_f = Φ⁻¹(1-β) + Φ⁻¹(1-α)`.
pub fn eta_f(alpha: f64, beta: f64) -> f64 {
    norm_quantile_upper(beta) + norm_quantile_upper(alpha)
}

/// Level at which `p₁ ≤ α_rel` is the same event as `θ̂₁ ≥ δ_rel`.
pub fn alpha_rel(i1: f64, delta_rel: f64) -> f64 {
    norm_sf(delta_rel * sqrt(i1.max(0.0)))
}

/// Conditional-registration boundary on the z-scale.
pub fn z_f(i1: f64, delta_rel: f64, alpha_c: f64) -> f64 {
    (sqrt(i1) * delta_rel).max(norm_quantile_upper(alpha_c))
}

/// Largest pilot information for which conditional registration is less
/// demanding than permanent registration.
pub fn i1_max(alpha: f64, delta_rel: f64) -> f64 {
    let z = norm_quantile_upper(alpha);
    z * z / (delta_rel * delta_rel)
}

/// Smallest pilot information with `P_δ(Z₁ ≥ z_f) ≥ 1 - β`.
pub fn i1_min(params: &DesignParams) -> Result<f64> {
    if !(params.xi > 1.0) {
        return Err(Error::Domain {
            what: "i1_min requires xi > 1",
            value: params.xi,
        });
    }
    let (t_rel, t_alpha_c) = i1_min_branches(params.alpha, params.alpha_c, params.beta, params.xi);
    Ok(t_rel.max(t_alpha_c) * params.i_rel())
}

/// The two terms of the `I_{1,min}` maximum on the `t_rel` scale: the first
/// from the relevance requirement, the second from `p₁ ≤ α_c`.
pub fn i1_min_branches(alpha: f64, alpha_c: f64, beta: f64, xi: f64) -> (f64, f64) {
    let eta = eta_f(alpha, beta);
    let zb = norm_quantile_upper(beta);
    let zc = norm_quantile_upper(alpha_c);
    let rel = if xi > 1.0 {
        let r = zb / ((xi - 1.0) * eta);
        r * r
    } else {
        f64::INFINITY
    };
    let c = (zc + zb) / (xi * eta);
    (rel, c * c)
}

/// Effect ratio below which `I_{1,min}` exceeds `I_{1,max}`.
pub fn xi_min(alpha: f64, beta: f64) -> f64 {
    1.0 + norm_quantile_upper(beta) / norm_quantile_upper(alpha)
}

/// `P_δ(Z₁ ≥ z_f)`, the probability of conditional registration.
pub fn cond_registration_power(params: &DesignParams, derived: &DerivedDesign) -> f64 {
    norm_sf(derived.z_f - sqrt(params.i1) * derived.delta)
}

/// How informations become per-group sample sizes for a balanced two-arm
/// comparison of normal means: `n = 2σ²I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExampleCost {
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Rounding {
    #[default]
    Ceiling,
    Nearest,
}

impl ExampleCost {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "sigma",
                value: sigma,
                reason: "must be positive",
            });
        }
        Ok(Self { sigma })
    }

    pub fn exact_group_size(&self, info: f64) -> f64 {
        2.0 * self.sigma * self.sigma * info
    }

    pub fn group_size(&self, info: f64, rounding: Rounding) -> u64 {
        let n = self.exact_group_size(info);
        // Guard against 137.0000000001 style float noise before rounding up.
        let n = match rounding {
            Rounding::Ceiling => ceil(n - 1e-9),
            Rounding::Nearest => round(n),
        };
        n.max(0.0) as u64
    }

    pub fn info_of(&self, n: f64) -> f64 {
        n / (2.0 * self.sigma * self.sigma)
    }
}
