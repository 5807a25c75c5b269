//! Simulation of the stage-wise z-statistics, independent of the quadrature
//! path. Random numbers come from ChaCha8; each grid point of a sweep owns
//! the ChaCha stream equal to its index, so sweeps can run in any order or
//! in parallel and still give identical reports.

use alloc::vec::Vec;

use crate::combination::CombinationDesign;
use crate::design_space::DesignParams;
use crate::error::{Error, Result};
use crate::numerics::{norm_quantile, norm_quantile_upper};
use crate::power_engine::{stage2_info, StageTwoRule};
use libm::sqrt;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub n_reps: u64,
    pub seed: u64,
    /// True effect.
    pub theta: f64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_reps == 0 {
            return Err(Error::InvalidParameter {
                name: "n_reps",
                value: 0.0,
                reason: "must be positive",
            });
        }
        if !self.theta.is_finite() {
            return Err(Error::InvalidParameter {
                name: "theta",
                value: self.theta,
                reason: "must be finite",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimReport {
    pub n_reps: u64,
    pub theta: f64,
    pub p_cond_reg_hat: f64,
    pub p_cond_reg_se: f64,
    pub p_reject_hat: f64,
    pub p_reject_se: f64,
    /// Average second-stage information over all replications (zero for
    /// trials stopped at the interim).
    pub mean_i2_hat: f64,
    pub mean_i2_se: f64,
    pub max_i2_observed: f64,
    /// Smallest information drawn in the conditional-registration branch;
    /// infinite if that branch never occurred.
    pub min_upper_i2_observed: f64,
}

/// What gets simulated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SimDesign {
    /// Stop for `Z₁ < z_f`; otherwise run the adaptive rule.
    FastTrack { params: DesignParams, rule: StageTwoRule },
    /// Apply-or-waive strategy.
    Combination(CombinationDesign),
}

impl SimDesign {
    fn i1(&self) -> f64 {
        match self {
            SimDesign::FastTrack { params, .. } => params.i1,
            SimDesign::Combination(d) => d.params.i1,
        }
    }

    /// `(continued in upper branch, I₂, A(z₁))`; `I₂ = 0` means stopped.
    fn branch(&self, z1: f64) -> Result<(bool, f64, f64)> {
        match self {
            SimDesign::FastTrack { params, rule } => {
                if z1 >= params.z_f() {
                    Ok((true, stage2_info(z1, params.i1, rule)?, rule.cef().eval(z1)))
                } else {
                    Ok((false, 0.0, 0.0))
                }
            }
            SimDesign::Combination(d) => {
                let upper = z1 >= d.branch_boundary;
                Ok((upper, d.stage2_info(z1)?, d.cef.eval(z1)))
            }
        }
    }
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    // 53 random bits, centred in their cell so 0 and 1 never occur.
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
}

fn std_normal(rng: &mut ChaCha8Rng) -> f64 {
    norm_quantile(uniform(rng))
}

pub fn simulate(design: &SimDesign, cfg: &SimConfig) -> Result<SimReport> {
    simulate_stream(design, cfg, 0)
}

/// Like [`simulate`] but drawing from ChaCha stream `stream`.
pub fn simulate_stream(design: &SimDesign, cfg: &SimConfig, stream: u64) -> Result<SimReport> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream);
    let m1 = cfg.theta * sqrt(design.i1());
    let (mut n_cond, mut n_rej) = (0u64, 0u64);
    let (mut sum_i2, mut sum_i2_sq) = (0.0, 0.0);
    let mut max_i2 = 0.0f64;
    let mut min_upper = f64::INFINITY;
    for _ in 0..cfg.n_reps {
        // Two draws per replication keep replications aligned in the stream.
        let e1 = std_normal(&mut rng);
        let e2 = std_normal(&mut rng);
        let z1 = m1 + e1;
        let (upper, i2, a) = design.branch(z1)?;
        if upper {
            n_cond += 1;
            min_upper = min_upper.min(i2);
        }
        if i2 > 0.0 {
            let z2 = cfg.theta * sqrt(i2) + e2;
            if z2 >= norm_quantile_upper(a) {
                n_rej += 1;
            }
        }
        sum_i2 += i2;
        sum_i2_sq += i2 * i2;
        max_i2 = max_i2.max(i2);
    }
    let n = cfg.n_reps as f64;
    let prop = |k: u64| {
        let p = k as f64 / n;
        (p, sqrt(p * (1.0 - p) / n))
    };
    let (pc, pc_se) = prop(n_cond);
    let (pr, pr_se) = prop(n_rej);
    let mean = sum_i2 / n;
    let var = if cfg.n_reps > 1 {
        ((sum_i2_sq - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(SimReport {
        n_reps: cfg.n_reps,
        theta: cfg.theta,
        p_cond_reg_hat: pc,
        p_cond_reg_se: pc_se,
        p_reject_hat: pr,
        p_reject_se: pr_se,
        mean_i2_hat: mean,
        mean_i2_se: sqrt(var / n),
        max_i2_observed: max_i2,
        min_upper_i2_observed: min_upper,
    })
}

/// One report per design, point `k` using stream `k`.
pub fn sweep(designs: &[SimDesign], cfg: &SimConfig) -> Result<Vec<SimReport>> {
    designs
        .iter()
        .enumerate()
        .map(|(k, d)| simulate_stream(d, cfg, k as u64))
        .collect()
}
