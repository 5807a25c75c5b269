use rayon::prelude::*;

use fasttrack_core::combination::build_combination;
use fasttrack_core::montecarlo::{simulate_stream, SimConfig, SimDesign, SimReport};
use fasttrack_core::power_engine::fast_track_rule;
use fasttrack_core::Tolerances;

use crate::error::{CliError, Result};
use crate::output::fmt_num;
use crate::scenario::{FamilyChoice, Mode, ScenarioFile};

/// The single design a scenario file describes.
pub fn scenario_design(s: &ScenarioFile, tol: &Tolerances) -> Result<SimDesign> {
    if s.family == FamilyChoice::All {
        return Err(CliError::Invalid("simulation needs a single family, not `all`".into()));
    }
    let p = s.params()?;
    Ok(match s.mode {
        Mode::Combination => SimDesign::Combination(build_combination(&p, s.combination_families()[0], tol)?),
        _ => {
            let fam = s.fast_track_families()?[0];
            SimDesign::FastTrack {
                params: p,
                rule: fast_track_rule(&p, fam, s.futility(), tol)?,
            }
        }
    })
}

/// Reports under the null and under the assumed effect.
pub fn simulate_scenario(s: &ScenarioFile, n_reps: u64, seed: u64, tol: &Tolerances) -> Result<[SimReport; 2]> {
    let d = scenario_design(s, tol)?;
    let delta = s.params()?.delta();
    let thetas = [0.0, delta];
    let out: Result<Vec<SimReport>> = thetas
        .par_iter()
        .enumerate()
        .map(|(k, &theta)| Ok(simulate_stream(&d, &SimConfig { n_reps, seed, theta }, k as u64)?))
        .collect();
    let out = out?;
    Ok([out[0], out[1]])
}

/// Parallel counterpart of the core sweep: point `k` draws from stream `k`,
/// so the result equals the sequential one.
pub fn par_sweep(designs: &[SimDesign], cfg: &SimConfig) -> Result<Vec<SimReport>> {
    designs
        .par_iter()
        .enumerate()
        .map(|(k, d)| Ok(simulate_stream(d, cfg, k as u64)?))
        .collect()
}

pub fn report_header() -> Vec<String> {
    [
        "theta",
        "n_reps",
        "p_cond_reg",
        "p_cond_reg_se",
        "p_reject",
        "p_reject_se",
        "mean_i2",
        "mean_i2_se",
        "max_i2",
        "min_upper_i2",
    ]
    .map(String::from)
    .to_vec()
}

pub fn report_record(r: &SimReport) -> Vec<String> {
    vec![
        fmt_num(r.theta),
        r.n_reps.to_string(),
        fmt_num(r.p_cond_reg_hat),
        fmt_num(r.p_cond_reg_se),
        fmt_num(r.p_reject_hat),
        fmt_num(r.p_reject_se),
        fmt_num(r.mean_i2_hat),
        fmt_num(r.mean_i2_se),
        fmt_num(r.max_i2_observed),
        fmt_num(r.min_upper_i2_observed),
    ]
}
