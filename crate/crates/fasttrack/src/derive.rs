use fasttrack_core::design_space::{cond_registration_power, derive, Rounding};

use crate::error::Result;
use crate::output::fmt_num;
use crate::scenario::ScenarioFile;

pub const INFEASIBLE_WARNING: &str = "fast-track with required conditional registration infeasible";

#[derive(Debug, Clone, PartialEq)]
pub struct DeriveReport {
    pub entries: Vec<(&'static str, String)>,
    pub warnings: Vec<String>,
}

pub fn derive_report(s: &ScenarioFile, rounding: Rounding) -> Result<DeriveReport> {
    let p = s.params()?;
    let d = derive(&p);
    let mut e: Vec<(&'static str, String)> = vec![
        ("eta_f", fmt_num(d.eta_f)),
        ("delta", fmt_num(d.delta)),
        ("i_rel", fmt_num(d.i_rel)),
        ("i_delta", fmt_num(d.i_delta)),
        ("i1", fmt_num(p.i1)),
        ("t_rel_i1", fmt_num(d.t_rel_i1)),
        ("t_xi_i1", fmt_num(d.t_xi_i1)),
        ("z_f", fmt_num(d.z_f)),
        ("alpha_rel", fmt_num(d.alpha_rel)),
        ("alpha_f", fmt_num(d.alpha_f)),
        ("i1_min", fmt_num(d.i1_min)),
        ("i1_max", fmt_num(d.i1_max)),
        ("t_rel_i1_min", fmt_num(d.i1_min / d.i_rel)),
        ("t_rel_i1_max", fmt_num(d.i1_max / d.i_rel)),
        ("xi_min", fmt_num(d.xi_min)),
        ("p_cond_reg", fmt_num(cond_registration_power(&p, &d))),
    ];
    if let Some(c) = s.cost() {
        let n = |i: f64| {
            if i.is_finite() {
                c.group_size(i, rounding).to_string()
            } else {
                "inf".to_string()
            }
        };
        e.extend([
            ("n_rel", n(d.i_rel)),
            ("n_delta", n(d.i_delta)),
            ("n1", n(p.i1)),
            ("n1_min", n(d.i1_min)),
            ("n1_max", n(d.i1_max)),
        ]);
    }
    let mut warnings = Vec::new();
    if !d.fast_track_feasible() {
        warnings.push(format!(
            "{INFEASIBLE_WARNING} (xi = {} < xi_min = {})",
            fmt_num(p.xi),
            fmt_num(d.xi_min)
        ));
    } else if p.i1 <= d.i1_min {
        warnings.push("i1 does not exceed i1_min: power target unreachable".into());
    } else if p.i1 >= d.i1_max {
        warnings.push("i1 is at least i1_max: conditional registration is no easier than permanent".into());
    }
    Ok(DeriveReport { entries: e, warnings })
}
