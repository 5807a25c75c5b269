//! Plot data: one row per (family, abscissa) with the requested statistic
//! on the relative-information scale.

use std::str::FromStr;

use rayon::prelude::*;

use fasttrack_core::combination::{branch_metrics, build_combination, CefFamily};
use fasttrack_core::design_space::{alpha_rel, derive, i1_max, i1_min, DesignParams, Rounding};
use fasttrack_core::power_engine::{evaluate_design, fast_track_rule, Conditioning, FastTrackFamily};
use fasttrack_core::{Error as CoreError, Tolerances};

use crate::error::{CliError, Result};
use crate::output::fmt_num;
use crate::scenario::{fast_track_label, Mode, ScenarioFile};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    AlphaRel,
    I1MinTrel,
    I1MinTxi,
    I2Min,
    I2Mean,
    I2Max,
    TotalMean,
    TotalMax,
    I2Const,
    ComboPanel,
}

impl FromStr for CurveKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "alpha_rel" => CurveKind::AlphaRel,
            "i1_min_trel" => CurveKind::I1MinTrel,
            "i1_min_txi" => CurveKind::I1MinTxi,
            "i2_min" => CurveKind::I2Min,
            "i2_mean" => CurveKind::I2Mean,
            "i2_max" => CurveKind::I2Max,
            "total_mean" => CurveKind::TotalMean,
            "total_max" => CurveKind::TotalMax,
            "i2_const" => CurveKind::I2Const,
            "combo_panel" => CurveKind::ComboPanel,
            _ => return Err(CliError::Invalid(format!("unknown curve kind `{s}`"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub family: &'static str,
    pub x: f64,
    pub values: Vec<f64>,
    /// Integer per-group sizes for the information-valued columns.
    pub n: Vec<Option<u64>>,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub abscissa: &'static str,
    pub columns: Vec<&'static str>,
    /// Which of `columns` are informations (and get sample-size columns).
    pub info_columns: Vec<bool>,
    pub rows: Vec<CurveRow>,
}

#[derive(Debug, Clone, Copy)]
pub struct CurveOptions {
    pub step: f64,
    pub conditioning: Conditioning,
    pub rounding: Rounding,
    pub tol: Tolerances,
}

impl Default for CurveOptions {
    fn default() -> Self {
        CurveOptions {
            step: 0.002,
            conditioning: Conditioning::default(),
            rounding: Rounding::default(),
            tol: Tolerances::default(),
        }
    }
}

/// `start, start + step, …` up to and including `end` (within rounding).
fn grid(start: f64, end: f64, step: f64) -> Vec<f64> {
    let n = ((end - start) / step + 1e-9).floor() as i64;
    (0..=n.max(-1)).map(|k| start + k as f64 * step).collect()
}

enum Fam {
    Fast(FastTrackFamily),
    Combo(CefFamily),
}

fn families(s: &ScenarioFile) -> Result<Vec<Fam>> {
    Ok(match s.mode {
        Mode::Combination => s.combination_families().into_iter().map(Fam::Combo).collect(),
        _ => s.fast_track_families()?.into_iter().map(Fam::Fast).collect(),
    })
}

pub fn build_curve(kind: CurveKind, s: &ScenarioFile, opt: &CurveOptions) -> Result<Curve> {
    if !(opt.step > 0.0 && opt.step.is_finite()) {
        return Err(CliError::Invalid(format!("grid step must be positive, got {}", opt.step)));
    }
    let base = s.params_with_i1(1.0)?;
    match kind {
        CurveKind::AlphaRel => {
            let rows = grid(0.0, 1.0, opt.step)
                .into_iter()
                .map(|t| {
                    let a = alpha_rel(t * base.i_rel(), base.delta_rel);
                    CurveRow {
                        family: "-",
                        x: t,
                        values: vec![a, a.min(base.alpha_c)],
                        n: vec![],
                        feasible: true,
                    }
                })
                .collect();
            Ok(Curve {
                abscissa: "t_rel_i1",
                columns: vec!["alpha_rel", "alpha_f"],
                info_columns: vec![false, false],
                rows,
            })
        }
        CurveKind::I1MinTrel | CurveKind::I1MinTxi => {
            let xi_grid = grid(1.0, 3.0, opt.step);
            let mut rows = Vec::with_capacity(xi_grid.len());
            for xi in xi_grid {
                let p = s.params_with_i1(1.0).map(|p| DesignParams { xi, ..p })?;
                let (lo, hi) = (i1_min(&p).unwrap_or(f64::INFINITY), i1_max(p.alpha, p.delta_rel));
                let scale = if kind == CurveKind::I1MinTrel { p.i_rel() } else { p.i_delta() };
                rows.push(CurveRow {
                    family: "-",
                    x: xi,
                    values: vec![lo / scale, hi / scale],
                    n: sizes(s, &[lo, hi], opt),
                    feasible: lo < hi,
                });
            }
            Ok(Curve {
                abscissa: "xi",
                columns: vec!["i1_min", "i1_max"],
                info_columns: vec![true, true],
                rows,
            })
        }
        _ => design_curve(kind, s, opt),
    }
}

fn sizes(s: &ScenarioFile, infos: &[f64], opt: &CurveOptions) -> Vec<Option<u64>> {
    match s.cost() {
        Some(c) => infos
            .iter()
            .map(|&i| i.is_finite().then(|| c.group_size(i, opt.rounding)))
            .collect(),
        None => vec![],
    }
}

fn design_curve(kind: CurveKind, s: &ScenarioFile, opt: &CurveOptions) -> Result<Curve> {
    let base = s.params_with_i1(1.0)?;
    let combo = s.mode == Mode::Combination;
    if matches!(kind, CurveKind::I2Const | CurveKind::ComboPanel) && !combo {
        return Err(CliError::Invalid("this curve kind requires mode = combination".into()));
    }
    let columns: Vec<&'static str> = match kind {
        CurveKind::I2Min => vec!["i2_min"],
        CurveKind::I2Mean => vec!["i2_mean"],
        CurveKind::I2Max => vec!["i2_max"],
        CurveKind::TotalMean => vec!["total_mean"],
        CurveKind::TotalMax => vec!["total_max"],
        CurveKind::I2Const => vec!["i2_const"],
        CurveKind::ComboPanel => vec!["i2_const", "i2_min", "i2_max", "i2_mean", "p_cond_reg"],
        _ => unreachable!(),
    };
    let info_columns: Vec<bool> = columns.iter().map(|c| *c != "p_cond_reg").collect();
    let t_end = base.t_xi(i1_max(base.alpha, base.delta_rel));
    let ts = grid(opt.step, t_end, opt.step);
    let fams = families(s)?;
    let jobs: Vec<(usize, f64)> = (0..fams.len()).flat_map(|f| ts.iter().map(move |&t| (f, t))).collect();
    let id = base.i_delta();
    let rows: Result<Vec<CurveRow>> = jobs
        .par_iter()
        .map(|&(f, t)| {
            let p = base.with_i1(t * id);
            let (label, vals) = match fams[f] {
                Fam::Fast(fam) => (fast_track_label(fam), fast_point(kind, &p, fam, s, opt)?),
                Fam::Combo(fam) => (fam.label(), combo_point(kind, &p, fam, opt)?),
            };
            let feasible = vals.is_some();
            let infos: Vec<f64> = match &vals {
                Some(v) => v.clone(),
                None => vec![f64::NAN; columns.len()],
            };
            let n = match s.cost() {
                Some(c) => infos
                    .iter()
                    .zip(&info_columns)
                    .filter(|(_, &is)| is)
                    .map(|(&i, _)| i.is_finite().then(|| c.group_size(i, opt.rounding)))
                    .collect(),
                None => vec![],
            };
            let values = infos
                .iter()
                .zip(&info_columns)
                .map(|(&v, &is)| if is { v / id } else { v })
                .collect();
            Ok(CurveRow {
                family: label,
                x: t,
                values,
                n,
                feasible,
            })
        })
        .collect();
    Ok(Curve {
        abscissa: "t_xi_i1",
        columns,
        info_columns,
        rows: rows?,
    })
}

/// Informations for one grid point, or `None` where the power target
/// cannot be met.
fn fast_point(
    kind: CurveKind,
    p: &DesignParams,
    fam: FastTrackFamily,
    s: &ScenarioFile,
    opt: &CurveOptions,
) -> Result<Option<Vec<f64>>> {
    if p.i1 <= derive(p).i1_min {
        return Ok(None);
    }
    let rule = match fast_track_rule(p, fam, s.futility(), &opt.tol) {
        Ok(r) => r,
        Err(CoreError::Infeasible { .. }) => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let r = evaluate_design(p, &rule, opt.conditioning, &opt.tol)?;
    let v = match kind {
        CurveKind::I2Min => r.i2_min,
        CurveKind::I2Mean => r.i2_mean,
        CurveKind::I2Max => r.i2_max,
        CurveKind::TotalMean => r.total_mean,
        CurveKind::TotalMax => r.total_max,
        _ => unreachable!(),
    };
    Ok(Some(vec![v]))
}

fn combo_point(kind: CurveKind, p: &DesignParams, fam: CefFamily, opt: &CurveOptions) -> Result<Option<Vec<f64>>> {
    let d = build_combination(p, fam, &opt.tol)?;
    let m = branch_metrics(&d, &opt.tol)?;
    Ok(Some(match kind {
        CurveKind::I2Min => vec![d.i2_min],
        CurveKind::I2Mean => vec![m.e_i2_both],
        CurveKind::I2Max => vec![m.max_i2_both],
        CurveKind::TotalMean => vec![p.i1 + m.e_i2_both],
        CurveKind::TotalMax => vec![p.i1 + m.max_i2_both],
        CurveKind::I2Const => vec![d.i2_const],
        CurveKind::ComboPanel => vec![d.i2_const, d.i2_min, m.max_i2_both, m.e_i2_both, m.p_upper],
        _ => unreachable!(),
    }))
}

impl Curve {
    pub fn header(&self, with_n: bool) -> Vec<String> {
        let mut h = vec!["family".to_string(), self.abscissa.to_string()];
        h.extend(self.columns.iter().map(|c| c.to_string()));
        if with_n {
            for (c, &is) in self.columns.iter().zip(&self.info_columns) {
                if is {
                    h.push(format!("n_{c}"));
                }
            }
        }
        h.push("feasible".into());
        h
    }

    pub fn records(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                let mut rec = vec![r.family.to_string(), fmt_num(r.x)];
                rec.extend(r.values.iter().map(|&v| fmt_num(v)));
                for &n in &r.n {
                    rec.push(n.map_or_else(|| "nan".into(), |n| n.to_string()));
                }
                rec.push(if r.feasible { "true" } else { "infeasible" }.into());
                rec
            })
            .collect()
    }

    pub fn has_sizes(&self) -> bool {
        self.rows.first().is_some_and(|r| !r.n.is_empty())
    }
}
