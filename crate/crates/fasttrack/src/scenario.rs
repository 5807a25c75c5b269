//! Flat `key = value` scenario files. `#` starts a comment; unknown keys and
//! repeated keys are errors.

use std::path::Path;

use fasttrack_core::combination::CefFamily;
use fasttrack_core::design_space::{DesignParams, ExampleCost, InfoScale};
use fasttrack_core::power_engine::{FastTrackFamily, Futility};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    FastTrackBinding,
    FastTrackNonBinding,
    Combination,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyChoice {
    Constant,
    InverseNormal,
    Fisher,
    ZCombination,
    /// Every family valid for the mode; curves only.
    All,
}

/// First-stage information as given in the file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InfoSpec {
    Absolute(f64),
    Relative(f64, InfoScale),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioFile {
    pub alpha: f64,
    pub alpha_c: f64,
    pub beta: f64,
    pub delta_rel: f64,
    pub xi: f64,
    pub sigma: Option<f64>,
    pub info: Option<InfoSpec>,
    pub family: FamilyChoice,
    pub mode: Mode,
}

const KEYS: [&str; 11] = [
    "alpha", "alpha_c", "beta", "delta_rel", "xi", "sigma", "i1", "t_xi_i1", "t_rel_i1", "family", "mode",
];

impl ScenarioFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let err = |line: usize, msg: String| CliError::Scenario {
            path: origin.to_string(),
            line,
            msg,
        };
        let mut vals: [Option<(usize, &str)>; 11] = [None; 11];
        for (k, raw) in text.lines().enumerate() {
            let ln = k + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(err(ln, format!("expected `key = value`, got `{line}`")));
            };
            let (key, value) = (key.trim(), value.trim());
            let Some(slot) = KEYS.iter().position(|&k| k == key) else {
                return Err(err(ln, format!("unknown key `{key}`")));
            };
            if vals[slot].is_some() {
                return Err(err(ln, format!("key `{key}` given twice")));
            }
            if value.is_empty() {
                return Err(err(ln, format!("key `{key}` has no value")));
            }
            vals[slot] = Some((ln, value));
        }
        let get = |name: &str| vals[KEYS.iter().position(|&k| k == name).unwrap()];
        let number = |name: &str| -> Result<Option<f64>> {
            match get(name) {
                None => Ok(None),
                Some((ln, v)) => v
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .map(Some)
                    .ok_or_else(|| err(ln, format!("`{name}`: `{v}` is not a finite number"))),
            }
        };
        let required = |name: &str| -> Result<f64> {
            number(name)?.ok_or_else(|| err(0, format!("missing required key `{name}`")))
        };
        let alpha = required("alpha")?;
        let alpha_c = required("alpha_c")?;
        let beta = required("beta")?;
        let delta_rel = required("delta_rel")?;
        let xi = required("xi")?;
        let sigma = number("sigma")?;

        let mut info = None;
        for (name, mk) in [
            ("i1", InfoSpec::Absolute as fn(f64) -> InfoSpec),
            ("t_xi_i1", |v| InfoSpec::Relative(v, InfoScale::Xi)),
            ("t_rel_i1", |v| InfoSpec::Relative(v, InfoScale::Rel)),
        ] {
            if let Some(v) = number(name)? {
                if info.is_some() {
                    let ln = get(name).map_or(0, |(l, _)| l);
                    return Err(err(ln, "at most one of i1, t_xi_i1, t_rel_i1 may be given".into()));
                }
                info = Some(mk(v));
            }
        }

        let mode = match get("mode") {
            None => Mode::FastTrackBinding,
            Some((_, "fasttrack_binding")) => Mode::FastTrackBinding,
            Some((_, "fasttrack_nonbinding")) => Mode::FastTrackNonBinding,
            Some((_, "combination")) => Mode::Combination,
            Some((ln, v)) => return Err(err(ln, format!("unknown mode `{v}`"))),
        };
        let family = match get("family") {
            None => FamilyChoice::Constant,
            Some((_, "constant")) => FamilyChoice::Constant,
            Some((_, "inverse_normal")) => FamilyChoice::InverseNormal,
            Some((_, "fisher")) => FamilyChoice::Fisher,
            Some((_, "z_combination")) => FamilyChoice::ZCombination,
            Some((_, "all")) => FamilyChoice::All,
            Some((ln, v)) => return Err(err(ln, format!("unknown family `{v}`"))),
        };
        if family == FamilyChoice::ZCombination && mode != Mode::Combination {
            let ln = get("family").map_or(0, |(l, _)| l);
            return Err(err(ln, "family `z_combination` requires mode = combination".into()));
        }
        let s = ScenarioFile {
            alpha,
            alpha_c,
            beta,
            delta_rel,
            xi,
            sigma,
            info,
            family,
            mode,
        };
        // Validate the scalars with a placeholder information.
        s.params_with_i1(1.0)?;
        if let Some(sig) = sigma {
            ExampleCost::new(sig)?;
        }
        Ok(s)
    }

    pub fn params_with_i1(&self, i1: f64) -> Result<DesignParams> {
        Ok(DesignParams::new(self.alpha, self.alpha_c, self.beta, self.delta_rel, self.xi, i1)?)
    }

    /// Parameters at the file's own first-stage information.
    pub fn params(&self) -> Result<DesignParams> {
        let info = self
            .info
            .ok_or_else(|| CliError::Invalid("scenario needs exactly one of i1, t_xi_i1, t_rel_i1".into()))?;
        let p = match info {
            InfoSpec::Absolute(i1) => return self.params_with_i1(i1),
            InfoSpec::Relative(t, scale) => {
                DesignParams::with_relative_i1(self.alpha, self.alpha_c, self.beta, self.delta_rel, self.xi, t, scale)?
            }
        };
        Ok(p)
    }

    pub fn cost(&self) -> Option<ExampleCost> {
        self.sigma.map(|s| ExampleCost { sigma: s })
    }

    pub fn futility(&self) -> Futility {
        match self.mode {
            Mode::FastTrackNonBinding => Futility::NonBinding,
            _ => Futility::Binding,
        }
    }

    /// Families to evaluate, in a fixed order.
    pub fn fast_track_families(&self) -> Result<Vec<FastTrackFamily>> {
        Ok(match self.family {
            FamilyChoice::Constant => vec![FastTrackFamily::NonAdaptive],
            FamilyChoice::InverseNormal => vec![FastTrackFamily::InverseNormal],
            FamilyChoice::Fisher => vec![FastTrackFamily::Fisher],
            FamilyChoice::All => vec![
                FastTrackFamily::NonAdaptive,
                FastTrackFamily::InverseNormal,
                FastTrackFamily::Fisher,
            ],
            FamilyChoice::ZCombination => {
                return Err(CliError::Invalid("z_combination is only defined for mode = combination".into()))
            }
        })
    }

    pub fn combination_families(&self) -> Vec<CefFamily> {
        match self.family {
            FamilyChoice::Constant => vec![CefFamily::Constant],
            FamilyChoice::InverseNormal => vec![CefFamily::InverseNormal],
            FamilyChoice::Fisher => vec![CefFamily::Fisher],
            FamilyChoice::ZCombination => vec![CefFamily::ZCombination],
            FamilyChoice::All => CefFamily::ALL.to_vec(),
        }
    }
}

pub fn fast_track_label(f: FastTrackFamily) -> &'static str {
    match f {
        FastTrackFamily::NonAdaptive => "constant",
        FastTrackFamily::InverseNormal => "inverse_normal",
        FastTrackFamily::Fisher => "fisher",
    }
}
