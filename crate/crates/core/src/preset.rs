//! Named problem presets.

use crate::error::{Error, Result};
use crate::model::{ModelParams, PopulationState};
use crate::series::{InitialValueProblem, DEFAULT_ORDER};

#[derive(Debug, Clone, PartialEq)]
pub struct CasePreset {
    pub name: &'static str,
    pub params: ModelParams,
    pub initial: PopulationState,
    pub default_t_end: f64,
    pub default_order: usize,
}

impl CasePreset {
    pub fn ivp(&self) -> InitialValueProblem {
        self.ivp_until(self.default_t_end).expect("preset horizons are positive")
    }

    pub fn ivp_until(&self, t_end: f64) -> Result<InitialValueProblem> {
        InitialValueProblem::new(self.params, self.initial, t_end)
    }
}

pub const PRESET_NAMES: [&str; 3] = ["case-I", "case-V", "decoupled"];

fn build(name: &'static str) -> Option<CasePreset> {
    let state = |x, y| PopulationState::new(x, y).expect("preset states are valid");
    let preset = match name {
        // a = b = d = 1, c = 0.1, x0 = 14, y0 = 18
        "case-I" => CasePreset {
            name,
            params: ModelParams::new(1.0, 1.0, 0.1, 1.0).ok()?,
            initial: state(14.0, 18.0),
            default_t_end: 10.0,
            default_order: DEFAULT_ORDER,
        },
        // a = b = c = d = 1, x0 = 3, y0 = 2. Order 5 is the order whose
        // phase curve visibly crosses itself on [0, 10].
        "case-V" => CasePreset {
            name,
            params: ModelParams::new(1.0, 1.0, 1.0, 1.0).ok()?,
            initial: state(3.0, 2.0),
            default_t_end: 10.0,
            default_order: 5,
        },
        "decoupled" => CasePreset {
            name,
            params: ModelParams::decoupled(1.0, 1.0).ok()?,
            initial: state(1.0, 1.0),
            default_t_end: 1.0,
            default_order: DEFAULT_ORDER,
        },
        _ => return None,
    };
    Some(preset)
}

pub fn preset(name: &str) -> Result<CasePreset> {
    PRESET_NAMES
        .iter()
        .find(|&&n| n == name)
        .and_then(|&n| build(n))
        .ok_or_else(|| Error::UnknownPreset {
            name: name.to_string(),
            available: PRESET_NAMES.iter().map(|s| s.to_string()).collect(),
        })
}

pub fn all_presets() -> Vec<CasePreset> {
    PRESET_NAMES.iter().filter_map(|&n| build(n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case_i() {
        let p = preset("case-I").unwrap();
        assert_eq!(p.params, ModelParams::new(1.0, 1.0, 0.1, 1.0).unwrap());
        assert_eq!(p.initial, PopulationState { x: 14.0, y: 18.0 });
    }

    #[test]
    fn case_v() {
        let p = preset("case-V").unwrap();
        assert_eq!(p.params, ModelParams::new(1.0, 1.0, 1.0, 1.0).unwrap());
        assert_eq!(p.initial, PopulationState { x: 3.0, y: 2.0 });
    }

    #[test]
    fn unknown_name_lists_the_registry() {
        let err = preset("case-II").unwrap_err();
        assert!(matches!(err, Error::UnknownPreset { .. }));
        let msg = err.to_string();
        for name in PRESET_NAMES {
            assert!(msg.contains(name), "{msg}");
        }
    }

    #[test]
    fn names_are_unique() {
        let all = all_presets();
        assert_eq!(all.len(), PRESET_NAMES.len());
        for (k, p) in all.iter().enumerate() {
            assert!(all[k + 1..].iter().all(|q| q.name != p.name));
        }
    }
}
