//! Flat TOML configuration shared by all stages.
//!
//! ```toml
//! orientation_step_deg = 5.0
//! n_scales = 4
//! gamma = 50.0
//! gamma_merge = 5.0
//! alpha_mode = "inverse-mean-nn"
//! beta = -5.0
//! ```
//!
//! Missing keys keep their defaults; unknown keys are rejected.

use std::path::Path;

use serde::Deserialize;

use crate::blob::LigatureParams;
use crate::energy::AssignParams;
use crate::error::{Error, Result};
use crate::filter_bank::BankConfig;
use crate::merge::MergeParams;
use crate::pipeline::{Mode, PipelineParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaMode {
    #[default]
    InverseMeanNn,
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FlatConfig {
    orientation_step_deg: f64,
    n_scales: usize,
    aspect: f64,
    niblack_k: f64,
    niblack_window: Option<usize>,
    noise_floor: f64,
    baseline_mode: bool,
    gamma: f64,
    deviation_threshold_deg: f64,
    literal_deviation_cost: bool,
    gamma_merge: f64,
    anchor_d: Option<f64>,
    cap_r: Option<f64>,
    literal_e2: bool,
    alpha_mode: AlphaMode,
    alpha: Option<f64>,
    beta: f64,
    knn_k: usize,
    discard_percentile: f64,
}

impl Default for FlatConfig {
    fn default() -> Self {
        let b = BankConfig::default();
        let l = LigatureParams::default();
        let m = MergeParams::default();
        let a = AssignParams::default();
        FlatConfig {
            orientation_step_deg: b.orientation_step_deg,
            n_scales: b.n_scales,
            aspect: b.aspect,
            niblack_k: b.niblack_k,
            niblack_window: b.niblack_window,
            noise_floor: b.noise_floor,
            baseline_mode: b.baseline_mode,
            gamma: l.gamma,
            deviation_threshold_deg: l.deviation_threshold_deg,
            literal_deviation_cost: l.literal_deviation_cost,
            gamma_merge: m.gamma_merge,
            anchor_d: m.anchor_d,
            cap_r: m.cap_r,
            literal_e2: m.literal_e2,
            alpha_mode: AlphaMode::default(),
            alpha: None,
            beta: a.beta,
            knn_k: a.knn_k,
            discard_percentile: a.discard_percentile,
        }
    }
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Config(msg()))
    }
}

impl FlatConfig {
    fn into_params(self) -> Result<PipelineParams> {
        let bank = BankConfig {
            orientation_step_deg: self.orientation_step_deg,
            n_scales: self.n_scales,
            aspect: self.aspect,
            niblack_k: self.niblack_k,
            niblack_window: self.niblack_window,
            noise_floor: self.noise_floor,
            baseline_mode: false,
        };
        bank.validate()?;
        check(self.gamma > 0.0 && self.gamma.is_finite(), || {
            format!("gamma must be positive, got {}", self.gamma)
        })?;
        check((0.0..=90.0).contains(&self.deviation_threshold_deg), || {
            format!(
                "deviation_threshold_deg must be in [0, 90], got {}",
                self.deviation_threshold_deg
            )
        })?;
        check(self.gamma_merge > 0.0 && self.gamma_merge.is_finite(), || {
            format!("gamma_merge must be positive, got {}", self.gamma_merge)
        })?;
        for (name, v) in [("anchor_d", self.anchor_d), ("cap_r", self.cap_r)] {
            if let Some(v) = v {
                check(v > 0.0 && v.is_finite(), || format!("{name} must be positive, got {v}"))?;
            }
        }
        let alpha = match (self.alpha_mode, self.alpha) {
            (AlphaMode::InverseMeanNn, _) => None,
            (AlphaMode::Fixed, Some(a)) if a > 0.0 && a.is_finite() => Some(a),
            (AlphaMode::Fixed, _) => {
                return Err(Error::Config("alpha_mode = \"fixed\" needs a positive alpha".into()));
            }
        };
        check(self.beta.is_finite(), || "beta must be finite".into())?;
        check(self.knn_k >= 1, || "knn_k must be at least 1".into())?;
        check((0.0..=100.0).contains(&self.discard_percentile), || {
            format!(
                "discard_percentile must be in [0, 100], got {}",
                self.discard_percentile
            )
        })?;
        Ok(PipelineParams {
            bank,
            ligature: LigatureParams {
                gamma: self.gamma,
                deviation_threshold_deg: self.deviation_threshold_deg,
                literal_deviation_cost: self.literal_deviation_cost,
            },
            merge: MergeParams {
                gamma_merge: self.gamma_merge,
                anchor_d: self.anchor_d,
                cap_r: self.cap_r,
                literal_e2: self.literal_e2,
            },
            assign: AssignParams {
                alpha,
                beta: self.beta,
                knn_k: self.knn_k,
                discard_percentile: self.discard_percentile,
            },
            mode: if self.baseline_mode {
                Mode::SingleOrientedBaseline
            } else {
                Mode::MultiOriented
            },
        })
    }
}

pub fn params_from_toml(text: &str) -> Result<PipelineParams> {
    let flat: FlatConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    flat.into_params()
}

pub fn load_params(path: impl AsRef<Path>) -> Result<PipelineParams> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    params_from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}
