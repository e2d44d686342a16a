//! Experiment presets: one JSON document describing a convergence run.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::conditions::{check_conditions, ConditionReport};
use super::model::{build_iid_family, build_perturbed_family, EpsRule, SequenceModel};
use super::runner::{covering_grid, run_clt, ConvergenceReport};
use crate::error::{Error, Result};
use crate::gfunction::GParams;
use crate::gheat::SolverConfig;
use crate::scenario::{GridMode, NestedEvalConfig, TestFunction};

pub const BUILTIN_NAMES: [&str; 3] = ["classical-cos", "g-ambiguous", "g-perturbed"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Iid,
    Perturbed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiKind {
    Cos,
    /// `min(max(x, 0), cap)`; the cap defaults to the right edge of the PDE domain.
    ReluClip,
    Const,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DpSpec {
    #[serde(default = "default_mode")]
    pub mode: GridMode,
    pub spacing: f64,
    /// Explicit grid; when absent the grid is widened to cover every reachable state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_range: Option<[f64; 2]>,
}

fn default_mode() -> GridMode {
    GridMode::GridInterp
}

fn default_levels() -> usize {
    2
}

fn default_quant() -> usize {
    4
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPreset {
    pub name: String,
    pub gp: GParams,
    pub family: Family,
    #[serde(default = "default_levels")]
    pub sigma_levels: usize,
    #[serde(default = "default_levels")]
    pub mean_levels: usize,
    #[serde(default = "EpsRule::default_zero")]
    pub eps_rule: EpsRule,
    pub phi: PhiKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_value: Option<f64>,
    pub n_schedule: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    pub dp: DpSpec,
    pub pde: SolverConfig,
    pub tolerance: f64,
    #[serde(default = "default_quant")]
    pub quant_levels: usize,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
}

impl EpsRule {
    fn default_zero() -> Self {
        EpsRule::Zero
    }
}

/// Result of [`ExperimentPreset::run`].
#[derive(Debug, Clone, Serialize)]
pub struct PresetOutcome {
    pub name: String,
    pub tolerance: f64,
    pub report: ConvergenceReport,
    pub conditions: ConditionReport,
}

impl PresetOutcome {
    pub fn final_error(&self) -> f64 {
        self.report.final_error().unwrap_or(f64::NAN)
    }

    pub fn passed(&self) -> bool {
        self.final_error() <= self.tolerance
    }

    /// Writes `<name>.csv` and `<name>.conditions.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        fs::create_dir_all(dir)?;
        let csv_path = dir.join(format!("{}.csv", self.name));
        self.report.write_csv(fs::File::create(&csv_path)?)?;
        let json_path = dir.join(format!("{}.conditions.json", self.name));
        fs::write(
            &json_path,
            serde_json::to_string_pretty(&self.conditions)? + "\n",
        )?;
        Ok((csv_path, json_path))
    }
}

impl ExperimentPreset {
    pub fn from_json(text: &str) -> Result<Self> {
        let preset: Self = serde_json::from_str(text)?;
        preset.validate()?;
        Ok(preset)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    /// One of the presets shipped with the crate, see [`BUILTIN_NAMES`].
    pub fn builtin(name: &str) -> Result<Self> {
        let text = match name {
            "classical-cos" => include_str!("../../presets/classical-cos.json"),
            "g-ambiguous" => include_str!("../../presets/g-ambiguous.json"),
            "g-perturbed" => include_str!("../../presets/g-perturbed.json"),
            other => {
                return Err(Error::InvalidParams(format!(
                    "unknown preset `{other}` (known: {})",
                    BUILTIN_NAMES.join(", ")
                )))
            }
        };
        Self::from_json(text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| {
            Err(Error::InvalidParams(format!(
                "preset `{}`: {msg}",
                self.name
            )))
        };
        if self.name.trim().is_empty() {
            return Err(Error::InvalidParams("preset name is empty".into()));
        }
        if !(self.tolerance >= 0.0) {
            return bad(format!(
                "tolerance must be non-negative, got {}",
                self.tolerance
            ));
        }
        if self.n_schedule.is_empty() || self.n_schedule.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!(
                "n_schedule must be strictly increasing, got {:?}",
                self.n_schedule
            ));
        }
        if self.n_schedule[0] == 0 {
            return bad("n_schedule entries must be positive".into());
        }
        if self.n_max.is_some_and(|m| m < self.horizon_needed()) {
            return bad(format!(
                "n_max is below the last scheduled n {}",
                self.horizon_needed()
            ));
        }
        if self.sigma_levels == 0 || self.mean_levels == 0 {
            return bad("sigma_levels and mean_levels must be at least 1".into());
        }
        if self.quant_levels < 2 {
            return bad(format!(
                "quant_levels must be at least 2, got {}",
                self.quant_levels
            ));
        }
        if !(self.dp.spacing > 0.0 && self.dp.spacing.is_finite()) {
            return bad(format!(
                "dp spacing must be positive, got {}",
                self.dp.spacing
            ));
        }
        if self.phi == PhiKind::Const && self.phi_value.is_none() {
            return bad("phi `const` needs phi_value".into());
        }
        if self.family == Family::Iid && self.eps_rule != EpsRule::Zero {
            return bad("eps_rule only applies to the perturbed family".into());
        }
        self.pde.clone().resolve_dt(&self.gp)?;
        Ok(())
    }

    fn horizon_needed(&self) -> usize {
        self.n_schedule.last().copied().unwrap_or(0)
    }

    pub fn horizon(&self) -> usize {
        self.n_max.unwrap_or_else(|| self.horizon_needed())
    }

    pub fn model(&self) -> Result<SequenceModel> {
        let base = build_iid_family(
            &self.gp,
            self.sigma_levels,
            self.mean_levels,
            self.horizon(),
        )?;
        match self.family {
            Family::Iid => Ok(base),
            Family::Perturbed => {
                build_perturbed_family(&base, &self.eps_rule.sequence(self.horizon()))
            }
        }
    }

    pub fn phi(&self) -> TestFunction {
        match self.phi {
            PhiKind::Cos => TestFunction::cos(),
            PhiKind::ReluClip => TestFunction::relu_clip(self.phi_value.unwrap_or(self.pde.x_hi)),
            PhiKind::Const => TestFunction::constant(self.phi_value.unwrap_or(0.0), 1),
        }
    }

    pub fn dp_config(&self, model: &SequenceModel) -> Result<NestedEvalConfig> {
        match self.dp.x_range {
            Some([lo, hi]) => {
                let cells = ((hi - lo) / self.dp.spacing).round();
                NestedEvalConfig::new(lo, hi, cells as usize + 1, self.dp.mode)
            }
            None => Ok(
                covering_grid(model, &self.n_schedule, self.dp.spacing)?.with_mode(self.dp.mode)
            ),
        }
    }

    pub fn run(&self) -> Result<PresetOutcome> {
        let model = self.model()?;
        let dp = self.dp_config(&model)?;
        let report = run_clt(&model, &self.phi(), &self.n_schedule, &dp, &self.pde)?;
        let conditions = check_conditions(&model, self.quant_levels)?;
        Ok(PresetOutcome {
            name: self.name.clone(),
            tolerance: self.tolerance,
            report,
            conditions,
        })
    }
}
