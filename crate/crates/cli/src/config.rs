//! Run configuration and calibration presets.

use std::path::{Path, PathBuf};

use assurance_core::compare::CompareParams;
use assurance_core::design::durability_floor;
use assurance_core::finite_n::FiniteNParams;
use assurance_core::{presets, BetaPrior, ModelParams, Objective, OppositionSpec, SafetySpec, SeedModel};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Solve,
    Design,
    ExAnte,
    Durable,
    Overton,
    Compare,
    FiniteN,
    ScalarCutoff,
    Replicate,
    SelfAudit,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Design => "design",
            Command::ExAnte => "ex-ante",
            Command::Durable => "durable",
            Command::Overton => "overton",
            Command::Compare => "compare",
            Command::FiniteN => "finite-n",
            Command::ScalarCutoff => "scalar-cutoff",
            Command::Replicate => "replicate",
            Command::SelfAudit => "self-audit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Emit {
    pub csv: bool,
    pub svg: bool,
}

impl Default for Emit {
    fn default() -> Self {
        Emit { csv: true, svg: false }
    }
}

/// Grid of comparison points: every combination of `e`, `pi` and `mu` around
/// `base`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSweep {
    pub base: CompareParams,
    pub e: Vec<f64>,
    pub pi: Vec<f64>,
    pub mu: Vec<f64>,
}

impl Default for CompareSweep {
    fn default() -> Self {
        CompareSweep {
            base: CompareParams {
                e: 1.0,
                alpha: 3.0,
                pi: 0.65,
                mu: 0.2,
                k: 0.01,
                safety: SafetySpec::Exponential { xi: 3.0 },
                n: 100,
            },
            e: (1..=30).map(|i| f64::from(i) / 10.0).collect(),
            pi: vec![0.2, 0.4, 0.6, 0.8, 1.0],
            mu: vec![0.0, 0.1, 0.2, 0.3, 0.5],
        }
    }
}

/// Everything one invocation needs. Loaded from JSON (`--config`) and then
/// overridden by command-line flags.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub preset: Option<String>,
    /// Inline model; replaces the preset's model.
    pub model: Option<ModelParams>,
    pub finite_n: Option<FiniteNParams>,
    pub compare: Option<CompareSweep>,
    pub prior: Option<BetaPrior>,
    pub objective: Option<Objective>,
    pub seed_model: Option<SeedModel>,
    pub opposition: Option<OppositionSpec>,
    /// Single threshold for `solve` and `scalar-cutoff`.
    #[serde(rename = "T")]
    pub t: Option<u32>,
    #[serde(rename = "T_range")]
    pub t_range: Option<[u32; 2]>,
    pub out_dir: Option<PathBuf>,
    pub emit: Emit,
    pub threads: Option<usize>,
    /// Seed for simulation checks.
    pub seed: u64,
    /// Exhibit id for `replicate`.
    pub figure: Option<String>,
    /// Durability floor for `finite-n`; derived from the opposition spec when absent.
    pub floor: Option<u32>,
    /// Also emit the reduced-form comparison curve in `finite-n`.
    pub reduced: bool,
    /// Draws for the finite-N simulation check (0 disables it).
    pub simulate: usize,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            context: format!("reading {}", path.display()),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
    }

    pub fn preset(&self) -> CliResult<Option<Preset>> {
        self.preset.as_deref().map(Preset::parse).transpose()
    }

    pub fn range_or(&self, n: u32) -> CliResult<std::ops::RangeInclusive<u32>> {
        let [lo, hi] = self.t_range.unwrap_or([2, n - 1]);
        if lo < 1 || hi >= n || lo > hi {
            return Err(CliError::config(format!(
                "T_range [{lo}, {hi}] must satisfy 1 <= lo <= hi <= {}",
                n - 1
            )));
        }
        Ok(lo..=hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Baseline,
    Whistleblowing05,
    Whistleblowing15,
    Whistleblowing30,
    OvertonBeta137,
    FiniteNBenchmark,
    Durable60,
    SafetySweep,
    AltSafety,
    ParamSweep,
}

impl Preset {
    pub const ALL: [Preset; 10] = [
        Preset::Baseline,
        Preset::Whistleblowing05,
        Preset::Whistleblowing15,
        Preset::Whistleblowing30,
        Preset::OvertonBeta137,
        Preset::FiniteNBenchmark,
        Preset::Durable60,
        Preset::SafetySweep,
        Preset::AltSafety,
        Preset::ParamSweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Baseline => "baseline",
            Preset::Whistleblowing05 => "whistleblowing_05",
            Preset::Whistleblowing15 => "whistleblowing_15",
            Preset::Whistleblowing30 => "whistleblowing_30",
            Preset::OvertonBeta137 => "overton_beta_13_7",
            Preset::FiniteNBenchmark => "finite_n_benchmark",
            Preset::Durable60 => "durable_60",
            Preset::SafetySweep => "safety_sweep",
            Preset::AltSafety => "alt_safety",
            Preset::ParamSweep => "param_sweep",
        }
    }

    pub fn parse(s: &str) -> CliResult<Self> {
        Preset::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Preset::ALL.iter().map(|p| p.name()).collect();
            CliError::config(format!("unknown preset `{s}` (expected one of {})", names.join(", ")))
        })
    }

    /// Model calibrations carried by this preset, labelled. `None` for the
    /// finite-N benchmark, which has no baseline-model counterpart.
    pub fn models(self) -> Option<Vec<Variant>> {
        let one = |label: &str, params: ModelParams| {
            Some(vec![Variant {
                label: label.to_string(),
                params,
            }])
        };
        match self {
            Preset::Baseline | Preset::OvertonBeta137 | Preset::Durable60 => one("baseline", presets::baseline()),
            Preset::Whistleblowing05 => one("pi_0.05", presets::whistleblowing(0.05)),
            Preset::Whistleblowing15 => one("pi_0.15", presets::whistleblowing(0.15)),
            Preset::Whistleblowing30 => one("pi_0.3", presets::whistleblowing(0.30)),
            Preset::FiniteNBenchmark => None,
            Preset::SafetySweep => Some(
                presets::SAFETY_SWEEP_XI
                    .iter()
                    .map(|&xi| Variant {
                        label: format!("xi_{xi}"),
                        params: ModelParams {
                            safety: SafetySpec::Exponential { xi },
                            ..presets::baseline()
                        },
                    })
                    .collect(),
            ),
            Preset::AltSafety => Some(
                presets::alt_safety()
                    .into_iter()
                    .map(|(label, params)| Variant {
                        label: label.to_string(),
                        params,
                    })
                    .collect(),
            ),
            Preset::ParamSweep => Some(
                presets::param_sweep()
                    .into_iter()
                    .map(|((xi, ah, lambda), params)| Variant {
                        label: format!("xi_{xi}_alphaH_{ah}_lambda_{lambda}"),
                        params,
                    })
                    .collect(),
            ),
        }
    }
}

/// One labelled calibration of the baseline model.
#[derive(Debug, Clone)]
pub struct Variant {
    pub label: String,
    pub params: ModelParams,
}

/// Model calibrations for `cfg`: the inline model if given, else the preset
/// (default `baseline`).
pub fn model_variants(cfg: &RunConfig) -> CliResult<Vec<Variant>> {
    let preset = cfg.preset()?;
    if let Some(model) = &cfg.model {
        if preset.is_some() {
            return Err(CliError::config("give either a preset or an inline model, not both"));
        }
        model.validate()?;
        return Ok(vec![Variant {
            label: "custom".into(),
            params: model.clone(),
        }]);
    }
    let preset = preset.unwrap_or(Preset::Baseline);
    preset.models().ok_or_else(|| {
        CliError::config(format!(
            "preset `{}` has no baseline-model calibration; use the finite-n or scalar-cutoff commands",
            preset.name()
        ))
    })
}

pub fn prior(cfg: &RunConfig) -> CliResult<BetaPrior> {
    let p = cfg.prior.unwrap_or_else(presets::overton_prior);
    p.validate()?;
    Ok(p)
}

pub fn opposition(cfg: &RunConfig) -> CliResult<OppositionSpec> {
    let o = cfg.opposition.clone().unwrap_or_else(presets::durable_60);
    o.validate()?;
    Ok(o)
}

pub fn seed_model(cfg: &RunConfig) -> CliResult<SeedModel> {
    let s = cfg.seed_model.clone().unwrap_or_default();
    s.validate()?;
    Ok(s)
}

/// Finite-N parameters and the durability floor (0 for none).
pub fn finite_n(cfg: &RunConfig) -> CliResult<(FiniteNParams, u32)> {
    let preset = cfg.preset()?;
    let params = match (&cfg.finite_n, preset) {
        (Some(_), Some(_)) => {
            return Err(CliError::config(
                "give either a preset or inline finite_n parameters, not both",
            ))
        }
        (Some(p), None) => p.clone(),
        (None, None | Some(Preset::FiniteNBenchmark | Preset::Durable60)) => presets::finite_n_benchmark(),
        (None, Some(other)) => {
            return Err(CliError::config(format!(
                "preset `{}` does not define the finite-N benchmark",
                other.name()
            )))
        }
    };
    params.validate()?;
    let floor = match (cfg.floor, preset) {
        (Some(f), _) => f,
        (None, Some(Preset::Durable60)) => durability_floor(&opposition(cfg)?, params.n)?,
        (None, _) => cfg
            .opposition
            .as_ref()
            .map(|o| durability_floor(o, params.n))
            .transpose()?
            .unwrap_or(0),
    };
    Ok((params, floor))
}

pub fn compare_sweep(cfg: &RunConfig) -> CliResult<CompareSweep> {
    if let Some(p) = cfg.preset()? {
        return Err(CliError::config(format!(
            "compare takes inline parameters; preset `{}` does not apply",
            p.name()
        )));
    }
    let sweep = cfg.compare.clone().unwrap_or_default();
    sweep.base.validate()?;
    if sweep.e.is_empty() || sweep.pi.is_empty() || sweep.mu.is_empty() {
        return Err(CliError::config("compare sweep grids must be nonempty"));
    }
    Ok(sweep)
}
