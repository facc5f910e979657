//! Checks every preset value against the checked-in constants table.

use std::collections::BTreeMap;

use assurance_core::design::durability_floor;
use assurance_core::{presets, ModelParams, SafetySpec};
use serde_json::json;

use crate::commands::Outcome;
use crate::config::Preset;
use crate::error::{CliError, CliResult};

/// `preset,field,value,label` rows.
pub const CONSTANTS: &str = include_str!("../data/preset_constants.csv");

fn model_fields(p: &ModelParams) -> Vec<(String, f64)> {
    let xi = match p.safety {
        SafetySpec::Exponential { xi } => xi,
        _ => f64::NAN,
    };
    [
        ("n", f64::from(p.n)),
        ("pi", p.pi),
        ("lambda", p.lambda),
        ("alpha_l", p.alpha_l),
        ("alpha_h", p.alpha_h),
        ("xi", xi),
        ("s", p.s),
        ("w_bar", p.w_bar),
        ("k", p.k),
        ("rho", p.rho),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

/// Flattened numeric fields of a preset as the code defines it.
pub fn preset_fields(preset: Preset) -> Vec<(String, f64)> {
    let indexed = |name: &str, values: &[f64]| -> Vec<(String, f64)> {
        values.iter().enumerate().map(|(i, &v)| (format!("{name}[{i}]"), v)).collect()
    };
    match preset {
        Preset::Baseline => model_fields(&presets::baseline()),
        Preset::Whistleblowing05 => model_fields(&presets::whistleblowing(0.05)),
        Preset::Whistleblowing15 => model_fields(&presets::whistleblowing(0.15)),
        Preset::Whistleblowing30 => model_fields(&presets::whistleblowing(0.30)),
        Preset::OvertonBeta137 => {
            let p = presets::overton_prior();
            vec![("prior_a".into(), p.a), ("prior_b".into(), p.b)]
        }
        Preset::FiniteNBenchmark => {
            let p = presets::finite_n_benchmark();
            vec![
                ("n".into(), f64::from(p.n)),
                ("prior_a".into(), p.theta_prior.a),
                ("prior_b".into(), p.theta_prior.b),
                ("v_bar".into(), p.v_bar),
                ("s".into(), p.s),
                ("eta".into(), p.eta),
                ("sigma_m".into(), p.sigma_m),
            ]
        }
        Preset::Durable60 => {
            let o = presets::durable_60();
            let floor = durability_floor(&o, 100).map_or(f64::NAN, f64::from);
            vec![("omega".into(), o.omega), ("c_bar".into(), o.c_bar), ("floor".into(), floor)]
        }
        Preset::SafetySweep => indexed("xi", &presets::SAFETY_SWEEP_XI),
        Preset::AltSafety => presets::alt_safety()
            .into_iter()
            .flat_map(|(label, p)| {
                let fields: Vec<(&str, f64)> = match p.safety {
                    SafetySpec::Exponential { xi } => vec![("xi", xi)],
                    SafetySpec::Linear { slope } => vec![("slope", slope)],
                    SafetySpec::Step {
                        level_lo,
                        level_hi,
                        breakpoint,
                    } => vec![("level_lo", level_lo), ("level_hi", level_hi), ("breakpoint", breakpoint)],
                };
                fields.into_iter().map(move |(k, v)| (format!("{label}.{k}"), v))
            })
            .collect(),
        Preset::ParamSweep => {
            let mut out = indexed("xi", &presets::PARAM_SWEEP_XI);
            out.extend(indexed("alpha_h", &presets::PARAM_SWEEP_ALPHA_H));
            out.extend(indexed("lambda", &presets::PARAM_SWEEP_LAMBDA));
            out.push(("runs".into(), presets::param_sweep().len() as f64));
            out
        }
    }
}

struct Row {
    preset: String,
    field: String,
    value: f64,
    label: String,
}

fn parse_table() -> CliResult<Vec<Row>> {
    let mut r = csv::Reader::from_reader(CONSTANTS.as_bytes());
    r.records()
        .map(|rec| {
            let rec = rec?;
            let get = |i: usize| rec.get(i).unwrap_or_default().to_string();
            let value = get(2)
                .parse::<f64>()
                .map_err(|e| CliError::config(format!("constants table value `{}`: {e}", get(2))))?;
            Ok(Row {
                preset: get(0),
                field: get(1),
                value,
                label: get(3),
            })
        })
        .collect()
}

pub fn self_audit() -> CliResult<Outcome> {
    let rows = parse_table()?;
    let mut expected: BTreeMap<(String, String), &Row> = BTreeMap::new();
    for r in &rows {
        if expected.insert((r.preset.clone(), r.field.clone()), r).is_some() {
            return Err(CliError::config(format!("constants table repeats {}.{}", r.preset, r.field)));
        }
    }
    let mut checks = Vec::new();
    let mut failures = Vec::new();
    for preset in Preset::ALL {
        for (field, actual) in preset_fields(preset) {
            let key = (preset.name().to_string(), field.clone());
            match expected.remove(&key) {
                Some(row) => {
                    let ok = row.value.to_bits() == actual.to_bits();
                    if !ok {
                        failures.push(format!("{}.{field}: table {} vs preset {actual}", preset.name(), row.value));
                    }
                    checks.push(json!({
                        "preset": preset.name(), "field": field, "expected": row.value,
                        "actual": actual, "label": row.label, "ok": ok,
                    }));
                }
                None => failures.push(format!("{}.{field} = {actual} has no constants-table entry", preset.name())),
            }
        }
    }
    for (preset, field) in expected.into_keys() {
        failures.push(format!("constants table lists unknown field {preset}.{field}"));
    }
    if !failures.is_empty() {
        return Err(CliError::config(format!("self-audit failed: {}", failures.join("; "))));
    }
    Ok(Outcome {
        summary: json!({ "command": "self-audit", "checked": checks.len(), "checks": checks }),
        artifacts: Vec::new(),
    })
}
