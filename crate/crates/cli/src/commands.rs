//! One function per CLI command. Each returns a JSON summary plus the files
//! to write; nothing here touches the filesystem.

use assurance_core::compare::{
    assurance_interval, cascade_min_base, cascade_min_base_general, classify_region, full_participation_k_max,
    region_row, risk_dominance_thresholds, CompareParams, Region,
};
use assurance_core::design::{psi_conditional, sigma_coordination};
use assurance_core::equilibrium::type_shares;
use assurance_core::finite_n::{
    comparative_statics, finite_n_curve, psi_reduced_form, reduced_form_curve, scalar_cutoff, solve_profile,
    FiniteNCurve, FiniteNParams, ReducedFormParams,
};
use assurance_core::overton::overton_curve;
use assurance_core::{
    enumerate_fixed_points, high_equilibrium, optimize_threshold, DesignCurve, Objective, SafetySpec,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::{Beta, Distribution, StandardNormal};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{self, Command, RunConfig};
use crate::error::{CliError, CliResult};
use crate::svg::{Chart, Series};
use crate::table;

/// A file to write under the output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub summary: Value,
    pub artifacts: Vec<Artifact>,
}

/// Collects artifacts according to the emit flags.
pub(crate) struct Files<'a> {
    cfg: &'a RunConfig,
    pub(crate) list: Vec<Artifact>,
}

impl<'a> Files<'a> {
    pub(crate) fn new(cfg: &'a RunConfig) -> Self {
        Files { cfg, list: Vec::new() }
    }

    /// Adds `stem.csv` (and `stem.svg` from `chart` when enabled); returns
    /// the CSV name if written.
    pub(crate) fn add(&mut self, stem: &str, csv: CliResult<String>, chart: impl FnOnce() -> Chart) -> CliResult<Option<String>> {
        let csv = csv?;
        let mut written = None;
        if self.cfg.emit.csv {
            let name = format!("{stem}.csv");
            self.list.push(Artifact {
                name: name.clone(),
                contents: csv,
            });
            written = Some(name);
        }
        if self.cfg.emit.svg {
            self.list.push(Artifact {
                name: format!("{stem}.svg"),
                contents: chart().render(),
            });
        }
        Ok(written)
    }
}

pub fn run(cmd: Command, cfg: &RunConfig) -> CliResult<Outcome> {
    match cmd {
        Command::Solve => solve(cfg),
        Command::Design => {
            let objective = cfg.objective.clone().unwrap_or(Objective::Conditional);
            design(cfg, "design", &objective)
        }
        Command::ExAnte => {
            let objective = Objective::ExAnte {
                seed: config::seed_model(cfg)?,
            };
            design(cfg, "ex_ante", &objective)
        }
        Command::Durable => {
            let objective = Objective::Durable {
                opposition: config::opposition(cfg)?,
            };
            let cfg = RunConfig {
                preset: cfg.preset.clone().or(Some("durable_60".into())).filter(|_| cfg.model.is_none()),
                ..cfg.clone()
            };
            design(&cfg, "durable", &objective)
        }
        Command::Overton => overton(cfg),
        Command::Compare => compare(cfg),
        Command::FiniteN => finite_n(cfg),
        Command::ScalarCutoff => scalar(cfg),
        Command::Replicate => crate::replicate::replicate(cfg),
        Command::SelfAudit => crate::audit::self_audit(),
    }
}

fn required_t(cfg: &RunConfig, cmd: &str) -> CliResult<u32> {
    cfg.t
        .ok_or_else(|| CliError::config(format!("{cmd} needs a threshold (--T)")))
}

fn solve(cfg: &RunConfig) -> CliResult<Outcome> {
    let t = required_t(cfg, "solve")?;
    let seed = config::seed_model(cfg)?;
    let mut results = Vec::new();
    for v in config::model_variants(cfg)? {
        let p = &v.params;
        let th = p.threshold(t)?;
        let high = high_equilibrium(th, p)?;
        let point = psi_conditional(t, p)?;
        let (share_low, share_high) = type_shares(high.q, th, p)?;
        let fixed_points = enumerate_fixed_points(th, p)?;
        let sigma = sigma_coordination(t, &seed, p);
        results.push(json!({
            "label": v.label,
            "T": t,
            "tau": th.tau(),
            "q_high": high.q,
            "iterations": high.iterations,
            "residual": high.residual,
            "success_prob": point.success_prob,
            "delta": point.delta,
            "psi_H": point.value,
            "share_low": share_low,
            "share_high": share_high,
            "fixed_points": fixed_points,
            "sigma": sigma.as_ref().ok(),
            "sigma_error": sigma.err().map(|e| e.to_string()),
        }));
    }
    Ok(Outcome {
        summary: json!({ "command": "solve", "preset": cfg.preset, "results": results }),
        artifacts: Vec::new(),
    })
}

pub(crate) fn design_chart(title: &str, curves: &[(&str, &DesignCurve)]) -> Chart {
    Chart {
        title: title.to_string(),
        x_label: "threshold T".into(),
        y_label: "objective".into(),
        series: curves
            .iter()
            .map(|(label, c)| Series {
                label: label.to_string(),
                points: c.values().map(|(t, v)| (f64::from(t), v)).collect(),
            })
            .collect(),
    }
}

fn failed_ts<'a>(errors: impl Iterator<Item = (u32, Option<&'a String>)>) -> Vec<u32> {
    errors.filter(|(_, e)| e.is_some()).map(|(t, _)| t).collect()
}

pub(crate) fn design_summary(label: &str, curve: &DesignCurve, n: u32, file: Option<String>) -> Value {
    let mut v = json!({
        "label": label,
        "objective": curve.objective,
        "argmax_T": curve.argmax_t,
        "argmax_tau": curve.argmax_t.map(|t| f64::from(t) / f64::from(n)),
        "max_value": curve.max_value,
        "partial": curve.partial,
        "failed_T": failed_ts(curve.entries.iter().map(|e| (e.t, e.error.as_ref()))),
    });
    if let Some(f) = file {
        v["file"] = json!(f);
    }
    v
}

fn all_failed(label: &str, what: &str, first_error: Option<&String>) -> CliError {
    CliError::Solver(format!(
        "{what} failed at every threshold for `{label}`: {}",
        first_error.map_or("no thresholds evaluated", |s| s.as_str())
    ))
}

fn design(cfg: &RunConfig, stem: &str, objective: &Objective) -> CliResult<Outcome> {
    let mut files = Files::new(cfg);
    let mut results = Vec::new();
    for v in config::model_variants(cfg)? {
        let range = cfg.range_or(v.params.n)?;
        let curve = optimize_threshold(objective, &v.params, range)?;
        if curve.argmax_t.is_none() {
            return Err(all_failed(&v.label, objective.name(), curve.entries.iter().find_map(|e| e.error.as_ref())));
        }
        let name = format!("{stem}_{}", v.label);
        let file = files.add(&name, table::design_csv(&curve, v.params.n), || {
            design_chart(&format!("{} objective, {}", objective.name(), v.label), &[(&v.label, &curve)])
        })?;
        results.push(design_summary(&v.label, &curve, v.params.n, file));
    }
    Ok(Outcome {
        summary: json!({ "command": stem, "preset": cfg.preset, "objective": objective, "results": results }),
        artifacts: files.list,
    })
}

fn overton(cfg: &RunConfig) -> CliResult<Outcome> {
    let prior = config::prior(cfg)?;
    let cfg = RunConfig {
        preset: cfg.preset.clone().or(Some("overton_beta_13_7".into())).filter(|_| cfg.model.is_none()),
        ..cfg.clone()
    };
    let mut files = Files::new(&cfg);
    let mut results = Vec::new();
    for v in config::model_variants(&cfg)? {
        let range = cfg.range_or(v.params.n)?;
        let curve = overton_curve(&prior, &v.params, range)?;
        if curve.argmax_t.is_none() {
            return Err(all_failed(&v.label, "overton", curve.entries.iter().find_map(|e| e.error.as_ref())));
        }
        let shifts: Vec<f64> = curve.entries.iter().filter_map(|e| e.shift.map(|s| s.delta_success)).collect();
        let monotone = shifts.windows(2).all(|w| w[1] > w[0]);
        let file = files.add(&format!("overton_{}", v.label), table::overton_csv(&curve), || Chart {
            title: format!("Overton objective, {}", v.label),
            x_label: "threshold T".into(),
            y_label: "psi_O".into(),
            series: vec![Series {
                label: v.label.clone(),
                points: curve
                    .entries
                    .iter()
                    .filter_map(|e| e.shift.map(|s| (f64::from(e.t), s.psi())))
                    .collect(),
            }],
        })?;
        results.push(json!({
            "label": v.label,
            "argmax_T": curve.argmax_t,
            "max_value": curve.max_value,
            "partial": curve.partial,
            "failed_T": failed_ts(curve.entries.iter().map(|e| (e.t, e.error.as_ref()))),
            "delta_pi_increasing": monotone,
            "file": file,
        }));
    }
    Ok(Outcome {
        summary: json!({ "command": "overton", "preset": cfg.preset, "prior": prior, "results": results }),
        artifacts: files.list,
    })
}

fn compare(cfg: &RunConfig) -> CliResult<Outcome> {
    let sweep = config::compare_sweep(cfg)?;
    let mut points = Vec::new();
    for &e in &sweep.e {
        for &pi in &sweep.pi {
            for &mu in &sweep.mu {
                points.push(CompareParams { e, pi, mu, ..sweep.base });
            }
        }
    }
    let rows = points.par_iter().map(region_row).collect::<Result<Vec<_>, _>>()?;
    let mut counts = [0usize; 3];
    for r in &rows {
        counts[match r.region {
            Region::CascadeConnected => 0,
            Region::CoordinationGap => 1,
            Region::FundamentallyBlocked => 2,
        }] += 1;
    }
    let b = &sweep.base;
    let min_base = match b.safety {
        SafetySpec::Exponential { xi } => Some(cascade_min_base(xi, b.alpha, b.e)?),
        other => cascade_min_base_general(&other, b.alpha, b.e)?,
    };
    let mut files = Files::new(cfg);
    let file = files.add("compare_regions", table::region_csv(&rows), || Chart {
        title: format!("survey threshold p_S at alpha = {}", b.alpha),
        x_label: "expressive benefit e".into(),
        y_label: "p_S".into(),
        series: sweep
            .pi
            .iter()
            .map(|&pi| Series {
                label: format!("pi {pi}, mu {}", b.mu),
                points: rows
                    .iter()
                    .filter(|r| r.pi == pi && r.mu == b.mu)
                    .filter_map(|r| r.p_s.map(|p| (r.e, p)))
                    .collect(),
            })
            .collect(),
    })?;
    let summary = json!({
        "command": "compare",
        "base": {
            "params": b,
            "region": classify_region(b)?.as_str(),
            "risk_dominance": risk_dominance_thresholds(b).ok(),
            "k_max": full_participation_k_max(b)?,
            "cascade_min_base": min_base,
            "assurance_interval": match assurance_interval(b) {
                Ok(iv) => json!(iv),
                Err(e) => json!({ "error": e.to_string() }),
            },
        },
        "sweep_points": rows.len(),
        "region_counts": {
            "cascade_connected": counts[0],
            "coordination_gap": counts[1],
            "fundamentally_blocked": counts[2],
        },
        "file": file,
    });
    Ok(Outcome {
        summary,
        artifacts: files.list,
    })
}

pub(crate) fn finite_n_chart(title: &str, curves: &[(&str, &FiniteNCurve)]) -> Chart {
    Chart {
        title: title.to_string(),
        x_label: "threshold T".into(),
        y_label: "objective".into(),
        series: curves
            .iter()
            .map(|(label, c)| Series {
                label: label.to_string(),
                points: c
                    .entries
                    .iter()
                    .filter_map(|e| e.point.map(|p| (f64::from(e.t), p.value)))
                    .collect(),
            })
            .collect(),
    }
}

fn finite_n_summary(curve: &FiniteNCurve, file: Option<String>) -> Value {
    json!({
        "objective": curve.objective,
        "argmax_T": curve.argmax_t,
        "max_value": curve.max_value,
        "partial": curve.partial,
        "failed_T": failed_ts(curve.entries.iter().map(|e| (e.t, e.error.as_ref()))),
        "file": file,
    })
}

/// Simulated `P(M >= T)`: draw `theta` from the prior, then each agent is
/// supportive with probability `theta`, sees signal `theta + sigma eps`, and
/// signs when their type clears the solved cutoff. Chunked with fixed seeds
/// so the estimate does not depend on the thread count.
pub fn simulate_success(t: u32, draws: usize, seed: u64, p: &FiniteNParams) -> CliResult<(f64, f64)> {
    const CHUNKS: usize = 100;
    let profile = solve_profile(t, p)?;
    let prior = Beta::new(p.theta_prior.a, p.theta_prior.b).map_err(|e| CliError::config(e.to_string()))?;
    let per = draws.div_ceil(CHUNKS);
    let hits: usize = (0..CHUNKS)
        .into_par_iter()
        .map(|c| {
            let mut rng = StdRng::seed_from_u64(seed ^ (c as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
            (0..per)
                .filter(|_| {
                    let theta: f64 = prior.sample(&mut rng);
                    let mut m = 0;
                    for _ in 0..p.n {
                        if rng.gen::<f64>() >= theta {
                            continue;
                        }
                        let eps: f64 = rng.sample(StandardNormal);
                        let x: f64 = rng.sample(StandardNormal);
                        if x >= profile.cutoff_at(theta + p.sigma_m * eps) {
                            m += 1;
                        }
                    }
                    m >= t
                })
                .count()
        })
        .sum();
    let total = (per * CHUNKS) as f64;
    let mean = hits as f64 / total;
    Ok((mean, (mean * (1.0 - mean) / total).sqrt()))
}

fn finite_n(cfg: &RunConfig) -> CliResult<Outcome> {
    let (p, floor) = config::finite_n(cfg)?;
    let range = cfg.range_or(p.n)?;
    let mut files = Files::new(cfg);
    let mut results = Vec::new();
    let plain = finite_n_curve(&p, range.clone(), 0)?;
    let Some(best) = plain.argmax_t else {
        return Err(all_failed("finite_n", "finite-N objective", plain.entries.iter().find_map(|e| e.error.as_ref())));
    };
    let file = files.add("finite_n", table::finite_n_csv(&plain), || finite_n_chart("finite-N objective", &[("finite_n", &plain)]))?;
    results.push(finite_n_summary(&plain, file));
    if floor > 0 {
        let durable = finite_n_curve(&p, range.clone(), floor)?;
        let file = files.add("finite_n_durable", table::finite_n_csv(&durable), || {
            finite_n_chart("finite-N objective with durability floor", &[("finite_n", &plain), ("durable", &durable)])
        })?;
        results.push(finite_n_summary(&durable, file));
    }
    if cfg.reduced {
        let reduced = reduced_form_curve(&p, range)?;
        let file = files.add("reduced_form", table::finite_n_csv(&reduced), || {
            finite_n_chart("finite-N and reduced-form objectives", &[("finite_n", &plain), ("reduced_form", &reduced)])
        })?;
        results.push(finite_n_summary(&reduced, file));
    }
    let simulation = if cfg.simulate > 0 {
        let (mean, se) = simulate_success(best, cfg.simulate, cfg.seed, &p)?;
        let computed = plain.get(best).map(|pt| pt.success_prob);
        Some(json!({ "T": best, "draws": cfg.simulate, "seed": cfg.seed, "simulated": mean, "se": se, "computed": computed }))
    } else {
        None
    };
    Ok(Outcome {
        summary: json!({
            "command": "finite-n",
            "preset": cfg.preset,
            "floor": floor,
            "results": results,
            "simulation": simulation,
        }),
        artifacts: files.list,
    })
}

fn scalar(cfg: &RunConfig) -> CliResult<Outcome> {
    let t = required_t(cfg, "scalar-cutoff")?;
    let (p, _) = config::finite_n(cfg)?;
    let rf = ReducedFormParams::matched(&p, t);
    let sol = scalar_cutoff(&rf)?;
    let statics = comparative_statics(&rf);
    let point = psi_reduced_form(t, &p)?;
    Ok(Outcome {
        summary: json!({
            "command": "scalar-cutoff",
            "T": t,
            "pi": rf.pi,
            "x_star": sol.x,
            "H": sol.h,
            "p_with": sol.p_with,
            "p_without": sol.p_without,
            "comparative_statics": statics.as_ref().ok(),
            "comparative_statics_error": statics.err().map(|e| e.to_string()),
            "objective": point.value,
            "success_prob": point.success_prob,
            "delta_theta": point.delta_theta,
        }),
        artifacts: Vec::new(),
    })
}
