//! Named exhibits: each writes one CSV per panel (plus SVGs when enabled).

use std::ops::RangeInclusive;

use assurance_core::equilibrium::{solve_fixed_point, type_shares};
use assurance_core::finite_n::{finite_n_curve, reduced_form_curve};
use assurance_core::overton::{LikelihoodTable, OvertonCurve, Quadrature, DEFAULT_NODES};
use assurance_core::{
    binom_tail, design::excess_share, enumerate_fixed_points, optimize_threshold, presets, DesignCurve, ModelParams,
    Objective,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::commands::{design_chart, design_summary, finite_n_chart, Files, Outcome};
use crate::config::{self, Preset, RunConfig, Variant};
use crate::error::{CliError, CliResult};
use crate::svg::{Chart, Series};
use crate::table::{self, num};

pub const FIGURES: [&str; 11] = [
    "fig_design_objective",
    "fig_participation_success",
    "fig_both_selections",
    "fig_multiplicity",
    "fig_safety_comparison",
    "fig_alt_safety",
    "fig_whistleblowing",
    "fig_overton",
    "fig_overton_prior_sensitivity",
    "fig_finite_n_threshold",
    "fig_finite_n_durable",
];

pub fn replicate(cfg: &RunConfig) -> CliResult<Outcome> {
    if cfg.preset.is_some() || cfg.model.is_some() || cfg.finite_n.is_some() {
        return Err(CliError::config("replicate uses the exhibits' own calibrations; drop the preset or inline parameters"));
    }
    let id = cfg
        .figure
        .as_deref()
        .ok_or_else(|| CliError::config(format!("replicate needs a figure id or `all` ({})", FIGURES.join(", "))))?;
    let ids: Vec<&str> = if id == "all" {
        FIGURES.to_vec()
    } else if FIGURES.contains(&id) {
        vec![id]
    } else {
        return Err(CliError::config(format!("unknown figure `{id}` (expected `all` or one of {})", FIGURES.join(", "))));
    };
    let mut files = Files::new(cfg);
    let mut figures = Vec::new();
    for id in ids {
        let before = files.list.len();
        let headline = figure(id, cfg, &mut files)?;
        let written: Vec<&str> = files.list[before..].iter().map(|a| a.name.as_str()).collect();
        figures.push(json!({ "id": id, "files": written, "headline": headline }));
    }
    Ok(Outcome {
        summary: json!({ "command": "replicate", "figures": figures }),
        artifacts: files.list,
    })
}

fn figure(id: &str, cfg: &RunConfig, files: &mut Files<'_>) -> CliResult<Value> {
    let base = presets::baseline();
    match id {
        "fig_design_objective" => {
            let c = conditional(&base, cfg)?;
            files.add(id, table::design_csv(&c, base.n), || design_chart("conditional design objective", &[("psi_H", &c)]))?;
            Ok(design_summary("baseline", &c, base.n, None))
        }
        "fig_participation_success" => participation_success(id, &base, cfg, files),
        "fig_both_selections" | "fig_multiplicity" => selections(id, &base, cfg, files),
        "fig_safety_comparison" => variant_panels(id, Preset::SafetySweep, cfg, files),
        "fig_alt_safety" => variant_panels(id, Preset::AltSafety, cfg, files),
        "fig_whistleblowing" => {
            let mut headline = variant_panels(id, Preset::Whistleblowing05, cfg, files)?;
            let wb = presets::whistleblowing(0.15);
            participation_panel_c(&format!("{id}_c"), &wb, cfg, files)?;
            headline["panel_c_prevalence"] = json!(0.15);
            Ok(headline)
        }
        "fig_overton" | "fig_overton_prior_sensitivity" => overton_figure(id, &base, cfg, files),
        "fig_finite_n_threshold" | "fig_finite_n_durable" => finite_n_figure(id, cfg, files),
        _ => unreachable!("ids are validated by the caller"),
    }
}

fn conditional(p: &ModelParams, cfg: &RunConfig) -> CliResult<DesignCurve> {
    Ok(optimize_threshold(&Objective::Conditional, p, cfg.range_or(p.n)?)?)
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn curve_series(label: &str, points: Vec<(f64, f64)>) -> Series {
    Series {
        label: label.to_string(),
        points,
    }
}

fn chart(title: &str, y_label: &str, series: Vec<Series>) -> Chart {
    Chart {
        title: title.to_string(),
        x_label: "threshold T".into(),
        y_label: y_label.to_string(),
        series,
    }
}

/// Type-specific signing shares at `q_high(T)` for each successful threshold.
fn shares(p: &ModelParams, curve: &DesignCurve) -> CliResult<Vec<(u32, f64, f64)>> {
    curve
        .entries
        .par_iter()
        .filter_map(|e| e.point.map(|pt| (e.t, pt.q_high)))
        .map(|(t, q)| {
            let (lo, hi) = type_shares(q, p.threshold(t)?, p)?;
            Ok((t, lo, hi))
        })
        .collect()
}

fn participation_panel_c(stem: &str, p: &ModelParams, cfg: &RunConfig, files: &mut Files<'_>) -> CliResult<()> {
    let curve = conditional(p, cfg)?;
    let rows = shares(p, &curve)?;
    files.add(
        stem,
        table::to_csv(
            &["T", "share_low", "share_high"],
            rows.iter().map(|&(t, lo, hi)| vec![t.to_string(), num(lo), num(hi)]),
        ),
        || {
            chart(
                "signing share by vulnerability type",
                "share of supportive agents signing",
                vec![
                    curve_series("low vulnerability", rows.iter().map(|r| (f64::from(r.0), r.1)).collect()),
                    curve_series("high vulnerability", rows.iter().map(|r| (f64::from(r.0), r.2)).collect()),
                ],
            )
        },
    )?;
    Ok(())
}

fn participation_success(id: &str, p: &ModelParams, cfg: &RunConfig, files: &mut Files<'_>) -> CliResult<Value> {
    let curve = conditional(p, cfg)?;
    let pts: Vec<(u32, f64, f64)> = curve
        .entries
        .iter()
        .filter_map(|e| e.point.map(|pt| (e.t, pt.q_high, pt.success_prob)))
        .collect();
    files.add(
        &format!("{id}_a"),
        table::to_csv(&["T", "q_high"], pts.iter().map(|r| vec![r.0.to_string(), num(r.1)])),
        || chart("participatory equilibrium", "q_high", vec![curve_series("q_high", pts.iter().map(|r| (f64::from(r.0), r.1)).collect())]),
    )?;
    files.add(
        &format!("{id}_b"),
        table::to_csv(&["T", "success_prob"], pts.iter().map(|r| vec![r.0.to_string(), num(r.2)])),
        || chart("success probability", "P(M >= T)", vec![curve_series("success", pts.iter().map(|r| (f64::from(r.0), r.2)).collect())]),
    )?;
    participation_panel_c(&format!("{id}_c"), p, cfg, files)?;
    let at = curve.argmax_t.and_then(|t| {
        let th = p.threshold(t).ok()?;
        type_shares(curve.get(t)?.q_high, th, p).ok()
    });
    Ok(json!({
        "argmax_T": curve.argmax_t,
        "share_low_at_argmax": at.map(|s| s.0),
        "share_high_at_argmax": at.map(|s| s.1),
    }))
}

/// `P(M >= T) Δ` at participation `q`; zero where success is impossible.
fn psi_at(n: u32, t: u32, q: f64) -> CliResult<f64> {
    let p = binom_tail(n, t, q)?;
    if p <= 0.0 {
        return Ok(0.0);
    }
    Ok(p * excess_share(n, t, q)?)
}

struct SelectionRow {
    t: u32,
    q_high: f64,
    q_low: f64,
    psi_high: f64,
    psi_low: f64,
    fixed_points: usize,
    jump_crossings: usize,
}

fn selection_rows(p: &ModelParams, range: RangeInclusive<u32>) -> CliResult<Vec<SelectionRow>> {
    let ts: Vec<u32> = range.collect();
    ts.par_iter()
        .map(|&t| {
            let th = p.threshold(t)?;
            let q_high = solve_fixed_point(th, p.pi, p)?.q;
            let q_low = solve_fixed_point(th, 0.0, p)?.q;
            let set = enumerate_fixed_points(th, p)?;
            Ok(SelectionRow {
                t,
                q_high,
                q_low,
                psi_high: psi_at(p.n, t, q_high)?,
                psi_low: psi_at(p.n, t, q_low)?,
                fixed_points: set.points.len(),
                jump_crossings: set.jump_crossings.len(),
            })
        })
        .collect()
}

fn selections(id: &str, p: &ModelParams, cfg: &RunConfig, files: &mut Files<'_>) -> CliResult<Value> {
    let rows = selection_rows(p, cfg.range_or(p.n)?)?;
    let xs = |f: fn(&SelectionRow) -> f64| rows.iter().map(|r| (f64::from(r.t), f(r))).collect::<Vec<_>>();
    if id == "fig_both_selections" {
        files.add(
            id,
            table::to_csv(
                &["T", "psi_high", "psi_low", "q_high", "q_low"],
                rows.iter().map(|r| vec![r.t.to_string(), num(r.psi_high), num(r.psi_low), num(r.q_high), num(r.q_low)]),
            ),
            || {
                chart(
                    "design objective under both selections",
                    "objective",
                    vec![curve_series("high equilibrium", xs(|r| r.psi_high)), curve_series("low equilibrium", xs(|r| r.psi_low))],
                )
            },
        )?;
        let max_low = rows.iter().map(|r| r.psi_low).fold(0.0, f64::max);
        return Ok(json!({ "max_psi_low": max_low }));
    }
    files.add(
        &format!("{id}_a"),
        table::to_csv(
            &["T", "q_high", "q_low"],
            rows.iter().map(|r| vec![r.t.to_string(), num(r.q_high), num(r.q_low)]),
        ),
        || {
            chart(
                "equilibria from optimistic and pessimistic starts",
                "participation",
                vec![curve_series("from q = pi", xs(|r| r.q_high)), curve_series("from q = 0", xs(|r| r.q_low))],
            )
        },
    )?;
    files.add(
        &format!("{id}_b"),
        table::to_csv(
            &["T", "fixed_points", "jump_crossings"],
            rows.iter()
                .map(|r| vec![r.t.to_string(), r.fixed_points.to_string(), r.jump_crossings.to_string()]),
        ),
        || {
            chart(
                "fixed points on the grid",
                "count",
                vec![
                    curve_series("fixed points", xs(|r| r.fixed_points as f64)),
                    curve_series("jump crossings", xs(|r| r.jump_crossings as f64)),
                ],
            )
        },
    )?;
    let counts: Vec<usize> = rows.iter().map(|r| r.fixed_points + r.jump_crossings).collect();
    Ok(json!({
        "min_equilibria": counts.iter().min(),
        "max_equilibria": counts.iter().max(),
    }))
}

/// Panels (a) `q_high` and (b) `Ψ_H` for every calibration of a multi-model
/// preset; the whistleblowing exhibit spans the three prevalence presets.
fn variant_panels(id: &str, preset: Preset, cfg: &RunConfig, files: &mut Files<'_>) -> CliResult<Value> {
    let variants: Vec<Variant> = if preset == Preset::Whistleblowing05 {
        [Preset::Whistleblowing05, Preset::Whistleblowing15, Preset::Whistleblowing30]
            .into_iter()
            .flat_map(|p| p.models().expect("model preset"))
            .collect()
    } else {
        preset.models().expect("model preset")
    };
    let curves = variants
        .iter()
        .map(|v| Ok((v.label.as_str(), conditional(&v.params, cfg)?)))
        .collect::<CliResult<Vec<_>>>()?;
    let long = |f: fn(&assurance_core::DesignPoint) -> f64| {
        curves
            .iter()
            .flat_map(|(label, c)| {
                c.entries
                    .iter()
                    .map(move |e| vec![label.to_string(), e.t.to_string(), opt_num(e.point.as_ref().map(f))])
            })
            .collect::<Vec<_>>()
    };
    let series = |f: fn(&assurance_core::DesignPoint) -> f64| {
        curves
            .iter()
            .map(|(label, c)| {
                curve_series(label, c.entries.iter().filter_map(|e| e.point.as_ref().map(|p| (f64::from(e.t), f(p)))).collect())
            })
            .collect::<Vec<_>>()
    };
    files.add(
        &format!("{id}_a"),
        table::to_csv(&["series", "T", "q_high"], long(|p| p.q_high)),
        || chart("participatory equilibrium", "q_high", series(|p| p.q_high)),
    )?;
    files.add(
        &format!("{id}_b"),
        table::to_csv(&["series", "T", "psi_H"], long(|p| p.value)),
        || chart("conditional design objective", "psi_H", series(|p| p.value)),
    )?;
    let per: Vec<Value> = curves
        .iter()
        .zip(&variants)
        .map(|((label, c), v)| design_summary(label, c, v.params.n, None))
        .collect();
    Ok(json!({ "curves": per }))
}

fn overton_figure(id: &str, base: &ModelParams, cfg: &RunConfig, files: &mut Files<'_>) -> CliResult<Value> {
    let ts: Vec<u32> = cfg.range_or(base.n)?.collect();
    let table_ = LikelihoodTable::build(base, &ts, Quadrature::prevalence(DEFAULT_NODES)?)?;
    if id == "fig_overton" {
        let curve = OvertonCurve::from_table(&table_, &config::prior(cfg)?);
        let pts = |f: fn(&assurance_core::overton::PosteriorShift) -> f64| {
            curve
                .entries
                .iter()
                .filter_map(|e| e.shift.as_ref().map(|s| (f64::from(e.t), f(s))))
                .collect::<Vec<_>>()
        };
        files.add(id, table::overton_csv(&curve), || {
            chart(
                "Overton dynamics",
                "value",
                vec![
                    curve_series("posterior shift on success", pts(|s| s.delta_success)),
                    curve_series("Overton objective", pts(|s| s.psi())),
                ],
            )
        })?;
        return Ok(json!({ "argmax_T": curve.argmax_t, "max_value": curve.max_value, "partial": curve.partial }));
    }
    let curves: Vec<(&str, OvertonCurve)> = presets::overton_prior_family()
        .into_iter()
        .map(|(label, prior)| (label, OvertonCurve::from_table(&table_, &prior)))
        .collect();
    let mut header = vec!["prior", "a", "b"];
    header.extend(table::OVERTON_HEADER);
    let rows: Vec<Vec<String>> = curves
        .iter()
        .flat_map(|(label, c)| {
            table::overton_rows(c).map(move |r| {
                let mut row = vec![label.to_string(), num(c.prior.a), num(c.prior.b)];
                row.extend(r);
                row
            })
        })
        .collect();
    files.add(id, table::to_csv(&header, rows), || {
        chart(
            "Overton objective by prior concentration",
            "psi_O",
            curves
                .iter()
                .map(|(label, c)| {
                    curve_series(
                        label,
                        c.entries.iter().filter_map(|e| e.shift.map(|s| (f64::from(e.t), s.psi()))).collect(),
                    )
                })
                .collect(),
        )
    })?;
    let per: Vec<Value> = curves
        .iter()
        .map(|(label, c)| json!({ "prior": label, "a": c.prior.a, "b": c.prior.b, "argmax_T": c.argmax_t, "max_value": c.max_value }))
        .collect();
    Ok(json!({ "curves": per }))
}

fn finite_n_figure(id: &str, cfg: &RunConfig, files: &mut Files<'_>) -> CliResult<Value> {
    let p = presets::finite_n_benchmark();
    let range = cfg.range_or(p.n)?;
    let plain = finite_n_curve(&p, range.clone(), 0)?;
    let other = if id == "fig_finite_n_threshold" {
        reduced_form_curve(&p, range)?
    } else {
        let floor = assurance_core::design::durability_floor(&presets::durable_60(), p.n)?;
        finite_n_curve(&p, range, floor)?
    };
    let (suffix, title) = if id == "fig_finite_n_threshold" {
        ("reduced_form", "finite-N and reduced-form objectives")
    } else {
        ("durable", "finite-N objective with durability floor 60")
    };
    files.add(&format!("{id}_finite_n"), table::finite_n_csv(&plain), || {
        finite_n_chart(title, &[("finite_n", &plain), (suffix, &other)])
    })?;
    files.add(&format!("{id}_{suffix}"), table::finite_n_csv(&other), || {
        finite_n_chart(title, &[(suffix, &other)])
    })?;
    Ok(json!({
        "finite_n_argmax_T": plain.argmax_t,
        format!("{suffix}_argmax_T"): other.argmax_t,
        format!("{suffix}_partial"): other.partial,
    }))
}
