//! Browser bindings for the static demo in `www/`. Each export takes plain
//! numbers from the sliders and returns a flat `Float64Array` or byte grid;
//! failures come back as JS errors.

use assurance_core::compare::{classify_region, CompareParams};
use assurance_core::{optimize_threshold, participation_map, presets, ModelParams, Objective, SafetySpec};
use wasm_bindgen::prelude::*;

fn model(pi: f64, xi: f64, lambda: f64) -> ModelParams {
    ModelParams {
        pi,
        lambda,
        safety: SafetySpec::Exponential { xi },
        ..presets::baseline()
    }
}

/// `points + 1` samples of the participation map on `[0, 1]`, interleaved
/// as `q, phi(q)`.
pub fn participation_samples(pi: f64, xi: f64, lambda: f64, t: u32, points: u32) -> Result<Vec<f64>, String> {
    let p = model(pi, xi, lambda);
    let threshold = p.threshold(t).map_err(|e| e.to_string())?;
    let points = points.max(1);
    let mut out = Vec::with_capacity(2 * points as usize + 2);
    for i in 0..=points {
        let q = f64::from(i) / f64::from(points);
        out.push(q);
        out.push(participation_map(q, threshold, &p).map_err(|e| e.to_string())?);
    }
    Ok(out)
}

/// Conditional design objective for T = 1..n-1. Thresholds where the
/// solver did not converge are NaN.
pub fn design_values(pi: f64, xi: f64, lambda: f64) -> Result<Vec<f64>, String> {
    let p = model(pi, xi, lambda);
    let curve = optimize_threshold(&Objective::Conditional, &p, 1..=p.n - 1).map_err(|e| e.to_string())?;
    Ok(curve
        .entries
        .iter()
        .map(|e| e.point.map_or(f64::NAN, |pt| pt.value))
        .collect())
}

/// Region codes (0 cascade, 1 gap, 2 blocked) on a row-major grid with
/// prevalence along columns (0..1] and private benefit along rows (0..e_max].
pub fn region_codes(alpha: f64, xi: f64, mu: f64, e_max: f64, cols: u32, rows: u32) -> Result<Vec<u8>, String> {
    let mut out = Vec::with_capacity((cols * rows) as usize);
    for r in 0..rows {
        let e = e_max * f64::from(rows - r) / f64::from(rows);
        for c in 0..cols {
            let pi = f64::from(c + 1) / f64::from(cols);
            let p = CompareParams {
                e,
                alpha,
                pi,
                mu,
                k: 0.0,
                safety: SafetySpec::Exponential { xi },
                n: 100,
            };
            out.push(classify_region(&p).map_err(|e| e.to_string())? as u8);
        }
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn participation(pi: f64, xi: f64, lambda: f64, t: u32, points: u32) -> Result<Vec<f64>, JsError> {
    participation_samples(pi, xi, lambda, t, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn design(pi: f64, xi: f64, lambda: f64) -> Result<Vec<f64>, JsError> {
    design_values(pi, xi, lambda).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn regions(alpha: f64, xi: f64, mu: f64, e_max: f64, cols: u32, rows: u32) -> Result<Vec<u8>, JsError> {
    region_codes(alpha, xi, mu, e_max, cols, rows).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn baseline_design_peaks_at_47() {
        let v = design_values(0.65, 3.0, 0.4).unwrap();
        assert_eq!(v.len(), 99);
        let best = (0..v.len()).filter(|&i| !v[i].is_nan()).max_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap();
        assert_eq!(best + 1, 47);
    }

    #[test]
    fn participation_map_stays_in_the_unit_interval() {
        let s = participation_samples(0.65, 3.0, 0.4, 47, 50).unwrap();
        assert_eq!(s.len(), 102);
        assert!(s.chunks(2).all(|c| (0.0..=1.0).contains(&c[1])));
    }

    #[test]
    fn region_grid_has_every_cell_and_rejects_bad_input() {
        let g = region_codes(3.0, 3.0, 0.2, 3.0, 20, 10).unwrap();
        assert_eq!(g.len(), 200);
        assert!(g.iter().all(|&c| c <= 2));
        assert!(region_codes(-1.0, 3.0, 0.2, 3.0, 2, 2).is_err());
        assert!(participation_samples(0.65, 3.0, 0.4, 100, 10).is_err());
    }
}
