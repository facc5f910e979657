use assurance_core::overton::{
    exact_count_shift, overton_curve, LikelihoodTable, OvertonCurve, Quadrature, DEFAULT_NODES,
};
use assurance_core::presets;

#[test]
fn success_and_failure_shifts_balance() {
    let base = presets::baseline();
    let prior = presets::overton_prior();
    let curve = overton_curve(&prior, &base, 1..=99).unwrap();
    let mut checked = 0;
    for e in &curve.entries {
        let Some(s) = e.shift else { continue };
        let total = s.marginal_success * s.delta_success + s.marginal_failure() * s.delta_failure;
        assert!(total.abs() < 1e-10, "T = {}: {total}", e.t);
        if s.marginal_success > 0.01 && s.marginal_success < 0.99 {
            assert!(s.delta_success > 0.0 && s.delta_failure < 0.0, "T = {}", e.t);
        }
        checked += 1;
    }
    assert!(checked > 90);
}

#[test]
fn success_likelihood_is_monotone_in_prevalence() {
    let base = presets::baseline();
    let ts: Vec<u32> = (1..=99).collect();
    let table = LikelihoodTable::build(&base, &ts, Quadrature::prevalence(DEFAULT_NODES).unwrap()).unwrap();
    for &t in &ts {
        let Ok(row) = table.row(t) else { continue };
        for w in row.windows(2) {
            assert!(w[1] >= w[0] - 1e-12, "T = {t}");
        }
    }
}

#[test]
fn quadrature_is_converged_at_the_default_grid() {
    let base = presets::baseline();
    let prior = presets::overton_prior();
    let ts = [30, 46, 60];
    let coarse = LikelihoodTable::build(&base, &ts, Quadrature::prevalence(201).unwrap()).unwrap();
    let fine = LikelihoodTable::build(&base, &ts, Quadrature::prevalence(401).unwrap()).unwrap();
    for t in ts {
        let a = coarse.shift(t, &prior).unwrap().delta_success;
        let b = fine.shift(t, &prior).unwrap().delta_success;
        assert!((a - b).abs() < 1e-6, "T = {t}: {a} vs {b}");
    }
}

#[test]
fn diffuse_priors_move_further() {
    let base = presets::baseline();
    let ts: Vec<u32> = (20..=80).collect();
    let table = LikelihoodTable::build(&base, &ts, Quadrature::prevalence(DEFAULT_NODES).unwrap()).unwrap();
    let prior = presets::overton_prior();
    let wide = OvertonCurve::from_table(&table, &prior);
    let narrow = OvertonCurve::from_table(&table, &prior.rescaled(10.0));
    for t in ts {
        let (Some(a), Some(b)) = (wide.get(t), narrow.get(t)) else { continue };
        assert!(b.delta_success < a.delta_success, "T = {t}");
    }
}

#[test]
fn exact_count_update_rises_with_the_count() {
    let base = presets::baseline();
    let prior = presets::overton_prior();
    let quad = Quadrature::prevalence(DEFAULT_NODES).unwrap();
    let lo = exact_count_shift(46, 46, &prior, &base, &quad).unwrap();
    let hi = exact_count_shift(46, 60, &prior, &base, &quad).unwrap();
    assert!(hi > lo);
    assert!(exact_count_shift(46, 40, &prior, &base, &quad).is_err());
}
