use assurance_core::design::{optimize_threshold, psi_conditional, Objective, SeedModel};
use assurance_core::equilibrium::{enumerate_fixed_points, high_equilibrium, type_cutoff, type_cutoff_with_trust};
use assurance_core::model::{CutoffRule, ModelParams};
use assurance_core::presets;

#[test]
fn every_reported_fixed_point_is_a_root() {
    let base = presets::baseline();
    for t in 1..100 {
        let set = enumerate_fixed_points(base.threshold(t).unwrap(), &base).unwrap();
        assert!(!set.is_empty(), "T = {t}");
        for p in &set.points {
            assert!(p.residual < 1e-8, "T = {t}: {p:?}");
        }
        if let (Some(lo), Some(u), Some(hi)) = (set.q_low, set.q_unstable, set.q_high) {
            assert!(lo < u && u < hi, "T = {t}");
        }
    }
}

#[test]
fn participatory_equilibrium_rises_with_prevalence() {
    let base = presets::baseline();
    for t in [20, 47, 60] {
        let mut prev = 0.0;
        for pi in [0.3, 0.4, 0.5, 0.6, 0.65, 0.7, 0.8] {
            let p = base.with_pi(pi);
            let q = high_equilibrium(p.threshold(t).unwrap(), &p).unwrap().q;
            assert!(q >= prev, "T = {t}, pi = {pi}: {q} < {prev}");
            prev = q;
        }
    }
}

#[test]
fn full_trust_reproduces_the_baseline_bitwise() {
    let base = presets::baseline();
    let perfect = ModelParams {
        cutoff_rule: CutoffRule::PerfectTrust,
        ..base.clone()
    };
    for t in [5, 30, 47, 80] {
        let th = base.threshold(t).unwrap();
        for i in 0..=50 {
            let q = f64::from(i) / 50.0;
            for a in [base.alpha_l, base.alpha_h] {
                let x = type_cutoff(a, q, th, &base).unwrap();
                let y = type_cutoff_with_trust(a, q, th, &base).unwrap();
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }
    let a = optimize_threshold(&Objective::Conditional, &base, 1..=99).unwrap();
    let b = optimize_threshold(&Objective::Conditional, &perfect, 1..=99).unwrap();
    for (x, y) in a.entries.iter().zip(&b.entries) {
        let (x, y) = (x.point.unwrap(), y.point.unwrap());
        assert_eq!(x.value.to_bits(), y.value.to_bits(), "T = {}", x.t);
        assert_eq!(x.q_high.to_bits(), y.q_high.to_bits());
    }
}

#[test]
fn leak_risk_lowers_participation() {
    let base = presets::baseline();
    let leaky = ModelParams { rho: 0.8, ..base.clone() };
    let th = base.threshold(47).unwrap();
    let q = high_equilibrium(th, &base).unwrap().q;
    let ql = high_equilibrium(th, &leaky).unwrap().q;
    assert!(ql < q);
}

#[test]
fn coordination_risk_never_raises_the_optimum() {
    let base = presets::baseline();
    let conditional = optimize_threshold(&Objective::Conditional, &base, 2..=99).unwrap();
    let seeds = [
        SeedModel::Poisson { mu: 15.0 },
        SeedModel::Deterministic { k: 20 },
        SeedModel::Binomial {
            n_pool: 40,
            p_recruit: 0.4,
        },
    ];
    for seed in seeds {
        let ex_ante = optimize_threshold(&Objective::ExAnte { seed }, &base, 2..=99).unwrap();
        assert!(ex_ante.argmax_t.unwrap() <= conditional.argmax_t.unwrap(), "{seed:?}");
    }
}

#[test]
fn type_share_gap_narrows_as_the_coalition_grows() {
    let base = presets::baseline();
    let at = |t: u32| {
        let p = psi_conditional(t, &base).unwrap();
        let (lo, hi) = assurance_core::equilibrium::type_shares(p.q_high, base.threshold(t).unwrap(), &base).unwrap();
        (p.q_high, lo - hi)
    };
    let sweep: Vec<(f64, f64)> = (1..=99).map(at).collect();
    let mut rising = 0;
    for w in sweep.windows(2) {
        if w[1].0 > w[0].0 + 1e-9 {
            assert!(w[1].1 < w[0].1, "{w:?}");
            rising += 1;
        }
    }
    assert!(rising > 20);
    assert!(at(70).1 < at(60).1 && at(60).1 < at(47).1);
}
