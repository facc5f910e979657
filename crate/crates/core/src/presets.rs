//! Calibration presets.

use crate::design::OppositionSpec;
use crate::dist::{BetaPrior, TypeDistribution};
use crate::finite_n::FiniteNParams;
use crate::model::{CutoffRule, ModelParams, SafetySpec};

/// Illustrative baseline calibration.
pub fn baseline() -> ModelParams {
    ModelParams {
        n: 100,
        pi: 0.65,
        lambda: 0.4,
        alpha_l: 0.5,
        alpha_h: 2.0,
        safety: SafetySpec::Exponential { xi: 3.0 },
        s: 0.8,
        w_bar: 0.35,
        k: 0.065,
        rho: 1.0,
        type_dist: TypeDistribution::StandardNormal,
        cutoff_rule: CutoffRule::LeakAdjusted,
    }
}

/// Prevalence levels used by the whistleblowing counterfactual.
pub const WHISTLEBLOWING_PREVALENCE: [f64; 3] = [0.05, 0.15, 0.30];

/// Whistleblowing counterfactual at support prevalence `pi`.
pub fn whistleblowing(pi: f64) -> ModelParams {
    ModelParams {
        n: 100,
        pi,
        lambda: 0.6,
        alpha_l: 0.5,
        alpha_h: 3.0,
        safety: SafetySpec::Exponential { xi: 3.0 },
        s: 0.8,
        w_bar: 0.30,
        k: 0.08,
        ..baseline()
    }
}

/// Outside-observer prior with mean 0.65.
pub fn overton_prior() -> BetaPrior {
    BetaPrior { a: 13.0, b: 7.0 }
}

/// Diffuse, baseline and concentrated priors sharing the baseline mean.
pub fn overton_prior_family() -> [(&'static str, BetaPrior); 3] {
    let base = overton_prior();
    [
        ("diffuse", base.rescaled(0.25)),
        ("baseline", base),
        ("concentrated", base.rescaled(4.0)),
    ]
}

pub fn finite_n_benchmark() -> FiniteNParams {
    FiniteNParams::benchmark()
}

/// Durability floor of 60 under equal burden (`Omega = 60`, `c_bar = 1`).
pub fn durable_60() -> OppositionSpec {
    OppositionSpec::equal_burden(60.0, 1.0)
}

/// Safety strengths compared in the safety-channel exhibit.
pub const SAFETY_SWEEP_XI: [f64; 4] = [0.0, 1.5, 3.0, 5.0];

/// Baseline with exponential, matched linear and matched step safety.
pub fn alt_safety() -> [(&'static str, ModelParams); 3] {
    let base = baseline();
    [
        ("exponential", base.clone()),
        (
            "linear",
            ModelParams {
                safety: SafetySpec::matched_linear(3.0),
                ..base.clone()
            },
        ),
        (
            "step",
            ModelParams {
                safety: SafetySpec::matched_step(3.0),
                ..base
            },
        ),
    ]
}

pub const PARAM_SWEEP_XI: [f64; 5] = [1.5, 2.0, 3.0, 4.0, 5.0];
pub const PARAM_SWEEP_ALPHA_H: [f64; 4] = [1.5, 2.0, 2.5, 3.0];
pub const PARAM_SWEEP_LAMBDA: [f64; 4] = [0.2, 0.3, 0.4, 0.5];

/// The 80 robustness calibrations `(xi, alpha_h, lambda)` around the baseline.
pub fn param_sweep() -> Vec<((f64, f64, f64), ModelParams)> {
    let mut out = Vec::with_capacity(80);
    for &xi in &PARAM_SWEEP_XI {
        for &alpha_h in &PARAM_SWEEP_ALPHA_H {
            for &lambda in &PARAM_SWEEP_LAMBDA {
                let p = ModelParams {
                    safety: SafetySpec::Exponential { xi },
                    alpha_h,
                    lambda,
                    ..baseline()
                };
                out.push(((xi, alpha_h, lambda), p));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        baseline().validate().unwrap();
        for pi in WHISTLEBLOWING_PREVALENCE {
            whistleblowing(pi).validate().unwrap();
        }
        for (_, p) in alt_safety() {
            p.validate().unwrap();
        }
        assert_eq!(param_sweep().len(), 80);
        finite_n_benchmark().validate().unwrap();
    }

    #[test]
    fn prior_family_shares_mean() {
        for (_, p) in overton_prior_family() {
            assert!((p.mean() - 0.65).abs() < 1e-15);
        }
    }
}
