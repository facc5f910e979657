//! Model primitives for one contract environment.

use serde::{Deserialize, Serialize};

use crate::dist::TypeDistribution;
use crate::error::{check_nonneg, check_unit, Error, Result};

/// Shape of the safety-in-numbers multiplier `g(q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SafetySpec {
    /// `g(q) = exp(-xi q)`.
    Exponential { xi: f64 },
    /// `g(q) = max(0, 1 - slope q)`.
    Linear { slope: f64 },
    /// `level_lo` below `breakpoint`, `level_hi` from the breakpoint on
    /// (right-continuous). `level_hi <= level_lo`.
    Step {
        level_lo: f64,
        level_hi: f64,
        breakpoint: f64,
    },
}

impl SafetySpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SafetySpec::Exponential { xi } => check_nonneg("xi", xi),
            SafetySpec::Linear { slope } => check_nonneg("slope", slope),
            SafetySpec::Step {
                level_lo,
                level_hi,
                breakpoint,
            } => {
                check_nonneg("level_lo", level_lo)?;
                check_nonneg("level_hi", level_hi)?;
                check_unit("breakpoint", breakpoint)?;
                if level_hi > level_lo {
                    return Err(Error::InvalidParams(
                        "step safety must be nonincreasing (level_hi <= level_lo)".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    /// Evaluates `g(q)` without a domain check; callers guarantee `q ∈ [0,1]`.
    pub fn eval(&self, q: f64) -> f64 {
        match *self {
            SafetySpec::Exponential { xi } => (-xi * q).exp(),
            SafetySpec::Linear { slope } => (1.0 - slope * q).max(0.0),
            SafetySpec::Step {
                level_lo,
                level_hi,
                breakpoint,
            } => {
                if q >= breakpoint {
                    level_hi
                } else {
                    level_lo
                }
            }
        }
    }

    /// Linear specification through the same endpoints `g(0)=1`, `g(1)=e^{-xi}`.
    pub fn matched_linear(xi: f64) -> SafetySpec {
        SafetySpec::Linear {
            slope: 1.0 - (-xi).exp(),
        }
    }

    /// Step from 1 to `e^{-xi}` where the exponential crosses the midpoint of
    /// the two levels.
    pub fn matched_step(xi: f64) -> SafetySpec {
        let hi = (-xi).exp();
        let breakpoint = if xi > 0.0 {
            -(0.5 * (1.0 + hi)).ln() / xi
        } else {
            1.0
        };
        SafetySpec::Step {
            level_lo: 1.0,
            level_hi: hi,
            breakpoint,
        }
    }
}

/// Safety-in-numbers multiplier on exposure cost at participation share `q`.
pub fn safety_g(q: f64, spec: &SafetySpec) -> Result<f64> {
    check_unit("q", q)?;
    Ok(spec.eval(q))
}

/// Which cutoff formula the participation map uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CutoffRule {
    /// Leak-adjusted cutoff; coincides with the perfect-trust cutoff at `rho = 1`.
    #[default]
    LeakAdjusted,
    /// Perfect-trust cutoff. Requires `rho = 1`.
    PerfectTrust,
}

/// Primitives of one contract environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Eligible population.
    pub n: u32,
    /// Support prevalence.
    pub pi: f64,
    /// Share of supportive agents with high vulnerability.
    pub lambda: f64,
    pub alpha_l: f64,
    pub alpha_h: f64,
    pub safety: SafetySpec,
    /// Abstention stigma, constant in the threshold.
    pub s: f64,
    /// Warm-glow slope of the net signing utility.
    pub w_bar: f64,
    /// Signing friction.
    pub k: f64,
    /// Confidentiality trust.
    #[serde(default = "one")]
    pub rho: f64,
    #[serde(default)]
    pub type_dist: TypeDistribution,
    #[serde(default)]
    pub cutoff_rule: CutoffRule,
}

fn one() -> f64 {
    1.0
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParams(format!("N must be >= 2, got {}", self.n)));
        }
        if self.n > crate::binomial::MAX_TRIALS {
            return Err(Error::InvalidParams(format!("N must be <= 100000, got {}", self.n)));
        }
        check_unit("pi", self.pi)?;
        check_unit("lambda", self.lambda)?;
        check_nonneg("alpha_l", self.alpha_l)?;
        check_nonneg("alpha_h", self.alpha_h)?;
        if self.alpha_h < self.alpha_l {
            return Err(Error::InvalidParams("alpha_h must be >= alpha_l".into()));
        }
        self.safety.validate()?;
        check_nonneg("s", self.s)?;
        check_nonneg("w_bar", self.w_bar)?;
        check_nonneg("k", self.k)?;
        check_unit("rho", self.rho)?;
        if self.cutoff_rule == CutoffRule::PerfectTrust && self.rho != 1.0 {
            return Err(Error::InvalidParams(
                "perfect-trust cutoff rule requires rho = 1".into(),
            ));
        }
        self.type_dist.validate()
    }

    /// Net signing utility `eta(q) = w_bar q - k`.
    pub fn eta(&self, q: f64) -> f64 {
        self.w_bar * q - self.k
    }

    pub fn threshold(&self, t: u32) -> Result<Threshold> {
        Threshold::new(t, self.n)
    }

    pub fn with_pi(&self, pi: f64) -> ModelParams {
        ModelParams { pi, ..self.clone() }
    }
}

/// Net signing utility at participation share `q`.
pub fn eta(q: f64, params: &ModelParams) -> Result<f64> {
    check_unit("q", q)?;
    Ok(params.eta(q))
}

/// Assurance threshold `T` with its population share.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Threshold {
    t: u32,
    n: u32,
}

impl Threshold {
    pub fn new(t: u32, n: u32) -> Result<Self> {
        if t < 1 || t >= n {
            return Err(Error::InvalidParams(format!(
                "threshold must satisfy 1 <= T < N, got T = {t}, N = {n}"
            )));
        }
        Ok(Threshold { t, n })
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn tau(&self) -> f64 {
        f64::from(self.t) / f64::from(self.n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn exponential_safety_values() {
        let spec = SafetySpec::Exponential { xi: 3.0 };
        assert_eq!(safety_g(0.0, &spec).unwrap(), 1.0);
        let g1 = safety_g(1.0, &spec).unwrap();
        assert!((g1 - 0.049_787).abs() < 1e-6);
        assert!(safety_g(1.5, &spec).is_err());
    }

    #[test]
    fn linear_and_step_safety() {
        let lin = SafetySpec::Linear { slope: 0.9 };
        assert!((safety_g(0.5, &lin).unwrap() - 0.55).abs() < 1e-15);
        assert_eq!(SafetySpec::Linear { slope: 2.0 }.eval(0.8), 0.0);
        let step = SafetySpec::Step {
            level_lo: 1.0,
            level_hi: 0.2,
            breakpoint: 0.3,
        };
        assert_eq!(step.eval(0.299), 1.0);
        assert_eq!(step.eval(0.3), 0.2);
        assert!(SafetySpec::Step {
            level_lo: 0.2,
            level_hi: 1.0,
            breakpoint: 0.3
        }
        .validate()
        .is_err());
    }

    #[test]
    fn safety_is_nonincreasing_for_every_kind() {
        let specs = [
            SafetySpec::Exponential { xi: 3.0 },
            SafetySpec::Exponential { xi: 0.0 },
            SafetySpec::Linear { slope: 0.9 },
            SafetySpec::Linear { slope: 1.7 },
            SafetySpec::matched_linear(3.0),
            SafetySpec::matched_step(3.0),
        ];
        for spec in specs {
            let mut prev = f64::INFINITY;
            for i in 0..=1000 {
                let g = safety_g(f64::from(i) / 1000.0, &spec).unwrap();
                assert!(g <= prev && g >= 0.0, "{spec:?} at {i}");
                prev = g;
            }
        }
    }

    #[test]
    fn net_signing_utility() {
        let base = presets::baseline();
        assert!((eta(0.0, &base).unwrap() + 0.065).abs() < 1e-15);
        assert!((eta(0.5, &base).unwrap() - 0.11).abs() < 1e-15);
        let wb = presets::whistleblowing(0.15);
        assert!((eta(0.0, &wb).unwrap() + 0.08).abs() < 1e-15);
    }

    #[test]
    fn threshold_bounds() {
        assert!(Threshold::new(0, 100).is_err());
        assert!(Threshold::new(100, 100).is_err());
        let t = Threshold::new(47, 100).unwrap();
        assert_eq!(t.tau(), 0.47);
    }

    #[test]
    fn params_validation() {
        let mut p = presets::baseline();
        assert!(p.validate().is_ok());
        p.alpha_h = 0.1;
        assert!(p.validate().is_err());
        let mut p = presets::baseline();
        p.rho = 0.9;
        p.cutoff_rule = CutoffRule::PerfectTrust;
        assert!(p.validate().is_err());
        let mut p = presets::baseline();
        p.n = 1;
        assert!(p.validate().is_err());
    }
}
