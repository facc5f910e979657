//! Continuous distributions used by the model: the expressive-benefit /
//! reputational-type distribution and the Beta prior of outside observers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Standard normal CDF via `erfc`, accurate to well below 1e-12 absolute.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal survival function `1 - Φ(x)` without cancellation.
pub fn std_normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Normal density with mean `mu` and standard deviation `sd`.
pub fn normal_pdf(x: f64, mu: f64, sd: f64) -> f64 {
    std_normal_pdf((x - mu) / sd) / sd
}

/// Distribution of the expressive benefit `e_i` (baseline) or reputational
/// type `x_i` (finite-N benchmark) among supportive agents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TypeDistribution {
    #[default]
    StandardNormal,
    /// Piecewise-linear CDF through `(x[i], cdf[i])`, flat at 0 and 1 outside.
    Tabulated { x: Vec<f64>, cdf: Vec<f64> },
}

impl TypeDistribution {
    pub fn tabulated(x: Vec<f64>, cdf: Vec<f64>) -> Result<Self> {
        let dist = TypeDistribution::Tabulated { x, cdf };
        dist.validate()?;
        Ok(dist)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            TypeDistribution::StandardNormal => Ok(()),
            TypeDistribution::Tabulated { x, cdf } => {
                if x.len() < 2 || x.len() != cdf.len() {
                    return Err(Error::InvalidParams(
                        "tabulated CDF needs >= 2 abscissae matching its values".into(),
                    ));
                }
                if x.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::InvalidParams(
                        "tabulated abscissae must be strictly increasing".into(),
                    ));
                }
                if cdf.windows(2).any(|w| w[1] < w[0]) {
                    return Err(Error::InvalidParams("tabulated CDF must be nondecreasing".into()));
                }
                if cdf[0] != 0.0 || cdf[cdf.len() - 1] != 1.0 {
                    return Err(Error::InvalidParams(
                        "tabulated CDF must start at 0 and end at 1".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    pub fn cdf(&self, v: f64) -> f64 {
        match self {
            TypeDistribution::StandardNormal => std_normal_cdf(v),
            TypeDistribution::Tabulated { x, cdf } => {
                if v.is_nan() {
                    return f64::NAN;
                }
                if v <= x[0] {
                    return 0.0;
                }
                if v >= x[x.len() - 1] {
                    return 1.0;
                }
                let i = x.partition_point(|&xi| xi <= v) - 1;
                let t = (v - x[i]) / (x[i + 1] - x[i]);
                cdf[i] + t * (cdf[i + 1] - cdf[i])
            }
        }
    }

    /// `1 - F(v)`, with `+inf -> 0` and `-inf -> 1`.
    pub fn sf(&self, v: f64) -> f64 {
        match self {
            TypeDistribution::StandardNormal => std_normal_sf(v),
            TypeDistribution::Tabulated { .. } => 1.0 - self.cdf(v),
        }
    }

    pub fn pdf(&self, v: f64) -> f64 {
        match self {
            TypeDistribution::StandardNormal => std_normal_pdf(v),
            TypeDistribution::Tabulated { x, cdf } => {
                if v < x[0] || v >= x[x.len() - 1] {
                    return 0.0;
                }
                let i = x.partition_point(|&xi| xi <= v) - 1;
                (cdf[i + 1] - cdf[i]) / (x[i + 1] - x[i])
            }
        }
    }
}

/// Beta(a, b) prior over a prevalence or latent support state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaPrior {
    pub a: f64,
    pub b: f64,
}

impl BetaPrior {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        let prior = BetaPrior { a, b };
        prior.validate()?;
        Ok(prior)
    }

    pub fn validate(&self) -> Result<()> {
        if self.a > 0.0 && self.b > 0.0 && self.a.is_finite() && self.b.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!(
                "Beta shapes must be positive, got ({}, {})",
                self.a, self.b
            )))
        }
    }

    pub fn mean(&self) -> f64 {
        self.a / (self.a + self.b)
    }

    pub fn variance(&self) -> f64 {
        let s = self.a + self.b;
        self.a * self.b / (s * s * (s + 1.0))
    }

    /// Same mean, concentration `a + b` multiplied by `factor`.
    pub fn rescaled(&self, factor: f64) -> BetaPrior {
        BetaPrior {
            a: self.a * factor,
            b: self.b * factor,
        }
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        if !(0.0..=1.0).contains(&x) {
            return f64::NEG_INFINITY;
        }
        let ln_beta = libm::lgamma(self.a) + libm::lgamma(self.b) - libm::lgamma(self.a + self.b);
        (self.a - 1.0) * x.ln() + (self.b - 1.0) * (1.0 - x).ln() - ln_beta
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_reference_values() {
        assert_eq!(std_normal_cdf(0.0), 0.5);
        assert!((std_normal_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-15);
        assert!((std_normal_sf(3.0) - 0.001_349_898_031_630_093_3).abs() < 1e-15);
        assert!((std_normal_cdf(-8.0) / 6.220_960_574_271_74e-16 - 1.0).abs() < 1e-12);
        assert_eq!(std_normal_sf(f64::INFINITY), 0.0);
        assert_eq!(std_normal_sf(f64::NEG_INFINITY), 1.0);
    }

    #[test]
    fn tabulated_cdf_interpolates() {
        let d = TypeDistribution::tabulated(vec![-1.0, 0.0, 2.0], vec![0.0, 0.5, 1.0]).unwrap();
        assert_eq!(d.cdf(-2.0), 0.0);
        assert_eq!(d.cdf(-0.5), 0.25);
        assert_eq!(d.cdf(1.0), 0.75);
        assert_eq!(d.sf(3.0), 0.0);
        assert_eq!(d.pdf(1.0), 0.25);
    }

    #[test]
    fn tabulated_rejects_bad_tables() {
        assert!(TypeDistribution::tabulated(vec![0.0, 1.0], vec![0.0, 0.9]).is_err());
        assert!(TypeDistribution::tabulated(vec![0.0, 0.0], vec![0.0, 1.0]).is_err());
        assert!(TypeDistribution::tabulated(vec![0.0, 1.0, 2.0], vec![0.0, 0.6, 0.5]).is_err());
    }

    #[test]
    fn beta_mean_and_density() {
        let p = BetaPrior::new(13.0, 7.0).unwrap();
        assert!((p.mean() - 0.65).abs() < 1e-15);
        // Beta(2,2) density is 6x(1-x)
        let q = BetaPrior::new(2.0, 2.0).unwrap();
        assert!((q.pdf(0.3) - 6.0 * 0.3 * 0.7).abs() < 1e-12);
        assert!(BetaPrior::new(0.0, 1.0).is_err());
        assert_eq!(p.rescaled(10.0).mean(), p.mean());
    }
}
