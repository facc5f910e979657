//! Two-type comparison of anonymous surveys, open petitions and assurance
//! contracts on the same population.

use serde::{Deserialize, Serialize};

use crate::error::{check_nonneg, check_unit, Error, Result};
use crate::model::SafetySpec;

/// Stylized comparison population: supporters share expressive benefit `e`,
/// a fraction `mu` of them are invulnerable and the rest bear `alpha g(q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompareParams {
    pub e: f64,
    pub alpha: f64,
    pub pi: f64,
    pub mu: f64,
    pub k: f64,
    pub safety: SafetySpec,
    pub n: u32,
}

impl CompareParams {
    pub fn validate(&self) -> Result<()> {
        positive("e", self.e)?;
        positive("alpha", self.alpha)?;
        check_unit("pi", self.pi)?;
        if self.pi == 0.0 {
            return Err(Error::Domain {
                name: "pi",
                value: 0.0,
                expected: "in (0, 1]",
            });
        }
        check_unit("mu", self.mu)?;
        check_nonneg("k", self.k)?;
        self.safety.validate()?;
        let strictly_decreasing = match self.safety {
            SafetySpec::Exponential { xi } => xi > 0.0,
            SafetySpec::Linear { slope } => slope > 0.0 && slope <= 1.0,
            SafetySpec::Step { .. } => false,
        };
        if !strictly_decreasing {
            return Err(Error::InvalidParams(
                "comparison requires g strictly decreasing on [0, 1] with g(0) = 1".into(),
            ));
        }
        Ok(())
    }

    fn g(&self, q: f64) -> f64 {
        self.safety.eval(q)
    }

    /// Cost facing a vulnerable type when every supporter acts.
    pub fn full_cost(&self) -> f64 {
        self.alpha * self.g(self.pi)
    }

    /// Cost facing the first vulnerable type after only invulnerables act.
    pub fn pioneer_cost(&self) -> f64 {
        self.alpha * self.g(self.pi * self.mu)
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value: v,
            expected: "> 0",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    /// `e >= alpha g(pi mu)`: open petitions cascade to full participation.
    CascadeConnected,
    /// `alpha g(pi) <= e < alpha g(pi mu)`: the assurance contract's niche.
    CoordinationGap,
    /// `e < alpha g(pi)`: no mechanism sustains participation.
    FundamentallyBlocked,
}

impl Region {
    pub fn as_str(&self) -> &'static str {
        match self {
            Region::CascadeConnected => "cascade_connected",
            Region::CoordinationGap => "coordination_gap",
            Region::FundamentallyBlocked => "fundamentally_blocked",
        }
    }
}

pub fn classify_region(p: &CompareParams) -> Result<Region> {
    p.validate()?;
    Ok(if p.e >= p.pioneer_cost() {
        Region::CascadeConnected
    } else if p.e >= p.full_cost() {
        Region::CoordinationGap
    } else {
        Region::FundamentallyBlocked
    })
}

/// Minimal beliefs in the high outcome that make a vulnerable type act.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskDominance {
    /// Assurance contract: `k / (e - alpha g(pi))`.
    pub p_assurance: f64,
    /// Post-survey expression: `(alpha g(pi mu) - e) / (alpha [g(pi mu) - g(pi)])`.
    pub p_survey: f64,
}

pub fn risk_dominance_thresholds(p: &CompareParams) -> Result<RiskDominance> {
    let region = classify_region(p)?;
    if region != Region::CoordinationGap {
        return Err(Error::RegionMismatch {
            actual: region.as_str(),
            required: Region::CoordinationGap.as_str(),
        });
    }
    let margin = p.e - p.full_cost();
    let p_assurance = if p.k == 0.0 {
        0.0
    } else if margin > 0.0 {
        p.k / margin
    } else {
        f64::INFINITY
    };
    let p_survey = (p.pioneer_cost() - p.e) / (p.pioneer_cost() - p.full_cost());
    Ok(RiskDominance {
        p_assurance,
        p_survey,
    })
}

/// Largest friction at which a vulnerable signer still gains under full
/// participation, `e - alpha g(pi)`. Reported alongside the classification;
/// it does not change the region.
pub fn full_participation_k_max(p: &CompareParams) -> Result<f64> {
    p.validate()?;
    Ok(p.e - p.full_cost())
}

/// Minimal invulnerable base `pi mu` for an open-petition cascade to complete
/// under `g(q) = exp(-xi q)`: `ln(alpha / e) / xi`, 0 when `alpha <= e`, and
/// infinite when `xi = 0 < alpha - e`.
pub fn cascade_min_base(xi: f64, alpha: f64, e: f64) -> Result<f64> {
    check_nonneg("xi", xi)?;
    positive("alpha", alpha)?;
    positive("e", e)?;
    if alpha <= e {
        return Ok(0.0);
    }
    if xi == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((alpha / e).ln() / xi)
}

/// Same threshold for any nonincreasing `g`: the smallest `x` in `[0, 1]` with
/// `alpha g(x) <= e`, located by bisection. `None` when even `x = 1` fails.
pub fn cascade_min_base_general(safety: &SafetySpec, alpha: f64, e: f64) -> Result<Option<f64>> {
    safety.validate()?;
    positive("alpha", alpha)?;
    positive("e", e)?;
    let ok = |x: f64| alpha * safety.eval(x) <= e;
    if ok(0.0) {
        return Ok(Some(0.0));
    }
    if !ok(1.0) {
        return Ok(None);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

/// Integer thresholds `T` in `(pi mu N, pi N]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssuranceInterval {
    pub lower: u32,
    pub upper: u32,
    /// Region of the parameter point; the interval is the region-ii recipe.
    pub region: Region,
}

impl AssuranceInterval {
    pub fn len(&self) -> u32 {
        self.upper - self.lower + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, t: u32) -> bool {
        (self.lower..=self.upper).contains(&t)
    }
}

/// `floor(x)` that treats values within 1e-9 of an integer as that integer,
/// so products like `0.6 * 0.2 * 100` land on the intended side.
fn snapped_floor(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r
    } else {
        x.floor()
    }
}

pub fn assurance_interval(p: &CompareParams) -> Result<AssuranceInterval> {
    let region = classify_region(p)?;
    let n = f64::from(p.n);
    let (base, full) = (p.pi * p.mu * n, p.pi * n);
    let lower = snapped_floor(base) as u32 + 1;
    let upper = snapped_floor(full) as u32;
    if lower > upper {
        return Err(Error::EmptyInterval {
            lower: base,
            upper: full,
        });
    }
    Ok(AssuranceInterval {
        lower,
        upper,
        region,
    })
}

/// One row of a region sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionRow {
    pub e: f64,
    pub alpha: f64,
    pub pi: f64,
    pub mu: f64,
    pub region: Region,
    pub p_a: Option<f64>,
    pub p_s: Option<f64>,
}

pub fn region_row(p: &CompareParams) -> Result<RegionRow> {
    let region = classify_region(p)?;
    let rd = risk_dominance_thresholds(p).ok();
    Ok(RegionRow {
        e: p.e,
        alpha: p.alpha,
        pi: p.pi,
        mu: p.mu,
        region,
        p_a: rd.map(|r| r.p_assurance),
        p_s: rd.map(|r| r.p_survey),
    })
}
