//! Threshold-design objectives and their optimization over `T`.
//!
//! Every objective is evaluated at the participatory equilibrium `q^H(T)`,
//! obtained by damped iteration from the optimistic start `q0 = pi`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::binomial::{binom_tail, BinomialRow};
use crate::equilibrium::{enumerate_fixed_points, high_equilibrium};
use crate::error::{check_nonneg, check_unit, Error, Result};
use crate::model::{ModelParams, Threshold};

/// `Δ(T,q) = E[M/N | M >= T] - q` for `M ~ Binomial(N, q)`.
pub fn excess_share(n: u32, t: u32, q: f64) -> Result<f64> {
    if t == 0 {
        return Ok(0.0);
    }
    let row = BinomialRow::new(n, q)?;
    Ok((row.trunc_mean_share(t)? - q).max(0.0))
}

/// Per-threshold evaluation of a design objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignPoint {
    pub t: u32,
    pub tau: f64,
    pub q_high: f64,
    /// Success probability of the (effective) threshold at `q_high`.
    pub success_prob: f64,
    pub delta: f64,
    /// Multiplier applied on top of `success_prob * delta` (σ(T) for the ex
    /// ante objective, 1 otherwise).
    pub weight: f64,
    pub value: f64,
}

/// Success probability and excess share at effective threshold `t_eff`,
/// holding participation at `q`. Zero when success is impossible.
fn revelation_value(n: u32, t_eff: u32, q: f64) -> Result<(f64, f64)> {
    if t_eff > n {
        return Ok((0.0, 0.0));
    }
    let row = BinomialRow::new(n, q)?;
    let p = row.tail(t_eff);
    if p <= 0.0 {
        return Ok((0.0, 0.0));
    }
    let delta = (row.trunc_mean_share(t_eff)? - q).max(0.0);
    Ok((p, delta))
}

fn point(threshold: Threshold, q_high: f64, t_eff: u32, weight: f64) -> Result<DesignPoint> {
    let (success_prob, delta) = revelation_value(threshold.n(), t_eff, q_high)?;
    Ok(DesignPoint {
        t: threshold.t(),
        tau: threshold.tau(),
        q_high,
        success_prob,
        delta,
        weight,
        value: weight * success_prob * delta,
    })
}

/// Conditional objective `Ψ_H(T) = P(M >= T | q^H) Δ(T, q^H)`.
pub fn psi_conditional(t: u32, params: &ModelParams) -> Result<DesignPoint> {
    let threshold = params.threshold(t)?;
    let q_high = high_equilibrium(threshold, params)?.q;
    point(threshold, q_high, t, 1.0)
}

/// Distribution of pre-recruited committed seed signers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeedModel {
    Deterministic { k: u32 },
    Poisson { mu: f64 },
    Binomial { n_pool: u32, p_recruit: f64 },
}

impl Default for SeedModel {
    fn default() -> Self {
        SeedModel::Poisson { mu: 15.0 }
    }
}

impl SeedModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SeedModel::Deterministic { .. } => Ok(()),
            SeedModel::Poisson { mu } => check_nonneg("mu", mu),
            SeedModel::Binomial { p_recruit, .. } => check_unit("p_recruit", p_recruit),
        }
    }

    /// `P(k >= k_min)`.
    pub fn prob_at_least(&self, k_min: u32) -> Result<f64> {
        self.validate()?;
        if k_min == 0 {
            return Ok(1.0);
        }
        match *self {
            SeedModel::Deterministic { k } => Ok(if k >= k_min { 1.0 } else { 0.0 }),
            SeedModel::Poisson { mu } => {
                // 1 - P(k < k_min), accumulated from the pmf recurrence
                let mut term = (-mu).exp();
                let mut below = term;
                for j in 1..k_min {
                    term *= mu / f64::from(j);
                    below += term;
                }
                Ok((1.0 - below).clamp(0.0, 1.0))
            }
            SeedModel::Binomial { n_pool, p_recruit } => {
                if k_min > n_pool {
                    Ok(0.0)
                } else {
                    binom_tail(n_pool, k_min, p_recruit)
                }
            }
        }
    }
}

/// Coordination-success probability `σ(T) = P(k >= ceil(N q^U(T)))`; 1 when
/// the map has no tipping point.
pub fn sigma_coordination(t: u32, seed: &SeedModel, params: &ModelParams) -> Result<f64> {
    let threshold = params.threshold(t)?;
    let set = enumerate_fixed_points(threshold, params)?;
    match set.q_unstable {
        None => Ok(1.0),
        Some(q_u) => {
            let k_min = (f64::from(params.n) * q_u).ceil() as u32;
            seed.prob_at_least(k_min)
        }
    }
}

/// Ex ante objective `Ψ_EA(T) = σ(T) Ψ_H(T)`.
pub fn psi_ex_ante(t: u32, seed: &SeedModel, params: &ModelParams) -> Result<DesignPoint> {
    let threshold = params.threshold(t)?;
    let sigma = sigma_coordination(t, seed, params)?;
    let q_high = high_equilibrium(threshold, params)?.q;
    point(threshold, q_high, t, sigma)
}

/// Per-endorser post-disclosure burden `r(M; Ω)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BurdenRule {
    /// `r(M; Ω) = Ω / M`.
    EqualBurden,
    /// `r(m)` for `m = 1..=len`, nonincreasing.
    Table { burden: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OppositionSpec {
    pub omega: f64,
    pub c_bar: f64,
    pub burden_rule: BurdenRule,
}

impl OppositionSpec {
    pub fn equal_burden(omega: f64, c_bar: f64) -> Self {
        OppositionSpec {
            omega,
            c_bar,
            burden_rule: BurdenRule::EqualBurden,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_nonneg("omega", self.omega)?;
        if !(self.c_bar > 0.0 && self.c_bar.is_finite()) {
            return Err(Error::Domain {
                name: "c_bar",
                value: self.c_bar,
                expected: "> 0",
            });
        }
        if let BurdenRule::Table { burden } = &self.burden_rule {
            if burden.windows(2).any(|w| w[1] > w[0]) {
                return Err(Error::InvalidParams("burden table must be nonincreasing in M".into()));
            }
        }
        Ok(())
    }
}

/// Smallest coalition `M_O` whose per-endorser burden is bearable; `N + 1`
/// when no coalition up to `N` suffices, 0 without opposition.
pub fn durability_floor(opp: &OppositionSpec, n: u32) -> Result<u32> {
    opp.validate()?;
    if opp.omega == 0.0 {
        return Ok(0);
    }
    match &opp.burden_rule {
        BurdenRule::EqualBurden => {
            let m = (opp.omega / opp.c_bar).ceil();
            Ok(if m > f64::from(n) { n + 1 } else { m as u32 })
        }
        BurdenRule::Table { burden } => Ok(burden
            .iter()
            .take(n as usize)
            .position(|&r| r <= opp.c_bar)
            .map_or(n + 1, |i| i as u32 + 1)),
    }
}

/// Durable objective: the conditional formula at effective threshold
/// `max{T, M_O}` with participation held at `q^H(T)`.
pub fn psi_durable(t: u32, opp: &OppositionSpec, params: &ModelParams) -> Result<DesignPoint> {
    let threshold = params.threshold(t)?;
    let floor = durability_floor(opp, params.n)?;
    let q_high = high_equilibrium(threshold, params)?.q;
    point(threshold, q_high, t.max(floor), 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Objective {
    Conditional,
    ExAnte { seed: SeedModel },
    Durable { opposition: OppositionSpec },
}

impl Objective {
    pub fn name(&self) -> &'static str {
        match self {
            Objective::Conditional => "conditional",
            Objective::ExAnte { .. } => "ex_ante",
            Objective::Durable { .. } => "durable",
        }
    }

    pub fn evaluate(&self, t: u32, params: &ModelParams) -> Result<DesignPoint> {
        match self {
            Objective::Conditional => psi_conditional(t, params),
            Objective::ExAnte { seed } => psi_ex_ante(t, seed, params),
            Objective::Durable { opposition } => psi_durable(t, opposition, params),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignEntry {
    pub t: u32,
    pub point: Option<DesignPoint>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignCurve {
    pub objective: String,
    pub entries: Vec<DesignEntry>,
    /// Smallest maximizing threshold among successful entries.
    pub argmax_t: Option<u32>,
    pub max_value: f64,
    /// Set when some thresholds failed and the argmax ignores them.
    pub partial: bool,
}

impl DesignCurve {
    pub fn values(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.entries
            .iter()
            .filter_map(|e| e.point.map(|p| (e.t, p.value)))
    }

    pub fn get(&self, t: u32) -> Option<&DesignPoint> {
        self.entries
            .iter()
            .find(|e| e.t == t)
            .and_then(|e| e.point.as_ref())
    }
}

/// Argmax with ties broken toward the smallest `T`.
pub(crate) fn first_argmax(values: impl Iterator<Item = (u32, f64)>) -> Option<(u32, f64)> {
    let mut best: Option<(u32, f64)> = None;
    for (t, v) in values {
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((t, v));
        }
    }
    best
}

pub(crate) fn check_range(t_range: &std::ops::RangeInclusive<u32>, n: u32) -> Result<()> {
    if t_range.is_empty() || *t_range.start() < 1 || *t_range.end() >= n {
        return Err(Error::InvalidParams(format!(
            "threshold range {}..={} must be nonempty within [1, {}]",
            t_range.start(),
            t_range.end(),
            n - 1
        )));
    }
    Ok(())
}

/// Evaluates `objective` at every `T` in `t_range` (in parallel, results in
/// threshold order).
pub fn optimize_threshold(
    objective: &Objective,
    params: &ModelParams,
    t_range: std::ops::RangeInclusive<u32>,
) -> Result<DesignCurve> {
    params.validate()?;
    check_range(&t_range, params.n)?;
    let ts: Vec<u32> = t_range.collect();
    let entries: Vec<DesignEntry> = ts
        .par_iter()
        .map(|&t| match objective.evaluate(t, params) {
            Ok(p) => DesignEntry {
                t,
                point: Some(p),
                error: None,
            },
            Err(e) => DesignEntry {
                t,
                point: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    let partial = entries.iter().any(|e| e.point.is_none());
    let mut curve = DesignCurve {
        objective: objective.name().to_string(),
        entries,
        argmax_t: None,
        max_value: 0.0,
        partial,
    };
    if let Some((t, v)) = first_argmax(curve.values()) {
        curve.argmax_t = Some(t);
        curve.max_value = v;
    }
    Ok(curve)
}
