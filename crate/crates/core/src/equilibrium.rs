//! Type-specific cutoffs, the participation map `S(q;T)` and its fixed points.

use serde::{Deserialize, Serialize};

use crate::binomial::BinomialRow;
use crate::error::{check_nonneg, check_unit, Error, Result};
use crate::model::{CutoffRule, ModelParams, Threshold};

/// Below this success probability the cutoff degenerates to a signed infinity.
pub const P_WITH_FLOOR: f64 = 1e-12;
/// Damping weight on the map in `q <- (1-d) q + d S(q)`.
pub const DAMPING: f64 = 0.3;
pub const FIXED_POINT_TOL: f64 = 1e-8;
pub const MAX_ITERATIONS: usize = 500;
/// Points on the uniform scan grid used to bracket fixed points.
pub const SCAN_POINTS: usize = 2000;
pub const BISECTION_TOL: f64 = 1e-10;
/// Central-difference step for `S'(q)`.
pub const DERIVATIVE_STEP: f64 = 1e-5;
const MERGE_TOL: f64 = 1e-9;
const CONTRACTION_GRID: usize = 2001;

/// Success probabilities faced by one agent given anticipated participation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuccessProbs {
    /// Success probability if the agent signs: `P(M_{-i} >= T-1)`.
    pub p_with: f64,
    /// Success probability if the agent abstains: `P(M_{-i} >= T)`.
    pub p_without: f64,
    /// `P(M_{-i} = T-1)`.
    pub pivotal: f64,
}

impl SuccessProbs {
    fn from_row(row: &BinomialRow, t: u32) -> Self {
        let p_without = row.tail(t);
        let p_with = row.tail(t - 1);
        SuccessProbs {
            p_with,
            p_without,
            pivotal: row.pmf(t - 1),
        }
    }
}

pub fn success_probs(q: f64, threshold: Threshold) -> Result<SuccessProbs> {
    check_unit("q", q)?;
    let row = BinomialRow::new(threshold.n() - 1, q)?;
    Ok(SuccessProbs::from_row(&row, threshold.t()))
}

fn perfect_trust_cutoff(alpha: f64, g: f64, eta: f64, s: f64, probs: &SuccessProbs) -> f64 {
    if probs.p_with <= P_WITH_FLOOR {
        return if eta < 0.0 { f64::INFINITY } else { f64::NEG_INFINITY };
    }
    alpha * g - (probs.p_without * s + eta) / probs.p_with
}

fn leak_adjusted_cutoff(alpha: f64, g: f64, eta: f64, s: f64, rho: f64, probs: &SuccessProbs) -> f64 {
    let exposure = alpha * g;
    if probs.p_with <= P_WITH_FLOOR {
        let gain = eta - (1.0 - rho) * exposure;
        return if gain < 0.0 { f64::INFINITY } else { f64::NEG_INFINITY };
    }
    let leak = (1.0 - probs.p_with) * (1.0 - rho) / probs.p_with;
    exposure * (1.0 + leak) - (probs.p_without * s + eta) / probs.p_with
}

/// Evaluator of `S(q;T)` for fixed parameters and threshold.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ParticipationMap<'a> {
    params: &'a ModelParams,
    t: u32,
}

impl<'a> ParticipationMap<'a> {
    pub(crate) fn new(params: &'a ModelParams, threshold: Threshold) -> Self {
        ParticipationMap {
            params,
            t: threshold.t(),
        }
    }

    fn probs(&self, q: f64) -> SuccessProbs {
        let row = BinomialRow::new(self.params.n - 1, q).expect("q validated by caller");
        SuccessProbs::from_row(&row, self.t)
    }

    fn cutoff_at(&self, alpha: f64, q: f64, probs: &SuccessProbs) -> f64 {
        let p = self.params;
        let g = p.safety.eval(q);
        let eta = p.eta(q);
        match p.cutoff_rule {
            CutoffRule::PerfectTrust => perfect_trust_cutoff(alpha, g, eta, p.s, probs),
            CutoffRule::LeakAdjusted => leak_adjusted_cutoff(alpha, g, eta, p.s, p.rho, probs),
        }
    }

    /// Signing shares `(low, high)` within each vulnerability type.
    pub(crate) fn shares(&self, q: f64) -> (f64, f64) {
        let probs = self.probs(q);
        let dist = &self.params.type_dist;
        let low = dist.sf(self.cutoff_at(self.params.alpha_l, q, &probs));
        let high = dist.sf(self.cutoff_at(self.params.alpha_h, q, &probs));
        (low, high)
    }

    pub(crate) fn eval(&self, q: f64) -> f64 {
        let (low, high) = self.shares(q);
        let lambda = self.params.lambda;
        self.params.pi * ((1.0 - lambda) * low + lambda * high)
    }

    fn derivative(&self, q: f64) -> f64 {
        let h = DERIVATIVE_STEP;
        if q < h {
            (self.eval(q + h) - self.eval(q)) / h
        } else if q > 1.0 - h {
            (self.eval(q) - self.eval(q - h)) / h
        } else {
            (self.eval(q + h) - self.eval(q - h)) / (2.0 * h)
        }
    }
}

fn checked(params: &ModelParams, threshold: Threshold) -> Result<()> {
    params.validate()?;
    if threshold.n() != params.n {
        return Err(Error::InvalidParams(format!(
            "threshold built for N = {} but params have N = {}",
            threshold.n(),
            params.n
        )));
    }
    Ok(())
}

/// Perfect-trust expressive-benefit cutoff `e*_j(q;T)`. Returns `+inf` /
/// `-inf` when success is out of reach and `eta(q)` is negative / nonnegative.
pub fn type_cutoff(alpha_j: f64, q: f64, threshold: Threshold, params: &ModelParams) -> Result<f64> {
    check_nonneg("alpha_j", alpha_j)?;
    let probs = success_probs(q, threshold)?;
    Ok(perfect_trust_cutoff(
        alpha_j,
        params.safety.eval(q),
        params.eta(q),
        params.s,
        &probs,
    ))
}

/// Cutoff when identities leak with probability `1 - rho` on failure.
pub fn type_cutoff_with_trust(
    alpha_j: f64,
    q: f64,
    threshold: Threshold,
    params: &ModelParams,
) -> Result<f64> {
    check_nonneg("alpha_j", alpha_j)?;
    check_unit("rho", params.rho)?;
    let probs = success_probs(q, threshold)?;
    Ok(leak_adjusted_cutoff(
        alpha_j,
        params.safety.eval(q),
        params.eta(q),
        params.s,
        params.rho,
        &probs,
    ))
}

/// Implied signing share `S(q;T)` among the eligible population.
pub fn participation_map(q: f64, threshold: Threshold, params: &ModelParams) -> Result<f64> {
    check_unit("q", q)?;
    checked(params, threshold)?;
    Ok(ParticipationMap::new(params, threshold).eval(q))
}

/// Signing shares `(low, high)` of each vulnerability type at participation `q`.
pub fn type_shares(q: f64, threshold: Threshold, params: &ModelParams) -> Result<(f64, f64)> {
    check_unit("q", q)?;
    checked(params, threshold)?;
    Ok(ParticipationMap::new(params, threshold).shares(q))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPointSolve {
    pub q: f64,
    pub iterations: usize,
    pub residual: f64,
}

pub(crate) fn iterate_map(map: &ParticipationMap<'_>, q0: f64) -> Result<FixedPointSolve> {
    let mut q = q0;
    let mut residual = f64::INFINITY;
    for iterations in 0..=MAX_ITERATIONS {
        let s = map.eval(q);
        residual = (s - q).abs();
        if residual < FIXED_POINT_TOL {
            return Ok(FixedPointSolve {
                q,
                iterations,
                residual,
            });
        }
        q = (1.0 - DAMPING) * q + DAMPING * s;
    }
    Err(Error::NonConvergence {
        iterations: MAX_ITERATIONS,
        last: q,
        residual,
    })
}

/// Damped iteration `q <- 0.7 q + 0.3 S(q;T)` from `q0`.
pub fn solve_fixed_point(threshold: Threshold, q0: f64, params: &ModelParams) -> Result<FixedPointSolve> {
    check_unit("q0", q0)?;
    checked(params, threshold)?;
    iterate_map(&ParticipationMap::new(params, threshold), q0)
}

/// Participatory equilibrium `q^H(T)`: damped iteration from the optimistic start `q0 = pi`.
pub fn high_equilibrium(threshold: Threshold, params: &ModelParams) -> Result<FixedPointSolve> {
    solve_fixed_point(threshold, params.pi, params)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    Unstable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub q: f64,
    pub stability: Stability,
    pub residual: f64,
    /// Numerical `S'(q*)`.
    pub derivative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointSet {
    pub points: Vec<FixedPoint>,
    pub q_low: Option<f64>,
    pub q_unstable: Option<f64>,
    pub q_high: Option<f64>,
    /// Upward crossings of the diagonal where `S` jumps (no root of `S(q) = q`
    /// to tolerance). Such a point still separates the basins of attraction on
    /// either side, so it serves as the tipping point when no smooth unstable
    /// root lies between `q_low` and `q_high`.
    pub jump_crossings: Vec<f64>,
    /// Remaining sign changes that sit on a downward jump of `S`.
    pub rejected_crossings: usize,
}

impl FixedPointSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, f_lo: f64) -> f64 {
    let lo_negative = f_lo < 0.0;
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub(crate) fn enumerate_with(map: &ParticipationMap<'_>) -> FixedPointSet {
    let gap = |q: f64| map.eval(q) - q;
    let grid: Vec<f64> = (0..SCAN_POINTS)
        .map(|i| i as f64 / (SCAN_POINTS - 1) as f64)
        .collect();
    let values: Vec<f64> = grid.iter().map(|&q| gap(q)).collect();

    let mut roots = Vec::new();
    for i in 0..SCAN_POINTS {
        if values[i] == 0.0 {
            roots.push(grid[i]);
            continue;
        }
        if i + 1 < SCAN_POINTS && values[i + 1] != 0.0 && (values[i] < 0.0) != (values[i + 1] < 0.0) {
            roots.push(bisect(gap, grid[i], grid[i + 1], values[i]));
        }
    }

    let mut points: Vec<FixedPoint> = Vec::new();
    let mut jumps = Vec::new();
    let mut rejected = 0;
    for q in roots {
        if points.last().is_some_and(|p| (q - p.q).abs() < MERGE_TOL) {
            continue;
        }
        let residual = gap(q).abs();
        if residual >= FIXED_POINT_TOL {
            let step = DERIVATIVE_STEP.min(q).min(1.0 - q);
            if gap((q - step).max(0.0)) < 0.0 && gap((q + step).min(1.0)) > 0.0 {
                jumps.push(q);
            } else {
                rejected += 1;
            }
            continue;
        }
        let derivative = map.derivative(q);
        let stability = if derivative < 1.0 {
            Stability::Stable
        } else {
            Stability::Unstable
        };
        points.push(FixedPoint {
            q,
            stability,
            residual,
            derivative,
        });
    }

    let stable = || points.iter().filter(|p| p.stability == Stability::Stable);
    let q_low = stable().map(|p| p.q).next();
    let q_high = stable().map(|p| p.q).last();
    let q_unstable = match (q_low, q_high) {
        (Some(lo), Some(hi)) if lo < hi => points
            .iter()
            .find(|p| p.stability == Stability::Unstable && p.q > lo && p.q < hi)
            .map(|p| p.q)
            .or_else(|| jumps.iter().copied().find(|&q| q > lo && q < hi)),
        _ => None,
    };
    FixedPointSet {
        points,
        q_low,
        q_unstable,
        q_high,
        jump_crossings: jumps,
        rejected_crossings: rejected,
    }
}

/// Brackets sign changes of `S(q) - q` on a 2000-point grid, refines each by
/// bisection and classifies stability by the slope of `S` at the root.
pub fn enumerate_fixed_points(threshold: Threshold, params: &ModelParams) -> Result<FixedPointSet> {
    checked(params, threshold)?;
    Ok(enumerate_with(&ParticipationMap::new(params, threshold)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub sup_slope: f64,
    pub argsup: f64,
    pub contraction: bool,
    pub fixed_points: usize,
}

/// Sup of `|S'(q;T)|` over a 2001-point grid; below 1 the map is a contraction
/// and its fixed point is unique.
pub fn contraction_diagnostic(threshold: Threshold, params: &ModelParams) -> Result<ContractionReport> {
    checked(params, threshold)?;
    let map = ParticipationMap::new(params, threshold);
    let (mut sup, mut argsup) = (0.0f64, 0.0);
    for i in 0..CONTRACTION_GRID {
        let q = i as f64 / (CONTRACTION_GRID - 1) as f64;
        let d = map.derivative(q).abs();
        if d > sup {
            sup = d;
            argsup = q;
        }
    }
    let fixed_points = enumerate_with(&map).len();
    Ok(ContractionReport {
        sup_slope: sup,
        argsup,
        contraction: sup < 1.0,
        fixed_points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binomial::binom_pmf;
    use crate::presets;

    fn th(t: u32) -> Threshold {
        Threshold::new(t, 100).unwrap()
    }

    #[test]
    fn success_probability_edge_cases() {
        let p = success_probs(0.37, th(1)).unwrap();
        assert_eq!(p.p_with, 1.0);
        let p = success_probs(0.0, th(5)).unwrap();
        assert_eq!((p.p_with, p.p_without), (0.0, 0.0));
        let p = success_probs(0.468, th(47)).unwrap();
        assert!(p.p_without <= p.p_with);
        assert!((p.pivotal - binom_pmf(99, 46, 0.468).unwrap()).abs() < 1e-12);
        assert!((p.p_with - p.p_without - p.pivotal).abs() < 1e-12);
    }

    #[test]
    fn cutoff_without_corrections_is_exposure() {
        let mut p = presets::baseline();
        p.s = 0.0;
        p.w_bar = 0.0;
        p.k = 0.0;
        let e = type_cutoff(2.0, 0.3, th(20), &p).unwrap();
        assert!((e - 2.0 * (-0.9f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn cutoff_gap_is_exposure_difference() {
        let p = presets::baseline();
        for &(q, t) in &[(0.2, 10), (0.5, 47), (0.8, 70)] {
            let lo = type_cutoff(0.5, q, th(t), &p).unwrap();
            let hi = type_cutoff(2.0, q, th(t), &p).unwrap();
            let g = p.safety.eval(q);
            assert!((hi - lo - 1.5 * g).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_cutoff_sentinels() {
        let p = presets::baseline();
        assert_eq!(type_cutoff(0.5, 0.0, th(2), &p).unwrap(), f64::INFINITY);
        let mut warm = presets::baseline();
        warm.k = 0.0;
        assert_eq!(type_cutoff(0.5, 0.0, th(2), &warm).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn trust_cutoff_reduces_at_full_trust() {
        let p = presets::baseline();
        for &(q, t) in &[(0.1, 5), (0.468, 47), (0.9, 90)] {
            let a = type_cutoff(2.0, q, th(t), &p).unwrap();
            let b = type_cutoff_with_trust(2.0, q, th(t), &p).unwrap();
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn leak_risk_hits_high_type_harder() {
        let mut p = presets::baseline();
        let (q, t) = (0.4, th(47));
        let lo1 = type_cutoff(0.5, q, t, &p).unwrap();
        let hi1 = type_cutoff(2.0, q, t, &p).unwrap();
        p.rho = 0.9;
        let lo9 = type_cutoff_with_trust(0.5, q, t, &p).unwrap();
        let hi9 = type_cutoff_with_trust(2.0, q, t, &p).unwrap();
        assert!(lo9 > lo1);
        assert!(hi9 - hi1 > lo9 - lo1);
    }

    #[test]
    fn zero_prevalence_map_vanishes() {
        let p = presets::baseline().with_pi(0.0);
        for q in [0.0, 0.3, 1.0] {
            assert_eq!(participation_map(q, th(47), &p).unwrap(), 0.0);
        }
        let fp = enumerate_fixed_points(th(47), &p).unwrap();
        assert_eq!(fp.len(), 1);
        assert_eq!(fp.points[0].q, 0.0);
        let r = solve_fixed_point(th(47), 0.8, &p).unwrap();
        assert!(r.q.abs() < 1e-7);
        let c = contraction_diagnostic(th(47), &p).unwrap();
        assert_eq!(c.sup_slope, 0.0);
        assert!(c.contraction);
    }

    #[test]
    fn baseline_map_at_the_optimum() {
        let p = presets::baseline();
        assert!(participation_map(0.0, th(47), &p).unwrap() < 1e-12);
        let r = high_equilibrium(th(47), &p).unwrap();
        assert!((r.q - 0.468).abs() < 5e-4, "{}", r.q);
        let s = participation_map(r.q, th(47), &p).unwrap();
        assert!((s - r.q).abs() < 1e-6);
        let (lo, hi) = type_shares(r.q, th(47), &p).unwrap();
        assert!((lo - 0.77).abs() < 0.01 && (hi - 0.64).abs() < 0.01, "{lo} {hi}");
    }

    #[test]
    fn baseline_tipping_point_at_47_is_a_jump() {
        // Below q = k / w_bar the net signing utility is negative and the tiny
        // success probability magnifies it, so S jumps from ~0 to ~pi there.
        let p = presets::baseline();
        let fp = enumerate_fixed_points(th(47), &p).unwrap();
        assert_eq!(fp.len(), 2, "{fp:?}");
        assert_eq!(fp.jump_crossings.len(), 1, "{fp:?}");
        let (lo, mid, hi) = (fp.q_low.unwrap(), fp.q_unstable.unwrap(), fp.q_high.unwrap());
        assert!(lo < 1e-6 && lo < mid && mid < hi);
        assert!((mid - p.k / p.w_bar).abs() < 1e-6, "{mid}");
        assert!((hi - 0.468).abs() < 5e-4);
        for pt in &fp.points {
            assert!(pt.residual < FIXED_POINT_TOL);
            assert_eq!(pt.stability == Stability::Stable, pt.derivative < 1.0);
        }
        let low = solve_fixed_point(th(47), 0.0, &p).unwrap();
        assert!((low.q - lo).abs() < 1e-6);
        let c = contraction_diagnostic(th(47), &p).unwrap();
        assert!(c.sup_slope > 1.0 && !c.contraction);
    }

    #[test]
    fn equal_vulnerability_gives_equal_shares() {
        let mut p = presets::baseline();
        p.alpha_h = p.alpha_l;
        let (lo, hi) = type_shares(0.4, th(30), &p).unwrap();
        assert_eq!(lo, hi);
    }

    #[test]
    fn rejects_out_of_domain_inputs() {
        let p = presets::baseline();
        assert!(participation_map(1.2, th(47), &p).is_err());
        assert!(solve_fixed_point(th(47), -0.1, &p).is_err());
        let other = Threshold::new(5, 10).unwrap();
        assert!(participation_map(0.2, other, &p).is_err());
    }
}
