//! Outside-observer updating about prevalence `pi` from the success or failure
//! of an assurance threshold.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::binomial::{compensated_sum, BinomialRow};
use crate::design::{check_range, first_argmax};
use crate::dist::BetaPrior;
use crate::equilibrium::solve_fixed_point;
use crate::error::{check_unit, Error, Result};
use crate::model::ModelParams;

pub const DEFAULT_NODES: usize = 201;
pub const NODE_MARGIN: f64 = 1e-6;

/// Composite-trapezoid rule on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Quadrature {
    pub fn trapezoid(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n < 2 || !(hi > lo) {
            return Err(Error::InvalidParams(format!(
                "trapezoid rule needs n >= 2 and lo < hi, got n = {n} on [{lo}, {hi}]"
            )));
        }
        let h = (hi - lo) / (n - 1) as f64;
        let nodes = (0..n).map(|i| lo + h * i as f64).collect();
        let mut weights = vec![h; n];
        weights[0] *= 0.5;
        weights[n - 1] *= 0.5;
        Ok(Quadrature { nodes, weights })
    }

    /// Default prevalence grid: 201 nodes on `[1e-6, 1 - 1e-6]`.
    pub fn prevalence(n: usize) -> Result<Self> {
        Self::trapezoid(NODE_MARGIN, 1.0 - NODE_MARGIN, n)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(usize, f64) -> f64) -> f64 {
        compensated_sum(
            self.nodes
                .iter()
                .zip(&self.weights)
                .enumerate()
                .map(|(i, (&x, &w))| w * f(i, x)),
        )
    }
}

/// Participatory equilibrium at prevalence `pi`, iterated from `q0 = pi`.
fn q_high_at(t: u32, pi: f64, params: &ModelParams) -> Result<f64> {
    let p = params.with_pi(pi);
    Ok(solve_fixed_point(p.threshold(t)?, pi, &p)?.q)
}

/// `L_T(pi) = P(M >= T | q^H(T; pi))` with `N` trials.
pub fn likelihood_success(t: u32, pi: f64, params: &ModelParams) -> Result<f64> {
    check_unit("pi", pi)?;
    params.threshold(t)?;
    if pi == 0.0 {
        return Ok(0.0);
    }
    let q = q_high_at(t, pi, params)?;
    Ok(BinomialRow::new(params.n, q)?.tail(t))
}

/// Bayesian update of a Beta prior on a binary event with likelihood `L(pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosteriorShift {
    pub prior_mean: f64,
    /// Prior-marginal probability of the event.
    pub marginal_success: f64,
    /// `E[pi | event] - E[pi]`.
    pub delta_success: f64,
    /// `E[pi | not event] - E[pi]`.
    pub delta_failure: f64,
}

impl PosteriorShift {
    /// `likelihood[i]` is `L` at `quad.nodes[i]`. Errors when the event or its
    /// complement has zero prior probability.
    pub fn from_likelihood(quad: &Quadrature, prior: &BetaPrior, likelihood: &[f64]) -> Result<Self> {
        prior.validate()?;
        if likelihood.len() != quad.len() {
            return Err(Error::InvalidParams("likelihood length must match quadrature".into()));
        }
        let dens: Vec<f64> = quad.nodes.iter().map(|&x| prior.pdf(x)).collect();
        let z = quad.integrate(|i, _| dens[i]);
        let mean_num = quad.integrate(|i, x| x * dens[i]);
        let succ = quad.integrate(|i, _| likelihood[i] * dens[i]);
        let succ_num = quad.integrate(|i, x| x * likelihood[i] * dens[i]);
        let fail = quad.integrate(|i, _| (1.0 - likelihood[i]) * dens[i]);
        let fail_num = quad.integrate(|i, x| x * (1.0 - likelihood[i]) * dens[i]);
        let marginal = succ / z;
        if !(succ > 0.0 && fail > 0.0) {
            return Err(Error::DegenerateUpdate { marginal });
        }
        let prior_mean = mean_num / z;
        Ok(PosteriorShift {
            prior_mean,
            marginal_success: marginal,
            delta_success: succ_num / succ - prior_mean,
            delta_failure: fail_num / fail - prior_mean,
        })
    }

    pub fn marginal_failure(&self) -> f64 {
        1.0 - self.marginal_success
    }

    /// `Ψ_O = P(M >= T) Δ_π(T)`.
    pub fn psi(&self) -> f64 {
        self.marginal_success * self.delta_success
    }
}

/// Success likelihoods `L_T(pi)` at every quadrature node for a set of
/// thresholds. Independent of the prior, so one table serves a prior family.
#[derive(Debug, Clone, PartialEq)]
pub struct LikelihoodTable {
    pub quad: Quadrature,
    pub ts: Vec<u32>,
    rows: Vec<Result<Vec<f64>>>,
}

impl LikelihoodTable {
    pub fn build(params: &ModelParams, ts: &[u32], quad: Quadrature) -> Result<Self> {
        params.validate()?;
        for &t in ts {
            params.threshold(t)?;
        }
        let cells: Vec<(usize, usize)> = (0..ts.len())
            .flat_map(|i| (0..quad.len()).map(move |j| (i, j)))
            .collect();
        let values: Vec<Result<f64>> = cells
            .par_iter()
            .map(|&(i, j)| likelihood_success(ts[i], quad.nodes[j], params))
            .collect();
        let rows = values
            .chunks(quad.len())
            .map(|chunk| chunk.iter().cloned().collect::<Result<Vec<f64>>>())
            .collect();
        Ok(LikelihoodTable {
            quad,
            ts: ts.to_vec(),
            rows,
        })
    }

    pub fn row(&self, t: u32) -> Result<&[f64]> {
        let i = self
            .ts
            .iter()
            .position(|&x| x == t)
            .ok_or_else(|| Error::InvalidParams(format!("threshold {t} not in table")))?;
        match &self.rows[i] {
            Ok(r) => Ok(r),
            Err(e) => Err(e.clone()),
        }
    }

    pub fn shift(&self, t: u32, prior: &BetaPrior) -> Result<PosteriorShift> {
        PosteriorShift::from_likelihood(&self.quad, prior, self.row(t)?)
    }
}

fn single_shift(t: u32, prior: &BetaPrior, params: &ModelParams) -> Result<PosteriorShift> {
    let table = LikelihoodTable::build(params, &[t], Quadrature::prevalence(DEFAULT_NODES)?)?;
    table.shift(t, prior)
}

/// `Δ_π(T) = E[pi | M >= T] - E[pi]`.
pub fn posterior_shift_success(t: u32, prior: &BetaPrior, params: &ModelParams) -> Result<f64> {
    Ok(single_shift(t, prior, params)?.delta_success)
}

/// `E[pi | M < T] - E[pi]`.
pub fn posterior_shift_failure(t: u32, prior: &BetaPrior, params: &ModelParams) -> Result<f64> {
    Ok(single_shift(t, prior, params)?.delta_failure)
}

/// Overton objective with its components.
pub fn psi_overton(t: u32, prior: &BetaPrior, params: &ModelParams) -> Result<PosteriorShift> {
    single_shift(t, prior, params)
}

/// `E[pi | M = m] - E[pi]` when the full count is revealed (`m >= T`).
pub fn exact_count_shift(
    t: u32,
    m: u32,
    prior: &BetaPrior,
    params: &ModelParams,
    quad: &Quadrature,
) -> Result<f64> {
    params.validate()?;
    prior.validate()?;
    params.threshold(t)?;
    if m < t || m > params.n {
        return Err(Error::InvalidParams(format!(
            "revealed count must satisfy T <= m <= N, got m = {m}"
        )));
    }
    let lik: Vec<f64> = quad
        .nodes
        .par_iter()
        .map(|&pi| Ok(BinomialRow::new(params.n, q_high_at(t, pi, params)?)?.pmf(m)))
        .collect::<Result<_>>()?;
    let dens: Vec<f64> = quad.nodes.iter().map(|&x| prior.pdf(x)).collect();
    let z = quad.integrate(|i, _| dens[i]);
    let mean = quad.integrate(|i, x| x * dens[i]) / z;
    let ev = quad.integrate(|i, _| lik[i] * dens[i]);
    if !(ev > 0.0) {
        return Err(Error::DegenerateUpdate { marginal: ev / z });
    }
    Ok(quad.integrate(|i, x| x * lik[i] * dens[i]) / ev - mean)
}

/// Inputs of the window-entry test. No defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OvertonGapSpec {
    pub kappa: f64,
    pub c_indiv: f64,
    pub tau_bar: f64,
}

/// Whether a posterior shift of `shift` moves the position inside the window;
/// returns `(enters, margin)` with `enters` iff `margin >= 0`.
pub fn overton_entry(shift: f64, gap: &OvertonGapSpec) -> Result<(bool, f64)> {
    if !(gap.kappa > 0.0) {
        return Err(Error::Domain {
            name: "kappa",
            value: gap.kappa,
            expected: "> 0",
        });
    }
    let margin = shift - (gap.c_indiv - gap.tau_bar) / gap.kappa;
    Ok((margin >= 0.0, margin))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OvertonEntry {
    pub t: u32,
    pub shift: Option<PosteriorShift>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OvertonCurve {
    pub prior: BetaPrior,
    pub entries: Vec<OvertonEntry>,
    pub argmax_t: Option<u32>,
    pub max_value: f64,
    pub partial: bool,
}

impl OvertonCurve {
    pub fn from_table(table: &LikelihoodTable, prior: &BetaPrior) -> Self {
        let entries: Vec<OvertonEntry> = table
            .ts
            .iter()
            .map(|&t| match table.shift(t, prior) {
                Ok(s) => OvertonEntry {
                    t,
                    shift: Some(s),
                    error: None,
                },
                Err(e) => OvertonEntry {
                    t,
                    shift: None,
                    error: Some(e.to_string()),
                },
            })
            .collect();
        let partial = entries.iter().any(|e| e.shift.is_none());
        let best = first_argmax(entries.iter().filter_map(|e| e.shift.map(|s| (e.t, s.psi()))));
        OvertonCurve {
            prior: *prior,
            entries,
            argmax_t: best.map(|b| b.0),
            max_value: best.map_or(0.0, |b| b.1),
            partial,
        }
    }

    pub fn get(&self, t: u32) -> Option<&PosteriorShift> {
        self.entries
            .iter()
            .find(|e| e.t == t)
            .and_then(|e| e.shift.as_ref())
    }
}

/// Overton curve over `t_range` with the default 201-node prevalence grid.
pub fn overton_curve(
    prior: &BetaPrior,
    params: &ModelParams,
    t_range: std::ops::RangeInclusive<u32>,
) -> Result<OvertonCurve> {
    check_range(&t_range, params.n)?;
    let ts: Vec<u32> = t_range.collect();
    let table = LikelihoodTable::build(params, &ts, Quadrature::prevalence(DEFAULT_NODES)?)?;
    Ok(OvertonCurve::from_table(&table, prior))
}
