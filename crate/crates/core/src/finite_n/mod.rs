//! Finite-N benchmark: exact pivotality with posterior uncertainty over a
//! latent support state `theta`, solved as a monotone cutoff profile over a
//! discretized private signal `m = theta + sigma eps`.

mod isotonic;
mod reduced;

pub use isotonic::isotonic_project;
pub use reduced::{
    comparative_statics, pivotal_approx_check, psi_reduced_form, reduced_form_curve, scalar_cutoff,
    ComparativeStatics, PivotalApprox, ReducedFormParams, ScalarCutoff,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::binomial::{compensated_sum, BinomialRow};
use crate::design::{check_range, first_argmax};
use crate::dist::{normal_pdf, BetaPrior, TypeDistribution};
use crate::equilibrium::{DAMPING, FIXED_POINT_TOL, MAX_ITERATIONS};
use crate::error::{check_nonneg, Error, Result};
use crate::overton::{Quadrature, NODE_MARGIN};

/// Weights used by the isotonic projection of the best-response update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum IsotonicWeights {
    Uniform,
    /// Prior-predictive density of each signal node times its quadrature
    /// weight, so the projection is least squares in the signal distribution.
    #[default]
    SignalMarginal,
}

/// Grid sizes; the node locations are derived from `sigma_m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub signal_nodes: usize,
    /// Signal span is `[-span_sd sigma_m, 1 + span_sd sigma_m]`.
    pub span_sd: f64,
    pub theta_nodes: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            signal_nodes: 41,
            span_sd: 4.0,
            theta_nodes: 101,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteNParams {
    pub n: u32,
    pub theta_prior: BetaPrior,
    /// Common material value of success.
    pub v_bar: f64,
    pub s: f64,
    /// Constant net signing utility.
    pub eta: f64,
    pub sigma_m: f64,
    #[serde(default)]
    pub type_dist: TypeDistribution,
    #[serde(default)]
    pub grid: GridSpec,
    pub epsilon_trim: f64,
    pub x_clip: f64,
    #[serde(default)]
    pub isotonic_weights: IsotonicWeights,
}

impl FiniteNParams {
    pub fn benchmark() -> Self {
        FiniteNParams {
            n: 100,
            theta_prior: BetaPrior { a: 13.0, b: 7.0 },
            v_bar: 0.5,
            s: 0.8,
            eta: 0.1,
            sigma_m: 0.1,
            type_dist: TypeDistribution::StandardNormal,
            grid: GridSpec::default(),
            epsilon_trim: 1e-9,
            x_clip: 4.0,
            isotonic_weights: IsotonicWeights::SignalMarginal,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.n > crate::binomial::MAX_TRIALS {
            return Err(Error::InvalidParams(format!("N must be in [2, 100000], got {}", self.n)));
        }
        self.theta_prior.validate()?;
        check_nonneg("v_bar", self.v_bar)?;
        check_nonneg("s", self.s)?;
        if !self.eta.is_finite() {
            return Err(Error::Domain {
                name: "eta",
                value: self.eta,
                expected: "finite",
            });
        }
        for (name, v) in [
            ("sigma_m", self.sigma_m),
            ("epsilon_trim", self.epsilon_trim),
            ("x_clip", self.x_clip),
            ("span_sd", self.grid.span_sd),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain {
                    name,
                    value: v,
                    expected: "> 0",
                });
            }
        }
        if self.grid.signal_nodes < 2 || self.grid.theta_nodes < 2 {
            return Err(Error::InvalidParams("grids need at least 2 nodes".into()));
        }
        self.type_dist.validate()
    }
}

/// Discretized signal and state spaces with the Bayes tables they imply.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalGrid {
    pub signal: Quadrature,
    pub theta: Quadrature,
    /// Prior density times quadrature weight at each theta node.
    prior_mass: Vec<f64>,
    /// `posterior[k][j]`: posterior weight of `theta_j` given `m_k`.
    posterior: Vec<Vec<f64>>,
    /// `signal_given_theta[j][k]`: grid-normalized signal mass at `m_k` given
    /// `theta_j`.
    signal_given_theta: Vec<Vec<f64>>,
    /// Isotonic projection weights per signal node.
    iso_weights: Vec<f64>,
}

impl SignalGrid {
    pub fn build(p: &FiniteNParams) -> Result<Self> {
        p.validate()?;
        let spread = p.grid.span_sd * p.sigma_m;
        let signal = Quadrature::trapezoid(-spread, 1.0 + spread, p.grid.signal_nodes)?;
        let theta = Quadrature::trapezoid(NODE_MARGIN, 1.0 - NODE_MARGIN, p.grid.theta_nodes)?;
        let prior_mass: Vec<f64> = theta
            .nodes
            .iter()
            .zip(&theta.weights)
            .map(|(&t, &w)| p.theta_prior.pdf(t) * w)
            .collect();
        let lik = |m: f64, t: f64| normal_pdf(m, t, p.sigma_m);
        let mut posterior = Vec::with_capacity(signal.len());
        let mut marginal = Vec::with_capacity(signal.len());
        for &m in &signal.nodes {
            let row: Vec<f64> = theta
                .nodes
                .iter()
                .zip(&prior_mass)
                .map(|(&t, &pm)| lik(m, t) * pm)
                .collect();
            let z = compensated_sum(row.iter().copied());
            if !(z > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "signal node {m} has zero prior-predictive mass"
                )));
            }
            marginal.push(z);
            posterior.push(row.into_iter().map(|v| v / z).collect());
        }
        let signal_given_theta = theta
            .nodes
            .iter()
            .map(|&t| normalized_signal_mass(&signal, t, p.sigma_m))
            .collect::<Result<Vec<_>>>()?;
        let iso_weights = match p.isotonic_weights {
            IsotonicWeights::Uniform => vec![1.0; signal.len()],
            IsotonicWeights::SignalMarginal => marginal
                .iter()
                .zip(&signal.weights)
                .map(|(&z, &w)| z * w)
                .collect(),
        };
        Ok(SignalGrid {
            signal,
            theta,
            prior_mass,
            posterior,
            signal_given_theta,
            iso_weights,
        })
    }

    pub fn posterior_at_node(&self, k: usize) -> &[f64] {
        &self.posterior[k]
    }

    pub fn isotonic_weights(&self) -> &[f64] {
        &self.iso_weights
    }

    /// `alpha(theta_j)` at every theta node.
    fn alphas(&self, cutoffs: &[f64], types: &TypeDistribution) -> Vec<f64> {
        let sign: Vec<f64> = cutoffs.iter().map(|&x| types.sf(x)).collect();
        self.theta
            .nodes
            .iter()
            .zip(&self.signal_given_theta)
            .map(|(&t, fm)| (t * compensated_sum(sign.iter().zip(fm).map(|(a, b)| a * b))).clamp(0.0, t))
            .collect()
    }
}

fn normalized_signal_mass(signal: &Quadrature, theta: f64, sigma: f64) -> Result<Vec<f64>> {
    let raw: Vec<f64> = signal
        .nodes
        .iter()
        .zip(&signal.weights)
        .map(|(&m, &w)| normal_pdf(m, theta, sigma) * w)
        .collect();
    let z = compensated_sum(raw.iter().copied());
    if !(z > 0.0) {
        return Err(Error::InvalidParams(format!(
            "signal grid carries no mass at theta = {theta}"
        )));
    }
    Ok(raw.into_iter().map(|v| v / z).collect())
}

/// Posterior weights over the theta nodes after observing signal `m`.
pub fn theta_posterior(m: f64, p: &FiniteNParams) -> Result<Vec<f64>> {
    let grid = SignalGrid::build(p)?;
    posterior_for(&grid, m, p.sigma_m)
}

fn posterior_for(grid: &SignalGrid, m: f64, sigma: f64) -> Result<Vec<f64>> {
    if !m.is_finite() {
        return Err(Error::Domain {
            name: "m",
            value: m,
            expected: "finite",
        });
    }
    let row: Vec<f64> = grid
        .theta
        .nodes
        .iter()
        .zip(&grid.prior_mass)
        .map(|(&t, &pm)| normal_pdf(m, t, sigma) * pm)
        .collect();
    let z = compensated_sum(row.iter().copied());
    if !(z > 0.0) {
        return Err(Error::InvalidParams(format!("signal {m} has zero posterior mass")));
    }
    Ok(row.into_iter().map(|v| v / z).collect())
}

/// Signal-indexed cutoffs on the grid, nonincreasing in the signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffProfile {
    pub signals: Vec<f64>,
    pub cutoffs: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

impl CutoffProfile {
    pub fn constant(signals: Vec<f64>, x: f64) -> Self {
        let cutoffs = vec![x; signals.len()];
        CutoffProfile {
            signals,
            cutoffs,
            residual: 0.0,
            iterations: 0,
        }
    }

    /// Piecewise-linear interpolation, flat outside the grid.
    pub fn cutoff_at(&self, m: f64) -> f64 {
        let (s, c) = (&self.signals, &self.cutoffs);
        if m <= s[0] {
            return c[0];
        }
        if m >= s[s.len() - 1] {
            return c[c.len() - 1];
        }
        let i = s.partition_point(|&x| x <= m) - 1;
        let t = (m - s[i]) / (s[i + 1] - s[i]);
        c[i] + t * (c[i + 1] - c[i])
    }

    pub fn is_monotone(&self) -> bool {
        self.cutoffs.windows(2).all(|w| w[1] <= w[0])
    }
}

/// `alpha(theta; T) = theta * E[1 - F(x*(m)) | theta]`, with the signal
/// expectation taken on the grid.
pub fn alpha_theta(theta: f64, profile: &CutoffProfile, p: &FiniteNParams) -> Result<f64> {
    crate::error::check_unit("theta", theta)?;
    let signal = Quadrature {
        nodes: profile.signals.clone(),
        weights: trapezoid_weights(&profile.signals),
    };
    let fm = normalized_signal_mass(&signal, theta, p.sigma_m)?;
    let v = compensated_sum(
        profile
            .cutoffs
            .iter()
            .zip(&fm)
            .map(|(&x, &w)| p.type_dist.sf(x) * w),
    );
    Ok((theta * v).clamp(0.0, theta))
}

fn trapezoid_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut w = vec![0.0; n];
    for i in 0..n.saturating_sub(1) {
        let h = 0.5 * (x[i + 1] - x[i]);
        w[i] += h;
        w[i + 1] += h;
    }
    w
}

/// Posterior-weighted pivotality and success terms for one signal value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PivotalStats {
    /// `E[P(M_-i = T-1 | theta) | m]`.
    pub piv: f64,
    /// `E[P(M_-i >= T-1 | theta) | m]`.
    pub p_plus: f64,
    /// `E[P(M_-i >= T | theta) | m]`.
    pub p_zero: f64,
}

/// Per-theta binomial terms with `N - 1` trials.
struct ThetaTerms {
    pmf: Vec<f64>,
    plus: Vec<f64>,
    zero: Vec<f64>,
}

impl ThetaTerms {
    fn new(alphas: &[f64], n: u32, t: u32) -> Result<Self> {
        let mut out = ThetaTerms {
            pmf: Vec::with_capacity(alphas.len()),
            plus: Vec::with_capacity(alphas.len()),
            zero: Vec::with_capacity(alphas.len()),
        };
        for &a in alphas {
            let row = BinomialRow::new(n - 1, a)?;
            out.pmf.push(row.pmf(t - 1));
            out.plus.push(row.tail(t - 1));
            out.zero.push(row.tail(t));
        }
        Ok(out)
    }

    fn mix(&self, post: &[f64]) -> PivotalStats {
        // normalizing by the weight total keeps constant terms exact
        let total = compensated_sum(post.iter().copied());
        let dot = |v: &[f64]| (compensated_sum(v.iter().zip(post).map(|(a, b)| a * b)) / total).clamp(0.0, 1.0);
        PivotalStats {
            piv: dot(&self.pmf),
            p_plus: dot(&self.plus),
            p_zero: dot(&self.zero),
        }
    }
}

fn check_t(t: u32, n: u32) -> Result<()> {
    if t < 1 || t >= n {
        return Err(Error::InvalidParams(format!(
            "threshold must satisfy 1 <= T < N, got T = {t}, N = {n}"
        )));
    }
    Ok(())
}

pub fn pivotal_stats(m: f64, t: u32, profile: &CutoffProfile, p: &FiniteNParams) -> Result<PivotalStats> {
    check_t(t, p.n)?;
    let grid = SignalGrid::build(p)?;
    check_profile(profile, &grid)?;
    let alphas = grid.alphas(&profile.cutoffs, &p.type_dist);
    let post = posterior_for(&grid, m, p.sigma_m)?;
    Ok(ThetaTerms::new(&alphas, p.n, t)?.mix(&post))
}

fn check_profile(profile: &CutoffProfile, grid: &SignalGrid) -> Result<()> {
    if profile.signals != grid.signal.nodes || profile.cutoffs.len() != grid.signal.len() {
        return Err(Error::InvalidParams("profile does not live on the parameter grid".into()));
    }
    Ok(())
}

fn raw_update(stats: &PivotalStats, p: &FiniteNParams) -> f64 {
    let num = stats.piv * p.v_bar + stats.p_zero * p.s + p.eta;
    (-num / stats.p_plus.max(p.epsilon_trim)).clamp(-p.x_clip, p.x_clip)
}

fn update_on_grid(grid: &SignalGrid, cutoffs: &[f64], t: u32, p: &FiniteNParams) -> Result<Vec<f64>> {
    let alphas = grid.alphas(cutoffs, &p.type_dist);
    let terms = ThetaTerms::new(&alphas, p.n, t)?;
    Ok(grid
        .posterior
        .iter()
        .map(|post| raw_update(&terms.mix(post), p))
        .collect())
}

/// Unprojected best response
/// `x(m) = -(piv v_bar + p_0 s + eta) / max(p_+, eps)`, clipped to `[-X, X]`.
pub fn best_response_update(profile: &CutoffProfile, t: u32, p: &FiniteNParams) -> Result<Vec<f64>> {
    check_t(t, p.n)?;
    let grid = SignalGrid::build(p)?;
    check_profile(profile, &grid)?;
    update_on_grid(&grid, &profile.cutoffs, t, p)
}

fn solve_on_grid(grid: &SignalGrid, t: u32, p: &FiniteNParams) -> Result<CutoffProfile> {
    let mut x = vec![0.0; grid.signal.len()];
    let mut residual = f64::INFINITY;
    for it in 1..=MAX_ITERATIONS {
        let target = isotonic_project(&update_on_grid(grid, &x, t, p)?, &grid.iso_weights)?;
        residual = 0.0;
        for (xi, ti) in x.iter_mut().zip(&target) {
            let next = (1.0 - DAMPING) * *xi + DAMPING * ti;
            residual = f64::max(residual, (next - *xi).abs());
            *xi = next;
        }
        if residual < FIXED_POINT_TOL {
            return Ok(CutoffProfile {
                signals: grid.signal.nodes.clone(),
                cutoffs: x,
                residual,
                iterations: it,
            });
        }
    }
    Err(Error::ProfileNonConvergence {
        iterations: MAX_ITERATIONS,
        residual,
    })
}

/// Damped iteration of the projected best response from the zero profile.
pub fn solve_profile(t: u32, p: &FiniteNParams) -> Result<CutoffProfile> {
    check_t(t, p.n)?;
    let grid = SignalGrid::build(p)?;
    solve_on_grid(&grid, t, p)
}

/// Finite-N objective at one threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiniteNPoint {
    pub t: u32,
    /// Effective threshold `max{T, M_O}` used for the success event.
    pub t_effective: u32,
    pub success_prob: f64,
    /// `E[theta | success] - E[theta]`.
    pub delta_theta: f64,
    pub value: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// `P(M >= T)` and `Δ_θ` under the prior for success likelihood `L(theta_j)`.
/// Both are 0 when success has no prior mass.
pub(crate) fn theta_shift(grid: &SignalGrid, likelihood: &[f64]) -> (f64, f64) {
    let th = &grid.theta.nodes;
    let z = compensated_sum(grid.prior_mass.iter().copied());
    let mean = compensated_sum(th.iter().zip(&grid.prior_mass).map(|(t, w)| t * w)) / z;
    let succ = compensated_sum(likelihood.iter().zip(&grid.prior_mass).map(|(l, w)| l * w));
    if !(succ > 0.0) {
        return (0.0, 0.0);
    }
    let num = compensated_sum(
        th.iter()
            .zip(likelihood)
            .zip(&grid.prior_mass)
            .map(|((t, l), w)| t * l * w),
    );
    (succ / z, num / succ - mean)
}

fn point_on_grid(grid: &SignalGrid, t: u32, floor: u32, p: &FiniteNParams) -> Result<FiniteNPoint> {
    let profile = solve_on_grid(grid, t, p)?;
    let alphas = grid.alphas(&profile.cutoffs, &p.type_dist);
    let t_eff = t.max(floor);
    let lik = alphas
        .iter()
        .map(|&a| Ok(if t_eff > p.n { 0.0 } else { BinomialRow::new(p.n, a)?.tail(t_eff) }))
        .collect::<Result<Vec<f64>>>()?;
    let (success_prob, delta_theta) = theta_shift(grid, &lik);
    Ok(FiniteNPoint {
        t,
        t_effective: t_eff,
        success_prob,
        delta_theta,
        value: success_prob * delta_theta,
        residual: profile.residual,
        iterations: profile.iterations,
    })
}

/// `Ψ_FN(T) = P(M >= T) Δ_θ(T)`.
pub fn psi_finite_n(t: u32, p: &FiniteNParams) -> Result<FiniteNPoint> {
    psi_finite_n_durable(t, 0, p)
}

/// Durable variant: success requires `M >= max{T, M_O}`; the profile is still
/// solved at the announced `T`.
pub fn psi_finite_n_durable(t: u32, floor: u32, p: &FiniteNParams) -> Result<FiniteNPoint> {
    check_t(t, p.n)?;
    let grid = SignalGrid::build(p)?;
    point_on_grid(&grid, t, floor, p)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteNEntry {
    pub t: u32,
    pub point: Option<FiniteNPoint>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteNCurve {
    pub objective: String,
    pub entries: Vec<FiniteNEntry>,
    pub argmax_t: Option<u32>,
    pub max_value: f64,
    pub partial: bool,
}

impl FiniteNCurve {
    pub(crate) fn assemble(objective: &str, entries: Vec<FiniteNEntry>) -> Self {
        let partial = entries.iter().any(|e| e.point.is_none());
        let best = first_argmax(entries.iter().filter_map(|e| e.point.map(|p| (e.t, p.value))));
        FiniteNCurve {
            objective: objective.to_string(),
            entries,
            argmax_t: best.map(|b| b.0),
            max_value: best.map_or(0.0, |b| b.1),
            partial,
        }
    }

    pub fn get(&self, t: u32) -> Option<&FiniteNPoint> {
        self.entries
            .iter()
            .find(|e| e.t == t)
            .and_then(|e| e.point.as_ref())
    }
}

/// `Ψ_FN` over `t_range`; `floor > 0` gives the durable objective.
pub fn finite_n_curve(
    p: &FiniteNParams,
    t_range: std::ops::RangeInclusive<u32>,
    floor: u32,
) -> Result<FiniteNCurve> {
    check_range(&t_range, p.n)?;
    let grid = SignalGrid::build(p)?;
    let ts: Vec<u32> = t_range.collect();
    let entries = ts
        .par_iter()
        .map(|&t| match point_on_grid(&grid, t, floor, p) {
            Ok(pt) => FiniteNEntry {
                t,
                point: Some(pt),
                error: None,
            },
            Err(e) => FiniteNEntry {
                t,
                point: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    let name = if floor > 0 { "finite_n_durable" } else { "finite_n" };
    Ok(FiniteNCurve::assemble(name, entries))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bench() -> FiniteNParams {
        FiniteNParams::benchmark()
    }

    #[test]
    fn posterior_is_a_distribution() {
        let w = theta_posterior(0.65, &bench()).unwrap();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(w.iter().all(|&v| v >= 0.0));
        let grid = SignalGrid::build(&bench()).unwrap();
        let mean: f64 = grid.theta.nodes.iter().zip(&w).map(|(t, v)| t * v).sum();
        assert!(mean > 0.64 && mean < 0.66, "{mean}");
    }

    #[test]
    fn posterior_mean_lies_between_prior_mean_and_signal() {
        let p = bench();
        let grid = SignalGrid::build(&p).unwrap();
        for m in [0.3, 0.9] {
            let w = theta_posterior(m, &p).unwrap();
            let mean: f64 = grid.theta.nodes.iter().zip(&w).map(|(t, v)| t * v).sum();
            assert!((mean - 0.65) * (m - 0.65) > 0.0 && (mean - m) * (0.65 - m) > 0.0, "{m} {mean}");
        }
    }

    #[test]
    fn uniform_prior_symmetric_posterior() {
        let p = FiniteNParams {
            theta_prior: BetaPrior { a: 1.0, b: 1.0 },
            ..bench()
        };
        let w = theta_posterior(0.5, &p).unwrap();
        let n = w.len();
        for i in 0..n / 2 {
            assert!((w[i] - w[n - 1 - i]).abs() < 1e-12);
        }
    }

    #[test]
    fn posterior_concentrates_with_precise_signals() {
        let p = FiniteNParams {
            sigma_m: 0.01,
            grid: GridSpec {
                theta_nodes: 1001,
                ..GridSpec::default()
            },
            ..bench()
        };
        let grid = SignalGrid::build(&p).unwrap();
        let w = theta_posterior(0.5, &p).unwrap();
        let near: f64 = grid
            .theta
            .nodes
            .iter()
            .zip(&w)
            .filter(|(t, _)| (*t - 0.5).abs() <= 0.05)
            .map(|(_, v)| v)
            .sum();
        assert!(near > 0.99, "{near}");
    }

    #[test]
    fn alpha_limits() {
        let p = bench();
        let grid = SignalGrid::build(&p).unwrap();
        let hi = CutoffProfile::constant(grid.signal.nodes.clone(), 40.0);
        let lo = CutoffProfile::constant(grid.signal.nodes.clone(), -40.0);
        assert!(alpha_theta(0.7, &hi, &p).unwrap() < 1e-300);
        assert!((alpha_theta(0.7, &lo, &p).unwrap() - 0.7).abs() < 1e-15);
        assert_eq!(alpha_theta(0.0, &lo, &p).unwrap(), 0.0);
    }

    #[test]
    fn pivotal_identity_and_edge_cases() {
        let p = bench();
        let grid = SignalGrid::build(&p).unwrap();
        let prof = CutoffProfile::constant(grid.signal.nodes.clone(), -1.0);
        for m in [-0.2, 0.4, 0.65, 1.2] {
            let s = pivotal_stats(m, 50, &prof, &p).unwrap();
            assert!((s.p_plus - s.piv - s.p_zero).abs() < 1e-12);
            let one = pivotal_stats(m, 1, &prof, &p).unwrap();
            assert_eq!(one.p_plus, 1.0);
        }
        // all posterior mass on theta = 0
        let terms = ThetaTerms::new(&[0.0, 0.3], 100, 5).unwrap();
        let s = terms.mix(&[1.0, 0.0]);
        assert_eq!((s.piv, s.p_zero), (0.0, 0.0));
    }

    #[test]
    fn update_arithmetic() {
        let p = FiniteNParams {
            v_bar: 0.0,
            s: 0.0,
            eta: 0.0,
            ..bench()
        };
        let grid = SignalGrid::build(&p).unwrap();
        let prof = CutoffProfile::constant(grid.signal.nodes.clone(), 0.0);
        assert!(best_response_update(&prof, 50, &p).unwrap().iter().all(|&x| x == 0.0));
        let q = bench();
        let stats = PivotalStats {
            piv: 0.0,
            p_plus: 1.0,
            p_zero: 1.0,
        };
        assert!((raw_update(&stats, &q) + 0.9).abs() < 1e-15);
        let tiny = PivotalStats {
            piv: 0.0,
            p_plus: 0.0,
            p_zero: 0.0,
        };
        assert_eq!(raw_update(&tiny, &q), -q.x_clip);
        let neg = FiniteNParams { eta: -0.1, ..bench() };
        assert_eq!(raw_update(&tiny, &neg), neg.x_clip);
    }

    #[test]
    fn zero_incentives_give_zero_profile() {
        let p = FiniteNParams {
            v_bar: 0.0,
            s: 0.0,
            eta: 0.0,
            ..bench()
        };
        let prof = solve_profile(40, &p).unwrap();
        assert!(prof.cutoffs.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn benchmark_profile_is_in_the_cone() {
        let p = bench();
        let prof = solve_profile(56, &p).unwrap();
        assert!(prof.is_monotone());
        assert!(prof.cutoffs.iter().all(|x| x.abs() <= p.x_clip));
        assert!(prof.residual < 1e-8);
        assert!(prof.cutoff_at(-5.0) == prof.cutoffs[0]);
    }

    #[test]
    fn benchmark_objective_is_positive() {
        let pt = psi_finite_n(56, &bench()).unwrap();
        assert!(pt.success_prob > 0.01 && pt.success_prob < 0.99);
        assert!(pt.delta_theta > 0.0);
        let dur = psi_finite_n_durable(56, 60, &bench()).unwrap();
        assert_eq!(dur.t_effective, 60);
        assert!(dur.success_prob < pt.success_prob);
    }

    #[test]
    fn prior_near_zero_gives_no_objective() {
        let grid = SignalGrid::build(&bench()).unwrap();
        let (p, d) = theta_shift(&grid, &vec![0.0; grid.theta.len()]);
        assert_eq!((p, d), (0.0, 0.0));
    }
}
