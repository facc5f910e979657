//! Reduced-form symmetric cutoff with a known prevalence, its comparative
//! statics, and the local-limit approximation to pivotality.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_t, theta_shift, FiniteNCurve, FiniteNEntry, FiniteNParams, FiniteNPoint, SignalGrid};
use crate::binomial::{binom_pmf, BinomialRow};
use crate::design::check_range;
use crate::dist::{normal_pdf, TypeDistribution};
use crate::equilibrium::BISECTION_TOL;
use crate::error::{check_nonneg, check_unit, Error, Result};

const PRESCAN_POINTS: usize = 101;
const DERIVATIVE_STEP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedFormParams {
    pub n: u32,
    pub pi: f64,
    pub s: f64,
    pub eta: f64,
    #[serde(default)]
    pub type_dist: TypeDistribution,
    pub t: u32,
    pub x_clip: f64,
}

impl ReducedFormParams {
    /// Reduced form of the finite-N benchmark at matched prevalence `E[theta]`.
    pub fn matched(p: &FiniteNParams, t: u32) -> Self {
        ReducedFormParams {
            n: p.n,
            pi: p.theta_prior.mean(),
            s: p.s,
            eta: p.eta,
            type_dist: p.type_dist.clone(),
            t,
            x_clip: p.x_clip,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_t(self.t, self.n)?;
        check_unit("pi", self.pi)?;
        check_nonneg("s", self.s)?;
        if !(self.x_clip > 0.0 && self.x_clip.is_finite()) {
            return Err(Error::Domain {
                name: "x_clip",
                value: self.x_clip,
                expected: "> 0",
            });
        }
        if !self.eta.is_finite() {
            return Err(Error::Domain {
                name: "eta",
                value: self.eta,
                expected: "finite",
            });
        }
        self.type_dist.validate()
    }

    /// `(p_with, p_without)` at cutoff `x`, i.e. at `q = pi (1 - F(x))`.
    fn probs(&self, x: f64) -> (f64, f64) {
        let q = (self.pi * self.type_dist.sf(x)).clamp(0.0, 1.0);
        // q is in [0, 1] and n - 1 >= 1, so the row always builds
        let row = BinomialRow::new(self.n - 1, q).expect("valid binomial row");
        (row.tail(self.t - 1), row.tail(self.t))
    }

    /// `H(x) = x p_with + s p_without + eta`.
    fn h(&self, x: f64) -> f64 {
        let (pw, pwo) = self.probs(x);
        x * pw + self.s * pwo + self.eta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarCutoff {
    pub x: f64,
    pub h: f64,
    pub p_with: f64,
    pub p_without: f64,
}

/// Lowest root of `H` on `[-X, X]`: a 101-point prescan locates the first sign
/// change, bisection refines it.
pub fn scalar_cutoff(p: &ReducedFormParams) -> Result<ScalarCutoff> {
    p.validate()?;
    let x = p.x_clip;
    let grid: Vec<f64> = (0..PRESCAN_POINTS)
        .map(|i| -x + 2.0 * x * i as f64 / (PRESCAN_POINTS - 1) as f64)
        .collect();
    let vals: Vec<f64> = grid.iter().map(|&g| p.h(g)).collect();
    let mut root = None;
    for i in 0..PRESCAN_POINTS {
        if vals[i] == 0.0 {
            root = Some(grid[i]);
            break;
        }
        if i + 1 < PRESCAN_POINTS && vals[i].signum() != vals[i + 1].signum() && vals[i + 1] != 0.0 {
            let (mut lo, mut hi, mut flo) = (grid[i], grid[i + 1], vals[i]);
            while hi - lo > BISECTION_TOL {
                let mid = 0.5 * (lo + hi);
                let fm = p.h(mid);
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            root = Some(0.5 * (lo + hi));
            break;
        }
    }
    let x_star = root.ok_or(Error::NoSignChange { lo: -x, hi: x })?;
    let (p_with, p_without) = p.probs(x_star);
    Ok(ScalarCutoff {
        x: x_star,
        h: p.h(x_star),
        p_with,
        p_without,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparativeStatics {
    pub x: f64,
    /// `dH/dx` at the root (central difference).
    pub h_x: f64,
    /// `-p_without / H_x`.
    pub dx_ds: f64,
    /// `-1 / H_x`.
    pub dx_deta: f64,
}

pub fn comparative_statics(p: &ReducedFormParams) -> Result<ComparativeStatics> {
    let sol = scalar_cutoff(p)?;
    let h_x = (p.h(sol.x + DERIVATIVE_STEP) - p.h(sol.x - DERIVATIVE_STEP)) / (2.0 * DERIVATIVE_STEP);
    if !(h_x > 0.0) {
        return Err(Error::Unstable { x: sol.x, slope: h_x });
    }
    Ok(ComparativeStatics {
        x: sol.x,
        h_x,
        dx_ds: -sol.p_without / h_x,
        dx_deta: -1.0 / h_x,
    })
}

/// Exact pivotal probability against its normal local-limit approximation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PivotalApprox {
    pub exact: f64,
    pub approx: f64,
    pub gap: f64,
    pub relative_gap: f64,
}

/// `P(Bin(n, q) = T - 1)` against the normal density with mean `n q` and
/// variance `n q (1 - q)` at `T - 1`; `n` is the number of other agents.
pub fn pivotal_approx_check(n: u32, t: u32, q: f64) -> Result<PivotalApprox> {
    if !(0.05..=0.95).contains(&q) {
        return Err(Error::Domain {
            name: "q",
            value: q,
            expected: "in [0.05, 0.95]",
        });
    }
    if t < 1 || t > n + 1 {
        return Err(Error::InvalidParams(format!("need 1 <= T <= n + 1, got T = {t}")));
    }
    let exact = binom_pmf(n, t - 1, q)?;
    let nf = f64::from(n);
    let approx = normal_pdf(f64::from(t - 1), nf * q, (nf * q * (1.0 - q)).sqrt());
    let gap = (exact - approx).abs();
    Ok(PivotalApprox {
        exact,
        approx,
        gap,
        relative_gap: gap / exact,
    })
}

fn reduced_point(grid: &SignalGrid, t: u32, p: &FiniteNParams) -> Result<FiniteNPoint> {
    let sol = scalar_cutoff(&ReducedFormParams::matched(p, t))?;
    let sign = p.type_dist.sf(sol.x);
    let lik = grid
        .theta
        .nodes
        .iter()
        .map(|&th| Ok(BinomialRow::new(p.n, (th * sign).clamp(0.0, 1.0))?.tail(t)))
        .collect::<Result<Vec<f64>>>()?;
    let (success_prob, delta_theta) = theta_shift(grid, &lik);
    Ok(FiniteNPoint {
        t,
        t_effective: t,
        success_prob,
        delta_theta,
        value: success_prob * delta_theta,
        residual: sol.h.abs(),
        iterations: 0,
    })
}

/// Reduced-form comparison objective: the scalar cutoff solved at the prior
/// mean prevalence, then evaluated as `P(M >= T) Δ_θ(T)` over the same prior
/// with signing rate `theta (1 - F(x*))`.
pub fn psi_reduced_form(t: u32, p: &FiniteNParams) -> Result<FiniteNPoint> {
    check_t(t, p.n)?;
    let grid = SignalGrid::build(p)?;
    reduced_point(&grid, t, p)
}

pub fn reduced_form_curve(p: &FiniteNParams, t_range: std::ops::RangeInclusive<u32>) -> Result<FiniteNCurve> {
    check_range(&t_range, p.n)?;
    let grid = SignalGrid::build(p)?;
    let ts: Vec<u32> = t_range.collect();
    let entries = ts
        .par_iter()
        .map(|&t| match reduced_point(&grid, t, p) {
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
    Ok(FiniteNCurve::assemble("reduced_form", entries))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rf(t: u32) -> ReducedFormParams {
        ReducedFormParams::matched(&FiniteNParams::benchmark(), t)
    }

    #[test]
    fn no_incentives_root_at_zero() {
        let p = ReducedFormParams {
            s: 0.0,
            eta: 0.0,
            ..rf(50)
        };
        assert_eq!(scalar_cutoff(&p).unwrap().x, 0.0);
    }

    #[test]
    fn benchmark_root_is_nonpositive_and_accurate() {
        for t in [10, 53, 70] {
            let sol = scalar_cutoff(&rf(t)).unwrap();
            assert!(sol.x <= 0.0, "T = {t}: {}", sol.x);
            assert!(sol.h.abs() < 1e-9, "T = {t}: {}", sol.h);
        }
        let sol = scalar_cutoff(&rf(53)).unwrap();
        assert!((sol.x + 0.867).abs() < 5e-3, "{}", sol.x);
    }

    #[test]
    fn high_thresholds_have_no_interior_cutoff() {
        assert!(matches!(scalar_cutoff(&rf(90)), Err(Error::NoSignChange { .. })));
    }

    #[test]
    fn no_sign_change_is_reported() {
        let p = ReducedFormParams { eta: 50.0, ..rf(50) };
        assert!(matches!(scalar_cutoff(&p), Err(Error::NoSignChange { .. })));
    }

    #[test]
    fn statics_are_negative_and_match_resolves() {
        let base = rf(53);
        let cs = comparative_statics(&base).unwrap();
        assert!(cs.dx_ds < 0.0 && cs.dx_deta < 0.0);
        let d = 1e-4;
        let fd = |f: &dyn Fn(f64) -> ReducedFormParams| {
            (scalar_cutoff(&f(d)).unwrap().x - scalar_cutoff(&f(-d)).unwrap().x) / (2.0 * d)
        };
        let fd_s = fd(&|h| ReducedFormParams { s: base.s + h, ..base.clone() });
        let fd_eta = fd(&|h| ReducedFormParams { eta: base.eta + h, ..base.clone() });
        assert!((fd_s / cs.dx_ds - 1.0).abs() < 0.01, "{fd_s} vs {}", cs.dx_ds);
        assert!((fd_eta / cs.dx_deta - 1.0).abs() < 0.01, "{fd_eta} vs {}", cs.dx_deta);
    }

    #[test]
    fn statics_formula_at_zero_stigma() {
        let p = ReducedFormParams { s: 0.0, ..rf(53) };
        let cs = comparative_statics(&p).unwrap();
        let sol = scalar_cutoff(&p).unwrap();
        assert_eq!(cs.dx_ds, -sol.p_without / cs.h_x);
    }

    #[test]
    fn local_limit_examples() {
        let a = pivotal_approx_check(99, 50, 0.5).unwrap();
        assert!((a.exact - 0.0796).abs() < 1e-4);
        assert!((a.approx - 0.0798).abs() < 1e-3);
        let b = pivotal_approx_check(9, 5, 0.5).unwrap();
        assert!((b.exact - 0.2461).abs() < 1e-4);
        let big = pivotal_approx_check(999, 495, 0.5).unwrap();
        assert!(big.relative_gap < a.relative_gap);
        assert!(pivotal_approx_check(99, 50, 0.01).is_err());
    }
}
