//! Simulation oracles: the computed quantities are compared against direct
//! simulation of the underlying game within three standard errors.

use assurance_core::equilibrium::solve_fixed_point;
use assurance_core::finite_n::{psi_finite_n, solve_profile, FiniteNParams};
use assurance_core::overton::psi_overton;
use assurance_core::presets;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::{Beta, Binomial, Distribution, StandardNormal};
use rayon::prelude::*;

const DRAWS: usize = 1_000_000;
const CHUNKS: usize = 100;

/// Sums `f(rng)` over `DRAWS` draws in fixed chunks with per-chunk seeds, so
/// the result does not depend on the thread count.
fn simulate<F>(seed: u64, f: F) -> Vec<(f64, f64)>
where
    F: Fn(&mut StdRng) -> (f64, f64) + Sync,
{
    (0..CHUNKS)
        .into_par_iter()
        .map(|c| {
            let mut rng = StdRng::seed_from_u64(seed ^ (c as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
            (0..DRAWS / CHUNKS).map(|_| f(&mut rng)).collect::<Vec<_>>()
        })
        .flatten()
        .collect()
}

#[test]
fn finite_n_success_probability_matches_simulation() {
    let p = FiniteNParams::benchmark();
    let prior = Beta::new(p.theta_prior.a, p.theta_prior.b).unwrap();
    for (i, t) in [40u32, 57, 70].into_iter().enumerate() {
        let profile = solve_profile(t, &p).unwrap();
        let computed = psi_finite_n(t, &p).unwrap().success_prob;
        let draws = simulate(1000 + i as u64, |rng| {
            let theta: f64 = prior.sample(rng);
            let mut m = 0u32;
            for _ in 0..p.n {
                if rng.gen::<f64>() >= theta {
                    continue;
                }
                let eps: f64 = rng.sample(StandardNormal);
                let x: f64 = rng.sample(StandardNormal);
                if x >= profile.cutoff_at(theta + p.sigma_m * eps) {
                    m += 1;
                }
            }
            (if m >= t { 1.0 } else { 0.0 }, 0.0)
        });
        let mean = draws.iter().map(|d| d.0).sum::<f64>() / DRAWS as f64;
        let se = (mean * (1.0 - mean) / DRAWS as f64).sqrt();
        assert!(
            (mean - computed).abs() < 3.0 * se,
            "T = {t}: simulated {mean} vs computed {computed} (se {se})"
        );
    }
}

#[test]
fn overton_shift_matches_simulation() {
    let base = presets::baseline();
    let prior = presets::overton_prior();
    let t = 46;
    let computed = psi_overton(t, &prior, &base).unwrap();
    // q_high(T; pi) on a fine grid, linearly interpolated per draw
    let grid: Vec<f64> = (0..=4000).map(|i| f64::from(i) / 4000.0).collect();
    let q_high: Vec<f64> = grid
        .par_iter()
        .map(|&pi| {
            if pi == 0.0 {
                return 0.0;
            }
            let p = base.with_pi(pi);
            solve_fixed_point(p.threshold(t).unwrap(), pi, &p).unwrap().q
        })
        .collect();
    let beta = Beta::new(prior.a, prior.b).unwrap();
    let draws = simulate(77, |rng| {
        let pi: f64 = beta.sample(rng);
        let x = pi * 4000.0;
        let i = (x as usize).min(3999);
        let q = q_high[i] + (x - i as f64) * (q_high[i + 1] - q_high[i]);
        let m = Binomial::new(u64::from(base.n), q.clamp(0.0, 1.0)).unwrap().sample(rng);
        if m >= u64::from(t) {
            (1.0, pi)
        } else {
            (0.0, pi)
        }
    });
    let succ: Vec<f64> = draws.iter().filter(|d| d.0 == 1.0).map(|d| d.1).collect();
    let n = succ.len() as f64;
    let mean = succ.iter().sum::<f64>() / n;
    let var = succ.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    let target = computed.prior_mean + computed.delta_success;
    assert!(
        (mean - target).abs() < 3.0 * se,
        "simulated E[pi | success] {mean} vs computed {target} (se {se})"
    );
    let p_hat = n / DRAWS as f64;
    let p_se = (p_hat * (1.0 - p_hat) / DRAWS as f64).sqrt();
    assert!((p_hat - computed.marginal_success).abs() < 3.0 * p_se);
}
