//! Exact binomial point masses, upper tails and truncated means.
//!
//! A row of the Binomial(n, q) pmf is built from the mode outward with the
//! multiplicative ratio `pmf(k+1)/pmf(k) = (n-k)/(k+1) * q/(1-q)`. The mode
//! itself is evaluated with Loader's saddle-point form, which keeps the whole
//! row at close to full relative precision for `n` up to [`MAX_TRIALS`]. Tails
//! are accumulated with compensated (Neumaier) summation.

use crate::error::{check_unit, Error, Result};

/// Largest trial count accepted by the exact routines.
pub const MAX_TRIALS: u32 = 100_000;

/// Neumaier compensated sum.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        for v in iter {
            s.add(v);
        }
        s
    }
}

pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

// Stirling-series error term ln(n!) - ln(sqrt(2 pi n) (n/e)^n).
fn stirlerr(n: f64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if n <= 15.0 {
        let ln_sqrt_2pi = 0.918_938_533_204_672_7;
        return libm::lgamma(n + 1.0) - (n + 0.5) * n.ln() + n - ln_sqrt_2pi;
    }
    let nn = n * n;
    if n > 500.0 {
        return (S0 - S1 / nn) / n;
    }
    if n > 80.0 {
        return (S0 - (S1 - S2 / nn) / nn) / n;
    }
    if n > 35.0 {
        return (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / n;
    }
    (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / n
}

// Deviance term x ln(x/np) + np - x, evaluated without cancellation.
fn bd0(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let mut v = (x - np) / (x + np);
        let s0 = (x - np) * v;
        let mut s = s0;
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let s1 = s + ej / f64::from(2 * j + 1);
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        return s;
    }
    x * (x / np).ln() + np - x
}

/// Single binomial point mass via Loader's algorithm; `0 < q < 1`, `0 < k < n`.
fn loader_pmf(n: u32, k: u32, q: f64) -> f64 {
    let (nf, kf) = (f64::from(n), f64::from(k));
    let lc = stirlerr(nf) - stirlerr(kf) - stirlerr(nf - kf) - bd0(kf, nf * q) - bd0(nf - kf, nf * (1.0 - q));
    let lf = (2.0 * std::f64::consts::PI).ln() + kf.ln() + (-kf / nf).ln_1p();
    (lc - 0.5 * lf).exp()
}

fn check_trials(n: u32) -> Result<()> {
    if n > MAX_TRIALS {
        return Err(Error::Domain {
            name: "n",
            value: f64::from(n),
            expected: "<= 100000",
        });
    }
    Ok(())
}

/// The full Binomial(n, q) pmf, reused for tails and truncated moments.
#[derive(Debug, Clone)]
pub struct BinomialRow {
    n: u32,
    q: f64,
    pmf: Vec<f64>,
}

impl BinomialRow {
    pub fn new(n: u32, q: f64) -> Result<Self> {
        check_trials(n)?;
        check_unit("q", q)?;
        let len = n as usize + 1;
        let mut pmf = vec![0.0; len];
        if q == 0.0 {
            pmf[0] = 1.0;
        } else if q == 1.0 {
            pmf[len - 1] = 1.0;
        } else if n == 0 {
            pmf[0] = 1.0;
        } else {
            let mode = (((f64::from(n) + 1.0) * q).floor() as u32).min(n);
            pmf[mode as usize] = if mode == 0 {
                (f64::from(n) * (-q).ln_1p()).exp()
            } else if mode == n {
                (f64::from(n) * q.ln()).exp()
            } else {
                loader_pmf(n, mode, q)
            };
            let odds = q / (1.0 - q);
            for k in mode..n {
                let ku = k as usize;
                pmf[ku + 1] = pmf[ku] * (f64::from(n - k) / f64::from(k + 1)) * odds;
            }
            for k in (1..=mode).rev() {
                let ku = k as usize;
                pmf[ku - 1] = pmf[ku] * (f64::from(k) / f64::from(n - k + 1)) / odds;
            }
        }
        Ok(BinomialRow { n, q, pmf })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn pmf(&self, k: u32) -> f64 {
        self.pmf.get(k as usize).copied().unwrap_or(0.0)
    }

    pub fn pmf_slice(&self) -> &[f64] {
        &self.pmf
    }

    /// `P(X >= k_min)`; exactly 1 for `k_min = 0` and 0 above `n`.
    pub fn tail(&self, k_min: u32) -> f64 {
        if k_min == 0 {
            return 1.0;
        }
        if k_min > self.n {
            return 0.0;
        }
        // below the mean the upper tail is near 1; sum the short side instead
        if f64::from(k_min) <= f64::from(self.n) * self.q {
            let lower = compensated_sum(self.pmf[..k_min as usize].iter().copied());
            (1.0 - lower).max(0.0)
        } else {
            compensated_sum(self.pmf[k_min as usize..].iter().copied())
        }
    }

    /// `E[X/n | X >= t]`.
    pub fn trunc_mean_share(&self, t: u32) -> Result<f64> {
        if t == 0 {
            return Ok(self.q);
        }
        let tail = self.tail(t);
        if tail <= 0.0 {
            return Err(Error::ConditioningOnNull {
                n: self.n,
                k_min: t,
                q: self.q,
            });
        }
        let nf = f64::from(self.n);
        let first = compensated_sum(
            self.pmf[t as usize..]
                .iter()
                .enumerate()
                .map(|(j, &p)| f64::from(t + j as u32) / nf * p),
        );
        Ok((first / tail).clamp(f64::from(t) / nf, 1.0))
    }
}

/// `sum_{k=k_min}^{n} C(n,k) q^k (1-q)^(n-k)`.
pub fn binom_tail(n: u32, k_min: u32, q: f64) -> Result<f64> {
    check_unit("q", q)?;
    check_trials(n)?;
    if k_min == 0 {
        return Ok(1.0);
    }
    if k_min > n {
        if k_min > n + 1 {
            return Err(Error::Domain {
                name: "k_min",
                value: f64::from(k_min),
                expected: "<= n + 1",
            });
        }
        return Ok(0.0);
    }
    Ok(BinomialRow::new(n, q)?.tail(k_min))
}

pub fn binom_pmf(n: u32, k: u32, q: f64) -> Result<f64> {
    check_unit("q", q)?;
    check_trials(n)?;
    if k > n {
        return Ok(0.0);
    }
    if q == 0.0 {
        return Ok(if k == 0 { 1.0 } else { 0.0 });
    }
    if q == 1.0 {
        return Ok(if k == n { 1.0 } else { 0.0 });
    }
    if k == 0 {
        return Ok((f64::from(n) * (-q).ln_1p()).exp());
    }
    if k == n {
        return Ok((f64::from(n) * q.ln()).exp());
    }
    Ok(loader_pmf(n, k, q))
}

/// Conditional mean share `E[M/N | M >= t]` under `M ~ Binomial(N, q)`.
pub fn trunc_mean_share(n: u32, t: u32, q: f64) -> Result<f64> {
    BinomialRow::new(n, q)?.trunc_mean_share(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn choose(n: u64, k: u64) -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    }

    #[test]
    fn ten_coin_flips_tail() {
        // C(10,5..10) sums to 638
        let v = binom_tail(10, 5, 0.5).unwrap();
        assert!((v - 638.0 / 1024.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_tails() {
        assert_eq!(binom_tail(99, 46, 0.0).unwrap(), 0.0);
        assert_eq!(binom_tail(99, 0, 0.3).unwrap(), 1.0);
        assert_eq!(binom_tail(99, 100, 0.3).unwrap(), 0.0);
        assert!(binom_tail(99, 101, 0.3).is_err());
        assert!(binom_tail(10, 2, 1.2).is_err());
        assert!(binom_tail(200_000, 2, 0.2).is_err());
    }

    #[test]
    fn pivotal_masses() {
        let p100 = binom_pmf(99, 49, 0.5).unwrap();
        assert!((p100 - 0.0796).abs() < 5e-4, "{p100}");
        let p10 = binom_pmf(9, 4, 0.5).unwrap();
        assert!((p10 - 126.0 / 512.0).abs() < 1e-15);
        assert_eq!(binom_pmf(5, 0, 0.0).unwrap(), 1.0);
        assert_eq!(binom_pmf(5, 5, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn loader_matches_direct_product() {
        for &(n, k, q) in &[(40u32, 17u32, 0.37f64), (99, 3, 0.02), (99, 90, 0.95), (1000, 480, 0.5)] {
            let direct = choose(u64::from(n), u64::from(k))
                * q.powi(k as i32)
                * (1.0 - q).powi((n - k) as i32);
            let v = binom_pmf(n, k, q).unwrap();
            assert!((v - direct).abs() <= 1e-13 * direct.max(1e-300), "{n} {k} {q}: {v} vs {direct}");
        }
    }

    #[test]
    fn row_agrees_with_pointwise_pmf() {
        let row = BinomialRow::new(500, 0.31).unwrap();
        for k in [0u32, 10, 100, 155, 156, 200, 400, 500] {
            let p = binom_pmf(500, k, 0.31).unwrap();
            assert!((row.pmf(k) - p).abs() <= 1e-12 * p + 1e-300, "k = {k}");
        }
        let total = compensated_sum(row.pmf_slice().iter().copied());
        assert!((total - 1.0).abs() < 1e-13);
    }

    #[test]
    fn truncated_mean_edge_cases() {
        assert_eq!(trunc_mean_share(50, 0, 0.37).unwrap(), 0.37);
        assert_eq!(trunc_mean_share(2, 2, 0.5).unwrap(), 1.0);
        assert!(matches!(
            trunc_mean_share(10, 3, 0.0),
            Err(Error::ConditioningOnNull { .. })
        ));
        let v = trunc_mean_share(100, 47, 0.468).unwrap();
        assert!(v >= 0.47);
    }

    #[test]
    fn large_n_is_normalized() {
        let row = BinomialRow::new(MAX_TRIALS, 0.4321).unwrap();
        let total = compensated_sum(row.pmf_slice().iter().copied());
        assert!((total - 1.0).abs() < 1e-10, "{total}");
        assert!((row.tail(43_210) - 0.5).abs() < 0.01);
    }
}
