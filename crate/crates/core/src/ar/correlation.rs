use serde::{Deserialize, Serialize};

use super::is_constant;
use crate::error::{Error, Result};

/// PACF-threshold lag selection settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LagSelectionConfig {
    pub pacf_threshold: f64,
    pub max_lag: usize,
}

impl Default for LagSelectionConfig {
    fn default() -> Self {
        Self {
            pacf_threshold: 0.1,
            max_lag: 40,
        }
    }
}

impl LagSelectionConfig {
    pub fn validate(&self, n_train: usize) -> Result<()> {
        if !(self.pacf_threshold > 0.0 && self.pacf_threshold < 1.0) {
            return Err(Error::invalid(format!(
                "pacf threshold must lie in (0, 1), got {}",
                self.pacf_threshold
            )));
        }
        if self.max_lag == 0 || 2 * self.max_lag >= n_train {
            return Err(Error::invalid(format!(
                "max lag {} must be positive and below half the series length {}",
                self.max_lag, n_train
            )));
        }
        Ok(())
    }
}

fn check_series(series: &[f64], max_lag: usize) -> Result<()> {
    if series.len() <= max_lag {
        return Err(Error::InsufficientHistory {
            needed: max_lag + 1,
            have: series.len(),
        });
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("series contains non-finite values"));
    }
    if is_constant(series) {
        return Err(Error::ConstantSeries);
    }
    Ok(())
}

/// Sample autocorrelations `r_0..=r_max_lag` of the mean-centred series,
/// using the biased (divide by N) autocovariance estimator.
pub fn acf(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    check_series(series, max_lag)?;
    let n = series.len();
    let mean = series.iter().sum::<f64>() / n as f64;
    let centred: Vec<f64> = series.iter().map(|v| v - mean).collect();
    let c0: f64 = centred.iter().map(|v| v * v).sum();
    if c0 <= 0.0 {
        return Err(Error::ConstantSeries);
    }
    let mut out = Vec::with_capacity(max_lag + 1);
    out.push(1.0);
    for k in 1..=max_lag {
        let ck: f64 = centred[..n - k]
            .iter()
            .zip(&centred[k..])
            .map(|(a, b)| a * b)
            .sum();
        out.push(ck / c0);
    }
    Ok(out)
}

/// Partial autocorrelations by the Durbin-Levinson recursion on the sample
/// ACF. Index `k` holds `phi_kk`; index 0 is 1 by convention.
pub fn pacf(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    durbin_levinson(&acf(series, max_lag)?)
}

fn durbin_levinson(r: &[f64]) -> Result<Vec<f64>> {
    let max_lag = r.len() - 1;
    let mut out = vec![1.0; max_lag + 1];
    if max_lag == 0 {
        return Ok(out);
    }
    // phi holds phi_{k-1, 1..k-1}, indexed from 1.
    let mut phi = vec![0.0; max_lag + 1];
    let mut next = vec![0.0; max_lag + 1];
    phi[1] = r[1];
    out[1] = r[1];
    for k in 2..=max_lag {
        let mut num = r[k];
        let mut den = 1.0;
        for j in 1..k {
            num -= phi[j] * r[k - j];
            den -= phi[j] * r[j];
        }
        if den <= 1e-12 {
            return Err(Error::RecursionBreakdown(k));
        }
        let phi_kk = num / den;
        for j in 1..k {
            next[j] = phi[j] - phi_kk * phi[k - j];
        }
        next[k] = phi_kk;
        std::mem::swap(&mut phi, &mut next);
        out[k] = phi_kk;
    }
    Ok(out)
}

/// All lags in `1..=max_lag` whose |PACF| reaches the threshold, ascending.
/// An empty selection falls back to `[1]`.
pub fn select_lags(series: &[f64], config: &LagSelectionConfig) -> Result<Vec<usize>> {
    config.validate(series.len())?;
    let p = pacf(series, config.max_lag)?;
    let lags: Vec<usize> = (1..=config.max_lag)
        .filter(|&k| p[k].abs() >= config.pacf_threshold)
        .collect();
    Ok(if lags.is_empty() { vec![1] } else { lags })
}

#[cfg(test)]
pub(crate) mod sim {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    /// Simulate `X_t = mu + sum alpha_k X_{t-k} + N(0, 1)` after a burn-in.
    pub fn simulate_ar(mu: f64, alphas: &[f64], n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let burn = 1000;
        let p = alphas.len();
        let mut x = vec![0.0; p];
        for _ in 0..n + burn {
            let t = x.len();
            let v = mu + alphas.iter().enumerate().map(|(i, a)| a * x[t - 1 - i]).sum::<f64>() + noise.sample(&mut rng);
            x.push(v);
        }
        x.split_off(p + burn)
    }

    pub fn white_noise(n: usize, seed: u64) -> Vec<f64> {
        simulate_ar(0.0, &[], n, seed)
    }
}

#[cfg(test)]
mod tests {
    use super::sim::*;
    use super::*;

    #[test]
    fn r0_is_one() {
        let r = acf(&[1.0, 3.0, 2.0, 5.0, 4.0], 3).unwrap();
        assert_eq!(r[0], 1.0);
        assert_eq!(r.len(), 4);
    }

    #[test]
    fn alternating_series_r1_near_minus_one() {
        let s: Vec<f64> = (0..1000).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let r = acf(&s, 2).unwrap();
        // Direct formula: mean 0, c0 = N, c1 = -(N-1)  =>  r1 = -(N-1)/N.
        assert!((r[1] - (-(999.0) / 1000.0)).abs() < 1e-12);
        assert!((r[2] - 998.0 / 1000.0).abs() < 1e-12);
    }

    #[test]
    fn white_noise_acf_small() {
        let s = white_noise(10_000, 7);
        let r = acf(&s, 20).unwrap();
        for k in 1..=20 {
            assert!(r[k].abs() < 0.05, "r_{k} = {}", r[k]);
        }
    }

    #[test]
    fn constant_series_rejected() {
        assert!(matches!(acf(&[0.1; 50], 5), Err(Error::ConstantSeries)));
        assert!(matches!(pacf(&[2.0; 50], 5), Err(Error::ConstantSeries)));
    }

    #[test]
    fn too_short_rejected() {
        assert!(acf(&[1.0, 2.0, 3.0], 3).is_err());
    }

    #[test]
    fn pacf_first_equals_acf_first() {
        let s = simulate_ar(0.0, &[0.6], 500, 3);
        let r = acf(&s, 10).unwrap();
        let p = pacf(&s, 10).unwrap();
        assert_eq!(p[1], r[1]);
    }

    #[test]
    fn pacf_of_ar1() {
        let s = simulate_ar(0.0, &[0.8], 10_000, 11);
        let p = pacf(&s, 10).unwrap();
        assert!(p[1] > 0.75 && p[1] < 0.85, "phi11 = {}", p[1]);
        for k in 2..=10 {
            assert!(p[k].abs() < 0.05, "phi_{k}{k} = {}", p[k]);
        }
    }

    #[test]
    fn pacf_of_ar2() {
        let s = simulate_ar(0.0, &[0.5, 0.3], 10_000, 5);
        let p = pacf(&s, 10).unwrap();
        assert!((p[2] - 0.3).abs() < 0.05, "phi22 = {}", p[2]);
        assert!(p[3].abs() < 0.05, "phi33 = {}", p[3]);
    }

    #[test]
    fn pacf_breakdown_reported() {
        // A perfectly correlated ACF leaves no innovation variance at lag 2.
        assert!(matches!(durbin_levinson(&[1.0, 1.0, 1.0]), Err(Error::RecursionBreakdown(2))));
        let s: Vec<f64> = (0..1000).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let p = pacf(&s, 3).unwrap();
        assert!((p[1] + 0.999).abs() < 1e-12);
    }

    #[test]
    fn lag_selection_fixtures() {
        let cfg = LagSelectionConfig::default();
        assert_eq!(select_lags(&white_noise(10_000, 1), &cfg).unwrap(), vec![1]);
        assert_eq!(select_lags(&simulate_ar(0.0, &[0.8], 10_000, 2), &cfg).unwrap(), vec![1]);
        assert_eq!(select_lags(&simulate_ar(0.0, &[0.5, 0.3], 10_000, 3), &cfg).unwrap(), vec![1, 2]);
    }

    #[test]
    fn lag_selection_config_checked() {
        let s = white_noise(100, 1);
        let bad = LagSelectionConfig { pacf_threshold: 1.5, max_lag: 10 };
        assert!(select_lags(&s, &bad).is_err());
        let bad = LagSelectionConfig { pacf_threshold: 0.1, max_lag: 50 };
        assert!(select_lags(&s, &bad).is_err());
    }

    #[test]
    fn non_contiguous_selection_possible() {
        // Sparse AR with lags 1 and 7 only.
        let mut alphas = vec![0.0; 7];
        alphas[0] = 0.4;
        alphas[6] = 0.35;
        let s = simulate_ar(0.0, &alphas, 10_000, 9);
        let lags = select_lags(&s, &LagSelectionConfig::default()).unwrap();
        assert!(lags.contains(&1) && lags.contains(&7), "{lags:?}");
        assert!(!lags.contains(&4), "{lags:?}");
    }
}
