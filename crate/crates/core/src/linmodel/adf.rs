use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::ols::ols;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Deterministic terms in the test regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdfTrend {
    #[default]
    Constant,
    ConstantTrend,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxLag {
    /// floor(12·(n/100)^(1/4)).
    #[default]
    Auto,
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalValues {
    pub one_pct: f64,
    pub five_pct: f64,
    pub ten_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdfResult {
    pub statistic: f64,
    pub p_value: f64,
    pub used_lag: usize,
    pub max_lag: usize,
    pub criterion: &'static str,
    pub trend: AdfTrend,
    /// Observations in the final regression.
    pub nobs: usize,
    pub critical_values: CriticalValues,
}

impl AdfResult {
    pub fn rejects_at(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

pub fn schwert_maxlag(n: usize) -> usize {
    (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}

/// Augmented Dickey-Fuller test with the lag order chosen by AIC.
///
/// Candidate orders 0..=maxlag are compared on the common sample that the
/// largest order allows; the chosen order is then refitted on every row it
/// can use.
pub fn adf_test(series: &[f64], maxlag: MaxLag, trend: AdfTrend) -> Result<AdfResult> {
    let n = series.len();
    let maxlag = match maxlag {
        MaxLag::Auto => schwert_maxlag(n),
        MaxLag::Fixed(m) => m,
    };
    if n < 20 + maxlag {
        return Err(Error::insufficient(format!(
            "ADF needs at least {} observations for maxlag {maxlag}, got {n}",
            20 + maxlag
        )));
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("series contains non-finite values"));
    }
    if series.iter().all(|&v| v == series[0]) {
        return Err(Error::degenerate("series is constant"));
    }

    let mut best: Option<(f64, usize)> = None;
    for p in 0..=maxlag {
        let (x, y, names) = adf_design(series, p, maxlag + 1, trend);
        let fit = ols(&x, &y, &names)?;
        let m = fit.n as f64;
        let ssr: f64 = fit.residuals.iter().map(|e| e * e).sum();
        let llf = -m / 2.0 * ((2.0 * std::f64::consts::PI).ln() + (ssr / m).ln() + 1.0);
        let aic = -2.0 * llf + 2.0 * (fit.k + 1) as f64;
        if best.is_none_or(|(b, _)| aic < b) {
            best = Some((aic, p));
        }
    }
    let used_lag = best.expect("at least one candidate").1;
    let (x, y, names) = adf_design(series, used_lag, used_lag + 1, trend);
    let fit = ols(&x, &y, &names)?;
    let statistic = fit.t_stats[1];
    Ok(AdfResult {
        statistic,
        p_value: mackinnon_p(statistic, trend),
        used_lag,
        max_lag: maxlag,
        criterion: "aic",
        trend,
        nobs: fit.n,
        critical_values: critical_values(fit.n, trend),
    })
}

/// Δyₜ on yₜ₋₁, Δyₜ₋₁..Δyₜ₋ₚ (and a trend) for t ≥ `first`.
fn adf_design(y: &[f64], p: usize, first: usize, trend: AdfTrend) -> (Matrix, Vec<f64>, Vec<String>) {
    let rows = y.len() - first;
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(p + 2);
    cols.push((first..y.len()).map(|t| y[t - 1]).collect());
    for l in 1..=p {
        cols.push((first..y.len()).map(|t| y[t - l] - y[t - l - 1]).collect());
    }
    let mut names: Vec<String> = std::iter::once("level_lag1".to_string())
        .chain((1..=p).map(|l| format!("diff_lag{l}")))
        .collect();
    if trend == AdfTrend::ConstantTrend {
        cols.push((1..=rows).map(|t| t as f64).collect());
        names.push("trend".into());
    }
    let target = (first..y.len()).map(|t| y[t] - y[t - 1]).collect();
    (
        Matrix::from_columns(&cols).expect("equal-length columns"),
        target,
        names,
    )
}

struct Surface {
    max: f64,
    min: f64,
    star: f64,
    small: [f64; 3],
    large: [f64; 4],
    crit: [[f64; 4]; 3],
}

// MacKinnon (1994) p-value polynomials and MacKinnon (2010) critical-value
// response surfaces, single-series case.
const CONSTANT: Surface = Surface {
    max: 2.74,
    min: -18.83,
    star: -1.61,
    small: [2.1659, 1.4412, 0.038269],
    large: [1.7339, 0.93202, -0.12745, -0.010368],
    crit: [
        [-3.43035, -6.5393, -16.786, -79.433],
        [-2.86154, -2.8903, -4.234, -40.040],
        [-2.56677, -1.5384, -2.809, 0.0],
    ],
};

const CONSTANT_TREND: Surface = Surface {
    max: 0.7,
    min: -16.18,
    star: -2.89,
    small: [3.2512, 1.6047, 0.049588],
    large: [2.5261, 0.61654, -0.37956, -0.060285],
    crit: [
        [-3.95877, -9.0531, -28.428, -134.155],
        [-3.41049, -4.3904, -9.036, -45.374],
        [-3.12705, -2.5856, -3.925, -22.380],
    ],
};

fn surface(trend: AdfTrend) -> &'static Surface {
    match trend {
        AdfTrend::Constant => &CONSTANT,
        AdfTrend::ConstantTrend => &CONSTANT_TREND,
    }
}

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, b| acc * x + b)
}

/// Asymptotic p-value of a Dickey-Fuller τ statistic.
pub fn mackinnon_p(stat: f64, trend: AdfTrend) -> f64 {
    let s = surface(trend);
    if stat > s.max {
        return 1.0;
    }
    if stat < s.min {
        return 0.0;
    }
    let z = if stat <= s.star {
        poly(&s.small, stat)
    } else {
        poly(&s.large, stat)
    };
    Normal::standard().cdf(z)
}

/// Finite-sample 1/5/10% critical values for `nobs` observations.
pub fn critical_values(nobs: usize, trend: AdfTrend) -> CriticalValues {
    let t = nobs as f64;
    let cv = |c: &[f64; 4]| c[0] + c[1] / t + c[2] / (t * t) + c[3] / (t * t * t);
    let s = surface(trend);
    CriticalValues {
        one_pct: cv(&s.crit[0]),
        five_pct: cv(&s.crit[1]),
        ten_pct: cv(&s.crit[2]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn ar1(rho: f64, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut y = vec![0.0; n];
        for t in 1..n {
            let e: f64 = StandardNormal.sample(&mut rng);
            y[t] = rho * y[t - 1] + e;
        }
        y
    }

    #[test]
    fn p_value_reference_points() {
        // The 5% asymptotic critical value maps to p ≈ 0.05.
        assert!((mackinnon_p(-2.86154, AdfTrend::Constant) - 0.05).abs() < 2e-3);
        assert!((mackinnon_p(-3.43035, AdfTrend::Constant) - 0.01).abs() < 1e-3);
        assert!((mackinnon_p(-3.41049, AdfTrend::ConstantTrend) - 0.05).abs() < 2e-3);
        assert_eq!(mackinnon_p(3.0, AdfTrend::Constant), 1.0);
        assert_eq!(mackinnon_p(-20.0, AdfTrend::Constant), 0.0);
        let mut prev = 0.0;
        for i in 0..200 {
            let p = mackinnon_p(-8.0 + i as f64 * 0.05, AdfTrend::Constant);
            assert!(p >= prev - 1e-12);
            prev = p;
        }
    }

    #[test]
    fn schwert_rule() {
        assert_eq!(schwert_maxlag(397), 16);
        assert_eq!(schwert_maxlag(500), 17);
        assert_eq!(schwert_maxlag(100), 12);
    }

    #[test]
    fn stationary_rejects_and_walk_does_not() {
        let r = adf_test(&ar1(0.5, 500, 3), MaxLag::Auto, AdfTrend::Constant).unwrap();
        assert!(r.p_value < 0.01, "{r:?}");
        let r = adf_test(&ar1(1.0, 500, 3), MaxLag::Auto, AdfTrend::Constant).unwrap();
        assert!(r.p_value > 0.05, "{r:?}");
    }

    #[test]
    fn scale_invariance() {
        let y = ar1(0.8, 300, 9);
        let a = adf_test(&y, MaxLag::Auto, AdfTrend::Constant).unwrap();
        let scaled: Vec<f64> = y.iter().map(|v| v * 250.0).collect();
        let b = adf_test(&scaled, MaxLag::Auto, AdfTrend::Constant).unwrap();
        assert_eq!(a.used_lag, b.used_lag);
        assert!((a.statistic - b.statistic).abs() < 1e-8);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            adf_test(&[5.0; 100], MaxLag::Fixed(2), AdfTrend::Constant),
            Err(Error::Degenerate(_))
        ));
        assert!(adf_test(&ar1(0.5, 25, 1), MaxLag::Fixed(6), AdfTrend::Constant).is_err());
    }
}
