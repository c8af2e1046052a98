use serde::{Deserialize, Serialize};

use super::ols::LinearFit;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::stats;

/// Bartlett truncation lag for the Newey-West estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HacLag {
    #[default]
    Auto,
    Fixed(usize),
}

impl HacLag {
    pub fn resolve(self, n: usize) -> usize {
        match self {
            HacLag::Auto => auto_lag(n),
            HacLag::Fixed(l) => l,
        }
    }
}

/// floor(4·(n/100)^(2/9)).
pub fn auto_lag(n: usize) -> usize {
    (4.0 * (n as f64 / 100.0).powf(2.0 / 9.0)).floor() as usize
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HacInference {
    pub lag: usize,
    pub std_errors: Vec<f64>,
    pub t_stats: Vec<f64>,
    pub p_values: Vec<f64>,
    #[serde(skip)]
    pub covariance: Matrix,
}

/// Newey-West covariance (ZᵀZ)⁻¹ S (ZᵀZ)⁻¹ with
/// S = Σₗ wₗ Σₜ (gₜgₜ₋ₗᵀ + gₜ₋ₗgₜᵀ), gₜ = zₜeₜ, wₗ = 1 − ℓ/(L+1).
/// No small-sample scaling is applied. `x` is the design without intercept.
pub fn newey_west(fit: &LinearFit, x: &Matrix, lag: HacLag) -> Result<HacInference> {
    let n = fit.n;
    if x.nrows() != n || x.ncols() != fit.k {
        return Err(Error::invalid("design does not match the fit"));
    }
    let lag = lag.resolve(n);
    if lag >= n {
        return Err(Error::invalid(format!("HAC lag {lag} must be below n = {n}")));
    }
    let z = x.with_intercept();
    let p = z.ncols();
    let scores: Vec<Vec<f64>> = (0..n)
        .map(|t| z.row(t).iter().map(|v| v * fit.residuals[t]).collect())
        .collect();

    let mut s = vec![0.0; p * p];
    for l in 0..=lag {
        let w = if l == 0 { 1.0 } else { 1.0 - l as f64 / (lag as f64 + 1.0) };
        let mut gamma = vec![0.0; p * p];
        for t in l..n {
            let (a, b) = (&scores[t], &scores[t - l]);
            for i in 0..p {
                for j in 0..p {
                    gamma[i * p + j] += a[i] * b[j];
                }
            }
        }
        for i in 0..p {
            for j in 0..p {
                s[i * p + j] += if l == 0 {
                    gamma[i * p + j]
                } else {
                    w * (gamma[i * p + j] + gamma[j * p + i])
                };
            }
        }
    }
    let meat = Matrix::from_vec(p, p, s)?;
    let bread = &fit.gram_inverse;
    let covariance = bread.matmul(&meat).matmul(bread);

    let std_errors: Vec<f64> = covariance.diagonal().iter().map(|v| v.max(0.0).sqrt()).collect();
    let t_stats: Vec<f64> = fit
        .coefficients
        .iter()
        .zip(&std_errors)
        .map(|(b, se)| b / se)
        .collect();
    let df = fit.df_resid() as f64;
    let p_values = t_stats.iter().map(|&t| stats::t_two_sided_p(t, df)).collect();
    Ok(HacInference {
        lag,
        std_errors,
        t_stats,
        p_values,
        covariance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auto_rule() {
        assert_eq!(auto_lag(397), 5);
        assert_eq!(auto_lag(100), 4);
        assert_eq!(auto_lag(1), 1);
    }

    #[test]
    fn lag_must_be_below_n() {
        let x = Matrix::from_columns(&[vec![1.0, 2.0, 4.0, 3.0]]).unwrap();
        let fit = super::super::ols(&x, &[1.0, 3.0, 2.0, 5.0], &["a".into()]).unwrap();
        assert!(newey_west(&fit, &x, HacLag::Fixed(4)).is_err());
        assert!(newey_west(&fit, &x, HacLag::Fixed(3)).is_ok());
    }
}
