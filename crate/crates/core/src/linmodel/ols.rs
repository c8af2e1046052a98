use serde::Serialize;

use super::hac::HacInference;
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::linalg::{self, Matrix, Qr};
use crate::stats;

pub const INTERCEPT_NAME: &str = "const";

/// Ordinary least-squares fit with an intercept.
#[derive(Debug, Clone, Serialize)]
pub struct LinearFit {
    /// Parameter names, intercept first.
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub t_stats: Vec<f64>,
    pub p_values: Vec<f64>,
    pub hac: Option<HacInference>,
    #[serde(skip)]
    pub residuals: Vec<f64>,
    #[serde(skip)]
    pub fitted: Vec<f64>,
    pub r2: f64,
    pub adj_r2: f64,
    pub durbin_watson: f64,
    pub n: usize,
    /// Regressors excluding the intercept.
    pub k: usize,
    pub sigma2: f64,
    /// (ZᵀZ)⁻¹ for the intercept-augmented design.
    #[serde(skip)]
    pub gram_inverse: Matrix,
}

impl LinearFit {
    pub fn df_resid(&self) -> usize {
        self.n - self.k - 1
    }

    /// Predictions for rows of `x` (without intercept column).
    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        if x.ncols() != self.k {
            return Err(Error::invalid(format!(
                "prediction matrix has {} columns, model has {}",
                x.ncols(),
                self.k
            )));
        }
        Ok((0..x.nrows())
            .map(|i| {
                self.coefficients[0]
                    + linalg::dot(x.row(i), &self.coefficients[1..])
            })
            .collect())
    }

    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|j| self.coefficients[j])
    }

    pub fn attach_hac(&mut self, hac: HacInference) {
        self.hac = Some(hac);
    }
}

/// OLS of `y` on `x` plus an intercept, solved through a Householder QR of
/// the design.
pub fn ols(x: &Matrix, y: &[f64], names: &[String]) -> Result<LinearFit> {
    let (n, k) = (x.nrows(), x.ncols());
    if names.len() != k || y.len() != n {
        return Err(Error::invalid("design, names and target disagree in size"));
    }
    if n <= k + 1 {
        return Err(Error::insufficient(format!(
            "{n} observations for {k} regressors plus intercept"
        )));
    }
    if y.iter().any(|v| !v.is_finite()) || (0..n).any(|i| x.row(i).iter().any(|v| !v.is_finite())) {
        return Err(Error::invalid("non-finite value in regression data"));
    }
    let sst = stats::centered_ss(y);
    if sst == 0.0 {
        return Err(Error::degenerate("target is constant"));
    }

    let z = x.with_intercept();
    let qr = Qr::new(&z);
    if let Some(&j) = qr.dropped().first() {
        let all: Vec<String> = std::iter::once(INTERCEPT_NAME.to_string())
            .chain(names.iter().cloned())
            .collect();
        return Err(Error::RankDeficient {
            column: all[j].clone(),
            depends_on: dependency_set(&z, j, &all),
        });
    }
    let coefficients = qr.solve(y);
    let fitted = z.mul_vec(&coefficients);
    let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(a, f)| a - f).collect();
    let ssr: f64 = residuals.iter().map(|e| e * e).sum();
    let df = (n - k - 1) as f64;
    let r2 = 1.0 - ssr / sst;
    let adj_r2 = 1.0 - (1.0 - r2) * (n as f64 - 1.0) / df;
    let sigma2 = ssr / df;
    let gram_inverse = qr.gram_inverse();
    let std_errors: Vec<f64> = gram_inverse
        .diagonal()
        .iter()
        .map(|v| (sigma2 * v).sqrt())
        .collect();
    let t_stats: Vec<f64> = coefficients
        .iter()
        .zip(&std_errors)
        .map(|(b, s)| b / s)
        .collect();
    let p_values = t_stats.iter().map(|&t| stats::t_two_sided_p(t, df)).collect();

    Ok(LinearFit {
        names: std::iter::once(INTERCEPT_NAME.to_string())
            .chain(names.iter().cloned())
            .collect(),
        coefficients,
        std_errors,
        t_stats,
        p_values,
        hac: None,
        durbin_watson: durbin_watson(&residuals).unwrap_or(f64::NAN),
        residuals,
        fitted,
        r2,
        adj_r2,
        n,
        k,
        sigma2,
        gram_inverse,
    })
}

pub fn fit_ols(fm: &FeatureMatrix) -> Result<LinearFit> {
    ols(&fm.x, &fm.target, &fm.names)
}

/// Columns (other than `j`) that reproduce column `j` of `z`.
fn dependency_set(z: &Matrix, j: usize, names: &[String]) -> Vec<String> {
    let others: Vec<usize> = (0..z.ncols()).filter(|&m| m != j).collect();
    let target = z.column(j);
    let sub = z.select_columns(&others);
    let (coef, _) = linalg::lstsq_tolerant(&sub, &target);
    let scale = linalg::norm(&target).max(f64::MIN_POSITIVE);
    others
        .iter()
        .zip(coef)
        .filter(|(&m, c)| (c * linalg::norm(&z.column(m))).abs() > 1e-8 * scale)
        .map(|(&m, _)| names[m].clone())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StandardizedBeta {
    pub name: String,
    pub beta: f64,
}

/// βⱼ = bⱼ·σ(xⱼ)/σ(y) with population standard deviations, ranked by |β|.
pub fn standardized_betas(fit: &LinearFit, fm: &FeatureMatrix) -> Result<Vec<StandardizedBeta>> {
    if fm.k() != fit.k || fm.n() != fit.n {
        return Err(Error::invalid("fit and data do not match"));
    }
    let sy = stats::std_pop(&fm.target);
    if sy == 0.0 {
        return Err(Error::degenerate("target has zero variance"));
    }
    let mut out = Vec::with_capacity(fm.k());
    for j in 0..fm.k() {
        let sx = stats::std_pop(&fm.x.column(j));
        if sx == 0.0 {
            return Err(Error::degenerate(format!(
                "column `{}` has zero variance",
                fm.names[j]
            )));
        }
        out.push(StandardizedBeta {
            name: fm.names[j].clone(),
            beta: fit.coefficients[j + 1] * sx / sy,
        });
    }
    out.sort_by(|a, b| b.beta.abs().total_cmp(&a.beta.abs()));
    Ok(out)
}

/// Cohen's f² = R²/(1 − R²).
pub fn cohens_f2(r2: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&r2) {
        return Err(Error::invalid(format!("R² {r2} outside [0, 1)")));
    }
    Ok(r2 / (1.0 - r2))
}

/// Σ(eₜ − eₜ₋₁)² / Σeₜ².
pub fn durbin_watson(residuals: &[f64]) -> Result<f64> {
    if residuals.len() < 2 {
        return Err(Error::insufficient("Durbin-Watson needs at least 2 residuals"));
    }
    let ss: f64 = residuals.iter().map(|e| e * e).sum();
    if ss == 0.0 {
        return Err(Error::degenerate("all residuals are zero"));
    }
    let num: f64 = residuals.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
    Ok(num / ss)
}
