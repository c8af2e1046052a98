use serde::Serialize;

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::linalg::{lstsq_tolerant, Matrix};
use crate::stats;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VifEntry {
    pub name: String,
    /// Infinite under perfect collinearity.
    #[serde(serialize_with = "crate::serde_ext::f64_marker")]
    pub vif: f64,
}

/// VIFⱼ = 1/(1 − R²ⱼ), regressing each column on the others plus intercept.
pub fn vif(fm: &FeatureMatrix) -> Result<Vec<VifEntry>> {
    vif_matrix(&fm.x, &fm.names)
}

pub fn vif_matrix(x: &Matrix, names: &[String]) -> Result<Vec<VifEntry>> {
    let k = x.ncols();
    if k < 2 {
        return Err(Error::invalid("VIF needs at least two feature columns"));
    }
    (0..k)
        .map(|j| {
            let target = x.column(j);
            let others: Vec<usize> = (0..k).filter(|&m| m != j).collect();
            let r2 = r2_with_intercept(&x.select_columns(&others), &target);
            let vif = if 1.0 - r2 <= 1e-12 { f64::INFINITY } else { 1.0 / (1.0 - r2) };
            Ok(VifEntry {
                name: names[j].clone(),
                vif,
            })
        })
        .collect()
}

/// In-sample R² of a least-squares fit with intercept that tolerates
/// dependent columns. A constant target counts as fully explained.
pub(crate) fn r2_with_intercept(x: &Matrix, y: &[f64]) -> f64 {
    let sst = stats::centered_ss(y);
    if sst == 0.0 {
        return 1.0;
    }
    let (_, resid) = lstsq_tolerant(&x.with_intercept(), y);
    let ssr: f64 = resid.iter().map(|e| e * e).sum();
    1.0 - ssr / sst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(k: usize) -> Vec<String> {
        (0..k).map(|j| format!("x{j}")).collect()
    }

    #[test]
    fn orthogonal_columns() {
        let a = vec![1.0, -1.0, 1.0, -1.0];
        let b = vec![1.0, 1.0, -1.0, -1.0];
        let c = vec![1.0, -1.0, -1.0, 1.0];
        let x = Matrix::from_columns(&[a, b, c]).unwrap();
        for e in vif_matrix(&x, &names(3)).unwrap() {
            assert!((e.vif - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn perfect_collinearity_is_infinite() {
        let a = vec![1.0, 2.0, 3.0, 5.0, 8.0];
        let b: Vec<f64> = a.iter().map(|v| 2.0 * v + 1.0).collect();
        let x = Matrix::from_columns(&[a, b]).unwrap();
        let v = vif_matrix(&x, &names(2)).unwrap();
        assert!(v.iter().all(|e| e.vif.is_infinite()));
        assert!(serde_json::to_string(&v[0]).unwrap().contains("\"inf\""));
    }

    #[test]
    fn single_column_rejected() {
        let x = Matrix::from_columns(&[vec![1.0, 2.0, 3.0]]).unwrap();
        assert!(vif_matrix(&x, &names(1)).is_err());
    }
}
