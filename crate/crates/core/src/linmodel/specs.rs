use chrono::{Days, NaiveDate};
use serde::Serialize;

use super::ols::{fit_ols, LinearFit};
use super::vif::r2_with_intercept;
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::linalg::Matrix;
use crate::stats;

pub const LDV_NAME: &str = "count_lag1";
pub const DEFAULT_WEATHER_COLUMNS: [&str; 5] = ["precip", "temp", "sun", "wind", "precip_lag1"];
/// The raw weather columns plus the severity terms built from them.
pub const WEATHER_DERIVED_COLUMNS: [&str; 7] = [
    "precip",
    "temp",
    "sun",
    "wind",
    "precip_lag1",
    "weather_severity",
    "weekend_x_severity",
];
pub const WINTER_MONTHS: [u32; 3] = [12, 1, 2];
pub const SUMMER_MONTHS: [u32; 3] = [6, 7, 8];

/// Index pairs (i−1, i) whose dates are consecutive calendar days.
fn adjacent_pairs(dates: &[NaiveDate]) -> Vec<(usize, usize)> {
    (1..dates.len())
        .filter(|&i| dates[i - 1] + Days::new(1) == dates[i])
        .map(|i| (i - 1, i))
        .collect()
}

/// Δy on ΔX over calendar-adjacent rows, with an intercept. Every column,
/// binary or ordinal, is differenced the same way.
pub fn fit_first_difference(fm: &FeatureMatrix) -> Result<LinearFit> {
    let pairs = adjacent_pairs(&fm.dates);
    if pairs.len() < 3 {
        return Err(Error::insufficient(format!(
            "{} differenced rows, need at least 3",
            pairs.len()
        )));
    }
    let mut data = Vec::with_capacity(pairs.len() * fm.k());
    for &(a, b) in &pairs {
        data.extend(fm.x.row(b).iter().zip(fm.x.row(a)).map(|(p, q)| p - q));
    }
    let x = Matrix::from_vec(pairs.len(), fm.k(), data)?;
    let y: Vec<f64> = pairs.iter().map(|&(a, b)| fm.target[b] - fm.target[a]).collect();
    let names: Vec<String> = fm.names.iter().map(|n| format!("d_{n}")).collect();
    super::ols(&x, &y, &names)
}

/// Design augmented with the previous calendar day's target as the first
/// regressor; rows without that day are dropped.
pub fn ldv_matrix(fm: &FeatureMatrix) -> Result<FeatureMatrix> {
    let pairs = adjacent_pairs(&fm.dates);
    let rows: Vec<usize> = pairs.iter().map(|&(_, b)| b).collect();
    let lag: Vec<f64> = pairs.iter().map(|&(a, _)| fm.target[a]).collect();
    let sub = fm.select_rows(&rows);
    let mut names = vec![LDV_NAME.to_string()];
    names.extend(sub.names.iter().cloned());
    FeatureMatrix::new(names, sub.dates, sub.x.insert_column(0, &lag)?, sub.target)
}

pub fn fit_ldv(fm: &FeatureMatrix) -> Result<LinearFit> {
    fit_ols(&ldv_matrix(fm)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HoldoutPrediction {
    pub date: NaiveDate,
    pub actual: f64,
    pub predicted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HoldoutReport {
    pub train_n: usize,
    pub test_n: usize,
    pub r2: f64,
    pub mae: f64,
    pub rmse: f64,
    pub predictions: Vec<HoldoutPrediction>,
}

pub const MIN_TEST_ROWS: usize = 5;

/// Fits on the first `train_n` rows and scores the rest. R² is centered on
/// the test-set mean, so it is negative when the model loses to that mean.
pub fn chronological_holdout(fm: &FeatureMatrix, train_n: usize) -> Result<HoldoutReport> {
    if train_n >= fm.n() {
        return Err(Error::invalid(format!(
            "train_n {train_n} must be below n = {}",
            fm.n()
        )));
    }
    let test_n = fm.n() - train_n;
    if test_n < MIN_TEST_ROWS {
        return Err(Error::insufficient(format!(
            "test set has {test_n} rows, need at least {MIN_TEST_ROWS}"
        )));
    }
    let fit = fit_ols(&fm.head(train_n))?;
    let test = fm.tail_from(train_n);
    let pred = fit.predict(&test.x)?;
    let n = test_n as f64;
    let mae = test.target.iter().zip(&pred).map(|(a, p)| (a - p).abs()).sum::<f64>() / n;
    let sse: f64 = test.target.iter().zip(&pred).map(|(a, p)| (a - p).powi(2)).sum();
    Ok(HoldoutReport {
        train_n,
        test_n,
        r2: stats::r_squared(&test.target, &pred),
        mae,
        rmse: (sse / n).sqrt(),
        predictions: test
            .dates
            .iter()
            .zip(&test.target)
            .zip(&pred)
            .map(|((&date, &actual), &predicted)| HoldoutPrediction {
                date,
                actual,
                predicted,
            })
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ablation {
    pub n: usize,
    pub full_r2: f64,
    pub reduced_r2: f64,
    pub delta_r2: f64,
}

/// R²(full) − R²(without `weather_cols`), optionally on rows in `months`.
pub fn weather_ablation(
    fm: &FeatureMatrix,
    weather_cols: &[&str],
    months: Option<&[u32]>,
) -> Result<Ablation> {
    if weather_cols.is_empty() {
        return Err(Error::invalid("no weather columns to ablate"));
    }
    let rows = match months {
        Some(m) => fm.filter_months(m),
        None => fm.clone(),
    };
    if rows.n() == 0 {
        return Err(Error::insufficient("seasonal subset is empty"));
    }
    let reduced = rows.drop_columns(weather_cols)?;
    if rows.n() <= rows.k() + 1 {
        return Err(Error::insufficient(format!(
            "{} rows for {} regressors",
            rows.n(),
            rows.k()
        )));
    }
    let full_r2 = r2_with_intercept(&rows.x, &rows.target);
    let reduced_r2 = r2_with_intercept(&reduced.x, &reduced.target);
    Ok(Ablation {
        n: rows.n(),
        full_r2,
        reduced_r2,
        delta_r2: full_r2 - reduced_r2,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeasonalAblation {
    pub overall: Ablation,
    pub winter: Ablation,
    pub summer: Ablation,
    /// ΔR²(winter)/ΔR²(summer).
    #[serde(serialize_with = "crate::serde_ext::f64_marker")]
    pub sensitivity_ratio: f64,
}

pub fn seasonal_ablation(
    fm: &FeatureMatrix,
    weather_cols: &[&str],
    winter: &[u32],
    summer: &[u32],
) -> Result<SeasonalAblation> {
    let overall = weather_ablation(fm, weather_cols, None)?;
    let winter = weather_ablation(fm, weather_cols, Some(winter))?;
    let summer = weather_ablation(fm, weather_cols, Some(summer))?;
    let sensitivity_ratio = if summer.delta_r2 > 0.0 {
        winter.delta_r2 / summer.delta_r2
    } else if winter.delta_r2 > 0.0 {
        f64::INFINITY
    } else {
        f64::NAN
    };
    Ok(SeasonalAblation {
        overall,
        winter,
        summer,
        sensitivity_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn start() -> NaiveDate {
        NaiveDate::from_ymd_opt(2024, 1, 1).unwrap()
    }

    #[test]
    fn holdout_noiseless() {
        let x1: Vec<f64> = (0..40).map(|i| ((i * 7) % 11) as f64).collect();
        let y: Vec<f64> = x1.iter().map(|v| 4.0 * v - 1.0).collect();
        let fm = FeatureMatrix::from_columns(&["x1"], &[x1], y, start()).unwrap();
        let r = chronological_holdout(&fm, 30).unwrap();
        assert_eq!(r.test_n, 10);
        assert!((r.r2 - 1.0).abs() < 1e-10);
        assert!(r.mae < 1e-9);
        assert!(chronological_holdout(&fm, 36).is_err());
        assert!(chronological_holdout(&fm, 40).is_err());
    }

    #[test]
    fn holdout_can_be_negative() {
        // Training slope is +1; the test segment runs the other way.
        let x1: Vec<f64> = (0..30).map(|i| (i % 10) as f64).chain((0..10).map(|i| i as f64)).collect();
        let y: Vec<f64> = (0..30)
            .map(|i| (i % 10) as f64)
            .chain((0..10).map(|i| 9.0 - i as f64))
            .collect();
        let fm = FeatureMatrix::from_columns(&["x1"], &[x1], y, start()).unwrap();
        assert!(chronological_holdout(&fm, 30).unwrap().r2 < 0.0);
    }

    #[test]
    fn ldv_skips_gaps() {
        let x1 = vec![1.0, 2.0, 4.0, 3.0, 5.0, 7.0];
        let y = vec![2.0, 1.0, 5.0, 3.0, 6.0, 4.0];
        let mut fm = FeatureMatrix::from_columns(&["x1"], &[x1], y, start()).unwrap();
        fm.dates[3] = fm.dates[3] + Days::new(1);
        fm.dates[4] = fm.dates[4] + Days::new(1);
        fm.dates[5] = fm.dates[5] + Days::new(1);
        let l = ldv_matrix(&fm).unwrap();
        // Row 3 follows a missing day.
        assert_eq!(l.n(), 4);
        assert_eq!(l.column(LDV_NAME).unwrap(), vec![2.0, 1.0, 3.0, 6.0]);
        assert_eq!(l.names[0], LDV_NAME);
    }

    #[test]
    fn first_difference_needs_rows() {
        let fm = FeatureMatrix::from_columns(&["x1"], &[vec![1.0, 2.0, 3.0]], vec![1.0, 3.0, 2.0], start())
            .unwrap();
        assert!(fit_first_difference(&fm).is_err());
    }

    #[test]
    fn empty_season_is_error() {
        let x1: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let x2: Vec<f64> = (0..20).map(|i| ((i * 3) % 7) as f64).collect();
        let y: Vec<f64> = (0..20).map(|i| (i * i % 13) as f64).collect();
        let fm = FeatureMatrix::from_columns(&["a", "precip"], &[x1, x2], y, start()).unwrap();
        assert!(weather_ablation(&fm, &["precip"], Some(&[7])).is_err());
        let a = weather_ablation(&fm, &["precip"], None).unwrap();
        assert!(a.delta_r2 >= -1e-12);
    }
}
