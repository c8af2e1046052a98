use std::collections::BTreeMap;

use chrono::{Days, NaiveDate};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CcfPoint {
    pub lag: i64,
    pub r: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CcfReport {
    pub max_lag: usize,
    pub overlap: usize,
    pub points: Vec<CcfPoint>,
    pub best_lag: i64,
    pub best_r: f64,
}

impl CcfReport {
    pub fn at(&self, lag: i64) -> Option<f64> {
        self.points.iter().find(|p| p.lag == lag).map(|p| p.r)
    }
}

fn shift(d: NaiveDate, lag: i64) -> Option<NaiveDate> {
    if lag >= 0 {
        d.checked_sub_days(Days::new(lag as u64))
    } else {
        d.checked_add_days(Days::new(lag.unsigned_abs()))
    }
}

/// r(ℓ) = corr(x[t−ℓ], y[t]) over dates present in both, for
/// ℓ ∈ [−max_lag, max_lag]. Positive ℓ means x leads y. The best lag is the
/// largest r, earliest lag on ties.
pub fn ccf(x: &[(NaiveDate, f64)], y: &[(NaiveDate, f64)], max_lag: usize) -> Result<CcfReport> {
    let xm: BTreeMap<NaiveDate, f64> = x.iter().copied().collect();
    let ym: BTreeMap<NaiveDate, f64> = y.iter().copied().collect();
    if xm.len() != x.len() || ym.len() != y.len() {
        return Err(Error::invalid("duplicate dates in CCF input"));
    }
    let overlap = ym.keys().filter(|d| xm.contains_key(d)).count();
    if overlap < max_lag + 10 {
        return Err(Error::insufficient(format!(
            "{overlap} overlapping days, need at least {}",
            max_lag + 10
        )));
    }
    let m = max_lag as i64;
    let mut points = Vec::with_capacity(2 * max_lag + 1);
    for lag in -m..=m {
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for (d, yv) in &ym {
            if let Some(xv) = shift(*d, lag).and_then(|s| xm.get(&s)) {
                a.push(*xv);
                b.push(*yv);
            }
        }
        if a.len() < 3 {
            return Err(Error::insufficient(format!("only {} pairs at lag {lag}", a.len())));
        }
        points.push(CcfPoint {
            lag,
            r: stats::pearson_r(&a, &b)?,
            n: a.len(),
        });
    }
    let best = points
        .iter()
        .fold(None::<&CcfPoint>, |acc, p| match acc {
            Some(b) if b.r >= p.r => Some(b),
            _ => Some(p),
        })
        .expect("at least one lag");
    Ok(CcfReport {
        max_lag,
        overlap,
        best_lag: best.lag,
        best_r: best.r,
        points,
    })
}

/// Same as [`ccf`] for two equally long series on consecutive days.
pub fn ccf_series(x: &[f64], y: &[f64], max_lag: usize) -> Result<CcfReport> {
    if x.len() != y.len() {
        return Err(Error::invalid("CCF series differ in length"));
    }
    let start = NaiveDate::from_ymd_opt(2000, 1, 1).expect("valid date");
    let dated = |v: &[f64]| -> Vec<(NaiveDate, f64)> {
        v.iter()
            .enumerate()
            .map(|(i, &val)| (start + Days::new(i as u64), val))
            .collect()
    };
    ccf(&dated(x), &dated(y), max_lag)
}
