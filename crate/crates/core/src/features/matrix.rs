use std::collections::BTreeMap;
use std::io::{Read, Write};

use chrono::{Datelike, Days, NaiveDate};
use serde::{Deserialize, Serialize};

use super::{is_weekend_or_holiday, weather_severity, HolidayTable, SeverityPolicy};
use crate::error::{Error, Result};
use crate::ingest::{csv_reader, parse_date, read_text, record_line, DailyPanel, Headers};
use crate::linalg::Matrix;

/// Column order of the engineered design matrix.
pub const FEATURE_NAMES: [&str; 16] = [
    "directions",
    "directions_lag1",
    "directions_lag2",
    "directions_lag3",
    "directions_roll7",
    "precip",
    "temp",
    "sun",
    "wind",
    "precip_lag1",
    "is_weekend_or_holiday",
    "weather_severity",
    "dow_mean_count",
    "weekend_x_severity",
    "weekend_x_intent",
    "month",
];

pub const TARGET_NAME: &str = "count";

/// Which rows feed the day-of-week mean count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DowBaseline {
    FullSample,
    /// Only panel days on or before `cutoff` (the end of a training window).
    TrainOnly { cutoff: NaiveDate },
}

/// Named-column design matrix with its target. Rows are ascending by date;
/// `masked` lists panel dates dropped for incomplete lag history.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub names: Vec<String>,
    pub dates: Vec<NaiveDate>,
    pub x: Matrix,
    pub target: Vec<f64>,
    pub masked: Vec<NaiveDate>,
}

impl FeatureMatrix {
    pub fn new(
        names: Vec<String>,
        dates: Vec<NaiveDate>,
        x: Matrix,
        target: Vec<f64>,
    ) -> Result<Self> {
        if x.ncols() != names.len() || x.nrows() != dates.len() || target.len() != dates.len() {
            return Err(Error::invalid(format!(
                "shape mismatch: x {}x{}, {} names, {} dates, {} targets",
                x.nrows(),
                x.ncols(),
                names.len(),
                dates.len(),
                target.len()
            )));
        }
        if dates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("feature rows must be strictly ascending by date"));
        }
        Ok(FeatureMatrix {
            names,
            dates,
            x,
            target,
            masked: Vec::new(),
        })
    }

    /// Generic matrix on consecutive days starting at `start`; used for
    /// simulations where dates carry no meaning beyond ordering.
    pub fn from_columns(
        names: &[&str],
        columns: &[Vec<f64>],
        target: Vec<f64>,
        start: NaiveDate,
    ) -> Result<Self> {
        let x = Matrix::from_columns(columns)?;
        let dates = (0..x.nrows() as u64)
            .map(|i| start + Days::new(i))
            .collect();
        FeatureMatrix::new(names.iter().map(|s| s.to_string()).collect(), dates, x, target)
    }

    pub fn n(&self) -> usize {
        self.dates.len()
    }

    pub fn k(&self) -> usize {
        self.names.len()
    }

    pub fn col_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        self.col_index(name).map(|j| self.x.column(j))
    }

    pub fn select_rows(&self, idx: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            names: self.names.clone(),
            dates: idx.iter().map(|&i| self.dates[i]).collect(),
            x: self.x.select_rows(idx),
            target: idx.iter().map(|&i| self.target[i]).collect(),
            masked: Vec::new(),
        }
    }

    pub fn head(&self, n: usize) -> FeatureMatrix {
        self.select_rows(&(0..n.min(self.n())).collect::<Vec<_>>())
    }

    pub fn tail_from(&self, start: usize) -> FeatureMatrix {
        self.select_rows(&(start.min(self.n())..self.n()).collect::<Vec<_>>())
    }

    pub fn drop_columns(&self, drop: &[&str]) -> Result<FeatureMatrix> {
        for d in drop {
            if self.col_index(d).is_none() {
                return Err(Error::invalid(format!("unknown column `{d}`")));
            }
        }
        let keep: Vec<usize> = (0..self.k())
            .filter(|&j| !drop.contains(&self.names[j].as_str()))
            .collect();
        Ok(FeatureMatrix {
            names: keep.iter().map(|&j| self.names[j].clone()).collect(),
            dates: self.dates.clone(),
            x: self.x.select_columns(&keep),
            target: self.target.clone(),
            masked: self.masked.clone(),
        })
    }

    /// Rows whose calendar month is in `months`.
    pub fn filter_months(&self, months: &[u32]) -> FeatureMatrix {
        let idx: Vec<usize> = (0..self.n())
            .filter(|&i| months.contains(&self.dates[i].month()))
            .collect();
        self.select_rows(&idx)
    }

    /// `date,<features...>,count`, shortest round-trip float formatting.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["date".to_string()];
        header.extend(self.names.iter().cloned());
        header.push(TARGET_NAME.to_string());
        w.write_record(&header)?;
        for i in 0..self.n() {
            let mut rec = vec![self.dates[i].to_string()];
            rec.extend(self.x.row(i).iter().map(|v| v.to_string()));
            rec.push(self.target[i].to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(stream: impl Read) -> Result<FeatureMatrix> {
        let text = read_text(stream)?;
        let mut rdr = csv_reader(&text);
        let raw_headers = rdr.headers()?.clone();
        let h = Headers::new(&raw_headers);
        let date_col = h.require("date")?;
        let target_col = h.require(TARGET_NAME)?;
        let feature_cols: Vec<usize> = (0..raw_headers.len())
            .filter(|&j| j != date_col && j != target_col)
            .collect();
        let names: Vec<String> = feature_cols
            .iter()
            .map(|&j| raw_headers[j].trim().to_string())
            .collect();
        let mut dates = Vec::new();
        let mut data = Vec::new();
        let mut target = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let line = record_line(&rec);
            let bad = |what: &str| Error::Row {
                line,
                message: format!("invalid {what}"),
            };
            dates.push(parse_date(rec.get(date_col).unwrap_or("")).ok_or_else(|| bad("date"))?);
            for &j in &feature_cols {
                data.push(
                    rec.get(j)
                        .unwrap_or("")
                        .parse::<f64>()
                        .map_err(|_| bad(&raw_headers[j]))?,
                );
            }
            target.push(
                rec.get(target_col)
                    .unwrap_or("")
                    .parse::<f64>()
                    .map_err(|_| bad(TARGET_NAME))?,
            );
        }
        let x = Matrix::from_vec(dates.len(), names.len(), data)?;
        FeatureMatrix::new(names, dates, x, target)
    }
}

/// Builds the 16 engineered features from a joined panel. Lags and the
/// seven-day mean are taken over calendar days: a row whose required history
/// is missing from the panel is masked, never zero-filled.
pub fn build_features(
    panel: &DailyPanel,
    table: &HolidayTable,
    policy: &SeverityPolicy,
    dow_baseline: DowBaseline,
) -> Result<FeatureMatrix> {
    if panel.rows.len() < 8 {
        return Err(Error::insufficient(format!(
            "panel has {} rows; at least 8 are needed for the 7-day mean and lags",
            panel.rows.len()
        )));
    }
    let by_date: BTreeMap<NaiveDate, usize> = panel
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| (r.date, i))
        .collect();
    let dow_means = dow_mean_counts(panel, dow_baseline)?;

    let back = |date: NaiveDate, k: u64| -> Option<usize> {
        date.checked_sub_days(Days::new(k))
            .and_then(|d| by_date.get(&d).copied())
    };

    let mut dates = Vec::new();
    let mut masked = Vec::new();
    let mut data = Vec::new();
    let mut target = Vec::new();
    for row in &panel.rows {
        let history: Option<Vec<usize>> = (1..=6).map(|k| back(row.date, k)).collect();
        let Some(history) = history else {
            masked.push(row.date);
            continue;
        };
        let dir = |i: usize| panel.rows[i].directions as f64;
        let intent = row.directions as f64;
        let roll7 = (intent + history.iter().map(|&i| dir(i)).sum::<f64>()) / 7.0;
        let flag = f64::from(is_weekend_or_holiday(row.date, table)?);
        let severity = f64::from(weather_severity(
            row.precip,
            row.wind,
            row.snow_depth,
            policy,
        )?);
        let values = [
            intent,
            dir(history[0]),
            dir(history[1]),
            dir(history[2]),
            roll7,
            row.precip,
            row.temp,
            row.sun,
            row.wind,
            panel.rows[history[0]].precip,
            flag,
            severity,
            dow_means[row.date.weekday().num_days_from_monday() as usize],
            flag * severity,
            flag * intent,
            f64::from(row.date.month()),
        ];
        data.extend_from_slice(&values);
        dates.push(row.date);
        target.push(row.count as f64);
    }
    if dates.is_empty() {
        return Err(Error::insufficient(
            "no row has seven consecutive days of history",
        ));
    }
    let x = Matrix::from_vec(dates.len(), FEATURE_NAMES.len(), data)?;
    let mut fm = FeatureMatrix::new(
        FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        dates,
        x,
        target,
    )?;
    fm.masked = masked;
    Ok(fm)
}

fn dow_mean_counts(panel: &DailyPanel, baseline: DowBaseline) -> Result<[f64; 7]> {
    let rows: Vec<_> = panel
        .rows
        .iter()
        .filter(|r| match baseline {
            DowBaseline::FullSample => true,
            DowBaseline::TrainOnly { cutoff } => r.date <= cutoff,
        })
        .collect();
    if rows.is_empty() {
        return Err(Error::insufficient("no panel rows inside the day-of-week baseline window"));
    }
    let overall = rows.iter().map(|r| r.count as f64).sum::<f64>() / rows.len() as f64;
    let mut sum = [0.0; 7];
    let mut n = [0usize; 7];
    for r in rows {
        let d = r.date.weekday().num_days_from_monday() as usize;
        sum[d] += r.count as f64;
        n[d] += 1;
    }
    Ok(std::array::from_fn(|d| {
        if n[d] > 0 {
            sum[d] / n[d] as f64
        } else {
            overall
        }
    }))
}
