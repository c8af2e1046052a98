use std::collections::{BTreeMap, HashSet};
use std::io::Read;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{csv_reader, parse_timestamp_day, read_text, record_line, Headers, StationRegistry};
use crate::error::{Error, Result};

pub const COL_TIMESTAMP: &str = "timestamp";
pub const COL_TEMP: &str = "temp_c";
pub const COL_PRECIP: &str = "precip_1h_mm";
pub const COL_SUN: &str = "sun_1h_h";
pub const COL_WIND: &str = "wind_speed_ms";
pub const COL_SNOW: &str = "snow_depth_cm";
pub const COL_HUMIDITY: &str = "humidity_pct";

/// Daily weather aggregate; `None` means no usable hourly value that day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailyWeather {
    pub date: NaiveDate,
    /// mm/day, summed over hours.
    pub precip: Option<f64>,
    /// °C, mean.
    pub temp: Option<f64>,
    /// Sunshine hours per hour, mean.
    pub sun: Option<f64>,
    /// m/s, mean.
    pub wind: Option<f64>,
    /// cm, mean; only for stations that record it.
    pub snow_depth: Option<f64>,
    /// %, mean.
    pub humidity: Option<f64>,
}

impl DailyWeather {
    /// True when every field the model needs is present.
    pub fn is_complete(&self) -> bool {
        self.precip.is_some() && self.temp.is_some() && self.sun.is_some() && self.wind.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeatherSeries {
    pub station: String,
    pub days: Vec<DailyWeather>,
    pub rows: usize,
    pub duplicate_rows: usize,
    /// Non-empty cells that could not be used (non-numeric or out of range).
    pub invalid_cells: usize,
}

#[derive(Default)]
struct Acc {
    sum: f64,
    n: usize,
}

impl Acc {
    fn push(&mut self, v: Option<f64>) {
        if let Some(v) = v {
            self.sum += v;
            self.n += 1;
        }
    }
    fn sum(&self) -> Option<f64> {
        (self.n > 0).then_some(self.sum)
    }
    fn mean(&self) -> Option<f64> {
        (self.n > 0).then(|| self.sum / self.n as f64)
    }
}

#[derive(Default)]
struct DayAcc {
    precip: Acc,
    temp: Acc,
    sun: Acc,
    wind: Acc,
    snow: Acc,
    humidity: Acc,
}

/// Aggregates hourly observations of one station into daily values:
/// precipitation is summed, every other variable averaged over the hours
/// that carry a value.
pub fn parse_jma_csv(
    stream: impl Read,
    station: &str,
    registry: &StationRegistry,
) -> Result<WeatherSeries> {
    let st = registry.get(station)?;
    let text = read_text(stream)?;
    let mut rdr = csv_reader(&text);
    let headers = Headers::new(rdr.headers()?);
    let ts = headers.require(COL_TIMESTAMP)?;
    let precip = headers.require(COL_PRECIP)?;
    let temp = headers.require(COL_TEMP)?;
    let sun = headers.require(COL_SUN)?;
    let wind = headers.require(COL_WIND)?;
    let snow = if st.records_snow {
        headers.exact(COL_SNOW)
    } else {
        None
    };
    let humidity = headers.exact(COL_HUMIDITY);

    let mut days: BTreeMap<NaiveDate, DayAcc> = BTreeMap::new();
    let mut seen = HashSet::new();
    let mut rows = 0;
    let mut duplicate_rows = 0;
    let mut invalid_cells = 0;

    for rec in rdr.records() {
        let rec = rec?;
        rows += 1;
        let raw_ts = rec.get(ts).unwrap_or("");
        let (day, key) = parse_timestamp_day(raw_ts).ok_or_else(|| Error::Row {
            line: record_line(&rec),
            message: format!("malformed timestamp `{raw_ts}`"),
        })?;
        if !seen.insert(key) {
            duplicate_rows += 1;
            continue;
        }
        let mut cell = |col: Option<usize>, lo: f64, hi: f64| -> Option<f64> {
            let raw = col.and_then(|c| rec.get(c)).unwrap_or("").trim();
            if raw.is_empty() {
                return None;
            }
            match raw.parse::<f64>() {
                Ok(v) if v.is_finite() && v >= lo && v <= hi => Some(v),
                _ => {
                    invalid_cells += 1;
                    None
                }
            }
        };
        let acc = days.entry(day).or_default();
        acc.precip.push(cell(Some(precip), 0.0, f64::INFINITY));
        acc.temp.push(cell(Some(temp), -100.0, 100.0));
        acc.sun.push(cell(Some(sun), 0.0, f64::INFINITY));
        acc.wind.push(cell(Some(wind), 0.0, f64::INFINITY));
        if snow.is_some() {
            acc.snow.push(cell(snow, 0.0, f64::INFINITY));
        }
        if humidity.is_some() {
            acc.humidity.push(cell(humidity, 0.0, 100.0));
        }
    }

    let days = days
        .into_iter()
        .map(|(date, a)| DailyWeather {
            date,
            precip: a.precip.sum(),
            temp: a.temp.mean(),
            sun: a.sun.mean(),
            wind: a.wind.mean(),
            snow_depth: a.snow.mean(),
            humidity: a.humidity.mean(),
        })
        .collect();

    Ok(WeatherSeries {
        station: st.key.clone(),
        days,
        rows,
        duplicate_rows,
        invalid_cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hourly(f: impl Fn(u32) -> [String; 4]) -> String {
        let mut s = String::from("timestamp,temp_c,precip_1h_mm,sun_1h_h,wind_speed_ms\n");
        for h in 0..24 {
            let [t, p, su, w] = f(h);
            s += &format!("2025-02-01 {h:02}:00,{t},{p},{su},{w}\n");
        }
        s
    }

    fn parse(csv: &str, station: &str) -> WeatherSeries {
        parse_jma_csv(csv.as_bytes(), station, &StationRegistry::default()).unwrap()
    }

    #[test]
    fn precip_is_summed_and_temp_averaged() {
        let csv = hourly(|h| [h.to_string(), "1.0".into(), "0.5".into(), "2".into()]);
        let w = parse(&csv, "mikuni");
        let d = &w.days[0];
        assert_eq!(d.precip, Some(24.0));
        assert_eq!(d.temp, Some(11.5));
        assert_eq!(d.sun, Some(0.5));
        assert!(d.snow_depth.is_none());
    }

    #[test]
    fn means_skip_missing_hours() {
        let csv = hourly(|h| {
            let wind = if h % 2 == 0 { "4.0".to_string() } else { String::new() };
            ["1".into(), "0".into(), "0".into(), wind]
        });
        let w = parse(&csv, "mikuni");
        assert_eq!(w.days[0].wind, Some(4.0));
        assert_eq!(w.invalid_cells, 0);
    }

    #[test]
    fn all_missing_precip_is_missing_not_zero() {
        let csv = hourly(|_| ["1".into(), String::new(), "0".into(), "1".into()]);
        let w = parse(&csv, "mikuni");
        assert_eq!(w.days[0].precip, None);
        assert!(!w.days[0].is_complete());
    }

    #[test]
    fn non_numeric_cells_counted() {
        let csv = hourly(|h| {
            let t = if h == 3 { "--".to_string() } else { "2".to_string() };
            [t, "0".into(), "0".into(), "1".into()]
        });
        let w = parse(&csv, "mikuni");
        assert_eq!(w.invalid_cells, 1);
        assert_eq!(w.days[0].temp, Some(2.0));
    }

    #[test]
    fn snow_only_where_recorded() {
        let mut csv = String::from("timestamp,temp_c,precip_1h_mm,sun_1h_h,wind_speed_ms,snow_depth_cm\n");
        csv += "2025-02-01 01:00,0,0,0,1,10\n2025-02-01 02:00,0,0,0,1,20\n";
        assert_eq!(parse(&csv, "fukui").days[0].snow_depth, Some(15.0));
        assert_eq!(parse(&csv, "mikuni").days[0].snow_depth, None);
    }

    #[test]
    fn unknown_station() {
        let r = parse_jma_csv("timestamp\n".as_bytes(), "naha", &StationRegistry::default());
        assert!(matches!(r, Err(Error::UnknownStation(_))));
    }
}
