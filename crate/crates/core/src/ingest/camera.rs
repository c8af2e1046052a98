use std::collections::{BTreeMap, HashSet};
use std::io::Read;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{csv_reader, parse_timestamp_day, read_text, record_line, Headers, NodeConfig, SensorKind};
use crate::error::{Error, Result};

pub const COL_AGGREGATE_FROM: &str = "aggregate from";
pub const COL_TOTAL_COUNT: &str = "total count";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DailyCount {
    pub date: NaiveDate,
    pub count: u64,
    pub source: SensorKind,
}

/// Daily totals from one node's interval file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraSeries {
    pub counts: Vec<DailyCount>,
    /// Days whose intervals summed to zero (sensor outages), removed from `counts`.
    pub dropped_zero_days: Vec<NaiveDate>,
    pub rows: usize,
    pub duplicate_rows: usize,
}

/// Sums five-minute interval counts per calendar day. Rows repeating an
/// `aggregate from` timestamp are ignored after the first occurrence.
pub fn parse_camera_csv(stream: impl Read, node: &NodeConfig) -> Result<CameraSeries> {
    let text = read_text(stream)?;
    let mut rdr = csv_reader(&text);
    let headers = Headers::new(rdr.headers()?);
    let ts_col = headers.require(COL_AGGREGATE_FROM)?;
    let count_col = headers.require(COL_TOTAL_COUNT)?;

    let mut seen = HashSet::new();
    let mut per_day: BTreeMap<NaiveDate, u64> = BTreeMap::new();
    let mut rows = 0;
    let mut duplicate_rows = 0;

    for rec in rdr.records() {
        let rec = rec?;
        let line = record_line(&rec);
        rows += 1;
        let raw_ts = rec.get(ts_col).unwrap_or("");
        let (day, key) = parse_timestamp_day(raw_ts).ok_or_else(|| Error::Row {
            line,
            message: format!("malformed timestamp `{raw_ts}`"),
        })?;
        let raw_count = rec.get(count_col).unwrap_or("");
        let count = parse_count(raw_count).ok_or_else(|| Error::Row {
            line,
            message: format!("invalid count `{raw_count}`"),
        })?;
        if !seen.insert(key) {
            duplicate_rows += 1;
            continue;
        }
        *per_day.entry(day).or_insert(0) += count;
    }

    let mut counts = Vec::with_capacity(per_day.len());
    let mut dropped_zero_days = Vec::new();
    for (date, count) in per_day {
        if count == 0 {
            dropped_zero_days.push(date);
        } else {
            counts.push(DailyCount {
                date,
                count,
                source: node.sensor_kind,
            });
        }
    }
    Ok(CameraSeries {
        counts,
        dropped_zero_days,
        rows,
        duplicate_rows,
    })
}

fn parse_count(raw: &str) -> Option<u64> {
    let s = raw.trim();
    if let Ok(v) = s.parse::<u64>() {
        return Some(v);
    }
    // Some exports write integral floats ("12.0").
    let f: f64 = s.parse().ok()?;
    (f >= 0.0 && f.fract() == 0.0 && f <= u64::MAX as f64).then_some(f as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node_a() -> NodeConfig {
        NodeConfig::defaults().remove(0)
    }

    fn day(d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2025, 1, d).unwrap()
    }

    #[test]
    fn constant_intervals_sum_to_day_total() {
        let mut csv = String::from("aggregate from,aggregate to,total count\n");
        for i in 0..288 {
            let (h, m) = (i / 12, (i % 12) * 5);
            csv += &format!("2025-01-05 {h:02}:{m:02}:00,x,10\n");
        }
        let s = parse_camera_csv(csv.as_bytes(), &node_a()).unwrap();
        assert_eq!(s.counts.len(), 1);
        assert_eq!(s.counts[0].count, 2880);
        assert_eq!(s.counts[0].date, day(5));
        assert_eq!(s.rows, 288);
    }

    #[test]
    fn zero_day_is_dropped_and_recorded() {
        let csv = "aggregate from,total count\n\
                   2025-01-01 10:00,0\n2025-01-01 10:05,0\n2025-01-02 10:00,4\n";
        let s = parse_camera_csv(csv.as_bytes(), &node_a()).unwrap();
        assert_eq!(s.counts.len(), 1);
        assert_eq!(s.dropped_zero_days, vec![day(1)]);
    }

    #[test]
    fn duplicate_timestamps_keep_first() {
        let csv = "aggregate from,total count\n\
                   2025-01-03 09:00:00,5\n2025-01-03 09:00:00,5\n2025-01-03 09:05:00,3\n";
        let s = parse_camera_csv(csv.as_bytes(), &node_a()).unwrap();
        assert_eq!(s.counts[0].count, 8);
        assert_eq!(s.duplicate_rows, 1);
    }

    #[test]
    fn malformed_timestamp_reports_line() {
        let csv = "aggregate from,total count\n2025-01-03 09:00,5\nnot-a-time,3\n";
        match parse_camera_csv(csv.as_bytes(), &node_a()) {
            Err(Error::Row { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_column_is_stream_error() {
        let csv = "aggregate from,count\n2025-01-03 09:00,5\n";
        assert!(matches!(
            parse_camera_csv(csv.as_bytes(), &node_a()),
            Err(Error::MissingColumn(c)) if c == "total count"
        ));
    }

    #[test]
    fn negative_count_rejected() {
        let csv = "aggregate from,total count\n2025-01-03 09:00,-1\n";
        assert!(matches!(
            parse_camera_csv(csv.as_bytes(), &node_a()),
            Err(Error::Row { .. })
        ));
    }
}
