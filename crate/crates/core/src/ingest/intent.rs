use std::collections::BTreeMap;
use std::io::Read;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{csv_reader, parse_date, read_text, record_line, Headers};
use crate::error::{Error, Result};

pub const COL_DATE: &str = "date";
pub const COL_DIRECTIONS: &str = "directions";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DailyIntent {
    pub date: NaiveDate,
    /// Route-to-location searches that day.
    pub directions: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntentSeries {
    pub days: Vec<DailyIntent>,
    pub warnings: Vec<String>,
}

/// Reads daily route-search volumes. Dates must be unique.
pub fn parse_intent_csv(stream: impl Read) -> Result<IntentSeries> {
    let text = read_text(stream)?;
    if text.trim().is_empty() {
        return Ok(IntentSeries {
            days: Vec::new(),
            warnings: vec!["empty intent file".to_string()],
        });
    }
    let mut rdr = csv_reader(&text);
    let headers = Headers::new(rdr.headers()?);
    let date_col = headers.require(COL_DATE)?;
    let dir_col = headers.require(COL_DIRECTIONS)?;

    let mut days = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = record_line(&rec);
        let raw_date = rec.get(date_col).unwrap_or("");
        let date = parse_date(raw_date).ok_or_else(|| Error::Row {
            line,
            message: format!("malformed date `{raw_date}`"),
        })?;
        let raw = rec.get(dir_col).unwrap_or("").trim();
        let directions = raw
            .parse::<i64>()
            .ok()
            .or_else(|| {
                raw.parse::<f64>()
                    .ok()
                    .filter(|f| f.fract() == 0.0)
                    .map(|f| f as i64)
            })
            .ok_or_else(|| Error::Row {
                line,
                message: format!("invalid directions value `{raw}`"),
            })?;
        if directions < 0 {
            return Err(Error::Row {
                line,
                message: format!("negative directions value {directions}"),
            });
        }
        if days.insert(date, directions as u64).is_some() {
            return Err(Error::DuplicateDate(date));
        }
    }
    let mut warnings = Vec::new();
    if days.is_empty() {
        warnings.push("intent file has no data rows".to_string());
    }
    Ok(IntentSeries {
        days: days
            .into_iter()
            .map(|(date, directions)| DailyIntent { date, directions })
            .collect(),
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn passthrough() {
        let s = parse_intent_csv("date,directions\n2025-01-01,120\n".as_bytes()).unwrap();
        assert_eq!(
            s.days,
            vec![DailyIntent {
                date: NaiveDate::from_ymd_opt(2025, 1, 1).unwrap(),
                directions: 120
            }]
        );
        assert!(s.warnings.is_empty());
    }

    #[test]
    fn duplicate_date_named() {
        let err = parse_intent_csv("date,directions\n2025-01-01,1\n2025-01-01,2\n".as_bytes())
            .unwrap_err();
        assert!(err.to_string().contains("2025-01-01"), "{err}");
    }

    #[test]
    fn empty_file_warns() {
        let s = parse_intent_csv("".as_bytes()).unwrap();
        assert!(s.days.is_empty());
        assert_eq!(s.warnings.len(), 1);
        let s = parse_intent_csv("date,directions\n".as_bytes()).unwrap();
        assert!(s.days.is_empty());
        assert_eq!(s.warnings.len(), 1);
    }

    #[test]
    fn negative_rejected() {
        let r = parse_intent_csv("date,directions\n2025-01-01,-5\n".as_bytes());
        assert!(matches!(r, Err(Error::Row { line: 2, .. })));
    }
}
