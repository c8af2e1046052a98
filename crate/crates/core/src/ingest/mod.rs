//! Parsing and harmonization of the raw stream families: five-minute people
//! counts, hourly weather observations, daily route-search volumes and visitor
//! surveys. Everything ends up in a [`DailyPanel`] keyed by node and date.

mod camera;
mod intent;
mod node;
mod panel;
mod survey;
mod weather;

use std::io::Read;

use chrono::{NaiveDate, NaiveDateTime};

pub use camera::{parse_camera_csv, CameraSeries, DailyCount};
pub use intent::{parse_intent_csv, DailyIntent, IntentSeries};
pub use node::{
    Environment, NodeConfig, NodeId, SensorKind, Station, StationKind, StationRegistry,
};
pub use panel::{build_panel, Coverage, DailyPanel, Gap, PanelRow, Stream};
pub use survey::{
    parse_survey_csv, satisfaction_label, satisfaction_score, survey_proxy_counts,
    SurveyDataset, SurveyParse, SurveyResponse, SurveyWarning, SATISFACTION_LABELS,
};
pub use weather::{parse_jma_csv, DailyWeather, WeatherSeries};

use crate::error::{Error, Result};
use crate::textnorm::{nfkc, strip_bom};

/// Reads a whole stream as UTF-8 text, dropping a BOM.
pub(crate) fn read_text(mut r: impl Read) -> Result<String> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let s = String::from_utf8(bytes)
        .map_err(|e| Error::invalid(format!("input is not valid UTF-8: {e}")))?;
    Ok(strip_bom(&s).to_string())
}

/// Column positions resolved against NFKC-normalized header names.
pub(crate) struct Headers {
    names: Vec<String>,
}

impl Headers {
    pub(crate) fn new(record: &csv::StringRecord) -> Self {
        Headers {
            names: record.iter().map(|h| nfkc(h.trim())).collect(),
        }
    }

    pub(crate) fn exact(&self, name: &str) -> Option<usize> {
        let want = nfkc(name);
        self.names.iter().position(|h| *h == want)
    }

    pub(crate) fn containing(&self, fragment: &str) -> Option<usize> {
        let want = nfkc(fragment);
        self.names.iter().position(|h| h.contains(&want))
    }

    pub(crate) fn require(&self, name: &str) -> Result<usize> {
        self.exact(name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    }
}

pub(crate) fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}

pub(crate) fn record_line(rec: &csv::StringRecord) -> u64 {
    rec.position().map_or(0, |p| p.line())
}

const DATETIME_FORMATS: &[&str] = &[
    "%Y-%m-%d %H:%M:%S",
    "%Y-%m-%d %H:%M",
    "%Y-%m-%dT%H:%M:%S",
    "%Y-%m-%dT%H:%M",
    "%Y/%m/%d %H:%M:%S",
    "%Y/%m/%d %H:%M",
];

/// Parses a local timestamp and returns its calendar day. Any UTC offset is
/// ignored so the day is the one written in the file; `24:00` belongs to the
/// written date.
pub(crate) fn parse_timestamp_day(raw: &str) -> Option<(NaiveDate, String)> {
    let s = raw.trim();
    let s = s.trim_end_matches('Z');
    // Drop an explicit offset such as +09:00.
    let s = match s.rfind(['+']) {
        Some(pos) if pos > 10 => &s[..pos],
        _ => s,
    };
    for f in DATETIME_FORMATS {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, f) {
            return Some((dt.date(), dt.format("%Y-%m-%d %H:%M:%S").to_string()));
        }
    }
    // End-of-day hour convention.
    for sep in [' ', 'T'] {
        if let Some((d, t)) = s.split_once(sep) {
            if t == "24:00" || t == "24:00:00" {
                if let Some(date) = parse_date(d) {
                    return Some((date, format!("{date} 24:00:00")));
                }
            }
        }
    }
    None
}

pub(crate) fn parse_date(raw: &str) -> Option<NaiveDate> {
    let s = raw.trim();
    for f in ["%Y-%m-%d", "%Y/%m/%d", "%Y%m%d", "%Y年%m月%d日"] {
        if let Ok(d) = NaiveDate::parse_from_str(s, f) {
            return Some(d);
        }
    }
    // Date-times are accepted where a date is expected.
    parse_timestamp_day(s).map(|(d, _)| d)
}
