use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{
    csv_reader, parse_date, read_text, record_line, CameraSeries, DailyIntent, DailyWeather,
    Headers, NodeConfig, NodeId,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelRow {
    pub date: NaiveDate,
    pub count: u64,
    pub precip: f64,
    pub temp: f64,
    pub sun: f64,
    pub wind: f64,
    pub snow_depth: Option<f64>,
    pub directions: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stream {
    Counts,
    Weather,
    Intent,
}

/// A date seen in at least one stream but not usable in the join.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gap {
    pub date: NaiveDate,
    pub missing: Vec<Stream>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    pub n_days: usize,
    pub gaps: Vec<Gap>,
    pub dropped_zero_days: usize,
}

/// Joined per-node daily sample, strictly ascending by date.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailyPanel {
    pub node_id: NodeId,
    pub rows: Vec<PanelRow>,
    pub coverage: Coverage,
}

/// Inner join of counts, weather and intent on date. Weather days lacking any
/// model variable count as missing weather.
pub fn build_panel(
    counts: &CameraSeries,
    weather: &[DailyWeather],
    intent: &[DailyIntent],
    node: &NodeConfig,
) -> Result<DailyPanel> {
    let c: BTreeMap<NaiveDate, u64> = counts.counts.iter().map(|d| (d.date, d.count)).collect();
    let w: BTreeMap<NaiveDate, &DailyWeather> = weather
        .iter()
        .filter(|d| d.is_complete())
        .map(|d| (d.date, d))
        .collect();
    let i: BTreeMap<NaiveDate, u64> = intent.iter().map(|d| (d.date, d.directions)).collect();

    let all: BTreeSet<NaiveDate> = c
        .keys()
        .chain(weather.iter().map(|d| &d.date))
        .chain(i.keys())
        .copied()
        .collect();

    let mut rows = Vec::new();
    let mut gaps = Vec::new();
    for date in all {
        let mut missing = Vec::new();
        if !c.contains_key(&date) {
            missing.push(Stream::Counts);
        }
        if !w.contains_key(&date) {
            missing.push(Stream::Weather);
        }
        if !i.contains_key(&date) {
            missing.push(Stream::Intent);
        }
        if !missing.is_empty() {
            gaps.push(Gap { date, missing });
            continue;
        }
        let wx = w[&date];
        rows.push(PanelRow {
            date,
            count: c[&date],
            precip: wx.precip.expect("complete"),
            temp: wx.temp.expect("complete"),
            sun: wx.sun.expect("complete"),
            wind: wx.wind.expect("complete"),
            snow_depth: wx.snow_depth,
            directions: i[&date],
        });
    }
    if rows.is_empty() {
        return Err(Error::NoOverlap);
    }
    Ok(DailyPanel {
        node_id: node.id.clone(),
        coverage: Coverage {
            n_days: rows.len(),
            gaps,
            dropped_zero_days: counts.dropped_zero_days.len(),
        },
        rows,
    })
}

const PANEL_COLUMNS: [&str; 6] = ["date", "count", "precip", "temp", "sun", "wind"];

impl DailyPanel {
    pub fn has_snow(&self) -> bool {
        self.rows.iter().any(|r| r.snow_depth.is_some())
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        self.rows.iter().map(|r| r.date).collect()
    }

    /// Writes `date,count,precip,temp,sun,wind[,snow_depth],directions`.
    /// Floats use the shortest representation that reads back exactly.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let snow = self.has_snow();
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<&str> = PANEL_COLUMNS.to_vec();
        if snow {
            header.push("snow_depth");
        }
        header.push("directions");
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![
                r.date.to_string(),
                r.count.to_string(),
                r.precip.to_string(),
                r.temp.to_string(),
                r.sun.to_string(),
                r.wind.to_string(),
            ];
            if snow {
                rec.push(r.snow_depth.map(|v| v.to_string()).unwrap_or_default());
            }
            rec.push(r.directions.to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("utf-8")
    }

    /// Reads a panel written by [`DailyPanel::write_csv`]. Coverage is
    /// rebuilt from the rows only: gap details are not part of the CSV.
    pub fn read_csv(stream: impl Read, node_id: NodeId) -> Result<DailyPanel> {
        let text = read_text(stream)?;
        let mut rdr = csv_reader(&text);
        let h = Headers::new(rdr.headers()?);
        let cols: Vec<usize> = PANEL_COLUMNS
            .iter()
            .map(|c| h.require(c))
            .collect::<Result<_>>()?;
        let dir = h.require("directions")?;
        let snow = h.exact("snow_depth");
        let mut rows: Vec<PanelRow> = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let line = record_line(&rec);
            let bad = |what: &str| Error::Row {
                line,
                message: format!("invalid {what}"),
            };
            let get = |i: usize| rec.get(i).unwrap_or("").trim();
            let date = parse_date(get(cols[0])).ok_or_else(|| bad("date"))?;
            let f = |i: usize, what: &str| get(i).parse::<f64>().map_err(|_| bad(what));
            let row = PanelRow {
                date,
                count: get(cols[1]).parse().map_err(|_| bad("count"))?,
                precip: f(cols[2], "precip")?,
                temp: f(cols[3], "temp")?,
                sun: f(cols[4], "sun")?,
                wind: f(cols[5], "wind")?,
                snow_depth: match snow.map(get) {
                    Some(s) if !s.is_empty() => Some(s.parse().map_err(|_| bad("snow_depth"))?),
                    _ => None,
                },
                directions: get(dir).parse().map_err(|_| bad("directions"))?,
            };
            if let Some(prev) = rows.last() {
                if row.date <= prev.date {
                    return Err(Error::Row {
                        line,
                        message: format!("date {} not strictly after {}", row.date, prev.date),
                    });
                }
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::NoOverlap);
        }
        Ok(DailyPanel {
            node_id,
            coverage: Coverage {
                n_days: rows.len(),
                gaps: Vec::new(),
                dropped_zero_days: 0,
            },
            rows,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{DailyCount, SensorKind};

    fn d(day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2025, 3, day).unwrap()
    }

    fn counts(days: &[u32]) -> CameraSeries {
        CameraSeries {
            counts: days
                .iter()
                .map(|&x| DailyCount {
                    date: d(x),
                    count: 100 + x as u64,
                    source: SensorKind::PersonCamera,
                })
                .collect(),
            dropped_zero_days: vec![],
            rows: 0,
            duplicate_rows: 0,
        }
    }

    fn wx(day: u32) -> DailyWeather {
        DailyWeather {
            date: d(day),
            precip: Some(1.5),
            temp: Some(7.25),
            sun: Some(0.3),
            wind: Some(2.0),
            snow_depth: None,
            humidity: None,
        }
    }

    fn intent(day: u32) -> DailyIntent {
        DailyIntent {
            date: d(day),
            directions: 40,
        }
    }

    #[test]
    fn inner_join_reports_gaps() {
        let node = NodeConfig::defaults().remove(0);
        let p = build_panel(&counts(&[1, 2]), &[wx(2), wx(3)], &[intent(2)], &node).unwrap();
        assert_eq!(p.dates(), vec![d(2)]);
        let gap_dates: Vec<_> = p.coverage.gaps.iter().map(|g| g.date).collect();
        assert_eq!(gap_dates, vec![d(1), d(3)]);
        assert_eq!(
            p.coverage.gaps[1].missing,
            vec![Stream::Counts, Stream::Intent]
        );
    }

    #[test]
    fn empty_intersection_errors() {
        let node = NodeConfig::defaults().remove(0);
        let r = build_panel(&counts(&[1]), &[wx(2)], &[intent(3)], &node);
        assert!(matches!(r, Err(Error::NoOverlap)));
    }

    #[test]
    fn incomplete_weather_day_is_a_gap() {
        let node = NodeConfig::defaults().remove(0);
        let mut w2 = wx(2);
        w2.sun = None;
        let p = build_panel(&counts(&[1, 2]), &[wx(1), w2], &[intent(1), intent(2)], &node)
            .unwrap();
        assert_eq!(p.coverage.n_days, 1);
    }

    #[test]
    fn csv_round_trip() {
        let node = NodeConfig::defaults().remove(1);
        let mut w = vec![wx(1), wx(2)];
        w[0].snow_depth = Some(12.5);
        w[1].temp = Some(-0.1 + 0.2);
        let p = build_panel(&counts(&[1, 2]), &w, &[intent(1), intent(2)], &node).unwrap();
        let text = p.to_csv_string();
        assert!(text.starts_with("date,count,precip,temp,sun,wind,snow_depth,directions\n"));
        let back = DailyPanel::read_csv(text.as_bytes(), node.id.clone()).unwrap();
        assert_eq!(back.rows, p.rows);
        assert_eq!(back.to_csv_string(), text);
    }
}
