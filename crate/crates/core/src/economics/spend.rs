use std::collections::{BTreeMap, HashSet};
use std::io::Read;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::{csv_reader, read_text, record_line, Headers, SurveyResponse};
use crate::textnorm::nfkc;

/// Per-capita spend used when no band table is supplied.
pub const FALLBACK_SPEND_YEN: f64 = 13_811.0;

/// Spend-band label → midpoint in yen. Labels are compared after NFKC and
/// trimming.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpendBandTable {
    bands: Vec<(String, f64)>,
}

impl SpendBandTable {
    pub fn new(bands: Vec<(String, f64)>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut out = Vec::with_capacity(bands.len());
        for (label, mid) in bands {
            let key = nfkc(label.trim());
            if key.is_empty() {
                return Err(Error::invalid("blank spend-band label"));
            }
            if !(mid >= 0.0) || !mid.is_finite() {
                return Err(Error::invalid(format!("midpoint for `{key}` must be a finite value ≥ 0")));
            }
            if !seen.insert(key.clone()) {
                return Err(Error::invalid(format!("duplicate spend-band label `{key}`")));
            }
            out.push((key, mid));
        }
        if out.is_empty() {
            return Err(Error::invalid("spend-band table is empty"));
        }
        Ok(SpendBandTable { bands: out })
    }

    /// CSV with columns `label,midpoint_yen`.
    pub fn read_csv(stream: impl Read) -> Result<Self> {
        let text = read_text(stream)?;
        let mut rdr = csv_reader(&text);
        let h = Headers::new(rdr.headers()?);
        let (lc, mc) = (h.require("label")?, h.require("midpoint_yen")?);
        let mut bands = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let mid = rec.get(mc).unwrap_or("").trim().parse::<f64>().map_err(|_| Error::Row {
                line: record_line(&rec),
                message: "invalid midpoint_yen".into(),
            })?;
            bands.push((rec.get(lc).unwrap_or("").to_string(), mid));
        }
        SpendBandTable::new(bands)
    }

    pub fn midpoint(&self, label: &str) -> Option<f64> {
        let key = nfkc(label.trim());
        self.bands.iter().find(|(l, _)| *l == key).map(|(_, m)| *m)
    }

    pub fn bands(&self) -> &[(String, f64)] {
        &self.bands
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpendEstimate {
    /// Unrounded mean midpoint.
    pub mean_yen: f64,
    pub responses_used: usize,
    pub missing_band: usize,
    pub unmapped: usize,
    pub unmapped_labels: BTreeMap<String, usize>,
}

/// Mean band midpoint over responses with a mapped band. Blank bands are
/// counted as missing, unknown labels as unmapped; neither enters the mean.
pub fn mean_spend(responses: &[SurveyResponse], table: &SpendBandTable) -> Result<SpendEstimate> {
    let mut sum = 0.0;
    let mut used = 0usize;
    let mut missing = 0usize;
    let mut unmapped_labels: BTreeMap<String, usize> = BTreeMap::new();
    for r in responses {
        match r.spend_band.as_deref().map(str::trim) {
            None | Some("") => missing += 1,
            Some(label) => match table.midpoint(label) {
                Some(m) => {
                    sum += m;
                    used += 1;
                }
                None => *unmapped_labels.entry(nfkc(label)).or_default() += 1,
            },
        }
    }
    if used == 0 {
        return Err(Error::insufficient("no response has a mapped spend band"));
    }
    Ok(SpendEstimate {
        mean_yen: sum / used as f64,
        responses_used: used,
        missing_band: missing,
        unmapped: unmapped_labels.values().sum(),
        unmapped_labels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn with_band(b: Option<&str>) -> SurveyResponse {
        let mut r = SurveyResponse::blank(NaiveDate::from_ymd_opt(2025, 3, 1).unwrap());
        r.spend_band = b.map(str::to_string);
        r
    }

    #[test]
    fn mean_of_two() {
        let t = SpendBandTable::new(vec![("1万円".into(), 10_000.0), ("2万円".into(), 20_000.0)]).unwrap();
        let rs = vec![
            with_band(Some("1万円")),
            with_band(Some("２万円")),
            with_band(None),
            with_band(Some("謎")),
        ];
        let e = mean_spend(&rs, &t).unwrap();
        assert_eq!(e.mean_yen, 15_000.0);
        assert_eq!((e.responses_used, e.missing_band, e.unmapped), (2, 1, 1));
    }

    #[test]
    fn all_missing_is_error() {
        let t = SpendBandTable::new(vec![("a".into(), 1.0)]).unwrap();
        assert!(mean_spend(&[with_band(None), with_band(Some(""))], &t).is_err());
    }

    #[test]
    fn table_validation() {
        assert!(SpendBandTable::new(vec![("a".into(), -1.0)]).is_err());
        assert!(SpendBandTable::new(vec![("ａ".into(), 1.0), ("a".into(), 2.0)]).is_err());
        let t = SpendBandTable::read_csv("label,midpoint_yen\n5千円未満,2500\n".as_bytes()).unwrap();
        assert_eq!(t.midpoint("5千円未満"), Some(2500.0));
    }
}
