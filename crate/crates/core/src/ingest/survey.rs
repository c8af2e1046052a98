use std::collections::BTreeMap;
use std::io::Read;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{
    csv_reader, parse_date, read_text, record_line, CameraSeries, DailyCount, Headers, NodeConfig,
};
use crate::error::Result;
use crate::textnorm::nfkc;

pub const COL_PREFECTURE: &str = "対象県";
pub const COL_SURVEY_DATE: &str = "アンケート回答日";
pub const COL_SATISFACTION: &str = "満足度(旅行全体)";
pub const COL_NPS: &str = "おすすめ度";
pub const COL_SATISFACTION_SERVICE: &str = "満足度(商品・サービス)";
pub const COL_REASON: &str = "満足度理由";
pub const COL_INCONVENIENCE: &str = "不便";
pub const COL_FREETEXT: &str = "自由意見";
pub const COL_LOCATION: &str = "回答場所";
pub const COL_SPEND_BAND: &str = "県内消費額";

/// Collection-site prefecture for the Fukui-only raw export.
pub const RAW_DATASET_PREFECTURE: &str = "福井";

/// Five-point satisfaction labels, lowest first.
pub const SATISFACTION_LABELS: [&str; 5] = ["とても不満", "不満", "どちらでもない", "満足", "とても満足"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurveyDataset {
    /// Fukui raw export; carries the spend band. Its 都道府県 column is the
    /// visitor's home prefecture and is never read.
    RawFukui,
    /// Three-prefecture merged export.
    MergedHokuriku,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyResponse {
    /// Prefecture of the collection site.
    pub prefecture: String,
    pub survey_date: NaiveDate,
    pub satisfaction: Option<u8>,
    pub nps_raw: Option<u8>,
    pub satisfaction_service: Option<u8>,
    pub reason: String,
    pub inconvenience: String,
    pub freetext: String,
    pub location: String,
    pub spend_band: Option<String>,
}

impl SurveyResponse {
    /// An otherwise empty response, handy for building fixtures.
    pub fn blank(date: NaiveDate) -> Self {
        SurveyResponse {
            prefecture: RAW_DATASET_PREFECTURE.to_string(),
            survey_date: date,
            satisfaction: None,
            nps_raw: None,
            satisfaction_service: None,
            reason: String::new(),
            inconvenience: String::new(),
            freetext: String::new(),
            location: String::new(),
            spend_band: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurveyWarning {
    pub line: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyParse {
    pub responses: Vec<SurveyResponse>,
    pub warnings: Vec<SurveyWarning>,
    /// CSV records, which may span several physical lines when quoted fields
    /// contain newlines.
    pub records: usize,
    pub physical_lines: usize,
}

/// Maps a satisfaction label (or a bare digit 1–5) to its score.
pub fn satisfaction_score(label: &str) -> Option<u8> {
    let l = nfkc(label.trim());
    if let Some(i) = SATISFACTION_LABELS.iter().position(|s| *s == l) {
        return Some(i as u8 + 1);
    }
    match l.parse::<u8>() {
        Ok(v @ 1..=5) => Some(v),
        _ => None,
    }
}

pub fn satisfaction_label(score: u8) -> Option<&'static str> {
    SATISFACTION_LABELS.get(usize::from(score).checked_sub(1)?).copied()
}

/// Parses a survey export with Japanese headers. Headers are matched after
/// NFKC normalization; the inconvenience and free-opinion columns match by
/// substring.
pub fn parse_survey_csv(stream: impl Read, dataset: SurveyDataset) -> Result<SurveyParse> {
    let text = read_text(stream)?;
    let physical_lines = text.lines().count();
    let mut rdr = csv_reader(&text);
    let h = Headers::new(rdr.headers()?);

    let prefecture = match dataset {
        SurveyDataset::MergedHokuriku => Some(
            h.containing(COL_PREFECTURE)
                .ok_or_else(|| crate::Error::MissingColumn(COL_PREFECTURE.to_string()))?,
        ),
        SurveyDataset::RawFukui => None,
    };
    let date = h.require(COL_SURVEY_DATE)?;
    let sat = h.require(COL_SATISFACTION)?;
    let spend = match dataset {
        SurveyDataset::RawFukui => Some(
            h.containing(COL_SPEND_BAND)
                .ok_or_else(|| crate::Error::MissingColumn(COL_SPEND_BAND.to_string()))?,
        ),
        SurveyDataset::MergedHokuriku => h.containing(COL_SPEND_BAND),
    };
    let nps = h.exact(COL_NPS);
    let sat_service = h.exact(COL_SATISFACTION_SERVICE);
    let reason = h.exact(COL_REASON);
    let inconvenience = h.containing(COL_INCONVENIENCE);
    let freetext = h.containing(COL_FREETEXT);
    let location = h.exact(COL_LOCATION);

    let mut responses = Vec::new();
    let mut warnings = Vec::new();
    let mut records = 0;

    for rec in rdr.records() {
        let rec = rec?;
        records += 1;
        let line = record_line(&rec);
        let field = |c: Option<usize>| -> String {
            c.and_then(|c| rec.get(c)).map(nfkc).unwrap_or_default()
        };
        let mut warn = |message: String| warnings.push(SurveyWarning { line, message });

        let raw_date = field(Some(date));
        let Some(survey_date) = parse_date(&raw_date) else {
            warn(format!("unparseable survey date `{raw_date}`; row skipped"));
            continue;
        };
        let mut score = |col: Option<usize>, what: &str| -> Option<u8> {
            let raw = field(col);
            if raw.trim().is_empty() {
                return None;
            }
            let s = satisfaction_score(&raw);
            if s.is_none() {
                warn(format!("unmapped {what} label `{raw}`"));
            }
            s
        };
        let satisfaction = score(Some(sat), "satisfaction");
        let satisfaction_service = score(sat_service, "service satisfaction");
        let raw_nps = field(nps);
        let nps_raw = if raw_nps.trim().is_empty() {
            None
        } else {
            match raw_nps.trim().parse::<u8>() {
                Ok(v @ 0..=10) => Some(v),
                _ => {
                    warn(format!("invalid recommendation score `{raw_nps}`"));
                    None
                }
            }
        };
        let spend_band = Some(field(spend)).filter(|s| spend.is_some() && !s.trim().is_empty());
        responses.push(SurveyResponse {
            prefecture: match prefecture {
                Some(_) => field(prefecture),
                None => RAW_DATASET_PREFECTURE.to_string(),
            },
            survey_date,
            satisfaction,
            nps_raw,
            satisfaction_service,
            reason: field(reason),
            inconvenience: field(inconvenience),
            freetext: field(freetext),
            location: field(location),
            spend_band: spend_band.map(|s| s.trim().to_string()),
        });
    }

    Ok(SurveyParse {
        responses,
        warnings,
        records,
        physical_lines,
    })
}

/// Daily response volumes used as a visitor-count proxy at sites without a
/// camera. `location` filters on a substring of the collection site.
pub fn survey_proxy_counts(
    responses: &[SurveyResponse],
    location: Option<&str>,
    node: &NodeConfig,
) -> CameraSeries {
    let mut per_day: BTreeMap<NaiveDate, u64> = BTreeMap::new();
    let needle = location.map(nfkc);
    for r in responses {
        if let Some(n) = &needle {
            if !r.location.contains(n.as_str()) {
                continue;
            }
        }
        *per_day.entry(r.survey_date).or_insert(0) += 1;
    }
    CameraSeries {
        rows: per_day.values().sum::<u64>() as usize,
        counts: per_day
            .into_iter()
            .map(|(date, count)| DailyCount {
                date,
                count,
                source: node.sensor_kind,
            })
            .collect(),
        dropped_zero_days: Vec::new(),
        duplicate_rows: 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MERGED_HEADER: &str = "対象県（富山/石川/福井）,アンケート回答日,満足度（旅行全体）,おすすめ度,満足度（商品・サービス）,満足度理由,不便だったこと,自由意見欄,回答場所\n";

    #[test]
    fn labels_map_to_scores() {
        assert_eq!(satisfaction_score("とても満足"), Some(5));
        assert_eq!(satisfaction_score("とても不満"), Some(1));
        assert_eq!(satisfaction_score("どちらでもない"), Some(3));
        assert_eq!(satisfaction_score("まあまあ"), None);
        for s in 1..=5u8 {
            assert_eq!(satisfaction_score(satisfaction_label(s).unwrap()), Some(s));
        }
    }

    #[test]
    fn merged_export_with_full_width_headers() {
        let csv = format!(
            "{MERGED_HEADER}福井,2024-05-03,とても満足,9,満足,景色,駐車場が狭い,また来たい,東尋坊\n\
             石川,2024/05/04,,7,,,,,兼六園\n"
        );
        let p = parse_survey_csv(csv.as_bytes(), SurveyDataset::MergedHokuriku).unwrap();
        assert_eq!(p.responses.len(), 2);
        let r = &p.responses[0];
        assert_eq!(r.prefecture, "福井");
        assert_eq!(r.satisfaction, Some(5));
        assert_eq!(r.nps_raw, Some(9));
        assert_eq!(r.satisfaction_service, Some(4));
        assert_eq!(r.inconvenience, "駐車場が狭い");
        assert_eq!(r.freetext, "また来たい");
        assert_eq!(p.responses[1].satisfaction, None);
        assert!(p.warnings.is_empty());
    }

    #[test]
    fn unmapped_label_warns_and_is_missing() {
        let csv = format!("{MERGED_HEADER}福井,2024-05-03,最高,,,,,,x\n");
        let p = parse_survey_csv(csv.as_bytes(), SurveyDataset::MergedHokuriku).unwrap();
        assert_eq!(p.responses[0].satisfaction, None);
        assert_eq!(p.warnings.len(), 1);
    }

    #[test]
    fn raw_export_ignores_home_prefecture() {
        let csv = "都道府県,アンケート回答日,満足度(旅行全体),県内消費額\n\
                   大阪府,2024-06-01,満足,5千円～1万円未満\n";
        let p = parse_survey_csv(csv.as_bytes(), SurveyDataset::RawFukui).unwrap();
        assert_eq!(p.responses[0].prefecture, RAW_DATASET_PREFECTURE);
        assert_eq!(p.responses[0].spend_band.as_deref(), Some("5千円~1万円未満"));
    }

    #[test]
    fn missing_mandatory_header() {
        let csv = "アンケート回答日,満足度(旅行全体)\n2024-06-01,満足\n";
        assert!(parse_survey_csv(csv.as_bytes(), SurveyDataset::RawFukui).is_err());
        assert!(parse_survey_csv(csv.as_bytes(), SurveyDataset::MergedHokuriku).is_err());
    }

    #[test]
    fn quoted_newlines_counted_separately() {
        let csv = format!("{MERGED_HEADER}福井,2024-05-03,満足,,,\"一行目\n二行目\",,,x\n");
        let p = parse_survey_csv(csv.as_bytes(), SurveyDataset::MergedHokuriku).unwrap();
        assert_eq!(p.records, 1);
        assert_eq!(p.physical_lines, 3);
        assert_eq!(p.responses[0].reason, "一行目\n二行目");
    }
}
