use std::io::Write;

use chrono::{Days, NaiveDate};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::STREAM_SURVEY;
use crate::error::{Error, Result};
use crate::ingest::{satisfaction_label, SurveyDataset, SurveyResponse};
use crate::kansei::{match_lexicon, preprocess_text, Lexicon};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorpusParams {
    pub n_low: usize,
    pub n_high: usize,
    /// Share of low-satisfaction (scores 1-2) responses containing a keyword.
    pub low_rate: f64,
    /// Same for high-satisfaction (scores 4-5) responses.
    pub high_rate: f64,
    /// Neutral (score 3) responses; never contain a keyword.
    pub n_neutral: usize,
    pub start: NaiveDate,
    pub days: u64,
    pub spend_bands: Vec<String>,
    pub seed: u64,
}

impl Default for CorpusParams {
    fn default() -> Self {
        CorpusParams {
            n_low: 120,
            n_high: 600,
            low_rate: 0.25,
            high_rate: 0.05,
            n_neutral: 80,
            start: NaiveDate::from_ymd_opt(2024, 6, 1).expect("static date"),
            days: 365,
            spend_bands: vec![
                "5千円未満".into(),
                "5千円～1万円未満".into(),
                "1万円～2万円未満".into(),
                "2万円～3万円未満".into(),
            ],
            seed: 7,
        }
    }
}

const FILLERS: [&str; 8] = [
    "景色がきれいだった",
    "料理がおいしかった",
    "駐車場が分かりやすかった",
    "スタッフが親切でした",
    "また来たいと思います",
    "天気が良くて歩きやすかった",
    "お土産を買いました",
    "案内板が見やすかった",
];

const INCONVENIENCES: [&str; 4] = ["特になし", "バスの本数", "駐車場が遠い", "案内が少ない"];

fn planted_phrase(keyword: &str) -> String {
    match keyword {
        "静か" => "とても静かすぎた".into(),
        "寂し" => "駅前が寂しかった".into(),
        "人通り" => "人通りが少ない".into(),
        "活気" => "活気がなかった".into(),
        "閑散" => "商店街が閑散としていた".into(),
        "閉まっ" => "お店が閉まっていた".into(),
        "何もな" => "夜は何もなかった".into(),
        "つまらな" => "少しつまらなかった".into(),
        kw => format!("{kw}と感じた"),
    }
}

/// Survey responses with an exact number of keyword hits per satisfaction
/// group: round(rate · n). Hit responses carry one planted phrase; all other
/// text is drawn from fillers that match no keyword.
pub fn generate_survey_corpus(params: &CorpusParams, lexicon: &Lexicon) -> Result<Vec<SurveyResponse>> {
    for r in [params.low_rate, params.high_rate] {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::invalid(format!("keyword rate {r} outside [0, 1]")));
        }
    }
    if params.days == 0 {
        return Err(Error::invalid("corpus needs at least one day"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(STREAM_SURVEY);
    let keywords: Vec<&str> = lexicon.entries().iter().map(|e| e.keyword.as_str()).collect();

    let mut out = Vec::new();
    let groups = [
        (params.n_low, params.low_rate, [1u8, 2]),
        (params.n_high, params.high_rate, [4, 5]),
        (params.n_neutral, 0.0, [3, 3]),
    ];
    for (n, rate, scores) in groups {
        let hits = (rate * n as f64).round() as usize;
        let mut planted: Vec<bool> = (0..n).map(|i| i < hits).collect();
        planted.shuffle(&mut rng);
        for hit in planted {
            let date = params.start + Days::new(rng.random_range(0..params.days));
            let mut r = SurveyResponse::blank(date);
            let score = scores[rng.random_range(0..2)];
            r.satisfaction = Some(score);
            r.satisfaction_service = Some(score);
            r.nps_raw = Some((score * 2).min(10));
            r.reason = FILLERS[rng.random_range(0..FILLERS.len())].to_string();
            r.inconvenience = INCONVENIENCES[rng.random_range(0..INCONVENIENCES.len())].to_string();
            if hit {
                let kw = keywords[rng.random_range(0..keywords.len())];
                r.freetext = planted_phrase(kw);
            } else {
                r.freetext = FILLERS[rng.random_range(0..FILLERS.len())].to_string();
            }
            r.location = "観光案内所".to_string();
            if !params.spend_bands.is_empty() {
                r.spend_band = Some(params.spend_bands[rng.random_range(0..params.spend_bands.len())].clone());
            }
            let matched = !match_lexicon(&preprocess_text(&r), lexicon).is_empty();
            if matched != hit {
                return Err(Error::invalid(format!(
                    "generated text `{}` does not match its planted state",
                    r.freetext
                )));
            }
            out.push(r);
        }
    }
    out.sort_by_key(|r| r.survey_date);
    Ok(out)
}

const MERGED_HEADER: [&str; 9] = [
    "対象県（富山/石川/福井）",
    "アンケート回答日",
    "満足度（旅行全体）",
    "おすすめ度",
    "満足度（商品・サービス）",
    "満足度理由",
    "不便だったこと",
    "自由意見欄",
    "回答場所",
];

const RAW_HEADER: [&str; 9] = [
    "アンケート回答日",
    "都道府県",
    "満足度（旅行全体）",
    "おすすめ度",
    "満足度（商品・サービス）",
    "満足度理由",
    "不便だったこと",
    "自由意見欄",
    "県内消費額（1人あたり）",
];

/// Writes responses in either export layout.
pub fn write_survey_csv(responses: &[SurveyResponse], dataset: SurveyDataset, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let label = |s: Option<u8>| s.and_then(satisfaction_label).unwrap_or("").to_string();
    let num = |s: Option<u8>| s.map(|v| v.to_string()).unwrap_or_default();
    match dataset {
        SurveyDataset::MergedHokuriku => w.write_record(MERGED_HEADER)?,
        SurveyDataset::RawFukui => w.write_record(RAW_HEADER)?,
    }
    for r in responses {
        let date = r.survey_date.format("%Y-%m-%d").to_string();
        let row = match dataset {
            SurveyDataset::MergedHokuriku => [
                if r.prefecture.is_empty() { "福井".to_string() } else { r.prefecture.clone() },
                date,
                label(r.satisfaction),
                num(r.nps_raw),
                label(r.satisfaction_service),
                r.reason.clone(),
                r.inconvenience.clone(),
                r.freetext.clone(),
                r.location.clone(),
            ],
            SurveyDataset::RawFukui => [
                date,
                "東京都".to_string(),
                label(r.satisfaction),
                num(r.nps_raw),
                label(r.satisfaction_service),
                r.reason.clone(),
                r.inconvenience.clone(),
                r.freetext.clone(),
                r.spend_band.clone().unwrap_or_default(),
            ],
        };
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::parse_survey_csv;

    #[test]
    fn exact_hit_counts_and_round_trip() {
        let p = CorpusParams::default();
        let lex = Lexicon::default();
        let rs = generate_survey_corpus(&p, &lex).unwrap();
        assert_eq!(rs.len(), 800);
        let hits = |lo: u8, hi: u8| {
            rs.iter()
                .filter(|r| (lo..=hi).contains(&r.satisfaction.unwrap()))
                .filter(|r| !match_lexicon(&preprocess_text(r), &lex).is_empty())
                .count()
        };
        assert_eq!((hits(1, 2), hits(4, 5), hits(3, 3)), (30, 30, 0));

        let mut buf = Vec::new();
        write_survey_csv(&rs, SurveyDataset::RawFukui, &mut buf).unwrap();
        let back = parse_survey_csv(buf.as_slice(), SurveyDataset::RawFukui).unwrap();
        assert!(back.warnings.is_empty());
        assert_eq!(back.responses.len(), rs.len());
        for (b, r) in back.responses.iter().zip(&rs) {
            assert_eq!((b.survey_date, b.satisfaction, b.nps_raw), (r.survey_date, r.satisfaction, r.nps_raw));
            assert_eq!((&b.reason, &b.freetext), (&r.reason, &r.freetext));
            assert_eq!(b.spend_band.as_deref().map(crate::textnorm::nfkc), r.spend_band.as_deref().map(crate::textnorm::nfkc));
        }
        let mut merged = Vec::new();
        write_survey_csv(&rs, SurveyDataset::MergedHokuriku, &mut merged).unwrap();
        let back = parse_survey_csv(merged.as_slice(), SurveyDataset::MergedHokuriku).unwrap();
        assert!(back.warnings.is_empty());
        assert!(back.responses.iter().all(|r| r.prefecture == "福井" && r.location == "観光案内所"));
    }
}
