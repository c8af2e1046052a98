//! Keyword-lexicon text mining of survey free text and the correlation
//! tests used alongside it.

mod lexicon;

pub use lexicon::{Category, Lexicon, LexiconEntry};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::SurveyResponse;
use crate::stats;
use crate::textnorm::{katakana_to_half_width, nfkc};

/// Normalizes and joins free-text fields: NFKC per field, blanks dropped,
/// single-space join, trim, katakana to half-width.
pub fn preprocess_fields(fields: &[&str]) -> String {
    let parts: Vec<String> = fields
        .iter()
        .map(|f| nfkc(f).trim().to_string())
        .filter(|f| !f.is_empty())
        .collect();
    katakana_to_half_width(parts.join(" ").trim())
}

/// Reason, inconvenience and free opinion of one response.
pub fn preprocess_text(r: &SurveyResponse) -> String {
    preprocess_fields(&[&r.reason, &r.inconvenience, &r.freetext])
}

/// Keywords (in lexicon order) occurring as substrings of `text`.
pub fn match_lexicon<'a>(text: &str, lexicon: &'a Lexicon) -> Vec<&'a str> {
    if text.is_empty() {
        return Vec::new();
    }
    lexicon
        .entries()
        .iter()
        .zip(lexicon.normalized_keywords())
        .filter(|(_, k)| text.contains(k.as_str()))
        .map(|(e, _)| e.keyword.as_str())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupRate {
    pub scores: Vec<u8>,
    pub n: usize,
    pub hits: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub p_value: f64,
    pub df: u32,
    pub continuity_correction: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KeywordCount {
    pub keyword: String,
    pub low: usize,
    pub high: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrevalenceReport {
    pub low: GroupRate,
    pub high: GroupRate,
    /// low rate / high rate; infinite when the high group has no hits.
    #[serde(serialize_with = "crate::serde_ext::f64_marker")]
    pub ratio: f64,
    /// Absent when an expected cell count is zero.
    pub chi_square: Option<ChiSquare>,
    pub chi_square_corrected: Option<ChiSquare>,
    /// Responses per keyword, by group.
    pub keywords: Vec<KeywordCount>,
}

/// Response-level keyword prevalence in low versus high satisfaction groups
/// with a 2×2 chi-square test. Responses outside both groups, or without a
/// satisfaction score, are ignored.
pub fn prevalence_analysis(
    responses: &[SurveyResponse],
    lexicon: &Lexicon,
    low: &[u8],
    high: &[u8],
) -> Result<PrevalenceReport> {
    if low.iter().any(|s| high.contains(s)) {
        return Err(Error::invalid("satisfaction groups overlap"));
    }
    let mut counts = [[0usize; 2]; 2];
    let mut per_kw = vec![[0usize; 2]; lexicon.len()];
    for r in responses {
        let Some(s) = r.satisfaction else { continue };
        let g = if low.contains(&s) {
            0
        } else if high.contains(&s) {
            1
        } else {
            continue;
        };
        let matched = match_lexicon(&preprocess_text(r), lexicon);
        counts[g][usize::from(matched.is_empty())] += 1;
        for kw in matched {
            let j = lexicon.position(kw).expect("matched keyword is in the lexicon");
            per_kw[j][g] += 1;
        }
    }
    let group = |g: usize, scores: &[u8]| {
        let n = counts[g][0] + counts[g][1];
        GroupRate {
            scores: scores.to_vec(),
            n,
            hits: counts[g][0],
            rate: counts[g][0] as f64 / n as f64,
        }
    };
    let (lo, hi) = (group(0, low), group(1, high));
    if lo.n == 0 || hi.n == 0 {
        return Err(Error::insufficient(format!(
            "empty satisfaction group (low n = {}, high n = {})",
            lo.n, hi.n
        )));
    }
    let ratio = if hi.hits == 0 {
        if lo.hits == 0 {
            f64::NAN
        } else {
            f64::INFINITY
        }
    } else {
        lo.rate / hi.rate
    };
    let table = [
        [lo.hits as f64, (lo.n - lo.hits) as f64],
        [hi.hits as f64, (hi.n - hi.hits) as f64],
    ];
    Ok(PrevalenceReport {
        ratio,
        chi_square: chi_square_2x2(table, false),
        chi_square_corrected: chi_square_2x2(table, true),
        keywords: lexicon
            .entries()
            .iter()
            .zip(per_kw)
            .map(|(e, [l, h])| KeywordCount {
                keyword: e.keyword.clone(),
                low: l,
                high: h,
            })
            .collect(),
        low: lo,
        high: hi,
    })
}

/// Pearson chi-square of a 2×2 table; with `yates`, each |O − E| is reduced
/// by min(0.5, |O − E|).
pub fn chi_square_2x2(table: [[f64; 2]; 2], yates: bool) -> Option<ChiSquare> {
    let rows = [table[0][0] + table[0][1], table[1][0] + table[1][1]];
    let cols = [table[0][0] + table[1][0], table[0][1] + table[1][1]];
    let n = rows[0] + rows[1];
    let mut stat = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let e = rows[i] * cols[j] / n;
            if !(e > 0.0) {
                return None;
            }
            let mut d = (table[i][j] - e).abs();
            if yates {
                d -= d.min(0.5);
            }
            stat += d * d / e;
        }
    }
    Some(ChiSquare {
        statistic: stat,
        p_value: stats::chi2_sf(stat, 1.0),
        df: 1,
        continuity_correction: yates,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Correlation {
    pub r: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Product-moment correlation with a two-sided t-approximation p-value.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<Correlation> {
    let r = stats::pearson_r(x, y)?;
    Ok(Correlation {
        r,
        p_value: stats::correlation_p(r, x.len()),
        n: x.len(),
    })
}

/// Spearman rank correlation: Pearson on mid-ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<Correlation> {
    if x.len() != y.len() {
        return Err(Error::invalid("length mismatch"));
    }
    if x.len() < 4 {
        return Err(Error::insufficient("Spearman needs at least 4 pairs"));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite value in correlation input"));
    }
    pearson(&stats::mid_ranks(x), &stats::mid_ranks(y))
}
