use chrono::NaiveDate;
use dhde::economics::*;
use dhde::ingest::{parse_survey_csv, SurveyDataset, SurveyResponse};
use dhde::kansei::*;
use dhde::synth::{generate_survey_corpus, write_survey_csv, CorpusParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

#[test]
fn planted_low_group_rate() {
    let p = CorpusParams {
        n_low: 1066,
        low_rate: 65.0 / 1066.0,
        n_high: 3000,
        high_rate: 0.03,
        ..Default::default()
    };
    let lex = Lexicon::default();
    let corpus = generate_survey_corpus(&p, &lex).unwrap();
    let mut buf = Vec::new();
    write_survey_csv(&corpus, SurveyDataset::MergedHokuriku, &mut buf).unwrap();
    let parsed = parse_survey_csv(buf.as_slice(), SurveyDataset::MergedHokuriku).unwrap();
    let r = prevalence_analysis(&parsed.responses, &lex, &[1, 2], &[4, 5]).unwrap();
    assert_eq!((r.low.hits, r.low.n), (65, 1066));
    assert_eq!(format!("{:.3}", 100.0 * r.low.rate), "6.098");
    assert_eq!((r.high.hits, r.high.n), (90, 3000));
}

fn prevalence_of(p: &CorpusParams) -> PrevalenceReport {
    let lex = Lexicon::default();
    let corpus = generate_survey_corpus(p, &lex).unwrap();
    prevalence_analysis(&corpus, &lex, &[1, 2], &[4, 5]).unwrap()
}

#[test]
fn zero_planting_gives_zero_hits() {
    let r = prevalence_of(&CorpusParams { low_rate: 0.0, high_rate: 0.0, ..Default::default() });
    assert_eq!((r.low.hits, r.high.hits), (0, 0));
    assert!(r.keywords.iter().all(|k| k.low == 0 && k.high == 0));
}

#[test]
fn full_low_planting_gives_rate_one() {
    let r = prevalence_of(&CorpusParams { low_rate: 1.0, high_rate: 0.0, ..Default::default() });
    assert_eq!(r.low.rate, 1.0);
    assert_eq!(r.high.hits, 0);
    assert!(r.ratio.is_infinite());
}

#[test]
fn planted_ratio_near_eleven_and_a_half() {
    let r = prevalence_of(&CorpusParams {
        n_low: 1066,
        low_rate: 0.061,
        n_high: 10_000,
        high_rate: 0.005,
        ..Default::default()
    });
    assert!((r.ratio - 0.061 / 0.005).abs() < 0.5, "ratio {}", r.ratio);
}

#[test]
fn conjugated_forms_match_stems() {
    let lex = Lexicon::default();
    let mut r = SurveyResponse::blank(NaiveDate::from_ymd_opt(2025, 1, 1).unwrap());
    r.freetext = "駅前が寂しかった".into();
    assert_eq!(match_lexicon(&preprocess_text(&r), &lex), vec!["寂し"]);
    r.freetext = "ｻﾋﾞｼｲ".into();
    assert!(match_lexicon(&preprocess_text(&r), &lex).is_empty());
}

#[test]
fn chi_square_closed_form() {
    for t in [[65.0f64, 1001.0], [40.0, 2100.0]].iter().zip([[120.0, 880.0], [10.0, 90.0]]) {
        let (a, b, c, d) = (t.0[0], t.0[1], t.1[0], t.1[1]);
        let n = a + b + c + d;
        let closed = n * (a * d - b * c).powi(2) / ((a + b) * (c + d) * (a + c) * (b + d));
        let got = chi_square_2x2([*t.0, t.1], false).unwrap().statistic;
        assert!((got - closed).abs() <= 1e-9 * closed.max(1.0), "{got} vs {closed}");
        let yates = n * ((a * d - b * c).abs() - n / 2.0).powi(2) / ((a + b) * (c + d) * (a + c) * (b + d));
        let got = chi_square_2x2([*t.0, t.1], true).unwrap().statistic;
        assert!((got - yates).abs() <= 1e-9 * yates.max(1.0));
    }
}

#[test]
fn reported_gap_arithmetic_and_reconciliation() {
    let node = NodeFlags {
        node: "all".into(),
        flagged: vec![(NaiveDate::from_ymd_opt(2025, 1, 1).unwrap(), -865_917.0)],
        observed_days: 365,
    };
    let r = opportunity_gap(&[node], FALLBACK_SPEND_YEN, DEFAULT_FX_YEN_PER_USD)
        .unwrap()
        .reconcile(11_959_183_083);
    assert_eq!(r.total.yen_value, 11_959_179_687);
    let rec = r.reconciliation.unwrap();
    assert_eq!(rec.divergence_yen, 3_396);
    assert!(rec.note.contains("3396"));
    assert!((rec.implied_spend_yen - 13_811.0).abs() < 0.01);
}

#[test]
fn ccf_recovers_planted_lag() {
    let good = (0..50u64)
        .filter(|&s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let x: Vec<f64> = (0..365).map(|_| StandardNormal.sample(&mut rng)).collect();
            let y: Vec<f64> = (0..365)
                .map(|t| {
                    let e: f64 = StandardNormal.sample(&mut rng);
                    let lead = if t >= 3 { x[t - 3] } else { 0.0 };
                    lead + 0.1 * e
                })
                .collect();
            let r = ccf_series(&x, &y, 14).unwrap();
            r.best_lag == 3 && r.best_r > 0.95
        })
        .count();
    assert!(good >= 48, "{good}/50");
}

#[test]
fn spend_mean_from_corpus() {
    let table = SpendBandTable::new(vec![
        ("5千円未満".into(), 2_500.0),
        ("5千円～1万円未満".into(), 7_500.0),
        ("1万円～2万円未満".into(), 15_000.0),
        ("2万円～3万円未満".into(), 25_000.0),
    ])
    .unwrap();
    let corpus = generate_survey_corpus(&CorpusParams::default(), &Lexicon::default()).unwrap();
    let mut buf = Vec::new();
    write_survey_csv(&corpus, SurveyDataset::RawFukui, &mut buf).unwrap();
    let parsed = parse_survey_csv(buf.as_slice(), SurveyDataset::RawFukui).unwrap();
    let est = mean_spend(&parsed.responses, &table).unwrap();
    assert_eq!(est.unmapped, 0);
    let oracle: f64 = corpus
        .iter()
        .map(|r| table.midpoint(r.spend_band.as_deref().unwrap()).unwrap())
        .sum::<f64>()
        / corpus.len() as f64;
    assert!((est.mean_yen - oracle).abs() < 1e-9);
}
