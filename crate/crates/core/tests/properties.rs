use std::collections::BTreeMap;

use chrono::{Days, NaiveDate};
use dhde::economics::*;
use dhde::features::{weather_severity, SeverityPolicy};
use dhde::ingest::NodeConfig;
use dhde::linmodel::{weather_ablation, DEFAULT_WEATHER_COLUMNS};
use dhde::nudge::*;
use dhde::synth::{generate_panel, DgpParams};
use proptest::prelude::*;

#[test]
fn severity_reference_cells() {
    let p = SeverityPolicy::default();
    let sev = |precip, wind| weather_severity(precip, wind, None, &p).unwrap();
    assert_eq!(sev(0.0, 5.0), 0);
    assert_eq!(sev(5.0, 3.0), 1);
    assert_eq!(sev(15.0, 2.0), 2);
    assert_eq!(sev(12.0, 9.0), 3);
    assert_eq!(sev(0.0, 9.0), 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn severity_monotone(p1 in 0.0..60.0f64, p2 in 0.0..60.0f64, w1 in 0.0..25.0f64, w2 in 0.0..25.0f64, snow in prop::option::of(0.0..60.0f64)) {
        for policy in [SeverityPolicy::default(), SeverityPolicy::with_snow_escalation()] {
            let (plo, phi) = (p1.min(p2), p1.max(p2));
            let (wlo, whi) = (w1.min(w2), w1.max(w2));
            let s = |p, w| weather_severity(p, w, snow, &policy).unwrap();
            prop_assert!(s(plo, wlo) <= s(phi, wlo));
            prop_assert!(s(plo, wlo) <= s(plo, whi));
            prop_assert!(s(phi, whi) <= 3);
        }
    }

    #[test]
    fn ccf_shift_moves_best_lag(shift in 0usize..5, seed in 0u64..1000) {
        use rand::SeedableRng;
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..200).map(|_| StandardNormal.sample(&mut rng)).collect();
        let start = NaiveDate::from_ymd_opt(2025, 1, 1).unwrap();
        let xd: Vec<(NaiveDate, f64)> = x.iter().enumerate().map(|(i, v)| (start + Days::new(i as u64), *v)).collect();
        let yd: Vec<(NaiveDate, f64)> = x.iter().enumerate().map(|(i, v)| (start + Days::new((i + shift) as u64), *v)).collect();
        let r = ccf(&xd, &yd, 7).unwrap();
        prop_assert_eq!(r.best_lag, shift as i64);
        prop_assert!((r.best_r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn more_recovery_never_worsens_rank(base in 100.0..1000.0f64, a in 0.0..5000.0f64, b in 0.0..5000.0f64, tiers in prop::collection::vec(0.0..2000.0f64, 0..6)) {
        let months = (1..=12).map(|m| MonthBaseline { month: m, baseline_visitors: base, thresholds: tiers.clone() }).collect();
        let bl = RankingBaseline::new(months).unwrap();
        let lo = ranking_simulation(&bl, a.min(b), &uniform_weights()).unwrap();
        let hi = ranking_simulation(&bl, a.max(b), &uniform_weights()).unwrap();
        for (l, h) in lo.months.iter().zip(&hi.months) {
            prop_assert!(h.projected_rank <= l.projected_rank);
            prop_assert!(l.projected_rank <= l.baseline_rank);
        }
    }

    #[test]
    fn positive_residuals_leave_gap_unchanged(neg in prop::collection::vec(-500.0..0.0f64, 1..10), pos in prop::collection::vec(0.0..500.0f64, 0..10)) {
        let day = |i: usize| NaiveDate::from_ymd_opt(2025, 1, 1).unwrap() + Days::new(i as u64);
        let only: Vec<(NaiveDate, f64)> = neg.iter().enumerate().map(|(i, r)| (day(i), *r)).collect();
        let mut mixed = only.clone();
        mixed.extend(pos.iter().enumerate().map(|(i, r)| (day(100 + i), *r)));
        let g = |flagged| opportunity_gap(&[NodeFlags { node: "A".into(), flagged, observed_days: 200 }], 13_811.0, 157.0).unwrap();
        let (a, b) = (g(only), g(mixed));
        prop_assert_eq!(a.total.yen_value, b.total.yen_value);
        prop_assert_eq!(a.total.yen_value, (a.total.lost_visitors * 13_811.0).round() as u64);
    }

    #[test]
    fn reroutes_never_target_worse_weather(sev in prop::collection::vec(0u8..=3, 4), intent in 0.0..100.0f64) {
        let nodes = NodeConfig::defaults();
        let issued = NaiveDate::from_ymd_opt(2025, 1, 1).unwrap();
        let date = issued + Days::new(1);
        let forecasts: Vec<NodeForecast> = nodes.iter().map(|n| NodeForecast { node: n.id.clone(), date, visitors: 10.0, intent }).collect();
        let outlook: Vec<SeverityOutlook> = nodes.iter().zip(&sev).map(|(n, s)| SeverityOutlook { node: n.id.clone(), date, severity: *s }).collect();
        let history: BTreeMap<_, _> = nodes.iter().map(|n| (n.id.clone(), NodeHistory { counts: (1..=50).map(f64::from).collect(), intent: (1..=100).map(f64::from).collect() })).collect();
        let out = evaluate_nudges(issued, &forecasts, &outlook, &history, &nodes, &NudgePolicy::default()).unwrap();
        let sev_of = |id: &dhde::ingest::NodeId| outlook.iter().find(|o| &o.node == id).unwrap().severity;
        for d in out.directives.iter().filter(|d| d.kind == DirectiveKind::WeatherResilientReroute) {
            prop_assert!(sev_of(d.target_node.as_ref().unwrap()) < sev_of(&d.source_node));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn synth_features_respect_invariants(seed in 0u64..10_000) {
        let out = generate_panel(&DgpParams { seed, n_days: 90, ..Default::default() }).unwrap();
        let fm = &out.design;
        let col = |n: &str| fm.column(n).unwrap();
        let (flag, wxi, wxs, dir, sev) = (col("is_weekend_or_holiday"), col("weekend_x_intent"), col("weekend_x_severity"), col("directions"), col("weather_severity"));
        for i in 0..fm.n() {
            prop_assert_eq!(wxi[i], flag[i] * dir[i]);
            prop_assert_eq!(wxs[i], flag[i] * sev[i]);
            if flag[i] == 0.0 {
                prop_assert_eq!(wxi[i], 0.0);
            }
        }
        let a = weather_ablation(fm, &DEFAULT_WEATHER_COLUMNS, None).unwrap();
        prop_assert!(a.delta_r2 >= -1e-12);
    }
}
