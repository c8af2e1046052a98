use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::{Datelike, Days, NaiveDate};
use dhde::economics::{
    ccf, day_records, opportunity_gap, ranking_simulation, uniform_weights, NodeFlags, RankingBaseline,
};
use dhde::features::{weather_severity, DowBaseline, FeatureMatrix};
use dhde::forest::{fit_forest, kfold_cv, permutation_importance};
use dhde::ingest::NodeId;
use dhde::kansei::{pearson, prevalence_analysis, spearman, Correlation, Lexicon};
use dhde::linmodel::{
    adf_test, chronological_holdout, cohens_f2, fit_first_difference, fit_ldv, fit_ols, newey_west,
    seasonal_ablation, standardized_betas, vif, weather_ablation, AdfTrend, LinearFit, MaxLag, SUMMER_MONTHS,
    WINTER_MONTHS,
};
use dhde::nudge::{evaluate_nudges, write_jsonl, NodeForecast, NodeHistory, SeverityOutlook};
use serde::Serialize;
use serde_json::json;

use crate::config::DensityAggregation;
use crate::error::{CliError, Context};
use crate::output::{line_chart, opt, Chart, Series, Sink};
use crate::pipeline::{NodeData, Pipeline};

fn sink(p: &Pipeline) -> Result<Sink, CliError> {
    Sink::new(p.output_dir())
}

fn fm_csv(fm: &FeatureMatrix) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    fm.write_csv(&mut buf)?;
    Ok(buf)
}

pub fn ingest(p: &Pipeline) -> Result<Sink, CliError> {
    let mut out = sink(p)?;
    for d in p.ingest_all()? {
        let id = d.node.id.as_str();
        out.text(&format!("panel_{id}.csv"), &d.panel.to_csv_string())?;
        out.json(&format!("ingest_{id}.json"), &d.summary)?;
    }
    Ok(out)
}

pub fn features(p: &Pipeline) -> Result<Sink, CliError> {
    let mut out = sink(p)?;
    for d in p.ingest_all()? {
        let fm = p.features(&d, DowBaseline::FullSample)?;
        out.bytes(&format!("features_{}.csv", d.node.id), &fm_csv(&fm)?)?;
    }
    Ok(out)
}

#[derive(Serialize)]
struct CoefRow {
    name: String,
    estimate: f64,
    std_error: f64,
    t_stat: f64,
    p_value: f64,
    hac_std_error: f64,
    hac_t_stat: f64,
    hac_p_value: f64,
}

fn coef_table(fit: &LinearFit) -> Vec<CoefRow> {
    let hac = fit.hac.as_ref().expect("HAC attached");
    (0..fit.names.len())
        .map(|j| CoefRow {
            name: fit.names[j].clone(),
            estimate: fit.coefficients[j],
            std_error: fit.std_errors[j],
            t_stat: fit.t_stats[j],
            p_value: fit.p_values[j],
            hac_std_error: hac.std_errors[j],
            hac_t_stat: hac.t_stats[j],
            hac_p_value: hac.p_values[j],
        })
        .collect()
}

fn train_n(p: &Pipeline, n: usize) -> usize {
    (p.loaded.config.model.train_fraction * n as f64).floor() as usize
}

fn fit_with_hac(p: &Pipeline, fm: &FeatureMatrix, id: &str) -> Result<LinearFit, CliError> {
    let mut fit = fit_ols(fm).context(format!("node {id}"))?;
    let hac = newey_west(&fit, &fm.x, p.loaded.config.model.hac_lag).context(format!("node {id}"))?;
    fit.attach_hac(hac);
    Ok(fit)
}

pub fn fit(p: &Pipeline) -> Result<Sink, CliError> {
    let mut out = sink(p)?;
    for d in p.ingest_all()? {
        let id = d.node.id.as_str();
        let fm = p.features(&d, DowBaseline::FullSample)?;
        let fit = fit_with_hac(p, &fm, id)?;
        let betas = standardized_betas(&fit, &fm).context(format!("node {id}"))?;
        let f2 = cohens_f2(fit.r2).ok();

        let tn = train_n(p, fm.n());
        if tn == 0 {
            return Err(CliError::Data(format!("node {id}: training window is empty")));
        }
        // The day-of-week baseline must not see the test window.
        let held = p.features(&d, DowBaseline::TrainOnly { cutoff: fm.dates[tn - 1] })?;
        let holdout = chronological_holdout(&held, tn).context(format!("node {id} hold-out"))?;

        let report = json!({
            "node": id,
            "n": fit.n,
            "k": fit.k,
            "r2": fit.r2,
            "adj_r2": fit.adj_r2,
            "cohens_f2": f2,
            "durbin_watson": fit.durbin_watson,
            "sigma2": fit.sigma2,
            "hac_lag": fit.hac.as_ref().map(|h| h.lag),
            "coefficients": coef_table(&fit),
            "standardized_betas": betas,
            "holdout": {
                "train_n": holdout.train_n,
                "test_n": holdout.test_n,
                "train_end": fm.dates[tn - 1],
                "r2": holdout.r2,
                "mae": holdout.mae,
                "rmse": holdout.rmse,
                "dow_baseline": "train_only",
            },
        });
        out.json(&format!("fit_{id}.json"), &report)?;

        let rows: Vec<Vec<String>> = holdout
            .predictions
            .iter()
            .map(|h| vec![h.date.to_string(), h.actual.to_string(), h.predicted.to_string()])
            .collect();
        out.csv(&format!("holdout_{id}.csv"), &["date", "actual", "predicted"], &rows)?;
        let idx = |k: usize| k as f64;
        let svg = line_chart(&Chart {
            title: &format!("Hold-out forecast, node {id}"),
            x_label: "day",
            y_label: "daily visitors",
            x_ends: holdout
                .predictions
                .first()
                .zip(holdout.predictions.last())
                .map(|(a, b)| (a.date.to_string(), b.date.to_string())),
            series: vec![
                Series {
                    name: "actual".into(),
                    points: holdout.predictions.iter().enumerate().map(|(k, h)| (idx(k), h.actual)).collect(),
                },
                Series {
                    name: "predicted".into(),
                    points: holdout.predictions.iter().enumerate().map(|(k, h)| (idx(k), h.predicted)).collect(),
                },
            ],
        });
        out.text(&format!("holdout_{id}.svg"), &svg)?;
    }
    Ok(out)
}

#[derive(Serialize)]
struct SpecSummary {
    n: usize,
    k: usize,
    r2: f64,
    adj_r2: f64,
    durbin_watson: f64,
}

impl From<&LinearFit> for SpecSummary {
    fn from(f: &LinearFit) -> Self {
        SpecSummary {
            n: f.n,
            k: f.k,
            r2: f.r2,
            adj_r2: f.adj_r2,
            durbin_watson: f.durbin_watson,
        }
    }
}

pub fn diagnose(p: &Pipeline) -> Result<Sink, CliError> {
    let mut out = sink(p)?;
    let model = &p.loaded.config.model;
    let maxlag = model.adf_max_lag.map(MaxLag::Fixed).unwrap_or(MaxLag::Auto);
    let cols: Vec<&str> = model.weather_columns.iter().map(String::as_str).collect();
    for d in p.ingest_all()? {
        let id = d.node.id.as_str();
        let ctx = |what: &str| format!("node {id} {what}");
        let fm = p.features(&d, DowBaseline::FullSample)?;
        let directions = fm.column("directions").expect("engineered column");
        let base = fit_ols(&fm).context(ctx("baseline"))?;
        let fd = fit_first_difference(&fm).context(ctx("first difference"))?;
        let ldv = fit_ldv(&fm).context(ctx("lagged dependent"))?;
        let seasonal = match seasonal_ablation(&fm, &cols, &WINTER_MONTHS, &SUMMER_MONTHS) {
            Ok(s) => json!(s),
            Err(e) if !e.is_numerical() => json!({ "unavailable": e.to_string() }),
            Err(e) => return Err(e.into()),
        };
        let report = json!({
            "node": id,
            "adf": {
                "count": adf_test(&fm.target, maxlag, AdfTrend::Constant).context(ctx("ADF count"))?,
                "directions": adf_test(&directions, maxlag, AdfTrend::Constant).context(ctx("ADF directions"))?,
            },
            "vif": vif(&fm).context(ctx("VIF"))?,
            "durbin_watson": base.durbin_watson,
            "specifications": {
                "baseline": SpecSummary::from(&base),
                "first_difference": SpecSummary::from(&fd),
                "lagged_dependent": SpecSummary::from(&ldv),
            },
            "weather_ablation": {
                "columns": cols,
                "overall": weather_ablation(&fm, &cols, None).context(ctx("ablation"))?,
                "seasonal": seasonal,
            },
        });
        out.json(&format!("diagnostics_{id}.json"), &report)?;
    }
    Ok(out)
}

pub fn forest(p: &Pipeline) -> Result<Sink, CliError> {
    let mut out = sink(p)?;
    let cfg = &p.loaded.config;
    let params = cfg.forest.params();
    for d in p.ingest_all()? {
        let id = d.node.id.as_str();
        let fm = p.features(&d, DowBaseline::FullSample)?;
        let cv = kfold_cv(&fm.x, &fm.target, &fm.names, &params, cfg.forest.cv_folds, cfg.forest.fold_mode, cfg.seed)
            .context(format!("node {id} cross-validation"))?;
        let tn = train_n(p, fm.n());
        let (train, test) = (fm.head(tn), fm.tail_from(tn));
        let model = fit_forest(&train.x, &train.target, &train.names, &params, cfg.seed).context(format!("node {id}"))?;
        let imp = permutation_importance(&model, &test.x, &test.target, cfg.forest.importance_repeats, cfg.seed)
            .context(format!("node {id} importance"))?;
        let report = json!({
            "node": id,
            "model": model.summary(),
            "cross_validation": cv,
            "holdout": { "train_n": tn, "test_n": test.n(), "r2": imp.baseline_r2 },
            "permutation_importance": imp,
        });
        out.json(&format!("forest_{id}.json"), &report)?;
    }
    Ok(out)
}

#[derive(Serialize)]
struct DensityPoint {
    period: String,
    mean_satisfaction: f64,
    responses: usize,
    visitor_density: f64,
}

fn period_key(d: NaiveDate, agg: DensityAggregation) -> String {
    match agg {
        DensityAggregation::Monthly => format!("{:04}-{:02}", d.year(), d.month()),
        DensityAggregation::Daily => d.to_string(),
    }
}

/// Mean satisfaction per period against visitor density, the sum over nodes
/// of each node's mean daily count in that period.
fn density_pairs(
    responses: &[dhde::ingest::SurveyResponse],
    panels: &[NodeData],
    agg: DensityAggregation,
) -> Vec<DensityPoint> {
    let mut sat: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for r in responses {
        if let Some(s) = r.satisfaction {
            let e = sat.entry(period_key(r.survey_date, agg)).or_default();
            e.0 += f64::from(s);
            e.1 += 1;
        }
    }
    let mut density: BTreeMap<String, f64> = BTreeMap::new();
    for d in panels {
        let mut per: BTreeMap<String, (f64, usize)> = BTreeMap::new();
        for row in &d.panel.rows {
            let e = per.entry(period_key(row.date, agg)).or_default();
            e.0 += row.count as f64;
            e.1 += 1;
        }
        for (k, (sum, n)) in per {
            *density.entry(k).or_default() += sum / n as f64;
        }
    }
    sat.into_iter()
        .filter_map(|(k, (sum, n))| {
            density.get(&k).map(|&v| DensityPoint {
                mean_satisfaction: sum / n as f64,
                responses: n,
                visitor_density: v,
                period: k,
            })
        })
        .collect()
}

pub fn mine(p: &Pipeline) -> Result<Sink, CliError> {
    let mut out = sink(p)?;
    let cfg = &p.loaded.config;
    let survey = p
        .survey()?
        .ok_or_else(|| CliError::Data("mine needs inputs.survey".into()))?;
    let lexicon = match &cfg.inputs.lexicon {
        Some(path) => {
            let path = p.loaded.resolve(path);
            let f = std::fs::File::open(&path).map_err(|e| CliError::io(&path, e))?;
            Lexicon::from_tsv(f).context("lexicon")?
        }
        None => Lexicon::default(),
    };
    let report = prevalence_analysis(&survey.responses, &lexicon, &cfg.mining.low_scores, &cfg.mining.high_scores)
        .context("prevalence")?;

    let agg = cfg.mining.density_aggregation;
    let density = match p.nodes() {
        Ok(_) => {
            let panels = p.ingest_all()?;
            let pts = density_pairs(&survey.responses, &panels, agg);
            let xs: Vec<f64> = pts.iter().map(|d| d.mean_satisfaction).collect();
            let ys: Vec<f64> = pts.iter().map(|d| d.visitor_density).collect();
            let corr = |f: fn(&[f64], &[f64]) -> dhde::Result<Correlation>| match f(&xs, &ys) {
                Ok(c) => json!(c),
                Err(e) => json!({ "unavailable": e.to_string() }),
            };
            let rows: Vec<Vec<String>> = pts
                .iter()
                .map(|d| {
                    vec![
                        d.period.clone(),
                        d.mean_satisfaction.to_string(),
                        d.responses.to_string(),
                        d.visitor_density.to_string(),
                    ]
                })
                .collect();
            out.csv(
                "satisfaction_density.csv",
                &["period", "mean_satisfaction", "responses", "visitor_density"],
                &rows,
            )?;
            json!({
                "aggregation": agg,
                "periods": pts.len(),
                "spearman": corr(spearman),
                "pearson": corr(pearson),
            })
        }
        Err(_) => json!({ "unavailable": "no node has count inputs" }),
    };
    let doc = json!({
        "dataset": p.survey_dataset(),
        "responses": survey.responses.len(),
        "parse_warnings": survey.warnings.len(),
        "low_scores": cfg.mining.low_scores,
        "high_scores": cfg.mining.high_scores,
        "prevalence": report,
        "satisfaction_density": density,
    });
    out.json("prevalence.json", &doc)?;
    let rows: Vec<Vec<String>> = report
        .keywords
        .iter()
        .map(|k| vec![k.keyword.clone(), k.low.to_string(), k.high.to_string()])
        .collect();
    out.csv("keywords.csv", &["keyword", "low", "high"], &rows)?;
    Ok(out)
}

/// Flagged days from an external file: `node,date,residual`.
fn read_flagged(path: &Path, observed_days: usize) -> Result<Vec<NodeFlags>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| CliError::Data(e.to_string()))?.clone();
    let col = |n: &str| {
        headers
            .iter()
            .position(|h| h == n)
            .ok_or_else(|| CliError::Data(format!("{}: missing column `{n}`", path.display())))
    };
    let (nc, dc, rc) = (col("node")?, col("date")?, col("residual")?);
    let mut by_node: BTreeMap<String, Vec<(NaiveDate, f64)>> = BTreeMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Data(e.to_string()))?;
        let bad = |what: &str| CliError::Data(format!("{} line {}: invalid {what}", path.display(), i + 2));
        let date = NaiveDate::parse_from_str(&rec[dc], "%Y-%m-%d").map_err(|_| bad("date"))?;
        let r: f64 = rec[rc].parse().map_err(|_| bad("residual"))?;
        by_node.entry(rec[nc].to_string()).or_default().push((date, r));
    }
    Ok(by_node
        .into_iter()
        .map(|(node, flagged)| NodeFlags { node, flagged, observed_days })
        .collect())
}

fn model_flags(p: &Pipeline) -> Result<Vec<NodeFlags>, CliError> {
    let t = p.loaded.config.gap;
    p.ingest_all()?
        .iter()
        .map(|d| {
            let id = d.node.id.as_str();
            let fm = p.features(d, DowBaseline::FullSample)?;
            let fit = fit_ols(&fm).context(format!("node {id}"))?;
            let days = day_records(&fm, &fit.fitted).context(format!("node {id}"))?;
            Ok(NodeFlags::from_days(id, &days, &t).context(format!("node {id}"))?)
        })
        .collect()
}

pub struct GapOptions {
    pub flagged: Option<PathBuf>,
    pub observed_days: usize,
    pub reference_yen: Option<u64>,
}

fn gap_report(p: &Pipeline, o: &GapOptions) -> Result<(serde_json::Value, dhde::economics::GapReport), CliError> {
    let cfg = &p.loaded.config;
    let (flags, source) = match &o.flagged {
        Some(path) => (read_flagged(path, o.observed_days)?, "flagged_file"),
        None => (model_flags(p)?, "model_residuals"),
    };
    let spend = p.spend()?;
    let mut report = opportunity_gap(&flags, spend.yen, cfg.economics.fx_yen_per_usd)
        .context("opportunity gap")?
        .with_thresholds(cfg.gap);
    if let Some(r) = o.reference_yen.or(cfg.economics.reference_gap_yen) {
        report = report.reconcile(r);
    }
    let doc = json!({
        "flag_source": source,
        "spend": spend,
        "fx_yen_per_usd": cfg.economics.fx_yen_per_usd,
        "report": report,
    });
    Ok((doc, report))
}

pub fn gap(p: &Pipeline, o: &GapOptions) -> Result<Sink, CliError> {
    let mut out = sink(p)?;
    let (doc, report) = gap_report(p, o)?;
    out.json("gap.json", &doc)?;
    let mut rows = Vec::new();
    for n in &report.nodes {
        for d in &n.flagged_days {
            rows.push(vec![n.node.clone(), d.to_string()]);
        }
    }
    out.csv("gap_flagged_days.csv", &["node", "date"], &rows)?;
    Ok(out)
}

pub fn ccf_cmd(p: &Pipeline, max_lag: Option<usize>) -> Result<Sink, CliError> {
    let mut out = sink(p)?;
    let max_lag = max_lag.unwrap_or(p.loaded.config.economics.ccf_max_lag);
    let mut summary = Vec::new();
    for d in p.ingest_all()? {
        let id = d.node.id.as_str();
        let x: Vec<(NaiveDate, f64)> = d.panel.rows.iter().map(|r| (r.date, r.directions as f64)).collect();
        let y: Vec<(NaiveDate, f64)> = d.panel.rows.iter().map(|r| (r.date, r.count as f64)).collect();
        let r = ccf(&x, &y, max_lag).context(format!("node {id}"))?;
        let rows: Vec<Vec<String>> = r
            .points
            .iter()
            .map(|pt| vec![pt.lag.to_string(), pt.r.to_string(), pt.n.to_string()])
            .collect();
        out.csv(&format!("ccf_{id}.csv"), &["lag", "r", "n"], &rows)?;
        out.text(
            &format!("ccf_{id}.svg"),
            &line_chart(&Chart {
                title: &format!("Intent leading visitors, node {id}"),
                x_label: "lag (days, positive = intent leads)",
                y_label: "correlation",
                x_ends: None,
                series: vec![Series {
                    name: "r(lag)".into(),
                    points: r.points.iter().map(|pt| (pt.lag as f64, pt.r)).collect(),
                }],
            }),
        )?;
        summary.push(json!({
            "node": id,
            "overlap": r.overlap,
            "best_lag": r.best_lag,
            "best_r": r.best_r,
            "r_lag0": r.at(0),
        }));
    }
    out.json("ccf.json", &json!({ "max_lag": max_lag, "nodes": summary }))?;
    Ok(out)
}

pub fn rank(p: &Pipeline, recovered: Option<f64>) -> Result<Sink, CliError> {
    let mut out = sink(p)?;
    let cfg = &p.loaded.config;
    let path = cfg
        .inputs
        .ranking_baseline
        .as_ref()
        .map(|b| p.loaded.resolve(b))
        .ok_or_else(|| CliError::Data("rank needs inputs.ranking_baseline".into()))?;
    let f = std::fs::File::open(&path).map_err(|e| CliError::io(&path, e))?;
    let baseline = RankingBaseline::read_csv(f).context("ranking baseline")?;
    let (recovered, source) = match recovered {
        Some(r) => (r, "flag"),
        None => {
            let opts = GapOptions { flagged: None, observed_days: 365, reference_yen: None };
            (gap_report(p, &opts)?.1.total.lost_visitors, "opportunity_gap")
        }
    };
    let weights = cfg.economics.ranking_weights.clone().unwrap_or_else(|| uniform_weights().to_vec());
    let sim = ranking_simulation(&baseline, recovered, &weights).context("ranking")?;
    out.json("ranking.json", &json!({ "recovered_source": source, "simulation": sim }))?;
    let rows: Vec<Vec<String>> = sim
        .months
        .iter()
        .map(|m| {
            vec![
                m.month.to_string(),
                m.weight.to_string(),
                m.baseline_visitors.to_string(),
                m.recovered.to_string(),
                m.projected_visitors.to_string(),
                opt(m.shortfall),
                opt(m.shortfall_closed_pct),
                m.baseline_rank.to_string(),
                m.projected_rank.to_string(),
            ]
        })
        .collect();
    out.csv(
        "ranking.csv",
        &[
            "month",
            "weight",
            "baseline_visitors",
            "recovered",
            "projected_visitors",
            "shortfall",
            "shortfall_closed_pct",
            "baseline_rank",
            "projected_rank",
        ],
        &rows,
    )?;
    let series = |name: &str, f: fn(&dhde::economics::MonthProjection) -> f64| Series {
        name: name.into(),
        points: sim.months.iter().map(|m| (f64::from(m.month), f(m))).collect(),
    };
    out.text(
        "ranking.svg",
        &line_chart(&Chart {
            title: "Monthly rank with recovered visitors",
            x_label: "month",
            y_label: "rank (1 = top)",
            x_ends: None,
            series: vec![
                series("baseline rank", |m| m.baseline_rank as f64),
                series("projected rank", |m| m.projected_rank as f64),
            ],
        }),
    )?;
    Ok(out)
}

pub struct NudgeOptions {
    pub forecast: Option<PathBuf>,
    pub issued: Option<NaiveDate>,
}

struct ForecastRow {
    forecast: NodeForecast,
    severity: Option<u8>,
}

fn read_forecast(path: &Path) -> Result<Vec<ForecastRow>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| CliError::Data(e.to_string()))?.clone();
    let col = |n: &str| headers.iter().position(|h| h == n);
    let need = |n: &str| col(n).ok_or_else(|| CliError::Data(format!("{}: missing column `{n}`", path.display())));
    let (nc, dc, vc, ic) = (need("node")?, need("date")?, need("visitors")?, need("intent")?);
    let sc = col("severity");
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Data(e.to_string()))?;
        let bad = |what: &str| CliError::Data(format!("{} line {}: invalid {what}", path.display(), i + 2));
        let severity = match sc.map(|c| rec[c].trim()).filter(|s| !s.is_empty()) {
            Some(s) => Some(s.parse::<u8>().ok().filter(|v| *v <= 3).ok_or_else(|| bad("severity"))?),
            None => None,
        };
        rows.push(ForecastRow {
            forecast: NodeForecast {
                node: NodeId::new(&rec[nc]).map_err(|_| bad("node"))?,
                date: NaiveDate::parse_from_str(&rec[dc], "%Y-%m-%d").map_err(|_| bad("date"))?,
                visitors: rec[vc].parse().map_err(|_| bad("visitors"))?,
                intent: rec[ic].parse().map_err(|_| bad("intent"))?,
            },
            severity,
        });
    }
    Ok(rows)
}

pub fn nudge(p: &Pipeline, o: &NudgeOptions) -> Result<Sink, CliError> {
    let mut out = sink(p)?;
    let cfg = &p.loaded.config;
    let horizon = cfg.nudge.horizon_days;
    let data = p.ingest_all()?;
    let forecast_path = o.forecast.clone().or_else(|| cfg.inputs.forecast.as_ref().map(|f| p.loaded.resolve(f)));

    let (issued, rows, source) = match &forecast_path {
        Some(path) => {
            let rows = read_forecast(path)?;
            let first = rows
                .iter()
                .map(|r| r.forecast.date)
                .min()
                .ok_or_else(|| CliError::Data("forecast file is empty".into()))?;
            (o.issued.unwrap_or(first - Days::new(1)), rows, "forecast_file")
        }
        None => {
            // Hindcast: the last `horizon` observed days stand in for forecasts.
            let last = data
                .iter()
                .filter_map(|d| d.panel.rows.last().map(|r| r.date))
                .max()
                .expect("panels are non-empty");
            let issued = o.issued.unwrap_or(last - Days::new(horizon as u64));
            let mut rows = Vec::new();
            for d in &data {
                for r in d.panel.rows.iter().filter(|r| r.date > issued && (r.date - issued).num_days() <= horizon) {
                    rows.push(ForecastRow {
                        forecast: NodeForecast {
                            node: d.node.id.clone(),
                            date: r.date,
                            visitors: r.count as f64,
                            intent: r.directions as f64,
                        },
                        severity: Some(weather_severity(r.precip, r.wind, r.snow_depth, &p.severity)?),
                    });
                }
            }
            (issued, rows, "hindcast")
        }
    };

    let history: BTreeMap<NodeId, NodeHistory> = data
        .iter()
        .map(|d| {
            let past = d.panel.rows.iter().filter(|r| r.date <= issued);
            let (counts, intent) = past.map(|r| (r.count as f64, r.directions as f64)).unzip();
            (d.node.id.clone(), NodeHistory { counts, intent })
        })
        .collect();
    let nodes: Vec<_> = data.iter().map(|d| d.node.clone()).collect();
    let forecasts: Vec<NodeForecast> = rows.iter().map(|r| r.forecast.clone()).collect();
    let outlook: Vec<SeverityOutlook> = rows
        .iter()
        .filter_map(|r| {
            r.severity.map(|s| SeverityOutlook {
                node: r.forecast.node.clone(),
                date: r.forecast.date,
                severity: s,
            })
        })
        .collect();
    let outcome = evaluate_nudges(issued, &forecasts, &outlook, &history, &nodes, &cfg.nudge).context("nudge")?;
    let mut buf = Vec::new();
    write_jsonl(&outcome.directives, &mut buf)?;
    out.bytes("nudges.jsonl", &buf)?;
    out.json(
        "nudge_summary.json",
        &json!({
            "issued": issued,
            "source": source,
            "policy": cfg.nudge,
            "forecasts": forecasts.len(),
            "directives": outcome.directives.len(),
            "warnings": outcome.warnings,
        }),
    )?;
    Ok(out)
}
