use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::{Datelike, NaiveDate};
use dhde::ingest::{NodeConfig, SurveyDataset};
use dhde::kansei::Lexicon;
use dhde::synth::{generate_panel, generate_survey_corpus, write_survey_csv, CorpusParams, DgpParams};
use serde_json::json;

use crate::config::{Inputs, RunConfig};
use crate::error::CliError;
use crate::output::Sink;

pub const DEFAULT_SEED: u64 = 20_240_601;

/// Intent scale per node, in configuration order.
const INTENT_BASE: [f64; 4] = [300.0, 450.0, 180.0, 250.0];

/// Competitor ladder as multiples of the region's own monthly total.
const LADDER: [f64; 6] = [1.6, 1.25, 1.08, 1.0005, 0.9, 0.7];

const SPEND_MIDPOINTS: [f64; 4] = [2_500.0, 7_500.0, 15_000.0, 25_000.0];

pub struct SynthOptions {
    pub dir: PathBuf,
    pub seed: u64,
    pub days: usize,
    pub start: Option<NaiveDate>,
}

/// Seed of the i-th node's generator: SplitMix64 step from the master seed.
pub fn node_seed(master: u64, i: u64) -> u64 {
    let mut z = master.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(i + 1));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn rel(name: &str) -> PathBuf {
    PathBuf::from(name)
}

pub fn synth(o: &SynthOptions) -> Result<Sink, CliError> {
    let mut out = Sink::new(o.dir.clone())?;
    let defaults = DgpParams::default();
    let start = o.start.unwrap_or(defaults.start);
    let mut inputs = Inputs::default();
    let mut truth = Vec::new();
    let mut monthly: BTreeMap<(i32, u32), f64> = BTreeMap::new();

    for (i, node) in NodeConfig::defaults().iter().enumerate() {
        let params = DgpParams {
            node: node.id.clone(),
            start,
            n_days: o.days,
            seed: node_seed(o.seed, i as u64),
            intent_base: INTENT_BASE[i % INTENT_BASE.len()],
            ..DgpParams::default()
        };
        let g = generate_panel(&params)?;
        let f = &g.fixtures;
        out.text(&f.camera_file(), &f.camera_csv)?;
        out.text(&f.jma_file(), &f.jma_csv)?;
        out.text(&f.intent_file(), &f.intent_csv)?;
        inputs.counts.insert(node.id.to_string(), rel(&f.camera_file()));
        inputs.weather.insert(f.station.clone(), rel(&f.jma_file()));
        inputs.intent.insert(node.id.to_string(), rel(&f.intent_file()));
        for r in &g.panel.rows {
            *monthly.entry((r.date.year(), r.date.month())).or_default() += r.count as f64;
        }
        let coefficients: BTreeMap<String, f64> = params.truth().into_iter().collect();
        truth.push(json!({
            "node": node.id,
            "seed": params.seed,
            "coefficients": coefficients,
            "params": params,
        }));
    }

    let corpus = CorpusParams {
        start,
        days: o.days as u64,
        seed: node_seed(o.seed, 99),
        ..CorpusParams::default()
    };
    let responses = generate_survey_corpus(&corpus, &Lexicon::default())?;
    let mut buf = Vec::new();
    write_survey_csv(&responses, SurveyDataset::RawFukui, &mut buf)?;
    out.bytes("survey.csv", &buf)?;
    inputs.survey = Some(rel("survey.csv"));
    inputs.survey_dataset = Some(SurveyDataset::RawFukui);

    let bands: Vec<Vec<String>> = corpus
        .spend_bands
        .iter()
        .zip(SPEND_MIDPOINTS)
        .map(|(l, m)| vec![l.clone(), m.to_string()])
        .collect();
    out.csv("spend_bands.csv", &["label", "midpoint_yen"], &bands)?;
    inputs.spend_bands = Some(rel("spend_bands.csv"));

    out.csv("ranking_baseline.csv", &ranking_header(), &ranking_rows(&monthly))?;
    inputs.ranking_baseline = Some(rel("ranking_baseline.csv"));

    out.json("truth.json", &json!({ "master_seed": o.seed, "nodes": truth }))?;

    let config = RunConfig {
        seed: o.seed,
        output_dir: PathBuf::from("out"),
        inputs,
        ..RunConfig::default()
    };
    let text = toml::to_string(&config).map_err(|e| CliError::Data(e.to_string()))?;
    out.text(crate::config::DEFAULT_CONFIG_FILE, &text)?;
    Ok(out)
}

fn ranking_header() -> Vec<&'static str> {
    let mut h = vec!["month", "baseline_visitors"];
    h.extend(["tier_1", "tier_2", "tier_3", "tier_4", "tier_5", "tier_6"]);
    h
}

/// Mean monthly total over the years covered, with a fixed competitor ladder.
fn ranking_rows(monthly: &BTreeMap<(i32, u32), f64>) -> Vec<Vec<String>> {
    (1..=12u32)
        .map(|m| {
            let totals: Vec<f64> = monthly.iter().filter(|((_, mm), _)| *mm == m).map(|(_, v)| *v).collect();
            let base = if totals.is_empty() {
                0.0
            } else {
                (totals.iter().sum::<f64>() / totals.len() as f64).round()
            };
            let mut row = vec![m.to_string(), base.to_string()];
            row.extend(LADDER.iter().map(|f| (base * f).round().to_string()));
            row
        })
        .collect()
}

pub fn default_dir() -> &'static Path {
    Path::new("synth")
}
