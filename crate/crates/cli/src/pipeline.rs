use std::fs::File;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use dhde::economics::{mean_spend, SpendBandTable, SpendEstimate, FALLBACK_SPEND_YEN};
use dhde::features::{build_features, DowBaseline, FeatureMatrix, HolidayTable, SeverityPolicy};
use dhde::ingest::{
    build_panel, parse_camera_csv, parse_intent_csv, parse_jma_csv, parse_survey_csv, survey_proxy_counts,
    CameraSeries, DailyPanel, NodeConfig, SensorKind, StationRegistry, SurveyDataset, SurveyParse,
};
use serde::Serialize;

use crate::config::Loaded;
use crate::error::{CliError, Context};

pub struct Pipeline {
    pub loaded: Loaded,
    pub registry: StationRegistry,
    pub holidays: HolidayTable,
    pub severity: SeverityPolicy,
    /// Node ids requested on the command line; empty means all.
    pub only: Vec<String>,
}

/// How one stream was read, for the ingest summary.
#[derive(Debug, Serialize)]
pub struct StreamSummary {
    pub source: String,
    pub rows: usize,
    pub duplicate_rows: usize,
    pub days: usize,
}

#[derive(Debug, Serialize)]
pub struct IngestSummary {
    pub node: String,
    pub station: String,
    pub counts: StreamSummary,
    pub dropped_zero_days: Vec<NaiveDate>,
    pub weather: StreamSummary,
    pub weather_invalid_cells: usize,
    pub intent: StreamSummary,
    pub intent_warnings: Vec<String>,
    pub coverage: dhde::ingest::Coverage,
}

pub struct NodeData {
    pub node: NodeConfig,
    pub panel: DailyPanel,
    pub summary: IngestSummary,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpendChoice {
    pub source: &'static str,
    pub yen: f64,
    pub estimate: Option<SpendEstimate>,
}

fn open(path: &Path) -> Result<File, CliError> {
    File::open(path).map_err(|e| CliError::io(path, e))
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

impl Pipeline {
    pub fn new(loaded: Loaded, only: Vec<String>) -> Result<Self, CliError> {
        let holidays = match &loaded.config.inputs.holidays {
            Some(p) => {
                let p = loaded.resolve(p);
                HolidayTable::from_reader(open(&p)?).context(p.display())?
            }
            None => HolidayTable::embedded(),
        };
        let severity = SeverityPolicy {
            snow_escalation_cm: loaded.config.severity.snow_escalation_cm,
        };
        let known: Vec<&str> = loaded.config.nodes.iter().map(|n| n.id.as_str()).collect();
        let unknown: Vec<&String> = only.iter().filter(|o| !known.contains(&o.as_str())).collect();
        if !unknown.is_empty() {
            return Err(CliError::Usage(format!("unknown node(s) {unknown:?}; configured: {known:?}")));
        }
        Ok(Pipeline {
            loaded,
            registry: StationRegistry::default(),
            holidays,
            severity,
            only,
        })
    }

    fn inputs(&self) -> &crate::config::Inputs {
        &self.loaded.config.inputs
    }

    fn path(&self, p: &Path) -> PathBuf {
        self.loaded.resolve(p)
    }

    pub fn output_dir(&self) -> PathBuf {
        self.loaded.output_dir()
    }

    /// Configured nodes that have a count source, in configuration order.
    pub fn nodes(&self) -> Result<Vec<NodeConfig>, CliError> {
        let inputs = self.inputs();
        let nodes: Vec<NodeConfig> = self
            .loaded
            .config
            .nodes
            .iter()
            .filter(|n| self.only.is_empty() || self.only.iter().any(|o| o == n.id.as_str()))
            .filter(|n| {
                inputs.counts.contains_key(n.id.as_str())
                    || (n.sensor_kind == SensorKind::SurveyProxy && inputs.survey.is_some())
            })
            .cloned()
            .collect();
        if nodes.is_empty() {
            return Err(CliError::Data("no selected node has a count input".into()));
        }
        Ok(nodes)
    }

    pub fn survey_dataset(&self) -> SurveyDataset {
        self.inputs().survey_dataset.unwrap_or(SurveyDataset::RawFukui)
    }

    pub fn survey(&self) -> Result<Option<SurveyParse>, CliError> {
        let Some(p) = &self.inputs().survey else { return Ok(None) };
        let p = self.path(p);
        Ok(Some(parse_survey_csv(open(&p)?, self.survey_dataset()).context(file_name(&p))?))
    }

    fn counts(&self, node: &NodeConfig) -> Result<(CameraSeries, String), CliError> {
        if let Some(p) = self.inputs().counts.get(node.id.as_str()) {
            let p = self.path(p);
            let series = parse_camera_csv(open(&p)?, node).context(file_name(&p))?;
            return Ok((series, file_name(&p)));
        }
        let survey = self.survey()?.expect("node selection requires a survey");
        let loc = self.loaded.config.mining.survey_proxy_location.as_deref();
        Ok((survey_proxy_counts(&survey.responses, loc, node), "survey".into()))
    }

    pub fn ingest(&self, node: &NodeConfig) -> Result<NodeData, CliError> {
        let inputs = self.inputs();
        let id = node.id.as_str();
        let (counts, counts_src) = self.counts(node)?;
        let wpath = inputs
            .weather
            .get(&node.station_id)
            .map(|p| self.path(p))
            .ok_or_else(|| CliError::Data(format!("node {id}: no weather input for station {}", node.station_id)))?;
        let weather = parse_jma_csv(open(&wpath)?, &node.station_id, &self.registry).context(file_name(&wpath))?;
        let ipath = inputs
            .intent
            .get(id)
            .map(|p| self.path(p))
            .ok_or_else(|| CliError::Data(format!("node {id}: no intent input")))?;
        let intent = parse_intent_csv(open(&ipath)?).context(file_name(&ipath))?;
        let panel = build_panel(&counts, &weather.days, &intent.days, node).context(format!("node {id}"))?;
        let summary = IngestSummary {
            node: id.to_string(),
            station: node.station_id.clone(),
            counts: StreamSummary {
                source: counts_src,
                rows: counts.rows,
                duplicate_rows: counts.duplicate_rows,
                days: counts.counts.len(),
            },
            dropped_zero_days: counts.dropped_zero_days.clone(),
            weather: StreamSummary {
                source: file_name(&wpath),
                rows: weather.rows,
                duplicate_rows: weather.duplicate_rows,
                days: weather.days.len(),
            },
            weather_invalid_cells: weather.invalid_cells,
            intent: StreamSummary {
                source: file_name(&ipath),
                rows: intent.days.len(),
                duplicate_rows: 0,
                days: intent.days.len(),
            },
            intent_warnings: intent.warnings.clone(),
            coverage: panel.coverage.clone(),
        };
        Ok(NodeData {
            node: node.clone(),
            panel,
            summary,
        })
    }

    pub fn ingest_all(&self) -> Result<Vec<NodeData>, CliError> {
        self.nodes()?.iter().map(|n| self.ingest(n)).collect()
    }

    pub fn features(&self, d: &NodeData, dow: DowBaseline) -> Result<FeatureMatrix, CliError> {
        build_features(&d.panel, &self.holidays, &self.severity, dow).context(format!("node {}", d.node.id))
    }

    /// Config override, then the survey with a band table, then the fallback.
    pub fn spend(&self) -> Result<SpendChoice, CliError> {
        let econ = &self.loaded.config.economics;
        if let Some(y) = econ.spend_per_capita_yen {
            return Ok(SpendChoice { source: "configured", yen: y, estimate: None });
        }
        if let (Some(bands), Some(survey)) = (&self.inputs().spend_bands, self.survey()?) {
            let p = self.path(bands);
            let table = SpendBandTable::read_csv(open(&p)?).context(file_name(&p))?;
            let est = mean_spend(&survey.responses, &table).context("spend estimate")?;
            return Ok(SpendChoice { source: "survey_bands", yen: est.mean_yen, estimate: Some(est) });
        }
        Ok(SpendChoice { source: "fallback", yen: FALLBACK_SPEND_YEN, estimate: None })
    }
}
