use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use dhde::economics::FrictionThresholds;
use dhde::forest::{FoldMode, ForestParams, MaxFeatures};
use dhde::ingest::{NodeConfig, StationRegistry, SurveyDataset};
use dhde::linmodel::HacLag;
use dhde::nudge::NudgePolicy;
use serde::{Deserialize, Serialize};

pub const ENV_CONFIG: &str = "DHDE_CONFIG";
pub const DEFAULT_CONFIG_FILE: &str = "dhde.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub nodes: Vec<NodeConfig>,
    pub inputs: Inputs,
    pub severity: SeveritySection,
    pub model: ModelSection,
    pub forest: ForestSection,
    pub gap: FrictionThresholds,
    pub economics: EconomicsSection,
    pub mining: MiningSection,
    pub nudge: NudgePolicy,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 20_240_601,
            output_dir: PathBuf::from("out"),
            nodes: NodeConfig::defaults(),
            inputs: Inputs::default(),
            severity: SeveritySection::default(),
            model: ModelSection::default(),
            forest: ForestSection::default(),
            gap: FrictionThresholds::default(),
            economics: EconomicsSection::default(),
            mining: MiningSection::default(),
            nudge: NudgePolicy::default(),
        }
    }
}

/// Input files. Relative paths resolve against the config file's directory.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Inputs {
    /// Node id → camera-format count CSV.
    pub counts: BTreeMap<String, PathBuf>,
    /// Station key → hourly JMA CSV.
    pub weather: BTreeMap<String, PathBuf>,
    /// Node id → daily intent CSV.
    pub intent: BTreeMap<String, PathBuf>,
    pub survey: Option<PathBuf>,
    pub survey_dataset: Option<SurveyDataset>,
    pub spend_bands: Option<PathBuf>,
    pub ranking_baseline: Option<PathBuf>,
    pub holidays: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    /// CSV `node,date,visitors,intent,severity` for the nudge command.
    pub forecast: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeveritySection {
    pub snow_escalation_cm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub hac_lag: HacLag,
    /// Share of rows in the chronological training window.
    pub train_fraction: f64,
    /// ADF maximum lag; absent means the Schwert rule.
    pub adf_max_lag: Option<usize>,
    pub weather_columns: Vec<String>,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            hac_lag: HacLag::Auto,
            train_fraction: 0.8,
            adf_max_lag: None,
            weather_columns: dhde::linmodel::DEFAULT_WEATHER_COLUMNS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestSection {
    pub n_trees: usize,
    pub max_features: MaxFeatures,
    pub min_samples_leaf: usize,
    pub max_depth: Option<usize>,
    pub cv_folds: usize,
    pub fold_mode: FoldMode,
    pub importance_repeats: usize,
}

impl ForestSection {
    pub fn params(&self) -> ForestParams {
        ForestParams {
            n_trees: self.n_trees,
            max_features: self.max_features,
            min_samples_leaf: self.min_samples_leaf,
            max_depth: self.max_depth,
        }
    }
}

impl Default for ForestSection {
    fn default() -> Self {
        let p = ForestParams::default();
        ForestSection {
            n_trees: p.n_trees,
            max_features: p.max_features,
            min_samples_leaf: p.min_samples_leaf,
            max_depth: p.max_depth,
            cv_folds: 5,
            fold_mode: FoldMode::Shuffled,
            importance_repeats: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EconomicsSection {
    pub fx_yen_per_usd: f64,
    /// Overrides the survey-derived spend.
    pub spend_per_capita_yen: Option<f64>,
    /// Externally reported gap total to reconcile against.
    pub reference_gap_yen: Option<u64>,
    pub ranking_weights: Option<Vec<f64>>,
    pub ccf_max_lag: usize,
}

impl Default for EconomicsSection {
    fn default() -> Self {
        EconomicsSection {
            fx_yen_per_usd: dhde::economics::DEFAULT_FX_YEN_PER_USD,
            spend_per_capita_yen: None,
            reference_gap_yen: None,
            ranking_weights: None,
            ccf_max_lag: 14,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityAggregation {
    #[default]
    Monthly,
    Daily,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MiningSection {
    pub low_scores: Vec<u8>,
    pub high_scores: Vec<u8>,
    /// Pairs mean satisfaction with summed visitor counts per month or day.
    pub density_aggregation: DensityAggregation,
    /// Collection-site filter when survey responses stand in for counts.
    pub survey_proxy_location: Option<String>,
}

impl Default for MiningSection {
    fn default() -> Self {
        MiningSection {
            low_scores: vec![1, 2],
            high_scores: vec![4, 5],
            density_aggregation: DensityAggregation::Monthly,
            survey_proxy_location: None,
        }
    }
}

/// Command-line values that override the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub fx: Option<f64>,
    pub spend: Option<f64>,
}

#[derive(Debug)]
pub struct ConfigError(pub Vec<String>);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid configuration: {}", self.0.join("; "))
    }
}

/// Where the configuration came from.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub config: RunConfig,
    /// Directory that relative paths resolve against.
    pub base: PathBuf,
}

impl Loaded {
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.config.output_dir)
    }
}

/// Explicit path, then the environment variable, then `dhde.toml` in the
/// working directory; without any of these the defaults apply.
pub fn config_path(explicit: Option<&Path>) -> Option<PathBuf> {
    if let Some(p) = explicit {
        return Some(p.to_path_buf());
    }
    if let Some(p) = std::env::var_os(ENV_CONFIG).filter(|v| !v.is_empty()) {
        return Some(PathBuf::from(p));
    }
    let local = PathBuf::from(DEFAULT_CONFIG_FILE);
    local.exists().then_some(local)
}

pub fn load(explicit: Option<&Path>, overrides: &Overrides) -> Result<Loaded, ConfigError> {
    let (mut config, base) = match config_path(explicit) {
        Some(path) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| ConfigError(vec![format!("cannot read {}: {e}", path.display())]))?;
            let config: RunConfig =
                toml::from_str(&text).map_err(|e| ConfigError(vec![format!("{}: {}", path.display(), e.message())]))?;
            let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
            (config, base)
        }
        None => (RunConfig::default(), PathBuf::new()),
    };
    if let Some(s) = overrides.seed {
        config.seed = s;
    }
    if let Some(o) = &overrides.output_dir {
        config.output_dir = std::path::absolute(o).unwrap_or_else(|_| o.clone());
    }
    if let Some(fx) = overrides.fx {
        config.economics.fx_yen_per_usd = fx;
    }
    if let Some(s) = overrides.spend {
        config.economics.spend_per_capita_yen = Some(s);
    }
    let loaded = Loaded { config, base };
    let problems = validate(&loaded);
    if problems.is_empty() {
        Ok(loaded)
    } else {
        Err(ConfigError(problems))
    }
}

/// Every problem found, not just the first.
pub fn validate(l: &Loaded) -> Vec<String> {
    let c = &l.config;
    let mut p = Vec::new();
    let registry = StationRegistry::default();
    let mut ids = std::collections::BTreeSet::new();
    for n in &c.nodes {
        if let Err(e) = n.validate(&registry) {
            p.push(e.to_string());
        }
        if !ids.insert(n.id.as_str().to_string()) {
            p.push(format!("node {} declared twice", n.id));
        }
    }
    for (kind, map) in [("counts", &c.inputs.counts), ("intent", &c.inputs.intent)] {
        for (node, path) in map {
            if !ids.contains(node) {
                p.push(format!("inputs.{kind} names unknown node `{node}`"));
            }
            check_path(l, &format!("inputs.{kind}.{node}"), path, &mut p);
        }
    }
    for (station, path) in &c.inputs.weather {
        if registry.get(station).is_err() {
            p.push(format!("inputs.weather names unknown station `{station}`"));
        }
        check_path(l, &format!("inputs.weather.{station}"), path, &mut p);
    }
    let optional = [
        ("survey", &c.inputs.survey),
        ("spend_bands", &c.inputs.spend_bands),
        ("ranking_baseline", &c.inputs.ranking_baseline),
        ("holidays", &c.inputs.holidays),
        ("lexicon", &c.inputs.lexicon),
        ("forecast", &c.inputs.forecast),
    ];
    for (name, path) in optional {
        if let Some(path) = path {
            check_path(l, &format!("inputs.{name}"), path, &mut p);
        }
    }
    let fx = c.economics.fx_yen_per_usd;
    if !(fx > 0.0) || !fx.is_finite() {
        p.push(format!("economics.fx_yen_per_usd must be positive, got {fx}"));
    }
    if let Some(s) = c.economics.spend_per_capita_yen {
        if !(s > 0.0) || !s.is_finite() {
            p.push(format!("economics.spend_per_capita_yen must be positive, got {s}"));
        }
    }
    if let Some(w) = &c.economics.ranking_weights {
        let sum: f64 = w.iter().sum();
        if w.len() != 12 || w.iter().any(|v| !(*v >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
            p.push("economics.ranking_weights must be 12 non-negative values summing to 1".into());
        }
    }
    if !(c.model.train_fraction > 0.0 && c.model.train_fraction < 1.0) {
        p.push(format!("model.train_fraction {} outside (0, 1)", c.model.train_fraction));
    }
    for col in &c.model.weather_columns {
        if !dhde::features::FEATURE_NAMES.contains(&col.as_str()) {
            p.push(format!("model.weather_columns names unknown feature `{col}`"));
        }
    }
    if c.model.weather_columns.is_empty() {
        p.push("model.weather_columns is empty".into());
    }
    if !(0.0..=1.0).contains(&c.gap.intent_quantile) {
        p.push(format!("gap.intent_quantile {} outside [0, 1]", c.gap.intent_quantile));
    }
    for (name, q) in [("surge_quantile", c.nudge.surge_quantile), ("intent_quantile", c.nudge.intent_quantile)] {
        if !(0.0..=1.0).contains(&q) {
            p.push(format!("nudge.{name} {q} outside [0, 1]"));
        }
    }
    if !(1..=dhde::nudge::MAX_HORIZON_DAYS).contains(&c.nudge.horizon_days) {
        p.push(format!(
            "nudge.horizon_days {} outside 1-{}",
            c.nudge.horizon_days,
            dhde::nudge::MAX_HORIZON_DAYS
        ));
    }
    for id in &c.nudge.reroute_priority {
        if !ids.contains(id.as_str()) {
            p.push(format!("nudge.reroute_priority names unknown node {id}"));
        }
    }
    if c.forest.n_trees == 0 {
        p.push("forest.n_trees must be positive".into());
    }
    if c.forest.cv_folds < 2 {
        p.push("forest.cv_folds must be at least 2".into());
    }
    if c.forest.importance_repeats == 0 {
        p.push("forest.importance_repeats must be positive".into());
    }
    let groups = [&c.mining.low_scores, &c.mining.high_scores];
    if groups.iter().any(|g| g.is_empty() || g.iter().any(|s| !(1..=5).contains(s))) {
        p.push("mining score groups must be non-empty subsets of 1-5".into());
    }
    if c.mining.low_scores.iter().any(|s| c.mining.high_scores.contains(s)) {
        p.push("mining.low_scores and mining.high_scores overlap".into());
    }
    if let Some(s) = c.severity.snow_escalation_cm {
        if !(s > 0.0) {
            p.push("severity.snow_escalation_cm must be positive".into());
        }
    }
    p
}

fn check_path(l: &Loaded, key: &str, path: &Path, problems: &mut Vec<String>) {
    if !l.resolve(path).is_file() {
        problems.push(format!("{key}: file {} not found", path.display()));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_problems_reported() {
        let text = r#"
            [inputs.counts]
            Z = "nope.csv"
            [economics]
            fx_yen_per_usd = -1
            [model]
            train_fraction = 1.5
        "#;
        let config: RunConfig = toml::from_str(text).unwrap();
        let problems = validate(&Loaded { config, base: PathBuf::new() });
        assert_eq!(problems.len(), 4, "{problems:?}");
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<RunConfig>("sead = 1").is_err());
    }

    #[test]
    fn defaults_validate() {
        assert!(validate(&Loaded { config: RunConfig::default(), base: PathBuf::new() }).is_empty());
    }
}
