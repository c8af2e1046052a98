//! Synthetic data with known ground truth, written in the same CSV formats
//! the ingest module reads.
//!
//! All randomness derives from `DgpParams::seed`: each purpose draws from
//! ChaCha8 seeded with that value on its own stream (see the `STREAM_*`
//! constants), so changing one component never shifts another.

mod survey;

pub use survey::{generate_survey_corpus, write_survey_csv, CorpusParams};

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use chrono::{Datelike, Days, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{build_features, DowBaseline, FeatureMatrix, HolidayTable, SeverityPolicy, FEATURE_NAMES};
use crate::ingest::{
    build_panel, parse_camera_csv, parse_intent_csv, parse_jma_csv, CameraSeries, DailyCount, DailyPanel,
    NodeConfig, NodeId, StationRegistry,
};
use crate::linmodel::INTERCEPT_NAME;

pub const STREAM_WEATHER: u64 = 1;
pub const STREAM_INTENT: u64 = 2;
pub const STREAM_NOISE: u64 = 3;
pub const STREAM_OUTAGE: u64 = 4;
pub const STREAM_SURVEY: u64 = 5;
pub const STREAM_HOURLY: u64 = 6;

/// Feature whose value depends on the counts themselves; it cannot carry
/// a true effect in a generator that produces those counts.
pub const ENDOGENOUS_FEATURE: &str = "dow_mean_count";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DgpParams {
    pub node: NodeId,
    pub start: NaiveDate,
    pub n_days: usize,
    pub seed: u64,
    pub intercept: f64,
    /// True effect per feature; absent features have effect 0.
    pub coefficients: BTreeMap<String, f64>,
    /// Innovation standard deviation of the AR(1) error.
    pub sigma: f64,
    pub rho: f64,
    /// Share of intent lost at severity 0..=3; lost visitors are that share
    /// of intent times the `directions` effect.
    pub suppression: [f64; 4],
    /// Months where suppression applies; `None` means all year.
    pub suppression_months: Option<Vec<u32>>,
    pub weather: WeatherProfile,
    /// Mean daily route searches before calendar and seasonal effects.
    pub intent_base: f64,
    /// Number of random days reported as sensor outages (zero counts).
    pub outage_days: usize,
    /// Adds a cold-and-wet threshold penalty and an intent-squared weekend
    /// term that a linear model cannot represent.
    pub nonlinear: bool,
}

impl Default for DgpParams {
    fn default() -> Self {
        let coefficients = [
            ("directions", 6.0),
            ("directions_lag1", 1.0),
            ("directions_lag2", 0.5),
            ("directions_lag3", 0.3),
            ("directions_roll7", 2.0),
            ("precip", -25.0),
            ("temp", 20.0),
            ("sun", 400.0),
            ("wind", -50.0),
            ("precip_lag1", -10.0),
            ("is_weekend_or_holiday", 900.0),
            ("weather_severity", -200.0),
            ("weekend_x_severity", -150.0),
            ("weekend_x_intent", 1.0),
            ("month", 15.0),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        DgpParams {
            node: NodeId::new("A").expect("static id"),
            start: NaiveDate::from_ymd_opt(2024, 6, 1).expect("static date"),
            n_days: 400,
            seed: 20_240_601,
            intercept: 500.0,
            coefficients,
            sigma: 300.0,
            rho: 0.0,
            suppression: [0.0; 4],
            suppression_months: None,
            weather: WeatherProfile::default(),
            intent_base: 300.0,
            outage_days: 0,
            nonlinear: false,
        }
    }
}

impl DgpParams {
    /// Innovation sd 1e-9: the latent target is the linear predictor.
    pub fn noiseless() -> Self {
        DgpParams {
            sigma: 1e-9,
            ..Default::default()
        }
    }

    /// AR(1) errors with ρ = 0.5 over two years; the error dominates the
    /// weekly signal.
    pub fn serially_correlated() -> Self {
        let mut p = DgpParams {
            start: NaiveDate::from_ymd_opt(2024, 3, 1).expect("static date"),
            n_days: 730,
            sigma: 1200.0,
            rho: 0.5,
            ..Default::default()
        };
        p.coefficients.insert("is_weekend_or_holiday".into(), 300.0);
        p.coefficients.insert("weekend_x_intent".into(), 0.0);
        p
    }

    /// Weather acts only through severity-gated suppression in December to
    /// February; every year-round weather effect is 0.
    pub fn winter_friction() -> Self {
        let mut p = DgpParams {
            start: NaiveDate::from_ymd_opt(2024, 3, 1).expect("static date"),
            n_days: 730,
            suppression: [0.0, 0.10, 0.30, 0.50],
            suppression_months: Some(vec![12, 1, 2]),
            ..Default::default()
        };
        for c in crate::linmodel::WEATHER_DERIVED_COLUMNS {
            p.coefficients.remove(c);
        }
        p
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.n_days < 60 {
            problems.push(format!("n_days {} below 60", self.n_days));
        }
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            problems.push(format!("sigma {} must be positive", self.sigma));
        }
        if !(0.0..1.0).contains(&self.rho) {
            problems.push(format!("rho {} outside [0, 1)", self.rho));
        }
        if self.suppression.iter().any(|s| !(0.0..=1.0).contains(s)) {
            problems.push("suppression shares must lie in [0, 1]".to_string());
        }
        if let Some(m) = &self.suppression_months {
            if m.iter().any(|m| !(1..=12).contains(m)) {
                problems.push("suppression months must be 1-12".to_string());
            }
        }
        problems.extend(self.weather.problems());
        if !(self.intent_base > 0.0) {
            problems.push("intent_base must be positive".to_string());
        }
        for (k, v) in &self.coefficients {
            if !FEATURE_NAMES.contains(&k.as_str()) {
                problems.push(format!("unknown feature `{k}` in coefficients"));
            } else if k == ENDOGENOUS_FEATURE && *v != 0.0 {
                problems.push(format!("`{ENDOGENOUS_FEATURE}` is derived from the counts; its effect must be 0"));
            }
            if !v.is_finite() {
                problems.push(format!("coefficient for `{k}` is not finite"));
            }
        }
        if self.outage_days * 10 > self.n_days {
            problems.push("outage_days may not exceed a tenth of n_days".to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::invalid(problems.join("; ")))
        }
    }

    pub fn coefficient(&self, name: &str) -> f64 {
        self.coefficients.get(name).copied().unwrap_or(0.0)
    }

    /// (name, value) for the intercept and every feature, in design order.
    pub fn truth(&self) -> Vec<(String, f64)> {
        std::iter::once((INTERCEPT_NAME.to_string(), self.intercept))
            .chain(FEATURE_NAMES.iter().map(|n| (n.to_string(), self.coefficient(n))))
            .collect()
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(stream);
        r
    }

    fn dates(&self) -> Vec<NaiveDate> {
        (0..self.n_days as u64).map(|i| self.start + Days::new(i)).collect()
    }
}

/// Daily weather climate; values move between the mid-July and mid-January
/// levels along a cosine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WeatherProfile {
    pub summer_temp: f64,
    pub winter_temp: f64,
    pub temp_sd: f64,
    pub summer_wet_prob: f64,
    pub winter_wet_prob: f64,
    /// Mean precipitation on a wet day, mm.
    pub summer_wet_mm: f64,
    pub winter_wet_mm: f64,
    pub summer_wind: f64,
    pub winter_wind: f64,
    pub wind_sd: f64,
}

impl Default for WeatherProfile {
    fn default() -> Self {
        WeatherProfile {
            summer_temp: 26.0,
            winter_temp: 2.0,
            temp_sd: 2.5,
            summer_wet_prob: 0.30,
            winter_wet_prob: 0.65,
            summer_wet_mm: 3.0,
            winter_wet_mm: 14.0,
            summer_wind: 2.5,
            winter_wind: 6.0,
            wind_sd: 1.6,
        }
    }
}

impl WeatherProfile {
    fn problems(&self) -> Vec<String> {
        let mut p = Vec::new();
        for (name, v) in [("summer_wet_prob", self.summer_wet_prob), ("winter_wet_prob", self.winter_wet_prob)] {
            if !(0.0..=1.0).contains(&v) {
                p.push(format!("weather.{name} {v} outside [0, 1]"));
            }
        }
        for (name, v) in [
            ("summer_wet_mm", self.summer_wet_mm),
            ("winter_wet_mm", self.winter_wet_mm),
            ("temp_sd", self.temp_sd),
            ("wind_sd", self.wind_sd),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                p.push(format!("weather.{name} must be positive"));
            }
        }
        if !self.summer_temp.is_finite() || !self.winter_temp.is_finite() {
            p.push("weather temperatures must be finite".to_string());
        }
        if !(self.summer_wind >= 0.0) || !(self.winter_wind >= 0.0) {
            p.push("weather wind levels must be non-negative".to_string());
        }
        p
    }
}

/// Raw files in ingest formats.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthFixtures {
    pub node: NodeId,
    pub station: String,
    pub camera_csv: String,
    pub jma_csv: String,
    pub intent_csv: String,
}

impl SynthFixtures {
    pub fn camera_file(&self) -> String {
        format!("camera_{}.csv", self.node)
    }

    pub fn jma_file(&self) -> String {
        format!("jma_{}.csv", self.station)
    }

    pub fn intent_file(&self) -> String {
        format!("intent_{}.csv", self.node)
    }

    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut out = Vec::new();
        for (name, body) in [
            (self.camera_file(), &self.camera_csv),
            (self.jma_file(), &self.jma_csv),
            (self.intent_file(), &self.intent_csv),
        ] {
            let p = dir.join(name);
            std::fs::write(&p, body)?;
            out.push(p);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub params: DgpParams,
    /// Panel ingested back from the fixtures.
    pub panel: DailyPanel,
    /// Features on the ingested panel; the target is the observed count.
    pub design: FeatureMatrix,
    /// Unrounded latent visitors for each design row.
    pub latent: Vec<f64>,
    /// Visitors removed by suppression for each design row.
    pub suppressed: Vec<f64>,
    pub fixtures: SynthFixtures,
}

impl SynthOutput {
    /// The design with the latent target in place of the counts.
    pub fn latent_design(&self) -> FeatureMatrix {
        FeatureMatrix {
            target: self.latent.clone(),
            ..self.design.clone()
        }
    }
}

struct DayWeather {
    temp: f64,
    precip: f64,
    wind: f64,
    sun: f64,
    snow: f64,
}

/// 1 in mid-January, 0 in mid-July.
fn winterness(d: NaiveDate) -> f64 {
    let theta = 2.0 * std::f64::consts::PI * (d.ordinal() as f64 - 15.0) / 365.25;
    (theta.cos() + 1.0) / 2.0
}

fn daily_weather(params: &DgpParams, dates: &[NaiveDate]) -> Vec<DayWeather> {
    let mut rng = params.rng(STREAM_WEATHER);
    let n01 = Normal::new(0.0, 1.0).expect("valid normal");
    let mut snow: f64 = 0.0;
    dates
        .iter()
        .map(|&d| {
            let w = winterness(d);
            let lerp = |summer: f64, winter: f64| summer + (winter - summer) * w;
            let c = &params.weather;
            let temp = lerp(c.summer_temp, c.winter_temp) + c.temp_sd * n01.sample(&mut rng);
            let wet = rng.random::<f64>() < lerp(c.summer_wet_prob, c.winter_wet_prob);
            let precip = if wet {
                Exp::new(1.0 / lerp(c.summer_wet_mm, c.winter_wet_mm)).expect("positive rate").sample(&mut rng)
            } else {
                0.0
            };
            let wind = (lerp(c.summer_wind, c.winter_wind) + c.wind_sd * n01.sample(&mut rng) + if wet { 1.5 } else { 0.0 })
                .max(0.0);
            let sun = if wet {
                rng.random_range(0.0..2.5)
            } else {
                rng.random_range(3.0..(10.0 - 4.0 * w))
            };
            snow = (snow * 0.85 + if temp < 1.0 { precip } else { 0.0 } - if temp > 4.0 { 6.0 } else { 0.0 }).max(0.0);
            DayWeather {
                temp,
                precip,
                wind,
                sun,
                snow,
            }
        })
        .collect()
}

fn round1(v: f64) -> f64 {
    (v * 10.0).round() / 10.0
}

/// Hourly JMA-style rows (hours 01:00 to 24:00 of each date).
fn jma_csv(params: &DgpParams, dates: &[NaiveDate], days: &[DayWeather], with_snow: bool) -> String {
    let mut rng = params.rng(STREAM_HOURLY);
    let mut s = String::from("timestamp,temp_c,precip_1h_mm,sun_1h_h,wind_speed_ms");
    if with_snow {
        s.push_str(",snow_depth_cm");
    }
    s.push_str(",humidity_pct\n");
    for (d, w) in dates.iter().zip(days) {
        let mut hourly_precip = [0.0f64; 24];
        let units = (w.precip / 0.5).round() as usize;
        for _ in 0..units {
            hourly_precip[rng.random_range(0..24)] += 0.5;
        }
        let per_hour_sun = (w.sun / 11.0).clamp(0.0, 1.0);
        for h in 1..=24u32 {
            let i = (h - 1) as usize;
            let temp = round1(w.temp + 3.0 * (2.0 * std::f64::consts::PI * (h as f64 - 9.0) / 24.0).sin());
            let wind = round1((w.wind + rng.random_range(-0.6..0.6)).max(0.0));
            let sun = if (7..=17).contains(&h) { round1(per_hour_sun) } else { 0.0 };
            let humidity = (60.0 + 30.0 * f64::from(u8::from(hourly_precip[i] > 0.0)) + rng.random_range(-8.0..8.0)).round();
            let _ = write!(
                s,
                "{} {:02}:00,{temp},{},{sun},{wind}",
                d.format("%Y-%m-%d"),
                h,
                hourly_precip[i]
            );
            if with_snow {
                let _ = write!(s, ",{}", w.snow.round());
            }
            let _ = writeln!(s, ",{}", humidity.clamp(0.0, 100.0));
        }
    }
    s
}

fn intent_series(params: &DgpParams, dates: &[NaiveDate], table: &HolidayTable) -> Result<Vec<u64>> {
    let mut rng = params.rng(STREAM_INTENT);
    // Stationary AR(1) log-deviation with sd 0.15 and persistence 0.6.
    let noise = Normal::new(0.0, 0.15 * 0.8).expect("valid normal");
    let mut z: f64 = 0.0;
    dates
        .iter()
        .map(|&d| {
            z = 0.6 * z + noise.sample(&mut rng);
            let flag = crate::features::is_weekend_or_holiday(d, table)?;
            let season = 1.0 + 0.25 * (2.0 * std::f64::consts::PI * (d.ordinal() as f64 - 100.0) / 365.25).sin();
            let v = params.intent_base * (1.0 + 0.35 * f64::from(flag)) * season * z.exp();
            Ok(v.round().max(0.0) as u64)
        })
        .collect()
}

/// Five-minute interval rows between 08:00 and 17:55; a day's count is
/// spread evenly, remainder to the earliest intervals.
fn camera_csv(counts: &[(NaiveDate, u64)]) -> String {
    const INTERVALS: u64 = 120;
    let mut s = String::from("aggregate from,aggregate to,total count\n");
    for &(d, c) in counts {
        let (base, rem) = (c / INTERVALS, c % INTERVALS);
        for i in 0..INTERVALS {
            let start = 8 * 60 + 5 * i;
            let end = start + 5;
            let _ = writeln!(
                s,
                "{} {:02}:{:02}:00+09:00,{} {:02}:{:02}:00+09:00,{}",
                d.format("%Y-%m-%d"),
                start / 60,
                start % 60,
                d.format("%Y-%m-%d"),
                end / 60,
                end % 60,
                base + u64::from(i < rem)
            );
        }
    }
    s
}

/// Generates weather, intent and counts for one node, writes them as
/// fixtures and ingests them back.
pub fn generate_panel(params: &DgpParams) -> Result<SynthOutput> {
    params.validate()?;
    let nodes = NodeConfig::defaults();
    let node = nodes
        .iter()
        .find(|n| n.id.site() == params.node.site())
        .cloned()
        .map(|mut n| {
            n.id = params.node.clone();
            n
        })
        .ok_or_else(|| Error::invalid(format!("no default configuration for node {}", params.node)))?;
    let registry = StationRegistry::default();
    let station = registry.get(&node.station_id)?.clone();
    let table = HolidayTable::embedded();
    let policy = SeverityPolicy::default();
    let dates = params.dates();

    let weather = daily_weather(params, &dates);
    let jma = jma_csv(params, &dates, &weather, station.records_snow);
    let intent = intent_series(params, &dates, &table)?;
    let mut intent_csv = String::from("date,directions\n");
    for (d, v) in dates.iter().zip(&intent) {
        let _ = writeln!(intent_csv, "{},{v}", d.format("%Y-%m-%d"));
    }

    let parsed_weather = parse_jma_csv(jma.as_bytes(), &node.station_id, &registry)?;
    let parsed_intent = parse_intent_csv(intent_csv.as_bytes())?;
    let placeholder = CameraSeries {
        counts: dates
            .iter()
            .map(|&date| DailyCount {
                date,
                count: 1,
                source: node.sensor_kind,
            })
            .collect(),
        dropped_zero_days: Vec::new(),
        rows: dates.len(),
        duplicate_rows: 0,
    };
    let pre_panel = build_panel(&placeholder, &parsed_weather.days, &parsed_intent.days, &node)?;
    let pre = build_features(&pre_panel, &table, &policy, DowBaseline::FullSample)?;

    let beta: Vec<f64> = pre.names.iter().map(|n| params.coefficient(n)).collect();
    let col = |name: &str| pre.column(name).expect("engineered column");
    let (dir, sev, temp, precip, flag) = (
        col("directions"),
        col("weather_severity"),
        col("temp"),
        col("precip"),
        col("is_weekend_or_holiday"),
    );
    let mut noise_rng = params.rng(STREAM_NOISE);
    let eps = Normal::new(0.0, params.sigma).expect("sigma validated");
    // Stationary start for the AR(1) error.
    let mut u = eps.sample(&mut noise_rng) / (1.0 - params.rho * params.rho).sqrt();
    let mut latent_by_date = BTreeMap::new();
    let mut suppressed_by_date = BTreeMap::new();
    for i in 0..pre.n() {
        if i > 0 {
            u = params.rho * u + eps.sample(&mut noise_rng);
        }
        let d = pre.dates[i];
        let linear: f64 = params.intercept + pre.x.row(i).iter().zip(&beta).map(|(x, b)| x * b).sum::<f64>();
        let gated = params.suppression_months.as_ref().is_none_or(|m| m.contains(&d.month()));
        let lost = if gated {
            params.suppression[sev[i] as usize] * dir[i] * params.coefficient("directions")
        } else {
            0.0
        };
        let extra = if params.nonlinear {
            let cold_wet = if temp[i] < 5.0 && precip[i] > 5.0 { -0.25 * dir[i] * params.coefficient("directions") } else { 0.0 };
            cold_wet + 0.004 * dir[i] * dir[i] * flag[i]
        } else {
            0.0
        };
        latent_by_date.insert(d, linear - lost + extra + u);
        suppressed_by_date.insert(d, lost);
    }

    let mut outage_rng = params.rng(STREAM_OUTAGE);
    let mut outages = std::collections::BTreeSet::new();
    while outages.len() < params.outage_days {
        outages.insert(dates[outage_rng.random_range(7..dates.len())]);
    }
    let counts: Vec<(NaiveDate, u64)> = latent_by_date
        .iter()
        .map(|(&d, &y)| (d, if outages.contains(&d) { 0 } else { y.round().max(1.0) as u64 }))
        .collect();
    let camera = camera_csv(&counts);

    let series = parse_camera_csv(camera.as_bytes(), &node)?;
    let panel = build_panel(&series, &parsed_weather.days, &parsed_intent.days, &node)?;
    let design = build_features(&panel, &table, &policy, DowBaseline::FullSample)?;
    let latent = design.dates.iter().map(|d| latent_by_date[d]).collect();
    let suppressed = design.dates.iter().map(|d| suppressed_by_date[d]).collect();

    Ok(SynthOutput {
        params: params.clone(),
        panel,
        design,
        latent,
        suppressed,
        fixtures: SynthFixtures {
            node: node.id.clone(),
            station: node.station_id.clone(),
            camera_csv: camera,
            jma_csv: jma,
            intent_csv,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_lists_problems() {
        let mut p = DgpParams {
            n_days: 10,
            sigma: 0.0,
            rho: 1.0,
            ..Default::default()
        };
        p.coefficients.insert(ENDOGENOUS_FEATURE.into(), 3.0);
        let msg = p.validate().unwrap_err().to_string();
        for needle in ["n_days", "sigma", "rho", ENDOGENOUS_FEATURE] {
            assert!(msg.contains(needle), "{msg}");
        }
    }

    #[test]
    fn deterministic_and_round_trips() {
        let p = DgpParams {
            n_days: 90,
            outage_days: 3,
            ..Default::default()
        };
        let a = generate_panel(&p).unwrap();
        let b = generate_panel(&p).unwrap();
        assert_eq!(a.fixtures, b.fixtures);
        assert_eq!(a.panel.coverage.dropped_zero_days, 3);
        assert_eq!(a.design.n(), a.latent.len());
        let station = StationRegistry::default();
        let w = parse_jma_csv(a.fixtures.jma_csv.as_bytes(), &a.fixtures.station, &station).unwrap();
        assert_eq!((w.duplicate_rows, w.invalid_cells), (0, 0));
    }
}
