use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Node identifier: a site letter `A`–`D`, optionally followed by `-<sub-site>`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct NodeId(String);

impl NodeId {
    pub fn new(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut chars = s.chars();
        match chars.next() {
            Some('A'..='D') => {}
            _ => return Err(Error::invalid(format!("node id `{s}` must start with A-D"))),
        }
        let rest: String = chars.collect();
        if !rest.is_empty() {
            let sub = rest
                .strip_prefix('-')
                .ok_or_else(|| Error::invalid(format!("node id `{s}`: sub-site needs `-`")))?;
            if sub.is_empty() || !sub.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(Error::invalid(format!("node id `{s}`: bad sub-site")));
            }
        }
        Ok(NodeId(s.to_string()))
    }

    /// The site letter without any sub-site suffix.
    pub fn site(&self) -> char {
        self.0.chars().next().expect("validated non-empty")
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for NodeId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        NodeId::new(s)
    }
}

impl TryFrom<String> for NodeId {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        NodeId::new(&s)
    }
}

impl From<NodeId> for String {
    fn from(n: NodeId) -> String {
        n.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Environment {
    Coastal,
    Urban,
    Mountain,
    Scenic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensorKind {
    PersonCamera,
    FaceGate,
    SurveyProxy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeConfig {
    pub id: NodeId,
    pub name: String,
    pub environment: Environment,
    pub sensor_kind: SensorKind,
    pub station_id: String,
    pub indoor_sheltered: bool,
}

impl NodeConfig {
    /// Checks the node against the station registry. Survey-proxy counting is
    /// only declared for site C.
    pub fn validate(&self, stations: &StationRegistry) -> Result<()> {
        stations.get(&self.station_id)?;
        if self.sensor_kind == SensorKind::SurveyProxy && self.id.site() != 'C' {
            return Err(Error::invalid(format!(
                "node {}: survey_proxy sensor is only declared for node C",
                self.id
            )));
        }
        Ok(())
    }

    /// The four monitored nodes and their station assignments.
    pub fn defaults() -> Vec<NodeConfig> {
        let mk = |id: &str, name: &str, env, sensor, station: &str, sheltered| NodeConfig {
            id: NodeId::new(id).expect("static id"),
            name: name.to_string(),
            environment: env,
            sensor_kind: sensor,
            station_id: station.to_string(),
            indoor_sheltered: sheltered,
        };
        vec![
            mk(
                "A",
                "Tojinbo / Mikuni",
                Environment::Coastal,
                SensorKind::PersonCamera,
                "mikuni",
                false,
            ),
            mk(
                "B",
                "Fukui Station",
                Environment::Urban,
                SensorKind::PersonCamera,
                "fukui",
                false,
            ),
            mk(
                "C",
                "Katsuyama / Dinosaur Museum",
                Environment::Mountain,
                SensorKind::SurveyProxy,
                "katsuyama",
                true,
            ),
            mk(
                "D",
                "Rainbow Line / Wakasa",
                Environment::Scenic,
                SensorKind::FaceGate,
                "mihama",
                false,
            ),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StationKind {
    Amedas,
    MainObservatory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Station {
    pub key: String,
    pub name: String,
    pub kind: StationKind,
    pub block_no: u32,
    pub latitude: f64,
    pub longitude: f64,
    pub elevation_m: f64,
    /// Whether the instrument reports snow depth.
    pub records_snow: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationRegistry {
    stations: Vec<Station>,
}

fn dm(deg: f64, min: f64) -> f64 {
    deg + min / 60.0
}

impl Default for StationRegistry {
    fn default() -> Self {
        let st = |key: &str, name: &str, kind, block_no, lat, lon, elev, snow| Station {
            key: key.to_string(),
            name: name.to_string(),
            kind,
            block_no,
            latitude: lat,
            longitude: lon,
            elevation_m: elev,
            records_snow: snow,
        };
        StationRegistry {
            stations: vec![
                st(
                    "mikuni",
                    "Mikuni (三国)",
                    StationKind::Amedas,
                    1071,
                    dm(36.0, 13.3),
                    dm(136.0, 8.9),
                    5.0,
                    false,
                ),
                st(
                    "fukui",
                    "Fukui City (福井)",
                    StationKind::MainObservatory,
                    47616,
                    dm(36.0, 3.4),
                    dm(136.0, 13.3),
                    9.0,
                    true,
                ),
                st(
                    "katsuyama",
                    "Katsuyama (勝山)",
                    StationKind::Amedas,
                    1226,
                    dm(36.0, 3.6),
                    dm(136.0, 30.0),
                    160.0,
                    false,
                ),
                st(
                    "mihama",
                    "Mihama (美浜)",
                    StationKind::Amedas,
                    1010,
                    dm(35.0, 35.8),
                    dm(135.0, 57.3),
                    5.0,
                    false,
                ),
            ],
        }
    }
}

impl StationRegistry {
    pub fn new(stations: Vec<Station>) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for s in &stations {
            if !seen.insert(s.key.to_lowercase()) {
                return Err(Error::invalid(format!("duplicate station key `{}`", s.key)));
            }
        }
        Ok(StationRegistry { stations })
    }

    /// Looks a station up by key (case-insensitive) or by block number.
    pub fn get(&self, key: &str) -> Result<&Station> {
        let k = key.trim();
        self.stations
            .iter()
            .find(|s| s.key.eq_ignore_ascii_case(k) || s.block_no.to_string() == k)
            .ok_or_else(|| Error::UnknownStation(key.to_string()))
    }

    pub fn stations(&self) -> &[Station] {
        &self.stations
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_ids() {
        assert_eq!(NodeId::new("A").unwrap().site(), 'A');
        assert_eq!(NodeId::new("B-east").unwrap().site(), 'B');
        assert!(NodeId::new("E").is_err());
        assert!(NodeId::new("Ax").is_err());
        assert!(NodeId::new("").is_err());
    }

    #[test]
    fn defaults_validate() {
        let reg = StationRegistry::default();
        for n in NodeConfig::defaults() {
            n.validate(&reg).unwrap();
        }
    }

    #[test]
    fn survey_proxy_only_at_c() {
        let reg = StationRegistry::default();
        let mut a = NodeConfig::defaults().remove(0);
        a.sensor_kind = SensorKind::SurveyProxy;
        assert!(a.validate(&reg).is_err());
    }

    #[test]
    fn station_lookup_by_block_number() {
        let reg = StationRegistry::default();
        assert_eq!(reg.get("47616").unwrap().key, "fukui");
        assert!(reg.get("Mikuni").is_ok());
        assert!(matches!(reg.get("tokyo"), Err(Error::UnknownStation(_))));
    }
}
