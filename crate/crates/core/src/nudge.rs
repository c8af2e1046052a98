//! Forecast-driven merchant alerts and weather-resilient rerouting.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{NodeConfig, NodeId};
use crate::stats;

/// Forecasts further ahead than this are outside the validated window.
pub const MAX_HORIZON_DAYS: i64 = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NudgePolicy {
    /// Alert when forecast visitors reach this quantile of the node's
    /// historical daily counts.
    pub surge_quantile: f64,
    /// Intent counts as high at this quantile of the node's history.
    pub intent_quantile: f64,
    pub reroute_severity: u8,
    pub horizon_days: i64,
    /// Sheltered targets in preference order; empty means node order.
    pub reroute_priority: Vec<NodeId>,
}

impl Default for NudgePolicy {
    fn default() -> Self {
        NudgePolicy {
            surge_quantile: 0.8,
            intent_quantile: 0.75,
            reroute_severity: 2,
            horizon_days: MAX_HORIZON_DAYS,
            reroute_priority: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeForecast {
    pub node: NodeId,
    pub date: NaiveDate,
    pub visitors: f64,
    pub intent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeverityOutlook {
    pub node: NodeId,
    pub date: NaiveDate,
    pub severity: u8,
}

/// Historical daily counts and intent of one node.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct NodeHistory {
    pub counts: Vec<f64>,
    pub intent: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectiveKind {
    MerchantVitalityAlert,
    WeatherResilientReroute,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trigger {
    /// Share of historical intent at or below the forecast intent.
    pub intent_percentile: f64,
    pub severity: Option<u8>,
    pub surge_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Payload {
    pub action: &'static str,
    pub lead_days: i64,
    pub target_severity: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NudgeDirective {
    pub date: NaiveDate,
    pub kind: DirectiveKind,
    pub source_node: NodeId,
    pub target_node: Option<NodeId>,
    pub forecast_visitors: f64,
    pub trigger: Trigger,
    pub payload: Payload,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NudgeOutcome {
    pub directives: Vec<NudgeDirective>,
    pub warnings: Vec<String>,
}

/// Turns next-days forecasts into directives, issued on `issued`.
///
/// A merchant alert fires when forecast visitors reach the node's surge
/// threshold. A reroute fires at a node that is not sheltered when forecast
/// intent is high and forecast severity reaches the policy level; the target
/// is the first sheltered node (priority order) whose own severity that day
/// is strictly lower. When no such node exists the reroute is dropped with a
/// warning.
pub fn evaluate_nudges(
    issued: NaiveDate,
    forecasts: &[NodeForecast],
    outlook: &[SeverityOutlook],
    history: &BTreeMap<NodeId, NodeHistory>,
    nodes: &[NodeConfig],
    policy: &NudgePolicy,
) -> Result<NudgeOutcome> {
    if !(1..=MAX_HORIZON_DAYS).contains(&policy.horizon_days) {
        return Err(Error::invalid(format!(
            "horizon {} days outside 1-{MAX_HORIZON_DAYS}",
            policy.horizon_days
        )));
    }
    for q in [policy.surge_quantile, policy.intent_quantile] {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::invalid(format!("quantile {q} outside [0, 1]")));
        }
    }
    let config: HashMap<&NodeId, &NodeConfig> = nodes.iter().map(|n| (&n.id, n)).collect();
    let mut problems = Vec::new();
    for f in forecasts {
        let lead = (f.date - issued).num_days();
        if !(1..=policy.horizon_days).contains(&lead) {
            problems.push(format!("forecast for {} on {} is {lead} days ahead", f.node, f.date));
        }
        if !config.contains_key(&f.node) {
            problems.push(format!("forecast for unconfigured node {}", f.node));
        }
    }
    for n in nodes {
        if !forecasts.iter().any(|f| f.node == n.id) {
            problems.push(format!("no forecast for node {}", n.id));
        }
        match history.get(&n.id) {
            Some(h) if !h.counts.is_empty() && !h.intent.is_empty() => {}
            _ => problems.push(format!("no history for node {}", n.id)),
        }
    }
    if !problems.is_empty() {
        return Err(Error::invalid(problems.join("; ")));
    }
    for p in &policy.reroute_priority {
        if !config.contains_key(p) {
            return Err(Error::invalid(format!("reroute priority names unknown node {p}")));
        }
    }

    let severity: HashMap<(&NodeId, NaiveDate), u8> =
        outlook.iter().map(|o| ((&o.node, o.date), o.severity)).collect();
    let priority: Vec<&NodeConfig> = if policy.reroute_priority.is_empty() {
        nodes.iter().collect()
    } else {
        policy.reroute_priority.iter().map(|p| config[p]).collect()
    };
    let order: HashMap<&NodeId, usize> = nodes.iter().enumerate().map(|(i, n)| (&n.id, i)).collect();

    let mut sorted: Vec<&NodeForecast> = forecasts.iter().collect();
    sorted.sort_by_key(|f| (f.date, order[&f.node]));

    let mut directives = Vec::new();
    let mut warnings = Vec::new();
    for f in sorted {
        let h = &history[&f.node];
        let surge = stats::quantile(&h.counts, policy.surge_quantile)?;
        let intent_cut = stats::quantile(&h.intent, policy.intent_quantile)?;
        let sev = severity.get(&(&f.node, f.date)).copied();
        let trigger = Trigger {
            intent_percentile: stats::percentile_rank(&h.intent, f.intent),
            severity: sev,
            surge_threshold: surge,
        };
        let lead_days = (f.date - issued).num_days();
        if f.visitors >= surge {
            directives.push(NudgeDirective {
                date: f.date,
                kind: DirectiveKind::MerchantVitalityAlert,
                source_node: f.node.clone(),
                target_node: None,
                forecast_visitors: f.visitors,
                trigger: trigger.clone(),
                payload: Payload {
                    action: "prepare_for_surge",
                    lead_days,
                    target_severity: None,
                },
            });
        }
        let Some(s) = sev else {
            warnings.push(format!("no severity outlook for {} on {}", f.node, f.date));
            continue;
        };
        if config[&f.node].indoor_sheltered || f.intent < intent_cut || s < policy.reroute_severity {
            continue;
        }
        let target = priority.iter().find_map(|n| {
            if !n.indoor_sheltered || n.id == f.node {
                return None;
            }
            let ts = severity.get(&(&n.id, f.date)).copied()?;
            (ts < s).then_some((n, ts))
        });
        match target {
            Some((t, ts)) => directives.push(NudgeDirective {
                date: f.date,
                kind: DirectiveKind::WeatherResilientReroute,
                source_node: f.node.clone(),
                target_node: Some(t.id.clone()),
                forecast_visitors: f.visitors,
                trigger,
                payload: Payload {
                    action: "promote_sheltered_alternative",
                    lead_days,
                    target_severity: Some(ts),
                },
            }),
            None => warnings.push(format!(
                "reroute from {} on {} suppressed: no sheltered node with milder weather",
                f.node, f.date
            )),
        }
    }
    Ok(NudgeOutcome {
        directives,
        warnings,
    })
}

/// One JSON object per line.
pub fn write_jsonl(directives: &[NudgeDirective], mut out: impl Write) -> Result<()> {
    for d in directives {
        serde_json::to_writer(&mut out, d).map_err(|e| Error::invalid(e.to_string()))?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: &str) -> NodeId {
        NodeId::new(s).unwrap()
    }

    fn day(d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2025, 1, d).unwrap()
    }

    fn history() -> BTreeMap<NodeId, NodeHistory> {
        NodeConfig::defaults()
            .iter()
            .map(|n| {
                (
                    n.id.clone(),
                    NodeHistory {
                        counts: (1..=100).map(f64::from).collect(),
                        intent: (1..=100).map(f64::from).collect(),
                    },
                )
            })
            .collect()
    }

    fn setup(visitors: f64, intent: f64, sev_a: u8) -> (Vec<NodeForecast>, Vec<SeverityOutlook>) {
        let nodes = NodeConfig::defaults();
        let f = nodes
            .iter()
            .map(|n| NodeForecast {
                node: n.id.clone(),
                date: day(2),
                visitors,
                intent,
            })
            .collect();
        let o = nodes
            .iter()
            .map(|n| SeverityOutlook {
                node: n.id.clone(),
                date: day(2),
                severity: if n.id == id("A") { sev_a } else { 0 },
            })
            .collect();
        (f, o)
    }

    #[test]
    fn calm_median_day_is_quiet() {
        let (f, o) = setup(50.0, 50.0, 0);
        let out = evaluate_nudges(day(1), &f, &o, &history(), &NodeConfig::defaults(), &NudgePolicy::default()).unwrap();
        assert!(out.directives.is_empty());
    }

    #[test]
    fn storm_at_a_reroutes_to_c() {
        let (f, o) = setup(50.0, 95.0, 3);
        let out = evaluate_nudges(day(1), &f, &o, &history(), &NodeConfig::defaults(), &NudgePolicy::default()).unwrap();
        assert_eq!(out.directives.len(), 1);
        let d = &out.directives[0];
        assert_eq!(d.kind, DirectiveKind::WeatherResilientReroute);
        assert_eq!((d.source_node.as_str(), d.target_node.as_ref().unwrap().as_str()), ("A", "C"));
    }

    #[test]
    fn no_sheltered_node_warns() {
        let (f, o) = setup(50.0, 95.0, 3);
        let mut nodes = NodeConfig::defaults();
        for n in &mut nodes {
            n.indoor_sheltered = false;
        }
        let out = evaluate_nudges(day(1), &f, &o, &history(), &nodes, &NudgePolicy::default()).unwrap();
        assert!(out.directives.is_empty());
        assert_eq!(out.warnings.len(), 1);
    }

    #[test]
    fn surge_alerts_every_node() {
        let (f, o) = setup(95.0, 10.0, 0);
        let out = evaluate_nudges(day(1), &f, &o, &history(), &NodeConfig::defaults(), &NudgePolicy::default()).unwrap();
        assert_eq!(out.directives.len(), 4);
        assert!(out.directives.iter().all(|d| d.kind == DirectiveKind::MerchantVitalityAlert));
    }

    #[test]
    fn horizon_and_coverage_checked() {
        let (mut f, o) = setup(50.0, 50.0, 0);
        f[0].date = day(6);
        assert!(evaluate_nudges(day(1), &f, &o, &history(), &NodeConfig::defaults(), &NudgePolicy::default()).is_err());
        let (f, o) = setup(50.0, 50.0, 0);
        assert!(evaluate_nudges(day(1), &f[..3], &o, &history(), &NodeConfig::defaults(), &NudgePolicy::default()).is_err());
    }
}
