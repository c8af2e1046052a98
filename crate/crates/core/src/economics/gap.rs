use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::stats;

pub const DEFAULT_FX_YEN_PER_USD: f64 = 157.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FrictionThresholds {
    /// Intent must reach this quantile (type 7) of the node's intent.
    pub intent_quantile: f64,
    pub min_severity: u8,
}

impl Default for FrictionThresholds {
    fn default() -> Self {
        FrictionThresholds {
            intent_quantile: 0.75,
            min_severity: 2,
        }
    }
}

/// One day of a node with its model prediction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DayRecord {
    pub date: NaiveDate,
    pub intent: f64,
    pub severity: u8,
    pub actual: f64,
    pub predicted: f64,
}

impl DayRecord {
    pub fn residual(&self) -> f64 {
        self.actual - self.predicted
    }
}

/// Pairs feature rows (intent = `directions`, severity = `weather_severity`)
/// with aligned predictions.
pub fn day_records(fm: &FeatureMatrix, predictions: &[f64]) -> Result<Vec<DayRecord>> {
    if predictions.len() != fm.n() {
        return Err(Error::invalid(format!(
            "{} predictions for {} rows",
            predictions.len(),
            fm.n()
        )));
    }
    let intent = fm
        .column("directions")
        .ok_or_else(|| Error::MissingColumn("directions".into()))?;
    let severity = fm
        .column("weather_severity")
        .ok_or_else(|| Error::MissingColumn("weather_severity".into()))?;
    Ok((0..fm.n())
        .map(|i| DayRecord {
            date: fm.dates[i],
            intent: intent[i],
            severity: severity[i] as u8,
            actual: fm.target[i],
            predicted: predictions[i],
        })
        .collect())
}

/// Days with intent ≥ the intent quantile, severity ≥ the minimum and a
/// negative residual.
pub fn flag_friction_days(days: &[DayRecord], t: &FrictionThresholds) -> Result<Vec<NaiveDate>> {
    if days.is_empty() {
        return Err(Error::insufficient("no days to screen"));
    }
    let intents: Vec<f64> = days.iter().map(|d| d.intent).collect();
    let cut = stats::quantile(&intents, t.intent_quantile)?;
    Ok(days
        .iter()
        .filter(|d| d.intent >= cut && d.severity >= t.min_severity && d.residual() < 0.0)
        .map(|d| d.date)
        .collect())
}

/// Flagged days of one node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeFlags {
    pub node: String,
    /// (date, residual) for each flagged day.
    pub flagged: Vec<(NaiveDate, f64)>,
    /// Days in the node's observation window.
    pub observed_days: usize,
}

impl NodeFlags {
    pub fn from_days(node: &str, days: &[DayRecord], t: &FrictionThresholds) -> Result<Self> {
        let dates = flag_friction_days(days, t)?;
        Ok(NodeFlags {
            node: node.to_string(),
            flagged: days
                .iter()
                .filter(|d| dates.contains(&d.date))
                .map(|d| (d.date, d.residual()))
                .collect(),
            observed_days: days.len(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeGap {
    pub node: String,
    pub flagged_days: Vec<NaiveDate>,
    pub observed_days: usize,
    /// Σ max(0, −residual) over flagged days, before annualization.
    pub window_lost: f64,
    pub annualization_factor: f64,
    pub lost_visitors: f64,
    pub yen_value: u64,
    pub usd_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapTotal {
    pub lost_visitors: f64,
    pub yen_value: u64,
    pub usd_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapParameters {
    pub spend_per_capita_yen: f64,
    pub fx_yen_per_usd: f64,
    pub thresholds: Option<FrictionThresholds>,
}

/// Comparison of the computed total against an externally reported figure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reconciliation {
    pub reference_yen: u64,
    pub computed_yen: u64,
    /// reference − computed.
    pub divergence_yen: i64,
    /// Spend per visitor that would reproduce the reference exactly.
    pub implied_spend_yen: f64,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapReport {
    pub parameters: GapParameters,
    pub nodes: Vec<NodeGap>,
    pub total: GapTotal,
    pub reconciliation: Option<Reconciliation>,
}

fn yen(lost: f64, spend: f64) -> u64 {
    (lost * spend).round() as u64
}

fn usd(yen: u64, fx: f64) -> f64 {
    (yen as f64 / fx * 100.0).round() / 100.0
}

/// Annualized suppressed visits and their value. Only negative residuals
/// count; each node's window total is scaled by 365 / observed days.
pub fn opportunity_gap(nodes: &[NodeFlags], spend_yen: f64, fx: f64) -> Result<GapReport> {
    if !(spend_yen > 0.0) || !spend_yen.is_finite() {
        return Err(Error::invalid(format!("spend must be positive, got {spend_yen}")));
    }
    if !(fx > 0.0) || !fx.is_finite() {
        return Err(Error::invalid(format!("fx rate must be positive, got {fx}")));
    }
    let mut out = Vec::with_capacity(nodes.len());
    for n in nodes {
        if n.observed_days == 0 {
            return Err(Error::invalid(format!("node {} has no observed days", n.node)));
        }
        let window_lost: f64 = n.flagged.iter().map(|(_, r)| (-r).max(0.0)).sum();
        let factor = 365.0 / n.observed_days as f64;
        let lost = window_lost * factor;
        let y = yen(lost, spend_yen);
        out.push(NodeGap {
            node: n.node.clone(),
            flagged_days: n.flagged.iter().map(|(d, _)| *d).collect(),
            observed_days: n.observed_days,
            window_lost,
            annualization_factor: factor,
            lost_visitors: lost,
            yen_value: y,
            usd_value: usd(y, fx),
        });
    }
    let lost: f64 = out.iter().map(|g| g.lost_visitors).sum();
    let total_yen = yen(lost, spend_yen);
    Ok(GapReport {
        parameters: GapParameters {
            spend_per_capita_yen: spend_yen,
            fx_yen_per_usd: fx,
            thresholds: None,
        },
        nodes: out,
        total: GapTotal {
            lost_visitors: lost,
            yen_value: total_yen,
            usd_value: usd(total_yen, fx),
        },
        reconciliation: None,
    })
}

impl GapReport {
    pub fn with_thresholds(mut self, t: FrictionThresholds) -> Self {
        self.parameters.thresholds = Some(t);
        self
    }

    /// Attaches a comparison against a reference total in yen.
    pub fn reconcile(mut self, reference_yen: u64) -> Self {
        let computed = self.total.yen_value;
        let divergence = reference_yen as i64 - computed as i64;
        let implied = if self.total.lost_visitors > 0.0 {
            reference_yen as f64 / self.total.lost_visitors
        } else {
            f64::NAN
        };
        let note = if divergence == 0 {
            "computed total matches the reference".to_string()
        } else {
            format!(
                "computed total differs from the reference by ¥{divergence}; the reference implies a per-capita spend of ¥{implied:.4} against ¥{} used here, consistent with a spend figure rounded before publication",
                self.parameters.spend_per_capita_yen
            )
        };
        self.reconciliation = Some(Reconciliation {
            reference_yen,
            computed_yen: computed,
            divergence_yen: divergence,
            implied_spend_yen: implied,
            note,
        });
        self
    }
}
