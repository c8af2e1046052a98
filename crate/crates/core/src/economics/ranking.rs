use std::io::Read;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::{csv_reader, read_text, record_line, Headers};

/// One month of the ranking baseline: the region's visitor total and the
/// totals of the competitors it is ranked against.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonthBaseline {
    pub month: u32,
    pub baseline_visitors: f64,
    pub thresholds: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankingBaseline {
    /// Months 1..=12 in order.
    pub months: Vec<MonthBaseline>,
}

impl RankingBaseline {
    pub fn new(mut months: Vec<MonthBaseline>) -> Result<Self> {
        months.sort_by_key(|m| m.month);
        let got: Vec<u32> = months.iter().map(|m| m.month).collect();
        if got != (1..=12).collect::<Vec<_>>() {
            return Err(Error::invalid(format!(
                "ranking baseline needs each month 1-12 exactly once, got {got:?}"
            )));
        }
        for m in &months {
            if !(m.baseline_visitors >= 0.0) || m.thresholds.iter().any(|t| !t.is_finite()) {
                return Err(Error::invalid(format!("invalid values for month {}", m.month)));
            }
        }
        Ok(RankingBaseline { months })
    }

    /// CSV `month,baseline_visitors,tier_1,...,tier_k`; blank tier cells are
    /// skipped.
    pub fn read_csv(stream: impl Read) -> Result<Self> {
        let text = read_text(stream)?;
        let mut rdr = csv_reader(&text);
        let headers = rdr.headers()?.clone();
        let h = Headers::new(&headers);
        let (mc, bc) = (h.require("month")?, h.require("baseline_visitors")?);
        let tiers: Vec<usize> = (0..headers.len())
            .filter(|&j| headers[j].trim().starts_with("tier"))
            .collect();
        let mut months = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let line = record_line(&rec);
            let num = |j: usize| rec.get(j).unwrap_or("").trim().to_string();
            let bad = |what: &str| Error::Row {
                line,
                message: format!("invalid {what}"),
            };
            let month: u32 = num(mc).parse().map_err(|_| bad("month"))?;
            let baseline: f64 = num(bc).parse().map_err(|_| bad("baseline_visitors"))?;
            let mut thresholds = Vec::new();
            for &j in &tiers {
                let v = num(j);
                if !v.is_empty() {
                    thresholds.push(v.parse().map_err(|_| bad(&headers[j]))?);
                }
            }
            months.push(MonthBaseline {
                month,
                baseline_visitors: baseline,
                thresholds,
            });
        }
        RankingBaseline::new(months)
    }
}

/// 1 + number of competitor totals strictly above `total`.
pub fn rank_of(total: f64, thresholds: &[f64]) -> usize {
    1 + thresholds.iter().filter(|&&t| t > total).count()
}

pub fn uniform_weights() -> [f64; 12] {
    [1.0 / 12.0; 12]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonthProjection {
    pub month: u32,
    pub weight: f64,
    pub baseline_visitors: f64,
    pub recovered: f64,
    pub projected_visitors: f64,
    /// Visitors needed to pass the next competitor; absent at rank 1.
    pub shortfall: Option<f64>,
    /// 100 · recovered / shortfall; may exceed 100.
    pub shortfall_closed_pct: Option<f64>,
    pub baseline_rank: usize,
    pub projected_rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankingSim {
    pub recovered_annual: f64,
    pub months: Vec<MonthProjection>,
}

/// Spreads `recovered_annual` over months by `weights` and re-ranks each
/// month within its competitor ladder.
pub fn ranking_simulation(
    baseline: &RankingBaseline,
    recovered_annual: f64,
    weights: &[f64],
) -> Result<RankingSim> {
    if weights.len() != 12 {
        return Err(Error::invalid(format!("expected 12 weights, got {}", weights.len())));
    }
    if weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(Error::invalid("weights must be non-negative"));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("weights sum to {sum}, not 1")));
    }
    if !(recovered_annual >= 0.0) {
        return Err(Error::invalid("recovered visitors must be non-negative"));
    }
    let months = baseline
        .months
        .iter()
        .zip(weights)
        .map(|(m, &w)| {
            let recovered = recovered_annual * w;
            let total = m.baseline_visitors + recovered;
            let next = m
                .thresholds
                .iter()
                .copied()
                .filter(|&t| t > m.baseline_visitors)
                .fold(None::<f64>, |acc, t| Some(acc.map_or(t, |a| a.min(t))));
            let shortfall = next.map(|t| t - m.baseline_visitors);
            MonthProjection {
                month: m.month,
                weight: w,
                baseline_visitors: m.baseline_visitors,
                recovered,
                projected_visitors: total,
                shortfall,
                shortfall_closed_pct: shortfall.map(|s| 100.0 * recovered / s),
                baseline_rank: rank_of(m.baseline_visitors, &m.thresholds),
                projected_rank: rank_of(total, &m.thresholds),
            }
        })
        .collect();
    Ok(RankingSim {
        recovered_annual,
        months,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn baseline() -> RankingBaseline {
        RankingBaseline::new(
            (1..=12)
                .map(|m| MonthBaseline {
                    month: m,
                    baseline_visitors: 1000.0,
                    thresholds: vec![5000.0, 1100.0, 1200.0, 900.0],
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn exact_shortfall_closes_one_tier() {
        let r = ranking_simulation(&baseline(), 1200.0, &uniform_weights()).unwrap();
        for m in &r.months {
            assert!((m.recovered - 100.0).abs() < 1e-9);
            assert_eq!(m.baseline_rank, 4);
            assert!((m.shortfall_closed_pct.unwrap() - 100.0).abs() < 1e-9);
            assert_eq!(m.projected_rank, 3);
        }
        let total: f64 = r.months.iter().map(|m| m.recovered).sum();
        assert!((total - 1200.0).abs() < 1e-9);
    }

    #[test]
    fn zero_recovery_keeps_ranks() {
        let r = ranking_simulation(&baseline(), 0.0, &uniform_weights()).unwrap();
        assert!(r.months.iter().all(|m| m.projected_rank == m.baseline_rank));
    }

    #[test]
    fn weight_validation() {
        let mut w = uniform_weights();
        w[0] += 1e-6;
        assert!(ranking_simulation(&baseline(), 1.0, &w).is_err());
        assert!(ranking_simulation(&baseline(), 1.0, &w[..11]).is_err());
    }

    #[test]
    fn csv_layout() {
        let mut s = String::from("month,baseline_visitors,tier_1,tier_2\n");
        for m in 1..=12 {
            s.push_str(&format!("{m},100,150,\n"));
        }
        let b = RankingBaseline::read_csv(s.as_bytes()).unwrap();
        assert_eq!(b.months[3].thresholds, vec![150.0]);
        assert!(RankingBaseline::read_csv("month,baseline_visitors\n1,5\n".as_bytes()).is_err());
    }
}
