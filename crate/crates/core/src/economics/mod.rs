//! Spend aggregation, the opportunity gap, cross-correlation and the
//! ranking-recovery simulation.

mod ccf;
mod gap;
mod ranking;
mod spend;

pub use ccf::{ccf, ccf_series, CcfPoint, CcfReport};
pub use gap::{
    day_records, flag_friction_days, opportunity_gap, DayRecord, FrictionThresholds, GapParameters,
    GapReport, GapTotal, NodeFlags, NodeGap, Reconciliation, DEFAULT_FX_YEN_PER_USD,
};
pub use ranking::{
    rank_of, ranking_simulation, uniform_weights, MonthBaseline, MonthProjection, RankingBaseline,
    RankingSim,
};
pub use spend::{mean_spend, SpendBandTable, SpendEstimate, FALLBACK_SPEND_YEN};
