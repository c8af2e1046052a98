//! Least-squares estimation and regression diagnostics.

mod adf;
mod hac;
mod ols;
mod specs;
mod vif;

pub use adf::{adf_test, critical_values, mackinnon_p, schwert_maxlag, AdfResult, AdfTrend, CriticalValues, MaxLag};
pub use hac::{auto_lag, newey_west, HacInference, HacLag};
pub use ols::{
    cohens_f2, durbin_watson, fit_ols, ols, standardized_betas, LinearFit, StandardizedBeta,
    INTERCEPT_NAME,
};
pub use specs::{
    chronological_holdout, fit_first_difference, fit_ldv, ldv_matrix, seasonal_ablation,
    weather_ablation, Ablation, HoldoutPrediction, HoldoutReport, SeasonalAblation,
    DEFAULT_WEATHER_COLUMNS, LDV_NAME, SUMMER_MONTHS, WEATHER_DERIVED_COLUMNS, WINTER_MONTHS,
};
pub use vif::{vif, vif_matrix, VifEntry};
