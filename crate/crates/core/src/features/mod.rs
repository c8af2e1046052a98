//! Design-matrix construction: calendar flags, lagged and smoothed intent,
//! the weather severity index and interaction terms.

mod calendar;
mod matrix;

pub use calendar::{is_weekend_or_holiday, HolidayTable};
pub use matrix::{build_features, DowBaseline, FeatureMatrix, FEATURE_NAMES};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Precipitation above this (mm/day) is hostile.
pub const HEAVY_PRECIP_MM: f64 = 10.0;
/// Wind above this (m/s) escalates severity by one level.
pub const STRONG_WIND_MS: f64 = 8.0;
pub const MAX_SEVERITY: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SeverityPolicy {
    /// When set, a snow depth at or above this many cm adds one level.
    pub snow_escalation_cm: Option<f64>,
}

impl SeverityPolicy {
    pub const DEFAULT_SNOW_CM: f64 = 20.0;

    pub fn with_snow_escalation() -> Self {
        SeverityPolicy {
            snow_escalation_cm: Some(Self::DEFAULT_SNOW_CM),
        }
    }
}

/// Ordinal weather severity 0–3.
///
/// Precipitation sets the base level (0 dry, 1 up to 10 mm, 2 above), strong
/// wind adds one, and snow can add one more under the policy; the result is
/// clamped to 3.
pub fn weather_severity(
    precip: f64,
    wind: f64,
    snow_depth: Option<f64>,
    policy: &SeverityPolicy,
) -> Result<u8> {
    if !(precip >= 0.0) || !(wind >= 0.0) {
        return Err(Error::invalid(format!(
            "severity inputs must be non-negative (precip {precip}, wind {wind})"
        )));
    }
    let mut level: u8 = if precip == 0.0 {
        0
    } else if precip <= HEAVY_PRECIP_MM {
        1
    } else {
        2
    };
    if wind > STRONG_WIND_MS {
        level += 1;
    }
    if let (Some(limit), Some(snow)) = (policy.snow_escalation_cm, snow_depth) {
        if snow < 0.0 {
            return Err(Error::invalid(format!("negative snow depth {snow}")));
        }
        if snow >= limit {
            level += 1;
        }
    }
    Ok(level.min(MAX_SEVERITY))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sev(p: f64, w: f64) -> u8 {
        weather_severity(p, w, None, &SeverityPolicy::default()).unwrap()
    }

    #[test]
    fn table_cells() {
        assert_eq!(sev(0.0, 5.0), 0);
        assert_eq!(sev(5.0, 3.0), 1);
        assert_eq!(sev(15.0, 2.0), 2);
        assert_eq!(sev(12.0, 9.0), 3);
        assert_eq!(sev(0.0, 9.0), 1);
        assert_eq!(sev(10.0, 8.0), 1);
    }

    #[test]
    fn snow_policy() {
        let p = SeverityPolicy::with_snow_escalation();
        assert_eq!(weather_severity(0.0, 1.0, Some(25.0), &p).unwrap(), 1);
        assert_eq!(weather_severity(0.0, 1.0, Some(19.9), &p).unwrap(), 0);
        assert_eq!(weather_severity(12.0, 9.0, Some(40.0), &p).unwrap(), 3);
        assert_eq!(
            weather_severity(0.0, 1.0, Some(25.0), &SeverityPolicy::default()).unwrap(),
            0
        );
    }

    #[test]
    fn negative_inputs_rejected() {
        assert!(weather_severity(-1.0, 0.0, None, &SeverityPolicy::default()).is_err());
        assert!(weather_severity(0.0, -0.1, None, &SeverityPolicy::default()).is_err());
        assert!(weather_severity(f64::NAN, 0.0, None, &SeverityPolicy::default()).is_err());
    }
}
