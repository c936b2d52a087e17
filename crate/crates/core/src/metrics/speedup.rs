use serde::{Deserialize, Serialize};

use super::MetricsError;

/// Magnitude band of a speedup (improvement) or slowdown (degradation).
/// Bands are left-closed: exactly 2.0 is `Imp2To5`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SpeedupBucket {
    #[serde(rename = "DEG_GT10")]
    DegGt10,
    #[serde(rename = "DEG_5_10")]
    Deg5To10,
    #[serde(rename = "DEG_2_5")]
    Deg2To5,
    #[serde(rename = "DEG_1_2")]
    Deg1To2,
    #[serde(rename = "IMP_1_2")]
    Imp1To2,
    #[serde(rename = "IMP_2_5")]
    Imp2To5,
    #[serde(rename = "IMP_5_10")]
    Imp5To10,
    #[serde(rename = "IMP_GT10")]
    ImpGt10,
}

impl SpeedupBucket {
    pub const ALL: [SpeedupBucket; 8] = [
        SpeedupBucket::DegGt10,
        SpeedupBucket::Deg5To10,
        SpeedupBucket::Deg2To5,
        SpeedupBucket::Deg1To2,
        SpeedupBucket::Imp1To2,
        SpeedupBucket::Imp2To5,
        SpeedupBucket::Imp5To10,
        SpeedupBucket::ImpGt10,
    ];

    pub fn label(self) -> &'static str {
        match self {
            SpeedupBucket::DegGt10 => "DEG_GT10",
            SpeedupBucket::Deg5To10 => "DEG_5_10",
            SpeedupBucket::Deg2To5 => "DEG_2_5",
            SpeedupBucket::Deg1To2 => "DEG_1_2",
            SpeedupBucket::Imp1To2 => "IMP_1_2",
            SpeedupBucket::Imp2To5 => "IMP_2_5",
            SpeedupBucket::Imp5To10 => "IMP_5_10",
            SpeedupBucket::ImpGt10 => "IMP_GT10",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

pub fn bucket_speedup(speedup: f64) -> Result<SpeedupBucket, MetricsError> {
    if !(speedup > 0.0) || !speedup.is_finite() {
        return Err(MetricsError::NonPositive(speedup));
    }
    let improving = speedup >= 1.0;
    let magnitude = if improving { speedup } else { 1.0 / speedup };
    let band = if magnitude < 2.0 {
        0
    } else if magnitude < 5.0 {
        1
    } else if magnitude < 10.0 {
        2
    } else {
        3
    };
    Ok(if improving {
        SpeedupBucket::ALL[4 + band]
    } else {
        SpeedupBucket::ALL[3 - band]
    })
}

/// Counts per bucket, in [`SpeedupBucket::ALL`] order.
pub fn bucket_histogram(speedups: &[f64]) -> Result<[usize; 8], MetricsError> {
    let mut h = [0; 8];
    for &s in speedups {
        h[bucket_speedup(s)?.index()] += 1;
    }
    Ok(h)
}
