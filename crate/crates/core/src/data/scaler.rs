use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Affine map of `[lo, hi]` onto `[-1, 1]`. Values outside the fitted range
/// extrapolate linearly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetScaler {
    lo: f64,
    hi: f64,
}

impl TargetScaler {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::param("scaler bounds must be finite"));
        }
        if lo >= hi {
            return Err(Error::DegenerateRange(lo));
        }
        Ok(TargetScaler { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn scale(&self, y: f64) -> f64 {
        2.0 * (y - self.lo) / (self.hi - self.lo) - 1.0
    }

    pub fn inverse(&self, s: f64) -> f64 {
        self.lo + (s + 1.0) * 0.5 * (self.hi - self.lo)
    }
}

pub fn fit_scaler(targets: &[f64]) -> Result<TargetScaler> {
    if targets.is_empty() {
        return Err(Error::Dataset("cannot fit a scaler on no targets".into()));
    }
    let (lo, hi) = targets
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &y| (lo.min(y), hi.max(y)));
    if lo == hi {
        return Err(Error::DegenerateRange(lo));
    }
    TargetScaler::new(lo, hi)
}
