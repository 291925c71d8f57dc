use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Strictly monotone piecewise-linear map given by breakpoints, extended
/// linearly beyond the end segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTable", into = "RawTable")]
pub struct MonotoneTable {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawTable {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl TryFrom<RawTable> for MonotoneTable {
    type Error = Error;
    fn try_from(raw: RawTable) -> Result<Self> {
        MonotoneTable::new(raw.xs, raw.ys)
    }
}

impl From<MonotoneTable> for RawTable {
    fn from(t: MonotoneTable) -> Self {
        RawTable { xs: t.xs, ys: t.ys }
    }
}

impl MonotoneTable {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() < 2 || xs.len() != ys.len() {
            return Err(Error::domain("breakpoint table needs >= 2 matching (x, y) pairs"));
        }
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::domain("breakpoint table has non-finite entries"));
        }
        if xs.windows(2).any(|p| p[0] >= p[1]) {
            return Err(Error::domain("breakpoint abscissae must be strictly increasing"));
        }
        let increasing = ys.windows(2).all(|p| p[0] < p[1]);
        let decreasing = ys.windows(2).all(|p| p[0] > p[1]);
        if !(increasing || decreasing) {
            return Err(Error::domain("breakpoint table is not strictly monotone"));
        }
        Ok(Self { xs, ys })
    }

    pub fn apply(&self, x: f64) -> f64 {
        let n = self.xs.len();
        let k = self.xs.partition_point(|&b| b <= x).clamp(1, n - 1);
        let (x0, x1, y0, y1) = (self.xs[k - 1], self.xs[k], self.ys[k - 1], self.ys[k]);
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    /// `sup |f(x) - x|` when both end slopes equal one, otherwise unbounded.
    pub fn displacement_bound(&self) -> Option<f64> {
        let n = self.xs.len();
        let slope = |a: usize, b: usize| (self.ys[b] - self.ys[a]) / (self.xs[b] - self.xs[a]);
        let unit = |s: f64| (s - 1.0).abs() < 1e-12;
        if !(unit(slope(0, 1)) && unit(slope(n - 2, n - 1))) {
            return None;
        }
        Some(self.xs.iter().zip(&self.ys).map(|(x, y)| (y - x).abs()).fold(0.0, f64::max))
    }
}

/// Outcome relabelling `x -> f(x)` used by pushforward observables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PointMap {
    Identity,
    Table(MonotoneTable),
    /// `f(x) = x + amplitude * cos(frequency * x)`; monotone when
    /// `|amplitude * frequency| < 1`, displacement bounded by `|amplitude|`.
    ShiftCos {
        amplitude: f64,
        frequency: f64,
    },
    /// `f(x) = amplitude * cos(frequency * x)`: bounded, not monotone.
    BoundedCos {
        amplitude: f64,
        frequency: f64,
    },
    /// `f(x) = clamp(x, lo, hi)`: bounded, not injective.
    Clamp {
        lo: f64,
        hi: f64,
    },
}

impl PointMap {
    pub fn apply(&self, x: f64) -> f64 {
        match self {
            PointMap::Identity => x,
            PointMap::Table(t) => t.apply(x),
            PointMap::ShiftCos { amplitude, frequency } => x + amplitude * (frequency * x).cos(),
            PointMap::BoundedCos { amplitude, frequency } => amplitude * (frequency * x).cos(),
            PointMap::Clamp { lo, hi } => x.clamp(*lo, *hi),
        }
    }

    /// `sup |f(x) - x|` when finite.
    pub fn displacement_bound(&self) -> Option<f64> {
        match self {
            PointMap::Identity => Some(0.0),
            PointMap::Table(t) => t.displacement_bound(),
            PointMap::ShiftCos { amplitude, .. } => Some(amplitude.abs()),
            PointMap::BoundedCos { .. } | PointMap::Clamp { .. } => None,
        }
    }

    /// `sup |f(x)|` for maps with bounded range.
    pub fn range_bound(&self) -> Option<f64> {
        match self {
            PointMap::BoundedCos { amplitude, .. } => Some(amplitude.abs()),
            PointMap::Clamp { lo, hi } => Some(lo.abs().max(hi.abs())),
            _ => None,
        }
    }

    pub fn is_monotone(&self) -> bool {
        match self {
            PointMap::Identity | PointMap::Table(_) => true,
            PointMap::ShiftCos { amplitude, frequency } => (amplitude * frequency).abs() < 1.0,
            PointMap::BoundedCos { .. } | PointMap::Clamp { .. } => false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PointMap::ShiftCos { amplitude, frequency } | PointMap::BoundedCos { amplitude, frequency } => {
                if !(amplitude.is_finite() && frequency.is_finite()) {
                    return Err(Error::domain("map parameters must be finite"));
                }
            }
            PointMap::Clamp { lo, hi } => {
                if !(lo <= hi) {
                    return Err(Error::domain("clamp needs lo <= hi"));
                }
            }
            _ => {}
        }
        Ok(())
    }
}
