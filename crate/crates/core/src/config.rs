use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Process-wide numeric settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlobalConfig {
    pub hbar: f64,
    /// Width beyond which a search reports "infinite"; `None` uses 40% of
    /// the axis range of the working grid.
    pub infinity_cutoff: Option<f64>,
    pub rng_seed: u64,
}

impl Default for GlobalConfig {
    fn default() -> Self {
        Self { hbar: 1.0, infinity_cutoff: None, rng_seed: 0 }
    }
}

impl GlobalConfig {
    pub fn new(hbar: f64, infinity_cutoff: Option<f64>, rng_seed: u64) -> Result<Self> {
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::domain(format!("hbar must be positive, got {hbar}")));
        }
        if infinity_cutoff.is_some_and(|c| !(c > 0.0)) {
            return Err(Error::domain("infinity cutoff must be positive"));
        }
        Ok(Self { hbar, infinity_cutoff, rng_seed })
    }

    /// The configured cutoff, or `0.4 * range`.
    pub fn cutoff_for(&self, range: f64) -> f64 {
        self.infinity_cutoff.unwrap_or(0.4 * range)
    }
}
