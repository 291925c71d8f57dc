//! Error and unsharpness functionals of approximate position and momentum
//! observables: Wasserstein observable distances, error-bar widths (gross
//! and bias-free), resolution widths and noise-based errors.
//!
//! Suprema over all states are estimated over finite probe families. Every
//! estimate records whether it is a lower bound of the true value.

mod distance;
mod errorbar;
pub mod probes;

pub use distance::{
    delta1_smeared_closed_form, delta_alpha_smeared_closed_form, global_noise_error, noise_based_error,
    observable_distance, pushforward_delta1_closed_form, DivergenceScan,
};
pub use errorbar::{
    bias, bias_free_error, centered_window, error_bar_decomposition, error_bar_width, error_bar_width_sequence,
    resolution_width, resolution_width_estimate, ErrorBars, ResolutionSweep,
};
pub use probes::{ProbeConfig, ProbeKind};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub center: f64,
    pub probe: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub center: f64,
    pub probe: String,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthEstimate {
    pub value: f64,
    pub is_lower_bound: bool,
    /// Set when the estimate reached the cutoff width; `value` is then at least the cutoff.
    pub infinite_flag: bool,
    pub witness: Option<Witness>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceEntry>>,
}

impl WidthEstimate {
    pub fn exact(value: f64) -> Self {
        Self { value, is_lower_bound: false, infinite_flag: false, witness: None, trace: None }
    }

    pub fn is_finite(&self) -> bool {
        !self.infinite_flag
    }
}

/// Max-reduction of per-probe widths into an estimate.
pub(crate) fn aggregate(
    entries: Vec<TraceEntry>,
    cutoff: f64,
    is_lower_bound: bool,
    keep_trace: bool,
) -> WidthEstimate {
    let best = entries
        .iter()
        .enumerate()
        .max_by(|(i, a), (j, b)| a.width.total_cmp(&b.width).then(j.cmp(i)))
        .map(|(_, e)| e.clone());
    let value = best.as_ref().map_or(0.0, |e| e.width);
    WidthEstimate {
        value,
        is_lower_bound,
        infinite_flag: value >= cutoff,
        witness: best.map(|e| Witness { center: e.center, probe: e.probe }),
        trace: keep_trace.then_some(entries),
    }
}
