use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::probes::{axis_range, point_probe};
use super::{aggregate, TraceEntry, WidthEstimate};
use crate::error::{Error, Result};
use crate::measure::GridMeasure;
use crate::observables::{Axis, ObservableModel};
use crate::state::{Grid, MixedState};
use crate::transport::{wasserstein, wasserstein_inf};

/// Point-localized probes walked toward the grid edge; a distance above
/// `w_cutoff` marks the observable distance as infinite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceScan {
    pub axis: Axis,
    pub positions: Vec<f64>,
    pub w_cutoff: f64,
}

impl DivergenceScan {
    /// Eight points on each side out to 95% of the half range.
    pub fn toward_edge(grid: &Grid, axis: Axis) -> Self {
        let half = axis_range(grid, axis) / 2.0;
        let positions = (1..=8).flat_map(|i| {
            let x = 0.95 * half * i as f64 / 8.0;
            [-x, x]
        });
        Self { axis, positions: std::iter::once(0.0).chain(positions).collect(), w_cutoff: 0.4 * 2.0 * half }
    }
}

fn distance(a: &GridMeasure, b: &GridMeasure, alpha: f64) -> Result<f64> {
    if alpha == f64::INFINITY {
        Ok(wasserstein_inf(a, b))
    } else {
        wasserstein(a, b, alpha)
    }
}

/// `Δ_α(E, F)` estimated as the max of `D_α(ρ^E, ρ^F)` over `ensemble` and
/// the scan probes.
pub fn observable_distance(
    e: &ObservableModel,
    f: &ObservableModel,
    alpha: f64,
    ensemble: &[MixedState],
    scan: Option<&DivergenceScan>,
) -> Result<WidthEstimate> {
    if ensemble.is_empty() {
        return Err(Error::domain("observable distance needs a nonempty ensemble"));
    }
    let mut entries: Vec<TraceEntry> = ensemble
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let d = distance(&e.distribution(s)?, &f.distribution(s)?, alpha)?;
            Ok(TraceEntry { center: f64::NAN, probe: format!("ensemble{i}"), width: d })
        })
        .collect::<Result<_>>()?;
    let mut cutoff = f64::INFINITY;
    if let Some(scan) = scan {
        cutoff = scan.w_cutoff;
        let grid = *ensemble[0].grid();
        let scanned: Vec<TraceEntry> = scan
            .positions
            .par_iter()
            .map(|&x| {
                let s = point_probe(&grid, scan.axis, x)?;
                let d = distance(&e.distribution(&s)?, &f.distribution(&s)?, alpha)?;
                Ok(TraceEntry { center: x, probe: "scan".into(), width: d })
            })
            .collect::<Result<_>>()?;
        entries.extend(scanned);
    }
    let mut est = aggregate(entries, cutoff, true, false);
    if let Some(w) = est.witness.as_mut() {
        if w.center.is_nan() {
            w.center = 0.0;
        }
    }
    Ok(est)
}

/// `Δ_1(Q^μ, Q) = ∫|q| dμ`.
pub fn delta1_smeared_closed_form(mu: &GridMeasure) -> f64 {
    mu.abs_moment(1.0)
}

/// `(∫|q|^α dμ)^{1/α}`: `D_α(ρ * μ, ρ)` for point-localized `ρ`, and an upper
/// bound for every other state through the coupling `(x + q, x)`.
pub fn delta_alpha_smeared_closed_form(mu: &GridMeasure, alpha: f64) -> Result<f64> {
    if !(alpha >= 1.0) {
        return Err(Error::domain(format!("alpha must be >= 1, got {alpha}")));
    }
    if alpha == f64::INFINITY {
        return Ok(mu.iter().filter(|(_, w)| *w > 0.0).map(|(x, _)| x.abs()).fold(0.0, f64::max));
    }
    Ok(mu.abs_moment(alpha).powf(1.0 / alpha))
}

/// `Δ_1(Q, Q∘f⁻¹) = sup|g|` for `f = id + g`.
pub fn pushforward_delta1_closed_form(g_sup: f64) -> f64 {
    g_sup.abs()
}

fn require_noise_pair(a: &ObservableModel, c: &ObservableModel) -> Result<()> {
    if !a.is_sharp() {
        return Err(Error::domain("noise-based error needs a sharp reference observable"));
    }
    if a.axis() != c.axis() {
        return Err(Error::domain("noise-based error needs observables on the same axis"));
    }
    Ok(())
}

/// `ε_NO(A, C, ρ) = (tr ρ(C[x²] − C[x]²) + tr ρ(C[x] − A)²)^{1/2}` from the
/// closed-form moment operators.
pub fn noise_based_error(a: &ObservableModel, c: &ObservableModel, s: &MixedState) -> Result<f64> {
    require_noise_pair(a, c)?;
    let stats = c.moment_stats(s)?;
    Ok((stats.variance_term().max(0.0) + stats.offset * stats.offset).sqrt())
}

/// Sup of [`noise_based_error`] over an ensemble.
pub fn global_noise_error(a: &ObservableModel, c: &ObservableModel, ensemble: &[MixedState]) -> Result<WidthEstimate> {
    if ensemble.is_empty() {
        return Err(Error::domain("global noise error needs a nonempty ensemble"));
    }
    let entries = ensemble
        .iter()
        .enumerate()
        .map(|(i, s)| Ok(TraceEntry { center: 0.0, probe: format!("ensemble{i}"), width: noise_based_error(a, c, s)? }))
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate(entries, f64::INFINITY, true, false))
}
