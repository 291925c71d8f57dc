use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::probes::{axis_step, localized_probes, point_probe, snap, target_mass, ProbeConfig};
use super::{aggregate, TraceEntry, WidthEstimate};
use crate::error::{Error, Result};
use crate::measure::GridMeasure;
use crate::observables::{Axis, ObservableModel};
use crate::state::Grid;

/// Width `2d` of the smallest window `[c - d, c + d]` holding mass at least
/// `1 - eps`. The optimal `d` is a distance from `c` to an atom, so the search
/// bisects over the sorted atom distances; `slack` widens the window ends
/// when counting mass.
pub fn centered_window(m: &GridMeasure, c: f64, eps: f64, slack: f64) -> f64 {
    let mut dists: Vec<f64> = m.iter().filter(|(_, w)| *w > 0.0).map(|(x, _)| (x - c).abs()).collect();
    dists.sort_by(f64::total_cmp);
    let target = target_mass(eps);
    let holds = |d: f64| m.mass_between(c - d - slack, c + d + slack) >= target;
    let (mut lo, mut hi) = (0usize, dists.len() - 1);
    if holds(dists[0]) {
        return 2.0 * dists[0];
    }
    // invariant: dists[lo] fails, dists[hi] holds
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if holds(dists[mid]) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    2.0 * dists[hi]
}

fn sharp_axis(e: &ObservableModel) -> Result<Axis> {
    match e {
        ObservableModel::SharpQ => Ok(Axis::Position),
        ObservableModel::SharpP => Ok(Axis::Momentum),
        other => Err(Error::domain(format!("error bars are defined against sharp targets, got {}", other.name()))),
    }
}

/// Per-probe gross and bias-free widths on identical probes.
fn probe_widths(
    e1: &ObservableModel,
    e: &ObservableModel,
    cfg: &ProbeConfig,
    grid: &Grid,
) -> Result<Vec<(TraceEntry, TraceEntry)>> {
    let axis = sharp_axis(e)?;
    cfg.validate(grid, axis)?;
    let per_center: Vec<Vec<(TraceEntry, TraceEntry)>> = cfg
        .x_samples
        .par_iter()
        .enumerate()
        .map(|(i, &c)| {
            let mut out = Vec::new();
            for probe in localized_probes(grid, axis, c, cfg, i)? {
                let law = e1.distribution(&probe.state)?;
                let gross = centered_window(&law, c, cfg.eps, cfg.bisection_tol);
                let free = law.overall_width(cfg.eps)?;
                debug_assert!(free <= gross + 2.0 * cfg.bisection_tol);
                out.push((
                    TraceEntry { center: c, probe: probe.id.clone(), width: gross },
                    TraceEntry { center: c, probe: probe.id, width: free },
                ));
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(per_center.concat())
}

/// Gross error-bar width `W_{ε,δ}(E1, E)` over the probe family: for each
/// probe the smallest window centered on the probe's window center holding
/// `1 - ε` of the `E1` output; the sup over probes is a lower bound.
pub fn error_bar_width(
    e1: &ObservableModel,
    e: &ObservableModel,
    cfg: &ProbeConfig,
    grid: &Grid,
) -> Result<WidthEstimate> {
    Ok(error_bar_decomposition(e1, e, cfg, grid)?.gross)
}

/// Bias-free width: sup over probes of the overall width `W_ε` of the output.
pub fn bias_free_error(
    e1: &ObservableModel,
    e: &ObservableModel,
    cfg: &ProbeConfig,
    grid: &Grid,
) -> Result<WidthEstimate> {
    Ok(error_bar_decomposition(e1, e, cfg, grid)?.bias_free)
}

/// Gross minus bias-free width; both must be finite.
pub fn bias(e1: &ObservableModel, e: &ObservableModel, cfg: &ProbeConfig, grid: &Grid) -> Result<f64> {
    let bars = error_bar_decomposition(e1, e, cfg, grid)?;
    bars.bias.ok_or_else(|| Error::domain("bias is undefined when an error bar is infinite"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBars {
    pub gross: WidthEstimate,
    pub bias_free: WidthEstimate,
    pub bias: Option<f64>,
}

pub fn error_bar_decomposition(
    e1: &ObservableModel,
    e: &ObservableModel,
    cfg: &ProbeConfig,
    grid: &Grid,
) -> Result<ErrorBars> {
    let (gross, free): (Vec<_>, Vec<_>) = probe_widths(e1, e, cfg, grid)?.into_iter().unzip();
    let gross = aggregate(gross, cfg.w_cutoff, true, cfg.trace);
    let bias_free = aggregate(free, cfg.w_cutoff, true, cfg.trace);
    if bias_free.value > gross.value + 2.0 * cfg.bisection_tol {
        return Err(Error::Internal(format!(
            "bias-free width {} exceeds gross width {}",
            bias_free.value, gross.value
        )));
    }
    let bias = (gross.is_finite() && bias_free.is_finite()).then(|| gross.value - bias_free.value);
    Ok(ErrorBars { gross, bias_free, bias })
}

/// Error bars at `δ ∈ {8, 4, 2}` grid steps, in that order; the last entry
/// is reported as the gross (δ → 0) value.
pub fn error_bar_width_sequence(
    e1: &ObservableModel,
    e: &ObservableModel,
    cfg: &ProbeConfig,
    grid: &Grid,
) -> Result<Vec<(f64, ErrorBars)>> {
    let step = axis_step(grid, sharp_axis(e)?);
    [8.0, 4.0, 2.0]
        .iter()
        .map(|k| {
            let cfg = ProbeConfig { delta: k * step, ..cfg.clone() };
            Ok((cfg.delta, error_bar_decomposition(e1, e, &cfg, grid)?))
        })
        .collect()
}

/// Centers and probe offsets for the resolution-width estimator. Probes are
/// single lattice points at `center + offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolutionSweep {
    pub axis: Axis,
    pub centers: Vec<f64>,
    pub offsets: Vec<f64>,
    pub w_cutoff: f64,
}

impl ResolutionSweep {
    /// Offsets on every lattice step within `±reach`; centers are snapped to
    /// the nearest lattice node and dropped when off the grid.
    pub fn new(grid: &Grid, axis: Axis, centers: Vec<f64>, reach: f64) -> Self {
        let step = axis_step(grid, axis);
        let centers = centers.into_iter().filter_map(|c| snap(grid, axis, c)).collect();
        let k = (reach / step).floor() as i64;
        let offsets = (-k..=k).map(|i| i as f64 * step).collect();
        let w_cutoff = 0.4 * super::probes::axis_range(grid, axis);
        Self { axis, centers, offsets, w_cutoff }
    }
}

/// `γ_ε(E)`: closed form `W_ε(μ)` for smeared and covariant observables,
/// 0 for sharp ones, the probe estimate otherwise.
pub fn resolution_width(e: &ObservableModel, eps: f64, sweep: &ResolutionSweep, grid: &Grid) -> Result<WidthEstimate> {
    if let Some(noise) = e.smearing() {
        return Ok(WidthEstimate::exact(noise.overall_width(eps)?));
    }
    if e.is_sharp() {
        return Ok(WidthEstimate::exact(0.0));
    }
    resolution_width_estimate(e, eps, sweep, grid)
}

/// Sup over centers of the best (over probes) centered window. The probes
/// are a subfamily of all states, so this bounds `γ_ε` from above.
pub fn resolution_width_estimate(
    e: &ObservableModel,
    eps: f64,
    sweep: &ResolutionSweep,
    grid: &Grid,
) -> Result<WidthEstimate> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::domain(format!("eps {eps} outside (0, 1)")));
    }
    if sweep.centers.is_empty() || sweep.offsets.is_empty() {
        return Err(Error::domain("resolution sweep needs centers and offsets"));
    }
    let slack = 1e-9 * axis_step(grid, sweep.axis);
    let entries: Vec<TraceEntry> = sweep
        .centers
        .par_iter()
        .map(|&c| {
            let mut best: Option<TraceEntry> = None;
            for &o in &sweep.offsets {
                let Ok(probe) = point_probe(grid, sweep.axis, c + o) else { continue };
                let w = centered_window(&e.distribution(&probe)?, c, eps, slack);
                if best.as_ref().is_none_or(|b| w < b.width) {
                    best = Some(TraceEntry { center: c, probe: format!("point{o:+.6}"), width: w });
                }
            }
            best.ok_or_else(|| Error::domain(format!("no probe fits on the grid near {c}")))
        })
        .collect::<Result<_>>()?;
    Ok(aggregate(entries, sweep.w_cutoff, false, false))
}
