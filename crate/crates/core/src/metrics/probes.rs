//! Probe states localized exactly in a window `J_{c;δ}` of the sharp
//! observable's outcome space.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::MASS_TOL;
use crate::observables::Axis;
use crate::state::{
    make_box, make_momentum_box, make_momentum_point, make_point, make_random_localized,
    make_random_momentum_localized, Grid, MixedState,
};

/// Largest probability a probe may place outside its window.
pub const LEAK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeKind {
    /// Constant amplitude on the window.
    Flat,
    /// Flat window boosted by `k ħπ/δ` (position) or translated by `k ħπ/δ` (momentum).
    PhaseRamped,
    /// Random sine-mode envelope vanishing at the window ends.
    RandomEnvelope,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub x_samples: Vec<f64>,
    pub delta: f64,
    /// Number of random envelopes per center.
    pub probes_per_center: usize,
    pub kinds: Vec<ProbeKind>,
    pub eps: f64,
    pub w_cutoff: f64,
    /// Slack added to window ends when counting captured mass.
    pub bisection_tol: f64,
    pub seed: u64,
    pub trace: bool,
}

impl ProbeConfig {
    /// Nine centers spread over 84% of the axis range, all probe kinds,
    /// cutoff at 40% of the range.
    pub fn new(grid: &Grid, axis: Axis, eps: f64, delta: f64) -> Self {
        let range = axis_range(grid, axis);
        let step = axis_step(grid, axis);
        let x_samples = (0..9)
            .map(|i| {
                let x = (i as f64 / 8.0 - 0.5) * 0.84 * range;
                snap(grid, axis, x).unwrap_or(x)
            })
            .collect();
        Self {
            x_samples,
            delta,
            probes_per_center: 3,
            kinds: vec![ProbeKind::Flat, ProbeKind::PhaseRamped, ProbeKind::RandomEnvelope],
            eps,
            w_cutoff: 0.4 * range,
            bisection_tol: 1e-9 * step,
            seed: 0,
            trace: false,
        }
    }

    pub fn with_centers(mut self, centers: Vec<f64>) -> Self {
        self.x_samples = centers;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self, grid: &Grid, axis: Axis) -> Result<()> {
        let step = axis_step(grid, axis);
        if !(self.delta >= 2.0 * step * (1.0 - 1e-9)) {
            return Err(Error::domain(format!("delta {} below two grid steps ({})", self.delta, 2.0 * step)));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::domain(format!("eps {} outside (0, 1)", self.eps)));
        }
        if self.probes_per_center < 3 {
            return Err(Error::domain("at least three probes per center are required"));
        }
        if self.x_samples.is_empty() || self.kinds.is_empty() {
            return Err(Error::domain("probe configuration needs centers and probe kinds"));
        }
        if !(self.w_cutoff > 0.0) || !(self.bisection_tol > 0.0) {
            return Err(Error::domain("w_cutoff and bisection_tol must be positive"));
        }
        Ok(())
    }
}

/// `n dx` for position, `n dp` for momentum.
pub fn axis_range(grid: &Grid, axis: Axis) -> f64 {
    grid.n as f64 * axis_step(grid, axis)
}

pub fn axis_step(grid: &Grid, axis: Axis) -> f64 {
    match axis {
        Axis::Position => grid.dx,
        Axis::Momentum => grid.dp(),
    }
}

/// Nearest lattice point on the given axis.
pub fn snap(grid: &Grid, axis: Axis, x: f64) -> Option<f64> {
    match axis {
        Axis::Position => grid.nearest_index(x).map(|j| grid.x(j)),
        Axis::Momentum => grid.nearest_momentum_index(x).map(|k| grid.momenta()[k]),
    }
}

#[derive(Debug, Clone)]
pub struct Probe {
    pub id: String,
    pub state: MixedState,
}

/// Probe family for one center; every member is checked to put all its
/// sharp-observable mass in `[center - δ/2, center + δ/2]`.
pub fn localized_probes(
    grid: &Grid,
    axis: Axis,
    center: f64,
    cfg: &ProbeConfig,
    center_index: usize,
) -> Result<Vec<Probe>> {
    let delta = cfg.delta;
    let quantum = grid.hbar * PI / delta;
    let mut probes = Vec::new();
    for kind in &cfg.kinds {
        match kind {
            ProbeKind::Flat => {
                probes.push(Probe { id: "flat".into(), state: window_state(grid, axis, center, delta, 0.0)? })
            }
            ProbeKind::PhaseRamped => {
                let limit = match axis {
                    Axis::Position => grid.p_max(),
                    Axis::Momentum => grid.extent() / 4.0,
                };
                let steps = (limit / quantum).floor() as i64;
                for k in (-steps..=steps).filter(|k| *k != 0) {
                    let shift = k as f64 * quantum;
                    probes.push(Probe {
                        id: format!("ramp{k:+}"),
                        state: window_state(grid, axis, center, delta, shift)?,
                    });
                }
            }
            ProbeKind::RandomEnvelope => {
                for r in 0..cfg.probes_per_center {
                    let seed = cfg
                        .seed
                        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
                        .wrapping_add((center_index as u64) << 20)
                        .wrapping_add(r as u64);
                    let state: MixedState = match axis {
                        Axis::Position => {
                            make_random_localized(grid, center - delta / 2.0, center + delta / 2.0, seed)?
                        }
                        Axis::Momentum => make_random_momentum_localized(grid, center, delta, seed)?,
                    }
                    .into();
                    probes.push(Probe { id: format!("random{r}"), state });
                }
            }
        }
    }
    for p in &probes {
        let law = match axis {
            Axis::Position => p.state.position_distribution(),
            Axis::Momentum => p.state.momentum_distribution(),
        };
        let slack = 1e-9 * axis_step(grid, axis);
        let inside = law.mass_between(center - delta / 2.0 - slack, center + delta / 2.0 + slack);
        let leak = 1.0 - inside;
        if leak > LEAK_TOL {
            return Err(Error::Internal(format!("probe {} at {center} leaks mass {leak:e} outside its window", p.id)));
        }
    }
    Ok(probes)
}

fn window_state(grid: &Grid, axis: Axis, center: f64, delta: f64, shift: f64) -> Result<MixedState> {
    Ok(match axis {
        Axis::Position => make_box(grid, center, delta, shift)?,
        Axis::Momentum => make_momentum_box(grid, center, delta, shift)?,
    }
    .into())
}

/// State whose sharp law on `axis` is a single atom at the lattice point nearest `x`.
pub fn point_probe(grid: &Grid, axis: Axis, x: f64) -> Result<MixedState> {
    Ok(match axis {
        Axis::Position => make_point(grid, x)?,
        Axis::Momentum => make_momentum_point(grid, x)?,
    }
    .into())
}

/// Captured-mass target `1 - eps`, lowered by the measure mass tolerance.
pub(crate) fn target_mass(eps: f64) -> f64 {
    1.0 - eps - MASS_TOL
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probes_are_localized() {
        let g = Grid::symmetric(16.0, 512, 1.0).unwrap();
        for axis in [Axis::Position, Axis::Momentum] {
            let step = axis_step(&g, axis);
            for delta in [2.0 * step, 8.0 * step] {
                let cfg = ProbeConfig::new(&g, axis, 0.1, delta);
                cfg.validate(&g, axis).unwrap();
                for (i, c) in cfg.x_samples.iter().enumerate() {
                    let probes = localized_probes(&g, axis, *c, &cfg, i).unwrap();
                    assert!(probes.len() >= 4);
                }
            }
        }
    }

    #[test]
    fn validation() {
        let g = Grid::symmetric(16.0, 512, 1.0).unwrap();
        let cfg = ProbeConfig::new(&g, Axis::Position, 0.1, g.dx);
        assert!(cfg.validate(&g, Axis::Position).is_err());
        let mut cfg = ProbeConfig::new(&g, Axis::Position, 0.1, 2.0 * g.dx);
        cfg.probes_per_center = 2;
        assert!(cfg.validate(&g, Axis::Position).is_err());
        let cfg = ProbeConfig::new(&g, Axis::Position, 1.0, 2.0 * g.dx);
        assert!(cfg.validate(&g, Axis::Position).is_err());
    }
}
