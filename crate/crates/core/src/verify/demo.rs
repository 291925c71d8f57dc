//! A phase-space observable whose position marginal is sharp, and the escape
//! of its momentum marginal under momentum boosts.
//!
//! The momentum marginal is a function of `Q`: outcome `κq + s·Z` with `Z`
//! standard normal, realized as the pushforward of `Q` smeared by
//! `N(0, (s/κ)²)` under `x ↦ κx`. Boosting a probe in momentum leaves its
//! position law, and hence this marginal's output, unchanged.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{GridMeasure, MonotoneTable, PointMap};
use crate::observables::ObservableModel;
use crate::state::{make_momentum_cosine, Grid, MixedState, PhasePoint};
use crate::transport::wasserstein;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceDemo {
    pub grid: Grid,
    pub kappa: f64,
    pub spread: f64,
    /// Width of the momentum window holding the unboosted probe.
    pub delta: f64,
    pub boosts: Vec<f64>,
    pub windows: Vec<f64>,
    pub eps2: f64,
}

impl DivergenceDemo {
    pub fn new(hbar: f64) -> Result<Self> {
        Ok(Self {
            grid: Grid::symmetric(32.0 * std::f64::consts::PI, 2048, hbar)?,
            kappa: 0.25,
            spread: 0.5,
            delta: 1.0,
            boosts: vec![0.0, 4.0, 8.0, 16.0],
            windows: vec![1.0, 2.0, 4.0],
            eps2: 0.25,
        })
    }

    /// The momentum marginal `M₂` as an observable model.
    pub fn momentum_marginal(&self) -> Result<ObservableModel> {
        let sd = self.spread / self.kappa;
        let noise = GridMeasure::gaussian(0.0, sd, self.grid.dx, 8.0 * sd)?;
        let scale = MonotoneTable::new(vec![0.0, 1.0], vec![0.0, self.kappa])?;
        ObservableModel::pushforward(ObservableModel::SmearedQ(noise), PointMap::Table(scale))
    }

    fn boosted(&self, probe: &MixedState, p: f64) -> Result<MixedState> {
        let dp = self.grid.dp();
        probe.weyl_translate(PhasePoint::new(0.0, (p / dp).round() * dp))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowCapture {
    pub boost: f64,
    pub window: f64,
    /// `M₂` output mass in `[boost − window/2, boost + window/2]`.
    pub mass: f64,
}

/// Tent `h_n(p) = max(0, n − |p − c_n − n|)` with `c_n` the `1 − 1/n²`
/// quantile of the `M₂` output; `lower_bound = ∫h_n dρ^P − ∫h_n dρ^{M₂}`
/// bounds `D₁` from below because `h_n` is 1-Lipschitz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TentWitness {
    pub n: f64,
    pub c_n: f64,
    pub peak: f64,
    pub state_term: f64,
    pub observable_term: f64,
    pub lower_bound: f64,
    pub wasserstein: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceTrace {
    pub demo: DivergenceDemo,
    pub captures: Vec<WindowCapture>,
    pub tents: Vec<TentWitness>,
    /// Captured mass is nonincreasing along the positive boosts for every window.
    pub monotone_escape: bool,
    /// At the largest boost every window captures less than `1 − eps2`.
    pub escaped: bool,
    /// Every tent bound is at least `n − 1`.
    pub linear_growth: bool,
}

pub fn demonstrate_sharp_marginal_divergence(demo: &DivergenceDemo) -> Result<DivergenceTrace> {
    if !(demo.eps2 > 0.0 && demo.eps2 < 0.5) {
        return Err(Error::domain(format!("eps2 {} outside (0, 1/2)", demo.eps2)));
    }
    if demo.boosts.is_empty() || demo.windows.is_empty() {
        return Err(Error::domain("demonstration needs boosts and windows"));
    }
    let grid = &demo.grid;
    let m2 = demo.momentum_marginal()?;
    let probe: MixedState = make_momentum_cosine(grid, 0.0, demo.delta)?.into();
    let out = m2.distribution(&probe)?;

    let mut captures = Vec::new();
    for &n in &demo.boosts {
        let state = demo.boosted(&probe, n)?;
        let law = m2.distribution(&state)?;
        for &w in &demo.windows {
            captures.push(WindowCapture { boost: n, window: w, mass: law.mass_between(n - w / 2.0, n + w / 2.0) });
        }
    }

    let mut tents = Vec::new();
    for &n in demo.boosts.iter().filter(|&&n| n >= 1.0) {
        let c_n = out.quantile(1.0 - 1.0 / (n * n))?;
        let peak = c_n + n;
        if peak + demo.delta >= grid.p_max() {
            return Err(Error::domain(format!(
                "tent peak {peak} does not fit below the Nyquist momentum {}",
                grid.p_max()
            )));
        }
        let state = demo.boosted(&probe, peak)?;
        let tent = |p: f64| (n - (p - peak).abs()).max(0.0);
        let integrate = |m: &GridMeasure| m.iter().map(|(p, w)| w * tent(p)).sum::<f64>();
        let sharp = state.momentum_distribution();
        let state_term = integrate(&sharp);
        let observable_term = integrate(&m2.distribution(&state)?);
        tents.push(TentWitness {
            n,
            c_n,
            peak,
            state_term,
            observable_term,
            lower_bound: state_term - observable_term,
            wasserstein: wasserstein(&m2.distribution(&state)?, &sharp, 1.0)?,
        });
    }

    let positive: Vec<f64> = demo.boosts.iter().copied().filter(|&n| n > 0.0).collect();
    let mass_at = |n: f64, w: f64| captures.iter().find(|c| c.boost == n && c.window == w).map_or(f64::NAN, |c| c.mass);
    let monotone_escape =
        demo.windows.iter().all(|&w| positive.windows(2).all(|p| p[0] > p[1] || mass_at(p[1], w) <= mass_at(p[0], w)));
    let top = demo.boosts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let escaped = demo.windows.iter().all(|&w| mass_at(top, w) < 1.0 - demo.eps2);
    let linear_growth = tents.iter().all(|t| t.lower_bound >= t.n - 1.0);
    Ok(DivergenceTrace { demo: demo.clone(), captures, tents, monotone_escape, escaped, linear_growth })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn momentum_marginal_escapes_boosted_windows() {
        let demo = DivergenceDemo::new(1.0).unwrap();
        let trace = demonstrate_sharp_marginal_divergence(&demo).unwrap();
        assert!(trace.monotone_escape && trace.escaped, "{:#?}", trace.captures);
        let unboosted = trace.captures.iter().find(|c| c.boost == 0.0 && c.window == 4.0).unwrap();
        assert!(unboosted.mass > 0.9, "{}", unboosted.mass);
        let last = trace.captures.iter().filter(|c| c.boost == 16.0).map(|c| c.mass).fold(0.0, f64::max);
        assert!(last < 1e-4, "{:#?}", trace.captures);
    }

    #[test]
    fn tent_bounds_grow_linearly() {
        let trace = demonstrate_sharp_marginal_divergence(&DivergenceDemo::new(1.0).unwrap()).unwrap();
        assert_eq!(trace.tents.len(), 3);
        for t in &trace.tents {
            assert!(t.lower_bound >= t.n - 1.0, "{t:?}");
            assert!(t.observable_term <= 1.0 / t.n + 1e-12);
            assert!(t.wasserstein >= t.lower_bound - 1e-9);
        }
        assert!(trace.linear_growth);
    }

    #[test]
    fn rejects_bad_parameters() {
        let mut demo = DivergenceDemo::new(1.0).unwrap();
        demo.eps2 = 0.6;
        assert!(demonstrate_sharp_marginal_divergence(&demo).is_err());
        let mut demo = DivergenceDemo::new(1.0).unwrap();
        demo.boosts = vec![40.0];
        assert!(demonstrate_sharp_marginal_divergence(&demo).is_err());
    }
}
