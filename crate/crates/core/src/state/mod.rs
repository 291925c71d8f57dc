//! Discretized pure and mixed states on a uniform spatial grid.

mod factory;
mod grid;
pub(crate) mod ground;
pub mod io;

pub use factory::{
    make_box, make_gaussian, make_hermite, make_momentum_box, make_momentum_cosine, make_momentum_point, make_point,
    make_random_localized, make_random_momentum_localized, test_ensemble,
};
pub use grid::{Grid, Spectral};
pub use ground::{ground_state, ground_state_with, GroundState, GroundStateOptions};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::GridMeasure;

/// Normalization tolerance of a [`WaveFunction`].
pub const NORM_TOL: f64 = 1e-9;

/// Largest probability mass that may be pushed off the grid by a translation.
pub const WRAP_TOL: f64 = 1e-9;

/// Normalized amplitudes `ψ(x_j)` with `Σ|ψ_j|² dx = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveFunction {
    grid: Grid,
    amps: Vec<Complex64>,
}

impl WaveFunction {
    pub fn new(grid: Grid, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != grid.n {
            return Err(Error::domain(format!("{} amplitudes for a grid of {}", amps.len(), grid.n)));
        }
        let norm = norm_sq(&amps, grid.dx);
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::domain(format!("wave function has norm² {norm}")));
        }
        Ok(Self { grid, amps })
    }

    /// Rescales `amps` to unit norm.
    pub fn normalized(grid: Grid, mut amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != grid.n {
            return Err(Error::domain(format!("{} amplitudes for a grid of {}", amps.len(), grid.n)));
        }
        let norm = norm_sq(&amps, grid.dx);
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::domain("cannot normalize a zero or non-finite amplitude array"));
        }
        let s = norm.sqrt().recip();
        amps.iter_mut().for_each(|z| *z *= s);
        Ok(Self { grid, amps })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sq(&self) -> f64 {
        norm_sq(&self.amps, self.grid.dx)
    }

    /// `⟨self|other⟩ = Σ conj(ψ_j) φ_j dx`.
    pub fn inner(&self, other: &WaveFunction) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum::<Complex64>() * self.grid.dx
    }

    pub fn momentum_amplitudes(&self) -> Vec<Complex64> {
        Spectral::new(&self.grid).to_momentum(&self.amps)
    }

    /// Same state with ħ relabelled; amplitudes are unchanged.
    pub fn with_hbar(&self, hbar: f64) -> Result<Self> {
        Ok(Self { grid: self.grid.with_hbar(hbar)?, amps: self.amps.clone() })
    }

    fn position_weights(&self) -> Vec<f64> {
        self.amps.iter().map(|z| z.norm_sqr() * self.grid.dx).collect()
    }

    fn momentum_weights(&self, spectral: &Spectral) -> Vec<f64> {
        let dp = self.grid.dp();
        spectral.to_momentum(&self.amps).iter().map(|z| z.norm_sqr() * dp).collect()
    }

    fn weyl(&self, q: f64, p: f64, spectral: &Spectral) -> Result<Self> {
        let g = &self.grid;
        let hbar = g.hbar;
        if q.abs() >= g.extent() {
            return Err(Error::domain(format!("translation {q} exceeds the grid extent {}", g.extent())));
        }
        let boosted: Vec<Complex64> =
            self.amps.iter().enumerate().map(|(j, z)| z * Complex64::from_polar(1.0, p * g.x(j) / hbar)).collect();
        let cells = (q / g.dx).round() as i64;
        let n = g.n as i64;
        let lost: f64 =
            (0..n).filter(|j| !(0..n).contains(&(j + cells))).map(|j| boosted[j as usize].norm_sqr() * g.dx).sum();
        if lost > WRAP_TOL {
            return Err(Error::domain(format!("translation by {q} pushes mass {lost:e} off the grid")));
        }
        let mut shifted = vec![Complex64::new(0.0, 0.0); g.n];
        for j in 0..n {
            let src = j - cells;
            if (0..n).contains(&src) {
                shifted[j as usize] = boosted[src as usize];
            }
        }
        let residual = q - cells as f64 * g.dx;
        if residual != 0.0 {
            shifted = spectral.apply_multiplier(&shifted, |pk| Complex64::from_polar(1.0, -pk * residual / hbar));
        }
        let phase = Complex64::from_polar(1.0, q * p / (2.0 * hbar));
        shifted.iter_mut().for_each(|z| *z *= phase);
        Self::normalized(*g, shifted)
    }
}

fn norm_sq(amps: &[Complex64], dx: f64) -> f64 {
    amps.iter().map(|z| z.norm_sqr()).sum::<f64>() * dx
}

/// Point `(q, p)` of phase space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub q: f64,
    pub p: f64,
}

impl PhasePoint {
    pub fn new(q: f64, p: f64) -> Self {
        Self { q, p }
    }
}

/// Finite convex combination of wave functions on one grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedState {
    components: Vec<(f64, WaveFunction)>,
}

impl MixedState {
    pub fn new(components: Vec<(f64, WaveFunction)>) -> Result<Self> {
        let first = components.first().ok_or_else(|| Error::domain("mixed state needs a component"))?;
        let grid = first.1.grid;
        let mut total = 0.0;
        for (w, psi) in &components {
            if !(*w > 0.0) {
                return Err(Error::domain(format!("mixture weight {w} is not positive")));
            }
            psi.grid.require_compatible(&grid)?;
            total += w;
        }
        if (total - 1.0).abs() > crate::measure::MASS_TOL {
            return Err(Error::domain(format!("mixture weights sum to {total}")));
        }
        Ok(Self { components })
    }

    /// Mixture with weights rescaled to sum to one.
    pub fn mixture(components: Vec<(f64, WaveFunction)>) -> Result<Self> {
        let total: f64 = components.iter().map(|(w, _)| w).sum();
        if !(total > 0.0) {
            return Err(Error::domain("mixture weights must have positive sum"));
        }
        Self::new(components.into_iter().map(|(w, psi)| (w / total, psi)).collect())
    }

    pub fn pure(psi: WaveFunction) -> Self {
        Self { components: vec![(1.0, psi)] }
    }

    pub fn grid(&self) -> &Grid {
        &self.components[0].1.grid
    }

    pub fn components(&self) -> &[(f64, WaveFunction)] {
        &self.components
    }

    pub fn is_pure(&self) -> bool {
        self.components.len() == 1
    }

    pub fn with_hbar(&self, hbar: f64) -> Result<Self> {
        let components =
            self.components.iter().map(|(w, psi)| Ok((*w, psi.with_hbar(hbar)?))).collect::<Result<_>>()?;
        Ok(Self { components })
    }

    /// Position law: atoms at the grid points, weights `Σ_k w_k |ψ_k(x_j)|² dx`.
    pub fn position_distribution(&self) -> GridMeasure {
        let mut weights = vec![0.0; self.grid().n];
        for (w, psi) in &self.components {
            for (acc, v) in weights.iter_mut().zip(psi.position_weights()) {
                *acc += w * v;
            }
        }
        GridMeasure::normalized(self.grid().positions(), weights).expect("grid atoms are increasing")
    }

    /// Momentum law on the centered momentum lattice.
    pub fn momentum_distribution(&self) -> GridMeasure {
        let spectral = Spectral::new(self.grid());
        let mut weights = vec![0.0; self.grid().n];
        for (w, psi) in &self.components {
            for (acc, v) in weights.iter_mut().zip(psi.momentum_weights(&spectral)) {
                *acc += w * v;
            }
        }
        GridMeasure::normalized(self.grid().momenta(), weights).expect("momentum atoms are increasing")
    }

    /// `W(q,p) = e^{iqp/2ħ} e^{-iqP/ħ} e^{ipQ/ħ}` applied to every component.
    ///
    /// The position shift moves whole cells; the sub-cell remainder is a
    /// momentum-space phase ramp. Mass pushed off the grid is a domain error.
    pub fn weyl_translate(&self, pt: PhasePoint) -> Result<Self> {
        let spectral = Spectral::new(self.grid());
        let components =
            self.components.iter().map(|(w, psi)| Ok((*w, psi.weyl(pt.q, pt.p, &spectral)?))).collect::<Result<_>>()?;
        Ok(Self { components })
    }

    /// `ψ(x) ↦ ψ(-x)`; the grid must be symmetric about 0.
    pub fn parity(&self) -> Result<Self> {
        if !self.grid().is_symmetric() {
            return Err(Error::domain("parity needs a grid symmetric about 0"));
        }
        let components = self
            .components
            .iter()
            .map(|(w, psi)| {
                let amps = psi.amps.iter().rev().copied().collect();
                (*w, WaveFunction { grid: psi.grid, amps })
            })
            .collect();
        Ok(Self { components })
    }
}

impl From<WaveFunction> for MixedState {
    fn from(psi: WaveFunction) -> Self {
        Self::pure(psi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::symmetric(16.0, 2048, 1.0).unwrap()
    }

    #[test]
    fn rejects_unnormalized() {
        let g = Grid::symmetric(4.0, 64, 1.0).unwrap();
        assert!(WaveFunction::new(g, vec![Complex64::new(1.0, 0.0); 64]).is_err());
        assert!(WaveFunction::normalized(g, vec![Complex64::new(0.0, 0.0); 64]).is_err());
        assert!(WaveFunction::normalized(g, vec![Complex64::new(1.0, 0.0); 64]).is_ok());
    }

    #[test]
    fn box_position_law() {
        let g = grid();
        let s = MixedState::pure(make_box(&g, 0.0, 1.0, 0.0).unwrap());
        let law = s.position_distribution();
        for (x, w) in law.iter() {
            if x.abs() > 0.5 {
                assert_eq!(w, 0.0);
            }
        }
        let inside: Vec<f64> = law.iter().filter(|(x, _)| x.abs() <= 0.5).map(|(_, w)| w).collect();
        let first = inside[0];
        assert!(inside.iter().all(|w| (w - first).abs() < 1e-12));
    }

    #[test]
    fn gaussian_spreads() {
        let g = grid();
        let s = MixedState::pure(make_gaussian(&g, 0.0, 0.0, 1.0).unwrap());
        assert!((s.position_distribution().std_deviation() - 1.0).abs() < 1e-4);
        let s = MixedState::pure(make_gaussian(&g, 0.0, 0.0, 0.5f64.sqrt()).unwrap());
        assert!((s.momentum_distribution().std_deviation() - 0.5f64.sqrt()).abs() < 1e-4);
        for sigma in [0.5, 1.0, 2.0] {
            let s = MixedState::pure(make_gaussian(&g, 0.0, 0.0, sigma).unwrap());
            let prod = s.position_distribution().std_deviation() * s.momentum_distribution().std_deviation();
            assert!((prod - 0.5).abs() < 1e-4, "sigma {sigma}: {prod}");
        }
    }

    #[test]
    fn symmetric_mixture_has_zero_mean() {
        let g = grid();
        let s = MixedState::mixture(vec![
            (0.5, make_box(&g, -2.0, 0.5, 0.0).unwrap()),
            (0.5, make_box(&g, 2.0, 0.5, 0.0).unwrap()),
        ])
        .unwrap();
        assert!(s.position_distribution().mean().abs() < 1e-9);
    }

    #[test]
    fn weyl_identity_and_shifts() {
        let g = grid();
        let s = MixedState::pure(make_gaussian(&g, 0.0, 0.0, 1.0).unwrap());
        let same = s.weyl_translate(PhasePoint::new(0.0, 0.0)).unwrap();
        for (a, b) in s.components()[0].1.amplitudes().iter().zip(same.components()[0].1.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
        let moved = s.weyl_translate(PhasePoint::new(2.37, 0.0)).unwrap();
        assert!((moved.position_distribution().mean() - 2.37).abs() < g.dx);
        let boosted = s.weyl_translate(PhasePoint::new(0.0, 1.3)).unwrap();
        assert!((boosted.momentum_distribution().mean() - 1.3).abs() < 1e-4);
        let (a, b) = (s.position_distribution(), boosted.position_distribution());
        for (wa, wb) in a.weights().iter().zip(b.weights()) {
            assert!((wa - wb).abs() < 1e-15);
        }
    }

    #[test]
    fn weyl_rejects_wrap() {
        let g = Grid::symmetric(8.0, 256, 1.0).unwrap();
        let s = MixedState::pure(make_gaussian(&g, 0.0, 0.0, 1.0).unwrap());
        assert!(s.weyl_translate(PhasePoint::new(7.5, 0.0)).is_err());
        assert!(s.weyl_translate(PhasePoint::new(20.0, 0.0)).is_err());
    }

    #[test]
    fn weyl_covariance_of_laws() {
        let g = grid();
        let s = MixedState::pure(make_random_localized(&g, -1.0, 1.5, 3).unwrap());
        let q = 12.0 * g.dx;
        let moved = s.weyl_translate(PhasePoint::new(q, 0.0)).unwrap().position_distribution();
        let expected = s.position_distribution().translate(q);
        for (x, w) in moved.iter() {
            assert!((w - expected.mass_between(x - g.dx / 2.0, x + g.dx / 2.0)).abs() < 1e-9);
        }
        let p = 7.0 * g.dp();
        let boosted = s.weyl_translate(PhasePoint::new(0.0, p)).unwrap().momentum_distribution();
        let expected = s.momentum_distribution();
        let k = 7;
        for j in k..g.n {
            assert!((boosted.weights()[j] - expected.weights()[j - k]).abs() < 1e-9);
        }
    }

    #[test]
    fn parity_reflects() {
        let g = grid();
        let even = MixedState::pure(make_gaussian(&g, 0.0, 0.0, 1.3).unwrap());
        let flipped = even.parity().unwrap();
        for (a, b) in even.components()[0].1.amplitudes().iter().zip(flipped.components()[0].1.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
        let boxed = MixedState::pure(make_box(&g, 3.0, 1.0, 0.0).unwrap());
        assert!((boxed.parity().unwrap().position_distribution().mean() + 3.0).abs() < 1e-9);
        assert_eq!(boxed.parity().unwrap().parity().unwrap(), boxed);
        let skew = Grid::new(0.0, 0.1, 64, 1.0).unwrap();
        let s = MixedState::pure(make_gaussian(&skew, 3.2, 0.0, 0.5).unwrap());
        assert!(s.parity().is_err());
    }

    #[test]
    fn parseval_over_ensemble() {
        let g = Grid::symmetric(20.0, 1024, 1.0).unwrap();
        for s in test_ensemble(&g, 11, 40).unwrap() {
            let total_p: f64 = s.momentum_distribution().weights().iter().sum();
            assert!((total_p - 1.0).abs() < 1e-9);
            let mut raw = 0.0;
            for (w, psi) in s.components() {
                raw += w * psi.momentum_amplitudes().iter().map(|z| z.norm_sqr()).sum::<f64>() * g.dp();
            }
            assert!((raw - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn preparation_ur_over_ensemble() {
        for hbar in [1.0, 0.5] {
            let g = Grid::symmetric(20.0, 1024, hbar).unwrap();
            for s in test_ensemble(&g, 5, 60).unwrap() {
                let dq = s.position_distribution().std_deviation();
                let dp = s.momentum_distribution().std_deviation();
                assert!(dq * dp >= hbar / 2.0 - 1e-6, "{dq} * {dp}");
            }
        }
    }
}
