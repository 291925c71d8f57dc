use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform spatial grid `x_j = x0 + j dx`, `j < n`, together with the value
/// of ħ that fixes the momentum scale `p = 2πħ k / (n dx)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x0: f64,
    pub dx: f64,
    pub n: usize,
    pub hbar: f64,
}

impl Grid {
    pub fn new(x0: f64, dx: f64, n: usize, hbar: f64) -> Result<Self> {
        if !n.is_power_of_two() || n < 2 {
            return Err(Error::domain(format!("grid size must be a power of two >= 2, got {n}")));
        }
        if !(dx > 0.0) || !dx.is_finite() || !x0.is_finite() {
            return Err(Error::domain(format!("invalid grid origin/spacing ({x0}, {dx})")));
        }
        if !(hbar > 0.0) || !hbar.is_finite() {
            return Err(Error::domain(format!("hbar must be positive, got {hbar}")));
        }
        Ok(Self { x0, dx, n, hbar })
    }

    /// Grid of `n` cells covering `[-half_extent, half_extent]`, symmetric about 0.
    pub fn symmetric(half_extent: f64, n: usize, hbar: f64) -> Result<Self> {
        let dx = 2.0 * half_extent / n as f64;
        Self::new(-(n as f64 - 1.0) * dx / 2.0, dx, n, hbar)
    }

    pub fn with_hbar(self, hbar: f64) -> Result<Self> {
        Self::new(self.x0, self.dx, self.n, hbar)
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x0 + j as f64 * self.dx
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    /// `n dx`.
    pub fn extent(&self) -> f64 {
        self.n as f64 * self.dx
    }

    /// Momentum spacing `2πħ / (n dx)`.
    pub fn dp(&self) -> f64 {
        2.0 * PI * self.hbar / self.extent()
    }

    /// Nyquist momentum `(n/2) dp`.
    pub fn p_max(&self) -> f64 {
        (self.n / 2) as f64 * self.dp()
    }

    /// Centered momentum index `k - n/2` for position `k` in centered order.
    pub fn k_centered(&self, k: usize) -> i64 {
        k as i64 - (self.n / 2) as i64
    }

    /// Momenta in centered order, `k̃ = -n/2 .. n/2 - 1`.
    pub fn momenta(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.k_centered(k) as f64 * self.dp()).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        (self.x0 + (self.n as f64 - 1.0) * self.dx / 2.0).abs() <= 1e-12 * self.extent()
    }

    /// `x0 = -(n/2) dx`: the lattice contains 0 and is mapped to itself by
    /// `x ↦ -x` modulo the period `n dx`, like the momentum lattice.
    pub fn is_zero_centered(&self) -> bool {
        (self.x0 + (self.n / 2) as f64 * self.dx).abs() <= 1e-12 * self.extent()
    }

    /// Index of the grid point closest to `x`, if `x` lies within half a cell of the grid.
    pub fn nearest_index(&self, x: f64) -> Option<usize> {
        let j = ((x - self.x0) / self.dx).round();
        (j >= 0.0 && j < self.n as f64).then_some(j as usize)
    }

    /// Centered-order index of the momentum bin closest to `p`.
    pub fn nearest_momentum_index(&self, p: f64) -> Option<usize> {
        let k = (p / self.dp()).round() + (self.n / 2) as f64;
        (k >= 0.0 && k < self.n as f64).then_some(k as usize)
    }

    /// Equal up to floating-point noise in the origin and spacing.
    pub fn compatible(&self, other: &Grid) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()));
        self.n == other.n && close(self.dx, other.dx) && close(self.x0, other.x0) && close(self.hbar, other.hbar)
    }

    pub(crate) fn require_compatible(&self, other: &Grid) -> Result<()> {
        if self.compatible(other) {
            Ok(())
        } else {
            Err(Error::domain(format!("incompatible grids {self:?} and {other:?}")))
        }
    }
}

/// Forward/inverse FFT plans of one length, with the unitary-on-the-grid
/// normalization `ψ̂(p_k) = dx/√(2πħ) Σ_j ψ_j e^{-i p_k x_j/ħ}`.
pub struct Spectral {
    grid: Grid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// `e^{-i p_k x0/ħ}` in centered order.
    origin_phase: Vec<Complex64>,
}

impl Spectral {
    pub fn new(grid: &Grid) -> Self {
        let mut planner = FftPlanner::new();
        let origin_phase =
            grid.momenta().iter().map(|p| Complex64::from_polar(1.0, -p * grid.x0 / grid.hbar)).collect();
        Self {
            grid: *grid,
            forward: planner.plan_fft_forward(grid.n),
            inverse: planner.plan_fft_inverse(grid.n),
            origin_phase,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Momentum amplitudes in centered order.
    pub fn to_momentum(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let n = self.grid.n;
        let mut buf = psi.to_vec();
        self.forward.process(&mut buf);
        let scale = self.grid.dx / (2.0 * PI * self.grid.hbar).sqrt();
        (0..n).map(|k| buf[(k + n / 2) % n] * self.origin_phase[k] * scale).collect()
    }

    /// Inverse of [`Spectral::to_momentum`].
    pub fn from_momentum(&self, phi: &[Complex64]) -> Vec<Complex64> {
        let n = self.grid.n;
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for k in 0..n {
            buf[(k + n / 2) % n] = phi[k] * self.origin_phase[k].conj();
        }
        self.inverse.process(&mut buf);
        let scale = self.grid.dp() / (2.0 * PI * self.grid.hbar).sqrt();
        buf.iter_mut().for_each(|z| *z *= scale);
        buf
    }

    /// Applies `f(p_k)` as a momentum-space multiplier.
    pub fn apply_multiplier(&self, psi: &[Complex64], f: impl Fn(f64) -> Complex64) -> Vec<Complex64> {
        let mut phi = self.to_momentum(psi);
        for (z, p) in phi.iter_mut().zip(self.grid.momenta()) {
            *z *= f(p);
        }
        self.from_momentum(&phi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_grid() {
        let g = Grid::symmetric(8.0, 256, 1.0).unwrap();
        assert!(g.is_symmetric());
        assert!((g.x(0) + g.x(255)).abs() < 1e-12);
        assert!((g.extent() - 16.0).abs() < 1e-12);
        assert!(!Grid::new(0.0, 0.1, 256, 1.0).unwrap().is_symmetric());
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid::new(0.0, 0.1, 100, 1.0).is_err());
        assert!(Grid::new(0.0, -0.1, 128, 1.0).is_err());
        assert!(Grid::new(0.0, 0.1, 128, 0.0).is_err());
    }

    #[test]
    fn momentum_axis() {
        let g = Grid::symmetric(8.0, 64, 2.0).unwrap();
        let p = g.momenta();
        assert_eq!(p[32], 0.0);
        assert!((p[0] + g.p_max()).abs() < 1e-12);
        assert!((g.dp() - 2.0 * PI * 2.0 / 16.0).abs() < 1e-12);
        assert_eq!(g.nearest_momentum_index(g.dp() * 3.2), Some(35));
    }

    #[test]
    fn transform_round_trip() {
        let g = Grid::new(-3.3, 0.07, 128, 1.3).unwrap();
        let s = Spectral::new(&g);
        let psi: Vec<Complex64> = (0..128).map(|j| Complex64::new((j as f64).sin(), (j as f64 * 0.3).cos())).collect();
        let back = s.from_momentum(&s.to_momentum(&psi));
        for (a, b) in psi.iter().zip(&back) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn plane_wave_lands_in_one_bin() {
        let g = Grid::new(-1.7, 0.05, 128, 1.0).unwrap();
        let s = Spectral::new(&g);
        let k = 70;
        let p = g.momenta()[k];
        let psi: Vec<Complex64> = g.positions().iter().map(|x| Complex64::from_polar(1.0, p * x)).collect();
        let phi = s.to_momentum(&psi);
        for (i, z) in phi.iter().enumerate() {
            if i == k {
                // the plane-wave coefficient is real and positive with this phase convention
                assert!(z.im.abs() < 1e-10 && z.re > 0.0);
            } else {
                assert!(z.norm() < 1e-10);
            }
        }
    }
}
