//! Ground state of `H = |Q|^α + |P|^β` with ħ = 1.
//!
//! Imaginary-time split-step propagation brings a Gaussian start close to the
//! ground state; a preconditioned locally optimal block iteration (three-vector
//! Rayleigh–Ritz) then drives the residual `‖Hψ − gψ‖` below the tolerance,
//! which the split-step alone cannot do because of its `O(dt²)` bias.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::{Grid, WaveFunction};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundStateOptions {
    /// Target residual `‖Hψ − gψ‖` (L² norm on the grid).
    pub tol: f64,
    pub max_iterations: usize,
    /// Largest admissible probability density `|ψ|²` at either grid end.
    pub boundary_limit: f64,
    pub initial_step: f64,
}

impl Default for GroundStateOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iterations: 2000, boundary_limit: 1e-8, initial_step: 0.05 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundState {
    pub energy: f64,
    pub state: WaveFunction,
    pub residual: f64,
    pub propagation_steps: usize,
    pub refinement_iterations: usize,
    pub final_step: f64,
    pub boundary_density: f64,
}

/// Lowest eigenvalue and eigenvector of the grid discretization of
/// `|x|^α + |p|^β`. The grid's ħ is ignored; the result lives on a copy with ħ = 1.
pub fn ground_state(alpha: f64, beta: f64, grid: &Grid, tol: f64) -> Result<GroundState> {
    ground_state_with(alpha, beta, grid, &GroundStateOptions { tol, ..Default::default() })
}

pub fn ground_state_with(alpha: f64, beta: f64, grid: &Grid, opts: &GroundStateOptions) -> Result<GroundState> {
    if !(alpha >= 1.0) || !(beta >= 1.0) || !alpha.is_finite() || !beta.is_finite() {
        return Err(Error::domain(format!("exponents must be finite and >= 1, got ({alpha}, {beta})")));
    }
    if !grid.is_symmetric() && !grid.is_zero_centered() {
        return Err(Error::domain("ground-state solver needs a grid symmetric about 0"));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::domain("tolerance must be positive"));
    }
    let grid = grid.with_hbar(1.0)?;
    let op = Hamiltonian::new(&grid, alpha, beta);

    let mut psi: Vec<f64> = grid.positions().iter().map(|x| (-0.5 * x * x).exp()).collect();
    op.normalize(&mut psi);
    let (steps, dt) = op.propagate(&mut psi, opts.initial_step, opts.max_iterations * 10);
    let (energy, residual, iterations) = op.refine(&mut psi, opts.tol, opts.max_iterations)?;

    // fix the sign so the state is positive at the origin
    if psi[grid.n / 2] < 0.0 {
        psi.iter_mut().for_each(|v| *v = -*v);
    }
    let boundary_density = psi[0].powi(2).max(psi[grid.n - 1].powi(2));
    if boundary_density > opts.boundary_limit {
        return Err(Error::GridTooSmall { boundary: boundary_density, limit: opts.boundary_limit });
    }
    let amps = psi.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    Ok(GroundState {
        energy,
        state: WaveFunction::normalized(grid, amps)?,
        residual,
        propagation_steps: steps,
        refinement_iterations: iterations,
        final_step: dt,
        boundary_density,
    })
}

struct Hamiltonian {
    dx: f64,
    potential: Vec<f64>,
    /// `|p_k|^β` in FFT order.
    kinetic: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Hamiltonian {
    fn new(grid: &Grid, alpha: f64, beta: f64) -> Self {
        let n = grid.n;
        let dp = grid.dp();
        let kinetic = (0..n)
            .map(|k| {
                let kt = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
                (kt * dp).abs().powf(beta)
            })
            .collect();
        let mut planner = FftPlanner::new();
        Self {
            dx: grid.dx,
            potential: grid.positions().iter().map(|x| x.abs().powf(alpha)).collect(),
            kinetic,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    fn n(&self) -> usize {
        self.potential.len()
    }

    /// `F⁻¹ diag(f(T_k)) F v` for real `v`.
    fn momentum_multiply(&self, v: &[f64], f: impl Fn(f64) -> f64) -> Vec<f64> {
        let n = self.n();
        let mut buf: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.forward.process(&mut buf);
        for (z, t) in buf.iter_mut().zip(&self.kinetic) {
            *z *= f(*t);
        }
        self.inverse.process(&mut buf);
        buf.iter().map(|z| z.re / n as f64).collect()
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = self.momentum_multiply(v, |t| t);
        for ((o, p), x) in out.iter_mut().zip(&self.potential).zip(v) {
            *o += p * x;
        }
        out
    }

    fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() * self.dx
    }

    fn normalize(&self, v: &mut [f64]) -> f64 {
        let norm = self.dot(v, v).sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        norm
    }

    fn rayleigh(&self, v: &[f64]) -> f64 {
        self.dot(v, &self.apply(v)) / self.dot(v, v)
    }

    /// Strang-split imaginary-time steps; the step halves whenever the
    /// Rayleigh quotient rises. Stops once a block of steps changes the
    /// energy by less than 1e-7 relative.
    fn propagate(&self, psi: &mut Vec<f64>, dt0: f64, max_steps: usize) -> (usize, f64) {
        const BLOCK: usize = 10;
        let mut dt = dt0;
        let mut energy = self.rayleigh(psi);
        let mut steps = 0;
        while steps < max_steps {
            let half_v: Vec<f64> = self.potential.iter().map(|v| (-0.5 * dt * v).exp()).collect();
            let mut trial = psi.clone();
            for _ in 0..BLOCK {
                trial.iter_mut().zip(&half_v).for_each(|(x, h)| *x *= h);
                trial = self.momentum_multiply(&trial, |t| (-dt * t).exp());
                trial.iter_mut().zip(&half_v).for_each(|(x, h)| *x *= h);
                self.normalize(&mut trial);
            }
            steps += BLOCK;
            let next = self.rayleigh(&trial);
            if next > energy {
                dt /= 2.0;
                if dt < 1e-6 {
                    break;
                }
                continue;
            }
            *psi = trial;
            let change = energy - next;
            energy = next;
            if change < 1e-7 * energy.abs().max(1.0) {
                break;
            }
        }
        (steps, dt)
    }

    /// Preconditioned three-term Rayleigh–Ritz iteration.
    fn refine(&self, psi: &mut Vec<f64>, tol: f64, max_iterations: usize) -> Result<(f64, f64, usize)> {
        self.normalize(psi);
        let mut prev: Option<Vec<f64>> = None;
        let mut residual = f64::INFINITY;
        for it in 0..max_iterations {
            let h_psi = self.apply(psi);
            let energy = self.dot(psi, &h_psi);
            let r: Vec<f64> = h_psi.iter().zip(psi.iter()).map(|(h, x)| h - energy * x).collect();
            residual = self.dot(&r, &r).sqrt();
            if residual < tol {
                return Ok((energy, residual, it));
            }
            let shift = energy.abs().max(1.0);
            let w = self.momentum_multiply(&r, |t| 1.0 / (t + shift));

            let mut basis = vec![psi.clone()];
            for cand in std::iter::once(w).chain(prev.take()) {
                if let Some(v) = self.orthonormalized(cand, &basis) {
                    basis.push(v);
                }
            }
            let images: Vec<Vec<f64>> = basis.iter().map(|b| self.apply(b)).collect();
            let k = basis.len();
            let projected = DMatrix::from_fn(k, k, |i, j| {
                0.5 * (self.dot(&basis[i], &images[j]) + self.dot(&basis[j], &images[i]))
            });
            let eig = SymmetricEigen::new(projected);
            let lowest = eig.eigenvalues.imin();
            let c = eig.eigenvectors.column(lowest);

            let mut next = vec![0.0; self.n()];
            let mut direction = vec![0.0; self.n()];
            for (i, b) in basis.iter().enumerate() {
                for (idx, v) in b.iter().enumerate() {
                    next[idx] += c[i] * v;
                    if i > 0 {
                        direction[idx] += c[i] * v;
                    }
                }
            }
            self.normalize(&mut next);
            *psi = next;
            prev = Some(direction);
        }
        Err(Error::Convergence { iterations: max_iterations, residual })
    }

    /// Gram–Schmidt (twice) against an orthonormal basis; `None` if nothing is left.
    fn orthonormalized(&self, mut v: Vec<f64>, basis: &[Vec<f64>]) -> Option<Vec<f64>> {
        let start = self.dot(&v, &v).sqrt();
        if !(start > 0.0) {
            return None;
        }
        for _ in 0..2 {
            for b in basis {
                let c = self.dot(&v, b);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let norm = self.dot(&v, &v).sqrt();
        if norm < 1e-10 * start {
            return None;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        Some(v)
    }
}
