//! Joint (q, p) outcome table of a covariant phase-space observable.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{covariant_marginals, MAX_TAU_COMPONENTS};
use crate::error::{Error, Result};
use crate::measure::{convolve, GridMeasure};
use crate::state::MixedState;

/// Marginal mismatch above which a lattice is rejected as too coarse.
pub const LATTICE_TV_LIMIT: f64 = 1e-2;

/// Sampling of phase space: every `q_stride`-th position shift and every
/// `p_stride`-th momentum bin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseLattice {
    pub q_stride: usize,
    pub p_stride: usize,
}

impl Default for PhaseLattice {
    fn default() -> Self {
        Self { q_stride: 1, p_stride: 1 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JointTable {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    /// Row-major over `(q, p)`: cell probabilities.
    pub weights: Vec<f64>,
    /// Total variation between the row marginal and the smeared-position law.
    pub position_tv: f64,
    pub momentum_tv: f64,
}

impl JointTable {
    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.weights[i * self.p.len() + k]
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn position_marginal(&self) -> Vec<f64> {
        self.weights.chunks(self.p.len()).map(|row| row.iter().sum()).collect()
    }

    pub fn momentum_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.p.len()];
        for row in self.weights.chunks(self.p.len()) {
            out.iter_mut().zip(row).for_each(|(o, w)| *o += w);
        }
        out
    }
}

/// Phase-space density `(1/2πħ) tr[s W(q,p) τ W(q,p)*]` on the lattice,
/// weighted by the cell area. Its marginals are checked against the
/// smeared laws `ρ^Q * μ_τ` and `ρ^P * ν_τ`.
pub fn joint_covariant_distribution(tau: &MixedState, s: &MixedState, lattice: &PhaseLattice) -> Result<JointTable> {
    if tau.components().len() > MAX_TAU_COMPONENTS {
        return Err(Error::domain(format!("tau may have at most {MAX_TAU_COMPONENTS} components")));
    }
    if lattice.q_stride == 0 || lattice.p_stride == 0 {
        return Err(Error::domain("lattice strides must be positive"));
    }
    let grid = *s.grid();
    grid.require_compatible(tau.grid())?;
    let n = grid.n;
    let fft = FftPlanner::new().plan_fft_inverse(n);
    let shifts: Vec<i64> = (-(n as i64 - 1)..n as i64).step_by(lattice.q_stride).collect();
    let bins: Vec<usize> = (0..n).step_by(lattice.p_stride).collect();
    let cell = (lattice.q_stride as f64 * grid.dx) * (lattice.p_stride as f64 * grid.dp());
    let scale = grid.dx * grid.dx / (2.0 * PI * grid.hbar) * cell;

    let rows: Vec<Vec<f64>> = shifts
        .par_iter()
        .map(|&m| {
            let mut density = vec![0.0; n];
            let mut buf = vec![Complex64::new(0.0, 0.0); n];
            for (ws, psi) in s.components() {
                for (wt, phi) in tau.components() {
                    let (a, b) = (psi.amplitudes(), phi.amplitudes());
                    for (j, z) in buf.iter_mut().enumerate() {
                        let src = j as i64 - m;
                        *z = if (0..n as i64).contains(&src) {
                            a[j].conj() * b[src as usize]
                        } else {
                            Complex64::new(0.0, 0.0)
                        };
                    }
                    fft.process(&mut buf);
                    // FFT index k holds momentum k̃ = k (mod n); store in centered order
                    for (k, d) in density.iter_mut().enumerate() {
                        *d += ws * wt * buf[(k + n / 2) % n].norm_sqr();
                    }
                }
            }
            bins.iter().map(|&k| density[k] * scale).collect()
        })
        .collect();

    let q: Vec<f64> = shifts.iter().map(|&m| m as f64 * grid.dx).collect();
    let momenta = grid.momenta();
    let p: Vec<f64> = bins.iter().map(|&k| momenta[k]).collect();
    let mut table = JointTable { q, p, weights: rows.concat(), position_tv: 0.0, momentum_tv: 0.0 };

    let (mu, nu) = covariant_marginals(tau)?;
    let q_ref = convolve(&s.position_distribution(), &mu)?;
    let p_ref = convolve(&s.momentum_distribution(), &nu)?;
    table.position_tv = lattice_tv(&q_ref, &table.q, &table.position_marginal());
    table.momentum_tv = lattice_tv(&p_ref, &table.p, &table.momentum_marginal());
    let worst = table.position_tv.max(table.momentum_tv);
    if worst > LATTICE_TV_LIMIT {
        return Err(Error::Accuracy(format!("phase lattice too coarse: marginal mismatch {worst:.3e}")));
    }
    Ok(table)
}

/// Total variation between `reference`, binned to the nearest lattice point,
/// and the lattice weights `marginal` (renormalized).
fn lattice_tv(reference: &GridMeasure, lattice: &[f64], marginal: &[f64]) -> f64 {
    let step = if lattice.len() > 1 { lattice[1] - lattice[0] } else { 1.0 };
    let mut binned = vec![0.0; lattice.len()];
    for (x, w) in reference.iter() {
        let idx = ((x - lattice[0]) / step).round().clamp(0.0, (lattice.len() - 1) as f64) as usize;
        binned[idx] += w;
    }
    let total: f64 = marginal.iter().sum();
    0.5 * binned.iter().zip(marginal).map(|(a, b)| (a - b / total).abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{make_gaussian, make_random_localized, Grid};

    #[test]
    fn vacuum_husimi() {
        let g = Grid::symmetric(12.0, 256, 1.0).unwrap();
        let sigma = 0.5f64.sqrt();
        let vac: MixedState = make_gaussian(&g, 0.0, 0.0, sigma).unwrap().into();
        let t = joint_covariant_distribution(&vac, &vac, &PhaseLattice::default()).unwrap();
        assert!((t.total_mass() - 1.0).abs() < 1e-6);
        assert!(t.position_tv < 1e-3 && t.momentum_tv < 1e-3);
        let (mut vq, mut vp) = (0.0, 0.0);
        for (i, q) in t.q.iter().enumerate() {
            for (k, p) in t.p.iter().enumerate() {
                vq += t.get(i, k) * q * q;
                vp += t.get(i, k) * p * p;
            }
        }
        assert!((vq - 2.0 * sigma * sigma).abs() < 1e-4, "{vq}");
        assert!((vp - 2.0 / (4.0 * sigma * sigma)).abs() < 1e-4, "{vp}");
    }

    #[test]
    fn marginals_match_smeared_laws() {
        let g = Grid::symmetric(16.0, 256, 1.0).unwrap();
        let tau = MixedState::mixture(vec![
            (0.7, make_gaussian(&g, 0.5, 0.3, 0.8).unwrap()),
            (0.3, make_gaussian(&g, -0.5, 0.0, 1.2).unwrap()),
        ])
        .unwrap();
        let s: MixedState = make_random_localized(&g, -2.0, 1.0, 7).unwrap().into();
        let t = joint_covariant_distribution(&tau, &s, &PhaseLattice::default()).unwrap();
        assert!(t.weights.iter().all(|w| *w >= 0.0));
        assert!(t.position_tv < 1e-3 && t.momentum_tv < 1e-3, "{} {}", t.position_tv, t.momentum_tv);
    }

    #[test]
    fn coarse_lattice_is_rejected() {
        let g = Grid::symmetric(12.0, 256, 1.0).unwrap();
        let narrow: MixedState = make_gaussian(&g, 0.0, 0.0, 0.15).unwrap().into();
        let r = joint_covariant_distribution(&narrow, &narrow, &PhaseLattice { q_stride: 16, p_stride: 16 });
        assert!(matches!(r, Err(Error::Accuracy(_))));
    }
}
