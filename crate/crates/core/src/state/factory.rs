//! Named families of test and probe states.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Grid, MixedState, Spectral, WaveFunction};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn require_inside(grid: &Grid, x: f64, what: &str) -> Result<()> {
    let (lo, hi) = (grid.x(0), grid.x(grid.n - 1));
    if x < lo || x > hi || !x.is_finite() {
        return Err(Error::domain(format!("{what} {x} outside the grid [{lo}, {hi}]")));
    }
    Ok(())
}

/// Indices of grid points in the closed interval `[lo, hi]`.
fn points_in(grid: &Grid, lo: f64, hi: f64) -> std::ops::Range<usize> {
    let slack = 1e-9 * grid.dx;
    let first = ((lo - slack - grid.x0) / grid.dx).ceil().max(0.0) as usize;
    let last = ((hi + slack - grid.x0) / grid.dx).floor();
    if last < 0.0 {
        return 0..0;
    }
    first..(last as usize + 1).min(grid.n)
}

/// Centered-order indices of momentum bins in `[lo, hi]`.
fn bins_in(grid: &Grid, lo: f64, hi: f64) -> std::ops::Range<usize> {
    let dp = grid.dp();
    let half = (grid.n / 2) as f64;
    let slack = 1e-9;
    let first = (lo / dp - slack + half).ceil().max(0.0) as usize;
    let last = (hi / dp + slack + half).floor();
    if last < 0.0 {
        return 0..0;
    }
    first..(last as usize + 1).min(grid.n)
}

/// `exp(-(x - x0)² / 4σ²) e^{i p0 x/ħ}`: position spread `σ`, momentum spread `ħ/2σ`.
pub fn make_gaussian(grid: &Grid, x0: f64, p0: f64, sigma: f64) -> Result<WaveFunction> {
    if !(sigma > 0.0) {
        return Err(Error::domain(format!("gaussian width must be positive, got {sigma}")));
    }
    require_inside(grid, x0, "gaussian center")?;
    let amps = grid
        .positions()
        .into_iter()
        .map(|x| {
            let r = (x - x0) / sigma;
            Complex64::from_polar((-0.25 * r * r).exp(), p0 * x / grid.hbar)
        })
        .collect();
    WaveFunction::normalized(*grid, amps)
}

/// Flat amplitude on the grid points of `[center - width/2, center + width/2]`,
/// modulated by `e^{i boost x/ħ}`, zero elsewhere.
pub fn make_box(grid: &Grid, center: f64, width: f64, boost: f64) -> Result<WaveFunction> {
    if !(width >= 2.0 * grid.dx * (1.0 - 1e-9)) {
        return Err(Error::domain(format!("box width {width} below two grid cells ({})", 2.0 * grid.dx)));
    }
    require_inside(grid, center, "box center")?;
    let mut amps = vec![ZERO; grid.n];
    for j in points_in(grid, center - width / 2.0, center + width / 2.0) {
        amps[j] = Complex64::from_polar(1.0, boost * grid.x(j) / grid.hbar);
    }
    WaveFunction::normalized(*grid, amps)
}

/// `n`-th harmonic-oscillator eigenfunction (unit mass and frequency);
/// `n = 0` is the Gaussian with position spread `√(ħ/2)`.
pub fn make_hermite(grid: &Grid, n: usize) -> Result<WaveFunction> {
    let scale = grid.hbar.sqrt();
    let amps = grid
        .positions()
        .into_iter()
        .map(|x| {
            let xi = x / scale;
            let mut prev = 0.0;
            let mut cur = (-0.5 * xi * xi).exp();
            for k in 0..n {
                let k = k as f64;
                let next = (2.0 / (k + 1.0)).sqrt() * xi * cur - (k / (k + 1.0)).sqrt() * prev;
                prev = cur;
                cur = next;
            }
            Complex64::new(cur, 0.0)
        })
        .collect();
    WaveFunction::normalized(*grid, amps)
}

/// Random superposition of up to six sine modes vanishing at the ends of
/// `[lo, hi]`; zero outside. Bitwise reproducible for a given `seed`.
pub fn make_random_localized(grid: &Grid, lo: f64, hi: f64, seed: u64) -> Result<WaveFunction> {
    if !(hi - lo >= 2.0 * grid.dx * (1.0 - 1e-9)) {
        return Err(Error::domain(format!("interval [{lo}, {hi}] narrower than two grid cells")));
    }
    require_inside(grid, lo, "interval end")?;
    require_inside(grid, hi, "interval end")?;
    let coeffs = random_modes(seed);
    let mut amps = vec![ZERO; grid.n];
    for j in points_in(grid, lo, hi) {
        let t = (grid.x(j) - lo) / (hi - lo);
        amps[j] = sine_series(&coeffs, t);
    }
    WaveFunction::normalized(*grid, amps)
}

fn random_modes(seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes = rng.gen_range(1..=6);
    (0..modes).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
}

fn sine_series(coeffs: &[Complex64], t: f64) -> Complex64 {
    coeffs.iter().enumerate().map(|(m, c)| c * (std::f64::consts::PI * (m + 1) as f64 * t).sin()).sum()
}

/// Flat momentum amplitude on the bins of `[p_center - width/2, p_center + width/2]`,
/// translated in position by `shift`.
pub fn make_momentum_box(grid: &Grid, p_center: f64, width: f64, shift: f64) -> Result<WaveFunction> {
    build_in_momentum(grid, p_center, width, |p, _| Complex64::from_polar(1.0, -p * shift / grid.hbar))
}

/// Half-cosine momentum amplitude vanishing at both window ends; its position
/// density decays like `|x|^-4`.
pub fn make_momentum_cosine(grid: &Grid, p_center: f64, width: f64) -> Result<WaveFunction> {
    build_in_momentum(grid, p_center, width, |_, t| Complex64::new((std::f64::consts::PI * t).sin(), 0.0))
}

/// Random sine-mode envelope on the momentum bins of the window.
pub fn make_random_momentum_localized(grid: &Grid, p_center: f64, width: f64, seed: u64) -> Result<WaveFunction> {
    let coeffs = random_modes(seed);
    build_in_momentum(grid, p_center, width, |_, t| sine_series(&coeffs, t))
}

fn build_in_momentum(
    grid: &Grid,
    p_center: f64,
    width: f64,
    amp: impl Fn(f64, f64) -> Complex64,
) -> Result<WaveFunction> {
    let dp = grid.dp();
    if !(width >= 2.0 * dp * (1.0 - 1e-9)) {
        return Err(Error::domain(format!("momentum window {width} below two bins ({})", 2.0 * dp)));
    }
    if p_center.abs() > grid.p_max() {
        return Err(Error::domain(format!("momentum {p_center} beyond the Nyquist momentum {}", grid.p_max())));
    }
    let (lo, hi) = (p_center - width / 2.0, p_center + width / 2.0);
    let momenta = grid.momenta();
    let mut phi = vec![ZERO; grid.n];
    for k in bins_in(grid, lo, hi) {
        phi[k] = amp(momenta[k], (momenta[k] - lo) / width);
    }
    let amps = Spectral::new(grid).from_momentum(&phi);
    WaveFunction::normalized(*grid, amps)
}

/// All weight on the grid point nearest `x`.
pub fn make_point(grid: &Grid, x: f64) -> Result<WaveFunction> {
    let j = grid.nearest_index(x).ok_or_else(|| Error::domain(format!("point {x} outside the grid")))?;
    let mut amps = vec![ZERO; grid.n];
    amps[j] = Complex64::new(1.0, 0.0);
    WaveFunction::normalized(*grid, amps)
}

/// Plane wave occupying the single momentum bin nearest `p`.
pub fn make_momentum_point(grid: &Grid, p: f64) -> Result<WaveFunction> {
    let k = grid
        .nearest_momentum_index(p)
        .ok_or_else(|| Error::domain(format!("momentum {p} outside the momentum lattice")))?;
    let mut phi = vec![ZERO; grid.n];
    phi[k] = Complex64::new(1.0, 0.0);
    WaveFunction::normalized(*grid, Spectral::new(grid).from_momentum(&phi))
}

/// Deterministic mix of Gaussians, boxes, oscillator eigenstates, random
/// localized states and two-component mixtures, all well inside the grid.
pub fn test_ensemble(grid: &Grid, seed: u64, count: usize) -> Result<Vec<MixedState>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = grid.extent() / 2.0;
    let p_room = grid.p_max() / 8.0;
    let min_width = 4.0 * grid.dx;
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let center = rng.gen_range(-half / 6.0..half / 6.0);
        let boost = rng.gen_range(-p_room..p_room);
        let state: MixedState = match i % 5 {
            0 => {
                let sigma = rng.gen_range(0.02..0.08) * half;
                make_gaussian(grid, center, boost, sigma.max(min_width))?.into()
            }
            1 => {
                let width = rng.gen_range(0.03..0.2) * half;
                make_box(grid, center, width.max(min_width), boost)?.into()
            }
            2 => make_hermite(grid, rng.gen_range(0..6))?.into(),
            3 => {
                let width = rng.gen_range(0.05..0.3) * half;
                make_random_localized(
                    grid,
                    center - width.max(min_width) / 2.0,
                    center + width.max(min_width) / 2.0,
                    rng.gen(),
                )?
                .into()
            }
            _ => {
                let sep = rng.gen_range(0.0..0.15) * half;
                let sigma = (rng.gen_range(0.02..0.06) * half).max(min_width);
                let w = rng.gen_range(0.2..0.8);
                MixedState::new(vec![
                    (w, make_gaussian(grid, center - sep, boost, sigma)?),
                    (1.0 - w, make_gaussian(grid, center + sep, -boost, sigma)?),
                ])?
            }
        };
        out.push(state);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::symmetric(16.0, 1024, 1.0).unwrap()
    }

    #[test]
    fn box_support() {
        let g = grid();
        let b = make_box(&g, 0.0, 1.0, 0.0).unwrap();
        for (j, z) in b.amplitudes().iter().enumerate() {
            if g.x(j).abs() > 0.5 {
                assert_eq!(*z, ZERO);
            } else {
                assert!(z.norm() > 0.0);
            }
        }
        assert!(make_box(&g, 0.0, 1.5 * g.dx, 0.0).is_err());
    }

    #[test]
    fn hermite_ground_is_gaussian() {
        for hbar in [1.0, 2.0] {
            let g = Grid::symmetric(16.0, 1024, hbar).unwrap();
            let h = make_hermite(&g, 0).unwrap();
            let gauss = make_gaussian(&g, 0.0, 0.0, (hbar / 2.0).sqrt()).unwrap();
            assert!(h.inner(&gauss).norm() > 1.0 - 1e-6);
        }
    }

    #[test]
    fn hermite_orthonormal() {
        let g = grid();
        let states: Vec<_> = (0..5).map(|n| make_hermite(&g, n).unwrap()).collect();
        for (i, a) in states.iter().enumerate() {
            for (j, b) in states.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((a.inner(b).norm() - expected).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn random_localized_is_reproducible_and_confined() {
        let g = grid();
        let a = make_random_localized(&g, -1.0, 2.0, 42).unwrap();
        let b = make_random_localized(&g, -1.0, 2.0, 42).unwrap();
        assert_eq!(a.amplitudes(), b.amplitudes());
        let c = make_random_localized(&g, -1.0, 2.0, 43).unwrap();
        assert_ne!(a.amplitudes(), c.amplitudes());
        for (j, z) in a.amplitudes().iter().enumerate() {
            if g.x(j) < -1.0 || g.x(j) > 2.0 {
                assert_eq!(*z, ZERO);
            }
        }
    }

    #[test]
    fn momentum_box_is_band_limited() {
        let g = grid();
        let s: MixedState = make_momentum_box(&g, 3.0, 1.0, 0.7).unwrap().into();
        let law = s.momentum_distribution();
        assert!(law.mass_between(2.5, 3.5) > 1.0 - 1e-12);
        let r: MixedState = make_random_momentum_localized(&g, -2.0, 0.5, 1).unwrap().into();
        assert!(r.momentum_distribution().mass_between(-2.25, -1.75) > 1.0 - 1e-12);
    }

    #[test]
    fn point_states() {
        let g = grid();
        let s: MixedState = make_point(&g, 1.01).unwrap().into();
        let law = s.position_distribution();
        assert_eq!(law.weights().iter().filter(|w| **w > 0.0).count(), 1);
        let m: MixedState = make_momentum_point(&g, 2.0).unwrap().into();
        let law = m.momentum_distribution();
        assert!(law.weights().iter().filter(|w| **w > 1e-20).count() == 1);
    }

    #[test]
    fn ensemble_is_deterministic() {
        let g = grid();
        assert_eq!(test_ensemble(&g, 3, 12).unwrap(), test_ensemble(&g, 3, 12).unwrap());
    }
}
