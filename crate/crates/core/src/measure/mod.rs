//! Finitely supported probability measures on the line and their spread
//! functionals: moments, α-deviations, standard deviation and the overall
//! width at confidence level `1 - eps`.

mod convolve;
pub mod io;
mod map;

pub use convolve::{convolve, convolve_capped, DEFAULT_CONVOLUTION_CAP};
pub use map::{MonotoneTable, PointMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on total mass of a valid measure.
pub const MASS_TOL: f64 = 1e-12;

/// Golden-section tolerance in the location parameter of [`GridMeasure::alpha_deviation`].
pub const GOLDEN_TOL: f64 = 1e-10;

/// A probability measure with finitely many atoms.
///
/// Atoms are strictly increasing, weights nonnegative and summing to one.
/// Zero-weight atoms are allowed; they keep measures read off a spatial grid
/// aligned with that grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasure", into = "RawMeasure")]
pub struct GridMeasure {
    atoms: Vec<f64>,
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawMeasure {
    atoms: Vec<f64>,
    weights: Vec<f64>,
}

impl TryFrom<RawMeasure> for GridMeasure {
    type Error = Error;
    fn try_from(raw: RawMeasure) -> Result<Self> {
        GridMeasure::normalized(raw.atoms, raw.weights)
    }
}

impl From<GridMeasure> for RawMeasure {
    fn from(m: GridMeasure) -> Self {
        RawMeasure { atoms: m.atoms, weights: m.weights }
    }
}

impl GridMeasure {
    /// Builds a measure whose weights already sum to one within [`MASS_TOL`].
    pub fn new(atoms: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        Self::check_shape(&atoms, &weights)?;
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::domain(format!("weights sum to {total}, expected 1")));
        }
        Ok(Self { atoms, weights })
    }

    /// Builds a measure after rescaling the weights to unit mass.
    pub fn normalized(atoms: Vec<f64>, mut weights: Vec<f64>) -> Result<Self> {
        Self::check_shape(&atoms, &weights)?;
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::domain("measure has no mass"));
        }
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(Self { atoms, weights })
    }

    /// Sorts `(atom, weight)` pairs, merges coincident atoms and normalizes.
    pub fn from_pairs(mut pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.iter().any(|(x, w)| !x.is_finite() || !w.is_finite()) {
            return Err(Error::domain("non-finite atom or weight"));
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut atoms: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut weights: Vec<f64> = Vec::with_capacity(pairs.len());
        for (x, w) in pairs {
            match atoms.last() {
                Some(&last) if last == x => *weights.last_mut().unwrap() += w,
                _ => {
                    atoms.push(x);
                    weights.push(w);
                }
            }
        }
        Self::normalized(atoms, weights)
    }

    fn check_shape(atoms: &[f64], weights: &[f64]) -> Result<()> {
        if atoms.is_empty() {
            return Err(Error::domain("measure needs at least one atom"));
        }
        if atoms.len() != weights.len() {
            return Err(Error::domain(format!("{} atoms but {} weights", atoms.len(), weights.len())));
        }
        if atoms.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain("non-finite atom"));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
            return Err(Error::domain(format!("invalid weight {w}")));
        }
        if atoms.windows(2).any(|p| p[0] >= p[1]) {
            return Err(Error::domain("atoms must be strictly increasing"));
        }
        Ok(())
    }

    /// Unit point mass at `a`.
    pub fn point(a: f64) -> Self {
        Self { atoms: vec![a], weights: vec![1.0] }
    }

    /// Equal weights on `n` equally spaced points covering `[lo, hi]`.
    pub fn uniform(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n == 0 || !(hi >= lo) {
            return Err(Error::domain("uniform measure needs n > 0 and lo <= hi"));
        }
        if n == 1 {
            return Ok(Self::point(0.5 * (lo + hi)));
        }
        let step = (hi - lo) / (n - 1) as f64;
        let atoms = (0..n).map(|i| lo + step * i as f64).collect();
        Self::new(atoms, vec![1.0 / n as f64; n])
    }

    /// Gaussian density sampled at `mean + k * spacing` for `|k * spacing| <= half_width`.
    pub fn gaussian(mean: f64, sd: f64, spacing: f64, half_width: f64) -> Result<Self> {
        if !(sd > 0.0 && spacing > 0.0 && half_width >= 0.0) {
            return Err(Error::domain("gaussian measure needs sd, spacing > 0"));
        }
        let k = (half_width / spacing).floor() as i64;
        let atoms: Vec<f64> = (-k..=k).map(|i| mean + spacing * i as f64).collect();
        let weights = atoms.iter().map(|x| (-0.5 * ((x - mean) / sd).powi(2)).exp()).collect();
        Self::normalized(atoms, weights)
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = (f64, f64)> + ExactSizeIterator + '_ {
        self.atoms.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn min_atom(&self) -> f64 {
        self.atoms[0]
    }

    pub fn max_atom(&self) -> f64 {
        self.atoms[self.atoms.len() - 1]
    }

    /// Smallest gap between neighbouring atoms; `None` for a point mass.
    pub fn spacing(&self) -> Option<f64> {
        self.atoms.windows(2).map(|p| p[1] - p[0]).reduce(f64::min)
    }

    /// The same measure with zero-weight atoms removed.
    pub fn pruned(&self) -> Self {
        let (atoms, weights) = self.iter().filter(|(_, w)| *w > 0.0).unzip();
        Self { atoms, weights }
    }

    /// Right-continuous distribution function: mass of atoms `<= x`.
    pub fn cdf(&self, x: f64) -> f64 {
        let k = self.atoms.partition_point(|&a| a <= x);
        self.weights[..k].iter().sum::<f64>().clamp(0.0, 1.0)
    }

    /// Left-continuous generalized inverse `inf { x : cdf(x) >= t }`.
    pub fn quantile(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::domain(format!("quantile level {t} outside (0, 1]")));
        }
        let mut cum = 0.0;
        for (x, w) in self.iter() {
            cum += w;
            if w > 0.0 && cum + 1e-13 >= t {
                return Ok(x);
            }
        }
        Ok(self.last_charged_atom())
    }

    fn last_charged_atom(&self) -> f64 {
        self.iter().rev().find(|(_, w)| *w > 0.0).map_or(self.max_atom(), |(x, _)| x)
    }

    /// Raw moment `sum w_i x_i^k`.
    pub fn moment(&self, k: u32) -> f64 {
        self.iter().map(|(x, w)| w * x.powi(k as i32)).sum()
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    /// Absolute moment `sum w_i |x_i|^alpha`.
    pub fn abs_moment(&self, alpha: f64) -> f64 {
        self.iter().map(|(x, w)| w * x.abs().powf(alpha)).sum()
    }

    /// `sum w_i |x_i - y|^alpha`.
    pub fn centered_abs_moment(&self, y: f64, alpha: f64) -> f64 {
        self.iter().map(|(x, w)| w * (x - y).abs().powf(alpha)).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.iter().map(|(x, w)| w * (x - m) * (x - m)).sum()
    }

    pub fn std_deviation(&self) -> f64 {
        self.variance().sqrt()
    }

    /// `inf_y (sum w |x - y|^alpha)^(1/alpha)`, located by golden-section search
    /// over `[min atom, max atom]` (the objective is convex for `alpha >= 1`).
    pub fn alpha_deviation(&self, alpha: f64) -> Result<f64> {
        let (_, value) = self.alpha_center(alpha)?;
        Ok(value)
    }

    /// Minimizing location and value of the α-deviation.
    pub fn alpha_center(&self, alpha: f64) -> Result<(f64, f64)> {
        if !(alpha >= 1.0) || !alpha.is_finite() {
            return Err(Error::domain(format!("alpha must be in [1, inf), got {alpha}")));
        }
        let f = |y: f64| self.centered_abs_moment(y, alpha);
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let (mut a, mut b) = (self.min_atom(), self.max_atom());
        let mut c = b - inv_phi * (b - a);
        let mut d = a + inv_phi * (b - a);
        let (mut fc, mut fd) = (f(c), f(d));
        while b - a > GOLDEN_TOL {
            if fc <= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - inv_phi * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + inv_phi * (b - a);
                fd = f(d);
            }
        }
        let (y, v) = [(a, f(a)), (b, f(b)), (c, fc), (d, fd)].into_iter().min_by(|p, q| p.1.total_cmp(&q.1)).unwrap();
        Ok((y, v.max(0.0).powf(1.0 / alpha)))
    }

    /// Width of the shortest closed interval carrying mass at least `1 - eps`.
    pub fn overall_width(&self, eps: f64) -> Result<f64> {
        Ok(self.shortest_interval(eps)?.width)
    }

    /// Shortest closed interval carrying mass at least `1 - eps`.
    ///
    /// Two-pointer sweep: an optimal interval can always be shrunk until
    /// both endpoints are atoms.
    pub fn shortest_interval(&self, eps: f64) -> Result<Interval> {
        if !(0.0..1.0).contains(&eps) {
            return Err(Error::domain(format!("eps {eps} outside [0, 1)")));
        }
        let target = (1.0 - eps - MASS_TOL).max(f64::MIN_POSITIVE);
        let n = self.len();
        let mut best = (f64::INFINITY, self.min_atom(), self.max_atom());
        let mut j = 0usize;
        let mut mass = 0.0; // mass of atoms i..j (exclusive of j)
        for i in 0..n {
            if i > 0 {
                mass -= self.weights[i - 1];
            }
            if j < i {
                j = i;
                mass = 0.0;
            }
            while j < n && mass < target {
                mass += self.weights[j];
                j += 1;
            }
            if mass < target {
                break;
            }
            let width = self.atoms[j - 1] - self.atoms[i];
            if width < best.0 {
                best = (width, self.atoms[i], self.atoms[j - 1]);
            }
        }
        let (width, lo, hi) = best;
        if !width.is_finite() {
            return Err(Error::Internal("overall width sweep found no interval".into()));
        }
        Ok(Interval { center: 0.5 * (lo + hi), width: hi - lo })
    }

    /// Mass in the closed interval.
    pub fn interval_mass(&self, j: &Interval) -> f64 {
        self.mass_between(j.lo(), j.hi())
    }

    /// Mass of atoms in `[lo, hi]`.
    pub fn mass_between(&self, lo: f64, hi: f64) -> f64 {
        let start = self.atoms.partition_point(|&a| a < lo);
        let end = self.atoms.partition_point(|&a| a <= hi);
        if end <= start {
            return 0.0;
        }
        self.weights[start..end].iter().sum()
    }

    pub fn translate(&self, a: f64) -> Self {
        Self { atoms: self.atoms.iter().map(|x| x + a).collect(), weights: self.weights.clone() }
    }

    /// Scales every atom by `s > 0`.
    pub fn dilate(&self, s: f64) -> Result<Self> {
        if !(s > 0.0) {
            return Err(Error::domain("dilation factor must be positive"));
        }
        Ok(Self { atoms: self.atoms.iter().map(|x| x * s).collect(), weights: self.weights.clone() })
    }

    /// Image measure under `map`; coincident images are merged.
    pub fn pushforward(&self, map: &PointMap) -> Result<Self> {
        if let PointMap::Identity = map {
            return Ok(self.clone());
        }
        let pairs = self.iter().map(|(x, w)| (map.apply(x), w)).collect();
        Self::from_pairs(pairs)
    }

    /// Total variation distance; atoms closer than `tol` are identified.
    pub fn total_variation(&self, other: &Self, tol: f64) -> f64 {
        let (a, b) = (self, other);
        let (mut i, mut j) = (0, 0);
        let mut acc = 0.0;
        while i < a.len() || j < b.len() {
            let xa = a.atoms.get(i).copied().unwrap_or(f64::INFINITY);
            let xb = b.atoms.get(j).copied().unwrap_or(f64::INFINITY);
            if (xa - xb).abs() <= tol {
                acc += (a.weights[i] - b.weights[j]).abs();
                i += 1;
                j += 1;
            } else if xa < xb {
                acc += a.weights[i];
                i += 1;
            } else {
                acc += b.weights[j];
                j += 1;
            }
        }
        0.5 * acc
    }

    /// Total variation after binning both measures into cells `[k h, (k+1) h)`.
    pub fn binned_total_variation(&self, other: &Self, h: f64) -> f64 {
        use std::collections::BTreeMap;
        let mut cells: BTreeMap<i64, f64> = BTreeMap::new();
        for (x, w) in self.iter() {
            *cells.entry((x / h).floor() as i64).or_default() += w;
        }
        for (x, w) in other.iter() {
            *cells.entry((x / h).floor() as i64).or_default() -= w;
        }
        0.5 * cells.values().map(|v| v.abs()).sum::<f64>()
    }
}

/// Closed interval `[center - width/2, center + width/2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub center: f64,
    pub width: f64,
}

impl Interval {
    pub fn new(center: f64, width: f64) -> Result<Self> {
        if !(width >= 0.0) || !center.is_finite() {
            return Err(Error::domain(format!("invalid interval ({center}, {width})")));
        }
        Ok(Self { center, width })
    }

    pub fn lo(&self) -> f64 {
        self.center - 0.5 * self.width
    }

    pub fn hi(&self) -> f64 {
        self.center + 0.5 * self.width
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo() && x <= self.hi()
    }
}
