//! Observables as maps from states to outcome distributions.

mod joint;
pub mod schema;

pub use joint::{joint_covariant_distribution, JointTable, PhaseLattice};

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{convolve, GridMeasure, PointMap};
use crate::state::MixedState;

/// Largest number of mixture components accepted for the generating state τ.
pub const MAX_TAU_COMPONENTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Position,
    Momentum,
}

/// The generating state τ of a covariant phase-space observable together with
/// the noise laws of its marginals: `μ_τ` and `ν_τ` are the position and
/// momentum distributions of the parity-reflected τ. Computed once.
#[derive(Debug)]
pub struct CovariantSource {
    tau: MixedState,
    mu: GridMeasure,
    nu: GridMeasure,
}

impl CovariantSource {
    pub fn new(tau: MixedState) -> Result<Arc<Self>> {
        if tau.components().len() > MAX_TAU_COMPONENTS {
            return Err(Error::domain(format!(
                "tau has {} components, at most {MAX_TAU_COMPONENTS} allowed",
                tau.components().len()
            )));
        }
        let (mu, nu) = covariant_marginals(&tau)?;
        Ok(Arc::new(Self { tau, mu, nu }))
    }

    pub fn tau(&self) -> &MixedState {
        &self.tau
    }

    pub fn mu(&self) -> &GridMeasure {
        &self.mu
    }

    pub fn nu(&self) -> &GridMeasure {
        &self.nu
    }

    pub fn noise(&self, axis: Axis) -> &GridMeasure {
        match axis {
            Axis::Position => &self.mu,
            Axis::Momentum => &self.nu,
        }
    }
}

/// `(μ_τ, ν_τ)`: position and momentum laws of `Πτ Π`.
pub fn covariant_marginals(tau: &MixedState) -> Result<(GridMeasure, GridMeasure)> {
    let reflected = tau.parity()?;
    Ok((reflected.position_distribution(), reflected.momentum_distribution()))
}

#[derive(Debug, Clone)]
pub enum ObservableModel {
    SharpQ,
    SharpP,
    SmearedQ(GridMeasure),
    SmearedP(GridMeasure),
    Pushforward { inner: Box<ObservableModel>, map: PointMap },
    Trivial(GridMeasure),
    CovariantMarginal { source: Arc<CovariantSource>, axis: Axis },
}

/// Expectations of the first and second moment operators, plus the constant
/// offset `C[x] - A` relative to the sharp observable on the same axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentStats {
    /// `tr ρ C[x]`
    pub first_moment_mean: f64,
    /// `tr ρ C[x]²`
    pub first_moment_sq_mean: f64,
    /// `tr ρ C[x²]`
    pub second_moment_mean: f64,
    pub offset: f64,
}

impl MomentStats {
    /// `tr ρ (C[x²] − C[x]²)`.
    pub fn variance_term(&self) -> f64 {
        self.second_moment_mean - self.first_moment_sq_mean
    }
}

impl ObservableModel {
    pub fn pushforward(inner: ObservableModel, map: PointMap) -> Result<Self> {
        map.validate()?;
        Ok(Self::Pushforward { inner: Box::new(inner), map })
    }

    pub fn covariant(source: &Arc<CovariantSource>, axis: Axis) -> Self {
        Self::CovariantMarginal { source: Arc::clone(source), axis }
    }

    pub fn sharp(axis: Axis) -> Self {
        match axis {
            Axis::Position => Self::SharpQ,
            Axis::Momentum => Self::SharpP,
        }
    }

    pub fn smeared(axis: Axis, noise: GridMeasure) -> Self {
        match axis {
            Axis::Position => Self::SmearedQ(noise),
            Axis::Momentum => Self::SmearedP(noise),
        }
    }

    /// Axis whose sharp observable this one approximates; `None` for trivial ones.
    pub fn axis(&self) -> Option<Axis> {
        match self {
            Self::SharpQ | Self::SmearedQ(_) => Some(Axis::Position),
            Self::SharpP | Self::SmearedP(_) => Some(Axis::Momentum),
            Self::Pushforward { inner, .. } => inner.axis(),
            Self::Trivial(_) => None,
            Self::CovariantMarginal { axis, .. } => Some(*axis),
        }
    }

    pub fn is_sharp(&self) -> bool {
        matches!(self, Self::SharpQ | Self::SharpP)
    }

    /// Noise measure of the smeared and covariant variants.
    pub fn smearing(&self) -> Option<&GridMeasure> {
        match self {
            Self::SmearedQ(m) | Self::SmearedP(m) => Some(m),
            Self::CovariantMarginal { source, axis } => Some(source.noise(*axis)),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::SharpQ => "sharp_q",
            Self::SharpP => "sharp_p",
            Self::SmearedQ(_) => "smeared_q",
            Self::SmearedP(_) => "smeared_p",
            Self::Pushforward { .. } => "pushforward",
            Self::Trivial(_) => "trivial",
            Self::CovariantMarginal { axis: Axis::Position, .. } => "covariant_q",
            Self::CovariantMarginal { axis: Axis::Momentum, .. } => "covariant_p",
        }
    }

    /// Outcome distribution `ρ^E` in the state `s`.
    pub fn distribution(&self, s: &MixedState) -> Result<GridMeasure> {
        match self {
            Self::SharpQ => Ok(s.position_distribution()),
            Self::SharpP => Ok(s.momentum_distribution()),
            Self::SmearedQ(mu) => convolve(&s.position_distribution(), mu),
            Self::SmearedP(nu) => convolve(&s.momentum_distribution(), nu),
            Self::Pushforward { inner, map } => inner.distribution(s)?.pushforward(map),
            Self::Trivial(mu) => Ok(mu.clone()),
            Self::CovariantMarginal { source, axis } => {
                source.tau.grid().require_compatible(s.grid())?;
                let sharp = match axis {
                    Axis::Position => s.position_distribution(),
                    Axis::Momentum => s.momentum_distribution(),
                };
                convolve(&sharp, source.noise(*axis))
            }
        }
    }

    /// Closed-form moment-operator expectations. With `m_k` the moments of
    /// the noise law, `C[x] = A + m_1` and `C[x²] = A² + 2 m_1 A + m_2`.
    pub fn moment_stats(&self, s: &MixedState) -> Result<MomentStats> {
        let (sharp, noise) = match self {
            Self::SharpQ => (s.position_distribution(), None),
            Self::SharpP => (s.momentum_distribution(), None),
            Self::SmearedQ(mu) => (s.position_distribution(), Some(mu)),
            Self::SmearedP(nu) => (s.momentum_distribution(), Some(nu)),
            Self::CovariantMarginal { source, axis } => {
                source.tau.grid().require_compatible(s.grid())?;
                let sharp = match axis {
                    Axis::Position => s.position_distribution(),
                    Axis::Momentum => s.momentum_distribution(),
                };
                (sharp, Some(source.noise(*axis)))
            }
            other => {
                return Err(Error::domain(format!("no closed moment operators for {} observables", other.name())));
            }
        };
        let (m1, m2) = noise.map_or((0.0, 0.0), |m| (m.moment(1), m.moment(2)));
        let (a1, a2) = (sharp.moment(1), sharp.moment(2));
        Ok(MomentStats {
            first_moment_mean: a1 + m1,
            first_moment_sq_mean: a2 + 2.0 * m1 * a1 + m1 * m1,
            second_moment_mean: a2 + 2.0 * m1 * a1 + m2,
            offset: m1,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{make_box, make_gaussian, test_ensemble, Grid, PhasePoint};

    fn grid() -> Grid {
        Grid::symmetric(16.0, 1024, 1.0).unwrap()
    }

    fn gaussian(g: &Grid, x0: f64, sigma: f64) -> MixedState {
        make_gaussian(g, x0, 0.0, sigma).unwrap().into()
    }

    #[test]
    fn trivial_ignores_state() {
        let g = grid();
        let mu = GridMeasure::new(vec![-1.0, 2.0], vec![0.3, 0.7]).unwrap();
        let e = ObservableModel::Trivial(mu.clone());
        assert_eq!(e.distribution(&gaussian(&g, 0.0, 1.0)).unwrap(), mu);
        assert_eq!(e.distribution(&gaussian(&g, 3.0, 0.4)).unwrap(), mu);
    }

    #[test]
    fn point_smearing_translates() {
        let g = grid();
        let s = gaussian(&g, 0.5, 1.0);
        let out = ObservableModel::SmearedQ(GridMeasure::point(1.25)).distribution(&s).unwrap();
        let expected = s.position_distribution().translate(1.25);
        assert!(out.total_variation(&expected, 1e-9) < 1e-12);
    }

    #[test]
    fn gaussian_smearing_adds_variances() {
        let g = grid();
        let (ss, sm) = (1.0, 0.7);
        let mu = GridMeasure::gaussian(0.0, sm, g.dx, 8.0).unwrap();
        let out = ObservableModel::SmearedQ(mu).distribution(&gaussian(&g, 0.0, ss)).unwrap();
        assert!((out.variance() - (ss * ss + sm * sm)).abs() < 1e-3);
    }

    #[test]
    fn covariant_marginals_of_gaussians() {
        let g = grid();
        let sigma = 0.8;
        let (mu, nu) = covariant_marginals(&gaussian(&g, 0.0, sigma)).unwrap();
        assert!((mu.std_deviation() - sigma).abs() < 1e-4);
        assert!((nu.std_deviation() - 1.0 / (2.0 * sigma)).abs() < 1e-4);
        let (mu, _) = covariant_marginals(&gaussian(&g, 2.0, sigma)).unwrap();
        assert!((mu.mean() + 2.0).abs() < g.dx);
    }

    #[test]
    fn covariant_noise_obeys_state_ur() {
        let g = grid();
        for tau in test_ensemble(&g, 9, 30).unwrap() {
            let (mu, nu) = covariant_marginals(&tau).unwrap();
            assert!(mu.std_deviation() * nu.std_deviation() >= 0.5 - 1e-6);
        }
    }

    #[test]
    fn covariant_rejects_large_mixtures_and_foreign_grids() {
        let g = grid();
        let psi = make_gaussian(&g, 0.0, 0.0, 1.0).unwrap();
        let many = MixedState::mixture(vec![(1.0, psi.clone()); 17]).unwrap();
        assert!(CovariantSource::new(many).is_err());
        let src = CovariantSource::new(psi.into()).unwrap();
        let other = Grid::symmetric(16.0, 512, 1.0).unwrap();
        let obs = ObservableModel::covariant(&src, Axis::Position);
        assert!(obs.distribution(&gaussian(&other, 0.0, 1.0)).is_err());
    }

    #[test]
    fn moment_stats_closed_forms() {
        let g = grid();
        let s = gaussian(&g, 1.0, 1.0);
        let m = ObservableModel::SharpQ.moment_stats(&s).unwrap();
        assert!((m.first_moment_mean - 1.0).abs() < 1e-6);
        assert!((m.second_moment_mean - 2.0).abs() < 1e-3);
        assert!(m.variance_term().abs() < 1e-12);

        let point = ObservableModel::SmearedQ(GridMeasure::point(0.7)).moment_stats(&s).unwrap();
        assert!(point.variance_term().abs() < 1e-12);

        let sd = 0.6;
        let mu = GridMeasure::gaussian(0.0, sd, g.dx, 8.0).unwrap();
        let c = ObservableModel::SmearedQ(mu);
        let a = c.moment_stats(&s).unwrap().variance_term();
        let b = c.moment_stats(&make_box(&g, -3.0, 2.0, 1.0).unwrap().into()).unwrap().variance_term();
        assert!((a - sd * sd).abs() < 1e-6 && (a - b).abs() < 1e-12);

        let trivial = ObservableModel::Trivial(GridMeasure::point(0.0));
        assert!(trivial.moment_stats(&s).is_err());
    }

    #[test]
    fn smeared_is_covariant() {
        let g = grid();
        let mu = GridMeasure::new(vec![-0.5, 0.25, 1.0], vec![0.2, 0.5, 0.3]).unwrap();
        let e = ObservableModel::SmearedQ(mu);
        for s in test_ensemble(&g, 2, 10).unwrap() {
            let q = 17.0 * g.dx;
            let moved = e.distribution(&s.weyl_translate(PhasePoint::new(q, 0.0)).unwrap()).unwrap();
            let expected = e.distribution(&s).unwrap().translate(q);
            assert!(moved.binned_total_variation(&expected, g.dx) < 1e-9);
        }
    }

    #[test]
    fn cosine_pushforward_is_not_covariant() {
        let g = grid();
        let mu = GridMeasure::gaussian(0.0, 0.2, g.dx, 2.0).unwrap();
        let map = PointMap::ShiftCos { amplitude: 0.5, frequency: 1.0 };
        let e = ObservableModel::pushforward(ObservableModel::SmearedQ(mu), map).unwrap();
        let mut worst: f64 = 0.0;
        for s in test_ensemble(&g, 4, 10).unwrap() {
            for q in [1.0, 2.0, 3.0] {
                let moved = e.distribution(&s.weyl_translate(PhasePoint::new(q, 0.0)).unwrap()).unwrap();
                let expected = e.distribution(&s).unwrap().translate(q);
                worst = worst.max(moved.binned_total_variation(&expected, 0.1));
            }
        }
        assert!(worst > 0.01, "{worst}");
    }
}
