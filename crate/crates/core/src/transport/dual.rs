//! Kantorovich dual pairs `(psi, phi)` with `phi(y) - psi(x) <= |x - y|^alpha`,
//! c-transforms and the dual-ascent refinement.

use serde::{Deserialize, Serialize};

use super::lp::solve_transport;
use crate::error::{Error, Result};
use crate::measure::GridMeasure;

/// Largest admissible violation of the dual constraint.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Potentials `psi` on the atoms of the first measure and `phi` on the second.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualPair {
    pub psi: Vec<f64>,
    pub phi: Vec<f64>,
    pub alpha: f64,
}

impl DualPair {
    /// `max_ij phi_j - psi_i - |x_i - y_j|^alpha`, positive when infeasible.
    pub fn max_violation(&self, a: &GridMeasure, b: &GridMeasure) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for (x, psi) in a.atoms().iter().zip(&self.psi) {
            for (y, phi) in b.atoms().iter().zip(&self.phi) {
                worst = worst.max(phi - psi - (x - y).abs().powf(self.alpha));
            }
        }
        worst
    }
}

/// `phi(y_j) = min_i psi(x_i) + |x_i - y_j|^alpha` over the atoms of `a`.
pub fn c_transform(a: &GridMeasure, psi: &[f64], b: &GridMeasure, alpha: f64) -> Vec<f64> {
    b.atoms()
        .iter()
        .map(|y| a.atoms().iter().zip(psi).map(|(x, p)| p + (x - y).abs().powf(alpha)).fold(f64::INFINITY, f64::min))
        .collect()
}

/// `psi(x_i) = max_j phi(y_j) - |x_i - y_j|^alpha` over the atoms of `b`.
pub fn reverse_c_transform(b: &GridMeasure, phi: &[f64], a: &GridMeasure, alpha: f64) -> Vec<f64> {
    a.atoms()
        .iter()
        .map(|x| {
            b.atoms().iter().zip(phi).map(|(y, f)| f - (x - y).abs().powf(alpha)).fold(f64::NEG_INFINITY, f64::max)
        })
        .collect()
}

/// `∫phi db - ∫psi da`, after checking feasibility to [`FEASIBILITY_TOL`].
pub fn dual_value(a: &GridMeasure, b: &GridMeasure, pair: &DualPair) -> Result<f64> {
    if pair.psi.len() != a.len() || pair.phi.len() != b.len() {
        return Err(Error::domain("dual pair length does not match the measures"));
    }
    let violation = pair.max_violation(a, b);
    if violation > FEASIBILITY_TOL {
        return Err(Error::domain(format!("dual pair violates the constraint by {violation:e}")));
    }
    Ok(raw_value(a, b, &pair.psi, &pair.phi))
}

fn raw_value(a: &GridMeasure, b: &GridMeasure, psi: &[f64], phi: &[f64]) -> f64 {
    let gain: f64 = b.weights().iter().zip(phi).map(|(w, f)| w * f).sum();
    let loss: f64 = a.weights().iter().zip(psi).map(|(w, p)| w * p).sum();
    gain - loss
}

/// Optimal dual pair read off the transportation-simplex prices.
pub fn lp_dual_pair(a: &GridMeasure, b: &GridMeasure, alpha: f64) -> Result<DualPair> {
    let sol = solve_transport(a, b, alpha)?;
    let psi = sol.row_prices.iter().map(|u| -u).collect();
    Ok(DualPair { psi, phi: sol.col_prices, alpha })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AscentResult {
    pub pair: DualPair,
    pub value: f64,
    pub rounds: usize,
    /// Dual value after each round, starting with the initial pair.
    pub history: Vec<f64>,
}

/// Alternating c-transforms from a feasible start; stops when a round
/// improves the value by less than `tol` or after `max_rounds`.
pub fn dual_ascent(
    a: &GridMeasure,
    b: &GridMeasure,
    start: DualPair,
    max_rounds: usize,
    tol: f64,
) -> Result<AscentResult> {
    let alpha = start.alpha;
    let mut value = dual_value(a, b, &start)?;
    let mut history = vec![value];
    let mut psi = start.psi;
    let mut phi;
    let mut rounds = 0;
    loop {
        phi = c_transform(a, &psi, b, alpha);
        psi = reverse_c_transform(b, &phi, a, alpha);
        rounds += 1;
        let next = raw_value(a, b, &psi, &phi);
        history.push(next);
        let gain = next - value;
        value = next;
        if gain < tol || rounds >= max_rounds {
            break;
        }
    }
    Ok(AscentResult { pair: DualPair { psi, phi, alpha }, value, rounds, history })
}

/// 1-Lipschitz function `h(z) = min_i offset_i + |z - x_i|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzFn {
    pub nodes: Vec<f64>,
    pub offsets: Vec<f64>,
}

impl LipschitzFn {
    pub fn eval(&self, z: f64) -> f64 {
        self.nodes.iter().zip(&self.offsets).map(|(x, c)| c + (z - x).abs()).fold(f64::INFINITY, f64::min)
    }

    pub fn integrate(&self, m: &GridMeasure) -> f64 {
        m.iter().map(|(x, w)| w * self.eval(x)).sum()
    }

    /// `|∫h da - ∫h db|`, a lower bound on `D_1(a, b)`.
    pub fn gap(&self, a: &GridMeasure, b: &GridMeasure) -> f64 {
        (self.integrate(a) - self.integrate(b)).abs()
    }
}

/// Lipschitz extension of `psi` given on the atoms of `a`. For an optimal
/// `alpha = 1` pair it attains `D_1` as `∫h db - ∫h da`.
pub fn lipschitz_witness(a: &GridMeasure, psi: &[f64]) -> LipschitzFn {
    LipschitzFn { nodes: a.atoms().to_vec(), offsets: psi.to_vec() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::tests::arb_measure;
    use crate::transport::{optimal_coupling_lp, wasserstein};
    use proptest::prelude::*;

    #[test]
    fn infeasible_pair_rejected() {
        let (a, b) = (GridMeasure::point(0.0), GridMeasure::point(1.0));
        let pair = DualPair { psi: vec![0.0], phi: vec![2.0], alpha: 1.0 };
        assert!(dual_value(&a, &b, &pair).is_err());
        let ok = DualPair { psi: vec![0.0], phi: vec![1.0], alpha: 1.0 };
        assert_eq!(dual_value(&a, &b, &ok).unwrap(), 1.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(60))]

        #[test]
        fn weak_duality(a in arb_measure(8), b in arb_measure(8), psi in prop::collection::vec(-3.0f64..3.0, 8)) {
            let psi = &psi[..a.len()];
            let phi = c_transform(&a, psi, &b, 2.0);
            let pair = DualPair { psi: psi.to_vec(), phi, alpha: 2.0 };
            let (_, cost) = optimal_coupling_lp(&a, &b, 2.0).unwrap();
            prop_assert!(dual_value(&a, &b, &pair).unwrap() <= cost + 1e-9);
        }

        #[test]
        fn ascent_is_monotone_and_tight(a in arb_measure(12), b in arb_measure(12), alpha in prop::sample::select(vec![1.0, 2.0])) {
            let start = lp_dual_pair(&a, &b, alpha).unwrap();
            let res = dual_ascent(&a, &b, start, 1000, 1e-10).unwrap();
            for w in res.history.windows(2) {
                prop_assert!(w[1] >= w[0] - 1e-12);
            }
            let primal = wasserstein(&a, &b, alpha).unwrap().powf(alpha);
            prop_assert!((res.value - primal).abs() < 1e-9);
            prop_assert!(res.pair.max_violation(&a, &b) <= FEASIBILITY_TOL);
        }

        #[test]
        fn lipschitz_witness_attains_d1(a in arb_measure(12), b in arb_measure(12)) {
            let pair = lp_dual_pair(&a, &b, 1.0).unwrap();
            let res = dual_ascent(&a, &b, pair, 1000, 1e-10).unwrap();
            let h = lipschitz_witness(&a, &res.pair.psi);
            let d1 = wasserstein(&a, &b, 1.0).unwrap();
            prop_assert!((h.gap(&a, &b) - d1).abs() < 1e-9);
            for (x, p) in a.atoms().iter().zip(&res.pair.psi) {
                prop_assert!((h.eval(*x) - p).abs() < 1e-12);
            }
        }
    }
}
