//! Exact discrete optimal transport by the transportation simplex:
//! north-west-corner start, potentials from the basis tree, entering and
//! leaving cells chosen by Bland's lowest-index rule.

use std::collections::VecDeque;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::GridMeasure;

/// Largest `rows * cols` accepted by the exact solver.
pub const LP_SIZE_CAP: usize = 10_000;

const MARGINAL_TOL: f64 = 1e-10;

/// Joint weight table with prescribed marginals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub row_atoms: Vec<f64>,
    pub col_atoms: Vec<f64>,
    /// Row-major, `row_atoms.len() * col_atoms.len()` entries.
    pub joint: Vec<f64>,
}

impl Coupling {
    pub fn rows(&self) -> usize {
        self.row_atoms.len()
    }

    pub fn cols(&self) -> usize {
        self.col_atoms.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.joint[i * self.cols() + j]
    }

    /// The monotone (quantile) coupling.
    pub fn monotone(a: &GridMeasure, b: &GridMeasure) -> Self {
        let mut joint = vec![0.0; a.len() * b.len()];
        let index = |xs: &[f64], x: f64| xs.partition_point(|&v| v < x);
        for (w, x, y) in super::quantile_cells(a, b) {
            joint[index(a.atoms(), x) * b.len() + index(b.atoms(), y)] += w;
        }
        Self { row_atoms: a.atoms().to_vec(), col_atoms: b.atoms().to_vec(), joint }
    }

    /// `sum gamma_ij |x_i - y_j|^alpha`.
    pub fn cost(&self, alpha: f64) -> f64 {
        let mut total = 0.0;
        for (i, x) in self.row_atoms.iter().enumerate() {
            for (j, y) in self.col_atoms.iter().enumerate() {
                total += self.get(i, j) * (x - y).abs().powf(alpha);
            }
        }
        total
    }

    /// Checks nonnegativity and both marginals within `1e-10`.
    pub fn validate(&self, a: &GridMeasure, b: &GridMeasure) -> Result<()> {
        if self.row_atoms != a.atoms() || self.col_atoms != b.atoms() {
            return Err(Error::domain("coupling atoms differ from the measures"));
        }
        if let Some(w) = self.joint.iter().find(|w| **w < 0.0) {
            return Err(Error::domain(format!("negative coupling weight {w}")));
        }
        for (i, w) in a.weights().iter().enumerate() {
            let row: f64 = (0..self.cols()).map(|j| self.get(i, j)).sum();
            if (row - w).abs() > MARGINAL_TOL {
                return Err(Error::domain(format!("row {i} sums to {row}, expected {w}")));
            }
        }
        for (j, w) in b.weights().iter().enumerate() {
            let col: f64 = (0..self.rows()).map(|i| self.get(i, j)).sum();
            if (col - w).abs() > MARGINAL_TOL {
                return Err(Error::domain(format!("column {j} sums to {col}, expected {w}")));
            }
        }
        Ok(())
    }

    /// CSV export `i,j,xi,yj,w` of the nonzero entries.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["i", "j", "xi", "yj", "w"])?;
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                let w = self.get(i, j);
                if w > 0.0 {
                    wtr.serialize((i, j, self.row_atoms[i], self.col_atoms[j], w))?;
                }
            }
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Optimal plan together with optimal dual prices `u_i + v_j <= c_ij`.
#[derive(Debug, Clone)]
pub struct TransportSolution {
    pub coupling: Coupling,
    pub cost: f64,
    pub row_prices: Vec<f64>,
    pub col_prices: Vec<f64>,
    pub pivots: usize,
}

/// Exact optimal coupling and its cost `inf sum gamma |x - y|^alpha`.
pub fn optimal_coupling_lp(a: &GridMeasure, b: &GridMeasure, alpha: f64) -> Result<(Coupling, f64)> {
    let sol = solve_transport(a, b, alpha)?;
    Ok((sol.coupling, sol.cost))
}

pub fn solve_transport(a: &GridMeasure, b: &GridMeasure, alpha: f64) -> Result<TransportSolution> {
    if !(alpha >= 1.0) || !alpha.is_finite() {
        return Err(Error::domain(format!("alpha must be in [1, inf), got {alpha}")));
    }
    let (m, n) = (a.len(), b.len());
    if m * n > LP_SIZE_CAP {
        return Err(Error::Resource(format!("{m} x {n} transport problem exceeds cap {LP_SIZE_CAP}")));
    }
    let cost: Vec<f64> =
        a.atoms().iter().flat_map(|x| b.atoms().iter().map(move |y| (x - y).abs().powf(alpha))).collect();
    let supply = a.weights().to_vec();
    let total_b: f64 = b.weights().iter().sum();
    let total_a: f64 = supply.iter().sum();
    let demand: Vec<f64> = b.weights().iter().map(|w| w * total_a / total_b).collect();

    let mut simplex = Simplex::north_west(m, n, &supply, &demand);
    let scale = cost.iter().copied().fold(1.0, f64::max);
    let tol = 1e-12 * scale;
    let max_pivots = 50 * m * n + 1000;
    let mut pivots = 0;
    loop {
        let (u, v) = simplex.potentials(&cost);
        let entering = (0..m * n).find(|&k| !simplex.basic[k] && cost[k] - u[k / n] - v[k % n] < -tol);
        let Some(enter) = entering else {
            let joint = simplex.flow.clone();
            let total = joint.iter().zip(&cost).map(|(f, c)| f * c).sum();
            return Ok(TransportSolution {
                coupling: Coupling { row_atoms: a.atoms().to_vec(), col_atoms: b.atoms().to_vec(), joint },
                cost: total,
                row_prices: u,
                col_prices: v,
                pivots,
            });
        };
        simplex.pivot(enter);
        pivots += 1;
        if pivots > max_pivots {
            return Err(Error::Internal(format!("transport simplex exceeded {max_pivots} pivots")));
        }
    }
}

struct Simplex {
    m: usize,
    n: usize,
    flow: Vec<f64>,
    basic: Vec<bool>,
}

impl Simplex {
    fn north_west(m: usize, n: usize, supply: &[f64], demand: &[f64]) -> Self {
        let mut flow = vec![0.0; m * n];
        let mut basic = vec![false; m * n];
        let (mut s, mut d) = (supply.to_vec(), demand.to_vec());
        let (mut i, mut j) = (0, 0);
        loop {
            let f = s[i].min(d[j]);
            flow[i * n + j] = f;
            basic[i * n + j] = true;
            s[i] -= f;
            d[j] -= f;
            if i == m - 1 && j == n - 1 {
                break;
            }
            if (s[i] <= 0.0 && i < m - 1) || j == n - 1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        // The last row and column absorb any rounding mismatch between the marginals.
        Self { m, n, flow, basic }
    }

    /// Adjacency of the basis tree; nodes `0..m` are rows, `m..m+n` columns.
    fn tree(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.m + self.n];
        for k in (0..self.m * self.n).filter(|&k| self.basic[k]) {
            let (i, j) = (k / self.n, k % self.n);
            adj[i].push(self.m + j);
            adj[self.m + j].push(i);
        }
        adj
    }

    fn potentials(&self, cost: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (m, n) = (self.m, self.n);
        let adj = self.tree();
        let mut pot = vec![f64::NAN; m + n];
        pot[0] = 0.0;
        let mut queue = VecDeque::from([0usize]);
        while let Some(node) = queue.pop_front() {
            for &next in &adj[node] {
                if pot[next].is_nan() {
                    let c = if node < m { cost[node * n + (next - m)] } else { cost[next * n + (node - m)] };
                    pot[next] = c - pot[node];
                    queue.push_back(next);
                }
            }
        }
        let v = pot.split_off(m);
        (pot, v)
    }

    /// Cells on the tree path from row `i` to column `j`, in path order.
    fn path(&self, i: usize, j: usize) -> Vec<usize> {
        let (m, n) = (self.m, self.n);
        let adj = self.tree();
        let mut parent = vec![usize::MAX; m + n];
        parent[i] = i;
        let mut queue = VecDeque::from([i]);
        while let Some(node) = queue.pop_front() {
            if node == m + j {
                break;
            }
            for &next in &adj[node] {
                if parent[next] == usize::MAX {
                    parent[next] = node;
                    queue.push_back(next);
                }
            }
        }
        let mut cells = Vec::new();
        let mut node = m + j;
        while node != i {
            let prev = parent[node];
            let cell = if prev < m { prev * n + (node - m) } else { node * n + (prev - m) };
            cells.push(cell);
            node = prev;
        }
        cells.reverse();
        cells
    }

    fn pivot(&mut self, enter: usize) {
        let (i, j) = (enter / self.n, enter % self.n);
        let path = self.path(i, j);
        // Odd positions along the path (1st, 3rd, ...) lose flow.
        let donors: Vec<usize> = path.iter().step_by(2).copied().collect();
        let theta = donors.iter().map(|&k| self.flow[k]).fold(f64::INFINITY, f64::min);
        let leave = *donors.iter().filter(|&&k| self.flow[k] == theta).min().unwrap();
        for (pos, &k) in path.iter().enumerate() {
            if pos % 2 == 0 {
                self.flow[k] -= theta;
            } else {
                self.flow[k] += theta;
            }
        }
        self.flow[enter] += theta;
        self.flow[leave] = 0.0;
        self.basic[leave] = false;
        self.basic[enter] = true;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::tests::arb_measure;
    use crate::transport::wasserstein;
    use proptest::prelude::*;

    #[test]
    fn point_masses_have_unique_coupling() {
        let (p, q) = (GridMeasure::point(0.0), GridMeasure::point(1.5));
        let (c, cost) = optimal_coupling_lp(&p, &q, 2.0).unwrap();
        assert_eq!(c.joint, vec![1.0]);
        assert!((cost - 2.25).abs() < 1e-15);
    }

    #[test]
    fn self_transport_is_diagonal() {
        let m = GridMeasure::new(vec![-1.0, 0.0, 2.0], vec![0.2, 0.3, 0.5]).unwrap();
        let (c, cost) = optimal_coupling_lp(&m, &m, 1.0).unwrap();
        assert!(cost.abs() < 1e-15);
        for i in 0..3 {
            assert!((c.get(i, i) - m.weights()[i]).abs() < 1e-15);
        }
        c.validate(&m, &m).unwrap();
    }

    #[test]
    fn size_cap() {
        let u = GridMeasure::uniform(0.0, 1.0, 101).unwrap();
        assert!(matches!(optimal_coupling_lp(&u, &u, 1.0), Err(Error::Resource(_))));
    }

    #[test]
    fn csv_export() {
        let c = GridMeasure::new(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap();
        let (plan, _) = optimal_coupling_lp(&c, &GridMeasure::point(0.0), 1.0).unwrap();
        let mut buf = Vec::new();
        plan.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "i,j,xi,yj,w\n0,0,0.0,0.0,0.5\n1,0,1.0,0.0,0.5\n");
    }

    #[test]
    fn monotone_coupling_is_valid() {
        let a = GridMeasure::new(vec![0.0, 1.0, 3.0], vec![0.2, 0.5, 0.3]).unwrap();
        let b = GridMeasure::new(vec![-1.0, 2.0], vec![0.6, 0.4]).unwrap();
        let c = Coupling::monotone(&a, &b);
        c.validate(&a, &b).unwrap();
        assert!((c.cost(1.0) - wasserstein(&a, &b, 1.0).unwrap()).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(60))]

        #[test]
        fn lp_matches_quantile_coupling(a in arb_measure(20), b in arb_measure(20), alpha in prop::sample::select(vec![1.0, 1.5, 2.0])) {
            let sol = solve_transport(&a, &b, alpha).unwrap();
            sol.coupling.validate(&a, &b).unwrap();
            let q = wasserstein(&a, &b, alpha).unwrap();
            prop_assert!((sol.cost.powf(1.0 / alpha) - q).abs() < 1e-9);
            // dual prices are feasible and close the gap
            for (i, x) in a.atoms().iter().enumerate() {
                for (j, y) in b.atoms().iter().enumerate() {
                    prop_assert!(sol.row_prices[i] + sol.col_prices[j] <= (x - y).abs().powf(alpha) + 1e-9);
                }
            }
            let dual: f64 = a.weights().iter().zip(&sol.row_prices).map(|(w, u)| w * u).sum::<f64>()
                + b.weights().iter().zip(&sol.col_prices).map(|(w, v)| w * v).sum::<f64>();
            prop_assert!((dual - sol.cost).abs() < 1e-9);
        }
    }
}
