//! Uncertainty-relation checks and the constants they use.
//!
//! Every check yields a [`VerificationReport`] whose pass flag is recomputable
//! from `lhs`, `rhs` and `tolerance` alone. Reports built from estimator lower
//! bounds never claim a violation; a failed comparison is labelled
//! inconclusive instead.

mod demo;
mod relations;
mod suite;

pub use demo::{demonstrate_sharp_marginal_divergence, DivergenceDemo, DivergenceTrace, TentWitness, WindowCapture};
pub use relations::{
    verify_connections, verify_covariant_error_ur, verify_covariant_metric_ur, verify_metric_ur, verify_noise_ur,
    verify_overall_width_ur, verify_preparation_ur, verify_pushforward_joint_ur, ConnectionInstance, MetricFactor,
};
pub use suite::{random_instances, run_suite, SuiteOptions, PREPARATION_PAIRS};

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::state::{ground_state_with, Grid, GroundState, GroundStateOptions};

/// Uffink's constant `K(ε₁, ε₂) = (√((1−ε₁)(1−ε₂)) − √(ε₁ε₂))²`.
#[allow(non_snake_case)]
pub fn K(eps1: f64, eps2: f64) -> Result<f64> {
    check_eps_pair(eps1, eps2)?;
    Ok((((1.0 - eps1) * (1.0 - eps2)).sqrt() - (eps1 * eps2).sqrt()).powi(2))
}

/// The weaker constant `K̃(ε₁, ε₂) = (1 − ε₁ − ε₂)²`.
#[allow(non_snake_case)]
pub fn K_tilde(eps1: f64, eps2: f64) -> Result<f64> {
    check_eps_pair(eps1, eps2)?;
    Ok((1.0 - (eps1 + eps2)).powi(2))
}

fn check_eps_pair(eps1: f64, eps2: f64) -> Result<()> {
    if !(eps1 >= 0.0 && eps2 >= 0.0) {
        return Err(Error::domain(format!("confidence parameters must be >= 0, got ({eps1}, {eps2})")));
    }
    if !(eps1 + eps2 < 1.0) {
        return Err(Error::domain(format!("eps1 + eps2 = {} must be < 1", eps1 + eps2)));
    }
    Ok(())
}

/// `c_αβ = α^{1/β} β^{1/α} (g/(α+β))^{1/α+1/β}` from the ground-state energy `g`.
pub fn c_from_ground_energy(alpha: f64, beta: f64, g: f64) -> f64 {
    (alpha.ln() / beta + beta.ln() / alpha).exp() * (g / (alpha + beta)).powf(1.0 / alpha + 1.0 / beta)
}

/// Symmetric grid with `N` points and equal position and momentum steps
/// `√(2π/N)` (ħ = 1).
pub fn default_ground_grid(n: usize) -> Result<Grid> {
    let half = (2.0 * std::f64::consts::PI * n as f64).sqrt() / 2.0;
    Grid::symmetric(half, n, 1.0)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstantReport {
    pub alpha: f64,
    pub beta: f64,
    pub g: f64,
    pub c: f64,
    pub residual: f64,
    pub boundary_density: f64,
    pub propagation_steps: usize,
    pub refinement_iterations: usize,
    pub grid: Grid,
}

pub fn c_alpha_beta(alpha: f64, beta: f64, grid: &Grid) -> Result<f64> {
    Ok(c_alpha_beta_with(alpha, beta, grid, &GroundStateOptions::default())?.0.c)
}

pub fn c_alpha_beta_with(
    alpha: f64,
    beta: f64,
    grid: &Grid,
    opts: &GroundStateOptions,
) -> Result<(ConstantReport, GroundState)> {
    let gs = ground_state_with(alpha, beta, grid, opts)?;
    let report = ConstantReport {
        alpha,
        beta,
        g: gs.energy,
        c: c_from_ground_energy(alpha, beta, gs.energy),
        residual: gs.residual,
        boundary_density: gs.boundary_density,
        propagation_steps: gs.propagation_steps,
        refinement_iterations: gs.refinement_iterations,
        grid: *gs.state.grid(),
    };
    Ok((report, gs))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Violation,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub relation: String,
    #[serde(with = "float_repr")]
    pub lhs: f64,
    #[serde(with = "float_repr")]
    pub rhs: f64,
    #[serde(with = "float_repr")]
    pub slack: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub verdict: Verdict,
    /// Set when `lhs` is built from estimator lower bounds.
    pub lower_bound_inputs: bool,
    pub lhs_infinite: bool,
    pub inputs: Value,
    pub inputs_hash: String,
    pub seed: u64,
    pub grid: Grid,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl VerificationReport {
    pub(crate) fn new(relation: &str, lhs: f64, rhs: f64, tolerance: f64, grid: &Grid, inputs: Value) -> Self {
        let mut r = Self {
            relation: relation.to_string(),
            lhs,
            rhs,
            slack: lhs - rhs,
            tolerance,
            pass: false,
            verdict: Verdict::Violation,
            lower_bound_inputs: false,
            lhs_infinite: lhs == f64::INFINITY,
            inputs,
            inputs_hash: String::new(),
            seed: 0,
            grid: *grid,
            note: None,
        };
        r.refresh();
        r
    }

    pub(crate) fn lower_bound(mut self, yes: bool) -> Self {
        self.lower_bound_inputs = yes;
        self.refresh();
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.refresh();
        self
    }

    pub(crate) fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Pass flag and verdict as implied by `lhs`, `rhs`, `tolerance` and the
    /// bound direction of the inputs.
    pub fn expected_verdict(&self) -> Verdict {
        if self.slack >= -self.tolerance {
            Verdict::Pass
        } else if self.lower_bound_inputs {
            Verdict::Inconclusive
        } else {
            Verdict::Violation
        }
    }

    fn refresh(&mut self) {
        self.pass = self.slack >= -self.tolerance;
        self.verdict = self.expected_verdict();
        self.inputs_hash = inputs_hash(&self.relation, &self.inputs, &self.grid, self.seed);
    }
}

fn inputs_hash(relation: &str, inputs: &Value, grid: &Grid, seed: u64) -> String {
    let canonical = serde_json::json!({ "relation": relation, "inputs": inputs, "grid": grid, "seed": seed });
    hex::encode(Sha256::digest(canonical.to_string().as_bytes()))
}

/// Finite floats as JSON numbers, infinities and NaN as strings.
mod float_repr {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("not a float: {other}"))),
            },
        }
    }
}

pub fn write_reports_json<W: Write>(mut w: W, reports: &[VerificationReport]) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, reports)?;
    writeln!(w)?;
    Ok(())
}

pub fn read_reports_json(path: &Path) -> Result<Vec<VerificationReport>> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// CSV summary: one row per report, grid as `x0;dx;N;hbar`.
pub fn write_reports_csv<W: Write>(w: W, reports: &[VerificationReport]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "relation",
        "lhs",
        "rhs",
        "slack",
        "tolerance",
        "pass",
        "verdict",
        "inputs_hash",
        "seed",
        "grid",
    ])?;
    for r in reports {
        let verdict = serde_json::to_value(r.verdict)?;
        out.write_record([
            r.relation.clone(),
            r.lhs.to_string(),
            r.rhs.to_string(),
            r.slack.to_string(),
            r.tolerance.to_string(),
            r.pass.to_string(),
            verdict.as_str().unwrap_or_default().to_string(),
            r.inputs_hash.clone(),
            r.seed.to_string(),
            format!("{};{};{};{}", r.grid.x0, r.grid.dx, r.grid.n, r.grid.hbar),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::ground::tests::dense_lowest;
    use serde_json::json;

    #[test]
    fn k_constants() {
        assert!((K(0.05, 0.05).unwrap() - 0.81).abs() < 1e-15);
        assert_eq!(K(0.0, 0.0).unwrap(), 1.0);
        assert_eq!(K_tilde(0.0, 0.0).unwrap(), 1.0);
        let k = ((0.9f64 * 0.8).sqrt() - (0.1f64 * 0.2).sqrt()).powi(2);
        assert!((K(0.1, 0.2).unwrap() - k).abs() < 1e-15);
        assert!((K_tilde(0.1, 0.2).unwrap() - 0.49).abs() < 1e-15);
        assert!(K(0.1, 0.2).unwrap() >= K_tilde(0.1, 0.2).unwrap());
        assert!(K(0.5, 0.5).is_err() && K_tilde(0.7, 0.4).is_err() && K(-0.1, 0.2).is_err());
    }

    #[test]
    fn k_dominates_k_tilde_on_lattice() {
        for i in 0..10 {
            for j in 0..5 {
                let (e1, e2) = (0.045 * i as f64, 0.09 * j as f64);
                assert!(K(e1, e2).unwrap() >= K_tilde(e1, e2).unwrap() - 1e-15);
            }
            let e = 0.045 * i as f64;
            assert!((K(e, e).unwrap() - (1.0 - 2.0 * e).powi(2)).abs() <= 4.0 * f64::EPSILON);
        }
    }

    #[test]
    fn c_formula() {
        assert_eq!(c_from_ground_energy(2.0, 2.0, 1.0), 0.5);
        let g = Grid::symmetric(12.0, 1024, 1.0).unwrap();
        assert!((c_alpha_beta(2.0, 2.0, &g).unwrap() - 0.5).abs() < 1e-6);
    }

    #[test]
    fn c11_matches_dense_oracle() {
        let g = Grid::symmetric(16.0, 256, 1.0).unwrap();
        let opts = GroundStateOptions { boundary_limit: 1.0, ..Default::default() };
        let (rep, _) = c_alpha_beta_with(1.0, 1.0, &g, &opts).unwrap();
        let dense = c_from_ground_energy(1.0, 1.0, dense_lowest(1.0, 1.0, &g));
        assert!((rep.c - dense).abs() < 1e-5, "{} vs {dense}", rep.c);
    }

    #[test]
    fn verdict_semantics() {
        let g = Grid::symmetric(4.0, 64, 1.0).unwrap();
        let r = VerificationReport::new("x", 1.0, 2.0, 0.1, &g, json!({}));
        assert_eq!((r.pass, r.verdict), (false, Verdict::Violation));
        let r = r.lower_bound(true);
        assert_eq!(r.verdict, Verdict::Inconclusive);
        let r = VerificationReport::new("x", 1.95, 2.0, 0.1, &g, json!({}));
        assert!(r.pass && r.verdict == Verdict::Pass);
        assert_eq!(r.pass, r.slack >= -r.tolerance);
    }

    #[test]
    fn infinite_lhs_round_trips() {
        let g = Grid::symmetric(4.0, 64, 1.0).unwrap();
        let r = VerificationReport::new("x", f64::INFINITY, 0.3, 0.0, &g, json!({"a": 1}));
        assert!(r.pass && r.lhs_infinite);
        let mut buf = Vec::new();
        write_reports_json(&mut buf, std::slice::from_ref(&r)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("\"inf\""));
        let back: Vec<VerificationReport> = serde_json::from_str(&text).unwrap();
        assert_eq!(back[0], r);
        let mut csv = Vec::new();
        write_reports_csv(&mut csv, &back).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 2);
    }
}
